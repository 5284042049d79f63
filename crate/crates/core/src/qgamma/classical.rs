//! Classical gamma oracle and the q-free limits of the q-gamma identities.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::{a_positive, b_below_one, beta_strip, strip_params};
use crate::error::{Error, Result};
use crate::identities::sampling::micros_text;
use crate::identities::{Constraint, Draw, IdentityEntry};
use crate::param::{ParamExpr, QPoint, Resolved};
use crate::qcore::{accelerate, AccelKind};
use crate::real::{PrecisionCtx, Real};
use crate::series::SeriesValue;

/// Terms fed to the raw-with-tail bracket of each classical series.
const BRACKET_TERMS: usize = 2000;
/// Relative disagreement between Levin and the bracket that voids the
/// Levin error estimate.
const BRACKET_REL: f64 = 1e-2;
/// Best tolerance the accelerated classical series are trusted to.
pub(crate) const CLASSICAL_FLOOR: f64 = 1e-10;

/// Spouge coefficients `c_0 .. c_{a-1}` for one working precision.
struct Spouge {
    a: i64,
    coeffs: Vec<Real>,
}

fn spouge(bits: usize, digits: u32) -> Arc<Spouge> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Spouge>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(s) = cache.lock().expect("spouge cache").get(&bits) {
        return s.clone();
    }
    // relative error below (2π)^{-(a+1/2)}
    let a = (digits as f64 * std::f64::consts::LN_10 / (2.0 * std::f64::consts::PI).ln()).ceil() as i64 + 1;
    let wb = 2 * bits + 32;
    let two_pi = Real::pi(wb) * 2;
    let mut coeffs = vec![two_pi.sqrt()];
    let mut fact = Real::from_i64(1, wb);
    for k in 1..a {
        if k > 1 {
            fact *= Real::from_i64(k - 1, wb);
        }
        let base = Real::from_i64(a - k, wb);
        let half = Real::from_i64(2 * k - 1, wb) / Real::from_i64(2, wb);
        let mut c = base.pow(&half) * Real::from_i64(a - k, wb).exp() / &fact;
        if k % 2 == 0 {
            c = -c;
        }
        coeffs.push(c);
    }
    let s = Arc::new(Spouge { a, coeffs });
    cache.lock().expect("spouge cache").insert(bits, s.clone());
    s
}

/// `Γ(z+1)` for `z + a > 0`.
fn spouge_shifted(z: &Real, ctx: &PrecisionCtx) -> Real {
    let bits = ctx.bits();
    let digits = ctx.digits() + ctx.guard_digits() + 2;
    let s = spouge(bits, digits);
    let wb = 2 * bits + 32;
    let z = z.with_bits(wb);
    let mut sum = s.coeffs[0].clone();
    for (k, c) in s.coeffs.iter().enumerate().skip(1) {
        sum += c / &(&z + k as i64);
    }
    let za = &z + s.a;
    let half = Real::from_i64(1, wb) / Real::from_i64(2, wb);
    let pre = za.pow(&(&z + &half)) * (-(&z + s.a)).exp();
    (pre * sum).with_bits(bits)
}

/// `Γ(x)` for real `x` off the non-positive integers, via Spouge's formula
/// with reflection below `1/2`.
pub fn classical_gamma(x: &Real, ctx: &PrecisionCtx) -> Result<Real> {
    if !x.is_finite() {
        return Err(Error::Domain("gamma argument is not finite".into()));
    }
    let x = x.with_bits(ctx.bits());
    let half = ctx.real(0.5);
    if x >= half {
        return Ok(spouge_shifted(&(&x - 1), ctx));
    }
    if x <= ctx.zero() && x.round() == x {
        return Err(Error::Pole(format!("gamma pole at {}", x.to_sci_string(6))));
    }
    let wide = ctx.with_extra_digits(10)?;
    let xw = x.with_bits(wide.bits());
    let pi = wide.pi();
    let s = (&pi * &xw).sin();
    if s.is_zero() {
        return Err(Error::Pole(format!("gamma pole at {}", x.to_sci_string(6))));
    }
    let g = spouge_shifted(&(-&xw), &wide);
    Ok((pi / (s * g)).with_bits(ctx.bits()))
}

fn gamma_quotient(num: &[Real], den: &[Real], ctx: &PrecisionCtx) -> Result<Real> {
    let mut acc = ctx.one();
    for x in num {
        acc *= classical_gamma(x, ctx)?;
    }
    for x in den {
        acc /= classical_gamma(x, ctx)?;
    }
    Ok(acc)
}

/// `Σ_{n≥0} (u)_n/n! · w(n)` with positive power-law decay, estimated by
/// Levin u and checked against a raw partial sum with a fitted tail.
fn pochhammer_series(u: &Real, w: impl Fn(i64, &Real) -> Real, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let bits = ctx.bits() + 64;
    let u = u.with_bits(bits);
    let mut ratio = Real::from_i64(1, bits);
    let mut terms = Vec::with_capacity(BRACKET_TERMS);
    for n in 0..BRACKET_TERMS as i64 {
        if n > 0 {
            ratio = ratio * (&u + (n - 1)) / Real::from_i64(n, bits);
        }
        terms.push(&ratio * &w(n, &u));
    }
    let levin = accelerate(&terms, AccelKind::LevinU)?;
    let bracket = accelerate(&terms, AccelKind::RawWithTail)?;
    let diff = (&levin.value - &bracket.value).abs();
    let scale = levin.value.abs();
    let mut out = SeriesValue {
        value: levin.value.with_bits(ctx.bits()),
        err_estimate: levin.err_estimate.with_bits(ctx.bits()),
        terms_used: BRACKET_TERMS,
        certified: false,
    };
    if diff.to_f64() > BRACKET_REL * scale.to_f64() {
        out.err_estimate = diff.with_bits(ctx.bits());
    }
    Ok(out)
}

fn get(p: &Resolved, name: &str) -> Result<Real> {
    p.get(name).cloned()
}

fn lhs_5_5(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let (b, z) = (get(p, "b")?, get(p, "z")?);
    let v = gamma_quotient(&[1 - &b, &(&b + 1) - &z], &[1 - &z], ctx)?;
    Ok(SeriesValue::rounded(v))
}

fn rhs_5_5(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let (b, z) = (get(p, "b")?, get(p, "z")?);
    let y = &b - &z;
    pochhammer_series(&b, |n, _| y.with_bits(ctx.bits() + 64) / (&y + n), ctx)
}

fn lhs_5_6(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let (x, y) = (get(p, "x")?, get(p, "y")?);
    let v = gamma_quotient(&[x.clone(), y.clone()], &[&x + &y], ctx)?;
    Ok(SeriesValue::rounded(v))
}

/// `∏_{k=1}^n (k-x) / n! = (1-x)_n / n!`.
fn rhs_5_6(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let (x, y) = (get(p, "x")?, get(p, "y")?);
    let y = y.with_bits(ctx.bits() + 64);
    pochhammer_series(&(1 - &x), |n, _| (&y + n).recip(), ctx)
}

fn lhs_5_7(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let (a, b, z) = (get(p, "a")?, get(p, "b")?, get(p, "z")?);
    let ba = &b - &a;
    let v = gamma_quotient(
        &[a.clone(), z.clone(), 1 - &a, &ba - &z],
        &[&a + &z, ba.clone(), 1 - &(&a + &z)],
        ctx,
    )?;
    Ok(SeriesValue::rounded(v))
}

fn rhs_5_7(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let (a, b, z) = (get(p, "a")?, get(p, "b")?, get(p, "z")?);
    let z = z.with_bits(ctx.bits() + 64);
    pochhammer_series(&(&b - &a), |n, _| (&z + n).recip(), ctx)
}

/// `π^{3/2} / (2√2 Γ(3/4)^2)`, which equals `∫_0^1 (1-x^4)^{-1/2} dx`.
pub fn lemniscate_constant(ctx: &PrecisionCtx) -> Result<Real> {
    let pi = ctx.pi();
    let g = classical_gamma(&ctx.real(0.75), ctx)?;
    Ok(&pi * &pi.sqrt() / (2 * &ctx.int(2).sqrt() * g.powi(2)))
}

fn lhs_5_9(_: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    Ok(SeriesValue::rounded(lemniscate_constant(ctx)?))
}

fn rhs_5_9(_: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    pochhammer_series(
        &ctx.real(0.5),
        |n, u| (Real::from_i64(4 * n + 1, u.bits())).recip(),
        ctx,
    )
}

fn lhs_5_12(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let (a, b, z) = (get(p, "a")?, get(p, "b")?, get(p, "z")?);
    let ba = &b - &a;
    let v = gamma_quotient(
        &[b.clone(), 1 - &a, z.clone(), &ba - &z],
        &[&a + &z, 1 - &(&a + &z)],
        ctx,
    )?;
    Ok(SeriesValue::rounded(v))
}

fn rhs_5_12(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let (a, b, z) = (get(p, "a")?, get(p, "b")?, get(p, "z")?);
    let ba = &b - &a;
    let first = gamma_quotient(&[1 - &a, &ba - &z], &[1 - &z, 1 - &b], ctx)?;
    let second = gamma_quotient(&[b.clone(), z.clone()], &[a.clone(), &(&a + 1) + &(&z - &b)], ctx)?;
    let beta = gamma_quotient(&[ba.clone(), 1 - &ba], &[], ctx)?;
    Ok(SeriesValue::rounded((first + second) * beta))
}

fn sample_b_z(d: &mut Draw<'_>) -> QPoint {
    let bm = d.micros(0.15, 0.95);
    let zm = d.int(50_000, bm - 50_000);
    QPoint::new(None)
        .with("b", ParamExpr::literal(micros_text(bm)))
        .with("z", ParamExpr::literal(micros_text(zm)))
}

fn sample_x_y(d: &mut Draw<'_>) -> QPoint {
    QPoint::new(None)
        .with("x", d.literal(0.05, 0.95))
        .with("y", d.literal(0.05, 3.0))
}

fn sample_strip(d: &mut Draw<'_>) -> QPoint {
    strip_params(d, QPoint::new(None))
}

fn positive(name: &'static str) -> Constraint {
    Constraint::new(format!("0 < {name}"), move |p, _| get(p, name))
}

pub(crate) fn a_plus_z_below_one() -> Constraint {
    Constraint::new("a+z < 1", |p, _| Ok(1 - &(get(p, "a")? + get(p, "z")?)))
}

/// The five classical (q-free) identities.
pub fn classical_limit_identities() -> Vec<IdentityEntry> {
    vec![
        IdentityEntry::new(
            "eq-5.5",
            "gamma quotient as a Pochhammer series, a = 0 limit",
            "G(1-b)G(b+1-z)/G(1-z) = sum (b)_n/n! (b-z)/(b-z+n)",
            lhs_5_5,
            rhs_5_5,
            sample_b_z,
        )
        .constraints([
            positive("z"),
            Constraint::new("z < b", |p, _| Ok(get(p, "b")? - get(p, "z")?)),
            b_below_one(),
        ])
        .tolerance_floor(CLASSICAL_FLOOR),
        IdentityEntry::new(
            "eq-5.6",
            "beta function series",
            "B(x,y) = sum prod_{k=1}^n (k-x)/n! 1/(n+y)",
            lhs_5_6,
            rhs_5_6,
            sample_x_y,
        )
        .constraints([
            positive("x"),
            Constraint::new("x < 1", |p, _| Ok(1 - &get(p, "x")?)),
            positive("y"),
        ])
        .tolerance_floor(CLASSICAL_FLOOR),
        IdentityEntry::new(
            "eq-5.7",
            "gamma quotient as a series in (b-a)_n/(n!(n+z))",
            "G(a)G(z)G(1-a)G(b-a-z)/(G(a+z)G(b-a)G(1-a-z)) = sum (b-a)_n/(n!(n+z))",
            lhs_5_7,
            rhs_5_7,
            sample_strip,
        )
        .constraints(beta_strip())
        .constraints([a_positive(), a_plus_z_below_one()])
        .tolerance_floor(CLASSICAL_FLOOR),
        IdentityEntry::new(
            "eq-5.9",
            "lemniscate-type constant as a Pochhammer series",
            "pi^(3/2)/(2 sqrt2 G(3/4)^2) = sum (1/2)_n/(n!(4n+1))",
            lhs_5_9,
            rhs_5_9,
            |_| QPoint::new(None),
        )
        .tolerance_floor(CLASSICAL_FLOOR),
        IdentityEntry::new(
            "eq-5.12",
            "gamma quotient against a beta value, q -> 1 limit of the integral form",
            "G(b)G(1-a)G(z)G(b-a-z)/(G(a+z)G(1-a-z)) = [G(1-a)G(b-a-z)/(G(1-z)G(1-b)) + G(b)G(z)/(G(a)G(a+1+z-b))] B(b-a,a-b+1)",
            lhs_5_12,
            rhs_5_12,
            sample_strip,
        )
        .constraints(beta_strip())
        .constraints([a_positive(), b_below_one()])
        .tolerance_floor(CLASSICAL_FLOOR),
    ]
}

/// Both readings of the lemniscate-type series, side by side.
#[derive(Debug, Clone)]
pub struct LemniscateCheck {
    /// `Σ (1/2)_n/(n!(4n+1))`.
    pub printed_series: SeriesValue,
    /// `π^{3/2}/(2√2 Γ(3/4)^2)`.
    pub printed_closed: Real,
    /// `Σ (3/4)_n/(n!(n+1/2))`, the direct substitution `a=1/4, b=1, z=1/2`.
    pub substitution_series: SeriesValue,
    /// `Γ(1/4)Γ(1/2)/Γ(3/4)`.
    pub substitution_closed: Real,
    /// `∫_0^1 (1-x^4)^{-1/2} dx` by composite Simpson after `x = 1-u^2`.
    pub quadrature: f64,
}

/// Smooth form of `∫_0^1 (1-x^4)^{-1/2} dx`: with `x = 1-u^2` the integrand
/// becomes `2/√((1+x)(1+x^2))` on `u ∈ [0,1]`.
pub fn lemniscate_quadrature(panels: usize) -> f64 {
    let n = panels.max(2) & !1;
    let h = 1.0 / n as f64;
    let f = |u: f64| {
        let x = 1.0 - u * u;
        2.0 / ((1.0 + x) * (1.0 + x * x)).sqrt()
    };
    let mut s = f(0.0) + f(1.0);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * h);
    }
    s * h / 3.0
}

pub fn lemniscate_substitution_check(ctx: &PrecisionCtx) -> Result<LemniscateCheck> {
    let printed_series = rhs_5_9(&Resolved::default(), ctx)?;
    let printed_closed = lemniscate_constant(ctx)?;
    let half = ctx.real(0.5);
    let substitution_series = pochhammer_series(
        &ctx.real(0.75),
        |n, u| (&half.with_bits(u.bits()) + n).recip(),
        ctx,
    )?;
    let substitution_closed = gamma_quotient(&[ctx.real(0.25), half.clone()], &[ctx.real(0.75)], ctx)?;
    Ok(LemniscateCheck {
        printed_series,
        printed_closed,
        substitution_series,
        substitution_closed,
        quadrature: lemniscate_quadrature(20_000),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identities::Registry;

    fn ctx() -> PrecisionCtx {
        PrecisionCtx::new(40).unwrap()
    }

    fn close(a: &Real, b: &Real, tol: f64) -> bool {
        ((a - b) / b).abs().to_f64() < tol
    }

    #[test]
    fn gamma_values() {
        let c = ctx();
        assert!(close(&classical_gamma(&c.one(), &c).unwrap(), &c.one(), 1e-38));
        assert!(close(&classical_gamma(&c.int(5), &c).unwrap(), &c.int(24), 1e-38));
        let rpi = c.pi().sqrt();
        assert!(close(&classical_gamma(&c.real(0.5), &c).unwrap(), &rpi, 1e-38));
        // Γ(-1/2) = -2√π
        assert!(close(
            &classical_gamma(&c.real(-0.5), &c).unwrap(),
            &(-2 * &rpi),
            1e-38
        ));
        let g14 = c.parse("3.625609908221908311930685155867672002995").unwrap();
        assert!(close(&classical_gamma(&c.real(0.25), &c).unwrap(), &g14, 1e-38));
        for x in [0, -1, -3] {
            assert!(matches!(classical_gamma(&c.int(x), &c), Err(Error::Pole(_))));
        }
    }

    #[test]
    fn gamma_high_precision() {
        let c = PrecisionCtx::new(100).unwrap();
        let g = classical_gamma(&c.real(0.5), &c).unwrap();
        assert!(close(&g, &c.pi().sqrt(), 1e-98));
    }

    fn registry() -> Registry {
        let mut r = Registry::new();
        for e in classical_limit_identities() {
            r.register(e).unwrap();
        }
        r
    }

    #[test]
    fn beta_series_at_half() {
        let c = ctx();
        let p = QPoint::new(None)
            .set("x", "0.5")
            .unwrap()
            .set("y", "0.5")
            .unwrap();
        let res = registry().eval("eq-5.6", &p, 1e-25, &c).unwrap();
        assert!(res.pass);
        assert!(close(&res.rhs, &c.pi(), 1e-10));
    }

    #[test]
    fn lemniscate_forms() {
        let c = ctx();
        let chk = lemniscate_substitution_check(&c).unwrap();
        let target = c.parse("1.311028777146059905232419794945559706841").unwrap();
        assert!(close(&chk.printed_closed, &target, 1e-38));
        assert!(close(&chk.printed_series.value, &target, 1e-10));
        assert!((chk.quadrature - 1.3110287771460599).abs() < 1e-12);
        let sub = c.parse("5.244115108584239620929679179782238827365").unwrap();
        assert!(close(&chk.substitution_closed, &sub, 1e-38));
        assert!(close(&chk.substitution_series.value, &sub, 1e-10));
    }

    #[test]
    fn closed_beta_form() {
        let c = ctx();
        let p = QPoint::new(None)
            .set("a", "0.1")
            .unwrap()
            .set("b", "0.7")
            .unwrap()
            .set("z", "0.25")
            .unwrap();
        let res = registry().eval("eq-5.12", &p, 1e-25, &c).unwrap();
        assert!(res.pass, "{}", res.rel_err);
    }
}
