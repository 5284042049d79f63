//! Jackson q-integrals over `[0, a]` and `[0, ∞)`.

use crate::error::{Error, Result};
use crate::qcore::{check_nome, pochhammer_inf};
use crate::real::{PrecisionCtx, Real};
use crate::series::SeriesValue;

/// Number of trailing term ratios inspected for the tail bound.
const RATIO_WINDOW: usize = 4;
/// Terms after which persistently non-decaying ratios count as divergence.
const DIVERGENCE_AFTER: usize = 200;

type PointFn<'a> = Box<dyn Fn(&Real) -> Result<Real> + Send + Sync + 'a>;

/// An integrand with an optional closed support interval; grid points
/// outside the support contribute exactly zero.
pub struct QIntegrand<'a> {
    f: PointFn<'a>,
    lo: Option<Real>,
    hi: Option<Real>,
}

impl<'a> QIntegrand<'a> {
    pub fn new(f: impl Fn(&Real) -> Result<Real> + Send + Sync + 'a) -> Self {
        QIntegrand {
            f: Box::new(f),
            lo: None,
            hi: None,
        }
    }

    pub fn with_support(mut self, lo: Option<Real>, hi: Option<Real>) -> Self {
        self.lo = lo;
        self.hi = hi;
        self
    }

    pub fn in_support(&self, t: &Real) -> bool {
        self.lo.as_ref().is_none_or(|lo| t >= lo) && self.hi.as_ref().is_none_or(|hi| t <= hi)
    }

    pub fn eval(&self, t: &Real) -> Result<Real> {
        if self.in_support(t) {
            (self.f)(t)
        } else {
            Ok(Real::zero(t.bits()))
        }
    }
}

/// First `n` grid points `a q^k` and weights `a (1-q) q^k`.
pub fn jackson_grid(a: &Real, q: &Real, n: usize, ctx: &PrecisionCtx) -> Result<Vec<(Real, Real)>> {
    check_nome(q)?;
    let q = q.with_bits(ctx.bits());
    let mut t = a.with_bits(ctx.bits());
    let mut w = &t * &(1 - &q);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push((t.clone(), w.clone()));
        t *= &q;
        w *= &q;
    }
    Ok(out)
}

/// `Σ_k w_k f(t_k)` along a geometric grid, with a tail bound taken from the
/// observed term ratios. Certified when the last ratios are non-increasing.
fn grid_sum(
    eval: &mut dyn FnMut(&Real) -> Result<Real>,
    beyond: &dyn Fn(&Real) -> bool,
    start: Real,
    weight: Real,
    step: Real,
    ctx: &PrecisionCtx,
) -> Result<SeriesValue> {
    let tol = ctx.tail_rel_tol();
    let eps = ctx.epsilon();
    let mut t = start;
    let mut w = weight;
    let mut sum = ctx.zero();
    let mut abs_sum = ctx.zero();
    let mut prev: Option<f64> = None;
    let mut ratios: Vec<f64> = Vec::new();
    let mut n = 0usize;
    loop {
        if beyond(&t) {
            let err = &abs_sum * &ctx.real(eps * (4 * n + 1) as f64);
            return Ok(SeriesValue {
                value: sum,
                err_estimate: err,
                terms_used: n,
                certified: true,
            });
        }
        let term = eval(&t)? * &w;
        if !term.is_finite() {
            return Err(Error::Breakdown("non-finite integrand value on the grid".into()));
        }
        n += 1;
        let mag = term.log10_abs();
        abs_sum += term.abs();
        sum += &term;
        if let (Some(p), true) = (prev, mag.is_finite()) {
            ratios.push(10f64.powf(mag - p));
        }
        if mag.is_finite() {
            prev = Some(mag);
        }
        if ratios.len() >= RATIO_WINDOW {
            let recent = &ratios[ratios.len() - RATIO_WINDOW..];
            let rho = recent.iter().cloned().fold(0.0, f64::max);
            if rho < 1.0 {
                let bound = 10f64.powf(mag) * rho / (1.0 - rho);
                let scale = sum.abs().to_f64();
                if bound < tol * scale || bound < eps * abs_sum.to_f64() {
                    let monotone = recent.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-12));
                    let err = ctx.real(bound) + &abs_sum * &ctx.real(eps * (4 * n + 1) as f64);
                    return Ok(SeriesValue {
                        value: sum,
                        err_estimate: err,
                        terms_used: n,
                        certified: monotone,
                    });
                }
            } else if n > DIVERGENCE_AFTER {
                return Err(Error::NonConvergence(format!(
                    "term ratios stayed at or above 1 (last {:.6}) after {n} terms",
                    recent[RATIO_WINDOW - 1]
                )));
            }
        }
        if n >= ctx.max_terms() {
            return Err(match ratios.last() {
                Some(r) if *r >= 1.0 => {
                    Error::NonConvergence(format!("term ratio {r:.6} at the term cap {n}"))
                }
                _ => Error::CapExceeded {
                    what: "jackson_integral",
                    terms: n,
                },
            });
        }
        t = &t * &step;
        w = &w * &step;
    }
}

/// `∫_0^a f d_q t = a (1-q) Σ_{n≥0} f(a q^n) q^n`.
pub fn jackson_integral_finite(
    f: &QIntegrand<'_>,
    a: &Real,
    q: &Real,
    ctx: &PrecisionCtx,
) -> Result<SeriesValue> {
    check_nome(q)?;
    if !a.is_positive() {
        return Err(Error::Domain("upper limit a must be positive".into()));
    }
    let q = q.with_bits(ctx.bits());
    let a = a.with_bits(ctx.bits());
    let w = &a * &(1 - &q);
    grid_sum(&mut |t| f.eval(t), &|t| below_support(f, t), a, w, q, ctx)
}

fn below_support(f: &QIntegrand<'_>, t: &Real) -> bool {
    f.lo.as_ref().is_some_and(|lo| t < lo)
}

fn above_support(f: &QIntegrand<'_>, t: &Real) -> bool {
    f.hi.as_ref().is_some_and(|hi| t > hi)
}

/// `∫_0^a Π_i (t u_i;q)_∞ / Π_j (t v_j;q)_∞ · t^s d_q t`.
///
/// Only the first grid point evaluates full products. Moving from `t` to
/// `tq` multiplies the ratio by `Π_j (1 - t v_j) / Π_i (1 - t u_i)`.
pub fn jackson_product_integral(
    upper: &[Real],
    lower: &[Real],
    s: &Real,
    a: &Real,
    q: &Real,
    ctx: &PrecisionCtx,
) -> Result<SeriesValue> {
    check_nome(q)?;
    if !a.is_positive() {
        return Err(Error::Domain("upper limit a must be positive".into()));
    }
    let bits = ctx.bits();
    let q = q.with_bits(bits);
    let a = a.with_bits(bits);
    let upper: Vec<Real> = upper.iter().map(|u| u.with_bits(bits)).collect();
    let lower: Vec<Real> = lower.iter().map(|v| v.with_bits(bits)).collect();
    let mut ratio = ctx.one();
    let mut rel = 0.0;
    for u in &upper {
        let p = pochhammer_inf(&(&a * u), &q, ctx)?;
        rel += p.err_estimate.to_f64() / p.value.abs().to_f64();
        ratio *= &p.value;
    }
    for v in &lower {
        let p = pochhammer_inf(&(&a * v), &q, ctx)?;
        if p.value.is_zero() {
            return Err(Error::Pole("integrand denominator vanishes on the grid".into()));
        }
        rel += p.err_estimate.to_f64() / p.value.abs().to_f64();
        ratio /= &p.value;
    }
    let step_pow = q.pow(s);
    let mut pow = a.pow(s);
    let mut eval = |t: &Real| -> Result<Real> {
        let out = &ratio * &pow;
        let mut num = ctx.one();
        for v in &lower {
            num *= 1 - &(t * v);
        }
        let mut den = ctx.one();
        for u in &upper {
            den *= 1 - &(t * u);
        }
        if den.is_zero() {
            return Err(Error::Breakdown("numerator product vanishes on the grid".into()));
        }
        ratio = &ratio * &num / den;
        pow *= &step_pow;
        Ok(out)
    };
    let w = &a * &(1 - &q);
    let mut sv = grid_sum(&mut eval, &|_| false, a, w, q, ctx)?;
    if rel.is_finite() {
        sv.err_estimate += &(sv.value.abs() * ctx.real(rel));
    }
    Ok(sv)
}

/// `∫_0^∞ f d_q t = (1-q) Σ_{n∈ℤ} f(q^n) q^n`, split at `n = 0`.
pub fn jackson_integral_infinite(f: &QIntegrand<'_>, q: &Real, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    check_nome(q)?;
    let q = q.with_bits(ctx.bits());
    let one_minus = 1 - &q;
    let mut eval = |t: &Real| f.eval(t);
    let lower = grid_sum(
        &mut eval,
        &|t| below_support(f, t),
        ctx.one(),
        one_minus.clone(),
        q.clone(),
        ctx,
    )?;
    let inv = q.recip();
    let upper = grid_sum(
        &mut eval,
        &|t| above_support(f, t),
        inv.clone(),
        &one_minus * &inv,
        inv,
        ctx,
    )?;
    (lower + upper).finish(ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionCtx {
        PrecisionCtx::new(40).unwrap()
    }

    #[test]
    fn finite_examples() {
        let c = ctx();
        let q = c.real(0.5);
        let one = QIntegrand::new(|t: &Real| Ok(Real::from_i64(1, t.bits())));
        let v = jackson_integral_finite(&one, &c.one(), &q, &c).unwrap();
        assert!((v.value - c.one()).abs().to_f64() < 1e-38);
        let id = QIntegrand::new(|t: &Real| Ok(t.clone()));
        let v = jackson_integral_finite(&id, &c.one(), &q, &c).unwrap();
        assert!((v.value - c.int(2) / c.int(3)).abs().to_f64() < 1e-38);
        assert!(v.certified);
        let v = jackson_integral_finite(&id, &c.int(2), &q, &c).unwrap();
        assert!((v.value - c.int(8) / c.int(3)).abs().to_f64() < 1e-38);
    }

    #[test]
    fn infinite_examples() {
        let c = ctx();
        let q = c.real(0.5);
        let cut = QIntegrand::new(|t: &Real| Ok(t.clone())).with_support(None, Some(c.one()));
        let v = jackson_integral_infinite(&cut, &q, &c).unwrap();
        assert!((v.value - c.int(2) / c.int(3)).abs().to_f64() < 1e-38);

        // support (q^2, 1]: only t = 1, q contribute
        let compact = QIntegrand::new(|t: &Real| Ok(t * t + 1))
            .with_support(Some(c.real(0.25) + c.real(1e-30)), Some(c.one()));
        let v = jackson_integral_infinite(&compact, &q, &c).unwrap();
        let expect = c.real(0.5) * (c.int(2) + c.real(1.25) * c.real(0.5));
        assert!((v.value - expect).abs().to_f64() < 1e-38);

        let lorentz = QIntegrand::new(|t: &Real| Ok((t * t + 1).recip()));
        let v = jackson_integral_infinite(&lorentz, &q, &c).unwrap();
        let mut brute = c.zero();
        for n in -200i64..=200 {
            let t = q.powi(n);
            brute += (&t * &t + 1).recip() * &t;
        }
        brute *= c.real(0.5);
        assert!((v.value - brute).abs().to_f64() < 1e-30);
    }

    #[test]
    fn stepped_products_match_direct_evaluation() {
        let c = ctx();
        let q = c.real(0.5);
        let upper = [q.clone(), c.real(0.3)];
        let lower = [c.real(0.7), c.real(0.2)];
        let s = c.real(-0.4);
        let (qq, s2) = (q.clone(), s.clone());
        let (u1, v1, v2) = (upper[1].clone(), lower[0].clone(), lower[1].clone());
        let cc = c.clone();
        let direct = QIntegrand::new(move |t: &Real| {
            let p = |y: Real| pochhammer_inf(&y, &qq, &cc).map(|v| v.value);
            let num = p(t * &qq)? * p(t * &u1)?;
            let den = p(t * &v1)? * p(t * &v2)?;
            Ok(num / den * t.pow(&s2))
        });
        let a = c.real(0.8);
        let d = jackson_integral_finite(&direct, &a, &q, &c).unwrap();
        let r = jackson_product_integral(&upper, &lower, &s, &a, &q, &c).unwrap();
        assert!((d.value - r.value).abs().to_f64() < 1e-35);
    }

    #[test]
    fn divergent_integrand() {
        let c = ctx();
        let blow = QIntegrand::new(|t: &Real| Ok(t.recip().powi(2)));
        assert!(matches!(
            jackson_integral_finite(&blow, &c.one(), &c.real(0.5), &c),
            Err(Error::NonConvergence(_))
        ));
    }
}
