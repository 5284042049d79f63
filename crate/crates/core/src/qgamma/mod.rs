//! q-gamma function, Jackson q-integrals and the q-gamma identities.

mod classical;
mod jackson;

use classical::a_plus_z_below_one;
pub use classical::{
    classical_gamma, classical_limit_identities, lemniscate_constant, lemniscate_quadrature,
    lemniscate_substitution_check, LemniscateCheck,
};
pub use jackson::{
    jackson_grid, jackson_integral_finite, jackson_integral_infinite, jackson_product_integral, QIntegrand,
};

use crate::error::{Error, Result};
use crate::identities::builtin::CANCELLATION_GUARD;
use crate::identities::sampling::micros_text;
use crate::identities::{Constraint, Draw, IdentityEntry};
use crate::param::{ParamExpr, QPoint, Resolved};
use crate::qcore::{check_nome, phi, pochhammer_inf, qpow};
use crate::real::{PrecisionCtx, Real};
use crate::series::SeriesValue;

/// `Γ_q(x) = (q;q)_∞ / (q^x;q)_∞ · (1-q)^{1-x}` for `x > 0`.
pub fn gamma_q(x: &Real, q: &Real, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    check_nome(q)?;
    if !x.is_positive() || !x.is_finite() {
        return Err(Error::Domain(format!(
            "gamma_q needs x > 0, got {}",
            x.to_sci_string(12)
        )));
    }
    let num = pochhammer_inf(q, q, ctx)?;
    let den = pochhammer_inf(&qpow(q, x, ctx)?, q, ctx)?;
    let pow = ((1 - x) * (1 - q).ln()).exp();
    Ok((num / den).scale(&pow))
}

pub(crate) struct Abz {
    pub a: Real,
    pub b: Real,
    pub z: Real,
}

pub(crate) fn abz(p: &Resolved) -> Result<Abz> {
    Ok(Abz {
        a: p.get("a")?.clone(),
        b: p.get("b")?.clone(),
        z: p.get("z")?.clone(),
    })
}

/// `∏ Γ_q(n_i) / ∏ Γ_q(d_j)`.
fn gamma_q_quotient(num: &[Real], den: &[Real], q: &Real, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let mut acc = SeriesValue::exact(ctx.one());
    for x in num {
        acc = acc * gamma_q(x, q, ctx)?;
    }
    for x in den {
        acc = acc / gamma_q(x, q, ctx)?;
    }
    Ok(acc)
}

/// Shared left side `Γq(b)Γq(1-a)Γq(z)Γq(b-a-z) / (Γq(b-a)Γq(a+z)Γq(1-a-z))`.
fn gamma_lhs(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let Abz { a, b, z } = abz(p)?;
    let q = p.q()?;
    let ba = &b - &a;
    gamma_q_quotient(
        &[b.clone(), 1 - &a, z.clone(), &ba - &z],
        &[ba.clone(), &a + &z, 1 - &(&a + &z)],
        q,
        ctx,
    )
}

fn qp(q: &Real, e: &Real, ctx: &PrecisionCtx) -> Result<Real> {
    qpow(q, e, ctx)
}

/// `(1-q)^{a+1-b}`.
fn edge(a: &Real, b: &Real, q: &Real) -> Real {
    ((a + 1 - b) * (1 - q).ln()).exp()
}

fn first_rhs(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let Abz { a, b, z } = abz(p)?;
    let q = p.q()?;
    let e = edge(&a, &b, q);
    let ba = &b - &a;
    let g1 = gamma_q_quotient(&[b.clone(), z.clone()], &[ba.clone(), &a + &z], q, ctx)?;
    let s1 = phi(
        &[qp(q, &(&(&a + 1) + &(&z - &b)), ctx)?, qp(q, &a, ctx)?],
        &[qp(q, &(&a + &z), ctx)?],
        q,
        &qp(q, &ba, ctx)?,
        ctx,
    )?;
    let g2 = gamma_q_quotient(&[1 - &a, &ba - &z], &[1 - &b, &(&ba + 1) - &z], q, ctx)?;
    let s2 = phi(
        &[qp(q, &ba, ctx)?, qp(q, &(&ba - &z), ctx)?],
        &[qp(q, &(&(&ba + 1) - &z), ctx)?],
        q,
        &qp(q, &(1 - &b), ctx)?,
        ctx,
    )?;
    let es = SeriesValue::rounded(e.clone());
    Ok((g1 * s1).scale(&e) - es + g2 * s2)
}

/// The q-form of the beta-type theorem, with the printed `(z)_n` read as
/// `(q^z;q)_n`, the image of `z` under the substitution that produces it.
fn second_rhs(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let Abz { a, b, z } = abz(p)?;
    let q = p.q()?;
    let e = edge(&a, &b, q);
    let ba = &b - &a;
    let g1 = gamma_q_quotient(&[b.clone(), z.clone()], &[a.clone(), &z + 1], q, ctx)?;
    let s1 = phi(
        &[qp(q, &ba, ctx)?, qp(q, &z, ctx)?],
        &[qp(q, &(&z + 1), ctx)?],
        q,
        &qp(q, &a, ctx)?,
        ctx,
    )?;
    let g2 = gamma_q_quotient(&[1 - &a, &ba - &z], &[1 - &(&a + &z), ba.clone()], q, ctx)?;
    let s2 = phi(
        &[qp(q, &(1 - &z), ctx)?, qp(q, &(1 - &b), ctx)?],
        &[qp(q, &(1 - &(&a + &z)), ctx)?],
        q,
        &qp(q, &ba, ctx)?,
        ctx,
    )?;
    let es = SeriesValue::rounded(e.clone());
    Ok(g1 * s1 - es + (g2 * s2).scale(&e))
}

/// `(xq)(xq^{u})/((xq^{v})(xq^{w})) x^{b-a-1}`, all products `(·;q)_∞`.
fn integrand(
    q: &Real,
    u: &Real,
    v: &Real,
    w: &Real,
    s: Real,
    ctx: &PrecisionCtx,
) -> Result<QIntegrand<'static>> {
    let q = q.clone();
    let qu = qpow(&q, u, ctx)?;
    let qv = qpow(&q, v, ctx)?;
    let qw = qpow(&q, w, ctx)?;
    let c = ctx.clone();
    let one = ctx.one();
    Ok(QIntegrand::new(move |x: &Real| {
        let p = |y: Real| pochhammer_inf(&y, &q, &c).map(|v| v.value);
        let num = p(x * &q)? * p(x * &qu)?;
        let den = p(x * &qv)? * p(x * &qw)?;
        if den.is_zero() {
            return Err(Error::Pole("integrand denominator vanishes on the grid".into()));
        }
        Ok(num / den * x.pow(&s))
    })
    .with_support(None, Some(one)))
}

fn third_rhs(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    integral_rhs(p, ctx, |q, u, v, w, s| {
        let f = integrand(q, u, v, w, s.clone(), ctx)?;
        jackson_integral_finite(&f, &ctx.one(), q, ctx)
    })
}

/// Same right-hand side, each integral taken with [`jackson_product_integral`].
fn third_rhs_stepped(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    integral_rhs(p, ctx, |q, u, v, w, s| {
        let upper = [q.clone(), qpow(q, u, ctx)?];
        let lower = [qpow(q, v, ctx)?, qpow(q, w, ctx)?];
        jackson_product_integral(&upper, &lower, s, &ctx.one(), q, ctx)
    })
}

/// `integral(q, u, v, w, s)` integrates `integrand(q, u, v, w, s)` over `[0, 1]`.
fn integral_rhs(
    p: &Resolved,
    ctx: &PrecisionCtx,
    integral: impl Fn(&Real, &Real, &Real, &Real, &Real) -> Result<SeriesValue>,
) -> Result<SeriesValue> {
    let Abz { a, b, z } = abz(p)?;
    let q = p.q()?;
    let e = edge(&a, &b, q);
    let ba = &b - &a;
    let s = &ba - 1;
    let int_f = integral(q, &(1 - &(&a + &z)), &(1 - &z), &(1 - &b), &s)?;
    let int_g = integral(q, &(&a + &z), &(&(&a + 1) + &(&z - &b)), &a, &s)?;
    let g1 = gamma_q_quotient(&[1 - &a, &ba - &z], &[ba.clone(), 1 - &z, 1 - &b], q, ctx)?;
    let g2 = gamma_q_quotient(
        &[b.clone(), z.clone()],
        &[ba.clone(), &(&a + 1) + &(&z - &b), a.clone()],
        q,
        ctx,
    )?;
    let es = SeriesValue::rounded(e);
    Ok(g1 * int_f + g2 * int_g - es)
}

/// `0 < z < b-a < 1` with the given extra constraints.
pub(crate) fn beta_strip() -> Vec<Constraint> {
    vec![
        Constraint::new("0 < z", |p, _| p.get("z").cloned()),
        Constraint::new("z < b-a", |p, _| Ok(p.get("b")? - p.get("a")? - p.get("z")?)),
        Constraint::new("b-a < 1", |p, _| Ok(1 - &(p.get("b")? - p.get("a")?))),
    ]
}

pub(crate) fn a_positive() -> Constraint {
    Constraint::new("a > 0", |p, _| p.get("a").cloned())
}

pub(crate) fn b_below_one() -> Constraint {
    Constraint::new("b < 1", |p, _| Ok(1 - p.get("b")?))
}

/// Draws `a`, then `b - a`, then `z` inside the strip, as 6-decimal literals.
pub(crate) fn strip_params(d: &mut Draw<'_>, point: QPoint) -> QPoint {
    let am = d.micros(0.05, 0.5);
    let dm = d.micros(0.1, 0.95);
    let zm = d.int(50_000, dm - 50_000);
    point
        .with("a", ParamExpr::literal(micros_text(am)))
        .with("b", ParamExpr::literal(micros_text(am + dm)))
        .with("z", ParamExpr::literal(micros_text(zm)))
}

fn sample_q_strip(d: &mut Draw<'_>) -> QPoint {
    let q = d.nome(0.1, 0.6);
    strip_params(d, QPoint::new(Some(&q)))
}

/// The three q-gamma theorems.
pub fn register_qgamma_identities() -> Vec<IdentityEntry> {
    vec![
        IdentityEntry::new(
            "thm-5.1",
            "q-gamma quotient from the first 1psi1 transformation",
            "Gq(b)Gq(1-a)Gq(z)Gq(b-a-z)/(Gq(b-a)Gq(a+z)Gq(1-a-z)) = -(1-q)^(a+1-b) + (1-q)^(a+1-b) Gq(b)Gq(z)/(Gq(b-a)Gq(a+z)) 2phi1(q^(a+1+z-b),q^a;q^(a+z);q,q^(b-a)) + Gq(1-a)Gq(b-a-z)/(Gq(1-b)Gq(b+1-a-z)) 2phi1(q^(b-a),q^(b-z-a);q^(b+1-a-z);q,q^(1-b))",
            gamma_lhs,
            first_rhs,
            sample_q_strip,
        )
        .constraints(beta_strip())
        .constraints([
            b_below_one(),
            Constraint::new("a+z > 0", |p, _| Ok(p.get("a")? + p.get("z")?)),
            Constraint::new("b > 0", |p, _| p.get("b").cloned()),
        ])
        .guard_digits(CANCELLATION_GUARD),
        IdentityEntry::new(
            "eq-5.8",
            "q-gamma quotient from the second 1psi1 transformation",
            "Gq(z)Gq(b-a-z)Gq(b)Gq(1-a)/(Gq(a+z)Gq(1-a-z)Gq(b-a)) = -(1-q)^(a+1-b) + Gq(b)Gq(z)/(Gq(a)Gq(z+1)) 2phi1(q^(b-a),q^z;q^(1+z);q,q^a) + (1-q)^(a+1-b) Gq(1-a)Gq(b-a-z)/(Gq(1-a-z)Gq(b-a)) 2phi1(q^(1-z),q^(1-b);q^(1-a-z);q,q^(b-a))",
            gamma_lhs,
            second_rhs,
            sample_q_strip,
        )
        .constraints(beta_strip())
        .constraints([a_positive(), a_plus_z_below_one()])
        .guard_digits(CANCELLATION_GUARD),
        IdentityEntry::new(
            "thm-5.3",
            "q-gamma quotient as a pair of Jackson integrals",
            "Gq(b)Gq(1-a)Gq(z)Gq(b-a-z)/(Gq(b-a)Gq(a+z)Gq(1-a-z)) = -(1-q)^(a+1-b) + Gq(1-a)Gq(b-a-z)/(Gq(b-a)Gq(1-z)Gq(1-b)) int_0^1 f d_qx + Gq(b)Gq(z)/(Gq(b-a)Gq(a+1+z-b)Gq(a)) int_0^1 g d_qx",
            gamma_lhs,
            third_rhs,
            sample_q_strip,
        )
        .constraints(beta_strip())
        .constraints([a_positive(), b_below_one()])
        .guard_digits(CANCELLATION_GUARD),
    ]
}

/// Left side shared by the three q-gamma theorems, exposed for limit checks.
pub fn gamma_quotient_lhs(point: &QPoint, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    gamma_lhs(&point.resolve(ctx)?, ctx)
}

/// The two-integral right-hand side of `thm-5.3`, with grid values of the
/// integrands obtained by stepping their products. Usable close to `q = 1`.
pub fn integral_form_rhs_stepped(point: &QPoint, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    third_rhs_stepped(&point.resolve(ctx)?, ctx)
}
