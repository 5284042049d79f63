//! Ramanujan's 1ψ1 sum, Heine's transformations, the three bilateral
//! transformation theorems built from them, and their special cases.

use crate::error::{Error, Result};
use crate::param::{ParamExpr, QPoint, Resolved};
use crate::qcore::{phi, pochhammer_inf, psi_bilateral, sum_ratio_series};
use crate::real::{PrecisionCtx, Real};
use crate::series::SeriesValue;

use super::{abs_param, constant, Constraint, Draw, IdentityEntry};

/// Guard digits for sides of the form `-1 + A + B`.
pub(crate) const CANCELLATION_GUARD: u32 = 10;

/// `∏ (n_i;q)_∞ / ∏ (d_j;q)_∞`.
pub(crate) fn product_quotient(
    num: &[Real],
    den: &[Real],
    q: &Real,
    ctx: &PrecisionCtx,
) -> Result<SeriesValue> {
    let mut acc = SeriesValue::exact(ctx.one());
    for x in num {
        acc = acc * pochhammer_inf(x, q, ctx)?;
    }
    for x in den {
        let d = pochhammer_inf(x, q, ctx)?;
        if d.value.is_zero() {
            return Err(Error::Pole(format!(
                "({};q)_inf vanishes in a denominator",
                x.to_sci_string(12)
            )));
        }
        acc = acc / d;
    }
    Ok(acc)
}

/// `Σ_{n≥0} ∏(a_i;q)_n / ∏(b_j;q)_n z^n`, without the `(q;q)_n` factor.
pub(crate) fn ratio_sum(
    upper: &[Real],
    lower: &[Real],
    q: &Real,
    z: &Real,
    ctx: &PrecisionCtx,
) -> Result<SeriesValue> {
    if z.abs() >= ctx.one() {
        return Err(Error::Divergence(format!(
            "series argument {} lies outside the unit disc",
            z.to_sci_string(12)
        )));
    }
    sum_ratio_series(upper, lower, false, q, z, ctx, "ratio_sum")
}

/// Sums `term(n)` for `n` along `indices` until `tail(n)`, a bound on the
/// absolute sum of all later terms, falls below the context tolerance.
pub(crate) fn directed_sum(
    indices: impl Iterator<Item = i64>,
    term: impl Fn(i64) -> Real,
    tail: impl Fn(i64) -> f64,
    ctx: &PrecisionCtx,
    what: &'static str,
) -> Result<SeriesValue> {
    let tol = ctx.tail_rel_tol();
    let eps = ctx.epsilon();
    let mut sum = ctx.zero();
    let mut abs_sum = ctx.zero();
    let mut count = 0usize;
    for n in indices {
        let t = term(n);
        abs_sum += t.abs();
        sum += t;
        count += 1;
        let bound = tail(n);
        let scale = sum.abs().to_f64();
        if bound.is_finite() && (bound < tol * scale || bound < eps * abs_sum.to_f64()) {
            let err = ctx.real(bound) + &abs_sum * &ctx.real(eps * (count as f64 * 4.0 + 1.0));
            return Ok(SeriesValue {
                value: sum,
                err_estimate: err,
                terms_used: count,
                certified: true,
            });
        }
        if count >= ctx.max_terms() {
            break;
        }
    }
    Err(Error::CapExceeded { what, terms: count })
}

fn one(ctx: &PrecisionCtx) -> SeriesValue {
    SeriesValue::exact(ctx.one())
}

struct Abzq {
    a: Real,
    b: Real,
    z: Real,
    q: Real,
}

fn abzq(p: &Resolved) -> Result<Abzq> {
    Ok(Abzq {
        a: p.get("a")?.clone(),
        b: p.get("b")?.clone(),
        z: p.get("z")?.clone(),
        q: p.q()?.clone(),
    })
}

/// `Σ_{n∈ℤ} (a)_n/(b)_n z^n`, by the split into two one-sided sums.
pub(crate) fn bilateral_lhs(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let Abzq { a, b, z, q } = abzq(p)?;
    psi_bilateral(&[a], &[b], &q, &z, ctx)
}

/// `Σ_{n≥0} (a)_n/(b)_n z^n`.
fn forward_lhs(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let Abzq { a, b, z, q } = abzq(p)?;
    ratio_sum(&[a], &[b], &q, &z, ctx)
}

/// `Σ_{n≥0} (q/b)_n/(q/a)_n (b/az)^n`.
fn backward_lhs(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let Abzq { a, b, z, q } = abzq(p)?;
    let w = &b / &(&a * &z);
    ratio_sum(&[&q / &b], &[&q / &a], &q, &w, ctx)
}

fn ramanujan_product(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let Abzq { a, b, z, q } = abzq(p)?;
    let az = &a * &z;
    product_quotient(
        &[az.clone(), &q / &az, q.clone(), &b / &a],
        &[z.clone(), &b / &az, b.clone(), &q / &a],
        &q,
        ctx,
    )
}

/// Forward half via the second Heine form: `(b/a)(az)/((b)(z)) 2φ1(a, aqz/b; az; b/a)`.
fn forward_heine2(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let Abzq { a, b, z, q } = abzq(p)?;
    let az = &a * &z;
    let pre = product_quotient(&[&b / &a, az.clone()], &[b.clone(), z.clone()], &q, ctx)?;
    let s = phi(&[a.clone(), &(&az * &q) / &b], &[az], &q, &(&b / &a), ctx)?;
    Ok(pre * s)
}

/// Forward half via the first Heine form: `(a)(qz)/((b)(z)) 2φ1(b/a, z; qz; a)`.
fn forward_heine1(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let Abzq { a, b, z, q } = abzq(p)?;
    let qz = &q * &z;
    let pre = product_quotient(&[a.clone(), qz.clone()], &[b.clone(), z.clone()], &q, ctx)?;
    let s = phi(&[&b / &a, z.clone()], &[qz], &q, &a, ctx)?;
    Ok(pre * s)
}

/// Backward half via the first Heine form:
/// `(q/b)(bq/az)/((q/a)(b/az)) 2φ1(b/a, b/az; bq/az; q/b)`.
fn backward_heine1(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let Abzq { a, b, z, q } = abzq(p)?;
    let w = &b / &(&a * &z);
    let wq = &w * &q;
    let pre = product_quotient(&[&q / &b, wq.clone()], &[&q / &a, w.clone()], &q, ctx)?;
    let s = phi(&[&b / &a, w], &[wq], &q, &(&q / &b), ctx)?;
    Ok(pre * s)
}

/// Backward half via the second Heine form:
/// `(b/a)(q/az)/((q/a)(b/az)) 2φ1(q/z, q/b; q/az; b/a)`.
fn backward_heine2(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let Abzq { a, b, z, q } = abzq(p)?;
    let az = &a * &z;
    let q_az = &q / &az;
    let pre = product_quotient(&[&b / &a, q_az.clone()], &[&q / &a, &b / &az], &q, ctx)?;
    let s = phi(&[&q / &z, &q / &b], &[q_az], &q, &(&b / &a), ctx)?;
    Ok(pre * s)
}

pub(crate) fn thm_first(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    Ok(forward_heine2(p, ctx)? + backward_heine1(p, ctx)? - one(ctx))
}

pub(crate) fn thm_second(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    Ok(forward_heine1(p, ctx)? + backward_heine2(p, ctx)? - one(ctx))
}

pub(crate) fn thm_third(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    Ok(forward_heine2(p, ctx)? + backward_heine2(p, ctx)? - one(ctx))
}

fn heine_lhs(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let (a, b, c, z, q) = (p.get("a")?, p.get("b")?, p.get("c")?, p.get("z")?, p.q()?);
    phi(&[a.clone(), b.clone()], std::slice::from_ref(c), q, z, ctx)
}

fn heine_first(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let (a, b, c, z, q) = (p.get("a")?, p.get("b")?, p.get("c")?, p.get("z")?, p.q()?);
    let az = a * z;
    let pre = product_quotient(&[b.clone(), az.clone()], &[c.clone(), z.clone()], q, ctx)?;
    let s = phi(&[c / b, z.clone()], &[az], q, b, ctx)?;
    Ok(pre * s)
}

fn heine_second(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let (a, b, c, z, q) = (p.get("a")?, p.get("b")?, p.get("c")?, p.get("z")?, p.q()?);
    let bz = b * z;
    let cb = c / b;
    let pre = product_quotient(&[cb.clone(), bz.clone()], &[c.clone(), z.clone()], q, ctx)?;
    let s = phi(&[&(a * &bz) / c, b.clone()], &[bz], q, &cb, ctx)?;
    Ok(pre * s)
}

/// `Σ z^n / (1 + q^{n-1})` over all integers `n`.
fn special_first_lhs(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let (q, z) = (p.q()?.clone(), p.get("z")?.clone());
    let (qf, zf) = (q.to_f64(), z.abs().to_f64());
    let term = |n: i64| z.powi(n) / (1 + &q.powi(n - 1));
    let pos = directed_sum(
        0..,
        term,
        |n| zf.powi(n as i32 + 1) / (1.0 - zf),
        ctx,
        "bilateral sum",
    )?;
    let r = qf / zf;
    let neg = directed_sum(
        (1..).map(|m: i64| -m),
        term,
        |n| qf * r.powi(1 - n as i32) / (1.0 - r),
        ctx,
        "bilateral sum",
    )?;
    Ok(pos + neg)
}

fn special_first_rhs(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let (q, z) = (p.q()?.clone(), p.get("z")?.clone());
    let c = &q / &(1 + &q);
    let mz_q = -(&z / &q);
    let inv_q = -(ctx.one() / &q);
    let pre = product_quotient(&[q.clone(), mz_q.clone()], &[-ctx.one(), z.clone()], &q, ctx)?;
    let s1 = phi(&[z.clone(), inv_q], &[mz_q], &q, &q, ctx)?;
    let (qf, zf) = (q.to_f64(), z.to_f64());
    let s2 = directed_sum(
        0..,
        |n| {
            let t = q.powi(n);
            let t = if n % 2 == 1 { -t } else { t };
            t / (1 - &(q.powi(n + 1) / &z))
        },
        |n| {
            let head = qf.powi(n as i32 + 1) / (1.0 - qf);
            if zf > 0.0 {
                head / (1.0 - qf.powi(n as i32 + 2) / zf)
            } else {
                head
            }
        },
        ctx,
        "alternating sum",
    )?;
    let cs = SeriesValue::rounded(c.clone());
    Ok((pre * s1).scale(&c) - cs + s2.scale(&q))
}

/// `Σ (-q;q)_n/(-q^3;q)_n q^n` over all integers `n`.
fn special_second_lhs(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let q = p.q()?;
    psi_bilateral(&[-q], &[-q.powi(3)], q, q, ctx)
}

fn special_second_rhs(p: &Resolved, _ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let q = p.q()?;
    let v = (1 + &q.powi(2)) * (1 + q) / (q * &(1 - q));
    Ok(SeriesValue::rounded(v))
}

/// `Σ 2(1+1/q^2)(1+q^2) q^n / ((1+q^{2n-2})(1+q^{2n})(1+q^{2n+2}))` over all `n`.
fn special_third_lhs(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let q = p.q()?.clone();
    let q2 = q.powi(2);
    let c = 2 * (1 + &q2.recip()) * (1 + &q2);
    let cf = c.to_f64();
    let qf = q.to_f64();
    let term = |n: i64| {
        &c * &q.powi(n) / ((1 + &q.powi(2 * n - 2)) * (1 + &q.powi(2 * n)) * (1 + &q.powi(2 * n + 2)))
    };
    let pos = directed_sum(
        0..,
        term,
        |n| cf * qf.powi(n as i32 + 1) / (1.0 - qf),
        ctx,
        "bilateral sum",
    )?;
    let q5 = qf.powi(5);
    let neg = directed_sum(
        (1..).map(|m: i64| -m),
        term,
        |n| cf * q5.powi(1 - n as i32) / (1.0 - q5),
        ctx,
        "bilateral sum",
    )?;
    Ok(pos + neg)
}

fn special_third_rhs(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let q = p.q()?.clone();
    let qq = q.powi(2);
    let q6 = q.powi(6);
    let inv_q = ctx.one() / &q;
    let pre1 = product_quotient(&[q6.clone(), -&inv_q], &[-q.powi(4), q.clone()], &qq, ctx)?;
    let s1 = phi(&[q.powi(-3), -q.powi(-2)], &[-&inv_q], &qq, &q6, ctx)?;
    let pre2 = product_quotient(&[q6.clone(), -q.powi(3)], &[-q.powi(4), q.powi(5)], &qq, ctx)?;
    let s2 = phi(&[q.clone(), -q.powi(-2)], &[-q.powi(3)], &qq, &q6, ctx)?;
    Ok(pre1 * s1 + pre2 * s2 - one(ctx))
}

fn ratio(
    num: &'static str,
    den: &'static str,
) -> impl Fn(&Resolved, &PrecisionCtx) -> Result<Real> + Send + Sync {
    move |p, _| Ok((p.get(num)? / p.get(den)?).abs())
}

fn q_over(name: &'static str) -> impl Fn(&Resolved, &PrecisionCtx) -> Result<Real> + Send + Sync {
    move |p, _| Ok(p.q()? / p.get(name)?)
}

fn b_over_az(p: &Resolved) -> Result<Real> {
    Ok(p.get("b")? / &(p.get("a")? * p.get("z")?))
}

fn annulus() -> Vec<Constraint> {
    vec![
        Constraint::new("b != 0", |p, _| Ok(p.get("b")?.abs())),
        Constraint::less("|b/a| < |z|", ratio("b", "a"), abs_param("z")),
        Constraint::less("|z| < 1", abs_param("z"), constant(1.0)),
    ]
}

fn pole_b() -> Constraint {
    Constraint::not_pole("b not in q^-N", |p, _| p.get("b").cloned())
}

fn pole_q_a() -> Constraint {
    Constraint::not_pole("q/a not in q^-N", q_over("a"))
}

fn pole_az() -> Constraint {
    Constraint::not_pole("az not in q^-N", |p, _| Ok(p.get("a")? * p.get("z")?))
}

fn pole_q_az() -> Constraint {
    Constraint::not_pole("q/(az) not in q^-N", |p, _| {
        Ok(p.q()? / &(p.get("a")? * p.get("z")?))
    })
}

fn pole_bq_az() -> Constraint {
    Constraint::not_pole("bq/(az) not in q^-N", |p, _| Ok(b_over_az(p)? * p.q()?))
}

fn pole_qz() -> Constraint {
    Constraint::not_pole("qz not in q^-N", |p, _| Ok(p.q()? * p.get("z")?))
}

/// Points `(a, b, z, q)` with a mix of signed literals and `-q^e` parameters.
pub(crate) fn sample_abzq(d: &mut Draw<'_>) -> QPoint {
    let q = d.nome(0.05, 0.8);
    let zm = d.micros(0.1, 0.95);
    let z = if d.int(0, 3) == 0 { -zm } else { zm };
    let z = ParamExpr::literal(super::sampling::micros_text(z));
    let (a, b) = match d.int(0, 3) {
        0 => {
            let am = d.micros(0.2, 2.0);
            let hi = am * (zm - 50_000) / 1_000_000;
            let bm = d.int(10_000.min(hi), hi.max(10_000));
            let sa = if d.coin() { -am } else { am };
            let sb = if d.coin() { -bm } else { bm };
            (
                ParamExpr::literal(super::sampling::micros_text(sa)),
                ParamExpr::literal(super::sampling::micros_text(sb)),
            )
        }
        1 => (d.neg_q_power(-2, 2), d.neg_q_power(-1, 4)),
        2 => (d.signed_literal(0.2, 2.0), d.neg_q_power(0, 4)),
        _ => (d.neg_q_power(-2, 1), d.signed_literal(0.01, 0.6)),
    };
    QPoint::new(Some(&q)).with("a", a).with("b", b).with("z", z)
}

fn sample_heine(d: &mut Draw<'_>) -> QPoint {
    let q = d.nome(0.05, 0.8);
    let z = d.signed_literal(0.05, 0.95);
    let a = if d.coin() {
        d.signed_literal(0.05, 1.5)
    } else {
        d.neg_q_power(-1, 3)
    };
    let (b, c) = if d.coin() {
        let bm = d.micros(0.1, 0.95);
        let cm = d.int(10_000, bm * 95 / 100);
        let sb = if d.coin() { -bm } else { bm };
        let sc = if d.coin() { -cm } else { cm };
        (
            ParamExpr::literal(super::sampling::micros_text(sb)),
            ParamExpr::literal(super::sampling::micros_text(sc)),
        )
    } else {
        (d.neg_q_power(1, 3), d.neg_q_power(2, 6))
    };
    QPoint::new(Some(&q))
        .with("a", a)
        .with("b", b)
        .with("c", c)
        .with("z", z)
}

fn sample_q_only(d: &mut Draw<'_>) -> QPoint {
    QPoint::new(Some(&d.nome(0.05, 0.6)))
}

fn sample_q_z(d: &mut Draw<'_>) -> QPoint {
    let qm = d.micros(0.05, 0.6);
    let zm = d.int(qm + 50_000, 950_000);
    QPoint::new(Some(&super::sampling::micros_text(qm)))
        .with("z", ParamExpr::literal(super::sampling::micros_text(zm)))
}

fn nome_below(hi: f64) -> Constraint {
    Constraint::less(format!("q < {hi}"), |p, _| p.q().cloned(), constant(hi))
}

/// The thirteen transformation identities.
pub fn register_builtin() -> Vec<IdentityEntry> {
    vec![
        IdentityEntry::new(
            "eq-1.1",
            "Ramanujan 1psi1 summation",
            "sum_{n in Z} (a)_n/(b)_n z^n = (az)(q/az)(q)(b/a) / ((z)(b/az)(b)(q/a)), all products (x;q)_inf",
            bilateral_lhs,
            ramanujan_product,
            sample_abzq,
        )
        .constraints(annulus())
        .constraints([pole_b(), pole_q_a()]),
        IdentityEntry::new(
            "eq-2.1",
            "Heine transformation, first form",
            "2phi1(a,b;c;q,z) = (b)(az)/((c)(z)) 2phi1(c/b,z;az;q,b)",
            heine_lhs,
            heine_first,
            sample_heine,
        )
        .constraints([
            Constraint::less("|z| < 1", abs_param("z"), constant(1.0)),
            Constraint::less("|b| < 1", abs_param("b"), constant(1.0)),
            Constraint::not_pole("c not in q^-N", |p, _| p.get("c").cloned()),
            Constraint::not_pole("az not in q^-N", |p, _| Ok(p.get("a")? * p.get("z")?)),
        ]),
        IdentityEntry::new(
            "eq-2.2",
            "Heine transformation, second form",
            "2phi1(a,b;c;q,z) = (c/b)(bz)/((c)(z)) 2phi1(abz/c,b;bz;q,c/b)",
            heine_lhs,
            heine_second,
            sample_heine,
        )
        .constraints([
            Constraint::new("b != 0", |p, _| Ok(p.get("b")?.abs())),
            Constraint::less("|z| < 1", abs_param("z"), constant(1.0)),
            Constraint::less("|c/b| < 1", ratio("c", "b"), constant(1.0)),
            Constraint::not_pole("c not in q^-N", |p, _| p.get("c").cloned()),
            Constraint::not_pole("bz not in q^-N", |p, _| Ok(p.get("b")? * p.get("z")?)),
        ]),
        IdentityEntry::new(
            "eq-2.5",
            "forward half, second Heine form",
            "sum_{n>=0} (a)_n/(b)_n z^n = (b/a)(az)/((b)(z)) 2phi1(a,aqz/b;az;q,b/a)",
            forward_lhs,
            forward_heine2,
            sample_abzq,
        )
        .constraints([
            Constraint::less("|z| < 1", abs_param("z"), constant(1.0)),
            Constraint::less("|b/a| < 1", ratio("b", "a"), constant(1.0)),
            pole_b(),
            pole_az(),
        ]),
        IdentityEntry::new(
            "eq-2.6",
            "backward half, first Heine form",
            "sum_{n>=0} (q/b)_n/(q/a)_n (b/az)^n = (q/b)(bq/az)/((q/a)(b/az)) 2phi1(b/a,b/az;bq/az;q,q/b)",
            backward_lhs,
            backward_heine1,
            sample_abzq,
        )
        .constraints([
            Constraint::new("b != 0", |p, _| Ok(p.get("b")?.abs())),
            Constraint::less("|b/(az)| < 1", |p, _| Ok(b_over_az(p)?.abs()), constant(1.0)),
            Constraint::less("|q/b| < 1", |p, _| Ok((p.q()? / p.get("b")?).abs()), constant(1.0)),
            pole_q_a(),
            pole_bq_az(),
        ]),
        IdentityEntry::new(
            "eq-2.8",
            "forward half, first Heine form",
            "sum_{n>=0} (a)_n/(b)_n z^n = (a)(qz)/((b)(z)) 2phi1(b/a,z;qz;q,a)",
            forward_lhs,
            forward_heine1,
            sample_abzq,
        )
        .constraints([
            Constraint::less("|z| < 1", abs_param("z"), constant(1.0)),
            Constraint::less("|a| < 1", abs_param("a"), constant(1.0)),
            pole_b(),
            pole_qz(),
        ]),
        IdentityEntry::new(
            "eq-2.9",
            "backward half, second Heine form",
            "sum_{n>=0} (q/b)_n/(q/a)_n (b/az)^n = (b/a)(q/az)/((q/a)(b/az)) 2phi1(q/z,q/b;q/az;q,b/a)",
            backward_lhs,
            backward_heine2,
            sample_abzq,
        )
        .constraints([
            Constraint::new("b != 0", |p, _| Ok(p.get("b")?.abs())),
            Constraint::less("|b/(az)| < 1", |p, _| Ok(b_over_az(p)?.abs()), constant(1.0)),
            Constraint::less("|b/a| < 1", ratio("b", "a"), constant(1.0)),
            pole_q_a(),
            pole_q_az(),
        ]),
        IdentityEntry::new(
            "thm-2.1",
            "1psi1 transformation, forward and backward halves via both Heine forms",
            "sum_{n in Z} (a)_n/(b)_n z^n = -1 + [forward half, second Heine form] + [backward half, first Heine form]",
            bilateral_lhs,
            thm_first,
            sample_abzq,
        )
        .constraints(annulus())
        .constraints([
            Constraint::less("q < |b|", |p, _| p.q().cloned(), abs_param("b")),
            pole_b(),
            pole_q_a(),
            pole_az(),
            pole_bq_az(),
        ])
        .guard_digits(CANCELLATION_GUARD),
        IdentityEntry::new(
            "thm-2.2",
            "1psi1 transformation, both halves via alternate Heine forms",
            "sum_{n in Z} (a)_n/(b)_n z^n = -1 + [forward half, first Heine form] + [backward half, second Heine form]",
            bilateral_lhs,
            thm_second,
            sample_abzq,
        )
        .constraints(annulus())
        .constraints([
            Constraint::less("|a| < 1", abs_param("a"), constant(1.0)),
            pole_b(),
            pole_q_a(),
            pole_qz(),
            pole_q_az(),
        ])
        .guard_digits(CANCELLATION_GUARD),
        IdentityEntry::new(
            "thm-2.3",
            "1psi1 transformation, both halves via the second Heine form",
            "sum_{n in Z} (a)_n/(b)_n z^n = -1 + [forward half, second Heine form] + [backward half, second Heine form]",
            bilateral_lhs,
            thm_third,
            sample_abzq,
        )
        .constraints(annulus())
        .constraints([pole_b(), pole_q_a(), pole_az(), pole_q_az()])
        .guard_digits(CANCELLATION_GUARD),
        IdentityEntry::new(
            "eq-3.1",
            "special case a = -1/q, b = -1",
            "sum_{n in Z} z^n/(1+q^(n-1)) = -q/(1+q) + q/(1+q) (q)(-z/q)/((-1)(z)) 2phi1(z,-1/q;-z/q;q,q) + q sum_{n>=0} (-q)^n/(1-q^(n+1)/z)",
            special_first_lhs,
            special_first_rhs,
            sample_q_z,
        )
        .constraints([
            Constraint::less("q < |z|", |p, _| p.q().cloned(), abs_param("z")),
            Constraint::less("|z| < 1", abs_param("z"), constant(1.0)),
            Constraint::not_pole("-z/q not in q^-N", |p, _| Ok(-(p.get("z")? / p.q()?))),
        ])
        .guard_digits(CANCELLATION_GUARD),
        IdentityEntry::new(
            "eq-3.2",
            "special case a = -q, b = -q^3, z = q",
            "sum_{n in Z} (-q;q)_n/(-q^3;q)_n q^n = (1+q^2)(1+q)/(q(1-q))",
            special_second_lhs,
            special_second_rhs,
            sample_q_only,
        )
        .constraint(nome_below(1.0)),
        IdentityEntry::new(
            "eq-3.3",
            "special case a = -1/q, b = -q^2, z = q^(1/2), then q -> q^2",
            "sum_{n in Z} 2(1+1/q^2)(1+q^2) q^n/((1+q^(2n-2))(1+q^(2n))(1+q^(2n+2))) = -1 + two 2phi1 series in base q^2 with argument q^6",
            special_third_lhs,
            special_third_rhs,
            sample_q_only,
        )
        .constraint(nome_below(1.0))
        .guard_digits(CANCELLATION_GUARD),
    ]
}
