//! Evaluation primitives: powers of the nome, q-Pochhammer symbols and
//! basic hypergeometric series, unilateral and bilateral.
//!
//! Products and series stop once a proven geometric tail bound drops below
//! the context's relative tolerance. For a product `∏_{n≥N} (1 - a q^n)` the
//! bound on the log of the remainder is `t / ((1-q)(1-t))` with
//! `t = |a| q^N`; for a series whose successive term ratios are bounded by
//! `ρ < 1` the remainder after term `t_N` is at most `|t_N| ρ / (1-ρ)`.

pub mod accel;

pub use accel::{accelerate, AccelKind};

use crate::error::{Error, Result};
use crate::real::{PrecisionCtx, Real};
use crate::series::SeriesValue;

/// Rejects nomes outside the open unit interval.
pub fn check_nome(q: &Real) -> Result<()> {
    if !q.is_finite() || !q.is_positive() || q >= &Real::from_i64(1, q.bits()) {
        return Err(Error::Domain(format!(
            "nome q must satisfy 0 < q < 1, got {}",
            q.to_sci_string(12)
        )));
    }
    Ok(())
}

/// `q^e` for `0 < q < 1` and any finite real exponent.
pub fn qpow(q: &Real, e: &Real, ctx: &PrecisionCtx) -> Result<Real> {
    check_nome(q)?;
    if !e.is_finite() {
        return Err(Error::Domain("exponent must be finite".into()));
    }
    let bits = ctx.bits();
    if e.is_zero() {
        return Ok(ctx.one());
    }
    let e = e.with_bits(bits);
    // exact for small integer exponents
    let rounded = e.round();
    if rounded == e && e.abs() <= ctx.int(64) {
        return Ok(q.with_bits(bits).powi(rounded.to_f64() as i64));
    }
    Ok((e * q.with_bits(bits).ln()).exp())
}

fn rounding_allowance(abs_sum: &Real, ops: usize, ctx: &PrecisionCtx) -> Real {
    abs_sum * &ctx.real(ctx.epsilon() * (ops as f64 + 1.0))
}

/// `(a;q)_∞ = ∏_{n≥0} (1 - a q^n)`.
pub fn pochhammer_inf(a: &Real, q: &Real, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    check_nome(q)?;
    let bits = ctx.bits();
    if a.is_zero() {
        return Ok(SeriesValue::exact(ctx.one()));
    }
    let q = q.with_bits(bits);
    let qf = q.to_f64();
    let tol = ctx.tail_rel_tol();
    let mut prod = ctx.one();
    let mut apow = a.with_bits(bits);
    let mut n = 0usize;
    loop {
        let t = apow.abs().to_f64();
        if t < 0.5 {
            let bound = t / ((1.0 - qf) * (1.0 - t));
            let rel = bound * bound.exp();
            if rel < tol {
                let err = &prod.abs() * &ctx.real(rel) + rounding_allowance(&prod, 2 * n, ctx);
                return Ok(SeriesValue {
                    value: prod,
                    err_estimate: err,
                    terms_used: n,
                    certified: true,
                });
            }
        }
        if n >= ctx.max_terms() {
            return Err(Error::CapExceeded {
                what: "pochhammer_inf",
                terms: n,
            });
        }
        let factor = 1 - &apow;
        if factor.is_zero() {
            return Ok(SeriesValue {
                value: ctx.zero(),
                err_estimate: ctx.zero(),
                terms_used: n + 1,
                certified: true,
            });
        }
        prod *= factor;
        apow *= &q;
        n += 1;
    }
}

/// `(a;q)_n` for any integer `n`; negative orders use the finite reciprocal
/// product `1 / ∏_{k=1}^{|n|} (1 - a q^{-k})`.
pub fn pochhammer_n(a: &Real, q: &Real, n: i64, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    check_nome(q)?;
    let bits = ctx.bits();
    let q = q.with_bits(bits);
    let m = n.unsigned_abs() as usize;
    if m > ctx.max_terms() {
        return Err(Error::CapExceeded {
            what: "pochhammer_n",
            terms: m,
        });
    }
    let mut prod = ctx.one();
    if n >= 0 {
        let mut apow = a.with_bits(bits);
        for _ in 0..m {
            let factor = 1 - &apow;
            if factor.is_zero() {
                return Ok(SeriesValue {
                    value: ctx.zero(),
                    err_estimate: ctx.zero(),
                    terms_used: m,
                    certified: true,
                });
            }
            prod *= factor;
            apow *= &q;
        }
        let err = rounding_allowance(&prod, 2 * m, ctx);
        Ok(SeriesValue {
            value: prod,
            err_estimate: err,
            terms_used: m,
            certified: true,
        })
    } else {
        let mut apow = a.with_bits(bits);
        for k in 1..=m {
            apow /= &q;
            let factor = 1 - &apow;
            if factor.is_zero() {
                return Err(Error::Pole(format!(
                    "(a;q)_{n} has a vanishing factor 1 - a q^-{k}"
                )));
            }
            prod *= factor;
        }
        let value = prod.recip();
        let err = rounding_allowance(&value, 2 * m + 1, ctx);
        Ok(SeriesValue {
            value,
            err_estimate: err,
            terms_used: m,
            certified: true,
        })
    }
}

/// Sums `Σ_{n≥0} t_n` with `t_0 = 1` and
/// `t_{n+1} = t_n · z · ∏(1 - a_i q^n) / ([1 - q^{n+1}] ∏(1 - b_j q^n))`,
/// the bracketed factor present only when `q_factorial` is set.
pub(crate) fn sum_ratio_series(
    upper: &[Real],
    lower: &[Real],
    q_factorial: bool,
    q: &Real,
    z: &Real,
    ctx: &PrecisionCtx,
    what: &'static str,
) -> Result<SeriesValue> {
    check_nome(q)?;
    let bits = ctx.bits();
    let q = q.with_bits(bits);
    let z = z.with_bits(bits);
    let upper: Vec<Real> = upper.iter().map(|a| a.with_bits(bits)).collect();
    let lower: Vec<Real> = lower.iter().map(|b| b.with_bits(bits)).collect();
    let qf = q.to_f64();
    let zf = z.abs().to_f64();
    let upper_abs: Vec<f64> = upper.iter().map(|a| a.abs().to_f64()).collect();
    let lower_abs: Vec<f64> = lower.iter().map(|b| b.abs().to_f64()).collect();
    let ops_per_term = upper.len() + lower.len() + 3;
    let tol = ctx.tail_rel_tol();
    let eps = ctx.epsilon();

    let mut term = ctx.one();
    let mut sum = ctx.one();
    let mut abs_sum = ctx.one();
    let mut qn = ctx.one();
    let mut qnf = 1.0f64;
    let mut n = 0usize;
    if z.is_zero() {
        return Ok(SeriesValue::rounded(sum).with_terms(1));
    }
    loop {
        let mut num = z.clone();
        let mut vanished = false;
        for a in &upper {
            let f = 1 - &(a * &qn);
            if f.is_zero() {
                vanished = true;
                break;
            }
            num *= f;
        }
        if vanished {
            // terminating series: every later term carries this zero factor
            let err = rounding_allowance(&abs_sum, (n + 1) * ops_per_term, ctx);
            return Ok(SeriesValue {
                value: sum,
                err_estimate: err,
                terms_used: n + 1,
                certified: true,
            });
        }
        let mut den = ctx.one();
        for b in &lower {
            let f = 1 - &(b * &qn);
            if f.is_zero() {
                return Err(Error::Pole(format!(
                    "{what}: denominator factor (1 - b q^{n}) vanishes"
                )));
            }
            den *= f;
        }
        if q_factorial {
            den *= 1 - &(&q * &qn);
        }
        term = &term * &(num / den);
        sum += &term;
        abs_sum += term.abs();
        qn *= &q;
        qnf *= qf;
        n += 1;
        let terms = n + 1;

        if term.is_zero() {
            let err = rounding_allowance(&abs_sum, terms * ops_per_term, ctx);
            return Ok(SeriesValue {
                value: sum,
                err_estimate: err,
                terms_used: terms,
                certified: true,
            });
        }
        // ratio bound valid for every later step k ≥ n
        if lower_abs.iter().all(|b| b * qnf < 1.0) {
            let mut rho = zf;
            for a in &upper_abs {
                rho *= 1.0 + a * qnf;
            }
            for b in &lower_abs {
                rho /= 1.0 - b * qnf;
            }
            if q_factorial {
                rho /= 1.0 - qnf * qf;
            }
            if rho < 1.0 {
                let lt = term.log10_abs();
                let ratio_to_sum = 10f64.powf(lt - sum.log10_abs());
                let ratio_to_abs = 10f64.powf(lt - abs_sum.log10_abs());
                let factor = rho / (1.0 - rho);
                if ratio_to_sum * factor < tol || ratio_to_abs * factor < eps {
                    let tail = &term.abs() * &ctx.real(factor);
                    let err = tail + rounding_allowance(&abs_sum, terms * ops_per_term, ctx);
                    return Ok(SeriesValue {
                        value: sum,
                        err_estimate: err,
                        terms_used: terms,
                        certified: true,
                    });
                }
            }
        }
        if terms >= ctx.max_terms() {
            return Err(Error::CapExceeded { what, terms });
        }
    }
}

impl SeriesValue {
    fn with_terms(mut self, terms: usize) -> Self {
        self.terms_used = terms;
        self
    }
}

/// Basic hypergeometric series
/// `Σ_{n≥0} ∏(a_i;q)_n / ((q;q)_n ∏(b_j;q)_n) z^n`.
pub fn phi(upper: &[Real], lower: &[Real], q: &Real, z: &Real, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    check_nome(q)?;
    if z.abs() >= Real::from_i64(1, z.bits()) {
        return Err(Error::Divergence(format!(
            "phi requires |z| < 1, got z = {}",
            z.to_sci_string(12)
        )));
    }
    sum_ratio_series(upper, lower, true, q, z, ctx, "phi")
}

/// Bilateral series `Σ_{n∈ℤ} ∏(a_i;q)_n / ∏(b_i;q)_n z^n`.
///
/// The negative-index half is rewritten through
/// `(a)_{-n}/(b)_{-n} z^{-n} = (q/b)_n/(q/a)_n (b/(az))^n`, so both halves
/// are ordinary one-sided sums and the result is `pos + neg - 1`.
pub fn psi_bilateral(
    upper: &[Real],
    lower: &[Real],
    q: &Real,
    z: &Real,
    ctx: &PrecisionCtx,
) -> Result<SeriesValue> {
    check_nome(q)?;
    if upper.len() != lower.len() || upper.is_empty() {
        return Err(Error::Domain(format!(
            "bilateral series needs equally many upper and lower parameters, got {} and {}",
            upper.len(),
            lower.len()
        )));
    }
    if upper.iter().chain(lower).any(|p| p.is_zero()) {
        return Err(Error::Domain(
            "bilateral series parameters must be non-zero".into(),
        ));
    }
    let bits = ctx.bits();
    let z = z.with_bits(bits);
    let mut ratio = ctx.one();
    for (a, b) in upper.iter().zip(lower) {
        ratio = ratio * b / a;
    }
    let zabs = z.abs();
    if !(ratio.abs() < zabs && zabs < ctx.one()) {
        return Err(Error::Divergence(format!(
            "bilateral series requires |b1..br/(a1..ar)| < |z| < 1, got |ratio| = {}, |z| = {}",
            ratio.abs().to_sci_string(12),
            zabs.to_sci_string(12)
        )));
    }
    let q = q.with_bits(bits);
    let pos = sum_ratio_series(upper, lower, false, &q, &z, ctx, "psi_bilateral")?;
    let neg_upper: Vec<Real> = lower.iter().map(|b| &q / b).collect();
    let neg_lower: Vec<Real> = upper.iter().map(|a| &q / a).collect();
    let w = &ratio / &z;
    let neg = sum_ratio_series(&neg_upper, &neg_lower, false, &q, &w, ctx, "psi_bilateral")?;
    let one = SeriesValue::exact(ctx.one());
    (pos + neg - one).finish(ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionCtx {
        PrecisionCtx::new(40).unwrap()
    }

    fn close(a: &Real, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn qpow_examples() {
        let c = ctx();
        assert_eq!(qpow(&c.real(0.5), &c.zero(), &c).unwrap(), c.one());
        let r = qpow(&c.real(0.25), &c.real(0.5), &c).unwrap();
        assert!((r - c.real(0.5)).abs().to_f64() < 1e-45);
        // exp(ln(0.1)/24), frozen from a 50-digit exp/log evaluation
        let e = c.one() / c.int(24);
        let r = qpow(&c.parse("0.1").unwrap(), &e, &c).unwrap();
        let expect = c.parse("0.9085175756516867878174691427164612835560").unwrap();
        assert!((r - expect).abs().to_f64() < 1e-39);
    }

    #[test]
    fn qpow_domain() {
        let c = ctx();
        assert!(matches!(qpow(&c.zero(), &c.one(), &c), Err(Error::Domain(_))));
        assert!(matches!(qpow(&c.one(), &c.one(), &c), Err(Error::Domain(_))));
        assert!(matches!(qpow(&c.real(-0.5), &c.one(), &c), Err(Error::Domain(_))));
    }

    #[test]
    fn pochhammer_inf_examples() {
        let c = ctx();
        let v = pochhammer_inf(&c.zero(), &c.real(0.5), &c).unwrap();
        assert_eq!(v.value, c.one());
        let v = pochhammer_inf(&c.one(), &c.real(0.3), &c).unwrap();
        assert!(v.value.is_zero());
        // direct product until a q^N < 1e-40, computed independently
        let v = pochhammer_inf(&c.real(0.5), &c.real(0.5), &c).unwrap();
        let mut oracle = 1.0f64;
        let mut t = 0.5f64;
        while t > 1e-40 {
            oracle *= 1.0 - t;
            t *= 0.5;
        }
        assert!(close(&v.value, oracle, 1e-15));
        assert!(close(&v.value, 0.2887880951, 1e-10));
        assert!(v.certified);
    }

    #[test]
    fn pochhammer_inf_cap() {
        let c = ctx().with_max_terms(5).unwrap();
        let r = pochhammer_inf(&c.real(0.5), &c.real(0.9), &c);
        assert!(matches!(r, Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn pochhammer_n_examples() {
        let c = ctx();
        let q = c.real(0.5);
        assert_eq!(pochhammer_n(&c.real(0.7), &q, 0, &c).unwrap().value, c.one());
        assert!(pochhammer_n(&c.int(2), &q, 3, &c).unwrap().value.is_zero());
        assert_eq!(pochhammer_n(&c.real(0.25), &q, -1, &c).unwrap().value, c.int(2));
        // (q;q)_{-1}: factor 1 - q/q vanishes
        assert!(matches!(pochhammer_n(&q, &q, -1, &c), Err(Error::Pole(_))));
    }

    #[test]
    fn phi_examples() {
        let c = ctx();
        let q = c.real(0.5);
        let v = phi(&[c.real(0.3)], &[], &q, &c.zero(), &c).unwrap();
        assert_eq!(v.value, c.one());
        let v = phi(std::slice::from_ref(&q), &[], &q, &c.real(0.5), &c).unwrap();
        assert!((v.value - c.int(2)).abs().to_f64() < 1e-38);
        assert!(matches!(
            phi(&[c.real(0.2)], &[], &q, &c.one(), &c),
            Err(Error::Divergence(_))
        ));
    }

    #[test]
    fn phi_matches_partial_sum_oracle() {
        let c = ctx();
        let (a, b, q, z) = (c.real(0.2), c.real(0.7), c.real(0.5), c.real(0.4));
        let v = phi(std::slice::from_ref(&a), std::slice::from_ref(&b), &q, &z, &c).unwrap();
        // 200 terms from Pochhammer products evaluated afresh for every n
        let mut oracle = c.zero();
        for n in 0..200i64 {
            let an = pochhammer_n(&a, &q, n, &c).unwrap().value;
            let bn = pochhammer_n(&b, &q, n, &c).unwrap().value;
            let qn = pochhammer_n(&q, &q, n, &c).unwrap().value;
            oracle += an / (bn * qn) * z.powi(n);
        }
        assert!(((v.value - oracle).abs()).to_f64() < 1e-30);
    }

    #[test]
    fn phi_pole() {
        let c = ctx();
        let q = c.real(0.5);
        // lower parameter 1/q makes 1 - b q vanish at n = 1
        let r = phi(&[c.real(0.3)], &[c.int(2)], &q, &c.real(0.5), &c);
        assert!(matches!(r, Err(Error::Pole(_))));
    }

    #[test]
    fn psi_reduces_to_q_binomial_when_b_is_q() {
        let c = ctx();
        let (a, q, z) = (c.real(0.9), c.real(0.5), c.real(0.7));
        let v = psi_bilateral(std::slice::from_ref(&a), std::slice::from_ref(&q), &q, &z, &c).unwrap();
        let prod =
            pochhammer_inf(&(&a * &z), &q, &c).unwrap().value / pochhammer_inf(&z, &q, &c).unwrap().value;
        assert!(((v.value - prod).abs()).to_f64() < 1e-38);
    }

    #[test]
    fn psi_ramanujan_closed_forms() {
        let c = ctx();
        let q = c.real(0.5);
        // (-q;q)_n/(-q^3;q)_n q^n summed over all n equals (1+q^2)(1+q)/(q(1-q)) = 7.5
        let v = psi_bilateral(&[-&q], &[-q.powi(3)], &q, &q, &c).unwrap();
        assert!(((v.value - c.real(7.5)).abs()).to_f64() < 1e-38);

        let (a, b, q, z) = (c.real(0.5), c.real(0.05), c.real(0.3), c.real(0.4));
        let v = psi_bilateral(std::slice::from_ref(&a), std::slice::from_ref(&b), &q, &z, &c).unwrap();
        let p = |x: Real| pochhammer_inf(&x, &q, &c).unwrap().value;
        let az = &a * &z;
        let prod = p(az.clone()) * p(&q / &az) * p(q.clone()) * p(&b / &a)
            / (p(z.clone()) * p(&b / &az) * p(b.clone()) * p(&q / &a));
        let rel = ((&v.value - &prod) / &prod).abs().to_f64();
        assert!(rel < 1e-38, "rel = {rel}");
    }

    #[test]
    fn psi_rejects_boundary_and_outside() {
        let c = ctx();
        let q = c.real(0.5);
        // |b/a| = |z| exactly
        let r = psi_bilateral(&[c.real(0.5)], &[c.real(0.2)], &q, &c.real(0.4), &c);
        assert!(matches!(r, Err(Error::Divergence(_))));
        let r = psi_bilateral(&[c.real(0.5)], &[c.real(0.1)], &q, &c.real(1.0), &c);
        assert!(matches!(r, Err(Error::Divergence(_))));
        let r = psi_bilateral(&[c.real(0.5)], &[], &q, &c.real(0.5), &c);
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
