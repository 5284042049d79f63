//! Dedekind eta function for a real nome `0 < q < 1` and three eta-quotient
//! identities derived from the 1ψ1 sum.

use crate::error::{Error, Result};
use crate::identities::sampling::micros_text;
use crate::identities::{Constraint, Draw, IdentityEntry};
use crate::param::{QPoint, Resolved};
use crate::qcore::{check_nome, phi, pochhammer_inf, qpow};
use crate::real::{PrecisionCtx, Real};
use crate::series::SeriesValue;

use crate::identities::builtin::{product_quotient, ratio_sum, CANCELLATION_GUARD};

/// `η = q^{1/24} (q;q)_∞`.
pub fn eta_nome(q: &Real, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    check_nome(q)?;
    let pre = qpow(q, &(ctx.one() / ctx.int(24)), ctx)?;
    Ok(pochhammer_inf(q, q, ctx)?.scale(&pre))
}

/// `∏ η(m_i τ)^{e_i}`, each factor evaluated at nome `q^{m_i}`.
pub fn eta_quotient(scales: &[(u32, i32)], q: &Real, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    check_nome(q)?;
    let mut acc = SeriesValue::exact(ctx.one());
    for &(m, e) in scales {
        if m == 0 {
            return Err(Error::Domain("eta multiplier must be at least 1".into()));
        }
        let f = eta_nome(&q.with_bits(ctx.bits()).powi(m as i64), ctx)?;
        acc = acc * f.powi(e as i64);
    }
    Ok(acc)
}

fn frac(ctx: &PrecisionCtx, n: i64, d: i64) -> Real {
    ctx.int(n) / ctx.int(d)
}

fn first_rhs(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let q = p.q()?;
    let qq = q.powi(2);
    let lead = qpow(q, &frac(ctx, -1, 8), ctx)?;
    let c = qpow(q, &frac(ctx, 7, 8), ctx)? / (1 + q);
    let pre = product_quotient(std::slice::from_ref(q), std::slice::from_ref(&qq), &qq, ctx)?;
    let s = ratio_sum(&[q.powi(3)], &[q.powi(4)], &qq, q, ctx)?;
    Ok(SeriesValue::rounded(lead) - (pre * s).scale(&c))
}

fn second_rhs(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let q = p.q()?;
    let qq = q.powi(2);
    let q43 = qpow(q, &frac(ctx, 4, 3), ctx)?;
    let c = 2 * &(1 + q) * &q43 / ((1 + &qq) * (1 + &q.powi(4)));
    // Σ (1-q^{2n+2})/(1-q^{2n+1}) (-q^2)^n = (1+q) Σ (q^4;q^2)_n/(q^3;q^2)_n (-q^2)^n
    let alt = ratio_sum(&[q.powi(4)], &[q.powi(3)], &qq, &-&qq, ctx)?.scale(&(1 + q));
    let inv_q = -(ctx.one() / q);
    let pre = product_quotient(&[q.powi(4), inv_q.clone()], &[-ctx.one(), q.powi(3)], &qq, ctx)?;
    let s = phi(&[q.clone(), -q.powi(-4)], &[inv_q], &qq, &q.powi(4), ctx)?;
    let k = 2 * &q43 / (1 - q);
    Ok(SeriesValue::rounded(c.clone()) - alt.scale(&k) - (pre * s).scale(&c))
}

fn third_rhs(p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
    let q = p.q()?;
    let q3 = q.powi(3);
    let q6 = q.powi(6);
    let c = qpow(q, &frac(ctx, 4, 3), ctx)? * (1 + q + &q.powi(2)) / ((1 + &q.powi(2)) * (1 + &q.powi(5)));
    let inv_q = -(ctx.one() / q);
    let pre1 = product_quotient(&[q6.clone(), inv_q.clone()], &[-q, q.powi(4)], &q3, ctx)?;
    let s1 = phi(&[q.clone(), -q.powi(-5)], &[inv_q], &q3, &q6, ctx)?;
    let pre2 = product_quotient(&[q6.clone(), -q.powi(4)], &[-q.powi(8), q.powi(2)], &q3, ctx)?;
    let s2 = phi(&[q.recip(), -q.powi(2)], &[-q.powi(4)], &q3, &q6, ctx)?;
    let one = SeriesValue::exact(ctx.one());
    Ok((pre1 * s1 - one).scale(&c) + (pre2 * s2).scale(&c))
}

fn sample_nome(d: &mut Draw<'_>) -> QPoint {
    QPoint::new(Some(&micros_text(d.micros(0.05, 0.6))))
}

fn nome_window() -> [Constraint; 2] {
    [
        Constraint::less("q > 0.01", |_, c| Ok(c.real(0.01)), |p, _| p.q().cloned()),
        Constraint::less("q < 0.8", |p, _| p.q().cloned(), |_, c| Ok(c.real(0.8))),
    ]
}

/// The three eta-quotient identities.
pub fn register_eta_identities() -> Vec<IdentityEntry> {
    vec![
        IdentityEntry::new(
            "eq-4.2",
            "eta quotient eta(t)/eta(2t)^2",
            "eta(t)/eta(2t)^2 = q^(-1/8) - q^(7/8)/(1+q) (q;q^2)/(q^2;q^2) sum (q^3;q^2)_n/(q^4;q^2)_n q^n",
            |p, c| eta_quotient(&[(1, 1), (2, -2)], p.q()?, c),
            first_rhs,
            sample_nome,
        )
        .constraints(nome_window()),
        IdentityEntry::new(
            "eq-4.3",
            "eta quotient eta(2t)^10/(eta(t)^4 eta(4t)^2)",
            "eta(2t)^10/(eta(t)^4 eta(4t)^2) = c - 2q^(4/3)/(1-q) sum (1-q^(2n+2))/(1-q^(2n+1)) (-q^2)^n - c (q^4;q^2)(-1/q;q^2)/((-1;q^2)(q^3;q^2)) 2phi1(q,-1/q^4;-1/q;q^2,q^4), c = 2(1+q)q^(4/3)/((1+q^2)(1+q^4))",
            |p, c| eta_quotient(&[(2, 10), (1, -4), (4, -2)], p.q()?, c),
            second_rhs,
            sample_nome,
        )
        .constraints(nome_window()),
        IdentityEntry::new(
            "eq-4.4",
            "eta quotient eta(3t)^3/eta(t)",
            "eta(3t)^3/eta(t) = c [-1 + (q^6;q^3)(-1/q;q^3)/((-q;q^3)(q^4;q^3)) 2phi1(q,-1/q^5;-1/q;q^3,q^6)] + c (q^6;q^3)(-q^4;q^3)/((-q^8;q^3)(q^2;q^3)) 2phi1(1/q,-q^2;-q^4;q^3,q^6), c = q^(4/3)(1+q+q^2)/((1+q^2)(1+q^5))",
            |p, c| eta_quotient(&[(3, 3), (1, -1)], p.q()?, c),
            third_rhs,
            sample_nome,
        )
        .constraints(nome_window())
        .guard_digits(CANCELLATION_GUARD),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionCtx {
        PrecisionCtx::new(40).unwrap()
    }

    #[test]
    fn eta_values() {
        let c = ctx();
        let v = eta_nome(&c.parse("0.1").unwrap(), &c).unwrap();
        let expect = c.parse("0.8085898183566058971009680158241276081224").unwrap();
        assert!((v.value - expect).abs().to_f64() < 1e-38);
        assert!(eta_nome(&c.real(1e-6), &c).unwrap().value < c.real(0.6));
        assert!(eta_nome(&c.one(), &c).is_err());
    }

    #[test]
    fn eta_power_identity() {
        let c = ctx();
        let q = c.real(0.37);
        let lhs = eta_nome(&q, &c).unwrap().value.powi(24) / &q;
        let rhs = pochhammer_inf(&q, &q, &c).unwrap().value.powi(24);
        assert!(((&lhs - &rhs) / &rhs).abs().to_f64() < 1e-38);
    }

    #[test]
    fn quotient_forms() {
        let c = ctx();
        assert_eq!(eta_quotient(&[], &c.real(0.3), &c).unwrap().value, c.one());
        let q = c.real(0.2);
        let v = eta_quotient(&[(1, 1), (2, -2)], &q, &c).unwrap().value;
        let qq = q.powi(2);
        let direct = qpow(&q, &frac(&c, -1, 8), &c).unwrap() * pochhammer_inf(&q, &q, &c).unwrap().value
            / pochhammer_inf(&qq, &qq, &c).unwrap().value.powi(2);
        assert!(((&v - &direct) / &direct).abs().to_f64() < 1e-38);
    }

    #[test]
    fn quotient_matches_power_oracle() {
        // η(2τ)^10 / (η(τ)^4 η(4τ)^2) = q^{1/3} (q^2;q^2)^10 / ((q;q)^4 (q^4;q^4)^2)
        let c = ctx();
        let q = c.parse("0.15").unwrap();
        let v = eta_quotient(&[(2, 10), (1, -4), (4, -2)], &q, &c).unwrap().value;
        let p = |x: Real| pochhammer_inf(&x, &x, &c).unwrap().value;
        let oracle = qpow(&q, &frac(&c, 1, 3), &c).unwrap() * p(q.powi(2)).powi(10)
            / (p(q.clone()).powi(4) * p(q.powi(4)).powi(2));
        assert!(((&v - &oracle) / &oracle).abs().to_f64() < 1e-30);
    }
}
