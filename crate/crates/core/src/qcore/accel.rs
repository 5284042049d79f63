//! Convergence acceleration for slowly converging classical series.
//!
//! All three transforms return `certified = false`: their error estimates
//! come from the stability of successive estimates, not from a bound.

use crate::error::{Error, Result};
use crate::real::Real;
use crate::series::SeriesValue;

/// Minimum number of terms accepted by [`accelerate`].
pub const MIN_TERMS: usize = 8;

const LEVIN_MAX_ORDER: usize = 80;
const WYNN_WINDOW: usize = 41;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccelKind {
    /// Levin u-transform, order picked by successive-estimate agreement.
    LevinU,
    /// Wynn epsilon algorithm over the trailing partial sums.
    WynnEpsilon,
    /// Raw partial sum plus a tail fitted to the asymptotic term law.
    RawWithTail,
}

/// Estimates `Σ terms[n]` from its first `terms.len()` terms.
pub fn accelerate(terms: &[Real], kind: AccelKind) -> Result<SeriesValue> {
    if terms.len() < MIN_TERMS {
        return Err(Error::InsufficientTerms {
            need: MIN_TERMS,
            got: terms.len(),
        });
    }
    if terms.iter().any(|t| !t.is_finite()) {
        return Err(Error::Breakdown("non-finite input term".into()));
    }
    match kind {
        AccelKind::LevinU => levin_u(terms),
        AccelKind::WynnEpsilon => wynn_epsilon(terms),
        AccelKind::RawWithTail => raw_with_tail(terms),
    }
}

fn finish(value: Real, err: Real, terms: usize) -> Result<SeriesValue> {
    if !value.is_finite() || !err.is_finite() {
        return Err(Error::Breakdown("transform produced a non-finite value".into()));
    }
    Ok(SeriesValue {
        value,
        err_estimate: err,
        terms_used: terms,
        certified: false,
    })
}

/// Levin u with `β = 1`: remainder estimates `ω_n = (n+1) a_n`.
///
/// `L_k = Σ_j (-1)^j C(k,j) (j+1)^{k-1} s_j/ω_j / Σ_j (-1)^j C(k,j) (j+1)^{k-1}/ω_j`
/// over `j = 0..=k`; the alternating sums cancel heavily, so the transform
/// runs with four extra bits per order.
fn levin_u(terms: &[Real]) -> Result<SeriesValue> {
    let kmax = (terms.len() - 1).min(LEVIN_MAX_ORDER);
    let bits = terms[0].bits() + 4 * kmax + 64;
    let mut partial = Vec::with_capacity(kmax + 1);
    let mut inv_omega = Vec::with_capacity(kmax + 1);
    let mut s = Real::zero(bits);
    for (n, t) in terms.iter().take(kmax + 1).enumerate() {
        let t = t.with_bits(bits);
        if t.is_zero() {
            return Err(Error::Breakdown(format!(
                "term {n} vanishes; remainder estimate undefined"
            )));
        }
        s += &t;
        partial.push(s.clone());
        inv_omega.push((t * (n as i64 + 1)).recip());
    }

    let mut estimates: Vec<Real> = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        let mut num = Real::zero(bits);
        let mut den = Real::zero(bits);
        let mut binom = Real::from_i64(1, bits);
        for j in 0..=k {
            let w = &binom * &Real::from_i64(j as i64 + 1, bits).powi(k as i64 - 1);
            let w = if j % 2 == 1 { -w } else { w };
            num += &(&w * &(&partial[j] * &inv_omega[j]));
            den += &(&w * &inv_omega[j]);
            binom = binom * (k - j) as i64 / (j as i64 + 1);
        }
        // a vanishing denominator only disqualifies this order
        if !den.is_zero() {
            estimates.push(num / den);
        }
    }
    pick_stable(&estimates, terms[0].bits(), kmax + 1)
}

/// Chooses the estimate that agrees best with its predecessor.
fn pick_stable(estimates: &[Real], bits: usize, used: usize) -> Result<SeriesValue> {
    if estimates.len() < 2 {
        return Err(Error::Breakdown("too few transform orders".into()));
    }
    let mut best = 1;
    let mut best_diff = (&estimates[1] - &estimates[0]).abs();
    for i in 2..estimates.len() {
        let d = (&estimates[i] - &estimates[i - 1]).abs();
        if d < best_diff {
            best = i;
            best_diff = d;
        }
    }
    finish(estimates[best].with_bits(bits), best_diff.with_bits(bits), used)
}

fn wynn_epsilon(terms: &[Real]) -> Result<SeriesValue> {
    let out_bits = terms[0].bits();
    let bits = out_bits + 64;
    let mut s = Real::zero(bits);
    let partial: Vec<Real> = terms
        .iter()
        .map(|t| {
            s += &t.with_bits(bits);
            s.clone()
        })
        .collect();
    let start = partial.len().saturating_sub(WYNN_WINDOW);
    let window = &partial[start..];

    // prev = column k-1, cur = column k; even columns hold estimates
    let mut prev: Vec<Real> = vec![Real::zero(bits); window.len() + 1];
    let mut cur: Vec<Real> = window.to_vec();
    let mut estimates = vec![cur[cur.len() - 1].clone()];
    let mut k = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for n in 0..cur.len() - 1 {
            let diff = &cur[n + 1] - &cur[n];
            if diff.is_zero() {
                // converged exactly along this diagonal
                let v = cur[n + 1].clone();
                return finish(v.with_bits(out_bits), Real::zero(out_bits), terms.len());
            }
            next.push(&prev[n + 1] + &diff.recip());
        }
        k += 1;
        prev = cur;
        cur = next;
        if k % 2 == 0 {
            estimates.push(cur[cur.len() - 1].clone());
        }
    }
    pick_stable(&estimates, out_bits, terms.len())
}

/// Raw partial sum plus a fitted tail. Geometric tails (stable ratio of the
/// last terms, bounded away from 1) use `a_N r/(1-r)`; otherwise the terms
/// are modelled as `C n^{-s}` and the tail integral from `N + 1/2` is added.
fn raw_with_tail(terms: &[Real]) -> Result<SeriesValue> {
    let bits = terms[0].bits();
    let n = terms.len() - 1;
    let mut sum = Real::zero(bits);
    for t in terms {
        sum += t;
    }
    let (a2, a1, a0) = (&terms[n - 2], &terms[n - 1], &terms[n]);
    if a0.is_zero() {
        return finish(sum, Real::zero(bits), terms.len());
    }
    if a1.is_zero() || a2.is_zero() {
        return Err(Error::Breakdown("zero term in the fitting window".into()));
    }
    let r1 = a0 / a1;
    let r2 = a1 / a2;
    let r1f = r1.to_f64();
    let r2f = r2.to_f64();
    let geometric = r1f.abs() < 0.98 && (r1f - r2f).abs() < 1e-3 * r1f.abs().max(1e-300);
    if geometric || r1f < 0.0 {
        let tail = a0 * &r1 / (1 - &r1);
        let tail_prev = a0 * &r2 / (1 - &r2);
        let err = (&tail - &tail_prev).abs();
        return finish(sum + tail, err, terms.len());
    }
    // terms[i] is modelled as C (i+1)^{-s}
    let power_tail = |last: &Real, prev: &Real, idx: usize| -> Result<Real> {
        let nb = Real::from_i64(idx as i64 + 1, bits);
        let nb1 = Real::from_i64(idx as i64, bits);
        let s = (prev / last).ln() / (&nb / &nb1).ln();
        if s <= Real::from_i64(1, bits) {
            return Err(Error::Breakdown(
                "fitted power law does not decay faster than 1/n".into(),
            ));
        }
        let c = last * &nb.pow(&s);
        let start = &nb + &Real::from_f64(0.5, bits);
        let sm1 = &s - 1;
        Ok(c * start.pow(&(-&sm1)) / sm1)
    };
    let tail = power_tail(a0, a1, n)?;
    let tail_prev = power_tail(a1, a2, n - 1)? - a0;
    let err = (&tail - &tail_prev).abs();
    finish(sum + tail, err, terms.len())
}
