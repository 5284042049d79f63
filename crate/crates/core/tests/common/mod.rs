//! Property checks shared by the proptest suites and the acceptance run.
//! Each returns `Err(message)` on a violated property and `Ok(false)` when
//! the drawn case is too close to a pole to be meaningful.
#![allow(dead_code)]

use qseries::qcore::{phi, pochhammer_inf, pochhammer_n, psi_bilateral};
use qseries::qgamma::{classical_gamma, gamma_q};
use qseries::real::{PrecisionCtx, Real};

pub type Check = Result<bool, String>;

pub fn ctx40() -> PrecisionCtx {
    PrecisionCtx::new(40).unwrap()
}

pub fn rel(a: &Real, b: &Real) -> f64 {
    let scale = a.abs().max(&b.abs());
    if scale.is_zero() {
        return 0.0;
    }
    ((a - b).abs() / scale).to_f64()
}

fn near_pole(a: f64, q: f64, range: std::ops::RangeInclusive<i64>) -> bool {
    range
        .into_iter()
        .any(|k| (1.0 - a * q.powi(k as i32)).abs() < 1e-6)
}

/// `(a;q)_{n+1} = (a;q)_n (1 - a q^n)`.
pub fn recurrence(a: f64, q: f64, n: i64) -> Check {
    if near_pole(a, q, -(n.abs() + 1)..=-1) {
        return Ok(false);
    }
    let c = ctx40();
    let (ar, qr) = (c.real(a), c.real(q));
    let lhs = pochhammer_n(&ar, &qr, n + 1, &c)
        .map_err(|e| e.to_string())?
        .value;
    let step = 1 - &(&ar * &qr.powi(n));
    let rhs = pochhammer_n(&ar, &qr, n, &c).map_err(|e| e.to_string())?.value * step;
    let r = rel(&lhs, &rhs);
    if r > 1e-30 {
        return Err(format!("a={a} q={q} n={n}: relErr {r:e}"));
    }
    Ok(true)
}

/// `(a;q)_n (a q^n;q)_∞ = (a;q)_∞`.
pub fn gluing(a: f64, q: f64, n: i64) -> Check {
    if near_pole(a, q, -(n.abs())..=-1) {
        return Ok(false);
    }
    let c = ctx40();
    let (ar, qr) = (c.real(a), c.real(q));
    let fin = pochhammer_n(&ar, &qr, n, &c).map_err(|e| e.to_string())?.value;
    let tail = pochhammer_inf(&(&ar * &qr.powi(n)), &qr, &c)
        .map_err(|e| e.to_string())?
        .value;
    let full = pochhammer_inf(&ar, &qr, &c).map_err(|e| e.to_string())?.value;
    let r = rel(&(fin * tail), &full);
    if r > 1e-28 {
        return Err(format!("a={a} q={q} n={n}: relErr {r:e}"));
    }
    Ok(true)
}

/// `1φ0(a;;q,z) (z;q)_∞ = (az;q)_∞`.
pub fn q_binomial(a: f64, q: f64, z: f64) -> Check {
    if near_pole(a * z, q, -40..=0) {
        return Ok(false);
    }
    let c = ctx40();
    let (ar, qr, zr) = (c.real(a), c.real(q), c.real(z));
    let s = phi(std::slice::from_ref(&ar), &[], &qr, &zr, &c)
        .map_err(|e| e.to_string())?
        .value;
    let lhs = s * pochhammer_inf(&zr, &qr, &c).map_err(|e| e.to_string())?.value;
    let rhs = pochhammer_inf(&(&ar * &zr), &qr, &c)
        .map_err(|e| e.to_string())?
        .value;
    let r = rel(&lhs, &rhs);
    if r > 1e-28 {
        return Err(format!("a={a} q={q} z={z}: relErr {r:e}"));
    }
    Ok(true)
}

/// Split bilateral sum against the direct window `-n..=n`.
pub fn bilateral_split(a: f64, b: f64, q: f64, z: f64, n: i64) -> Check {
    if near_pole(a, q, -n..=n) || near_pole(b, q, -n..=n) {
        return Ok(false);
    }
    let c = ctx40();
    let (ar, br, qr, zr) = (c.real(a), c.real(b), c.real(q), c.real(z));
    let split = psi_bilateral(std::slice::from_ref(&ar), std::slice::from_ref(&br), &qr, &zr, &c)
        .map_err(|e| e.to_string())?
        .value;
    let mut sum = c.one();
    let mut abs = c.one();
    let mut t = c.one();
    for k in 0..n {
        let qk = qr.powi(k);
        t = t * (1 - &(&ar * &qk)) / (1 - &(&br * &qk)) * &zr;
        sum += &t;
        abs += t.abs();
    }
    let mut t = c.one();
    for k in 1..=n {
        let qk = qr.powi(-k);
        t = t * (1 - &(&br * &qk)) / ((1 - &(&ar * &qk)) * &zr);
        sum += &t;
        abs += t.abs();
    }
    let d = ((&split - &sum).abs() / abs).to_f64();
    if d > 1e-25 {
        return Err(format!("a={a} b={b} q={q} z={z}: diff {d:e} of the absolute sum"));
    }
    Ok(true)
}

/// Recomputing a certified value with more digits and a larger term cap
/// moves it by less than twice its error estimate.
pub fn error_honesty(a: f64, b: f64, q: f64, z: f64) -> Check {
    let c = ctx40();
    let wide = c
        .with_extra_digits(20)
        .unwrap()
        .with_max_terms(c.max_terms() * 4)
        .unwrap();
    let eval = |ctx: &PrecisionCtx| {
        let (ar, br, qr, zr) = (ctx.real(a), ctx.real(b), ctx.real(q), ctx.real(z));
        let p = pochhammer_inf(&ar, &qr, ctx)?;
        let s = phi(&[ar, br], &[ctx.real(0.5)], &qr, &zr, ctx)?;
        Ok::<_, qseries::error::Error>([p, s])
    };
    let lo = eval(&c).map_err(|e| e.to_string())?;
    let hi = eval(&wide).map_err(|e| e.to_string())?;
    let mut checked = false;
    for (l, h) in lo.iter().zip(&hi) {
        if !l.certified {
            continue;
        }
        checked = true;
        let moved = (&l.value - &h.value).abs();
        if moved > 2 * &l.err_estimate {
            return Err(format!(
                "a={a} b={b} q={q} z={z}: moved {} with errEstimate {}",
                moved.to_sci_string(4),
                l.err_estimate.to_sci_string(4)
            ));
        }
    }
    Ok(checked)
}

/// Euler: `Σ z^n/(q;q)_n = 1/(z;q)_∞`, and the even/odd split
/// `(z;q)_∞ = (z;q^2)_∞ (zq;q^2)_∞`.
pub fn euler_split(q: f64, z: f64) -> Check {
    let c = ctx40();
    let (qr, zr) = (c.real(q), c.real(z));
    let s = phi(&[], &[], &qr, &zr, &c).map_err(|e| e.to_string())?.value;
    let p = pochhammer_inf(&zr, &qr, &c).map_err(|e| e.to_string())?.value;
    let r = rel(&(&s * &p), &c.one());
    if r > 1e-30 {
        return Err(format!("q={q} z={z}: Euler sum relErr {r:e}"));
    }
    let q2 = qr.powi(2);
    let even = pochhammer_inf(&zr, &q2, &c).map_err(|e| e.to_string())?.value;
    let odd = pochhammer_inf(&(&zr * &qr), &q2, &c)
        .map_err(|e| e.to_string())?
        .value;
    let r = rel(&(even * odd), &p);
    if r > 1e-30 {
        return Err(format!("q={q} z={z}: even/odd split relErr {r:e}"));
    }
    Ok(true)
}

/// `Γ_q(x+1) = (1-q^x)/(1-q) Γ_q(x)`.
pub fn gamma_q_functional(x: f64, q: f64) -> Check {
    let c = ctx40();
    let (xr, qr) = (c.real(x), c.real(q));
    let g1 = gamma_q(&(&xr + 1), &qr, &c).map_err(|e| e.to_string())?.value;
    let g0 = gamma_q(&xr, &qr, &c).map_err(|e| e.to_string())?.value;
    let k = (1 - &(xr * qr.ln()).exp()) / (1 - &qr);
    let r = rel(&g1, &(k * g0));
    if r > 1e-25 {
        return Err(format!("x={x} q={q}: relErr {r:e}"));
    }
    Ok(true)
}

/// `Γ(x) Γ(1-x) sin(πx) / π = 1`.
pub fn reflection(x: f64) -> Check {
    let c = ctx40();
    let xr = c.real(x);
    let pi = c.pi();
    let v = classical_gamma(&xr, &c).map_err(|e| e.to_string())?
        * classical_gamma(&(1 - &xr), &c).map_err(|e| e.to_string())?
        * (&pi * &xr).sin()
        / pi;
    let r = rel(&v, &c.one());
    if r > 1e-38 {
        return Err(format!("x={x}: relErr {r:e}"));
    }
    Ok(true)
}
