//! Portable point sampling.
//!
//! Every draw is an integer: literals are multiples of `10^-6` and
//! exponents are small fractions, so the decimal text of a sampled point
//! depends only on the ChaCha8 stream, never on floating-point rounding.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::param::ParamExpr;

const MICRO: i64 = 1_000_000;

pub struct Draw<'a> {
    rng: &'a mut ChaCha8Rng,
}

impl<'a> Draw<'a> {
    pub fn new(rng: &'a mut ChaCha8Rng) -> Self {
        Draw { rng }
    }

    /// Integer in `lo..=hi`.
    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.random_range(lo..=hi)
    }

    pub fn coin(&mut self) -> bool {
        self.int(0, 1) == 1
    }

    /// Uniform value in `[lo, hi]` in millionths.
    pub fn micros(&mut self, lo: f64, hi: f64) -> i64 {
        let lo = (lo * MICRO as f64).round() as i64;
        let hi = (hi * MICRO as f64).round() as i64;
        self.int(lo, hi.max(lo))
    }

    /// Literal drawn uniformly from `[lo, hi]`.
    pub fn literal(&mut self, lo: f64, hi: f64) -> ParamExpr {
        ParamExpr::Literal(micros_text(self.micros(lo, hi)))
    }

    /// Literal with magnitude in `[lo, hi]` and a random sign.
    pub fn signed_literal(&mut self, lo: f64, hi: f64) -> ParamExpr {
        let m = self.micros(lo, hi);
        let m = if self.coin() { -m } else { m };
        ParamExpr::Literal(micros_text(m))
    }

    /// `-q^e` with `e = k/d`, `d ∈ {1, 2, 3}` and `lo ≤ e ≤ hi`.
    pub fn neg_q_power(&mut self, lo: i64, hi: i64) -> ParamExpr {
        let d = self.int(1, 3);
        let k = self.int(lo * d, hi * d);
        let g = gcd(k.unsigned_abs(), d as u64).max(1);
        ParamExpr::power(true, k / g as i64, d as u64 / g)
    }

    /// Nome literal in `[lo, hi]`.
    pub fn nome(&mut self, lo: f64, hi: f64) -> String {
        micros_text(self.micros(lo, hi))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Decimal text of `m · 10^-6`, e.g. `-0.050000`.
pub fn micros_text(m: i64) -> String {
    let sign = if m < 0 { "-" } else { "" };
    let a = m.unsigned_abs();
    format!("{sign}{}.{:06}", a / MICRO as u64, a % MICRO as u64)
}
