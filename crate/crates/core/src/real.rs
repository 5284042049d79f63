//! Arbitrary-precision reals and the precision context that governs every
//! evaluation.
//!
//! [`Real`] wraps an `astro_float::BigFloat` together with its binary
//! precision. Binary operations run at the larger of the two operand
//! precisions, so values built from the same [`PrecisionCtx`] never lose
//! bits silently.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};

use crate::error::{Error, Result};

const RM: RoundingMode = RoundingMode::ToEven;
const LOG2_10: f64 = std::f64::consts::LOG2_10;

thread_local! {
    static CONSTS: RefCell<Consts> =
        RefCell::new(Consts::new().expect("constant cache allocation"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Number of bits needed to carry `digits` significant decimal digits.
pub fn bits_for_digits(digits: u32) -> usize {
    (digits as f64 * LOG2_10).ceil() as usize + 16
}

/// Working precision, truncation limits and tail tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionCtx {
    digits: u32,
    max_terms: usize,
    tail_rel_tol: f64,
    guard_digits: u32,
}

impl PrecisionCtx {
    pub const DEFAULT_MAX_TERMS: usize = 1_000_000;
    pub const DEFAULT_GUARD_DIGITS: u32 = 10;

    /// Context with `digits` decimal digits, tail tolerance `10^-digits`,
    /// ten guard digits and the default term cap.
    pub fn new(digits: u32) -> Result<Self> {
        Self::with_all(
            digits,
            Self::DEFAULT_MAX_TERMS,
            10f64.powi(-(digits as i32)),
            Self::DEFAULT_GUARD_DIGITS,
        )
    }

    pub fn with_all(digits: u32, max_terms: usize, tail_rel_tol: f64, guard_digits: u32) -> Result<Self> {
        if !(10..=300).contains(&digits) {
            return Err(Error::InvalidContext(format!(
                "digits must lie in 10..=300, got {digits}"
            )));
        }
        if max_terms == 0 {
            return Err(Error::InvalidContext("maxTerms must be >= 1".into()));
        }
        if !(tail_rel_tol > 0.0 && tail_rel_tol < 1.0) {
            return Err(Error::InvalidContext(format!(
                "tailRelTol must lie in (0,1), got {tail_rel_tol}"
            )));
        }
        Ok(Self {
            digits,
            max_terms,
            tail_rel_tol,
            guard_digits,
        })
    }

    pub fn with_max_terms(&self, max_terms: usize) -> Result<Self> {
        Self::with_all(self.digits, max_terms, self.tail_rel_tol, self.guard_digits)
    }

    pub fn with_tail_rel_tol(&self, tol: f64) -> Result<Self> {
        Self::with_all(self.digits, self.max_terms, tol, self.guard_digits)
    }

    pub fn with_guard_digits(&self, guard: u32) -> Result<Self> {
        Self::with_all(self.digits, self.max_terms, self.tail_rel_tol, guard)
    }

    /// Same settings with `extra` more digits, tolerance tightened to match.
    pub fn with_extra_digits(&self, extra: u32) -> Result<Self> {
        let digits = self.digits + extra;
        Self::with_all(
            digits,
            self.max_terms,
            self.tail_rel_tol * 10f64.powi(-(extra as i32)),
            self.guard_digits,
        )
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn tail_rel_tol(&self) -> f64 {
        self.tail_rel_tol
    }

    pub fn guard_digits(&self) -> u32 {
        self.guard_digits
    }

    /// Binary precision used for all internal arithmetic.
    pub fn bits(&self) -> usize {
        bits_for_digits(self.digits + self.guard_digits)
    }

    /// Unit roundoff at the working precision.
    pub fn epsilon(&self) -> f64 {
        2f64.powi(1 - self.bits() as i32)
    }

    pub fn real(&self, x: f64) -> Real {
        Real::from_f64(x, self.bits())
    }

    pub fn int(&self, i: i64) -> Real {
        Real::from_i64(i, self.bits())
    }

    pub fn zero(&self) -> Real {
        Real::zero(self.bits())
    }

    pub fn one(&self) -> Real {
        Real::from_i64(1, self.bits())
    }

    pub fn parse(&self, s: &str) -> Result<Real> {
        Real::parse(s, self.bits())
    }

    pub fn pi(&self) -> Real {
        Real::pi(self.bits())
    }
}

/// Arbitrary-precision real number.
#[derive(Clone)]
pub struct Real {
    v: BigFloat,
    bits: usize,
}

impl Real {
    fn wrap(v: BigFloat, bits: usize) -> Self {
        Real { v, bits }
    }

    pub fn zero(bits: usize) -> Self {
        Self::wrap(BigFloat::from_word(0, bits), bits)
    }

    pub fn from_f64(x: f64, bits: usize) -> Self {
        Self::wrap(BigFloat::from_f64(x, bits), bits)
    }

    pub fn from_i64(i: i64, bits: usize) -> Self {
        Self::wrap(BigFloat::from_i64(i, bits), bits)
    }

    pub fn pi(bits: usize) -> Self {
        Self::wrap(with_consts(|cc| cc.pi(bits, RM)), bits)
    }

    /// Parses a decimal literal such as `-1.25e-3`.
    pub fn parse(s: &str, bits: usize) -> Result<Self> {
        let t = s.trim();
        let well_formed = !t.is_empty()
            && t.chars()
                .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
            && t.chars().any(|c| c.is_ascii_digit());
        if !well_formed {
            return Err(Error::Syntax {
                pos: 0,
                msg: format!("not a decimal number: '{s}'"),
            });
        }
        let v = with_consts(|cc| BigFloat::parse(t, Radix::Dec, bits, RM, cc));
        if v.is_nan() || v.is_inf() {
            return Err(Error::Syntax {
                pos: 0,
                msg: format!("not a decimal number: '{s}'"),
            });
        }
        Ok(Self::wrap(v, bits))
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Rounds (or widens) to `bits` of precision.
    pub fn with_bits(&self, bits: usize) -> Self {
        let mut v = self.v.clone();
        // Only fails on NaN, which keeps its state.
        let _ = v.set_precision(bits, RM);
        Self::wrap(v, bits)
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.v.is_nan() && !self.v.is_inf()
    }

    pub fn is_negative(&self) -> bool {
        !self.is_zero() && self.v.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        !self.is_zero() && self.v.is_positive()
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.v.abs(), self.bits)
    }

    pub fn recip(&self) -> Self {
        Self::wrap(self.v.reciprocal(self.bits, RM), self.bits)
    }

    pub fn sqrt(&self) -> Self {
        Self::wrap(self.v.sqrt(self.bits, RM), self.bits)
    }

    pub fn ln(&self) -> Self {
        let v = with_consts(|cc| self.v.ln(self.bits, RM, cc));
        Self::wrap(v, self.bits)
    }

    pub fn exp(&self) -> Self {
        let v = with_consts(|cc| self.v.exp(self.bits, RM, cc));
        Self::wrap(v, self.bits)
    }

    pub fn sin(&self) -> Self {
        let v = with_consts(|cc| self.v.sin(self.bits, RM, cc));
        Self::wrap(v, self.bits)
    }

    /// `self^e` for positive `self`.
    pub fn pow(&self, e: &Real) -> Self {
        let bits = self.bits.max(e.bits);
        (e * &self.ln()).exp().with_bits(bits)
    }

    /// Integer power by repeated squaring; negative exponents via reciprocal.
    pub fn powi(&self, n: i64) -> Self {
        let mut base = self.clone();
        let mut acc = Real::from_i64(1, self.bits);
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    pub fn max(&self, other: &Real) -> Real {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn min(&self, other: &Real) -> Real {
        if self <= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    /// Nearest integer, ties to even.
    pub fn round(&self) -> Self {
        Self::wrap(self.v.round(0, RM), self.bits)
    }

    pub fn floor(&self) -> Self {
        Self::wrap(self.v.floor(), self.bits)
    }

    /// Closest `f64`; magnitudes beyond the `f64` range saturate.
    pub fn to_f64(&self) -> f64 {
        if self.v.is_nan() {
            return f64::NAN;
        }
        if self.v.is_inf() {
            return if self.v.is_inf_pos() {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            };
        }
        if self.is_zero() {
            return 0.0;
        }
        let Some((m, _, sign, e, _)) = self.v.as_raw_parts() else {
            return f64::NAN;
        };
        let top = *m.last().unwrap_or(&0) as f64 / 18446744073709551616.0;
        let mag = if e > 1100 {
            f64::INFINITY
        } else if e < -1100 {
            0.0
        } else {
            top * 2f64.powi(e)
        };
        if sign == Sign::Neg {
            -mag
        } else {
            mag
        }
    }

    /// Approximate base-2 exponent: `|self|` lies in `[2^(e-1), 2^e)`.
    pub fn exponent2(&self) -> Option<i32> {
        if self.is_zero() || !self.is_finite() {
            None
        } else {
            self.v.exponent()
        }
    }

    /// Rough `log10 |self|`, usable far outside the `f64` range.
    pub fn log10_abs(&self) -> f64 {
        match self.v.as_raw_parts() {
            Some((m, _, _, e, _)) if !self.is_zero() => {
                let top = *m.last().unwrap_or(&0) as f64 / 18446744073709551616.0;
                (top.log2() + e as f64) / LOG2_10
            }
            _ => f64::NEG_INFINITY,
        }
    }

    /// Scientific notation with exactly `digits` significant digits,
    /// round-half-even, e.g. `-1.2500e-3`. Zero prints as `0.000e+0`.
    pub fn to_sci_string(&self, digits: usize) -> String {
        let digits = digits.max(1);
        if !self.is_finite() {
            return if self.v.is_nan() {
                "NaN".into()
            } else if self.v.is_inf_pos() {
                "inf".into()
            } else {
                "-inf".into()
            };
        }
        if self.is_zero() {
            return sci_layout(false, &"0".repeat(digits), 0);
        }
        let bits = self.bits.max(bits_for_digits(digits as u32 + 10));
        let a = self.abs().with_bits(bits);
        let ten = Real::from_i64(10, bits);
        let upper = ten.powi(digits as i64);
        let lower = ten.powi(digits as i64 - 1);
        let mut e10 = a.log10_abs().floor() as i64;
        let mut n = Real::zero(bits);
        for _ in 0..4 {
            let shift = digits as i64 - 1 - e10;
            let scaled = &a * &ten.powi(shift);
            n = scaled.round();
            if n >= upper {
                e10 += 1;
            } else if n < lower {
                e10 -= 1;
            } else {
                break;
            }
        }
        let body = integer_digits(&n, digits);
        sci_layout(self.is_negative(), &body, e10)
    }
}

fn sci_layout(neg: bool, body: &str, e10: i64) -> String {
    let (head, tail) = body.split_at(1);
    let sign = if neg { "-" } else { "" };
    let esign = if e10 < 0 { '-' } else { '+' };
    if tail.is_empty() {
        format!("{sign}{head}e{esign}{}", e10.unsigned_abs())
    } else {
        format!("{sign}{head}.{tail}e{esign}{}", e10.unsigned_abs())
    }
}

/// Decimal digits of a non-negative integer-valued `n`, left-padded to `width`.
fn integer_digits(n: &Real, width: usize) -> String {
    const CHUNK: i64 = 1_000_000_000_000_000; // 10^15 < 2^53
    let chunk = Real::from_i64(CHUNK, n.bits);
    let mut rest = n.clone();
    let mut parts: Vec<u64> = Vec::new();
    while !rest.is_zero() {
        let mut quo = (&rest / &chunk).floor();
        let mut rem = &rest - &(&quo * &chunk);
        if rem.is_negative() {
            quo = &quo - 1;
            rem = &rem + &chunk;
        } else if rem >= chunk {
            quo = &quo + 1;
            rem = &rem - &chunk;
        }
        parts.push(rem.to_f64() as u64);
        rest = quo;
    }
    let mut s = String::new();
    for (i, p) in parts.iter().rev().enumerate() {
        if i == 0 {
            s.push_str(&p.to_string());
        } else {
            s.push_str(&format!("{p:015}"));
        }
    }
    if s.len() < width {
        s = format!("{}{}", "0".repeat(width - s.len()), s);
    }
    s
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f
            .precision()
            .unwrap_or_else(|| ((self.bits as f64) / LOG2_10).floor() as usize);
        f.write_str(&self.to_sci_string(digits))
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({})", self.to_sci_string(30))
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.v.partial_cmp(&other.v) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.v.partial_cmp(&other.v)
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real::wrap(BigFloat::neg(&self.v), self.bits)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real::wrap(BigFloat::neg(&self.v), self.bits)
    }
}

macro_rules! real_binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident, $op:ident) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                let p = self.bits.max(rhs.bits);
                Real::wrap(self.v.$op(&rhs.v, p, RM), p)
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                (&self).$m(rhs)
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                self.$m(&rhs)
            }
        }
        impl $tr<i64> for &Real {
            type Output = Real;
            fn $m(self, rhs: i64) -> Real {
                self.$m(&Real::from_i64(rhs, self.bits))
            }
        }
        impl $tr<i64> for Real {
            type Output = Real;
            fn $m(self, rhs: i64) -> Real {
                (&self).$m(&Real::from_i64(rhs, self.bits))
            }
        }
        impl $tr<&Real> for i64 {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                Real::from_i64(self, rhs.bits).$m(rhs)
            }
        }
        impl $tr<Real> for i64 {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                Real::from_i64(self, rhs.bits).$m(&rhs)
            }
        }
        impl $atr<&Real> for Real {
            fn $am(&mut self, rhs: &Real) {
                *self = (&*self).$m(rhs);
            }
        }
        impl $atr<Real> for Real {
            fn $am(&mut self, rhs: Real) {
                *self = (&*self).$m(&rhs);
            }
        }
    };
}

real_binop!(Add, add, AddAssign, add_assign, add);
real_binop!(Sub, sub, SubAssign, sub_assign, sub);
real_binop!(Mul, mul, MulAssign, mul_assign, mul);
real_binop!(Div, div, DivAssign, div_assign, div);
