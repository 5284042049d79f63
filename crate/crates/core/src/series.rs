//! Evaluated sums and products carrying a truncation-error estimate.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::real::{PrecisionCtx, Real};

/// An evaluated sum or product with its error budget.
///
/// `err_estimate` bounds the truncation error plus an allowance for
/// rounding at the working precision. `certified` is only set when the
/// truncation part came from a proven geometric or monotone tail bound.
#[derive(Debug, Clone)]
pub struct SeriesValue {
    pub value: Real,
    pub err_estimate: Real,
    pub terms_used: usize,
    pub certified: bool,
}

impl SeriesValue {
    /// A value known exactly up to rounding.
    pub fn exact(value: Real) -> Self {
        let err_estimate = Real::zero(value.bits());
        SeriesValue {
            value,
            err_estimate,
            terms_used: 0,
            certified: true,
        }
    }

    /// A value carrying only the rounding allowance of one operation.
    pub fn rounded(value: Real) -> Self {
        let err_estimate = rounding(&value);
        SeriesValue {
            value,
            err_estimate,
            terms_used: 0,
            certified: true,
        }
    }

    pub fn rel_err(&self) -> f64 {
        if self.value.is_zero() {
            return if self.err_estimate.is_zero() {
                0.0
            } else {
                f64::INFINITY
            };
        }
        (&self.err_estimate / &self.value.abs()).to_f64()
    }

    pub fn powi(&self, n: i64) -> SeriesValue {
        let value = self.value.powi(n);
        let rel = &self.err_estimate / &self.value.abs();
        let err = &value.abs() * &(&rel * n.abs()) + rounding(&value);
        SeriesValue {
            value,
            err_estimate: err,
            terms_used: self.terms_used,
            certified: self.certified,
        }
    }

    pub fn scale(&self, k: &Real) -> SeriesValue {
        let value = &self.value * k;
        let err = &self.err_estimate * &k.abs() + rounding(&value);
        SeriesValue {
            value,
            err_estimate: err,
            terms_used: self.terms_used,
            certified: self.certified,
        }
    }

    /// Fails on NaN or infinite results; otherwise drops the certified flag
    /// when the error budget exceeds the context's tail tolerance.
    pub fn finish(mut self, ctx: &PrecisionCtx) -> Result<SeriesValue> {
        if !self.value.is_finite() || !self.err_estimate.is_finite() {
            return Err(Error::Breakdown("non-finite intermediate value".into()));
        }
        if self.certified {
            let limit = &self.value.abs() * &ctx.real(ctx.tail_rel_tol());
            if self.err_estimate > limit {
                self.certified = false;
            }
        }
        Ok(self)
    }
}

fn rounding(v: &Real) -> Real {
    let eps = Real::from_f64(2f64.powi(-(v.bits() as i32)), v.bits());
    &v.abs() * &eps
}

impl From<Real> for SeriesValue {
    fn from(value: Real) -> Self {
        SeriesValue::exact(value)
    }
}

impl Neg for SeriesValue {
    type Output = SeriesValue;
    fn neg(self) -> SeriesValue {
        SeriesValue {
            value: -self.value,
            ..self
        }
    }
}

impl Neg for &SeriesValue {
    type Output = SeriesValue;
    fn neg(self) -> SeriesValue {
        -self.clone()
    }
}

fn combine(a: &SeriesValue, b: &SeriesValue, value: Real, err: Real) -> SeriesValue {
    let err = err + rounding(&value);
    SeriesValue {
        value,
        err_estimate: err,
        terms_used: a.terms_used + b.terms_used,
        certified: a.certified && b.certified,
    }
}

macro_rules! series_binop {
    ($tr:ident, $m:ident, |$a:ident, $b:ident| $val:expr, $err:expr) => {
        impl $tr<&SeriesValue> for &SeriesValue {
            type Output = SeriesValue;
            #[allow(clippy::suspicious_arithmetic_impl)]
            fn $m(self, rhs: &SeriesValue) -> SeriesValue {
                let ($a, $b) = (self, rhs);
                let value = $val;
                let err = $err(&value);
                combine($a, $b, value, err)
            }
        }
        impl $tr<SeriesValue> for SeriesValue {
            type Output = SeriesValue;
            fn $m(self, rhs: SeriesValue) -> SeriesValue {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&SeriesValue> for SeriesValue {
            type Output = SeriesValue;
            fn $m(self, rhs: &SeriesValue) -> SeriesValue {
                (&self).$m(rhs)
            }
        }
        impl $tr<SeriesValue> for &SeriesValue {
            type Output = SeriesValue;
            fn $m(self, rhs: SeriesValue) -> SeriesValue {
                self.$m(&rhs)
            }
        }
    };
}

series_binop!(Add, add, |a, b| &a.value + &b.value, |_: &Real| &a.err_estimate
    + &b.err_estimate);
series_binop!(Sub, sub, |a, b| &a.value - &b.value, |_: &Real| &a.err_estimate
    + &b.err_estimate);
series_binop!(Mul, mul, |a, b| &a.value * &b.value, |_: &Real| &(&a.value.abs()
    * &b.err_estimate)
    + &(&b.value.abs() * &a.err_estimate));
series_binop!(Div, div, |a, b| &a.value / &b.value, |v: &Real| &(&a
    .err_estimate
    + &(&v.abs() * &b.err_estimate))
    / &b.value.abs());
