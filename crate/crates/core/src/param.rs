//! Parameter expressions such as `0.35`, `-q^3`, `2*q^-5/3` and the points
//! built from them.
//!
//! Grammar:
//!
//! ```text
//! expr     := number | ["-"] [number "*"] "q" ["^" rational]
//! rational := integer | integer "/" positive-integer | decimal
//! ```

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::qcore::qpow;
use crate::real::{PrecisionCtx, Real};

/// Largest accepted `|exponent|`.
pub const MAX_EXPONENT: f64 = 100.0;

/// One-line grammar summary used in usage errors.
pub const GRAMMAR: &str =
    "expr := number | [\"-\"] [number \"*\"] \"q\" [\"^\" rational]; rational := integer | integer \"/\" positive-integer | decimal";

/// Exponent of `q` in a power expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rational {
    Int(i64),
    Frac(i64, u64),
    /// Decimal text as written, e.g. `-0.25`.
    Decimal(String),
}

impl Rational {
    fn to_real(&self, ctx: &PrecisionCtx) -> Result<Real> {
        match self {
            Rational::Int(n) => Ok(ctx.int(*n)),
            Rational::Frac(n, d) => Ok(ctx.int(*n) / ctx.int(*d as i64)),
            Rational::Decimal(s) => ctx.parse(s),
        }
    }

    fn approx(&self) -> f64 {
        match self {
            Rational::Int(n) => *n as f64,
            Rational::Frac(n, d) => *n as f64 / *d as f64,
            Rational::Decimal(s) => s.parse().unwrap_or(f64::INFINITY),
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rational::Int(n) => write!(f, "{n}"),
            Rational::Frac(n, d) => write!(f, "{n}/{d}"),
            Rational::Decimal(s) => f.write_str(s),
        }
    }
}

/// A parsed parameter expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamExpr {
    /// Decimal literal, kept verbatim.
    Literal(String),
    /// `sign · coeff · q^exponent`; `exponent = None` means a bare `q`.
    Power {
        negative: bool,
        coeff: Option<String>,
        exponent: Option<Rational>,
    },
}

impl ParamExpr {
    /// Convenience constructor for `sign · q^(num/den)`.
    pub fn power(negative: bool, num: i64, den: u64) -> Self {
        let exponent = if den == 1 {
            Rational::Int(num)
        } else {
            Rational::Frac(num, den)
        };
        ParamExpr::Power {
            negative,
            coeff: None,
            exponent: Some(exponent),
        }
    }

    pub fn literal(text: impl Into<String>) -> Self {
        ParamExpr::Literal(text.into())
    }

    pub fn uses_q(&self) -> bool {
        matches!(self, ParamExpr::Power { .. })
    }

    /// Value at nome `q`; `q` may be `None` for literals.
    pub fn eval(&self, q: Option<&Real>, ctx: &PrecisionCtx) -> Result<Real> {
        match self {
            ParamExpr::Literal(s) => ctx.parse(s),
            ParamExpr::Power {
                negative,
                coeff,
                exponent,
            } => {
                let q = q.ok_or_else(|| Error::MissingParam("q".into()))?;
                let e = match exponent {
                    Some(r) => r.to_real(ctx)?,
                    None => ctx.one(),
                };
                let mut v = qpow(q, &e, ctx)?;
                if let Some(c) = coeff {
                    v *= ctx.parse(c)?;
                }
                Ok(if *negative { -v } else { v })
            }
        }
    }
}

impl fmt::Display for ParamExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamExpr::Literal(s) => f.write_str(s),
            ParamExpr::Power {
                negative,
                coeff,
                exponent,
            } => {
                if *negative {
                    f.write_str("-")?;
                }
                if let Some(c) = coeff {
                    write!(f, "{c}*")?;
                }
                f.write_str("q")?;
                if let Some(e) = exponent {
                    write!(f, "^{e}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::str::FromStr for ParamExpr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_param(s)
    }
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        self.pos - start
    }

    fn text(&self, start: usize) -> String {
        String::from_utf8_lossy(&self.s[start..self.pos]).into_owned()
    }

    /// Unsigned decimal: `digits ["." digits] [("e"|"E") ["+"|"-"] digits]`.
    fn unsigned_number(&mut self) -> Result<String> {
        let start = self.pos;
        let int = self.digits();
        let mut frac = 0;
        if self.eat(b'.') {
            frac = self.digits();
        }
        if int + frac == 0 {
            self.pos = start;
            return Err(self.err("expected a number or 'q'"));
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            self.pos += 1;
            let _ = self.eat(b'+') || self.eat(b'-');
            if self.digits() == 0 {
                return Err(self.err("expected exponent digits"));
            }
        }
        Ok(self.text(start))
    }

    fn rational(&mut self) -> Result<Rational> {
        let start = self.pos;
        let neg = self.eat(b'-');
        let int_start = self.pos;
        if self.digits() == 0 {
            return Err(self.err("expected an integer, fraction or decimal exponent"));
        }
        if self.eat(b'.') {
            if self.digits() == 0 {
                return Err(self.err("expected digits after '.'"));
            }
            return Ok(Rational::Decimal(self.text(start)));
        }
        let magnitude = self.text(int_start);
        let num: i64 = magnitude
            .parse()
            .map_err(|_| Error::ExponentOverflow(self.text(start)))?;
        let num = if neg { -num } else { num };
        if self.eat(b'/') {
            let den_pos = self.pos;
            if self.digits() == 0 {
                return Err(self.err("expected a positive integer denominator"));
            }
            let den: u64 = self
                .text(den_pos)
                .parse()
                .map_err(|_| Error::ExponentOverflow(self.text(start)))?;
            if den == 0 {
                self.pos = den_pos;
                return Err(self.err("denominator must be positive"));
            }
            return Ok(Rational::Frac(num, den));
        }
        Ok(Rational::Int(num))
    }
}

/// Parses a parameter expression. Whitespace is not allowed inside.
pub fn parse_param(text: &str) -> Result<ParamExpr> {
    let mut c = Cursor {
        s: text.as_bytes(),
        pos: 0,
    };
    if text.is_empty() {
        return Err(c.err("empty expression"));
    }
    let negative = c.eat(b'-');
    let expr = if c.peek() == Some(b'q') {
        c.pos += 1;
        power_tail(&mut c, negative, None)?
    } else {
        let num = c.unsigned_number()?;
        if c.eat(b'*') {
            if !c.eat(b'q') {
                return Err(c.err("expected 'q' after '*'"));
            }
            power_tail(&mut c, negative, Some(num))?
        } else {
            ParamExpr::Literal(if negative { format!("-{num}") } else { num })
        }
    };
    if c.pos != c.s.len() {
        return Err(c.err("unexpected trailing input"));
    }
    Ok(expr)
}

fn power_tail(c: &mut Cursor<'_>, negative: bool, coeff: Option<String>) -> Result<ParamExpr> {
    let exponent = if c.eat(b'^') {
        let start = c.pos;
        let r = c.rational()?;
        let mag = r.approx().abs();
        if mag.is_nan() || mag > MAX_EXPONENT {
            return Err(Error::ExponentOverflow(
                String::from_utf8_lossy(&c.s[start..c.pos]).into_owned(),
            ));
        }
        Some(r)
    } else {
        None
    };
    Ok(ParamExpr::Power {
        negative,
        coeff,
        exponent,
    })
}

/// A parameter assignment: an optional nome literal plus named expressions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QPoint {
    pub q: Option<String>,
    pub params: BTreeMap<String, ParamExpr>,
}

impl QPoint {
    pub fn new(q: Option<&str>) -> Self {
        QPoint {
            q: q.map(str::to_string),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, name: &str, expr: ParamExpr) -> Self {
        self.params.insert(name.to_string(), expr);
        self
    }

    /// Parses `expr` and binds it to `name`.
    pub fn set(mut self, name: &str, expr: &str) -> Result<Self> {
        self.params.insert(name.to_string(), parse_param(expr)?);
        Ok(self)
    }

    /// Evaluates every expression at the working precision of `ctx`.
    pub fn resolve(&self, ctx: &PrecisionCtx) -> Result<Resolved> {
        let q = match &self.q {
            Some(s) => {
                let q = ctx.parse(s)?;
                crate::qcore::check_nome(&q)?;
                Some(q)
            }
            None => None,
        };
        let mut vals = BTreeMap::new();
        for (name, e) in &self.params {
            let v = e.eval(q.as_ref(), ctx)?;
            if !v.is_finite() {
                return Err(Error::Domain(format!("parameter {name} is not finite")));
            }
            vals.insert(name.clone(), v);
        }
        Ok(Resolved { q, vals })
    }

    /// `name=expr` pairs in name order, with the nome first.
    pub fn describe(&self) -> Vec<(String, String)> {
        let mut out = Vec::with_capacity(self.params.len() + 1);
        if let Some(q) = &self.q {
            out.push(("q".to_string(), q.clone()));
        }
        for (k, v) in &self.params {
            out.push((k.clone(), v.to_string()));
        }
        out
    }
}

impl fmt::Display for QPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .describe()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// A point with every parameter evaluated.
#[derive(Debug, Clone, Default)]
pub struct Resolved {
    pub q: Option<Real>,
    pub vals: BTreeMap<String, Real>,
}

impl Resolved {
    pub fn q(&self) -> Result<&Real> {
        self.q.as_ref().ok_or_else(|| Error::MissingParam("q".into()))
    }

    pub fn get(&self, name: &str) -> Result<&Real> {
        if name == "q" {
            return self.q();
        }
        self.vals
            .get(name)
            .ok_or_else(|| Error::MissingParam(name.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionCtx {
        PrecisionCtx::new(40).unwrap()
    }

    #[test]
    fn grammar_cases() {
        assert_eq!(parse_param("-q^3").unwrap(), ParamExpr::power(true, 3, 1));
        assert_eq!(parse_param("0.35").unwrap(), ParamExpr::literal("0.35"));
        assert_eq!(parse_param("-0.35").unwrap(), ParamExpr::literal("-0.35"));
        assert_eq!(parse_param("-q^-5/3").unwrap(), ParamExpr::power(true, -5, 3));
        assert_eq!(
            parse_param("2.5*q^0.25").unwrap(),
            ParamExpr::Power {
                negative: false,
                coeff: Some("2.5".into()),
                exponent: Some(Rational::Decimal("0.25".into())),
            }
        );
        assert_eq!(
            parse_param("q").unwrap(),
            ParamExpr::Power {
                negative: false,
                coeff: None,
                exponent: None
            }
        );
        assert_eq!(parse_param("1e-3").unwrap(), ParamExpr::literal("1e-3"));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let pos = |s: &str| match parse_param(s) {
            Err(Error::Syntax { pos, .. }) => pos,
            other => panic!("{s}: {other:?}"),
        };
        assert_eq!(pos(""), 0);
        assert_eq!(pos("x"), 0);
        assert_eq!(pos("q^"), 2);
        assert_eq!(pos("q^3/0"), 4);
        assert_eq!(pos("2*x"), 2);
        assert_eq!(pos("q^3 "), 3);
        assert_eq!(pos("--q"), 1);
        assert_eq!(pos("q^1."), 4);
    }

    #[test]
    fn exponent_overflow() {
        assert!(matches!(parse_param("q^101"), Err(Error::ExponentOverflow(_))));
        assert!(matches!(parse_param("q^-201/2"), Err(Error::ExponentOverflow(_))));
        assert!(matches!(
            parse_param("q^99999999999999999999999"),
            Err(Error::ExponentOverflow(_))
        ));
        assert!(parse_param("q^100").is_ok());
        assert!(parse_param("q^-200/2").is_ok());
    }

    #[test]
    fn evaluation() {
        let c = ctx();
        let q = c.real(0.5);
        let v = parse_param("-q^3").unwrap().eval(Some(&q), &c).unwrap();
        assert_eq!(v, c.real(-0.125));
        // exp(-(5/3) ln 0.3), negated
        let q = c.parse("0.3").unwrap();
        let v = parse_param("-q^-5/3").unwrap().eval(Some(&q), &c).unwrap();
        let expect = c.parse("-7.4381438898018835764739924959992310367").unwrap();
        assert!((v - expect).abs().to_f64() < 1e-36);
        let v = parse_param("0.35").unwrap().eval(None, &c).unwrap();
        assert_eq!(v, c.parse("0.35").unwrap());
        assert!(matches!(
            parse_param("q").unwrap().eval(None, &c),
            Err(Error::MissingParam(_))
        ));
    }

    #[test]
    fn point_resolution() {
        let c = ctx();
        let p = QPoint::new(Some("0.5"))
            .set("a", "-q")
            .unwrap()
            .set("b", "-q^3")
            .unwrap();
        let r = p.resolve(&c).unwrap();
        assert_eq!(r.get("a").unwrap(), &c.real(-0.5));
        assert_eq!(r.get("b").unwrap(), &c.real(-0.125));
        assert!(matches!(r.get("z"), Err(Error::MissingParam(_))));
        assert_eq!(p.to_string(), "q=0.5 a=-q b=-q^3");
        assert!(QPoint::new(Some("1.5")).resolve(&c).is_err());
    }
}
