//! Registry of evaluable identities.
//!
//! Each [`IdentityEntry`] pairs two evaluators with a list of
//! [`Constraint`]s. A constraint is a named gap function that must be
//! strictly positive on the domain; sampled points additionally keep every
//! gap at least [`SAMPLING_SLACK`] away from zero.

pub(crate) mod builtin;
pub mod sampling;

use std::collections::HashMap;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use builtin::register_builtin;
pub use sampling::Draw;

use crate::error::{Error, Result, Side};
use crate::param::{QPoint, Resolved};
use crate::real::{PrecisionCtx, Real};
use crate::series::SeriesValue;

/// Minimum gap kept by sampled points in every constraint.
pub const SAMPLING_SLACK: f64 = 0.05;

/// Draws allowed per requested point before sampling gives up.
pub const MAX_DRAWS: usize = 10_000;

/// Precision used for domain checks while sampling.
const SAMPLING_DIGITS: u32 = 30;

pub type EvalFn = Box<dyn Fn(&Resolved, &PrecisionCtx) -> Result<SeriesValue> + Send + Sync>;
pub type GapFn = Box<dyn Fn(&Resolved, &PrecisionCtx) -> Result<Real> + Send + Sync>;
pub type SampleFn = Box<dyn Fn(&mut Draw<'_>) -> QPoint + Send + Sync>;

/// A strict inequality `gap(p) > 0`, labelled for error messages.
pub struct Constraint {
    pub label: String,
    gap: GapFn,
}

impl Constraint {
    pub fn new(
        label: impl Into<String>,
        gap: impl Fn(&Resolved, &PrecisionCtx) -> Result<Real> + Send + Sync + 'static,
    ) -> Self {
        Constraint {
            label: label.into(),
            gap: Box::new(gap),
        }
    }

    /// `lo(p) < hi(p)`.
    pub fn less(
        label: impl Into<String>,
        lo: impl Fn(&Resolved, &PrecisionCtx) -> Result<Real> + Send + Sync + 'static,
        hi: impl Fn(&Resolved, &PrecisionCtx) -> Result<Real> + Send + Sync + 'static,
    ) -> Self {
        Constraint::new(label, move |p, c| Ok(hi(p, c)? - lo(p, c)?))
    }

    /// Keeps `(x;q)_n` and `(x;q)_∞` away from zero: `x ≠ q^-m` for `m ≥ 0`.
    pub fn not_pole(
        label: impl Into<String>,
        x: impl Fn(&Resolved, &PrecisionCtx) -> Result<Real> + Send + Sync + 'static,
    ) -> Self {
        Constraint::new(label, move |p, c| pole_gap(&x(p, c)?, p.q()?, c))
    }

    pub fn gap(&self, p: &Resolved, ctx: &PrecisionCtx) -> Result<Real> {
        (self.gap)(p, ctx)
    }
}

/// `min_{m ≥ 0} |1 - x q^m|`.
pub fn pole_gap(x: &Real, q: &Real, ctx: &PrecisionCtx) -> Result<Real> {
    crate::qcore::check_nome(q)?;
    if !x.is_positive() {
        return Ok(ctx.one());
    }
    // x q^m = 1 at m* = ln x / ln(1/q); only the neighbours of m* matter
    let mstar = x.ln().to_f64() / (-q.ln().to_f64());
    let mut best = (1 - x).abs();
    for m in [mstar.floor(), mstar.ceil()] {
        if m >= 0.0 && m.is_finite() {
            let g = (1 - &(x * &q.powi(m as i64))).abs();
            best = best.min(&g);
        }
    }
    Ok(best)
}

/// Reads a parameter by name.
pub fn param(name: &'static str) -> impl Fn(&Resolved, &PrecisionCtx) -> Result<Real> + Send + Sync {
    move |p, _| p.get(name).cloned()
}

/// Reads `|name|`.
pub fn abs_param(name: &'static str) -> impl Fn(&Resolved, &PrecisionCtx) -> Result<Real> + Send + Sync {
    move |p, _| Ok(p.get(name)?.abs())
}

/// Constant gap bound.
pub fn constant(v: f64) -> impl Fn(&Resolved, &PrecisionCtx) -> Result<Real> + Send + Sync {
    move |_, c| Ok(c.real(v))
}

/// A registered identity.
pub struct IdentityEntry {
    pub id: String,
    pub paper_ref: String,
    pub description: String,
    pub constraints: Vec<Constraint>,
    pub lhs: EvalFn,
    pub rhs: EvalFn,
    pub sampler: SampleFn,
    /// Tolerance used when a campaign asks for something tighter than the
    /// evaluators can deliver (accelerated classical series).
    pub tolerance_floor: Option<f64>,
    /// Guard digits forced on the context, for sides that start with `-1 + ...`.
    pub min_guard_digits: u32,
}

impl IdentityEntry {
    pub fn new(
        id: &str,
        paper_ref: &str,
        description: &str,
        lhs: impl Fn(&Resolved, &PrecisionCtx) -> Result<SeriesValue> + Send + Sync + 'static,
        rhs: impl Fn(&Resolved, &PrecisionCtx) -> Result<SeriesValue> + Send + Sync + 'static,
        sampler: impl Fn(&mut Draw<'_>) -> QPoint + Send + Sync + 'static,
    ) -> Self {
        IdentityEntry {
            id: id.to_string(),
            paper_ref: paper_ref.to_string(),
            description: description.to_string(),
            constraints: Vec::new(),
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
            sampler: Box::new(sampler),
            tolerance_floor: None,
            min_guard_digits: 0,
        }
    }

    pub fn constraint(mut self, c: Constraint) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn constraints(mut self, cs: impl IntoIterator<Item = Constraint>) -> Self {
        self.constraints.extend(cs);
        self
    }

    pub fn tolerance_floor(mut self, tol: f64) -> Self {
        self.tolerance_floor = Some(tol);
        self
    }

    pub fn guard_digits(mut self, g: u32) -> Self {
        self.min_guard_digits = g;
        self
    }

    /// Human-readable domain, constraints joined with `, `.
    pub fn domain_text(&self) -> String {
        self.constraints
            .iter()
            .map(|c| c.label.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// First violated constraint, if any.
    pub fn check_domain(&self, p: &Resolved, ctx: &PrecisionCtx) -> Result<()> {
        self.check_with_slack(p, ctx, 0.0)
    }

    fn check_with_slack(&self, p: &Resolved, ctx: &PrecisionCtx, slack: f64) -> Result<()> {
        for c in &self.constraints {
            let ok = match c.gap(p, ctx) {
                Ok(g) if !g.is_finite() => false,
                Ok(g) if slack == 0.0 => g.is_positive(),
                Ok(g) => g >= ctx.real(slack),
                Err(_) => false,
            };
            if !ok {
                return Err(Error::DomainViolation {
                    id: self.id.clone(),
                    constraint: c.label.clone(),
                });
            }
        }
        Ok(())
    }

    /// The context an evaluation actually runs under.
    pub fn eval_ctx(&self, ctx: &PrecisionCtx) -> Result<PrecisionCtx> {
        if ctx.guard_digits() >= self.min_guard_digits {
            Ok(ctx.clone())
        } else {
            ctx.with_guard_digits(self.min_guard_digits)
        }
    }

    pub fn effective_tol(&self, tol: f64) -> f64 {
        match self.tolerance_floor {
            Some(f) => tol.max(f),
            None => tol,
        }
    }

    /// Evaluates one side after the domain check.
    pub fn eval_side(&self, side: Side, point: &QPoint, ctx: &PrecisionCtx) -> Result<SeriesValue> {
        let ctx = self.eval_ctx(ctx)?;
        let p = point.resolve(&ctx)?;
        self.check_domain(&p, &ctx)?;
        self.eval_resolved(side, &p, &ctx)
    }

    fn eval_resolved(&self, side: Side, p: &Resolved, ctx: &PrecisionCtx) -> Result<SeriesValue> {
        let f = match side {
            Side::Lhs => &self.lhs,
            Side::Rhs => &self.rhs,
        };
        f(p, ctx)
            .and_then(|v| v.finish(ctx))
            .map_err(|e| Error::Evaluation {
                side,
                source: Box::new(e),
            })
    }

    /// Evaluates both sides and compares them.
    pub fn eval(&self, point: &QPoint, tol: f64, ctx: &PrecisionCtx) -> Result<IdentityResult> {
        let ectx = self.eval_ctx(ctx)?;
        let p = point.resolve(&ectx)?;
        self.check_domain(&p, &ectx)?;
        let lhs = self.eval_resolved(Side::Lhs, &p, &ectx)?;
        let rhs = self.eval_resolved(Side::Rhs, &p, &ectx)?;
        Ok(IdentityResult::compare(
            point.clone(),
            lhs,
            rhs,
            self.effective_tol(tol),
            ctx,
        ))
    }

    /// `count` admissible points drawn from a ChaCha8 stream seeded by `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<QPoint>> {
        let ctx = PrecisionCtx::new(SAMPLING_DIGITS)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = Draw::new(&mut rng);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let mut found = None;
            for _ in 0..MAX_DRAWS {
                let cand = (self.sampler)(&mut draw);
                let ok = cand
                    .resolve(&ctx)
                    .and_then(|p| self.check_with_slack(&p, &ctx, SAMPLING_SLACK))
                    .is_ok();
                if ok {
                    found = Some(cand);
                    break;
                }
            }
            match found {
                Some(p) => out.push(p),
                None => {
                    return Err(Error::SamplingFailure {
                        id: self.id.clone(),
                        draws: MAX_DRAWS,
                    })
                }
            }
        }
        Ok(out)
    }
}

/// Outcome of comparing both sides at one point.
#[derive(Debug, Clone)]
pub struct IdentityResult {
    pub point: QPoint,
    pub lhs: Real,
    pub rhs: Real,
    pub abs_err: Real,
    pub rel_err: Real,
    pub pass: bool,
    pub terms_used: usize,
    pub lhs_err: Real,
    pub rhs_err: Real,
    pub certified: bool,
}

impl IdentityResult {
    /// `relErr = |lhs - rhs| / max(|lhs|, |rhs|, 10^-digits)`.
    pub fn compare(point: QPoint, lhs: SeriesValue, rhs: SeriesValue, tol: f64, ctx: &PrecisionCtx) -> Self {
        let abs_err = (&lhs.value - &rhs.value).abs();
        let floor = ctx.real(10f64.powi(-(ctx.digits() as i32)));
        let scale = lhs.value.abs().max(&rhs.value.abs()).max(&floor);
        let rel_err = &abs_err / &scale;
        let pass = rel_err <= ctx.real(tol);
        IdentityResult {
            point,
            terms_used: lhs.terms_used + rhs.terms_used,
            certified: lhs.certified && rhs.certified,
            lhs: lhs.value,
            rhs: rhs.value,
            abs_err,
            rel_err,
            pass,
            lhs_err: lhs.err_estimate,
            rhs_err: rhs.err_estimate,
        }
    }
}

/// Identity entries keyed by unique id, in registration order.
#[derive(Default)]
pub struct Registry {
    entries: Vec<IdentityEntry>,
    index: HashMap<String, usize>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// All built-in identities: transformations, eta quotients, q-gamma
    /// theorems and their classical limits.
    pub fn builtin() -> Self {
        let mut r = Registry::new();
        let groups = [
            register_builtin(),
            crate::eta::register_eta_identities(),
            crate::qgamma::register_qgamma_identities(),
            crate::qgamma::classical_limit_identities(),
        ];
        for e in groups.into_iter().flatten() {
            r.register(e).expect("built-in ids are unique");
        }
        r
    }

    /// Process-wide built-in registry.
    pub fn global() -> &'static Registry {
        static GLOBAL: OnceLock<Registry> = OnceLock::new();
        GLOBAL.get_or_init(Registry::builtin)
    }

    pub fn register(&mut self, entry: IdentityEntry) -> Result<()> {
        if self.index.contains_key(&entry.id) {
            return Err(Error::DuplicateId(entry.id));
        }
        self.index.insert(entry.id.clone(), self.entries.len());
        self.entries.push(entry);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<&IdentityEntry> {
        self.index
            .get(id)
            .map(|&i| &self.entries[i])
            .ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    pub fn ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.id.as_str()).collect()
    }

    pub fn entries(&self) -> &[IdentityEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn eval(&self, id: &str, point: &QPoint, tol: f64, ctx: &PrecisionCtx) -> Result<IdentityResult> {
        self.get(id)?.eval(point, tol, ctx)
    }

    pub fn sample(&self, id: &str, count: usize, seed: u64) -> Result<Vec<QPoint>> {
        if count == 0 {
            return Err(Error::Config("count must be >= 1".into()));
        }
        self.get(id)?.sample(count, seed)
    }
}

/// Evaluates a built-in identity at `point`.
pub fn eval_identity(id: &str, point: &QPoint, tol: f64, ctx: &PrecisionCtx) -> Result<IdentityResult> {
    Registry::global().eval(id, point, tol, ctx)
}

/// Deterministic admissible points for a built-in identity.
pub fn sample_domain(id: &str, count: usize, seed: u64) -> Result<Vec<QPoint>> {
    Registry::global().sample(id, count, seed)
}
