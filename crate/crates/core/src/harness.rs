//! Verification campaigns and their reports.
//!
//! A campaign evaluates every selected identity at either sampled or
//! explicit points. Evaluations are independent, so they may run on the
//! rayon pool; results are always assembled in `(identity, point index)`
//! order and every number is written as a decimal string, which makes the
//! report a pure function of the [`RunConfig`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identities::{IdentityEntry, IdentityResult, Registry};
use crate::param::QPoint;
pub use crate::param::{parse_param, ParamExpr, GRAMMAR};
use crate::real::{PrecisionCtx, Real};

pub const DEFAULT_DIGITS: u32 = 40;
pub const DEFAULT_TOLERANCE: f64 = 1e-25;
pub const DEFAULT_POINTS: usize = 10;
/// Environment variable that replaces [`DEFAULT_DIGITS`].
pub const DIGITS_ENV: &str = "QSERIES_DIGITS";
/// Relative spread of `lhs/rhs` below which a failing identity is reported
/// as off by a constant factor.
pub const OFFSET_SPREAD: f64 = 1e-6;
/// Significant digits printed for `absErr` and `relErr`.
const ERR_DIGITS: usize = 6;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Text,
}

/// How point evaluations are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    /// On the rayon pool; sequential when built without `parallel`.
    Parallel,
    Sequential,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// An explicit point as written in a config file or on the command line.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
}

impl PointSpec {
    /// Parses `name=expr`; the name `q` sets the nome.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (name, expr) = assignment.split_once('=').ok_or_else(|| Error::Syntax {
            pos: 0,
            msg: format!("expected name=expr, got '{assignment}'"),
        })?;
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::Config(format!("invalid parameter name '{name}'")));
        }
        if name == "q" {
            self.q = Some(expr.trim().to_string());
        } else {
            self.params.insert(name.to_string(), expr.trim().to_string());
        }
        Ok(())
    }

    pub fn to_point(&self) -> Result<QPoint> {
        if let Some(q) = &self.q {
            Real::parse(q, 64)?;
        }
        let mut p = QPoint::new(self.q.as_deref());
        for (name, expr) in &self.params {
            p = p.set(name, expr)?;
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Selection {
    One(String),
    Many(Vec<String>),
}

fn de_selection<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<String>, D::Error> {
    Ok(match Selection::deserialize(d)? {
        Selection::One(s) => vec![s],
        Selection::Many(v) => v,
    })
}

fn default_all() -> Vec<String> {
    vec!["all".into()]
}
fn default_points() -> usize {
    DEFAULT_POINTS
}
fn default_digits() -> u32 {
    DEFAULT_DIGITS
}
fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

/// A campaign description; also the schema of `--config` files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunConfig {
    /// Identity ids, or the single entry `"all"`.
    #[serde(default = "default_all", deserialize_with = "de_selection")]
    pub identities: Vec<String>,
    #[serde(default = "default_points")]
    pub points_per_identity: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_digits")]
    pub digits: u32,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit_points: Option<Vec<PointSpec>>,
    #[serde(default)]
    pub report_format: ReportFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            identities: default_all(),
            points_per_identity: DEFAULT_POINTS,
            seed: 0,
            digits: DEFAULT_DIGITS,
            tolerance: DEFAULT_TOLERANCE,
            explicit_points: None,
            report_format: ReportFormat::Json,
        }
    }
}

impl RunConfig {
    pub fn for_ids(ids: &[&str]) -> Self {
        RunConfig {
            identities: ids.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.points_per_identity == 0 {
            return Err(Error::Config("pointsPerIdentity must be >= 1".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Config(format!(
                "tolerance must be > 0, got {}",
                self.tolerance
            )));
        }
        if !(20..=300).contains(&self.digits) {
            return Err(Error::Config(format!(
                "digits must lie in 20..=300, got {}",
                self.digits
            )));
        }
        if self.identities.is_empty() {
            return Err(Error::Config("no identities selected".into()));
        }
        if let Some(points) = &self.explicit_points {
            if points.is_empty() {
                return Err(Error::Config("explicitPoints is empty".into()));
            }
            for p in points {
                p.to_point()?;
            }
        }
        Ok(())
    }

    /// Selected entries in registry order for `"all"`, else as listed.
    pub fn select<'r>(&self, registry: &'r Registry) -> Result<Vec<&'r IdentityEntry>> {
        if self.identities.iter().any(|s| s == "all") {
            return Ok(registry.entries().iter().collect());
        }
        let mut out: Vec<&IdentityEntry> = Vec::new();
        for id in &self.identities {
            let e = registry.get(id)?;
            if !out.iter().any(|x| x.id == e.id) {
                out.push(e);
            }
        }
        Ok(out)
    }
}

/// Digits from [`DIGITS_ENV`] if set and valid, else [`DEFAULT_DIGITS`].
pub fn env_default_digits() -> Result<u32> {
    match std::env::var(DIGITS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{DIGITS_ENV} must be an integer, got '{v}'"))),
        Err(_) => Ok(DEFAULT_DIGITS),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PointReport {
    pub index: usize,
    pub params: BTreeMap<String, String>,
    pub lhs: Option<String>,
    pub rhs: Option<String>,
    pub abs_err: Option<String>,
    pub rel_err: Option<String>,
    pub pass: bool,
    pub terms_used: Option<usize>,
    pub certified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Aggregate {
    pub points: usize,
    pub passed: usize,
    pub pass: bool,
    pub worst_rel_err: Option<String>,
    /// Mean `lhs/rhs` when every point fails with a stable ratio.
    pub suspected_constant_offset: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IdentityReport {
    pub id: String,
    pub paper_ref: String,
    /// Tolerance applied, after the identity's floor.
    pub tolerance: String,
    pub points: Vec<PointReport>,
    pub aggregate: Aggregate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub version: String,
    pub config: RunConfig,
    pub results: Vec<IdentityReport>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.aggregate.pass)
    }

    /// Process exit code for this report: 0 when every identity passes, else 1.
    pub fn exit_code(&self) -> u8 {
        if self.all_pass() {
            0
        } else {
            1
        }
    }

    pub fn get(&self, id: &str) -> Option<&IdentityReport> {
        self.results.iter().find(|r| r.id == id)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "qseries {}  digits={} seed={} tol={:e}",
            self.version, self.config.digits, self.config.seed, self.config.tolerance
        );
        for r in &self.results {
            let a = &r.aggregate;
            let _ = writeln!(
                out,
                "{:<8} {}  {}/{}  worst relErr {}  tol {}",
                r.id,
                if a.pass { "PASS" } else { "FAIL" },
                a.passed,
                a.points,
                a.worst_rel_err.as_deref().unwrap_or("-"),
                r.tolerance
            );
            if let Some(off) = &a.suspected_constant_offset {
                let _ = writeln!(out, "         suspected constant factor lhs/rhs = {off}");
            }
            if let Some(e) = &r.error {
                let _ = writeln!(out, "         error: {e}");
            }
            for p in &r.points {
                let params: Vec<String> = p.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                match &p.error {
                    Some(e) => {
                        let _ = writeln!(out, "  [{}] {}  ERROR {e}", p.index, params.join(" "));
                    }
                    None => {
                        let _ = writeln!(
                            out,
                            "  [{}] {}  {}  relErr {}",
                            p.index,
                            params.join(" "),
                            if p.pass { "ok" } else { "FAIL" },
                            p.rel_err.as_deref().unwrap_or("-")
                        );
                    }
                }
            }
        }
        out
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Text => self.to_text(),
        }
    }
}

fn point_params(p: &QPoint) -> BTreeMap<String, String> {
    p.describe().into_iter().collect()
}

fn point_report(index: usize, point: &QPoint, out: &Result<IdentityResult>, digits: usize) -> PointReport {
    match out {
        Ok(r) => PointReport {
            index,
            params: point_params(point),
            lhs: Some(r.lhs.to_sci_string(digits)),
            rhs: Some(r.rhs.to_sci_string(digits)),
            abs_err: Some(r.abs_err.to_sci_string(ERR_DIGITS)),
            rel_err: Some(r.rel_err.to_sci_string(ERR_DIGITS)),
            pass: r.pass,
            terms_used: Some(r.terms_used),
            certified: Some(r.certified),
            error: None,
        },
        Err(e) => PointReport {
            index,
            params: point_params(point),
            lhs: None,
            rhs: None,
            abs_err: None,
            rel_err: None,
            pass: false,
            terms_used: None,
            certified: None,
            error: Some(e.to_string()),
        },
    }
}

/// Mean of `lhs/rhs` when its relative spread is below [`OFFSET_SPREAD`].
pub fn constant_ratio(pairs: &[(Real, Real)], bits: usize) -> Option<Real> {
    if pairs.len() < 2 {
        return None;
    }
    let ratios: Vec<Real> = pairs
        .iter()
        .filter(|(_, r)| !r.is_zero())
        .map(|(l, r)| l.with_bits(bits) / r.with_bits(bits))
        .collect();
    if ratios.len() != pairs.len() {
        return None;
    }
    let n = Real::from_i64(ratios.len() as i64, bits);
    let mut mean = Real::zero(bits);
    for r in &ratios {
        mean += r;
    }
    mean /= &n;
    if mean.is_zero() {
        return None;
    }
    let mut var = Real::zero(bits);
    for r in &ratios {
        var += (r - &mean).powi(2);
    }
    let spread = (var / n).sqrt() / mean.abs();
    (spread.to_f64() < OFFSET_SPREAD).then_some(mean)
}

fn aggregate(results: &[Result<IdentityResult>], bits: usize) -> Aggregate {
    let passed = results.iter().filter(|r| matches!(r, Ok(x) if x.pass)).count();
    let worst = results
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .map(|r| &r.rel_err)
        .fold(None::<&Real>, |acc, x| match acc {
            Some(a) if a >= x => Some(a),
            _ => Some(x),
        });
    let offset = if passed == 0 && results.iter().all(|r| r.is_ok()) {
        let pairs: Vec<(Real, Real)> = results
            .iter()
            .filter_map(|r| r.as_ref().ok())
            .map(|r| (r.lhs.clone(), r.rhs.clone()))
            .collect();
        constant_ratio(&pairs, bits)
    } else {
        None
    };
    Aggregate {
        points: results.len(),
        passed,
        pass: !results.is_empty() && passed == results.len(),
        worst_rel_err: worst.map(|w| w.to_sci_string(ERR_DIGITS)),
        suspected_constant_offset: offset.map(|o| o.to_sci_string(20)),
    }
}

struct Task<'r> {
    entry: usize,
    index: usize,
    point: QPoint,
    id: &'r IdentityEntry,
}

fn eval_all(tasks: &[Task<'_>], tols: &[f64], ctx: &PrecisionCtx, exec: Exec) -> Vec<Result<IdentityResult>> {
    let one = |t: &Task<'_>| t.id.eval(&t.point, tols[t.entry], ctx);
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            tasks.par_iter().map(one).collect()
        }
        _ => tasks.iter().map(one).collect(),
    }
}

/// Runs a campaign against the built-in registry.
pub fn run(config: &RunConfig) -> Result<VerificationReport> {
    run_with(config, Registry::global(), Exec::default())
}

/// Runs a campaign against `registry` with the given scheduling.
///
/// Unknown ids and invalid settings fail before any evaluation; errors at
/// individual points are recorded in the report.
pub fn run_with(config: &RunConfig, registry: &Registry, exec: Exec) -> Result<VerificationReport> {
    config.validate()?;
    let entries = config.select(registry)?;
    let ctx = PrecisionCtx::new(config.digits)?;
    let explicit: Option<Vec<QPoint>> = config
        .explicit_points
        .as_ref()
        .map(|ps| ps.iter().map(PointSpec::to_point).collect())
        .transpose()?;

    let mut tasks = Vec::new();
    let mut sample_errors: Vec<Option<String>> = Vec::with_capacity(entries.len());
    for (k, e) in entries.iter().enumerate() {
        let points = match &explicit {
            Some(ps) => Ok(ps.clone()),
            None => e.sample(config.points_per_identity, config.seed),
        };
        match points {
            Ok(ps) => {
                sample_errors.push(None);
                for (index, point) in ps.into_iter().enumerate() {
                    tasks.push(Task {
                        entry: k,
                        index,
                        point,
                        id: e,
                    });
                }
            }
            Err(err) => sample_errors.push(Some(err.to_string())),
        }
    }
    let tols: Vec<f64> = entries
        .iter()
        .map(|e| e.effective_tol(config.tolerance))
        .collect();
    let outcomes = eval_all(&tasks, &tols, &ctx, exec);

    let mut grouped: Vec<Vec<(usize, &QPoint, Result<IdentityResult>)>> =
        entries.iter().map(|_| Vec::new()).collect();
    for (t, out) in tasks.iter().zip(outcomes) {
        grouped[t.entry].push((t.index, &t.point, out));
    }

    let digits = config.digits as usize;
    let results = entries
        .iter()
        .zip(grouped)
        .zip(sample_errors)
        .enumerate()
        .map(|(k, ((e, mut rows), error))| {
            rows.sort_by_key(|r| r.0);
            let points = rows
                .iter()
                .map(|(i, p, out)| point_report(*i, p, out, digits))
                .collect();
            let outs: Vec<Result<IdentityResult>> = rows.into_iter().map(|r| r.2).collect();
            let mut agg = aggregate(&outs, ctx.bits());
            if error.is_some() {
                agg.pass = false;
            }
            IdentityReport {
                id: e.id.clone(),
                paper_ref: e.paper_ref.clone(),
                tolerance: format!("{:e}", tols[k]),
                points,
                aggregate: agg,
                error,
            }
        })
        .collect();

    Ok(VerificationReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_json_forms() {
        let c = RunConfig::from_json(r#"{"identities":"eq-1.1","seed":3}"#).unwrap();
        assert_eq!(c.identities, vec!["eq-1.1"]);
        assert_eq!(c.points_per_identity, DEFAULT_POINTS);
        assert_eq!(c.digits, DEFAULT_DIGITS);
        let c = RunConfig::from_json(
            r#"{"identities":["eq-1.1","eq-3.2"],"explicitPoints":[{"q":"0.5","params":{"a":"-q"}}],"reportFormat":"text"}"#,
        )
        .unwrap();
        assert_eq!(c.identities.len(), 2);
        assert_eq!(c.report_format, ReportFormat::Text);
        assert!(RunConfig::from_json(r#"{"bogus":1}"#).is_err());
        let back = RunConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::default();
        assert!(c.validate().is_ok());
        c.points_per_identity = 0;
        assert!(c.validate().is_err());
        let c = RunConfig {
            digits: 19,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = RunConfig {
            tolerance: 0.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn point_spec_assignments() {
        let mut p = PointSpec::default();
        p.set("q=0.5").unwrap();
        p.set("a = -q^3").unwrap();
        assert_eq!(p.q.as_deref(), Some("0.5"));
        assert!(p.to_point().is_ok());
        assert!(p.set("novalue").is_err());
        p.set("b=-q^^2").unwrap();
        assert!(matches!(p.to_point(), Err(Error::Syntax { .. })));
    }

    #[test]
    fn ratio_detection() {
        let bits = 160;
        let r = |x: f64| Real::from_f64(x, bits);
        let pairs = vec![(r(2.0), r(1.0)), (r(5.0), r(2.5)), (r(-0.2), r(-0.1))];
        let m = constant_ratio(&pairs, bits).unwrap();
        assert!((m.to_f64() - 2.0).abs() < 1e-30);
        let pairs = vec![(r(2.0), r(1.0)), (r(5.0), r(2.4))];
        assert!(constant_ratio(&pairs, bits).is_none());
        assert!(constant_ratio(&pairs[..1], bits).is_none());
    }
}
