use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qseries::error::{Error, Side};
use qseries::harness::{self, PointSpec, ReportFormat, RunConfig, GRAMMAR};
use qseries::identities::Registry;
use qseries::real::PrecisionCtx;

#[derive(Parser)]
#[command(
    name = "qseries",
    version,
    about = "Verify q-series identities at arbitrary precision"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List identity ids with their domains and references.
    List,
    /// Run a verification campaign.
    Verify(VerifyArgs),
    /// Evaluate one side of an identity at a single point.
    Eval(EvalArgs),
}

#[derive(Args, Default)]
struct PointArgs {
    /// Parameter assignment `name=expr`; repeatable.
    #[arg(long = "set", value_name = "NAME=EXPR")]
    set: Vec<String>,
    /// Nome as a decimal literal.
    #[arg(long)]
    q: Option<String>,
}

impl PointArgs {
    fn spec(&self) -> Result<Option<PointSpec>, Error> {
        if self.set.is_empty() && self.q.is_none() {
            return Ok(None);
        }
        let mut p = PointSpec::default();
        if let Some(q) = &self.q {
            p.q = Some(q.clone());
        }
        for s in &self.set {
            p.set(s)?;
        }
        Ok(Some(p))
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Identity id or `all`; repeatable.
    #[arg(long)]
    identity: Vec<String>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    digits: Option<u32>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    report: Option<ReportFormat>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with campaign settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    point: PointArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Lhs,
    Rhs,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    identity: String,
    #[arg(long, value_enum)]
    side: SideArg,
    #[arg(long)]
    digits: Option<u32>,
    #[command(flatten)]
    point: PointArgs,
}

fn usage_error(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    if matches!(e, Error::Syntax { .. } | Error::ExponentOverflow(_)) {
        eprintln!("parameter grammar: {GRAMMAR}");
    }
    ExitCode::from(2)
}

fn list() -> ExitCode {
    let reg = Registry::global();
    let mut out = std::io::stdout().lock();
    for e in reg.entries() {
        let _ = writeln!(out, "{:<8} {}", e.id, e.paper_ref);
        let _ = writeln!(out, "         domain: {}", e.domain_text());
    }
    ExitCode::SUCCESS
}

fn build_config(a: &VerifyArgs) -> Result<RunConfig, Error> {
    let mut c = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig {
            digits: harness::env_default_digits()?,
            ..Default::default()
        },
    };
    if !a.identity.is_empty() {
        c.identities = a.identity.clone();
    }
    if let Some(n) = a.points {
        c.points_per_identity = n;
    }
    if let Some(s) = a.seed {
        c.seed = s;
    }
    if let Some(d) = a.digits {
        c.digits = d;
    }
    if let Some(t) = a.tol {
        c.tolerance = t;
    }
    if let Some(r) = a.report {
        c.report_format = r;
    }
    if let Some(p) = a.point.spec()? {
        c.explicit_points = Some(vec![p]);
    }
    Ok(c)
}

fn verify(a: &VerifyArgs) -> ExitCode {
    let config = match build_config(a) {
        Ok(c) => c,
        Err(e) => return usage_error(&e),
    };
    let report = match harness::run(&config) {
        Ok(r) => r,
        Err(e) => return usage_error(&e),
    };
    let text = report.render(config.report_format);
    match &a.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(report.exit_code())
}

fn eval(a: &EvalArgs) -> ExitCode {
    let run = || -> Result<String, Error> {
        let digits = match a.digits {
            Some(d) => d,
            None => harness::env_default_digits()?,
        };
        let ctx = PrecisionCtx::new(digits)?;
        let entry = Registry::global().get(&a.identity)?;
        let point = a.point.spec()?.unwrap_or_default().to_point()?;
        let side = match a.side {
            SideArg::Lhs => Side::Lhs,
            SideArg::Rhs => Side::Rhs,
        };
        let v = entry.eval_side(side, &point, &ctx)?;
        Ok(format!(
            "{}\nerr {}  terms {}  certified {}",
            v.value.to_sci_string(digits as usize),
            v.err_estimate.to_sci_string(6),
            v.terms_used,
            v.certified
        ))
    };
    match run() {
        Ok(s) => {
            println!("{s}");
            ExitCode::SUCCESS
        }
        Err(e @ Error::Evaluation { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => usage_error(&e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::List => list(),
        Cmd::Verify(a) => verify(a),
        Cmd::Eval(a) => eval(a),
    }
}
