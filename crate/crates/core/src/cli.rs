//! Command-line front end. [`run`] parses arguments, executes one command and returns the
//! process exit code: 0 success, 1 usage or input error, 2 validation failure,
//! 3 nonconvergence, 4 identity violation.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::Analysis;
use crate::bott::{
    classify, fourier_check, growth_stats, iterate_indices, jump_table, scan_circle, Classification, GrowthStats,
    IndexProfile, IterationReport, JumpRecord,
};
use crate::error::{Error, Result};
use crate::galerkin::{lambda_with_refinement, ConstraintKind};
use crate::generators::GeneratorSpec;
use crate::ode::PoincareReport;
use crate::report::{self, fmt_f64};
use crate::settings::{Settings, Tolerances};
use crate::system::{self, CirclePoint, MorseSturmSystem, ProblemFile, ValidationReport};

/// Iterates whose `epsilon_N` is recomputed directly by `iterate` and `report`.
const EPSILON_VERIFY_UPTO: usize = 3;
/// Largest `N` of the identity check for constant profiles.
const CLASSIFY_UPTO: usize = 6;

#[derive(Parser, Debug)]
#[command(name = "morse-sturm", version, about = "Morse indices and iteration formulas for Morse-Sturm systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: RunConfig,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Check the structural assumptions on the problem data.
    Validate,
    /// Write the problem JSON of a generated system.
    Generate,
    /// Poincaré map and its unit-circle spectrum.
    Poincare,
    /// Index for one `(theta, N, kind)`.
    Index,
    /// Index function on the unit circle.
    Scan,
    /// Index table of the iterates.
    Iterate,
    /// Compare the iterate's index with the sum over roots of unity.
    FourierCheck,
    /// Average index and growth constants.
    Growth,
    /// Spectral classification and the constant-profile identity.
    Classify,
    /// Full pipeline in one JSON document.
    Report,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Problem JSON file.
    #[arg(long, global = true, conflicts_with = "generate")]
    pub input: Option<PathBuf>,
    /// Generated system, `kind:key=value,...` (kinds: flat, oscillator, static_product, tilted, boosted).
    #[arg(long, global = true)]
    pub generate: Option<String>,
    /// Coarsest mesh per period (default 64; `64 N` for fourier-check).
    #[arg(long, global = true)]
    pub mesh: Option<usize>,
    #[arg(long = "ode-steps", global = true, default_value_t = 1000)]
    pub ode_steps: usize,
    #[arg(long = "N", global = true, default_value_t = 1)]
    pub n_iter: usize,
    #[arg(long = "N-max", global = true, default_value_t = 6)]
    pub n_max: usize,
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long, global = true, default_value = "zero")]
    pub kind: ConstraintKind,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Seed for `tilted` systems generated without explicit profile.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "tol-eig", global = true)]
    pub tol_eig: Option<f64>,
    #[arg(long = "tol-rank", global = true)]
    pub tol_rank: Option<f64>,
}

impl clap::builder::ValueParserFactory for ConstraintKind {
    type Parser = clap::builder::ValueParser;

    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<ConstraintKind>().map_err(|e| e.to_string()))
    }
}

impl RunConfig {
    fn tolerances(&self) -> Result<Tolerances> {
        let mut tol = Tolerances::default();
        if let Some(e) = self.tol_eig {
            if !(e > 0.0) {
                return Err(Error::InvalidArgument("--tol-eig must be positive".into()));
            }
            tol.eig = Some(e);
        }
        if let Some(r) = self.tol_rank {
            if !(r > 0.0) {
                return Err(Error::InvalidArgument("--tol-rank must be positive".into()));
            }
            tol.rank = r;
        }
        Ok(tol)
    }

    fn settings(&self) -> Result<Settings> {
        if self.n_iter == 0 || self.n_max == 0 {
            return Err(Error::InvalidArgument("--N and --N-max must be at least 1".into()));
        }
        Ok(Settings {
            ode_steps: self.ode_steps,
            mesh: self.mesh.unwrap_or(64),
            tol: self.tolerances()?,
            ..Settings::default()
        })
    }

    fn generator(&self) -> Result<Option<GeneratorSpec>> {
        let Some(text) = &self.generate else { return Ok(None) };
        let mut spec = GeneratorSpec::parse(text)?;
        let explicit = ["seed", "a0", "cos", "sin", "rate"];
        if spec.kind == "tilted" && !spec.params.iter().any(|(k, _)| explicit.contains(&k.as_str())) {
            spec.params.push(("seed".into(), self.seed as f64));
        }
        Ok(Some(spec))
    }

    fn problem(&self) -> Result<ProblemFile> {
        match (&self.input, self.generator()?) {
            (Some(path), None) => ProblemFile::load(path),
            (None, Some(spec)) => Ok(spec.build()?.to_problem()),
            _ => Err(Error::InvalidArgument("exactly one of --input and --generate is required".into())),
        }
    }

    fn system(&self, tol: &Tolerances) -> Result<MorseSturmSystem> {
        match (&self.input, self.generator()?) {
            (Some(path), None) => MorseSturmSystem::from_problem(&ProblemFile::load(path)?, tol),
            (None, Some(spec)) => spec.build(),
            _ => Err(Error::InvalidArgument("exactly one of --input and --generate is required".into())),
        }
    }
}

/// Exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Validation(_)
        | Error::MetricIndex(_)
        | Error::MetricNotSymmetric(_)
        | Error::MetricDegenerate
        | Error::MonodromyNotInvertible
        | Error::Shape(_) => 2,
        Error::Nonconvergent(_) | Error::IntegratorAccuracy(_) => 3,
        Error::IdentityViolation(_) | Error::Consistency(_) => 4,
        _ => 1,
    }
}

/// Everything the `report` command computes.
#[derive(Serialize)]
pub struct FullReport {
    pub validation: Option<ValidationReport>,
    pub poincare: PoincareReport,
    pub singular: bool,
    pub profile: IndexProfile,
    pub jumps: Vec<JumpRecord>,
    pub iteration: IterationReport,
    pub growth: GrowthStats,
    pub classification: Classification,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    out: &'a mut Vec<u8>,
}

impl Ctx<'_> {
    fn line(&mut self, text: impl AsRef<str>) -> Result<()> {
        writeln!(self.out, "{}", text.as_ref())?;
        Ok(())
    }

    /// Writes `json` or `csv` to `--out` when given.
    fn emit<T: Serialize>(&mut self, value: &T, csv: Option<&dyn Fn() -> Result<String>>) -> Result<()> {
        let Some(path) = &self.cfg.out else { return Ok(()) };
        let text = match (self.cfg.format, csv) {
            (Format::Json, _) => report::to_json(value) + "\n",
            (Format::Csv, Some(f)) => f()?,
            (Format::Csv, None) => return Err(Error::InvalidArgument("this command has no CSV output".into())),
        };
        std::fs::write(path, text)?;
        Ok(())
    }
}

fn analysis(cfg: &RunConfig) -> Result<Analysis> {
    let settings = cfg.settings()?;
    Analysis::new(cfg.system(&settings.tol)?, settings)
}

fn cmd_validate(ctx: &mut Ctx) -> Result<()> {
    let tol = ctx.cfg.tolerances()?;
    let report = system::validate(&ctx.cfg.problem()?, &tol)?;
    for c in &report.checks {
        let status = if c.passed { "ok" } else { "FAIL" };
        ctx.line(format!("{:<20} {} (tol {}) {status}", c.name, fmt_f64(c.residual), fmt_f64(c.tolerance)))?;
    }
    if report.reduced_accuracy {
        ctx.line("note: sampled curvature, reduced accuracy")?;
    }
    ctx.emit(&report, None)?;
    if !report.passed {
        let failed: Vec<&str> = report.failures().iter().map(|c| c.name.as_str()).collect();
        return Err(Error::Validation(failed.join(", ")));
    }
    ctx.line("valid")
}

fn cmd_generate(ctx: &mut Ctx) -> Result<()> {
    if ctx.cfg.generator()?.is_none() {
        return Err(Error::InvalidArgument("generate needs --generate".into()));
    }
    let problem = ctx.cfg.problem()?;
    match &ctx.cfg.out {
        Some(path) => std::fs::write(path, problem.to_json() + "\n")?,
        None => ctx.line(problem.to_json())?,
    }
    Ok(())
}

fn cmd_poincare(ctx: &mut Ctx) -> Result<()> {
    let a = analysis(ctx.cfg)?;
    let rep = a.poincare.report();
    ctx.line("theta,algebraic,geometric,geometric_restricted")?;
    for s in &rep.unit_spectrum {
        ctx.line(format!("{},{},{},{}", fmt_f64(s.theta), s.algebraic, s.geometric, s.geometric_restricted))?;
    }
    let csv = || {
        let rows: Vec<Vec<String>> = rep
            .unit_spectrum
            .iter()
            .map(|s| {
                vec![
                    fmt_f64(s.theta),
                    fmt_f64(s.re),
                    fmt_f64(s.im),
                    s.algebraic.to_string(),
                    s.geometric.to_string(),
                    s.geometric_restricted.to_string(),
                ]
            })
            .collect();
        report::to_csv(&["theta", "re", "im", "algebraic", "geometric", "geometric_restricted"], &rows)
    };
    ctx.emit(&rep, Some(&csv))
}

fn cmd_index(ctx: &mut Ctx) -> Result<()> {
    let a = analysis(ctx.cfg)?;
    let r = lambda_with_refinement(&a, ctx.cfg.n_iter, CirclePoint::new(ctx.cfg.theta), ctx.cfg.kind, a.settings.mesh)?;
    ctx.line(r.lambda.to_string())?;
    ctx.emit(&r, None)
}

fn print_profile(ctx: &mut Ctx, p: &IndexProfile) -> Result<()> {
    for pt in &p.points {
        ctx.line(format!("point {} lambda {} nullity {}", fmt_f64(pt.theta), pt.lambda, pt.nullity))?;
    }
    for arc in &p.arcs {
        ctx.line(format!("arc ({}, {}) lambda {}", fmt_f64(arc.start), fmt_f64(arc.end), arc.lambda))?;
    }
    ctx.line(format!("epsilon {}", p.epsilon))
}

fn cmd_scan(ctx: &mut Ctx) -> Result<()> {
    let a = analysis(ctx.cfg)?;
    let p = scan_circle(&a, a.settings.mesh)?;
    print_profile(ctx, &p)?;
    ctx.emit(&p, Some(&|| p.to_csv()))?;
    jump_table(&p).map(|_| ())
}

fn iteration(a: &Analysis, p: &IndexProfile, n_max: usize) -> Result<IterationReport> {
    let report = iterate_indices(a, p, n_max, EPSILON_VERIFY_UPTO.min(n_max), a.settings.mesh)?;
    if !report.epsilon_invariant {
        return Err(Error::IdentityViolation(format!(
            "epsilon is not constant along the iterates: {:?}",
            report.rows.iter().map(|r| r.epsilon_direct).collect::<Vec<_>>()
        )));
    }
    Ok(report)
}

fn cmd_iterate(ctx: &mut Ctx) -> Result<()> {
    let a = analysis(ctx.cfg)?;
    let p = scan_circle(&a, a.settings.mesh)?;
    let report = iteration(&a, &p, ctx.cfg.n_max)?;
    ctx.line(report.to_csv()?.trim_end())?;
    ctx.emit(&report, Some(&|| report.to_csv()))
}

fn cmd_fourier(ctx: &mut Ctx) -> Result<()> {
    let n = ctx.cfg.n_iter;
    let m = ctx.cfg.mesh.unwrap_or(64 * n);
    if m % n != 0 {
        return Err(Error::InvalidArgument(format!("--mesh {m} is not divisible by --N {n}")));
    }
    let a = analysis(ctx.cfg)?;
    let r = fourier_check(&a, n, m)?;
    ctx.line(r.summary_zero())?;
    ctx.line(r.summary_star())?;
    ctx.emit(&r, None)
}

fn cmd_growth(ctx: &mut Ctx) -> Result<()> {
    let a = analysis(ctx.cfg)?;
    let p = scan_circle(&a, a.settings.mesh)?;
    let g = growth_stats(&p);
    ctx.line(format!("mean_index {}", fmt_f64(g.mean_index)))?;
    ctx.line(format!("alpha {} beta {}", fmt_f64(g.alpha), fmt_f64(g.beta)))?;
    ctx.line(format!("constant {}", g.is_constant))?;
    ctx.emit(&g, None)
}

fn cmd_classify(ctx: &mut Ctx) -> Result<()> {
    let a = analysis(ctx.cfg)?;
    let p = scan_circle(&a, a.settings.mesh)?;
    let c = classify(&a, &p, CLASSIFY_UPTO, a.settings.mesh)?;
    ctx.line(format!("trivial_spectrum_only {}", c.trivial_spectrum_only))?;
    ctx.line(format!("hyperbolic_mod_y {}", c.hyperbolic_mod_y))?;
    ctx.line(format!("strongly_hyperbolic_mod_y {}", c.strongly_hyperbolic_mod_y))?;
    ctx.line(format!("constant_profile {}", c.constant_profile))?;
    for chk in &c.identity_checks {
        ctx.line(format!("N {} mu {} predicted {}", chk.n, chk.mu_direct, chk.predicted))?;
    }
    ctx.emit(&c, None)?;
    if !c.identity_holds {
        return Err(Error::IdentityViolation("mu(gamma^N) != epsilon + N mu_0(gamma) for a constant profile".into()));
    }
    Ok(())
}

fn cmd_report(ctx: &mut Ctx) -> Result<()> {
    let validation = match &ctx.cfg.input {
        Some(path) => Some(system::validate(&ProblemFile::load(path)?, &ctx.cfg.tolerances()?)?),
        None => None,
    };
    let a = analysis(ctx.cfg)?;
    let profile = scan_circle(&a, a.settings.mesh)?;
    print_profile(ctx, &profile)?;
    let jumps = jump_table(&profile)?;
    let iteration = iteration(&a, &profile, ctx.cfg.n_max)?;
    ctx.line(iteration.to_csv()?.trim_end())?;
    let classification = classify(&a, &profile, CLASSIFY_UPTO, a.settings.mesh)?;
    let full = FullReport {
        validation,
        poincare: a.poincare.report(),
        singular: a.is_singular(),
        growth: growth_stats(&profile),
        profile,
        jumps,
        iteration,
        classification,
    };
    ctx.emit(&full, None)?;
    if !full.classification.identity_holds {
        return Err(Error::IdentityViolation("constant-profile identity fails".into()));
    }
    Ok(())
}

fn dispatch(command: Command, ctx: &mut Ctx) -> Result<()> {
    match command {
        Command::Validate => cmd_validate(ctx),
        Command::Generate => cmd_generate(ctx),
        Command::Poincare => cmd_poincare(ctx),
        Command::Index => cmd_index(ctx),
        Command::Scan => cmd_scan(ctx),
        Command::Iterate => cmd_iterate(ctx),
        Command::FourierCheck => cmd_fourier(ctx),
        Command::Growth => cmd_growth(ctx),
        Command::Classify => cmd_classify(ctx),
        Command::Report => cmd_report(ctx),
    }
}

/// Runs the command line `args` (including the program name), writing results to `out` and
/// diagnostics to `err`. Returns the exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.opts.jobs.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 1;
        }
    };
    let mut buf = Vec::new();
    let mut ctx = Ctx { cfg: &cli.opts, out: &mut buf };
    let result = pool.install(|| dispatch(cli.command, &mut ctx));
    let _ = out.write_all(&buf);
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
