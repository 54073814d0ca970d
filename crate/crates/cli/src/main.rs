//! `holder-reg` command-line front end.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use holder_reg::calculus::{subderivative_norm, HomogeneousSampler};
use holder_reg::catalog::{PenaltySpec, Problem, ProblemSpec};
use holder_reg::config::RunConfig;
use holder_reg::error::{Error, Result};
use holder_reg::lsip::calmness::DEFAULT_DELTAS;
use holder_reg::lsip::{
    calmness_certificate, empirical_calmness, enc_check, slater_check, solve_lp, LpStatus, LsipProblem,
    PerturbationProfile,
};
use holder_reg::moduli::{isolated_calmness_modulus, sharp_minimum_modulus, strong_subregularity_modulus};
use holder_reg::penalty::{penalty_threshold, sharp_penalty_check};
use holder_reg::report::{estimate_csv, per_scale_rows, to_value, trace_csv, LimitReport, ModulusReport, Quantity};
use holder_reg::settings::Settings;
use holder_reg::setmap::HolderOrder;
use holder_reg::verify::{all_pass, run_suite, Suite, VerifyOptions};

use output::Output;

#[derive(Debug, Parser)]
#[command(name = "holder-reg", version, about = "Hölder-order regularity estimators")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration; falls back to $HOLDERREG_CONFIG.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Directory for report, CSV and metadata files.
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true, value_name = "K")]
    parallel: Option<usize>,
    /// Seed for random direction sets above three dimensions.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ProblemArg {
    /// Problem file (JSON).
    #[arg(value_name = "FILE", conflicts_with = "problem_flag")]
    problem: Option<PathBuf>,
    /// Problem file, as an alternative to the positional argument
    #[arg(long = "problem", value_name = "FILE")]
    problem_flag: Option<PathBuf>,
}

impl ProblemArg {
    fn path(&self) -> Result<&Path> {
        self.problem
            .as_deref()
            .or(self.problem_flag.as_deref())
            .ok_or_else(|| Error::Usage("a problem file is required".into()))
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate a modulus or derivative norm of a catalog problem.
    Analyze {
        kind: AnalyzeKind,
        /// Hölder order, a positive number
        #[arg(long)]
        q: f64,
        #[command(flatten)]
        problem: ProblemArg,
    },
    /// Run a property suite.
    Verify {
        suite: SuiteArg,
        #[arg(long, hide = true, default_value_t = 0.0)]
        inject_norm_lower_bias: f64,
    },
    /// Linear semi-infinite programs.
    Lsip {
        action: LsipAction,
        /// Hölder order; required by `calmness`
        #[arg(long)]
        q: Option<f64>,
        #[command(flatten)]
        problem: ProblemArg,
    },
    /// Penalty thresholds and sharpness checks.
    Penalty {
        action: PenaltyAction,
        /// Hölder order, a positive number
        #[arg(long)]
        q: f64,
        /// Penalty exponent; overrides the file
        #[arg(long)]
        p: Option<f64>,
        /// Penalty parameter; overrides the file, default 1
        #[arg(long)]
        r: Option<f64>,
        #[command(flatten)]
        problem: ProblemArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AnalyzeKind {
    FnSharp,
    MapSubreg,
    MapCalmness,
    DerivNorm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteArg {
    Calculus,
    Moduli,
    Lsip,
    Penalty,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Calculus => Suite::Calculus,
            SuiteArg::Moduli => Suite::Moduli,
            SuiteArg::Lsip => Suite::Lsip,
            SuiteArg::Penalty => Suite::Penalty,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LsipAction {
    Solve,
    Slater,
    Enc,
    Calmness,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PenaltyAction {
    Threshold,
    Check,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))
}

fn order(q: f64) -> Result<HolderOrder> {
    HolderOrder::new(q).map_err(|e| Error::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let config = RunConfig::load(cli.common.config.as_deref())?;
    let mut settings = config.settings()?;
    if let Some(seed) = cli.common.seed {
        settings.high_dim_seed = Some(seed);
    }
    if let Some(k) = cli.common.parallel.or(config.parallel) {
        if k == 0 {
            return Err(Error::Usage("--parallel must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Error::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    let dir = cli.common.out_dir.clone().or(config.output.dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let out = Output::new(dir, &config, cli.common.seed);

    match cli.command {
        Command::Analyze { kind, q, problem } => {
            let spec = ProblemSpec::from_json(&read(problem.path()?)?)?;
            analyze(kind, order(q)?, spec.build()?, &settings, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            suite,
            inject_norm_lower_bias,
        } => {
            let suite = Suite::from(suite);
            let opts = VerifyOptions {
                settings,
                norm_lower_bias: inject_norm_lower_bias,
            };
            let results = run_suite(suite, &opts);
            for r in &results {
                eprintln!("{} {}", if r.pass { "PASS" } else { "FAIL" }, r.property_id);
            }
            out.write(&format!("verify-{suite}"), &results, None)?;
            Ok(if all_pass(&results) { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Lsip { action, q, problem } => {
            let lp = LsipProblem::from_json(&read(problem.path()?)?)?;
            lsip(action, q, &lp, &settings, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Penalty { action, q, p, r, problem } => {
            let pr = PenaltySpec::from_json(&read(problem.path()?)?)?.build(p, r)?;
            let q = order(q)?;
            match action {
                PenaltyAction::Threshold => {
                    let t = penalty_threshold(&pr, q, &settings)?;
                    out.write("penalty-threshold", &t, None)?;
                }
                PenaltyAction::Check => {
                    let c = sharp_penalty_check(&pr, q, &settings)?;
                    let csv = trace_csv(&per_scale_rows(&c.sharp.per_radius));
                    out.write("penalty-check", &c, Some(&csv))?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn analyze(kind: AnalyzeKind, q: HolderOrder, problem: Problem, s: &Settings, out: &Output) -> Result<()> {
    let wrong_kind = |want: &str| Error::Usage(format!("{} expects a {want} problem", kind.name()));
    match (kind, problem) {
        (AnalyzeKind::FnSharp, Problem::Function { f, xbar }) => {
            let rep = sharp_minimum_modulus(&f, &xbar, q, &s.radii, &s.grid(f.dim())?, &s.tol)?;
            let csv = trace_csv(&per_scale_rows(&rep.per_radius));
            out.write("fn-sharp", &ModulusReport::new(Quantity::SharpMinimum, &rep), Some(&csv))
        }
        (AnalyzeKind::MapSubreg, Problem::Map { map, xbar, ybar }) => {
            let rep = strong_subregularity_modulus(&map, &xbar, &ybar, q, &s.radii, &s.grid(map.input_dim())?, &s.tol)?;
            let csv = trace_csv(&per_scale_rows(&rep.per_radius));
            out.write("map-subreg", &ModulusReport::new(Quantity::StrongSubregularity, &rep), Some(&csv))
        }
        (AnalyzeKind::MapCalmness, Problem::Map { map, xbar, ybar }) => {
            let rep = isolated_calmness_modulus(&map, &xbar, &ybar, q, &s.radii, &s.tol)?;
            let csv = trace_csv(&per_scale_rows(&rep.per_radius));
            out.write("map-calmness", &ModulusReport::new(Quantity::IsolatedCalmness, &rep), Some(&csv))
        }
        (AnalyzeKind::DerivNorm, Problem::Function { f, xbar }) => {
            let e = subderivative_norm(&f, &xbar, q, &s.grid(f.dim())?, &s.ladder, &s.tol)?;
            out.write("deriv-norm", &LimitReport::new(Quantity::SubderivativeNorm, q, &e), Some(&estimate_csv(&e)))
        }
        (AnalyzeKind::DerivNorm, Problem::Map { map, xbar, ybar }) => {
            let h = HomogeneousSampler::derivative(&map, &xbar, &ybar, q, s.ladder.clone(), s.grid(map.input_dim())?)?
                .with_tolerances(s.tol);
            let lower = h.norm_lower();
            let outer = h.norm_outer();
            let report = json!({
                "lower": to_value(&LimitReport::new(Quantity::NormLower, q, &lower))?,
                "outer": to_value(&LimitReport::new(Quantity::NormOuter, q, &outer))?,
            });
            out.write("deriv-norm", &report, Some(&estimate_csv(&lower)))
        }
        (AnalyzeKind::FnSharp, Problem::Map { .. }) => Err(wrong_kind("function")),
        (_, Problem::Function { .. }) => Err(wrong_kind("map")),
    }
}

impl AnalyzeKind {
    fn name(self) -> &'static str {
        match self {
            AnalyzeKind::FnSharp => "fn-sharp",
            AnalyzeKind::MapSubreg => "map-subreg",
            AnalyzeKind::MapCalmness => "map-calmness",
            AnalyzeKind::DerivNorm => "deriv-norm",
        }
    }
}

fn lsip(action: LsipAction, q: Option<f64>, lp: &LsipProblem, s: &Settings, out: &Output) -> Result<()> {
    let p = lp.discretized()?;
    match action {
        LsipAction::Solve => out.write("lsip-solve", &solve_lp(&p.c, &p.a, &p.b)?, None),
        LsipAction::Slater => out.write("lsip-slater", &slater_check(&p)?, None),
        LsipAction::Enc => {
            let xbar = match &lp.xbar {
                Some(x) => x.clone(),
                None => {
                    let sol = solve_lp(&p.c, &p.a, &p.b)?;
                    if sol.status != LpStatus::Optimal {
                        return Err(Error::Precondition(format!("the LP is {:?}", sol.status).to_lowercase()));
                    }
                    sol.x
                }
            };
            out.write("lsip-enc", &enc_check(&p, &xbar)?, None)
        }
        LsipAction::Calmness => {
            let q = order(q.ok_or_else(|| Error::Usage("lsip calmness needs --q".into()))?)?;
            let cert = calmness_certificate(&p, lp.xbar.as_deref(), q, s)?;
            let empirical = empirical_calmness(&p, &cert.xbar, q, &PerturbationProfile::ALL, &DEFAULT_DELTAS)?;
            let report: Value = json!({
                "quantity": "isolated_calmness_certificate",
                "anchor": "positive subderivative norm of the canonical function certifies isolated calmness of the solution mapping",
                "certificate": to_value(&cert)?,
                "empirical": to_value(&empirical)?,
            });
            out.write("lsip-calmness", &report, Some(&estimate_csv(&cert.estimate)))
        }
    }
}
