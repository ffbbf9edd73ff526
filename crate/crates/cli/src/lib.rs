//! `phasequant` command line: argument parsing, command dispatch and
//! structured JSON/CSV output.

pub mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use phasequant_core::cornell::{self, cut_thresholds};
use phasequant_core::oracle::{self, compare_report};
use phasequant_core::wavefunction::{build_classical_wf, compare_normalization};
use phasequant_core::{quantize_2tp, quantize_mtp, spectrum, Error, ErrorKind};

pub use config::{Builtin, Command, Format, RunConfig};

pub const TOOL: &str = "phasequant";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "phasequant", version, about = "Phase-integral quantization toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Quantized levels 0..=n-max.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        n_max: Option<u32>,
        /// Use the multi-turning-point condition with this Maslov index.
        #[arg(long)]
        maslov: Option<u32>,
    },
    /// Samples of the piecewise classical wavefunction of level n.
    Wavefunction {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Relativistic funnel spectrum table.
    Cornell {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        n_r_max: Option<u32>,
        /// Tabulate l = 0..=l-max instead of the single --l.
        #[arg(long)]
        l_max: Option<u32>,
        /// Constant C for the extra E² − C² column.
        #[arg(long)]
        shift: Option<f64>,
        /// Also solve the real-cut condition numerically.
        #[arg(long)]
        numeric: bool,
        #[command(subcommand)]
        action: Option<CornellAction>,
    },
    /// Semiclassical levels against the Numerov oracle.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        n_max: Option<u32>,
        #[arg(long)]
        grid_h: Option<f64>,
    },
    /// Cut-sum identity of the funnel problem at one energy.
    IdentityCheck {
        #[command(flatten)]
        common: CommonArgs,
        /// Defaults to 1.2 times the energy at which both cuts open.
        #[arg(long)]
        energy: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum CornellAction {
    /// Seeded random sweep of the cut-sum identity.
    VerifyIdentity {
        #[arg(long)]
        sweeps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    #[arg(long, visible_alias = "problem", value_enum)]
    pub potential: Option<Builtin>,
    #[arg(long, allow_hyphen_values = true)]
    pub potential_expr: Option<String>,
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long)]
    pub hbar: Option<f64>,
    #[arg(long)]
    pub l: Option<u32>,
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_hyphen_values = true)]
    pub window: Option<Vec<f64>>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub e2: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub alpha_tilde: Option<f64>,
    #[arg(long)]
    pub alpha_s: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON file with the same fields; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl CommonArgs {
    fn to_config(&self) -> RunConfig {
        RunConfig {
            potential: self.potential,
            potential_expr: self.potential_expr.clone(),
            mass: self.mass,
            hbar: self.hbar,
            l: self.l,
            window: self.window.as_ref().map(|w| [w[0], w[1]]),
            omega: self.omega,
            e2: self.e2,
            kappa: self.kappa,
            alpha_tilde: self.alpha_tilde,
            alpha_s: self.alpha_s,
            rel_tol: self.rel_tol,
            format: self.format,
            out: self.out.clone(),
            seed: self.seed,
            ..Default::default()
        }
    }
}

/// Flags to a config, reading `--config` first when given.
pub fn config_from_cli(cli: &Cli) -> Result<RunConfig, Error> {
    let (common, flags) = match &cli.command {
        Cmd::Spectrum { common, n_max, maslov } => (
            common,
            RunConfig {
                command: Some(Command::Spectrum),
                n_max: *n_max,
                maslov: *maslov,
                ..common.to_config()
            },
        ),
        Cmd::Wavefunction { common, n, samples } => (
            common,
            RunConfig {
                command: Some(Command::Wavefunction),
                n: *n,
                samples: *samples,
                ..common.to_config()
            },
        ),
        Cmd::Cornell {
            common,
            n_r_max,
            l_max,
            shift,
            numeric,
            action,
        } => {
            let mut cfg = RunConfig {
                command: Some(Command::Cornell),
                n_r_max: *n_r_max,
                l_max: *l_max,
                shift: *shift,
                numeric: numeric.then_some(true),
                ..common.to_config()
            };
            if let Some(CornellAction::VerifyIdentity { sweeps, seed }) = action {
                cfg.command = Some(Command::CornellVerifyIdentity);
                cfg.sweeps = *sweeps;
                cfg.seed = seed.or(cfg.seed);
            }
            (common, cfg)
        }
        Cmd::Verify { common, n_max, grid_h } => (
            common,
            RunConfig {
                command: Some(Command::Verify),
                n_max: *n_max,
                grid_h: *grid_h,
                ..common.to_config()
            },
        ),
        Cmd::IdentityCheck { common, energy } => (
            common,
            RunConfig {
                command: Some(Command::IdentityCheck),
                energy: *energy,
                ..common.to_config()
            },
        ),
    };
    let base = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    Ok(base.merge(&flags))
}

/// Rendered output plus the exit code it should produce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub exit_code: i32,
    pub text: String,
    pub out: Option<PathBuf>,
    /// Clap usage text, which goes to stderr unless it is help output.
    pub usage: bool,
}

pub fn exit_code(kind: ErrorKind) -> i32 {
    match kind {
        ErrorKind::Input => 1,
        ErrorKind::Numerical => 2,
        ErrorKind::Domain => 3,
    }
}

fn error_value(err: &Error, extra: Option<Value>) -> Value {
    let kind = match err.kind() {
        ErrorKind::Input => "input",
        ErrorKind::Numerical => "numerical",
        ErrorKind::Domain => "domain",
    };
    let mut v = json!({ "kind": kind, "tag": err.tag(), "message": err.to_string() });
    if let Some(Value::Object(extra)) = extra {
        v.as_object_mut().expect("object").extend(extra);
    }
    v
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    result: T,
}

/// Runs a config and writes its output; returns the exit code.
pub fn run(config: RunConfig) -> i32 {
    emit(&execute(config))
}

/// Resolves defaults, runs, and renders the output without writing it.
pub fn execute(config: RunConfig) -> Outcome {
    let out = config.out.clone();
    let resolved = match config.clone().resolve() {
        Ok(c) => c,
        Err(e) => return failure(&config, &e, None),
    };
    match dispatch(&resolved) {
        Ok(Rendered::Json(result)) => Outcome {
            exit_code: 0,
            text: pretty(&Envelope {
                tool: TOOL,
                version: VERSION,
                config: &resolved,
                result,
            }),
            out,
            usage: false,
        },
        Ok(Rendered::Csv(body)) => Outcome {
            exit_code: 0,
            text: format!(
                "# {TOOL} {VERSION}\n# config: {}\n{body}",
                serde_json::to_string(&resolved).expect("config serializes")
            ),
            out,
            usage: false,
        },
        Err((e, extra)) => failure(&resolved, &e, extra),
    }
}

fn failure(config: &RunConfig, err: &Error, extra: Option<Value>) -> Outcome {
    log::error!("{err}");
    let body = json!({
        "tool": TOOL,
        "version": VERSION,
        "config": config,
        "error": error_value(err, extra),
    });
    Outcome {
        exit_code: exit_code(err.kind()),
        text: pretty(&body),
        out: config.out.clone(),
        usage: false,
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output serializes");
    s.push('\n');
    s
}

enum Rendered {
    Json(Value),
    Csv(String),
}

type Failure = (Error, Option<Value>);

fn plain(e: Error) -> Failure {
    (e, None)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

fn dispatch(cfg: &RunConfig) -> Result<Rendered, Failure> {
    let command = cfg.command().map_err(plain)?;
    let format = cfg.format.unwrap_or(Format::Json);
    match command {
        Command::Spectrum => {
            if format == Format::Csv {
                return Err(plain(Error::InvalidParameter("spectrum output is JSON only".into())));
            }
            let problem = cfg.problem().map_err(plain)?;
            let n_max = cfg.n_max.unwrap_or(5);
            let levels = match cfg.maslov {
                None => spectrum(&problem, n_max)
                    .map_err(|e| (e.source, Some(json!({ "level": e.level }))))?,
                Some(mu) => (0..=n_max)
                    .map(|n| quantize_mtp(&problem, n, mu).map_err(|e| (e, Some(json!({ "level": n })))))
                    .collect::<Result<Vec<_>, _>>()?,
            };
            Ok(Rendered::Json(json!({ "levels": levels })))
        }
        Command::Wavefunction => {
            let problem = cfg.problem().map_err(plain)?;
            let n = cfg.n.unwrap_or(0);
            let entry = quantize_2tp(&problem, n).map_err(plain)?;
            let wf = build_classical_wf(&problem, &entry).map_err(plain)?;
            let samples = wf.samples(cfg.samples.unwrap_or(201));
            match format {
                Format::Csv => output::wavefunction_csv(&samples).map(Rendered::Csv).map_err(plain),
                Format::Json => {
                    let standing = compare_normalization(&wf).ok();
                    Ok(Rendered::Json(json!({
                        "level": entry,
                        "x1": wf.x1,
                        "x2": wf.x2,
                        "phi1": wf.phi1,
                        "phi2": wf.phi2,
                        "norm": wf.norm,
                        "node_count": wf.node_count(),
                        "left": wf.left,
                        "right": wf.right,
                        "standing_wave": standing,
                        "samples": samples
                            .iter()
                            .map(|(x, psi, r)| json!({ "x": x, "psi": psi, "region": r.label() }))
                            .collect::<Vec<_>>(),
                    })))
                }
            }
        }
        Command::Cornell => {
            let params = cfg.cornell_params().map_err(plain)?;
            let ls: Vec<u32> = match cfg.l_max {
                Some(lm) => (0..=lm).collect(),
                None => vec![params.l],
            };
            let n_r_max = cfg.n_r_max.unwrap_or(3);
            let rows = output::cornell_rows(&params, &ls, n_r_max, cfg.shift, cfg.numeric.unwrap_or(false))
                .map_err(plain)?;
            match format {
                Format::Csv => output::cornell_csv(&rows).map(Rendered::Csv).map_err(plain),
                Format::Json => Ok(Rendered::Json(json!({
                    "lambda": params.lambda(),
                    "rows": rows,
                }))),
            }
        }
        Command::CornellVerifyIdentity => {
            json_only(format)?;
            let sweep = cornell::identity_sweep(cfg.sweeps.unwrap_or(20), cfg.seed.unwrap_or(0)).map_err(plain)?;
            Ok(Rendered::Json(to_value(&sweep)))
        }
        Command::IdentityCheck => {
            json_only(format)?;
            let params = cfg.cornell_params().map_err(plain)?;
            let thresholds = cut_thresholds(&params);
            let energy = cfg.energy.unwrap_or(1.2 * thresholds.both());
            let check = cornell::contour_identity(&params, energy).map_err(plain)?;
            Ok(Rendered::Json(json!({
                "thresholds": thresholds,
                "check": check,
                "tolerance": 1e-6 * check.analytic.abs().max(1.0),
            })))
        }
        Command::Verify => {
            json_only(format)?;
            let n_max = cfg.n_max.unwrap_or(3);
            let h = cfg.grid_h.unwrap_or(oracle::DEFAULT_STEP);
            if cfg.potential == Some(Builtin::Cornell) {
                let params = cfg.cornell_params().map_err(plain)?;
                let semi = (0..=n_max)
                    .map(|n| cornell::cornell_spectrum_closed_form(&params, n))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(plain)?;
                let levels = oracle::cornell_levels(&params, n_max, h).map_err(plain)?;
                let report = compare_report(&semi, &levels).map_err(plain)?;
                Ok(Rendered::Json(json!({
                    "semiclassical": semi,
                    "oracle": levels,
                    "deviations": report,
                })))
            } else {
                let problem = cfg.problem().map_err(plain)?;
                let semi = spectrum(&problem, n_max).map_err(|e| (e.source, Some(json!({ "level": e.level }))))?;
                let levels = oracle::schrodinger_levels(&problem, n_max, h).map_err(plain)?;
                let report = compare_report(&semi, &levels).map_err(plain)?;
                Ok(Rendered::Json(json!({
                    "semiclassical": semi,
                    "oracle": levels,
                    "deviations": report,
                })))
            }
        }
    }
}

fn json_only(format: Format) -> Result<(), Failure> {
    match format {
        Format::Json => Ok(()),
        Format::Csv => Err(plain(Error::InvalidParameter(
            "CSV is available for wavefunction samples and cornell tables only".into(),
        ))),
    }
}

/// Writes the outcome to its sink and returns the exit code.
pub fn emit(outcome: &Outcome) -> i32 {
    match &outcome.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &outcome.text) {
                eprintln!("cannot write {}: {e}", path.display());
                return 1;
            }
        }
        None if outcome.usage && outcome.exit_code != 0 => eprint!("{}", outcome.text),
        None => print!("{}", outcome.text),
    }
    outcome.exit_code
}

/// Parses `args` (including the program name) and runs without writing;
/// usage errors come back as a structured input error.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => match config_from_cli(&cli) {
            Ok(cfg) => execute(cfg),
            Err(e) => failure(&RunConfig::default(), &e, None),
        },
        Err(e) => {
            use clap::error::ErrorKind as K;
            let code = match e.kind() {
                K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand => 0,
                _ => 1,
            };
            Outcome {
                exit_code: code,
                text: e.render().to_string(),
                out: None,
                usage: true,
            }
        }
    }
}

/// Entry point used by the binary.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    emit(&run_args(args))
}
