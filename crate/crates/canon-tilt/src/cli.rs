//! Argument parsing, config resolution and dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::commands::{run_condition, run_divergence, run_experiment, run_ratefn, run_tilt, Outcome};
use crate::config::{
    from_params, load_config, schema, to_value, Command, CondMethod, ConditionParams, ConfigFile, DivergenceParams,
    ExperimentParams, Format, RatefnParams, Route, RunConfig, SchemeName, TiltParams, WindowCfg,
};
use crate::dists::{family_spec, FamilyArgs};
use crate::error::CliError;
use crate::report::{emit, Report};

#[derive(Debug, Parser)]
#[command(name = "canon-tilt", version, about = "Canonical (exponentially tilted) approximations of conditional laws")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for Monte Carlo conditioning and experiments.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// `json` or `csv` selects the format; anything else is an output path.
    #[arg(long, global = true)]
    pub out: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON file: a full run config, a report, or the command's parameters.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Tilt a law by `e^{-λx}`.
    Tilt(TiltArgs),
    /// Conditional law of X given X + Y in a window.
    Condition(ConditionArgs),
    /// KL, total variation and sup distance between two laws.
    Divergence(DivergenceArgs),
    /// Rate function table and the window's tilt parameter.
    Ratefn(RatefnArgs),
    /// Run a named experiment.
    Experiment(ExperimentArgs),
    /// Run whatever command a full config file names.
    Run,
    /// Print the default parameters of a command.
    Schema {
        #[arg(value_enum)]
        command: Command,
    },
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct TiltArgs {
    /// Base law in the mini-language, e.g. `exp:1`.
    #[arg(long, conflicts_with = "family")]
    pub dist: Option<String>,
    /// Base family with named parameters, e.g. `--family exponential --rate 1`.
    #[arg(long)]
    pub family: Option<String>,
    #[command(flatten)]
    pub family_args: FamilyArgs,
    #[arg(long, value_enum)]
    pub route: Option<Route>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Bath law for the `bath` route, or rate-function source for `ldp`.
    #[arg(long)]
    pub bath: Option<String>,
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ConditionArgs {
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long)]
    pub y: Option<String>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<CondMethod>,
    #[arg(long)]
    pub samples: Option<u64>,
    /// Total number of summands; `y` becomes the bath summand.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeName>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct DivergenceArgs {
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub scale: Option<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct RatefnArgs {
    #[arg(long)]
    pub dist: Option<String>,
    /// Comma-separated evaluation points.
    #[arg(long, value_delimiter = ',')]
    pub ys: Option<Vec<f64>>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub name: Option<String>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn set_opt<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

fn merge_window(w: Option<WindowCfg>, h: Option<f64>, delta: Option<f64>) -> Result<Option<WindowCfg>, CliError> {
    Ok(match (w, h, delta) {
        (w, None, None) => w,
        (_, Some(h), Some(delta)) => Some(WindowCfg { h, delta }),
        (Some(w), h, delta) => Some(WindowCfg { h: h.unwrap_or(w.h), delta: delta.unwrap_or(w.delta) }),
        (None, _, _) => return Err(CliError::Usage("a window needs both --h and --delta".into())),
    })
}

fn command_of(sub: &Sub) -> Option<Command> {
    Some(match sub {
        Sub::Tilt(_) => Command::Tilt,
        Sub::Condition(_) => Command::Condition,
        Sub::Divergence(_) => Command::Divergence,
        Sub::Ratefn(_) => Command::Ratefn,
        Sub::Experiment(_) => Command::Experiment,
        Sub::Run | Sub::Schema { .. } => return None,
    })
}

/// A resolved run: the config as it will be echoed, plus its outcome.
fn execute(cli: Cli) -> Result<Report, CliError> {
    let file = cli.global.config.as_deref().map(load_config).transpose()?;
    let (mut cfg, params) = match (file, command_of(&cli.command)) {
        (Some(ConfigFile::Full(c)), Some(cmd)) if c.command != cmd => {
            return Err(CliError::Config(format!(
                "config file is for `{}`, not `{}`",
                c.command.as_str(),
                cmd.as_str()
            )))
        }
        (Some(ConfigFile::Full(c)), _) => {
            let p = c.params.clone();
            (c, p)
        }
        (Some(ConfigFile::Params(_)), None) | (None, None) => {
            return Err(CliError::Usage("`run` needs --config with a full run config".into()))
        }
        (Some(ConfigFile::Params(v)), Some(cmd)) => (RunConfig::new(cmd), v),
        (None, Some(cmd)) => (RunConfig::new(cmd), Value::Null),
    };

    set(&mut cfg.seed, cli.global.seed);
    match cli.global.out.as_deref() {
        Some("json") => cfg.out_format = Format::Json,
        Some("csv") => cfg.out_format = Format::Csv,
        Some(path) => {
            cfg.out_path = path.to_string();
            if cli.global.format.is_none() && path.ends_with(".csv") {
                cfg.out_format = Format::Csv;
            }
        }
        None => {}
    }
    set(&mut cfg.out_format, cli.global.format);

    let outcome: Outcome = match cfg.command {
        Command::Tilt => {
            let mut p: TiltParams = from_params(&params)?;
            if let Sub::Tilt(a) = &cli.command {
                if let Some(f) = &a.family {
                    p.dist = family_spec(f, &a.family_args)?;
                }
                set(&mut p.dist, a.dist.clone());
                set(&mut p.route, a.route);
                set_opt(&mut p.lambda, a.lambda);
                p.window = merge_window(p.window, a.h, a.delta)?;
                set_opt(&mut p.bath, a.bath.clone());
                set(&mut p.scale, a.scale);
                set_opt(&mut p.alpha, a.alpha);
                set(&mut p.points, a.points);
            }
            if p.route == Route::User && p.lambda.is_none() {
                return Err(CliError::Usage("route `user` needs --lambda".into()));
            }
            cfg.params = to_value(&p);
            run_tilt(&p)?
        }
        Command::Condition => {
            let mut p: ConditionParams = from_params(&params)?;
            if let Sub::Condition(a) = &cli.command {
                set(&mut p.x, a.x.clone());
                set(&mut p.y, a.y.clone());
                p.window = merge_window(p.window, a.h, a.delta)?;
                set(&mut p.method, a.method);
                set(&mut p.samples, a.samples);
                set_opt(&mut p.n, a.n);
                set_opt(&mut p.scheme, a.scheme);
            }
            cfg.params = to_value(&p);
            run_condition(&p, cfg.seed)?
        }
        Command::Divergence => {
            let mut p: DivergenceParams = from_params(&params)?;
            if let Sub::Divergence(a) = &cli.command {
                set(&mut p.p, a.p.clone());
                set(&mut p.q, a.q.clone());
                set(&mut p.scale, a.scale);
            }
            cfg.params = to_value(&p);
            run_divergence(&p)?
        }
        Command::Ratefn => {
            let mut p: RatefnParams = from_params(&params)?;
            if let Sub::Ratefn(a) = &cli.command {
                set(&mut p.dist, a.dist.clone());
                set_opt(&mut p.ys, a.ys.clone());
                set(&mut p.points, a.points);
                p.window = merge_window(p.window, a.h, a.delta)?;
            }
            cfg.params = to_value(&p);
            run_ratefn(&p)?
        }
        Command::Experiment => {
            let mut p: ExperimentParams = match &params {
                Value::Object(m) if !m.contains_key("spec") && !m.is_empty() => {
                    ExperimentParams { spec: params.clone(), ..ExperimentParams::default() }
                }
                _ => from_params(&params)?,
            };
            if let Sub::Experiment(a) = &cli.command {
                set(&mut p.name, a.name.clone());
            }
            let (outcome, filled) = run_experiment(&p, cfg.seed)?;
            p.spec = filled;
            cfg.params = to_value(&p);
            outcome
        }
    };
    Ok(Report { config: cfg, result: outcome.result, table: outcome.table, failed: outcome.failed })
}

fn print_schema(command: Command) {
    let s = serde_json::to_string_pretty(&schema(command)).expect("schema serializes");
    eprintln!("parameters of `{}` (defaults):\n{s}", command.as_str());
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Sub::Schema { command } = cli.command {
        println!("{}", serde_json::to_string_pretty(&schema(command)).expect("schema serializes"));
        return 0;
    }
    let command = command_of(&cli.command);
    let report = match execute(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            if let (true, Some(cmd)) = (e.wants_schema(), command) {
                print_schema(cmd);
            }
            return 1;
        }
    };
    if let Err(e) = emit(&report, report.config.out_format, &report.config.out_path) {
        eprintln!("error: {e}");
        return 1;
    }
    if report.failed {
        eprintln!("verdict: fail");
        return 2;
    }
    0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_merge() {
        let w = WindowCfg { h: 1.0, delta: 2.0 };
        assert_eq!(merge_window(Some(w), None, Some(3.0)).unwrap(), Some(WindowCfg { h: 1.0, delta: 3.0 }));
        assert_eq!(merge_window(None, None, None).unwrap(), None);
        assert!(merge_window(None, Some(1.0), None).is_err());
    }

    #[test]
    fn parses_negative_window() {
        let cli = Cli::try_parse_from(["canon-tilt", "condition", "--h", "-1", "--delta", "0.5"]).unwrap();
        let Sub::Condition(a) = cli.command else { panic!() };
        assert_eq!((a.h, a.delta), (Some(-1.0), Some(0.5)));
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
