//! Run configuration: the command, its parameters, seed and output.

use std::fs;
use std::path::Path;

use canon_core::dist::Dist;
use canon_core::experiments::{CltSpec, ExperimentSpec, GaussSpec, GibbsSpec, HeatBathSpec, LdpSpec, PoissonSpec};
use canon_core::interval::Interval;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::dists::{dist_spec, parse_dist};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Tilt,
    Condition,
    Divergence,
    Ratefn,
    Experiment,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Tilt => "tilt",
            Command::Condition => "condition",
            Command::Divergence => "divergence",
            Command::Ratefn => "ratefn",
            Command::Experiment => "experiment",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Path value meaning standard output.
pub const STDOUT: &str = "-";

fn stdout_path() -> String {
    STDOUT.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "empty_object")]
    pub params: Value,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_format: Format,
    #[serde(default = "stdout_path")]
    pub out_path: String,
}

fn empty_object() -> Value {
    Value::Object(Map::new())
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self { command, params: empty_object(), seed: 0, out_format: Format::Json, out_path: stdout_path() }
    }
}

/// What a `--config` file held.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigFile {
    Full(RunConfig),
    Params(Value),
}

/// Reads a config file: a full run config (has a `command` key), a
/// report whose `config` member is one, or a bare parameter object.
pub fn load_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let Value::Object(map) = &v else {
        return Err(CliError::Config(format!("{}: expected a JSON object", path.display())));
    };
    if map.contains_key("command") {
        return Ok(ConfigFile::Full(serde_json::from_value(v)?));
    }
    if let (Some(cfg @ Value::Object(inner)), true) = (map.get("config"), map.contains_key("result")) {
        if inner.contains_key("command") {
            return Ok(ConfigFile::Full(serde_json::from_value(cfg.clone())?));
        }
    }
    Ok(ConfigFile::Params(v))
}

pub fn from_params<T: DeserializeOwned>(params: &Value) -> Result<T, CliError> {
    let v = if params.is_null() { empty_object() } else { params.clone() };
    serde_json::from_value(v).map_err(|e| CliError::Config(format!("params: {e}")))
}

pub fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("config types serialize")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowCfg {
    pub h: f64,
    pub delta: f64,
}

impl WindowCfg {
    pub fn interval(&self) -> Result<Interval, CliError> {
        Ok(Interval::new(self.h, self.delta)?)
    }
}

impl From<Interval> for WindowCfg {
    fn from(i: Interval) -> Self {
        Self { h: i.h, delta: i.delta }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// `lambda` as given.
    #[default]
    User,
    /// Slope of the bath's log interval probability.
    Bath,
    /// Derivative of the rate function at the window endpoint nearest the mean.
    Ldp,
    /// Mean constraint `alpha`.
    Maxent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TiltParams {
    pub dist: String,
    pub route: Route,
    pub lambda: Option<f64>,
    pub window: Option<WindowCfg>,
    pub bath: Option<String>,
    pub scale: f64,
    pub alpha: Option<f64>,
    pub points: usize,
}

impl Default for TiltParams {
    fn default() -> Self {
        Self {
            dist: String::new(),
            route: Route::User,
            lambda: None,
            window: None,
            bath: None,
            scale: 1.0,
            alpha: None,
            points: 21,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CondMethod {
    #[default]
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    Gaussian,
    LargeDeviation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConditionParams {
    pub x: String,
    /// Bath law, or the summand of an i.i.d. bath when `n` is set.
    pub y: String,
    pub window: Option<WindowCfg>,
    pub method: CondMethod,
    pub samples: u64,
    pub n: Option<u64>,
    pub scheme: Option<SchemeName>,
}

impl Default for ConditionParams {
    fn default() -> Self {
        Self {
            x: String::new(),
            y: String::new(),
            window: None,
            method: CondMethod::Exact,
            samples: 100_000,
            n: None,
            scheme: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DivergenceParams {
    pub p: String,
    pub q: String,
    pub scale: f64,
}

impl Default for DivergenceParams {
    fn default() -> Self {
        Self { p: String::new(), q: String::new(), scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatefnParams {
    pub dist: String,
    /// Evaluation points; when absent, `points` values across mean ± 3 sd.
    pub ys: Option<Vec<f64>>,
    pub points: usize,
    pub window: Option<WindowCfg>,
}

impl Default for RatefnParams {
    fn default() -> Self {
        Self { dist: String::new(), ys: None, points: 50, window: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentParams {
    pub name: String,
    pub spec: Value,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        Self { name: String::new(), spec: empty_object() }
    }
}

fn band(b: (f64, f64)) -> [f64; 2] {
    [b.0, b.1]
}

fn summand_spec(d: &Dist) -> String {
    dist_spec(d).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoissonCfg {
    pub n_grid: Vec<u64>,
    pub subsystem_mean: f64,
    pub bath_mean: f64,
    pub window: WindowCfg,
    pub slope_band: [f64; 2],
}

impl Default for PoissonCfg {
    fn default() -> Self {
        let s = PoissonSpec::default();
        Self {
            n_grid: s.n_grid,
            subsystem_mean: s.subsystem_mean,
            bath_mean: s.bath_mean,
            window: s.window.into(),
            slope_band: band(s.slope_band),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussCfg {
    pub n_grid: Vec<u64>,
    pub summand: String,
    pub window: WindowCfg,
    pub factors: Vec<f64>,
    pub compare_from: u64,
}

impl Default for GaussCfg {
    fn default() -> Self {
        let s = GaussSpec::default();
        Self {
            n_grid: s.n_grid,
            summand: summand_spec(&s.summand),
            window: s.window.into(),
            factors: s.factors,
            compare_from: s.compare_from,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdpCfg {
    pub n_grid: Vec<u64>,
    pub summand: String,
    pub window: WindowCfg,
    pub misspecified_lambda: f64,
    pub kl_tol: f64,
    pub contrast: f64,
    pub equivalence_tol: f64,
}

impl Default for LdpCfg {
    fn default() -> Self {
        let s = LdpSpec::default();
        Self {
            n_grid: s.n_grid,
            summand: summand_spec(&s.summand),
            window: s.window.into(),
            misspecified_lambda: s.misspecified_lambda,
            kl_tol: s.kl_tol,
            contrast: s.contrast,
            equivalence_tol: s.equivalence_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GibbsCfg {
    pub n_grid: Vec<u64>,
    pub k: u32,
    pub bath_per_n: u32,
    pub window: WindowCfg,
    pub test_sets: usize,
    pub slope_min: f64,
    pub alpha: f64,
    pub irrelevance_delta: f64,
    pub irrelevance_tol: f64,
    pub oracle_tol: f64,
}

impl Default for GibbsCfg {
    fn default() -> Self {
        let s = GibbsSpec::default();
        Self {
            n_grid: s.n_grid,
            k: s.k,
            bath_per_n: s.bath_per_n,
            window: s.window.into(),
            test_sets: s.test_sets,
            slope_min: s.slope_min,
            alpha: s.alpha,
            irrelevance_delta: s.irrelevance_delta,
            irrelevance_tol: s.irrelevance_tol,
            oracle_tol: s.oracle_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatBathCfg {
    pub n_grid: Vec<u64>,
    pub width_scale: f64,
    pub subintervals: usize,
    pub psi: f64,
    pub window: WindowCfg,
    pub contrast_window: WindowCfg,
    pub linear_slope: f64,
    pub linear_intercept: f64,
    pub cramer_window: WindowCfg,
    pub invariance_tol: f64,
    pub contrast_floor: f64,
    pub linear_tol: f64,
}

impl Default for HeatBathCfg {
    fn default() -> Self {
        let s = HeatBathSpec::default();
        Self {
            n_grid: s.n_grid,
            width_scale: s.width_scale,
            subintervals: s.subintervals,
            psi: s.psi,
            window: s.window.into(),
            contrast_window: s.contrast_window.into(),
            linear_slope: s.linear_slope,
            linear_intercept: s.linear_intercept,
            cramer_window: s.cramer_window.into(),
            invariance_tol: s.invariance_tol,
            contrast_floor: s.contrast_floor,
            linear_tol: s.linear_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CltCfg {
    pub n_grid: Vec<u64>,
    pub summand: String,
    pub z_points: usize,
    pub z_max: f64,
    pub slope_band: [f64; 2],
    pub exact_tol: f64,
}

impl Default for CltCfg {
    fn default() -> Self {
        let s = CltSpec::default();
        Self {
            n_grid: s.n_grid,
            summand: summand_spec(&s.summand),
            z_points: s.z_points,
            z_max: s.z_max,
            slope_band: band(s.slope_band),
            exact_tol: s.exact_tol,
        }
    }
}

/// Default spec object of the named experiment.
pub fn default_experiment_spec(name: &str) -> Option<Value> {
    Some(match name {
        "exp_poisson_rate" => to_value(&PoissonCfg::default()),
        "exp_gauss_temperature" => to_value(&GaussCfg::default()),
        "exp_ldp_temperature" => to_value(&LdpCfg::default()),
        "exp_gibbs_phase" => to_value(&GibbsCfg::default()),
        "exp_heatbath_invariance" => to_value(&HeatBathCfg::default()),
        "exp_clt_error" => to_value(&CltCfg::default()),
        _ => return None,
    })
}

/// Resolves a spec object (missing keys take defaults) into the core spec
/// and the fully filled spec object.
pub fn experiment_spec(name: &str, spec: &Value, seed: u64) -> Result<(ExperimentSpec, Value), CliError> {
    Ok(match name {
        "exp_poisson_rate" => {
            let c: PoissonCfg = from_params(spec)?;
            let s = PoissonSpec {
                n_grid: c.n_grid.clone(),
                seed,
                subsystem_mean: c.subsystem_mean,
                bath_mean: c.bath_mean,
                window: c.window.interval()?,
                slope_band: (c.slope_band[0], c.slope_band[1]),
            };
            (ExperimentSpec::Poisson(s), to_value(&c))
        }
        "exp_gauss_temperature" => {
            let c: GaussCfg = from_params(spec)?;
            let s = GaussSpec {
                n_grid: c.n_grid.clone(),
                seed,
                summand: parse_dist(&c.summand)?,
                window: c.window.interval()?,
                factors: c.factors.clone(),
                compare_from: c.compare_from,
            };
            (ExperimentSpec::Gauss(s), to_value(&c))
        }
        "exp_ldp_temperature" => {
            let c: LdpCfg = from_params(spec)?;
            let s = LdpSpec {
                n_grid: c.n_grid.clone(),
                seed,
                summand: parse_dist(&c.summand)?,
                window: c.window.interval()?,
                misspecified_lambda: c.misspecified_lambda,
                kl_tol: c.kl_tol,
                contrast: c.contrast,
                equivalence_tol: c.equivalence_tol,
            };
            (ExperimentSpec::Ldp(s), to_value(&c))
        }
        "exp_gibbs_phase" => {
            let c: GibbsCfg = from_params(spec)?;
            let s = GibbsSpec {
                n_grid: c.n_grid.clone(),
                seed,
                k: c.k,
                bath_per_n: c.bath_per_n,
                window: c.window.interval()?,
                test_sets: c.test_sets,
                slope_min: c.slope_min,
                alpha: c.alpha,
                irrelevance_delta: c.irrelevance_delta,
                irrelevance_tol: c.irrelevance_tol,
                oracle_tol: c.oracle_tol,
            };
            (ExperimentSpec::Gibbs(s), to_value(&c))
        }
        "exp_heatbath_invariance" => {
            let c: HeatBathCfg = from_params(spec)?;
            let s = HeatBathSpec {
                n_grid: c.n_grid.clone(),
                seed,
                width_scale: c.width_scale,
                subintervals: c.subintervals,
                psi: c.psi,
                window: c.window.interval()?,
                contrast_window: c.contrast_window.interval()?,
                linear_slope: c.linear_slope,
                linear_intercept: c.linear_intercept,
                cramer_window: c.cramer_window.interval()?,
                invariance_tol: c.invariance_tol,
                contrast_floor: c.contrast_floor,
                linear_tol: c.linear_tol,
            };
            (ExperimentSpec::HeatBath(s), to_value(&c))
        }
        "exp_clt_error" => {
            let c: CltCfg = from_params(spec)?;
            let s = CltSpec {
                n_grid: c.n_grid.clone(),
                seed,
                summand: parse_dist(&c.summand)?,
                z_points: c.z_points,
                z_max: c.z_max,
                slope_band: (c.slope_band[0], c.slope_band[1]),
                exact_tol: c.exact_tol,
            };
            (ExperimentSpec::Clt(s), to_value(&c))
        }
        _ => return Err(CliError::Usage(format!("unknown experiment `{name}`"))),
    })
}

/// Default parameter object of a command, printed as its schema.
pub fn schema(command: Command) -> Value {
    match command {
        Command::Tilt => to_value(&TiltParams::default()),
        Command::Condition => to_value(&ConditionParams::default()),
        Command::Divergence => to_value(&DivergenceParams::default()),
        Command::Ratefn => to_value(&RatefnParams::default()),
        Command::Experiment => {
            let specs: Map<String, Value> = canon_core::experiments::EXPERIMENT_NAMES
                .iter()
                .map(|n| (n.to_string(), default_experiment_spec(n).unwrap_or(Value::Null)))
                .collect();
            serde_json::json!({"name": "", "spec": specs})
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_mirror_core_specs() {
        for name in canon_core::experiments::EXPERIMENT_NAMES {
            let v = default_experiment_spec(name).unwrap();
            let (spec, filled) = experiment_spec(name, &Value::Null, 0).unwrap();
            assert_eq!(spec.name(), name);
            assert_eq!(filled, v);
        }
        let (spec, _) = experiment_spec("exp_ldp_temperature", &serde_json::json!({}), 0).unwrap();
        let ExperimentSpec::Ldp(s) = spec else { panic!() };
        let d = LdpSpec::default();
        assert_eq!((s.n_grid, s.summand, s.window), (d.n_grid, d.summand, d.window));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = serde_json::json!({"n_grid": [1, 2, 3, 4], "windw": {"h": 0.0, "delta": 1.0}});
        assert!(matches!(experiment_spec("exp_ldp_temperature", &bad, 0), Err(CliError::Config(_))));
        let bad = serde_json::json!({"command": "tilt", "sede": 3});
        assert!(serde_json::from_value::<RunConfig>(bad).is_err());
        assert!(from_params::<DivergenceParams>(&serde_json::json!({"p": "exp:1", "r": 1})).is_err());
    }

    #[test]
    fn run_config_defaults() {
        let c: RunConfig = serde_json::from_value(serde_json::json!({"command": "ratefn"})).unwrap();
        assert_eq!(c, RunConfig::new(Command::Ratefn));
    }
}
