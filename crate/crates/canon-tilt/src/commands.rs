//! The five commands, each turning resolved parameters into a report body.

use canon_core::conditioning::{condition_exact, condition_mc, finite_n_conditional, Bath, ConditionalLaw};
use canon_core::dist::{BathFamily, Dist};
use canon_core::divergence::scaled_divergence;
use canon_core::experiments::ExperimentSpec;
use canon_core::interval::{Interval, ScalingScheme};
use canon_core::ldp::{ldp_tilt_param, maxent_lambda, mgf_domain, y_star, RateFunction};
use canon_core::tilting::{bath_slope_param, tilt, Provenance, TiltParam};
use serde_json::{json, Value};

use crate::config::{
    experiment_spec, CondMethod, ConditionParams, DivergenceParams, ExperimentParams, RatefnParams, Route, SchemeName,
    TiltParams, WindowCfg,
};
use crate::dists::{describe, dist_spec, parse_dist};
use crate::error::CliError;
use crate::exec::Threaded;
use crate::report::{num, opt_num, Cell, Table};

pub struct Outcome {
    pub result: Value,
    pub table: Table,
    pub failed: bool,
}

fn required<'a>(v: &'a str, key: &str) -> Result<&'a str, CliError> {
    if v.is_empty() {
        Err(CliError::Usage(format!("missing parameter `{key}`")))
    } else {
        Ok(v)
    }
}

fn window(w: Option<WindowCfg>, key: &str) -> Result<Interval, CliError> {
    w.ok_or_else(|| CliError::Usage(format!("missing parameter `{key}` (h and delta)")))?.interval()
}

fn window_json(i: &Interval) -> Value {
    json!({"h": num(i.h), "delta": num(i.delta)})
}

pub fn param_json(p: &TiltParam) -> Value {
    json!({
        "lambda": num(p.lambda),
        "provenance": p.provenance.as_str(),
        "window": window_json(&p.window),
        "scale": num(p.scale),
    })
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        _ => (0..n).map(|j| a + (b - a) * j as f64 / (n - 1) as f64).collect(),
    }
}

fn base_density(d: &Dist, x: f64) -> f64 {
    match d {
        Dist::Continuous(c) => c.pdf(x),
        Dist::Discrete(k) => k.pmf_at(x),
    }
}

fn probe_points(d: &Dist, count: usize) -> Result<Vec<f64>, CliError> {
    Ok(match d {
        Dist::Continuous(c) => {
            let (a, b) = c.effective_range()?;
            linspace(a, b, count)
        }
        Dist::Discrete(k) => k.enumerate().into_iter().take(count).map(|(i, _)| k.position(i)).collect(),
    })
}

fn tilt_param(p: &TiltParams, base: &Dist) -> Result<TiltParam, CliError> {
    let point = || Interval::new(0.0, 0.0).map_err(CliError::from);
    Ok(match p.route {
        Route::User => {
            let lambda = p.lambda.ok_or_else(|| CliError::Usage("route `user` needs `lambda`".into()))?;
            let w = match p.window {
                Some(w) => w.interval()?,
                None => point()?,
            };
            TiltParam::user(lambda, w).scaled(p.scale)
        }
        Route::Bath => {
            let spec = p.bath.as_deref().ok_or_else(|| CliError::Usage("route `bath` needs `bath`".into()))?;
            let Dist::Continuous(b) = parse_dist(spec)? else {
                return Err(CliError::Usage("route `bath` needs a continuous bath law".into()));
            };
            bath_slope_param(&b, &window(p.window, "window")?, p.scale)?
        }
        Route::Ldp => {
            let source = match p.bath.as_deref() {
                Some(s) => parse_dist(s)?,
                None => base.clone(),
            };
            ldp_tilt_param(&RateFunction::of(&source)?, &window(p.window, "window")?)?.scaled(p.scale)
        }
        Route::Maxent => {
            let alpha = p.alpha.ok_or_else(|| CliError::Usage("route `maxent` needs `alpha`".into()))?;
            let sol = maxent_lambda(base, alpha)?;
            TiltParam::new(-sol.lambda, Provenance::MaxEntropy, Interval::new(alpha, 0.0)?, 1.0)
        }
    })
}

pub fn run_tilt(p: &TiltParams) -> Result<Outcome, CliError> {
    let base = parse_dist(required(&p.dist, "dist")?)?;
    let param = tilt_param(p, &base)?;
    let t = tilt(&base, &param)?;
    let law = t.law();
    let mut table = Table::new(&["x", "base", "tilted"]);
    for x in probe_points(&base, p.points)? {
        table.push(vec![x.into(), base_density(&base, x).into(), t.density(x).into()]);
    }
    let result = json!({
        "base": describe(&base),
        "base_spec": dist_spec(&base),
        "tilted": law.map(describe),
        "tilted_spec": law.and_then(dist_spec),
        "param": param_json(&param),
        "temperature": num(param.temperature()),
        "normalizer": num(t.normalizer()),
        "log_normalizer": num(t.log_normalizer()),
        "base_mean": num(base.mean()),
        "tilted_mean": num(t.mean()),
    });
    Ok(Outcome { result, table, failed: false })
}

fn scheme(name: SchemeName, y: &Dist, n: u64) -> Result<ScalingScheme, CliError> {
    Ok(match name {
        SchemeName::Gaussian => ScalingScheme::gaussian(y.mean(), n)?,
        SchemeName::LargeDeviation => ScalingScheme::large_deviation(n)?,
    })
}

fn law_table(law: &ConditionalLaw) -> Table {
    let mut table = Table::new(&["x", "density", "stderr"]);
    for r in law.rows() {
        table.push(vec![r.x.into(), r.density.into(), r.stderr.into()]);
    }
    table
}

pub fn run_condition(p: &ConditionParams, seed: u64) -> Result<Outcome, CliError> {
    let x = parse_dist(required(&p.x, "x")?)?;
    let y = parse_dist(required(&p.y, "y")?)?;
    let i = window(p.window, "window")?;
    let (law, scheme_name, conditioned) = match (p.n, p.scheme) {
        (None, None) => {
            let law = match p.method {
                CondMethod::Exact => condition_exact(&x, &y, &i)?,
                CondMethod::Mc => condition_mc(&x, &Bath::Independent(y), &i, p.samples, seed)?,
            };
            (law, None, i)
        }
        (Some(n), Some(name)) => {
            let s = scheme(name, &y, n)?;
            let w = s.condition_window(&i);
            let bath = BathFamily::iid_sum(y, -1);
            let law = match p.method {
                CondMethod::Exact => finite_n_conditional(&x, &bath, &s, &i, n)?,
                CondMethod::Mc => condition_mc(&x, &Bath::Independent(bath.at(n)?), &w, p.samples, seed)?,
            };
            (law, Some(name), w)
        }
        _ => return Err(CliError::Usage("`n` and `scheme` go together".into())),
    };
    let result = json!({
        "window": window_json(&i),
        "conditioned_window": window_json(&conditioned),
        "n": p.n,
        "scheme": scheme_name,
        "method": law.method.as_str(),
        "seed": law.mc_meta.map(|m| m.seed),
        "samples": law.mc_meta.map(|m| m.samples),
        "accepted": law.mc_meta.map(|m| m.accepted),
        "mass_in_window": num(law.mass_in_window),
        "ln_mass_in_window": num(law.ln_mass_in_window),
        "mean": num(law.mean()),
        "discrete": x.is_discrete(),
    });
    Ok(Outcome { result, table: law_table(&law), failed: false })
}

pub fn run_divergence(p: &DivergenceParams) -> Result<Outcome, CliError> {
    let a = parse_dist(required(&p.p, "p")?)?;
    let b = parse_dist(required(&p.q, "q")?)?;
    let r = scaled_divergence(&a, &b, p.scale)?;
    let metrics: [(&str, Option<f64>); 8] = [
        ("kl", Some(r.kl)),
        ("tv", Some(r.tv)),
        ("sup_dist", r.sup_dist),
        ("pinsker_bound", Some(r.pinsker_bound)),
        ("scale", Some(r.scale)),
        ("scaled_kl", Some(r.scaled_kl)),
        ("outside_mass_p", Some(r.outside_mass_p)),
        ("outside_mass_q", Some(r.outside_mass_q)),
    ];
    let mut table = Table::new(&["metric", "value"]);
    let mut result = serde_json::Map::new();
    for (k, v) in metrics {
        table.push(vec![Cell::Text(k.into()), v.into()]);
        result.insert(k.into(), opt_num(v));
    }
    result.insert("pinsker_holds".into(), Value::Bool(r.pinsker_holds()));
    Ok(Outcome { result: Value::Object(result), table, failed: false })
}

fn default_ys(d: &Dist, count: usize) -> Vec<f64> {
    let (mu, sd) = (d.mean(), d.variance().sqrt());
    let (lo, hi) = d.bounds();
    let (a, b) = ((mu - 3.0 * sd).max(lo), (mu + 3.0 * sd).min(hi));
    let pad = 1e-3 * (b - a);
    linspace(a + pad, b - pad, count)
}

pub fn run_ratefn(p: &RatefnParams) -> Result<Outcome, CliError> {
    let d = parse_dist(required(&p.dist, "dist")?)?;
    let rf = RateFunction::of(&d)?;
    let ys = p.ys.clone().unwrap_or_else(|| default_ys(&d, p.points));
    let mut table = Table::new(&["y", "phi", "dphi", "d2phi"]);
    for r in rf.table(&ys) {
        table.push(r.iter().map(|&v| Cell::Num(v)).collect());
    }
    let (dlo, dhi) = mgf_domain(&d);
    let mut result = json!({
        "dist": describe(&d),
        "mean": num(d.mean()),
        "variance": num(d.variance()),
        "mgf_domain": [num(dlo), num(dhi)],
        "tilt": Value::Null,
    });
    if let Some(w) = p.window {
        let i = w.interval()?;
        let param = ldp_tilt_param(&rf, &i)?;
        result["tilt"] = json!({
            "y_star": num(y_star(&rf, &i)),
            "param": param_json(&param),
            "temperature": num(param.temperature()),
        });
    }
    Ok(Outcome { result, table, failed: false })
}

/// Runs a named experiment; returns the outcome and the filled spec.
pub fn run_experiment(p: &ExperimentParams, seed: u64) -> Result<(Outcome, Value), CliError> {
    let name = required(&p.name, "name")?;
    let (spec, filled): (ExperimentSpec, Value) = experiment_spec(name, &p.spec, seed)?;
    let rep = spec.run(&Threaded::from_env())?;
    let mut table = Table::new(&["n", "metric", "value"]);
    for r in &rep.rows {
        table.push(vec![Cell::Int(r.n), Cell::Text(r.metric.clone()), r.value.into()]);
    }
    let fit = rep.fit.as_ref().map(|f| {
        json!({
            "metric": rep.fit_metric,
            "against": rep.fit_against,
            "slope": num(f.slope),
            "intercept": num(f.intercept),
            "slope_stderr": num(f.slope_stderr),
            "r2": num(f.r2),
            "points": f.points,
        })
    });
    let checks: Vec<Value> =
        rep.checks.iter().map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail})).collect();
    let result = json!({
        "experiment": rep.experiment,
        "verdict": rep.verdict.as_str(),
        "fit": fit,
        "checks": checks,
        "notes": rep.notes,
    });
    Ok((Outcome { result, table, failed: !rep.passed() }, filled))
}
