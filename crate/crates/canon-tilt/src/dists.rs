//! Distribution mini-language: `normal:mu,sigma2`, `exp:rate`,
//! `pois:lambda`, `gamma:shape,rate`, `uniform:a,b`, `halfnormal:sigma`,
//! `binom:n,p`, `table:path.csv` (density table) and `ptable:path.csv`
//! (integer pmf table).

use std::fs;
use std::path::Path;

use canon_core::dist::{ContinuousDist, DiscreteDist, Dist};
use serde_json::{json, Value};

use crate::error::CliError;

fn numbers(name: &str, args: &str, want: usize) -> Result<Vec<f64>, CliError> {
    let vals: Result<Vec<f64>, _> = args.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match vals {
        Ok(v) if v.len() == want => Ok(v),
        _ => Err(CliError::Usage(format!("`{name}` takes {want} comma-separated numbers, got `{args}`"))),
    }
}

fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    let (mut xs, mut ps) = (Vec::new(), Vec::new());
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let (a, b) = (cols.next().unwrap_or(""), cols.next().unwrap_or(""));
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(x), Ok(p)) => {
                xs.push(x);
                ps.push(p);
            }
            // a header row
            _ if lineno == 0 => continue,
            _ => {
                return Err(CliError::Usage(format!("{}:{}: expected `x,value`", path.display(), lineno + 1)));
            }
        }
    }
    Ok((xs, ps))
}

/// Parses one distribution spec.
pub fn parse_dist(spec: &str) -> Result<Dist, CliError> {
    let (name, args) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("distribution `{spec}` needs the form family:params")))?;
    let d: Dist = match name {
        "normal" => {
            let v = numbers(name, args, 2)?;
            ContinuousDist::normal(v[0], v[1])?.into()
        }
        "exp" => ContinuousDist::exponential(numbers(name, args, 1)?[0])?.into(),
        "pois" => DiscreteDist::poisson(numbers(name, args, 1)?[0])?.into(),
        "gamma" => {
            let v = numbers(name, args, 2)?;
            ContinuousDist::gamma(v[0], v[1])?.into()
        }
        "uniform" => {
            let v = numbers(name, args, 2)?;
            ContinuousDist::uniform(v[0], v[1])?.into()
        }
        "halfnormal" => ContinuousDist::half_normal(numbers(name, args, 1)?[0])?.into(),
        "binom" => {
            let v = numbers(name, args, 2)?;
            if v[0] < 0.0 || v[0].fract() != 0.0 {
                return Err(CliError::Usage(format!("binomial trials must be a nonnegative integer, got {}", v[0])));
            }
            DiscreteDist::binomial(v[0] as u64, v[1])?.into()
        }
        "table" => {
            let (xs, ps) = read_table(Path::new(args))?;
            ContinuousDist::tabulated(xs, ps)?.into()
        }
        "ptable" => {
            let (xs, ps) = read_table(Path::new(args))?;
            if xs.iter().any(|x| x.fract() != 0.0) {
                return Err(CliError::Usage(format!("{args}: pmf table positions must be integers")));
            }
            DiscreteDist::tabulated(xs.iter().map(|&x| x as i64).collect(), ps)?.into()
        }
        _ => return Err(CliError::Usage(format!("unknown distribution family `{name}`"))),
    };
    Ok(d)
}

/// Spec string for `--family` with named parameters.
pub fn family_spec(family: &str, p: &FamilyArgs) -> Result<String, CliError> {
    let need =
        |v: Option<f64>, flag: &str| v.ok_or_else(|| CliError::Usage(format!("family `{family}` needs --{flag}")));
    Ok(match family {
        "normal" | "gaussian" => format!("normal:{},{}", need(p.mean, "mean")?, need(p.var, "var")?),
        "exponential" | "exp" => format!("exp:{}", need(p.rate, "rate")?),
        "poisson" | "pois" => format!("pois:{}", need(p.mean, "mean")?),
        "gamma" => format!("gamma:{},{}", need(p.shape, "shape")?, need(p.rate, "rate")?),
        "uniform" => format!("uniform:{},{}", need(p.a, "a")?, need(p.b, "b")?),
        "halfnormal" | "half-normal" => format!("halfnormal:{}", need(p.sigma, "sigma")?),
        "binomial" | "binom" => format!("binom:{},{}", need(p.trials, "trials")?, need(p.p, "p")?),
        _ => return Err(CliError::Usage(format!("unknown family `{family}`"))),
    })
}

/// Named family parameters accepted alongside `--family`.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct FamilyArgs {
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub shape: Option<f64>,
    #[arg(long)]
    pub mean: Option<f64>,
    #[arg(long)]
    pub var: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub trials: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
}

/// Mini-language spec of a built-in family, if it has one.
pub fn dist_spec(d: &Dist) -> Option<String> {
    Some(match d {
        Dist::Continuous(ContinuousDist::Exponential { rate }) => format!("exp:{rate}"),
        Dist::Continuous(ContinuousDist::Gamma { shape, rate }) => format!("gamma:{shape},{rate}"),
        Dist::Continuous(ContinuousDist::Normal { mean, var }) => format!("normal:{mean},{var}"),
        Dist::Continuous(ContinuousDist::Uniform { a, b }) => format!("uniform:{a},{b}"),
        Dist::Continuous(ContinuousDist::HalfNormal { sigma }) => format!("halfnormal:{sigma}"),
        Dist::Discrete(DiscreteDist::Poisson { mean }) => format!("pois:{mean}"),
        Dist::Discrete(DiscreteDist::Binomial { trials, p }) => format!("binom:{trials},{p}"),
        _ => return None,
    })
}

/// Family name and parameters of a law, for reports.
pub fn describe(d: &Dist) -> Value {
    match d {
        Dist::Continuous(c) => match c {
            ContinuousDist::Exponential { rate } => json!({"family": "exponential", "rate": rate}),
            ContinuousDist::Gamma { shape, rate } => json!({"family": "gamma", "shape": shape, "rate": rate}),
            ContinuousDist::Normal { mean, var } => json!({"family": "normal", "mean": mean, "var": var}),
            ContinuousDist::Uniform { a, b } => json!({"family": "uniform", "a": a, "b": b}),
            ContinuousDist::HalfNormal { sigma } => json!({"family": "halfnormal", "sigma": sigma}),
            ContinuousDist::Tabulated(t) => json!({"family": "table", "points": t.xs().len(), "factor": t.factor()}),
            other => json!({"family": "derived", "mean": other.mean(), "variance": other.variance()}),
        },
        Dist::Discrete(k) => match k {
            DiscreteDist::Poisson { mean } => json!({"family": "poisson", "mean": mean}),
            DiscreteDist::Binomial { trials, p } => json!({"family": "binomial", "trials": trials, "p": p}),
            DiscreteDist::Tabulated(t) => json!({"family": "ptable", "points": t.ks().len(), "factor": t.factor()}),
            other => json!({"family": "discrete", "mean": other.mean(), "variance": other.variance()}),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_families() {
        assert_eq!(parse_dist("exp:2").unwrap(), ContinuousDist::exponential(2.0).unwrap().into());
        assert_eq!(parse_dist("normal:0,4").unwrap(), ContinuousDist::normal(0.0, 4.0).unwrap().into());
        assert_eq!(parse_dist("pois:1.5").unwrap(), DiscreteDist::poisson(1.5).unwrap().into());
        assert!(parse_dist("gamma:1").is_err());
        assert!(parse_dist("weibull:1,2").is_err());
        assert!(parse_dist("exp").is_err());
    }

    #[test]
    fn specs_round_trip() {
        for s in ["exp:0.5", "gamma:3,2", "normal:-1,0.25", "uniform:0,2", "halfnormal:1.5", "pois:4", "binom:10,0.3"] {
            assert_eq!(dist_spec(&parse_dist(s).unwrap()).unwrap(), s);
        }
    }

    #[test]
    fn family_flags_map_to_specs() {
        let args = FamilyArgs { rate: Some(1.0), ..FamilyArgs::default() };
        assert_eq!(family_spec("exponential", &args).unwrap(), "exp:1");
        assert!(family_spec("gamma", &args).is_err());
    }
}
