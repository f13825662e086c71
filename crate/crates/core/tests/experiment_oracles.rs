use std::sync::Arc;

use canon_core::conditioning::{condition_mc, finite_n_conditional, mc_agreement, Bath};
use canon_core::dist::{BathFamily, ContinuousDist, DiscreteDist, Dist};
use canon_core::divergence::{kl, kl_on_support, Support};
use canon_core::experiments::{
    exp_clt_error, exp_heatbath_invariance, exp_ldp_temperature, exp_poisson_rate, CltSpec, ExperimentSpec,
    HeatBathSpec, LdpSpec, PoissonSpec, Sequential, EXPERIMENT_NAMES,
};
use canon_core::interval::{Interval, ScalingScheme};
use canon_core::tilting::{bath_slope_param, tilt};

const SAMPLES: u64 = 1_000_000;

fn agrees(x: &Dist, bath: &BathFamily, scheme: &ScalingScheme, i: &Interval, n: u64) {
    let exact = finite_n_conditional(x, bath, scheme, i, n).unwrap();
    let window = exact.finite_n.unwrap().window;
    let y = bath.at(n).unwrap();
    for seed in [5u64, 6] {
        let mc = condition_mc(x, &Bath::Independent(y.clone()), &window, SAMPLES, seed).unwrap();
        let a = mc_agreement(&exact, &mc).unwrap();
        assert!(a.fraction >= 0.95, "n={n} seed={seed}: {a:?}");
    }
}

#[test]
fn gauss_conditionals_match_rejection_sampling() {
    let x: Dist = ContinuousDist::exponential(1.0).unwrap().into();
    let bath = BathFamily::iid_sum(x.clone(), -1);
    let scheme = ScalingScheme::gaussian(1.0, 1).unwrap();
    let i = Interval::new(-1.0, 0.5).unwrap();
    for n in [25, 1600] {
        agrees(&x, &bath, &scheme, &i, n);
    }
}

#[test]
fn poisson_conditionals_match_rejection_sampling() {
    let x: Dist = DiscreteDist::poisson(1.0).unwrap().into();
    let bath = BathFamily::Custom(Arc::new(|n| Ok(DiscreteDist::poisson(n as f64)?.into())));
    let scheme = ScalingScheme::gaussian(1.0, 1).unwrap();
    let i = Interval::new(-1.0, 0.2).unwrap();
    for n in [64, 4096] {
        agrees(&x, &bath, &scheme, &i, n);
    }
}

#[test]
fn ldp_conditional_matches_rejection_sampling_at_smallest_n() {
    let x: Dist = ContinuousDist::exponential(1.0).unwrap().into();
    let bath = BathFamily::iid_sum(x.clone(), -1);
    let scheme = ScalingScheme::large_deviation(1).unwrap();
    agrees(&x, &bath, &scheme, &Interval::new(0.4, 0.1).unwrap(), 25);
}

#[test]
fn gauss_kl_is_stable_under_grid_refinement() {
    let x: Dist = ContinuousDist::exponential(1.0).unwrap().into();
    let bath = BathFamily::iid_sum(x.clone(), -1);
    let scheme = ScalingScheme::gaussian(1.0, 1).unwrap();
    let i = Interval::new(-1.0, 0.5).unwrap();
    let n = 256;
    let cond = finite_n_conditional(&x, &bath, &scheme, &i, n).unwrap();
    let limit = ContinuousDist::normal(0.0, 1.0).unwrap();
    let canon = tilt(&x, &bath_slope_param(&limit, &i, 1.0 / 16.0).unwrap()).unwrap();
    let coarse = kl(&canon, &cond).unwrap();
    let fine = Support::Grid(cond.grid().unwrap().spec.refined().build());
    let refined = kl_on_support(&canon, &cond, &fine);
    assert!(coarse > 0.0);
    assert!((coarse - refined).abs() <= 0.02 * refined, "{coarse} vs {refined}");
}

#[test]
fn experiments_are_deterministic() {
    assert_eq!(exp_poisson_rate(&PoissonSpec::default()).unwrap(), exp_poisson_rate(&PoissonSpec::default()).unwrap());
    assert_eq!(exp_ldp_temperature(&LdpSpec::default()).unwrap(), exp_ldp_temperature(&LdpSpec::default()).unwrap());
    assert_eq!(exp_clt_error(&CltSpec::default()).unwrap(), exp_clt_error(&CltSpec::default()).unwrap());
    let spec = HeatBathSpec { seed: 99, ..HeatBathSpec::default() };
    assert_eq!(exp_heatbath_invariance(&spec).unwrap(), exp_heatbath_invariance(&spec).unwrap());
}

#[test]
fn every_default_experiment_reports_temperature_or_fit() {
    for name in EXPERIMENT_NAMES {
        let rep = ExperimentSpec::default_for(name).unwrap().run(&Sequential).unwrap();
        assert_eq!(rep.experiment, name);
        assert!(rep.fit.is_some(), "{name}");
        assert!(rep.r2().is_finite());
        for (_, t) in rep.series("temperature") {
            assert!(t > 0.0);
        }
    }
}
