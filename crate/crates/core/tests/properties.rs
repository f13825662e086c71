use canon_core::dist::{ContinuousDist, DiscreteDist, Dist};
use canon_core::divergence::{divergence_report, kl_pmf, merge_bins, tv_pmf};
use canon_core::ldp::{reciprocity_check, RateFunction};
use canon_core::quad::{integrate, QuadTol};
use canon_core::tilting::{tilt_field, tilt_lambda, TiltField};
use proptest::prelude::*;

fn continuous() -> impl Strategy<Value = Dist> {
    prop_oneof![
        (-3.0..3.0f64, 0.1..5.0f64).prop_map(|(m, v)| ContinuousDist::normal(m, v).unwrap().into()),
        (0.1..6.0f64).prop_map(|r| ContinuousDist::exponential(r).unwrap().into()),
        (0.6..9.0f64, 0.1..6.0f64).prop_map(|(a, r)| ContinuousDist::gamma(a, r).unwrap().into()),
    ]
}

fn discrete() -> impl Strategy<Value = Dist> {
    prop_oneof![
        (0.1..25.0f64).prop_map(|m| DiscreteDist::poisson(m).unwrap().into()),
        (1u64..50, 0.02..0.98f64).prop_map(|(n, p)| DiscreteDist::binomial(n, p).unwrap().into()),
    ]
}

fn nonneg() -> impl Strategy<Value = Dist> {
    prop_oneof![
        (0.1..6.0f64).prop_map(|r| ContinuousDist::exponential(r).unwrap().into()),
        (0.6..9.0f64, 0.1..6.0f64).prop_map(|(a, r)| ContinuousDist::gamma(a, r).unwrap().into()),
        (0.2..4.0f64).prop_map(|s| ContinuousDist::half_normal(s).unwrap().into()),
        (0.5..5.0f64).prop_map(|b| ContinuousDist::uniform(0.0, b).unwrap().into()),
        (0.1..25.0f64).prop_map(|m| DiscreteDist::poisson(m).unwrap().into()),
        (1u64..50, 0.02..0.98f64).prop_map(|(n, p)| DiscreteDist::binomial(n, p).unwrap().into()),
    ]
}

fn any_family() -> impl Strategy<Value = Dist> {
    prop_oneof![
        continuous(),
        nonneg(),
        (-3.0..0.0f64, 0.5..4.0f64).prop_map(|(a, w)| ContinuousDist::uniform(a, a + w).unwrap().into()),
    ]
}

fn probe_points(d: &Dist) -> Vec<f64> {
    match d {
        Dist::Discrete(k) => k.enumerate().into_iter().take(60).map(|(i, _)| k.position(i)).collect(),
        Dist::Continuous(c) => {
            let (a, b) = c.effective_range().unwrap();
            (1..60).map(|j| a + (b - a) * j as f64 / 60.0).collect()
        }
    }
}

fn pmf(v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pinsker_holds_on_continuous_pairs(p in continuous(), q in continuous()) {
        prop_assume!(p.bounds() == q.bounds());
        let r = divergence_report(&p, &q).unwrap();
        prop_assert!(r.tv <= (r.kl / 2.0).sqrt() + 1e-12, "tv {} kl {}", r.tv, r.kl);
    }

    #[test]
    fn pinsker_holds_on_discrete_pairs(p in discrete(), q in discrete()) {
        let r = divergence_report(&p, &q).unwrap();
        prop_assert!(r.tv <= (r.kl / 2.0).sqrt() + 1e-12, "tv {} kl {}", r.tv, r.kl);
    }
}

proptest! {
    #[test]
    fn zero_tilt_is_identity(d in any_family()) {
        let t = tilt_lambda(&d, 0.0).unwrap();
        for x in probe_points(&d) {
            let want = match &d {
                Dist::Continuous(c) => c.pdf(x),
                Dist::Discrete(k) => k.pmf_at(x),
            };
            prop_assert!((t.density(x) - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn tilts_compose(d in nonneg(), l1 in -0.05..2.0f64, l2 in 0.0..2.0f64) {
        let once = tilt_lambda(&d, l1 + l2).unwrap();
        let first = tilt_lambda(&d, l1).unwrap();
        let twice = tilt_lambda(first.law().unwrap(), l2).unwrap();
        for x in probe_points(&d) {
            let (a, b) = (once.density(x), twice.density(x));
            prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0), "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn normalizer_at_least_one(d in nonneg(), l in 0.0..8.0f64, c in 0.0..2.0f64) {
        prop_assert!(tilt_lambda(&d, l).unwrap().normalizer() >= 1.0);
        let field = TiltField::new(move |x: f64| c * (1.0 + x.cos()) / 2.0, c);
        prop_assert!(tilt_field(&d, &field).unwrap().normalizer() >= 1.0);
    }

    #[test]
    fn tilted_mean_decreases(d in nonneg(), l in 0.0..3.0f64, dl in 0.01..1.0f64) {
        let a = tilt_lambda(&d, l).unwrap().mean();
        let b = tilt_lambda(&d, l + dl).unwrap().mean();
        prop_assert!(b <= a + 1e-12 * a.abs().max(1.0), "{a} -> {b}");
    }

    #[test]
    fn merging_bins_contracts(
        raw in proptest::collection::vec((0.001..1.0f64, 0.001..1.0f64), 2..40),
        cut_seed in proptest::collection::vec(any::<bool>(), 40),
    ) {
        let p = pmf(raw.iter().map(|r| r.0).collect());
        let q = pmf(raw.iter().map(|r| r.1).collect());
        let cuts: Vec<usize> = (1..p.len()).filter(|&i| cut_seed[i]).collect();
        let (mp, mq) = (merge_bins(&p, &cuts), merge_bins(&q, &cuts));
        prop_assert!(tv_pmf(&mp, &mq) <= tv_pmf(&p, &q) + 1e-15);
        prop_assert!(kl_pmf(&mp, &mq) <= kl_pmf(&p, &q) + 1e-12);
    }

    #[test]
    fn legendre_reciprocity(rate in 0.2..5.0f64, m in -2.0..2.0f64, v in 0.2..4.0f64) {
        let e = RateFunction::of(&ContinuousDist::exponential(rate).unwrap().into()).unwrap();
        let n = RateFunction::of(&ContinuousDist::normal(m, v).unwrap().into()).unwrap();
        for j in 0..50 {
            let t = j as f64 / 49.0;
            let ye = (0.1 + 3.9 * t) / rate;
            let yn = m + v.sqrt() * (6.0 * t - 3.0);
            prop_assert!(reciprocity_check(&e, ye).unwrap().r1 < 1e-8);
            prop_assert!(reciprocity_check(&n, yn).unwrap().r1 < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rate_function_properties(d in any_family()) {
        let rf = RateFunction::of(&d).unwrap();
        let (mu, var) = (d.mean(), d.variance());
        prop_assert!(rf.phi(mu).abs() <= 1e-10);
        prop_assert!((rf.d2phi(mu).unwrap() * var - 1.0).abs() <= 1e-6);
        let (lo, hi) = d.bounds();
        let s = var.sqrt();
        let (a, b) = ((mu - 3.0 * s).max(lo), (mu + 3.0 * s).min(hi));
        let pad = 1e-3 * (b - a);
        for j in 0..100 {
            let y = a + pad + (b - a - 2.0 * pad) * j as f64 / 99.0;
            prop_assert!(rf.phi(y) >= 0.0);
            prop_assert!(rf.d2phi(y).unwrap() >= 0.0);
        }
    }
}

fn closed_form_sums() -> impl Strategy<Value = ContinuousDist> {
    prop_oneof![
        (0.2..4.0f64).prop_map(|r| ContinuousDist::exponential(r).unwrap()),
        (1.0..6.0f64, 0.2..4.0f64).prop_map(|(a, r)| ContinuousDist::gamma(a, r).unwrap()),
        (-2.0..2.0f64, 0.2..4.0f64).prop_map(|(m, v)| ContinuousDist::normal(m, v).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sum_law_matches_direct_convolution(d in closed_form_sums(), m in 2u32..=4, t in 0.05..0.95f64) {
        let prev = canon_core::dist::sum_law_continuous(&d, m - 1).unwrap().law;
        let sum = canon_core::dist::sum_law_continuous(&d, m).unwrap().law;
        let z = sum.quantile(t);
        let (lo, hi) = d.effective_range().unwrap();
        let (a, b) = (lo.max(z - prev.effective_range().unwrap().1), hi.min(z - prev.support().0));
        let tol = QuadTol { abs: 1e-14, rel: 1e-12, max_segments: 4000 };
        let direct = integrate(|x| d.pdf(x) * prev.pdf(z - x), a, b, tol).unwrap().value;
        prop_assert!((direct - sum.pdf(z)).abs() <= 1e-8, "z={z}: {direct} vs {}", sum.pdf(z));
    }
}
