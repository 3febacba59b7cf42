use discern_lab::dop::{DistributionOfPlay, SelectionSpec};
use discern_lab::game::{Outcome, OutcomeDist, Theta};
use discern_lab::identify::{
    classify, discern_statistic, identify, identify_binned, recover_beta_delta, recover_beta_sign, recover_marginal_cdf,
    recover_rho, simulate_markets, AlphaCombo, BinnedOracle, ConceptClass, DensitySource, ExactOracle, FnOracle,
    LimitConfig, ProbOracle, Status,
};
use discern_lab::numerics::{std_normal_cdf, Correlation, SeedStream};
use discern_lab::par::Exec;
use discern_lab::probabilities::example_theta;
use discern_lab::Error;

fn corr(rho: f64) -> Correlation {
    Correlation::new(rho).unwrap()
}

/// α = (0, −1; 0, −0.5), unit slopes.
fn reference_theta(rho: f64) -> Theta {
    Theta::new([[0.0, -1.0], [0.0, -0.5]], [1.0, 1.0], corr(rho)).unwrap()
}

fn exact(d: DistributionOfPlay) -> ExactOracle {
    ExactOracle::new(d)
}

fn cfg() -> LimitConfig {
    LimitConfig::default()
}

fn alpha(player: usize, opp: u8) -> AlphaCombo {
    AlphaCombo::Alpha { player, opp }
}

#[test]
fn slope_signs() {
    let t = Theta::symmetric(0.0, -1.0, Correlation::independent()).unwrap();
    let o = exact(DistributionOfPlay::saa(t));
    assert_eq!([recover_beta_sign(&o, &cfg(), 0).unwrap(), recover_beta_sign(&o, &cfg(), 1).unwrap()], [1.0, 1.0]);
    let flipped = Theta::new(t.alpha, [-2.0, 1.0], t.rho).unwrap();
    let o = exact(DistributionOfPlay::saa(flipped));
    assert_eq!([recover_beta_sign(&o, &cfg(), 0).unwrap(), recover_beta_sign(&o, &cfg(), 1).unwrap()], [-1.0, 1.0]);
    let flat = FnOracle(|_z: [f64; 2]| Ok(OutcomeDist::uniform()));
    assert!(recover_beta_sign(&flat, &cfg(), 0).is_err());
}

#[test]
fn slope_and_location_from_moments() {
    // Player 1 enters alone with probability Φ(2 z_1 + 1).
    let t = Theta::new([[1.0, 0.0], [0.5, -0.5]], [2.0, 1.0], Correlation::independent()).unwrap();
    let (b, loc) = recover_beta_delta(&exact(DistributionOfPlay::saa(t)), &cfg(), 0).unwrap();
    assert!((b - 2.0).abs() < 1e-3 && (loc - 1.0).abs() < 1e-3, "{b} {loc}");
    let t = Theta::new([[0.0, -1.0], [0.0, -1.0]], [1.0, 1.0], corr(0.2)).unwrap();
    let (b, loc) = recover_beta_delta(&exact(DistributionOfPlay::saa(t)), &cfg(), 1).unwrap();
    assert!((b - 1.0).abs() < 1e-3 && loc.abs() < 1e-3, "{b} {loc}");
}

#[test]
fn location_is_the_monopoly_intercept() {
    // In the symmetric example the monopoly intercept is η.
    for eta in [0.5, 1.0, 2.0] {
        let o = exact(DistributionOfPlay::saa(example_theta(eta, Correlation::independent()).unwrap()));
        let (b, loc) = recover_beta_delta(&o, &cfg(), 0).unwrap();
        assert!((b - 1.0).abs() < 1e-3 && (loc - eta).abs() < 1e-3, "eta={eta}: {b} {loc}");
    }
}

#[test]
fn marginal_cdf_recovery() {
    let t = reference_theta(0.3);
    let o = exact(DistributionOfPlay::saa(t));
    let f = recover_marginal_cdf(&o, &cfg(), 0, 1.0, 0.0).unwrap();
    assert!((f.eval(0.0) - 0.5).abs() < 1e-4);
    assert!((f.eval(1.96) - 0.975).abs() < 1e-3);
    assert!(f.f.windows(2).all(|w| w[0] <= w[1]));
    assert!(f.sup_distance(std_normal_cdf, -3.0, 3.0) < 1e-4);
}

#[test]
fn rationalizable_alphas() {
    let d = DistributionOfPlay::rationalizable(reference_theta(0.3), SelectionSpec::OutcomeWeights([0.4, 0.3, 0.2, 0.1])).unwrap();
    let r = identify(&exact(d), &cfg()).unwrap();
    assert_eq!(r.concept_class, ConceptClass::Rationalizable);
    for (combo, want) in [(alpha(0, 0), 0.0), (alpha(0, 1), -1.0), (alpha(1, 0), 0.0), (alpha(1, 1), -0.5)] {
        let e = r.alpha(combo);
        assert_eq!(e.status, Status::Point);
        assert!((e.value.unwrap() - want).abs() < 2e-3, "{combo}");
    }
    assert!((r.t[0] + 1.0).abs() < 2e-3 && (r.t[1] + 0.5).abs() < 2e-3);
}

#[test]
fn maxmin_alphas_and_honesty() {
    let r = identify(&exact(DistributionOfPlay::maxmin(reference_theta(0.3))), &cfg()).unwrap();
    assert_eq!(r.concept_class, ConceptClass::Maxmin);
    assert!(r.t[0].abs() < 2e-3 && r.t[1].abs() < 2e-3);
    for (i, want) in [(0, -1.0), (1, -0.5)] {
        let e = r.alpha(AlphaCombo::MinAlpha { player: i });
        assert_eq!(e.status, Status::Point);
        assert!((e.value.unwrap() - want).abs() < 2e-3);
        for opp in 0..2 {
            let a = r.alpha(alpha(i, opp));
            assert_eq!(a.status, Status::NotIdentified);
            assert!(a.value.is_none());
        }
    }
    assert!(r.alpha(AlphaCombo::DuopolySum).value.is_none());
}

#[test]
fn collusion_alphas() {
    let r = identify(&exact(DistributionOfPlay::collusion(reference_theta(0.3))), &cfg()).unwrap();
    assert_eq!(r.concept_class, ConceptClass::Collusion);
    assert!((r.t[0] + 1.5).abs() < 2e-3 && (r.t[1] + 1.5).abs() < 2e-3);
    let sum = r.alpha(AlphaCombo::DuopolySum);
    assert_eq!(sum.status, Status::Point);
    assert!((sum.value.unwrap() + 1.5).abs() < 2e-3);
    for i in 0..2 {
        assert_eq!(r.alpha(alpha(i, 0)).status, Status::Point);
        assert!(r.alpha(alpha(i, 0)).value.unwrap().abs() < 2e-3);
        let a = r.alpha(alpha(i, 1));
        assert_eq!(a.status, Status::PartialOnly);
        assert!(a.value.is_none());
    }
}

#[test]
fn discern_statistics() {
    let (t1, t2, c) = discern_statistic(&exact(DistributionOfPlay::saa(reference_theta(0.0))), &cfg()).unwrap();
    assert!((t1 + 1.0).abs() < 2e-3 && (t2 + 0.5).abs() < 2e-3);
    assert_eq!(c, ConceptClass::Rationalizable);
}

#[test]
fn classification_rules() {
    assert_eq!(classify([0.01, -0.01], 0.02), ConceptClass::Maxmin);
    assert_eq!(classify([-1.0, -0.5], 0.02), ConceptClass::Rationalizable);
    assert_eq!(classify([-1.5, -1.49], 0.02), ConceptClass::Collusion);
    assert_eq!(classify([0.03, 0.03], 0.02), ConceptClass::Ambiguous);
}

#[test]
fn correlation_recovery() {
    let cases = [
        (DistributionOfPlay::saa(reference_theta(0.0)), 0.0),
        (DistributionOfPlay::saa(reference_theta(0.3)), 0.3),
        (DistributionOfPlay::maxmin(reference_theta(-0.5)), -0.5),
        (DistributionOfPlay::collusion(reference_theta(-0.5)), -0.5),
    ];
    for (d, rho) in cases {
        let r = recover_rho(&exact(d), &cfg(), DensitySource::Analytic).unwrap();
        assert!((r - rho).abs() < 0.05, "rho={rho} got {r}");
        if rho < 0.0 {
            assert!(r < 0.0);
        }
    }
}

#[test]
fn correlation_from_recovered_density() {
    let o = exact(DistributionOfPlay::maxmin(reference_theta(0.3)));
    let r = recover_rho(&o, &cfg(), DensitySource::FromCdf).unwrap();
    assert!((r - 0.3).abs() < 0.05, "{r}");
}

#[test]
fn selection_does_not_move_limits() {
    let t = Theta::new([[0.2, -0.8], [-0.1, -0.6]], [1.5, 0.7], corr(0.3)).unwrap();
    let dops = [
        DistributionOfPlay::saa(t),
        DistributionOfPlay::rationalizable(t, SelectionSpec::OutcomeWeights([0.1, 0.4, 0.4, 0.1])).unwrap(),
        DistributionOfPlay::rationalizable(t, SelectionSpec::OutcomeWeights([0.0, 0.0, 0.0, 1.0])).unwrap(),
        DistributionOfPlay::nash(t, SelectionSpec::MostProfitableEnters).unwrap(),
    ];
    let mut first: Option<([f64; 2], [f64; 2], [f64; 2])> = None;
    for d in dops {
        let o = exact(d);
        let c = cfg();
        let b = [recover_beta_delta(&o, &c, 0).unwrap(), recover_beta_delta(&o, &c, 1).unwrap()];
        let (t1, t2, _) = discern_statistic(&o, &c).unwrap();
        let now = ([b[0].0, b[1].0], [b[0].1, b[1].1], [t1, t2]);
        if let Some(f) = first {
            for i in 0..2 {
                assert!((now.0[i] - f.0[i]).abs() <= 1e-6);
                assert!((now.1[i] - f.1[i]).abs() <= 1e-6);
                assert!((now.2[i] - f.2[i]).abs() <= 1e-6);
            }
        } else {
            first = Some(now);
        }
    }
}

// The limiting ψ is a step at ρ; at a finite depth d it is smoothed. Under
// maxmin play the entry-exit boundary is a rectangle corner, so ψ at depth d
// is exactly the conditional normal probability Φ((ρ − τ)d/√(1−ρ²)).
#[test]
fn psi_profile_shape() {
    for rho in [-0.4, 0.0, 0.3] {
        let s = (1.0 - rho * rho as f64).sqrt();
        let r = identify(&exact(DistributionOfPlay::maxmin(reference_theta(rho))), &cfg()).unwrap();
        let (near, far) = cfg().psi_depths;
        for q in &r.psi_profile {
            assert!((q.near - std_normal_cdf((rho - q.tau) * near / s)).abs() < 2e-3, "rho={rho} tau={}", q.tau);
            assert!((q.far - std_normal_cdf((rho - q.tau) * far / s)).abs() < 2e-3, "rho={rho} tau={}", q.tau);
        }
    }
    // Other concepts add a finite-depth bias but keep the step away from ρ.
    for d in [
        DistributionOfPlay::saa(reference_theta(0.3)),
        DistributionOfPlay::collusion(reference_theta(0.3)),
    ] {
        let r = identify(&exact(d), &cfg()).unwrap();
        for q in &r.psi_profile {
            if q.tau <= 0.3 - 0.45 {
                assert!((q.far - 1.0).abs() < 0.02, "tau={} psi={}", q.tau, q.far);
            }
            if q.tau >= 0.3 + 0.45 {
                assert!(q.far.abs() < 0.02, "tau={} psi={}", q.tau, q.far);
            }
        }
    }
}

#[test]
fn equal_weight_nash_round_trip() {
    let t = Theta::new([[0.2, -0.8], [-0.1, -0.6]], [1.5, 0.7], corr(0.3)).unwrap();
    let r = identify(&exact(DistributionOfPlay::nash(t, SelectionSpec::EqualWeightNe).unwrap()), &cfg()).unwrap();
    assert_eq!(r.concept_class, ConceptClass::Rationalizable);
    assert!((r.beta_hat[0].value.unwrap() - 1.5).abs() < 5e-3);
    assert!((r.beta_hat[1].value.unwrap() - 0.7).abs() < 5e-3);
    assert!((r.alpha(alpha(0, 1)).value.unwrap() + 0.8).abs() < 5e-3);
    assert!((r.rho_hat.value.unwrap() - 0.3).abs() < 0.05);
}

#[test]
fn config_validation() {
    let t = reference_theta(0.0);
    let o = exact(DistributionOfPlay::saa(t));
    for bad in [
        LimitConfig { l: 5.0, ..cfg() },
        LimitConfig { fd_step: 0.2, ..cfg() },
        LimitConfig { fd_step: 0.0, ..cfg() },
        LimitConfig { tau_grid: vec![0.0, 0.5], ..cfg() },
        LimitConfig { psi_depths: (5.0, 4.0), ..cfg() },
    ] {
        assert!(matches!(identify(&o, &bad), Err(Error::InvalidParam { .. })));
    }
}

#[test]
fn binned_no_entry_near_closed_form() {
    let d = DistributionOfPlay::saa(example_theta(1.0, Correlation::independent()).unwrap());
    let rows = simulate_markets(&d, 1_000_000, -1.0, 1.0, SeedStream::new(8, 0), Exec::Parallel).unwrap();
    let o = BinnedOracle::new(rows, 0.1).unwrap();
    let p = o.query([0.0, 0.0]).unwrap().get(Outcome::new(0, 0));
    assert!((p - 0.141_687_725_268_653_18).abs() < 0.01, "{p}");
    assert!(matches!(o.query([9.0, 9.0]), Err(Error::EmptyNeighborhood { .. })));
}

#[test]
fn simulation_is_reproducible() {
    let d = DistributionOfPlay::nash(reference_theta(0.2), SelectionSpec::EqualWeightNe).unwrap();
    let s = SeedStream::new(12, 4);
    let a = simulate_markets(&d, 40_000, -2.0, 2.0, s, Exec::Parallel).unwrap();
    let b = simulate_markets(&d, 40_000, -2.0, 2.0, s, Exec::Sequential).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 40_000);
}

#[test]
fn binned_pipeline() {
    let t = Theta::new([[0.2, -0.8], [-0.1, -0.6]], [1.5, 0.7], corr(0.3)).unwrap();
    let cases = [
        (DistributionOfPlay::saa(t), ConceptClass::Rationalizable),
        (DistributionOfPlay::maxmin(t), ConceptClass::Maxmin),
        (DistributionOfPlay::collusion(t), ConceptClass::Collusion),
    ];
    let bw = 0.15;
    for (k, (d, want)) in cases.into_iter().enumerate() {
        let rows = simulate_markets(&d, 400_000, -5.0, 5.0, SeedStream::new(3, k as u64), Exec::Parallel).unwrap();
        let o = BinnedOracle::new(rows, bw).unwrap();
        let r = identify_binned(&o, &LimitConfig::for_bandwidth(bw), 20, SeedStream::new(4, k as u64)).unwrap();
        assert_eq!(r.concept_class, want);
        assert_eq!(r.rho_hat.status, Status::NotIdentified);
        assert!(r.rho_hat.value.is_none());
        assert!(r.tol_t >= 0.02);
        for (i, b) in [1.5, 0.7].into_iter().enumerate() {
            let e = r.beta_hat[i];
            assert_eq!(e.status, Status::PartialOnly);
            assert!((e.value.unwrap() - b).abs() < 0.1, "beta {i}: {:?}", e.value);
        }
    }
}
