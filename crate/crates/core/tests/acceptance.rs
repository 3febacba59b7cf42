//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Reference constants were computed independently at 30 digits.

use discern_lab::dop::{build_averaged_dop, nash_hull_membership, DistributionOfPlay, SelectionSpec};
use discern_lab::game::{collusive_outcome, pure_ne_set, rationalizable_set, IndexPair, Outcome, Theta};
use discern_lab::identify::{identify, AlphaCombo, ConceptClass, ExactOracle, LimitConfig, Status};
use discern_lab::numerics::{
    bvn_pdf, bvn_rect_prob, quad2d, sample_correlated_normals, std_normal_cdf, std_normal_quantile, Correlation, Rect,
    SeedStream,
};
use discern_lab::probabilities::{
    example_theta, match_eta, outcome_prob, outcome_prob_mc, policy_lumpsum, policy_targeted, saa_targeted_frontier,
    MarketDesign, PolicyConcept,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict { ok, detail: detail.into() }
}

fn run(n: usize, name: &str, budget: Duration, f: impl FnOnce() -> Verdict) -> bool {
    let t0 = Instant::now();
    let r = f();
    let dt = t0.elapsed();
    let in_time = dt <= budget;
    let ok = r.ok && in_time;
    let time_note = if in_time { String::new() } else { format!(" (over budget {budget:?})") };
    println!(
        "criterion {n} [{}] {name}: {} [{:.2?}{time_note}]",
        if ok { "PASS" } else { "FAIL" },
        r.detail,
        dt
    );
    ok
}

fn equivalence() -> Verdict {
    // (η, P_SAA(no entry), η′)
    let refs = [
        (0.5, 0.131_853_286_880_192_83, 0.350_141_965_215_174_4),
        (1.0, 0.141_687_725_268_653_18, 0.314_911_828_898_211_5),
        (2.0, 0.228_285_005_059_139_92, 0.055_696_482_254_661_04),
    ];
    let c = Correlation::independent();
    let z = MarketDesign::origin();
    let mut worst_exact: f64 = 0.0;
    let mut worst_mc_z: f64 = 0.0;
    let mut worst_ref: f64 = 0.0;
    for (k, &(eta, p00, eta_ref)) in refs.iter().enumerate() {
        let ep = match_eta(eta, 1e-12).unwrap();
        if !(ep > 0.0 && ep < eta) {
            return verdict(false, format!("eta'={ep} outside (0, {eta})"));
        }
        worst_ref = worst_ref.max((ep - eta_ref).abs());
        let saa = DistributionOfPlay::saa(example_theta(eta, c).unwrap());
        let pne = DistributionOfPlay::nash(example_theta(ep, c).unwrap(), SelectionSpec::MostProfitableEnters).unwrap();
        let a = outcome_prob(&saa, z, 1e-11).unwrap();
        let b = outcome_prob(&pne, z, 1e-11).unwrap();
        worst_ref = worst_ref.max((a.p(Outcome::new(0, 0)) - p00).abs());
        for y in 0..4 {
            worst_exact = worst_exact.max((a.dist.p[y] - b.dist.p[y]).abs());
        }
        let mc = outcome_prob_mc(&pne, z, 10_000_000, SeedStream::new(2024, k as u64)).unwrap();
        let se = mc.se.unwrap();
        for y in 0..4 {
            worst_mc_z = worst_mc_z.max((mc.dist.p[y] - a.dist.p[y]).abs() / se[y]);
        }
    }
    verdict(
        worst_exact <= 1e-8 && worst_mc_z <= 4.0 && worst_ref <= 1e-9,
        format!("max exact gap {worst_exact:.2e} (<=1e-8), max MC gap {worst_mc_z:.2} se (<=4), reference gap {worst_ref:.1e}"),
    )
}

fn policy() -> Verdict {
    let etas: Vec<f64> = (0..10).map(|k| 0.1 + 0.25 * k as f64).collect();
    let taus: Vec<f64> = (0..10).map(|k| 0.02 + 0.1 * k as f64).collect();
    let mut pne_max = f64::NEG_INFINITY;
    for &eta in &etas {
        for &tau in &taus {
            pne_max = pne_max.max(policy_targeted(eta, tau, PolicyConcept::Pne).unwrap().delta);
        }
    }
    let eta80 = 0.841_621_233_572_914_2;
    let saa80 = policy_targeted(eta80, 0.05, PolicyConcept::Saa).unwrap().delta;
    let frontier = saa_targeted_frontier(0.05, 0.2, 2.0).unwrap();
    let phi_frontier = std_normal_cdf(frontier);
    // Sufficiency: every η with Φ(η) > 3/4 on a fine grid gives delta > 0 at small τ.
    let mut sufficiency = true;
    for k in 0..200 {
        let eta = 0.68 + 0.01 * k as f64;
        if std_normal_cdf(eta) > 0.75 {
            for tau in [0.01, 0.05] {
                sufficiency &= policy_targeted(eta, tau, PolicyConcept::Saa).unwrap().delta > 0.0;
            }
        }
    }
    verdict(
        pne_max < 0.0 && saa80 > 0.0 && (0.70..=0.80).contains(&phi_frontier) && sufficiency,
        format!(
            "PNE max delta {pne_max:.3e} (<0), SAA delta at Phi=0.8 {saa80:.3e} (>0), frontier Phi(eta)={phi_frontier:.6} in [0.70,0.80], sufficiency {sufficiency}"
        ),
    )
}

fn lumpsum() -> Verdict {
    let p0 = policy_lumpsum(0.0, 1.0, 0.0).unwrap().p_noservice_baseline;
    let gap = (p0 - 0.141_687_725_268_653_18).abs();
    let d = policy_lumpsum(-9.0, 12.0, 0.0).unwrap().dp_dtau.unwrap();
    let mut worst_zero_eta = f64::NEG_INFINITY;
    for alpha in [-2.0, 0.0, 1.5] {
        for k in 0..=40 {
            let t = -4.0 + 0.2 * k as f64;
            worst_zero_eta = worst_zero_eta.max(policy_lumpsum(alpha, 0.0, t).unwrap().dp_dtau.unwrap());
        }
    }
    verdict(
        gap <= 1e-9 && d > 0.0 && (d - 0.008_839_766_650_084_98).abs() < 1e-7 && worst_zero_eta < 0.0,
        format!("P(0) gap {gap:.1e} (<=1e-9), P'(0) at (-9,12) = {d:.6e} (>0), max P' with eta=0 {worst_zero_eta:.3e} (<0)"),
    )
}

fn identification() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let cfg = LimitConfig::default();
    let (mut worst_beta, mut worst_alpha, mut worst_rho, mut worst_f): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let mut misclassified = Vec::new();
    let mut honesty = true;
    let mut errors = Vec::new();
    for k in 0..30 {
        let beta = [rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)];
        let delta = loop {
            let d: [f64; 2] = [rng.gen_range(-2.0..-0.2), rng.gen_range(-2.0..-0.2)];
            if (d[0] - d[1]).abs() > 0.05 {
                break d;
            }
        };
        let a0 = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
        let rho = rng.gen_range(-0.6..0.6);
        let w: [f64; 4] = {
            let raw = [rng.gen::<f64>(), rng.gen(), rng.gen(), rng.gen()];
            let s: f64 = raw.iter().sum();
            raw.map(|x| x / s)
        };
        let alpha = [[a0[0], a0[0] + delta[0]], [a0[1], a0[1] + delta[1]]];
        let theta = Theta::new(alpha, beta, Correlation::new(rho).unwrap()).unwrap();
        let dops = [
            (DistributionOfPlay::saa(theta), ConceptClass::Rationalizable),
            (DistributionOfPlay::maxmin(theta), ConceptClass::Maxmin),
            (DistributionOfPlay::collusion(theta), ConceptClass::Collusion),
            (DistributionOfPlay::rationalizable(theta, SelectionSpec::OutcomeWeights(w)).unwrap(), ConceptClass::Rationalizable),
            (DistributionOfPlay::nash(theta, SelectionSpec::EqualWeightNe).unwrap(), ConceptClass::Rationalizable),
        ];
        let separable = (delta[0] - delta[1]).abs() > 0.2 && (delta[0] + delta[1]).abs() > 0.2;
        for (dop, want) in dops {
            let r = match identify(&ExactOracle::new(dop.clone()), &cfg) {
                Ok(r) => r,
                Err(e) => {
                    errors.push(format!("theta#{k} {:?}: {e}", dop.concept()));
                    continue;
                }
            };
            for i in 0..2 {
                worst_beta = worst_beta.max((r.beta_hat[i].value.unwrap() - beta[i]).abs());
                worst_f = worst_f.max(r.f_hat[i].sup_distance(std_normal_cdf, -3.0, 3.0));
            }
            worst_rho = worst_rho.max((r.rho_hat.value.unwrap() - rho).abs());
            if separable && r.concept_class != want {
                misclassified.push(format!("theta#{k} {:?} -> {}", dop.concept(), r.concept_class));
            }
            // Compare every point-identified combination under the true concept.
            let truth = |c: AlphaCombo| -> Option<f64> {
                match (want, c) {
                    (ConceptClass::Rationalizable, AlphaCombo::Alpha { player, opp }) => Some(alpha[player][opp as usize]),
                    (ConceptClass::Rationalizable | ConceptClass::Maxmin, AlphaCombo::MinAlpha { player }) => {
                        Some(alpha[player][0].min(alpha[player][1]))
                    }
                    (ConceptClass::Collusion, AlphaCombo::Alpha { player, opp: 0 }) => Some(alpha[player][0]),
                    (ConceptClass::Rationalizable | ConceptClass::Collusion, AlphaCombo::DuopolySum) => {
                        Some(alpha[0][1] + alpha[1][1])
                    }
                    _ => None,
                }
            };
            if r.concept_class == want {
                for a in &r.alpha_hats {
                    match (a.estimate.status, truth(a.combo)) {
                        (Status::Point, Some(v)) => worst_alpha = worst_alpha.max((a.estimate.value.unwrap() - v).abs()),
                        (Status::Point, None) => honesty = false,
                        _ => {}
                    }
                }
            }
        }
    }
    let ok = errors.is_empty()
        && misclassified.is_empty()
        && honesty
        && worst_beta <= 5e-3
        && worst_alpha <= 5e-3
        && worst_rho <= 0.05
        && worst_f <= 1e-3;
    let mut detail = format!(
        "150 pipelines: beta err {worst_beta:.1e}, alpha err {worst_alpha:.1e} (<=5e-3), rho err {worst_rho:.3} (<=0.05), F sup err {worst_f:.1e} (<=1e-3), misclassified {}, no fabricated point values {honesty}",
        misclassified.len()
    );
    if !errors.is_empty() {
        detail.push_str(&format!(", errors: {errors:?}"));
    }
    if !misclassified.is_empty() {
        detail.push_str(&format!(", {misclassified:?}"));
    }
    verdict(ok, detail)
}

fn nash_demo() -> Verdict {
    let theta = Theta::symmetric(0.0, -1.0, Correlation::independent()).unwrap();
    let h = DistributionOfPlay::nash(theta, SelectionSpec::mixed_only()).unwrap();
    let h2 = build_averaged_dop(&h, 1e-10).unwrap();
    let b = theta.multiplicity_box();
    let r = Rect::new(b[0].0, b[0].1, b[1].0, b[1].1).unwrap();
    let mut worst: f64 = 0.0;
    for y in 0..4 {
        let f = |d: &DistributionOfPlay| {
            quad2d(|v1, v2| d.evaluate(IndexPair::new(v1, v2)).unwrap().p[y] * bvn_pdf(v1, v2, theta.rho), &r, 1e-12).unwrap()
        };
        worst = worst.max((f(&h) - f(&h2)).abs());
    }
    let (mut accepted, mut rejected) = (0, 0);
    let n = 20;
    for i in 0..n {
        for j in 0..n {
            let v = IndexPair::new(
                b[0].0 + (b[0].1 - b[0].0) * (i as f64 + 0.5) / n as f64,
                b[1].0 + (b[1].1 - b[1].0) * (j as f64 + 0.5) / n as f64,
            );
            if nash_hull_membership(&theta, v, &h.evaluate(v).unwrap(), 1e-8).unwrap() {
                accepted += 1;
                if !nash_hull_membership(&theta, v, &h2.evaluate(v).unwrap(), 1e-8).unwrap() {
                    rejected += 1;
                }
            }
        }
    }
    let frac = rejected as f64 / accepted.max(1) as f64;
    verdict(
        worst <= 1e-6 && accepted == n * n && frac >= 0.9,
        format!("max integral gap {worst:.1e} (<=1e-6), h accepted at {accepted}/400, averaged rejected at {:.1}% (>=90%)", 100.0 * frac),
    )
}

fn kernels() -> Verdict {
    let mut orth: f64 = 0.0;
    for k in -9..=9 {
        let rho = k as f64 / 10.0;
        let r = Rect::new(0.0, f64::INFINITY, 0.0, f64::INFINITY).unwrap();
        orth = orth.max((bvn_rect_prob(&r, Correlation::new(rho).unwrap()) - (0.25 + rho.asin() / (2.0 * PI))).abs());
    }
    let mut inv: f64 = 0.0;
    for k in 0..=2000 {
        // p on a log-spaced grid in each tail, 1e-6 .. 1/2, mirrored.
        let p = 10f64.powf(-6.0 + 6.0 * k as f64 / 2000.0).min(0.5);
        for q in [p, 1.0 - p] {
            inv = inv.max((std_normal_cdf(std_normal_quantile(q).unwrap()) - q).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_z: f64 = 0.0;
    let n = 1_000_000;
    for case in 0..20 {
        let rho = rng.gen_range(-0.9..0.9);
        let (a, b): (f64, f64) = (rng.gen_range(-2.0..1.0), rng.gen_range(-2.0..1.0));
        let r = Rect::new(a, a + rng.gen_range(0.2..2.5), b, b + rng.gen_range(0.2..2.5)).unwrap();
        let c = Correlation::new(rho).unwrap();
        let p = bvn_rect_prob(&r, c);
        let xs = sample_correlated_normals(c, n, SeedStream::new(99, case));
        let hits = xs.iter().filter(|(x, y)| *x > r.lo1 && *x <= r.hi1 && *y > r.lo2 && *y <= r.hi2).count();
        let phat = hits as f64 / n as f64;
        worst_z = worst_z.max((phat - p).abs() / (p * (1.0 - p) / n as f64).sqrt());
    }
    verdict(
        orth <= 1e-9 && inv <= 1e-9 && worst_z <= 4.0,
        format!("orthant err {orth:.1e} (<=1e-9), cdf(quantile(p)) err {inv:.1e} (<=1e-9), MC rectangles max {worst_z:.2} se (<=4)"),
    )
}

// Independent oracles, written from the definitions.
fn payoff(alpha: &[[f64; 2]; 2], v: [f64; 2], i: usize, own: u8, opp: u8) -> f64 {
    if own == 0 {
        0.0
    } else {
        alpha[i][opp as usize] + v[i]
    }
}

fn brute_ne(alpha: &[[f64; 2]; 2], v: [f64; 2]) -> Vec<Outcome> {
    Outcome::ALL
        .into_iter()
        .filter(|o| {
            let a = [o.y1, o.y2];
            (0..2).all(|i| payoff(alpha, v, i, a[i], a[1 - i]) >= payoff(alpha, v, i, 1 - a[i], a[1 - i]))
        })
        .collect()
}

fn brute_rationalizable(alpha: &[[f64; 2]; 2], v: [f64; 2]) -> Vec<Outcome> {
    let mut sets: [Vec<u8>; 2] = [vec![0, 1], vec![0, 1]];
    loop {
        let mut next = sets.clone();
        for i in 0..2 {
            next[i].retain(|&s| {
                !sets[i].iter().any(|&d| d != s && sets[1 - i].iter().all(|&o| payoff(alpha, v, i, d, o) > payoff(alpha, v, i, s, o)))
            });
        }
        if next == sets {
            break;
        }
        sets = next;
    }
    Outcome::ALL.into_iter().filter(|o| sets[0].contains(&o.y1) && sets[1].contains(&o.y2)).collect()
}

fn brute_collusive(alpha: &[[f64; 2]; 2], v: [f64; 2]) -> Outcome {
    let total = |o: &Outcome| payoff(alpha, v, 0, o.y1, o.y2) + payoff(alpha, v, 1, o.y2, o.y1);
    *Outcome::ALL.iter().max_by(|a, b| total(a).total_cmp(&total(b))).unwrap()
}

fn brute_force() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = 0;
    let mut checked = 0;
    while checked < 100_000 {
        let alpha = [[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)], [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]];
        let v = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let theta = Theta::new(alpha, [1.0, 1.0], Correlation::independent()).unwrap();
        let iv = IndexPair::new(v[0], v[1]);
        let (Ok(ne), Ok(rat), Ok(col)) = (pure_ne_set(&theta, iv), rationalizable_set(&theta, iv), collusive_outcome(&theta, iv)) else {
            continue;
        };
        checked += 1;
        if ne != brute_ne(&alpha, v) || rat != brute_rationalizable(&alpha, v) || col != brute_collusive(&alpha, v) {
            mismatches += 1;
        }
    }
    verdict(mismatches == 0, format!("{checked} random instances, {mismatches} mismatches"))
}

fn main() {
    println!("acceptance suite");
    let results = [
        run(1, "observational equivalence", Duration::from_secs(10), equivalence),
        run(2, "targeted policy sign flip", Duration::from_secs(30), policy),
        run(3, "lump-sum subsidy", Duration::from_secs(1), lumpsum),
        run(4, "identification round trip", Duration::from_secs(300), identification),
        run(5, "averaged selection leaves the NE hull", Duration::from_secs(30), nash_demo),
        run(6, "numeric kernels", Duration::from_secs(30), kernels),
        run(7, "brute-force equivalence", Duration::from_secs(60), brute_force),
    ];
    let passed = results.iter().filter(|&&b| b).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
