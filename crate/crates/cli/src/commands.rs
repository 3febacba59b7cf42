use crate::config::Config;
use crate::output::{num, read_dataset, OutputFile};
use crate::Failure;
use discern_lab::dop::{build_averaged_dop, hull_distance, ne_distributions, DistributionOfPlay, SelectionSpec};
use discern_lab::game::{collusive_outcome, maxmin_outcome, pure_ne_set, rationalizable_set, IndexPair, Outcome};
use discern_lab::identify::{self, BinnedOracle, ExactOracle, IdentifiedParams};
use discern_lab::numerics::{bvn_pdf, quad2d, Rect};
use discern_lab::probabilities::{
    example_theta, match_eta_with, outcome_prob, outcome_prob_mc, policy_lumpsum as lumpsum, policy_targeted_with, MarketDesign,
    PolicyConcept, ProbReport,
};

type Files = Result<Vec<OutputFile>, Failure>;

fn method_name(r: &ProbReport) -> String {
    format!("{:?}", r.method)
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn probabilities(cfg: &Config) -> Files {
    let dop = cfg.dop()?;
    let m = cfg.market()?;
    let r = if cfg.mc()? { outcome_prob_mc(&dop, m, cfg.n()?, cfg.seed())? } else { outcome_prob(&dop, m, cfg.tol()?)? };
    let rows = Outcome::ALL
        .iter()
        .map(|&o| {
            vec![
                o.y1.to_string(),
                o.y2.to_string(),
                num(r.p(o)),
                opt(r.se.map(|s| s[o.index()])),
                method_name(&r),
                r.n.map(|n| n.to_string()).unwrap_or_default(),
                r.redraws.to_string(),
            ]
        })
        .collect();
    Ok(vec![
        OutputFile::csv("probabilities.csv", &["y1", "y2", "p", "se", "method", "n", "redraws"], rows),
        region_map(cfg, &dop)?,
    ])
}

fn label(o: Outcome) -> String {
    format!("{}{}", o.y1, o.y2)
}

fn labels(set: &[Outcome]) -> String {
    set.iter().map(|&o| label(o)).collect::<Vec<_>>().join(" ")
}

/// Outcome sets and play over an index grid around the multiplicity box.
/// Exact ties between payoffs are reported as `tie`.
fn region_map(cfg: &Config, dop: &DistributionOfPlay) -> Result<OutputFile, Failure> {
    let n = cfg.numeric.grid;
    if n == 0 {
        return Err(Failure::config("invalid `numeric.grid`: need at least one point per side"));
    }
    let theta = dop.theta();
    let b = theta.multiplicity_box();
    let axis = |i: usize| -> Vec<f64> {
        let (lo, hi) = b[i];
        let w = if hi > lo { hi - lo } else { 1.0 };
        let (lo, hi) = (lo - w, hi + w);
        (0..n).map(|k| lo + (hi - lo) * (k as f64 + 0.5) / n as f64).collect()
    };
    let (a1, a2) = (axis(0), axis(1));
    let mut rows = Vec::with_capacity(n * n);
    for &v1 in &a1 {
        for &v2 in &a2 {
            let v = IndexPair::new(v1, v2);
            let tie = |r: discern_lab::Result<String>| r.unwrap_or_else(|_| "tie".into());
            let rat = rationalizable_set(theta, v).map(|s| labels(&s));
            let mut row = vec![
                num(v1),
                num(v2),
                theta.in_multiplicity_box(v).to_string(),
                tie(rat),
                tie(pure_ne_set(theta, v).map(|s| labels(&s))),
                tie(maxmin_outcome(theta, v).map(label)),
                tie(collusive_outcome(theta, v).map(label)),
            ];
            match dop.evaluate(v) {
                Ok(p) => row.extend(p.p.iter().map(|&x| num(x))),
                Err(_) => row.extend(std::iter::repeat_n(String::new(), 4)),
            }
            rows.push(row);
        }
    }
    Ok(OutputFile::csv(
        "regions.csv",
        &["v1", "v2", "in_box", "rationalizable", "pure_ne", "maxmin", "collusion", "h00", "h01", "h10", "h11"],
        rows,
    ))
}

pub fn equivalence(cfg: &Config) -> Files {
    let eta = cfg.policy.eta;
    let c = cfg.correlation()?;
    let tol = cfg.tol()?;
    let ep = match_eta_with(eta, c, tol).map_err(|e| match e {
        discern_lab::Error::Bracket { .. } if !(eta > 0.0) => Failure::config(format!("invalid `policy.eta`: must be positive, got {eta}")),
        e => e.into(),
    })?;
    let z = MarketDesign::origin();
    let saa = outcome_prob(&DistributionOfPlay::saa(example_theta(eta, c)?), z, tol)?;
    let pne_dop = DistributionOfPlay::nash(example_theta(ep, c)?, SelectionSpec::MostProfitableEnters)?;
    let pne = outcome_prob(&pne_dop, z, tol)?;
    let mc = if cfg.mc()? { Some(outcome_prob_mc(&pne_dop, z, cfg.n()?, cfg.seed())?) } else { None };
    let rows = Outcome::ALL
        .iter()
        .map(|&o| {
            vec![
                num(eta),
                num(ep),
                o.y1.to_string(),
                o.y2.to_string(),
                num(saa.p(o)),
                num(pne.p(o)),
                num((saa.p(o) - pne.p(o)).abs()),
                opt(mc.as_ref().map(|r| r.p(o))),
                opt(mc.as_ref().and_then(|r| r.se).map(|s| s[o.index()])),
            ]
        })
        .collect();
    Ok(vec![OutputFile::csv(
        "equivalence.csv",
        &["eta", "eta_prime", "y1", "y2", "p_saa", "p_pne", "abs_diff", "p_pne_mc", "se_pne_mc"],
        rows,
    )])
}

pub fn policy_targeted(cfg: &Config) -> Files {
    let concept = match cfg.dop.concept.as_str() {
        "saa" => PolicyConcept::Saa,
        "pne" | "nash" => PolicyConcept::Pne,
        other => return Err(Failure::config(format!("invalid `dop.concept`: policy-targeted takes saa or pne, got `{other}`"))),
    };
    let r = policy_targeted_with(cfg.policy.eta, cfg.policy.tau, cfg.correlation()?, concept, cfg.tol()?)
        .map_err(|e| Failure::config(format!("invalid `policy`: {e}")))?;
    let row = vec![
        cfg.dop.concept.clone(),
        num(cfg.policy.eta),
        num(r.tau),
        num(cfg.theta.rho),
        num(r.p_noservice_baseline),
        num(r.p_noservice_policy),
        num(r.delta),
        opt(r.e_plus),
        opt(r.e_minus),
    ];
    // Rectangles in shock space (e1, e2) that make up the change.
    let (eta, tau) = (cfg.policy.eta, r.tau);
    let mut regions = vec![
        vec!["multiplicity".to_string(), num(0.0), num(eta), num(0.0), num(eta)],
        vec!["e_plus".to_string(), num(eta), num(eta + tau), num(eta), num(f64::INFINITY)],
    ];
    if concept == PolicyConcept::Saa {
        regions.push(vec!["e_minus".to_string(), num(eta), num(eta + tau), num(0.0), num(eta)]);
    }
    Ok(vec![
        OutputFile::csv(
            "policy_targeted.csv",
            &["concept", "eta", "tau", "rho", "p_noservice_baseline", "p_noservice_policy", "delta", "e_plus", "e_minus"],
            vec![row],
        ),
        OutputFile::csv("policy_regions.csv", &["region", "e1_lo", "e1_hi", "e2_lo", "e2_hi"], regions),
    ])
}

pub fn policy_lumpsum(cfg: &Config) -> Files {
    let p = &cfg.policy;
    if p.steps == 0 {
        return Err(Failure::config("invalid `policy.steps`: need at least one point"));
    }
    if !(p.tau_hat_lo <= p.tau_hat_hi) {
        return Err(Failure::config(format!(
            "invalid `policy.tau_hat_lo`: need tau_hat_lo <= tau_hat_hi, got [{}, {}]",
            p.tau_hat_lo, p.tau_hat_hi
        )));
    }
    let mut rows = Vec::with_capacity(p.steps);
    for k in 0..p.steps {
        let t = if p.steps == 1 {
            p.tau_hat_lo
        } else {
            p.tau_hat_lo + (p.tau_hat_hi - p.tau_hat_lo) * k as f64 / (p.steps - 1) as f64
        };
        let r = lumpsum(p.base_alpha, p.eta, t).map_err(|e| Failure::config(format!("invalid `policy`: {e}")))?;
        rows.push(vec![
            num(p.base_alpha),
            num(p.eta),
            num(t),
            num(r.p_noservice_baseline),
            num(r.p_noservice_policy),
            num(r.delta),
            opt(r.dp_dtau),
        ]);
    }
    Ok(vec![OutputFile::csv(
        "policy_lumpsum.csv",
        &["base_alpha", "eta", "tau_hat", "p_noservice_baseline", "p_noservice", "delta", "dp_dtau"],
        rows,
    )])
}

pub fn simulate(cfg: &Config) -> Files {
    let dop = cfg.dop()?;
    let sim = identify::simulate(&dop, cfg.design()?, cfg.n()?, cfg.seed(), Default::default())?;
    let rows = sim
        .rows
        .iter()
        .map(|o| vec![num(o.z[0]), num(o.z[1]), o.y.y1.to_string(), o.y.y2.to_string()])
        .collect();
    Ok(vec![
        OutputFile::csv("simulated.csv", &["z1", "z2", "y1", "y2"], rows),
        OutputFile::Text { name: "simulated.log", body: format!("rows={}\nredraws={}\n", sim.rows.len(), sim.redraws) },
    ])
}

fn run_identification(cfg: &Config) -> Result<IdentifiedParams, Failure> {
    match &cfg.io.input {
        Some(path) => {
            let data = read_dataset(path)?;
            let oracle = BinnedOracle::new(data, cfg.bandwidth()?)?;
            Ok(identify::identify_binned(&oracle, &cfg.limits(true)?, cfg.numeric.bootstrap, cfg.seed())?)
        }
        None => Ok(identify::identify(&ExactOracle::new(cfg.dop()?), &cfg.limits(false)?)?),
    }
}

fn status(s: identify::Status) -> String {
    format!("{s:?}")
}

pub fn identify(cfg: &Config) -> Files {
    let r = run_identification(cfg)?;
    let mut rows = Vec::new();
    let mut push = |q: String, v: String, s: String| rows.push(vec![q, v, s]);
    for i in 0..2 {
        push(format!("beta_{}", i + 1), opt(r.beta_hat[i].value), status(r.beta_hat[i].status));
    }
    for i in 0..2 {
        push(format!("location_{}", i + 1), opt(r.location_hat[i].value), status(r.location_hat[i].status));
    }
    for i in 0..2 {
        push(format!("t_{}", i + 1), num(r.t[i]), String::new());
    }
    push("tol_t".into(), num(r.tol_t), String::new());
    for a in &r.alpha_hats {
        push(a.combo.to_string(), opt(a.estimate.value), status(a.estimate.status));
    }
    push("rho".into(), opt(r.rho_hat.value), status(r.rho_hat.status));
    push("concept_class".into(), r.concept_class.to_string(), String::new());
    let mut files = vec![OutputFile::csv("identified.csv", &["quantity", "value", "status"], rows)];
    let cdf_rows = (0..2)
        .flat_map(|i| r.f_hat[i].t.iter().zip(&r.f_hat[i].f).map(move |(t, f)| vec![(i + 1).to_string(), num(*t), num(*f)]))
        .collect();
    files.push(OutputFile::csv("marginal_cdf.csv", &["player", "e", "cdf"], cdf_rows));
    if !r.psi_profile.is_empty() {
        let lead = (r.psi_lead + 1).to_string();
        let psi_rows = r.psi_profile.iter().map(|q| vec![lead.clone(), num(q.tau), num(q.near), num(q.far)]).collect();
        files.push(OutputFile::csv("psi_profile.csv", &["lead", "tau", "psi_near", "psi_far"], psi_rows));
    }
    Ok(files)
}

pub fn discern(cfg: &Config) -> Files {
    let (t, tol, class) = match &cfg.io.input {
        Some(_) => {
            let r = run_identification(cfg)?;
            (r.t, r.tol_t, r.concept_class)
        }
        None => {
            let lim = cfg.limits(false)?;
            let (t1, t2, c) = identify::discern_statistic(&ExactOracle::new(cfg.dop()?), &lim)?;
            ([t1, t2], lim.tol_t, c)
        }
    };
    Ok(vec![OutputFile::csv(
        "discern.csv",
        &["t_1", "t_2", "tol_t", "concept_class"],
        vec![vec![num(t[0]), num(t[1]), num(tol), class.to_string()]],
    )])
}

/// Mixed equilibrium on the box against its box average: equal integrals,
/// but the average is not an equilibrium mixture at most box points.
pub fn nash_demo(cfg: &Config) -> Files {
    let theta = cfg.theta()?;
    let tol = cfg.tol()?;
    let n = cfg.numeric.grid;
    if n == 0 {
        return Err(Failure::config("invalid `numeric.grid`: need at least one point per side"));
    }
    let h = DistributionOfPlay::nash(theta, SelectionSpec::mixed_only())?;
    let h2 = build_averaged_dop(&h, tol)?;
    let b = theta.multiplicity_box();
    let r = Rect::new(b[0].0, b[0].1, b[1].0, b[1].1)?;
    if !r.is_bounded() || b[0].0 == b[0].1 || b[1].0 == b[1].1 {
        return Err(Failure::config("invalid `theta.alpha`: the multiplicity box is empty"));
    }
    let integral = |d: &DistributionOfPlay, y: usize| -> Result<f64, Failure> {
        let mut err = None;
        let v = quad2d(
            |v1, v2| match d.evaluate(IndexPair::new(v1, v2)) {
                Ok(p) => p.p[y] * bvn_pdf(v1, v2, theta.rho),
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            &r,
            tol,
        )?;
        match err {
            Some(e) => Err(e.into()),
            None => Ok(v),
        }
    };
    let mut summary = Vec::new();
    for o in Outcome::ALL {
        let (a, c) = (integral(&h, o.index())?, integral(&h2, o.index())?);
        let label = format!("{}{}", o.y1, o.y2);
        summary.push(vec!["integral_h".into(), label.clone(), num(a)]);
        summary.push(vec!["integral_averaged".into(), label.clone(), num(c)]);
        summary.push(vec!["abs_diff".into(), label, num((a - c).abs())]);
    }
    let hull_tol = 1e-8;
    let mut grid_rows = Vec::with_capacity(n * n);
    let (mut accepted, mut rejected) = (0usize, 0usize);
    for i in 0..n {
        for j in 0..n {
            let v = IndexPair::new(
                b[0].0 + (b[0].1 - b[0].0) * (i as f64 + 0.5) / n as f64,
                b[1].0 + (b[1].1 - b[1].0) * (j as f64 + 0.5) / n as f64,
            );
            let gens = ne_distributions(&theta, v)?;
            let dh = hull_distance(&gens, &h.evaluate(v)?);
            let da = hull_distance(&gens, &h2.evaluate(v)?);
            let acc = dh <= hull_tol;
            let rej = acc && da > hull_tol;
            accepted += usize::from(acc);
            rejected += usize::from(rej);
            grid_rows.push(vec![num(v.v[0]), num(v.v[1]), num(dh), num(da), acc.to_string(), rej.to_string()]);
        }
    }
    let rate = if accepted > 0 { rejected as f64 / accepted as f64 } else { 0.0 };
    summary.push(vec!["rejection_rate".into(), String::new(), num(rate)]);
    Ok(vec![
        OutputFile::csv(
            "nash_demo_grid.csv",
            &["v1", "v2", "hull_distance_h", "hull_distance_averaged", "h_accepted", "averaged_rejected"],
            grid_rows,
        ),
        OutputFile::csv("nash_demo_summary.csv", &["metric", "outcome", "value"], summary),
    ])
}
