//! Outcome probabilities given covariates, exact and by simulation, plus the
//! equivalence solver and the two subsidy counterfactuals of the symmetric
//! entry example.

use crate::dop::{DistributionOfPlay, SelectionSpec};
use crate::game::{IndexPair, Outcome, OutcomeDist, Theta};
use crate::numerics::{
    bvn_pdf, bvn_rect_prob, correlated_pair, find_root, quad2d_with, std_normal_interval, std_normal_sf, Correlation,
    QuadOptions, Rect, SeedStream,
};
use crate::par::{self, Exec};
use crate::partition::{cell_prob, partition};
use crate::{Error, Result};
use std::cell::RefCell;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketDesign {
    pub z: [f64; 2],
}

impl MarketDesign {
    pub fn new(z1: f64, z2: f64) -> Result<Self> {
        if !(z1.is_finite() && z2.is_finite()) {
            return Err(Error::InvalidParam { field: "z", reason: format!("covariates must be finite, got ({z1}, {z2})") });
        }
        Ok(MarketDesign { z: [z1, z2] })
    }

    pub fn origin() -> Self {
        MarketDesign { z: [0.0, 0.0] }
    }

    /// Mean of the index pair, (β1 z1, β2 z2).
    pub fn index_mean(&self, theta: &Theta) -> [f64; 2] {
        [theta.beta[0] * self.z[0], theta.beta[1] * self.z[1]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    RectangleExact,
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbReport {
    pub dist: OutcomeDist,
    pub method: Method,
    pub se: Option<[f64; 4]>,
    pub n: Option<usize>,
    pub seed: Option<SeedStream>,
    /// Draws discarded because they landed exactly on an indifference.
    pub redraws: usize,
}

impl ProbReport {
    pub fn p(&self, o: Outcome) -> f64 {
        self.dist.get(o)
    }
}

/// P(y | z) with total absolute error at most `tol`.
pub fn outcome_prob(dop: &DistributionOfPlay, m: MarketDesign, tol: f64) -> Result<ProbReport> {
    let cells = partition(&dop.boundaries()).len().max(1);
    let per_cell = tol / (cells as f64 + 4.0);
    outcome_prob_with(dop, m, QuadOptions { abs_tol: per_cell, rel_tol: 0.0, max_regions: 20_000 })
}

/// As [`outcome_prob`], with the stopping rule applied to each cell integral
/// separately. A relative tolerance keeps far-tail cells accurate.
pub fn outcome_prob_with(dop: &DistributionOfPlay, m: MarketDesign, opts: QuadOptions) -> Result<ProbReport> {
    let theta = dop.theta();
    let mean = m.index_mean(theta);
    let c = theta.rho;
    let mut acc = [0.0; 4];
    let mut method = Method::RectangleExact;
    for cell in partition(&dop.boundaries()) {
        if dop.smooth_on_box() && theta.in_multiplicity_box(cell.rep) {
            method = Method::Quadrature;
            let b = theta.multiplicity_box();
            let r = Rect::new(b[0].0, b[0].1, b[1].0, b[1].1)?;
            let part = integrate_over(dop, &r, mean, c, opts)?;
            for y in 0..4 {
                acc[y] += part[y];
            }
            continue;
        }
        if !cell.is_rectangle() {
            method = Method::Quadrature;
        }
        let d = dop.evaluate(cell.rep)?;
        let p = cell_prob(&cell, mean, c, opts)?;
        for y in 0..4 {
            acc[y] += p * d.p[y];
        }
    }
    let acc = acc.map(|x| x.clamp(0.0, 1.0));
    Ok(ProbReport { dist: OutcomeDist { p: acc }, method, se: None, n: None, seed: None, redraws: 0 })
}

/// ∫_r evaluate(dop, v)·f_V(v) dv, one quadrature per outcome.
fn integrate_over(dop: &DistributionOfPlay, r: &Rect, mean: [f64; 2], c: Correlation, opts: QuadOptions) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    for (y, slot) in out.iter_mut().enumerate() {
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let f = |v1: f64, v2: f64| match dop.evaluate(IndexPair::new(v1, v2)) {
            Ok(d) => d.p[y] * bvn_pdf(v1 - mean[0], v2 - mean[1], c),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        };
        let v = quad2d_with(f, r, opts)?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        *slot = v;
    }
    Ok(out)
}

/// Conditional average of play over the multiplicity box under the index law
/// at z = 0.
pub fn multiplicity_box_average(dop: &DistributionOfPlay, tol: f64) -> Result<OutcomeDist> {
    let theta = dop.theta();
    let b = theta.multiplicity_box();
    let r = Rect::new(b[0].0, b[0].1, b[1].0, b[1].1)?;
    let mass = bvn_rect_prob(&r, theta.rho);
    if mass <= 0.0 {
        return Err(Error::Degenerate("multiplicity region has zero probability".into()));
    }
    let opts = QuadOptions { abs_tol: tol * mass / 8.0, rel_tol: 0.0, max_regions: 20_000 };
    let mut acc = [0.0; 4];
    if dop.smooth_on_box() {
        acc = integrate_over(dop, &r, [0.0, 0.0], theta.rho, opts)?;
    } else {
        for cell in partition(&dop.boundaries()) {
            if !theta.in_multiplicity_box(cell.rep) {
                continue;
            }
            let d = dop.evaluate(cell.rep)?;
            let p = cell_prob(&cell, [0.0, 0.0], theta.rho, opts)?;
            for y in 0..4 {
                acc[y] += p * d.p[y];
            }
        }
    }
    Ok(OutcomeDist { p: acc.map(|x| x / mass) })
}

const MC_BATCH: usize = 1 << 16;

pub fn outcome_prob_mc(dop: &DistributionOfPlay, m: MarketDesign, n: usize, s: SeedStream) -> Result<ProbReport> {
    outcome_prob_mc_with(dop, m, n, s, Exec::default())
}

/// Monte Carlo estimate over `n` draws in fixed batches; batch `b` always uses
/// the same generator and partial sums are added in batch order, so the result
/// does not depend on the executor.
pub fn outcome_prob_mc_with(dop: &DistributionOfPlay, m: MarketDesign, n: usize, s: SeedStream, exec: Exec) -> Result<ProbReport> {
    if n < 1000 {
        return Err(Error::InvalidParam { field: "n", reason: format!("need at least 1000 draws, got {n}") });
    }
    let theta = *dop.theta();
    let mean = m.index_mean(&theta);
    let batches = n.div_ceil(MC_BATCH);
    let parts = par::map_range(batches, exec, |b| {
        let count = MC_BATCH.min(n - b * MC_BATCH);
        let mut rng = s.batch_rng(b as u64);
        let mut sum = [0.0; 4];
        let mut redraws = 0usize;
        let mut done = 0;
        while done < count {
            let (e1, e2) = correlated_pair(&mut rng, theta.rho);
            match dop.evaluate(IndexPair::new(mean[0] - e1, mean[1] - e2)) {
                Ok(d) => {
                    for y in 0..4 {
                        sum[y] += d.p[y];
                    }
                    done += 1;
                }
                Err(Error::Degenerate(_) | Error::Tie(..)) => redraws += 1,
                Err(e) => return Err(e),
            }
        }
        Ok((sum, redraws))
    });
    let mut sum = [0.0; 4];
    let mut redraws = 0;
    for part in parts {
        let (s, r) = part?;
        for y in 0..4 {
            sum[y] += s[y];
        }
        redraws += r;
    }
    let nf = n as f64;
    let p = sum.map(|x| x / nf);
    let se = p.map(|q| (q * (1.0 - q) / nf).sqrt());
    Ok(ProbReport { dist: OutcomeDist { p }, method: Method::MonteCarlo, se: Some(se), n: Some(n), seed: Some(s), redraws })
}

/// The symmetric example: α_{i,0} = η, α_{i,1} = 0, unit slopes.
pub fn example_theta(eta: f64, rho: Correlation) -> Result<Theta> {
    Theta::symmetric(eta, 0.0, rho)
}

/// P(no entry) under SAA in the symmetric example at z = 0.
fn saa_no_entry(eta: f64, c: Correlation) -> f64 {
    let inf = f64::INFINITY;
    bvn_rect_prob(&Rect { lo1: eta, hi1: inf, lo2: eta, hi2: inf }, c)
        + bvn_rect_prob(&Rect { lo1: 0.0, hi1: eta, lo2: 0.0, hi2: eta }, c)
}

/// P(no entry) under pure NE in the symmetric example with competition effect η′.
fn pne_no_entry(eta: f64, c: Correlation) -> f64 {
    bvn_rect_prob(&Rect { lo1: eta, hi1: f64::INFINITY, lo2: eta, hi2: f64::INFINITY }, c)
}

/// η′ at which pure NE play (larger monopoly enters) reproduces the no-entry
/// probability of SAA play with parameter η; independent shocks.
pub fn match_eta(eta: f64, tol: f64) -> Result<f64> {
    match_eta_with(eta, Correlation::independent(), tol)
}

pub fn match_eta_with(eta: f64, c: Correlation, tol: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::Bracket { a: 0.0, b: eta, fa: f64::NAN, fb: f64::NAN });
    }
    let target = saa_no_entry(eta, c);
    // The map is decreasing with slope bounded by 2φ(0) < 1, so an x-tolerance
    // of tol/2 keeps the probability gap below tol as well.
    find_root(|x| pne_no_entry(x, c) - target, 0.0, eta, (tol * 0.5).max(1e-15))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyConcept {
    Saa,
    /// Pure NE where the firm with the larger monopoly profit enters.
    Pne,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyReport {
    pub tau: f64,
    pub p_noservice_baseline: f64,
    pub p_noservice_policy: f64,
    pub delta: f64,
    pub e_plus: Option<f64>,
    pub e_minus: Option<f64>,
    /// Centered difference estimate of dP/dτ at τ (lump-sum scheme only).
    pub dp_dtau: Option<f64>,
}

fn check_positive(field: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParam { field, reason: format!("must be positive, got {x}") })
    }
}

fn example_dop(theta: Theta, concept: PolicyConcept) -> Result<DistributionOfPlay> {
    match concept {
        PolicyConcept::Saa => Ok(DistributionOfPlay::saa(theta)),
        PolicyConcept::Pne => DistributionOfPlay::nash(theta, SelectionSpec::MostProfitableEnters),
    }
}

/// Subsidy τ to firm 1 for entering when firm 2 stays out, independent shocks.
pub fn policy_targeted(eta: f64, tau: f64, concept: PolicyConcept) -> Result<PolicyReport> {
    policy_targeted_with(eta, tau, Correlation::independent(), concept, 1e-12)
}

pub fn policy_targeted_with(eta: f64, tau: f64, c: Correlation, concept: PolicyConcept, tol: f64) -> Result<PolicyReport> {
    check_positive("eta", eta)?;
    check_positive("tau", tau)?;
    let base = example_theta(eta, c)?;
    let mut subsidized = base;
    subsidized.alpha[0][0] = eta + tau;
    let z = MarketDesign::origin();
    let p0 = outcome_prob(&example_dop(base, concept)?, z, tol)?.p(Outcome::new(0, 0));
    let p1 = outcome_prob(&example_dop(subsidized, concept)?, z, tol)?.p(Outcome::new(0, 0));
    let inf = f64::INFINITY;
    // Firm 1 now enters alone where its shock lies in (η, η+τ]. Above η for
    // firm 2 this removes no-service markets; inside (0, η) it enlarges the
    // SAA multiplicity region, where nobody enters.
    let e_plus = bvn_rect_prob(&Rect { lo1: eta, hi1: eta + tau, lo2: eta, hi2: inf }, c);
    let e_minus = match concept {
        PolicyConcept::Saa => bvn_rect_prob(&Rect { lo1: eta, hi1: eta + tau, lo2: 0.0, hi2: eta }, c),
        PolicyConcept::Pne => 0.0,
    };
    Ok(PolicyReport {
        tau,
        p_noservice_baseline: p0,
        p_noservice_policy: p1,
        delta: p1 - p0,
        e_plus: Some(e_plus),
        e_minus: Some(e_minus),
        dp_dtau: None,
    })
}

/// The η at which the SAA targeted effect changes sign, searched on [lo, hi].
pub fn saa_targeted_frontier(tau: f64, lo: f64, hi: f64) -> Result<f64> {
    check_positive("tau", tau)?;
    // delta = E− − E+, evaluated from its two rectangles to avoid cancellation.
    let c = Correlation::independent();
    let g = |eta: f64| {
        bvn_rect_prob(&Rect { lo1: eta, hi1: eta + tau, lo2: 0.0, hi2: eta }, c)
            - bvn_rect_prob(&Rect { lo1: eta, hi1: eta + tau, lo2: eta, hi2: f64::INFINITY }, c)
    };
    find_root(g, lo, hi, 1e-12)
}

/// P(no service) under SAA when both firms receive τ̂ for entering, with
/// α_{i,0} = α + η and α_{i,1} = α.
pub fn lumpsum_no_service(alpha: f64, eta: f64, tau_hat: f64) -> f64 {
    let s = std_normal_sf(alpha + eta + tau_hat);
    let mid = if eta > 0.0 { std_normal_interval(alpha + tau_hat, alpha + eta + tau_hat) } else { 0.0 };
    s * s + mid * mid
}

const LUMPSUM_FD_STEP: f64 = 1e-5;

pub fn policy_lumpsum(alpha: f64, eta: f64, tau_hat: f64) -> Result<PolicyReport> {
    if !(alpha.is_finite() && eta.is_finite() && tau_hat.is_finite()) {
        return Err(Error::InvalidParam { field: "alpha/eta/tau", reason: "must be finite".into() });
    }
    if eta < 0.0 {
        return Err(Error::InvalidParam { field: "eta", reason: format!("must be nonnegative, got {eta}") });
    }
    let p0 = lumpsum_no_service(alpha, eta, 0.0);
    let p1 = lumpsum_no_service(alpha, eta, tau_hat);
    let h = LUMPSUM_FD_STEP;
    let d = (lumpsum_no_service(alpha, eta, tau_hat + h) - lumpsum_no_service(alpha, eta, tau_hat - h)) / (2.0 * h);
    Ok(PolicyReport {
        tau: tau_hat,
        p_noservice_baseline: p0,
        p_noservice_policy: p1,
        delta: p1 - p0,
        e_plus: None,
        e_minus: None,
        dp_dtau: Some(d),
    })
}
