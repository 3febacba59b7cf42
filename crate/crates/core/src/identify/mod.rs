//! Recovery of model primitives from conditional outcome probabilities.
//!
//! Every limit in the argument (a covariate sent to ±∞) is replaced by a
//! large finite covariate, chosen adaptively so that the quantity being
//! limited has settled to within `tail_eps`. The stages are:
//!
//! 1. the sign of each slope, from the entry probability at a large covariate;
//! 2. slope and location of each shock marginal, from the first two moments of
//!    the entry probability with the opponent held out of the market;
//! 3. the marginal CDFs themselves;
//! 4. the entry-intercept levels with the opponent out and in, whose
//!    difference `t_i` separates rationalizable, maxmin and collusive play;
//! 5. the shock correlation, from the jump of the no-entry profile ψ(τ).

pub mod cdf;
pub mod oracle;

pub use cdf::{isotonic, CdfGrid};
pub use oracle::{simulate, simulate_markets, BinnedOracle, CovariateDesign, ExactOracle, FnOracle, Observation, ProbOracle, Simulation};

use crate::game::Outcome;
use crate::numerics::{std_normal_pdf, try_find_root, SeedStream};
use crate::par::{self, Exec};
use crate::{Error, Result};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Point,
    PartialOnly,
    NotIdentified,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Point => "Point",
            Status::PartialOnly => "PartialOnly",
            Status::NotIdentified => "NotIdentified",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Option<f64>,
    pub status: Status,
}

impl Estimate {
    pub fn point(v: f64) -> Self {
        Estimate { value: Some(v), status: Status::Point }
    }

    pub fn partial() -> Self {
        Estimate { value: None, status: Status::PartialOnly }
    }

    pub fn not_identified() -> Self {
        Estimate { value: None, status: Status::NotIdentified }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConceptClass {
    Rationalizable,
    Maxmin,
    Collusion,
    Ambiguous,
}

impl fmt::Display for ConceptClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Which intercept combination an estimate refers to. Players are 0-indexed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaCombo {
    /// α_{i,y}: player i's intercept when the opponent plays y.
    Alpha { player: usize, opp: u8 },
    /// min_y α_{i,y}.
    MinAlpha { player: usize },
    /// α_{1,1} + α_{2,1}.
    DuopolySum,
}

impl fmt::Display for AlphaCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaCombo::Alpha { player, opp } => write!(f, "alpha_{}_{}", player + 1, opp),
            AlphaCombo::MinAlpha { player } => write!(f, "min_alpha_{}", player + 1),
            AlphaCombo::DuopolySum => f.write_str("alpha_1_1+alpha_2_1"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaHat {
    pub combo: AlphaCombo,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoMethod {
    /// Crossing point of the ψ profiles at two depths.
    ProfileIntersection,
    /// Where the deeper ψ profile crosses 1/2.
    HalfCrossing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensitySource {
    /// Standard normal density.
    Analytic,
    /// Central difference of the recovered marginal CDF.
    FromCdf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitConfig {
    /// Starting magnitude for covariates standing in for ±∞.
    pub l: f64,
    /// Covariate step for the moment integrals.
    pub grid_step: f64,
    /// Step of the recovered CDF grid, which spans [−l, l].
    pub cdf_step: f64,
    /// Step of the centered differences in ψ.
    pub fd_step: f64,
    pub tau_grid: Vec<f64>,
    /// Depths (−u_1) at which ψ is evaluated; the second is used for the
    /// half crossing.
    pub psi_depths: (f64, f64),
    pub rho_method: RhoMethod,
    pub density: DensitySource,
    /// A limit counts as reached once the remaining probability is below this.
    pub tail_eps: f64,
    /// Largest decrease tolerated in an entry probability that should rise.
    pub monotone_tol: f64,
    /// Classification tolerance on the t statistics.
    pub tol_t: f64,
    pub exec: Exec,
}

impl Default for LimitConfig {
    fn default() -> Self {
        LimitConfig {
            l: 8.0,
            grid_step: 0.01,
            cdf_step: 0.01,
            fd_step: 1e-3,
            tau_grid: (-95..=95).map(|k| k as f64 / 100.0).collect(),
            psi_depths: (4.0, 5.5),
            rho_method: RhoMethod::ProfileIntersection,
            density: DensitySource::Analytic,
            tail_eps: 1e-12,
            monotone_tol: 1e-8,
            tol_t: 0.02,
            exec: Exec::default(),
        }
    }
}

impl LimitConfig {
    /// Settings for kernel estimates: coarser grids tied to the bandwidth and
    /// a monotonicity check loose enough for sampling noise.
    pub fn for_bandwidth(bandwidth: f64) -> Self {
        let step = (bandwidth / 2.0).max(0.01);
        LimitConfig { grid_step: step, cdf_step: step, monotone_tol: 0.25, tail_eps: 1e-3, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &'static str, reason: String| Err(Error::InvalidParam { field, reason });
        if !(self.l >= 6.0 && self.l.is_finite()) {
            return bad("l", format!("must be at least 6, got {}", self.l));
        }
        if !(self.fd_step > 0.0 && self.fd_step <= 0.1) {
            return bad("fd_step", format!("must lie in (0, 0.1], got {}", self.fd_step));
        }
        if !(self.grid_step > 0.0 && self.cdf_step > 0.0) {
            return bad("grid_step", "steps must be positive".into());
        }
        if self.tau_grid.len() < 3 || self.tau_grid.iter().any(|t| !(t.abs() < 1.0)) || self.tau_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("tau_grid", "needs at least 3 increasing points inside (-1, 1)".into());
        }
        let (a, b) = self.psi_depths;
        if !(a > 0.0 && b > a) {
            return bad("psi_depths", format!("need 0 < first < second, got ({a}, {b})"));
        }
        if !(self.tail_eps > 0.0 && self.tail_eps < 0.5) {
            return bad("tail_eps", format!("must lie in (0, 0.5), got {}", self.tail_eps));
        }
        if !(self.tol_t > 0.0) {
            return bad("tol_t", "must be positive".into());
        }
        Ok(())
    }
}

/// A recovered shock marginal: F_i(β_i z_i + location_i) is player i's entry
/// probability with the opponent out.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    pub beta: f64,
    pub location: f64,
    pub cdf: CdfGrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiPoint {
    pub tau: f64,
    pub near: f64,
    pub far: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentifiedParams {
    pub beta_hat: [Estimate; 2],
    /// Location of each marginal: the entry intercept with the opponent out.
    pub location_hat: [Estimate; 2],
    pub f_hat: [CdfGrid; 2],
    /// F̂⁻¹ of the entry probability minus β̂ z, with the opponent out / in.
    pub level_out: [f64; 2],
    pub level_in: [f64; 2],
    pub t: [f64; 2],
    pub tol_t: f64,
    pub alpha_hats: Vec<AlphaHat>,
    pub rho_hat: Estimate,
    pub concept_class: ConceptClass,
    pub psi_profile: Vec<PsiPoint>,
    /// Player whose covariate is sent to −∞ in ψ.
    pub psi_lead: usize,
}

impl IdentifiedParams {
    pub fn alpha(&self, combo: AlphaCombo) -> Estimate {
        self.alpha_hats
            .iter()
            .find(|a| a.combo == combo)
            .map(|a| a.estimate)
            .unwrap_or_else(Estimate::not_identified)
    }
}

/// Oracle access with the slope signs and settled opponent covariates cached.
pub struct Probe<'a, O: ProbOracle + ?Sized> {
    oracle: &'a O,
    cfg: &'a LimitConfig,
    signs: [f64; 2],
    /// `settle[i][a]`: the covariate of player i's opponent at which the
    /// opponent plays `a`.
    settle: [[f64; 2]; 2],
}

fn clip(z: f64, (lo, hi): (f64, f64)) -> f64 {
    z.clamp(lo, hi)
}

/// Sign of β_i, from the probability of staying out at a large covariate.
pub fn recover_beta_sign<O: ProbOracle + ?Sized>(oracle: &O, cfg: &LimitConfig, i: usize) -> Result<f64> {
    let sup = oracle.support();
    let j = 1 - i;
    let mut z = [0.0; 2];
    z[i] = clip(cfg.l, sup[i]);
    z[j] = clip(cfg.l, sup[j]);
    let p_out = 1.0 - oracle.query(z)?.entry(i);
    if (0.25..=0.75).contains(&p_out) {
        return Err(Error::AmbiguousSign { player: i, prob: p_out });
    }
    Ok(if p_out < 0.5 { 1.0 } else { -1.0 })
}

const MAX_DOUBLINGS: usize = 8;

impl<'a, O: ProbOracle + ?Sized> Probe<'a, O> {
    pub fn new(oracle: &'a O, cfg: &'a LimitConfig) -> Result<Self> {
        cfg.validate()?;
        let signs = [recover_beta_sign(oracle, cfg, 0)?, recover_beta_sign(oracle, cfg, 1)?];
        let mut p = Probe { oracle, cfg, signs, settle: [[0.0; 2]; 2] };
        for i in 0..2 {
            for a in 0..2u8 {
                p.settle[i][a as usize] = p.settle_opponent(i, a)?;
            }
        }
        Ok(p)
    }

    pub fn signs(&self) -> [f64; 2] {
        self.signs
    }

    /// Covariate for player i's opponent at which the opponent's action is
    /// `a` with probability at least 1 − tail_eps, for a spread of z_i.
    fn settle_opponent(&self, i: usize, a: u8) -> Result<f64> {
        let j = 1 - i;
        let sup = self.oracle.support();
        let dir = if a == 1 { self.signs[j] } else { -self.signs[j] };
        let mut mag = self.cfg.l;
        let probes = [clip(-self.cfg.l, sup[i]), clip(0.0, sup[i]), clip(self.cfg.l, sup[i])];
        let mut last = f64::NAN;
        for _ in 0..=MAX_DOUBLINGS {
            let zj = clip(dir * mag, sup[j]);
            let mut worst: f64 = 0.0;
            for &zi in &probes {
                let mut z = [0.0; 2];
                z[i] = zi;
                z[j] = zj;
                let q = self.oracle.query(z)?.entry(j);
                worst = worst.max(if a == 1 { 1.0 - q } else { q });
            }
            if worst <= self.cfg.tail_eps || zj != dir * mag {
                if worst > 0.25 {
                    return Err(Error::Limit(format!(
                        "opponent of player {} not settled at z={zj}: residual {worst:e}",
                        i + 1
                    )));
                }
                return Ok(zj);
            }
            last = worst;
            mag *= 2.0;
        }
        if self.oracle.is_exact() {
            return Err(Error::Limit(format!("opponent of player {} not settled: residual {last:e}", i + 1)));
        }
        Ok(clip(dir * mag / 2.0, sup[j]))
    }

    /// Player i's entry probability at z_i with the opponent settled on `a`.
    pub fn mu(&self, i: usize, zi: f64, a: u8) -> Result<f64> {
        let mut z = [0.0; 2];
        z[i] = zi;
        z[1 - i] = self.settle[i][a as usize];
        Ok(self.oracle.query(z)?.entry(i))
    }

    /// Covariate range outside which μ_i (opponent out) is within tail_eps
    /// of its limits.
    fn tail_range(&self, i: usize) -> Result<(f64, f64)> {
        let s = self.signs[i];
        let sup = self.oracle.support()[i];
        let mut ends = [0.0; 2];
        for (k, target_high) in [(0, false), (1, true)] {
            // Direction along which μ_i moves toward its limit.
            let dir = if target_high { s } else { -s };
            let gap = |z: f64| -> Result<f64> {
                let m = self.mu(i, z, 0)?;
                Ok(if target_high { (1.0 - m) - self.cfg.tail_eps } else { m - self.cfg.tail_eps })
            };
            let mut inner = 0.0;
            let mut outer = dir;
            let mut found = false;
            for _ in 0..=MAX_DOUBLINGS + 4 {
                let zc = clip(outer, sup);
                if gap(zc)? <= 0.0 {
                    outer = zc;
                    found = true;
                    break;
                }
                if zc != outer {
                    outer = zc;
                    break;
                }
                inner = outer;
                outer *= 2.0;
            }
            ends[k] = if found && gap(inner)? > 0.0 {
                try_find_root(gap, inner, outer, 1e-3)?
            } else {
                outer
            };
        }
        Ok((ends[0].min(ends[1]), ends[0].max(ends[1])))
    }

    /// Slope and location of player i's marginal from the first two moments
    /// of dμ_i.
    pub fn moments(&self, i: usize) -> Result<(f64, f64)> {
        let (lo, hi) = self.tail_range(i)?;
        let n = ((hi - lo) / self.cfg.grid_step).ceil().max(2.0) as usize;
        let zs: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
        let raw = par::map(zs.clone(), self.cfg.exec, |z| self.mu(i, z, 0));
        let mut ps = Vec::with_capacity(raw.len());
        for r in raw {
            ps.push(r?);
        }
        let s = self.signs[i];
        let mut worst: f64 = 0.0;
        for w in ps.windows(2) {
            worst = worst.max(-s * (w[1] - w[0]));
        }
        if worst > self.cfg.monotone_tol {
            return Err(Error::NonMonotone { player: i, drop: worst });
        }
        if !self.oracle.is_exact() {
            let oriented: Vec<f64> = ps.iter().map(|p| s * p).collect();
            ps = isotonic(&oriented).into_iter().map(|p| s * p).collect();
        }
        let (mut mass, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for k in 0..n {
            let dp = ps[k + 1] - ps[k];
            let (a, b) = (zs[k], zs[k + 1]);
            mass += dp;
            m1 += 0.5 * (a + b) * dp;
            m2 += 0.5 * (a * a + b * b) * dp;
        }
        if mass.abs() < 0.5 {
            return Err(Error::Limit(format!("entry probability of player {} spans only {mass:.3}", i + 1)));
        }
        m1 /= mass;
        m2 /= mass;
        // Spreading each increment evenly over its cell gives (b − a)²/6 less
        // second moment than the endpoint average; remove that bias.
        let h = (hi - lo) / n as f64;
        let var = m2 - m1 * m1 - h * h / 6.0;
        if !(var > 0.0) {
            return Err(Error::Degenerate(format!("nonpositive variance for player {}", i + 1)));
        }
        let beta = s / var.sqrt();
        Ok((beta, -beta * m1))
    }

    /// F̂_i(t) = μ_i((t − location)/β) on [−l, l], isotonized.
    pub fn marginal_cdf(&self, i: usize, beta: f64, location: f64) -> Result<CdfGrid> {
        let sup = self.oracle.support()[i];
        let l = self.cfg.l;
        let n = (2.0 * l / self.cfg.cdf_step).round() as usize;
        let ts: Vec<f64> = (0..=n)
            .map(|k| -l + 2.0 * l * k as f64 / n as f64)
            .filter(|t| {
                let z = (t - location) / beta;
                z >= sup.0 && z <= sup.1
            })
            .collect();
        if ts.len() < 3 {
            return Err(Error::Limit(format!("covariate support too narrow for the CDF of player {}", i + 1)));
        }
        let raw = par::map(ts.clone(), self.cfg.exec, |t| self.mu(i, (t - location) / beta, 0));
        let mut f = Vec::with_capacity(raw.len());
        for r in raw {
            f.push(r?);
        }
        let status = if self.oracle.is_exact() { Status::Point } else { Status::PartialOnly };
        Ok(CdfGrid::from_raw(ts, &f, status))
    }

    pub fn marginal(&self, i: usize) -> Result<Marginal> {
        let (beta, location) = self.moments(i)?;
        let cdf = self.marginal_cdf(i, beta, location)?;
        Ok(Marginal { beta, location, cdf })
    }

    /// F̂⁻¹(μ_i(z*)) − β̂ z* at the z* where μ_i is 1/2, opponent playing `a`.
    pub fn level(&self, i: usize, a: u8, m: &Marginal) -> Result<f64> {
        let sup = self.oracle.support()[i];
        let f = |z: f64| self.mu(i, z, a).map(|p| p - 0.5);
        let (mut lo, mut hi) = (clip(-1.0, sup), clip(1.0, sup));
        let mut found = false;
        for _ in 0..=MAX_DOUBLINGS + 4 {
            let (flo, fhi) = (f(lo)?, f(hi)?);
            if flo.signum() != fhi.signum() || flo == 0.0 || fhi == 0.0 {
                found = true;
                break;
            }
            let (nlo, nhi) = (clip(lo * 2.0, sup), clip(hi * 2.0, sup));
            if nlo == lo && nhi == hi {
                break;
            }
            lo = nlo;
            hi = nhi;
        }
        if !found {
            return Err(Error::Limit(format!("entry probability of player {} never reaches 1/2", i + 1)));
        }
        let z = try_find_root(f, lo, hi, 1e-10)?;
        let p = self.mu(i, z, a)?;
        Ok(m.cdf.inverse(p)? - m.beta * z)
    }

    /// ψ at depth `depth` along u_other = τ·u_lead, with u = β̂ z + location.
    pub fn psi(&self, lead: usize, depth: f64, tau: f64, margs: &[Marginal; 2], density: DensitySource) -> Result<f64> {
        let other = 1 - lead;
        let u_lead = -depth;
        let u_other = tau * u_lead;
        let h = self.cfg.fd_step;
        let p00 = |ul: f64| -> Result<f64> {
            let mut z = [0.0; 2];
            z[lead] = (ul - margs[lead].location) / margs[lead].beta;
            z[other] = (u_other - margs[other].location) / margs[other].beta;
            Ok(self.oracle.query(z)?.get(Outcome::new(0, 0)))
        };
        let deriv = (p00(u_lead + h)? - p00(u_lead - h)?) / (2.0 * h);
        let f = match density {
            DensitySource::Analytic => std_normal_pdf(u_lead),
            DensitySource::FromCdf => margs[lead].cdf.density(u_lead),
        };
        if !(f > 0.0) {
            return Err(Error::Degenerate(format!("zero marginal density at {u_lead}")));
        }
        Ok(1.0 + deriv / f)
    }
}

/// Recovered (β_i, location_i).
pub fn recover_beta_delta<O: ProbOracle + ?Sized>(oracle: &O, cfg: &LimitConfig, i: usize) -> Result<(f64, f64)> {
    Probe::new(oracle, cfg)?.moments(i)
}

pub fn recover_marginal_cdf<O: ProbOracle + ?Sized>(oracle: &O, cfg: &LimitConfig, i: usize, beta: f64, location: f64) -> Result<CdfGrid> {
    Probe::new(oracle, cfg)?.marginal_cdf(i, beta, location)
}

/// Rules, in order: all |t| small → Maxmin; t's differ → Rationalizable;
/// t's agree and clearly nonzero → Collusion; otherwise Ambiguous.
pub fn classify(t: [f64; 2], tol: f64) -> ConceptClass {
    if t[0].abs().max(t[1].abs()) <= tol {
        ConceptClass::Maxmin
    } else if (t[0] - t[1]).abs() > tol {
        ConceptClass::Rationalizable
    } else if t[0].abs().min(t[1].abs()) > 2.0 * tol {
        ConceptClass::Collusion
    } else {
        ConceptClass::Ambiguous
    }
}

struct Levels {
    out: [f64; 2],
    inn: [f64; 2],
}

impl Levels {
    fn t(&self) -> [f64; 2] {
        [self.inn[0] - self.out[0], self.inn[1] - self.out[1]]
    }
}

fn levels<O: ProbOracle + ?Sized>(p: &Probe<O>, margs: &[Marginal; 2]) -> Result<Levels> {
    let mut lv = Levels { out: [0.0; 2], inn: [0.0; 2] };
    for i in 0..2 {
        lv.out[i] = p.level(i, 0, &margs[i])?;
        lv.inn[i] = p.level(i, 1, &margs[i])?;
    }
    Ok(lv)
}

fn alpha_hats(class: ConceptClass, lv: &Levels) -> Vec<AlphaHat> {
    let a = |player, opp, estimate| AlphaHat { combo: AlphaCombo::Alpha { player, opp }, estimate };
    let mn = |player, estimate| AlphaHat { combo: AlphaCombo::MinAlpha { player }, estimate };
    let sum = |estimate| AlphaHat { combo: AlphaCombo::DuopolySum, estimate };
    let mut out = Vec::new();
    match class {
        ConceptClass::Rationalizable => {
            for i in 0..2 {
                out.push(a(i, 0, Estimate::point(lv.out[i])));
                out.push(a(i, 1, Estimate::point(lv.inn[i])));
                out.push(mn(i, Estimate::point(lv.out[i].min(lv.inn[i]))));
            }
            out.push(sum(Estimate::point(lv.inn[0] + lv.inn[1])));
        }
        ConceptClass::Maxmin => {
            for i in 0..2 {
                out.push(a(i, 0, Estimate::not_identified()));
                out.push(a(i, 1, Estimate::not_identified()));
                out.push(mn(i, Estimate::point(0.5 * (lv.out[i] + lv.inn[i]))));
            }
            out.push(sum(Estimate::not_identified()));
        }
        ConceptClass::Collusion => {
            let t = lv.t();
            let tbar = 0.5 * (t[0] + t[1]);
            for i in 0..2 {
                out.push(a(i, 0, Estimate::point(lv.out[i])));
                out.push(a(i, 1, Estimate::partial()));
                out.push(mn(i, Estimate::partial()));
            }
            out.push(sum(Estimate::point(tbar + lv.out[0] + lv.out[1])));
        }
        ConceptClass::Ambiguous => {
            for i in 0..2 {
                out.push(a(i, 0, Estimate::not_identified()));
                out.push(a(i, 1, Estimate::not_identified()));
                out.push(mn(i, Estimate::not_identified()));
            }
            out.push(sum(Estimate::not_identified()));
        }
    }
    out
}

/// Intercept combinations under the classified concept, or under `hint`.
pub fn recover_alphas<O: ProbOracle + ?Sized>(oracle: &O, cfg: &LimitConfig, hint: Option<ConceptClass>) -> Result<Vec<AlphaHat>> {
    let p = Probe::new(oracle, cfg)?;
    let margs = [p.marginal(0)?, p.marginal(1)?];
    let lv = levels(&p, &margs)?;
    let class = hint.unwrap_or_else(|| classify(lv.t(), cfg.tol_t));
    Ok(alpha_hats(class, &lv))
}

pub fn discern_statistic<O: ProbOracle + ?Sized>(oracle: &O, cfg: &LimitConfig) -> Result<(f64, f64, ConceptClass)> {
    let p = Probe::new(oracle, cfg)?;
    let margs = [p.marginal(0)?, p.marginal(1)?];
    let t = levels(&p, &margs)?.t();
    Ok((t[0], t[1], classify(t, cfg.tol_t)))
}

fn half_crossing<F: FnMut(f64) -> Result<f64>>(taus: &[f64], vals: &[f64], mut psi: F) -> Result<Option<f64>> {
    for k in 0..vals.len() - 1 {
        if vals[k] >= 0.5 && vals[k + 1] < 0.5 {
            return try_find_root(|t| psi(t).map(|v| v - 0.5), taus[k], taus[k + 1], 1e-10).map(Some);
        }
    }
    Ok(None)
}

/// ρ̂ together with the ψ profiles it was read from.
pub fn recover_rho_profile<O: ProbOracle + ?Sized>(
    p: &Probe<O>,
    margs: &[Marginal; 2],
    lead: usize,
    density: DensitySource,
) -> Result<(f64, Vec<PsiPoint>)> {
    let cfg = p.cfg;
    let (near, far) = cfg.psi_depths;
    let taus = cfg.tau_grid.clone();
    let rows = par::map(taus.clone(), cfg.exec, |tau| -> Result<PsiPoint> {
        Ok(PsiPoint {
            tau,
            near: p.psi(lead, near, tau, margs, density)?,
            far: p.psi(lead, far, tau, margs, density)?,
        })
    });
    let mut profile = Vec::with_capacity(rows.len());
    for r in rows {
        profile.push(r?);
    }
    let far_vals: Vec<f64> = profile.iter().map(|q| q.far).collect();
    let lo = far_vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = far_vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo > 0.25 || hi < 0.75 {
        return Err(Error::NoJump { lo, hi });
    }
    let c05 = half_crossing(&taus, &far_vals, |t| p.psi(lead, far, t, margs, density))?
        .ok_or(Error::NoJump { lo, hi })?;
    if cfg.rho_method == RhoMethod::HalfCrossing {
        return Ok((c05, profile));
    }
    // ψ steepens with depth, so the profiles cross where the deeper one
    // overtakes from below.
    let gap = |t: f64| -> Result<f64> { Ok(p.psi(lead, near, t, margs, density)? - p.psi(lead, far, t, margs, density)?) };
    let mut best: Option<f64> = None;
    for w in profile.windows(2) {
        let (g0, g1) = (w[0].near - w[0].far, w[1].near - w[1].far);
        if g0 < 0.0 && g1 > 0.0 {
            let r = try_find_root(gap, w[0].tau, w[1].tau, 1e-10)?;
            if best.map_or(true, |b| (r - c05).abs() < (b - c05).abs()) {
                best = Some(r);
            }
        }
    }
    Ok((best.unwrap_or(c05), profile))
}

/// ρ̂ from an exact oracle; the player with the larger |t| leads.
pub fn recover_rho<O: ProbOracle + ?Sized>(oracle: &O, cfg: &LimitConfig, density: DensitySource) -> Result<f64> {
    let p = Probe::new(oracle, cfg)?;
    let margs = [p.marginal(0)?, p.marginal(1)?];
    let t = levels(&p, &margs)?.t();
    let lead = if t[1].abs() > t[0].abs() { 1 } else { 0 };
    recover_rho_profile(&p, &margs, lead, density).map(|r| r.0)
}

/// The full pipeline. The correlation is only attempted for exact oracles;
/// finite-difference tails of a kernel estimate carry no signal.
pub fn identify<O: ProbOracle + ?Sized>(oracle: &O, cfg: &LimitConfig) -> Result<IdentifiedParams> {
    let p = Probe::new(oracle, cfg)?;
    let margs = [p.marginal(0)?, p.marginal(1)?];
    let lv = levels(&p, &margs)?;
    let t = lv.t();
    let class = classify(t, cfg.tol_t);
    let lead = if t[1].abs() > t[0].abs() { 1 } else { 0 };
    let (rho_hat, psi_profile) = if oracle.is_exact() {
        let (r, prof) = recover_rho_profile(&p, &margs, lead, cfg.density)?;
        (Estimate::point(r), prof)
    } else {
        (Estimate::not_identified(), Vec::new())
    };
    let status = if oracle.is_exact() { Status::Point } else { Status::PartialOnly };
    let est = |v: f64| Estimate { value: Some(v), status };
    Ok(IdentifiedParams {
        beta_hat: [est(margs[0].beta), est(margs[1].beta)],
        location_hat: [est(margs[0].location), est(margs[1].location)],
        f_hat: [margs[0].cdf.clone(), margs[1].cdf.clone()],
        level_out: lv.out,
        level_in: lv.inn,
        t,
        tol_t: cfg.tol_t,
        alpha_hats: alpha_hats(class, &lv),
        rho_hat,
        concept_class: class,
        psi_profile,
        psi_lead: lead,
    })
}

/// Pipeline on a kernel oracle, with the classification tolerance widened to
/// three bootstrap standard errors of the t statistics.
pub fn identify_binned(oracle: &BinnedOracle, cfg: &LimitConfig, bootstrap: usize, seed: SeedStream) -> Result<IdentifiedParams> {
    let mut out = identify(oracle, cfg)?;
    if bootstrap >= 2 {
        let draws = par::map_range(bootstrap, cfg.exec, |b| -> Result<[f64; 2]> {
            let o = oracle.resampled(seed.substream(b as u64 + 1))?;
            let inner = LimitConfig { exec: Exec::Sequential, ..cfg.clone() };
            let p = Probe::new(&o, &inner)?;
            let margs = [p.marginal(0)?, p.marginal(1)?];
            Ok(levels(&p, &margs)?.t())
        });
        let ts: Vec<[f64; 2]> = draws.into_iter().collect::<Result<_>>()?;
        let n = ts.len() as f64;
        let mut se: f64 = 0.0;
        for i in 0..2 {
            let m = ts.iter().map(|t| t[i]).sum::<f64>() / n;
            let v = ts.iter().map(|t| (t[i] - m).powi(2)).sum::<f64>() / (n - 1.0);
            se = se.max(v.sqrt());
        }
        out.tol_t = cfg.tol_t.max(3.0 * se);
        out.concept_class = classify(out.t, out.tol_t);
        let lv = Levels { out: out.level_out, inn: out.level_in };
        out.alpha_hats = alpha_hats(out.concept_class, &lv);
    }
    Ok(out)
}
