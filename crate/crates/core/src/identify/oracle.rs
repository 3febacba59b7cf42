//! Sources of conditional outcome probabilities: exact evaluation of a
//! model, or a kernel estimate from observed markets.

use crate::dop::DistributionOfPlay;
use crate::game::{IndexPair, Outcome, OutcomeDist};
use crate::numerics::{correlated_pair, QuadOptions, SeedStream};
use crate::par::{self, Exec};
use crate::probabilities::{outcome_prob_with, MarketDesign};
use crate::{Error, Result};
use rand::Rng;
use std::collections::HashMap;

pub trait ProbOracle: Sync {
    fn query(&self, z: [f64; 2]) -> Result<OutcomeDist>;

    /// True when queries carry no sampling noise.
    fn is_exact(&self) -> bool;

    /// Covariate range per player over which queries are supported.
    fn support(&self) -> [(f64, f64); 2] {
        [(f64::NEG_INFINITY, f64::INFINITY); 2]
    }
}

/// Probabilities computed from a known model.
#[derive(Debug, Clone)]
pub struct ExactOracle {
    pub dop: DistributionOfPlay,
    pub opts: QuadOptions,
}

impl ExactOracle {
    pub fn new(dop: DistributionOfPlay) -> Self {
        ExactOracle { dop, opts: QuadOptions { abs_tol: 1e-17, rel_tol: 1e-12, max_regions: 50_000 } }
    }
}

impl ProbOracle for ExactOracle {
    fn query(&self, z: [f64; 2]) -> Result<OutcomeDist> {
        Ok(outcome_prob_with(&self.dop, MarketDesign::new(z[0], z[1])?, self.opts)?.dist)
    }

    fn is_exact(&self) -> bool {
        true
    }
}

/// Wraps a closure as an exact oracle.
pub struct FnOracle<F>(pub F);

impl<F: Fn([f64; 2]) -> Result<OutcomeDist> + Sync> ProbOracle for FnOracle<F> {
    fn query(&self, z: [f64; 2]) -> Result<OutcomeDist> {
        (self.0)(z)
    }

    fn is_exact(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub z: [f64; 2],
    pub y: Outcome,
}

/// Kernel cutoff in bandwidths.
const CUTOFF: f64 = 5.0;

/// Nadaraya–Watson estimate with a Gaussian product kernel truncated at five
/// bandwidths. Observations are bucketed on a grid of that width, so a query
/// only visits the 3×3 surrounding buckets.
#[derive(Debug, Clone)]
pub struct BinnedOracle {
    data: Vec<Observation>,
    bandwidth: f64,
    buckets: HashMap<(i64, i64), Vec<u32>>,
    support: [(f64, f64); 2],
}

impl BinnedOracle {
    pub fn new(data: Vec<Observation>, bandwidth: f64) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::InvalidParam { field: "dataset", reason: "no observations".into() });
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidParam { field: "bandwidth", reason: format!("must be positive, got {bandwidth}") });
        }
        if data.len() > u32::MAX as usize {
            return Err(Error::InvalidParam { field: "dataset", reason: "too many observations".into() });
        }
        let w = CUTOFF * bandwidth;
        let mut buckets: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
        let mut support = [(f64::INFINITY, f64::NEG_INFINITY); 2];
        for (k, o) in data.iter().enumerate() {
            if !(o.z[0].is_finite() && o.z[1].is_finite()) {
                return Err(Error::InvalidParam { field: "dataset", reason: format!("non-finite covariate in row {k}") });
            }
            buckets.entry(Self::key(o.z, w)).or_default().push(k as u32);
            for i in 0..2 {
                support[i].0 = support[i].0.min(o.z[i]);
                support[i].1 = support[i].1.max(o.z[i]);
            }
        }
        Ok(BinnedOracle { data, bandwidth, buckets, support })
    }

    fn key(z: [f64; 2], w: f64) -> (i64, i64) {
        ((z[0] / w).floor() as i64, (z[1] / w).floor() as i64)
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn data(&self) -> &[Observation] {
        &self.data
    }

    /// Same bandwidth on a resample of the rows.
    pub fn resampled(&self, s: SeedStream) -> Result<Self> {
        let mut rng = s.rng();
        let n = self.data.len();
        let rows = (0..n).map(|_| self.data[rng.gen_range(0..n)]).collect();
        Self::new(rows, self.bandwidth)
    }
}

impl ProbOracle for BinnedOracle {
    fn query(&self, z: [f64; 2]) -> Result<OutcomeDist> {
        let h = self.bandwidth;
        let (k1, k2) = Self::key(z, CUTOFF * h);
        let mut acc = [0.0; 4];
        let mut hits = 0usize;
        for d1 in -1..=1 {
            for d2 in -1..=1 {
                let Some(rows) = self.buckets.get(&(k1 + d1, k2 + d2)) else { continue };
                for &r in rows {
                    let o = &self.data[r as usize];
                    let u = [(o.z[0] - z[0]) / h, (o.z[1] - z[1]) / h];
                    if u[0].abs() > CUTOFF || u[1].abs() > CUTOFF {
                        continue;
                    }
                    acc[o.y.index()] += (-0.5 * (u[0] * u[0] + u[1] * u[1])).exp();
                    hits += 1;
                }
            }
        }
        let total: f64 = acc.iter().sum();
        if hits == 0 || total <= 0.0 {
            return Err(Error::EmptyNeighborhood { z1: z[0], z2: z[1] });
        }
        Ok(OutcomeDist { p: acc.map(|a| a / total) })
    }

    fn is_exact(&self) -> bool {
        false
    }

    fn support(&self) -> [(f64, f64); 2] {
        self.support
    }
}

/// How market covariates are chosen in a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovariateDesign {
    /// Every market at the same z.
    Fixed([f64; 2]),
    /// z uniform on [lo, hi]².
    Uniform { lo: f64, hi: f64 },
}

impl CovariateDesign {
    fn validate(&self) -> Result<()> {
        match *self {
            CovariateDesign::Fixed(z) if z.iter().all(|x| x.is_finite()) => Ok(()),
            CovariateDesign::Fixed(z) => Err(Error::InvalidParam { field: "z", reason: format!("must be finite, got {z:?}") }),
            CovariateDesign::Uniform { lo, hi } if lo < hi && lo.is_finite() && hi.is_finite() => Ok(()),
            CovariateDesign::Uniform { lo, hi } => {
                Err(Error::InvalidParam { field: "z_range", reason: format!("need finite lo < hi, got [{lo}, {hi}]") })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub rows: Vec<Observation>,
    /// Draws discarded because they landed exactly on an indifference.
    pub redraws: usize,
}

/// Draws `n` markets with covariates uniform on [lo, hi]².
pub fn simulate_markets(dop: &DistributionOfPlay, n: usize, lo: f64, hi: f64, s: SeedStream, exec: Exec) -> Result<Vec<Observation>> {
    simulate(dop, CovariateDesign::Uniform { lo, hi }, n, s, exec).map(|sim| sim.rows)
}

/// Draws `n` markets and outcomes from the model; mixed play is resolved with
/// an extra uniform draw. Batch `b` always uses the same generator, so the
/// rows do not depend on the executor.
pub fn simulate(dop: &DistributionOfPlay, design: CovariateDesign, n: usize, s: SeedStream, exec: Exec) -> Result<Simulation> {
    design.validate()?;
    if n == 0 {
        return Err(Error::InvalidParam { field: "n", reason: "need at least one market".into() });
    }
    const BATCH: usize = 1 << 14;
    let theta = *dop.theta();
    let batches = n.div_ceil(BATCH);
    let parts = par::map_range(batches, exec, |b| -> Result<(Vec<Observation>, usize)> {
        let count = BATCH.min(n - b * BATCH);
        let mut rng = s.batch_rng(b as u64);
        let mut out = Vec::with_capacity(count);
        let mut redraws = 0;
        while out.len() < count {
            let z = match design {
                CovariateDesign::Fixed(z) => z,
                CovariateDesign::Uniform { lo, hi } => [rng.gen_range(lo..hi), rng.gen_range(lo..hi)],
            };
            let (e1, e2) = correlated_pair(&mut rng, theta.rho);
            let v = IndexPair::new(theta.beta[0] * z[0] - e1, theta.beta[1] * z[1] - e2);
            let d = match dop.evaluate(v) {
                Ok(d) => d,
                Err(Error::Degenerate(_) | Error::Tie(..)) => {
                    redraws += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let u: f64 = rng.gen();
            let mut cum = 0.0;
            let mut y = Outcome::ALL[3];
            for o in Outcome::ALL {
                cum += d.get(o);
                if u < cum {
                    y = o;
                    break;
                }
            }
            out.push(Observation { z, y });
        }
        Ok((out, redraws))
    });
    let mut rows = Vec::with_capacity(n);
    let mut redraws = 0;
    for p in parts {
        let (r, k) = p?;
        rows.extend(r);
        redraws += k;
    }
    Ok(Simulation { rows, redraws })
}
