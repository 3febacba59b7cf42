//! Experiment configuration: a JSON document whose fields can be overridden
//! from the command line. Missing fields take the defaults below.

use crate::Failure;
use discern_lab::dop::{build_averaged_dop, DistributionOfPlay, SelectionSpec};
use discern_lab::game::Theta;
use discern_lab::identify::{CovariateDesign, LimitConfig};
use discern_lab::numerics::{Correlation, SeedStream};
use discern_lab::probabilities::MarketDesign;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub command: Option<String>,
    pub theta: ThetaCfg,
    pub dop: DopCfg,
    pub market: MarketCfg,
    pub numeric: NumericCfg,
    pub policy: PolicyCfg,
    pub io: IoCfg,
}

/// `alpha[i][y]`: player i's entry intercept when the opponent plays y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThetaCfg {
    pub alpha: [[f64; 2]; 2],
    pub beta: [f64; 2],
    pub rho: f64,
}

impl Default for ThetaCfg {
    fn default() -> Self {
        ThetaCfg { alpha: [[0.0, -1.0], [0.0, -1.0]], beta: [1.0, 1.0], rho: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DopCfg {
    /// saa, nash, rationalizable, maxmin or collusion; the policy commands
    /// take saa or pne.
    pub concept: String,
    /// equal-weight, most-profitable, never-enter, mixed-only, fixed or outcome.
    pub selection: String,
    /// Weights for `fixed` (over the NE list) or `outcome` (over the outcomes).
    pub weights: Vec<f64>,
    /// Replace play on the multiplicity box by its average.
    pub averaged: bool,
}

impl Default for DopCfg {
    fn default() -> Self {
        DopCfg { concept: "saa".into(), selection: "equal-weight".into(), weights: Vec::new(), averaged: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarketCfg {
    pub z: [f64; 2],
    /// fixed (every market at z) or uniform (z on [z_lo, z_hi]²).
    pub design: String,
    pub z_lo: f64,
    pub z_hi: f64,
}

impl Default for MarketCfg {
    fn default() -> Self {
        MarketCfg { z: [0.0, 0.0], design: "uniform".into(), z_lo: -5.0, z_hi: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericCfg {
    pub tol: f64,
    /// Covariate magnitude standing in for ±∞.
    pub l: f64,
    pub seed: u64,
    pub stream: u64,
    pub n: usize,
    /// exact or mc.
    pub method: String,
    pub bandwidth: f64,
    pub bootstrap: usize,
    /// Points per side of the nash-demo grid.
    pub grid: usize,
}

impl Default for NumericCfg {
    fn default() -> Self {
        NumericCfg {
            tol: 1e-10,
            l: 8.0,
            seed: 0,
            stream: 0,
            n: 100_000,
            method: "exact".into(),
            bandwidth: 0.1,
            bootstrap: 20,
            grid: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyCfg {
    pub eta: f64,
    pub tau: f64,
    /// Lump-sum scheme: α_{i,1}, with α_{i,0} = base_alpha + eta.
    pub base_alpha: f64,
    pub tau_hat_lo: f64,
    pub tau_hat_hi: f64,
    pub steps: usize,
}

impl Default for PolicyCfg {
    fn default() -> Self {
        PolicyCfg { eta: 1.0, tau: 0.05, base_alpha: 0.0, tau_hat_lo: 0.0, tau_hat_hi: 0.0, steps: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoCfg {
    pub output_dir: PathBuf,
    /// Dataset with header z1,z2,y1,y2; when absent, identification queries
    /// the configured model exactly.
    pub input: Option<PathBuf>,
}

impl Default for IoCfg {
    fn default() -> Self {
        IoCfg { output_dir: PathBuf::from("."), input: None }
    }
}

fn bad(field: &str, reason: impl std::fmt::Display) -> Failure {
    Failure::config(format!("invalid `{field}`: {reason}"))
}

fn positive(field: &str, x: f64) -> Result<f64, Failure> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(bad(field, format!("must be positive, got {x}")))
    }
}

impl Config {
    pub fn correlation(&self) -> Result<Correlation, Failure> {
        Correlation::new(self.theta.rho).map_err(|e| bad("theta.rho", e))
    }

    pub fn theta(&self) -> Result<Theta, Failure> {
        Theta::new(self.theta.alpha, self.theta.beta, self.correlation()?).map_err(|e| bad("theta", e))
    }

    pub fn tol(&self) -> Result<f64, Failure> {
        positive("numeric.tol", self.numeric.tol)
    }

    pub fn seed(&self) -> SeedStream {
        SeedStream::new(self.numeric.seed, self.numeric.stream)
    }

    pub fn n(&self) -> Result<usize, Failure> {
        if self.numeric.n == 0 {
            return Err(bad("numeric.n", "need at least one draw"));
        }
        Ok(self.numeric.n)
    }

    pub fn bandwidth(&self) -> Result<f64, Failure> {
        positive("numeric.bandwidth", self.numeric.bandwidth)
    }

    pub fn market(&self) -> Result<MarketDesign, Failure> {
        MarketDesign::new(self.market.z[0], self.market.z[1]).map_err(|e| bad("market.z", e))
    }

    pub fn design(&self) -> Result<CovariateDesign, Failure> {
        match self.market.design.as_str() {
            "fixed" => Ok(CovariateDesign::Fixed(self.market().map(|_| self.market.z)?)),
            "uniform" => {
                let (lo, hi) = (self.market.z_lo, self.market.z_hi);
                if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                    return Err(bad("market.z_lo", format!("need finite z_lo < z_hi, got [{lo}, {hi}]")));
                }
                Ok(CovariateDesign::Uniform { lo, hi })
            }
            other => Err(bad("market.design", format!("expected fixed or uniform, got `{other}`"))),
        }
    }

    pub fn mc(&self) -> Result<bool, Failure> {
        match self.numeric.method.as_str() {
            "exact" => Ok(false),
            "mc" => Ok(true),
            other => Err(bad("numeric.method", format!("expected exact or mc, got `{other}`"))),
        }
    }

    pub fn selection(&self) -> Result<SelectionSpec, Failure> {
        let w = &self.dop.weights;
        Ok(match self.dop.selection.as_str() {
            "equal-weight" => SelectionSpec::EqualWeightNe,
            "most-profitable" => SelectionSpec::MostProfitableEnters,
            "never-enter" => SelectionSpec::NeverEnterOnMultiplicity,
            "mixed-only" => SelectionSpec::mixed_only(),
            "fixed" => SelectionSpec::FixedWeights(w.clone()),
            "outcome" => {
                let arr: [f64; 4] = w
                    .as_slice()
                    .try_into()
                    .map_err(|_| bad("dop.weights", format!("outcome weights need 4 entries, got {}", w.len())))?;
                SelectionSpec::OutcomeWeights(arr)
            }
            other => Err(bad(
                "dop.selection",
                format!("expected equal-weight, most-profitable, never-enter, mixed-only, fixed or outcome, got `{other}`"),
            ))?,
        })
    }

    pub fn dop(&self) -> Result<DistributionOfPlay, Failure> {
        let theta = self.theta()?;
        let d = match self.dop.concept.as_str() {
            "saa" => DistributionOfPlay::saa(theta),
            "maxmin" => DistributionOfPlay::maxmin(theta),
            "collusion" => DistributionOfPlay::collusion(theta),
            "nash" => DistributionOfPlay::nash(theta, self.selection()?).map_err(|e| bad("dop.weights", e))?,
            "rationalizable" => {
                DistributionOfPlay::rationalizable(theta, self.selection()?).map_err(|e| bad("dop.weights", e))?
            }
            other => Err(bad(
                "dop.concept",
                format!("expected saa, nash, rationalizable, maxmin or collusion, got `{other}`"),
            ))?,
        };
        if self.dop.averaged {
            return build_averaged_dop(&d, self.tol()?).map_err(Failure::from);
        }
        Ok(d)
    }

    /// Identification settings; kernel estimates get bandwidth-tied grids.
    pub fn limits(&self, binned: bool) -> Result<LimitConfig, Failure> {
        let mut c = if binned { LimitConfig::for_bandwidth(self.bandwidth()?) } else { LimitConfig::default() };
        c.l = self.numeric.l;
        c.validate().map_err(|e| bad("numeric.l", e))?;
        Ok(c)
    }
}
