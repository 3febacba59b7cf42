//! The two-player binary game in index form.
//!
//! Player i's payoff from entering is α_{i,y_{−i}} + v_i, where the index
//! v_i = β_i z_i − e_i collects the covariate and the shock; staying out pays 0.
//! Players are indexed 0 and 1 throughout.

use crate::numerics::Correlation;
use crate::{Error, Result};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Outcome {
    pub y1: u8,
    pub y2: u8,
}

impl Outcome {
    /// Canonical order: (0,0), (0,1), (1,0), (1,1).
    pub const ALL: [Outcome; 4] = [
        Outcome { y1: 0, y2: 0 },
        Outcome { y1: 0, y2: 1 },
        Outcome { y1: 1, y2: 0 },
        Outcome { y1: 1, y2: 1 },
    ];

    pub fn new(y1: u8, y2: u8) -> Self {
        debug_assert!(y1 <= 1 && y2 <= 1);
        Outcome { y1, y2 }
    }

    pub fn index(self) -> usize {
        (2 * self.y1 + self.y2) as usize
    }

    pub fn action(self, i: usize) -> u8 {
        if i == 0 {
            self.y1
        } else {
            self.y2
        }
    }

    fn from_actions(a: [u8; 2]) -> Self {
        Outcome { y1: a[0], y2: a[1] }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.y1, self.y2)
    }
}

/// Probabilities over the four outcomes in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OutcomeDist {
    pub p: [f64; 4],
}

impl OutcomeDist {
    pub fn point(o: Outcome) -> Self {
        let mut p = [0.0; 4];
        p[o.index()] = 1.0;
        OutcomeDist { p }
    }

    /// Independent mixing: player i enters with probability q[i].
    pub fn product(q: [f64; 2]) -> Self {
        let (a, b) = (q[0], q[1]);
        OutcomeDist {
            p: [(1.0 - a) * (1.0 - b), (1.0 - a) * b, a * (1.0 - b), a * b],
        }
    }

    pub fn uniform() -> Self {
        OutcomeDist { p: [0.25; 4] }
    }

    pub fn get(&self, o: Outcome) -> f64 {
        self.p[o.index()]
    }

    /// Probability that player i enters.
    pub fn entry(&self, i: usize) -> f64 {
        if i == 0 {
            self.p[2] + self.p[3]
        } else {
            self.p[1] + self.p[3]
        }
    }

    pub fn scaled(&self, w: f64) -> Self {
        OutcomeDist { p: self.p.map(|x| w * x) }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.p;
        for (a, b) in p.iter_mut().zip(other.p) {
            *a += b;
        }
        OutcomeDist { p }
    }

    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.p.iter().zip(other.p).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn is_valid(&self) -> bool {
        self.p.iter().all(|&x| x >= 0.0) && (self.p.iter().sum::<f64>() - 1.0).abs() <= 1e-12
    }
}

/// Latent indices (v1, v2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexPair {
    pub v: [f64; 2],
}

impl IndexPair {
    pub fn new(v1: f64, v2: f64) -> Self {
        IndexPair { v: [v1, v2] }
    }

    /// v_i = β_i z_i − e_i.
    pub fn from_shocks(theta: &Theta, z: [f64; 2], e: [f64; 2]) -> Self {
        IndexPair::new(theta.beta[0] * z[0] - e[0], theta.beta[1] * z[1] - e[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theta {
    /// `alpha[i][y]` is player i's entry intercept when the opponent plays y.
    pub alpha: [[f64; 2]; 2],
    pub beta: [f64; 2],
    pub rho: Correlation,
}

impl Theta {
    pub fn new(alpha: [[f64; 2]; 2], beta: [f64; 2], rho: Correlation) -> Result<Self> {
        if alpha.iter().flatten().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParam {
                field: "alpha",
                reason: "intercepts must be finite".into(),
            });
        }
        if beta.iter().any(|b| !b.is_finite() || *b == 0.0) {
            return Err(Error::InvalidParam {
                field: "beta",
                reason: format!("slopes must be finite and nonzero, got {beta:?}"),
            });
        }
        Ok(Theta { alpha, beta, rho })
    }

    /// Symmetric game with intercepts α_{i,0} = a0, α_{i,1} = a1, unit slopes.
    pub fn symmetric(a0: f64, a1: f64, rho: Correlation) -> Result<Self> {
        Theta::new([[a0, a1], [a0, a1]], [1.0, 1.0], rho)
    }

    /// δ_i = α_{i,1} − α_{i,0}.
    pub fn delta(&self, i: usize) -> f64 {
        self.alpha[i][1] - self.alpha[i][0]
    }

    /// The multiplicity box in index space: −max_y α_{i,y} ≤ v_i ≤ −min_y α_{i,y}.
    pub fn multiplicity_box(&self) -> [(f64, f64); 2] {
        [0, 1].map(|i| {
            let [a0, a1] = self.alpha[i];
            (-a0.max(a1), -a0.min(a1))
        })
    }

    pub fn in_multiplicity_box(&self, v: IndexPair) -> bool {
        let b = self.multiplicity_box();
        (0..2).all(|i| b[i].0 < v.v[i] && v.v[i] < b[i].1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    UniqueRationalizable(Outcome),
    Multiplicity,
}

pub fn payoff_index(theta: &Theta, v: IndexPair, y: Outcome, i: usize) -> f64 {
    if y.action(i) == 0 {
        0.0
    } else {
        theta.alpha[i][y.action(1 - i) as usize] + v.v[i]
    }
}

fn entry_payoff(theta: &Theta, v: IndexPair, i: usize, opp: u8) -> f64 {
    theta.alpha[i][opp as usize] + v.v[i]
}

fn check_nondegenerate(theta: &Theta, v: IndexPair) -> Result<()> {
    for i in 0..2 {
        for opp in 0..2 {
            if entry_payoff(theta, v, i, opp) == 0.0 {
                return Err(Error::Degenerate(format!(
                    "player {} indifferent against opponent action {opp} at v={:?}",
                    i + 1,
                    v.v
                )));
            }
        }
    }
    Ok(())
}

/// Outcomes where both actions are strict best responses.
pub fn pure_ne_set(theta: &Theta, v: IndexPair) -> Result<Vec<Outcome>> {
    check_nondegenerate(theta, v)?;
    Ok(Outcome::ALL
        .into_iter()
        .filter(|&o| {
            (0..2).all(|i| {
                let gain = entry_payoff(theta, v, i, o.action(1 - i));
                (o.action(i) == 1) == (gain > 0.0)
            })
        })
        .collect())
}

/// Entry probabilities (q1, q2) of the interior mixed equilibrium, if any.
pub fn mixed_ne(theta: &Theta, v: IndexPair) -> Result<Option<[f64; 2]>> {
    check_nondegenerate(theta, v)?;
    let q = [0, 1].map(|i| {
        let j = 1 - i;
        let [a0, a1] = theta.alpha[j];
        (a0 + v.v[j]) / (a0 - a1)
    });
    Ok(if q.iter().all(|&x| x > 0.0 && x < 1.0) {
        Some(q)
    } else {
        None
    })
}

/// Outcomes surviving iterated elimination of strictly dominated actions.
pub fn rationalizable_set(theta: &Theta, v: IndexPair) -> Result<Vec<Outcome>> {
    check_nondegenerate(theta, v)?;
    let mut alive = [[true, true], [true, true]];
    loop {
        let mut changed = false;
        for i in 0..2 {
            if !(alive[i][0] && alive[i][1]) {
                continue;
            }
            let gains: Vec<f64> = (0..2u8)
                .filter(|&a| alive[1 - i][a as usize])
                .map(|a| entry_payoff(theta, v, i, a))
                .collect();
            if gains.iter().all(|&g| g > 0.0) {
                alive[i][0] = false;
                changed = true;
            } else if gains.iter().all(|&g| g < 0.0) {
                alive[i][1] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(Outcome::ALL
        .into_iter()
        .filter(|o| alive[0][o.y1 as usize] && alive[1][o.y2 as usize])
        .collect())
}

/// Each player enters iff its worst-case entry payoff is positive.
pub fn maxmin_outcome(theta: &Theta, v: IndexPair) -> Result<Outcome> {
    let mut a = [0u8; 2];
    for i in 0..2 {
        let worst = theta.alpha[i][0].min(theta.alpha[i][1]) + v.v[i];
        if worst == 0.0 {
            return Err(Error::Degenerate(format!(
                "player {} has zero worst-case entry payoff at v={:?}",
                i + 1,
                v.v
            )));
        }
        a[i] = u8::from(worst > 0.0);
    }
    Ok(Outcome::from_actions(a))
}

/// The outcome maximizing total payoff; exact ties are an error.
pub fn collusive_outcome(theta: &Theta, v: IndexPair) -> Result<Outcome> {
    let total = |o: Outcome| payoff_index(theta, v, o, 0) + payoff_index(theta, v, o, 1);
    let mut best = Outcome::ALL[0];
    let mut best_total = total(best);
    for o in &Outcome::ALL[1..] {
        let t = total(*o);
        if t > best_total {
            best = *o;
            best_total = t;
        }
    }
    for o in Outcome::ALL {
        if o != best && total(o) == best_total {
            return Err(Error::Tie((best.y1, best.y2), (o.y1, o.y2)));
        }
    }
    Ok(best)
}

pub fn classify_region(theta: &Theta, v: IndexPair) -> Result<Region> {
    let set = rationalizable_set(theta, v)?;
    Ok(if set.len() == 1 {
        Region::UniqueRationalizable(set[0])
    } else {
        Region::Multiplicity
    })
}
