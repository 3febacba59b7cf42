//! Distributions of play: a solution concept plus a selection rule, mapping
//! an index pair to a distribution over outcomes.

use crate::game::{
    collusive_outcome, maxmin_outcome, mixed_ne, pure_ne_set, rationalizable_set, IndexPair,
    Outcome, OutcomeDist, Theta,
};
use crate::partition::Line;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Concept {
    Rationalizable,
    Nash,
    Maxmin,
    Collusion,
    Saa,
}

/// How play is resolved on the multiplicity region.
///
/// The NE list used by `FixedWeights` is canonical: pure equilibria in outcome
/// order, then the mixed equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub enum SelectionSpec {
    EqualWeightNe,
    /// Among pure equilibria, the one with the largest total payoff; with two
    /// monopoly equilibria this is the firm with the larger monopoly profit.
    MostProfitableEnters,
    NeverEnterOnMultiplicity,
    FixedWeights(Vec<f64>),
    /// A fixed distribution over the four outcomes on the multiplicity region.
    OutcomeWeights([f64; 4]),
    AveragedOverMultiplicity(Box<SelectionSpec>),
}

impl SelectionSpec {
    /// Weights that put all mass on the mixed equilibrium.
    pub fn mixed_only() -> Self {
        SelectionSpec::FixedWeights(vec![0.0, 0.0, 1.0])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionOfPlay {
    theta: Theta,
    concept: Concept,
    selection: SelectionSpec,
    box_average: Option<OutcomeDist>,
}

fn check_prob_vector(field: &'static str, w: &[f64]) -> Result<()> {
    let ok = w.iter().all(|&x| x.is_finite() && x >= 0.0) && (w.iter().sum::<f64>() - 1.0).abs() <= 1e-12;
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParam {
            field,
            reason: format!("weights must be nonnegative and sum to 1, got {w:?}"),
        })
    }
}

impl DistributionOfPlay {
    pub fn new(theta: Theta, concept: Concept, selection: SelectionSpec) -> Result<Self> {
        use SelectionSpec::*;
        let bad = |reason: String| Err(Error::InvalidParam { field: "selection", reason });
        match (&concept, &selection) {
            (_, AveragedOverMultiplicity(_)) => {
                return bad("averaged selections are built with build_averaged_dop".into())
            }
            (Concept::Nash, NeverEnterOnMultiplicity | OutcomeWeights(_)) => {
                return bad(format!("{selection:?} is not a Nash selection"))
            }
            (Concept::Saa, s) if *s != NeverEnterOnMultiplicity => {
                return bad("SAA always selects no entry on the multiplicity region".into())
            }
            _ => {}
        }
        match &selection {
            FixedWeights(w) => {
                if w.len() != 3 {
                    return bad(format!("FixedWeights needs 3 weights (two pure NE, then mixed), got {}", w.len()));
                }
                check_prob_vector("selection.weights", w)?;
            }
            OutcomeWeights(w) => check_prob_vector("selection.weights", w)?,
            _ => {}
        }
        Ok(DistributionOfPlay { theta, concept, selection, box_average: None })
    }

    pub fn saa(theta: Theta) -> Self {
        Self::new(theta, Concept::Saa, SelectionSpec::NeverEnterOnMultiplicity).expect("valid")
    }

    pub fn maxmin(theta: Theta) -> Self {
        Self::new(theta, Concept::Maxmin, SelectionSpec::NeverEnterOnMultiplicity).expect("valid")
    }

    pub fn collusion(theta: Theta) -> Self {
        Self::new(theta, Concept::Collusion, SelectionSpec::NeverEnterOnMultiplicity).expect("valid")
    }

    pub fn nash(theta: Theta, selection: SelectionSpec) -> Result<Self> {
        Self::new(theta, Concept::Nash, selection)
    }

    pub fn rationalizable(theta: Theta, selection: SelectionSpec) -> Result<Self> {
        Self::new(theta, Concept::Rationalizable, selection)
    }

    pub fn theta(&self) -> &Theta {
        &self.theta
    }

    pub fn concept(&self) -> Concept {
        self.concept
    }

    pub fn selection(&self) -> &SelectionSpec {
        &self.selection
    }

    pub fn box_average(&self) -> Option<OutcomeDist> {
        self.box_average
    }

    /// Same rule under different parameters.
    pub fn with_theta(&self, theta: Theta) -> Self {
        DistributionOfPlay { theta, ..self.clone() }
    }

    pub fn evaluate(&self, v: IndexPair) -> Result<OutcomeDist> {
        let t = &self.theta;
        match self.concept {
            Concept::Maxmin => return Ok(OutcomeDist::point(maxmin_outcome(t, v)?)),
            Concept::Collusion => return Ok(OutcomeDist::point(collusive_outcome(t, v)?)),
            _ => {}
        }
        let set = rationalizable_set(t, v)?;
        if set.len() == 1 {
            return Ok(OutcomeDist::point(set[0]));
        }
        if let Some(avg) = self.box_average {
            return Ok(avg);
        }
        match &self.selection {
            SelectionSpec::NeverEnterOnMultiplicity => Ok(OutcomeDist::point(Outcome::new(0, 0))),
            SelectionSpec::OutcomeWeights(w) => Ok(OutcomeDist { p: *w }),
            SelectionSpec::EqualWeightNe => {
                let ne = ne_distributions(t, v)?;
                let w = 1.0 / ne.len() as f64;
                Ok(ne.iter().fold(OutcomeDist::default(), |acc, d| acc.add(&d.scaled(w))))
            }
            SelectionSpec::FixedWeights(w) => {
                let ne = ne_distributions(t, v)?;
                if ne.len() == 1 {
                    return Ok(ne[0]);
                }
                Ok(ne.iter().zip(w).fold(OutcomeDist::default(), |acc, (d, &wk)| acc.add(&d.scaled(wk))))
            }
            SelectionSpec::MostProfitableEnters => most_profitable(t, v),
            SelectionSpec::AveragedOverMultiplicity(_) => unreachable!("averaged dops carry their box average"),
        }
    }

    /// True when evaluation varies continuously inside the multiplicity box,
    /// so probabilities there need quadrature.
    pub fn smooth_on_box(&self) -> bool {
        if self.box_average.is_some() || !self.has_box() {
            return false;
        }
        match &self.selection {
            SelectionSpec::EqualWeightNe => true,
            SelectionSpec::FixedWeights(w) => w[2] > 0.0 || self.theta.delta(0) * self.theta.delta(1) < 0.0,
            _ => false,
        }
    }

    fn has_box(&self) -> bool {
        matches!(self.concept, Concept::Rationalizable | Concept::Nash | Concept::Saa)
    }

    /// Lines in index space across which evaluation may change.
    pub fn boundaries(&self) -> Vec<Line> {
        let t = &self.theta;
        let a = t.alpha;
        match self.concept {
            Concept::Maxmin => vec![Line::V1(-a[0][0].min(a[0][1])), Line::V2(-a[1][0].min(a[1][1]))],
            Concept::Collusion => vec![
                Line::V1(-a[0][0]),
                Line::V2(-a[1][0]),
                Line::V1(a[1][0] - a[1][1] - a[0][1]),
                Line::V2(a[0][0] - a[0][1] - a[1][1]),
                Line::Diag { slope: 1.0, icpt: a[0][0] - a[1][0] },
                Line::Diag { slope: -1.0, icpt: -a[0][1] - a[1][1] },
            ],
            _ => {
                let b = t.multiplicity_box();
                let mut lines = vec![Line::V1(b[0].0), Line::V1(b[0].1), Line::V2(b[1].0), Line::V2(b[1].1)];
                if self.box_average.is_none() && self.selection == SelectionSpec::MostProfitableEnters {
                    lines.push(Line::Diag { slope: 1.0, icpt: a[0][0] - a[1][0] });
                    lines.push(Line::Diag { slope: -1.0, icpt: -a[0][1] - a[1][1] });
                }
                lines
            }
        }
    }

    pub(crate) fn with_box_average(&self, avg: OutcomeDist) -> Self {
        DistributionOfPlay {
            selection: SelectionSpec::AveragedOverMultiplicity(Box::new(self.selection.clone())),
            box_average: Some(avg),
            ..self.clone()
        }
    }
}

/// The NE outcome distributions at (θ, v): pure equilibria in outcome order,
/// then the mixed equilibrium if it exists.
pub fn ne_distributions(theta: &Theta, v: IndexPair) -> Result<Vec<OutcomeDist>> {
    let mut out: Vec<OutcomeDist> = pure_ne_set(theta, v)?.into_iter().map(OutcomeDist::point).collect();
    if let Some(q) = mixed_ne(theta, v)? {
        out.push(OutcomeDist::product(q));
    }
    Ok(out)
}

fn most_profitable(theta: &Theta, v: IndexPair) -> Result<OutcomeDist> {
    let pure = pure_ne_set(theta, v)?;
    if pure.is_empty() {
        let q = mixed_ne(theta, v)?.ok_or_else(|| Error::Degenerate("no equilibrium found".into()))?;
        return Ok(OutcomeDist::product(q));
    }
    let total = |o: Outcome| {
        crate::game::payoff_index(theta, v, o, 0) + crate::game::payoff_index(theta, v, o, 1)
    };
    let mut best = pure[0];
    for &o in &pure[1..] {
        if total(o) > total(best) {
            best = o;
        }
    }
    if pure.iter().any(|&o| o != best && total(o) == total(best)) {
        return Err(Error::Degenerate(format!("equally profitable equilibria at v={:?}", v.v)));
    }
    Ok(OutcomeDist::point(best))
}

/// L1 distance from q to the convex hull of the given distributions.
pub fn hull_distance(gens: &[OutcomeDist], q: &OutcomeDist) -> f64 {
    let k = gens.len();
    let obj = |lam: &[f64]| {
        let mut p = [0.0; 4];
        for (g, &l) in gens.iter().zip(lam) {
            for y in 0..4 {
                p[y] += l * g.p[y];
            }
        }
        OutcomeDist { p }.l1_distance(q)
    };
    match k {
        0 => f64::INFINITY,
        1 => obj(&[1.0]),
        2 => {
            // Piecewise linear in λ: check the kinks and the endpoints.
            let mut cands = vec![0.0, 1.0];
            for y in 0..4 {
                let d = gens[0].p[y] - gens[1].p[y];
                if d != 0.0 {
                    cands.push((q.p[y] - gens[1].p[y]) / d);
                }
            }
            cands
                .into_iter()
                .filter(|l| (0.0..=1.0).contains(l))
                .map(|l| obj(&[l, 1.0 - l]))
                .fold(f64::INFINITY, f64::min)
        }
        3 => {
            // Lines a·λ = c in (λ1, λ2): the four kinks plus the simplex edges.
            // The minimum of a convex piecewise-linear function over the simplex
            // sits at an intersection of two of them.
            let mut lines: Vec<([f64; 2], f64)> = (0..4)
                .map(|y| {
                    let g3 = gens[2].p[y];
                    ([gens[0].p[y] - g3, gens[1].p[y] - g3], q.p[y] - g3)
                })
                .collect();
            lines.push(([1.0, 0.0], 0.0));
            lines.push(([0.0, 1.0], 0.0));
            lines.push(([1.0, 1.0], 1.0));
            let mut best = f64::INFINITY;
            for i in 0..lines.len() {
                for j in i + 1..lines.len() {
                    let ([a, b], c) = lines[i];
                    let ([d, e], f) = lines[j];
                    let det = a * e - b * d;
                    if det.abs() < 1e-14 {
                        continue;
                    }
                    let l1 = (c * e - b * f) / det;
                    let l2 = (a * f - c * d) / det;
                    let eps = 1e-12;
                    if l1 >= -eps && l2 >= -eps && l1 + l2 <= 1.0 + eps {
                        let l1 = l1.max(0.0);
                        let l2 = l2.max(0.0);
                        let s = (l1 + l2).max(1.0);
                        best = best.min(obj(&[l1 / s, l2 / s, 1.0 - (l1 + l2) / s]));
                    }
                }
            }
            best
        }
        _ => unreachable!("a nondegenerate 2x2 game has at most three equilibria"),
    }
}

/// Whether q lies within `tol` (L1) of the convex hull of NE distributions at v.
pub fn nash_hull_membership(theta: &Theta, v: IndexPair, q: &OutcomeDist, tol: f64) -> Result<bool> {
    let gens = ne_distributions(theta, v)?;
    Ok(hull_distance(&gens, q) <= tol)
}

/// Replaces play on the multiplicity box by its average under the shock law
/// (the index law at z = 0); play elsewhere is unchanged.
pub fn build_averaged_dop(base: &DistributionOfPlay, tol: f64) -> Result<DistributionOfPlay> {
    if !base.has_box() {
        return Err(Error::InvalidParam {
            field: "dop.concept",
            reason: "averaging needs a concept with a multiplicity region".into(),
        });
    }
    if base.box_average.is_some() {
        return Ok(base.clone());
    }
    let avg = crate::probabilities::multiplicity_box_average(base, tol)?;
    Ok(base.with_box_average(avg))
}
