//! Partition of the index plane by a set of lines into convex cells.
//!
//! Cells are vertical slabs in v1 cut by the non-vertical lines. Slab edges
//! include every crossing among lines, so within a slab the cutting lines keep
//! their order and each cell is bounded below and above by a single line.

use crate::game::IndexPair;
use crate::numerics::{bvn_rect_prob, quad1d_with, std_normal_interval, std_normal_pdf, Correlation, QuadOptions, Rect};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Line {
    /// v1 = c
    V1(f64),
    /// v2 = c
    V2(f64),
    /// v2 = slope·v1 + icpt
    Diag { slope: f64, icpt: f64 },
}

/// v2 = icpt + slope·v1, or ±∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    NegInf,
    PosInf,
    Line { icpt: f64, slope: f64 },
}

impl Bound {
    pub fn at(&self, v1: f64) -> f64 {
        match *self {
            Bound::NegInf => f64::NEG_INFINITY,
            Bound::PosInf => f64::INFINITY,
            Bound::Line { icpt, slope } => icpt + slope * v1,
        }
    }

    fn is_flat(&self) -> bool {
        !matches!(self, Bound::Line { slope, .. } if *slope != 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub x0: f64,
    pub x1: f64,
    pub lower: Bound,
    pub upper: Bound,
    /// A point strictly inside the cell.
    pub rep: IndexPair,
}

impl Cell {
    pub fn is_rectangle(&self) -> bool {
        self.lower.is_flat() && self.upper.is_flat()
    }
}

/// Points closer than this (relative to their size) are merged; slabs or
/// cells thinner than this carry no probability worth computing.
const MERGE_TOL: f64 = 1e-12;

fn close(a: f64, b: f64) -> bool {
    a.is_finite() && b.is_finite() && (a - b).abs() <= MERGE_TOL * a.abs().max(b.abs()).max(1.0)
}

fn sorted_unique(mut xs: Vec<f64>) -> Vec<f64> {
    xs.retain(|x| x.is_finite());
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup_by(|b, a| close(*a, *b));
    xs
}

fn interior(lo: f64, hi: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo + 1.0,
        (false, true) => hi - 1.0,
        (false, false) => 0.0,
    }
}

pub fn partition(lines: &[Line]) -> Vec<Cell> {
    let mut cuts = Vec::new();
    let mut bounds: Vec<(f64, f64)> = Vec::new();
    for l in lines {
        match *l {
            Line::V1(c) => cuts.push(c),
            Line::V2(c) => bounds.push((c, 0.0)),
            Line::Diag { slope, icpt } => bounds.push((icpt, slope)),
        }
    }
    bounds.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    bounds.dedup_by(|b, a| close(a.0, b.0) && close(a.1, b.1));
    for (i, &(a1, b1)) in bounds.iter().enumerate() {
        for &(a2, b2) in &bounds[i + 1..] {
            if b1 != b2 {
                cuts.push((a2 - a1) / (b1 - b2));
            }
        }
    }
    let cuts = sorted_unique(cuts);
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend(cuts);
    edges.push(f64::INFINITY);

    let mut cells = Vec::new();
    for w in edges.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        if x1 <= x0 {
            continue;
        }
        let xm = interior(x0, x1);
        let mut here: Vec<Bound> = bounds.iter().map(|&(icpt, slope)| Bound::Line { icpt, slope }).collect();
        here.sort_by(|a, b| a.at(xm).total_cmp(&b.at(xm)));
        let mut stack = vec![Bound::NegInf];
        stack.extend(here);
        stack.push(Bound::PosInf);
        for pair in stack.windows(2) {
            let (lo, hi) = (pair[0].at(xm), pair[1].at(xm));
            if hi <= lo || close(lo, hi) {
                continue;
            }
            cells.push(Cell {
                x0,
                x1,
                lower: pair[0],
                upper: pair[1],
                rep: IndexPair::new(xm, interior(lo, hi)),
            });
        }
    }
    cells
}

/// Standard deviations beyond which the v1-marginal is ignored in trapezoid cells.
const TAIL_SD: f64 = 9.0;

/// P(V ∈ cell) for V ~ N(mean, unit variances, correlation c).
pub fn cell_prob(cell: &Cell, mean: [f64; 2], c: Correlation, opts: QuadOptions) -> Result<f64> {
    if cell.is_rectangle() {
        let r = Rect::new(cell.x0, cell.x1, cell.lower.at(0.0), cell.upper.at(0.0))?;
        return Ok(bvn_rect_prob(&r.shifted(-mean[0], -mean[1]), c));
    }
    let a = cell.x0.max(mean[0] - TAIL_SD);
    let b = cell.x1.min(mean[0] + TAIL_SD);
    if b <= a {
        return Ok(0.0);
    }
    let (rho, sd) = (c.rho(), c.cond_sd());
    let integrand = |x: f64| {
        let u = x - mean[0];
        let m2 = mean[1] + rho * u;
        let lo = (cell.lower.at(x) - m2) / sd;
        let hi = (cell.upper.at(x) - m2) / sd;
        if hi <= lo {
            0.0
        } else {
            std_normal_pdf(u) * std_normal_interval(lo, hi)
        }
    };
    quad1d_with(integrand, a, b, opts)
}
