//! Monotone CDFs tabulated on a grid.

use super::Status;
use crate::{Error, Result};

/// Pool-adjacent-violators fit: the nondecreasing sequence closest to `ys` in
/// least squares.
pub fn isotonic(ys: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(ys.len());
    for &y in ys {
        blocks.push((y, 1));
        while blocks.len() > 1 {
            let (m2, n2) = blocks[blocks.len() - 1];
            let (m1, n1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let n = n1 + n2;
            *blocks.last_mut().unwrap() = ((m1 * n1 as f64 + m2 * n2 as f64) / n as f64, n);
        }
    }
    blocks.into_iter().flat_map(|(m, n)| std::iter::repeat(m).take(n)).collect()
}

/// Piecewise-linear CDF through (t_k, f_k), nondecreasing and within [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct CdfGrid {
    pub t: Vec<f64>,
    pub f: Vec<f64>,
    pub status: Status,
}

impl CdfGrid {
    /// Isotonizes and clamps the raw values.
    pub fn from_raw(t: Vec<f64>, raw: &[f64], status: Status) -> Self {
        let f = isotonic(raw).into_iter().map(|x| x.clamp(0.0, 1.0)).collect();
        CdfGrid { t, f, status }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.t.len();
        if x <= self.t[0] {
            return self.f[0];
        }
        if x >= self.t[n - 1] {
            return self.f[n - 1];
        }
        let k = self.t.partition_point(|&s| s <= x) - 1;
        let w = (x - self.t[k]) / (self.t[k + 1] - self.t[k]);
        self.f[k] + w * (self.f[k + 1] - self.f[k])
    }

    /// Smallest t with F(t) = p, by linear interpolation.
    pub fn inverse(&self, p: f64) -> Result<f64> {
        let n = self.f.len();
        let (lo, hi) = (self.f[0], self.f[n - 1]);
        if !(p >= lo && p <= hi) || lo == hi {
            return Err(Error::Inversion { prob: p, lo, hi });
        }
        let k = self.f.partition_point(|&v| v < p);
        if k == 0 {
            return Ok(self.t[0]);
        }
        let (f0, f1) = (self.f[k - 1], self.f[k]);
        let w = if f1 > f0 { (p - f0) / (f1 - f0) } else { 0.0 };
        Ok(self.t[k - 1] + w * (self.t[k] - self.t[k - 1]))
    }

    /// Density by central differencing of the interpolant.
    pub fn density(&self, x: f64) -> f64 {
        let h = self.t[1] - self.t[0];
        (self.eval(x + h) - self.eval(x - h)) / (2.0 * h)
    }

    pub fn sup_distance<F: Fn(f64) -> f64>(&self, other: F, lo: f64, hi: f64) -> f64 {
        self.t
            .iter()
            .zip(&self.f)
            .filter(|(t, _)| **t >= lo && **t <= hi)
            .map(|(&t, &f)| (f - other(t)).abs())
            .fold(0.0, f64::max)
    }
}
