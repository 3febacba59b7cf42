//! Adaptive Gauss–Kronrod quadrature in one and two dimensions.

use super::bvn::Rect;
use crate::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

// Kronrod 15-point abscissae (positive half, descending) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss 7-point weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// The 15 Kronrod nodes on [−1, 1] with Kronrod and embedded Gauss weights.
fn nodes() -> [(f64, f64, f64); 15] {
    let mut out = [(0.0, 0.0, 0.0); 15];
    for j in 0..7 {
        let g = if j % 2 == 1 { WG[j / 2] } else { 0.0 };
        out[j] = (-XGK[j], WGK[j], g);
        out[14 - j] = (XGK[j], WGK[j], g);
    }
    out[7] = (0.0, WGK[7], WG[3]);
    out
}

/// Stopping rule: stop once the error estimate is within `abs` or within `rel·|I|`.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_regions: usize,
}

impl QuadOptions {
    pub fn absolute(tol: f64) -> Self {
        QuadOptions {
            abs_tol: tol,
            rel_tol: 0.0,
            max_regions: 20_000,
        }
    }

    fn done(&self, value: f64, err: f64) -> bool {
        err <= self.abs_tol || err <= self.rel_tol * value.abs()
    }
}

struct Piece<R> {
    region: R,
    value: f64,
    err: f64,
}

impl<R> PartialEq for Piece<R> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<R> Eq for Piece<R> {}
impl<R> PartialOrd for Piece<R> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<R> Ord for Piece<R> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

// Global adaptive loop shared by both dimensions: always refine the worst piece.
fn adapt<R, E, S>(root: R, opts: QuadOptions, mut estimate: E, split: S) -> Result<f64>
where
    E: FnMut(&R) -> (f64, f64, usize),
    S: Fn(&R, usize) -> Vec<R>,
{
    let mut heap = BinaryHeap::new();
    let (value, err, axis) = estimate(&root);
    let mut total = value;
    let mut total_err = err;
    heap.push((Piece { region: root, value, err }, axis));
    let mut count = 1usize;
    while !opts.done(total, total_err) {
        if count >= opts.max_regions || !total_err.is_finite() {
            return Err(Error::QuadratureBudget {
                err: total_err,
                tol: opts.abs_tol.max(opts.rel_tol * total.abs()),
            });
        }
        let (worst, axis) = heap.pop().expect("heap holds every region");
        total -= worst.value;
        total_err -= worst.err;
        for child in split(&worst.region, axis) {
            let (v, e, ax) = estimate(&child);
            total += v;
            total_err += e;
            heap.push((Piece { region: child, value: v, err: e }, ax));
            count += 1;
        }
        // Re-summing occasionally keeps the running totals free of drift.
        if count % 512 == 0 {
            total = heap.iter().map(|(p, _)| p.value).sum();
            total_err = heap.iter().map(|(p, _)| p.err).sum();
        }
    }
    Ok(heap.iter().map(|(p, _)| p.value).sum())
}

/// Adaptive 1-D integral of `f` over the bounded interval [a, b].
pub fn quad1d<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    quad1d_with(f, a, b, QuadOptions::absolute(tol))
}

pub fn quad1d_with<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("quad1d needs finite limits, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let rule = nodes();
    let estimate = |&(x0, x1): &(f64, f64)| {
        let c = 0.5 * (x0 + x1);
        let h = 0.5 * (x1 - x0);
        let (mut k, mut g) = (0.0, 0.0);
        for &(x, wk, wg) in &rule {
            let y = f(c + h * x);
            k += wk * y;
            g += wg * y;
        }
        (k * h, ((k - g) * h).abs(), 0)
    };
    let split = |&(x0, x1): &(f64, f64), _| {
        let m = 0.5 * (x0 + x1);
        vec![(x0, m), (m, x1)]
    };
    adapt((lo, hi), opts, estimate, split).map(|v| sign * v)
}

/// Adaptive 2-D integral of `f` over a bounded rectangle, error ≤ `tol`.
pub fn quad2d<F: FnMut(f64, f64) -> f64>(f: F, r: &Rect, tol: f64) -> Result<f64> {
    quad2d_with(f, r, QuadOptions::absolute(tol))
}

pub fn quad2d_with<F: FnMut(f64, f64) -> f64>(mut f: F, r: &Rect, opts: QuadOptions) -> Result<f64> {
    if !r.is_bounded() {
        return Err(Error::Domain(format!("quad2d needs a bounded rectangle, got {r:?}")));
    }
    if r.hi1 == r.lo1 || r.hi2 == r.lo2 {
        return Ok(0.0);
    }
    let rule = nodes();
    // Tensor Kronrod rule; dropping to Gauss along one axis at a time gives per-axis
    // error estimates, and the piece is split along the worse axis.
    let estimate = |q: &Rect| {
        let (c1, h1) = (0.5 * (q.lo1 + q.hi1), 0.5 * (q.hi1 - q.lo1));
        let (c2, h2) = (0.5 * (q.lo2 + q.hi2), 0.5 * (q.hi2 - q.lo2));
        let (mut kk, mut gk, mut kg) = (0.0, 0.0, 0.0);
        for &(x, wkx, wgx) in &rule {
            let (mut rk, mut rg) = (0.0, 0.0);
            for &(y, wky, wgy) in &rule {
                let v = f(c1 + h1 * x, c2 + h2 * y);
                rk += wky * v;
                rg += wgy * v;
            }
            kk += wkx * rk;
            gk += wgx * rk;
            kg += wkx * rg;
        }
        let area = h1 * h2;
        let e1 = ((kk - gk) * area).abs();
        let e2 = ((kk - kg) * area).abs();
        (kk * area, e1 + e2, if e1 >= e2 { 1 } else { 2 })
    };
    let split = |q: &Rect, axis: usize| {
        if axis == 1 {
            let m = 0.5 * (q.lo1 + q.hi1);
            vec![Rect { hi1: m, ..*q }, Rect { lo1: m, ..*q }]
        } else {
            let m = 0.5 * (q.lo2 + q.hi2);
            vec![Rect { hi2: m, ..*q }, Rect { lo2: m, ..*q }]
        }
    };
    adapt(*r, opts, estimate, split)
}
