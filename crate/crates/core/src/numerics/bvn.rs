//! Standard bivariate normal orthant and rectangle probabilities.
//!
//! The orthant kernel follows the Drezner–Wesolowsky reduction as refined by
//! Genz (`bvnd` in TVPACK), with 6/12/20-point Gauss–Legendre rules chosen by |ρ|.

use super::normal::{std_normal_cdf, std_normal_interval};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Correlation of the two shocks, strictly inside (−1, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation(f64);

impl Correlation {
    pub fn new(rho: f64) -> Result<Self> {
        if rho.is_finite() && rho.abs() < 1.0 {
            Ok(Correlation(rho))
        } else {
            Err(Error::InvalidParam {
                field: "rho",
                reason: format!("correlation must lie in (-1, 1), got {rho}"),
            })
        }
    }

    pub const fn independent() -> Self {
        Correlation(0.0)
    }

    pub fn rho(self) -> f64 {
        self.0
    }

    /// √(1 − ρ²), the conditional standard deviation of one shock given the other.
    pub fn cond_sd(self) -> f64 {
        ((1.0 - self.0) * (1.0 + self.0)).sqrt()
    }
}

/// Axis-aligned rectangle with possibly infinite sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub lo1: f64,
    pub hi1: f64,
    pub lo2: f64,
    pub hi2: f64,
}

impl Rect {
    pub fn new(lo1: f64, hi1: f64, lo2: f64, hi2: f64) -> Result<Self> {
        let ok = |lo: f64, hi: f64| !lo.is_nan() && !hi.is_nan() && lo <= hi;
        if ok(lo1, hi1) && ok(lo2, hi2) {
            Ok(Rect { lo1, hi1, lo2, hi2 })
        } else {
            Err(Error::Domain(format!(
                "rectangle needs lo <= hi, got [{lo1},{hi1}]x[{lo2},{hi2}]"
            )))
        }
    }

    pub fn plane() -> Self {
        Rect {
            lo1: f64::NEG_INFINITY,
            hi1: f64::INFINITY,
            lo2: f64::NEG_INFINITY,
            hi2: f64::INFINITY,
        }
    }

    pub fn is_bounded(&self) -> bool {
        [self.lo1, self.hi1, self.lo2, self.hi2].iter().all(|x| x.is_finite())
    }

    pub fn shifted(&self, d1: f64, d2: f64) -> Rect {
        Rect {
            lo1: self.lo1 + d1,
            hi1: self.hi1 + d1,
            lo2: self.lo2 + d2,
            hi2: self.hi2 + d2,
        }
    }
}

const GL6: [(f64, f64); 3] = [
    (0.171_324_492_379_170_5, -0.932_469_514_203_152_2),
    (0.360_761_573_048_138_4, -0.661_209_386_466_264_7),
    (0.467_913_934_572_690_4, -0.238_619_186_083_197_0),
];

const GL12: [(f64, f64); 6] = [
    (0.471_753_363_865_117_7e-1, -0.981_560_634_246_719_1),
    (0.106_939_325_995_318_3, -0.904_117_256_370_475_0),
    (0.160_078_328_543_346_4, -0.769_902_674_194_305_0),
    (0.203_167_426_723_065_9, -0.587_317_954_286_617_1),
    (0.233_492_536_538_354_7, -0.367_831_498_998_180_2),
    (0.249_147_045_813_402_9, -0.125_233_408_511_469_2),
];

const GL20: [(f64, f64); 10] = [
    (0.176_140_071_391_521_2e-1, -0.993_128_599_185_094_9),
    (0.406_014_298_003_869_4e-1, -0.963_971_927_277_913_8),
    (0.626_720_483_341_090_6e-1, -0.912_234_428_251_325_9),
    (0.832_767_415_767_047_5e-1, -0.839_116_971_822_218_8),
    (0.101_930_119_817_240_4, -0.746_331_906_460_150_8),
    (0.118_194_531_961_518_4, -0.636_053_680_726_515_0),
    (0.131_688_638_449_176_6, -0.510_867_001_950_827_1),
    (0.142_096_109_318_382_1, -0.373_706_088_715_419_6),
    (0.149_172_986_472_603_7, -0.227_785_851_141_645_1),
    (0.152_753_387_130_725_9, -0.765_265_211_334_973_3e-1),
];

/// P(X > h, Y > k) for a standard bivariate normal with correlation r.
fn bvnd(h: f64, k: f64, r: f64) -> f64 {
    let rule: &[(f64, f64)] = if r.abs() < 0.3 {
        &GL6
    } else if r.abs() < 0.75 {
        &GL12
    } else {
        &GL20
    };
    let two_pi = 2.0 * PI;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = r.asin();
        for &(w, x) in rule {
            for s in [x, -x] {
                let sn = (asr * (s + 1.0) / 2.0).sin();
                bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        return bvn * asr / (2.0 * two_pi) + std_normal_cdf(-h) * std_normal_cdf(-k);
    }
    let mut k = k;
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let a_s = (1.0 - r) * (1.0 + r);
        let mut a = a_s.sqrt();
        let bs = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        bvn = a
            * (-(bs / a_s + hk) / 2.0).exp()
            * (1.0 - c * (bs - a_s) * (1.0 - d * bs / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
        if hk > -160.0 {
            let b = bs.sqrt();
            bvn -= (-hk / 2.0).exp()
                * two_pi.sqrt()
                * std_normal_cdf(-b / a)
                * b
                * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for &(w, x) in rule {
            for s in [x, -x] {
                let xs = (a * (s + 1.0)).powi(2);
                let rs = (1.0 - xs).sqrt();
                bvn += a
                    * w
                    * ((-bs / (2.0 * xs) - hk / (1.0 + rs)).exp() / rs
                        - (-(bs / xs + hk) / 2.0).exp() * (1.0 + c * xs * (1.0 + d * xs)));
            }
        }
        bvn = -bvn / two_pi;
    }
    if r > 0.0 {
        bvn + std_normal_cdf(-h.max(k))
    } else {
        bvn = -bvn;
        if k > h {
            bvn += if h < 0.0 {
                std_normal_cdf(k) - std_normal_cdf(h)
            } else {
                std_normal_cdf(-h) - std_normal_cdf(-k)
            };
        }
        bvn
    }
}

/// P(X ≤ x, Y ≤ y) with infinite arguments handled exactly.
pub fn bvn_cdf(x: f64, y: f64, c: Correlation) -> f64 {
    if x == f64::NEG_INFINITY || y == f64::NEG_INFINITY {
        return 0.0;
    }
    if x == f64::INFINITY {
        return std_normal_cdf(y);
    }
    if y == f64::INFINITY {
        return std_normal_cdf(x);
    }
    bvnd(-x, -y, c.rho()).clamp(0.0, 1.0)
}

// Maps an interval to the side of the axis where CDF differences keep precision.
fn orient(lo: f64, hi: f64) -> (f64, f64, f64) {
    let flip = if lo == f64::NEG_INFINITY {
        false
    } else if hi == f64::INFINITY {
        true
    } else {
        lo + hi > 0.0
    };
    if flip {
        (-hi, -lo, -1.0)
    } else {
        (lo, hi, 1.0)
    }
}

/// Probability that a standard bivariate normal with correlation ρ falls in `r`.
pub fn bvn_rect_prob(r: &Rect, c: Correlation) -> f64 {
    if r.hi1 <= r.lo1 || r.hi2 <= r.lo2 {
        return 0.0;
    }
    let whole1 = r.lo1 == f64::NEG_INFINITY && r.hi1 == f64::INFINITY;
    let whole2 = r.lo2 == f64::NEG_INFINITY && r.hi2 == f64::INFINITY;
    if whole1 {
        return std_normal_interval(r.lo2, r.hi2);
    }
    if whole2 {
        return std_normal_interval(r.lo1, r.hi1);
    }
    let (l1, h1, s1) = orient(r.lo1, r.hi1);
    let (l2, h2, s2) = orient(r.lo2, r.hi2);
    let c = Correlation(c.rho() * s1 * s2);
    let p = bvn_cdf(h1, h2, c) - bvn_cdf(l1, h2, c) - bvn_cdf(h1, l2, c) + bvn_cdf(l1, l2, c);
    p.clamp(0.0, 1.0)
}

/// Standard bivariate normal density.
pub fn bvn_pdf(x: f64, y: f64, c: Correlation) -> f64 {
    let r = c.rho();
    let om = (1.0 - r) * (1.0 + r);
    let q = (x * x - 2.0 * r * x * y + y * y) / om;
    (-0.5 * q).exp() / (2.0 * PI * om.sqrt())
}
