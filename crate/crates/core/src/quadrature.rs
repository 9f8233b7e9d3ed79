//! Adaptive Gauss–Kronrod (7/15) integration on finite intervals, plus the
//! end-corrected trapezoid (Gregory) weights used for tabulated functions.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

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
// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_SEGMENTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Segment { a, b, value, error }
}

/// Globally adaptive integration of `f` over `[a, b]`; stops when the summed
/// error estimate is below `max(abs_tol, rel_tol · |value|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "integration limits must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
        });
    }
    let first = gauss_kronrod(&f, a, b);
    if !first.value.is_finite() {
        return Err(Error::Numerical(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    let mut heap = BinaryHeap::new();
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    while error > abs_tol.max(rel_tol * value.abs()) {
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::Numerical(format!(
                "quadrature did not converge on [{a}, {b}]: error {error:e}"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let left = gauss_kronrod(&f, worst.a, mid);
        let right = gauss_kronrod(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Re-sum occasionally so that cancellation in the running totals
        // cannot stall the loop.
        if heap.len() % 64 == 0 {
            value = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
        }
    }
    value = heap.iter().map(|s| s.value).sum();
    error = heap.iter().map(|s| s.error).sum();
    Ok(Integral { value, error })
}

/// End weights of the Gregory (end-corrected trapezoid) rule, indexed by the
/// number of corrected points `r`. With `r` corrected points at each end the
/// rule integrates polynomials of degree `< r` exactly on a uniform grid.
const GREGORY: [&[f64]; 8] = [
    &[1.0 / 2.0],
    &[5.0 / 12.0, 13.0 / 12.0],
    &[3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0],
    &[251.0 / 720.0, 299.0 / 240.0, 211.0 / 240.0, 739.0 / 720.0],
    &[
        95.0 / 288.0,
        317.0 / 240.0,
        23.0 / 30.0,
        793.0 / 720.0,
        157.0 / 160.0,
    ],
    &[
        19087.0 / 60480.0,
        84199.0 / 60480.0,
        18869.0 / 30240.0,
        37621.0 / 30240.0,
        55031.0 / 60480.0,
        61343.0 / 60480.0,
    ],
    &[
        5257.0 / 17280.0,
        22081.0 / 15120.0,
        54851.0 / 120960.0,
        103.0 / 70.0,
        89437.0 / 120960.0,
        16367.0 / 15120.0,
        23917.0 / 24192.0,
    ],
    &[
        1070017.0 / 3628800.0,
        5537111.0 / 3628800.0,
        103613.0 / 403200.0,
        261115.0 / 145152.0,
        298951.0 / 725760.0,
        515677.0 / 403200.0,
        3349879.0 / 3628800.0,
        3662753.0 / 3628800.0,
    ],
];

/// Highest correction order used.
pub const GREGORY_ORDER: usize = 8;

/// End weights for integrating over `intervals` grid cells (`intervals + 1`
/// samples): the highest order whose two ends do not overlap.
pub fn gregory_end_weights(intervals: usize) -> &'static [f64] {
    let r = ((intervals + 1) / 2).clamp(1, GREGORY_ORDER);
    GREGORY[r - 1]
}

/// Weight of sample `k` out of `0..=intervals` (grid step excluded).
pub fn gregory_weight(k: usize, intervals: usize) -> f64 {
    let ends = gregory_end_weights(intervals);
    let from_end = k.min(intervals - k);
    ends.get(from_end).copied().unwrap_or(1.0)
}

/// Gregory-rule integral of uniformly spaced samples.
pub fn gregory_sum(samples: &[f64], step: f64) -> f64 {
    if samples.len() < 2 {
        return 0.0;
    }
    let m = samples.len() - 1;
    let ends = gregory_end_weights(m);
    let r = ends.len();
    let mut total: f64 = if m + 1 > 2 * r {
        samples[r..=m - r].iter().sum()
    } else {
        0.0
    };
    for (k, w) in ends.iter().enumerate() {
        if k == m - k {
            total += w * samples[k];
        } else {
            total += w * (samples[k] + samples[m - k]);
        }
    }
    total * step
}

/// Nodes and weights of the `points`-point Gauss–Legendre rule on `[-1, 1]`,
/// by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(points: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; points];
    let mut weights = vec![0.0; points];
    let m = points as f64;
    for i in 0..points.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=points {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[points - 1 - i] = x;
        weights[i] = w;
        weights[points - 1 - i] = w;
    }
    (nodes, weights)
}
