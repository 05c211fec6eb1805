//! Globally adaptive Gauss–Kronrod (7/15) integration on finite intervals.
//!
//! The interval is first split at the caller's breakpoints and into
//! `initial_pieces` equal parts, so narrow peaks on wide domains are not
//! missed by the first rule application. The subinterval with the largest
//! error estimate is bisected until the summed estimate meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];

// Gauss weights for the odd Kronrod nodes (indices 1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Hard cap on integrand evaluations.
    pub max_evals: usize,
    pub initial_pieces: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            rel_tol: 0.0,
            max_evals: 1_000_000,
            initial_pieces: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let dx = h * x;
        let pair = f(c - dx) + f(c + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]`, splitting at every breakpoint inside the interval.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter {
            name: "domain",
            reason: format!("need finite a < b, got [{a}, {b}]"),
        });
    }
    let mut cuts: Vec<f64> = vec![a, b];
    let pieces = opts.initial_pieces.max(1);
    cuts.extend((1..pieces).map(|k| a + (b - a) * k as f64 / pieces as f64));
    cuts.extend(breakpoints.iter().copied().filter(|x| *x > a && *x < b));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in cuts.windows(2) {
        let (value, error) = gk15(&f, w[0], w[1]);
        evaluations += 15;
        heap.push(Piece {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }

    loop {
        // re-summing keeps the totals free of accumulated cancellation
        let value: f64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::QuadratureNonConvergence {
                error_estimate: error,
                evaluations,
            });
        }
        if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            return Ok(QuadResult {
                value,
                error_estimate: error,
                evaluations,
            });
        }
        if evaluations + 30 > opts.max_evals {
            return Err(Error::QuadratureNonConvergence {
                error_estimate: error,
                evaluations,
            });
        }
        let worst = heap.pop().expect("at least one piece");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval exhausted at f64 resolution
            return Err(Error::QuadratureNonConvergence {
                error_estimate: error,
                evaluations,
            });
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk15(&f, lo, hi);
            heap.push(Piece {
                a: lo,
                b: hi,
                value,
                error,
            });
        }
        evaluations += 30;
    }
}
