//! Matrix exponential by scaling-and-squaring with a Padé(13) approximant.
//!
//! Dimension here is moderate (a few hundred at most) and the generators are
//! skew-Hermitian, so the plain Higham-style fixed-order variant is accurate;
//! unitarity of the results is asserted separately by the operator tests.

use crate::linalg::solve_linear;
use crate::{CMat, C64};

const THETA_13: f64 = 5.371_920_351_148_152;

const PADE_COEFFS: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

fn one_norm(a: &CMat) -> f64 {
    let mut max = 0.0f64;
    for j in 0..a.ncols() {
        let s: f64 = a.column(j).iter().map(|z| z.norm()).sum();
        max = max.max(s);
    }
    max
}

/// exp(A) for a square complex matrix.
pub fn matrix_exp(a: &CMat) -> CMat {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix_exp requires a square matrix");
    if n == 0 {
        return CMat::zeros((0, 0));
    }
    if n == 1 {
        let mut r = CMat::zeros((1, 1));
        r[[0, 0]] = a[[0, 0]].exp();
        return r;
    }

    let norm = one_norm(a);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let a_scaled = a.mapv(|z| z / C64::new((1u64 << s) as f64, 0.0));

    let mut result = pade13(&a_scaled);
    for _ in 0..s {
        result = result.dot(&result);
    }
    result
}

fn pade13(a: &CMat) -> CMat {
    let n = a.nrows();
    let c = |k: usize| C64::new(PADE_COEFFS[k], 0.0);
    let eye = CMat::eye(n);
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    let w1 = &a6 * c(13) + &a4 * c(11) + &a2 * c(9);
    let w2 = w1.dot(&a6) + &a6 * c(7) + &a4 * c(5) + &a2 * c(3) + &eye * c(1);
    let u = a.dot(&w2);

    let v1 = &a6 * c(12) + &a4 * c(10) + &a2 * c(8);
    let v = v1.dot(&a6) + &a6 * c(6) + &a4 * c(4) + &a2 * c(2) + &eye * c(0);

    let numer = &v + &u;
    let denom = &v - &u;
    solve_linear(denom, numer)
}
