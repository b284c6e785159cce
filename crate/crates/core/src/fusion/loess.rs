//! Locally weighted quadratic regression over an evenly indexed series.
//!
//! Each index `i` gets its own fit over the `q = ⌈bandwidth·n⌉` nearest
//! indices (ties resolved toward lower indices), weighted with the tricube
//! kernel on `|j − i| / h`, where `h` is one index past the farthest
//! selected neighbour. Every selected neighbour therefore has a positive
//! weight and the kernel reaches zero at the first excluded index.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Smallest series a quadratic can be fitted to.
pub const MIN_POINTS: usize = 3;

/// Tricube kernel `(1 − |u|³)³` on `|u| < 1`, zero elsewhere.
#[inline]
pub fn tricube(u: f64) -> f64 {
    let a = libm::fabs(u);
    if a >= 1.0 {
        0.0
    } else {
        let t = 1.0 - a * a * a;
        t * t * t
    }
}

/// Number of neighbours used per local fit.
pub fn neighbourhood_size(n: usize, bandwidth: f64) -> usize {
    let q = libm::ceil(bandwidth * n as f64 * (1.0 - 1e-12)) as usize;
    q.clamp(MIN_POINTS, n)
}

/// Inclusive index window `[lo, hi]` of `q` nearest neighbours of `i`.
#[inline]
pub fn window(i: usize, n: usize, q: usize) -> (usize, usize) {
    let left = q / 2;
    let lo = i.saturating_sub(left);
    let hi = lo + q - 1;
    if hi > n - 1 {
        (n - q, n - 1)
    } else {
        (lo, hi)
    }
}

/// Weighted quadratic fit evaluated at the window centre `i`.
fn local_fit(values: &[f64], i: usize, lo: usize, hi: usize) -> Result<f64> {
    let h = ((i - lo).max(hi - i) + 1) as f64;
    // moments of the scaled abscissa v = (j - i) / h
    let mut s = [0.0f64; 5];
    let mut r = [0.0f64; 3];
    for (j, &y) in values.iter().enumerate().take(hi + 1).skip(lo) {
        let v = (j as f64 - i as f64) / h;
        let w = tricube(v);
        if w == 0.0 {
            continue;
        }
        let v2 = v * v;
        s[0] += w;
        s[1] += w * v;
        s[2] += w * v2;
        s[3] += w * v2 * v;
        s[4] += w * v2 * v2;
        r[0] += w * y;
        r[1] += w * v * y;
        r[2] += w * v2 * y;
    }
    if s[0] <= 0.0 {
        return Err(Error::ZeroWeights(i));
    }
    solve_intercept(&s, &r).ok_or(Error::Singular(i))
}

/// Cholesky solve of the 3×3 moment system; returns the constant term.
fn solve_intercept(s: &[f64; 5], r: &[f64; 3]) -> Option<f64> {
    const PIVOT_RTOL: f64 = 1e-12;
    let scale = s[0];
    let l00 = libm::sqrt(s[0]);
    let l10 = s[1] / l00;
    let l20 = s[2] / l00;
    let d11 = s[2] - l10 * l10;
    if d11 <= PIVOT_RTOL * scale {
        return None;
    }
    let l11 = libm::sqrt(d11);
    let l21 = (s[3] - l20 * l10) / l11;
    let d22 = s[4] - l20 * l20 - l21 * l21;
    if d22 <= PIVOT_RTOL * scale {
        return None;
    }
    let l22 = libm::sqrt(d22);

    let z0 = r[0] / l00;
    let z1 = (r[1] - l10 * z0) / l11;
    let z2 = (r[2] - l20 * z0 - l21 * z1) / l22;

    let c2 = z2 / l22;
    let c1 = (z1 - l21 * c2) / l11;
    let c0 = (z0 - l10 * c1 - l20 * c2) / l00;
    Some(c0)
}

/// Local quadratic regression of `values` against their index.
pub fn smooth_series(values: &[f64], bandwidth: f64) -> Result<Vec<f64>> {
    let n = values.len();
    if n < MIN_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_POINTS,
            got: n,
        });
    }
    if !(bandwidth > 0.0 && bandwidth <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "bandwidth",
            reason: "must lie in (0, 1]",
        });
    }
    let q = neighbourhood_size(n, bandwidth);
    (0..n)
        .map(|i| {
            let (lo, hi) = window(i, n, q);
            local_fit(values, i, lo, hi)
        })
        .collect()
}
