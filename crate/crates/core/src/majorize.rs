//! Majorization, uniformization and T-transform chains.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Relative tolerance of [`majorizes`].
pub const MAJORIZATION_TOL: f64 = 1e-9;

/// One T-transform: move `tau` from coordinate `i` (the larger) to `j`.
/// Indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTransformStep {
    pub i: usize,
    pub j: usize,
    pub tau: f64,
}

/// Output of [`t_transform_decompose`].
///
/// The steps act on the descending rearrangement of `x`; `x_order[r]` is the
/// original index of the `r`-th largest entry of `x`, and likewise for `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub steps: Vec<TTransformStep>,
    pub x_order: Vec<usize>,
    pub y_order: Vec<usize>,
}

impl Decomposition {
    pub fn sorted_x(&self, x: &[f64]) -> Vec<f64> {
        self.x_order.iter().map(|&r| x[r]).collect()
    }

    pub fn sorted_y(&self, y: &[f64]) -> Vec<f64> {
        self.y_order.iter().map(|&r| y[r]).collect()
    }
}

fn descending_order(x: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
    order
}

fn sorted_descending(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// True when `x` majorizes `y`: equal totals and dominating prefix sums of
/// the descending rearrangements, up to [`MAJORIZATION_TOL`] relative slack.
pub fn majorizes(x: &[f64], y: &[f64]) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    let xs = sorted_descending(x);
    let ys = sorted_descending(y);
    let scale = xs.iter().chain(&ys).map(|v| v.abs()).sum::<f64>().max(1.0);
    let slack = MAJORIZATION_TOL * scale;
    let (mut px, mut py) = (0.0, 0.0);
    for (a, b) in xs.iter().zip(&ys) {
        px += a;
        py += b;
        if px - py < -slack {
            return Ok(false);
        }
    }
    Ok((px - py).abs() <= slack)
}

/// The constant vector with the same mean as `x`.
pub fn uniformize(x: &[f64]) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    vec![mean; x.len()]
}

/// Applies one T-transform. Requires `i != j` and `0 < tau <= z[i] - z[j]`.
pub fn apply_t_transform(z: &[f64], step: TTransformStep) -> Result<Vec<f64>> {
    let TTransformStep { i, j, tau } = step;
    if i >= z.len() || j >= z.len() || i == j {
        return Err(Error::InvalidParameter { name: "index", value: i.max(j) as f64 });
    }
    let gap = z[i] - z[j];
    if !(tau > 0.0 && tau <= gap) {
        return Err(Error::InvalidTau { tau, gap });
    }
    let mut out = z.to_vec();
    out[i] -= tau;
    out[j] += tau;
    Ok(out)
}

/// Builds a chain of at most `n - 1` T-transforms taking the descending
/// rearrangement of `x` to that of `y`.
///
/// Each step pairs the last surplus coordinate `i` with the first deficit
/// `j > i` and moves `min(z_i - y_i, y_j - z_j)`, which pins one of the two
/// coordinates to its target exactly.
pub fn t_transform_decompose(x: &[f64], y: &[f64]) -> Result<Decomposition> {
    if !majorizes(x, y)? {
        return Err(Error::NotMajorized);
    }
    let x_order = descending_order(x);
    let y_order = descending_order(y);
    let mut z: Vec<f64> = x_order.iter().map(|&r| x[r]).collect();
    let target: Vec<f64> = y_order.iter().map(|&r| y[r]).collect();
    let n = z.len();
    let scale = z.iter().chain(&target).fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-13 * scale;

    let mut steps = Vec::new();
    while steps.len() < n {
        let Some(i) = (0..n).rev().find(|&l| z[l] - target[l] > tol) else {
            break;
        };
        let Some(j) = (i + 1..n).find(|&l| target[l] - z[l] > tol) else {
            break;
        };
        let surplus = z[i] - target[i];
        let deficit = target[j] - z[j];
        let tau = surplus.min(deficit);
        if surplus <= deficit {
            z[i] = target[i];
            z[j] += tau;
        } else {
            z[i] -= tau;
            z[j] = target[j];
        }
        steps.push(TTransformStep { i, j, tau });
    }
    Ok(Decomposition { steps, x_order, y_order })
}
