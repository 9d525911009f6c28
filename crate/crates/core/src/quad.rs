//! Composite Gauss–Legendre quadrature.

use alloc::vec::Vec;
use core::f64::consts::PI;

/// Nodes and weights of an `order`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let mut nodes = Vec::with_capacity(order);
        let mut weights = Vec::with_capacity(order);
        let n = order as f64;
        for i in 0..order {
            // Newton iteration from the Chebyshev-like initial guess.
            let mut x = libm::cos(PI * (i as f64 + 0.75) / (n + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(order, x);
            if d != 0.0 {
                dp = d;
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(mid + half * t)).sum::<f64>() * half
    }

    /// Integrates over `[a, b]`, restarting the rule at every breakpoint that
    /// falls inside and capping piece length at `max_piece`.
    pub fn integrate_piecewise<F: FnMut(f64) -> f64>(
        &self,
        mut f: F,
        a: f64,
        b: f64,
        breaks: &[f64],
        max_piece: f64,
    ) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        let cuts = partition(a, b, breaks, max_piece);
        cuts.windows(2).map(|w| self.integrate(&mut f, w[0], w[1])).sum()
    }
}

/// Sorted cut points of `[a, b]` containing the interior breakpoints and
/// with consecutive gaps at most `max_piece`.
pub fn partition(a: f64, b: f64, breaks: &[f64], max_piece: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&t| t > a && t < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + y.abs()));
    let mut out = Vec::with_capacity(pts.len());
    for w in pts.windows(2) {
        let pieces = libm::ceil((w[1] - w[0]) / max_piece).max(1.0) as usize;
        let h = (w[1] - w[0]) / pieces as f64;
        for k in 0..pieces {
            out.push(w[0] + h * k as f64);
        }
    }
    out.push(b);
    out
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}
