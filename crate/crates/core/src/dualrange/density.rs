//! Stationary densities of the lead-time chain in the two explicit cases
//! `base = 0` and `extra = 0`, and quadrature checks against them.

use alloc::vec::Vec;

use super::{classify_region, ChainState, DualRangeParams, Region};
use crate::quad::GaussLegendre;
use crate::{Error, Result};

const ORDER: usize = 12;
const MAX_PIECE: f64 = 1.0;
/// Half-width of the box used for plane integrals.
const PLANE_HALF_WIDTH: f64 = 60.0;
/// Exponential tails are cut at this many mean lengths.
const TAIL: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DegenerateCase {
    Base0 { extra: f64, p: f64 },
    Extra0 { base: f64, p: f64 },
}

/// Piecewise-exponential stationary density.
#[derive(Debug, Clone)]
pub struct StationaryDensity {
    case: DegenerateCase,
    params: DualRangeParams,
    norm: f64,
    rule: GaussLegendre,
}

impl StationaryDensity {
    /// Density for `base = 0`; needs `extra > 0` and `0 < p < 1`.
    pub fn base0(extra: f64, p: f64) -> Result<Self> {
        if !(extra > 0.0 && extra.is_finite()) {
            return Err(Error::InvalidParameter { name: "extra", value: extra });
        }
        check_p(p)?;
        let e2 = libm::exp(2.0 * extra);
        let norm = e2 * p * (1.0 - p) * (1.0 - p) / ((2.0 - p) * e2 - p * libm::exp(2.0 * p * extra));
        Ok(Self {
            case: DegenerateCase::Base0 { extra, p },
            params: DualRangeParams::new(0.0, extra, p)?,
            norm,
            rule: GaussLegendre::new(ORDER),
        })
    }

    /// Density for `extra = 0`; needs `base > 0` and `0 < p < 1`.
    pub fn extra0(base: f64, p: f64) -> Result<Self> {
        if !(base > 0.0 && base.is_finite()) {
            return Err(Error::InvalidParameter { name: "base", value: base });
        }
        check_p(p)?;
        Ok(Self {
            case: DegenerateCase::Extra0 { base, p },
            params: DualRangeParams::new(base, 0.0, p)?,
            norm: p * (1.0 - p) / (2.0 * (1.0 + base)),
            rule: GaussLegendre::new(ORDER),
        })
    }

    pub fn case(&self) -> DegenerateCase {
        self.case
    }

    pub fn params(&self) -> &DualRangeParams {
        &self.params
    }

    /// Normalizing constant `C`.
    pub fn normalizer(&self) -> f64 {
        self.norm
    }

    /// Closed-form stationary mass of region D.
    pub fn closed_form_fd(&self) -> f64 {
        match self.case {
            DegenerateCase::Base0 { extra, p } => {
                let e2 = libm::exp(2.0 * extra);
                (1.0 - p) * e2 / ((2.0 - p) * e2 - p * libm::exp(2.0 * p * extra))
            }
            DegenerateCase::Extra0 { base, .. } => 1.0 / (2.0 * (1.0 + base)),
        }
    }

    pub fn density(&self, x: f64, y: f64) -> f64 {
        let c = self.norm;
        let exp = libm::exp;
        match self.case {
            DegenerateCase::Base0 { extra, p } => {
                let e = 2.0 * extra;
                if x <= 0.0 && y <= 0.0 {
                    c * exp(p * x + (1.0 - p) * y)
                } else if y >= 0.0 && x <= y {
                    c * exp(p * x - (1.0 + p) * y)
                } else if y >= 0.0 && x <= y + e {
                    c * exp(-(1.0 - p) * x - p * y)
                } else if x <= e {
                    c * exp(-(1.0 - p) * x + (1.0 - p) * y)
                } else {
                    c * exp(e - (2.0 - p) * x + (1.0 - p) * y)
                }
            }
            DegenerateCase::Extra0 { base, p } => {
                let b = 2.0 * base;
                if x <= 0.0 && y <= 0.0 {
                    c * exp(p * x + (1.0 - p) * y)
                } else if x <= y && y <= b {
                    c * exp(p * x - p * y)
                } else if x <= y {
                    c * exp(b + p * x - (1.0 + p) * y)
                } else if x <= b {
                    c * exp(-(1.0 - p) * x + (1.0 - p) * y)
                } else {
                    c * exp(b - (2.0 - p) * x + (1.0 - p) * y)
                }
            }
        }
    }

    fn region_of(&self, x: f64, y: f64) -> Option<Region> {
        classify_region(ChainState::new(x, y), &self.params).ok()
    }

    fn lines(&self) -> Lines {
        let (c, e) = (self.params.base(), self.params.extra());
        Lines {
            vertical: [0.0, 2.0 * e, 2.0 * c, 2.0 * (c + e)],
            horizontal: [0.0, 2.0 * c],
            diagonal: [0.0, -2.0 * e],
        }
    }

    /// Integral of the density over the chain region `region`, or over the
    /// whole plane when `None`.
    pub fn region_mass(&self, region: Option<Region>) -> f64 {
        let l = self.lines();
        let h = PLANE_HALF_WIDTH;
        let mut x_breaks: Vec<f64> = l.vertical.to_vec();
        for &hz in &l.horizontal {
            for &d in &l.diagonal {
                x_breaks.push(hz - d);
            }
        }
        self.rule.integrate_piecewise(
            |x| {
                let mut y_breaks: Vec<f64> = l.horizontal.to_vec();
                y_breaks.extend(l.diagonal.iter().map(|d| x + d));
                self.rule.integrate_piecewise(
                    |y| match region {
                        None => self.density(x, y),
                        Some(r) if self.region_of(x, y) == Some(r) => self.density(x, y),
                        Some(_) => 0.0,
                    },
                    -h,
                    h,
                    &y_breaks,
                    MAX_PIECE,
                )
            },
            -h,
            h,
            &x_breaks,
            MAX_PIECE,
        )
    }

    /// Density flowing into `(x, y)` in one step of the chain started from
    /// this density: the sum over source regions of the move density
    /// integrated against the density at the source point.
    pub fn kernel_inflow(&self, x: f64, y: f64) -> f64 {
        let p = self.params.p();
        let q = 1.0 - p;
        let l = self.lines();
        let src = |sx: f64, sy: f64, r: Region| -> f64 {
            if self.region_of(sx, sy) == Some(r) {
                self.density(sx, sy)
            } else {
                0.0
            }
        };
        let one_dim = |dir: (f64, f64), rate: f64, r: Region| -> f64 {
            let len = TAIL / rate;
            let breaks = l.ray_crossings((x, y), dir);
            self.rule.integrate_piecewise(
                |t| rate * libm::exp(-rate * t) * src(x + t * dir.0, y + t * dir.1, r),
                0.0,
                len,
                &breaks,
                MAX_PIECE,
            )
        };

        // A: the source lies straight above, C: straight to the right,
        // D: down and to the left along the diagonal.
        let from_a = one_dim((0.0, 1.0), q, Region::A);
        let from_c = one_dim((1.0, 0.0), p, Region::C);
        let from_d = one_dim((-1.0, -1.0), 1.0, Region::D);

        let mut outer = l.ray_crossings((x, y), (-1.0, -1.0));
        for &a in l.vertical.iter().chain(&l.horizontal) {
            for &d in &l.diagonal {
                outer.push(x + d - a);
                outer.push(y - d - a);
            }
        }
        // B: source (x - w, y - w + v).
        let from_b = self.rule.integrate_piecewise(
            |w| {
                let (sx, sy) = (x - w, y - w);
                let breaks = l.ray_crossings((sx, sy), (0.0, 1.0));
                libm::exp(-w)
                    * self.rule.integrate_piecewise(
                        |v| q * libm::exp(-q * v) * src(sx, sy + v, Region::B),
                        0.0,
                        TAIL / q,
                        &breaks,
                        MAX_PIECE,
                    )
            },
            0.0,
            TAIL,
            &outer,
            MAX_PIECE,
        );
        // E: source (x - w + u, y - w).
        let from_e = self.rule.integrate_piecewise(
            |w| {
                let (sx, sy) = (x - w, y - w);
                let breaks = l.ray_crossings((sx, sy), (1.0, 0.0));
                libm::exp(-w)
                    * self.rule.integrate_piecewise(
                        |u| p * libm::exp(-p * u) * src(sx + u, sy, Region::E),
                        0.0,
                        TAIL / p,
                        &breaks,
                        MAX_PIECE,
                    )
            },
            0.0,
            TAIL,
            &outer,
            MAX_PIECE,
        );
        from_a + from_b + from_c + from_d + from_e
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter { name: "p", value: p });
    }
    Ok(())
}

/// Lines on which the density or the region partition can change.
struct Lines {
    vertical: [f64; 4],
    horizontal: [f64; 2],
    /// Offsets `d` of the lines `y - x = d`.
    diagonal: [f64; 2],
}

impl Lines {
    /// Parameters `t >= 0` at which `origin + t dir` meets one of the lines.
    fn ray_crossings(&self, origin: (f64, f64), dir: (f64, f64)) -> Vec<f64> {
        let (x, y) = origin;
        let mut out = Vec::new();
        if dir.0 != 0.0 {
            out.extend(self.vertical.iter().map(|a| (a - x) / dir.0));
        }
        if dir.1 != 0.0 {
            out.extend(self.horizontal.iter().map(|h| (h - y) / dir.1));
        }
        let slope = dir.1 - dir.0;
        if slope != 0.0 {
            out.extend(self.diagonal.iter().map(|d| (d - (y - x)) / slope));
        }
        out.retain(|t| *t > 0.0);
        out
    }
}

/// Stationary density at `(x, y)` when `base = 0`.
pub fn stationary_density_base0(x: f64, y: f64, extra: f64, p: f64) -> Result<f64> {
    Ok(StationaryDensity::base0(extra, p)?.density(x, y))
}

/// Stationary density at `(x, y)` when `extra = 0`.
pub fn stationary_density_extra0(x: f64, y: f64, base: f64, p: f64) -> Result<f64> {
    Ok(StationaryDensity::extra0(base, p)?.density(x, y))
}
