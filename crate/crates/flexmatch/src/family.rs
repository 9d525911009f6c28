//! One-parameter families of dual service range vectors with a fixed mean.
//!
//! | kind        | varied in `alpha`                     | implied                        |
//! |-------------|---------------------------------------|--------------------------------|
//! | fixed-base  | `p = hi - alpha (hi - lo)`            | `extra = (mean - base) / p`    |
//! | fixed-extra | `p = lo + alpha (hi - lo)`            | `base = mean - p extra`        |
//! | fixed-p     | `base = hi - alpha (hi - lo)`         | `extra = (mean - base) / p`    |

use flexmatch_core::geom::ServiceRanges;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::ConfigError;

/// Slack under which a slightly negative implied parameter is read as zero.
const ROUNDING_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    FixedBase,
    FixedExtra,
    FixedP,
}

impl FamilyKind {
    pub fn label(self) -> &'static str {
        match self {
            FamilyKind::FixedBase => "fixed-base",
            FamilyKind::FixedExtra => "fixed-extra",
            FamilyKind::FixedP => "fixed-p",
        }
    }
}

/// `lo`/`hi` bound `p` for the fixed-base and fixed-extra families and
/// `base` for the fixed-p family; `fixed` is the held parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub mean_range: f64,
    pub lo: f64,
    pub hi: f64,
    pub fixed: f64,
}

/// Dual-range parameters at one value of `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyPoint {
    pub base: f64,
    pub extra: f64,
    pub p: f64,
}

impl FamilySpec {
    pub const fn new(kind: FamilyKind, mean_range: f64, lo: f64, hi: f64, fixed: f64) -> Self {
        Self { kind, mean_range, lo, hi, fixed }
    }

    pub fn label(&self) -> &'static str {
        self.kind.label()
    }

    pub fn params_at(&self, alpha: f64) -> Result<FamilyPoint, ConfigError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(ConfigError::new("alphas", format!("{alpha} is outside [0, 1]")));
        }
        let r = self.mean_range;
        let (base, extra, p) = match self.kind {
            FamilyKind::FixedBase => {
                let p = self.hi - alpha * (self.hi - self.lo);
                if !(p > 0.0) {
                    return Err(ConfigError::new("lo", format!("p({alpha}) = {p} must be positive")));
                }
                (self.fixed, (r - self.fixed) / p, p)
            }
            FamilyKind::FixedExtra => {
                let p = self.lo + alpha * (self.hi - self.lo);
                (r - p * self.fixed, self.fixed, p)
            }
            FamilyKind::FixedP => {
                let base = self.hi - alpha * (self.hi - self.lo);
                if !(self.fixed > 0.0) {
                    return Err(ConfigError::new("fixed", format!("p = {} must be positive", self.fixed)));
                }
                (base, (r - base) / self.fixed, self.fixed)
            }
        };
        let base = snap(base);
        let extra = snap(extra);
        if !(0.0..=1.0).contains(&p) {
            return Err(ConfigError::new("lo", format!("p({alpha}) = {p} is outside [0, 1]")));
        }
        if !(base >= 0.0 && base.is_finite()) {
            return Err(ConfigError::new("mean_range", format!("implied base({alpha}) = {base} is negative")));
        }
        if !(extra >= 0.0 && extra.is_finite()) {
            return Err(ConfigError::new("mean_range", format!("implied extra({alpha}) = {extra} is negative")));
        }
        Ok(FamilyPoint { base, extra, p })
    }

    /// Checks the family at both ends of `[0, 1]`; every map is linear or
    /// monotone in `alpha`, so the endpoints decide admissibility.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for v in [self.mean_range, self.lo, self.hi, self.fixed] {
            if !v.is_finite() {
                return Err(ConfigError::new("mean_range", "family values must be finite".into()));
            }
        }
        if self.lo > self.hi {
            return Err(ConfigError::new("lo", format!("lo = {} exceeds hi = {}", self.lo, self.hi)));
        }
        self.params_at(0.0)?;
        self.params_at(1.0)?;
        Ok(())
    }
}

fn snap(v: f64) -> f64 {
    if v < 0.0 && v > -ROUNDING_SLACK {
        0.0
    } else {
        v
    }
}

/// `n` ranges `base + extra * 1{u_i < p}` from the given uniforms, so that
/// different values of `alpha` can share Bernoulli draws.
pub fn ranges_from_uniforms(spec: &FamilySpec, alpha: f64, uniforms: &[f64]) -> Result<ServiceRanges, ConfigError> {
    let pt = spec.params_at(alpha)?;
    let values = uniforms.iter().map(|&u| if u < pt.p { pt.base + pt.extra } else { pt.base }).collect();
    ServiceRanges::tight(values).map_err(|e| ConfigError::new("families", e.to_string()))
}

/// `n` i.i.d. ranges from the family at `alpha`.
pub fn family_ranges<R: Rng + ?Sized>(
    spec: &FamilySpec,
    alpha: f64,
    n: usize,
    rng: &mut R,
) -> Result<ServiceRanges, ConfigError> {
    let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    ranges_from_uniforms(spec, alpha, &u)
}

/// Families used for the uniformity sweep in dimension `k` (1, 2 or 3).
pub fn family_presets(k: usize) -> Option<[FamilySpec; 3]> {
    use FamilyKind::*;
    match k {
        1 => Some([
            FamilySpec::new(FixedBase, 1.0, 0.2, 0.8, 0.5),
            FamilySpec::new(FixedExtra, 1.0, 0.01, 0.5, 0.6),
            FamilySpec::new(FixedP, 1.0, 0.5, 1.0, 0.3),
        ]),
        2 => Some([
            FamilySpec::new(FixedBase, 0.15, 0.2, 0.8, 0.025),
            FamilySpec::new(FixedExtra, 0.15, 0.0, 0.5, 0.3),
            FamilySpec::new(FixedP, 0.15, 0.006, 0.12, 0.5),
        ]),
        3 => Some([
            FamilySpec::new(FixedBase, 0.1, 0.2, 0.8, 0.02),
            FamilySpec::new(FixedExtra, 0.1, 0.0, 0.5, 0.2),
            FamilySpec::new(FixedP, 0.1, 0.005, 0.1, 0.5),
        ]),
        _ => None,
    }
}

/// Families for the volume-versus-radius comparison at `k = 2`:
/// `(volume, radius)`.
pub fn radius_volume_presets() -> ([FamilySpec; 3], [FamilySpec; 3]) {
    use FamilyKind::*;
    (
        [
            FamilySpec::new(FixedBase, 0.127, 0.2, 0.8, 0.0),
            FamilySpec::new(FixedExtra, 0.15, 0.0, 0.5, 0.09),
            FamilySpec::new(FixedP, 0.21, 0.011, 0.191, 0.5),
        ],
        [
            FamilySpec::new(FixedBase, 0.3, 0.2, 0.8, 0.0),
            FamilySpec::new(FixedExtra, 0.4, 0.0, 0.5, 0.8),
            FamilySpec::new(FixedP, 0.4, 0.02, 0.36, 0.5),
        ],
    )
}
