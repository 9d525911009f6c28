//! The dual-service-range model.
//!
//! Every supply node has range `base`, and an independent fraction `p` of
//! them has the larger range `base + extra`. In one dimension the maximum
//! matching is driven by the lead-time chain `psi = (x, y)`:
//!
//! - `x = n(u - v_F) + base + extra`, the demand's lead over the left edge of
//!   the active flexible supply's window;
//! - `y = n(u - v_NF) + base`, the same for the active inflexible supply.
//!
//! The plane splits into five regions, each with its own move:
//!
//! | region | condition | move |
//! |---|---|---|
//! | A | `y >= 2 base`, `x <= y + 2 extra` | `(0, -v)` |
//! | B | `0 <= y <= 2 base`, `x <= y + 2 extra` | `(w, w - v)` |
//! | C | `x >= 2(base + extra)`, `y <= x - 2 extra` | `(-u, 0)` |
//! | D | `x <= 0`, `y <= 0` | `(w, w)` |
//! | E | `0 <= x <= 2(base + extra)`, `y <= (x - 2 extra)+` | `(w - u, w)` |
//!
//! with `u ~ Exp(p)`, `v ~ Exp(1 - p)` and `w ~ Exp(1)`.

mod density;
mod formulas;
mod generative;

pub use density::{stationary_density_base0, stationary_density_extra0, DegenerateCase, StationaryDensity};
pub use formulas::{
    base0_fraction, closed_form_base0, closed_form_extra0, lower_bound_q, lower_bound_q_limit, lower_bound_sup,
    upper_bound, LOWER_BOUND_GRID,
};
pub use generative::{generative_process, GenerativeStats, MatchedPair};

use rand::Rng;

use crate::sampling::exponential;
use crate::{Error, Result};

/// Smallest chain length accepted by [`simulate_frequencies`].
pub const MIN_STEPS: usize = 10_000;

/// Parameters `(base, extra, p)` of the dual-service-range model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualRangeParams {
    base: f64,
    extra: f64,
    p: f64,
}

impl DualRangeParams {
    pub fn new(base: f64, extra: f64, p: f64) -> Result<Self> {
        if !(base.is_finite() && base >= 0.0) {
            return Err(Error::InvalidParameter { name: "base", value: base });
        }
        if !(extra.is_finite() && extra >= 0.0) {
            return Err(Error::InvalidParameter { name: "extra", value: extra });
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter { name: "p", value: p });
        }
        Ok(Self { base, extra, p })
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn extra(&self) -> f64 {
        self.extra
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Mean service range `base + p * extra`.
    pub fn mean_range(&self) -> f64 {
        self.base + self.p * self.extra
    }
}

/// State `(x, y)` of the lead-time chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainState {
    pub x: f64,
    pub y: f64,
}

impl ChainState {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// State with all three active agents at the origin.
    pub fn start(params: &DualRangeParams) -> Self {
        Self { x: params.base + params.extra, y: params.base }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    A,
    B,
    C,
    D,
    E,
}

/// What a step does to the agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEvent {
    /// A demand node is matched (regions B and E).
    Match,
    /// The demand node is skipped unmatched (region D).
    SkipDemand,
    /// A supply node is discarded unmatched (regions A and C).
    DiscardSupply,
}

impl Region {
    pub const ALL: [Region; 5] = [Region::A, Region::B, Region::C, Region::D, Region::E];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> char {
        ['A', 'B', 'C', 'D', 'E'][self.index()]
    }

    pub fn event(self) -> StepEvent {
        match self {
            Region::B | Region::E => StepEvent::Match,
            Region::D => StepEvent::SkipDemand,
            Region::A | Region::C => StepEvent::DiscardSupply,
        }
    }
}

/// Region of `state`. Shared boundaries resolve in the order D, B, A, E, C.
pub fn classify_region(state: ChainState, params: &DualRangeParams) -> Result<Region> {
    let ChainState { x, y } = state;
    let (c, e) = (params.base, params.extra);
    if !(x.is_finite() && y.is_finite()) {
        return Err(Error::Unclassifiable { x, y });
    }
    let region = if x <= 0.0 && y <= 0.0 {
        Region::D
    } else if (0.0..=2.0 * c).contains(&y) && x <= y + 2.0 * e {
        Region::B
    } else if y >= 2.0 * c && x <= y + 2.0 * e {
        Region::A
    } else if (0.0..=2.0 * (c + e)).contains(&x) && y <= (x - 2.0 * e).max(0.0) {
        Region::E
    } else if x >= 2.0 * (c + e) && y <= x - 2.0 * e {
        Region::C
    } else {
        return Err(Error::Unclassifiable { x, y });
    };
    Ok(region)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub next: ChainState,
    pub region: Region,
    pub event: StepEvent,
}

/// Advances the chain by one step.
pub fn step<R: Rng + ?Sized>(state: ChainState, params: &DualRangeParams, rng: &mut R) -> Result<StepOutcome> {
    let region = classify_region(state, params)?;
    let p = params.p;
    let needs_u = matches!(region, Region::C | Region::E);
    let needs_v = matches!(region, Region::A | Region::B);
    if (needs_u && p <= 0.0) || (needs_v && p >= 1.0) {
        return Err(Error::DegenerateFlexibility { p, region: region.label() });
    }
    let (dx, dy) = match region {
        Region::A => (0.0, -exponential(rng, 1.0 - p)),
        Region::B => {
            let w = exponential(rng, 1.0);
            (w, w - exponential(rng, 1.0 - p))
        }
        Region::C => (-exponential(rng, p), 0.0),
        Region::D => {
            let w = exponential(rng, 1.0);
            (w, w)
        }
        Region::E => {
            let w = exponential(rng, 1.0);
            (w - exponential(rng, p), w)
        }
    };
    Ok(StepOutcome { next: ChainState { x: state.x + dx, y: state.y + dy }, region, event: region.event() })
}

/// Long-run fraction of steps spent in each region.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RegionFrequencies {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl RegionFrequencies {
    pub fn from_counts(counts: &[u64; 5]) -> Self {
        let total: u64 = counts.iter().sum();
        let t = total.max(1) as f64;
        let f = |i: usize| counts[i] as f64 / t;
        Self { a: f(0), b: f(1), c: f(2), d: f(3), e: f(4) }
    }

    pub fn get(&self, region: Region) -> f64 {
        match region {
            Region::A => self.a,
            Region::B => self.b,
            Region::C => self.c,
            Region::D => self.d,
            Region::E => self.e,
        }
    }

    pub fn sum(&self) -> f64 {
        self.a + self.b + self.c + self.d + self.e
    }

    /// `F_A + F_C - F_D`, which vanishes under stationarity.
    pub fn balance_gap(&self) -> f64 {
        self.a + self.c - self.d
    }
}

/// Default burn-in: a tenth of the run.
pub fn default_burn_in(steps: usize) -> usize {
    steps / 10
}

/// Runs the chain from [`ChainState::start`] for `steps` steps and returns
/// the occupation fractions of the steps after `burn_in`.
pub fn simulate_frequencies<R: Rng + ?Sized>(
    params: &DualRangeParams,
    steps: usize,
    burn_in: usize,
    rng: &mut R,
) -> Result<RegionFrequencies> {
    if steps < MIN_STEPS {
        return Err(Error::InvalidParameter { name: "steps", value: steps as f64 });
    }
    if burn_in >= steps {
        return Err(Error::InvalidParameter { name: "burn_in", value: burn_in as f64 });
    }
    let mut state = ChainState::start(params);
    let mut counts = [0u64; 5];
    for t in 0..steps {
        let out = step(state, params, rng)?;
        if t >= burn_in {
            counts[out.region.index()] += 1;
        }
        state = out.next;
    }
    Ok(RegionFrequencies::from_counts(&counts))
}

/// Matched fractions per supply node: total, flexible and inflexible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedFractions {
    pub total: f64,
    pub flex: f64,
    pub nonflex: f64,
}

/// Converts region frequencies into matched fractions:
/// `total = (1 - 2 F_D) / (1 - F_D)`, `flex = p F_E / (F_E + F_C)` and
/// `nonflex = (1 - p) F_B / (F_B + F_A)`.
pub fn matched_fractions(freqs: &RegionFrequencies, p: f64) -> Result<MatchedFractions> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter { name: "p", value: p });
    }
    let not_d = 1.0 - freqs.d;
    if not_d <= 0.0 {
        return Err(Error::ZeroDenominator("the complement of D"));
    }
    let flex_mass = freqs.e + freqs.c;
    if flex_mass <= 0.0 {
        return Err(Error::ZeroDenominator("C and E"));
    }
    let nonflex_mass = freqs.b + freqs.a;
    if nonflex_mass <= 0.0 {
        return Err(Error::ZeroDenominator("A and B"));
    }
    Ok(MatchedFractions {
        total: ((1.0 - 2.0 * freqs.d) / not_d).clamp(0.0, 1.0),
        flex: p * freqs.e / flex_mass,
        nonflex: (1.0 - p) * freqs.b / nonflex_mass,
    })
}

/// Limiting matched fraction of the model.
///
/// For `p` in `{0, 1}` every supply node has the same range and the closed
/// form is used; otherwise the chain is simulated for `steps` steps with the
/// default burn-in.
pub fn formula_fraction<R: Rng + ?Sized>(params: &DualRangeParams, steps: usize, rng: &mut R) -> Result<f64> {
    if params.p <= 0.0 {
        return Ok(closed_form_extra0(params.base));
    }
    if params.p >= 1.0 {
        return Ok(closed_form_extra0(params.base + params.extra));
    }
    let freqs = simulate_frequencies(params, steps, default_burn_in(steps), rng)?;
    Ok(matched_fractions(&freqs, params.p)?.total)
}
