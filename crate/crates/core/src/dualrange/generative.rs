//! The left-to-right generative process on `[0, 1]`.

use alloc::vec::Vec;

use rand::Rng;

use super::{DualRangeParams, Region};
use crate::sampling::exponential;
use crate::{Error, Result};

/// One matched pair, by position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair {
    pub supply: f64,
    pub demand: f64,
    pub flexible: bool,
}

/// Counts and realized points of one run of [`generative_process`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GenerativeStats {
    pub matched_total: usize,
    pub matched_flex: usize,
    pub matched_nonflex: usize,
    pub advanced_demand: usize,
    pub advanced_flex: usize,
    pub advanced_nonflex: usize,
    /// Number of steps until every stream is exhausted.
    pub steps: usize,
    /// Steps spent in each case, indexed by [`Region::index`].
    pub case_counts: [usize; 5],
    pub demand: Vec<f64>,
    pub flexible: Vec<f64>,
    pub inflexible: Vec<f64>,
    pub pairs: Vec<MatchedPair>,
}

/// A Poisson stream on `[0, 1]`; positions past 1 read as `+inf`.
struct Stream {
    gap_rate: f64,
    at: f64,
}

impl Stream {
    fn new<R: Rng + ?Sized>(rate: f64, n: f64, rng: &mut R) -> Self {
        let mut s = Self { gap_rate: rate * n, at: 0.0 };
        s.advance(rng);
        s
    }

    fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        if self.at.is_finite() {
            self.at += exponential(rng, self.gap_rate);
            if self.at > 1.0 {
                self.at = f64::INFINITY;
            }
        }
    }
}

enum Place {
    Behind,
    InRange,
    Ahead,
}

fn place(supply: f64, demand: f64, reach: f64) -> Place {
    let d = supply - demand;
    if d < -reach {
        Place::Behind
    } else if d > reach {
        Place::Ahead
    } else if d.abs() <= reach {
        Place::InRange
    } else {
        // both at infinity: nothing left to meet
        Place::Ahead
    }
}

/// Scans `[0, 1]` left to right with demand, flexible and inflexible Poisson
/// streams of rates `n`, `p n` and `(1 - p) n`, matching greedily.
///
/// At every step the supply node whose deadline (right end of its window) is
/// earlier has priority; ties go to the inflexible node. With both supply
/// nodes strictly ahead of the demand the demand is skipped (case D).
/// Otherwise the priority node is discarded when behind (A or C) and matched
/// when in range (B or E); when it is ahead the other node is treated the
/// same way.
/// Windows have half-width `range / n`, so the realized pairs coincide with
/// the earliest-deadline greedy matching of the induced interval graph.
pub fn generative_process<R: Rng + ?Sized>(params: &DualRangeParams, n: usize, rng: &mut R) -> Result<GenerativeStats> {
    let p = params.p();
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter { name: "p", value: p });
    }
    if n == 0 {
        return Err(Error::InvalidParameter { name: "n", value: 0.0 });
    }
    let scale = n as f64;
    let reach_nf = params.base() / scale;
    let reach_f = (params.base() + params.extra()) / scale;

    let mut demand = Stream::new(1.0, scale, rng);
    let mut flex = Stream::new(p, scale, rng);
    let mut nonflex = Stream::new(1.0 - p, scale, rng);
    let mut stats = GenerativeStats::default();

    while demand.at.is_finite() || flex.at.is_finite() || nonflex.at.is_finite() {
        let (u, vf, vnf) = (demand.at, flex.at, nonflex.at);
        let pf = place(vf, u, reach_f);
        let pnf = place(vnf, u, reach_nf);
        let flex_first = vf + reach_f < vnf + reach_nf;
        let region = match (pf, pnf, flex_first) {
            (Place::Ahead, Place::Ahead, _) => Region::D,
            (_, Place::Behind, false) | (Place::Ahead, Place::Behind, true) => Region::A,
            (_, Place::InRange, false) | (Place::Ahead, Place::InRange, true) => Region::B,
            (Place::Behind, _, true) | (Place::Behind, Place::Ahead, false) => Region::C,
            (Place::InRange, _, true) | (Place::InRange, Place::Ahead, false) => Region::E,
        };
        stats.steps += 1;
        stats.case_counts[region.index()] += 1;
        match region {
            Region::A => {
                stats.inflexible.push(vnf);
                stats.advanced_nonflex += 1;
                nonflex.advance(rng);
            }
            Region::C => {
                stats.flexible.push(vf);
                stats.advanced_flex += 1;
                flex.advance(rng);
            }
            Region::D => {
                stats.demand.push(u);
                stats.advanced_demand += 1;
                demand.advance(rng);
            }
            Region::B => {
                stats.demand.push(u);
                stats.inflexible.push(vnf);
                stats.pairs.push(MatchedPair { supply: vnf, demand: u, flexible: false });
                stats.matched_nonflex += 1;
                stats.advanced_demand += 1;
                stats.advanced_nonflex += 1;
                demand.advance(rng);
                nonflex.advance(rng);
            }
            Region::E => {
                stats.demand.push(u);
                stats.flexible.push(vf);
                stats.pairs.push(MatchedPair { supply: vf, demand: u, flexible: true });
                stats.matched_flex += 1;
                stats.advanced_demand += 1;
                stats.advanced_flex += 1;
                demand.advance(rng);
                flex.advance(rng);
            }
        }
    }
    stats.matched_total = stats.matched_flex + stats.matched_nonflex;
    Ok(stats)
}
