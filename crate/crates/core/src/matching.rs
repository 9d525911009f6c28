//! Maximum matchings on the compatibility graph.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::geom::GeoBipartiteGraph;
use crate::{Error, Result};

const FREE: usize = usize::MAX;

/// A set of disjoint (supply, demand) pairs, sorted by supply index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matching {
    pairs: Vec<(usize, usize)>,
}

impl Matching {
    /// Builds a matching from pairs, rejecting repeated endpoints.
    pub fn from_pairs(mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        pairs.sort_unstable();
        let mut demands: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        demands.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) || demands.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidMatching);
        }
        Ok(Self { pairs })
    }

    fn from_demand_mates(mates: &[usize]) -> Self {
        let mut pairs: Vec<(usize, usize)> =
            mates.iter().enumerate().filter(|(_, &s)| s != FREE).map(|(j, &s)| (s, j)).collect();
        pairs.sort_unstable();
        Self { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn size(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// True when every pair is an edge of `graph`.
    pub fn is_valid_for(&self, graph: &GeoBipartiteGraph) -> bool {
        self.pairs.iter().all(|&(i, j)| i < graph.num_supply() && j < graph.num_demand() && graph.has_edge(i, j))
    }

    /// Mate of each supply (`None` when exposed).
    pub fn supply_mates(&self, num_supply: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; num_supply];
        for &(i, j) in &self.pairs {
            out[i] = Some(j);
        }
        out
    }

    /// Mate of each demand (`None` when exposed).
    pub fn demand_mates(&self, num_demand: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; num_demand];
        for &(i, j) in &self.pairs {
            out[j] = Some(i);
        }
        out
    }
}

/// Maximum cardinality matching by Hopcroft–Karp.
pub fn hopcroft_karp(graph: &GeoBipartiteGraph) -> Matching {
    let mut hk = HopcroftKarp::new(graph.adjacency(), graph.num_demand());
    hk.run();
    Matching::from_demand_mates(&hk.demand_mate)
}

struct HopcroftKarp<'a> {
    adj: &'a [Vec<usize>],
    supply_mate: Vec<usize>,
    demand_mate: Vec<usize>,
    layer: Vec<usize>,
    cursor: Vec<usize>,
}

impl<'a> HopcroftKarp<'a> {
    fn new(adj: &'a [Vec<usize>], num_demand: usize) -> Self {
        let n = adj.len();
        Self {
            adj,
            supply_mate: vec![FREE; n],
            demand_mate: vec![FREE; num_demand],
            layer: vec![FREE; n],
            cursor: vec![0; n],
        }
    }

    fn run(&mut self) {
        // Greedy warm start.
        for i in 0..self.adj.len() {
            if let Some(&j) = self.adj[i].iter().find(|&&j| self.demand_mate[j] == FREE) {
                self.supply_mate[i] = j;
                self.demand_mate[j] = i;
            }
        }
        while self.bfs() {
            self.cursor.iter_mut().for_each(|c| *c = 0);
            for i in 0..self.adj.len() {
                if self.supply_mate[i] == FREE {
                    self.augment_from(i);
                }
            }
        }
    }

    /// Layers supplies by alternating distance from the free supplies.
    /// Returns whether some free demand is reachable.
    fn bfs(&mut self) -> bool {
        let mut queue = VecDeque::new();
        for (i, &m) in self.supply_mate.iter().enumerate() {
            if m == FREE {
                self.layer[i] = 0;
                queue.push_back(i);
            } else {
                self.layer[i] = FREE;
            }
        }
        let mut found = false;
        while let Some(i) = queue.pop_front() {
            for &j in &self.adj[i] {
                let next = self.demand_mate[j];
                if next == FREE {
                    found = true;
                } else if self.layer[next] == FREE {
                    self.layer[next] = self.layer[i] + 1;
                    queue.push_back(next);
                }
            }
        }
        found
    }

    /// Iterative layered DFS from the free supply `root`.
    fn augment_from(&mut self, root: usize) -> bool {
        let mut stack = vec![root];
        while let Some(&i) = stack.last() {
            let mut advanced = false;
            while self.cursor[i] < self.adj[i].len() {
                let j = self.adj[i][self.cursor[i]];
                let next = self.demand_mate[j];
                if next == FREE {
                    // Flip the path recorded on the stack.
                    let mut demand = j;
                    while let Some(s) = stack.pop() {
                        let prev = self.supply_mate[s];
                        self.supply_mate[s] = demand;
                        self.demand_mate[demand] = s;
                        demand = prev;
                    }
                    return true;
                }
                if self.layer[next] == self.layer[i].wrapping_add(1) {
                    stack.push(next);
                    advanced = true;
                    break;
                }
                self.cursor[i] += 1;
            }
            if !advanced {
                self.layer[i] = FREE;
                stack.pop();
                if let Some(&parent) = stack.last() {
                    self.cursor[parent] += 1;
                }
            }
        }
        false
    }
}

/// Earliest-deadline greedy matcher for one-dimensional instances.
///
/// Demand is processed left to right; each demand takes the unmatched
/// neighbour with the smallest deadline `s_i + r_i/n`, ties going to the
/// smaller supply index. The result is a maximum matching.
pub fn greedy_interval(graph: &GeoBipartiteGraph) -> Result<Matching> {
    if graph.dimension() != 1 {
        return Err(Error::NotOneDimensional { dimension: graph.dimension() });
    }
    let deadlines: Vec<f64> =
        (0..graph.num_supply()).map(|i| graph.supply().point(i)[0] + graph.radius_of(i)).collect();
    let by_demand = graph.demand_adjacency();
    let positions = graph.demand().positions();
    let mut order: Vec<usize> = (0..graph.num_demand()).collect();
    order.sort_by(|&a, &b| positions[a].total_cmp(&positions[b]).then(a.cmp(&b)));

    let mut taken = vec![false; graph.num_supply()];
    let mut pairs = Vec::new();
    for j in order {
        let best = by_demand[j]
            .iter()
            .copied()
            .filter(|&i| !taken[i])
            .min_by(|&a, &b| deadlines[a].total_cmp(&deadlines[b]).then(a.cmp(&b)));
        if let Some(i) = best {
            taken[i] = true;
            pairs.push((i, j));
        }
    }
    pairs.sort_unstable();
    Ok(Matching { pairs })
}

/// Demand indices left exposed by at least one maximum matching, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DPlusSet {
    indices: Vec<usize>,
}

impl DPlusSet {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    /// Sorted first coordinates of the members in `graph`.
    pub fn positions(&self, graph: &GeoBipartiteGraph) -> Vec<f64> {
        let mut p: Vec<f64> = self.indices.iter().map(|&j| graph.demand().point(j)[0]).collect();
        p.sort_by(f64::total_cmp);
        p
    }
}

/// Computes the demand nodes that some maximum matching leaves exposed.
///
/// Starting from the demands exposed by `max_matching`, walk alternating
/// paths that leave demand on a non-matching edge and come back along a
/// matching edge; every demand reached this way can be exposed by swapping.
/// The input must be a maximum matching of `graph`.
pub fn dplus(graph: &GeoBipartiteGraph, max_matching: &Matching) -> Result<DPlusSet> {
    if !max_matching.is_valid_for(graph) {
        return Err(Error::InvalidMatching);
    }
    let supply_mate = max_matching.supply_mates(graph.num_supply());
    let demand_mate = max_matching.demand_mates(graph.num_demand());
    let by_demand = graph.demand_adjacency();

    // An exposed supply adjacent to a demand reachable from an exposed demand
    // closes an augmenting path, so the search doubles as a maximality check.
    let mut reached = vec![false; graph.num_demand()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for (j, m) in demand_mate.iter().enumerate() {
        if m.is_none() {
            reached[j] = true;
            queue.push_back(j);
        }
    }
    while let Some(j) = queue.pop_front() {
        for &i in &by_demand[j] {
            if demand_mate[j] == Some(i) {
                continue;
            }
            match supply_mate[i] {
                None => return Err(Error::NotMaximum),
                Some(next) => {
                    if !reached[next] {
                        reached[next] = true;
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    let indices = reached.iter().enumerate().filter(|(_, &r)| r).map(|(j, _)| j).collect();
    Ok(DPlusSet { indices })
}

/// Lebesgue measure of the points of `[0, 1]` within `ell / n` of some
/// position, i.e. the length of the union of the clipped windows.
pub fn delta_window_measure(positions: &[f64], ell: f64, n: f64) -> Result<f64> {
    if !(ell >= 0.0) {
        return Err(Error::InvalidParameter { name: "ell", value: ell });
    }
    if !(n > 0.0) {
        return Err(Error::InvalidParameter { name: "n", value: n });
    }
    if positions.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Unsorted);
    }
    let half = ell / n;
    let mut total = 0.0;
    let mut current: Option<(f64, f64)> = None;
    for &p in positions {
        let lo = (p - half).max(0.0);
        let hi = (p + half).min(1.0);
        current = match current {
            Some((a, b)) if lo <= b => Some((a, b.max(hi))),
            Some((a, b)) => {
                total += b - a;
                Some((lo, hi))
            }
            None => Some((lo, hi)),
        };
    }
    if let Some((a, b)) = current {
        total += b - a;
    }
    Ok(total)
}
