//! Point sets, service ranges and the bipartite geometric compatibility graph.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::sampling::uniform;
use crate::{Error, Result};

/// A set of points in `[0,1]^k`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn empty(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self { dim, coords: Vec::new() }
    }

    /// Builds a point set from row-major coordinates, checking that every
    /// coordinate lies in `[0, 1]`.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter { name: "dimension", value: 0.0 });
        }
        if coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch { expected: dim, found: coords.len() % dim });
        }
        if let Some((index, &value)) = coords.iter().enumerate().find(|(_, c)| !(0.0..=1.0).contains(*c)) {
            return Err(Error::CoordinateOutOfRange { index, value });
        }
        Ok(Self { dim, coords })
    }

    /// One-dimensional point set from positions.
    pub fn from_positions(positions: &[f64]) -> Result<Self> {
        Self::from_flat(1, positions.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    /// First coordinate of every point; the positions of a 1-D set.
    pub fn positions(&self) -> Vec<f64> {
        self.iter().map(|p| p[0]).collect()
    }
}

/// Nonnegative per-supply service ranges bounded by a cap `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceRanges {
    values: Vec<f64>,
    cap: f64,
}

impl ServiceRanges {
    pub fn new(values: Vec<f64>, cap: f64) -> Result<Self> {
        if !(cap > 0.0) || !cap.is_finite() {
            return Err(Error::InvalidParameter { name: "cap", value: cap });
        }
        for (index, &value) in values.iter().enumerate() {
            if !(value >= 0.0) {
                return Err(Error::NegativeRange { index, value });
            }
            if value > cap {
                return Err(Error::RangeAboveCap { index, value, cap });
            }
        }
        Ok(Self { values, cap })
    }

    /// Ranges with the cap set to the largest entry (or 1 if all are zero).
    pub fn tight(values: Vec<f64>) -> Result<Self> {
        let cap = values.iter().copied().fold(0.0_f64, f64::max);
        Self::new(values, if cap > 0.0 { cap } else { 1.0 })
    }

    /// `n` equal ranges.
    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Self::tight(vec![value; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// How a service range maps to a connection radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parametrization {
    /// `r` is the volume of the service ball: radius `(r/n)^{1/k}`.
    #[default]
    Volume,
    /// `r` is the radius scaled by `n^{1/k}`: radius `r / n^{1/k}`.
    Radius,
}

impl Parametrization {
    /// Connection radius for range `r` with scale `n` in dimension `k`.
    ///
    /// At `k = 1` both parametrizations evaluate the same expression `r / n`,
    /// so they agree bit for bit.
    pub fn radius(self, r: f64, scale: f64, k: usize) -> f64 {
        if k == 1 {
            return r / scale;
        }
        match self {
            Parametrization::Volume => libm::pow(r / scale, 1.0 / k as f64),
            Parametrization::Radius => r / libm::pow(scale, 1.0 / k as f64),
        }
    }
}

/// Density on `[0, 1]` for one-dimensional experiments.
#[derive(Debug, Clone, PartialEq)]
pub enum Density1D {
    Uniform,
    /// Linear interpolation between `(breakpoints[i], values[i])`. Breakpoints
    /// run from 0 to 1 and may repeat to encode a jump.
    PiecewiseLinear {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
}

impl Density1D {
    pub fn piecewise_linear(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return Err(Error::LengthMismatch { left: breakpoints.len(), right: values.len() });
        }
        if breakpoints.len() < 2 {
            return Err(Error::InvalidDensity("need at least two breakpoints"));
        }
        if breakpoints[0] != 0.0 || breakpoints[breakpoints.len() - 1] != 1.0 {
            return Err(Error::InvalidDensity("breakpoints must span [0, 1]"));
        }
        if breakpoints.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::InvalidDensity("breakpoints must be nondecreasing"));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidDensity("density values must be finite and nonnegative"));
        }
        let density = Density1D::PiecewiseLinear { breakpoints, values };
        let mass = density.mass();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDensity("density must integrate to 1"));
        }
        Ok(density)
    }

    /// Total mass by the trapezoid rule (exact for piecewise-linear).
    pub fn mass(&self) -> f64 {
        match self {
            Density1D::Uniform => 1.0,
            Density1D::PiecewiseLinear { breakpoints, values } => {
                breakpoints.windows(2).zip(values.windows(2)).map(|(b, v)| 0.5 * (b[1] - b[0]) * (v[0] + v[1])).sum()
            }
        }
    }

    /// Largest absolute slope, or infinity when the density jumps.
    pub fn lipschitz_constant(&self) -> f64 {
        match self {
            Density1D::Uniform => 0.0,
            Density1D::PiecewiseLinear { breakpoints, values } => breakpoints
                .windows(2)
                .zip(values.windows(2))
                .map(|(b, v)| {
                    let width = b[1] - b[0];
                    let rise = (v[1] - v[0]).abs();
                    if width > 0.0 {
                        rise / width
                    } else if rise > 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                })
                .fold(0.0, f64::max),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match self {
            Density1D::Uniform => x,
            Density1D::PiecewiseLinear { breakpoints, values } => {
                let mut acc = 0.0;
                for (b, v) in breakpoints.windows(2).zip(values.windows(2)) {
                    if x >= b[1] {
                        acc += 0.5 * (b[1] - b[0]) * (v[0] + v[1]);
                    } else {
                        if x > b[0] {
                            let t = x - b[0];
                            let slope = (v[1] - v[0]) / (b[1] - b[0]);
                            acc += v[0] * t + 0.5 * slope * t * t;
                        }
                        break;
                    }
                }
                acc.min(1.0)
            }
        }
    }

    /// Inverse CDF.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            Density1D::Uniform => u,
            Density1D::PiecewiseLinear { breakpoints, values } => {
                let mut remaining = u;
                let mut last_with_mass = 1.0;
                for (b, v) in breakpoints.windows(2).zip(values.windows(2)) {
                    let width = b[1] - b[0];
                    let seg = 0.5 * width * (v[0] + v[1]);
                    if seg <= 0.0 {
                        continue;
                    }
                    last_with_mass = b[1];
                    if remaining <= seg {
                        let slope = (v[1] - v[0]) / width;
                        // Solve v0 t + slope t^2 / 2 = remaining in the
                        // cancellation-free form.
                        let disc = (v[0] * v[0] + 2.0 * slope * remaining).max(0.0);
                        let denom = v[0] + libm::sqrt(disc);
                        let t = if denom > 0.0 { 2.0 * remaining / denom } else { 0.0 };
                        return (b[0] + t.min(width)).clamp(0.0, 1.0);
                    }
                    remaining -= seg;
                }
                last_with_mass
            }
        }
    }
}

/// `count` i.i.d. uniform points in `[0,1]^k`.
pub fn sample_uniform_points<R: Rng + ?Sized>(count: usize, k: usize, rng: &mut R) -> PointSet {
    assert!(k >= 1, "dimension must be at least 1");
    let coords = (0..count * k).map(|_| uniform(rng)).collect();
    PointSet { dim: k, coords }
}

/// `count` i.i.d. points on `[0,1]` drawn from `density` by inversion.
pub fn sample_density_1d<R: Rng + ?Sized>(count: usize, density: &Density1D, rng: &mut R) -> PointSet {
    let coords = (0..count).map(|_| density.quantile(uniform(rng))).collect();
    PointSet { dim: 1, coords }
}

/// How adjacency is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeSearch {
    /// Brute force for small instances, grid buckets otherwise.
    #[default]
    Auto,
    BruteForce,
    Grid,
}

const BRUTE_FORCE_LIMIT: usize = 10_000;

/// Bipartite compatibility graph between supply and demand points.
///
/// Supply `i` is adjacent to demand `j` iff `‖s_i − d_j‖₂` is at most the
/// connection radius of `r_i` (see [`Parametrization::radius`]). The scale
/// `n` in the radius defaults to the number of supply nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoBipartiteGraph {
    supply: PointSet,
    demand: PointSet,
    ranges: ServiceRanges,
    parametrization: Parametrization,
    scale: f64,
    adjacency: Vec<Vec<usize>>,
}

impl GeoBipartiteGraph {
    pub fn build(
        supply: PointSet,
        ranges: ServiceRanges,
        demand: PointSet,
        parametrization: Parametrization,
    ) -> Result<Self> {
        let scale = supply.len().max(1) as f64;
        Self::build_with(supply, ranges, demand, parametrization, scale, EdgeSearch::Auto)
    }

    /// Full constructor with an explicit scale `n` and edge search strategy.
    pub fn build_with(
        supply: PointSet,
        ranges: ServiceRanges,
        demand: PointSet,
        parametrization: Parametrization,
        scale: f64,
        search: EdgeSearch,
    ) -> Result<Self> {
        if supply.dim() != demand.dim() {
            return Err(Error::DimensionMismatch { expected: supply.dim(), found: demand.dim() });
        }
        if supply.len() != ranges.len() {
            return Err(Error::LengthMismatch { left: supply.len(), right: ranges.len() });
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter { name: "scale", value: scale });
        }
        let k = supply.dim();
        let radii: Vec<f64> = ranges.values().iter().map(|&r| parametrization.radius(r, scale, k)).collect();
        let use_grid = match search {
            EdgeSearch::BruteForce => false,
            EdgeSearch::Grid => true,
            EdgeSearch::Auto => supply.len() * demand.len() > BRUTE_FORCE_LIMIT,
        };
        let adjacency =
            if use_grid { grid_adjacency(&supply, &demand, &radii) } else { brute_adjacency(&supply, &demand, &radii) };
        Ok(Self { supply, demand, ranges, parametrization, scale, adjacency })
    }

    pub fn supply(&self) -> &PointSet {
        &self.supply
    }

    pub fn demand(&self) -> &PointSet {
        &self.demand
    }

    pub fn ranges(&self) -> &ServiceRanges {
        &self.ranges
    }

    pub fn parametrization(&self) -> Parametrization {
        self.parametrization
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dimension(&self) -> usize {
        self.supply.dim()
    }

    pub fn num_supply(&self) -> usize {
        self.supply.len()
    }

    pub fn num_demand(&self) -> usize {
        self.demand.len()
    }

    /// Sorted demand neighbours of supply `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Connection radius of supply `i`.
    pub fn radius_of(&self, i: usize) -> f64 {
        self.parametrization.radius(self.ranges.values()[i], self.scale, self.dimension())
    }

    /// Demand neighbours of every supply, inverted: supply neighbours of each
    /// demand, sorted.
    pub fn demand_adjacency(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_demand()];
        for (i, list) in self.adjacency.iter().enumerate() {
            for &j in list {
                out[j].push(i);
            }
        }
        out
    }

    /// Same points and ranges with a replaced edge set.
    fn with_adjacency(&self, adjacency: Vec<Vec<usize>>) -> Self {
        Self { adjacency, ..self.clone() }
    }

    /// Removes every edge whose endpoints lie in different cells of `grid`.
    pub fn trimmed_by(&self, grid: &TrimmingGrid) -> Result<Self> {
        if grid.dim != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), found: grid.dim });
        }
        let demand_cells: Vec<usize> = self.demand.iter().map(|d| grid.cell_id(d)).collect();
        let adjacency = self
            .adjacency
            .iter()
            .enumerate()
            .map(|(i, list)| {
                let cell = grid.cell_id(self.supply.point(i));
                list.iter().copied().filter(|&j| demand_cells[j] == cell).collect()
            })
            .collect();
        Ok(self.with_adjacency(adjacency))
    }
}

/// Edge predicate shared by every construction path.
#[inline]
fn within(s: &[f64], d: &[f64], radius: f64) -> bool {
    if s.len() == 1 {
        return (s[0] - d[0]).abs() <= radius;
    }
    let sq: f64 = s.iter().zip(d).map(|(a, b)| (a - b) * (a - b)).sum();
    libm::sqrt(sq) <= radius
}

fn brute_adjacency(supply: &PointSet, demand: &PointSet, radii: &[f64]) -> Vec<Vec<usize>> {
    supply
        .iter()
        .zip(radii)
        .map(|(s, &rad)| demand.iter().enumerate().filter(|(_, d)| within(s, d, rad)).map(|(j, _)| j).collect())
        .collect()
}

fn grid_adjacency(supply: &PointSet, demand: &PointSet, radii: &[f64]) -> Vec<Vec<usize>> {
    let k = supply.dim();
    let max_radius = radii.iter().copied().fold(0.0_f64, f64::max);
    // Cells at least as wide as the largest radius, so the 3^k block around a
    // supply's cell covers its ball. Cap the cell count near the demand count.
    let budget = (4 * demand.len()).max(1) as f64;
    let by_budget = libm::floor(libm::pow(budget, 1.0 / k as f64)).max(1.0);
    let by_radius = if max_radius > 0.0 { libm::floor(1.0 / max_radius) } else { by_budget };
    let per_axis = by_radius.min(by_budget).max(1.0) as usize;
    let side = 1.0 / per_axis as f64;

    let axis_cell = |c: f64| -> usize { ((c / side) as usize).min(per_axis - 1) };
    let cell_of = |p: &[f64]| -> usize { p.iter().fold(0, |acc, &c| acc * per_axis + axis_cell(c)) };

    let total_cells = per_axis.pow(k as u32);
    let mut counts = vec![0usize; total_cells + 1];
    let demand_cells: Vec<usize> = demand.iter().map(cell_of).collect();
    for &c in &demand_cells {
        counts[c + 1] += 1;
    }
    for c in 0..total_cells {
        counts[c + 1] += counts[c];
    }
    let mut slots = counts.clone();
    let mut bucketed = vec![0usize; demand.len()];
    for (j, &c) in demand_cells.iter().enumerate() {
        bucketed[slots[c]] = j;
        slots[c] += 1;
    }

    let mut offsets: Vec<Vec<isize>> = vec![Vec::new()];
    for _ in 0..k {
        offsets = offsets
            .into_iter()
            .flat_map(|o| {
                (-1..=1).map(move |d| {
                    let mut o = o.clone();
                    o.push(d);
                    o
                })
            })
            .collect();
    }

    let mut home = vec![0usize; k];
    supply
        .iter()
        .zip(radii)
        .map(|(s, &rad)| {
            for (h, &c) in home.iter_mut().zip(s) {
                *h = axis_cell(c);
            }
            let mut found = Vec::new();
            'offsets: for off in &offsets {
                let mut cell = 0usize;
                for (&h, &d) in home.iter().zip(off) {
                    let a = h as isize + d;
                    if a < 0 || a >= per_axis as isize {
                        continue 'offsets;
                    }
                    cell = cell * per_axis + a as usize;
                }
                for &j in &bucketed[counts[cell]..counts[cell + 1]] {
                    if within(s, demand.point(j), rad) {
                        found.push(j);
                    }
                }
            }
            found.sort_unstable();
            found
        })
        .collect()
}

/// Partition of `[0,1]^k` into hypercubes of side `2 k (M/n)^{1/k} / eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrimmingGrid {
    eps: f64,
    side: f64,
    dim: usize,
    per_axis: usize,
}

impl TrimmingGrid {
    pub fn new(eps: f64, k: usize, cap: f64, n: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter { name: "eps", value: eps });
        }
        if !(cap > 0.0) {
            return Err(Error::InvalidParameter { name: "cap", value: cap });
        }
        if !(n > 0.0) {
            return Err(Error::InvalidParameter { name: "n", value: n });
        }
        if k == 0 {
            return Err(Error::InvalidParameter { name: "dimension", value: 0.0 });
        }
        let side = 2.0 / eps * k as f64 * libm::pow(cap / n, 1.0 / k as f64);
        let per_axis = libm::ceil(1.0 / side).max(1.0) as usize;
        Ok(Self { eps, side, dim: k, per_axis })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn side_length(&self) -> f64 {
        self.side
    }

    pub fn cells_per_axis(&self) -> usize {
        self.per_axis
    }

    /// Mixed-radix cell index; coordinate 1 falls in the last cell.
    pub fn cell_id(&self, p: &[f64]) -> usize {
        p.iter().fold(0, |acc, &c| {
            let a = (libm::floor(c / self.side).max(0.0) as usize).min(self.per_axis - 1);
            acc * self.per_axis + a
        })
    }
}

/// Trims `graph` with the grid determined by `eps` and the range cap `cap`.
pub fn trim(graph: &GeoBipartiteGraph, eps: f64, cap: f64) -> Result<GeoBipartiteGraph> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter { name: "eps", value: eps });
    }
    let max_range = graph.ranges().values().iter().copied().fold(0.0_f64, f64::max);
    if !(cap >= max_range) {
        return Err(Error::InvalidParameter { name: "cap", value: cap });
    }
    let grid = TrimmingGrid::new(eps, graph.dimension(), cap, graph.scale())?;
    graph.trimmed_by(&grid)
}
