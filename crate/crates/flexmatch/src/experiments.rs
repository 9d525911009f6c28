//! Seeded Monte Carlo experiments.
//!
//! Every trial draws from its own generator keyed by the master seed, the
//! series, the sweep point and the trial index (see [`crate::seeds`]), and
//! trial outcomes are collected in index order, so results do not depend on
//! the number of worker threads.

use anyhow::{bail, ensure, Context, Result};
use flexmatch_core::dualrange::{
    closed_form_base0, closed_form_extra0, formula_fraction, lower_bound_sup, upper_bound, DualRangeParams,
};
use flexmatch_core::geom::{
    sample_uniform_points, Density1D, EdgeSearch, GeoBipartiteGraph, Parametrization, PointSet, ServiceRanges,
};
use flexmatch_core::matching::{delta_window_measure, dplus, hopcroft_karp};
use rand::Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Geometry, Mode, ParamSweep};
use crate::family::{ranges_from_uniforms, FamilySpec};
use crate::output::{SweepResult, SweepRow};
use crate::seeds::{splitmix64, trial_rng};
use crate::stats;

const SWEEP_STREAM: u64 = 0x5357_0000;
const PAIRED_STREAM: u64 = 0x5256_0000;
const MARKOV_STREAM: u64 = 0x4d4b_0000;
const BOUNDS_STREAM: u64 = 0x424e_0000;
const COUNTER_STREAM: u64 = 0x4358_0000;
const DELTA_STREAM: u64 = 0x444c_0000;
/// Trial index reserved for the chain run at a sweep point.
const CHAIN_TRIAL: u64 = u64::MAX;

/// Random inputs of one trial of a family sweep.
struct TrialInputs {
    supply: PointSet,
    demand: PointSet,
    uniforms: Vec<f64>,
}

impl TrialInputs {
    fn draw<R: Rng + ?Sized>(n: usize, m: usize, k: usize, rng: &mut R) -> Self {
        let supply = sample_uniform_points(n, k, rng);
        let demand = sample_uniform_points(m, k, rng);
        let uniforms = (0..n).map(|_| rng.random::<f64>()).collect();
        Self { supply, demand, uniforms }
    }

    fn checksum(&self) -> u64 {
        let all = self.supply.as_flat().iter().chain(self.demand.as_flat()).chain(&self.uniforms);
        all.fold(0x6a09_e667_f3bc_c909, |acc, v| splitmix64(acc ^ v.to_bits()))
    }
}

fn matching_fraction(
    supply: PointSet,
    ranges: ServiceRanges,
    demand: PointSet,
    param: Parametrization,
    n: usize,
) -> Result<f64> {
    let g = GeoBipartiteGraph::build_with(supply, ranges, demand, param, n as f64, EdgeSearch::Auto)?;
    Ok(hopcroft_karp(&g).size() as f64 / n as f64)
}

fn family_trial(
    cfg: &ExperimentConfig,
    spec: &FamilySpec,
    geometry: Geometry,
    alpha: f64,
    inputs: TrialInputs,
) -> Result<f64> {
    let ranges = ranges_from_uniforms(spec, alpha, &inputs.uniforms)?;
    matching_fraction(inputs.supply, ranges, inputs.demand, geometry.into(), cfg.n)
}

fn family_row(spec: &FamilySpec, geometry: Geometry, k: usize, alpha: f64, samples: &[f64]) -> Result<SweepRow> {
    let pt = spec.params_at(alpha)?;
    Ok(SweepRow::from_samples(
        vec![spec.label().to_string(), geometry.label().to_string(), k.to_string()],
        alpha,
        samples,
        vec![Some(pt.base), Some(pt.extra), Some(pt.p), Some(spec.mean_range)],
    ))
}

fn family_schema() -> SweepResult {
    SweepResult::new(&["family", "parametrization", "k"], "alpha", &["base", "extra", "p", "mean_range"])
}

/// Mean matching fraction `M(G)/n` against `alpha` for every family, with
/// fresh points and ranges in every trial.
///
/// Columns: `family, parametrization, k, alpha, mean, std_dev, std_err,
/// trials, base, extra, p, mean_range`.
pub fn run_uniformity_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let mut out = family_schema();
    for (fi, spec) in cfg.resolved_families()?.iter().enumerate() {
        let stream = SWEEP_STREAM | (cfg.k as u64) << 8 | fi as u64;
        for (ai, &alpha) in cfg.alphas.iter().enumerate() {
            let samples = (0..cfg.trials as u64)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(cfg.seed, stream, ai as u64, t);
                    let inputs = TrialInputs::draw(cfg.n, cfg.demand_count(), cfg.k, &mut rng);
                    family_trial(cfg, spec, cfg.parametrization, alpha, inputs)
                })
                .collect::<Result<Vec<f64>>>()?;
            let row = family_row(spec, cfg.parametrization, cfg.k, alpha, &samples)?;
            log::info!("{} k={} alpha={alpha:.3}: mean {:.4}", spec.label(), cfg.k, row.mean);
            out.push(row);
        }
    }
    Ok(out)
}

/// Volume and radius sweeps on identical random inputs.
#[derive(Debug, Clone)]
pub struct PairedSweep {
    /// Rows of both arms, told apart by the `parametrization` column.
    pub result: SweepResult,
    /// Per (family, alpha) checksums of the inputs each arm consumed,
    /// `(volume, radius)`.
    pub checksums: Vec<(u64, u64)>,
}

impl PairedSweep {
    pub fn arm(&self, geometry: Geometry, family: &str) -> Vec<&SweepRow> {
        self.result.rows.iter().filter(|r| r.labels[0] == family && r.labels[1] == geometry.label()).collect()
    }
}

/// The family sweep under both parametrizations.
///
/// Trial `t` of a family uses the same points and Bernoulli uniforms at
/// every `alpha` and in both arms; each arm regenerates them from the shared
/// seed.
///
/// Columns as for [`run_uniformity_sweep`].
pub fn run_radius_vs_volume(cfg: &ExperimentConfig) -> Result<PairedSweep> {
    cfg.validate()?;
    let volume = cfg.resolved_families()?;
    let radius = cfg.resolved_radius_families();
    let mut vol_rows = family_schema();
    let mut rad_rows = family_schema();
    let mut checksums = Vec::new();
    for (fi, (vspec, rspec)) in volume.iter().zip(&radius).enumerate() {
        if vspec.kind != rspec.kind {
            bail!("families[{fi}] and radius_families[{fi}] are of different kinds");
        }
        let stream = PAIRED_STREAM | fi as u64;
        for &alpha in &cfg.alphas {
            let arm = |spec: &FamilySpec, geometry: Geometry| -> Result<(Vec<f64>, u64)> {
                let per_trial = (0..cfg.trials as u64)
                    .into_par_iter()
                    .map(|t| {
                        let mut rng = trial_rng(cfg.seed, stream, 0, t);
                        let inputs = TrialInputs::draw(cfg.n, cfg.demand_count(), cfg.k, &mut rng);
                        let sum = inputs.checksum();
                        Ok((family_trial(cfg, spec, geometry, alpha, inputs)?, sum))
                    })
                    .collect::<Result<Vec<(f64, u64)>>>()?;
                let checksum = per_trial.iter().fold(0, |acc, (_, s)| splitmix64(acc ^ s));
                Ok((per_trial.into_iter().map(|(f, _)| f).collect(), checksum))
            };
            let (vs, vsum) = arm(vspec, Geometry::Volume)?;
            let (rs, rsum) = arm(rspec, Geometry::Radius)?;
            ensure!(vsum == rsum, "arms consumed different inputs at family {fi}, alpha {alpha}");
            checksums.push((vsum, rsum));
            let v = family_row(vspec, Geometry::Volume, cfg.k, alpha, &vs)?;
            let r = family_row(rspec, Geometry::Radius, cfg.k, alpha, &rs)?;
            log::info!("{} alpha={alpha:.3}: volume {:.4}, radius {:.4}", vspec.label(), v.mean, r.mean);
            vol_rows.push(v);
            rad_rows.push(r);
        }
    }
    vol_rows.extend(rad_rows);
    Ok(PairedSweep { result: vol_rows, checksums })
}

/// Ranges of the dual-range model with exactly `round(p n)` flexible nodes.
pub fn dual_range_ranges(base: f64, extra: f64, p: f64, n: usize) -> Result<ServiceRanges> {
    let flexible = (p * n as f64).round() as usize;
    let values = (0..n).map(|i| if i < flexible { base + extra } else { base }).collect();
    Ok(ServiceRanges::tight(values)?)
}

/// Exact matching fraction of one uniform instance of the dual-range model
/// on `[0, 1]`.
pub fn dual_range_trial<R: Rng + ?Sized>(
    base: f64,
    extra: f64,
    p: f64,
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<f64> {
    let supply = sample_uniform_points(n, 1, rng);
    let demand = sample_uniform_points(m, 1, rng);
    let ranges = dual_range_ranges(base, extra, p, n)?;
    matching_fraction(supply, ranges, demand, Parametrization::Volume, n)
}

fn dual_range_samples(cfg: &ExperimentConfig, stream: u64, point: u64, (b, e, p): (f64, f64, f64)) -> Result<Vec<f64>> {
    (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| dual_range_trial(b, e, p, cfg.n, cfg.demand_count(), &mut trial_rng(cfg.seed, stream, point, t)))
        .collect()
}

/// Limit value available in closed form, if any.
pub fn closed_form(base: f64, extra: f64, p: f64) -> Option<f64> {
    if extra == 0.0 || p == 0.0 {
        Some(closed_form_extra0(base))
    } else if p == 1.0 {
        Some(closed_form_extra0(base + extra))
    } else if base == 0.0 {
        closed_form_base0(extra, p).ok()
    } else {
        None
    }
}

/// Exact matching fraction against the limit obtained from the chain's
/// region frequencies.
///
/// Columns: `sweep, value, mean, std_dev, std_err, trials, base, extra, p,
/// formula, closed_form`. `mean` and its spread describe the exact matching
/// fraction; `formula` is the chain estimate and `closed_form` is present
/// when one exists.
pub fn run_markov_validation(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let mut out = SweepResult::new(&["sweep"], "value", &["base", "extra", "p", "formula", "closed_form"]);
    for (si, sweep) in cfg.resolved_sweeps().iter().enumerate() {
        let stream = MARKOV_STREAM | si as u64;
        for (vi, &value) in sweep.values.iter().enumerate() {
            let (b, e, p) = sweep.at(value);
            let samples = dual_range_samples(cfg, stream, vi as u64, (b, e, p))?;
            let params = DualRangeParams::new(b, e, p)?;
            let mut rng = trial_rng(cfg.seed, stream, vi as u64, CHAIN_TRIAL);
            let formula = formula_fraction(&params, cfg.steps, &mut rng)
                .with_context(|| format!("chain at base={b}, extra={e}, p={p}"))?;
            let row = SweepRow::from_samples(
                vec![sweep.name.clone()],
                value,
                &samples,
                vec![Some(b), Some(e), Some(p), Some(formula), closed_form(b, e, p)],
            );
            log::info!("{} = {value:.3}: exact {:.4}, formula {formula:.4}", sweep.name, row.mean);
            out.push(row);
        }
    }
    Ok(out)
}

/// Upper bound and best lower bound for the dual-range model.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Bounds {
    pub base: f64,
    pub extra: f64,
    pub p: f64,
    pub upper: f64,
    pub lower: f64,
}

pub fn bounds_at(base: f64, extra: f64, p: f64) -> Result<Bounds> {
    Ok(Bounds { base, extra, p, upper: upper_bound(base, extra, p)?, lower: lower_bound_sup(base, extra, p)? })
}

/// Simulated exact matching fraction next to the analytic bounds.
///
/// Columns: `panel, value, mean, std_dev, std_err, trials, base, extra, p,
/// upper, lower`.
pub fn run_bounds_validation(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let mut out = SweepResult::new(&["panel"], "value", &["base", "extra", "p", "upper", "lower"]);
    for (si, sweep) in cfg.resolved_sweeps().iter().enumerate() {
        let stream = BOUNDS_STREAM | si as u64;
        for (vi, &value) in sweep.values.iter().enumerate() {
            let (b, e, p) = sweep.at(value);
            let samples = dual_range_samples(cfg, stream, vi as u64, (b, e, p))?;
            let bd = bounds_at(b, e, p)?;
            let row = SweepRow::from_samples(
                vec![sweep.name.clone()],
                value,
                &samples,
                vec![Some(b), Some(e), Some(p), Some(bd.upper), Some(bd.lower)],
            );
            log::info!("{} = {value:.3}: {:.4} in [{:.4}, {:.4}]", sweep.name, row.mean, bd.lower, bd.upper);
            out.push(row);
        }
    }
    Ok(out)
}

/// Density on `[0, 1]` uniform on `[lo, hi]`.
fn block_density(lo: f64, hi: f64) -> Result<Density1D> {
    let h = 1.0 / (hi - lo);
    Ok(Density1D::piecewise_linear(vec![0.0, lo, lo, hi, hi, 1.0], vec![0.0, 0.0, h, h, 0.0, 0.0])?)
}

fn clustered_points<R: Rng + ?Sized>(count: usize, k: usize, first: &Density1D, rng: &mut R) -> Result<PointSet> {
    let mut coords = Vec::with_capacity(count * k);
    for _ in 0..count {
        coords.push(first.quantile(rng.random::<f64>()));
        coords.extend((1..k).map(|_| rng.random::<f64>()));
    }
    Ok(PointSet::from_flat(k, coords)?)
}

/// Uniform and concentrated allocations of one budget.
///
/// The uniform arm gives every node reach `fill * ell2`, short of the gap;
/// the concentrated arm gives as many nodes as the budget allows reach
/// `reach` and one node the remainder.
pub fn counterexample_allocations(cfg: &ExperimentConfig) -> Result<(ServiceRanges, ServiceRanges)> {
    let g = cfg.counterexample;
    let (n, k) = (cfg.n as f64, cfg.k as i32);
    let uniform = n * (g.fill * g.ell2).powi(k);
    let budget = n * uniform;
    let big = n * g.reach.powi(k);
    let full = ((budget / big).floor() as usize).min(cfg.n);
    let mut conc = vec![0.0; cfg.n];
    conc[..full].fill(big);
    if full < cfg.n {
        conc[full] = budget - big * full as f64;
    }
    let u = ServiceRanges::uniform(cfg.n, uniform)?;
    let c = ServiceRanges::tight(conc)?;
    ensure!((u.total() - c.total()).abs() <= 1e-9 * budget.max(1.0), "allocations spend different budgets");
    Ok((u, c))
}

/// Two-cluster instance where equal ranges are beaten by concentrated ones.
///
/// Columns: `allocation, k, mean, std_dev, std_err, trials, total_budget`.
pub fn run_counterexample(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    ensure!(cfg.mode == Mode::Counterexample || cfg.mode == Mode::Sweep, "not a counterexample config");
    let g = cfg.counterexample;
    let supply_density = block_density(0.0, g.eps)?;
    let start = g.eps + g.ell2;
    let demand_density = block_density(start, start + g.ell1)?;
    let (uniform, concentrated) = counterexample_allocations(cfg)?;
    let pairs = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, COUNTER_STREAM, cfg.k as u64, t);
            let s = clustered_points(cfg.n, cfg.k, &supply_density, &mut rng)?;
            let d = clustered_points(cfg.demand_count(), cfg.k, &demand_density, &mut rng)?;
            let param = cfg.parametrization.into();
            let a = matching_fraction(s.clone(), uniform.clone(), d.clone(), param, cfg.n)?;
            let b = matching_fraction(s, concentrated.clone(), d, param, cfg.n)?;
            Ok((a, b))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (ua, ca): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let mut out = SweepResult::new(&["allocation"], "k", &["total_budget"]);
    let x = cfg.k as f64;
    out.push(SweepRow::from_samples(vec!["uniform".into()], x, &ua, vec![Some(uniform.total())]));
    out.push(SweepRow::from_samples(vec!["concentrated".into()], x, &ca, vec![Some(concentrated.total())]));
    Ok(out)
}

/// Per-trial window measures behind [`delta_curve`]: row `t` holds the
/// measure of the augmentable demand set of graph `t` at every `ell`.
///
/// Graphs live on `[0, 1]` with `n` supply nodes of range `range` and `m`
/// demand nodes; every `ell` is evaluated on the same graphs.
pub fn delta_samples(n: usize, m: usize, range: f64, ells: &[f64], trials: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, DELTA_STREAM, 0, t);
            let s = sample_uniform_points(n, 1, &mut rng);
            let d = sample_uniform_points(m, 1, &mut rng);
            let g = GeoBipartiteGraph::build(s, ServiceRanges::uniform(n, range)?, d, Parametrization::Volume)?;
            let set = dplus(&g, &hopcroft_karp(&g))?;
            let pos = set.positions(&g);
            ells.iter().map(|&l| Ok(delta_window_measure(&pos, l, n as f64)?)).collect()
        })
        .collect()
}

/// Monte Carlo estimate of the probability that one extra supply node with
/// range `ell` enlarges the maximum matching; `(mean, std_err)` per `ell`.
pub fn delta_curve(n: usize, m: usize, range: f64, ells: &[f64], trials: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    let rows = delta_samples(n, m, range, ells, trials, seed)?;
    Ok((0..ells.len())
        .map(|i| {
            let col: Vec<f64> = rows.iter().map(|r| r[i]).collect();
            (stats::mean(&col), stats::std_err(&col))
        })
        .collect())
}

/// Runs the experiment selected by `cfg.mode`; `radius-vs-volume` returns
/// both arms in one table.
pub fn run(cfg: &ExperimentConfig) -> Result<SweepResult> {
    match cfg.mode {
        Mode::Sweep => run_uniformity_sweep(cfg),
        Mode::RadiusVsVolume => Ok(run_radius_vs_volume(cfg)?.result),
        Mode::Markov => run_markov_validation(cfg),
        Mode::Bounds => run_bounds_validation(cfg),
        Mode::Counterexample => run_counterexample(cfg),
    }
}

/// Parameter sweep with a single point, used by the command line.
pub fn single_point(name: &str, base: f64, extra: f64, p: f64) -> ParamSweep {
    ParamSweep { name: name.into(), vary: crate::config::Varied::Base, base, extra, p, values: vec![base] }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mode: Mode) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(mode, 11);
        cfg.n = 60;
        cfg.trials = 4;
        cfg.alphas = vec![0.0, 1.0];
        cfg.steps = 20_000;
        cfg
    }

    #[test]
    fn sweep_is_reproducible() {
        let cfg = small(Mode::Sweep);
        let a = run_uniformity_sweep(&cfg).unwrap();
        let b = run_uniformity_sweep(&cfg).unwrap();
        assert_eq!(a.to_csv_bytes().unwrap(), b.to_csv_bytes().unwrap());
        assert_eq!(a.rows.len(), 6);
        assert!(a.rows.iter().all(|r| (0.0..=1.0).contains(&r.mean)));
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let cfg = small(Mode::Sweep);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| run_uniformity_sweep(&cfg)).unwrap();
        let b = three.install(|| run_uniformity_sweep(&cfg)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn constant_family_is_flat() {
        let mut cfg = small(Mode::Sweep);
        cfg.trials = 3;
        cfg.families = Some(vec![FamilySpec::new(crate::family::FamilyKind::FixedExtra, 1.0, 0.1, 0.9, 0.0)]);
        let r = run_uniformity_sweep(&cfg).unwrap();
        let first = &r.rows[0];
        assert!(r.rows.iter().all(|row| row.extra[0] == first.extra[0]));
    }

    #[test]
    fn paired_arms_share_inputs() {
        let mut cfg = small(Mode::RadiusVsVolume);
        cfg.trials = 3;
        let out = run_radius_vs_volume(&cfg).unwrap();
        assert_eq!(out.checksums.len(), 6);
        assert!(out.checksums.iter().all(|(a, b)| a == b));
        assert_eq!(out.arm(Geometry::Radius, "fixed-p").len(), 2);
    }

    #[test]
    fn counterexample_budgets_agree() {
        let mut cfg = small(Mode::Counterexample);
        cfg.n = 100;
        let (u, c) = counterexample_allocations(&cfg).unwrap();
        assert!((u.total() - c.total()).abs() < 1e-9);
        assert_eq!(c.values().iter().filter(|&&v| v == 60.0).count(), 45);
    }

    #[test]
    fn dual_range_ranges_count_flexible_nodes() {
        let r = dual_range_ranges(1.0, 2.0, 0.25, 10).unwrap();
        assert_eq!(r.values().iter().filter(|&&v| v == 3.0).count(), 3);
    }

    #[test]
    fn bounds_at_the_unit_point() {
        let b = bounds_at(1.0, 1.0, 0.5).unwrap();
        assert!((b.upper - 0.75).abs() < 1e-15);
        assert!(b.lower >= 11.0 / 15.0 - 1e-12 && b.lower <= b.upper);
    }
}
