//! Discretized Brownian motion, the drifted semimartingale `Z = z0 + σB + μt`
//! and the stochastic-exponential change of measure that removes its drift.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

/// Uniform time grid `t_k = k * dt`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    n_steps: usize,
    dt: f64,
}

impl TimeGrid {
    pub fn new(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
        }
        if n_steps == 0 {
            return Err(Error::invalid("n_steps must be at least 1"));
        }
        Ok(Self { horizon, n_steps, dt: horizon / n_steps as f64 })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Time left from grid index `k` to the horizon.
    pub fn remaining(&self, k: usize) -> f64 {
        (self.n_steps - k.min(self.n_steps)) as f64 * self.dt
    }
}

/// Parameters of the arithmetic Brownian motion driving the underlying.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnderlyingModel {
    pub z0: f64,
    pub drift: f64,
    pub sigma: f64,
}

impl UnderlyingModel {
    pub fn new(z0: f64, drift: f64, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma must be non-negative, got {sigma}")));
        }
        if !z0.is_finite() || !drift.is_finite() {
            return Err(Error::invalid("z0 and drift must be finite"));
        }
        Ok(Self { z0, drift, sigma })
    }
}

/// One path of `Z_t = z0 + sigma * B_t + drift * t` together with its
/// driving Brownian motion.
#[derive(Debug, Clone, PartialEq)]
pub struct SemimartingalePath {
    pub z: Vec<f64>,
    pub b: Vec<f64>,
    pub drift_rate: f64,
    pub sigma: f64,
}

/// Density process of the measure change `dQ/dP = E(L)` with `L = -h B`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureChange {
    pub l: Vec<f64>,
    pub qv_l: Vec<f64>,
    pub density: Vec<f64>,
}

/// Conditional continuations of the underlying from a realized anchor.
///
/// `steps[0]` is the anchor index; each path stores the underlying at every
/// index listed in `steps`. Full scenarios observe every grid index from the
/// anchor to the horizon, sparse ones only the indices a payoff needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    pub anchor_step: usize,
    pub anchor_value: f64,
    pub last_step: usize,
    pub steps: Vec<usize>,
    pub paths: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

/// Read access to an underlying path by grid index.
pub trait PathView {
    fn value_at(&self, step: usize) -> f64;
    fn last_step(&self) -> usize;
}

impl PathView for SemimartingalePath {
    fn value_at(&self, step: usize) -> f64 {
        self.z[step]
    }

    fn last_step(&self) -> usize {
        self.z.len() - 1
    }
}

/// One scenario of a [`ScenarioSet`].
#[derive(Debug, Clone, Copy)]
pub struct ScenarioPath<'a> {
    steps: &'a [usize],
    values: &'a [f64],
    last_step: usize,
}

impl PathView for ScenarioPath<'_> {
    fn value_at(&self, step: usize) -> f64 {
        match self.steps.binary_search(&step) {
            Ok(i) => self.values[i],
            Err(_) => panic!("scenario does not observe grid index {step}"),
        }
    }

    fn last_step(&self) -> usize {
        self.last_step
    }
}

impl ScenarioSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn path(&self, i: usize) -> ScenarioPath<'_> {
        ScenarioPath { steps: &self.steps, values: &self.paths[i], last_step: self.last_step }
    }

    pub fn iter(&self) -> impl Iterator<Item = ScenarioPath<'_>> + '_ {
        (0..self.len()).map(move |i| self.path(i))
    }
}

fn brownian_into(grid: &TimeGrid, rng: &mut StreamRng, b: &mut Vec<f64>) {
    let sd = grid.dt().sqrt();
    b.clear();
    b.push(0.0);
    let mut acc = 0.0;
    for _ in 0..grid.n_steps() {
        let eps: f64 = rng.sample(StandardNormal);
        acc += sd * eps;
        b.push(acc);
    }
}

fn path_stream(seed: u64, index: usize) -> StreamRng {
    rng::stream(seed, index as u64)
}

/// Brownian paths on `grid`; path `i` uses the stream `derive_seed(seed, i)`.
pub fn gen_brownian(grid: &TimeGrid, n_paths: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n_paths == 0 {
        return Err(Error::invalid("n_paths must be at least 1"));
    }
    Ok((0..n_paths)
        .map(|i| {
            let mut b = Vec::with_capacity(grid.n_steps() + 1);
            brownian_into(grid, &mut path_stream(seed, i), &mut b);
            b
        })
        .collect())
}

fn semimartingale_from(grid: &TimeGrid, model: &UnderlyingModel, b: Vec<f64>) -> SemimartingalePath {
    let z = b.iter().enumerate().map(|(k, &bk)| model.z0 + model.sigma * bk + model.drift * grid.time(k)).collect();
    SemimartingalePath { z, b, drift_rate: model.drift, sigma: model.sigma }
}

pub fn gen_semimartingale(
    grid: &TimeGrid,
    model: &UnderlyingModel,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<SemimartingalePath>> {
    let model = UnderlyingModel::new(model.z0, model.drift, model.sigma)?;
    Ok(gen_brownian(grid, n_paths, seed)?.into_iter().map(|b| semimartingale_from(grid, &model, b)).collect())
}

/// Same path that `gen_semimartingale(grid, model, n, seed)[index]` returns,
/// without materializing the others.
pub fn semimartingale_path(grid: &TimeGrid, model: &UnderlyingModel, seed: u64, index: usize) -> SemimartingalePath {
    let mut b = Vec::with_capacity(grid.n_steps() + 1);
    brownian_into(grid, &mut path_stream(seed, index), &mut b);
    semimartingale_from(grid, model, b)
}

/// `M` fresh continuations of the realized prefix from grid index `k` to the
/// horizon, observing every grid index.
pub fn conditional_scenarios(
    path_so_far: &[f64],
    grid: &TimeGrid,
    k: usize,
    model: &UnderlyingModel,
    m: usize,
    seed: u64,
) -> Result<ScenarioSet> {
    if k > grid.n_steps() {
        return Err(Error::invalid(format!("anchor index {k} beyond horizon {}", grid.n_steps())));
    }
    let anchor =
        *path_so_far.get(k).ok_or_else(|| Error::invalid(format!("realized prefix has no value at index {k}")))?;
    let observe: Vec<usize> = (k + 1..=grid.n_steps()).collect();
    scenarios_at(anchor, grid, k, model, &observe, m, seed)
}

/// Continuations observed only at `observe` (strictly increasing indices
/// after `k`). Increments between observation points are drawn exactly as
/// sums of the skipped Gaussian steps.
pub fn scenarios_at(
    anchor_value: f64,
    grid: &TimeGrid,
    k: usize,
    model: &UnderlyingModel,
    observe: &[usize],
    m: usize,
    seed: u64,
) -> Result<ScenarioSet> {
    if k > grid.n_steps() {
        return Err(Error::invalid(format!("anchor index {k} beyond horizon {}", grid.n_steps())));
    }
    if m == 0 {
        return Err(Error::invalid("scenario count must be at least 1"));
    }
    let mut steps = Vec::with_capacity(observe.len() + 1);
    steps.push(k);
    for &s in observe {
        if s <= *steps.last().unwrap() || s > grid.n_steps() {
            return Err(Error::invalid(format!("observation index {s} out of order or range")));
        }
        steps.push(s);
    }

    let incr: Vec<(f64, f64)> = steps
        .windows(2)
        .map(|w| {
            let span = (w[1] - w[0]) as f64 * grid.dt();
            (model.drift * span, model.sigma * span.sqrt())
        })
        .collect();

    let mut rng = rng::stream(seed, 0);
    let paths = (0..m)
        .map(|_| {
            let mut values = Vec::with_capacity(steps.len());
            let mut z = anchor_value;
            values.push(z);
            for &(mean, sd) in &incr {
                let eps: f64 = rng.sample(StandardNormal);
                z += mean + sd * eps;
                values.push(z);
            }
            values
        })
        .collect();

    Ok(ScenarioSet {
        anchor_step: k,
        anchor_value,
        last_step: grid.n_steps(),
        steps,
        paths,
        weights: vec![1.0 / m as f64; m],
    })
}

pub fn stochastic_exponential(h: f64, b: &[f64], grid: &TimeGrid) -> MeasureChange {
    let l: Vec<f64> = b.iter().map(|&bk| -h * bk).collect();
    let qv_l: Vec<f64> = (0..b.len()).map(|k| h * h * grid.time(k)).collect();
    let density = l.iter().zip(&qv_l).map(|(&lk, &q)| (lk - 0.5 * q).exp()).collect();
    MeasureChange { l, qv_l, density }
}

/// `E[exp(<L>_T / 2)] = exp(h^2 T / 2)` for a constant integrand.
pub fn novikov_value(h: f64, horizon: f64) -> f64 {
    (0.5 * h * h * horizon).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointReport {
    pub step: usize,
    pub time: f64,
    /// `sum_i density_i * z_i / n`
    pub weighted_mean: f64,
    pub weighted_se: f64,
    pub drift_removed: bool,
    pub density_mean: f64,
    pub density_se: f64,
    pub density_is_martingale: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleReport {
    pub z0: f64,
    pub n_paths: usize,
    pub novikov: f64,
    pub checkpoints: Vec<CheckpointReport>,
}

impl MartingaleReport {
    pub fn all_pass(&self) -> bool {
        self.checkpoints.iter().all(|c| c.drift_removed && c.density_is_martingale)
    }
}

#[derive(Debug, Clone, Default)]
struct Moments {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    fn se(&self) -> f64 {
        let n = self.n as f64;
        let var = (self.sum_sq - self.sum * self.sum / n) / (n - 1.0);
        (var.max(0.0) / n).sqrt()
    }
}

struct Accumulator {
    weighted: Vec<Moments>,
    density: Vec<Moments>,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Self { weighted: vec![Moments::default(); n], density: vec![Moments::default(); n] }
    }

    fn push(&mut self, checkpoints: &[usize], path: &SemimartingalePath, mc: &MeasureChange) {
        for (j, &k) in checkpoints.iter().enumerate() {
            self.weighted[j].push(mc.density[k] * path.z[k]);
            self.density[j].push(mc.density[k]);
        }
    }

    fn finish(self, grid: &TimeGrid, z0: f64, h: f64, checkpoints: &[usize]) -> MartingaleReport {
        let n_paths = self.weighted.first().map_or(0, |m| m.n);
        let checkpoints = checkpoints
            .iter()
            .zip(self.weighted.iter().zip(&self.density))
            .map(|(&step, (w, d))| {
                let (wm, wse) = (w.mean(), w.se());
                let (dm, dse) = (d.mean(), d.se());
                CheckpointReport {
                    step,
                    time: grid.time(step),
                    weighted_mean: wm,
                    weighted_se: wse,
                    drift_removed: (wm - z0).abs() <= 3.0 * wse,
                    density_mean: dm,
                    density_se: dse,
                    density_is_martingale: (dm - 1.0).abs() <= 3.0 * dse,
                }
            })
            .collect();
        MartingaleReport { z0, n_paths, novikov: novikov_value(h, grid.horizon()), checkpoints }
    }
}

fn check_checkpoints(grid: &TimeGrid, checkpoints: &[usize]) -> Result<()> {
    if checkpoints.is_empty() {
        return Err(Error::invalid("at least one checkpoint is required"));
    }
    if let Some(&k) = checkpoints.iter().find(|&&k| k > grid.n_steps()) {
        return Err(Error::invalid(format!("checkpoint {k} beyond horizon")));
    }
    Ok(())
}

/// Checks that `Z` has constant expectation under the reweighted measure.
pub fn martingale_diagnostic(
    grid: &TimeGrid,
    h: f64,
    paths: &[SemimartingalePath],
    mcs: &[MeasureChange],
    checkpoints: &[usize],
) -> Result<MartingaleReport> {
    if paths.len() != mcs.len() {
        return Err(Error::LengthMismatch(format!("{} paths but {} measure changes", paths.len(), mcs.len())));
    }
    if paths.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: paths.len() });
    }
    check_checkpoints(grid, checkpoints)?;
    let mut acc = Accumulator::new(checkpoints.len());
    for (p, mc) in paths.iter().zip(mcs) {
        acc.push(checkpoints, p, mc);
    }
    Ok(acc.finish(grid, paths[0].z[0], h, checkpoints))
}

/// Streaming form of [`gen_semimartingale`] + [`stochastic_exponential`] +
/// [`martingale_diagnostic`] that keeps one path in memory at a time.
/// Produces exactly the same report as the batch route.
pub fn girsanov_check(
    grid: &TimeGrid,
    model: &UnderlyingModel,
    h: f64,
    n_paths: usize,
    seed: u64,
    checkpoints: &[usize],
) -> Result<MartingaleReport> {
    let model = UnderlyingModel::new(model.z0, model.drift, model.sigma)?;
    if n_paths < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n_paths });
    }
    check_checkpoints(grid, checkpoints)?;
    let mut acc = Accumulator::new(checkpoints.len());
    for i in 0..n_paths {
        let path = semimartingale_path(grid, &model, seed, i);
        let mc = stochastic_exponential(h, &path.b, grid);
        acc.push(checkpoints, &path, &mc);
    }
    let report = acc.finish(grid, model.z0, h, checkpoints);
    if !report.novikov.is_finite() {
        return Err(Error::NonFinite("Novikov bound"));
    }
    let finite = |c: &CheckpointReport| {
        [c.density_mean, c.density_se, c.weighted_mean, c.weighted_se].iter().all(|x| x.is_finite())
    };
    if !report.checkpoints.iter().all(finite) {
        return Err(Error::NonFinite("density moments"));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mean_var(xs: impl Iterator<Item = f64>) -> (f64, f64, usize) {
        let v: Vec<f64> = xs.collect();
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, var, v.len())
    }

    #[test]
    fn grid_rejects_degenerate_input() {
        assert!(TimeGrid::new(0.0, 10).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
        let g = TimeGrid::new(2.0, 4).unwrap();
        assert_eq!(g.dt(), 0.5);
        assert_eq!(g.time(4), 2.0);
        assert_eq!(g.remaining(1), 1.5);
    }

    #[test]
    fn single_step_brownian_starts_at_zero() {
        let g = TimeGrid::new(1.0, 1).unwrap();
        let b = gen_brownian(&g, 1, 99).unwrap();
        assert_eq!(b[0].len(), 2);
        assert_eq!(b[0][0], 0.0);
        assert!(b[0][1].is_finite());
    }

    #[test]
    fn brownian_is_deterministic() {
        let g = TimeGrid::new(1.0, 50).unwrap();
        assert_eq!(gen_brownian(&g, 3, 5).unwrap(), gen_brownian(&g, 3, 5).unwrap());
        assert_ne!(gen_brownian(&g, 1, 5).unwrap(), gen_brownian(&g, 1, 6).unwrap());
    }

    #[test]
    fn brownian_terminal_moments() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        let n = 100_000;
        let (m, var, _) = mean_var(gen_brownian(&g, n, 2024).unwrap().into_iter().map(|b| b[4]));
        let se = 1.0 / (n as f64).sqrt();
        assert!(m.abs() < 3.0 * se, "mean {m}");
        // SE of the sample variance of N(0,1) is sqrt(2/(n-1)).
        assert!((var - 1.0).abs() < 3.0 * (2.0 / (n as f64 - 1.0)).sqrt(), "var {var}");
    }

    #[test]
    fn semimartingale_degenerate_cases() {
        let g = TimeGrid::new(1.0, 10).unwrap();
        let flat = gen_semimartingale(&g, &UnderlyingModel::new(5.0, 0.0, 0.0).unwrap(), 1, 1).unwrap();
        assert!(flat[0].z.iter().all(|&z| z == 5.0));
        let drift = gen_semimartingale(&g, &UnderlyingModel::new(0.0, 0.2, 0.0).unwrap(), 1, 1).unwrap();
        assert_relative_eq!(drift[0].z[10], 0.2, epsilon = 1e-15);
        assert!(UnderlyingModel::new(0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn semimartingale_invariant_holds_exactly() {
        let g = TimeGrid::new(1.5, 30).unwrap();
        let model = UnderlyingModel::new(3.0, -0.4, 0.7).unwrap();
        for p in gen_semimartingale(&g, &model, 5, 8).unwrap() {
            assert_eq!(p.b[0], 0.0);
            for k in 0..=30 {
                assert_eq!(p.z[k], 3.0 + 0.7 * p.b[k] + -0.4 * g.time(k));
            }
        }
    }

    #[test]
    fn semimartingale_terminal_mean_and_variance_growth() {
        let g = TimeGrid::new(1.0, 20).unwrap();
        let model = UnderlyingModel::new(0.0, 0.2, 1.0).unwrap();
        let n = 100_000;
        let paths = gen_semimartingale(&g, &model, n, 77).unwrap();
        let (m, _, _) = mean_var(paths.iter().map(|p| p.z[20]));
        assert!((m - 0.2).abs() < 3.0 / (n as f64).sqrt());
        for k in [5, 10, 20] {
            let (_, var, _) = mean_var(paths.iter().map(|p| p.z[k]));
            let expected = g.time(k);
            assert!((var / expected - 1.0).abs() < 0.05, "k={k} var={var}");
        }
    }

    #[test]
    fn indexed_path_matches_batch() {
        let g = TimeGrid::new(1.0, 12).unwrap();
        let model = UnderlyingModel::new(1.0, 0.1, 0.5).unwrap();
        let batch = gen_semimartingale(&g, &model, 4, 31).unwrap();
        assert_eq!(semimartingale_path(&g, &model, 31, 3), batch[3]);
    }

    #[test]
    fn scenarios_reject_bad_anchor() {
        let g = TimeGrid::new(1.0, 10).unwrap();
        let model = UnderlyingModel::new(0.0, 0.0, 1.0).unwrap();
        let prefix = vec![0.0; 11];
        assert!(conditional_scenarios(&prefix, &g, 11, &model, 5, 0).is_err());
        assert!(conditional_scenarios(&prefix, &g, 3, &model, 0, 0).is_err());
    }

    #[test]
    fn terminal_anchor_gives_empty_tails() {
        let g = TimeGrid::new(1.0, 10).unwrap();
        let model = UnderlyingModel::new(0.0, 0.3, 1.0).unwrap();
        let prefix: Vec<f64> = (0..=10).map(|k| k as f64).collect();
        let s = conditional_scenarios(&prefix, &g, 10, &model, 7, 0).unwrap();
        assert_eq!(s.steps, vec![10]);
        assert!(s.paths.iter().all(|p| p == &vec![10.0]));
        assert_relative_eq!(s.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_sigma_scenarios_are_identical_drift_lines() {
        let g = TimeGrid::new(1.0, 10).unwrap();
        let model = UnderlyingModel::new(0.0, 0.5, 0.0).unwrap();
        let prefix = vec![2.0; 5];
        let s = conditional_scenarios(&prefix, &g, 4, &model, 6, 3).unwrap();
        assert_eq!(s.anchor_value, 2.0);
        for p in &s.paths {
            assert_eq!(p, &s.paths[0]);
            assert_relative_eq!(p[6], 2.0 + 0.5 * 0.6, epsilon = 1e-12);
        }
    }

    #[test]
    fn scenario_forward_mean_matches_conditional_oracle() {
        let g = TimeGrid::new(2.0, 40).unwrap();
        let model = UnderlyingModel::new(0.0, 0.3, 1.0).unwrap();
        let prefix = vec![1.5; 11];
        let m = 50_000;
        let s = conditional_scenarios(&prefix, &g, 10, &model, m, 12).unwrap();
        let (mean, var, _) = mean_var(s.iter().map(|p| p.value_at(40)));
        let oracle = 1.5 + 0.3 * (2.0 - g.time(10));
        assert!((mean - oracle).abs() < 3.0 * (var / m as f64).sqrt());
    }

    #[test]
    fn sparse_scenarios_match_full_terminal_distribution() {
        let g = TimeGrid::new(1.0, 100).unwrap();
        let model = UnderlyingModel::new(0.0, 0.0, 2.0).unwrap();
        let m = 40_000;
        let s = scenarios_at(0.0, &g, 36, &model, &[100], m, 4).unwrap();
        let (mean, var, _) = mean_var(s.iter().map(|p| p.value_at(100)));
        let expected_var = 4.0 * g.remaining(36);
        assert!(mean.abs() < 3.0 * (expected_var / m as f64).sqrt());
        assert!((var / expected_var - 1.0).abs() < 3.0 * (2.0 / m as f64).sqrt());
        assert!(scenarios_at(0.0, &g, 36, &model, &[36], 1, 4).is_err());
    }

    #[test]
    fn measure_change_identities() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        let b = gen_brownian(&g, 1, 3).unwrap().remove(0);
        let id = stochastic_exponential(0.0, &b, &g);
        assert!(id.density.iter().all(|&d| d == 1.0));

        let mu = 0.3;
        let mc = stochastic_exponential(mu, &b, &g);
        assert_eq!(mc.density[0], 1.0);
        assert_relative_eq!(mc.density[4], (-mu * b[4] - 0.5 * mu * mu * 1.0).exp(), epsilon = 1e-14);
        assert!(mc.qv_l.windows(2).all(|w| w[1] >= w[0]));
        assert!(mc.density.iter().all(|&d| d > 0.0));
    }

    #[test]
    fn novikov_closed_forms() {
        assert_eq!(novikov_value(0.0, 3.0), 1.0);
        assert_relative_eq!(novikov_value(1.0, 2.0), std::f64::consts::E, epsilon = 1e-15);
        assert_relative_eq!(novikov_value(0.2, 1.0), 0.02f64.exp(), epsilon = 1e-15);
    }

    #[test]
    fn density_has_unit_expectation() {
        let g = TimeGrid::new(1.0, 10).unwrap();
        let n = 100_000;
        let bs = gen_brownian(&g, n, 41).unwrap();
        let (m, var, _) = mean_var(bs.iter().map(|b| stochastic_exponential(0.2, b, &g).density[10]));
        assert!((m - 1.0).abs() < 3.0 * (var / n as f64).sqrt(), "E[density] = {m}");
    }

    #[test]
    fn diagnostic_without_drift_reduces_to_plain_mean() {
        let g = TimeGrid::new(1.0, 10).unwrap();
        let model = UnderlyingModel::new(1.0, 0.0, 1.0).unwrap();
        let paths = gen_semimartingale(&g, &model, 20_000, 5).unwrap();
        let mcs: Vec<_> = paths.iter().map(|p| stochastic_exponential(0.0, &p.b, &g)).collect();
        let r = martingale_diagnostic(&g, 0.0, &paths, &mcs, &[10]).unwrap();
        let plain = paths.iter().map(|p| p.z[10]).sum::<f64>() / paths.len() as f64;
        assert_relative_eq!(r.checkpoints[0].weighted_mean, plain, epsilon = 1e-12);
        assert!(r.all_pass());
        assert!(martingale_diagnostic(&g, 0.0, &paths, &mcs[1..], &[10]).is_err());
    }

    #[test]
    fn streaming_check_matches_batch_route() {
        let g = TimeGrid::new(1.0, 8).unwrap();
        let model = UnderlyingModel::new(0.0, 0.2, 1.0).unwrap();
        let paths = gen_semimartingale(&g, &model, 500, 9).unwrap();
        let mcs: Vec<_> = paths.iter().map(|p| stochastic_exponential(0.2, &p.b, &g)).collect();
        let batch = martingale_diagnostic(&g, 0.2, &paths, &mcs, &[4, 8]).unwrap();
        let stream = girsanov_check(&g, &model, 0.2, 500, 9, &[4, 8]).unwrap();
        assert_eq!(batch, stream);
    }
}
