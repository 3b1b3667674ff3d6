//! Return statistics, normality testing and excursion accounting.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::clearing::MarketCondition;
use crate::error::{Error, Result};

/// Minimum sample size for any test statistic.
pub const MIN_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReturnMode {
    Diff,
    LogDiff,
}

impl ReturnMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ReturnMode::Diff => "diff",
            ReturnMode::LogDiff => "log_diff",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub diffs: Vec<f64>,
}

impl ReturnSeries {
    pub fn len(&self) -> usize {
        self.diffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diffs.is_empty()
    }

    /// Step-to-step price changes, skipping any pair that touches a halted
    /// step.
    pub fn from_prices(prices: &[f64], halted: &[bool], mode: ReturnMode) -> Result<Self> {
        if prices.len() != halted.len() {
            return Err(Error::LengthMismatch(format!("{} prices, {} halt flags", prices.len(), halted.len())));
        }
        let mut diffs = Vec::with_capacity(prices.len().saturating_sub(1));
        for k in 1..prices.len() {
            if halted[k] || halted[k - 1] {
                continue;
            }
            diffs.push(match mode {
                ReturnMode::Diff => prices[k] - prices[k - 1],
                ReturnMode::LogDiff => {
                    if !(prices[k] > 0.0 && prices[k - 1] > 0.0) {
                        return Err(Error::NonFinite("log return of a nonpositive price"));
                    }
                    (prices[k] / prices[k - 1]).ln()
                }
            });
        }
        Ok(Self { diffs })
    }
}

fn require(xs: &[f64]) -> Result<()> {
    if xs.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData { needed: MIN_SAMPLES, got: xs.len() });
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("return series"));
    }
    Ok(())
}

/// Mean and central moments m2, m3, m4 (population normalization).
fn central_moments(xs: &[f64]) -> (f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (mean, m2 / n, m3 / n, m4 / n)
}

fn moments_checked(xs: &[f64]) -> Result<(f64, f64, f64, f64)> {
    require(xs)?;
    let m = central_moments(xs);
    // Relative to the scale of the data, so rounding noise in a constant
    // series still counts as zero variance.
    let scale = xs.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
    if m.1 <= (scale * 1e-14).powi(2) {
        return Err(Error::ZeroVariance);
    }
    Ok(m)
}

/// Sample skewness `m3 / m2^1.5`.
pub fn skewness(xs: &[f64]) -> Result<f64> {
    let (_, m2, m3, _) = moments_checked(xs)?;
    Ok(m3 / m2.powf(1.5))
}

/// Sample excess kurtosis `m4 / m2^2 - 3`.
pub fn excess_kurtosis(xs: &[f64]) -> Result<f64> {
    let (_, m2, _, m4) = moments_checked(xs)?;
    Ok(m4 / (m2 * m2) - 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JarqueBera {
    pub statistic: f64,
    /// Upper tail of chi-square with two degrees of freedom, `exp(-JB/2)`.
    pub p_value: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub n: usize,
}

pub fn jarque_bera_from_moments(n: usize, skewness: f64, excess_kurtosis: f64) -> JarqueBera {
    let statistic = n as f64 / 6.0 * (skewness * skewness + excess_kurtosis * excess_kurtosis / 4.0);
    JarqueBera { statistic, p_value: (-statistic / 2.0).exp(), skewness, excess_kurtosis, n }
}

pub fn jarque_bera(xs: &[f64]) -> Result<JarqueBera> {
    let (_, m2, m3, m4) = moments_checked(xs)?;
    Ok(jarque_bera_from_moments(xs.len(), m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailReport {
    pub threshold: f64,
    pub count: usize,
    pub n: usize,
    pub frequency: f64,
    /// `P(|N(0,1)| > z)`.
    pub benchmark: f64,
}

pub fn gaussian_two_sided_tail(z: f64) -> f64 {
    let normal = Normal::standard();
    2.0 * (1.0 - normal.cdf(z.abs()))
}

/// Fraction of standardized observations beyond `z` in absolute value.
pub fn tail_exceedance(xs: &[f64], z: f64) -> Result<TailReport> {
    let (mean, m2, _, _) = moments_checked(xs)?;
    let sd = m2.sqrt();
    let count = xs.iter().filter(|&&x| ((x - mean) / sd).abs() > z).count();
    Ok(TailReport {
        threshold: z,
        count,
        n: xs.len(),
        frequency: count as f64 / xs.len() as f64,
        benchmark: gaussian_two_sided_tail(z),
    })
}

/// Indices flagged by a robust threshold `|x - median| > k * 1.4826 * MAD`.
/// Intended for external series with no recorded jump flags.
pub fn mad_outliers(xs: &[f64], k: f64) -> Result<Vec<usize>> {
    require(xs)?;
    let median = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    };
    let med = median(&mut xs.to_vec());
    let mad = median(&mut xs.iter().map(|x| (x - med).abs()).collect());
    if mad == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let scale = k * 1.4826 * mad;
    Ok(xs.iter().enumerate().filter(|(_, x)| (*x - med).abs() > scale).map(|(i, _)| i).collect())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExcursionReport {
    pub n_bubbles: usize,
    pub n_depressions: usize,
    /// Length in steps of each bubble or depression episode, in order.
    pub durations: Vec<usize>,
    pub time_fraction_outside: f64,
    pub n_jumps: usize,
    pub jump_sizes: Vec<f64>,
}

impl ExcursionReport {
    pub fn max_duration(&self) -> usize {
        self.durations.iter().copied().max().unwrap_or(0)
    }

    pub fn max_abs_jump(&self) -> f64 {
        self.jump_sizes.iter().fold(0.0, |a, j| a.max(j.abs()))
    }
}

/// Counts contiguous bubble and depression runs and tallies recorded jumps.
pub fn excursions(conditions: &[MarketCondition], jumps: &[Option<f64>]) -> Result<ExcursionReport> {
    if conditions.len() != jumps.len() {
        return Err(Error::LengthMismatch(format!("{} conditions, {} jump flags", conditions.len(), jumps.len())));
    }
    let mut r = ExcursionReport::default();
    let mut outside = 0usize;
    let mut prev: Option<MarketCondition> = None;
    for &c in conditions {
        if c.is_excursion() {
            outside += 1;
            if prev == Some(c) {
                *r.durations.last_mut().expect("episode in progress") += 1;
            } else {
                r.durations.push(1);
                if c == MarketCondition::Bubble {
                    r.n_bubbles += 1;
                } else {
                    r.n_depressions += 1;
                }
            }
        }
        prev = Some(c);
    }
    r.jump_sizes = jumps.iter().flatten().copied().collect();
    r.n_jumps = r.jump_sizes.len();
    r.time_fraction_outside = if conditions.is_empty() { 0.0 } else { outside as f64 / conditions.len() as f64 };
    Ok(r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceGrowth {
    pub times: Vec<f64>,
    pub variances: Vec<f64>,
    /// Least-squares slope of a line through the origin.
    pub slope: f64,
    /// Centered coefficient of determination of that fit.
    pub r_squared: f64,
}

/// Across-path variance at each checkpoint and a through-origin linear fit
/// of variance against time.
pub fn variance_growth(paths: &[Vec<f64>], checkpoints: &[usize], times: &[f64]) -> Result<VarianceGrowth> {
    if paths.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: paths.len() });
    }
    if checkpoints.len() != times.len() || checkpoints.is_empty() {
        return Err(Error::LengthMismatch(format!("{} checkpoints, {} times", checkpoints.len(), times.len())));
    }
    let n = paths.len() as f64;
    let mut variances = Vec::with_capacity(checkpoints.len());
    for &k in checkpoints {
        let mut col = Vec::with_capacity(paths.len());
        for p in paths {
            col.push(
                *p.get(k).ok_or_else(|| Error::invalid(format!("checkpoint {k} beyond path length {}", p.len())))?,
            );
        }
        let mean = col.iter().sum::<f64>() / n;
        variances.push(col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0));
    }
    let stt: f64 = times.iter().map(|t| t * t).sum();
    if stt == 0.0 {
        return Err(Error::invalid("checkpoint times must not all be zero"));
    }
    let slope = times.iter().zip(&variances).map(|(t, v)| t * v).sum::<f64>() / stt;
    let ss_res: f64 = times.iter().zip(&variances).map(|(t, v)| (v - slope * t).powi(2)).sum();
    let vbar = variances.iter().sum::<f64>() / variances.len() as f64;
    let ss_tot: f64 = variances.iter().map(|v| (v - vbar).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    Ok(VarianceGrowth { times: times.to_vec(), variances, slope, r_squared })
}

/// Everything the run summary reports about a return series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnStats {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub jb_statistic: f64,
    pub jb_p_value: f64,
    pub tail3_frequency: f64,
    pub tail3_benchmark: f64,
}

impl ReturnStats {
    /// Moments where defined; NaN fields when the series is too short or
    /// constant.
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        let benchmark = gaussian_two_sided_tail(3.0);
        let mut s = ReturnStats {
            n,
            mean: f64::NAN,
            sd: f64::NAN,
            skewness: f64::NAN,
            excess_kurtosis: f64::NAN,
            jb_statistic: f64::NAN,
            jb_p_value: f64::NAN,
            tail3_frequency: f64::NAN,
            tail3_benchmark: benchmark,
        };
        if n > 0 {
            let (mean, m2, _, _) = central_moments(xs);
            s.mean = mean;
            s.sd = m2.sqrt();
        }
        if let Ok(jb) = jarque_bera(xs) {
            s.skewness = jb.skewness;
            s.excess_kurtosis = jb.excess_kurtosis;
            s.jb_statistic = jb.statistic;
            s.jb_p_value = jb.p_value;
        }
        if let Ok(t) = tail_exceedance(xs, 3.0) {
            s.tail3_frequency = t.frequency;
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;
    use MarketCondition::*;

    fn gaussian(n: usize, seed: u64) -> Vec<f64> {
        let mut r = rng::stream(seed, 0);
        (0..n).map(|_| r.sample::<f64, _>(StandardNormal)).collect()
    }

    #[test]
    fn kurtosis_of_gaussian_sample_near_zero() {
        let n = 100_000;
        let k = excess_kurtosis(&gaussian(n, 1)).unwrap();
        assert!(k.abs() < 3.0 * (24.0 / n as f64).sqrt(), "{k}");
    }

    #[test]
    fn two_point_sample_moments() {
        let xs: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_relative_eq!(excess_kurtosis(&xs).unwrap(), -2.0);
        assert_relative_eq!(skewness(&xs).unwrap(), 0.0);
    }

    #[test]
    fn constant_and_short_series_are_rejected() {
        assert!(matches!(excess_kurtosis(&[2.5; 20]), Err(Error::ZeroVariance)));
        assert!(matches!(skewness(&[1.0, 2.0]), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn jarque_bera_closed_forms() {
        let zero = jarque_bera_from_moments(600, 0.0, 0.0);
        assert_eq!((zero.statistic, zero.p_value), (0.0, 1.0));
        let jb = jarque_bera_from_moments(600, 0.0, 1.0);
        assert_relative_eq!(jb.statistic, 25.0);
        // Chi-square(2) survival function.
        let chi2 = statrs::distribution::ChiSquared::new(2.0).unwrap();
        assert_relative_eq!(jb.p_value, 1.0 - chi2.cdf(25.0), epsilon = 1e-12);
        assert_relative_eq!(jb.p_value, 3.726653172078671e-6, max_relative = 1e-12);
    }

    #[test]
    fn jarque_bera_size_under_the_null() {
        let rejections = (0..200).filter(|&s| jarque_bera(&gaussian(10_000, 1000 + s)).unwrap().p_value < 0.01).count();
        // Binomial(200, 0.01): mean 2, P(X > 8) < 1e-3.
        assert!(rejections <= 8, "{rejections}");
    }

    #[test]
    fn tail_benchmarks() {
        assert_relative_eq!(gaussian_two_sided_tail(3.0), 0.0026997960632601965, max_relative = 1e-9);
        let n = 200_000;
        let t = tail_exceedance(&gaussian(n, 4), 3.0).unwrap();
        let se = (t.benchmark * (1.0 - t.benchmark) / n as f64).sqrt();
        assert!((t.frequency - t.benchmark).abs() < 3.0 * se, "{t:?}");
        let zero = tail_exceedance(&gaussian(1000, 5), 0.0).unwrap();
        assert!(zero.frequency > 0.99);
    }

    #[test]
    fn returns_skip_halted_neighbours() {
        let p = [1.0, 2.0, 4.0, 4.0, 5.0, 7.0];
        let h = [false, false, false, true, false, false];
        assert_eq!(ReturnSeries::from_prices(&p, &h, ReturnMode::Diff).unwrap().diffs, vec![1.0, 2.0, 2.0]);
        let l = ReturnSeries::from_prices(&[1.0, 2.0], &[false, false], ReturnMode::LogDiff).unwrap();
        assert_relative_eq!(l.diffs[0], 2f64.ln());
    }

    #[test]
    fn excursion_examples() {
        let normal = excursions(&[Normal; 5], &[None; 5]).unwrap();
        assert_eq!(normal, ExcursionReport::default());
        let r = excursions(&[Normal, Bubble, Bubble, Normal], &[None, None, None, Some(-1.5)]).unwrap();
        assert_eq!((r.n_bubbles, r.n_depressions, r.n_jumps), (1, 0, 1));
        assert_eq!(r.durations, vec![2]);
        assert_relative_eq!(r.time_fraction_outside, 0.5);
        let r = excursions(&[Depression, Bubble, Bubble], &[None; 3]).unwrap();
        assert_eq!((r.n_bubbles, r.n_depressions, r.durations.clone()), (1, 1, vec![1, 2]));
        let fund = excursions(&[NonSpeculative, Halted, NonSpeculative], &[None; 3]).unwrap();
        assert_eq!(fund.time_fraction_outside, 0.0);
    }

    #[test]
    fn variance_growth_of_brownian_ensemble() {
        let n_paths = 4000;
        let steps = 100;
        let dt: f64 = 0.01;
        let paths: Vec<Vec<f64>> = (0..n_paths)
            .map(|i| {
                let mut r = rng::stream(77, i);
                let mut z = 0.0;
                let mut p = vec![0.0];
                for _ in 0..steps {
                    z += 2.0 * dt.sqrt() * r.sample::<f64, _>(StandardNormal);
                    p.push(z);
                }
                p
            })
            .collect();
        let ks = [25, 50, 75, 100];
        let ts: Vec<f64> = ks.iter().map(|&k| k as f64 * dt).collect();
        let g = variance_growth(&paths, &ks, &ts).unwrap();
        // sigma^2 = 4, SE of a variance estimate ~ sqrt(2/n).
        assert!((g.slope - 4.0).abs() < 4.0 * 3.0 * (2.0 / n_paths as f64).sqrt(), "{g:?}");
        assert!(g.r_squared > 0.99);

        let flat = vec![vec![3.0; 10]; 5];
        let g = variance_growth(&flat, &[2, 5, 9], &[2.0, 5.0, 9.0]).unwrap();
        assert_eq!(g.slope, 0.0);
    }

    #[test]
    fn bounded_ensemble_variance_respects_interval_bound() {
        // Paths confined to [lo, hi] have variance at most (hi - lo)^2 / 4.
        let (lo, hi) = (4.0, 6.0);
        let paths: Vec<Vec<f64>> = (0..500)
            .map(|i| {
                let mut r = rng::stream(3, i);
                (0..50).map(|_| r.random_range(lo..=hi)).collect()
            })
            .collect();
        let g = variance_growth(&paths, &[10, 20, 49], &[10.0, 20.0, 49.0]).unwrap();
        assert!(g.variances.iter().all(|&v| v <= (hi - lo) * (hi - lo) / 4.0));
    }

    #[test]
    fn mad_detector_finds_planted_jumps() {
        let mut xs = gaussian(1000, 9);
        xs[100] += 25.0;
        xs[700] -= 30.0;
        assert_eq!(mad_outliers(&xs, 6.0).unwrap(), vec![100, 700]);
    }

    #[test]
    fn return_stats_tolerate_short_series() {
        let s = ReturnStats::of(&[1.0, 2.0]);
        assert_eq!(s.n, 2);
        assert!(s.jb_p_value.is_nan());
        assert_relative_eq!(s.mean, 1.5);
    }

    proptest! {
        #[test]
        fn jb_p_value_in_unit_interval_and_monotone(a in 0.0f64..1e4, b in 0.0f64..1e4) {
            let pa = (-a / 2.0).exp();
            let pb = (-b / 2.0).exp();
            let (ja, jb) = (jarque_bera_from_moments(6, a.sqrt(), 0.0), jarque_bera_from_moments(6, b.sqrt(), 0.0));
            prop_assert!((0.0..=1.0).contains(&ja.p_value));
            prop_assert!((ja.p_value - pa).abs() < 1e-12 && (jb.p_value - pb).abs() < 1e-12);
            if ja.statistic < jb.statistic { prop_assert!(ja.p_value >= jb.p_value); }
        }

        #[test]
        fn excursions_bound_jumps_and_fraction(
            labels in prop::collection::vec(0u8..5, 0..60),
            seed in any::<u64>(),
        ) {
            let conds: Vec<MarketCondition> = labels
                .iter()
                .map(|l| [NonSpeculative, Normal, Bubble, Depression, Halted][*l as usize])
                .collect();
            // Jumps are only recorded on the step that ends an excursion.
            let jumps: Vec<Option<f64>> = (0..conds.len())
                .map(|i| (i > 0 && conds[i - 1].is_excursion() && !conds[i].is_excursion() && seed % 2 == 0).then_some(1.0))
                .collect();
            let r = excursions(&conds, &jumps).unwrap();
            prop_assert!((0.0..=1.0).contains(&r.time_fraction_outside));
            prop_assert!(r.n_jumps <= r.n_bubbles + r.n_depressions + 1);
            prop_assert_eq!(r.durations.iter().sum::<usize>(), conds.iter().filter(|c| c.is_excursion()).count());
        }
    }
}
