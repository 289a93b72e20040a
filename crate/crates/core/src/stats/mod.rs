//! Descriptive statistics and the hypothesis tests applied per topic.

pub mod report;
pub mod special;

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use special::{chi_squared_sf, student_t_two_sided};

#[derive(Debug, Clone, Error, PartialEq, Serialize, Deserialize)]
pub enum StatsError {
    #[error("sample is empty")]
    Empty,
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("degenerate sample (zero variance)")]
    DegenerateSample,
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error("at least two groups are required")]
    TooFewGroups,
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("group {0} has zero variance")]
    ZeroVarianceGroup(usize),
    #[error("all observations tied")]
    AllTied,
    #[error("replicates must be at least 1")]
    NoReplicates,
}

fn check_finite(samples: &[f64]) -> Result<(), StatsError> {
    if samples.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(StatsError::NonFinite)
    }
}

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    v
}

fn median_of_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn median(samples: &[f64]) -> Result<f64, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::Empty);
    }
    check_finite(samples)?;
    Ok(median_of_sorted(&sorted(samples)))
}

/// Linear-interpolation percentile (`q` in [0, 1]) of a sorted slice.
fn percentile_of_sorted(v: &[f64], q: f64) -> f64 {
    let pos = q * (v.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = libm::ceil(pos) as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Mean with a second-pass correction term.
fn mean_of(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let first = samples.iter().sum::<f64>() / n;
    first + samples.iter().map(|x| x - first).sum::<f64>() / n
}

/// Central moments m2, m3, m4 (divided by n).
fn central_moments(samples: &[f64], mean: f64) -> (f64, f64, f64) {
    let n = samples.len() as f64;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (m2 / n, m3 / n, m4 / n)
}

fn sample_variance(samples: &[f64], mean: f64) -> f64 {
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    ss / (samples.len() as f64 - 1.0)
}

/// Moment skewness m3 / m2^{3/2}.
pub fn skewness(samples: &[f64]) -> Result<f64, StatsError> {
    if samples.len() < 2 {
        return Err(StatsError::TooFewObservations {
            needed: 2,
            got: samples.len(),
        });
    }
    check_finite(samples)?;
    let (m2, m3, _) = central_moments(samples, mean_of(samples));
    if m2 == 0.0 {
        return Err(StatsError::DegenerateSample);
    }
    Ok(m3 / libm::pow(m2, 1.5))
}

/// Moment excess kurtosis m4 / m2² − 3.
pub fn excess_kurtosis(samples: &[f64]) -> Result<f64, StatsError> {
    if samples.len() < 2 {
        return Err(StatsError::TooFewObservations {
            needed: 2,
            got: samples.len(),
        });
    }
    check_finite(samples)?;
    let (m2, _, m4) = central_moments(samples, mean_of(samples));
    if m2 == 0.0 {
        return Err(StatsError::DegenerateSample);
    }
    Ok(m4 / (m2 * m2) - 3.0)
}

/// One row of a descriptive table. Fields that need more data than available
/// (a standard deviation from one value, shape moments of a constant sample)
/// are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub std_dev: Option<f64>,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
}

pub fn summary_stats(samples: &[f64]) -> Result<SummaryStats, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::Empty);
    }
    check_finite(samples)?;
    let v = sorted(samples);
    let mean = mean_of(samples);
    let n = samples.len();
    Ok(SummaryStats {
        n,
        mean,
        median: median_of_sorted(&v),
        min: v[0],
        max: v[n - 1],
        std_dev: (n >= 2).then(|| libm::sqrt(sample_variance(samples, mean))),
        skewness: skewness(samples).ok(),
        excess_kurtosis: excess_kurtosis(samples).ok(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    BootstrapMedian,
    OneSampleT,
    KruskalWallis,
    Bartlett,
}

impl TestMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            TestMethod::BootstrapMedian => "bootstrap_median",
            TestMethod::OneSampleT => "one_sample_t",
            TestMethod::KruskalWallis => "kruskal_wallis",
            TestMethod::Bartlett => "bartlett",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: TestMethod,
    pub statistic: f64,
    pub p_value: f64,
    /// 95% interval, when the method yields one.
    pub ci: Option<(f64, f64)>,
    /// Degrees of freedom of the reference distribution, if any.
    pub df: Option<f64>,
    pub group_sizes: Vec<usize>,
    pub seed: Option<u64>,
}

/// Bootstrap test of H0: median = 0.
///
/// Draws `replicates` resamples of size n with replacement and records each
/// resample's median. The interval is the 2.5/97.5 percentile range of those
/// medians; the p-value is `2·min(Pr*(median ≤ 0), Pr*(median ≥ 0))` clamped
/// to [0, 1], so resampled medians exactly at zero count on both sides.
pub fn bootstrap_median_test(
    samples: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<TestResult, StatsError> {
    let n = samples.len();
    if n < 2 {
        return Err(StatsError::TooFewObservations { needed: 2, got: n });
    }
    if replicates == 0 {
        return Err(StatsError::NoReplicates);
    }
    check_finite(samples)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut resample = vec![0.0; n];
    let mut medians: Vec<f64> = (0..replicates)
        .map(|_| {
            for slot in resample.iter_mut() {
                *slot = samples[rng.random_range(0..n)];
            }
            resample.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
            median_of_sorted(&resample)
        })
        .collect();
    medians.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let r = replicates as f64;
    let at_or_below = medians.iter().filter(|&&m| m <= 0.0).count() as f64 / r;
    let at_or_above = medians.iter().filter(|&&m| m >= 0.0).count() as f64 / r;
    let p_value = (2.0 * at_or_below.min(at_or_above)).clamp(0.0, 1.0);
    Ok(TestResult {
        method: TestMethod::BootstrapMedian,
        statistic: median_of_sorted(&sorted(samples)),
        p_value,
        ci: Some((
            percentile_of_sorted(&medians, 0.025),
            percentile_of_sorted(&medians, 0.975),
        )),
        df: None,
        group_sizes: vec![n],
        seed: Some(seed),
    })
}

/// Classical one-sample t-test of H0: mean = 0.
pub fn one_sample_t_test(samples: &[f64]) -> Result<TestResult, StatsError> {
    let n = samples.len();
    if n < 2 {
        return Err(StatsError::TooFewObservations { needed: 2, got: n });
    }
    check_finite(samples)?;
    let mean = mean_of(samples);
    let sd = libm::sqrt(sample_variance(samples, mean));
    let df = (n - 1) as f64;
    let (statistic, p_value) = if sd == 0.0 {
        if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(mean), 0.0)
        }
    } else {
        let t = mean / (sd / libm::sqrt(n as f64));
        (t, student_t_two_sided(t, df))
    };
    Ok(TestResult {
        method: TestMethod::OneSampleT,
        statistic,
        p_value,
        ci: None,
        df: Some(df),
        group_sizes: vec![n],
        seed: None,
    })
}

fn check_groups(groups: &[Vec<f64>], min_size: usize) -> Result<(), StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups);
    }
    for (i, g) in groups.iter().enumerate() {
        if g.is_empty() {
            return Err(StatsError::EmptyGroup(i));
        }
        if g.len() < min_size {
            return Err(StatsError::TooFewObservations {
                needed: min_size,
                got: g.len(),
            });
        }
        check_finite(g)?;
    }
    Ok(())
}

/// Kruskal–Wallis H on mid-ranks, divided by the tie correction
/// `1 − Σ(t³ − t)/(N³ − N)`; p-value from χ² with (groups − 1) df.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<TestResult, StatsError> {
    check_groups(groups, 1)?;
    let mut pooled: Vec<(f64, usize)> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, xs)| xs.iter().map(move |&x| (x, g)))
        .collect();
    let n = pooled.len();
    if n < 3 {
        return Err(StatsError::TooFewObservations { needed: 3, got: n });
    }
    pooled.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));

    let mut rank_sums = vec![0.0; groups.len()];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        // Ranks i+1 ..= j share their average.
        let mid_rank = (i + 1 + j) as f64 / 2.0;
        for &(_, g) in &pooled[i..j] {
            rank_sums[g] += mid_rank;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let nf = n as f64;
    let correction = 1.0 - tie_term / (nf * nf * nf - nf);
    if correction <= 0.0 {
        return Err(StatsError::AllTied);
    }
    let sum_term: f64 = rank_sums
        .iter()
        .zip(groups)
        .map(|(r, g)| r * r / g.len() as f64)
        .sum();
    let h = (12.0 / (nf * (nf + 1.0)) * sum_term - 3.0 * (nf + 1.0)) / correction;
    let df = (groups.len() - 1) as f64;
    Ok(TestResult {
        method: TestMethod::KruskalWallis,
        statistic: h,
        p_value: chi_squared_sf(h, df),
        ci: None,
        df: Some(df),
        group_sizes: groups.iter().map(Vec::len).collect(),
        seed: None,
    })
}

/// Bartlett's test for equal variances across groups.
pub fn bartlett(groups: &[Vec<f64>]) -> Result<TestResult, StatsError> {
    check_groups(groups, 2)?;
    let k = groups.len() as f64;
    let mut n_total = 0.0;
    let mut pooled_ss = 0.0;
    let mut sum_log = 0.0;
    let mut sum_inv = 0.0;
    for (i, g) in groups.iter().enumerate() {
        let dof = g.len() as f64 - 1.0;
        let var = sample_variance(g, mean_of(g));
        if var <= 0.0 {
            return Err(StatsError::ZeroVarianceGroup(i));
        }
        n_total += g.len() as f64;
        pooled_ss += dof * var;
        sum_log += dof * libm::log(var);
        sum_inv += 1.0 / dof;
    }
    let pooled = pooled_ss / (n_total - k);
    let numerator = (n_total - k) * libm::log(pooled) - sum_log;
    let denominator = 1.0 + (sum_inv - 1.0 / (n_total - k)) / (3.0 * (k - 1.0));
    // Rounding can leave a tiny negative numerator for equal variances.
    let t = (numerator / denominator).max(0.0);
    let df = k - 1.0;
    Ok(TestResult {
        method: TestMethod::Bartlett,
        statistic: t,
        p_value: chi_squared_sf(t, df),
        ci: None,
        df: Some(df),
        group_sizes: groups.iter().map(Vec::len).collect(),
        seed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn summary_examples() {
        let s = summary_stats(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((s.mean, s.median, s.std_dev), (2.0, 2.0, Some(1.0)));
        assert_eq!(s.skewness, Some(0.0));
        assert_eq!(summary_stats(&[1.0, 2.0, 3.0, 4.0]).unwrap().median, 2.5);

        let flat = summary_stats(&[5.0, 5.0, 5.0]).unwrap();
        assert_eq!((flat.mean, flat.std_dev), (5.0, Some(0.0)));
        assert_eq!(flat.skewness, None);
        assert_eq!(
            skewness(&[5.0, 5.0, 5.0]),
            Err(StatsError::DegenerateSample)
        );
        assert_eq!(
            excess_kurtosis(&[5.0, 5.0, 5.0]),
            Err(StatsError::DegenerateSample)
        );

        let one = summary_stats(&[3.5]).unwrap();
        assert_eq!(one.std_dev, None);
        assert_eq!(summary_stats(&[]), Err(StatsError::Empty));
        assert_eq!(summary_stats(&[f64::NAN]), Err(StatsError::NonFinite));
    }

    #[test]
    fn shape_moments_match_reference() {
        // Reference: moment-based skewness and excess kurtosis, ddof=1 std.
        let x = [2.0, -1.0, 0.5, 3.5, -2.25, 1.0, 0.0, 4.0];
        let s = summary_stats(&x).unwrap();
        assert!(close(s.skewness.unwrap(), 0.049_517_479_099_881_09, 1e-12));
        assert!(close(
            s.excess_kurtosis.unwrap(),
            -1.054_306_518_197_125_8,
            1e-12
        ));
        assert!(close(s.std_dev.unwrap(), 2.139_916_136_541_003, 1e-12));
    }

    #[test]
    fn bootstrap_degenerate_samples() {
        let fives = bootstrap_median_test(&[5.0; 6], 200, 1).unwrap();
        assert_eq!(fives.ci, Some((5.0, 5.0)));
        assert_eq!(fives.p_value, 0.0);
        let zeros = bootstrap_median_test(&[0.0; 6], 200, 1).unwrap();
        assert_eq!(zeros.ci, Some((0.0, 0.0)));
        assert_eq!(zeros.p_value, 1.0);
        assert!(bootstrap_median_test(&[1.0], 200, 1).is_err());
        assert_eq!(
            bootstrap_median_test(&[1.0, 2.0], 0, 1),
            Err(StatsError::NoReplicates)
        );
    }

    #[test]
    fn bootstrap_is_seed_deterministic() {
        let x = [0.3, -1.2, 0.8, 2.2, -0.4, 0.1, 0.0];
        let a = bootstrap_median_test(&x, 200, 99).unwrap();
        let b = bootstrap_median_test(&x, 200, 99).unwrap();
        assert_eq!(a, b);
        assert!(a.ci.unwrap().0 <= a.ci.unwrap().1);
        assert!((0.0..=1.0).contains(&a.p_value));
    }

    #[test]
    fn t_test_reference() {
        let r = one_sample_t_test(&[0.5, -0.2, 1.3, 0.8, 0.1]).unwrap();
        assert!(close(r.statistic, 1.903_467_469_067_202_9, 1e-12));
        assert!(close(r.p_value, 0.129_719_069_380_267_92, 1e-10));
        assert_eq!(one_sample_t_test(&[0.0, 0.0]).unwrap().p_value, 1.0);
        assert_eq!(one_sample_t_test(&[2.0, 2.0]).unwrap().p_value, 0.0);
    }

    #[test]
    fn kruskal_wallis_examples() {
        let r = kruskal_wallis(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        assert!(close(r.statistic, 27.0 / 7.0, 1e-12));
        assert_eq!(r.df, Some(1.0));
        assert!(close(r.p_value, 0.049_534_613_435_626_915, 1e-10));

        let r = kruskal_wallis(&[vec![1.0, 3.0], vec![2.0, 4.0]]).unwrap();
        assert!(close(r.statistic, 0.6, 1e-12));

        let swapped = kruskal_wallis(&[vec![4.0, 5.0, 6.0], vec![1.0, 2.0, 3.0]]).unwrap();
        assert!(close(swapped.statistic, 27.0 / 7.0, 1e-12));

        // With ties, against an independent reference implementation.
        let r = kruskal_wallis(&[
            vec![1.0, 2.0, 2.0, 3.0],
            vec![2.0, 3.0, 4.0, 4.0, 5.0],
            vec![1.0, 1.0, 6.0],
        ])
        .unwrap();
        assert!(close(r.statistic, 2.761_624_396_135_273, 1e-12));
        assert!(close(r.p_value, 0.251_374_304_401_513_26, 1e-10));

        assert_eq!(
            kruskal_wallis(&[vec![2.0, 2.0], vec![2.0]]),
            Err(StatsError::AllTied)
        );
        assert_eq!(
            kruskal_wallis(&[vec![1.0, 2.0, 3.0]]),
            Err(StatsError::TooFewGroups)
        );
        assert_eq!(
            kruskal_wallis(&[vec![1.0, 2.0], vec![]]),
            Err(StatsError::EmptyGroup(1))
        );
    }

    #[test]
    fn bartlett_examples() {
        let equal = bartlett(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        assert!(equal.statistic.abs() < 1e-12);
        assert!(close(equal.p_value, 1.0, 1e-12));

        let r = bartlett(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]).unwrap();
        assert!(close(r.statistic, 0.714_059_364_205_471_4, 1e-12));
        assert!(close(r.p_value, 0.398_099_486_265_192_87, 1e-10));

        let r = bartlett(&[
            vec![1.5, 2.25, 3.0, 7.5],
            vec![2.0, 4.0, 6.0],
            vec![0.1, 0.3, 0.2, 0.9, 1.1],
        ])
        .unwrap();
        assert!(close(r.statistic, 7.479_375_402_258_01, 1e-11));
        assert!(close(r.p_value, 0.023_761_522_669_390_78, 1e-10));

        let g = vec![0.3, 1.7, -2.0];
        assert!(bartlett(&[g.clone(), g]).unwrap().statistic.abs() < 1e-12);
        assert_eq!(
            bartlett(&[vec![1.0, 2.0], vec![3.0, 3.0]]),
            Err(StatsError::ZeroVarianceGroup(1))
        );
    }
}
