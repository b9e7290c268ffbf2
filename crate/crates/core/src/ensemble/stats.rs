//! Summation, quantiles and the hypothesis tests used to compare ensembles.

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatError {
    #[error("sample is empty")]
    Empty,
    #[error("need at least {need} samples, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

/// Neumaier-compensated sum.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

pub fn mean(xs: &[f64]) -> f64 {
    compensated_sum(xs.iter().copied()) / xs.len() as f64
}

/// Unbiased sample variance; zero for fewer than two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss = compensated_sum(xs.iter().map(|x| (x - m) * (x - m)));
    ss / (xs.len() - 1) as f64
}

/// Quantile of a sorted sample by linear interpolation between order
/// statistics (Hyndman and Fan type 7).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Two-sided 95% Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054;
    let n = n as f64;
    let p = k as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if k as f64 == n {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
}

/// Complementary CDF of the Kolmogorov distribution.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value
/// (Stephens' small-sample correction). Needs at least 30 values per side.
pub fn compare_distributions(a: &[f64], b: &[f64], alpha: f64) -> Result<KsResult, StatError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatError::Empty);
    }
    let short = a.len().min(b.len());
    if short < 30 {
        return Err(StatError::TooFew {
            need: 30,
            got: short,
        });
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let p = kolmogorov_q(lambda);
    Ok(KsResult {
        statistic: d,
        p_value: p,
        alpha,
        reject: p < alpha,
    })
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
pub fn ks_against_cdf(
    sample: &[f64],
    cdf: impl Fn(f64) -> f64,
    alpha: f64,
) -> Result<KsResult, StatError> {
    if sample.is_empty() {
        return Err(StatError::Empty);
    }
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d
            .max(((i + 1) as f64 / n - f).abs())
            .max((f - i as f64 / n).abs());
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let p = kolmogorov_q(lambda);
    Ok(KsResult {
        statistic: d,
        p_value: p,
        alpha,
        reject: p < alpha,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    /// One-sided p-value for mean(a) > mean(b).
    pub p_greater: f64,
    pub p_two_sided: f64,
}

/// Welch's unequal-variance t-test.
pub fn welch_test(a: &[f64], b: &[f64]) -> Result<WelchResult, StatError> {
    let short = a.len().min(b.len());
    if short < 2 {
        return Err(StatError::TooFew {
            need: 2,
            got: short,
        });
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (sample_variance(a) / na, sample_variance(b) / nb);
    let se2 = va + vb;
    if !(se2 > 0.0) {
        return Err(StatError::Degenerate("both samples are constant".into()));
    }
    let t = (mean(a) - mean(b)) / se2.sqrt();
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| StatError::Degenerate(e.to_string()))?;
    let p_greater = 1.0 - dist.cdf(t);
    let p_two_sided = 2.0 * (1.0 - dist.cdf(t.abs()));
    Ok(WelchResult {
        t,
        df,
        p_greater,
        p_two_sided,
    })
}

/// Compares spreads: Welch's test on the squared deviations of each
/// sample from its own mean. `p_greater` is for var(a) > var(b).
pub fn variance_welch_test(a: &[f64], b: &[f64]) -> Result<WelchResult, StatError> {
    let dev = |xs: &[f64]| {
        let m = mean(xs);
        xs.iter().map(|x| (x - m) * (x - m)).collect::<Vec<_>>()
    };
    welch_test(&dev(a), &dev(b))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProportionTest {
    pub p1: f64,
    pub p2: f64,
    pub z: f64,
    /// One-sided p-value for p1 > p2.
    pub p_greater: f64,
}

/// Pooled two-proportion z-test of `k1/n1` against `k2/n2`.
pub fn two_proportion_test(
    k1: usize,
    n1: usize,
    k2: usize,
    n2: usize,
) -> Result<ProportionTest, StatError> {
    if n1 == 0 || n2 == 0 {
        return Err(StatError::Empty);
    }
    let (p1, p2) = (k1 as f64 / n1 as f64, k2 as f64 / n2 as f64);
    let pool = (k1 + k2) as f64 / (n1 + n2) as f64;
    let se = (pool * (1.0 - pool) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    if !(se > 0.0) {
        return Err(StatError::Degenerate("pooled proportion is 0 or 1".into()));
    }
    let z = (p1 - p2) / se;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(ProportionTest {
        p1,
        p2,
        z,
        p_greater: 1.0 - normal.cdf(z),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

/// Least-squares line through `(ln n, ln cv)`.
pub fn noise_scaling_fit(points: &[(f64, f64)]) -> Result<ScalingFit, StatError> {
    if points.len() < 3 {
        return Err(StatError::TooFew {
            need: 3,
            got: points.len(),
        });
    }
    for &(n, cv) in points {
        if !(cv > 0.0) || !cv.is_finite() {
            return Err(StatError::Degenerate(format!(
                "coefficient of variation {cv} at N0 = {n}"
            )));
        }
        if !(n > 0.0) {
            return Err(StatError::Degenerate(format!("scale {n}")));
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (mx, my) = (mean(&xs), mean(&ys));
    let sxx = compensated_sum(xs.iter().map(|x| (x - mx) * (x - mx)));
    if !(sxx > 0.0) {
        return Err(StatError::Degenerate("all scales are equal".into()));
    }
    let sxy = compensated_sum(xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss = compensated_sum(
        xs.iter()
            .zip(&ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2)),
    );
    let slope_se = (rss / (xs.len() - 2) as f64 / sxx).sqrt();
    Ok(ScalingFit {
        slope,
        intercept,
        slope_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp};

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
        let naive: f64 = xs.iter().sum();
        assert_ne!(naive, 2.0);
    }

    #[test]
    fn quantiles_interpolate() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&s, 0.5), 3.0);
        assert_eq!(quantile_sorted(&s, 0.05), 1.2);
        assert_eq!(quantile_sorted(&s, 0.95), 4.8);
        assert_eq!(quantile_sorted(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn wilson_contains_estimate() {
        let (lo, hi) = wilson_interval(0, 50);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.1);
        let (lo, hi) = wilson_interval(20, 100);
        assert!(lo < 0.2 && hi > 0.2);
        // tabulated value for 20/100
        assert!((lo - 0.1333).abs() < 1e-4 && (hi - 0.2888).abs() < 1e-4);
    }

    #[test]
    fn kolmogorov_tail_values() {
        // standard table: Q(1.36) ~ 0.049, Q(1.63) ~ 0.0098
        assert!((kolmogorov_q(1.36) - 0.0495).abs() < 1e-3);
        assert!((kolmogorov_q(1.628) - 0.01).abs() < 5e-4);
    }

    #[test]
    fn ks_separates_exponentials() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a: Vec<f64> = (0..10_000)
            .map(|_| Exp::new(1.0).unwrap().sample(&mut rng))
            .collect();
        let b: Vec<f64> = (0..10_000)
            .map(|_| Exp::new(2.0).unwrap().sample(&mut rng))
            .collect();
        assert!(compare_distributions(&a, &b, 0.01).unwrap().reject);
        assert_eq!(compare_distributions(&a, &[], 0.01), Err(StatError::Empty));
    }

    #[test]
    fn ks_calibration_under_null() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let reps = 100;
        let mut accepted = 0;
        for _ in 0..reps {
            let a: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
            let b: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
            if !compare_distributions(&a, &b, 0.01).unwrap().reject {
                accepted += 1;
            }
        }
        assert!(accepted >= 95, "{accepted}");
    }

    #[test]
    fn welch_matches_hand_computation() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [2.0, 4.0, 6.0, 8.0, 10.0];
        let r = welch_test(&a, &b).unwrap();
        // va/na = 1.6667/4, vb/nb = 10/5
        let se2: f64 = 5.0 / 12.0 + 2.0;
        assert!((r.t - (2.5 - 6.0) / se2.sqrt()).abs() < 1e-12);
        let df = se2 * se2 / ((5.0f64 / 12.0).powi(2) / 3.0 + 4.0 / 4.0);
        assert!((r.df - df).abs() < 1e-12);
        assert!(r.p_greater > 0.95);
        assert!((r.p_two_sided - 2.0 * (1.0 - r.p_greater)).abs() < 1e-12);
    }

    #[test]
    fn proportion_test_direction() {
        let r = two_proportion_test(60, 500, 30, 500).unwrap();
        assert!(r.z > 0.0 && r.p_greater < 0.01);
        assert!(matches!(
            two_proportion_test(0, 10, 0, 10),
            Err(StatError::Degenerate(_))
        ));
    }

    #[test]
    fn scaling_fit_of_synthetic_law() {
        let pts: Vec<(f64, f64)> = [1e2, 1e3, 1e4]
            .iter()
            .map(|&n: &f64| (n, 0.7 / n.sqrt()))
            .collect();
        let fit = noise_scaling_fit(&pts).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!(fit.slope_se < 1e-10);
        assert!(matches!(
            noise_scaling_fit(&[(1e2, 0.0), (1e3, 0.1), (1e4, 0.01)]),
            Err(StatError::Degenerate(_))
        ));
        assert!(matches!(
            noise_scaling_fit(&pts[..2]),
            Err(StatError::TooFew { .. })
        ));
    }
}
