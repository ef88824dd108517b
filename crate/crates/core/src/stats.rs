//! Goodness-of-fit helpers for Monte Carlo checks.

use crate::scalar::Real;

/// Asymptotic Kolmogorov critical value at significance 0.01.
pub const KS_CRITICAL_1PCT: f64 = 1.628;

/// `1.628 / √n`.
pub fn ks_critical_value(n: usize) -> f64 {
    KS_CRITICAL_1PCT / (n as f64).sqrt()
}

/// One-sample Kolmogorov–Smirnov distance `sup |F_n - F|`.
///
/// `cdf_left` is the left limit `F(x-)`; it only matters when the reference
/// law has atoms. Ties in the sample are handled exactly.
pub fn ks_statistic<T, F, L>(samples: &[T], cdf: F, cdf_left: L) -> f64
where
    T: Real,
    F: Fn(T) -> T,
    L: Fn(T) -> T,
{
    if samples.is_empty() {
        return 0.0;
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("NaN in sample"));
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        let below = i as f64 / n;
        let at = j as f64 / n;
        d = d
            .max((cdf_left(x).to_f64_lossy() - below).abs())
            .max((cdf(x).to_f64_lossy() - at).abs());
        i = j;
    }
    d
}

/// [`ks_statistic`] for a continuous reference law.
pub fn ks_statistic_continuous<T: Real, F: Fn(T) -> T>(samples: &[T], cdf: F) -> f64 {
    ks_statistic(samples, &cdf, &cdf)
}

/// Sample mean and unbiased variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, if n > 1.0 { ss / (n - 1.0) } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_sample_of_uniform() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let d = ks_statistic_continuous(&xs, |x: f64| x.clamp(0.0, 1.0));
        assert!((d - 0.005).abs() < 1e-12);
    }

    #[test]
    fn atoms_are_not_penalized() {
        let xs = vec![1.0f64; 50];
        let d = ks_statistic(&xs, |x: f64| if x >= 1.0 { 1.0 } else { 0.0 }, |x: f64| if x > 1.0 { 1.0 } else { 0.0 });
        assert_eq!(d, 0.0);
        let mixed: Vec<f64> = (0..100).map(|i| if i < 50 { 1.0 } else { 2.0 }).collect();
        let d = ks_statistic(
            &mixed,
            |x: f64| if x >= 2.0 { 1.0 } else if x >= 1.0 { 0.5 } else { 0.0 },
            |x: f64| if x > 2.0 { 1.0 } else if x > 1.0 { 0.5 } else { 0.0 },
        );
        assert_eq!(d, 0.0);
    }

    #[test]
    fn critical_value() {
        assert!((ks_critical_value(100_000) - 0.005148).abs() < 1e-6);
    }

    #[test]
    fn moments() {
        let (m, v) = mean_var(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((v - 5.0 / 3.0).abs() < 1e-15);
    }
}
