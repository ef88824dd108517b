//! Monte Carlo simulation of the Kendall random walk.
//!
//! Every path (or renewal count) `k` draws from its own ChaCha stream
//! `(seed, k)`, and each step consumes exactly three uniforms (step size,
//! branch selector, Pareto factor), so results do not depend on how work is
//! split across threads.

use std::io::Write;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::StepDistribution;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default cap on the number of steps of a single walk.
pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

/// Independent generator for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw from the open interval `(0, 1)`.
#[inline]
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Open01)
}

/// Quantile of `π_{2α}` at `u`.
#[inline]
pub fn pareto_factor<T: Real>(u: T, alpha: T) -> T {
    (T::one() - u).powf(-(T::lit(2.0) * alpha).recip())
}

#[inline]
fn step_unchecked<T: Real>(s_prev: T, t_next: T, u: T, theta: T, alpha: T) -> T {
    let (hi, lo) = if s_prev >= t_next {
        (s_prev, t_next)
    } else {
        (t_next, s_prev)
    };
    let rho = (lo / hi).powf(alpha);
    if u <= rho {
        hi * theta
    } else {
        hi
    }
}

/// One transition: `M = max(s, T)`, `ϱ = (min/M)^α`; returns `M θ` when
/// `u ≤ ϱ` and `M` otherwise.
pub fn step<T: Real>(s_prev: T, t_next: T, u: T, theta: T, alpha: T) -> Result<T> {
    if !(s_prev >= T::zero() && t_next >= T::zero()) {
        return Err(Error::InvalidInput("walk state and step must be >= 0".into()));
    }
    if s_prev == T::zero() && t_next == T::zero() {
        return Err(Error::DegenerateState("both walk state and step are zero".into()));
    }
    if !(u > T::zero() && u < T::one()) {
        return Err(Error::InvalidInput(format!("u = {u} outside (0,1)")));
    }
    if !(theta >= T::one()) {
        return Err(Error::InvalidInput(format!("theta = {theta} must be >= 1")));
    }
    if !(alpha > T::zero()) {
        return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
    }
    Ok(step_unchecked(s_prev, t_next, u, theta, alpha))
}

/// One draw from `δ_x ▵_α δ_y`.
pub fn sample_pair_convolution<T: Real, R: Rng + ?Sized>(x: T, y: T, alpha: T, rng: &mut R) -> Result<T> {
    if !(x >= T::zero() && y >= T::zero()) {
        return Err(Error::InvalidInput(format!("x, y must be >= 0, got ({x}, {y})")));
    }
    let u = T::lit(open_unit(rng));
    let theta = pareto_factor(T::lit(open_unit(rng)), alpha);
    if x == T::zero() && y == T::zero() {
        return Ok(T::zero());
    }
    if x == T::zero() || y == T::zero() {
        return Ok(x.max(y));
    }
    Ok(step_unchecked(x, y, u, theta, alpha))
}

/// Simulation parameters.
#[derive(Clone, Debug)]
pub struct WalkConfig<T: Real> {
    pub step: StepDistribution<T>,
    pub seed: u64,
    pub max_steps: u64,
}

impl<T: Real> WalkConfig<T> {
    pub fn new(step: StepDistribution<T>, seed: u64) -> Self {
        Self {
            step,
            seed,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Result<Self> {
        if max_steps == 0 {
            return Err(Error::InvalidParameter("max_steps must be >= 1".into()));
        }
        self.max_steps = max_steps;
        Ok(self)
    }

    pub fn alpha(&self) -> T {
        self.step.alpha()
    }

    /// A fresh walker on substream `id`, started at the identity `S₀ = 0`.
    pub fn walker(&self, id: u64) -> Walker<'_, T> {
        Walker {
            config: self,
            rng: substream(self.seed, id),
            state: T::zero(),
            steps: 0,
        }
    }
}

/// Incremental generator of one trajectory `S₁, S₂, …`.
pub struct Walker<'a, T: Real> {
    config: &'a WalkConfig<T>,
    rng: ChaCha8Rng,
    state: T,
    steps: u64,
}

impl<T: Real> Walker<'_, T> {
    /// Advances one step and returns the new position.
    #[inline]
    pub fn advance(&mut self) -> T {
        let alpha = self.config.alpha();
        let t_next = self.config.step.quantile(T::lit(open_unit(&mut self.rng)));
        let u = T::lit(open_unit(&mut self.rng));
        let theta = pareto_factor(T::lit(open_unit(&mut self.rng)), alpha);
        self.state = step_unchecked(self.state, t_next, u, theta, alpha);
        self.steps += 1;
        self.state
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn position(&self) -> T {
        self.state
    }
}

/// A realized trajectory `S₁ … S_n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WalkPath<T> {
    pub values: Vec<T>,
}

impl<T: Real> WalkPath<T> {
    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0])
    }

    /// `#{k ≥ 1 : S_k ≤ t}`, which equals `N(t)` once the path has left
    /// `[0, t]`.
    pub fn count_at_most(&self, t: T) -> u64 {
        self.values.iter().take_while(|&&s| s <= t).count() as u64
    }
}

/// Path on substream `path_id`.
pub fn sample_path_indexed<T: Real>(config: &WalkConfig<T>, path_id: u64, n: u64) -> Result<WalkPath<T>> {
    if n > config.max_steps {
        return Err(Error::CapExceeded(format!(
            "requested {n} steps, cap is {}",
            config.max_steps
        )));
    }
    let mut w = config.walker(path_id);
    let values = (0..n).map(|_| w.advance()).collect();
    Ok(WalkPath { values })
}

/// Path on substream 0.
pub fn sample_path<T: Real>(config: &WalkConfig<T>, n: u64) -> Result<WalkPath<T>> {
    sample_path_indexed(config, 0, n)
}

/// Paths `0..n_paths`, in index order.
pub fn sample_paths<T: Real>(config: &WalkConfig<T>, n: u64, n_paths: u64) -> Result<Vec<WalkPath<T>>> {
    (0..n_paths)
        .into_par_iter()
        .map(|k| sample_path_indexed(config, k, n))
        .collect()
}

/// Values of `S_n` across `n_paths` independent paths.
pub fn sample_positions<T: Real>(config: &WalkConfig<T>, n: u64, n_paths: u64) -> Result<Vec<T>> {
    if n > config.max_steps {
        return Err(Error::CapExceeded(format!("requested {n} steps, cap is {}", config.max_steps)));
    }
    Ok((0..n_paths)
        .into_par_iter()
        .map(|k| {
            let mut w = config.walker(k);
            let mut s = T::zero();
            for _ in 0..n {
                s = w.advance();
            }
            s
        })
        .collect())
}

/// `N(t) = inf{n : S_{n+1} > t}` from one walker.
pub fn count_with_walker<T: Real>(walker: &mut Walker<'_, T>, t: T) -> Result<u64> {
    let cap = walker.config.max_steps;
    let mut count = 0u64;
    loop {
        if walker.advance() > t {
            return Ok(count);
        }
        count += 1;
        if walker.steps() >= cap {
            return Err(Error::Runaway(format!(
                "walk stayed below t = {t} for {cap} steps"
            )));
        }
    }
}

/// `N(t)` drawn with an external generator.
pub fn count_renewals<T: Real, R: Rng + ?Sized>(config: &WalkConfig<T>, t: T, rng: &mut R) -> Result<u64> {
    if !(t > T::zero()) {
        return Err(Error::InvalidInput(format!("t must be > 0, got {t}")));
    }
    let mut w = config.walker(0);
    w.rng = ChaCha8Rng::seed_from_u64(rng.gen());
    count_with_walker(&mut w, t)
}

/// `N(t)` for simulations `0..n_sims`, in index order.
pub fn simulate_counts<T: Real>(config: &WalkConfig<T>, t: T, n_sims: u64) -> Result<Vec<u64>> {
    if !(t > T::zero()) {
        return Err(Error::InvalidInput(format!("t must be > 0, got {t}")));
    }
    (0..n_sims)
        .into_par_iter()
        .map(|k| count_with_walker(&mut config.walker(k), t))
        .collect()
}

/// Sample moments of `N(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RenewalStats {
    pub n_sims: u64,
    pub mean: f64,
    pub var: f64,
    pub se_mean: f64,
    pub se_var: f64,
}

impl RenewalStats {
    pub fn from_counts(counts: &[u64]) -> Self {
        let n = counts.len() as f64;
        let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
        let (mut m2, mut m4) = (0.0, 0.0);
        for &c in counts {
            let d = c as f64 - mean;
            m2 += d * d;
            m4 += d * d * d * d;
        }
        let var = if n > 1.0 { m2 / (n - 1.0) } else { 0.0 };
        let m2n = m2 / n;
        let m4n = m4 / n;
        Self {
            n_sims: counts.len() as u64,
            mean,
            var,
            se_mean: (var / n).sqrt(),
            se_var: ((m4n - m2n * m2n).max(0.0) / n).sqrt(),
        }
    }
}

/// Mean and variance of `N(t)` with standard errors.
pub fn mc_renewal_stats<T: Real>(config: &WalkConfig<T>, t: T, n_sims: u64) -> Result<RenewalStats> {
    if n_sims < 100 {
        return Err(Error::InvalidInput(format!("n_sims must be >= 100, got {n_sims}")));
    }
    let counts = simulate_counts(config, t, n_sims)?;
    Ok(RenewalStats::from_counts(&counts))
}

/// Empirical and exact probabilities of the joint exceedance events of a
/// monotone walk at indices `k₁ < … < k_{m+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExceedanceEstimate {
    /// `P{S_{k_j} > x for all j}`.
    pub empirical_a: f64,
    /// `1 - F_{k₁}(x)`.
    pub analytic_a: f64,
    /// `P{S_{k_{m+1}} > x, S_{k_j} ≤ x for j ≤ m}`.
    pub empirical_b: f64,
    /// `F_{k_m}(x) - F_{k_{m+1}}(x)`.
    pub analytic_b: f64,
    pub se_a: f64,
    pub se_b: f64,
}

pub fn exceedance_check<T: Real>(config: &WalkConfig<T>, indices: &[u64], x: T, n_sims: u64) -> Result<ExceedanceEstimate> {
    if indices.len() < 2 || indices.len() > 5 {
        return Err(Error::InvalidInput("between 2 and 5 indices are supported".into()));
    }
    if indices[0] == 0 || indices.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("indices must be strictly increasing and >= 1".into()));
    }
    if n_sims == 0 {
        return Err(Error::InvalidInput("n_sims must be >= 1".into()));
    }
    let last = *indices.last().unwrap();
    let m = indices.len() - 1;
    let (hits_a, hits_b) = (0..n_sims)
        .into_par_iter()
        .map(|k| -> Result<(u64, u64)> {
            let path = sample_path_indexed(config, k, last)?;
            let at = |i: u64| path.values[(i - 1) as usize];
            let a = indices.iter().all(|&i| at(i) > x);
            let b = at(last) > x && indices[..m].iter().all(|&i| at(i) <= x);
            Ok((a as u64, b as u64))
        })
        .try_reduce(|| (0, 0), |p, q| Ok((p.0 + q.0, p.1 + q.1)))?;
    let n = n_sims as f64;
    let pa = hits_a as f64 / n;
    let pb = hits_b as f64 / n;
    let f = |k: u64| crate::williamson::fn_cdf(&config.step, k, x).map(|v| v.to_f64_lossy());
    Ok(ExceedanceEstimate {
        empirical_a: pa,
        analytic_a: 1.0 - f(indices[0])?,
        empirical_b: pb,
        analytic_b: f(indices[m - 1])? - f(last)?,
        se_a: (pa * (1.0 - pa) / n).sqrt(),
        se_b: (pb * (1.0 - pb) / n).sqrt(),
    })
}

/// Writes paths as `path_id,step_index,value` rows (steps counted from 1).
pub fn write_paths_csv<T: Real, W: Write>(paths: &[WalkPath<T>], mut out: W) -> std::io::Result<()> {
    writeln!(out, "path_id,step_index,value")?;
    for (id, p) in paths.iter().enumerate() {
        for (k, v) in p.values.iter().enumerate() {
            writeln!(out, "{},{},{:.16e}", id, k + 1, v.to_f64_lossy())?;
        }
    }
    Ok(())
}

/// Writes renewal counts in the path schema: `step_index` is 0 and `value`
/// is `N(t)`.
pub fn write_counts_csv<W: Write>(counts: &[u64], mut out: W) -> std::io::Result<()> {
    writeln!(out, "path_id,step_index,value")?;
    for (id, c) in counts.iter().enumerate() {
        writeln!(out, "{id},0,{c}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::catalog_lookup;

    fn cfg(name: &str, alpha: f64, seed: u64) -> WalkConfig<f64> {
        WalkConfig::new(catalog_lookup::<f64>(name, alpha, None).unwrap(), seed)
    }

    #[test]
    fn step_examples() {
        assert_eq!(step(1.0, 1.0, 0.999, 1.7, 1.0).unwrap(), 1.7);
        assert_eq!(step(1.0, 1.0, 0.001, 1.7, 1.0).unwrap(), 1.7);
        assert_eq!(step(0.7, 0.0, 0.3, 1.7, 1.0).unwrap(), 0.7);
        assert_eq!(step(1.0, 2.0, 0.9, 3.0, 1.0).unwrap(), 2.0);
        assert_eq!(step(1.0, 2.0, 0.4, 3.0, 1.0).unwrap(), 6.0);
        // Tie goes to the θ branch.
        assert_eq!(step(1.0, 2.0, 0.5, 3.0, 1.0).unwrap(), 6.0);
        assert!(matches!(step(0.0, 0.0, 0.5, 1.0, 1.0), Err(Error::DegenerateState(_))));
        assert!(step(1.0, 1.0, 0.5, 0.5, 1.0).is_err());
        assert!(step(1.0, 1.0, 1.0, 1.5, 1.0).is_err());
    }

    #[test]
    fn pair_sampler_identity_and_mixture_weight() {
        let mut rng = substream(3, 0);
        for _ in 0..100 {
            assert_eq!(sample_pair_convolution(0.0, 0.8, 1.0, &mut rng).unwrap(), 0.8);
        }
        let n = 100_000;
        let ones = (0..n)
            .filter(|_| sample_pair_convolution(0.5, 1.0, 1.0, &mut rng).unwrap() == 1.0)
            .count();
        let p = ones as f64 / n as f64;
        assert!((p - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt() + 1e-3);
    }

    #[test]
    fn dirac_path_of_length_one() {
        let c = cfg("dirac1", 1.0, 1);
        assert_eq!(sample_path(&c, 1).unwrap().values, vec![1.0]);
    }

    #[test]
    fn paths_are_nondecreasing_and_deterministic() {
        let c = cfg("uniform01", 1.0, 7);
        let a = sample_paths(&c, 50, 200).unwrap();
        let b = sample_paths(&c, 50, 200).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.is_nondecreasing()));
        // Same substream regardless of batch.
        assert_eq!(a[17], sample_path_indexed(&c, 17, 50).unwrap());
        let pos = sample_positions(&c, 50, 200).unwrap();
        assert!(pos.iter().zip(&a).all(|(s, p)| *s == p.values[49]));
    }

    #[test]
    fn cap_and_runaway_errors() {
        let c = cfg("uniform01", 1.0, 1).with_max_steps(10).unwrap();
        assert!(matches!(sample_path(&c, 11), Err(Error::CapExceeded(_))));
        assert!(matches!(simulate_counts(&c, 1e9, 3), Err(Error::Runaway(_))));
        assert!(cfg("uniform01", 1.0, 1).with_max_steps(0).is_err());
    }

    #[test]
    fn counts_below_support_are_zero() {
        let c = cfg("dirac1", 1.0, 5);
        let counts = simulate_counts(&c, 0.5, 1000).unwrap();
        assert!(counts.iter().all(|&n| n == 0));
        let s = mc_renewal_stats(&c, 0.5, 1000).unwrap();
        assert_eq!((s.mean, s.var), (0.0, 0.0));
        assert!(mc_renewal_stats(&c, 0.5, 99).is_err());
    }

    #[test]
    fn count_agrees_with_path_and_external_rng() {
        let c = cfg("pareto2alpha", 1.0, 11);
        let t = 5.0;
        for k in 0..200 {
            let n = count_with_walker(&mut c.walker(k), t).unwrap();
            let path = sample_path_indexed(&c, k, n + 1).unwrap();
            assert_eq!(path.count_at_most(t), n);
            assert!(path.values[n as usize] > t);
        }
        let mut rng = substream(1, 1);
        assert!(count_renewals(&c, t, &mut rng).is_ok());
    }

    #[test]
    fn zero_probability_and_mean_for_dirac() {
        let c = cfg("dirac1", 1.0, 2);
        let s = mc_renewal_stats(&c, 2.0, 20_000).unwrap();
        assert!((s.mean - 3.0).abs() < 4.0 * s.se_mean);
        let u = cfg("uniform01", 1.0, 2);
        let counts = simulate_counts(&u, 0.5, 20_000).unwrap();
        let p0 = counts.iter().filter(|&&n| n == 0).count() as f64 / 20_000.0;
        assert!((p0 - 0.5).abs() < 4.0 * (0.25f64 / 20_000.0).sqrt());
    }

    #[test]
    fn exceedance_examples() {
        let d = cfg("dirac1", 1.0, 4);
        let e = exceedance_check(&d, &[1, 2], 2.0, 1000).unwrap();
        assert_eq!(e.analytic_a, 0.0);
        assert_eq!(e.empirical_a, 0.0);
        let u = cfg("uniform01", 1.0, 4);
        let e = exceedance_check(&u, &[1, 2], 0.5, 50_000).unwrap();
        let f1 = crate::williamson::fn_cdf(&u.step, 1, 0.5).unwrap();
        let f2 = crate::williamson::fn_cdf(&u.step, 2, 0.5).unwrap();
        assert!((e.analytic_b - (f1 - f2)).abs() < 1e-15);
        assert!((e.empirical_b - e.analytic_b).abs() < 3.0 * e.se_b);
        let p = cfg("pareto2alpha", 1.0, 4);
        let e = exceedance_check(&p, &[2, 3, 5], 3.0, 50_000).unwrap();
        assert!((e.empirical_a - e.analytic_a).abs() < 3.0 * e.se_a);
        assert!((e.empirical_b - e.analytic_b).abs() < 3.0 * e.se_b.max(1e-4));
        assert!(exceedance_check(&p, &[2, 2], 3.0, 10).is_err());
    }

    #[test]
    fn csv_dump_schema() {
        let c = cfg("dirac1", 1.0, 1);
        let paths = sample_paths(&c, 2, 2).unwrap();
        let mut buf = Vec::new();
        write_paths_csv(&paths, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "path_id,step_index,value");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("0,1,1.0000000000000000e0"));
    }
}
