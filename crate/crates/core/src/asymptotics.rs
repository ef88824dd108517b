//! Finite-level checks of the regular-variation limit theorems for the
//! renewal function, and Monte Carlo checks of the limit laws of `N(t)` and
//! `S_n`.

use std::io::Write;

use serde::Serialize;

use crate::catalog::{StepDistribution, StepLaw};
use crate::error::{Error, Result};
use crate::renewal::{renewal_r, renewal_r_derivative};
use crate::scalar::Real;
use crate::stats::{ks_critical_value, ks_statistic_continuous, mean_var};
use crate::walk::{sample_positions, simulate_counts, WalkConfig};
use crate::williamson::transform_parts;

/// A finite-level value next to its limit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticsReport<T> {
    pub quantity: String,
    pub x: T,
    pub finite: T,
    pub limit: T,
    /// Relative error, or absolute error when the limit is zero.
    pub rel_error: T,
}

impl<T: Real> AsymptoticsReport<T> {
    pub fn new(quantity: impl Into<String>, x: T, finite: T, limit: T) -> Self {
        let err = (finite - limit).abs();
        let rel_error = if limit == T::zero() { err } else { err / limit.abs() };
        Self {
            quantity: quantity.into(),
            x,
            finite,
            limit,
            rel_error,
        }
    }
}

fn require_theta_below_alpha<T: Real>(dist: &StepDistribution<T>) -> Result<T> {
    let theta = dist.theta();
    if theta >= dist.alpha() {
        return Err(Error::OutOfScope(format!(
            "regular-variation index θ = {theta} must be below α = {}",
            dist.alpha()
        )));
    }
    Ok(theta)
}

fn require_large<T: Real>(x: T) -> Result<()> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::InvalidInput(format!("x must be positive and finite, got {x}")));
    }
    Ok(())
}

/// `c = ((α - θ)/α)² (2α - θ)`.
pub fn blackwell_constant<T: Real>(alpha: T, theta: T) -> T {
    let r = (alpha - theta) / alpha;
    r * r * (T::lit(2.0) * alpha - theta)
}

/// Tail ratios of the truncated moment `H`:
/// `x^α F̄/H → θ/(α-θ)`, `αW/H → α/(α-θ)` with `αW = H + x^α F̄`, and
/// `x^α Ḡ/H → α/(α-θ)`.
pub fn tail_ratios<T: Real>(dist: &StepDistribution<T>, x: T) -> Result<[AsymptoticsReport<T>; 3]> {
    require_large(x)?;
    let theta = require_theta_below_alpha(dist)?;
    let a = dist.alpha();
    let p = transform_parts(dist, x)?;
    if !(p.h > T::zero()) {
        return Err(Error::Domain(format!("H({x}) = 0")));
    }
    let xa = x.powf(a);
    let alpha_w = p.h + xa * p.f_bar;
    let lim = a / (a - theta);
    Ok([
        AsymptoticsReport::new("tail_over_h", x, xa * p.f_bar / p.h, theta / (a - theta)),
        AsymptoticsReport::new("alpha_w_over_h", x, alpha_w / p.h, lim),
        AsymptoticsReport::new("gbar_over_h", x, xa * p.g_bar / p.h, lim),
    ])
}

/// `x^{-α} R(x) H(x) → (α-θ)(2α-θ)/α²`.
pub fn elementary_renewal_weighted<T: Real>(dist: &StepDistribution<T>, x: T) -> Result<AsymptoticsReport<T>> {
    require_large(x)?;
    let theta = require_theta_below_alpha(dist)?;
    let a = dist.alpha();
    let h = transform_parts(dist, x)?.h;
    let r = renewal_r(dist, x)?;
    Ok(AsymptoticsReport::new(
        "elementary_renewal_weighted",
        x,
        x.powf(-a) * r * h,
        (a - theta) * (T::lit(2.0) * a - theta) / (a * a),
    ))
}

/// `x^{-α} R(x) → 2/m(α)` when `m(α) < ∞`; the weighted form otherwise.
pub fn elementary_renewal<T: Real>(dist: &StepDistribution<T>, x: T) -> Result<AsymptoticsReport<T>> {
    let m = dist.m_alpha();
    if !m.is_finite() {
        return elementary_renewal_weighted(dist, x);
    }
    require_large(x)?;
    let r = renewal_r(dist, x)?;
    Ok(AsymptoticsReport::new(
        "elementary_renewal",
        x,
        x.powf(-dist.alpha()) * r,
        T::lit(2.0) / m,
    ))
}

fn check_h<T: Real>(h: T) -> Result<()> {
    if !(h > T::zero()) || !h.is_finite() {
        return Err(Error::InvalidInput(format!("h must be positive, got {h}")));
    }
    Ok(())
}

/// `H(t) (R(t+h) - R(t)) / t^{α-1} → c h`.
pub fn blackwell_classic<T: Real>(dist: &StepDistribution<T>, t: T, h: T) -> Result<AsymptoticsReport<T>> {
    require_large(t)?;
    check_h(h)?;
    let theta = require_theta_below_alpha(dist)?;
    let a = dist.alpha();
    let hh = transform_parts(dist, t)?.h;
    let dr = renewal_r(dist, t + h)? - renewal_r(dist, t)?;
    Ok(AsymptoticsReport::new(
        "blackwell_classic",
        t,
        hh * dr / t.powf(a - T::one()),
        blackwell_constant(a, theta) * h,
    ))
}

/// `H(t) R'(t) / t^{α-1} → c`, with `R'` in closed form.
pub fn blackwell_derivative<T: Real>(dist: &StepDistribution<T>, t: T) -> Result<AsymptoticsReport<T>> {
    require_large(t)?;
    let theta = require_theta_below_alpha(dist)?;
    let a = dist.alpha();
    let hh = transform_parts(dist, t)?.h;
    let rp = renewal_r_derivative(dist, t)?;
    Ok(AsymptoticsReport::new(
        "blackwell_derivative",
        t,
        hh * rp / t.powf(a - T::one()),
        blackwell_constant(a, theta),
    ))
}

/// `R(t+h)/(t+h)^{α-1} - R(t)/t^{α-1} → 2h/m(α)` for `m(α) < ∞`.
pub fn blackwell_normalized<T: Real>(dist: &StepDistribution<T>, t: T, h: T) -> Result<AsymptoticsReport<T>> {
    require_large(t)?;
    check_h(h)?;
    let m = dist.m_alpha();
    if !m.is_finite() {
        return Err(Error::OutOfScope(format!("{} has m(α) = ∞", dist.name())));
    }
    let e = dist.alpha() - T::one();
    let finite = renewal_r(dist, t + h)? / (t + h).powf(e) - renewal_r(dist, t)? / t.powf(e);
    Ok(AsymptoticsReport::new("blackwell_normalized", t, finite, T::lit(2.0) * h / m))
}

/// `d/dt [R(t)/t^{α-1}]`.
pub fn normalized_derivative<T: Real>(dist: &StepDistribution<T>, t: T) -> Result<T> {
    let a = dist.alpha();
    let e = a - T::one();
    Ok(renewal_r_derivative(dist, t)? / t.powf(e) - e * renewal_r(dist, t)? / t.powf(a))
}

fn pareto_beta<T: Real>(dist: &StepDistribution<T>) -> Option<T> {
    match dist.law() {
        StepLaw::Pareto { beta } => Some(beta),
        _ => None,
    }
}

/// Pareto with `β = α`: `x^{1-α} log x (R(x+h) - R(x)) → 2h`.
pub fn blackwell_log_case<T: Real>(dist: &StepDistribution<T>, x: T, h: T) -> Result<AsymptoticsReport<T>> {
    require_large(x)?;
    check_h(h)?;
    let a = dist.alpha();
    if pareto_beta(dist) != Some(a) {
        return Err(Error::OutOfScope("logarithmic case needs pareto with beta = alpha".into()));
    }
    let dr = renewal_r(dist, x + h)? - renewal_r(dist, x)?;
    Ok(AsymptoticsReport::new(
        "blackwell_log_case",
        x,
        x.powf(T::one() - a) * x.ln() * dr,
        T::lit(2.0) * h,
    ))
}

/// Pareto with `β < α`: `x^{1-β} (R(x+h) - R(x)) → βθ(α+β) h / α²`.
pub fn blackwell_tail_case<T: Real>(dist: &StepDistribution<T>, x: T, h: T) -> Result<AsymptoticsReport<T>> {
    require_large(x)?;
    check_h(h)?;
    let a = dist.alpha();
    let beta = match pareto_beta(dist) {
        Some(b) if b < a => b,
        _ => return Err(Error::OutOfScope("tail case needs pareto with beta < alpha".into())),
    };
    let theta = a - beta;
    let dr = renewal_r(dist, x + h)? - renewal_r(dist, x)?;
    Ok(AsymptoticsReport::new(
        "blackwell_tail_case",
        x,
        x.powf(T::one() - beta) * dr,
        beta * theta * (a + beta) * h / (a * a),
    ))
}

/// `log(H(λx)/H(x)) / log λ`, a finite-level estimate of the index of
/// regular variation.
pub fn rv_index_estimate<T, F>(h_eval: F, x: T, lambda: T) -> Result<T>
where
    T: Real,
    F: Fn(T) -> Result<T>,
{
    if !(lambda > T::one()) {
        return Err(Error::InvalidInput(format!("lambda must be > 1, got {lambda}")));
    }
    require_large(x)?;
    let (h0, h1) = (h_eval(x)?, h_eval(lambda * x)?);
    if !(h0 > T::zero() && h1 > T::zero()) {
        return Err(Error::Domain(format!("H must be positive, got H(x) = {h0}, H(λx) = {h1}")));
    }
    Ok((h1 / h0).ln() / lambda.ln())
}

/// `w Γ(1,1) + (1-w) Γ(2,1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MixtureGammaLaw<T> {
    pub weight: T,
}

impl<T: Real> MixtureGammaLaw<T> {
    /// `w` in `[0, 1]`; `w = 1` is the exponential limit.
    pub fn new(weight: T) -> Result<Self> {
        if !(weight >= T::zero() && weight <= T::one()) {
            return Err(Error::InvalidParameter(format!("mixture weight {weight} outside [0, 1]")));
        }
        Ok(Self { weight })
    }

    /// Weight `θ/α` for a step law.
    pub fn for_step(dist: &StepDistribution<T>) -> Result<Self> {
        let theta = require_theta_below_alpha(dist)?;
        Self::new(theta / dist.alpha())
    }

    pub fn cdf(&self, x: T) -> T {
        if x <= T::zero() {
            return T::zero();
        }
        // 1 - e^{-x} - (1-w) x e^{-x}
        (-(-x).exp_m1() - (T::one() - self.weight) * x * (-x).exp()).max(T::zero())
    }

    pub fn sf(&self, x: T) -> T {
        if x <= T::zero() {
            return T::one();
        }
        (-x).exp() * (T::one() + (T::one() - self.weight) * x)
    }

    pub fn mean(&self) -> T {
        T::lit(2.0) - self.weight
    }

    pub fn variance(&self) -> T {
        T::lit(2.0) - self.weight * self.weight
    }
}

/// `w (1 - e^{-x}) + (1-w)(1 - (1+x) e^{-x})`.
pub fn mixture_gamma_cdf<T: Real>(w: T, x: T) -> Result<T> {
    Ok(MixtureGammaLaw::new(w)?.cdf(x))
}

/// Simulated `Ḡ(t) N(t)` against its mixture-gamma limit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitLawSummary {
    pub t: f64,
    pub g_bar: f64,
    pub weight: f64,
    pub n_sims: u64,
    pub mean: f64,
    pub var: f64,
    pub limit_mean: f64,
    pub limit_var: f64,
    pub ks: f64,
    pub ks_critical: f64,
}

pub fn limit_law_sim<T: Real>(config: &WalkConfig<T>, t: T, n_sims: u64) -> Result<LimitLawSummary> {
    let law = MixtureGammaLaw::for_step(&config.step)?;
    if n_sims < 100 {
        return Err(Error::InvalidInput(format!("n_sims must be >= 100, got {n_sims}")));
    }
    let g_bar = transform_parts(&config.step, t)?.g_bar;
    if !(g_bar < T::lit(0.1)) {
        return Err(Error::InvalidInput(format!(
            "t = {t} too small: Ḡ(t) = {g_bar} must be below 0.1"
        )));
    }
    let counts = simulate_counts(config, t, n_sims)?;
    let gb = g_bar.to_f64_lossy();
    let scaled: Vec<f64> = counts.iter().map(|&n| gb * n as f64).collect();
    let (mean, var) = mean_var(&scaled);
    let lawf = MixtureGammaLaw::new(law.weight.to_f64_lossy())?;
    Ok(LimitLawSummary {
        t: t.to_f64_lossy(),
        g_bar: gb,
        weight: lawf.weight,
        n_sims,
        mean,
        var,
        limit_mean: lawf.mean(),
        limit_var: lawf.variance(),
        ks: ks_statistic_continuous(&scaled, |x| lawf.cdf(x)),
        ks_critical: ks_critical_value(scaled.len()),
    })
}

/// Normalizer `U(n)` of `S_n` for pareto(β) steps with `β ≤ α`:
/// `(α n/θ)^{1/β}` for `β < α` and `(n log n)^{1/α}` for `β = α`.
pub fn pareto_normalizer<T: Real>(dist: &StepDistribution<T>, n: u64) -> Result<T> {
    let a = dist.alpha();
    let beta = match pareto_beta(dist) {
        Some(b) if b <= a => b,
        _ => {
            return Err(Error::OutOfScope(
                "S_n scaling is implemented for pareto steps with beta <= alpha".into(),
            ))
        }
    };
    if n < 2 {
        return Err(Error::InvalidInput("n must be >= 2".into()));
    }
    let nf = T::count(n);
    if beta == a {
        Ok((nf * nf.ln()).powf(a.recip()))
    } else {
        Ok((a * nf / (a - beta)).powf(beta.recip()))
    }
}

/// Simulated `S_n / U(n)` against `P{Z^{-1/(α-θ)} ≤ s} = P{Z ≥ s^{-(α-θ)}}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingSummary {
    pub n: u64,
    pub normalizer: f64,
    pub weight: f64,
    pub n_sims: u64,
    pub ks: f64,
    pub ks_critical: f64,
}

/// CDF of `Z^{-1/(α-θ)}` with `Z` the mixture law of weight `w`.
pub fn scaling_target_cdf(law: &MixtureGammaLaw<f64>, exponent: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    law.sf(s.powf(-exponent))
}

pub fn sn_scaling_sim<T: Real>(config: &WalkConfig<T>, n: u64, n_sims: u64) -> Result<ScalingSummary> {
    let dist = &config.step;
    let u = pareto_normalizer(dist, n)?.to_f64_lossy();
    let law = MixtureGammaLaw::for_step(dist)?;
    let lawf = MixtureGammaLaw::new(law.weight.to_f64_lossy())?;
    let exponent = (dist.alpha() - dist.theta()).to_f64_lossy();
    if n_sims < 100 {
        return Err(Error::InvalidInput(format!("n_sims must be >= 100, got {n_sims}")));
    }
    let scaled: Vec<f64> = sample_positions(config, n, n_sims)?
        .into_iter()
        .map(|s| s.to_f64_lossy() / u)
        .collect();
    Ok(ScalingSummary {
        n,
        normalizer: u,
        weight: lawf.weight,
        n_sims,
        ks: ks_statistic_continuous(&scaled, |s| scaling_target_cdf(&lawf, exponent, s)),
        ks_critical: ks_critical_value(scaled.len()),
    })
}

/// Writes `quantity,x,finite,limit,rel_error` rows.
pub fn write_reports_csv<T: Real, W: Write>(reports: &[AsymptoticsReport<T>], mut out: W) -> std::io::Result<()> {
    writeln!(out, "quantity,x,finite,limit,rel_error")?;
    for r in reports {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.quantity,
            r.x.to_f64_lossy(),
            r.finite.to_f64_lossy(),
            r.limit.to_f64_lossy(),
            r.rel_error.to_f64_lossy()
        )?;
    }
    Ok(())
}
