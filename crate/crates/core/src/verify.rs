//! Named verification suites with pass/fail thresholds, one per acceptance
//! criterion. Shared by the `verify` CLI command and the acceptance tests.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::asymptotics::{
    blackwell_log_case, blackwell_normalized, blackwell_tail_case, elementary_renewal,
    elementary_renewal_weighted, limit_law_sim, sn_scaling_sim,
};
use crate::catalog::{catalog_lookup, StepDistribution, CATALOG};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::CompensatedSum;
use crate::renewal::{
    fredholm_residual, pgf_coefficients, pmf_mean_tail, pmf_table, pmf_tail, renewal_r,
    series_r,
};
use crate::stats::{ks_critical_value, ks_statistic, ks_statistic_continuous};
use crate::walk::{mc_renewal_stats, sample_pair_convolution, sample_paths, substream, WalkConfig};
use crate::williamson::{fn_cdf, fn_cdf_left, invert_williamson, WilliamsonPair};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_917;

/// One verification suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Suite {
    ClosedForms,
    Series,
    RoundTrip,
    Marginals,
    PairConvolution,
    Fredholm,
    Moments,
    Elementary,
    Blackwell,
    LimitLaw,
    Scaling,
    Coherence,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::ClosedForms,
        Suite::Series,
        Suite::RoundTrip,
        Suite::Marginals,
        Suite::PairConvolution,
        Suite::Fredholm,
        Suite::Moments,
        Suite::Elementary,
        Suite::Blackwell,
        Suite::LimitLaw,
        Suite::Scaling,
        Suite::Coherence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ClosedForms => "closed-forms",
            Suite::Series => "series",
            Suite::RoundTrip => "round-trip",
            Suite::Marginals => "marginals",
            Suite::PairConvolution => "pair-convolution",
            Suite::Fredholm => "fredholm",
            Suite::Moments => "moments",
            Suite::Elementary => "elementary",
            Suite::Blackwell => "blackwell",
            Suite::LimitLaw => "limit-law",
            Suite::Scaling => "scaling",
            Suite::Coherence => "coherence",
        }
    }

    /// Acceptance criterion number, 1 to 12.
    pub fn criterion(self) -> usize {
        Suite::ALL.iter().position(|&s| s == self).unwrap() + 1
    }

    /// Whether the suite iterates over step laws and so accepts a single
    /// law in place of the catalog.
    pub fn takes_distribution(self) -> bool {
        matches!(
            self,
            Suite::ClosedForms | Suite::Series | Suite::RoundTrip | Suite::Fredholm | Suite::Coherence
        )
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown suite `{s}`")))
    }
}

/// A measured value against its threshold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub label: String,
    pub value: f64,
    /// Accepted interval `[lo, hi]`.
    pub lo: f64,
    pub hi: f64,
    pub passed: bool,
}

impl CheckOutcome {
    pub fn within(label: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            label: label.into(),
            value,
            lo,
            hi,
            passed: value >= lo && value <= hi,
        }
    }

    pub fn at_most(label: impl Into<String>, value: f64, hi: f64) -> Self {
        Self::within(label, value, f64::NEG_INFINITY, hi)
    }

    pub fn at_least(label: impl Into<String>, value: f64, lo: f64) -> Self {
        Self::within(label, value, lo, f64::INFINITY)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<CheckOutcome>,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    /// The failing check with the largest excess, or the tightest passing one.
    pub fn worst(&self) -> Option<&CheckOutcome> {
        let margin = |c: &CheckOutcome| {
            let scale = |b: f64| if b.is_finite() && b != 0.0 { b.abs() } else { 1.0 };
            let over = if c.hi.is_finite() { (c.value - c.hi) / scale(c.hi) } else { f64::NEG_INFINITY };
            let under = if c.lo.is_finite() { (c.lo - c.value) / scale(c.lo) } else { f64::NEG_INFINITY };
            if c.value.is_nan() {
                f64::INFINITY
            } else {
                over.max(under)
            }
        };
        self.checks
            .iter()
            .max_by(|a, b| margin(a).partial_cmp(&margin(b)).unwrap_or(std::cmp::Ordering::Equal))
    }
}

/// Inputs shared by all suites.
#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Replaces the catalog sweep in suites that iterate over step laws.
    pub dist: Option<StepDistribution<f64>>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            dist: None,
        }
    }
}

/// Parameters used when sweeping the catalog: `pareto` with `β = 1.5` and
/// `student_like` with `β = 3`.
fn catalog_laws(alpha: f64) -> Result<Vec<StepDistribution<f64>>> {
    CATALOG
        .iter()
        .map(|e| {
            let beta = match e.name {
                "pareto" => Some(1.5),
                "student_like" => Some(3.0),
                _ => None,
            };
            catalog_lookup(e.name, alpha, beta)
        })
        .collect()
}

/// The five laws with closed-form renewal functions.
const CLOSED_FORM_LAWS: [&str; 5] = ["dirac1", "uniform01", "pareto2alpha", "lackmem", "kendall_stable"];

const ALPHAS: [f64; 3] = [0.5, 1.0, 2.0];

fn law(name: &str, alpha: f64) -> Result<StepDistribution<f64>> {
    catalog_lookup(name, alpha, None)
}

fn pareto(alpha: f64, beta: f64) -> Result<StepDistribution<f64>> {
    catalog_lookup("pareto", alpha, Some(beta))
}

fn tag(d: &StepDistribution<f64>) -> String {
    let mut s = d.name().to_string();
    for (k, v) in d.params() {
        s.push_str(&format!(" {k}={v}"));
    }
    s
}

fn sweep(opts: &VerifyOptions, names: Option<&[&str]>) -> Result<Vec<StepDistribution<f64>>> {
    if let Some(d) = &opts.dist {
        return Ok(vec![d.clone()]);
    }
    let mut out = Vec::new();
    for a in ALPHAS {
        match names {
            Some(ns) => {
                for n in ns {
                    out.push(law(n, a)?);
                }
            }
            None => out.extend(catalog_laws(a)?),
        }
    }
    Ok(out)
}

/// Runs one suite.
pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<SuiteReport> {
    if opts.dist.is_some() && !suite.takes_distribution() {
        return Err(Error::InvalidInput(format!("suite `{suite}` does not take a distribution")));
    }
    let start = Instant::now();
    let checks = match suite {
        Suite::ClosedForms => closed_forms(opts)?,
        Suite::Series => series(opts)?,
        Suite::RoundTrip => round_trip(opts)?,
        Suite::Marginals => marginals(opts)?,
        Suite::PairConvolution => pair_convolution(opts)?,
        Suite::Fredholm => fredholm(opts)?,
        Suite::Moments => moments(opts)?,
        Suite::Elementary => elementary()?,
        Suite::Blackwell => blackwell()?,
        Suite::LimitLaw => limit_law(opts)?,
        Suite::Scaling => scaling(opts)?,
        Suite::Coherence => coherence(opts)?,
    };
    Ok(SuiteReport {
        suite,
        checks,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn closed_forms(opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    if opts.dist.is_none() {
        let e = std::f64::consts::E;
        let point = |name: &str, alpha: f64, t: f64, want: f64| -> Result<CheckOutcome> {
            let got = renewal_r(&law(name, alpha)?, t)?;
            Ok(CheckOutcome::at_most(
                format!("{name} alpha={alpha} R({t}) = {want}"),
                (got - want).abs(),
                1e-9,
            ))
        };
        out.push(point("dirac1", 1.0, 2.0, 3.0)?);
        out.push(point("uniform01", 1.0, 0.5, 7.0 / 9.0)?);
        for a in ALPHAS {
            out.push(point("uniform01", a, 2.0, 2.0 * (a + 1.0) * 2f64.powf(a) - 1.0)?);
        }
        out.push(point("pareto2alpha", 1.0, 2.0, 11.0 / 9.0)?);
        out.push(point("lackmem", 1.0, 0.5, 7.0 / 9.0)?);
        out.push(point("kendall_stable", 1.0, 1.0, (2.0 * e - 1.0) / ((e - 1.0) * (e - 1.0)))?);
    }
    let grid = Grid::linear(0.05, 5.0, 50)?.values();
    for d in sweep(opts, Some(&CLOSED_FORM_LAWS))? {
        if d.analytic_r(1.0).is_none() {
            return Err(Error::OutOfScope(format!("{} has no closed-form renewal function", d.name())));
        }
        let mut worst = 0.0f64;
        for &t in &grid {
            let want = d.analytic_r(t).expect("closed form");
            worst = worst.max((renewal_r(&d, t)? - want).abs());
        }
        out.push(CheckOutcome::at_most(format!("{} sup |R - closed form| on 50 points", tag(&d)), worst, 1e-9));
    }
    Ok(out)
}

fn series(opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    let grid = Grid::linear(0.05, 5.0, 50)?.values();
    let mut out = Vec::new();
    for d in sweep(opts, Some(&CLOSED_FORM_LAWS))? {
        let mut worst = 0.0f64;
        for &t in &grid {
            let s = series_r(&d, t, 1e-13)?;
            worst = worst.max((s.value - renewal_r(&d, t)?).abs());
        }
        out.push(CheckOutcome::at_most(format!("{} sup |series - R|", tag(&d)), worst, 1e-12));
    }
    Ok(out)
}

fn round_trip(opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    let grid = Grid::geometric(0.05, 20.0, 200)?.values();
    let mut out = Vec::new();
    for d in sweep(opts, None)? {
        let pairs = [
            ("closed-form", WilliamsonPair::from_distribution(&d)),
            ("quadrature", WilliamsonPair::numeric(&d)),
        ];
        for (kind, pair) in &pairs {
            let mut worst = 0.0f64;
            for &t in &grid {
                worst = worst.max((invert_williamson(pair, t)?.value - d.cdf(t)).abs());
            }
            out.push(CheckOutcome::at_most(format!("{} {kind} G,H round trip", tag(&d)), worst, 1e-8));
        }
    }
    Ok(out)
}

fn marginals(opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    let n_paths = 100_000u64;
    let crit = ks_critical_value(n_paths as usize);
    let mut out = Vec::new();
    for (k, name) in ["dirac1", "uniform01", "pareto2alpha"].iter().enumerate() {
        for (j, a) in ALPHAS.iter().enumerate() {
            let d = law(name, *a)?;
            let cfg = WalkConfig::new(d.clone(), opts.seed.wrapping_add((3 * k + j) as u64));
            let paths = sample_paths(&cfg, 5, n_paths)?;
            for n in 1..=5u64 {
                let xs: Vec<f64> = paths.iter().map(|p| p.values[(n - 1) as usize]).collect();
                let ks = ks_statistic(
                    &xs,
                    |t| fn_cdf(&d, n, t).unwrap_or(f64::NAN),
                    |t| fn_cdf_left(&d, n, t).unwrap_or(f64::NAN),
                );
                out.push(CheckOutcome::at_most(format!("{} S_{n} KS", tag(&d)), ks, crit));
            }
        }
    }
    Ok(out)
}

fn pair_convolution(opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    let n = 100_000usize;
    let mut out = Vec::new();
    for (j, a) in ALPHAS.iter().enumerate() {
        let mut rng = substream(opts.seed, 1_000 + j as u64);
        let xs = (0..n)
            .map(|_| sample_pair_convolution(1.0, 1.0, *a, &mut rng))
            .collect::<Result<Vec<f64>>>()?;
        let ks = ks_statistic_continuous(&xs, |t| if t < 1.0 { 0.0 } else { 1.0 - t.powf(-2.0 * a) });
        out.push(CheckOutcome::at_most(format!("delta1 * delta1 alpha={a} KS vs Pareto"), ks, ks_critical_value(n)));
    }
    Ok(out)
}

fn fredholm(opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    let grid = Grid::geometric(0.3, 8.0, 6)?.values();
    let mut out = Vec::new();
    for d in sweep(opts, None)? {
        let r = fredholm_residual(&d, &grid)?;
        out.push(CheckOutcome::at_most(format!("{} transform residual", tag(&d)), r.sup_transform, 1e-8));
        out.push(CheckOutcome::at_most(format!("{} measure residual", tag(&d)), r.sup_measure, 1e-6));
    }
    Ok(out)
}

fn moments(opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    let cfg = WalkConfig::new(law("dirac1", 1.0)?, opts.seed);
    let s = mc_renewal_stats(&cfg, 2.0, 100_000)?;
    Ok(vec![
        CheckOutcome::within("dirac1 alpha=1 t=2 mean N", s.mean, 3.0 - 3.0 * s.se_mean, 3.0 + 3.0 * s.se_mean),
        CheckOutcome::within("dirac1 alpha=1 t=2 var N", s.var, 4.0 - 3.0 * s.se_var, 4.0 + 3.0 * s.se_var),
    ])
}

fn elementary() -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for a in [1.0, 2.0] {
        for name in CLOSED_FORM_LAWS {
            let d = law(name, a)?;
            let r = elementary_renewal(&d, 1e3)?;
            out.push(CheckOutcome::at_most(format!("{} x^-a R(x) at 1e3 vs 2/m", tag(&d)), r.rel_error, 1e-3));
        }
    }
    let p = pareto(2.0, 1.0)?;
    let r = elementary_renewal_weighted(&p, 1e6)?;
    out.push(CheckOutcome::at_most(format!("{} x^-a R H at 1e6", tag(&p)), r.rel_error, 0.02));
    Ok(out)
}

fn blackwell() -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for a in [1.0, 2.0] {
        for name in CLOSED_FORM_LAWS {
            let d = law(name, a)?;
            let r = blackwell_normalized(&d, 1e3, 1.0)?;
            out.push(CheckOutcome::at_most(format!("{} normalized increment at 1e3", tag(&d)), r.rel_error, 1e-2));
        }
    }
    let q = pareto(2.0, 2.0)?;
    let r = blackwell_log_case(&q, 1e8, 1.0)?;
    out.push(CheckOutcome::at_most(format!("{} log-weighted increment at 1e8", tag(&q)), r.rel_error, 0.10));
    let p = pareto(2.0, 1.0)?;
    let r = blackwell_tail_case(&p, 1e6, 1.0)?;
    out.push(CheckOutcome::at_most(format!("{} x^(1-beta) increment at 1e6", tag(&p)), r.rel_error, 0.02));
    Ok(out)
}

fn limit_law(opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    let n = 20_000;
    let u = limit_law_sim(&WalkConfig::new(law("uniform01", 1.0)?, opts.seed), 200.0, n)?;
    let p = limit_law_sim(&WalkConfig::new(pareto(2.0, 1.0)?, opts.seed.wrapping_add(1)), 1e3, n)?;
    Ok(vec![
        CheckOutcome::within("uniform01 alpha=1 t=200 mean", u.mean, 1.95, 2.05),
        CheckOutcome::within("uniform01 alpha=1 t=200 var", u.var, 1.8, 2.2),
        CheckOutcome::at_most("uniform01 alpha=1 t=200 KS vs Gamma(2,1)", u.ks, 0.02),
        CheckOutcome::within("pareto alpha=2 beta=1 t=1e3 mean", p.mean, 1.45, 1.55),
        CheckOutcome::at_most("pareto alpha=2 beta=1 t=1e3 KS vs w=1/2 mixture", p.ks, 0.02),
    ])
}

fn scaling(opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    let cfg = WalkConfig::new(pareto(2.0, 1.0)?, opts.seed);
    let early = sn_scaling_sim(&cfg, 200, 10_000)?;
    let late = sn_scaling_sim(&cfg, 2000, 10_000)?;
    Ok(vec![
        CheckOutcome::at_most("pareto alpha=2 beta=1 S_2000/4000 KS", late.ks, 0.05),
        CheckOutcome::at_least("KS(n=200) - KS(n=2000)", early.ks - late.ks, f64::MIN_POSITIVE),
    ])
}

fn coherence(opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    let grid = Grid::geometric(0.2, 6.0, 10)?.values();
    let mut out = Vec::new();
    for d in sweep(opts, None)? {
        let (mut coef, mut mass_lo, mut mass_hi, mut mean) = (0.0f64, 1.0f64, 0.0f64, 0.0f64);
        for &t in &grid {
            let c = pgf_coefficients(&d, t, 10)?;
            let p = pmf_table(&d, t, 10)?;
            coef = c.iter().zip(&p).fold(coef, |m, (a, b)| m.max((a - b).abs()));
            let n_max = truncation_point(&d, t)?;
            let pmf = pmf_table(&d, t, n_max)?;
            let (mut total, mut first) = (CompensatedSum::default(), CompensatedSum::default());
            for (n, q) in pmf.iter().enumerate() {
                total.add(*q);
                first.add(n as f64 * q);
            }
            let (total, first) = (total.value(), first.value());
            mass_lo = mass_lo.min(total);
            mass_hi = mass_hi.max(total);
            mean = mean.max((first - renewal_r(&d, t)?).abs());
        }
        let name = tag(&d);
        out.push(CheckOutcome::at_most(format!("{name} pgf coefficients vs pmf"), coef, 1e-9));
        out.push(CheckOutcome::within(format!("{name} min sum pmf"), mass_lo, 1.0 - 1e-9, 1.0));
        // Upper end allows for rounding: with G near 1 the float geometric series
        // carries relative error ε/Ḡ.
        out.push(CheckOutcome::within(format!("{name} max sum pmf"), mass_hi, 1.0 - 1e-9, 1.0 + 1e-12));
        out.push(CheckOutcome::at_most(format!("{name} |sum n pmf - R|"), mean, 1e-9));
    }
    Ok(out)
}

/// Smallest `n` whose omitted pmf mass and mean are both below `1e-13`.
fn truncation_point(d: &StepDistribution<f64>, t: f64) -> Result<u64> {
    let mut n = 16u64;
    while pmf_tail(d, t, n)? > 1e-13 || pmf_mean_tail(d, t, n)? > 1e-13 {
        n *= 2;
        if n > 1 << 26 {
            return Err(Error::CapExceeded(format!("pmf truncation at t = {t}")));
        }
    }
    Ok(n)
}

/// Runs every suite in criterion order.
pub fn run_all(opts: &VerifyOptions) -> Result<Vec<SuiteReport>> {
    Suite::ALL.iter().map(|&s| run_suite(s, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert_eq!(Suite::Coherence.criterion(), 12);
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn outcome_intervals() {
        assert!(CheckOutcome::at_most("a", 1.0, 1.0).passed);
        assert!(!CheckOutcome::at_most("a", f64::NAN, 1.0).passed);
        assert!(!CheckOutcome::within("a", 2.0, 0.0, 1.0).passed);
    }

    #[test]
    fn distribution_only_for_sweeping_suites() {
        let opts = VerifyOptions {
            dist: Some(law("dirac1", 1.0).unwrap()),
            ..Default::default()
        };
        assert!(run_suite(Suite::Moments, &opts).is_err());
        let r = run_suite(Suite::Series, &opts).unwrap();
        assert_eq!(r.checks.len(), 1);
        assert!(r.passed());
    }
}
