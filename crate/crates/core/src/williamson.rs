//! The Williamson transform `G(t) = ∫ (1 - x^α/t^α)_+ ν(dx)`, the truncated
//! moment `H(t) = ∫_{[0,t]} x^α ν(dx)`, inversion back to the CDF, and the
//! CDF of the n-fold Kendall convolution.

use crate::catalog::StepDistribution;
use crate::error::{Error, Result};
use crate::measure::integrate_measure;
use crate::scalar::{positive_part, Real};

/// Decade breakpoints in `(1, t)`, so heavy-tailed integrands over long
/// ranges start from a sensible partition.
fn decade_breaks<T: Real>(t: T) -> Vec<T> {
    let mut out = vec![T::one()];
    let ten = T::lit(10.0);
    let mut p = ten;
    while p < t {
        out.push(p);
        p = p * ten;
    }
    out
}

/// `G(t)` by quadrature, ignoring any closed form.
pub fn williamson_g_numeric<T: Real>(dist: &StepDistribution<T>, t: T) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::InvalidInput(format!("t must be > 0, got {t}")));
    }
    let a = dist.alpha();
    integrate_measure(
        dist,
        |x| T::one() - (x / t).powf(a),
        T::zero(),
        t,
        &decade_breaks(t),
        dist.quadrature(),
    )
}

/// `H(t)` by quadrature, ignoring any closed form.
pub fn moment_h_numeric<T: Real>(dist: &StepDistribution<T>, t: T) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::InvalidInput(format!("t must be > 0, got {t}")));
    }
    let a = dist.alpha();
    integrate_measure(dist, |x| x.powf(a), T::zero(), t, &decade_breaks(t), dist.quadrature())
}

/// `G(t)`: closed form when the catalog has one, quadrature otherwise.
pub fn williamson_g<T: Real>(dist: &StepDistribution<T>, t: T) -> Result<T> {
    match dist.analytic_g(t) {
        Some(v) => Ok(v),
        None => williamson_g_numeric(dist, t),
    }
}

/// `H(t)`: closed form when the catalog has one, quadrature otherwise.
pub fn moment_h<T: Real>(dist: &StepDistribution<T>, t: T) -> Result<T> {
    if t <= T::zero() {
        return Ok(T::zero());
    }
    match dist.analytic_h(t) {
        Some(v) => Ok(v),
        None => moment_h_numeric(dist, t),
    }
}

/// `H(t-)`.
pub fn moment_h_left<T: Real>(dist: &StepDistribution<T>, t: T) -> Result<T> {
    if t <= T::zero() {
        return Ok(T::zero());
    }
    match dist.analytic_h_left(t) {
        Some(v) => Ok(v),
        None => moment_h_numeric(dist, t),
    }
}

/// `1 - G(t)`. Without a closed form it is evaluated as
/// `∫ min(1, x^α/t^α) ν(dx) = 1 - F(t) + t^{-α} H(t)`, which keeps relative
/// accuracy when `G(t)` is close to one.
pub fn williamson_g_bar<T: Real>(dist: &StepDistribution<T>, t: T) -> Result<T> {
    if t <= T::zero() {
        return Ok(T::one());
    }
    match dist.analytic_g_bar(t) {
        Some(v) => Ok(v),
        None => Ok(dist.sf(t) + t.powf(-dist.alpha()) * moment_h_numeric(dist, t)?),
    }
}

/// `G`, `1 - G`, `t^{-α} H`, `F` and `1 - F` at one point, mutually
/// consistent: `F = G + t^{-α} H` holds up to rounding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformParts<T> {
    pub g: T,
    pub g_bar: T,
    /// `t^{-α} H(t)`.
    pub scaled_h: T,
    pub h: T,
    pub f: T,
    pub f_bar: T,
}

/// Evaluates [`TransformParts`] with at most one quadrature.
pub fn transform_parts<T: Real>(dist: &StepDistribution<T>, t: T) -> Result<TransformParts<T>> {
    if t <= T::zero() {
        return Ok(TransformParts {
            g: T::zero(),
            g_bar: T::one(),
            scaled_h: T::zero(),
            h: T::zero(),
            f: T::zero(),
            f_bar: T::one(),
        });
    }
    let f = dist.cdf(t);
    let f_bar = dist.sf(t);
    let ta = t.powf(-dist.alpha());
    match (dist.analytic_g(t), dist.analytic_g_bar(t), dist.analytic_h(t)) {
        (Some(g), Some(g_bar), Some(h)) => Ok(TransformParts {
            g,
            g_bar,
            scaled_h: ta * h,
            h,
            f,
            f_bar,
        }),
        _ => {
            let h = moment_h_numeric(dist, t)?;
            let scaled_h = ta * h;
            Ok(TransformParts {
                g: (f - scaled_h).max(T::zero()),
                g_bar: (f_bar + scaled_h).min(T::one()),
                scaled_h,
                h,
                f,
                f_bar,
            })
        }
    }
}

/// `m(α) = H(∞)`, `+inf` when infinite.
pub fn m_alpha<T: Real>(dist: &StepDistribution<T>) -> T {
    dist.m_alpha()
}

/// Where a [`WilliamsonPair`] gets its values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairSource {
    Analytic,
    NumericFromCdf,
}

type Evaluator<'a, T> = Box<dyn Fn(T) -> Result<T> + Send + Sync + 'a>;

/// `(G, H)` for one law and one `α`; `H` may be missing, in which case
/// inversion differentiates `G` numerically.
pub struct WilliamsonPair<'a, T: Real> {
    alpha: T,
    g: Evaluator<'a, T>,
    h: Option<Evaluator<'a, T>>,
    source: PairSource,
}

impl<'a, T: Real> WilliamsonPair<'a, T> {
    /// Closed forms where available, quadrature otherwise.
    pub fn from_distribution(dist: &'a StepDistribution<T>) -> Self {
        let source = if dist.has_analytic_transform() {
            PairSource::Analytic
        } else {
            PairSource::NumericFromCdf
        };
        Self {
            alpha: dist.alpha(),
            g: Box::new(move |t| williamson_g(dist, t)),
            h: Some(Box::new(move |t| moment_h(dist, t))),
            source,
        }
    }

    /// Both transforms by quadrature of the CDF.
    pub fn numeric(dist: &'a StepDistribution<T>) -> Self {
        Self {
            alpha: dist.alpha(),
            g: Box::new(move |t| williamson_g_numeric(dist, t)),
            h: Some(Box::new(move |t| moment_h_numeric(dist, t))),
            source: PairSource::NumericFromCdf,
        }
    }

    /// A transform known only through `G`.
    pub fn from_g<F>(alpha: T, g: F, source: PairSource) -> Self
    where
        F: Fn(T) -> Result<T> + Send + Sync + 'a,
    {
        Self {
            alpha,
            g: Box::new(g),
            h: None,
            source,
        }
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn source(&self) -> PairSource {
        self.source
    }

    pub fn g(&self, t: T) -> Result<T> {
        (self.g)(t)
    }

    pub fn h(&self, t: T) -> Option<Result<T>> {
        self.h.as_ref().map(|h| h(t))
    }
}

/// Recovered CDF value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inversion<T> {
    pub value: T,
    /// Set when the finite-difference step is too small relative to `t` for
    /// the derivative of `G` to be trusted.
    pub precision_warning: bool,
}

/// Relative step of the central difference used when `H` is unavailable.
pub const DERIVATIVE_REL_STEP: f64 = 1e-6;

/// `F(t) = G(t) + t^{-α} H(t)`, or `G(t) + (t/α) G'(t)` when only `G` is
/// known. Clamped to `[0, 1]`.
pub fn invert_williamson<T: Real>(pair: &WilliamsonPair<'_, T>, t: T) -> Result<Inversion<T>> {
    if !(t > T::zero()) {
        return Err(Error::InvalidInput(format!("t must be > 0, got {t}")));
    }
    let a = pair.alpha;
    let g = pair.g(t)?;
    let (raw, warn) = match pair.h(t) {
        Some(h) => (g + t.powf(-a) * h?, false),
        None => {
            let step = T::lit(DERIVATIVE_REL_STEP) * t;
            let up = t + step;
            let down = t - step;
            let warn = !(step > T::zero())
                || up == t
                || down == t
                || step < t * T::epsilon() * T::lit(1e3);
            let h2 = up - down;
            let deriv = if h2 > T::zero() {
                (pair.g(up)? - pair.g(down)?) / h2
            } else {
                T::zero()
            };
            (g + t / a * deriv, warn)
        }
    };
    Ok(Inversion {
        value: raw.max(T::zero()).min(T::one()),
        precision_warning: warn,
    })
}

/// `G^{n-1} (n a + G)` with `a = t^{-α} H(t)`.
pub(crate) fn fn_from_parts<T: Real>(g: T, a: T, n: u64) -> T {
    let nf = T::count(n);
    let v = g.powi((n - 1) as i32) * (nf * a + g);
    v.max(T::zero()).min(T::one())
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 || n > i32::MAX as u64 {
        return Err(Error::InvalidInput(format!("n must be in [1, 2^31), got {n}")));
    }
    Ok(())
}

/// CDF of `ν^{▵n}` at `t`: `G(t)^{n-1} [n t^{-α} H(t) + G(t)]`.
pub fn fn_cdf<T: Real>(dist: &StepDistribution<T>, n: u64, t: T) -> Result<T> {
    check_n(n)?;
    if t <= T::zero() {
        return Ok(T::zero());
    }
    let g = williamson_g(dist, t)?;
    let a = t.powf(-dist.alpha()) * moment_h(dist, t)?;
    Ok(fn_from_parts(g, a, n))
}

/// Left limit of [`fn_cdf`].
pub fn fn_cdf_left<T: Real>(dist: &StepDistribution<T>, n: u64, t: T) -> Result<T> {
    check_n(n)?;
    if t <= T::zero() {
        return Ok(T::zero());
    }
    let g = williamson_g(dist, t)?;
    let a = t.powf(-dist.alpha()) * moment_h_left(dist, t)?;
    Ok(fn_from_parts(g, a, n))
}

/// Upper bound `G^{n-1}(n t^{-α} H + G)` on `F_n(t)` made explicit for
/// `n → ∞`; identical to [`fn_cdf`] and returned unclamped.
pub fn fn_cdf_bound<T: Real>(g: T, a: T, n: u64) -> T {
    g.powi((n - 1) as i32) * (T::count(n) * a + positive_part(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{catalog_lookup, CATALOG};
    use crate::quadrature::Quadrature;

    fn laws(alpha: f64) -> Vec<StepDistribution<f64>> {
        CATALOG
            .iter()
            .map(|e| {
                let beta = match e.name {
                    "pareto" => Some(1.5),
                    "student_like" => Some(3.0),
                    _ => None,
                };
                catalog_lookup::<f64>(e.name, alpha, beta).unwrap()
            })
            .collect()
    }

    #[test]
    fn g_examples() {
        let d = catalog_lookup::<f64>("dirac1", 1.0, None).unwrap();
        assert!((williamson_g(&d, 2.0).unwrap() - 0.5).abs() < 1e-15);
        let u = catalog_lookup::<f64>("uniform01", 1.0, None).unwrap();
        assert!((williamson_g(&u, 2.0).unwrap() - 0.75).abs() < 1e-15);
        let p = catalog_lookup::<f64>("pareto", 1.0, Some(3.0)).unwrap();
        assert_eq!(williamson_g(&p, 0.9).unwrap(), 0.0);
        assert_eq!(williamson_g(&d, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn h_examples() {
        let d = catalog_lookup::<f64>("dirac1", 1.0, None).unwrap();
        assert_eq!(moment_h(&d, 1.0).unwrap(), 1.0);
        assert_eq!(moment_h(&d, 5.0).unwrap(), 1.0);
        assert_eq!(moment_h_left(&d, 1.0).unwrap(), 0.0);
        let u = catalog_lookup::<f64>("uniform01", 1.0, None).unwrap();
        assert!((moment_h(&u, 1.0).unwrap() - 0.5).abs() < 1e-15);
        let s = catalog_lookup::<f64>("kendall_stable", 1.0, None).unwrap();
        assert!((moment_h(&s, 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn m_alpha_examples() {
        assert_eq!(m_alpha(&catalog_lookup::<f64>("dirac1", 1.7, None).unwrap()), 1.0);
        assert!((m_alpha(&catalog_lookup::<f64>("uniform01", 1.5, None).unwrap()) - 0.4).abs() < 1e-15);
        assert_eq!(m_alpha(&catalog_lookup::<f64>("pareto2alpha", 0.5, None).unwrap()), 2.0);
        assert!(m_alpha(&catalog_lookup::<f64>("pareto", 2.0, Some(1.0)).unwrap()).is_infinite());
        assert!(m_alpha(&catalog_lookup::<f64>("pareto", 2.0, Some(2.0)).unwrap()).is_infinite());
    }

    #[test]
    fn analytic_matches_quadrature() {
        for alpha in [0.5, 1.0, 2.0] {
            for d in laws(alpha).iter().filter(|d| d.has_analytic_transform()) {
                for i in 0..200 {
                    let t = 0.01 * (1e3f64 / 0.01).powf(i as f64 / 199.0);
                    let ga = d.analytic_g(t).unwrap();
                    let gn = williamson_g_numeric(d, t).unwrap();
                    let ha = d.analytic_h(t).unwrap();
                    let hn = moment_h_numeric(d, t).unwrap();
                    assert!((ga - gn).abs() < 1e-9, "{} α={alpha} t={t}: G {ga} vs {gn}", d.name());
                    assert!(
                        (ha - hn).abs() < 1e-9 * ha.max(1.0),
                        "{} α={alpha} t={t}: H {ha} vs {hn}",
                        d.name()
                    );
                    let gb = d.analytic_g_bar(t).unwrap();
                    assert!((gb - (1.0 - ga)).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn inversion_examples() {
        let d = catalog_lookup::<f64>("dirac1", 1.0, None).unwrap();
        let pair = WilliamsonPair::from_distribution(&d);
        assert_eq!(invert_williamson(&pair, 2.0).unwrap().value, 1.0);

        // π_{2α} recovered from G alone.
        let g_only = WilliamsonPair::from_g(
            1.0,
            |t: f64| Ok(positive_part(1.0 - 1.0 / t).powi(2)),
            PairSource::Analytic,
        );
        let f = invert_williamson(&g_only, 2.0).unwrap();
        assert!(!f.precision_warning);
        assert!((f.value - 0.75).abs() < 1e-8);

        let lm = catalog_lookup::<f64>("lackmem", 1.0, None).unwrap();
        let pair = WilliamsonPair::from_distribution(&lm);
        assert!((invert_williamson(&pair, 0.5).unwrap().value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tiny_step_flags_precision() {
        let g_only = WilliamsonPair::from_g(1.0f32, |t: f32| Ok(1.0 - 1.0 / t), PairSource::Analytic);
        assert!(invert_williamson(&g_only, 3.0).unwrap().precision_warning);
    }

    #[test]
    fn round_trip_on_grid() {
        for alpha in [0.5, 1.0, 2.0] {
            for d in laws(alpha) {
                let analytic = WilliamsonPair::from_distribution(&d);
                let numeric = WilliamsonPair::numeric(&d);
                for i in 0..200 {
                    let t = 0.05 * (200.0f64).powf(i as f64 / 199.0);
                    let f = d.cdf(t);
                    for pair in [&analytic, &numeric] {
                        let r = invert_williamson(pair, t).unwrap().value;
                        assert!((r - f).abs() <= 1e-8, "{} α={alpha} t={t}: {r} vs {f}", d.name());
                    }
                }
            }
        }
    }

    #[test]
    fn fn_examples() {
        let d = catalog_lookup::<f64>("dirac1", 1.0, None).unwrap();
        assert_eq!(fn_cdf(&d, 1, 2.0).unwrap(), 1.0);
        assert!((fn_cdf(&d, 2, 2.0).unwrap() - 0.75).abs() < 1e-15);
        assert!((fn_cdf(&d, 3, 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(fn_cdf(&d, 0, 2.0).is_err());
        let u = catalog_lookup::<f64>("uniform01", 1.5, None).unwrap();
        for t in [0.2, 0.8, 3.0] {
            assert!((fn_cdf(&u, 1, t).unwrap() - u.cdf(t)).abs() < 1e-15);
        }
    }

    #[test]
    fn fn_nonincreasing_in_n_and_vanishing() {
        for alpha in [0.5, 1.0, 2.0] {
            for d in laws(alpha) {
                for i in 0..50 {
                    let t = 0.05 * (400.0f64).powf(i as f64 / 49.0);
                    let mut prev = fn_cdf(&d, 1, t).unwrap();
                    for n in 2..=10 {
                        let cur = fn_cdf(&d, n, t).unwrap();
                        assert!(cur <= prev + 1e-14, "{} t={t} n={n}", d.name());
                        prev = cur;
                    }
                    let g = williamson_g(&d, t).unwrap();
                    let a = t.powf(-alpha) * moment_h(&d, t).unwrap();
                    if g < 1.0 {
                        assert!(fn_cdf_bound(g, a, 20_000) < 1e-6 || g > 0.999);
                    }
                }
            }
        }
    }

    #[test]
    fn transform_of_n_fold_convolution_is_power() {
        // Williamson transform of F_n by parts: α t^{-α} ∫_0^t x^{α-1} F_n(x) dx.
        let q = Quadrature::default();
        for d in laws(1.0).into_iter().chain(laws(2.0)) {
            let alpha = d.alpha();
            for t in [0.3, 1.5, 7.0] {
                let g = williamson_g(&d, t).unwrap();
                for n in 1..=5 {
                    let integral = q
                        .integrate(
                            |x| x.powf(alpha - 1.0) * fn_cdf(&d, n, x).unwrap(),
                            0.0,
                            t,
                            &[1.0],
                        )
                        .unwrap();
                    let gn = alpha * t.powf(-alpha) * integral;
                    assert!((gn - g.powi(n as i32)).abs() < 1e-8, "{} t={t} n={n}", d.name());
                }
            }
        }
    }
}
