//! Generalized-convolution algebras through their probability kernels
//! `Ω(t) = h(δ_t)`, the generalized characteristic function, and the Kendall
//! pairwise convolution.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::{integrate_measure, Measure};
use crate::quadrature::Quadrature;
use crate::scalar::{positive_part, Real};

/// Algebra families known to the crate. Kingman is listed only so that its
/// monotonicity can be queried; it has no computable kernel here.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyId {
    Stable,
    Kendall,
    KucharczakUrbanik,
    KendallType,
    Kingman,
}

impl FamilyId {
    /// `δ_x ⋄ δ_y` is carried by `[max(x, y), inf)`.
    pub fn is_monotonic(self) -> bool {
        !matches!(self, FamilyId::Kingman)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelFamily<T> {
    /// `Ω(t) = exp(-t^α)`.
    Stable { alpha: T },
    /// `Ω(t) = (1 - t^α)_+`.
    Kendall { alpha: T },
    /// `Ω(t) = (1 - t^α)_+^n`.
    KucharczakUrbanik { alpha: T, n: u32 },
    /// `Ω(t) = (1 - (c+1) t + c t^p) 1_{[0,1]}(t)`.
    KendallType { c: T, p: T },
}

/// A validated probability kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvolutionKernel<T> {
    family: KernelFamily<T>,
}

const VALIDATION_GRID: usize = 1000;

impl<T: Real> ConvolutionKernel<T> {
    pub fn new(family: KernelFamily<T>) -> Result<Self> {
        let positive = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        match family {
            KernelFamily::Stable { alpha } | KernelFamily::Kendall { alpha } => positive("alpha", alpha)?,
            KernelFamily::KucharczakUrbanik { alpha, n } => {
                positive("alpha", alpha)?;
                if n == 0 {
                    return Err(Error::InvalidParameter("n must be at least 1".into()));
                }
            }
            KernelFamily::KendallType { c, p } => {
                positive("c", c)?;
                if !(p >= T::lit(2.0) && p.is_finite()) {
                    return Err(Error::InvalidParameter(format!("p must be at least 2, got {p}")));
                }
            }
        }
        let kernel = Self { family };
        if let KernelFamily::KendallType { c, p } = family {
            // No closed admissibility region for (c, p); require a
            // nonincreasing kernel with values in [0, 1] on a grid.
            let mut prev = T::one();
            for i in 0..=VALIDATION_GRID {
                let t = T::lit(i as f64 / VALIDATION_GRID as f64);
                let v = kernel.omega(t);
                let slack = T::epsilon() * T::lit(16.0);
                if v < -slack || v > T::one() + slack || v > prev + slack {
                    return Err(Error::InvalidParameter(format!(
                        "(c, p) = ({c}, {p}) does not give a nonincreasing kernel in [0,1] (t = {t}, value {v})"
                    )));
                }
                prev = v;
            }
        }
        Ok(kernel)
    }

    pub fn stable(alpha: T) -> Result<Self> {
        Self::new(KernelFamily::Stable { alpha })
    }

    pub fn kendall(alpha: T) -> Result<Self> {
        Self::new(KernelFamily::Kendall { alpha })
    }

    pub fn kucharczak_urbanik(alpha: T, n: u32) -> Result<Self> {
        Self::new(KernelFamily::KucharczakUrbanik { alpha, n })
    }

    pub fn kendall_type(c: T, p: T) -> Result<Self> {
        Self::new(KernelFamily::KendallType { c, p })
    }

    pub fn family(&self) -> KernelFamily<T> {
        self.family
    }

    pub fn family_id(&self) -> FamilyId {
        match self.family {
            KernelFamily::Stable { .. } => FamilyId::Stable,
            KernelFamily::Kendall { .. } => FamilyId::Kendall,
            KernelFamily::KucharczakUrbanik { .. } => FamilyId::KucharczakUrbanik,
            KernelFamily::KendallType { .. } => FamilyId::KendallType,
        }
    }

    pub fn is_monotonic(&self) -> bool {
        self.family_id().is_monotonic()
    }

    /// `Ω(t)` for `t ≥ 0`.
    pub fn omega(&self, t: T) -> T {
        match self.family {
            KernelFamily::Stable { alpha } => (-t.powf(alpha)).exp(),
            KernelFamily::Kendall { alpha } => positive_part(T::one() - t.powf(alpha)),
            KernelFamily::KucharczakUrbanik { alpha, n } => {
                positive_part(T::one() - t.powf(alpha)).powi(n as i32)
            }
            KernelFamily::KendallType { c, p } => {
                if t > T::one() {
                    T::zero()
                } else {
                    T::one() - (c + T::one()) * t + c * t.powf(p)
                }
            }
        }
    }

    /// `Ω'(t)` for `t > 0` (one-sided at the support edge).
    pub fn omega_derivative(&self, t: T) -> T {
        match self.family {
            KernelFamily::Stable { alpha } => {
                -alpha * t.powf(alpha - T::one()) * (-t.powf(alpha)).exp()
            }
            KernelFamily::Kendall { alpha } => {
                if t < T::one() {
                    -alpha * t.powf(alpha - T::one())
                } else {
                    T::zero()
                }
            }
            KernelFamily::KucharczakUrbanik { alpha, n } => {
                if t < T::one() {
                    let nf = T::lit(n as f64);
                    -nf * alpha * t.powf(alpha - T::one()) * (T::one() - t.powf(alpha)).powi(n as i32 - 1)
                } else {
                    T::zero()
                }
            }
            KernelFamily::KendallType { c, p } => {
                if t < T::one() {
                    -(c + T::one()) + c * p * t.powf(p - T::one())
                } else {
                    T::zero()
                }
            }
        }
    }

    /// Right end of the kernel support (`1`, or `+inf` for the stable kernel).
    pub fn support_end(&self) -> T {
        match self.family {
            KernelFamily::Stable { .. } => T::infinity(),
            _ => T::one(),
        }
    }
}

/// `Ω(t)`, rejecting negative or non-finite `t`.
pub fn kernel_omega<T: Real>(kernel: &ConvolutionKernel<T>, t: T) -> Result<T> {
    if !(t >= T::zero()) || t.is_infinite() {
        return Err(Error::InvalidInput(format!("kernel argument must be >= 0, got {t}")));
    }
    Ok(kernel.omega(t))
}

fn integration_range<T: Real>(kernel: &ConvolutionKernel<T>, t: T) -> (T, Vec<T>) {
    let end = kernel.support_end();
    if t == T::zero() || end.is_infinite() {
        (T::infinity(), Vec::new())
    } else {
        (end / t, vec![end / t])
    }
}

/// Generalized characteristic function `Φ_μ(t) = ∫ Ω(t x) μ(dx)`.
pub fn char_fn<T: Real, M: Measure<T> + ?Sized>(
    measure: &M,
    kernel: &ConvolutionKernel<T>,
    t: T,
    quad: &Quadrature<T>,
) -> Result<T> {
    if !(t >= T::zero()) {
        return Err(Error::InvalidInput(format!("transform argument must be >= 0, got {t}")));
    }
    let (upper, breaks) = integration_range(kernel, t);
    integrate_measure(measure, |x| kernel.omega(t * x), T::zero(), upper, &breaks, quad)
}

/// `Φ(t)` from a CDF alone, by parts: `Φ(t) = -∫ F(x) t Ω'(t x) dx`.
///
/// Valid for a probability CDF on `[0, inf)` and kernels with `Ω(0) = 1`
/// vanishing at infinity.
pub fn char_fn_from_cdf<T: Real, F: Fn(T) -> T>(
    cdf: F,
    kernel: &ConvolutionKernel<T>,
    t: T,
    breaks: &[T],
    quad: &Quadrature<T>,
) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::InvalidInput(format!("transform argument must be > 0, got {t}")));
    }
    let (upper, mut all_breaks) = integration_range(kernel, t);
    all_breaks.extend_from_slice(breaks);
    quad.integrate(
        |x| -cdf(x) * t * kernel.omega_derivative(t * x),
        T::zero(),
        upper,
        &all_breaks,
    )
}

/// Transform of the renewal measure from the transform of the step law,
/// `Φ_m = Φ_ν / (1 - Φ_ν)`.
pub fn fredholm_phi<T: Real>(phi_nu: T) -> Result<T> {
    if phi_nu.is_nan() {
        return Err(Error::InvalidInput("transform value is NaN".into()));
    }
    if phi_nu >= T::one() {
        return Err(Error::Divergence(format!(
            "renewal transform undefined at Φ_ν = {phi_nu}"
        )));
    }
    Ok(phi_nu / (T::one() - phi_nu))
}

/// `(δ_x ▵_α δ_y)((0, t))`: `(1 - x^α y^α / t^{2α}) 1{x < t, y < t}`.
pub fn kendall_pair_cdf<T: Real>(x: T, y: T, alpha: T, t: T) -> Result<T> {
    if !(x >= T::zero() && y >= T::zero()) {
        return Err(Error::InvalidInput(format!("x, y must be >= 0, got ({x}, {y})")));
    }
    if !(t > T::zero()) {
        return Err(Error::InvalidInput(format!("t must be > 0, got {t}")));
    }
    if !(alpha > T::zero()) {
        return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
    }
    if x < t && y < t {
        Ok(T::one() - (x * y / (t * t)).powf(alpha))
    } else {
        Ok(T::zero())
    }
}

/// Right-continuous version `(δ_x ▵_α δ_y)([0, t])`.
#[inline]
pub fn kendall_pair_cdf_closed<T: Real>(x: T, y: T, alpha: T, t: T) -> T {
    if x <= t && y <= t {
        T::one() - (x * y / (t * t)).powf(alpha)
    } else {
        T::zero()
    }
}

/// `(μ₁ ▵_α μ₂)([0, t])` on a strictly increasing grid, as the iterated
/// Stieltjes integral of the pair kernel. The outer integral runs over `μ₁`.
pub fn kendall_convolve_cdf<T, M1, M2>(
    first: &M1,
    second: &M2,
    alpha: T,
    grid: &[T],
    quad: &Quadrature<T>,
) -> Result<Vec<T>>
where
    T: Real,
    M1: Measure<T> + ?Sized,
    M2: Measure<T> + ?Sized,
{
    if !(alpha > T::zero()) {
        return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
    }
    if grid.iter().any(|&t| !(t > T::zero()) || !t.is_finite()) {
        return Err(Error::InvalidInput("grid points must be positive and finite".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("grid must be strictly increasing".into()));
    }
    grid.par_iter()
        .map(|&t| {
            let inner = |x: T| {
                integrate_measure(
                    second,
                    |y| kendall_pair_cdf_closed(x, y, alpha, t),
                    T::zero(),
                    t,
                    &[],
                    quad,
                )
                .unwrap_or(T::nan())
            };
            integrate_measure(first, inner, T::zero(), t, &[], quad)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::catalog_lookup;
    use crate::measure::{Mixture, PointMass, Scaled};

    fn q() -> Quadrature<f64> {
        Quadrature::default()
    }

    #[test]
    fn kernel_values() {
        let s = ConvolutionKernel::<f64>::stable(1.0).unwrap();
        assert!((s.omega(1.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((s.omega(1.0) - 0.367879).abs() < 1e-6);
        let k = ConvolutionKernel::<f64>::kendall(1.0).unwrap();
        assert_eq!(kernel_omega(&k, 2.0).unwrap(), 0.0);
        let ku = ConvolutionKernel::<f64>::kucharczak_urbanik(1.0, 2).unwrap();
        assert!((ku.omega(0.5) - 0.25).abs() < 1e-15);
        let kt = ConvolutionKernel::<f64>::kendall_type(1.0, 2.0).unwrap();
        assert_eq!(kt.omega(1.5), 0.0);
        assert!((kt.omega(0.5) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(ConvolutionKernel::<f64>::stable(0.0).is_err());
        assert!(ConvolutionKernel::<f64>::kendall(-1.0).is_err());
        assert!(ConvolutionKernel::<f64>::kucharczak_urbanik(1.0, 0).is_err());
        assert!(ConvolutionKernel::<f64>::kendall_type(0.5, 1.5).is_err());
        // c(p - 1) > 1 makes the kernel dip below zero before t = 1.
        assert!(ConvolutionKernel::<f64>::kendall_type(2.0, 2.0).is_err());
        assert!(ConvolutionKernel::<f64>::kendall_type(1.0, 2.0).is_ok());
        assert!(kernel_omega(&ConvolutionKernel::<f64>::kendall(1.0).unwrap(), -0.1).is_err());
    }

    #[test]
    fn kernels_unit_at_zero_and_nonincreasing() {
        let kernels = [
            ConvolutionKernel::<f64>::stable(0.7).unwrap(),
            ConvolutionKernel::<f64>::kendall(1.5).unwrap(),
            ConvolutionKernel::<f64>::kucharczak_urbanik(2.0, 3).unwrap(),
            ConvolutionKernel::<f64>::kendall_type(0.5, 3.0).unwrap(),
        ];
        for k in kernels {
            assert_eq!(k.omega(0.0), 1.0);
            assert!(k.is_monotonic());
            let mut prev = 1.0;
            for i in 0..=1000 {
                let t = 3.0 * i as f64 / 1000.0;
                let v = k.omega(t);
                assert!((0.0..=1.0).contains(&v));
                assert!(v <= prev + 1e-15, "{k:?} increases at {t}");
                prev = v;
            }
        }
        assert!(!FamilyId::Kingman.is_monotonic());
    }

    #[test]
    fn char_fn_examples() {
        let k = ConvolutionKernel::<f64>::kendall(1.0).unwrap();
        let stable = ConvolutionKernel::<f64>::stable(1.0).unwrap();
        for kern in [k, stable] {
            let v = char_fn(&PointMass(1.0), &kern, 0.5, &q()).unwrap();
            assert!((v - kern.omega(0.5)).abs() < 1e-15);
        }
        // π₂ under the Kendall(1) kernel: (1 - t)^2.
        let p = catalog_lookup::<f64>("pareto2alpha", 1.0, None).unwrap();
        let v = char_fn(&p, &k, 0.5, &q()).unwrap();
        assert!((v - 0.25).abs() < 1e-10);
        let u = catalog_lookup::<f64>("uniform01", 1.0, None).unwrap();
        let v = char_fn(&u, &k, 0.5, &q()).unwrap();
        assert!((v - 0.75).abs() < 1e-12);
    }

    #[test]
    fn char_fn_by_parts_matches_direct() {
        let u = catalog_lookup::<f64>("kendall_stable", 1.3, None).unwrap();
        for kern in [
            ConvolutionKernel::<f64>::kendall(1.3).unwrap(),
            ConvolutionKernel::<f64>::stable(0.8).unwrap(),
            ConvolutionKernel::<f64>::kucharczak_urbanik(1.3, 2).unwrap(),
        ] {
            for t in [0.2, 0.9, 3.0] {
                let direct = char_fn(&u, &kern, t, &q()).unwrap();
                let parts = char_fn_from_cdf(|x| u.cdf(x), &kern, t, &[], &q()).unwrap();
                assert!((direct - parts).abs() < 1e-9, "{kern:?} t={t}: {direct} vs {parts}");
            }
        }
    }

    #[test]
    fn homomorphism_is_affine_in_mixtures() {
        let a = catalog_lookup::<f64>("uniform01", 1.0, None).unwrap();
        let b = catalog_lookup::<f64>("pareto2alpha", 1.0, None).unwrap();
        let k = ConvolutionKernel::<f64>::kendall(1.0).unwrap();
        for p in [0.0, 0.3, 1.0] {
            let mix = Mixture {
                first: &a,
                second: &b,
                weight: p,
            };
            for t in [0.1, 0.5, 0.9] {
                let lhs = char_fn(&mix, &k, t, &q()).unwrap();
                let rhs = p * char_fn(&a, &k, t, &q()).unwrap()
                    + (1.0 - p) * char_fn(&b, &k, t, &q()).unwrap();
                assert!((lhs - rhs).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn scaling_property() {
        let nu = catalog_lookup::<f64>("lackmem", 2.0, None).unwrap();
        for kern in [ConvolutionKernel::<f64>::kendall(2.0).unwrap(), ConvolutionKernel::<f64>::stable(2.0).unwrap()] {
            for a in [0.5, 2.0] {
                let scaled = Scaled {
                    inner: &nu,
                    factor: a,
                };
                for t in [0.3, 0.7, 1.4] {
                    let lhs = char_fn(&scaled, &kern, t, &q()).unwrap();
                    let rhs = char_fn(&nu, &kern, a * t, &q()).unwrap();
                    assert!((lhs - rhs).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn fredholm_phi_algebra() {
        assert_eq!(fredholm_phi(0.5).unwrap(), 1.0);
        assert!(fredholm_phi(1.0 - 1e-12).unwrap() > 1e11);
        assert!(matches!(fredholm_phi(1.0), Err(Error::Divergence(_))));
    }

    #[test]
    fn fredholm_for_point_mass_by_stieltjes_integral() {
        // m for ν = δ₁, α = 1: atom 1 at x = 1 plus density 2 on (1, ∞).
        struct Renewal;
        impl Measure<f64> for Renewal {
            fn atoms(&self) -> Vec<(f64, f64)> {
                vec![(1.0, 1.0)]
            }
            fn density(&self, x: f64) -> f64 {
                if x > 1.0 {
                    2.0
                } else {
                    0.0
                }
            }
            fn density_support(&self) -> (f64, f64) {
                (1.0, f64::INFINITY)
            }
        }
        let k = ConvolutionKernel::<f64>::kendall(1.0).unwrap();
        let phi_nu = char_fn(&PointMass(1.0), &k, 0.5, &q()).unwrap();
        assert_eq!(phi_nu, 0.5);
        let phi_m = char_fn(&Renewal, &k, 0.5, &q()).unwrap();
        assert!((phi_m - 1.0).abs() < 1e-12);
        assert!((fredholm_phi(phi_nu).unwrap() - phi_m).abs() < 1e-12);
    }

    #[test]
    fn pair_cdf_examples() {
        assert!((kendall_pair_cdf(1.0f64, 1.0, 1.0, 2.0).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(kendall_pair_cdf(1.0, 0.5, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(kendall_pair_cdf(0.0, 0.5, 1.3, 1.0).unwrap(), 1.0);
        assert!(kendall_pair_cdf(-1.0, 0.5, 1.0, 1.0).is_err());
        assert!(kendall_pair_cdf(1.0, 0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn convolution_examples() {
        let d = PointMass(1.0);
        let grid = [1.5, 2.0, 4.0];
        for alpha in [0.5, 1.0, 2.0] {
            let c = kendall_convolve_cdf(&d, &d, alpha, &grid, &q()).unwrap();
            for (v, t) in c.iter().zip(grid) {
                assert!((v - (1.0 - t.powf(-2.0 * alpha))).abs() < 1e-14);
            }
        }
        let u = catalog_lookup::<f64>("uniform01", 1.0, None).unwrap();
        let id = kendall_convolve_cdf(&PointMass(0.0), &u, 1.0, &[0.25, 0.5], &q()).unwrap();
        assert!((id[0] - 0.25).abs() < 1e-12 && (id[1] - 0.5).abs() < 1e-12);
        let uu = kendall_convolve_cdf(&u, &u, 1.0, &[2.0], &q()).unwrap();
        assert!((uu[0] - 0.9375).abs() < 1e-12);
        assert!(kendall_convolve_cdf(&u, &u, 1.0, &[2.0, 1.0], &q()).is_err());
    }
}
