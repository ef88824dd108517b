//! Measures on `[0, inf)` split into an atomic part and an absolutely
//! continuous part, and Stieltjes integration against them.

use crate::error::{Error, Result};
use crate::quadrature::Quadrature;
use crate::scalar::Real;

/// A nonnegative measure on `[0, inf)`: finitely many atoms plus a density.
///
/// The total mass need not be one (the renewal measure is infinite), but the
/// mass of every bounded interval must be finite.
pub trait Measure<T: Real>: Sync {
    /// `(location, mass)` pairs.
    fn atoms(&self) -> Vec<(T, T)>;

    /// Density of the absolutely continuous part.
    fn density(&self, x: T) -> T;

    /// Closed interval outside of which the density vanishes. The upper end
    /// may be `+inf`.
    fn density_support(&self) -> (T, T);

    /// Points inside the support where the density is not smooth.
    fn breakpoints(&self) -> Vec<T> {
        Vec::new()
    }
}

/// `∫_{[lo, hi]} f dμ`: atoms summed exactly, density by quadrature.
pub fn integrate_measure<T, M, F>(
    measure: &M,
    f: F,
    lo: T,
    hi: T,
    extra_breaks: &[T],
    quad: &Quadrature<T>,
) -> Result<T>
where
    T: Real,
    M: Measure<T> + ?Sized,
    F: Fn(T) -> T,
{
    let mut total = T::zero();
    for (x, w) in measure.atoms() {
        if x >= lo && x <= hi && w != T::zero() {
            total = total + w * f(x);
        }
    }
    let (s_lo, s_hi) = measure.density_support();
    let a = lo.max(s_lo);
    let b = hi.min(s_hi);
    if b > a {
        let mut breaks = measure.breakpoints();
        breaks.extend_from_slice(extra_breaks);
        let part = quad.integrate(|x| f(x) * measure.density(x), a, b, &breaks)?;
        total = total + part;
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::IntegrationFailure(format!(
            "non-finite Stieltjes integral over [{lo}, {hi}]"
        )))
    }
}

/// `μ([0, t])`.
pub fn measure_cdf<T: Real, M: Measure<T> + ?Sized>(
    measure: &M,
    t: T,
    quad: &Quadrature<T>,
) -> Result<T> {
    integrate_measure(measure, |_| T::one(), T::zero(), t, &[], quad)
}

/// The point mass `δ_x`.
#[derive(Clone, Copy, Debug)]
pub struct PointMass<T>(pub T);

impl<T: Real> Measure<T> for PointMass<T> {
    fn atoms(&self) -> Vec<(T, T)> {
        vec![(self.0, T::one())]
    }
    fn density(&self, _x: T) -> T {
        T::zero()
    }
    fn density_support(&self) -> (T, T) {
        (T::zero(), T::zero())
    }
}

/// The image `T_a μ` of a measure under `x ↦ a x`, `a > 0`.
pub struct Scaled<'a, T: Real> {
    pub inner: &'a dyn Measure<T>,
    pub factor: T,
}

impl<T: Real> Measure<T> for Scaled<'_, T> {
    fn atoms(&self) -> Vec<(T, T)> {
        self.inner
            .atoms()
            .into_iter()
            .map(|(x, w)| (x * self.factor, w))
            .collect()
    }
    fn density(&self, x: T) -> T {
        self.inner.density(x / self.factor) / self.factor
    }
    fn density_support(&self) -> (T, T) {
        let (lo, hi) = self.inner.density_support();
        (lo * self.factor, hi * self.factor)
    }
    fn breakpoints(&self) -> Vec<T> {
        self.inner
            .breakpoints()
            .into_iter()
            .map(|b| b * self.factor)
            .collect()
    }
}

/// The convex combination `p μ₁ + (1 − p) μ₂`.
pub struct Mixture<'a, T: Real> {
    pub first: &'a dyn Measure<T>,
    pub second: &'a dyn Measure<T>,
    pub weight: T,
}

impl<T: Real> Measure<T> for Mixture<'_, T> {
    fn atoms(&self) -> Vec<(T, T)> {
        let q = T::one() - self.weight;
        self.first
            .atoms()
            .into_iter()
            .map(|(x, w)| (x, w * self.weight))
            .chain(self.second.atoms().into_iter().map(|(x, w)| (x, w * q)))
            .collect()
    }
    fn density(&self, x: T) -> T {
        let mut d = T::zero();
        if self.weight != T::zero() {
            d = d + self.weight * self.first.density(x);
        }
        if self.weight != T::one() {
            d = d + (T::one() - self.weight) * self.second.density(x);
        }
        d
    }
    fn density_support(&self) -> (T, T) {
        let (a1, b1) = self.first.density_support();
        let (a2, b2) = self.second.density_support();
        match (b1 > a1, b2 > a2) {
            (true, true) => (a1.min(a2), b1.max(b2)),
            (true, false) => (a1, b1),
            (false, true) => (a2, b2),
            (false, false) => (T::zero(), T::zero()),
        }
    }
    fn breakpoints(&self) -> Vec<T> {
        let mut b = self.first.breakpoints();
        b.extend(self.second.breakpoints());
        let (a1, b1) = self.first.density_support();
        let (a2, b2) = self.second.density_support();
        b.extend([a1, b1, a2, b2].into_iter().filter(|v| v.is_finite()));
        b
    }
}
