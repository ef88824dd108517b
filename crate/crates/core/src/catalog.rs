//! Catalog of unit-step laws for the Kendall random walk.
//!
//! Every entry carries its CDF, density, quantile and, where one exists, the
//! closed-form Williamson transform `G`, the truncated moment `H`, and the
//! renewal function `R`. Laws whose `G`/`H` have no elementary form
//! (`cauchy_onesided`, `student_like`) fall back to quadrature in
//! [`crate::williamson`].

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::quadrature::Quadrature;
use crate::scalar::{positive_part, Real};
use crate::walk::{open_unit, sample_pair_convolution, substream};

/// Identifier and parameter schema of a catalog entry.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub params: &'static [&'static str],
    pub summary: &'static str,
}

/// All catalog entries, in a stable order.
pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "dirac1",
        params: &["alpha"],
        summary: "point mass at 1",
    },
    CatalogEntry {
        name: "uniform01",
        params: &["alpha"],
        summary: "uniform law on (0,1)",
    },
    CatalogEntry {
        name: "pareto2alpha",
        params: &["alpha"],
        summary: "Pareto law with index 2*alpha on [1,inf)",
    },
    CatalogEntry {
        name: "lackmem",
        params: &["alpha"],
        summary: "lack-of-memory law, F(t) = min(t,1)^alpha",
    },
    CatalogEntry {
        name: "kendall_stable",
        params: &["alpha"],
        summary: "Kendall-stable law, G(t) = H(t) = exp(-t^-alpha)",
    },
    CatalogEntry {
        name: "pareto",
        params: &["alpha", "beta"],
        summary: "Pareto law with index beta on [1,inf)",
    },
    CatalogEntry {
        name: "cauchy_onesided",
        params: &["alpha"],
        summary: "half-Cauchy law, density 2/(pi(1+x^2))",
    },
    CatalogEntry {
        name: "student_like",
        params: &["alpha", "beta"],
        summary: "Lomax surrogate with the one-sided Student-t tail c(beta) x^(-beta-1)",
    },
];

/// The law behind a [`StepDistribution`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepLaw<T> {
    Dirac1,
    Uniform01,
    Pareto2Alpha,
    LackOfMemory,
    KendallStable,
    Pareto { beta: T },
    HalfCauchy,
    /// Lomax density `β s^β (s + x)^{-β-1}` with `s` chosen so that the tail
    /// constant equals the one-sided Student-t constant `c(β)`.
    StudentLike { beta: T, scale: T },
}

/// A unit-step law `ν` on `(0, inf)` bound to the Kendall index `α`.
#[derive(Clone, Debug)]
pub struct StepDistribution<T: Real> {
    law: StepLaw<T>,
    alpha: T,
    quad: Quadrature<T>,
}

fn check_positive<T: Real>(name: &str, v: T) -> Result<T> {
    if v > T::zero() && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Tail constant of the one-sided Student-t density with `β` degrees of
/// freedom: `f(x) ~ c(β) x^{-β-1}`.
pub fn student_tail_constant(beta: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let ln_c = std::f64::consts::LN_2 + ln_gamma(0.5 * (beta + 1.0)) + 0.5 * beta * beta.ln()
        - 0.5 * std::f64::consts::PI.ln()
        - ln_gamma(0.5 * beta);
    ln_c.exp()
}

/// Looks up a catalog entry by name. `beta` is required by `pareto` and
/// `student_like` and rejected by the others.
pub fn catalog_lookup<T: Real>(name: &str, alpha: T, beta: Option<T>) -> Result<StepDistribution<T>> {
    let alpha = check_positive("alpha", alpha)?;
    let needs_beta = matches!(name, "pareto" | "student_like");
    let beta = match (needs_beta, beta) {
        (true, Some(b)) => Some(check_positive("beta", b)?),
        (true, None) => {
            return Err(Error::InvalidParameter(format!("`{name}` requires beta")));
        }
        (false, Some(_)) => {
            return Err(Error::InvalidParameter(format!("`{name}` takes no beta")));
        }
        (false, None) => None,
    };
    let law = match name {
        "dirac1" => StepLaw::Dirac1,
        "uniform01" => StepLaw::Uniform01,
        "pareto2alpha" => StepLaw::Pareto2Alpha,
        "lackmem" => StepLaw::LackOfMemory,
        "kendall_stable" => StepLaw::KendallStable,
        "pareto" => StepLaw::Pareto { beta: beta.unwrap() },
        "cauchy_onesided" => StepLaw::HalfCauchy,
        "student_like" => {
            let b = beta.unwrap();
            let bf = b.to_f64_lossy();
            let c = student_tail_constant(bf);
            let scale = T::lit((c / bf).powf(1.0 / bf));
            StepLaw::StudentLike { beta: b, scale }
        }
        other => return Err(Error::UnknownDistribution(other.to_string())),
    };
    Ok(StepDistribution {
        law,
        alpha,
        quad: Quadrature::default(),
    })
}

/// `1 - (1 + v) e^{-v}`, accurate for small `v`.
fn gamma2_lower<T: Real>(v: T) -> T {
    if v < T::lit(0.1) {
        // Σ_{k≥2} (-1)^k (k-1) v^k / k!
        let mut term = v * v / T::lit(2.0);
        let mut sum = term;
        for k in 3..20u32 {
            let kf = T::lit(k as f64);
            term = -term * v / kf;
            sum = sum + term * (kf - T::one());
        }
        sum
    } else {
        T::one() - (T::one() + v) * (-v).exp()
    }
}

/// Solves `(1 + v) e^{-v} = q` for `v > 0`, `q ∈ (0, 1)`.
fn gamma2_upper_inverse<T: Real>(q: T) -> T {
    let target = q.ln();
    let g = |v: T| {
        let lhs = if v < T::lit(0.1) {
            // ln(1+v) - v = Σ_{k≥2} (-1)^{k+1} v^k / k
            let mut p = v * v;
            let mut sum = T::zero();
            for k in 2..30u32 {
                let term = p / T::lit(k as f64);
                sum = if k % 2 == 0 { sum - term } else { sum + term };
                p = p * v;
            }
            sum
        } else {
            v.ln_1p() - v
        };
        lhs - target
    };
    let mut lo = T::zero();
    let mut hi = T::one();
    while g(hi) > T::zero() {
        lo = hi;
        hi = hi * T::lit(2.0);
    }
    let mut v = T::lit(0.5) * (lo + hi);
    for _ in 0..200 {
        let gv = g(v);
        if gv == T::zero() {
            break;
        }
        if gv > T::zero() {
            lo = v;
        } else {
            hi = v;
        }
        let deriv = -v / (T::one() + v);
        let newton = v - gv / deriv;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            T::lit(0.5) * (lo + hi)
        };
        let done = (next - v).abs() <= T::epsilon() * T::lit(4.0) * next;
        v = next;
        if done || hi - lo <= T::epsilon() * T::lit(4.0) * hi {
            break;
        }
    }
    v
}

impl<T: Real> StepDistribution<T> {
    pub fn law(&self) -> StepLaw<T> {
        self.law
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn quadrature(&self) -> &Quadrature<T> {
        &self.quad
    }

    /// Replaces the quadrature settings used by the numeric transforms.
    pub fn with_quadrature(mut self, quad: Quadrature<T>) -> Self {
        self.quad = quad;
        self
    }

    pub fn name(&self) -> &'static str {
        match self.law {
            StepLaw::Dirac1 => "dirac1",
            StepLaw::Uniform01 => "uniform01",
            StepLaw::Pareto2Alpha => "pareto2alpha",
            StepLaw::LackOfMemory => "lackmem",
            StepLaw::KendallStable => "kendall_stable",
            StepLaw::Pareto { .. } => "pareto",
            StepLaw::HalfCauchy => "cauchy_onesided",
            StepLaw::StudentLike { .. } => "student_like",
        }
    }

    /// Tail index `β` for the power-tailed laws.
    pub fn beta(&self) -> Option<T> {
        match self.law {
            StepLaw::Pareto { beta } | StepLaw::StudentLike { beta, .. } => Some(beta),
            StepLaw::Pareto2Alpha => Some(T::lit(2.0) * self.alpha),
            StepLaw::HalfCauchy => Some(T::one()),
            _ => None,
        }
    }

    /// Right-continuous CDF.
    pub fn cdf(&self, t: T) -> T {
        let a = self.alpha;
        if t <= T::zero() {
            return T::zero();
        }
        match self.law {
            StepLaw::Dirac1 => {
                if t >= T::one() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            StepLaw::Uniform01 => t.min(T::one()),
            StepLaw::LackOfMemory => t.min(T::one()).powf(a),
            StepLaw::KendallStable => {
                let v = t.powf(-a);
                if v < T::lit(0.1) {
                    T::one() - gamma2_lower(v)
                } else {
                    (T::one() + v) * (-v).exp()
                }
            }
            StepLaw::HalfCauchy => T::lit(2.0) * t.atan() / T::PI(),
            _ => T::one() - self.sf(t),
        }
    }

    /// Left limit `F(t-)`.
    pub fn cdf_left(&self, t: T) -> T {
        match self.law {
            StepLaw::Dirac1 => {
                if t > T::one() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            _ => self.cdf(t),
        }
    }

    /// Survival function `1 - F(t)`, accurate in the tail.
    pub fn sf(&self, t: T) -> T {
        let a = self.alpha;
        if t <= T::zero() {
            return T::one();
        }
        match self.law {
            StepLaw::Pareto2Alpha => {
                if t < T::one() {
                    T::one()
                } else {
                    t.powf(-T::lit(2.0) * a)
                }
            }
            StepLaw::Pareto { beta } => {
                if t < T::one() {
                    T::one()
                } else {
                    t.powf(-beta)
                }
            }
            StepLaw::KendallStable => gamma2_lower(t.powf(-a)),
            StepLaw::HalfCauchy => T::lit(2.0) * t.recip().atan() / T::PI(),
            StepLaw::StudentLike { beta, scale } => (scale / (scale + t)).powf(beta),
            _ => T::one() - self.cdf(t),
        }
    }

    /// Density of the absolutely continuous part (zero for `dirac1`).
    pub fn pdf(&self, x: T) -> T {
        let a = self.alpha;
        if x <= T::zero() {
            return T::zero();
        }
        match self.law {
            StepLaw::Dirac1 => T::zero(),
            StepLaw::Uniform01 => {
                if x <= T::one() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            StepLaw::Pareto2Alpha => {
                if x >= T::one() {
                    T::lit(2.0) * a * x.powf(-T::lit(2.0) * a - T::one())
                } else {
                    T::zero()
                }
            }
            StepLaw::LackOfMemory => {
                if x <= T::one() {
                    a * x.powf(a - T::one())
                } else {
                    T::zero()
                }
            }
            StepLaw::KendallStable => {
                let v = x.powf(-a);
                a * v * v / x * (-v).exp()
            }
            StepLaw::Pareto { beta } => {
                if x >= T::one() {
                    beta * x.powf(-beta - T::one())
                } else {
                    T::zero()
                }
            }
            StepLaw::HalfCauchy => T::lit(2.0) / (T::PI() * (T::one() + x * x)),
            StepLaw::StudentLike { beta, scale } => {
                beta / scale * (scale / (scale + x)).powf(beta + T::one())
            }
        }
    }

    /// Infimum of the support.
    pub fn support_infimum(&self) -> T {
        match self.law {
            StepLaw::Dirac1 | StepLaw::Pareto2Alpha | StepLaw::Pareto { .. } => T::one(),
            _ => T::zero(),
        }
    }

    /// Quantile function; `u` must lie in `(0, 1)`.
    pub fn quantile(&self, u: T) -> T {
        let a = self.alpha;
        match self.law {
            StepLaw::Dirac1 => T::one(),
            StepLaw::Uniform01 => u,
            StepLaw::Pareto2Alpha => (T::one() - u).powf(-(T::lit(2.0) * a).recip()),
            StepLaw::LackOfMemory => u.powf(a.recip()),
            StepLaw::KendallStable => gamma2_upper_inverse(u).powf(-a.recip()),
            StepLaw::Pareto { beta } => (T::one() - u).powf(-beta.recip()),
            StepLaw::HalfCauchy => (T::FRAC_PI_2() * u).tan(),
            StepLaw::StudentLike { beta, scale } => {
                scale * ((T::one() - u).powf(-beta.recip()) - T::one())
            }
        }
    }

    /// Inverse-CDF draw for a uniform variate `u ∈ (0, 1)`.
    pub fn sample(&self, u: T) -> Result<T> {
        if !(u > T::zero() && u < T::one()) {
            return Err(Error::InvalidInput(format!("uniform variate {u} outside (0,1)")));
        }
        Ok(self.quantile(u))
    }

    /// Closed-form `G(t) = ∫ (1 - x^α/t^α)_+ ν(dx)` where the catalog has one.
    pub fn analytic_g(&self, t: T) -> Option<T> {
        let a = self.alpha;
        if t <= T::zero() {
            return Some(T::zero());
        }
        match self.law {
            StepLaw::Dirac1 => Some(positive_part(T::one() - t.powf(-a))),
            StepLaw::Uniform01 => {
                let s = t.min(T::one());
                Some(s - s.powf(a + T::one()) / ((a + T::one()) * t.powf(a)))
            }
            StepLaw::Pareto2Alpha => {
                let p = positive_part(T::one() - t.powf(-a));
                Some(p * p)
            }
            StepLaw::LackOfMemory => Some(if t < T::one() {
                t.powf(a) / T::lit(2.0)
            } else {
                T::one() - t.powf(-a) / T::lit(2.0)
            }),
            StepLaw::KendallStable => Some((-t.powf(-a)).exp()),
            StepLaw::Pareto { .. } => {
                if t < T::one() {
                    Some(T::zero())
                } else {
                    Some(self.cdf(t) - t.powf(-a) * self.analytic_h(t)?)
                }
            }
            StepLaw::HalfCauchy | StepLaw::StudentLike { .. } => None,
        }
    }

    /// Closed-form `1 - G(t)`, computed without cancellation.
    pub fn analytic_g_bar(&self, t: T) -> Option<T> {
        let a = self.alpha;
        if t <= T::zero() {
            return Some(T::one());
        }
        match self.law {
            StepLaw::Dirac1 => Some(if t >= T::one() { t.powf(-a) } else { T::one() }),
            StepLaw::Uniform01 => Some(if t >= T::one() {
                t.powf(-a) / (a + T::one())
            } else {
                T::one() - a * t / (a + T::one())
            }),
            StepLaw::Pareto2Alpha => {
                let s = t.powf(-a).min(T::one());
                Some(s * (T::lit(2.0) - s))
            }
            StepLaw::LackOfMemory => Some(if t < T::one() {
                T::one() - t.powf(a) / T::lit(2.0)
            } else {
                t.powf(-a) / T::lit(2.0)
            }),
            StepLaw::KendallStable => Some(-(-t.powf(-a)).exp_m1()),
            StepLaw::Pareto { .. } => Some(self.sf(t) + t.powf(-a) * self.analytic_h(t)?),
            StepLaw::HalfCauchy | StepLaw::StudentLike { .. } => None,
        }
    }

    /// Closed-form `H(t) = ∫_{[0,t]} x^α ν(dx)` where the catalog has one.
    pub fn analytic_h(&self, t: T) -> Option<T> {
        let a = self.alpha;
        if t <= T::zero() {
            return Some(T::zero());
        }
        match self.law {
            StepLaw::Dirac1 => Some(if t >= T::one() { T::one() } else { T::zero() }),
            StepLaw::Uniform01 => Some(t.min(T::one()).powf(a + T::one()) / (a + T::one())),
            StepLaw::Pareto2Alpha => Some(T::lit(2.0) * positive_part(T::one() - t.powf(-a))),
            StepLaw::LackOfMemory => Some(t.min(T::one()).powf(T::lit(2.0) * a) / T::lit(2.0)),
            StepLaw::KendallStable => Some((-t.powf(-a)).exp()),
            StepLaw::Pareto { beta } => {
                if t <= T::one() {
                    return Some(T::zero());
                }
                let l = t.ln();
                let d = a - beta;
                if d == T::zero() {
                    Some(a * l)
                } else {
                    // β (t^d - 1)/d, written to stay accurate as d → 0.
                    let dl = d * l;
                    Some(beta * l * dl.exp_m1() / dl)
                }
            }
            StepLaw::HalfCauchy | StepLaw::StudentLike { .. } => None,
        }
    }

    /// Left limit `H(t-)`, differing from `H(t)` only at atoms.
    pub fn analytic_h_left(&self, t: T) -> Option<T> {
        match self.law {
            StepLaw::Dirac1 => Some(if t > T::one() { T::one() } else { T::zero() }),
            _ => self.analytic_h(t),
        }
    }

    /// Closed-form renewal function for the laws that have one.
    pub fn analytic_r(&self, t: T) -> Option<T> {
        let a = self.alpha;
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        if t <= T::zero() {
            return match self.law {
                StepLaw::Pareto { .. } | StepLaw::HalfCauchy | StepLaw::StudentLike { .. } => None,
                _ => Some(T::zero()),
            };
        }
        match self.law {
            StepLaw::Dirac1 => Some(if t >= T::one() { two * t.powf(a) - T::one() } else { T::zero() }),
            StepLaw::Uniform01 => Some(if t <= T::one() {
                let a1 = a + T::one();
                t * (a1 * a1 - a * a * t) / ((a1 - a * t) * (a1 - a * t))
            } else {
                two * (a + T::one()) * t.powf(a) - T::one()
            }),
            StepLaw::Pareto2Alpha => Some(if t > T::one() {
                let s = t.powf(a);
                (s - T::one()) * (T::one() - T::lit(3.0) * s + four * s * s) / ((two * s - T::one()) * (two * s - T::one()))
            } else {
                T::zero()
            }),
            StepLaw::LackOfMemory => Some(if t <= T::one() {
                // (4 s^{-1} - 1)(2 s^{-1} - 1)^{-2} with s = t^α, cleared of s^{-1}.
                let s = t.powf(a);
                s * (four - s) / ((two - s) * (two - s))
            } else {
                four * t.powf(a) - T::one()
            }),
            StepLaw::KendallStable => {
                let v = t.powf(-a);
                let d = -(-v).exp_m1();
                Some((-v).exp() * (v + d) / (d * d))
            }
            StepLaw::Pareto { .. } | StepLaw::HalfCauchy | StepLaw::StudentLike { .. } => None,
        }
    }

    /// `m(α) = E T^α`; `+inf` when the moment diverges.
    pub fn m_alpha(&self) -> T {
        let a = self.alpha;
        match self.law {
            StepLaw::Dirac1 | StepLaw::KendallStable => T::one(),
            StepLaw::Uniform01 => (a + T::one()).recip(),
            StepLaw::Pareto2Alpha => T::lit(2.0),
            StepLaw::LackOfMemory => T::lit(0.5),
            StepLaw::Pareto { beta } => {
                if beta > a {
                    beta / (beta - a)
                } else {
                    T::infinity()
                }
            }
            StepLaw::HalfCauchy => {
                if a < T::one() {
                    (T::FRAC_PI_2() * a).cos().recip()
                } else {
                    T::infinity()
                }
            }
            StepLaw::StudentLike { beta, scale } => {
                if beta > a {
                    use statrs::function::gamma::ln_gamma;
                    let (af, bf) = (a.to_f64_lossy(), beta.to_f64_lossy());
                    let ln_b = ln_gamma(af + 1.0) + ln_gamma(bf - af) - ln_gamma(bf);
                    scale.powf(a) * T::lit(ln_b.exp())
                } else {
                    T::infinity()
                }
            }
        }
    }

    /// Regular-variation index `θ` of `H`.
    pub fn theta(&self) -> T {
        match self.beta() {
            Some(b) if !matches!(self.law, StepLaw::Pareto2Alpha) => positive_part(self.alpha - b),
            _ => T::zero(),
        }
    }

    /// Whether `G` and `H` have closed forms here.
    pub fn has_analytic_transform(&self) -> bool {
        !matches!(self.law, StepLaw::HalfCauchy | StepLaw::StudentLike { .. })
    }

    /// Named parameters, for reporting.
    pub fn params(&self) -> Vec<(&'static str, T)> {
        let mut p = vec![("alpha", self.alpha)];
        if let StepLaw::Pareto { beta } | StepLaw::StudentLike { beta, .. } = self.law {
            p.push(("beta", beta));
        }
        p
    }
}

impl<T: Real> Measure<T> for StepDistribution<T> {
    fn atoms(&self) -> Vec<(T, T)> {
        match self.law {
            StepLaw::Dirac1 => vec![(T::one(), T::one())],
            _ => Vec::new(),
        }
    }

    fn density(&self, x: T) -> T {
        self.pdf(x)
    }

    fn density_support(&self) -> (T, T) {
        match self.law {
            StepLaw::Dirac1 => (T::zero(), T::zero()),
            StepLaw::Uniform01 | StepLaw::LackOfMemory => (T::zero(), T::one()),
            StepLaw::Pareto2Alpha | StepLaw::Pareto { .. } => (T::one(), T::infinity()),
            _ => (T::zero(), T::infinity()),
        }
    }

    fn breakpoints(&self) -> Vec<T> {
        match self.law {
            StepLaw::HalfCauchy | StepLaw::StudentLike { .. } | StepLaw::KendallStable => {
                vec![T::one()]
            }
            _ => Vec::new(),
        }
    }
}

/// Monte Carlo estimate of `P{X > x⋄y | X > x}` for `X ~ ν` independent of
/// `x⋄y ~ δ_x ▵_α δ_y`, paired with the lack-of-memory target `1 - F(y)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LackOfMemoryEstimate {
    pub empirical: f64,
    pub target: f64,
    pub standard_error: f64,
    pub conditioned: u64,
}

pub fn lack_of_memory_check<T: Real>(
    dist: &StepDistribution<T>,
    x: T,
    y: T,
    n_sims: u64,
    seed: u64,
) -> Result<LackOfMemoryEstimate> {
    if !(x > T::zero() && y > T::zero()) {
        return Err(Error::InvalidInput("x and y must be positive".into()));
    }
    if dist.sf(x) <= T::zero() {
        return Err(Error::DegenerateState(format!(
            "conditioning event X > {x} has zero probability"
        )));
    }
    let mut rng: ChaCha8Rng = substream(seed, 0);
    let mut hits = 0u64;
    let mut conditioned = 0u64;
    for _ in 0..n_sims {
        let sample = dist.quantile(T::lit(open_unit(&mut rng)));
        let z = sample_pair_convolution(x, y, dist.alpha(), &mut rng)?;
        if sample > x {
            conditioned += 1;
            if sample > z {
                hits += 1;
            }
        }
    }
    if conditioned == 0 {
        return Err(Error::DegenerateState("no draw satisfied X > x".into()));
    }
    let p = hits as f64 / conditioned as f64;
    Ok(LackOfMemoryEstimate {
        empirical: p,
        target: dist.sf(y).to_f64_lossy(),
        standard_error: (p * (1.0 - p) / conditioned as f64).sqrt(),
        conditioned,
    })
}
