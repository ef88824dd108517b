//! Exact law of the renewal counting process `N(t)`: renewal function,
//! second moment, variance, pmf and pgf, the defining series, and residuals
//! of the renewal equation `m = ν + ν ▵ m`.

use std::io::Write;

use serde::Serialize;

use crate::algebra::{char_fn, kendall_convolve_cdf, ConvolutionKernel};
use crate::catalog::StepDistribution;
use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::scalar::{CompensatedSum, Real};
use crate::williamson::{transform_parts, TransformParts};

/// Hard cap on series terms.
pub const MAX_SERIES_TERMS: u64 = 100_000_000;

/// `R`, `E N²` and `Var N` at one level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RenewalEval<T> {
    pub t: T,
    #[serde(rename = "R")]
    pub r: T,
    #[serde(rename = "EN2")]
    pub en2: T,
    #[serde(rename = "VarN")]
    pub var_n: T,
}

fn finite_parts<T: Real>(dist: &StepDistribution<T>, t: T) -> Result<TransformParts<T>> {
    let p = transform_parts(dist, t)?;
    if !(p.g_bar > T::zero()) {
        return Err(Error::Divergence(format!(
            "G(t) = 1 at t = {t}; the renewal function is infinite"
        )));
    }
    Ok(p)
}

fn r_from_parts<T: Real>(p: &TransformParts<T>) -> T {
    p.g / p.g_bar + p.scaled_h / (p.g_bar * p.g_bar)
}

/// `R(t) = G/Ḡ + t^{-α} H / Ḡ²`.
pub fn renewal_r<T: Real>(dist: &StepDistribution<T>, t: T) -> Result<T> {
    Ok(r_from_parts(&finite_parts(dist, t)?))
}

/// `R'(t) = f/Ḡ² + 2α H² / (t^{2α+1} Ḡ³)` away from atoms.
pub fn renewal_r_derivative<T: Real>(dist: &StepDistribution<T>, t: T) -> Result<T> {
    if t <= T::zero() {
        return Ok(T::zero());
    }
    let p = finite_parts(dist, t)?;
    Ok(density_from_parts(dist, t, &p))
}

fn density_from_parts<T: Real>(dist: &StepDistribution<T>, t: T, p: &TransformParts<T>) -> T {
    let a = dist.alpha();
    let gb2 = p.g_bar * p.g_bar;
    // 2α H² t^{-2α-1} = 2α (t^{-α}H)² / t
    dist.pdf(t) / gb2 + T::lit(2.0) * a * p.scaled_h * p.scaled_h / (t * gb2 * p.g_bar)
}

/// `R(t)`, `E N²(t)` and `Var N(t)` from the transform closed forms.
pub fn moments_n<T: Real>(dist: &StepDistribution<T>, t: T) -> Result<RenewalEval<T>> {
    let p = finite_parts(dist, t)?;
    let (g, gb, a) = (p.g, p.g_bar, p.scaled_h);
    let one = T::one();
    let three = T::lit(3.0);
    let gb2 = gb * gb;
    let en2 = (a * (one + three * g) + g * (one - g * g)) / (gb2 * gb);
    let var = a * (one + g) / (gb2 * gb) + g / gb2 - a * a / (gb2 * gb2);
    Ok(RenewalEval {
        t,
        r: r_from_parts(&p),
        en2,
        var_n: var.max(T::zero()),
    })
}

/// The variance with `t^{-α} H` replaced by `F - G`.
pub fn variance_cdf_form<T: Real>(dist: &StepDistribution<T>, t: T) -> Result<T> {
    let p = finite_parts(dist, t)?;
    let (g, gb) = (p.g, p.g_bar);
    let d = p.f - g;
    let gb2 = gb * gb;
    Ok(d * (T::one() + g) / (gb2 * gb) + g / gb2 - d * d / (gb2 * gb2))
}

/// `P{N(t) = n}`: `1 - F(t)` for `n = 0`, otherwise
/// `G^{n-1} [n (F - G) Ḡ + G F̄]`.
pub fn pmf_n<T: Real>(dist: &StepDistribution<T>, t: T, n: u64) -> Result<T> {
    let p = transform_parts(dist, t)?;
    Ok(pmf_from_parts(&p, n))
}

fn pmf_from_parts<T: Real>(p: &TransformParts<T>, n: u64) -> T {
    if n == 0 {
        return p.f_bar;
    }
    let gp = if n == 1 { T::one() } else { p.g.powf(T::count(n - 1)) };
    gp * (T::count(n) * p.scaled_h * p.g_bar + p.g * p.f_bar)
}

/// `P{N(t) = n}` for `n = 0..=n_max`.
pub fn pmf_table<T: Real>(dist: &StepDistribution<T>, t: T, n_max: u64) -> Result<Vec<T>> {
    let p = transform_parts(dist, t)?;
    Ok((0..=n_max).map(|n| pmf_from_parts(&p, n)).collect())
}

/// `Σ_{k>n} k x^{k-1}`.
fn tail_k(x: f64, n: f64, xb: f64) -> f64 {
    x.powf(n) * ((n + 1.0) - n * x) / (xb * xb)
}

/// `Σ_{k>n} k² x^{k-1}`.
fn tail_k2(x: f64, n: f64, xb: f64) -> f64 {
    x.powf(n) * ((n + 1.0) * (n + 1.0) - (2.0 * n * n + 2.0 * n - 1.0) * x + n * n * x * x) / (xb * xb * xb)
}

/// `P{N(t) > n}`, the exact pmf tail.
pub fn pmf_tail<T: Real>(dist: &StepDistribution<T>, t: T, n: u64) -> Result<T> {
    let p = finite_parts(dist, t)?;
    let (g, gb) = (p.g.to_f64_lossy(), p.g_bar.to_f64_lossy());
    let nf = n as f64;
    let tail = p.scaled_h.to_f64_lossy() * gb * tail_k(g, nf, gb) + p.f_bar.to_f64_lossy() * g.powf(nf + 1.0) / gb;
    Ok(T::lit(tail))
}

/// `Σ_{k>n} k P{N(t) = k}`, the exact tail of the mean.
pub fn pmf_mean_tail<T: Real>(dist: &StepDistribution<T>, t: T, n: u64) -> Result<T> {
    let p = finite_parts(dist, t)?;
    let (g, gb) = (p.g.to_f64_lossy(), p.g_bar.to_f64_lossy());
    let nf = n as f64;
    let tail = p.scaled_h.to_f64_lossy() * gb * tail_k2(g, nf, gb) + g * p.f_bar.to_f64_lossy() * tail_k(g, nf, gb);
    Ok(T::lit(tail))
}

/// `E z^{N(t)} = 1 + (z - 1)(F - z G²) / (1 - z G)²`.
pub fn pgf_n<T: Real>(dist: &StepDistribution<T>, t: T, z: T) -> Result<T> {
    let p = transform_parts(dist, t)?;
    let d = T::one() - z * p.g;
    if !(d > T::zero()) {
        return Err(Error::Domain(format!("pgf pole: z G(t) = {} >= 1", z * p.g)));
    }
    Ok(T::one() + (z - T::one()) * (p.f - z * p.g * p.g) / (d * d))
}

/// Taylor coefficients of the pgf at `z = 0`, from
/// `(z - 1)(F - z G²) Σ (k+1) G^k z^k`.
pub fn pgf_coefficients<T: Real>(dist: &StepDistribution<T>, t: T, n_max: usize) -> Result<Vec<T>> {
    let p = transform_parts(dist, t)?;
    let (f, g) = (p.f, p.g);
    let poly = [-f, f + g * g, -(g * g)];
    let mut geo = Vec::with_capacity(n_max + 1);
    let mut gk = T::one();
    for k in 0..=n_max {
        geo.push(T::count(k as u64 + 1) * gk);
        gk = gk * g;
    }
    Ok((0..=n_max)
        .map(|n| {
            let mut c = if n == 0 { T::one() } else { T::zero() };
            for (j, pj) in poly.iter().enumerate() {
                if j <= n {
                    c = c + *pj * geo[n - j];
                }
            }
            c
        })
        .collect())
}

/// A truncated series with a certified bound on the omitted tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesValue<T> {
    pub value: T,
    pub terms: u64,
    pub tail_bound: T,
}

/// `R(t) = Σ_{n≥1} F_n(t)`, truncated once the closed-form tail
/// `Σ_{k>n} G^{k-1}(k t^{-α} H + G)` drops below `tol`.
pub fn series_r<T: Real>(dist: &StepDistribution<T>, t: T, tol: T) -> Result<SeriesValue<T>> {
    let s = series_moments(dist, t, tol)?;
    Ok(s.sum_f)
}

/// Partial sums `Σ F_n` and `Σ n F_n`, each within `tol`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesMoments<T> {
    pub sum_f: SeriesValue<T>,
    pub sum_nf: SeriesValue<T>,
}

impl<T: Real> SeriesMoments<T> {
    /// `E N² = 2 Σ n F_n - Σ F_n`.
    pub fn second_moment(&self) -> T {
        T::lit(2.0) * self.sum_nf.value - self.sum_f.value
    }
}

pub fn series_moments<T: Real>(dist: &StepDistribution<T>, t: T, tol: T) -> Result<SeriesMoments<T>> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidInput(format!("tol must be > 0, got {tol}")));
    }
    let p = finite_parts(dist, t)?;
    let zero = SeriesValue {
        value: T::zero(),
        terms: 0,
        tail_bound: T::zero(),
    };
    if p.scaled_h == T::zero() && p.g == T::zero() {
        return Ok(SeriesMoments {
            sum_f: zero,
            sum_nf: zero,
        });
    }
    let (g, gb, a) = (p.g.to_f64_lossy(), p.g_bar.to_f64_lossy(), p.scaled_h.to_f64_lossy());
    let tolf = tol.to_f64_lossy();
    let mut s1 = CompensatedSum::default();
    let mut s2 = CompensatedSum::default();
    let mut gp = T::one();
    let mut n = 0u64;
    loop {
        n += 1;
        let fn_ = gp * (T::count(n) * p.scaled_h + p.g);
        s1.add(fn_);
        s2.add(T::count(n) * fn_);
        // powf keeps each term within an ulp; repeated products drift.
        gp = p.g.powf(T::count(n));
        let nf = n as f64;
        let tail1 = a * tail_k(g, nf, gb) + g.powf(nf + 1.0) / gb;
        let tail2 = a * tail_k2(g, nf, gb) + g * tail_k(g, nf, gb);
        if tail1 <= tolf && tail2 <= tolf {
            return Ok(SeriesMoments {
                sum_f: SeriesValue {
                    value: s1.value(),
                    terms: n,
                    tail_bound: T::lit(tail1),
                },
                sum_nf: SeriesValue {
                    value: s2.value(),
                    terms: n,
                    tail_bound: T::lit(tail2),
                },
            });
        }
        if n >= MAX_SERIES_TERMS {
            return Err(Error::CapExceeded(format!(
                "series needs more than {MAX_SERIES_TERMS} terms at t = {t}"
            )));
        }
    }
}

/// The renewal measure `m = Σ_{n≥1} ν^{▵n}`, whose distribution function is
/// `R`. Atoms sit at the atoms of `ν` with weight `w / Ḡ²`.
pub struct RenewalMeasure<'a, T: Real> {
    pub dist: &'a StepDistribution<T>,
}

impl<T: Real> Measure<T> for RenewalMeasure<'_, T> {
    fn atoms(&self) -> Vec<(T, T)> {
        self.dist
            .atoms()
            .into_iter()
            .map(|(x, w)| {
                let gb = transform_parts(self.dist, x).map(|p| p.g_bar).unwrap_or(T::nan());
                (x, w / (gb * gb))
            })
            .collect()
    }

    fn density(&self, x: T) -> T {
        if x <= T::zero() {
            return T::zero();
        }
        match transform_parts(self.dist, x) {
            Ok(p) if p.g_bar > T::zero() => density_from_parts(self.dist, x, &p),
            _ => T::nan(),
        }
    }

    fn density_support(&self) -> (T, T) {
        (self.dist.support_infimum(), T::infinity())
    }

    fn breakpoints(&self) -> Vec<T> {
        let mut b = self.dist.breakpoints();
        let (lo, hi) = self.dist.density_support();
        b.extend([lo, hi].into_iter().filter(|x| x.is_finite() && *x > T::zero()));
        b.extend(self.dist.atoms().into_iter().map(|(x, _)| x));
        b
    }
}

/// Renewal-equation residuals at one level `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FredholmPoint<T> {
    pub t: T,
    /// `Φ_m(1/t)` as a Stieltjes integral against `R`.
    pub phi_m: T,
    /// `Φ_ν/(1 - Φ_ν)` at `1/t`, i.e. `G(t)/Ḡ(t)`.
    pub phi_target: T,
    /// `R(t) - F(t)`.
    pub measure_lhs: T,
    /// `(ν ▵ m)([0, t])`.
    pub measure_rhs: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FredholmResidual<T> {
    pub sup_transform: T,
    pub sup_measure: T,
    pub points: Vec<FredholmPoint<T>>,
}

/// Sup residuals of `Φ_m = Φ_ν/(1 - Φ_ν)` (transform argument `s = 1/t`)
/// and of `R(t) - F(t) = (ν ▵ m)[0, t]` over `grid`.
pub fn fredholm_residual<T: Real>(dist: &StepDistribution<T>, grid: &[T]) -> Result<FredholmResidual<T>> {
    let alpha = dist.alpha();
    let kernel = ConvolutionKernel::kendall(alpha)?;
    let m = RenewalMeasure { dist };
    let quad = dist.quadrature();
    let conv = kendall_convolve_cdf(&m, dist, alpha, grid, quad)?;
    let mut out = FredholmResidual {
        sup_transform: T::zero(),
        sup_measure: T::zero(),
        points: Vec::with_capacity(grid.len()),
    };
    for (&t, &rhs) in grid.iter().zip(&conv) {
        let p = finite_parts(dist, t)?;
        let phi_m = char_fn(&m, &kernel, t.recip(), quad)?;
        let point = FredholmPoint {
            t,
            phi_m,
            phi_target: p.g / p.g_bar,
            measure_lhs: r_from_parts(&p) - p.f,
            measure_rhs: rhs,
        };
        out.sup_transform = out.sup_transform.max((point.phi_m - point.phi_target).abs());
        out.sup_measure = out.sup_measure.max((point.measure_lhs - point.measure_rhs).abs());
        out.points.push(point);
    }
    Ok(out)
}

/// Writes `t,R,EN2,VarN` rows.
pub fn write_renewal_csv<T: Real, W: Write>(rows: &[RenewalEval<T>], mut out: W) -> std::io::Result<()> {
    writeln!(out, "t,R,EN2,VarN")?;
    for r in rows {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            r.t.to_f64_lossy(),
            r.r.to_f64_lossy(),
            r.en2.to_f64_lossy(),
            r.var_n.to_f64_lossy()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{catalog_lookup, CATALOG};

    fn law(name: &str, alpha: f64) -> StepDistribution<f64> {
        catalog_lookup::<f64>(name, alpha, None).unwrap()
    }

    fn all_laws(alpha: f64) -> Vec<StepDistribution<f64>> {
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

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn r_examples() {
        assert!(close(renewal_r(&law("dirac1", 1.0), 2.0).unwrap(), 3.0, 1e-15));
        assert!(close(renewal_r(&law("pareto2alpha", 1.0), 2.0).unwrap(), 11.0 / 9.0, 1e-15));
        let e = std::f64::consts::E;
        let want = (2.0 * e - 1.0) / ((e - 1.0) * (e - 1.0));
        assert!(close(renewal_r(&law("kendall_stable", 1.0), 1.0).unwrap(), want, 1e-14));
        assert!(close(want, 1.5026503, 1e-7));
        assert_eq!(renewal_r(&law("dirac1", 1.0), 0.5).unwrap(), 0.0);
    }

    #[test]
    fn moment_examples() {
        let m = moments_n(&law("dirac1", 1.0), 2.0).unwrap();
        assert!(close(m.r, 3.0, 1e-14) && close(m.en2, 13.0, 1e-13) && close(m.var_n, 4.0, 1e-13));
        assert!(close(moments_n(&law("uniform01", 1.0), 0.5).unwrap().r, 7.0 / 9.0, 1e-15));
        assert!(close(moments_n(&law("lackmem", 1.0), 0.5).unwrap().r, 7.0 / 9.0, 1e-15));
    }

    #[test]
    fn closed_forms_agree_with_catalog() {
        for alpha in [0.5, 1.0, 2.0] {
            for d in all_laws(alpha) {
                for i in 0..50 {
                    let t = 0.05 + 5.0 * i as f64 / 49.0;
                    if let Some(want) = d.analytic_r(t) {
                        let got = renewal_r(&d, t).unwrap();
                        assert!(close(got, want, 1e-9 * want.max(1.0)), "{} α={alpha} t={t}: {got} vs {want}", d.name());
                    }
                }
            }
        }
    }

    #[test]
    fn variance_forms_agree() {
        for alpha in [0.5, 1.0, 2.0] {
            for d in all_laws(alpha) {
                for t in [0.3, 1.0, 1.7, 4.0] {
                    let m = moments_n(&d, t).unwrap();
                    assert!(close(m.var_n, m.en2 - m.r * m.r, 1e-9 * m.en2.max(1.0)), "{}", d.name());
                    let v2 = variance_cdf_form(&d, t).unwrap();
                    assert!(close(m.var_n, v2, 1e-9 * m.en2.max(1.0)), "{} t={t}: {} vs {v2}", d.name(), m.var_n);
                }
            }
        }
    }

    #[test]
    fn divergence_when_g_is_one() {
        // A law with G(t) = 1 does not exist in the catalog at finite t, so
        // use the limit: dirac1 at huge α has Ḡ underflowing to 0.
        let d = law("dirac1", 400.0);
        assert!(matches!(renewal_r(&d, 1e3), Err(Error::Divergence(_))));
    }

    #[test]
    fn pmf_examples() {
        let d = law("dirac1", 1.0);
        let pmf = pmf_table(&d, 2.0, 4).unwrap();
        let want = [0.0, 0.25, 0.25, 0.1875, 0.125];
        for (p, w) in pmf.iter().zip(want) {
            assert!(close(*p, w, 1e-15));
        }
        assert!(close(pmf_n(&law("uniform01", 1.0), 0.5, 0).unwrap(), 0.5, 1e-15));
    }

    #[test]
    fn pgf_examples() {
        let d = law("uniform01", 1.0);
        assert!(close(pgf_n(&d, 0.5, 1.0).unwrap(), 1.0, 1e-15));
        assert!(close(pgf_n(&d, 0.5, 0.0).unwrap(), 0.5, 1e-15));
        let h = 1e-6;
        for t in [0.5, 2.0, 7.0] {
            let deriv = (pgf_n(&d, t, 1.0).unwrap() - pgf_n(&d, t, 1.0 - h).unwrap()) / h;
            let r = renewal_r(&d, t).unwrap();
            assert!(close(deriv, r, 1e-6 * r.max(1.0) * (1.0 + r)), "t={t}: {deriv} vs {r}");
        }
        let g = transform_parts(&d, 2.0).unwrap().g;
        assert!(matches!(pgf_n(&d, 2.0, 1.0 / g), Err(Error::Domain(_))));
    }

    #[test]
    fn pgf_coefficients_match_pmf() {
        for alpha in [0.5, 1.0, 2.0] {
            for d in all_laws(alpha) {
                for t in [0.4, 1.0, 2.5, 9.0] {
                    let c = pgf_coefficients(&d, t, 10).unwrap();
                    let p = pmf_table(&d, t, 10).unwrap();
                    for (n, (a, b)) in c.iter().zip(&p).enumerate() {
                        assert!(close(*a, *b, 1e-9), "{} t={t} n={n}: {a} vs {b}", d.name());
                    }
                }
            }
        }
    }

    #[test]
    fn pmf_tail_closes_the_sum() {
        let d = law("pareto2alpha", 1.0);
        for t in [1.5, 4.0] {
            let p = pmf_table(&d, t, 30).unwrap();
            let s: f64 = p.iter().sum::<f64>() + pmf_tail(&d, t, 30).unwrap();
            assert!(close(s, 1.0, 1e-14));
            let mean: f64 = p.iter().enumerate().map(|(n, q)| n as f64 * q).sum::<f64>() + pmf_mean_tail(&d, t, 30).unwrap();
            assert!(close(mean, renewal_r(&d, t).unwrap(), 1e-13));
        }
    }

    #[test]
    fn tail_sums_match_brute_force() {
        let (x, n) = (0.83f64, 12.0);
        let brute1: f64 = (13..5000).map(|k| k as f64 * x.powi(k - 1)).sum();
        let brute2: f64 = (13..5000).map(|k| (k * k) as f64 * x.powi(k - 1)).sum();
        assert!(close(tail_k(x, n, 1.0 - x), brute1, 1e-10 * brute1));
        assert!(close(tail_k2(x, n, 1.0 - x), brute2, 1e-10 * brute2));
    }

    #[test]
    fn series_examples() {
        let s = series_r(&law("dirac1", 1.0), 2.0, 1e-12).unwrap();
        assert!(close(s.value, 3.0, 1e-12));
        let s = series_r(&law("uniform01", 1.0), 1e-3, 1e-12).unwrap();
        assert!(s.value > 0.0);
        let s = series_r(&law("dirac1", 1.0), 0.5, 1e-12).unwrap();
        assert_eq!((s.value, s.terms), (0.0, 0));
        let s = series_r(&law("pareto2alpha", 1.0), 2.0, 1e-12).unwrap();
        assert!(close(s.value, 11.0 / 9.0, 1e-12));
    }

    #[test]
    fn series_second_moment() {
        for d in all_laws(1.0) {
            for t in [0.5, 1.5, 3.0] {
                let s = series_moments(&d, t, 1e-13).unwrap();
                let m = moments_n(&d, t).unwrap();
                assert!(close(s.second_moment(), m.en2, 1e-9 * m.en2.max(1.0)), "{} t={t}", d.name());
            }
        }
    }

    #[test]
    fn fredholm_point_mass() {
        let d = law("dirac1", 1.0);
        let m = RenewalMeasure { dist: &d };
        let k = ConvolutionKernel::kendall(1.0).unwrap();
        let phi = char_fn(&m, &k, 0.5, d.quadrature()).unwrap();
        assert!(close(phi, 1.0, 1e-12));
        let grid: Vec<f64> = (0..19).map(|i| 1.0 / (0.05 + 0.05 * i as f64)).collect::<Vec<_>>().into_iter().rev().collect();
        let res = fredholm_residual(&d, &grid).unwrap();
        assert!(res.sup_transform <= 1e-8, "{}", res.sup_transform);
        assert!(res.sup_measure <= 1e-6, "{}", res.sup_measure);
        let tiny = fredholm_residual(&law("uniform01", 1.0), &[1e-4]).unwrap();
        assert!(tiny.sup_transform < 1e-10 && tiny.sup_measure < 1e-10);
    }

    #[test]
    fn csv_schema() {
        let rows = vec![moments_n(&law("dirac1", 1.0), 2.0).unwrap()];
        let mut buf = Vec::new();
        write_renewal_csv(&rows, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("t,R,EN2,VarN\n2.0000000000000000e0,3.0000000000000000e0,"));
    }
}
