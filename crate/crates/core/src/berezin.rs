//! Integration of pseudodifferential worms: Berezin integration over the
//! odd generators, then integration over coordinates and even generators.

use std::sync::Arc;

use serde::Serialize;

use crate::chart::Chart;
use crate::error::{Result, WormError};
use crate::expr::{CompiledExpr, ScalarExpr};
use crate::num::Real;
use crate::pseudo::PseudoWorm;
use crate::quadrature::{gauss_hermite, integrate_box, Axis, Estimate, QuadratureConfig};
use crate::riemann::{d1d2_gamma, MetricSpec};
use crate::Float;

pub fn berezin(p: &PseudoWorm) -> ScalarExpr {
    p.berezin()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Path {
    /// Gaussian directions in the even generators are integrated exactly.
    #[default]
    Analytic,
    /// Every even variable is a quadrature axis.
    Pure,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegralReport {
    pub value: f64,
    pub est_error: f64,
    pub nodes: usize,
}

impl From<Estimate<f64>> for IntegralReport {
    fn from(e: Estimate<f64>) -> Self {
        IntegralReport { value: e.value, est_error: e.error, nodes: e.nodes }
    }
}

/// `∫ p` over all even variables, coordinates ranging over `R`.
pub fn integrate(p: &PseudoWorm, cfg: &QuadratureConfig) -> Result<Estimate<Float>> {
    integrate_over(p, cfg, Path::Analytic, &[])
}

/// Integrate with a chosen path; `domain` gives one axis per coordinate and
/// defaults to unbounded axes when empty.
pub fn integrate_over<T: Real>(
    p: &PseudoWorm,
    cfg: &QuadratureConfig,
    path: Path,
    domain: &[Axis],
) -> Result<Estimate<T>> {
    let chart = p.chart();
    let n = chart.dim();
    let axes: Vec<Axis> = if domain.is_empty() { vec![Axis::Unbounded; n] } else { domain.to_vec() };
    if axes.len() != n {
        return Err(WormError::Shape(format!("{} domain axes for {n} coordinates", axes.len())));
    }
    let f = p.berezin();
    let vars = PseudoWorm::even_variables(chart);
    match path {
        Path::Pure => {
            let names: Vec<&str> = vars.iter().map(String::as_str).collect();
            let compiled = f.compile::<T>(&names)?;
            let all_axes: Vec<Axis> = axes.iter().copied().chain(std::iter::repeat(Axis::Unbounded).take(vars.len() - n)).collect();
            integrate_box(&|x: &[T]| compiled.eval(x), &all_axes, cfg)
        }
        Path::Analytic => {
            let gauss = GaussianIntegrand::<T>::new(&f, chart, &vars[n..])?;
            integrate_box(&|x: &[T]| gauss.eval(x), &axes, cfg)
        }
    }
}

/// `|∫ d_a α|`.
pub fn stokes_residual(alpha: &PseudoWorm, a: usize, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(integrate(&alpha.d(a)?, cfg)?.value.abs())
}

/// One group `exp(Q(u)) · R(u)` with `Q` quadratic in the even generators.
struct GaussianGroup<T> {
    c: CompiledExpr<T>,
    b: Vec<CompiledExpr<T>>,
    /// `A = -Hess Q`, upper triangle
    a: Vec<Vec<Option<CompiledExpr<T>>>>,
    r: Vec<(Vec<u32>, CompiledExpr<T>)>,
}

/// `x ↦ ∫ f(x, u) du`, evaluated by Gauss–Hermite after whitening, which is
/// exact because the prefactor is polynomial in `u`.
struct GaussianIntegrand<T> {
    m: usize,
    coords: Vec<String>,
    groups: Vec<GaussianGroup<T>>,
    rule: Vec<(T, T)>,
}

impl<T: Real> GaussianIntegrand<T> {
    fn new(f: &ScalarExpr, chart: &Arc<Chart>, even: &[String]) -> Result<Self> {
        let us: Vec<&str> = even.iter().map(String::as_str).collect();
        let xs: Vec<&str> = chart.coords().iter().map(String::as_str).collect();
        let m = us.len();
        let unit = |i: usize, j: Option<usize>| {
            let mut e = vec![0u32; m];
            e[i] += 1;
            if let Some(j) = j {
                e[j] += 1;
            }
            e
        };
        let mut groups = Vec::new();
        let mut max_degree = 0u32;
        for (q, r) in f.split_exponentials(&us) {
            let qpoly = q
                .polynomial_in(&us)
                .ok_or_else(|| WormError::NonPolynomial(format!("exponent {q} in the even generators")))?;
            if qpoly.keys().any(|e| e.iter().sum::<u32>() > 2) {
                return Err(WormError::NonPolynomial(format!("exponent {q} is not quadratic")));
            }
            let rpoly = r
                .polynomial_in(&us)
                .ok_or_else(|| WormError::NonPolynomial(format!("prefactor {r} in the even generators")))?;
            let get = |e: &Vec<u32>| qpoly.get(e).cloned().unwrap_or_default();
            let c = get(&vec![0; m]).compile(&xs)?;
            let b = (0..m).map(|i| get(&unit(i, None)).compile(&xs)).collect::<Result<Vec<_>>>()?;
            let mut a = Vec::with_capacity(m);
            for i in 0..m {
                let mut row = Vec::with_capacity(m);
                for j in 0..m {
                    if j < i {
                        row.push(None);
                        continue;
                    }
                    let coeff = get(&unit(i, Some(j)));
                    // Q ⊃ q_ii u_i² + q_ij u_i u_j  ⇒  A_ii = -2 q_ii, A_ij = -q_ij
                    let entry = if i == j { -coeff.scale(&crate::num::rat(2)) } else { -coeff };
                    row.push(Some(entry.compile(&xs)?));
                }
                a.push(row);
            }
            let mut r_terms = Vec::with_capacity(rpoly.len());
            for (e, coeff) in rpoly {
                max_degree = max_degree.max(e.iter().sum());
                r_terms.push((e, coeff.compile(&xs)?));
            }
            groups.push(GaussianGroup { c, b, a, r: r_terms });
        }
        let n_nodes = (max_degree as usize / 2 + 1).max(2);
        Ok(GaussianIntegrand {
            m,
            coords: chart.coords().to_vec(),
            groups,
            rule: gauss_hermite(n_nodes),
        })
    }

    fn eval(&self, x: &[T]) -> Result<T> {
        let m = self.m;
        let mut total = T::zero();
        for g in &self.groups {
            let mut a = vec![vec![T::zero(); m]; m];
            for i in 0..m {
                for j in i..m {
                    let v = g.a[i][j].as_ref().expect("upper triangle").eval(x)?;
                    a[i][j] = v;
                    a[j][i] = v;
                }
            }
            let l = cholesky(&a).ok_or_else(|| self.not_definite(x))?;
            let b: Vec<T> = g.b.iter().map(|e| e.eval(x)).collect::<Result<_>>()?;
            let mu = solve_upper_t(&l, &solve_lower(&l, &b));
            let bmu = b.iter().zip(&mu).fold(T::zero(), |s, (p, q)| s + *p * *q);
            let det_l = (0..m).fold(T::one(), |d, i| d * l[i][i]);
            let two = T::lit(2.0);
            let pref = (g.c.eval(x)? + bmu / two).exp() * two.powi(m as i32).sqrt() / det_l;
            let coeffs: Vec<T> = g.r.iter().map(|(_, c)| c.eval(x)).collect::<Result<_>>()?;
            let nr = self.rule.len();
            let mut sum = T::zero();
            for flat in 0..nr.pow(m as u32) {
                let mut w = T::one();
                let mut rem = flat;
                let t: Vec<T> = (0..m)
                    .map(|_| {
                        let (x, wi) = self.rule[rem % nr];
                        rem /= nr;
                        w = w * wi;
                        x * two.sqrt()
                    })
                    .collect();
                let shift = solve_upper_t(&l, &t);
                let u: Vec<T> = mu.iter().zip(&shift).map(|(p, q)| *p + *q).collect();
                let mut r = T::zero();
                for ((e, _), c) in g.r.iter().zip(&coeffs) {
                    let mono = e.iter().zip(&u).fold(T::one(), |acc, (&k, &ui)| acc * ui.powi(k as i32));
                    r = r + *c * mono;
                }
                sum = sum + w * r;
            }
            total = total + pref * sum;
        }
        Ok(total)
    }

    fn not_definite(&self, x: &[T]) -> WormError {
        let at: Vec<String> = self
            .coords
            .iter()
            .zip(x)
            .map(|(n, v)| format!("{n}={}", v.to_f64().unwrap_or(f64::NAN)))
            .collect();
        WormError::NotPositiveDefinite(format!("the Gaussian form at {}", at.join(", ")))
    }
}

fn cholesky<T: Real>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let m = a.len();
    let mut l = vec![vec![T::zero(); m]; m];
    for i in 0..m {
        for j in 0..=i {
            let s = (0..j).fold(a[i][j], |s, k| s - l[i][k] * l[j][k]);
            if i == j {
                if !(s > T::zero()) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// `L y = b`
fn solve_lower<T: Real>(l: &[Vec<T>], b: &[T]) -> Vec<T> {
    let mut y = b.to_vec();
    for i in 0..y.len() {
        for k in 0..i {
            y[i] = y[i] - l[i][k] * y[k];
        }
        y[i] = y[i] / l[i][i];
    }
    y
}

/// `Lᵀ y = b`
fn solve_upper_t<T: Real>(l: &[Vec<T>], b: &[T]) -> Vec<T> {
    let mut y = b.to_vec();
    for i in (0..y.len()).rev() {
        for k in i + 1..y.len() {
            y[i] = y[i] - l[k][i] * y[k];
        }
        y[i] = y[i] / l[i][i];
    }
    y
}

/// A metric on a single chart together with the coordinate domain that
/// covers the manifold up to measure zero.
#[derive(Clone, Debug)]
pub struct ChartDomain {
    pub metric: MetricSpec,
    pub axes: Vec<Axis>,
}

impl ChartDomain {
    /// Round sphere of the given radius in stereographic coordinates.
    pub fn round_sphere(radius: i64) -> Result<Self> {
        let chart = Chart::new("S2", &["x", "y"], 2)?;
        let conformal = crate::dsl::parse_expr(&format!("4*{}/(1 + x^2 + y^2)^2", radius * radius))?;
        Ok(ChartDomain {
            metric: MetricSpec::diagonal(&chart, vec![conformal.clone(), conformal])?,
            axes: vec![Axis::Unbounded; 2],
        })
    }

    /// Flat square torus `R²/(2πZ)²` on its fundamental domain.
    pub fn flat_torus() -> Result<Self> {
        let chart = Chart::new("T2", &["x", "y"], 2)?;
        let tau = 2.0 * std::f64::consts::PI;
        Ok(ChartDomain {
            metric: MetricSpec::diagonal(&chart, vec![ScalarExpr::one(), ScalarExpr::one()])?,
            axes: vec![Axis::Interval(0.0, tau); 2],
        })
    }
}

/// The even pseudo-worm `exp(d₁d₂γ)` of a metric.
pub fn metric_exponential(g: &MetricSpec) -> Result<PseudoWorm> {
    let g2 = g.at_level(2)?;
    PseudoWorm::from_worm(&d1d2_gamma(&g2)?).exp()
}

/// `∫ exp(d₁d₂γ)` over the chart domain.
pub fn euler_worm_integral(domain: &ChartDomain, cfg: &QuadratureConfig) -> Result<Estimate<Float>> {
    let beta = metric_exponential(&domain.metric)?;
    integrate_over(&beta, cfg, Path::Analytic, &domain.axes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudo::parse_pseudo;
    use std::f64::consts::PI;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn gaussian_axiom_both_paths() {
        let c = Chart::new("U", &["x"], 2).unwrap();
        let p = parse_pseudo(&c, "exp(-x^2 - d{1,2}x^2)*d{1}x*d{2}x").unwrap();
        let a: Estimate<f64> = integrate_over(&p, &cfg(), Path::Analytic, &[]).unwrap();
        assert!((a.value - PI).abs() < 1e-9, "{}", a.value);
        let b: Estimate<f64> = integrate_over(&p, &cfg(), Path::Pure, &[]).unwrap();
        assert!((b.value - PI).abs() < 1e-6, "{}", b.value);
    }

    #[test]
    fn shifted_gaussian_with_polynomial_prefactor() {
        // ∫∫ u² e^{-x² - (u-x)²} = ∫ (x² + 1/2) √π e^{-x²} = π
        let c = Chart::new("U", &["x"], 2).unwrap();
        let p = parse_pseudo(&c, "d{1,2}x^2*exp(-x^2 - (d{1,2}x - x)^2)*d{1}x*d{2}x").unwrap();
        let a = integrate(&p, &cfg()).unwrap();
        assert!((a.value - PI).abs() < 1e-9, "{}", a.value);
    }

    #[test]
    fn stokes_examples() {
        let c1 = Chart::new("U", &["x"], 1).unwrap();
        let a = parse_pseudo(&c1, "exp(-x^2)").unwrap();
        assert!(stokes_residual(&a, 1, &cfg()).unwrap() < 1e-8);
        let c2 = Chart::new("U", &["x"], 2).unwrap();
        let b = parse_pseudo(&c2, "exp(-x^2 - d{1,2}x^2)*d{2}x").unwrap();
        assert!(stokes_residual(&b, 1, &cfg()).unwrap() < 1e-6);
        assert_eq!(stokes_residual(&PseudoWorm::zero(&c2), 1, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn indefinite_form_is_reported() {
        let c = Chart::new("U", &["x"], 2).unwrap();
        let p = parse_pseudo(&c, "exp(-x^2 + d{1,2}x^2)*d{1}x*d{2}x").unwrap();
        assert!(matches!(integrate(&p, &cfg()), Err(WormError::NotPositiveDefinite(_))));
    }
}
