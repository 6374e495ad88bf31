//! Tensor-product quadrature with node doubling until two successive
//! estimates agree.
//!
//! Summation order is fixed: one sequential sum per first-axis node, then a
//! pairwise tree over those partial sums. The result therefore does not
//! depend on how many worker threads evaluate the cells.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WormError};
use crate::num::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    GaussHermite,
    TanhSinhTruncated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub method: Method,
    /// Nodes per axis on the first pass; doubled on every refinement.
    pub nodes: usize,
    /// Unbounded axes are cut off at `±radius`.
    pub radius: f64,
    /// Relative tolerance on successive estimates (absolute below 1).
    pub tolerance: f64,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
    pub max_refinements: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            method: Method::TanhSinhTruncated,
            nodes: 32,
            radius: 1e6,
            tolerance: 1e-9,
            workers: 0,
            max_refinements: 6,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 8 {
            return Err(WormError::Config(format!("nodes must be at least 8, got {}", self.nodes)));
        }
        if !(self.tolerance > 0.0) {
            return Err(WormError::Config(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if !(self.radius > 0.0) {
            return Err(WormError::Config(format!("radius must be positive, got {}", self.radius)));
        }
        Ok(())
    }

    pub(crate) fn run<R: Send>(&self, job: impl FnOnce() -> R + Send) -> Result<R> {
        if self.workers == 0 {
            return Ok(job());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| WormError::Config(e.to_string()))?;
        Ok(pool.install(job))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Axis {
    Unbounded,
    Interval(f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
    /// Nodes per axis in the accepted pass.
    pub nodes: usize,
}

/// Gauss–Hermite nodes and weights for the weight `e^{-x²}`.
pub fn gauss_hermite<T: Real>(n: usize) -> Vec<(T, T)> {
    let two = T::lit(2.0);
    let pim4 = T::PI().powf(T::lit(-0.25));
    let nt = T::from_usize(n).unwrap();
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let eps = T::epsilon() * T::lit(16.0);
    for i in 0..n.div_ceil(2) {
        let mut z = match i {
            0 => (two * nt + T::one()).sqrt() - T::lit(1.85575) * (two * nt + T::one()).powf(T::lit(-0.16667)),
            1 => x[0] - T::lit(1.14) * nt.powf(T::lit(0.426)) / x[0],
            2 => T::lit(1.86) * x[1] - T::lit(0.86) * x[0],
            3 => T::lit(1.91) * x[2] - T::lit(0.91) * x[1],
            _ => two * x[i - 1] - x[i - 2],
        };
        let mut pp = T::one();
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = T::zero();
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jt = T::from_usize(j).unwrap();
                p1 = z * (two / (jt + T::one())).sqrt() * p2 - (jt / (jt + T::one())).sqrt() * p3;
            }
            pp = (two * nt).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= eps * z.abs().max(T::one()) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = two / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    x.into_iter().zip(w).collect()
}

/// Tanh–sinh nodes on `[a, b]`, dropping nodes whose weight underflows.
pub fn tanh_sinh<T: Real>(n: usize, a: T, b: T) -> Vec<(T, T)> {
    let half_pi = T::FRAC_PI_2();
    let tmax = T::lit(3.0);
    let h = T::lit(2.0) * tmax / T::from_usize(n - 1).unwrap();
    let c = (a + b) / T::lit(2.0);
    let r = (b - a) / T::lit(2.0);
    (0..n)
        .filter_map(|j| {
            let t = -tmax + h * T::from_usize(j).unwrap();
            let u = half_pi * t.sinh();
            let w = h * r * half_pi * t.cosh() / (u.cosh() * u.cosh());
            let x = c + r * u.tanh();
            (w > T::zero() && x > a && x < b).then_some((x, w))
        })
        .collect()
}

/// One-dimensional rule for an axis: `∫ f ≈ Σ w f(x)`.
pub fn axis_rule<T: Real>(method: Method, axis: Axis, n: usize, radius: f64) -> Vec<(T, T)> {
    match (axis, method) {
        (Axis::Interval(a, b), _) => tanh_sinh(n, T::lit(a), T::lit(b)),
        (Axis::Unbounded, Method::GaussHermite) => gauss_hermite::<T>(n)
            .into_iter()
            .map(|(x, w)| (x, w * (x * x).exp()))
            .filter(|(_, w)| w.is_finite())
            .collect(),
        (Axis::Unbounded, Method::TanhSinhTruncated) => {
            // x = sinh(s) turns algebraic tails into exponential ones
            let s = T::lit(radius).asinh();
            tanh_sinh(n, -s, s).into_iter().map(|(s, w)| (s.sinh(), w * s.cosh())).collect()
        }
    }
}

/// Sum in a fixed balanced-tree order.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    match xs.len() {
        0 => T::zero(),
        1 => xs[0],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

/// Apply a tensor-product rule; `f` receives the point.
pub fn tensor_sum<T, F>(rules: &[Vec<(T, T)>], f: &F) -> Result<T>
where
    T: Real,
    F: Fn(&[T]) -> Result<T> + Sync,
{
    if rules.is_empty() {
        return f(&[]);
    }
    let rest = &rules[1..];
    let partial: Vec<Result<T>> = rules[0]
        .par_iter()
        .map(|&(x0, w0)| {
            let mut point = vec![x0; rules.len()];
            let mut idx = vec![0usize; rest.len()];
            let mut acc = T::zero();
            if rest.iter().any(Vec::is_empty) {
                return Ok(acc);
            }
            loop {
                let mut w = w0;
                for (d, &i) in idx.iter().enumerate() {
                    let (x, wi) = rest[d][i];
                    point[d + 1] = x;
                    w = w * wi;
                }
                let v = f(&point)?;
                if !v.is_finite() {
                    return Err(WormError::Domain(format!("non-finite integrand at {point:?}")));
                }
                acc = acc + w * v;
                // odometer over the remaining axes
                let mut d = rest.len();
                loop {
                    if d == 0 {
                        return Ok(acc);
                    }
                    d -= 1;
                    idx[d] += 1;
                    if idx[d] < rest[d].len() {
                        break;
                    }
                    idx[d] = 0;
                }
            }
        })
        .collect();
    let partial: Vec<T> = partial.into_iter().collect::<Result<_>>()?;
    Ok(pairwise_sum(&partial))
}

/// Integrate `f` over the product of `axes`, doubling the node count until
/// successive estimates agree to the configured tolerance.
pub fn integrate_box<T, F>(f: &F, axes: &[Axis], cfg: &QuadratureConfig) -> Result<Estimate<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<T> + Sync,
{
    cfg.validate()?;
    cfg.run(|| {
        let estimate = |n: usize| -> Result<T> {
            let rules: Vec<Vec<(T, T)>> =
                axes.iter().map(|&a| axis_rule(cfg.method, a, n, cfg.radius)).collect();
            tensor_sum(&rules, f)
        };
        let mut n = cfg.nodes;
        let mut prev = estimate(n)?;
        if axes.is_empty() {
            return Ok(Estimate { value: prev, error: T::zero(), nodes: 0 });
        }
        let tol = T::lit(cfg.tolerance);
        let mut err = T::infinity();
        for _ in 0..cfg.max_refinements {
            n *= 2;
            let next = estimate(n)?;
            err = (next - prev).abs();
            prev = next;
            if err <= tol * next.abs().max(T::one()) {
                return Ok(Estimate { value: next, error: err, nodes: n });
            }
        }
        Err(WormError::NotConverged {
            estimate: prev.to_f64().unwrap_or(f64::NAN),
            error_bound: err.to_f64().unwrap_or(f64::INFINITY),
        })
    })?
}
