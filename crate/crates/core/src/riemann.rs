//! Riemannian geometry read off from the level-2 worm `γ = g_ij d₁x^i d₂x^j`.
//!
//! `d₁d₂γ` is quadratic in the even generators `u^i = d₁d₂x^i`. Its linear
//! block carries the Christoffel symbols, and evaluating it at the critical
//! point in `u` leaves a quartic in the odd generators whose coefficients
//! are the Riemann tensor.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::chart::Chart;
use crate::error::{Result, WormError};
use crate::expr::{expr_equal, ScalarExpr};
use crate::lifts::{d, e_op, r_op};
use crate::linalg::Matrix;
use crate::num::rat;
use crate::worm::{Generator, IndexSet, Monomial, Worm};
use crate::Rational;

/// Coefficient of `d₁x^j d₂x^k d₁d₂x^i` in `d₁d₂γ`, divided by `Γ_ijk`.
pub const CHRISTOFFEL_BLOCK: i64 = -2;

/// Coefficient of the canonical monomial `d₁x^i d₁x^j d₂x^k d₂x^l`
/// (`i<j`, `k<l`) in the critical value, divided by `R_ijkl`. Here `R` is
/// normalized so that the round unit sphere has `R_θφθφ = sin²θ`.
pub const RIEMANN_BLOCK: i64 = 2;

/// A symmetric matrix of coefficient functions on a level-2 chart.
#[derive(Clone, Debug)]
pub struct MetricSpec {
    chart: Arc<Chart>,
    g: Vec<Vec<ScalarExpr>>,
}

impl MetricSpec {
    pub fn new(chart: &Arc<Chart>, g: Vec<Vec<ScalarExpr>>) -> Result<Self> {
        let n = chart.dim();
        if g.len() != n || g.iter().any(|r| r.len() != n) {
            return Err(WormError::Shape(format!("metric must be {n}x{n}")));
        }
        for (i, row) in g.iter().enumerate() {
            for j in 0..i {
                if !expr_equal(&row[j], &g[j][i]) {
                    return Err(WormError::Asymmetric(i, j));
                }
            }
            for e in row {
                for v in e.free_vars() {
                    chart.coord_index(&v)?;
                }
            }
        }
        Ok(MetricSpec { chart: chart.clone(), g })
    }

    pub fn diagonal(chart: &Arc<Chart>, diag: Vec<ScalarExpr>) -> Result<Self> {
        let n = diag.len();
        let g = (0..n)
            .map(|i| (0..n).map(|j| if i == j { diag[i].clone() } else { ScalarExpr::zero() }).collect())
            .collect();
        Self::new(chart, g)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn component(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.g[i][j]
    }

    pub fn rows(&self) -> &[Vec<ScalarExpr>] {
        &self.g
    }

    /// The same metric on a chart of the given level.
    pub fn at_level(&self, level: usize) -> Result<MetricSpec> {
        Ok(MetricSpec { chart: self.chart.with_level(level)?, g: self.g.clone() })
    }

    fn require_level2(&self) -> Result<()> {
        if self.chart.level() != 2 {
            return Err(WormError::ChartMismatch(format!(
                "metric worms live at level 2, chart has level {}",
                self.chart.level()
            )));
        }
        Ok(())
    }

    /// Symbolic inverse by cofactors.
    pub fn inverse(&self) -> Result<Vec<Vec<ScalarExpr>>> {
        let det = determinant(&self.g);
        if det.is_zero() {
            return Err(WormError::Singular);
        }
        let inv_det = det.try_recip()?;
        let n = self.dim();
        Ok((0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let minor = minor(&self.g, j, i);
                        let c = &determinant(&minor) * &inv_det;
                        if (i + j) % 2 == 1 {
                            -c
                        } else {
                            c
                        }
                    })
                    .collect()
            })
            .collect())
    }

    /// Numeric positive-definiteness at a point, via Cholesky.
    pub fn check_positive_definite(&self, point: &BTreeMap<String, f64>) -> Result<()> {
        let n = self.dim();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = self.g[i][j].eval(point)?;
            }
        }
        if cholesky(&a).is_none() {
            return Err(WormError::NotPositiveDefinite(format!("{point:?}")));
        }
        Ok(())
    }
}

pub(crate) fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > 0.0) {
                    return None;
                }
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

fn minor(m: &[Vec<ScalarExpr>], r: usize, c: usize) -> Vec<Vec<ScalarExpr>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != r)
        .map(|(_, row)| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, e)| e.clone()).collect())
        .collect()
}

/// Laplace expansion along the first row.
pub fn determinant(m: &[Vec<ScalarExpr>]) -> ScalarExpr {
    match m.len() {
        0 => ScalarExpr::one(),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = ScalarExpr::zero();
            for (j, e) in m[0].iter().enumerate() {
                if e.is_zero() {
                    continue;
                }
                let t = e * &determinant(&minor(m, 0, j));
                if j % 2 == 0 {
                    acc += &t;
                } else {
                    acc -= &t;
                }
            }
            acc
        }
    }
}

/// A dense tensor of coefficient functions with `rank` indices in `0..dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorArray {
    pub rank: usize,
    pub dim: usize,
    data: Vec<ScalarExpr>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TensorEntry {
    pub index: Vec<usize>,
    pub value: String,
}

impl TensorArray {
    pub fn zeros(rank: usize, dim: usize) -> Self {
        TensorArray { rank, dim, data: vec![ScalarExpr::zero(); dim.pow(rank as u32)] }
    }

    fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.rank, "tensor index of wrong rank");
        idx.iter().fold(0, |acc, &i| {
            assert!(i < self.dim, "tensor index out of range");
            acc * self.dim + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> &ScalarExpr {
        &self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: ScalarExpr) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.data.len()).map(move |mut o| {
            let mut idx = vec![0; self.rank];
            for slot in idx.iter_mut().rev() {
                *slot = o % self.dim;
                o /= self.dim;
            }
            idx
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| expr_equal(e, &ScalarExpr::zero()))
    }

    /// Component-wise certified equality.
    pub fn equals(&self, other: &TensorArray) -> bool {
        self.rank == other.rank
            && self.dim == other.dim
            && self.data.iter().zip(&other.data).all(|(a, b)| expr_equal(a, b))
    }

    /// Non-zero components with 0-based indices.
    pub fn entries(&self) -> Vec<TensorEntry> {
        self.indices()
            .filter(|i| !self.get(i).is_zero())
            .map(|i| TensorEntry { value: self.get(&i).to_string(), index: i })
            .collect()
    }
}

fn gen(chart: &Chart, set: &[usize], i: usize) -> Generator {
    debug_assert!(i < chart.dim());
    Generator { set: IndexSet::from_indices(set).expect("valid set"), coord: i }
}

fn mono(chart: &Arc<Chart>, seq: &[(&[usize], usize)]) -> (i32, Monomial) {
    let gens: Vec<Generator> = seq.iter().map(|(s, i)| gen(chart, s, *i)).collect();
    Monomial::from_sequence(&gens).expect("distinct odd generators")
}

/// `γ = g_ij d₁x^i d₂x^j`.
pub fn gamma_of_metric(g: &MetricSpec) -> Result<Worm> {
    g.require_level2()?;
    let c = &g.chart;
    let mut out = Worm::zero(c);
    for i in 0..g.dim() {
        for j in 0..g.dim() {
            let (s, m) = mono(c, &[(&[1], i), (&[2], j)]);
            let coeff = if s < 0 { -g.g[i][j].clone() } else { g.g[i][j].clone() };
            out = &out + &Worm::term(c, m, coeff);
        }
    }
    Ok(out)
}

/// `d₁(d₂ γ)`.
pub fn d1d2_gamma(g: &MetricSpec) -> Result<Worm> {
    d(1, &d(2, &gamma_of_metric(g)?)?)
}

/// Signed coefficient of the product `seq` (in the given order) in `w`.
fn coefficient_of(w: &Worm, seq: &[(&[usize], usize)]) -> ScalarExpr {
    let (s, m) = mono(w.chart(), seq);
    let c = w.coefficient(&m);
    if s < 0 {
        -c
    } else {
        c
    }
}

fn expect_grading(w: &Worm, g: &MetricSpec) -> Result<()> {
    g.require_level2()?;
    w.chart().ensure_same(&g.chart)?;
    match w.multidegree() {
        crate::worm::Multidegree::Homogeneous(v) if v == [2, 2] => Ok(()),
        crate::worm::Multidegree::Zero => Ok(()),
        other => Err(WormError::Grading(format!("expected multidegree (2,2), found {other:?}"))),
    }
}

/// Read `Γ_ijk` from the `d₁d₂x^i d₁x^j d₂x^k` block of `d₁d₂γ`.
pub fn extract_christoffel(w: &Worm, g: &MetricSpec) -> Result<TensorArray> {
    expect_grading(w, g)?;
    let n = g.dim();
    let mut t = TensorArray::zeros(3, n);
    let scale = Rational::new(1.into(), CHRISTOFFEL_BLOCK.into());
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let c = coefficient_of(w, &[(&[1, 2], i), (&[1], j), (&[2], k)]);
                t.set(&[i, j, k], c.scale(&scale));
            }
        }
    }
    Ok(t)
}

/// `Γ^i_jk = g^{il} Γ_ljk`.
pub fn raise_first(lower: &TensorArray, g: &MetricSpec) -> Result<TensorArray> {
    let inv = g.inverse()?;
    let n = g.dim();
    let mut t = TensorArray::zeros(3, n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v: ScalarExpr = (0..n).map(|l| &inv[i][l] * lower.get(&[l, j, k])).sum();
                t.set(&[i, j, k], v);
            }
        }
    }
    Ok(t)
}

/// The substitution `d₁d₂x^i ↦ −Γ^i_jk d₁x^j d₂x^k`, with `Γ` taken from the
/// linear block of `d₁d₂γ` itself.
pub fn critical_point(g: &MetricSpec) -> Result<Vec<Worm>> {
    let w = d1d2_gamma(g)?;
    let upper = raise_first(&extract_christoffel(&w, g)?, g)?;
    let c = &g.chart;
    let n = g.dim();
    Ok((0..n)
        .map(|i| {
            let mut acc = Worm::zero(c);
            for j in 0..n {
                for k in 0..n {
                    let (s, m) = mono(c, &[(&[1], j), (&[2], k)]);
                    let coeff = upper.get(&[i, j, k]);
                    acc = &acc + &Worm::term(c, m, if s < 0 { coeff.clone() } else { -coeff.clone() });
                }
            }
            acc
        })
        .collect())
}

/// Replace every `d₁d₂x^i` in `w` by the critical value `u^i`.
pub fn substitute_u(w: &Worm, u: &[Worm]) -> Result<Worm> {
    let c = w.chart().clone();
    w.substitute(&c, &mut |e| Ok(e.clone()), &mut |g| {
        Ok(if g.set.len() == 2 {
            u[g.coord].clone()
        } else {
            Worm::generator(&c, g)
        })
    })
}

pub fn critical_substitute(w: &Worm, g: &MetricSpec) -> Result<Worm> {
    w.chart().ensure_same(&g.chart)?;
    substitute_u(w, &critical_point(g)?)
}

/// Read `R_ijkl` off the quartic critical value.
pub fn extract_riemann(w: &Worm, g: &MetricSpec) -> Result<TensorArray> {
    expect_grading(w, g)?;
    if w.terms().any(|(m, _)| m.factors().iter().any(|(gen, _)| gen.set.len() == 2)) {
        return Err(WormError::Grading("critical value still contains d{1,2} generators".into()));
    }
    let n = g.dim();
    let mut t = TensorArray::zeros(4, n);
    let scale = Rational::new(1.into(), RIEMANN_BLOCK.into());
    for i in 0..n {
        for j in (i + 1)..n {
            for k in 0..n {
                for l in (k + 1)..n {
                    let r = coefficient_of(w, &[(&[1], i), (&[1], j), (&[2], k), (&[2], l)]).scale(&scale);
                    t.set(&[i, j, k, l], r.clone());
                    t.set(&[j, i, k, l], -r.clone());
                    t.set(&[i, j, l, k], -r.clone());
                    t.set(&[j, i, l, k], r);
                }
            }
        }
    }
    Ok(t)
}

/// Christoffel symbols and curvature of a metric through the worm pipeline.
pub struct WormCurvature {
    pub d1d2_gamma: Worm,
    pub christoffel: TensorArray,
    pub christoffel_upper: TensorArray,
    pub critical_value: Worm,
    pub riemann: TensorArray,
}

pub fn worm_curvature(g: &MetricSpec) -> Result<WormCurvature> {
    let w = d1d2_gamma(g)?;
    let christoffel = extract_christoffel(&w, g)?;
    let christoffel_upper = raise_first(&christoffel, g)?;
    let critical_value = critical_substitute(&w, g)?;
    let riemann = extract_riemann(&critical_value, g)?;
    Ok(WormCurvature { d1d2_gamma: w, christoffel, christoffel_upper, critical_value, riemann })
}

/// `∂/∂(d₁d₂x^i)` of `d₁d₂γ` at the critical point, for every `i`.
pub fn critical_gradient(g: &MetricSpec) -> Result<Vec<Worm>> {
    let w = d1d2_gamma(g)?;
    let u = critical_point(g)?;
    (0..g.dim())
        .map(|i| substitute_u(&w.partial_even(gen(&g.chart, &[1, 2], i))?, &u))
        .collect()
}

/// Textbook formulas, sharing no code with the worm pipeline above.
pub mod classical {
    use super::*;

    fn inverse(g: &[Vec<ScalarExpr>]) -> Vec<Vec<ScalarExpr>> {
        // Gauss–Jordan over the expression field
        let n = g.len();
        let mut a: Vec<Vec<ScalarExpr>> = g
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = row.clone();
                r.extend((0..n).map(|j| if i == j { ScalarExpr::one() } else { ScalarExpr::zero() }));
                r
            })
            .collect();
        for c in 0..n {
            let p = (c..n).find(|&r| !a[r][c].is_zero()).expect("invertible metric");
            a.swap(c, p);
            let inv = a[c][c].try_recip().expect("non-zero pivot");
            for j in 0..2 * n {
                a[c][j] = &a[c][j] * &inv;
            }
            for r in 0..n {
                if r != c && !a[r][c].is_zero() {
                    let f = a[r][c].clone();
                    for j in 0..2 * n {
                        let t = &f * &a[c][j];
                        a[r][j] = &a[r][j] - &t;
                    }
                }
            }
        }
        a.into_iter().map(|r| r[n..].to_vec()).collect()
    }

    /// `Γ_ijk = (∂_k g_ij + ∂_j g_ik − ∂_i g_jk)/2`.
    pub fn christoffel_lower(g: &MetricSpec) -> TensorArray {
        let n = g.dim();
        let x = |i: usize| g.chart.coord(i).to_string();
        let mut t = TensorArray::zeros(3, n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let s = &(&g.g[i][j].diff(&x(k)) + &g.g[i][k].diff(&x(j))) - &g.g[j][k].diff(&x(i));
                    t.set(&[i, j, k], s.scale(&crate::num::ratio(1, 2)));
                }
            }
        }
        t
    }

    pub fn christoffel_upper(g: &MetricSpec) -> TensorArray {
        let n = g.dim();
        let inv = inverse(&g.g);
        let low = christoffel_lower(g);
        let mut t = TensorArray::zeros(3, n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = ScalarExpr::zero();
                    for l in 0..n {
                        acc += &(&inv[i][l] * low.get(&[l, j, k]));
                    }
                    t.set(&[i, j, k], acc);
                }
            }
        }
        t
    }

    /// `R^i_jkl = ∂_k Γ^i_lj − ∂_l Γ^i_kj + Γ^i_km Γ^m_lj − Γ^i_lm Γ^m_kj`,
    /// lowered with `g`.
    pub fn riemann_lower(g: &MetricSpec) -> TensorArray {
        let n = g.dim();
        let x = |i: usize| g.chart.coord(i).to_string();
        let gam = christoffel_upper(g);
        let mut up = TensorArray::zeros(4, n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut acc = &gam.get(&[i, l, j]).diff(&x(k)) - &gam.get(&[i, k, j]).diff(&x(l));
                        for m in 0..n {
                            acc += &(gam.get(&[i, k, m]) * gam.get(&[m, l, j]));
                            acc -= &(gam.get(&[i, l, m]) * gam.get(&[m, k, j]));
                        }
                        up.set(&[i, j, k, l], acc);
                    }
                }
            }
        }
        let mut low = TensorArray::zeros(4, n);
        for idx in low.indices().collect::<Vec<_>>() {
            let v: ScalarExpr = (0..n).map(|m| &g.g[idx[0]][m] * up.get(&[m, idx[1], idx[2], idx[3]])).sum();
            low.set(&idx, v);
        }
        low
    }
}

/// Result of solving for metric-like worms in bidegree (1,1).
#[derive(Clone, Debug)]
pub struct MetricWormBasis {
    pub n: usize,
    pub max_degree: u32,
    /// Number of polynomial coefficients of degree ≤ D.
    pub poly_dim: usize,
    pub basis: Vec<Worm>,
    /// Whether every basis element has vanishing `d₁d₂x` component.
    pub u_component_vanishes: bool,
    /// Whether every basis element has a symmetric coefficient matrix `h_ij`.
    pub symmetric: bool,
}

/// Which conditions to impose in [`characterize_metric_worms`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricConditions {
    /// `R_a γ̃ = 0` and `E_a^b γ̃ = δ_a^b γ̃` for all `a, b`.
    Full,
    /// `R_a γ̃ = 0` and the diagonal `E_a^a γ̃ = γ̃` only.
    Diagonal,
}

fn coord_monomials(n: usize, max_degree: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<u32>| {
                let used: u32 = prefix.iter().sum();
                (0..=max_degree - used).map(move |e| {
                    let mut p = prefix.clone();
                    p.push(e);
                    p
                })
            })
            .collect();
    }
    out
}

/// Solve the eigen-conditions on worms `p(x)·m` with `m` of multidegree (1,1)
/// and `p` a polynomial of degree ≤ `max_degree`.
pub fn characterize_metric_worms(
    chart: &Arc<Chart>,
    max_degree: u32,
    conditions: MetricConditions,
) -> Result<MetricWormBasis> {
    if chart.level() != 2 {
        return Err(WormError::ChartMismatch("metric worms live at level 2".into()));
    }
    let n = chart.dim();
    let coords: Vec<&str> = chart.coords().iter().map(String::as_str).collect();
    let mut candidates: Vec<Worm> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let (s, m) = mono(chart, &[(&[1], i), (&[2], j)]);
            candidates.push(Worm::term(chart, m, ScalarExpr::int(s as i64)));
        }
    }
    for i in 0..n {
        candidates.push(Worm::generator(chart, gen(chart, &[1, 2], i)));
    }
    let polys = coord_monomials(n, max_degree);
    let columns: Vec<Worm> = candidates
        .iter()
        .flat_map(|cand| {
            let coords = &coords;
            polys.iter().map(move |p| {
                let f = p
                    .iter()
                    .zip(coords)
                    .fold(ScalarExpr::one(), |acc, (&e, x)| &acc * &ScalarExpr::var(x).pow(e as i32));
                cand.scale(&f)
            })
        })
        .collect();

    // Each condition is an operator L with L(γ̃) required to vanish.
    let mut conds: Vec<Box<dyn Fn(&Worm) -> Result<Worm>>> = Vec::new();
    for a in 1..=2 {
        let r = r_op(chart, a)?;
        conds.push(Box::new(move |w| r.apply(w)));
    }
    for a in 1..=2 {
        for b in 1..=2 {
            if conditions == MetricConditions::Diagonal && a != b {
                continue;
            }
            let e = e_op(chart, a, b)?;
            let delta = a == b;
            conds.push(Box::new(move |w| {
                let ew = e.apply(w)?;
                Ok(if delta { &ew - w } else { ew })
            }));
        }
    }

    // rows keyed by (condition, output monomial, coordinate exponents)
    let mut rows: BTreeMap<(usize, Monomial, Vec<u32>), Vec<Rational>> = BTreeMap::new();
    for (col, w) in columns.iter().enumerate() {
        for (ci, cond) in conds.iter().enumerate() {
            let img = cond(w)?;
            for (m, coeff) in img.terms() {
                let poly = coeff
                    .polynomial_in(&coords)
                    .ok_or_else(|| WormError::NonPolynomial(coeff.to_string()))?;
                for (exps, c) in poly {
                    let q = c.as_constant().ok_or_else(|| WormError::NonPolynomial(coeff.to_string()))?;
                    rows.entry((ci, m.clone(), exps))
                        .or_insert_with(|| vec![rat(0); columns.len()])[col] += q;
                }
            }
        }
    }
    let matrix = if rows.is_empty() {
        Matrix::zeros(1, columns.len())
    } else {
        Matrix::from_rows(rows.into_values().collect())?
    };
    let basis: Vec<Worm> = matrix
        .nullspace()
        .into_iter()
        .map(|v| {
            v.iter()
                .zip(&columns)
                .filter(|(c, _)| !num_traits::Zero::is_zero(*c))
                .fold(Worm::zero(chart), |acc, (c, w)| &acc + &w.scale_rational(c))
        })
        .collect();
    let u_component_vanishes = basis
        .iter()
        .all(|w| w.terms().all(|(m, _)| m.factors().iter().all(|(g, _)| g.set.len() != 2)));
    let symmetric = basis.iter().all(|w| {
        (0..n).all(|i| {
            (0..n).all(|j| {
                expr_equal(
                    &coefficient_of(w, &[(&[1], i), (&[2], j)]),
                    &coefficient_of(w, &[(&[1], j), (&[2], i)]),
                )
            })
        })
    });
    Ok(MetricWormBasis { n, max_degree, poly_dim: polys.len(), basis, u_component_vanishes, symmetric })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_expr, parse_worm};

    fn sphere() -> MetricSpec {
        let c = Chart::new("S2", &["th", "ph"], 2).unwrap();
        MetricSpec::diagonal(&c, vec![ScalarExpr::one(), parse_expr("sin(th)^2").unwrap()]).unwrap()
    }

    #[test]
    fn flat_d1d2_gamma() {
        let c = Chart::new("R2", &["x", "y"], 2).unwrap();
        let g = MetricSpec::diagonal(&c, vec![ScalarExpr::one(), ScalarExpr::one()]).unwrap();
        assert_eq!(
            gamma_of_metric(&g).unwrap(),
            parse_worm(&c, "d{1}x*d{2}x + d{1}y*d{2}y").unwrap()
        );
        assert_eq!(d1d2_gamma(&g).unwrap(), parse_worm(&c, "-d{1,2}x^2 - d{1,2}y^2").unwrap());
    }

    #[test]
    fn sphere_christoffel_and_curvature() {
        let g = sphere();
        let cv = worm_curvature(&g).unwrap();
        assert!(cv.christoffel.equals(&classical::christoffel_lower(&g)));
        assert!(cv.riemann.equals(&classical::riemann_lower(&g)));
        assert!(expr_equal(cv.riemann.get(&[0, 1, 0, 1]), &parse_expr("sin(th)^2").unwrap()));
    }

    #[test]
    fn asymmetric_metric_rejected() {
        let c = Chart::new("U", &["x", "y"], 2).unwrap();
        let g = vec![
            vec![ScalarExpr::one(), ScalarExpr::var("x")],
            vec![ScalarExpr::zero(), ScalarExpr::one()],
        ];
        assert!(matches!(MetricSpec::new(&c, g), Err(WormError::Asymmetric(1, 0))));
    }

    #[test]
    fn characterization_small_cases() {
        let c1 = Chart::new("U", &["x"], 2).unwrap();
        let b = characterize_metric_worms(&c1, 0, MetricConditions::Full).unwrap();
        assert_eq!(b.basis.len(), 1);
        assert!(b.u_component_vanishes);
        let c2 = Chart::new("U", &["x", "y"], 2).unwrap();
        let full = characterize_metric_worms(&c2, 0, MetricConditions::Full).unwrap();
        let diag = characterize_metric_worms(&c2, 0, MetricConditions::Diagonal).unwrap();
        assert_eq!((full.basis.len(), diag.basis.len()), (3, 4));
        assert!(full.symmetric && !diag.symmetric);
    }
}
