//! Pullbacks of worms along smooth maps via nilpotent Taylor expansion.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::chart::Chart;
use crate::error::{Result, WormError};
use crate::expr::ScalarExpr;
use crate::grassmann::{grassmann_expand, GrassmannPoly};
use crate::linalg::Matrix;
use crate::num::factorial;
use crate::worm::Worm;
use crate::Rational;

/// `f(y₀ + ν) = Σ_{|α| ≤ k} ∂^α f(y₀)/α! · ν^α`, exact because every
/// product of more than `k` nilpotent parts vanishes.
///
/// `vars` names the arguments of `f`; `args[j]` is the Grassmann polynomial
/// substituted for `vars[j]`, whose body must be a scalar.
pub fn taylor_compose(
    f: &ScalarExpr,
    vars: &[&str],
    args: &[GrassmannPoly<Worm>],
    chart: &Arc<Chart>,
) -> Result<GrassmannPoly<Worm>> {
    if vars.len() != args.len() {
        return Err(WormError::Shape(format!("{} variables, {} arguments", vars.len(), args.len())));
    }
    let k = chart.level();
    let mut base = BTreeMap::new();
    let mut souls = Vec::with_capacity(args.len());
    for (v, a) in vars.iter().zip(args) {
        let body = match a.body() {
            None => ScalarExpr::zero(),
            Some(w) => w.as_scalar().ok_or_else(|| {
                WormError::Grading(format!("argument for `{v}` has a non-scalar body"))
            })?,
        };
        base.insert(v.to_string(), body);
        souls.push(a.soul());
    }
    // powers[j][e] = ν_j^e
    let one = GrassmannPoly::monomial(k, crate::worm::IndexSet::EMPTY, Worm::one(chart));
    let powers: Vec<Vec<GrassmannPoly<Worm>>> = souls
        .iter()
        .map(|nu| {
            let mut p = vec![one.clone()];
            for e in 1..=k {
                let next = p[e - 1].times(nu);
                p.push(next);
            }
            p
        })
        .collect();

    let mut out = GrassmannPoly::zero(k);
    let mut alpha = vec![0u32; vars.len()];
    visit(0, k as u32, &mut alpha, f, vars, &mut |alpha, deriv| {
        let mut term = one.clone();
        let mut denom = Rational::from_integer(1.into());
        for (j, &e) in alpha.iter().enumerate() {
            if e > 0 {
                term = term.times(&powers[j][e as usize]);
                denom *= factorial(e);
            }
            if term.is_zero() {
                return;
            }
        }
        let c = deriv.subs(&base).scale(&denom.recip());
        out = out.plus(&term.map_coeffs(|w| w.scale(&c)));
    });
    Ok(out)
}

/// Enumerate multi-indices with `|α| ≤ budget` together with `∂^α f`.
/// Each derivative is computed once from its parent, and subtrees are
/// skipped once a derivative vanishes.
fn visit(
    j: usize,
    budget: u32,
    alpha: &mut Vec<u32>,
    f: &ScalarExpr,
    vars: &[&str],
    emit: &mut dyn FnMut(&[u32], &ScalarExpr),
) {
    if j == vars.len() {
        if !f.is_zero() {
            emit(alpha, f);
        }
        return;
    }
    let mut cur = f.clone();
    for e in 0..=budget {
        if cur.is_zero() {
            break;
        }
        alpha[j] = e;
        visit(j + 1, budget - e, alpha, &cur, vars, emit);
        cur = cur.diff(vars[j]);
    }
    alpha[j] = 0;
}

/// A smooth map between charts of the same level, `y^j = φ^j(x)`.
#[derive(Clone, Debug)]
pub struct SmoothMap {
    source: Arc<Chart>,
    target: Arc<Chart>,
    components: Vec<ScalarExpr>,
}

impl SmoothMap {
    pub fn new(source: &Arc<Chart>, target: &Arc<Chart>, components: Vec<ScalarExpr>) -> Result<Self> {
        if source.level() != target.level() {
            return Err(WormError::ChartMismatch(format!(
                "levels {} and {}",
                source.level(),
                target.level()
            )));
        }
        if components.len() != target.dim() {
            return Err(WormError::Shape(format!(
                "{} components for a {}-dimensional target",
                components.len(),
                target.dim()
            )));
        }
        for c in &components {
            for v in c.free_vars() {
                source.coord_index(&v)?;
            }
        }
        Ok(SmoothMap { source: source.clone(), target: target.clone(), components })
    }

    /// Build from `target = expression` pairs; the target chart takes the
    /// listed names in order.
    pub fn from_pairs(source: &Arc<Chart>, pairs: Vec<(String, ScalarExpr)>) -> Result<Self> {
        let names: Vec<String> = pairs.iter().map(|(n, _)| n.clone()).collect();
        let target = Chart::from_owned("V", names, source.level())?;
        Self::new(source, &target, pairs.into_iter().map(|(_, e)| e).collect())
    }

    pub fn identity(chart: &Arc<Chart>) -> Self {
        let comps = (0..chart.dim()).map(|i| chart.coord_expr(i)).collect();
        SmoothMap { source: chart.clone(), target: chart.clone(), components: comps }
    }

    pub fn source(&self) -> &Arc<Chart> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Chart> {
        &self.target
    }

    pub fn components(&self) -> &[ScalarExpr] {
        &self.components
    }

    fn substitution(&self) -> BTreeMap<String, ScalarExpr> {
        self.target
            .coords()
            .iter()
            .cloned()
            .zip(self.components.iter().cloned())
            .collect()
    }

    /// `next ∘ self`: first `self`, then `next`.
    pub fn then(&self, next: &SmoothMap) -> Result<SmoothMap> {
        self.target.ensure_same(&next.source)?;
        let sub = self.substitution();
        let comps = next.components.iter().map(|c| c.subs(&sub)).collect();
        SmoothMap::new(&self.source, &next.target, comps)
    }

    /// Inverse of an affine map `y = A x + b`.
    pub fn affine_inverse(&self) -> Result<SmoothMap> {
        let n = self.source.dim();
        if self.target.dim() != n {
            return Err(WormError::Shape("affine inverse needs equal dimensions".into()));
        }
        let xs: Vec<&str> = self.source.coords().iter().map(String::as_str).collect();
        let mut a = Matrix::<Rational>::zeros(n, n);
        let mut b = vec![Rational::from_integer(0.into()); n];
        for (j, c) in self.components.iter().enumerate() {
            let poly = c
                .polynomial_in(&xs)
                .ok_or_else(|| WormError::NonPolynomial(c.to_string()))?;
            for (exps, coeff) in poly {
                let q = coeff.as_constant().ok_or_else(|| WormError::NonPolynomial(c.to_string()))?;
                match exps.iter().sum::<u32>() {
                    0 => b[j] = q,
                    1 => a[(j, exps.iter().position(|&e| e == 1).unwrap())] = q,
                    _ => return Err(WormError::NonPolynomial(format!("{c} is not affine"))),
                }
            }
        }
        let inv = a.inverse()?;
        let comps = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (&self.target.coord_expr(j) - &ScalarExpr::constant(b[j].clone()))
                            .scale(&inv[(i, j)])
                    })
                    .sum()
            })
            .collect();
        SmoothMap::new(&self.target, &self.source, comps)
    }

    /// The θ-expansion of every component along the source coordinates.
    pub fn expansions(&self) -> Result<Vec<GrassmannPoly<Worm>>> {
        let xs = grassmann_expand(&self.source);
        let names: Vec<&str> = self.source.coords().iter().map(String::as_str).collect();
        self.components
            .iter()
            .map(|c| taylor_compose(c, &names, &xs, &self.source))
            .collect()
    }
}

/// Pull a worm on the target chart back to the source chart.
pub fn pullback(phi: &SmoothMap, w: &Worm) -> Result<Worm> {
    phi.target.ensure_same(w.chart())?;
    let sub = phi.substitution();
    let expansions = phi.expansions()?;
    w.substitute(
        &phi.source,
        &mut |c| Ok(c.subs(&sub)),
        &mut |g| {
            Ok(expansions[g.coord]
                .coefficient(g.set)
                .cloned()
                .unwrap_or_else(|| Worm::zero(&phi.source)))
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_map, parse_worm};

    #[test]
    fn square_map() {
        let u = Chart::new("U", &["x"], 2).unwrap();
        let phi = SmoothMap::from_pairs(&u, parse_map(&u, "y = x^2").unwrap()).unwrap();
        let v = phi.target().clone();
        let d1y = parse_worm(&v, "d{1}y").unwrap();
        assert_eq!(pullback(&phi, &d1y).unwrap(), parse_worm(&u, "2*x*d{1}x").unwrap());
        let d12y = parse_worm(&v, "d{1,2}y").unwrap();
        assert_eq!(
            pullback(&phi, &d12y).unwrap(),
            parse_worm(&u, "2*x*d{1,2}x + 2*d{1}x*d{2}x").unwrap()
        );
    }

    #[test]
    fn taylor_identity_and_k1() {
        let u = Chart::new("U", &["y"], 1).unwrap();
        let ys = grassmann_expand(&u);
        let f = ScalarExpr::var("y").pow(2);
        let out = taylor_compose(&f, &["y"], &ys, &u).unwrap();
        let t1 = crate::worm::IndexSet::singleton(1);
        assert_eq!(out.coefficient(t1).unwrap(), &parse_worm(&u, "2*y*d{1}y").unwrap());
        let id = taylor_compose(&ScalarExpr::var("y"), &["y"], &ys, &u).unwrap();
        assert_eq!(id, ys[0]);
    }

    #[test]
    fn affine_round_trip() {
        let u = Chart::new("U", &["x", "y"], 2).unwrap();
        let phi = SmoothMap::from_pairs(&u, parse_map(&u, "a = 2*x + y + 1; b = x - y").unwrap()).unwrap();
        let inv = phi.affine_inverse().unwrap();
        let w = parse_worm(&u, "x^2*d{1,2}y + d{1}x*d{2}y").unwrap();
        let back = pullback(&phi, &pullback(&inv, &w).unwrap()).unwrap();
        assert_eq!(back, w);
    }
}
