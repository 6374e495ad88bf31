//! Pseudodifferential worms: polynomial in the odd generators, arbitrary
//! (numerically evaluable) functions of the coordinates and of the even
//! generators.
//!
//! Even generators appear inside coefficients as variables named by their
//! label, e.g. `d{1,2}x`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::chart::Chart;
use crate::dsl::{at_pos, parse_generic, DslValue};
use crate::error::{Result, WormError};
use crate::expr::{Func, ScalarExpr};
use crate::num::factorial;
use crate::worm::{fmt_monomial, fmt_scaled, join_terms, Generator, IndexSet, Monomial, Worm};
use crate::Rational;

#[derive(Clone, PartialEq)]
pub struct PseudoWorm {
    chart: Arc<Chart>,
    terms: BTreeMap<Monomial, ScalarExpr>,
}

impl fmt::Debug for PseudoWorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PseudoWorm({self})")
    }
}

impl fmt::Display for PseudoWorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join_terms(
            self.terms.iter().map(|(m, c)| fmt_scaled(c, &fmt_monomial(m, &self.chart))),
        ))
    }
}

/// Variable name standing for an even generator inside coefficients.
pub fn even_var(chart: &Chart, g: Generator) -> String {
    g.label(chart)
}

/// All even generators of a chart with their variable names.
pub fn even_generators(chart: &Chart) -> Vec<(Generator, String)> {
    Generator::all(chart)
        .into_iter()
        .filter(|g| !g.is_odd())
        .map(|g| (g, even_var(chart, g)))
        .collect()
}

impl PseudoWorm {
    pub fn zero(chart: &Arc<Chart>) -> Self {
        PseudoWorm { chart: chart.clone(), terms: BTreeMap::new() }
    }

    pub fn scalar(chart: &Arc<Chart>, f: ScalarExpr) -> Self {
        let mut p = Self::zero(chart);
        p.add_term(Monomial::one(), f);
        p
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &ScalarExpr)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> ScalarExpr {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    fn add_term(&mut self, m: Monomial, c: ScalarExpr) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m.clone()).or_default();
        *e += &c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    /// A single generator: odd ones stay symbolic, even ones become variables.
    pub fn generator(chart: &Arc<Chart>, g: Generator) -> Self {
        if g.is_odd() {
            let mut p = Self::zero(chart);
            p.add_term(Monomial::generator(g), ScalarExpr::one());
            p
        } else {
            Self::scalar(chart, ScalarExpr::var(&even_var(chart, g)))
        }
    }

    pub fn from_worm(w: &Worm) -> Self {
        let chart = w.chart();
        let mut out = Self::zero(chart);
        for (m, c) in w.terms() {
            let mut odd = Vec::new();
            let mut coeff = c.clone();
            for (g, e) in m.factors() {
                if g.is_odd() {
                    odd.push((*g, *e));
                } else {
                    coeff = &coeff * &ScalarExpr::var(&even_var(chart, *g)).pow(*e as i32);
                }
            }
            // the odd factors of a canonical monomial are already canonical
            out.add_term(Monomial(odd), coeff);
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.chart.ensure_same(&other.chart)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.plus(&other.negated())
    }

    pub fn negated(&self) -> Self {
        PseudoWorm {
            chart: self.chart.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn times(&self, other: &Self) -> Result<Self> {
        self.chart.ensure_same(&other.chart)?;
        let mut out = Self::zero(&self.chart);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if let Some((s, m)) = m1.mul(m2) {
                    let c = c1 * c2;
                    out.add_term(m, if s < 0 { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, f: &ScalarExpr) -> Self {
        let mut out = Self::zero(&self.chart);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * f);
        }
        out
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| !m.is_odd())
    }

    /// The coefficient of the empty monomial, i.e. the part without odd
    /// generators.
    pub fn body(&self) -> ScalarExpr {
        self.coefficient(&Monomial::one())
    }

    /// Apply a function of one variable, given as an expression in `z`, by
    /// Taylor expansion around the body: `F(p₀ + N) = Σ F^{(j)}(p₀) N^j / j!`.
    /// The sum is finite because `N` is nilpotent.
    pub fn compose(&self, f_of_z: &ScalarExpr, z: &str) -> Result<Self> {
        if !self.is_even() {
            return Err(WormError::Grading("functions apply only to even pseudo-worms".into()));
        }
        let body = self.body();
        let mut nil = self.clone();
        nil.terms.remove(&Monomial::one());
        let sub = BTreeMap::from([(z.to_string(), body)]);
        let mut out = Self::zero(&self.chart);
        let mut power = Self::scalar(&self.chart, ScalarExpr::one());
        let mut deriv = f_of_z.clone();
        let mut j = 0u32;
        while !power.is_zero() {
            let c = deriv.subs(&sub).scale(&factorial(j).recip());
            out = out.plus(&power.scale(&c))?;
            power = power.times(&nil)?;
            deriv = deriv.diff(z);
            j += 1;
        }
        Ok(out)
    }

    pub fn apply(&self, func: Func) -> Result<Self> {
        self.compose(&ScalarExpr::apply(func, ScalarExpr::var(COMPOSE_VAR)), COMPOSE_VAR)
    }

    pub fn exp(&self) -> Result<Self> {
        self.apply(Func::Exp)
    }

    pub fn powi(&self, e: i32) -> Result<Self> {
        if e >= 0 {
            let mut acc = Self::scalar(&self.chart, ScalarExpr::one());
            for _ in 0..e {
                acc = acc.times(self)?;
            }
            return Ok(acc);
        }
        if self.body().is_zero() {
            return Err(WormError::Domain("negative power of a nilpotent pseudo-worm".into()));
        }
        self.compose(&ScalarExpr::var(COMPOSE_VAR).pow(e), COMPOSE_VAR)
    }

    /// `d_a`, acting on coefficients through coordinates and even generators.
    pub fn d(&self, a: usize) -> Result<Self> {
        let chart = self.chart.clone();
        chart.check_index(a)?;
        let image = |g: Generator| -> Self {
            match g.set.insert(a) {
                None => Self::zero(&chart),
                Some((s, set)) => {
                    let p = Self::generator(&chart, Generator { set, coord: g.coord });
                    if s < 0 {
                        p.negated()
                    } else {
                        p
                    }
                }
            }
        };
        let coord_images: Vec<(String, Self)> = (0..chart.dim())
            .map(|i| {
                let g = Generator { set: IndexSet::singleton(a), coord: i };
                (chart.coord(i).to_string(), Self::generator(&chart, g))
            })
            .chain(even_generators(&chart).into_iter().map(|(g, name)| (name, image(g))))
            .collect();
        let mut out = Self::zero(&chart);
        for (m, c) in &self.terms {
            let mono = {
                let mut p = Self::zero(&chart);
                p.add_term(m.clone(), ScalarExpr::one());
                p
            };
            // d(c) m
            for (name, img) in &coord_images {
                if img.is_zero() || !c.depends_on(name) {
                    continue;
                }
                out = out.plus(&img.scale(&c.diff(name)).times(&mono)?)?;
            }
            // c d(m), odd derivation over the odd factors
            let factors = m.factors();
            for (j, (g, _)) in factors.iter().enumerate() {
                let dg = image(*g);
                if dg.is_zero() {
                    continue;
                }
                let prefix = PseudoWorm { chart: chart.clone(), terms: BTreeMap::from([(Monomial(factors[..j].to_vec()), ScalarExpr::one())]) };
                let suffix = PseudoWorm { chart: chart.clone(), terms: BTreeMap::from([(Monomial(factors[j + 1..].to_vec()), ScalarExpr::one())]) };
                let mut t = prefix.times(&dg)?.times(&suffix)?.scale(c);
                if j % 2 == 1 {
                    t = t.negated();
                }
                out = out.plus(&t)?;
            }
        }
        Ok(out)
    }

    /// The top odd monomial `∏_i (product of the odd generators of x^i)`,
    /// with each coordinate block in canonical order. Blocks have even length
    /// for k ≥ 2, so the orientation does not depend on the coordinate order.
    pub fn top_monomial(chart: &Chart) -> (i32, Monomial) {
        let mut seq = Vec::new();
        for i in 0..chart.dim() {
            for set in IndexSet::all(chart.level()) {
                if set.is_odd() {
                    seq.push(Generator { set, coord: i });
                }
            }
        }
        Monomial::from_sequence(&seq).expect("distinct generators")
    }

    /// Berezin integral over the odd generators: the coefficient of the top
    /// odd monomial.
    pub fn berezin(&self) -> ScalarExpr {
        let (s, m) = Self::top_monomial(&self.chart);
        let c = self.coefficient(&m);
        if s < 0 {
            -c
        } else {
            c
        }
    }

    /// Names of the even variables an integral runs over: coordinates, then
    /// even generators in canonical order.
    pub fn even_variables(chart: &Chart) -> Vec<String> {
        chart
            .coords()
            .iter()
            .cloned()
            .chain(even_generators(chart).into_iter().map(|(_, n)| n))
            .collect()
    }
}

const COMPOSE_VAR: &str = "_z";

#[derive(Clone)]
struct ChartPseudo(PseudoWorm);

impl DslValue for ChartPseudo {
    type Ctx = Arc<Chart>;
    fn number(chart: &Arc<Chart>, q: Rational) -> Self {
        ChartPseudo(PseudoWorm::scalar(chart, ScalarExpr::constant(q)))
    }
    fn ident(chart: &Arc<Chart>, name: &str, pos: usize) -> Result<Self> {
        let i = chart.coord_index(name).map_err(at_pos(pos))?;
        Ok(ChartPseudo(PseudoWorm::scalar(chart, chart.coord_expr(i))))
    }
    fn generator(chart: &Arc<Chart>, set: &[usize], coord: &str, pos: usize) -> Result<Self> {
        let s = IndexSet::from_indices(set).map_err(at_pos(pos))?;
        let i = chart.coord_index(coord).map_err(at_pos(pos))?;
        let g = Generator::new(chart, s, i).map_err(at_pos(pos))?;
        Ok(ChartPseudo(PseudoWorm::generator(chart, g)))
    }
    fn apply(_: &Arc<Chart>, f: Func, arg: Self, pos: usize) -> Result<Self> {
        arg.0
            .apply(f)
            .map(ChartPseudo)
            .map_err(|e| WormError::Parse { pos, msg: e.to_string() })
    }
    fn add(self, rhs: Self) -> Result<Self> {
        Ok(ChartPseudo(self.0.plus(&rhs.0)?))
    }
    fn sub(self, rhs: Self) -> Result<Self> {
        Ok(ChartPseudo(self.0.minus(&rhs.0)?))
    }
    fn mul(self, rhs: Self) -> Result<Self> {
        Ok(ChartPseudo(self.0.times(&rhs.0)?))
    }
    fn div(self, rhs: Self, pos: usize) -> Result<Self> {
        let inv = rhs.0.powi(-1).map_err(|e| WormError::Parse { pos, msg: e.to_string() })?;
        Ok(ChartPseudo(self.0.times(&inv)?))
    }
    fn negate(self) -> Self {
        ChartPseudo(self.0.negated())
    }
    fn raise(self, _: &Arc<Chart>, e: i32, pos: usize) -> Result<Self> {
        self.0
            .powi(e)
            .map(ChartPseudo)
            .map_err(|err| WormError::Parse { pos, msg: err.to_string() })
    }
}

/// Parse a pseudodifferential worm, e.g. `exp(-x^2 - d{1,2}x^2)*d{1}x*d{2}x`.
pub fn parse_pseudo(chart: &Arc<Chart>, src: &str) -> Result<PseudoWorm> {
    parse_generic::<ChartPseudo>(chart, src).map(|p| p.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_expr;
    use crate::expr::expr_equal;

    #[test]
    fn gaussian_berezin() {
        let c = Chart::new("U", &["x"], 2).unwrap();
        let p = parse_pseudo(&c, "exp(-x^2 - d{1,2}x^2)*d{1}x*d{2}x").unwrap();
        assert!(expr_equal(&p.berezin(), &parse_expr("exp(-x^2 - d{1,2}x^2)").unwrap()));
        let lower = parse_pseudo(&c, "exp(-x^2)*d{1}x").unwrap();
        assert!(lower.berezin().is_zero());
    }

    #[test]
    fn nilpotent_exp_truncates() {
        let c = Chart::new("U", &["x"], 2).unwrap();
        let p = parse_pseudo(&c, "exp(d{1}x*d{2}x)").unwrap();
        assert_eq!(p.to_string(), "1 + d{1}x*d{2}x");
    }

    #[test]
    fn d_matches_worm_d_on_polynomials() {
        let c = Chart::new("U", &["x", "y"], 2).unwrap();
        let w = crate::dsl::parse_worm(&c, "x*y*d{1}x + d{1,2}y^2*d{2}x - y").unwrap();
        for a in 1..=2 {
            let lhs = PseudoWorm::from_worm(&w).d(a).unwrap();
            let rhs = PseudoWorm::from_worm(&crate::lifts::d(a, &w).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn d_squared_vanishes_on_transcendental() {
        let c = Chart::new("U", &["x"], 2).unwrap();
        let p = parse_pseudo(&c, "exp(-x^2 - d{1,2}x^2)*d{2}x + sin(x)").unwrap();
        for a in 1..=2 {
            assert!(p.d(a).unwrap().d(a).unwrap().terms().all(|(_, c)| expr_equal(c, &ScalarExpr::zero())));
        }
        let anti = p.d(1).unwrap().d(2).unwrap().plus(&p.d(2).unwrap().d(1).unwrap()).unwrap();
        assert!(anti.terms().all(|(_, c)| expr_equal(c, &ScalarExpr::zero())));
    }
}
