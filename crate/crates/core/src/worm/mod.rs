//! The graded-commutative algebra of differential worms on a chart.

mod generator;
mod json;
mod monomial;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};

pub use generator::{Generator, IndexSet};
pub use json::{MonoFactorJson, WormJson, WormTermJson};
pub use monomial::Monomial;

use crate::chart::Chart;
use crate::error::{Result, WormError};
use crate::expr::{expr_equal, ScalarExpr};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

impl Parity {
    pub fn from_odd(odd: bool) -> Parity {
        if odd {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    /// 0 or 1 for homogeneous parities.
    pub fn bit(self) -> Option<usize> {
        match self {
            Parity::Even => Some(0),
            Parity::Odd => Some(1),
            Parity::Mixed => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Multidegree {
    /// The zero worm is homogeneous of every multidegree.
    Zero,
    Homogeneous(Vec<usize>),
    Mixed,
}

/// An element of Ω_[k](U): a finite sum of coefficient functions times
/// canonical monomials in the generators `d_S x^i`.
#[derive(Clone, PartialEq, Eq)]
pub struct Worm {
    chart: Arc<Chart>,
    terms: BTreeMap<Monomial, ScalarExpr>,
}

impl fmt::Debug for Worm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Worm({self})")
    }
}

impl Worm {
    pub fn zero(chart: &Arc<Chart>) -> Worm {
        Worm { chart: chart.clone(), terms: BTreeMap::new() }
    }

    pub fn one(chart: &Arc<Chart>) -> Worm {
        Worm::scalar(chart, ScalarExpr::one())
    }

    pub fn scalar(chart: &Arc<Chart>, f: ScalarExpr) -> Worm {
        Worm::term(chart, Monomial::one(), f)
    }

    pub fn constant(chart: &Arc<Chart>, c: Rational) -> Worm {
        Worm::scalar(chart, ScalarExpr::constant(c))
    }

    pub fn term(chart: &Arc<Chart>, mono: Monomial, coeff: ScalarExpr) -> Worm {
        let mut w = Worm::zero(chart);
        if !coeff.is_zero() {
            w.terms.insert(mono, coeff);
        }
        w
    }

    /// The coordinate function `x^i`.
    pub fn coordinate(chart: &Arc<Chart>, i: usize) -> Worm {
        Worm::scalar(chart, chart.coord_expr(i))
    }

    pub fn generator(chart: &Arc<Chart>, g: Generator) -> Worm {
        Worm::term(chart, Monomial::generator(g), ScalarExpr::one())
    }

    /// `d_S x^i` by index list and coordinate name, validated against the chart.
    pub fn gen(chart: &Arc<Chart>, set: &[usize], coord: &str) -> Result<Worm> {
        let g = Generator::new(chart, IndexSet::from_indices(set)?, chart.coord_index(coord)?)?;
        Ok(Worm::generator(chart, g))
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

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, mono: &Monomial) -> ScalarExpr {
        self.terms.get(mono).cloned().unwrap_or_default()
    }

    /// The C^∞(U) component (coefficient of the empty monomial).
    pub fn scalar_part(&self) -> ScalarExpr {
        self.coefficient(&Monomial::one())
    }

    pub fn as_scalar(&self) -> Option<ScalarExpr> {
        self.terms.keys().all(Monomial::is_one).then(|| self.scalar_part())
    }

    pub(crate) fn add_term(&mut self, mono: Monomial, coeff: ScalarExpr) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += &coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn parity(&self) -> Parity {
        let mut it = self.terms.keys().map(Monomial::is_odd);
        match it.next() {
            None => Parity::Even,
            Some(first) => {
                if it.all(|p| p == first) {
                    Parity::from_odd(first)
                } else {
                    Parity::Mixed
                }
            }
        }
    }

    pub fn multidegree(&self) -> Multidegree {
        let k = self.chart.level();
        let mut it = self.terms.keys().map(|m| m.multidegree(k));
        match it.next() {
            None => Multidegree::Zero,
            Some(first) => {
                if it.all(|d| d == first) {
                    Multidegree::Homogeneous(first)
                } else {
                    Multidegree::Mixed
                }
            }
        }
    }

    /// Split into parity-homogeneous parts `(even, odd)`.
    pub fn split_parity(&self) -> (Worm, Worm) {
        let mut even = Worm::zero(&self.chart);
        let mut odd = Worm::zero(&self.chart);
        for (m, c) in &self.terms {
            let dst = if m.is_odd() { &mut odd } else { &mut even };
            dst.terms.insert(m.clone(), c.clone());
        }
        (even, odd)
    }

    /// The parity automorphism: odd terms change sign.
    pub fn parity_twist(&self) -> Worm {
        let mut out = self.clone();
        for (m, c) in out.terms.iter_mut() {
            if m.is_odd() {
                *c = -&*c;
            }
        }
        out
    }

    pub fn scale(&self, f: &ScalarExpr) -> Worm {
        let mut out = Worm::zero(&self.chart);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * f);
        }
        out
    }

    pub fn scale_rational(&self, q: &Rational) -> Worm {
        if q.is_zero() {
            return Worm::zero(&self.chart);
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.scale(q);
        }
        out
    }

    pub fn map_coefficients(&self, f: impl Fn(&ScalarExpr) -> ScalarExpr) -> Worm {
        let mut out = Worm::zero(&self.chart);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    pub fn checked_add(&self, other: &Worm) -> Result<Worm> {
        self.chart.ensure_same(&other.chart)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Worm) -> Result<Worm> {
        self.checked_add(&-other)
    }

    /// Graded-commutative product.
    pub fn checked_mul(&self, other: &Worm) -> Result<Worm> {
        self.chart.ensure_same(&other.chart)?;
        let mut out = Worm::zero(&self.chart);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if let Some((sign, m)) = m1.mul(m2) {
                    let c = c1 * c2;
                    out.add_term(m, if sign < 0 { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Worm {
        let mut acc = Worm::one(&self.chart);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Equality of worms up to certified equality of coefficients.
    pub fn equals(&self, other: &Worm) -> bool {
        if self.chart.ensure_same(&other.chart).is_err() {
            return false;
        }
        let diff = self - other;
        diff.terms.values().all(|c| expr_equal(c, &ScalarExpr::zero()))
    }

    /// Partial derivative with respect to an even generator (as a polynomial
    /// variable).
    pub fn partial_even(&self, g: Generator) -> Result<Worm> {
        if g.is_odd() {
            return Err(WormError::Grading(format!("{} is odd", g.label(&self.chart))));
        }
        let mut out = Worm::zero(&self.chart);
        for (m, c) in &self.terms {
            let e = m.exponent_of(&g);
            if e == 0 {
                continue;
            }
            let factors = m
                .0
                .iter()
                .filter_map(|(h, x)| match (h == &g, *x) {
                    (true, 1) => None,
                    (true, x) => Some((*h, x - 1)),
                    (false, x) => Some((*h, x)),
                })
                .collect();
            out.add_term(Monomial(factors), c.scale(&crate::num::rat(e as i64)));
        }
        Ok(out)
    }

    /// Apply the algebra homomorphism determined by its values on
    /// coefficients and on generators. Values of odd generators must be odd
    /// and of even generators even for the result to be well defined.
    pub fn substitute(
        &self,
        target: &Arc<Chart>,
        coeff: &mut dyn FnMut(&ScalarExpr) -> Result<ScalarExpr>,
        gen: &mut dyn FnMut(Generator) -> Result<Worm>,
    ) -> Result<Worm> {
        let mut cache: BTreeMap<Generator, Worm> = BTreeMap::new();
        let mut out = Worm::zero(target);
        for (m, c) in &self.terms {
            let mut term = Worm::scalar(target, coeff(c)?);
            for (g, e) in m.factors() {
                let image = match cache.get(g) {
                    Some(w) => w.clone(),
                    None => {
                        let w = gen(*g)?;
                        w.chart.ensure_same(target)?;
                        cache.insert(*g, w.clone());
                        w
                    }
                };
                for _ in 0..*e {
                    term = term.checked_mul(&image)?;
                }
                if term.is_zero() {
                    break;
                }
            }
            out = out.checked_add(&term)?;
        }
        Ok(out)
    }
}

impl Neg for &Worm {
    type Output = Worm;
    fn neg(self) -> Worm {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -&*c;
        }
        out
    }
}

impl Neg for Worm {
    type Output = Worm;
    fn neg(self) -> Worm {
        -&self
    }
}

/// Panicking operators for worms known to live on the same chart; use the
/// `checked_*` methods across charts.
impl Add for &Worm {
    type Output = Worm;
    fn add(self, rhs: &Worm) -> Worm {
        self.checked_add(rhs).expect("worms on different charts")
    }
}

impl Sub for &Worm {
    type Output = Worm;
    fn sub(self, rhs: &Worm) -> Worm {
        self.checked_sub(rhs).expect("worms on different charts")
    }
}

impl Mul for &Worm {
    type Output = Worm;
    fn mul(self, rhs: &Worm) -> Worm {
        self.checked_mul(rhs).expect("worms on different charts")
    }
}

pub fn worm_mul(a: &Worm, b: &Worm) -> Result<Worm> {
    a.checked_mul(b)
}

pub fn parity(w: &Worm) -> Parity {
    w.parity()
}

pub fn multidegree(w: &Worm) -> Multidegree {
    w.multidegree()
}

pub(crate) fn fmt_monomial(m: &Monomial, chart: &Chart) -> String {
    let mut s = String::new();
    for (i, (g, e)) in m.factors().iter().enumerate() {
        if i > 0 {
            s.push('*');
        }
        s.push_str(&g.label(chart));
        if *e != 1 {
            s.push_str(&format!("^{e}"));
        }
    }
    s
}

/// Format `coeff * mono_str` as a signed term. Returns (negative, body).
pub(crate) fn fmt_scaled(coeff: &ScalarExpr, mono_str: &str) -> (bool, String) {
    if mono_str.is_empty() {
        let s = coeff.to_string();
        return match s.strip_prefix('-') {
            Some(rest) if !coeff.needs_parens() => (true, rest.to_string()),
            _ => (false, s),
        };
    }
    if coeff.needs_parens() {
        return (false, format!("({coeff})*{mono_str}"));
    }
    let s = coeff.to_string();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest.to_string()),
        None => (false, s),
    };
    if body == "1" {
        (neg, mono_str.to_string())
    } else {
        (neg, format!("{body}*{mono_str}"))
    }
}

pub(crate) fn join_terms(parts: impl Iterator<Item = (bool, String)>) -> String {
    let mut out = String::new();
    for (i, (neg, body)) in parts.enumerate() {
        match (i, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for Worm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = join_terms(
            self.terms
                .iter()
                .map(|(m, c)| fmt_scaled(c, &fmt_monomial(m, &self.chart))),
        );
        f.write_str(&s)
    }
}

/// Unused-import guard for `One` in doc builds.
#[allow(dead_code)]
fn _one() -> Rational {
    Rational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart2() -> Arc<Chart> {
        Chart::new("U", &["x", "y"], 2).unwrap()
    }

    #[test]
    fn odd_anticommutation_and_square() {
        let c = chart2();
        let d1x = Worm::gen(&c, &[1], "x").unwrap();
        let d2x = Worm::gen(&c, &[2], "x").unwrap();
        assert_eq!(&d2x * &d1x, -(&d1x * &d2x));
        assert!((&d1x * &d1x).is_zero());
        assert_eq!((&d1x * &d2x).to_string(), "d{1}x*d{2}x");
    }

    #[test]
    fn even_square_survives() {
        let c = chart2();
        let u = Worm::gen(&c, &[1, 2], "x").unwrap();
        let sq = &u * &u;
        assert!(!sq.is_zero());
        assert_eq!(sq.to_string(), "d{1,2}x^2");
    }

    #[test]
    fn gradings() {
        let c = chart2();
        let d1x = Worm::gen(&c, &[1], "x").unwrap();
        let d2x = Worm::gen(&c, &[2], "x").unwrap();
        let d12x = Worm::gen(&c, &[1, 2], "x").unwrap();
        assert_eq!(d1x.multidegree(), Multidegree::Homogeneous(vec![1, 0]));
        assert_eq!(d12x.multidegree(), Multidegree::Homogeneous(vec![1, 1]));
        let x2 = Worm::scalar(&c, ScalarExpr::var("x").pow(2));
        assert_eq!(x2.multidegree(), Multidegree::Homogeneous(vec![0, 0]));
        assert_eq!((&d1x + &d2x).multidegree(), Multidegree::Mixed);
        assert_eq!(d1x.parity(), Parity::Odd);
        assert_eq!(d12x.parity(), Parity::Even);
        assert_eq!((&d1x * &d2x).parity(), Parity::Even);
        assert_eq!((&d1x + &d12x).parity(), Parity::Mixed);
    }

    #[test]
    fn chart_mismatch_is_an_error() {
        let a = Worm::one(&chart2());
        let b = Worm::one(&Chart::new("V", &["x", "y"], 1).unwrap());
        assert!(matches!(a.checked_mul(&b), Err(WormError::ChartMismatch(_))));
    }

    #[test]
    fn display_signs() {
        let c = chart2();
        let x = ScalarExpr::var("x");
        let w = &Worm::scalar(&c, &x + &ScalarExpr::one())
            - &Worm::gen(&c, &[1], "y").unwrap().scale(&x.scale(&crate::num::rat(2)));
        assert_eq!(w.to_string(), "1 + x - 2*x*d{1}y");
    }
}
