//! Polynomials in the odd parameters θ¹..θᵏ of R^{0|k}.
//!
//! A [`GrassmannPoly`] is stored as `Σ_T θ^{T,rev} c_T` with
//! `θ^{T,rev} = θ^{t_p}⋯θ^{t_1}` for `T = {t_1 < ⋯ < t_p}`; coefficients
//! sit to the right of the θ's. With this ordering the expansion of a
//! coordinate reads `x(θ) = Σ_T θ^{T,rev} d_T x`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::chart::Chart;
use crate::dsl::FieldTermText;
use crate::error::{Result, WormError};
use crate::worm::{Generator, IndexSet, Parity, Worm};
use crate::Rational;

/// Coefficients of a Grassmann polynomial: a super-commutative ring.
pub trait SuperCoeff: Clone + PartialEq + fmt::Debug {
    fn is_zero(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
    /// The parity involution (odd part changes sign).
    fn twist(&self) -> Self;
}

impl SuperCoeff for Rational {
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn twist(&self) -> Self {
        self.clone()
    }
}

impl SuperCoeff for Worm {
    fn is_zero(&self) -> bool {
        Worm::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn twist(&self) -> Self {
        self.parity_twist()
    }
}

/// Sign of `θ^{A,rev} θ^{B,rev} = ± θ^{A∪B,rev}` for disjoint `A`, `B`.
pub fn theta_product_sign(a: IndexSet, b: IndexSet) -> i32 {
    let mut inversions = 0;
    for x in a.elements() {
        inversions += b.count_above(x);
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, PartialEq)]
pub struct GrassmannPoly<C> {
    k: usize,
    terms: BTreeMap<IndexSet, C>,
}

impl<C: SuperCoeff> fmt::Debug for GrassmannPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.terms.iter().map(|(t, c)| (format!("θ^{}rev", t.label()), c)))
            .finish()
    }
}

impl<C: SuperCoeff> GrassmannPoly<C> {
    pub fn zero(k: usize) -> Self {
        GrassmannPoly { k, terms: BTreeMap::new() }
    }

    /// `θ^{T,rev} · c`.
    pub fn monomial(k: usize, t: IndexSet, c: C) -> Self {
        let mut p = Self::zero(k);
        p.add_term(t, c);
        p
    }

    pub fn level(&self) -> usize {
        self.k
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&IndexSet, &C)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, t: IndexSet) -> Option<&C> {
        self.terms.get(&t)
    }

    pub fn add_term(&mut self, t: IndexSet, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&t) {
            Some(v) => {
                *v = v.plus(&c);
                if v.is_zero() {
                    self.terms.remove(&t);
                }
            }
            None => {
                self.terms.insert(t, c);
            }
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (t, c) in &other.terms {
            out.add_term(*t, c.clone());
        }
        out
    }

    pub fn negated(&self) -> Self {
        GrassmannPoly {
            k: self.k,
            terms: self.terms.iter().map(|(t, c)| (*t, c.negated())).collect(),
        }
    }

    pub fn map_coeffs(&self, f: impl Fn(&C) -> C) -> Self {
        let mut out = Self::zero(self.k);
        for (t, c) in &self.terms {
            out.add_term(*t, f(c));
        }
        out
    }

    /// `(θ^A a)(θ^B b) = θ^A θ^B ι^{|B|}(a) b`.
    pub fn times(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.k);
        for (ta, a) in &self.terms {
            for (tb, b) in &other.terms {
                if ta.intersects(*tb) {
                    continue;
                }
                let a = if tb.is_odd() { a.twist() } else { a.clone() };
                let c = a.times(b);
                let c = if theta_product_sign(*ta, *tb) < 0 { c.negated() } else { c };
                out.add_term(ta.union(*tb), c);
            }
        }
        out
    }

    /// Left derivative `∂/∂θ^a`.
    pub fn left_derivative(&self, a: usize) -> Self {
        let mut out = Self::zero(self.k);
        for (t, c) in &self.terms {
            if !t.contains(a) {
                continue;
            }
            let c = if t.count_above(a) % 2 == 1 { c.negated() } else { c.clone() };
            out.add_term(t.without(a), c);
        }
        out
    }

    /// The θ-degree-zero coefficient.
    pub fn body(&self) -> Option<&C> {
        self.terms.get(&IndexSet::EMPTY)
    }

    /// Everything except the θ-degree-zero part.
    pub fn soul(&self) -> Self {
        let mut out = self.clone();
        out.terms.remove(&IndexSet::EMPTY);
        out
    }
}

impl GrassmannPoly<Rational> {
    pub fn constant(k: usize, c: Rational) -> Self {
        Self::monomial(k, IndexSet::EMPTY, c)
    }

    /// The single odd parameter θ^a.
    pub fn theta(k: usize, a: usize) -> Self {
        Self::monomial(k, IndexSet::singleton(a), Rational::one())
    }

    /// Product θ^{a_1}⋯θ^{a_p} in the written order.
    pub fn theta_product(k: usize, seq: &[usize]) -> Self {
        seq.iter()
            .fold(Self::constant(k, Rational::one()), |acc, &a| acc.times(&Self::theta(k, a)))
    }

    pub fn parity(&self) -> Parity {
        let mut it = self.terms.keys().map(|t| t.is_odd());
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

    /// Promote rational coefficients to constant worms on `chart`.
    pub fn to_worm_coeffs(&self, chart: &Arc<Chart>) -> GrassmannPoly<Worm> {
        let mut out = GrassmannPoly::zero(self.k);
        for (t, c) in &self.terms {
            out.add_term(*t, Worm::constant(chart, c.clone()));
        }
        out
    }
}

/// `x^i(θ) = Σ_T θ^{T,rev} d_T x^i` for every coordinate of the chart.
pub fn grassmann_expand(chart: &Arc<Chart>) -> Vec<GrassmannPoly<Worm>> {
    let k = chart.level();
    (0..chart.dim())
        .map(|i| {
            let mut p = GrassmannPoly::monomial(k, IndexSet::EMPTY, Worm::coordinate(chart, i));
            for t in IndexSet::all(k).into_iter().filter(|t| !t.is_empty()) {
                p.add_term(t, Worm::generator(chart, Generator { set: t, coord: i }));
            }
            p
        })
        .collect()
}

/// A vector field `Σ_a F_a(θ) ∂/∂θ^a` on R^{0|k} with rational coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct OddVectorField {
    k: usize,
    components: Vec<GrassmannPoly<Rational>>,
}

impl OddVectorField {
    pub fn zero(k: usize) -> Self {
        OddVectorField { k, components: (0..k).map(|_| GrassmannPoly::zero(k)).collect() }
    }

    pub fn from_components(components: Vec<GrassmannPoly<Rational>>) -> Self {
        let k = components.len();
        OddVectorField { k, components }
    }

    /// `c · θ^{s_1}⋯θ^{s_p} ∂/∂θ^a`, θ's in the written order.
    pub fn term(k: usize, c: Rational, thetas: &[usize], a: usize) -> Result<Self> {
        for &s in thetas.iter().chain(std::iter::once(&a)) {
            if s == 0 || s > k {
                return Err(WormError::IndexOutOfRange { index: s, max: k });
            }
        }
        let mut f = Self::zero(k);
        let coeff = GrassmannPoly::theta_product(k, thetas)
            .map_coeffs(|q| q * &c);
        f.components[a - 1] = coeff;
        Ok(f)
    }

    /// `∂/∂θ^a`.
    pub fn partial(k: usize, a: usize) -> Result<Self> {
        Self::term(k, Rational::one(), &[], a)
    }

    pub fn from_text_terms(k: usize, terms: &[FieldTermText]) -> Result<Self> {
        let mut f = Self::zero(k);
        for t in terms {
            f = f.plus(&Self::term(k, t.coeff.clone(), &t.thetas, t.target)?);
        }
        Ok(f)
    }

    /// Parse the field syntax, e.g. `t1*t2*D1 - t2*D2`.
    pub fn parse(k: usize, src: &str) -> Result<Self> {
        Self::from_text_terms(k, &crate::dsl::parse_field_terms(src)?)
    }

    pub fn level(&self) -> usize {
        self.k
    }

    pub fn component(&self, a: usize) -> &GrassmannPoly<Rational> {
        &self.components[a - 1]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(GrassmannPoly::is_zero)
    }

    pub fn plus(&self, other: &Self) -> Self {
        OddVectorField {
            k: self.k,
            components: self.components.iter().zip(&other.components).map(|(a, b)| a.plus(b)).collect(),
        }
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        OddVectorField {
            k: self.k,
            components: self.components.iter().map(|p| p.map_coeffs(|q| q * c)).collect(),
        }
    }

    /// Parity of the field: `|F_a| + 1` for every non-zero component.
    pub fn parity(&self) -> Parity {
        let mut out: Option<Parity> = None;
        for p in self.components.iter().filter(|p| !p.is_zero()) {
            let par = match p.parity() {
                Parity::Even => Parity::Odd,
                Parity::Odd => Parity::Even,
                Parity::Mixed => return Parity::Mixed,
            };
            match out {
                None => out = Some(par),
                Some(q) if q != par => return Parity::Mixed,
                _ => {}
            }
        }
        out.unwrap_or(Parity::Even)
    }

    /// Apply to a Grassmann polynomial with arbitrary super-commutative
    /// coefficients (left derivatives; coefficients stay on the right).
    pub fn apply<C: SuperCoeff>(&self, p: &GrassmannPoly<C>, lift: impl Fn(&Rational) -> C) -> GrassmannPoly<C> {
        let mut out = GrassmannPoly::zero(self.k);
        for (a, fa) in self.components.iter().enumerate() {
            if fa.is_zero() {
                continue;
            }
            let da = p.left_derivative(a + 1);
            if da.is_zero() {
                continue;
            }
            let fa = fa.map_lift(&lift);
            out = out.plus(&fa.times(&da));
        }
        out
    }

    /// Graded bracket `[u, v] = u∘v − (−1)^{|u||v|} v∘u`, computed in the
    /// Grassmann algebra.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        let pu = self.parity().bit().ok_or(WormError::MixedParity)?;
        let pv = other.parity().bit().ok_or(WormError::MixedParity)?;
        let id = |q: &Rational| q.clone();
        let components = (0..self.k)
            .map(|b| {
                let uv = self.apply(&other.components[b], id);
                let vu = other.apply(&self.components[b], id);
                if pu * pv == 1 {
                    uv.plus(&vu)
                } else {
                    uv.plus(&vu.negated())
                }
            })
            .collect();
        Ok(OddVectorField { k: self.k, components })
    }
}

impl GrassmannPoly<Rational> {
    fn map_lift<C: SuperCoeff>(&self, lift: impl Fn(&Rational) -> C) -> GrassmannPoly<C> {
        let mut out = GrassmannPoly::zero(self.k);
        for (t, c) in &self.terms {
            out.add_term(*t, lift(c));
        }
        out
    }
}

impl fmt::Display for OddVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (a, comp) in self.components.iter().enumerate() {
            for (t, c) in comp.terms() {
                // θ^{T,rev} written out as descending θ's
                let mut body: Vec<String> = t.elements().iter().rev().map(|s| format!("t{s}")).collect();
                body.push(format!("D{}", a + 1));
                let body = body.join("*");
                let neg = c < &Rational::zero();
                let mag = if neg { -c.clone() } else { c.clone() };
                let text = if mag.is_one() {
                    body
                } else {
                    format!("{}*{body}", crate::expr::fmt_rational_pub(&mag))
                };
                parts.push((neg, text));
            }
        }
        f.write_str(&crate::worm::join_terms(parts.into_iter()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    #[test]
    fn theta_anticommute() {
        let t12 = GrassmannPoly::theta_product(2, &[1, 2]);
        let t21 = GrassmannPoly::theta_product(2, &[2, 1]);
        assert_eq!(t12, t21.negated());
        assert_eq!(t21.coefficient(IndexSet::from_indices(&[1, 2]).unwrap()), Some(&rat(1)));
        assert!(GrassmannPoly::theta_product(2, &[1, 1]).is_zero());
    }

    #[test]
    fn expansion_matches_k2_display() {
        let c = Chart::new("U", &["x"], 2).unwrap();
        let xs = grassmann_expand(&c);
        assert_eq!(xs[0].terms().count(), 4);
        let t = IndexSet::from_indices(&[1, 2]).unwrap();
        assert_eq!(xs[0].coefficient(t).unwrap().to_string(), "d{1,2}x");
        let c0 = Chart::new("U", &["x"], 0).unwrap();
        assert_eq!(grassmann_expand(&c0)[0].terms().count(), 1);
    }

    #[test]
    fn left_derivative_sign() {
        // ∂₁(θ²θ¹) = −θ²
        let p = GrassmannPoly::theta_product(2, &[2, 1]);
        assert_eq!(p.left_derivative(1), GrassmannPoly::theta(2, 2).negated());
        assert_eq!(p.left_derivative(2), GrassmannPoly::theta(2, 1));
    }

    #[test]
    fn bracket_from_homotopy_identity() {
        let d1 = OddVectorField::parse(2, "D1").unwrap();
        let r = OddVectorField::parse(2, "t1*t2*D2").unwrap();
        let e = OddVectorField::parse(2, "t2*D2").unwrap();
        assert_eq!(d1.bracket(&r).unwrap(), e);
        assert_eq!(r.parity(), Parity::Odd);
        assert_eq!(e.parity(), Parity::Even);
    }

    #[test]
    fn display_round_trip() {
        let f = OddVectorField::parse(2, "t1*t2*D1 - 3*t2*D2 + D1").unwrap();
        assert_eq!(OddVectorField::parse(2, &f.to_string()).unwrap(), f);
    }
}
