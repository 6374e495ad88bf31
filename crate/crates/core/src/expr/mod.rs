//! Exact symbolic coefficient functions.
//!
//! A [`ScalarExpr`] is stored in a canonical form: a finite sum of rational
//! multiples of products of atoms raised to integer powers. Atoms are
//! variables, elementary functions applied to an expression, and reciprocals
//! of multi-term sums. Positive powers of sums are always expanded, so
//! polynomial expressions have a unique representation and compare equal
//! structurally exactly when they are equal as polynomials.

mod diff;
mod display;
mod equal;
mod eval;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Result, WormError};
use crate::num::{rational_pow, rational_sqrt};
use crate::Rational;

pub use equal::{expr_equal, expr_equal_seeded, Certification};
pub use eval::CompiledExpr;
pub(crate) use display::fmt_rational as fmt_rational_pub;

/// The closed set of elementary functions a coefficient may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Atom {
    Var(Arc<str>),
    Apply(Func, ScalarExpr),
    /// A multi-term sum whose first term has coefficient one. Only ever
    /// carries negative exponents.
    Denom(ScalarExpr),
}

/// Product of atoms with non-zero exponents, sorted by atom.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Product(Vec<(Atom, i32)>);

impl Product {
    fn one() -> Self {
        Product(Vec::new())
    }

    fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    fn single(atom: Atom, exp: i32) -> Self {
        Product(vec![(atom, exp)])
    }

    /// Merge two products. May leave `Sqrt` atoms with |exponent| >= 2,
    /// which [`ScalarExpr::from_product`] reduces.
    fn merge(&self, other: &Product) -> Product {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if e != 0 {
                        out.push((a[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Product(out)
    }

    fn needs_reduction(&self) -> bool {
        self.0
            .iter()
            .any(|(atom, e)| matches!(atom, Atom::Apply(Func::Sqrt, _)) && e.abs() >= 2)
    }
}

/// A symbolic smooth function of named variables, kept in canonical form.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScalarExpr {
    terms: Arc<BTreeMap<Product, Rational>>,
}

impl fmt::Debug for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarExpr({self})")
    }
}

impl ScalarExpr {
    fn from_terms(terms: BTreeMap<Product, Rational>) -> Self {
        ScalarExpr {
            terms: Arc::new(terms),
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Product::one(), c);
        }
        Self::from_terms(terms)
    }

    pub fn int(n: i64) -> Self {
        Self::constant(crate::num::rat(n))
    }

    pub fn var(name: &str) -> Self {
        Self::from_product_unreduced(Product::single(Atom::Var(Arc::from(name)), 1), Rational::one())
    }

    fn from_product_unreduced(p: Product, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(p, c);
        }
        Self::from_terms(terms)
    }

    /// `c * p`, reducing powers of square roots.
    fn from_product(p: Product, c: Rational) -> Self {
        if !p.needs_reduction() {
            return Self::from_product_unreduced(p, c);
        }
        let mut kept = Vec::with_capacity(p.0.len());
        let mut extra = Self::constant(c);
        for (atom, e) in p.0 {
            match (&atom, e) {
                (Atom::Apply(Func::Sqrt, inner), e) if e.abs() >= 2 => {
                    let q = e / 2;
                    let r = e - 2 * q;
                    extra = &extra * &inner.pow(q);
                    if r != 0 {
                        kept.push((atom, r));
                    }
                }
                _ => kept.push((atom, e)),
            }
        }
        &Self::from_product_unreduced(Product(kept), Rational::one()) * &extra
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    /// The value, if the expression is a rational constant.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (p, c) = self.terms.iter().next().unwrap();
                p.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// The expression is a polynomial in its variables (no functions, no
    /// negative powers).
    pub fn is_polynomial(&self) -> bool {
        self.terms
            .keys()
            .all(|p| p.0.iter().all(|(a, e)| matches!(a, Atom::Var(_)) && *e > 0))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub(crate) fn terms(&self) -> impl Iterator<Item = (&Product, &Rational)> {
        self.terms.iter()
    }

    /// Apply an elementary function, folding exact constants.
    pub fn apply(func: Func, arg: ScalarExpr) -> ScalarExpr {
        if let Some(c) = arg.as_constant() {
            match func {
                Func::Sin if c.is_zero() => return Self::zero(),
                Func::Cos | Func::Exp if c.is_zero() => return Self::one(),
                Func::Log if c.is_one() => return Self::zero(),
                Func::Sqrt => {
                    if let Some(r) = rational_sqrt(&c) {
                        return Self::constant(r);
                    }
                }
                _ => {}
            }
        }
        Self::from_product_unreduced(Product::single(Atom::Apply(func, arg), 1), Rational::one())
    }

    pub fn sin(self) -> Self {
        Self::apply(Func::Sin, self)
    }

    pub fn cos(self) -> Self {
        Self::apply(Func::Cos, self)
    }

    pub fn exp(self) -> Self {
        Self::apply(Func::Exp, self)
    }

    pub fn ln(self) -> Self {
        Self::apply(Func::Log, self)
    }

    pub fn sqrt(self) -> Self {
        Self::apply(Func::Sqrt, self)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_terms(self.terms.iter().map(|(p, v)| (p.clone(), v * c)).collect())
    }

    /// Multiplicative inverse; fails only for the zero expression.
    pub fn try_recip(&self) -> Result<Self> {
        match self.terms.len() {
            0 => Err(WormError::Domain("division by zero".into())),
            1 => {
                let (p, c) = self.terms.iter().next().unwrap();
                let mut out = Self::constant(c.recip());
                for (atom, e) in &p.0 {
                    out = &out * &atom_pow(atom, -*e);
                }
                Ok(out)
            }
            _ => {
                let lead = self.terms.values().next().unwrap().clone();
                let primitive = self.scale(&lead.recip());
                Ok(Self::from_product_unreduced(
                    Product::single(Atom::Denom(primitive), -1),
                    lead.recip(),
                ))
            }
        }
    }

    pub fn pow(&self, e: i32) -> Self {
        if e < 0 {
            return self
                .try_recip()
                .expect("negative power of zero")
                .pow(-e);
        }
        if let Some(c) = self.as_constant() {
            return Self::constant(rational_pow(&c, e));
        }
        // single term: exponents multiply directly
        if self.terms.len() == 1 {
            let (p, c) = self.terms.iter().next().unwrap();
            if e == 0 {
                return Self::one();
            }
            let prod = Product(p.0.iter().map(|(a, x)| (a.clone(), x * e)).collect());
            return Self::from_product(prod, rational_pow(c, e));
        }
        let mut base = self.clone();
        let mut acc = Self::one();
        let mut n = e as u32;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// All variable names occurring anywhere in the expression.
    pub fn free_vars(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Arc<str>>) {
        for p in self.terms.keys() {
            for (atom, _) in &p.0 {
                match atom {
                    Atom::Var(v) => {
                        out.insert(v.clone());
                    }
                    Atom::Apply(_, e) | Atom::Denom(e) => e.collect_vars(out),
                }
            }
        }
    }

    pub fn depends_on(&self, var: &str) -> bool {
        self.terms.keys().any(|p| p.0.iter().any(|(a, _)| atom_depends_on(a, var)))
    }

    /// Substitute expressions for variables.
    pub fn subs(&self, map: &BTreeMap<String, ScalarExpr>) -> ScalarExpr {
        if map.is_empty() || !map.keys().any(|v| self.depends_on(v)) {
            return self.clone();
        }
        let mut out = ScalarExpr::zero();
        for (p, c) in self.terms.iter() {
            let mut term = ScalarExpr::constant(c.clone());
            for (atom, e) in &p.0 {
                let base = match atom {
                    Atom::Var(v) => match map.get(&**v) {
                        Some(r) => {
                            term = &term * &r.pow(*e);
                            continue;
                        }
                        None => {
                            term = &term * &atom_pow(atom, *e);
                            continue;
                        }
                    },
                    Atom::Apply(f, arg) => ScalarExpr::apply(*f, arg.subs(map)),
                    Atom::Denom(s) => s.subs(map),
                };
                term = &term * &base.pow(*e);
            }
            out += &term;
        }
        out
    }

    /// View as a polynomial in `vars`, with coefficients free of them.
    /// Returns `None` when some `var` occurs non-polynomially.
    pub fn polynomial_in(&self, vars: &[&str]) -> Option<BTreeMap<Vec<u32>, ScalarExpr>> {
        let mut out: BTreeMap<Vec<u32>, ScalarExpr> = BTreeMap::new();
        for (p, c) in self.terms.iter() {
            let mut exps = vec![0u32; vars.len()];
            let mut rest = Vec::new();
            for (atom, e) in &p.0 {
                if let Atom::Var(v) = atom {
                    if let Some(idx) = vars.iter().position(|x| *x == &**v) {
                        if *e < 0 {
                            return None;
                        }
                        exps[idx] = *e as u32;
                        continue;
                    }
                }
                if vars.iter().any(|v| atom_depends_on(atom, v)) {
                    return None;
                }
                rest.push((atom.clone(), *e));
            }
            let coeff = Self::from_product_unreduced(Product(rest), c.clone());
            let slot = out.entry(exps).or_default();
            *slot += &coeff;
        }
        out.retain(|_, v| !v.is_zero());
        Some(out)
    }

    /// Write `self = Σ exp(Qⱼ)·Rⱼ`, pulling every exponential that depends
    /// on one of `vars` into the exponent `Qⱼ`. Terms with equal exponents
    /// are grouped.
    pub fn split_exponentials(&self, vars: &[&str]) -> Vec<(ScalarExpr, ScalarExpr)> {
        let mut groups: BTreeMap<ScalarExpr, ScalarExpr> = BTreeMap::new();
        for (p, c) in self.terms.iter() {
            let mut exponent = ScalarExpr::zero();
            let mut rest = Vec::new();
            for (atom, e) in &p.0 {
                match atom {
                    Atom::Apply(Func::Exp, arg) if vars.iter().any(|v| arg.depends_on(v)) => {
                        exponent += &arg.scale(&Rational::from_integer((*e).into()));
                    }
                    _ => rest.push((atom.clone(), *e)),
                }
            }
            let slot = groups.entry(exponent).or_default();
            *slot += &Self::from_product_unreduced(Product(rest), c.clone());
        }
        groups.into_iter().filter(|(_, r)| !r.is_zero()).collect()
    }

    /// Rebuild the canonical form from scratch. Every constructor already
    /// produces canonical output, so this is the identity on values; it exists
    /// so the idempotence of canonicalisation can be checked.
    pub fn normalize(&self) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        for (p, c) in self.terms.iter() {
            let mut term = ScalarExpr::constant(c.clone());
            for (atom, e) in &p.0 {
                let base = match atom {
                    Atom::Var(v) => ScalarExpr::var(v),
                    Atom::Apply(f, arg) => ScalarExpr::apply(*f, arg.normalize()),
                    Atom::Denom(s) => s.normalize(),
                };
                term = &term * &base.pow(*e);
            }
            out += &term;
        }
        out
    }
}

fn atom_depends_on(atom: &Atom, var: &str) -> bool {
    match atom {
        Atom::Var(v) => &**v == var,
        Atom::Apply(_, e) | Atom::Denom(e) => e.depends_on(var),
    }
}

/// `atom^e` as an expression; positive powers of a `Denom` expand the sum.
fn atom_pow(atom: &Atom, e: i32) -> ScalarExpr {
    match atom {
        Atom::Denom(s) if e > 0 => s.pow(e),
        _ => ScalarExpr::from_product(Product::single(atom.clone(), e), Rational::one()),
    }
}

impl From<i64> for ScalarExpr {
    fn from(n: i64) -> Self {
        ScalarExpr::int(n)
    }
}

impl From<Rational> for ScalarExpr {
    fn from(c: Rational) -> Self {
        ScalarExpr::constant(c)
    }
}

impl AddAssign<&ScalarExpr> for ScalarExpr {
    fn add_assign(&mut self, rhs: &ScalarExpr) {
        if rhs.is_zero() {
            return;
        }
        if self.is_zero() {
            *self = rhs.clone();
            return;
        }
        let terms = Arc::make_mut(&mut self.terms);
        for (p, c) in rhs.terms.iter() {
            add_term(terms, p.clone(), c.clone());
        }
    }
}

fn add_term(terms: &mut BTreeMap<Product, Rational>, p: Product, c: Rational) {
    use std::collections::btree_map::Entry;
    match terms.entry(p) {
        Entry::Vacant(v) => {
            if !c.is_zero() {
                v.insert(c);
            }
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

impl SubAssign<&ScalarExpr> for ScalarExpr {
    fn sub_assign(&mut self, rhs: &ScalarExpr) {
        *self += &(-rhs);
    }
}

impl Add for &ScalarExpr {
    type Output = ScalarExpr;
    fn add(self, rhs: &ScalarExpr) -> ScalarExpr {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &ScalarExpr {
    type Output = ScalarExpr;
    fn sub(self, rhs: &ScalarExpr) -> ScalarExpr {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr::from_terms(self.terms.iter().map(|(p, c)| (p.clone(), -c)).collect())
    }
}

impl Mul for &ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, rhs: &ScalarExpr) -> ScalarExpr {
        if self.is_zero() || rhs.is_zero() {
            return ScalarExpr::zero();
        }
        if let Some(c) = self.as_constant() {
            return rhs.scale(&c);
        }
        if let Some(c) = rhs.as_constant() {
            return self.scale(&c);
        }
        let mut terms = BTreeMap::new();
        let mut reduced = ScalarExpr::zero();
        for (p1, c1) in self.terms.iter() {
            for (p2, c2) in rhs.terms.iter() {
                let p = p1.merge(p2);
                if p.needs_reduction() {
                    reduced += &ScalarExpr::from_product(p, c1 * c2);
                } else {
                    add_term(&mut terms, p, c1 * c2);
                }
            }
        }
        let mut out = ScalarExpr::from_terms(terms);
        out += &reduced;
        out
    }
}

impl MulAssign<&ScalarExpr> for ScalarExpr {
    fn mul_assign(&mut self, rhs: &ScalarExpr) {
        *self = &*self * rhs;
    }
}

impl Div for &ScalarExpr {
    type Output = ScalarExpr;
    /// Panics on an exactly-zero divisor; use [`ScalarExpr::try_recip`] for
    /// untrusted input.
    fn div(self, rhs: &ScalarExpr) -> ScalarExpr {
        self * &rhs.try_recip().expect("division by zero")
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for ScalarExpr {
            type Output = ScalarExpr;
            fn $m(self, rhs: ScalarExpr) -> ScalarExpr {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&ScalarExpr> for ScalarExpr {
            type Output = ScalarExpr;
            fn $m(self, rhs: &ScalarExpr) -> ScalarExpr {
                (&self).$m(rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        -&self
    }
}

impl std::iter::Sum for ScalarExpr {
    fn sum<I: Iterator<Item = ScalarExpr>>(iter: I) -> Self {
        let mut acc = ScalarExpr::zero();
        for x in iter {
            acc += &x;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::ratio;

    fn x() -> ScalarExpr {
        ScalarExpr::var("x")
    }
    fn y() -> ScalarExpr {
        ScalarExpr::var("y")
    }

    #[test]
    fn binomial_expands() {
        let lhs = (&x() + &y()).pow(2);
        let rhs = &(&x().pow(2) + &(&x() * &y()).scale(&crate::num::rat(2))) + &y().pow(2);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn cancellation_to_zero() {
        let e = &(&x() * &y()) - &(&y() * &x());
        assert!(e.is_zero());
    }

    #[test]
    fn reciprocal_of_monomial_and_sum() {
        let e = x().pow(2).scale(&ratio(3, 2));
        let r = e.try_recip().unwrap();
        assert_eq!(&e * &r, ScalarExpr::one());
        let s = &x() + &ScalarExpr::one();
        let rs = s.try_recip().unwrap();
        assert_eq!((&rs * &s).num_terms(), 2); // not a rational-function normal form
        assert_eq!(rs.pow(-1), s);
        assert!(ScalarExpr::zero().try_recip().is_err());
    }

    #[test]
    fn sqrt_squares_back() {
        let s = (&x() + &ScalarExpr::one()).sqrt();
        assert_eq!(&s * &s, &x() + &ScalarExpr::one());
        assert_eq!(ScalarExpr::constant(ratio(9, 4)).sqrt(), ScalarExpr::constant(ratio(3, 2)));
    }

    #[test]
    fn constant_folding() {
        assert!(ScalarExpr::zero().sin().is_zero());
        assert!(ScalarExpr::zero().exp().is_one());
        assert!(ScalarExpr::one().ln().is_zero());
    }

    #[test]
    fn polynomial_view() {
        let e = &(&x().pow(2) * &y().sin()) + &x();
        let p = e.polynomial_in(&["x"]).unwrap();
        assert_eq!(p[&vec![2]], y().sin());
        assert_eq!(p[&vec![1]], ScalarExpr::one());
        assert!(e.polynomial_in(&["y"]).is_none());
    }

    #[test]
    fn substitution() {
        let mut m = BTreeMap::new();
        m.insert("x".to_string(), &y() + &ScalarExpr::one());
        let e = x().pow(2).subs(&m);
        assert_eq!(e, (&y() + &ScalarExpr::one()).pow(2));
    }
}
