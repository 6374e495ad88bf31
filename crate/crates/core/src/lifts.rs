//! Operators on worms: the differentials `d_a`, lifts `u^♭` of vector fields
//! on R^{0|k}, Cartan lifts `f·v^#` of vector fields on the chart, and the
//! named level-2 operators `E_a^b`, `R_a`.

use std::sync::Arc;

use num_traits::One;

use crate::chart::Chart;
use crate::derivation::Derivation;
use crate::error::{Result, WormError};
use crate::expr::ScalarExpr;
use crate::grassmann::{grassmann_expand, GrassmannPoly, OddVectorField};
use crate::pullback::taylor_compose;
use crate::worm::{Generator, IndexSet, Parity, Worm};
use crate::Rational;

/// Sign relating `flat_lift` to the lift used in the Cartan commutation
/// relations: `u^♭ = LIFT_SIGN · flat_lift(u)`, so `(∂/∂θ^a)^♭ = −d_a`.
/// With this sign `u ↦ u^♭` preserves brackets.
pub const LIFT_SIGN: i32 = -1;

/// The Levi-Civita symbol on {1, 2} with `ε₁₂ = +1`.
pub fn epsilon(a: usize, b: usize) -> i32 {
    match (a, b) {
        (1, 2) => 1,
        (2, 1) => -1,
        _ => 0,
    }
}

fn sign_worm(w: Worm, negative: bool) -> Worm {
    if negative {
        -w
    } else {
        w
    }
}

/// The odd derivation `d_a`.
pub fn differential(chart: &Arc<Chart>, a: usize) -> Result<Derivation> {
    chart.check_index(a)?;
    let on_coords = (0..chart.dim())
        .map(|i| Worm::generator(chart, Generator { set: IndexSet::singleton(a), coord: i }))
        .collect();
    let c = chart.clone();
    Derivation::new(chart, 1, on_coords, move |g| {
        Ok(match g.set.insert(a) {
            None => Worm::zero(&c),
            Some((sign, set)) => sign_worm(Worm::generator(&c, Generator { set, coord: g.coord }), sign < 0),
        })
    })
}

/// `d_a w`.
pub fn d(a: usize, w: &Worm) -> Result<Worm> {
    differential(w.chart(), a)?.apply(w)
}

fn check_level(chart: &Chart, k: usize) -> Result<()> {
    if chart.level() != k {
        return Err(WormError::ChartMismatch(format!(
            "field on R^{{0|{k}}} applied at level {}",
            chart.level()
        )));
    }
    Ok(())
}

/// Derivation from θ-expansions: `images[i]` is the Grassmann polynomial
/// whose `θ^{T,rev}` coefficient, times `(−1)^{p|T|}`, is the image of
/// `d_T x^i` (and whose body is the image of `x^i`).
fn from_expansions(chart: &Arc<Chart>, parity: usize, images: Vec<GrassmannPoly<Worm>>) -> Result<Derivation> {
    let on_coords = images
        .iter()
        .map(|p| p.body().cloned().unwrap_or_else(|| Worm::zero(chart)))
        .collect();
    let c = chart.clone();
    Derivation::new(chart, parity, on_coords, move |g| {
        let w = images[g.coord].coefficient(g.set).cloned().unwrap_or_else(|| Worm::zero(&c));
        Ok(sign_worm(w, parity == 1 && g.set.is_odd()))
    })
}

/// The derivation `flat_lift(u)` induced by the vector field `u` on R^{0|k}:
/// let `u` act on each `x^i(θ)` and read off the `θ^{T,rev}` coefficients.
pub fn flat_lift_derivation(u: &OddVectorField, chart: &Arc<Chart>) -> Result<Derivation> {
    check_level(chart, u.level())?;
    let p = u.parity().bit().ok_or(WormError::MixedParity)?;
    let c = chart.clone();
    let images = grassmann_expand(chart)
        .iter()
        .map(|x| u.apply(x, |q| Worm::constant(&c, q.clone())))
        .collect();
    from_expansions(chart, p, images)
}

pub fn flat_lift(u: &OddVectorField, w: &Worm) -> Result<Worm> {
    flat_lift_derivation(u, w.chart())?.apply(w)
}

/// `f·v^#` for a function `f` on R^{0|k} and a vector field `v` on the chart.
#[derive(Clone, Debug, PartialEq)]
pub struct CartanLift {
    pub f: GrassmannPoly<Rational>,
    pub v: Vec<ScalarExpr>,
}

impl CartanLift {
    pub fn new(f: GrassmannPoly<Rational>, v: Vec<ScalarExpr>) -> Self {
        CartanLift { f, v }
    }

    pub fn parity(&self) -> Parity {
        self.f.parity()
    }

    /// The derivation obtained by perturbing `x^i(θ)` by `f(θ)·v^i(x(θ))`.
    pub fn derivation(&self, chart: &Arc<Chart>) -> Result<Derivation> {
        check_level(chart, self.f.level())?;
        if self.v.len() != chart.dim() {
            return Err(WormError::Shape(format!(
                "{} vector field components on a {}-dimensional chart",
                self.v.len(),
                chart.dim()
            )));
        }
        let p = self.parity().bit().ok_or(WormError::MixedParity)?;
        let xs = grassmann_expand(chart);
        let names: Vec<&str> = chart.coords().iter().map(String::as_str).collect();
        let f = self.f.to_worm_coeffs(chart);
        let images = self
            .v
            .iter()
            .map(|vi| Ok(f.times(&taylor_compose(vi, &names, &xs, chart)?)))
            .collect::<Result<Vec<_>>>()?;
        from_expansions(chart, p, images)
    }

    pub fn apply(&self, w: &Worm) -> Result<Worm> {
        self.derivation(w.chart())?.apply(w)
    }
}

pub fn cartan_apply(l: &CartanLift, w: &Worm) -> Result<Worm> {
    l.apply(w)
}

/// Lie bracket of vector fields on the chart, `[v, w]^i = v(w^i) − w(v^i)`.
pub fn vector_field_bracket(chart: &Chart, v: &[ScalarExpr], w: &[ScalarExpr]) -> Vec<ScalarExpr> {
    (0..chart.dim())
        .map(|i| {
            let mut acc = ScalarExpr::zero();
            for j in 0..chart.dim() {
                let xj = chart.coord(j);
                acc += &(&v[j] * &w[i].diff(xj));
                acc -= &(&w[j] * &v[i].diff(xj));
            }
            acc
        })
        .collect()
}

fn level2(chart: &Chart) -> Result<()> {
    if chart.level() != 2 {
        return Err(WormError::ChartMismatch(format!(
            "operator defined at level 2, chart has level {}",
            chart.level()
        )));
    }
    Ok(())
}

fn gen(chart: &Arc<Chart>, set: &[usize], i: usize) -> Worm {
    Worm::generator(chart, Generator { set: IndexSet::from_indices(set).expect("valid set"), coord: i })
}

/// `E_a^b = d_a x^i ∂/∂(d_b x^i) + δ_a^b d₁d₂x^i ∂/∂(d₁d₂x^i)` (level 2).
pub fn e_op(chart: &Arc<Chart>, a: usize, b: usize) -> Result<Derivation> {
    level2(chart)?;
    chart.check_index(a)?;
    chart.check_index(b)?;
    let c = chart.clone();
    let zeros = vec![Worm::zero(chart); chart.dim()];
    Derivation::new(chart, 0, zeros, move |g| {
        let s = g.set.elements();
        Ok(if s == [b] {
            gen(&c, &[a], g.coord)
        } else if s.len() == 2 && a == b {
            gen(&c, &[1, 2], g.coord)
        } else {
            Worm::zero(&c)
        })
    })
}

/// `R_a = ε_{ab} d_b x^i ∂/∂(d₁d₂x^i)` (level 2).
pub fn r_op(chart: &Arc<Chart>, a: usize) -> Result<Derivation> {
    level2(chart)?;
    chart.check_index(a)?;
    let c = chart.clone();
    let zeros = vec![Worm::zero(chart); chart.dim()];
    Derivation::new(chart, 1, zeros, move |g| {
        if g.set.len() != 2 {
            return Ok(Worm::zero(&c));
        }
        let mut out = Worm::zero(&c);
        for b in 1..=2 {
            let e = epsilon(a, b);
            if e != 0 {
                out = &out + &gen(&c, &[b], g.coord).scale_rational(&crate::num::rat(e as i64));
            }
        }
        Ok(out)
    })
}

/// An operator on worms with a definite parity, composed lazily.
#[derive(Clone, Debug)]
pub enum Operator {
    D(usize),
    /// `flat_lift(u)`
    Flat(OddVectorField),
    /// `u^♭ = LIFT_SIGN · flat_lift(u)`
    Lift(OddVectorField),
    Cartan(CartanLift),
    E(usize, usize),
    R(usize),
    Scale(Rational, Box<Operator>),
    Sum(Vec<Operator>),
    Commutator(Box<Operator>, Box<Operator>),
}

impl Operator {
    pub fn parity(&self) -> Result<usize> {
        let bit = |p: Parity| p.bit().ok_or(WormError::MixedParity);
        match self {
            Operator::D(_) | Operator::R(_) => Ok(1),
            Operator::E(..) => Ok(0),
            Operator::Flat(u) | Operator::Lift(u) => bit(u.parity()),
            Operator::Cartan(l) => bit(l.parity()),
            Operator::Scale(_, a) => a.parity(),
            Operator::Sum(v) => {
                let ps = v.iter().map(Operator::parity).collect::<Result<Vec<_>>>()?;
                match ps.split_first() {
                    None => Ok(0),
                    Some((p, rest)) if rest.iter().all(|q| q == p) => Ok(*p),
                    _ => Err(WormError::MixedParity),
                }
            }
            Operator::Commutator(a, b) => Ok((a.parity()? + b.parity()?) % 2),
        }
    }

    pub fn commutator(a: Operator, b: Operator) -> Operator {
        Operator::Commutator(Box::new(a), Box::new(b))
    }

    pub fn scaled(self, c: Rational) -> Operator {
        Operator::Scale(c, Box::new(self))
    }

    /// The derivation for the primitive operators; `None` for composites.
    pub fn derivation(&self, chart: &Arc<Chart>) -> Result<Option<Derivation>> {
        Ok(Some(match self {
            Operator::D(a) => differential(chart, *a)?,
            Operator::Flat(u) | Operator::Lift(u) => flat_lift_derivation(u, chart)?,
            Operator::Cartan(l) => l.derivation(chart)?,
            Operator::E(a, b) => e_op(chart, *a, *b)?,
            Operator::R(a) => r_op(chart, *a)?,
            _ => return Ok(None),
        }))
    }

    pub fn apply(&self, w: &Worm) -> Result<Worm> {
        match self {
            Operator::Lift(_) => {
                let out = self.derivation(w.chart())?.expect("primitive").apply(w)?;
                Ok(out.scale_rational(&crate::num::rat(LIFT_SIGN as i64)))
            }
            Operator::Scale(c, a) => Ok(a.apply(w)?.scale_rational(c)),
            Operator::Sum(v) => {
                let mut acc = Worm::zero(w.chart());
                for op in v {
                    acc = acc.checked_add(&op.apply(w)?)?;
                }
                Ok(acc)
            }
            Operator::Commutator(a, b) => {
                let ab = a.apply(&b.apply(w)?)?;
                let ba = b.apply(&a.apply(w)?)?;
                if a.parity()? * b.parity()? == 1 {
                    ab.checked_add(&ba)
                } else {
                    ab.checked_sub(&ba)
                }
            }
            _ => self.derivation(w.chart())?.expect("primitive").apply(w),
        }
    }
}

/// Every coordinate and generator of the chart as a worm, plus the constant 1.
pub fn generator_probe(chart: &Arc<Chart>) -> Vec<Worm> {
    let mut v = vec![Worm::one(chart)];
    v.extend((0..chart.dim()).map(|i| Worm::coordinate(chart, i)));
    v.extend(Generator::all(chart).into_iter().map(|g| Worm::generator(chart, g)));
    v
}

/// Do two operators agree on every generator and on the extra test worms?
pub fn operators_agree(a: &Operator, b: &Operator, chart: &Arc<Chart>, extra: &[Worm]) -> Result<bool> {
    for w in generator_probe(chart).iter().chain(extra) {
        if !a.apply(w)?.equals(&b.apply(w)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The constant function `1` on R^{0|k}.
pub fn unit_function(k: usize) -> GrassmannPoly<Rational> {
    GrassmannPoly::constant(k, Rational::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_worm;

    fn chart(coords: &[&str], k: usize) -> Arc<Chart> {
        Chart::new("U", coords, k).unwrap()
    }

    #[test]
    fn d_examples() {
        let c = chart(&["x"], 2);
        let w = parse_worm(&c, "x^2").unwrap();
        assert_eq!(d(1, &w).unwrap().to_string(), "2*x*d{1}x");
        let d1x = parse_worm(&c, "d{1}x").unwrap();
        assert_eq!(d(2, &d1x).unwrap(), parse_worm(&c, "-d{1,2}x").unwrap());
        assert!(matches!(d(3, &w), Err(WormError::IndexOutOfRange { .. })));
    }

    #[test]
    fn flat_lift_of_partial_is_d() {
        let c = chart(&["x", "y"], 2);
        for a in 1..=2 {
            let u = OddVectorField::partial(2, a).unwrap();
            assert!(operators_agree(&Operator::Flat(u), &Operator::D(a), &c, &[]).unwrap());
        }
    }

    #[test]
    fn flat_lift_examples() {
        let c = chart(&["x"], 2);
        let u = OddVectorField::parse(2, "t1*D1").unwrap();
        let g = |s: &str| parse_worm(&c, s).unwrap();
        assert_eq!(flat_lift(&u, &g("d{1}x")).unwrap(), g("d{1}x"));
        assert!(flat_lift(&u, &g("d{2}x")).unwrap().is_zero());
        assert_eq!(flat_lift(&u, &g("d{1,2}x")).unwrap(), g("d{1,2}x"));
        let r = OddVectorField::parse(2, "t1*t2*D1").unwrap();
        assert_eq!(flat_lift(&r, &g("d{1,2}x")).unwrap(), g("-d{1}x"));
        for s in ["x", "d{1}x", "d{2}x"] {
            assert!(flat_lift(&r, &g(s)).unwrap().is_zero());
        }
    }

    #[test]
    fn k1_cartan_is_lie_derivative_and_interior_product() {
        let c = chart(&["x"], 1);
        let g = |s: &str| parse_worm(&c, s).unwrap();
        let v = vec![ScalarExpr::one()];
        let lie = CartanLift::new(unit_function(1), v.clone());
        assert_eq!(lie.apply(&g("x")).unwrap(), g("1"));
        assert!(lie.apply(&g("d{1}x")).unwrap().is_zero());
        let interior = CartanLift::new(GrassmannPoly::theta(1, 1), v);
        assert_eq!(interior.apply(&g("d{1}x")).unwrap(), g("-1"));
        let xv = CartanLift::new(unit_function(1), vec![ScalarExpr::var("x")]);
        assert_eq!(xv.apply(&g("x*d{1}x")).unwrap(), g("2*x*d{1}x"));
    }
}
