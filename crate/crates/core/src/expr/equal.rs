//! Equality of coefficient expressions.
//!
//! Polynomials are decided exactly by their canonical form. Anything with
//! elementary functions or denominators is certified numerically: the two
//! sides must agree at [`SAMPLE_POINTS`] random regular points to relative
//! error [`REL_TOL`]. This is a probabilistic test; a false positive needs a
//! non-zero analytic function vanishing at every sampled point.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ScalarExpr;

pub const SAMPLE_POINTS: usize = 20;
pub const REL_TOL: f64 = 1e-9;
const MAX_ATTEMPTS: usize = 400;
const DEFAULT_SEED: u64 = 0x5eed_0f_3a7;

/// How an equality verdict was reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Certification {
    /// The difference normalises to zero.
    Exact,
    /// The difference is a non-zero polynomial.
    ExactlyDifferent,
    /// Agreement at the given number of random points.
    Numeric(usize),
    /// Disagreement found at a random point.
    NumericallyDifferent,
    /// Too few regular points could be found to decide.
    Undecided,
}

impl Certification {
    pub fn is_equal(self) -> bool {
        matches!(self, Certification::Exact | Certification::Numeric(_))
    }
}

pub fn expr_equal(a: &ScalarExpr, b: &ScalarExpr) -> bool {
    expr_equal_seeded(a, b, DEFAULT_SEED).is_equal()
}

pub fn expr_equal_seeded(a: &ScalarExpr, b: &ScalarExpr, seed: u64) -> Certification {
    let diff = a - b;
    if diff.is_zero() {
        return Certification::Exact;
    }
    if diff.is_polynomial() {
        return Certification::ExactlyDifferent;
    }
    let vars: Vec<String> = diff.free_vars().iter().map(|v| v.to_string()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agreed = 0;
    for _ in 0..MAX_ATTEMPTS {
        let point: BTreeMap<String, f64> = vars
            .iter()
            .map(|v| (v.clone(), rng.gen_range(-2.0..2.0)))
            .collect();
        let (Ok(va), Ok(vb)) = (a.eval(&point), b.eval(&point)) else {
            continue;
        };
        let Some(scale) = term_scale(a, &point).zip(term_scale(b, &point)).map(|(s, t)| s.max(t))
        else {
            continue;
        };
        if !va.is_finite() || !vb.is_finite() || !scale.is_finite() {
            continue;
        }
        if (va - vb).abs() > REL_TOL * scale.max(va.abs()).max(vb.abs()) {
            return Certification::NumericallyDifferent;
        }
        agreed += 1;
        if agreed >= SAMPLE_POINTS {
            return Certification::Numeric(agreed);
        }
    }
    Certification::Undecided
}

/// Sum of absolute term values: the magnitude against which cancellation
/// error is measured.
fn term_scale(e: &ScalarExpr, point: &BTreeMap<String, f64>) -> Option<f64> {
    let mut s = 0.0;
    for (p, c) in e.terms() {
        let single = ScalarExpr::from_product_unreduced(p.clone(), c.clone());
        s += single.eval(point).ok()?.abs();
    }
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> ScalarExpr {
        ScalarExpr::var("x")
    }
    fn y() -> ScalarExpr {
        ScalarExpr::var("y")
    }

    #[test]
    fn binomial_square() {
        let lhs = (&x() + &y()).pow(2);
        let rhs = &(&x().pow(2) + &(&x() * &y()).scale(&crate::num::rat(2))) + &y().pow(2);
        assert_eq!(expr_equal_seeded(&lhs, &rhs, 1), Certification::Exact);
    }

    #[test]
    fn distinct_variables() {
        assert_eq!(expr_equal_seeded(&x(), &y(), 1), Certification::ExactlyDifferent);
    }

    #[test]
    fn pythagorean_identity_numeric() {
        let lhs = &x().sin().pow(2) + &x().cos().pow(2);
        let cert = expr_equal_seeded(&lhs, &ScalarExpr::one(), 7);
        assert!(matches!(cert, Certification::Numeric(n) if n >= SAMPLE_POINTS));
    }

    #[test]
    fn rational_function_identity() {
        let s = &x() + &ScalarExpr::one();
        let lhs = &(&x() / &s) + &(&ScalarExpr::one() / &s);
        assert!(expr_equal(&lhs, &ScalarExpr::one()));
        assert!(!expr_equal(&lhs, &ScalarExpr::int(2)));
    }

    #[test]
    fn near_miss_is_rejected() {
        let lhs = &x().sin().pow(2) + &x().cos().pow(2);
        let off = &ScalarExpr::one() + &ScalarExpr::constant(crate::num::ratio(1, 1_000_000));
        assert!(!expr_equal(&lhs, &off));
    }
}
