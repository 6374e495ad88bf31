use num_traits::One;

use super::{Atom, Func, Product, ScalarExpr};
use crate::Rational;

impl ScalarExpr {
    /// Exact partial derivative with respect to the variable `var`.
    pub fn diff(&self, var: &str) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        for (p, c) in self.terms.iter() {
            for (idx, (atom, e)) in p.0.iter().enumerate() {
                let inner = atom_derivative(atom, var);
                if inner.is_zero() {
                    continue;
                }
                // c * e * atom^(e-1) * rest * inner
                let mut factors = p.0.clone();
                if *e == 1 {
                    factors.remove(idx);
                } else {
                    factors[idx].1 = e - 1;
                }
                let lowered = ScalarExpr::from_product(
                    Product(factors),
                    c * Rational::from_integer((*e).into()),
                );
                out += &(&lowered * &inner);
            }
        }
        out
    }
}

/// Derivative of the atom's underlying value (for `Denom`, of the sum).
fn atom_derivative(atom: &Atom, var: &str) -> ScalarExpr {
    match atom {
        Atom::Var(v) => {
            if &**v == var {
                ScalarExpr::one()
            } else {
                ScalarExpr::zero()
            }
        }
        Atom::Denom(s) => s.diff(var),
        Atom::Apply(f, arg) => {
            let da = arg.diff(var);
            if da.is_zero() {
                return da;
            }
            let outer = match f {
                Func::Sin => arg.clone().cos(),
                Func::Cos => -arg.clone().sin(),
                Func::Exp => arg.clone().exp(),
                Func::Log => arg.try_recip().expect("log of zero is not a valid expression"),
                Func::Sqrt => arg
                    .clone()
                    .sqrt()
                    .pow(-1)
                    .scale(&Rational::new(One::one(), 2.into())),
            };
            &outer * &da
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::expr_equal;

    fn x() -> ScalarExpr {
        ScalarExpr::var("x")
    }
    fn y() -> ScalarExpr {
        ScalarExpr::var("y")
    }

    #[test]
    fn power_rule() {
        assert_eq!(x().pow(2).diff("x"), x().scale(&crate::num::rat(2)));
    }

    #[test]
    fn sin_times_y() {
        let e = &x().sin() * &y();
        assert_eq!(e.diff("x"), &x().cos() * &y());
    }

    #[test]
    fn mixed_coefficient_of_xy() {
        assert_eq!((&x() * &y()).diff("y"), x());
    }

    #[test]
    fn quotient_and_chain() {
        let e = &(&x() * &x()).sin() / &(&x() + &y());
        let d = e.diff("x");
        let expected = &(&(&x().scale(&crate::num::rat(2)) * &(&x() * &x()).cos()) / &(&x() + &y()))
            - &(&(&x() * &x()).sin() / &(&x() + &y()).pow(2));
        assert!(expr_equal(&d, &expected));
    }

    #[test]
    fn log_and_sqrt() {
        assert!(expr_equal(&x().ln().diff("x"), &x().pow(-1)));
        let s = x().sqrt();
        let expected = s.pow(-1).scale(&crate::num::ratio(1, 2));
        assert_eq!(s.diff("x"), expected);
    }
}
