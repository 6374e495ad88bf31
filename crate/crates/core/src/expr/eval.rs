use std::collections::BTreeMap;

use super::{Atom, Func, ScalarExpr};
use crate::error::{Result, WormError};
use crate::num::Real;

impl ScalarExpr {
    /// Evaluate at a point given as a variable -> value map.
    pub fn eval(&self, point: &BTreeMap<String, f64>) -> Result<f64> {
        self.eval_with(&|v: &str| point.get(v).copied())
    }

    /// Evaluate with an arbitrary variable lookup.
    pub fn eval_with<T: Real>(&self, lookup: &dyn Fn(&str) -> Option<T>) -> Result<T> {
        let mut acc = T::zero();
        for (p, c) in self.terms.iter() {
            let mut term = T::from_rational(c);
            for (atom, e) in &p.0 {
                let base = match atom {
                    Atom::Var(v) => lookup(v).ok_or_else(|| WormError::UnboundVariable(v.to_string()))?,
                    Atom::Apply(f, arg) => apply_func(*f, arg.eval_with(lookup)?)?,
                    Atom::Denom(s) => s.eval_with(lookup)?,
                };
                term = term * checked_powi(base, *e)?;
            }
            acc = acc + term;
        }
        Ok(acc)
    }

    /// Compile against a fixed variable order for repeated evaluation.
    pub fn compile<T: Real>(&self, vars: &[&str]) -> Result<CompiledExpr<T>> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (p, c) in self.terms.iter() {
            let mut factors = Vec::with_capacity(p.0.len());
            for (atom, e) in &p.0 {
                let node = match atom {
                    Atom::Var(v) => Node::Var(
                        vars.iter()
                            .position(|x| *x == &**v)
                            .ok_or_else(|| WormError::UnboundVariable(v.to_string()))?,
                    ),
                    Atom::Apply(f, arg) => Node::Apply(*f, Box::new(arg.compile(vars)?)),
                    Atom::Denom(s) => Node::Sub(Box::new(s.compile(vars)?)),
                };
                factors.push((node, *e));
            }
            terms.push((T::from_rational(c), factors));
        }
        Ok(CompiledExpr { terms })
    }
}

fn apply_func<T: Real>(f: Func, a: T) -> Result<T> {
    Ok(match f {
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
        Func::Exp => a.exp(),
        Func::Log => {
            if a <= T::zero() {
                return Err(WormError::Domain(format!("log of non-positive value {a:?}")));
            }
            a.ln()
        }
        Func::Sqrt => {
            if a < T::zero() {
                return Err(WormError::Domain(format!("sqrt of negative value {a:?}")));
            }
            a.sqrt()
        }
    })
}

fn checked_powi<T: Real>(base: T, e: i32) -> Result<T> {
    if e < 0 && base == T::zero() {
        return Err(WormError::Domain("division by zero".into()));
    }
    Ok(base.powi(e))
}

#[derive(Clone, Debug)]
enum Node<T> {
    Var(usize),
    Apply(Func, Box<CompiledExpr<T>>),
    Sub(Box<CompiledExpr<T>>),
}

/// A [`ScalarExpr`] lowered to indexed variables.
#[derive(Clone, Debug)]
pub struct CompiledExpr<T> {
    terms: Vec<(T, Vec<(Node<T>, i32)>)>,
}

impl<T: Real> CompiledExpr<T> {
    pub fn eval(&self, x: &[T]) -> Result<T> {
        let mut acc = T::zero();
        for (c, factors) in &self.terms {
            let mut term = *c;
            for (node, e) in factors {
                let base = match node {
                    Node::Var(i) => x[*i],
                    Node::Apply(f, arg) => apply_func(*f, arg.eval(x)?)?,
                    Node::Sub(s) => s.eval(x)?,
                };
                term = term * checked_powi(base, *e)?;
            }
            acc = acc + term;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn polynomial_value() {
        let e = &ScalarExpr::var("x").pow(2) + &ScalarExpr::one();
        assert_eq!(e.eval(&at(&[("x", 2.0)])).unwrap(), 5.0);
    }

    #[test]
    fn sin_at_zero() {
        assert_eq!(ScalarExpr::var("x").sin().eval(&at(&[("x", 0.0)])).unwrap(), 0.0);
    }

    #[test]
    fn pole_is_domain_error() {
        let e = ScalarExpr::var("x").pow(-1);
        assert!(matches!(e.eval(&at(&[("x", 0.0)])), Err(WormError::Domain(_))));
        let l = ScalarExpr::var("x").ln();
        assert!(matches!(l.eval(&at(&[("x", -1.0)])), Err(WormError::Domain(_))));
    }

    #[test]
    fn unbound_variable() {
        assert!(matches!(
            ScalarExpr::var("q").eval(&at(&[])),
            Err(WormError::UnboundVariable(_))
        ));
    }

    #[test]
    fn compiled_matches_tree_eval_in_f32_and_f64() {
        let x = ScalarExpr::var("x");
        let y = ScalarExpr::var("y");
        let e = &(&x.clone().sin() * &y) / &(&x + &ScalarExpr::int(3));
        let c64 = e.compile::<f64>(&["x", "y"]).unwrap();
        let c32 = e.compile::<f32>(&["x", "y"]).unwrap();
        let want = e.eval(&at(&[("x", 0.7), ("y", -1.3)])).unwrap();
        assert!((c64.eval(&[0.7, -1.3]).unwrap() - want).abs() < 1e-14);
        assert!((c32.eval(&[0.7, -1.3]).unwrap() as f64 - want).abs() < 1e-5);
    }
}
