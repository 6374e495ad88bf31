use std::fmt::{self, Write};

use num_traits::{One, Signed};

use super::{Atom, Product, ScalarExpr};
use crate::Rational;

pub(crate) fn fmt_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn fmt_atom(atom: &Atom, out: &mut String) {
    match atom {
        Atom::Var(v) => out.push_str(v),
        Atom::Apply(f, arg) => {
            let _ = write!(out, "{}({arg})", f.name());
        }
        Atom::Denom(s) => {
            let _ = write!(out, "({s})");
        }
    }
}

fn fmt_product(p: &Product, out: &mut String) {
    for (i, (atom, e)) in p.0.iter().enumerate() {
        if i > 0 {
            out.push('*');
        }
        fmt_atom(atom, out);
        if *e != 1 {
            let _ = write!(out, "^{e}");
        }
    }
}

/// Format one signed term without its sign; returns whether it is negative.
pub(crate) fn fmt_term(p: &Product, c: &Rational, out: &mut String) -> bool {
    let neg = c.is_negative();
    let a = c.abs();
    if p.is_one() {
        out.push_str(&fmt_rational(&a));
    } else {
        if !a.is_one() {
            out.push_str(&fmt_rational(&a));
            out.push('*');
        }
        fmt_product(p, out);
    }
    neg
}

impl ScalarExpr {
    /// True when printing needs parentheses to be used as a factor.
    pub fn needs_parens(&self) -> bool {
        self.terms.len() > 1
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut out = String::new();
        for (i, (p, c)) in self.terms.iter().enumerate() {
            let mut body = String::new();
            let neg = fmt_term(p, c, &mut body);
            match (i, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            out.push_str(&body);
        }
        f.write_str(&out)
    }
}
