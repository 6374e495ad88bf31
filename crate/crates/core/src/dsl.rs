//! Text syntax for expressions, worms, odd vector fields and maps.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' ['-'] integer | '^' '(' ['-'] integer ')')?
//! atom    := number | ident | ident '(' expr ')' | 'd{' idx (',' idx)* '}' ident | '(' expr ')'
//! ```
//!
//! Numbers are integers or decimals and are read exactly as rationals.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::chart::Chart;
use crate::error::{Result, WormError};
use crate::expr::{Func, ScalarExpr};
use crate::worm::{Generator, IndexSet, Worm};
use crate::Rational;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Gen(Vec<usize>, String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

fn perr<T>(pos: usize, msg: impl Into<String>) -> Result<T> {
    Err(WormError::Parse { pos, msg: msg.into() })
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(usize, Tok)>> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (p, t) = lx.next()?;
            let end = t == Tok::End;
            out.push((p, t));
            if end {
                return Ok(out);
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.bump();
        }
        self.src[start..self.pos].to_string()
    }

    fn next(&mut self) -> Result<(usize, Tok)> {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Ok((start, Tok::End));
        };
        if c.is_ascii_digit() || c == '.' {
            let mut digits = String::new();
            let mut frac_len = 0u32;
            let mut seen_dot = false;
            while let Some(c) = self.peek() {
                if c.is_ascii_digit() {
                    digits.push(c);
                    if seen_dot {
                        frac_len += 1;
                    }
                } else if c == '.' && !seen_dot {
                    seen_dot = true;
                } else {
                    break;
                }
                self.bump();
            }
            if digits.is_empty() {
                return perr(start, "malformed number");
            }
            let n: BigInt = digits.parse().expect("digits");
            let q = Rational::new(n, num_traits::pow(BigInt::from(10), frac_len as usize));
            return Ok((start, Tok::Num(q)));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let name = self.ident();
            if name == "d" && self.peek() == Some('{') {
                self.bump();
                let mut idx = Vec::new();
                loop {
                    while matches!(self.peek(), Some(c) if c.is_whitespace()) {
                        self.bump();
                    }
                    let p = self.pos;
                    let mut digits = String::new();
                    while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                        digits.push(self.bump().unwrap());
                    }
                    let Ok(a) = digits.parse::<usize>() else {
                        return perr(p, "expected differential index");
                    };
                    idx.push(a);
                    match self.bump() {
                        Some(',') => continue,
                        Some('}') => break,
                        _ => return perr(self.pos, "expected `,` or `}` in generator subset"),
                    }
                }
                let p = self.pos;
                if !matches!(self.peek(), Some(c) if c.is_ascii_alphabetic() || c == '_') {
                    return perr(p, "expected coordinate after generator subset");
                }
                let coord = self.ident();
                return Ok((start, Tok::Gen(idx, coord)));
            }
            return Ok((start, Tok::Ident(name)));
        }
        if "+-*/^(),=;".contains(c) {
            self.bump();
            return Ok((start, Tok::Op(c)));
        }
        perr(start, format!("unexpected character `{c}`"))
    }
}

/// Target algebra of the generic parser.
pub(crate) trait DslValue: Sized + Clone {
    type Ctx;
    fn number(ctx: &Self::Ctx, q: Rational) -> Self;
    fn ident(ctx: &Self::Ctx, name: &str, pos: usize) -> Result<Self>;
    fn generator(ctx: &Self::Ctx, set: &[usize], coord: &str, pos: usize) -> Result<Self>;
    fn apply(ctx: &Self::Ctx, f: Func, arg: Self, pos: usize) -> Result<Self>;
    fn add(self, rhs: Self) -> Result<Self>;
    fn sub(self, rhs: Self) -> Result<Self>;
    fn mul(self, rhs: Self) -> Result<Self>;
    fn div(self, rhs: Self, pos: usize) -> Result<Self>;
    fn negate(self) -> Self;
    fn raise(self, ctx: &Self::Ctx, e: i32, pos: usize) -> Result<Self>;
}

struct Parser<'c, V: DslValue> {
    toks: Vec<(usize, Tok)>,
    i: usize,
    ctx: &'c V::Ctx,
}

impl<V: DslValue> Parser<'_, V> {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].1
    }

    fn pos(&self) -> usize {
        self.toks[self.i].0
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.i].1.clone();
        if t != Tok::End {
            self.i += 1;
        }
        t
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if *self.peek() == Tok::Op(c) {
            self.advance();
            Ok(())
        } else {
            perr(self.pos(), format!("expected `{c}`"))
        }
    }

    fn expr(&mut self) -> Result<V> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.advance();
                    acc = acc.add(self.term()?)?;
                }
                Tok::Op('-') => {
                    self.advance();
                    acc = acc.sub(self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<V> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.advance();
                    acc = acc.mul(self.unary()?)?;
                }
                Tok::Op('/') => {
                    self.advance();
                    let p = self.pos();
                    acc = acc.div(self.unary()?, p)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<V> {
        if *self.peek() == Tok::Op('-') {
            self.advance();
            return Ok(self.unary()?.negate());
        }
        if *self.peek() == Tok::Op('+') {
            self.advance();
            return self.unary();
        }
        self.power()
    }

    fn int_exponent(&mut self) -> Result<i32> {
        let p = self.pos();
        let paren = *self.peek() == Tok::Op('(');
        if paren {
            self.advance();
        }
        let neg = *self.peek() == Tok::Op('-');
        if neg {
            self.advance();
        }
        let e = match self.advance() {
            Tok::Num(q) if q.is_integer() => {
                i32::try_from(q.to_integer()).map_err(|_| WormError::Parse { pos: p, msg: "exponent too large".into() })?
            }
            _ => return perr(p, "exponent must be an integer literal"),
        };
        if paren {
            self.expect(')')?;
        }
        Ok(if neg { -e } else { e })
    }

    fn power(&mut self) -> Result<V> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.advance();
            let p = self.pos();
            let e = self.int_exponent()?;
            return base.raise(self.ctx, e, p);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<V> {
        let p = self.pos();
        match self.advance() {
            Tok::Num(q) => Ok(V::number(self.ctx, q)),
            Tok::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return V::apply(self.ctx, f, arg, p);
                }
                if *self.peek() == Tok::Op('(') {
                    return perr(p, format!("unknown function `{name}`"));
                }
                V::ident(self.ctx, &name, p)
            }
            Tok::Gen(set, coord) => V::generator(self.ctx, &set, &coord, p),
            Tok::Op('(') => {
                let v = self.expr()?;
                self.expect(')')?;
                Ok(v)
            }
            Tok::End => perr(p, "unexpected end of input"),
            Tok::Op(c) => perr(p, format!("unexpected `{c}`")),
        }
    }
}

pub(crate) fn parse_generic<V: DslValue>(ctx: &V::Ctx, src: &str) -> Result<V> {
    let toks = Lexer::tokens(src)?;
    let mut p = Parser::<V> { toks, i: 0, ctx };
    let v = p.expr()?;
    if *p.peek() != Tok::End {
        return perr(p.pos(), "unexpected trailing input");
    }
    Ok(v)
}

impl DslValue for ScalarExpr {
    type Ctx = ();
    fn number(_: &(), q: Rational) -> Self {
        ScalarExpr::constant(q)
    }
    fn ident(_: &(), name: &str, _pos: usize) -> Result<Self> {
        Ok(ScalarExpr::var(name))
    }
    /// Generators are admitted as plain variable names, which is how even
    /// generators appear inside pseudodifferential coefficients.
    fn generator(_: &(), set: &[usize], coord: &str, _pos: usize) -> Result<Self> {
        let s = IndexSet::from_indices(set)?;
        Ok(ScalarExpr::var(&format!("d{}{}", s.label(), coord)))
    }
    fn apply(_: &(), f: Func, arg: Self, _pos: usize) -> Result<Self> {
        Ok(ScalarExpr::apply(f, arg))
    }
    fn add(self, rhs: Self) -> Result<Self> {
        Ok(&self + &rhs)
    }
    fn sub(self, rhs: Self) -> Result<Self> {
        Ok(&self - &rhs)
    }
    fn mul(self, rhs: Self) -> Result<Self> {
        Ok(&self * &rhs)
    }
    fn div(self, rhs: Self, pos: usize) -> Result<Self> {
        let r = rhs.try_recip().map_err(|_| WormError::Parse { pos, msg: "division by zero".into() })?;
        Ok(&self * &r)
    }
    fn negate(self) -> Self {
        -self
    }
    fn raise(self, _: &(), e: i32, pos: usize) -> Result<Self> {
        if e < 0 && self.is_zero() {
            return perr(pos, "negative power of zero");
        }
        Ok(ScalarExpr::pow(&self, e))
    }
}

/// Parse a coefficient expression such as `sin(x)^2 + 3/2*y`.
pub fn parse_expr(src: &str) -> Result<ScalarExpr> {
    parse_generic::<ScalarExpr>(&(), src)
}

/// Parse an expression and check that its variables are coordinates of the chart.
pub fn parse_expr_on(chart: &Chart, src: &str) -> Result<ScalarExpr> {
    let e = parse_expr(src)?;
    for v in e.free_vars() {
        chart.coord_index(&v)?;
    }
    Ok(e)
}

#[derive(Clone)]
struct ChartWorm(Worm);

impl ChartWorm {
    fn scalar(&self, pos: usize, what: &str) -> Result<ScalarExpr> {
        self.0
            .as_scalar()
            .ok_or_else(|| WormError::Parse { pos, msg: format!("{what} requires a scalar operand") })
    }
}

/// Re-anchor chart validation errors at a source position.
pub(crate) fn at_pos(pos: usize) -> impl Fn(WormError) -> WormError {
    move |e| match e {
        WormError::Parse { msg, .. } => WormError::Parse { pos, msg },
        WormError::IndexOutOfRange { index, max } => WormError::Parse {
            pos,
            msg: format!("differential index {index} out of range 1..={max}"),
        },
        WormError::UnknownCoordinate(c) => WormError::Parse { pos, msg: format!("unknown coordinate `{c}`") },
        other => other,
    }
}

impl DslValue for ChartWorm {
    type Ctx = Arc<Chart>;
    fn number(chart: &Arc<Chart>, q: Rational) -> Self {
        ChartWorm(Worm::constant(chart, q))
    }
    fn ident(chart: &Arc<Chart>, name: &str, pos: usize) -> Result<Self> {
        let i = chart.coord_index(name).map_err(at_pos(pos))?;
        Ok(ChartWorm(Worm::coordinate(chart, i)))
    }
    fn generator(chart: &Arc<Chart>, set: &[usize], coord: &str, pos: usize) -> Result<Self> {
        let s = IndexSet::from_indices(set).map_err(at_pos(pos))?;
        let i = chart.coord_index(coord).map_err(at_pos(pos))?;
        let g = Generator::new(chart, s, i).map_err(at_pos(pos))?;
        Ok(ChartWorm(Worm::generator(chart, g)))
    }
    fn apply(chart: &Arc<Chart>, f: Func, arg: Self, pos: usize) -> Result<Self> {
        let s = arg.scalar(pos, f.name())?;
        Ok(ChartWorm(Worm::scalar(chart, ScalarExpr::apply(f, s))))
    }
    fn add(self, rhs: Self) -> Result<Self> {
        Ok(ChartWorm(self.0.checked_add(&rhs.0)?))
    }
    fn sub(self, rhs: Self) -> Result<Self> {
        Ok(ChartWorm(self.0.checked_sub(&rhs.0)?))
    }
    fn mul(self, rhs: Self) -> Result<Self> {
        Ok(ChartWorm(self.0.checked_mul(&rhs.0)?))
    }
    fn div(self, rhs: Self, pos: usize) -> Result<Self> {
        let s = rhs.scalar(pos, "division")?;
        let r = s.try_recip().map_err(|_| WormError::Parse { pos, msg: "division by zero".into() })?;
        Ok(ChartWorm(self.0.scale(&r)))
    }
    fn negate(self) -> Self {
        ChartWorm(-self.0)
    }
    fn raise(self, chart: &Arc<Chart>, e: i32, pos: usize) -> Result<Self> {
        if e < 0 {
            let s = self.scalar(pos, "negative power")?;
            if s.is_zero() {
                return perr(pos, "negative power of zero");
            }
            return Ok(ChartWorm(Worm::scalar(chart, s.pow(e))));
        }
        Ok(ChartWorm(self.0.pow(e as u32)))
    }
}

/// Parse a worm such as `2*x*d{1}x - d{1,2}y` on the given chart.
pub fn parse_worm(chart: &Arc<Chart>, src: &str) -> Result<Worm> {
    parse_generic::<ChartWorm>(chart, src).map(|w| w.0)
}

/// Parse a map `y = x^2; z = x*y` into (target coordinate, component) pairs.
/// Components may only use the given source coordinates.
pub fn parse_map(source: &Chart, src: &str) -> Result<Vec<(String, ScalarExpr)>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for piece in src.split(';') {
        let here = offset;
        offset += piece.len() + 1;
        if piece.trim().is_empty() {
            continue;
        }
        let Some(eq) = piece.find('=') else {
            return perr(here, "expected `target = expression`");
        };
        let name = piece[..eq].trim();
        if !crate::chart::is_identifier(name) {
            return perr(here, format!("invalid target coordinate `{name}`"));
        }
        let rhs = &piece[eq + 1..];
        let e = parse_expr(rhs).map_err(|e| match e {
            WormError::Parse { pos, msg } => WormError::Parse { pos: pos + here + eq + 1, msg },
            other => other,
        })?;
        for v in e.free_vars() {
            source.coord_index(&v)?;
        }
        out.push((name.to_string(), e));
    }
    if out.is_empty() {
        return perr(0, "empty map");
    }
    Ok(out)
}

/// A term `c · θ^T ∂/∂θ^a` as written in the field syntax, in the order the
/// θ's appear (`t2*t1*D1` is kept as the sequence [2, 1]).
#[derive(Clone, Debug, PartialEq)]
pub struct FieldTermText {
    pub coeff: Rational,
    pub thetas: Vec<usize>,
    pub target: usize,
}

/// Parse odd vector fields written like `t1*t2*D1 - 2*t2*D2`: each term is a
/// rational coefficient, a product of `tN` (θ^N) and exactly one `DN`
/// (∂/∂θ^N), which must come last.
pub fn parse_field_terms(src: &str) -> Result<Vec<FieldTermText>> {
    let toks = Lexer::tokens(src)?;
    let mut out = Vec::new();
    let mut i = 0;
    let index_of = |name: &str, prefix: char, pos: usize| -> Result<Option<usize>> {
        let mut cs = name.chars();
        if cs.next() != Some(prefix) {
            return Ok(None);
        }
        let rest: String = cs.collect();
        match rest.parse::<usize>() {
            Ok(a) if a >= 1 => Ok(Some(a)),
            _ => perr(pos, format!("malformed `{name}`")),
        }
    };
    loop {
        let mut sign = Rational::one();
        while let Tok::Op(c @ ('+' | '-')) = toks[i].1 {
            if c == '-' {
                sign = -sign;
            }
            i += 1;
        }
        let mut coeff = sign;
        let mut thetas = Vec::new();
        let mut target = None;
        loop {
            let (p, t) = &toks[i];
            match t {
                Tok::Num(q) => {
                    let mut q = q.clone();
                    if toks[i + 1].1 == Tok::Op('/') {
                        if let Tok::Num(d) = &toks[i + 2].1 {
                            if d.is_zero() {
                                return perr(toks[i + 2].0, "division by zero");
                            }
                            q /= d;
                            i += 2;
                        }
                    }
                    coeff *= q;
                }
                Tok::Ident(name) if target.is_none() => {
                    if let Some(a) = index_of(name, 't', *p)? {
                        thetas.push(a);
                    } else if let Some(a) = index_of(name, 'D', *p)? {
                        target = Some(a);
                    } else {
                        return perr(*p, format!("expected tN or DN, found `{name}`"));
                    }
                }
                Tok::Ident(_) => return perr(*p, "DN must be the last factor of a term"),
                _ => return perr(*p, "expected a field factor"),
            }
            i += 1;
            if toks[i].1 == Tok::Op('*') {
                i += 1;
                continue;
            }
            break;
        }
        let Some(target) = target else {
            return perr(toks[i].0, "term lacks a derivative DN");
        };
        out.push(FieldTermText { coeff, thetas, target });
        match &toks[i].1 {
            Tok::End => return Ok(out),
            Tok::Op('+' | '-') => {}
            _ => return perr(toks[i].0, "expected `+`, `-` or end of input"),
        }
    }
}

/// Parse `name = value` pairs separated by `;` or `,`.
pub fn parse_bindings(src: &str) -> Result<BTreeMap<String, ScalarExpr>> {
    let mut out = BTreeMap::new();
    for piece in src.split([';', ',']) {
        if piece.trim().is_empty() {
            continue;
        }
        let Some(eq) = piece.find('=') else {
            return perr(0, "expected `name = value`");
        };
        out.insert(piece[..eq].trim().to_string(), parse_expr(&piece[eq + 1..])?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expression_precedence() {
        let e = parse_expr("-x^2 + 3/2*y").unwrap();
        let x = ScalarExpr::var("x");
        let y = ScalarExpr::var("y");
        assert_eq!(e, &(-x.pow(2)) + &y.scale(&crate::num::ratio(3, 2)));
        assert_eq!(parse_expr("2^-1").unwrap(), ScalarExpr::constant(crate::num::ratio(1, 2)));
        assert_eq!(parse_expr("0.25").unwrap(), ScalarExpr::constant(crate::num::ratio(1, 4)));
    }

    #[test]
    fn expression_round_trip() {
        for s in ["sin(x)^2*y - 1/(x + y)", "sqrt(x^2 + 1)^-3", "exp(-x^2) + log(y)/3"] {
            let e = parse_expr(s).unwrap();
            assert_eq!(parse_expr(&e.to_string()).unwrap(), e, "{s} -> {e}");
        }
    }

    #[test]
    fn worm_examples() {
        let c = Chart::new("U", &["x"], 2).unwrap();
        let w = parse_worm(&c, "2*x*d{1}x").unwrap();
        assert_eq!(w.to_string(), "2*x*d{1}x");
        assert!(parse_worm(&c, "d{1}x*d{1}x").unwrap().is_zero());
        assert_eq!(parse_worm(&c, "d{2}x*d{1}x").unwrap().to_string(), "-d{1}x*d{2}x");
    }

    #[test]
    fn errors_carry_positions() {
        let c = Chart::new("U", &["x"], 2).unwrap();
        assert!(matches!(parse_worm(&c, "x + d{3}x"), Err(WormError::Parse { pos: 4, .. })));
        assert!(matches!(parse_worm(&c, "x + z"), Err(WormError::Parse { pos: 4, .. })));
        assert!(matches!(parse_worm(&c, "d{1,1}x"), Err(WormError::Parse { pos: 0, .. })));
        assert!(matches!(parse_expr("x +"), Err(WormError::Parse { pos: 3, .. })));
        assert!(matches!(parse_expr("x $ y"), Err(WormError::Parse { pos: 2, .. })));
        assert!(matches!(parse_worm(&c, "sin(d{1}x)"), Err(WormError::Parse { .. })));
    }

    #[test]
    fn field_terms() {
        let t = parse_field_terms("t1*t2*D1 - 1/2*t2*D2 + D1").unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t[0].thetas, vec![1, 2]);
        assert_eq!(t[1].coeff, crate::num::ratio(-1, 2));
        assert_eq!(t[2].target, 1);
        assert!(parse_field_terms("t1*D1*t2").is_err());
        assert!(parse_field_terms("t1").is_err());
    }

    #[test]
    fn maps() {
        let c = Chart::new("U", &["x", "y"], 1).unwrap();
        let m = parse_map(&c, "u = x^2; v = x*y").unwrap();
        assert_eq!(m[0].0, "u");
        assert!(parse_map(&c, "u = z").is_err());
    }
}
