//! Graded derivations of worm algebras, determined by their values on
//! coordinates and generators.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use crate::chart::Chart;
use crate::error::{Result, WormError};
use crate::expr::ScalarExpr;
use crate::worm::{Generator, Monomial, Worm};

type GenRule = dyn Fn(Generator) -> Result<Worm> + Send + Sync;

/// A derivation `D` of parity `p` on `Ω_[k](U)`:
/// `D(f) = Σ ∂f/∂x^i · D(x^i)` on coefficients and
/// `D(uv) = D(u) v + (−1)^{p|u|} u D(v)` on products.
pub struct Derivation {
    chart: Arc<Chart>,
    parity: usize,
    on_coords: Vec<Worm>,
    on_gen: Box<GenRule>,
    cache: Mutex<BTreeMap<Generator, Worm>>,
}

impl Derivation {
    pub fn new(
        chart: &Arc<Chart>,
        parity: usize,
        on_coords: Vec<Worm>,
        on_gen: impl Fn(Generator) -> Result<Worm> + Send + Sync + 'static,
    ) -> Result<Derivation> {
        if on_coords.len() != chart.dim() {
            return Err(WormError::Shape(format!(
                "{} coordinate images for a {}-dimensional chart",
                on_coords.len(),
                chart.dim()
            )));
        }
        Ok(Derivation {
            chart: chart.clone(),
            parity: parity % 2,
            on_coords,
            on_gen: Box::new(on_gen),
            cache: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn parity(&self) -> usize {
        self.parity
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    fn gen_image(&self, g: Generator) -> Result<Worm> {
        if let Some(w) = self.cache.lock().expect("derivation cache").get(&g) {
            return Ok(w.clone());
        }
        let w = (self.on_gen)(g)?;
        self.chart.ensure_same(w.chart())?;
        self.cache.lock().expect("derivation cache").insert(g, w.clone());
        Ok(w)
    }

    pub fn apply_scalar(&self, f: &ScalarExpr) -> Worm {
        let mut out = Worm::zero(&self.chart);
        for (i, img) in self.on_coords.iter().enumerate() {
            if img.is_zero() {
                continue;
            }
            let name = self.chart.coord(i);
            if !f.depends_on(name) {
                continue;
            }
            out = &out + &img.scale(&f.diff(name));
        }
        out
    }

    fn apply_monomial(&self, m: &Monomial) -> Result<Worm> {
        let chart = &self.chart;
        let factors = m.factors();
        let mut out = Worm::zero(chart);
        let mut prefix = Worm::one(chart);
        let mut prefix_odd = false;
        for (j, (g, e)) in factors.iter().enumerate() {
            let dg = self.gen_image(*g)?;
            if !dg.is_zero() {
                // D(g^e) = e g^{e-1} D(g); only even g have e > 1
                let rest = if *e > 1 { Monomial(vec![(*g, e - 1)]) } else { Monomial::one() };
                let lowered = Worm::term(chart, rest, ScalarExpr::int(*e as i64));
                let suffix = Worm::term(chart, Monomial(factors[j + 1..].to_vec()), ScalarExpr::one());
                let mut t = &(&(&prefix * &lowered) * &dg) * &suffix;
                if self.parity == 1 && prefix_odd {
                    t = -t;
                }
                out = &out + &t;
            }
            prefix = &prefix * &Worm::term(chart, Monomial(vec![(*g, *e)]), ScalarExpr::one());
            if g.is_odd() {
                prefix_odd = !prefix_odd;
            }
        }
        Ok(out)
    }

    pub fn apply(&self, w: &Worm) -> Result<Worm> {
        self.chart.ensure_same(w.chart())?;
        let mut out = Worm::zero(&self.chart);
        for (m, c) in w.terms() {
            let mono = Worm::term(&self.chart, m.clone(), ScalarExpr::one());
            let dc = self.apply_scalar(c);
            if !dc.is_zero() {
                out = &out + &(&dc * &mono);
            }
            if !m.is_one() {
                out = &out + &self.apply_monomial(m)?.scale(c);
            }
        }
        Ok(out)
    }
}
