//! `d_a`-cohomology of polynomial worms, one weight at a time.
//!
//! Coordinates and generators both have weight one, so `d_a` preserves the
//! weight and every weight piece is finite-dimensional. Each piece splits
//! further into blocks that `d_a` also preserves: the weight carried by each
//! coordinate, and the multidegree in every direction other than `a`.

use std::collections::{BTreeMap, HashMap};
use std::ops::Range;
use std::sync::Arc;

use rayon::prelude::*;

use crate::chart::Chart;
use crate::error::Result;
use crate::expr::ScalarExpr;
use crate::grassmann::OddVectorField;
use crate::lifts::{operators_agree, Operator};
use crate::linalg::{sparse_rank, Matrix, SparseRow};
use crate::num::rat;
use crate::worm::{Generator, IndexSet, Monomial, Worm};
use crate::Rational;

/// `x^α · m` with `m` a generator monomial.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisElement {
    pub coords: Vec<u32>,
    pub mono: Monomial,
}

impl BasisElement {
    pub fn to_worm(&self, chart: &Arc<Chart>) -> Worm {
        let mut f = ScalarExpr::one();
        for (i, &e) in self.coords.iter().enumerate() {
            if e > 0 {
                f = &f * &chart.coord_expr(i).pow(e as i32);
            }
        }
        Worm::term(chart, self.mono.clone(), f)
    }

    /// `d_a` as an integer combination of basis elements.
    pub fn d(&self, a: usize) -> Vec<(BasisElement, i64)> {
        let mut out = Vec::new();
        for (i, &e) in self.coords.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let g = Generator { set: IndexSet::singleton(a), coord: i };
            if let Some((s, mono)) = Monomial::generator(g).mul(&self.mono) {
                let mut coords = self.coords.clone();
                coords[i] -= 1;
                out.push((BasisElement { coords, mono }, s as i64 * e as i64));
            }
        }
        let seq = self.mono.sequence();
        let mut odd_before = 0;
        for (j, g) in seq.iter().enumerate() {
            if let Some((s, set)) = g.set.insert(a) {
                let mut next = seq.clone();
                next[j] = Generator { set, coord: g.coord };
                if let Some((s2, mono)) = Monomial::from_sequence(&next) {
                    let sign = if odd_before % 2 == 0 { 1 } else { -1 };
                    out.push((BasisElement { coords: self.coords.clone(), mono }, (sign * s * s2) as i64));
                }
            }
            if g.is_odd() {
                odd_before += 1;
            }
        }
        out
    }

    /// The block label preserved by `d_a`.
    fn block(&self, a: usize, n: usize, k: usize) -> (Vec<u32>, Vec<u32>) {
        let mut per_coord = self.coords.clone();
        let mut multi = vec![0u32; k];
        for (g, e) in self.mono.factors() {
            per_coord[g.coord] += e;
            for b in g.set.elements() {
                multi[b - 1] += e;
            }
        }
        multi[a - 1] = 0;
        debug_assert_eq!(per_coord.len(), n);
        (per_coord, multi)
    }
}

/// All polynomial worms of a fixed weight.
#[derive(Clone, Debug)]
pub struct WeightedBasis {
    chart: Arc<Chart>,
    weight: usize,
    elements: Vec<BasisElement>,
    index: HashMap<BasisElement, usize>,
}

impl WeightedBasis {
    pub fn new(chart: &Arc<Chart>, weight: usize) -> Self {
        let gens = Generator::all(chart);
        let n = chart.dim();
        let mut elements = Vec::new();
        let mut coords = vec![0u32; n];
        let mut factors = Vec::new();
        enumerate(0, weight, n, &gens, &mut coords, &mut factors, &mut elements);
        elements.sort();
        let index = elements.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        WeightedBasis { chart: chart.clone(), weight, elements, index }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[BasisElement] {
        &self.elements
    }

    pub fn index_of(&self, e: &BasisElement) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn worms(&self) -> Vec<Worm> {
        self.elements.iter().map(|e| e.to_worm(&self.chart)).collect()
    }
}

/// Distribute `budget` over coordinates (slots `0..n`) then generators.
fn enumerate(
    slot: usize,
    budget: usize,
    n: usize,
    gens: &[Generator],
    coords: &mut Vec<u32>,
    factors: &mut Vec<(Generator, u32)>,
    out: &mut Vec<BasisElement>,
) {
    if slot == n + gens.len() {
        if budget == 0 {
            out.push(BasisElement { coords: coords.clone(), mono: Monomial(factors.clone()) });
        }
        return;
    }
    let max = if slot >= n && gens[slot - n].is_odd() { budget.min(1) } else { budget };
    for e in 0..=max {
        if slot < n {
            coords[slot] = e as u32;
        } else if e > 0 {
            factors.push((gens[slot - n], e as u32));
        }
        enumerate(slot + 1, budget - e, n, gens, coords, factors, out);
        if slot < n {
            coords[slot] = 0;
        } else if e > 0 {
            factors.pop();
        }
    }
}

/// The matrix of `d_a` on one weight piece; column `j` is `d_a` of basis
/// element `j`.
pub fn d_matrix(basis: &WeightedBasis, a: usize) -> Result<Matrix<Rational>> {
    basis.chart.check_index(a)?;
    let n = basis.len();
    let mut m = Matrix::<Rational>::zeros(n, n);
    for (j, e) in basis.elements.iter().enumerate() {
        for (img, c) in e.d(a) {
            let i = basis.index_of(&img).expect("d_a preserves the weight");
            m[(i, j)] = m[(i, j)].clone() + rat(c);
        }
    }
    Ok(m)
}

/// Cohomology of one block: its dimension and Betti number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockCohomology {
    pub coordinate_weights: Vec<u32>,
    /// Multidegree with the `a` entry zeroed.
    pub multidegree: Vec<u32>,
    pub dim: usize,
    pub betti: usize,
}

/// Per-block cohomology of the weight-`w` piece. Within a block `d_a` is a
/// differential on the whole block, so the cohomology has dimension
/// `dim − 2·rank`.
pub fn block_cohomology(chart: &Arc<Chart>, a: usize, weight: usize) -> Result<Vec<BlockCohomology>> {
    chart.check_index(a)?;
    let basis = WeightedBasis::new(chart, weight);
    let (n, k) = (chart.dim(), chart.level());
    let mut blocks: BTreeMap<(Vec<u32>, Vec<u32>), Vec<usize>> = BTreeMap::new();
    for (i, e) in basis.elements.iter().enumerate() {
        blocks.entry(e.block(a, n, k)).or_default().push(i);
    }
    Ok(blocks
        .into_par_iter()
        .map(|((coordinate_weights, multidegree), members)| {
            let rows: Vec<SparseRow<Rational>> = members
                .iter()
                .map(|&j| {
                    let mut row = SparseRow::new();
                    for (img, c) in basis.elements[j].d(a) {
                        let i = basis.index_of(&img).expect("d_a preserves the weight");
                        let v = row.remove(&i).unwrap_or_else(|| rat(0)) + rat(c);
                        row.insert(i, v);
                    }
                    row
                })
                .collect();
            let rank = sparse_rank(rows);
            BlockCohomology { coordinate_weights, multidegree, dim: members.len(), betti: members.len() - 2 * rank }
        })
        .collect())
}

/// Betti numbers of `d_a` for each weight in the range.
pub fn cohomology_dims(chart: &Arc<Chart>, a: usize, weights: Range<usize>) -> Result<Vec<usize>> {
    weights
        .into_par_iter()
        .map(|w| Ok(block_cohomology(chart, a, w)?.iter().map(|b| b.betti).sum()))
        .collect()
}

/// `d_a`-cohomology restricted to worms of positive degree in direction
/// `b`, per weight. Expected to vanish identically.
pub fn positive_degree_cohomology(chart: &Arc<Chart>, a: usize, b: usize, weights: Range<usize>) -> Result<Vec<usize>> {
    chart.check_index(b)?;
    weights
        .into_par_iter()
        .map(|w| {
            Ok(block_cohomology(chart, a, w)?
                .iter()
                .filter(|blk| blk.multidegree[b - 1] > 0)
                .map(|blk| blk.betti)
                .sum())
        })
        .collect()
}

fn field(k: usize, thetas: &[usize], a: usize) -> Result<OddVectorField> {
    OddVectorField::term(k, rat(1), thetas, a)
}

/// `[∂_a, θ_a θ_b ∂_b] = θ_b ∂_b` for all `a ≠ b`, both on R^{0|k} and after
/// lifting to worms; for `k = 2` also the total-degree identity
/// `E = [d₁, (θ₁θ₂∂₂)^♭] + [d₂, (θ₂θ₁∂₁)^♭]`, where `E` multiplies
/// `d_S x` by `|S|`.
pub fn homotopy_identity_check(k: usize) -> Result<bool> {
    let chart = Chart::new("U", &["x", "y"], k)?;
    let extra = probe_products(&chart);
    for a in 1..=k {
        for b in 1..=k {
            if a == b {
                continue;
            }
            let (pa, hab, eb) = (field(k, &[], a)?, field(k, &[a, b], b)?, field(k, &[b], b)?);
            if pa.bracket(&hab)? != eb {
                return Ok(false);
            }
            let lhs = Operator::commutator(Operator::Lift(pa), Operator::Lift(hab));
            if !operators_agree(&lhs, &Operator::Lift(eb), &chart, &extra)? {
                return Ok(false);
            }
        }
    }
    if k == 2 {
        let rhs = Operator::Sum(vec![
            Operator::commutator(Operator::D(1), Operator::Lift(field(2, &[1, 2], 2)?)),
            Operator::commutator(Operator::D(2), Operator::Lift(field(2, &[2, 1], 1)?)),
        ]);
        if !operators_agree(&total_degree(2), &rhs, &chart, &extra)? {
            return Ok(false);
        }
        for w in crate::lifts::generator_probe(&chart) {
            let expected = total_degree_of(&w);
            if !total_degree(2).apply(&w)?.equals(&expected) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `Σ_a E_a^a`.
pub fn total_degree(k: usize) -> Operator {
    Operator::Sum((1..=k).map(|a| Operator::E(a, a)).collect())
}

fn total_degree_of(w: &Worm) -> Worm {
    let mut out = Worm::zero(w.chart());
    for (m, c) in w.terms() {
        let deg: u32 = m.factors().iter().map(|(g, e)| g.set.len() as u32 * e).sum();
        out = out.checked_add(&Worm::term(w.chart(), m.clone(), c.scale(&rat(deg as i64)))).expect("same chart");
    }
    out
}

fn probe_products(chart: &Arc<Chart>) -> Vec<Worm> {
    let gens = crate::lifts::generator_probe(chart);
    gens.iter()
        .skip(1)
        .zip(gens.iter().skip(2))
        .map(|(a, b)| a * b)
        .collect()
}
