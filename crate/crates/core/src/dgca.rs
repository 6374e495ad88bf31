//! Chevalley–Eilenberg algebras `⋀𝔤*` and Maurer–Cartan forms.
//!
//! `⋀𝔤*` is modelled as the level-1 worms with constant coefficients on a
//! chart with coordinates `e1, …, er`: the dual basis vector `e^a` is the odd
//! generator `d{1}e<a>`.

use std::sync::Arc;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chart::Chart;
use crate::derivation::Derivation;
use crate::error::{Result, WormError};
use crate::expr::ScalarExpr;
use crate::num::{rat, ratio};
use crate::worm::{Generator, IndexSet, Worm};
use crate::Rational;

/// Structure constants `[e_i, e_j] = c^k_ij e_k`, stored as `c[k][i][j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebraSpec {
    dim: usize,
    c: Vec<Vec<Vec<Rational>>>,
}

/// File form: `dim = 3` and `constants = [[k, i, j, "value"], …]` listing
/// `c^k_ij` for `i < j` (1-based); the other half follows by antisymmetry.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LieAlgebraFile {
    pub dim: usize,
    #[serde(default)]
    pub constants: Vec<(usize, usize, usize, String)>,
}

impl LieAlgebraSpec {
    pub fn new(c: Vec<Vec<Vec<Rational>>>) -> Result<Self> {
        let dim = c.len();
        for ck in &c {
            if ck.len() != dim || ck.iter().any(|row| row.len() != dim) {
                return Err(WormError::Shape(format!("structure constants must be {dim}x{dim}x{dim}")));
            }
        }
        for (k, ck) in c.iter().enumerate() {
            for i in 0..dim {
                for j in 0..dim {
                    if ck[i][j] != -ck[j][i].clone() {
                        return Err(WormError::Domain(format!(
                            "c^{}_{}{} is not antisymmetric",
                            k + 1,
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
        }
        Ok(LieAlgebraSpec { dim, c })
    }

    pub fn from_file(f: &LieAlgebraFile) -> Result<Self> {
        let r = f.dim;
        let mut c = vec![vec![vec![rat(0); r]; r]; r];
        for (k, i, j, v) in &f.constants {
            for &idx in [k, i, j] {
                if idx == 0 || idx > r {
                    return Err(WormError::IndexOutOfRange { index: idx, max: r });
                }
            }
            if i == j {
                return Err(WormError::Domain(format!("c^{k}_{i}{j} must vanish")));
            }
            let q = crate::dsl::parse_expr(v)?
                .as_constant()
                .ok_or_else(|| WormError::Domain(format!("structure constant `{v}` is not a number")))?;
            c[k - 1][i - 1][j - 1] = q.clone();
            c[k - 1][j - 1][i - 1] = -q;
        }
        Self::new(c)
    }

    pub fn abelian(dim: usize) -> Self {
        LieAlgebraSpec { dim, c: vec![vec![vec![rat(0); dim]; dim]; dim] }
    }

    /// `c^a_bc = ε_abc`.
    pub fn su2() -> Self {
        let mut c = vec![vec![vec![rat(0); 3]; 3]; 3];
        for (a, b, d) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            c[a][b][d] = rat(1);
            c[a][d][b] = rat(-1);
        }
        LieAlgebraSpec { dim: 3, c }
    }

    /// `[e₁, e₂] = e₃`.
    pub fn heisenberg() -> Self {
        let mut c = vec![vec![vec![rat(0); 3]; 3]; 3];
        c[2][0][1] = rat(1);
        c[2][1][0] = rat(-1);
        LieAlgebraSpec { dim: 3, c }
    }

    /// Add a random antisymmetric perturbation to one structure constant.
    /// Algebras of dimension below 2 have nothing to perturb.
    pub fn perturbed(&self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = self.c.clone();
        let r = self.dim;
        if r < 2 {
            return self.clone();
        }
        let k = rng.gen_range(0..r);
        let i = rng.gen_range(0..r);
        let j = (i + rng.gen_range(1..r)) % r;
        let delta = ratio(rng.gen_range(1..10), rng.gen_range(1..10));
        c[k][i][j] += delta.clone();
        c[k][j][i] -= delta;
        LieAlgebraSpec { dim: r, c }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constant(&self, k: usize, i: usize, j: usize) -> &Rational {
        &self.c[k][i][j]
    }

    /// Direct check of `Σ_cyc [[e_i, e_j], e_l] = 0`.
    pub fn jacobi_holds(&self) -> bool {
        let r = self.dim;
        for i in 0..r {
            for j in 0..r {
                for l in 0..r {
                    for out in 0..r {
                        let mut s = Rational::zero();
                        for m in 0..r {
                            s += &self.c[m][i][j] * &self.c[out][m][l];
                            s += &self.c[m][j][l] * &self.c[out][m][i];
                            s += &self.c[m][l][i] * &self.c[out][m][j];
                        }
                        if !s.is_zero() {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// `⋀𝔤*` with its Chevalley–Eilenberg differential.
pub struct CeAlgebra {
    spec: LieAlgebraSpec,
    chart: Arc<Chart>,
    d: Derivation,
}

impl CeAlgebra {
    pub fn new(spec: &LieAlgebraSpec) -> Result<Self> {
        let names: Vec<String> = (1..=spec.dim).map(|a| format!("e{a}")).collect();
        let chart = Chart::from_owned("g*", names, 1)?;
        let on_coords = vec![Worm::zero(&chart); spec.dim];
        let (c, s) = (chart.clone(), spec.clone());
        // d e^a = −½ c^a_bc e^b e^c
        let d = Derivation::new(&chart, 1, on_coords, move |g| {
            let a = g.coord;
            let mut out = Worm::zero(&c);
            for b in 0..s.dim {
                for e in 0..s.dim {
                    let k = &s.c[a][b][e];
                    if k.is_zero() {
                        continue;
                    }
                    let term = &dual(&c, b) * &dual(&c, e);
                    out = &out + &term.scale_rational(&(k * ratio(-1, 2)));
                }
            }
            Ok(out)
        })?;
        Ok(CeAlgebra { spec: spec.clone(), chart, d })
    }

    pub fn spec(&self) -> &LieAlgebraSpec {
        &self.spec
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    /// `e^a`, 0-based.
    pub fn generator(&self, a: usize) -> Worm {
        dual(&self.chart, a)
    }

    /// Products `e^{a₁}⋯e^{a_p}` with `a₁ < ⋯ < a_p`.
    pub fn basis(&self, degree: usize) -> Vec<Worm> {
        let mut out = Vec::new();
        let r = self.spec.dim;
        for mask in 0u32..(1 << r) {
            if mask.count_ones() as usize != degree {
                continue;
            }
            let mut w = Worm::one(&self.chart);
            for a in 0..r {
                if mask & (1 << a) != 0 {
                    w = &w * &self.generator(a);
                }
            }
            out.push(w);
        }
        out
    }

    pub fn d(&self, w: &Worm) -> Result<Worm> {
        self.chart.ensure_same(w.chart())?;
        if w.terms().any(|(_, c)| c.as_constant().is_none()) {
            return Err(WormError::Domain("elements of ⋀𝔤* have constant coefficients".into()));
        }
        self.d.apply(w)
    }

    /// `d²` vanishes on every basis element of every degree.
    pub fn d_squared_vanishes(&self) -> Result<bool> {
        for p in 0..=self.spec.dim {
            for w in self.basis(p) {
                if !self.d(&self.d(&w)?)?.is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn dual(chart: &Arc<Chart>, a: usize) -> Worm {
    Worm::generator(chart, Generator { set: IndexSet::singleton(1), coord: a })
}

pub fn ce_differential(spec: &LieAlgebraSpec, w: &Worm) -> Result<Worm> {
    CeAlgebra::new(spec)?.d(w)
}

/// `A = A^a_i e_a ⊗ dx^i` on a level-1 chart.
#[derive(Clone, Debug)]
pub struct ConnectionForm {
    chart: Arc<Chart>,
    components: Vec<Vec<ScalarExpr>>,
}

impl ConnectionForm {
    pub fn new(chart: &Arc<Chart>, components: Vec<Vec<ScalarExpr>>) -> Result<Self> {
        if chart.level() != 1 {
            return Err(WormError::ChartMismatch(format!("connections live on level 1, not {}", chart.level())));
        }
        if components.iter().any(|row| row.len() != chart.dim()) {
            return Err(WormError::Shape(format!("every A^a needs {} components", chart.dim())));
        }
        Ok(ConnectionForm { chart: chart.clone(), components })
    }

    /// From one level-1 worm of form degree 1 per Lie algebra index.
    pub fn from_worms(chart: &Arc<Chart>, forms: &[Worm]) -> Result<Self> {
        let mut components = Vec::with_capacity(forms.len());
        for w in forms {
            chart.ensure_same(w.chart())?;
            let mut row = vec![ScalarExpr::zero(); chart.dim()];
            for (m, c) in w.terms() {
                match m.factors() {
                    [(g, 1)] => row[g.coord] = c.clone(),
                    _ => return Err(WormError::Grading(format!("{w} is not a 1-form"))),
                }
            }
            components.push(row);
        }
        Self::new(chart, components)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn rank(&self) -> usize {
        self.components.len()
    }

    /// `A^a` as a 1-form.
    pub fn form(&self, a: usize) -> Worm {
        let mut out = Worm::zero(&self.chart);
        for (i, f) in self.components[a].iter().enumerate() {
            let dx = Worm::generator(&self.chart, Generator { set: IndexSet::singleton(1), coord: i });
            out = &out + &dx.scale(f);
        }
        out
    }
}

fn check_rank(spec: &LieAlgebraSpec, a: &ConnectionForm) -> Result<()> {
    if a.rank() != spec.dim {
        return Err(WormError::Shape(format!("{} components for a {}-dimensional algebra", a.rank(), spec.dim)));
    }
    Ok(())
}

/// `F^a = dA^a + ½ c^a_bc A^b A^c`.
pub fn mc_residual(spec: &LieAlgebraSpec, a: &ConnectionForm) -> Result<Vec<Worm>> {
    check_rank(spec, a)?;
    let forms: Vec<Worm> = (0..spec.dim).map(|i| a.form(i)).collect();
    (0..spec.dim)
        .map(|k| {
            let mut f = crate::lifts::d(1, &forms[k])?;
            for b in 0..spec.dim {
                for c in 0..spec.dim {
                    let s = &spec.c[k][b][c];
                    if !s.is_zero() {
                        f = &f + &(&forms[b] * &forms[c]).scale_rational(&(s * ratio(1, 2)));
                    }
                }
            }
            Ok(f)
        })
        .collect()
}

/// The algebra map `⋀𝔤* → Ω(M)`, `e^a ↦ A^a`.
pub fn connection_morphism(alg: &CeAlgebra, a: &ConnectionForm, w: &Worm) -> Result<Worm> {
    check_rank(&alg.spec, a)?;
    alg.chart.ensure_same(w.chart())?;
    w.substitute(&a.chart, &mut |c| Ok(c.clone()), &mut |g| Ok(a.form(g.coord)))
}

/// Does `e^a ↦ A^a` intertwine the differentials on all elements of degree
/// at most 2?
pub fn is_dgca_morphism(alg: &CeAlgebra, a: &ConnectionForm) -> Result<bool> {
    for p in 0..=2.min(alg.spec.dim) {
        for w in alg.basis(p) {
            let lhs = connection_morphism(alg, a, &alg.d(&w)?)?;
            let rhs = crate::lifts::d(1, &connection_morphism(alg, a, &w)?)?;
            if !lhs.equals(&rhs) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_worm;

    #[test]
    fn su2_differential() {
        let alg = CeAlgebra::new(&LieAlgebraSpec::su2()).unwrap();
        let d1 = alg.d(&alg.generator(0)).unwrap();
        assert_eq!(d1, -(&alg.generator(1) * &alg.generator(2)));
        assert!(alg.d_squared_vanishes().unwrap());
    }

    #[test]
    fn jacobi_and_d_squared_agree() {
        for spec in [LieAlgebraSpec::su2(), LieAlgebraSpec::heisenberg(), LieAlgebraSpec::abelian(3)] {
            assert!(spec.jacobi_holds());
            assert!(CeAlgebra::new(&spec).unwrap().d_squared_vanishes().unwrap());
        }
        let bad = LieAlgebraSpec::su2().perturbed(7);
        assert!(!bad.jacobi_holds());
        assert!(!CeAlgebra::new(&bad).unwrap().d_squared_vanishes().unwrap());
    }

    #[test]
    fn abelian_is_flat_iff_closed() {
        let m = Chart::new("M", &["x", "y"], 1).unwrap();
        let ab = LieAlgebraSpec::abelian(1);
        let alg = CeAlgebra::new(&ab).unwrap();
        let exact = ConnectionForm::from_worms(&m, &[parse_worm(&m, "y*d{1}x + x*d{1}y").unwrap()]).unwrap();
        assert!(mc_residual(&ab, &exact).unwrap()[0].is_zero());
        assert!(is_dgca_morphism(&alg, &exact).unwrap());
        let not = ConnectionForm::from_worms(&m, &[parse_worm(&m, "y*d{1}x").unwrap()]).unwrap();
        assert_eq!(mc_residual(&ab, &not).unwrap()[0], parse_worm(&m, "d{1}y*d{1}x").unwrap());
        assert!(!is_dgca_morphism(&alg, &not).unwrap());
    }

    #[test]
    fn su2_zero_and_pure_gauge() {
        let m = Chart::new("M", &["x", "y"], 1).unwrap();
        let su2 = LieAlgebraSpec::su2();
        let zero = ConnectionForm::new(&m, vec![vec![ScalarExpr::zero(); 2]; 3]).unwrap();
        assert!(mc_residual(&su2, &zero).unwrap().iter().all(Worm::is_zero));
        // A = e₃ ⊗ dx is flat: A ∧ A = 0 and dA = 0
        let rot = ConnectionForm::from_worms(
            &m,
            &[Worm::zero(&m), Worm::zero(&m), parse_worm(&m, "d{1}x").unwrap()],
        )
        .unwrap();
        assert!(mc_residual(&su2, &rot).unwrap().iter().all(Worm::is_zero));
        assert!(is_dgca_morphism(&CeAlgebra::new(&su2).unwrap(), &rot).unwrap());
        // two non-commuting directions are not
        let twist = ConnectionForm::from_worms(
            &m,
            &[parse_worm(&m, "d{1}x").unwrap(), parse_worm(&m, "d{1}y").unwrap(), Worm::zero(&m)],
        )
        .unwrap();
        assert!(!mc_residual(&su2, &twist).unwrap()[2].is_zero());
        assert!(!is_dgca_morphism(&CeAlgebra::new(&su2).unwrap(), &twist).unwrap());
    }

    #[test]
    fn file_form() {
        let f: LieAlgebraFile = toml::from_str("dim = 3\nconstants = [[3, 1, 2, \"1\"]]").unwrap();
        assert_eq!(LieAlgebraSpec::from_file(&f).unwrap(), LieAlgebraSpec::heisenberg());
    }
}
