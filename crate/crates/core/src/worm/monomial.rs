use super::generator::Generator;

/// Product of generators in canonical order. Odd generators carry exponent 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub(crate) Vec<(Generator, u32)>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn generator(g: Generator) -> Monomial {
        Monomial(vec![(g, 1)])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Generator, u32)] {
        &self.0
    }

    pub fn is_odd(&self) -> bool {
        self.odd_count() % 2 == 1
    }

    pub fn odd_count(&self) -> usize {
        self.0.iter().filter(|(g, _)| g.is_odd()).count()
    }

    /// Total number of generator factors, counted with multiplicity.
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn multidegree(&self, k: usize) -> Vec<usize> {
        let mut deg = vec![0; k];
        for (g, e) in &self.0 {
            for a in g.set.elements() {
                deg[a - 1] += *e as usize;
            }
        }
        deg
    }

    pub fn exponent_of(&self, g: &Generator) -> u32 {
        self.0
            .iter()
            .find(|(h, _)| h == g)
            .map_or(0, |(_, e)| *e)
    }

    /// Build a monomial from an arbitrary ordered product of generators:
    /// returns the Koszul sign and the canonical monomial, or `None` when an
    /// odd generator repeats.
    pub fn from_sequence(seq: &[Generator]) -> Option<(i32, Monomial)> {
        let mut acc = (1, Monomial::one());
        for g in seq {
            let (s, m) = acc.1.mul(&Monomial::generator(*g))?;
            acc = (acc.0 * s, m);
        }
        Some(acc)
    }

    /// Graded-commutative product `self * other` rewritten in canonical
    /// order. The sign counts transpositions of odd generators.
    pub fn mul(&self, other: &Monomial) -> Option<(i32, Monomial)> {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let mut odd_left_in_a = a.iter().filter(|(g, _)| g.is_odd()).count();
        let mut swaps = 0usize;
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let take_a = j >= b.len() || (i < a.len() && a[i].0 <= b[j].0);
            if take_a && j < b.len() && i < a.len() && a[i].0 == b[j].0 {
                let g = a[i].0;
                if g.is_odd() {
                    return None;
                }
                out.push((g, a[i].1 + b[j].1));
                i += 1;
                j += 1;
                continue;
            }
            if take_a {
                if a[i].0.is_odd() {
                    odd_left_in_a -= 1;
                }
                out.push(a[i]);
                i += 1;
            } else {
                if b[j].0.is_odd() {
                    // b[j] moves left past every odd factor of `a` still pending
                    swaps += odd_left_in_a;
                }
                out.push(b[j]);
                j += 1;
            }
        }
        let sign = if swaps % 2 == 0 { 1 } else { -1 };
        Some((sign, Monomial(out)))
    }

    /// Expand into the flat generator sequence (exponents unrolled).
    pub fn sequence(&self) -> Vec<Generator> {
        self.0
            .iter()
            .flat_map(|(g, e)| std::iter::repeat_n(*g, *e as usize))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::generator::IndexSet;
    use super::*;

    fn g(set: &[usize], coord: usize) -> Generator {
        Generator { set: IndexSet::from_indices(set).unwrap(), coord }
    }

    #[test]
    fn anticommuting_odd_pair() {
        let (s, m) = Monomial::generator(g(&[2], 0)).mul(&Monomial::generator(g(&[1], 0))).unwrap();
        assert_eq!(s, -1);
        assert_eq!(m.sequence(), vec![g(&[1], 0), g(&[2], 0)]);
    }

    #[test]
    fn odd_square_vanishes_even_square_survives() {
        let d1 = Monomial::generator(g(&[1], 0));
        assert!(d1.mul(&d1).is_none());
        let d12 = Monomial::generator(g(&[1, 2], 0));
        let (s, m) = d12.mul(&d12).unwrap();
        assert_eq!((s, m.factors()), (1, &[(g(&[1, 2], 0), 2)][..]));
    }

    #[test]
    fn even_generators_do_not_contribute_sign() {
        let a = Monomial::from_sequence(&[g(&[1, 2], 0), g(&[2], 1)]).unwrap();
        let b = Monomial::from_sequence(&[g(&[1], 0)]).unwrap();
        // d12x d2y * d1x = d12x * (-d1x d2y) ; canonical order d1x d2y d12x
        let (s, _) = a.1.mul(&b.1).unwrap();
        assert_eq!(s, -1);
    }
}
