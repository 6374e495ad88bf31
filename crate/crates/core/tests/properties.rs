//! Randomized algebraic laws: Leibniz, graded commutativity, associativity,
//! Koszul signs, d² = 0, naturality and functoriality of pullback.

use std::sync::Arc;

use proptest::prelude::*;
use worms::dsl::{parse_expr_on, parse_worm};
use worms::grassmann::OddVectorField;
use worms::lifts::{self, Operator};
use worms::num::rat;
use worms::pullback::{pullback, SmoothMap};
use worms::{Chart, Generator, IndexSet, Monomial, Worm};

fn chart(level: usize) -> Arc<Chart> {
    Chart::new("U", &["x", "y", "z"], level).unwrap()
}

fn generator_labels(level: usize) -> Vec<(String, bool)> {
    let c = chart(level);
    Generator::all(&c).iter().map(|g| (g.label(&c), g.is_odd())).collect()
}

fn coefficient() -> impl Strategy<Value = String> {
    let poly = (-3i32..=3, 0u32..=2, 0u32..=2, 0u32..=1)
        .prop_map(|(c, a, b, e)| format!("({c})*x^{a}*y^{b}*z^{e}"));
    prop_oneof![
        6 => poly,
        1 => Just("sin(x)".to_string()),
        1 => Just("exp(y)*z".to_string()),
        1 => Just("1/2".to_string()),
    ]
}

/// A single term: coefficient times up to three generators, and its parity.
fn term(level: usize) -> impl Strategy<Value = (String, bool)> {
    let gens = generator_labels(level);
    let n = gens.len();
    (coefficient(), prop::collection::vec(0..n, 0..=3)).prop_map(move |(c, picks)| {
        let mut odd = false;
        let mut s = c;
        for i in picks {
            s.push('*');
            s.push_str(&gens[i].0);
            odd ^= gens[i].1;
        }
        (s, odd)
    })
}

/// A worm of definite parity (`odd`), given as DSL text.
fn homogeneous(level: usize, odd: bool) -> impl Strategy<Value = String> {
    prop::collection::vec(term(level), 1..=3).prop_map(move |terms| {
        let kept: Vec<String> = terms.into_iter().filter(|(_, p)| *p == odd).map(|(s, _)| s).collect();
        match (kept.is_empty(), odd) {
            (false, _) => kept.join(" + "),
            (true, false) => "x*y".to_string(),
            (true, true) => "z*d{1}x".to_string(),
        }
    })
}

fn any_homogeneous(level: usize) -> impl Strategy<Value = (String, bool)> {
    any::<bool>().prop_flat_map(move |odd| homogeneous(level, odd).prop_map(move |s| (s, odd)))
}

fn any_worm(level: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(term(level), 1..=4).prop_map(|t| t.into_iter().map(|(s, _)| s).collect::<Vec<_>>().join(" + "))
}

fn w(c: &Arc<Chart>, s: &str) -> Worm {
    parse_worm(c, s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn sign(odd_u: bool, odd_v: bool) -> i64 {
    if odd_u && odd_v {
        -1
    } else {
        1
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

    #[test]
    fn supercommutativity((u, pu) in any_homogeneous(2), (v, pv) in any_homogeneous(2)) {
        let c = chart(2);
        let (u, v) = (w(&c, &u), w(&c, &v));
        prop_assert!((&u * &v).equals(&(&v * &u).scale_rational(&rat(sign(pu, pv)))));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn leibniz_rule((u, pu) in any_homogeneous(2), v in any_worm(2), a in 1usize..=2) {
        let c = chart(2);
        let (u, v) = (w(&c, &u), w(&c, &v));
        let lhs = lifts::d(a, &(&u * &v)).unwrap();
        let rhs = &(&lifts::d(a, &u).unwrap() * &v) + &(&u * &lifts::d(a, &v).unwrap()).scale_rational(&rat(sign(pu, true)));
        prop_assert!(lhs.equals(&rhs));
    }

    #[test]
    fn associativity(u in any_worm(3), v in any_worm(3), t in any_worm(3)) {
        let c = chart(3);
        let (u, v, t) = (w(&c, &u), w(&c, &v), w(&c, &t));
        prop_assert!((&(&u * &v) * &t).equals(&(&u * &(&v * &t))));
    }

    #[test]
    fn differentials_square_to_zero_and_anticommute(s in any_worm(3), a in 1usize..=3, b in 1usize..=3) {
        let c = chart(3);
        let u = w(&c, &s);
        let ab = lifts::d(a, &lifts::d(b, &u).unwrap()).unwrap();
        let ba = lifts::d(b, &lifts::d(a, &u).unwrap()).unwrap();
        prop_assert!((&ab + &ba).equals(&Worm::zero(&c)));
        if a == b {
            prop_assert!(ab.equals(&Worm::zero(&c)));
        }
    }

    #[test]
    fn mixed_partials_commute(p in coefficient(), q in coefficient()) {
        // the d₁x·d₂y and d₁y·d₂x coefficients of d₁d₂f are both ∂²f/∂x∂y
        let c = chart(2);
        let f = w(&c, &format!("{p}*{q}"));
        let dd = lifts::d(1, &lifts::d(2, &f).unwrap()).unwrap();
        let g = |set: usize, coord: usize| Generator::new(&c, IndexSet::singleton(set), coord).unwrap();
        let (s1, m1) = Monomial::from_sequence(&[g(1, 0), g(2, 1)]).unwrap();
        let (s2, m2) = Monomial::from_sequence(&[g(1, 1), g(2, 0)]).unwrap();
        let lhs = dd.coefficient(&m1).scale(&rat(s1 as i64));
        let rhs = dd.coefficient(&m2).scale(&rat(s2 as i64));
        prop_assert!(worms::expr_equal(&lhs, &rhs));
    }

    #[test]
    fn koszul_sign_matches_bubble_sort(picks in prop::collection::vec(0usize..21, 1..=6)) {
        let c = chart(3);
        let all = Generator::all(&c);
        let seq: Vec<Generator> = picks.iter().map(|&i| all[i]).collect();
        // brute force: bubble sort, counting swaps of two odd generators
        let mut v = seq.clone();
        let mut flips = 0;
        for i in 0..v.len() {
            for j in 0..v.len() - 1 - i {
                if v[j] > v[j + 1] {
                    if v[j].is_odd() && v[j + 1].is_odd() {
                        flips += 1;
                    }
                    v.swap(j, j + 1);
                }
            }
        }
        let repeated_odd = v.windows(2).any(|p| p[0] == p[1] && p[0].is_odd());
        match Monomial::from_sequence(&seq) {
            None => prop_assert!(repeated_odd),
            Some((s, m)) => {
                prop_assert!(!repeated_odd);
                prop_assert_eq!(s, if flips % 2 == 0 { 1 } else { -1 });
                let sorted = m.sequence();
                prop_assert_eq!(sorted, v);
            }
        }
    }

    #[test]
    fn insertion_sign_counts_smaller_indices(bits in 0u8..8, a in 1usize..=3) {
        let set = IndexSet::from_indices(&(1..=3).filter(|i| bits & (1 << (i - 1)) != 0).collect::<Vec<_>>()).unwrap();
        match set.insert(a) {
            None => prop_assert!(set.contains(a)),
            Some((s, out)) => {
                let below = set.elements().iter().filter(|&&i| i < a).count();
                prop_assert_eq!(s, if below % 2 == 0 { 1 } else { -1 });
                prop_assert!(out.contains(a) && out.len() == set.len() + 1);
            }
        }
    }
}

fn map_components(n: usize) -> impl Strategy<Value = Vec<String>> {
    let mono = (-2i32..=2, 0u32..=2, 0u32..=1).prop_map(|(c, a, b)| format!("({c})*s^{a}*t^{b}"));
    prop::collection::vec(prop::collection::vec(mono, 1..=3).prop_map(|m| m.join(" + ")), n)
}

fn substituted(components: &[String], source: &[&str]) -> Vec<String> {
    // rename s,t to the source chart's coordinates
    components.iter().map(|c| c.replace('s', source[0]).replace('t', source[1])).collect()
}

fn smooth_map(source: &Arc<Chart>, target: &Arc<Chart>, comps: &[String]) -> SmoothMap {
    let exprs = comps.iter().map(|c| parse_expr_on(source, c).unwrap()).collect();
    SmoothMap::new(source, target, exprs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn pullback_commutes_with_d(comps in map_components(3), s in any_worm(2), a in 1usize..=2) {
        let src = Chart::new("A", &["p", "q"], 2).unwrap();
        let tgt = chart(2);
        let phi = smooth_map(&src, &tgt, &substituted(&comps, &["p", "q"]));
        let u = w(&tgt, &s);
        let lhs = pullback(&phi, &lifts::d(a, &u).unwrap()).unwrap();
        let rhs = lifts::d(a, &pullback(&phi, &u).unwrap()).unwrap();
        prop_assert!(lhs.equals(&rhs));
    }

    #[test]
    fn pullback_is_functorial(first in map_components(3), second in map_components(3), s in any_worm(2)) {
        let a = Chart::new("A", &["p", "q"], 2).unwrap();
        let b = chart(2);
        let c = Chart::new("C", &["x", "y", "z"], 2).unwrap();
        let phi = smooth_map(&a, &b, &substituted(&first, &["p", "q"]));
        let psi = smooth_map(&b, &c, &substituted(&second, &["x", "y"]));
        let u = w(&c, &s);
        let composite = pullback(&phi.then(&psi).unwrap(), &u).unwrap();
        let stepwise = pullback(&phi, &pullback(&psi, &u).unwrap()).unwrap();
        prop_assert!(composite.equals(&stepwise));
    }

    #[test]
    fn pullback_is_multiplicative(comps in map_components(3), u in any_worm(2), v in any_worm(2)) {
        let src = Chart::new("A", &["p", "q"], 2).unwrap();
        let tgt = chart(2);
        let phi = smooth_map(&src, &tgt, &substituted(&comps, &["p", "q"]));
        let (u, v) = (w(&tgt, &u), w(&tgt, &v));
        let lhs = pullback(&phi, &(&u * &v)).unwrap();
        let rhs = &pullback(&phi, &u).unwrap() * &pullback(&phi, &v).unwrap();
        prop_assert!(lhs.equals(&rhs));
    }
}

fn odd_field_term(k: usize, odd: bool) -> impl Strategy<Value = OddVectorField> {
    let sizes: Vec<usize> = (0..=k).filter(|s| (s % 2 == 1) != odd).collect();
    (prop::sample::select(sizes), -2i64..=2, 1..=k, Just(k)).prop_flat_map(|(size, c, a, k)| {
        prop::sample::subsequence((1..=k).collect::<Vec<_>>(), size)
            .prop_map(move |thetas| OddVectorField::term(k, rat(c), &thetas, a).unwrap())
    })
}

fn field(k: usize, odd: bool) -> impl Strategy<Value = OddVectorField> {
    prop::collection::vec(odd_field_term(k, odd), 1..=3)
        .prop_map(move |ts| ts.iter().fold(OddVectorField::zero(k), |acc, t| acc.plus(t)))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 60, ..ProptestConfig::default() })]

    #[test]
    fn lift_is_a_bracket_homomorphism(
        (u, v) in (any::<bool>(), any::<bool>()).prop_flat_map(|(pu, pv)| (field(2, pu), field(2, pv))),
        s in any_worm(2),
    ) {
        let c = chart(2);
        let lhs = Operator::commutator(Operator::Lift(u.clone()), Operator::Lift(v.clone()));
        let rhs = Operator::Lift(u.bracket(&v).unwrap());
        prop_assert!(lifts::operators_agree(&lhs, &rhs, &c, &[w(&c, &s)]).unwrap());
    }
}
