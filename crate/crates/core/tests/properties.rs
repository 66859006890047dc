use anticyclo_core::iwasawa::{FiniteLevelGroup, GroupAlgebraElement};
use anticyclo_core::padic::{q_pow, qi, qr, residue, valuation};
use anticyclo_core::Q;
use proptest::prelude::*;

fn group() -> FiniteLevelGroup {
    FiniteLevelGroup::new(3, 2, 2).unwrap()
}

fn element() -> impl Strategy<Value = GroupAlgebraElement> {
    let g = group();
    prop::collection::vec(-4i64..=4, g.order())
        .prop_map(move |c| GroupAlgebraElement::from_coeffs(g, c.into_iter().map(qi).collect()).unwrap())
}

proptest! {
    #[test]
    fn convolution_is_commutative_and_associative(a in element(), b in element(), c in element()) {
        prop_assert_eq!(a.convolve(&b).unwrap(), b.convolve(&a).unwrap());
        let left = a.convolve(&b).unwrap().convolve(&c).unwrap();
        let right = a.convolve(&b.convolve(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn degree_is_multiplicative(a in element(), b in element()) {
        prop_assert_eq!(a.convolve(&b).unwrap().degree(), a.degree() * b.degree());
    }

    #[test]
    fn pushforward_commutes_with_convolution(a in element(), b in element()) {
        let low = FiniteLevelGroup::new(3, 2, 1).unwrap();
        let lhs = a.convolve(&b).unwrap().pushforward(low).unwrap();
        let rhs = a.pushforward(low).unwrap().convolve(&b.pushforward(low).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn group_index_round_trips(i in 0usize..81) {
        let g = group();
        prop_assert_eq!(g.index(&g.coords(i)), i);
        prop_assert_eq!(g.add(i, g.neg(i)), 0);
    }

    #[test]
    fn valuation_is_additive(a in 1i64..500, b in 1i64..500, j in -5i64..5, k in -5i64..5) {
        let x: Q = q_pow(5, j) * qi(a);
        let y: Q = q_pow(5, k) * qr(1, b);
        prop_assert_eq!(valuation(&(&x * &y), 5).unwrap(), valuation(&x, 5).unwrap() + valuation(&y, 5).unwrap());
    }

    #[test]
    fn residue_is_a_ring_map(a in -1000i64..1000, b in 1i64..1000) {
        prop_assume!(b % 7 != 0);
        let m = 7u128.pow(4);
        let x = qr(a, b);
        let rb = residue(&qi(b), m).unwrap();
        prop_assert_eq!(residue(&x, m).unwrap() * rb % m, residue(&qi(a), m).unwrap());
    }
}
