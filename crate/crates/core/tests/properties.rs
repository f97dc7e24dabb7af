//! Property tests: ring laws for the exact polynomials, round trips for the
//! serialised formats, and kernel bounds on random rational inputs.

use proptest::prelude::*;
use ribbonrec_core::pants::{kernel_b, kernel_c};
use ribbonrec_core::poly::{render_symmetric, Poly, SymMonomial, EXTRA_VARS};
use ribbonrec_core::rational::{rat, Rat};
use ribbonrec_core::ribbon::{enumerate_trivalent, RibbonGraph};

fn arb_rat() -> impl Strategy<Value = Rat> {
    (-40i64..=40, 1i64..=12).prop_map(|(n, d)| rat(n, d))
}

fn arb_poly(n: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(
        (prop::collection::vec(0u32..3, n + EXTRA_VARS), arb_rat()),
        0..6,
    )
    .prop_map(move |terms| {
        let mut p = Poly::zero(n);
        for (exp, c) in terms {
            p.add_term(exp, c);
        }
        p
    })
}

proptest! {
    #[test]
    fn ring_laws(a in arb_poly(2), b in arb_poly(2), c in arb_poly(2)) {
        // associativity and commutativity of both operations, distributivity
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &Poly::zero(2), a.clone());
        prop_assert_eq!(&a * &Poly::one(2), a.clone());
    }

    #[test]
    fn poly_json_roundtrip(p in arb_poly(3)) {
        let back = Poly::from_json(&p.to_json()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn symmetric_render_roundtrip(parts in prop::collection::vec(1u32..4, 0..3), c in arb_rat()) {
        // render o expand is the identity on the m_lambda basis
        let n = 4;
        let lambda = SymMonomial::new(parts);
        if lambda.0.len() > n { return Ok(()); }
        let p = lambda.expand(n).scale(&c);
        let terms = render_symmetric(&p, n).unwrap();
        if c == Rat::new(0.into(), 1.into()) {
            prop_assert!(terms.is_empty());
        } else {
            prop_assert_eq!(terms.len(), 1);
            prop_assert_eq!(&terms[0].lambda, &lambda);
            prop_assert_eq!(&terms[0].coeff, &c);
        }
    }

    #[test]
    fn kernels_bounded(l1 in 1i64..30, l2 in 1i64..30, e1 in 0i64..40, e2 in 0i64..40, d in 1i64..6) {
        let l1 = rat(l1, d);
        let l2 = rat(l2, 1);
        let e1 = rat(e1, d);
        let e2 = rat(e2, 1);
        let b = kernel_b(&l1, &l2, &e1).unwrap();
        let c = kernel_c(&l1, &e1, &e2).unwrap();
        prop_assert!(b >= rat(0, 1) && b <= rat(1, 1));
        prop_assert!(c >= rat(0, 1) && c <= rat(1, 1));
    }
}

#[test]
fn graph_json_roundtrip_all_04() {
    for (graph, _) in enumerate_trivalent(0, 4).unwrap() {
        let back = RibbonGraph::from_json(&graph.to_json()).unwrap();
        assert_eq!(back.canon_key(), graph.canon_key());
        assert_eq!(back.to_json(), graph.to_json());
    }
}
