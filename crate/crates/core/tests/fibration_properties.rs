mod common;

use std::sync::Arc;

use proptest::prelude::*;

use descent_engine::fibration::{
    hom_reps, is_cartesian, is_cocartesian, postcomposition_bijective, precomposition_bijective, pullback_mor,
    pullback_rep, retraction_r, verify_adjunction, Adjunction, RepMorphism, Representation, TotalArrow,
};
use descent_engine::random::{random_arrow_into, random_rep};

const BUDGET: u64 = 200_000;
const SAMPLE: usize = 6;

fn homs(m: &Arc<Representation>, n: &Arc<Representation>) -> Vec<RepMorphism> {
    hom_reps(m, n, BUDGET).unwrap().morphisms().iter().take(SAMPLE).cloned().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Pullback along a composite is the composite of pullbacks, on the
    /// nose, for objects and for morphisms.
    #[test]
    fn pullback_is_strict(cat in common::category(), seed in any::<u64>(), kind in common::kind()) {
        let knobs = common::knobs_small();
        let (a, mut r) = common::arrow(&cat, seed, knobs);
        let b = random_arrow_into(&a.source, &mut r, knobs);
        let ab = a.compose(&b).unwrap();
        let ms = common::reps(&a.target, kind, &mut r, 2);
        for m in &ms {
            let once = pullback_rep(&ab, m).unwrap();
            let twice = pullback_rep(&b, &pullback_rep(&a, m).unwrap()).unwrap();
            prop_assert_eq!(&once, &twice);
            prop_assert!(once.check().is_empty());
        }
        for f in homs(&ms[0], &ms[1]) {
            let once = pullback_mor(&ab, &f).unwrap();
            let twice = pullback_mor(&b, &pullback_mor(&a, &f).unwrap()).unwrap();
            prop_assert_eq!(once, twice);
        }
        let id = RepMorphism::identity(ms[0].clone());
        prop_assert!(pullback_mor(&a, &id).unwrap().is_identity());
    }

    #[test]
    fn triangle_identities_hold(cat in common::category(), seed in any::<u64>(), kind in common::kind()) {
        let knobs = common::knobs_small();
        let (a, mut r) = common::arrow(&cat, seed, knobs);
        let adj = Adjunction::new(&a);
        let cover = common::reps(&a.source, kind, &mut r, 2);
        let base = common::reps(&a.target, kind, &mut r, 2);
        let failures = verify_adjunction(&adj, &cover, &base, BUDGET).unwrap();
        prop_assert!(failures.is_empty(), "{:?}", failures);
    }

    /// Transposition and its inverse undo each other in both directions.
    #[test]
    fn transposition_is_bijective(cat in common::category(), seed in any::<u64>(), kind in common::kind()) {
        let knobs = common::knobs_small();
        let (a, mut r) = common::arrow(&cat, seed, knobs);
        let adj = Adjunction::new(&a);
        let m = Arc::new(random_rep(&a.source, kind, &mut r, knobs));
        let n = Arc::new(random_rep(&a.target, kind, &mut r, knobs));
        let pushed = adj.push(&m).unwrap();
        let pulled = adj.pullback(&n).unwrap();
        for psi in homs(&pushed, &n) {
            let theta = adj.transpose(&m, &psi).unwrap();
            prop_assert_eq!(adj.untranspose(&theta, &n).unwrap(), psi);
        }
        for theta in homs(&m, &pulled) {
            let psi = adj.untranspose(&theta, &n).unwrap();
            prop_assert_eq!(adj.transpose(&m, &psi).unwrap(), theta);
        }
        prop_assert_eq!(hom_reps(&pushed, &n, BUDGET).unwrap().len(), hom_reps(&m, &pulled, BUDGET).unwrap().len());
    }

    #[test]
    fn retraction_undoes_pullback(cat in common::category(), seed in any::<u64>(), kind in common::kind()) {
        let knobs = common::knobs_small();
        let (a, mut r) = common::arrow(&cat, seed, knobs);
        let adj = Adjunction::new(&a);
        let ms = common::reps(&a.source, kind, &mut r, 2);
        let (pm, pn) = (adj.push(&ms[0]).unwrap(), adj.push(&ms[1]).unwrap());
        for g in homs(&pm, &pn) {
            let lifted = adj.pullback_mor(&g).unwrap();
            prop_assert_eq!(retraction_r(&adj, &ms[0], &ms[1], &lifted).unwrap(), g);
        }
    }

    /// Cartesianness read off the transpose agrees with the brute-force
    /// universal property, and likewise for cocartesian arrows.
    #[test]
    fn cartesian_arrows_match_universal_property(
        cat in common::category(),
        seed in any::<u64>(),
        kind in common::kind(),
    ) {
        let knobs = common::knobs_small();
        let (a, mut r) = common::arrow(&cat, seed, knobs);
        let adj = Adjunction::new(&a);
        let m1 = Arc::new(random_rep(&a.source, kind, &mut r, knobs));
        let m0 = Arc::new(random_rep(&a.target, kind, &mut r, knobs));
        let pulled = adj.pullback(&m0).unwrap();
        let pushed = adj.push(&m1).unwrap();
        let mut cart_sources = vec![m1.clone(), pulled.clone()];
        cart_sources.dedup_by(|x, y| x == y);
        for src in cart_sources {
            for cart in homs(&src, &pulled) {
                let t = TotalArrow::from_cart(&adj, m0.clone(), cart.clone()).unwrap();
                prop_assert_eq!(is_cartesian(&t, &adj).unwrap(), postcomposition_bijective(&cart, BUDGET).unwrap());
                let back = TotalArrow::from_cocart(&adj, src.clone(), t.cocart(&adj).unwrap()).unwrap();
                prop_assert_eq!(back.cart(&adj).unwrap(), cart);
            }
        }
        for tgt in [m0.clone(), pushed.clone()] {
            for cocart in homs(&pushed, &tgt) {
                let t = TotalArrow::from_cocart(&adj, m1.clone(), cocart.clone()).unwrap();
                prop_assert_eq!(
                    is_cocartesian(&t, &adj).unwrap(),
                    precomposition_bijective(&cocart, BUDGET).unwrap()
                );
            }
        }
    }
}
