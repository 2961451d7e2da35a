mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;

use descent_engine::coeff::CoeffKind;
use descent_engine::descent::{DescentContext, InverseMode, InverseOutcome};
use descent_engine::fibration::{hom_reps, RepMorphism, Representation};
use descent_engine::fincat::FinCategory;
use descent_engine::monad::{check_associative, comparison_ka, AlgebraCandidate};
use descent_engine::presheaf::canonical_shape;
use descent_engine::random::{random_rep, Knobs};

const BUDGET: u64 = 200_000;
const SAMPLE: usize = 6;

fn homs(m: &Arc<Representation>, n: &Arc<Representation>) -> Vec<RepMorphism> {
    hom_reps(m, n, BUDGET).unwrap().morphisms().iter().take(SAMPLE).cloned().collect()
}

/// The canonical descent context of a small random cover, or `None` when
/// the cover is too large for exhaustive checks.
fn context(cat: &Arc<FinCategory>, seed: u64, knobs: Knobs) -> Option<(DescentContext, ChaCha8Rng)> {
    let (a, r) = common::arrow(cat, seed, knobs);
    if a.source.total_size() > 5 {
        return None;
    }
    Some((DescentContext::new(canonical_shape(&a).unwrap()).unwrap(), r))
}

fn rep(ctx: &DescentContext, kind: CoeffKind, r: &mut ChaCha8Rng) -> Arc<Representation> {
    Arc::new(random_rep(ctx.shape().cover(), kind, r, common::knobs_small()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The two constructions of the datum map agree, and pulling the datum
    /// back along the diagonal gives `φ ∘ η`.
    #[test]
    fn xi_agrees_with_its_definition(cat in common::category(), seed in any::<u64>(), kind in common::kind(), knobs in common::knobs()) {
        let Some((ctx, mut r)) = context(&cat, seed, knobs) else { return Ok(()) };
        let m = rep(&ctx, kind, &mut r);
        let n = rep(&ctx, kind, &mut r);
        let tm = ctx.monad().apply(&m).unwrap();
        for target in [&m, &n] {
            for phi in homs(&tm, target) {
                prop_assert_eq!(ctx.xi(&m, &phi).unwrap(), ctx.xi_via_definition(&m, &phi).unwrap());
                prop_assert!(ctx.check_diagonal_unit(&m, &phi).unwrap());
            }
        }
    }

    #[test]
    fn outer_face_is_rho_after_multiplication(
        cat in common::category(),
        seed in any::<u64>(),
        kind in common::kind(),
        knobs in common::knobs(),
    ) {
        let Some((ctx, mut r)) = context(&cat, seed, knobs) else { return Ok(()) };
        let m = rep(&ctx, kind, &mut r);
        prop_assert!(ctx.check_l1_diagram(&m).unwrap());
        let tm = ctx.monad().apply(&m).unwrap();
        for phi in homs(&tm, &m) {
            prop_assert!(ctx.check_outer_face(&m, &phi).unwrap());
        }
    }

    #[test]
    fn faces_compose(cat in common::category(), seed in any::<u64>(), kind in common::kind(), knobs in common::knobs()) {
        let Some((ctx, mut r)) = context(&cat, seed, knobs) else { return Ok(()) };
        let m = rep(&ctx, kind, &mut r);
        let mid = rep(&ctx, kind, &mut r);
        let n = rep(&ctx, kind, &mut r);
        let t = ctx.monad();
        for phi12 in homs(&t.apply(&m).unwrap(), &mid).into_iter().take(3) {
            for phi23 in homs(&t.apply(&mid).unwrap(), &n).into_iter().take(3) {
                prop_assert!(ctx.check_face_composition(&m, &phi12, &mid, &phi23).unwrap());
            }
        }
    }

    /// Comparison algebras give descent data whose induced actions are
    /// recovered from maps into the pullback.
    #[test]
    fn comparison_algebras_give_descent_data(
        cat in common::category(),
        seed in any::<u64>(),
        kind in common::kind(),
        knobs in common::knobs(),
    ) {
        let Some((ctx, mut r)) = context(&cat, seed, knobs) else { return Ok(()) };
        let m0 = Arc::new(random_rep(ctx.shape().base(), kind, &mut r, common::knobs_small()));
        prop_assert!(ctx.check_comparison_datum(&m0).unwrap());
        let alg = comparison_ka(ctx.monad(), &m0).unwrap();
        let d = ctx.algebra_to_descent(&alg).unwrap();
        prop_assert!(ctx.descent_check(&d).unwrap());
        prop_assert!(ctx.p41_check(&d).unwrap().passes());
        let m = rep(&ctx, kind, &mut r);
        let (checked, failed) = ctx.lemma_l3_check(&m, &m0, BUDGET).unwrap();
        prop_assert_eq!(failed, 0, "{} checked", checked);
    }

    /// With an invertible exchange map the datum map is inverted exactly,
    /// and associative actions satisfy the invertibility criterion.
    #[test]
    fn round_trip_through_data(cat in common::category(), seed in any::<u64>(), kind in common::kind(), knobs in common::knobs()) {
        let Some((ctx, mut r)) = context(&cat, seed, knobs) else { return Ok(()) };
        let m = rep(&ctx, kind, &mut r);
        let chi = ctx.chi(&m).unwrap();
        let tm = ctx.monad().apply(&m).unwrap();
        let injective = ctx.xi_injective(&m, BUDGET).unwrap();
        if chi.is_epi() {
            prop_assert!(injective);
        }
        for phi in homs(&tm, &m) {
            let cand = AlgebraCandidate { carrier: m.clone(), action: phi.clone() };
            let d = ctx.algebra_to_descent(&cand).unwrap();
            if chi.is_iso() {
                let back = ctx.descent_to_algebra(&d, InverseMode::Exact, BUDGET).unwrap();
                prop_assert_eq!(back, InverseOutcome::Found(cand.clone()));
            }
            if injective {
                let back = ctx.descent_to_algebra(&d, InverseMode::Search, BUDGET).unwrap();
                prop_assert_eq!(back, InverseOutcome::Found(cand.clone()));
            }
            if check_associative(ctx.monad(), &cand).unwrap() {
                prop_assert!(ctx.p41_check(&d).unwrap().passes());
            }
        }
    }
}
