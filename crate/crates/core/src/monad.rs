//! The monad `T = a* a_*` of an adjunction, its algebras, the comparison
//! functor into algebras and the splitting of unital algebras.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coeff::{split_idempotent, CoeffKind, CoeffMorphism};
use crate::error::{Error, Result};
use crate::fibration::{
    hom_reps, is_fully_faithful, linear_combination, solve_in_span, Adjunction, RepMorphism, Representation,
};
use crate::presheaf::PresheafMorphism;

pub struct MonadInstance {
    adj: Arc<Adjunction>,
}

impl MonadInstance {
    pub fn new(a: &PresheafMorphism) -> Self {
        MonadInstance {
            adj: Arc::new(Adjunction::new(a)),
        }
    }

    pub fn from_adjunction(adj: Arc<Adjunction>) -> Self {
        MonadInstance { adj }
    }

    pub fn adjunction(&self) -> &Arc<Adjunction> {
        &self.adj
    }

    /// `T M = a* a_* M`.
    pub fn apply(&self, m: &Arc<Representation>) -> Result<Arc<Representation>> {
        self.adj.pullback(&*self.adj.push(m)?)
    }

    pub fn apply_mor(&self, f: &RepMorphism) -> Result<RepMorphism> {
        self.adj.pullback_mor(&self.adj.push_mor(f)?)
    }

    pub fn unit(&self, m: &Arc<Representation>) -> Result<RepMorphism> {
        self.adj.unit(m)
    }

    /// `μ_M = a* ε_{a_* M}: T T M -> T M`.
    pub fn mu(&self, m: &Arc<Representation>) -> Result<RepMorphism> {
        let pushed = self.adj.push(m)?;
        self.adj.pullback_mor(&self.adj.counit(&pushed)?)
    }

    /// Names of the monad laws that fail at `m`.
    pub fn check_monad_laws(&self, m: &Arc<Representation>) -> Result<Vec<&'static str>> {
        let mu = self.mu(m)?;
        let tm = self.apply(m)?;
        let mut failed = Vec::new();
        if mu.compose(&self.apply_mor(&mu)?)? != mu.compose(&self.mu(&tm)?)? {
            failed.push("mu . T mu = mu . mu T");
        }
        if !mu.compose(&self.unit(&tm)?)?.is_identity() {
            failed.push("mu . eta T = id");
        }
        if !mu.compose(&self.apply_mor(&self.unit(m)?)?)?.is_identity() {
            failed.push("mu . T eta = id");
        }
        Ok(failed)
    }

    /// Whether `μ` is natural along `f`.
    pub fn mu_is_natural(&self, f: &RepMorphism) -> Result<bool> {
        let tf = self.apply_mor(f)?;
        let lhs = tf.compose(&self.mu(&f.source)?)?;
        let rhs = self.mu(&f.target)?.compose(&self.apply_mor(&tf)?)?;
        Ok(lhs == rhs)
    }
}

/// A carrier with a candidate action `φ: T M -> M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraCandidate {
    pub carrier: Arc<Representation>,
    pub action: RepMorphism,
}

impl AlgebraCandidate {
    pub fn new(t: &MonadInstance, carrier: Arc<Representation>, action: RepMorphism) -> Result<Self> {
        if action.source != t.apply(&carrier)? || action.target != carrier {
            return Err(Error::Structural("action is not a map T M -> M".into()));
        }
        Ok(AlgebraCandidate { carrier, action })
    }
}

/// `φ ∘ T φ = φ ∘ μ_M`.
pub fn check_associative(t: &MonadInstance, cand: &AlgebraCandidate) -> Result<bool> {
    let phi = &cand.action;
    Ok(phi.compose(&t.apply_mor(phi)?)? == phi.compose(&t.mu(&cand.carrier)?)?)
}

/// `φ ∘ η_M = id`.
pub fn check_unital(t: &MonadInstance, cand: &AlgebraCandidate) -> Result<bool> {
    Ok(cand.action.compose(&t.unit(&cand.carrier)?)?.is_identity())
}

/// The free-forgetful comparison: `(a* M₀, a* ε_{M₀})`.
pub fn comparison_ka(t: &MonadInstance, m0: &Arc<Representation>) -> Result<AlgebraCandidate> {
    let adj = t.adjunction();
    Ok(AlgebraCandidate {
        carrier: adj.pullback(m0)?,
        action: adj.pullback_mor(&adj.counit(m0)?)?,
    })
}

/// The comparison functor on morphisms: `a* g`.
pub fn comparison_ka_mor(t: &MonadInstance, g: &RepMorphism) -> Result<RepMorphism> {
    t.adjunction().pullback_mor(g)
}

/// Every algebra candidate `T M -> M`: all of them (Set) or a basis of the
/// linear space of candidate actions (Vect).
pub fn algebra_candidates(t: &MonadInstance, m: &Arc<Representation>, budget: u64) -> Result<Vec<AlgebraCandidate>> {
    let tm = t.apply(m)?;
    Ok(hom_reps(&tm, m, budget)?
        .morphisms()
        .iter()
        .map(|phi| AlgebraCandidate {
            carrier: m.clone(),
            action: phi.clone(),
        })
        .collect())
}

/// Output of [`split_unital_algebra`].
#[derive(Clone, Debug)]
pub struct AlgebraSplitting {
    pub base_rep: Arc<Representation>,
    /// `ν: M -> a* M₀`, an isomorphism.
    pub nu: RepMorphism,
    /// The idempotent on `a_* M` whose image is `M₀`.
    pub lifted_idempotent: RepMorphism,
}

/// Writes a unital action `φ` as `ν⁻¹ ∘ a* ε_{M₀} ∘ T ν` by splitting a
/// lift of the idempotent `η_M ∘ φ`. When `family` is non-empty, full
/// faithfulness of `a*` on it is checked first.
pub fn split_unital_algebra(
    t: &MonadInstance,
    cand: &AlgebraCandidate,
    family: &[Arc<Representation>],
    budget: u64,
) -> Result<AlgebraSplitting> {
    let adj = t.adjunction();
    let m = &cand.carrier;
    if !check_unital(t, cand)? {
        return Err(Error::Precondition("action is not unital".into()));
    }
    if !family.is_empty() && !is_fully_faithful(adj, family, budget)? {
        return Err(Error::Precondition("pullback is not fully faithful on the given family".into()));
    }
    let eta = t.unit(m)?;
    let e = eta.compose(&cand.action)?;
    if e.compose(&e)? != e {
        return Err(Error::Precondition("eta . phi is not idempotent".into()));
    }
    let pushed = adj.push(m)?;
    let homs = hom_reps(&pushed, &pushed, budget)?;
    let lift = match m.kind() {
        CoeffKind::Set => homs
            .morphisms()
            .iter()
            .find(|g| adj.pullback_mor(g).map(|pg| pg == e).unwrap_or(false))
            .cloned(),
        CoeffKind::Vect(field) => {
            let images = homs
                .morphisms()
                .iter()
                .map(|g| adj.pullback_mor(g))
                .collect::<Result<Vec<_>>>()?;
            match solve_in_span(&images, &e, field) {
                Some(c) if !homs.is_empty() => Some(linear_combination(homs.morphisms(), &c)?),
                Some(_) => Some(RepMorphism::zero(pushed.clone(), pushed.clone())?),
                None => None,
            }
        }
    };
    let lift = lift.ok_or_else(|| Error::Precondition("eta . phi has no preimage under pullback".into()))?;
    if lift.compose(&lift)? != lift {
        return Err(Error::Precondition("the lifted idempotent is not idempotent".into()));
    }
    let RepSplit { image: m0, pi, .. } = split_rep_idempotent(&lift)?;
    let nu = adj.pullback_mor(&pi)?.compose(&eta)?;
    let nu_inv = nu
        .inverse()
        .ok_or_else(|| Error::Internal("splitting map nu is not invertible".into()))?;
    let rebuilt = nu_inv
        .compose(&adj.pullback_mor(&adj.counit(&m0)?)?)?
        .compose(&t.apply_mor(&nu)?)?;
    if rebuilt != cand.action {
        return Err(Error::Internal("phi != nu^-1 . a* eps . T nu".into()));
    }
    Ok(AlgebraSplitting {
        base_rep: m0,
        nu,
        lifted_idempotent: lift,
    })
}

/// Splitting `e = ι ∘ π`, `π ∘ ι = id` of an idempotent representation map.
#[derive(Clone, Debug)]
pub struct RepSplit {
    pub image: Arc<Representation>,
    pub iota: RepMorphism,
    pub pi: RepMorphism,
}

/// Splits an idempotent `e: M -> M` pointwise; the images assemble into a
/// representation with restriction maps `π ∘ M(h) ∘ ι`.
pub fn split_rep_idempotent(e: &RepMorphism) -> Result<RepSplit> {
    let m = &e.source;
    if *e.target != **m || e.compose(e)? != *e {
        return Err(Error::Precondition("not an idempotent endomorphism".into()));
    }
    let splits = e
        .components()
        .iter()
        .map(split_idempotent)
        .collect::<Result<Vec<_>>>()?;
    let el = m.base().elements();
    let cat = &*el.category;
    let values = splits.iter().map(|s| s.image).collect();
    let maps = (0..cat.morphism_count())
        .map(|h| {
            let (y, x) = (cat.src(h), cat.tgt(h));
            splits[y].pi.compose(m.map(h))?.compose(&splits[x].iota)
        })
        .collect::<Result<Vec<CoeffMorphism>>>()?;
    let image = Arc::new(Representation::new(m.base().clone(), m.kind(), values, maps)?);
    let iota = RepMorphism::new(image.clone(), m.clone(), splits.iter().map(|s| s.iota.clone()).collect())?;
    let pi = RepMorphism::new(m.clone(), image.clone(), splits.iter().map(|s| s.pi.clone()).collect())?;
    Ok(RepSplit { image, iota, pi })
}

/// One entry of [`ka_essential_surjectivity_check`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitReport {
    pub index: usize,
    pub unital: bool,
    pub associative: bool,
    /// `None` for non-unital candidates.
    pub split: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl SplitReport {
    /// Unital candidates split and are associative.
    pub fn passes(&self) -> bool {
        !self.unital || (self.split == Some(true) && self.associative)
    }
}

/// Splits every unital candidate and checks that it is also associative.
pub fn ka_essential_surjectivity_check(
    t: &MonadInstance,
    algebras: &[AlgebraCandidate],
    family: &[Arc<Representation>],
    budget: u64,
) -> Result<Vec<SplitReport>> {
    algebras
        .iter()
        .enumerate()
        .map(|(index, cand)| {
            let unital = check_unital(t, cand)?;
            let associative = check_associative(t, cand)?;
            let (split, detail) = if unital {
                match split_unital_algebra(t, cand, family, budget) {
                    Ok(_) => (Some(true), None),
                    Err(e) => (Some(false), Some(e.to_string())),
                }
            } else {
                (None, None)
            };
            Ok(SplitReport {
                index,
                unital,
                associative,
                split,
                detail,
            })
        })
        .collect()
}
