//! Base change morphisms, descent data and the correspondence between
//! algebras of `T = a* a_*` and descent data along `a`.
//!
//! A commutative square of presheaf morphisms
//!
//! ```text
//!          top
//!     P ---------> Q
//!     |            |
//! left|            |right
//!     v            v
//!     S ---------> T
//!         bottom
//! ```
//!
//! yields `χ_X = ε^{top}_{right* bottom_* X} ∘ top_*(left* η^{bottom}_X)`
//! from `top_* left* X` to `right* bottom_* X`. The exchange square of a
//! shape is `(a₂, a₁, a, a)`; the square `(p₁, p₃, a₁, a₂)` gives `λ`.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coeff::{CoeffKind, Colimit};
use crate::error::{Error, Result};
use crate::fibration::{
    hom_reps, is_cartesian, is_cocartesian, linear_combination, pullback_mor, representables, solve_in_span,
    span_rank, Adjunction, HomSet, RepMorphism, Representation, TotalArrow,
};
use crate::fincat::{FinCategory, MorId, ObjId};
use crate::linalg::Field;
use crate::monad::{check_associative, check_unital, AlgebraCandidate, MonadInstance};
use crate::presheaf::{validate_shape, DescentShape, Presheaf, PresheafMorphism};

/// A commutative square `right ∘ top = bottom ∘ left`, not necessarily
/// cartesian.
#[derive(Clone)]
pub struct BaseChangeSquare {
    pub top: Arc<Adjunction>,
    pub left: Arc<Adjunction>,
    pub right: Arc<Adjunction>,
    pub bottom: Arc<Adjunction>,
}

impl BaseChangeSquare {
    pub fn new(
        top: Arc<Adjunction>,
        left: Arc<Adjunction>,
        right: Arc<Adjunction>,
        bottom: Arc<Adjunction>,
    ) -> Result<Self> {
        let rt = right.arrow().compose(top.arrow())?;
        let bl = bottom.arrow().compose(left.arrow())?;
        if !rt.same_as(&bl) {
            return Err(Error::Precondition("base change square does not commute".into()));
        }
        Ok(BaseChangeSquare {
            top,
            left,
            right,
            bottom,
        })
    }

    /// `χ_X: top_* left* X -> right* bottom_* X` for `X` over `S`.
    pub fn chi(&self, x: &Arc<Representation>) -> Result<RepMorphism> {
        let image = self.bottom.push(x)?;
        let y = self.right.pullback(&image)?;
        let lifted_unit = self.left.pullback_mor(&self.bottom.unit(x)?)?;
        self.top.untranspose(&lifted_unit, &y)
    }
}

/// Pointwise classification of a base change morphism, ordered so that the
/// minimum is the meet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChiStatus {
    Neither,
    EpiOnly,
    Iso,
}

impl ChiStatus {
    pub fn of(f: &RepMorphism) -> Self {
        if f.is_iso() {
            ChiStatus::Iso
        } else if f.is_epi() {
            ChiStatus::EpiOnly
        } else {
            ChiStatus::Neither
        }
    }
}

impl fmt::Display for ChiStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChiStatus::Neither => "neither",
            ChiStatus::EpiOnly => "epi-only",
            ChiStatus::Iso => "iso",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExchangeEntry {
    pub object: String,
    pub status: ChiStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExchangeReport {
    pub entries: Vec<ExchangeEntry>,
    pub overall: ChiStatus,
}

/// Labelled test objects: every representable over `base`.
pub fn representable_objects(base: &Arc<Presheaf>, kind: CoeffKind) -> Vec<(String, Arc<Representation>)> {
    let el = base.elements();
    representables(base, kind)
        .into_iter()
        .enumerate()
        .map(|(o, r)| (format!("y{}", el.category.object_label(o)), r))
        .collect()
}

pub fn exchange_status(sq: &BaseChangeSquare, objects: &[(String, Arc<Representation>)]) -> Result<ExchangeReport> {
    let mut entries = Vec::with_capacity(objects.len());
    for (label, x) in objects {
        entries.push(ExchangeEntry {
            object: label.clone(),
            status: ChiStatus::of(&sq.chi(x)?),
        });
    }
    let overall = entries.iter().map(|e| e.status).min().unwrap_or(ChiStatus::Iso);
    Ok(ExchangeReport { entries, overall })
}

/// Which face of the triple overlap a pulled-back map lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Face {
    F12,
    F13,
    F23,
}

/// A map `v: a₁* M -> a₂* M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreDescentDatum {
    pub carrier: Arc<Representation>,
    pub v: RepMorphism,
}

impl PreDescentDatum {
    pub fn identity(ctx: &DescentContext, carrier: Arc<Representation>) -> Result<Self> {
        let v = RepMorphism::identity(ctx.a1.pullback(&carrier)?);
        if *v.target != *ctx.a2.pullback(&carrier)? {
            return Err(Error::Precondition("a1* M and a2* M differ, no identity datum".into()));
        }
        Ok(PreDescentDatum { carrier, v })
    }
}

/// How [`DescentContext::descent_to_algebra`] inverts `ξ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InverseMode {
    /// `φ = (a₂-untranspose of v) ∘ χ_M⁻¹`; needs `χ_M` invertible.
    Exact,
    /// Search `hom(T M, M)` for the preimage of `v`.
    Search,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InverseOutcome {
    Found(AlgebraCandidate),
    NoPreimage,
    /// Several preimages (Set: their count; Vect: kernel dimension of `ξ`).
    NotUnique(usize),
}

/// Both directions of the invertibility criterion for a pre-descent datum.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct P41Report {
    pub unit_condition: bool,
    pub right_cancellable: bool,
    pub left_cancellable: bool,
    /// `v = a₂* Δ* v ∘ v`, from pulling the cocycle back along `s₁`.
    pub s1_identity: Option<bool>,
    /// `v = v ∘ a₁* Δ* v`, from pulling the cocycle back along `s₂`.
    pub s2_identity: Option<bool>,
    /// Cancellable `v` with `s₁` or `s₂` present: the unit condition holds.
    pub ii_implies_i: Option<bool>,
    /// Unit condition with `σ, Γ` present: `σ* v` is a two-sided inverse.
    pub i_implies_ii: Option<bool>,
}

impl P41Report {
    pub fn passes(&self) -> bool {
        [self.s1_identity, self.s2_identity, self.ii_implies_i, self.i_implies_ii]
            .iter()
            .all(|x| x.unwrap_or(true))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChevalleyWitness {
    pub object: String,
    pub condition: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChevalleyReport {
    /// `χ` invertible on every tested object.
    pub chi_iso: bool,
    pub c_squares: usize,
    pub c_failures: usize,
    pub c_prime_squares: usize,
    pub c_prime_failures: usize,
    /// Generated squares whose defining relation failed to hold.
    pub non_commuting: usize,
    /// Per object: the identity witness squares decide `χ` exactly.
    pub witnesses_decide_chi: bool,
    pub witnesses: Vec<ChevalleyWitness>,
}

impl ChevalleyReport {
    /// Exchange forces (C) and (C'); failing exchange is exhibited.
    pub fn consistent(&self) -> bool {
        self.non_commuting == 0
            && self.witnesses_decide_chi
            && (!self.chi_iso || (self.c_failures == 0 && self.c_prime_failures == 0))
            && (self.chi_iso || !self.witnesses.is_empty())
    }
}

/// Element-level comparison of `T y(c,γ)` and `(a₂)_* a₁* y(c,γ)` with the
/// set of base morphisms `φ: d -> c` with `a(A₁(φ)γ) = a(δ)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosedFormReport {
    pub top: String,
    pub points: usize,
    pub monad_side: bool,
    pub pair_side: bool,
    pub chi_preserves_labels: bool,
}

impl ClosedFormReport {
    pub fn passes(&self) -> bool {
        self.monad_side && self.pair_side && self.chi_preserves_labels
    }
}

/// A validated shape with the adjunctions along all its arrows.
pub struct DescentContext {
    shape: DescentShape,
    pub a: Arc<Adjunction>,
    pub a1: Arc<Adjunction>,
    pub a2: Arc<Adjunction>,
    pub p1: Arc<Adjunction>,
    pub p2: Arc<Adjunction>,
    pub p3: Arc<Adjunction>,
    monad: MonadInstance,
    exchange: BaseChangeSquare,
    lambda: BaseChangeSquare,
}

impl DescentContext {
    pub fn new(shape: DescentShape) -> Result<Self> {
        let violations = validate_shape(&shape)?;
        if !violations.is_empty() {
            let names: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(Error::Precondition(format!("shape violates {}", names.join("; "))));
        }
        let adj = |m: &PresheafMorphism| Arc::new(Adjunction::new(m));
        let (a, a1, a2) = (adj(&shape.a), adj(&shape.a1), adj(&shape.a2));
        let (p1, p2, p3) = (adj(&shape.p1), adj(&shape.p2), adj(&shape.p3));
        let exchange = BaseChangeSquare::new(a2.clone(), a1.clone(), a.clone(), a.clone())?;
        let lambda = BaseChangeSquare::new(p1.clone(), p3.clone(), a1.clone(), a2.clone())?;
        Ok(DescentContext {
            monad: MonadInstance::from_adjunction(a.clone()),
            shape,
            a,
            a1,
            a2,
            p1,
            p2,
            p3,
            exchange,
            lambda,
        })
    }

    pub fn shape(&self) -> &DescentShape {
        &self.shape
    }

    pub fn monad(&self) -> &MonadInstance {
        &self.monad
    }

    pub fn exchange_square(&self) -> &BaseChangeSquare {
        &self.exchange
    }

    pub fn lambda_square(&self) -> &BaseChangeSquare {
        &self.lambda
    }

    /// `χ_M: (a₂)_* a₁* M -> T M`.
    pub fn chi(&self, m: &Arc<Representation>) -> Result<RepMorphism> {
        self.exchange.chi(m)
    }

    /// `λ_X: (p₁)_* p₃* X -> a₁* (a₂)_* X` for `X` over the pairs.
    pub fn lambda(&self, x: &Arc<Representation>) -> Result<RepMorphism> {
        self.lambda.chi(x)
    }

    fn require_action_on(&self, m: &Arc<Representation>, phi: &RepMorphism) -> Result<()> {
        if *phi.source != *self.monad.apply(m)? {
            return Err(Error::Structural("expected a map out of T M".into()));
        }
        Ok(())
    }

    /// `ξ(φ) = a₂* φ ∘ a₁* η_M` for `φ: T M -> N`.
    pub fn xi(&self, m: &Arc<Representation>, phi: &RepMorphism) -> Result<RepMorphism> {
        self.require_action_on(m, phi)?;
        let lifted_unit = self.a1.pullback_mor(&self.a.unit(m)?)?;
        self.a2.pullback_mor(phi)?.compose(&lifted_unit)
    }

    /// `ξ(φ)` as the `a₂`-transpose of `φ ∘ χ_M`.
    pub fn xi_via_definition(&self, m: &Arc<Representation>, phi: &RepMorphism) -> Result<RepMorphism> {
        self.require_action_on(m, phi)?;
        let x = self.a1.pullback(m)?;
        self.a2.transpose(&x, &phi.compose(&self.chi(m)?)?)
    }

    /// `α₁₂ = p₃*`, `α₁₃ = p₂*`, `α₂₃ = p₁*`.
    pub fn alpha(&self, face: Face, w: &RepMorphism) -> Result<RepMorphism> {
        match face {
            Face::F12 => self.p3.pullback_mor(w),
            Face::F13 => self.p2.pullback_mor(w),
            Face::F23 => self.p1.pullback_mor(w),
        }
    }

    pub fn theta(&self, face: Face, m: &Arc<Representation>, phi: &RepMorphism) -> Result<RepMorphism> {
        self.alpha(face, &self.xi(m, phi)?)
    }

    /// `(χ*χ)_M ∘ (a₂)_* λ_{a₁* M}: (a₂)_* (p₁)_* p₃* a₁* M -> T T M`.
    pub fn double_exchange(&self, m: &Arc<Representation>) -> Result<RepMorphism> {
        let x = self.a1.pullback(m)?;
        let pushed_lambda = self.a2.push_mor(&self.lambda(&x)?)?;
        let y = self.a2.push(&x)?;
        let outer = self.monad.apply_mor(&self.chi(m)?)?;
        outer.compose(&self.chi(&y)?)?.compose(&pushed_lambda)
    }

    /// `ρ(ψ): b₁* M -> b₃* N` for `ψ: T T M -> N`, through the transposes
    /// for `a₂` and then `p₁`.
    pub fn rho(&self, m: &Arc<Representation>, psi: &RepMorphism) -> Result<RepMorphism> {
        let tm = self.monad.apply(m)?;
        if *psi.source != *self.monad.apply(&tm)? {
            return Err(Error::Structural("expected a map out of T T M".into()));
        }
        self.rho_with(m, psi, &self.double_exchange(m)?)
    }

    /// [`DescentContext::rho`] with `double_exchange(m)` supplied.
    pub fn rho_with(&self, m: &Arc<Representation>, psi: &RepMorphism, double_exchange: &RepMorphism) -> Result<RepMorphism> {
        self.double_transpose_p1(m, &psi.compose(double_exchange)?)
    }

    fn double_transpose_p1(&self, m: &Arc<Representation>, f: &RepMorphism) -> Result<RepMorphism> {
        let inner = self.p3.pullback(&*self.a1.pullback(m)?)?;
        let w = self.p1.push(&inner)?;
        self.p1.transpose(&inner, &self.a2.transpose(&w, f)?)
    }

    fn double_transpose_p2(&self, m: &Arc<Representation>, f: &RepMorphism) -> Result<RepMorphism> {
        let inner = self.p2.pullback(&*self.a1.pullback(m)?)?;
        let w = self.p2.push(&inner)?;
        self.p2.transpose(&inner, &self.a2.transpose(&w, f)?)
    }

    /// The two composites into `T M` out of the two models of
    /// `(b₃)_* b₁* M` agree after transposing to `b₁* M -> b₃* T M`.
    pub fn check_l1_diagram(&self, m: &Arc<Representation>) -> Result<bool> {
        let via_lambda = self.monad.mu(m)?.compose(&self.double_exchange(m)?)?;
        let x = self.a1.pullback(m)?;
        let via_counit = self.chi(m)?.compose(&self.a2.push_mor(&self.p2.counit(&x)?)?)?;
        Ok(self.double_transpose_p1(m, &via_lambda)? == self.double_transpose_p2(m, &via_counit)?)
    }

    /// `θ₁₃(φ) = ρ(φ ∘ μ_M)`.
    pub fn check_outer_face(&self, m: &Arc<Representation>, phi: &RepMorphism) -> Result<bool> {
        let lhs = self.theta(Face::F13, m, phi)?;
        let rhs = self.rho(m, &phi.compose(&self.monad.mu(m)?)?)?;
        Ok(lhs == rhs)
    }

    /// `ρ(φ₂₃ ∘ T φ₁₂) = θ₂₃(φ₂₃) ∘ θ₁₂(φ₁₂)` for `φ₁₂: T M -> M'` and
    /// `φ₂₃: T M' -> N`.
    pub fn check_face_composition(
        &self,
        m: &Arc<Representation>,
        phi12: &RepMorphism,
        m_mid: &Arc<Representation>,
        phi23: &RepMorphism,
    ) -> Result<bool> {
        let psi = phi23.compose(&self.monad.apply_mor(phi12)?)?;
        let lhs = self.rho(m, &psi)?;
        let rhs = self.theta(Face::F23, m_mid, phi23)?.compose(&self.theta(Face::F12, m, phi12)?)?;
        Ok(lhs == rhs)
    }

    /// `ξ(a* f̂) = a₁* f` for `f: M -> a* M₀` with `a`-untranspose `f̂`.
    pub fn check_induced_action(&self, m: &Arc<Representation>, m0: &Arc<Representation>, f: &RepMorphism) -> Result<bool> {
        let lowered = self.a.untranspose(f, m0)?;
        let lhs = self.xi(m, &self.a.pullback_mor(&lowered)?)?;
        Ok(lhs == self.a1.pullback_mor(f)?)
    }

    /// The induced-action check on every element (Set) or basis element (Vect) of
    /// `hom(M, a* M₀)`; returns `(checked, failed)`.
    pub fn lemma_l3_check(&self, m: &Arc<Representation>, m0: &Arc<Representation>, budget: u64) -> Result<(usize, usize)> {
        let homs = hom_reps(m, &self.a.pullback(m0)?, budget)?;
        let mut failed = 0;
        for f in homs.morphisms() {
            if !self.check_induced_action(m, m0, f)? {
                failed += 1;
            }
        }
        Ok((homs.len(), failed))
    }

    /// `ξ(a* ε_{M₀})` is the identity.
    pub fn check_comparison_datum(&self, m0: &Arc<Representation>) -> Result<bool> {
        let m = self.a.pullback(m0)?;
        let action = self.a.pullback_mor(&self.a.counit(m0)?)?;
        Ok(self.xi(&m, &action)?.is_identity())
    }

    /// `Δ* ξ(φ) = φ ∘ η_M`.
    pub fn check_diagonal_unit(&self, m: &Arc<Representation>, phi: &RepMorphism) -> Result<bool> {
        let delta = self.delta()?;
        let lhs = pullback_mor(delta, &self.xi(m, phi)?)?;
        Ok(lhs == phi.compose(&self.monad.unit(m)?)?)
    }

    fn delta(&self) -> Result<&PresheafMorphism> {
        self.shape
            .delta
            .as_ref()
            .ok_or_else(|| Error::Precondition("shape has no diagonal".into()))
    }

    fn check_datum(&self, d: &PreDescentDatum) -> Result<()> {
        if *d.v.source != *self.a1.pullback(&d.carrier)? || *d.v.target != *self.a2.pullback(&d.carrier)? {
            return Err(Error::Structural("datum is not a map a1* M -> a2* M".into()));
        }
        Ok(())
    }

    /// Cocycle condition `p₂* v = p₁* v ∘ p₃* v`.
    pub fn predescent_check(&self, d: &PreDescentDatum) -> Result<bool> {
        self.check_datum(d)?;
        let rhs = self.p1.pullback_mor(&d.v)?.compose(&self.p3.pullback_mor(&d.v)?)?;
        Ok(self.p2.pullback_mor(&d.v)? == rhs)
    }

    /// Unit condition `Δ* v = id`.
    pub fn unit_check(&self, d: &PreDescentDatum) -> Result<bool> {
        self.check_datum(d)?;
        Ok(pullback_mor(self.delta()?, &d.v)?.is_identity())
    }

    /// Cocycle and unit conditions.
    pub fn descent_check(&self, d: &PreDescentDatum) -> Result<bool> {
        let unit = self.unit_check(d)?;
        Ok(unit && self.predescent_check(d)?)
    }

    /// `ξ(φ)` as a datum, asserting the identities guaranteed for
    /// associative and unital actions.
    pub fn algebra_to_descent(&self, cand: &AlgebraCandidate) -> Result<PreDescentDatum> {
        let m = &cand.carrier;
        let v = self.xi(m, &cand.action)?;
        let datum = PreDescentDatum {
            carrier: m.clone(),
            v,
        };
        if self.shape.delta.is_some() && !self.check_diagonal_unit(m, &cand.action)? {
            return Err(Error::Internal("delta* xi(phi) != phi . eta".into()));
        }
        if check_associative(&self.monad, cand)? {
            if !self.predescent_check(&datum)? {
                return Err(Error::Internal("associative action gave a non-cocycle".into()));
            }
            if self.shape.delta.is_some() && check_unital(&self.monad, cand)? && !self.descent_check(&datum)? {
                return Err(Error::Internal("algebra gave a datum without the unit condition".into()));
            }
        }
        Ok(datum)
    }

    /// Preimage of a datum under `ξ`.
    pub fn descent_to_algebra(&self, d: &PreDescentDatum, mode: InverseMode, budget: u64) -> Result<InverseOutcome> {
        self.check_datum(d)?;
        let m = &d.carrier;
        let tm = self.monad.apply(m)?;
        let found = |action: RepMorphism| -> Result<InverseOutcome> {
            let cand = AlgebraCandidate {
                carrier: m.clone(),
                action,
            };
            if self.xi(m, &cand.action)? != d.v {
                return Err(Error::Internal("recovered action does not map back to the datum".into()));
            }
            if self.shape.delta.is_some() && self.descent_check(d)? {
                let ok = check_unital(&self.monad, &cand)? && check_associative(&self.monad, &cand)?;
                if !ok {
                    return Err(Error::Internal("descent datum recovered a non-algebra".into()));
                }
            }
            Ok(InverseOutcome::Found(cand))
        };
        match mode {
            InverseMode::Exact => {
                let chi_inv = self
                    .chi(m)?
                    .inverse()
                    .ok_or_else(|| Error::Precondition("exchange morphism is not invertible at M".into()))?;
                found(self.a2.untranspose(&d.v, m)?.compose(&chi_inv)?)
            }
            InverseMode::Search => match hom_reps(&tm, m, budget)? {
                HomSet::All(all) => {
                    let hits: Vec<RepMorphism> = all
                        .into_iter()
                        .filter_map(|phi| match self.xi(m, &phi) {
                            Ok(v) if v == d.v => Some(Ok(phi)),
                            Ok(_) => None,
                            Err(e) => Some(Err(e)),
                        })
                        .collect::<Result<_>>()?;
                    match hits.len() {
                        0 => Ok(InverseOutcome::NoPreimage),
                        1 => found(hits.into_iter().next().expect("one hit")),
                        n => Ok(InverseOutcome::NotUnique(n)),
                    }
                }
                HomSet::Basis(basis) => {
                    let field = field_of(m)?;
                    let images = basis.iter().map(|b| self.xi(m, b)).collect::<Result<Vec<_>>>()?;
                    let rank = span_rank(&images, field);
                    if rank < basis.len() {
                        return Ok(InverseOutcome::NotUnique(basis.len() - rank));
                    }
                    match solve_in_span(&images, &d.v, field) {
                        None => Ok(InverseOutcome::NoPreimage),
                        Some(_) if basis.is_empty() => found(RepMorphism::zero(tm, m.clone())?),
                        Some(c) => found(linear_combination(&basis, &c)?),
                    }
                }
            },
        }
    }

    /// Whether `ξ` is injective on `hom(T M, M)`.
    pub fn xi_injective(&self, m: &Arc<Representation>, budget: u64) -> Result<bool> {
        let tm = self.monad.apply(m)?;
        match hom_reps(&tm, m, budget)? {
            HomSet::All(all) => {
                let images = all.iter().map(|phi| self.xi(m, phi)).collect::<Result<Vec<_>>>()?;
                Ok(images.iter().collect::<HashSet<_>>().len() == images.len())
            }
            HomSet::Basis(basis) => {
                let images = basis.iter().map(|b| self.xi(m, b)).collect::<Result<Vec<_>>>()?;
                Ok(span_rank(&images, field_of(m)?) == basis.len())
            }
        }
    }

    /// Both directions of the invertibility criterion for a cocycle `v`.
    pub fn p41_check(&self, d: &PreDescentDatum) -> Result<P41Report> {
        if !self.predescent_check(d)? {
            return Err(Error::Precondition("datum is not a cocycle".into()));
        }
        let delta = self.delta()?;
        let v = &d.v;
        let dv = pullback_mor(delta, v)?;
        let mut r = P41Report {
            unit_condition: dv.is_identity(),
            right_cancellable: v.is_epi(),
            left_cancellable: v.is_mono(),
            ..P41Report::default()
        };
        if let Some(s1) = &self.shape.s1 {
            let pulled = pullback_mor(s1, &self.p1.pullback_mor(v)?)?;
            let via_delta = self.a2.pullback_mor(&dv)?;
            let lhs = pullback_mor(s1, &self.p2.pullback_mor(v)?)?;
            r.s1_identity = Some(pulled == via_delta && lhs == *v && via_delta.compose(v)? == *v);
        }
        if let Some(s2) = &self.shape.s2 {
            let pulled = pullback_mor(s2, &self.p3.pullback_mor(v)?)?;
            let via_delta = self.a1.pullback_mor(&dv)?;
            r.s2_identity = Some(pulled == via_delta && v.compose(&via_delta)? == *v);
        }
        let cancellable =
            (r.right_cancellable && self.shape.s1.is_some()) || (r.left_cancellable && self.shape.s2.is_some());
        if cancellable {
            r.ii_implies_i = Some(r.unit_condition);
        }
        if let (true, Some(sigma), Some(_)) = (r.unit_condition, &self.shape.sigma, &self.shape.gamma) {
            let w = pullback_mor(sigma, v)?;
            let ok = match (w.compose(v), v.compose(&w)) {
                (Ok(l), Ok(rr)) => l.is_identity() && rr.is_identity(),
                _ => false,
            };
            r.i_implies_ii = Some(ok);
        }
        Ok(r)
    }

    /// Squares (C) and (C') generated from each test object `M'₀` over the
    /// cover and the given automorphism samples; see [`ChevalleyReport`].
    pub fn chevalley_check(&self, objects: &[(String, Arc<Representation>)], budget: u64) -> Result<ChevalleyReport> {
        let mut report = ChevalleyReport {
            chi_iso: true,
            witnesses_decide_chi: true,
            ..ChevalleyReport::default()
        };
        for (label, m0p) in objects {
            let c = self.chi(m0p)?;
            let iso = c.is_iso();
            report.chi_iso &= iso;
            let m1p = self.a1.pullback(m0p)?;
            let m0 = self.a.push(m0p)?;
            let chi_tilde_primes = automorphisms(&m1p, budget)?;
            let k0_tildes = automorphisms(&m0, budget)?;
            let gammas = automorphisms(&self.a.pullback(&m0)?, budget)?;
            let pushed_m1p = self.a2.push(&m1p)?;
            let kappas = automorphisms(&pushed_m1p, budget)?;
            for (si, alpha) in chi_tilde_primes.iter().enumerate() {
                for (sj, beta) in k0_tildes.iter().enumerate() {
                    let core = self
                        .a
                        .pullback_mor(beta)?
                        .compose(&c)?
                        .compose(&self.a2.push_mor(alpha)?)?;
                    for (sk, gamma) in gammas.iter().enumerate() {
                        let k1 = gamma.inverse().expect("automorphism").compose(&core)?;
                        let sq = self.chevalley_square(m0p, &m1p, alpha, beta, gamma.clone(), k1)?;
                        report.c_squares += 1;
                        report.non_commuting += usize::from(!sq.commutes);
                        let premises = sq.k0_cocart && sq.chi_cart && sq.chi_prime_cart;
                        if premises && !sq.k1_cocart {
                            report.c_failures += 1;
                            if (si, sj, sk) == (0, 0, 0) {
                                report.witnesses.push(ChevalleyWitness {
                                    object: label.clone(),
                                    condition: "C".into(),
                                    detail: "identity square: k1 is not cocartesian".into(),
                                });
                            }
                        }
                        if (si, sj, sk) == (0, 0, 0) && sq.k1_cocart != iso {
                            report.witnesses_decide_chi = false;
                        }
                    }
                    for (sk, kappa) in kappas.iter().enumerate() {
                        let chi_t = core.compose(&kappa.inverse().expect("automorphism"))?;
                        let sq = self.chevalley_square(m0p, &m1p, alpha, beta, chi_t, kappa.clone())?;
                        report.c_prime_squares += 1;
                        report.non_commuting += usize::from(!sq.commutes);
                        let premises = sq.k0_cocart && sq.k1_cocart && sq.chi_prime_cart;
                        if premises && !sq.chi_cart {
                            report.c_prime_failures += 1;
                            if (si, sj, sk) == (0, 0, 0) {
                                report.witnesses.push(ChevalleyWitness {
                                    object: label.clone(),
                                    condition: "C'".into(),
                                    detail: "identity square: chi is not cartesian".into(),
                                });
                            }
                        }
                        if (si, sj, sk) == (0, 0, 0) && sq.chi_cart != iso {
                            report.witnesses_decide_chi = false;
                        }
                    }
                }
            }
        }
        Ok(report)
    }

    /// Packs the four tilde maps as total arrows and evaluates the square
    /// relation `a* k̃₀ ∘ χ ∘ (a₂)_* χ̃' = χ̃ ∘ k̃₁`.
    fn chevalley_square(
        &self,
        m0p: &Arc<Representation>,
        m1p: &Arc<Representation>,
        chi_tilde_prime: &RepMorphism,
        k0_tilde: &RepMorphism,
        chi_tilde: RepMorphism,
        k1_tilde: RepMorphism,
    ) -> Result<SquareFlags> {
        let chi_prime = TotalArrow::from_cart(&self.a1, m0p.clone(), chi_tilde_prime.clone())?;
        let k0 = TotalArrow::from_cocart(&self.a, m0p.clone(), k0_tilde.clone())?;
        let chi = TotalArrow::from_cart(&self.a, k0.target.clone(), chi_tilde)?;
        let k1 = TotalArrow::from_cocart(&self.a2, m1p.clone(), k1_tilde)?;
        let lhs = self
            .a
            .pullback_mor(&k0.cocart(&self.a)?)?
            .compose(&self.chi(m0p)?)?
            .compose(&self.a2.push_mor(&chi_prime.cart(&self.a1)?)?)?;
        let rhs = chi.cart(&self.a)?.compose(&k1.cocart(&self.a2)?)?;
        Ok(SquareFlags {
            commutes: lhs == rhs,
            k0_cocart: is_cocartesian(&k0, &self.a)?,
            k1_cocart: is_cocartesian(&k1, &self.a2)?,
            chi_cart: is_cartesian(&chi, &self.a)?,
            chi_prime_cart: is_cartesian(&chi_prime, &self.a1)?,
        })
    }

    /// Labels every element of `T y(o)` and `(a₂)_* a₁* y(o)` at each cover
    /// element `(d,δ)` by a base morphism `d -> c` and compares with the
    /// closed form `{φ ∈ 𝒜(d,c) | a(A₁(φ)γ) = a(δ)}`.
    pub fn closed_form_check(&self, top: ObjId) -> Result<ClosedFormReport> {
        let cover = self.shape.cover();
        let el1 = cover.elements();
        let cat1 = &*el1.category;
        let base = &**cover.base();
        let (c, gamma) = el1.objects[top];
        let y = Arc::new(Representation::representable(cover.clone(), top, CoeffKind::Set));
        let monad_image = self.a.direct_image(&y)?;
        let x = self.a1.pullback(&y)?;
        let pair_image = self.a2.direct_image(&x)?;
        let chi = self.chi(&y)?;
        let a0 = &self.shape.a;
        let el0 = self.shape.base().elements();
        let f1 = self.shape.a1.elements_functor();
        let f_a = a0.elements_functor();
        let mut report = ClosedFormReport {
            top: cat1.object_label(top).to_string(),
            points: 0,
            monad_side: true,
            pair_side: true,
            chi_preserves_labels: true,
        };
        for p in 0..cat1.object_count() {
            let (d, delta) = el1.objects[p];
            let expected: Vec<usize> = base
                .hom(d, c)
                .into_iter()
                .filter(|&phi| a0.apply(d, cover.restrict(phi, gamma)) == a0.apply(d, delta))
                .collect();
            report.points += expected.len();
            // T y at (d,δ) is a_* y at (d, a(δ)).
            let z = f_a.obj(p);
            let monad_labels = label_classes(
                monad_image.colimit(z),
                self.a.comma_objects(z),
                |x| cat1.hom(x, top).into_iter().map(|e| el1.morphisms[e].0).collect(),
                |u| el0.morphisms[u].0,
                base,
            );
            let pair_labels = label_classes(
                pair_image.colimit(p),
                self.a2.comma_objects(p),
                |x| cat1.hom(f1.obj(x), top).into_iter().map(|e| el1.morphisms[e].0).collect(),
                |u| el1.morphisms[u].0,
                base,
            );
            report.monad_side &= matches_closed_form(&monad_labels, &expected);
            report.pair_side &= matches_closed_form(&pair_labels, &expected);
            if let (Some(ml), Some(pl)) = (&monad_labels, &pair_labels) {
                let map = chi.component(p).as_set_map().expect("set-valued");
                for (cls, label) in pl.iter().enumerate() {
                    if ml.get(map[cls]) != Some(label) {
                        report.chi_preserves_labels = false;
                    }
                }
            } else {
                report.chi_preserves_labels = false;
            }
        }
        Ok(report)
    }
}

struct SquareFlags {
    commutes: bool,
    k0_cocart: bool,
    k1_cocart: bool,
    chi_cart: bool,
    chi_prime_cart: bool,
}

/// Label of each colimit class, or `None` if some class receives two labels
/// or none.
fn label_classes(
    colimit: &Colimit,
    comma: &[(ObjId, MorId)],
    element_bases: impl Fn(ObjId) -> Vec<MorId>,
    comma_base: impl Fn(MorId) -> MorId,
    base: &FinCategory,
) -> Option<Vec<MorId>> {
    let mut labels: Vec<Option<MorId>> = vec![None; colimit.object.size()];
    for (i, &(x, u)) in comma.iter().enumerate() {
        let leg = colimit.cocone[i].as_set_map().expect("set-valued");
        let u_base = comma_base(u);
        for (k, e_base) in element_bases(x).into_iter().enumerate() {
            let label = base.comp(e_base, u_base);
            match labels[leg[k]] {
                None => labels[leg[k]] = Some(label),
                Some(l) if l == label => {}
                Some(_) => return None,
            }
        }
    }
    labels.into_iter().collect()
}

fn matches_closed_form(labels: &Option<Vec<MorId>>, expected: &[MorId]) -> bool {
    let Some(labels) = labels else { return false };
    let mut sorted = labels.clone();
    sorted.sort_unstable();
    let distinct = sorted.windows(2).all(|w| w[0] != w[1]);
    distinct && sorted == expected
}

fn field_of(m: &Representation) -> Result<Field> {
    match m.kind() {
        CoeffKind::Vect(f) => Ok(f),
        CoeffKind::Set => Err(Error::KindMismatch("expected a linear representation".into())),
    }
}

/// A small deterministic sample of automorphisms of `x`, identity first:
/// up to three further invertible elements of `hom(x, x)` (Set), or
/// invertible scalar multiples and an invertible combination of basis
/// elements (Vect).
pub fn automorphisms(x: &Arc<Representation>, budget: u64) -> Result<Vec<RepMorphism>> {
    let id = RepMorphism::identity(x.clone());
    let mut out = vec![id.clone()];
    match x.kind() {
        CoeffKind::Set => {
            let homs = match hom_reps(x, x, budget) {
                Ok(h) => h,
                Err(Error::TooLarge { .. }) => return Ok(out),
                Err(e) => return Err(e),
            };
            out.extend(
                homs.morphisms()
                    .iter()
                    .filter(|f| f.is_iso() && !f.is_identity())
                    .take(3)
                    .cloned(),
            );
        }
        CoeffKind::Vect(field) => {
            let two = field.from_i64(2);
            if field.order() != Some(2) {
                out.push(id.scale(&two)?);
            }
            let basis = hom_reps(x, x, budget)?;
            if !basis.is_empty() {
                let ones = vec![field.one(); basis.len()];
                let sum = linear_combination(basis.morphisms(), &ones)?;
                if sum.is_iso() && !out.contains(&sum) {
                    out.push(sum);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoeffObject;
    use crate::presheaf::canonical_shape;

    fn point() -> Arc<FinCategory> {
        Arc::new(FinCategory::new(vec!["*".into()], vec![(0, 0)], vec![0], vec![(0, 0, 0)]).unwrap())
    }

    fn fold_ctx(n: usize) -> DescentContext {
        let cat = point();
        let src = Arc::new(Presheaf::new(cat, vec![n], vec![(0..n).collect()]).unwrap());
        DescentContext::new(canonical_shape(&PresheafMorphism::to_terminal(src)).unwrap()).unwrap()
    }

    fn identity_ctx() -> DescentContext {
        let cat = point();
        let p = Arc::new(Presheaf::terminal(cat));
        DescentContext::new(canonical_shape(&PresheafMorphism::identity(p)).unwrap()).unwrap()
    }

    #[test]
    fn identity_shape_exchange_is_iso() {
        let ctx = identity_ctx();
        for kind in [CoeffKind::Set, CoeffKind::Vect(Field::Prime(5))] {
            let objs = representable_objects(ctx.shape().cover(), kind);
            assert_eq!(exchange_status(ctx.exchange_square(), &objs).unwrap().overall, ChiStatus::Iso);
        }
    }

    #[test]
    fn fold_laws_on_representables() {
        let ctx = fold_ctx(2);
        for kind in [CoeffKind::Set, CoeffKind::Vect(Field::Prime(3))] {
            for (_, m) in representable_objects(ctx.shape().cover(), kind) {
                assert!(ctx.chi(&m).unwrap().is_iso());
                assert!(ctx.check_l1_diagram(&m).unwrap());
                let tm = ctx.monad().apply(&m).unwrap();
                let homs = hom_reps(&tm, &m, 1 << 20).unwrap();
                for phi in homs.morphisms() {
                    assert_eq!(ctx.xi(&m, phi).unwrap(), ctx.xi_via_definition(&m, phi).unwrap());
                    assert!(ctx.check_outer_face(&m, phi).unwrap());
                    assert!(ctx.check_face_composition(&m, phi, &m, phi).unwrap());
                    assert!(ctx.check_diagonal_unit(&m, phi).unwrap());
                }
            }
        }
    }

    #[test]
    fn comparison_gives_identity_datum_and_round_trips() {
        let ctx = fold_ctx(2);
        let base = ctx.shape().base().clone();
        let m0 = Arc::new(Representation::constant(base, CoeffObject::Set(2)));
        assert!(ctx.check_comparison_datum(&m0).unwrap());
        let m = ctx.a.pullback(&m0).unwrap();
        let d = PreDescentDatum::identity(&ctx, m).unwrap();
        assert!(ctx.descent_check(&d).unwrap());
        let report = ctx.p41_check(&d).unwrap();
        assert!(report.passes());
        assert_eq!(report.i_implies_ii, Some(true));
        for mode in [InverseMode::Exact, InverseMode::Search] {
            match ctx.descent_to_algebra(&d, mode, 1 << 20).unwrap() {
                InverseOutcome::Found(c) => {
                    assert_eq!(ctx.algebra_to_descent(&c).unwrap(), d);
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn closed_form_on_fold() {
        let ctx = fold_ctx(3);
        for top in 0..3 {
            assert!(ctx.closed_form_check(top).unwrap().passes());
        }
    }

    #[test]
    fn chevalley_on_fold() {
        let ctx = fold_ctx(2);
        let objs = representable_objects(ctx.shape().cover(), CoeffKind::Set);
        let r = ctx.chevalley_check(&objs, 1 << 16).unwrap();
        assert!(r.chi_iso);
        assert!(r.consistent());
        assert!(r.c_squares > 0 && r.c_prime_squares > 0);
    }
}
