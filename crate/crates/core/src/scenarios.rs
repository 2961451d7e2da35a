//! Scenario files, the law battery they select, and verdict reports.
//!
//! A scenario names a shape (built from an arrow of presheaves, from group
//! cosets, or given explicitly), a coefficient kind and a family of test
//! objects. [`run_scenario`] evaluates every law on that family and returns
//! a [`Verdict`]; module errors become failing law entries. Random test
//! objects are drawn from independent `ChaCha8Rng` streams seeded with
//! `seed + k`: stream 0 builds a random shape, 1 the objects over the cover,
//! 2 the objects over the base and 3 the sampled composites of the
//! retraction law.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coeff::{CoeffKind, DEFAULT_BUDGET};
use crate::descent::{
    automorphisms, exchange_status, representable_objects, ChiStatus, DescentContext, ExchangeEntry, Face,
    InverseMode, InverseOutcome, PreDescentDatum,
};
use crate::error::{Error, Result};
use crate::fibration::{
    hom_reps, is_fully_faithful, linear_combination, retraction_r, verify_adjunction, HomSet, RepMorphism,
    Representation, RepresentationJson,
};
use crate::fincat::FinCategory;
use crate::group::{mackey_oracle, FiniteGroup, SubgroupRep};
use crate::linalg::{Field, Matrix, Scalar};
use crate::monad::{
    algebra_candidates, check_associative, comparison_ka, ka_essential_surjectivity_check, AlgebraCandidate,
};
use crate::presheaf::{canonical_shape, validate_shape, DescentShape, Presheaf, PresheafJson, PresheafMorphism, ShapeJson};
use crate::random::{random_arrow_into, random_presheaf, random_rep, rng, Knobs};

const BUILTINS: &[(&str, &str)] = &[
    ("epi-only", include_str!("../scenarios/epi-only.json")),
    ("identity", include_str!("../scenarios/identity.json")),
    ("mackey-s3", include_str!("../scenarios/mackey-s3.json")),
    ("set-canonical", include_str!("../scenarios/set-canonical.json")),
    ("sieve-split", include_str!("../scenarios/sieve-split.json")),
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|b| b.0).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub shape: ShapeSource,
    /// `set`, `vect-<prime>` or `vect-q`.
    pub coeff: String,
    #[serde(default)]
    pub objects: ObjectPolicy,
    /// Law names to evaluate; all of them when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub battery: Option<Vec<String>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default)]
    pub expect: Expectations,
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn builtin(name: &str) -> Option<Self> {
        BUILTINS
            .iter()
            .find(|b| b.0 == name)
            .map(|b| Scenario::from_json(b.1).expect("builtin scenarios parse"))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ShapeSource {
    /// The fibre-product shape of an explicit arrow `cover -> base`.
    Canonical {
        category: FinCategory,
        base: PresheafJson,
        cover: PresheafJson,
        arrow: Vec<Vec<usize>>,
    },
    /// The fibre-product shape of a seeded random arrow.
    RandomCanonical {
        category: FinCategory,
        #[serde(default)]
        base_knobs: Knobs,
        #[serde(default)]
        cover_knobs: Knobs,
    },
    /// `K\G -> H\G` over the delooping of `S_degree`; subgroups are given by
    /// generating permutations in image notation.
    Cosets {
        degree: usize,
        subgroup: Vec<Vec<usize>>,
        over: Vec<Vec<usize>>,
    },
    Explicit { shape: ShapeJson },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObjectPolicy {
    #[serde(default = "yes")]
    pub representables: bool,
    /// Seeded random objects over the cover.
    #[serde(default)]
    pub random: usize,
    #[serde(default)]
    pub knobs: Knobs,
    #[serde(default)]
    pub explicit: Vec<RepresentationJson>,
    /// Representations of `K`, for coset shapes.
    #[serde(default)]
    pub subgroup_reps: Vec<SubgroupRepJson>,
    /// Seeded random objects over the base.
    #[serde(default = "ten")]
    pub base_random: usize,
}

fn yes() -> bool {
    true
}

fn ten() -> usize {
    10
}

impl Default for ObjectPolicy {
    fn default() -> Self {
        ObjectPolicy {
            representables: true,
            random: 0,
            knobs: Knobs::default(),
            explicit: Vec::new(),
            subgroup_reps: Vec::new(),
            base_random: ten(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubgroupRepJson {
    pub dim: usize,
    pub generators: Vec<GeneratorJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorJson {
    pub element: Vec<usize>,
    pub matrix: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Expectations {
    /// Expected aggregate exchange status. Fibre-product shapes default to
    /// `iso`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exchange: Option<ChiStatus>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawResult {
    pub name: String,
    pub pass: bool,
    /// Number of individual instances evaluated.
    pub checked: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Counts from the algebra/descent round trip.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTrip {
    /// Carriers with invertible exchange map.
    pub carriers: usize,
    pub candidates: usize,
    pub candidates_recovered: usize,
    pub data: usize,
    pub data_recovered: usize,
    /// Descent data over carriers without invertible exchange, inverted by
    /// search.
    pub searched: usize,
    pub search_found: usize,
    pub search_no_preimage: usize,
    pub search_not_unique: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Environment {
    pub engine: String,
    pub coeff: String,
    pub seed: u64,
    pub budget: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub scenario: String,
    pub tested_objects: Vec<String>,
    pub base_objects: Vec<String>,
    pub chi_status: ChiStatus,
    pub lambda_status: ChiStatus,
    pub exchange: Vec<ExchangeEntry>,
    /// Sorted by name.
    pub laws: Vec<LawResult>,
    pub roundtrip: RoundTrip,
    pub environment: Environment,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.laws.iter().all(|l| l.pass)
    }

    pub fn law(&self, name: &str) -> Option<&LawResult> {
        self.laws.iter().find(|l| l.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdicts serialize")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let e = &self.environment;
        let _ = writeln!(out, "scenario {} ({}, seed {}, budget {})", self.scenario, e.coeff, e.seed, e.budget);
        let _ = writeln!(out, "objects: {}", self.tested_objects.join(", "));
        let _ = writeln!(out, "exchange: {}, lambda: {}", self.chi_status, self.lambda_status);
        let width = self.laws.iter().map(|l| l.name.len()).max().unwrap_or(0);
        for l in &self.laws {
            let mark = if l.pass { "pass" } else { "FAIL" };
            let _ = write!(out, "  {mark}  {:width$}  {:>6}", l.name, l.checked);
            if let Some(n) = &l.note {
                let _ = write!(out, "  {n}");
            }
            out.push('\n');
            if let Some(w) = &l.witness {
                let _ = writeln!(out, "        witness: {w}");
            }
        }
        let r = &self.roundtrip;
        let _ = writeln!(
            out,
            "round trip: {}/{} candidates, {}/{} data over {} carriers; search {} (found {}, none {}, ambiguous {})",
            r.candidates_recovered,
            r.candidates,
            r.data_recovered,
            r.data,
            r.carriers,
            r.searched,
            r.search_found,
            r.search_no_preimage,
            r.search_not_unique
        );
        let _ = writeln!(out, "{}", if self.passed() { "all laws pass" } else { "some laws fail" });
        out
    }
}

pub fn parse_coeff(s: &str) -> Result<CoeffKind> {
    match s {
        "set" => Ok(CoeffKind::Set),
        "vect-q" => Ok(CoeffKind::Vect(Field::Rationals)),
        _ => {
            let p = s
                .strip_prefix("vect-")
                .and_then(|p| p.parse::<u64>().ok())
                .ok_or_else(|| Error::Precondition(format!("unknown coefficient kind {s:?}")))?;
            Ok(CoeffKind::Vect(Field::prime(p)?))
        }
    }
}

pub type Labelled = Vec<(String, Arc<Representation>)>;

/// `K ≤ H ≤ G` behind a coset shape.
pub struct CosetData {
    pub group: FiniteGroup,
    pub k: Vec<usize>,
    pub h: Vec<usize>,
}

/// A scenario with its shape, context and test objects built.
pub struct Instance {
    pub scenario: Scenario,
    pub ctx: DescentContext,
    pub kind: CoeffKind,
    pub budget: u64,
    pub seed: u64,
    /// Test objects over the cover.
    pub objects: Labelled,
    /// Test objects over the base.
    pub base_objects: Labelled,
    /// Whether the shape was built as a fibre product.
    pub fibre_product: bool,
    pub cosets: Option<CosetData>,
    pub expect: Option<ChiStatus>,
}

fn permutation(images: &[usize]) -> Result<usize> {
    FiniteGroup::permutation_index(images)
        .ok_or_else(|| Error::Precondition(format!("{images:?} is not a permutation of the right degree")))
}

fn build_shape(s: &Scenario) -> Result<(DescentShape, bool, Option<CosetData>)> {
    match &s.shape {
        ShapeSource::Canonical {
            category,
            base,
            cover,
            arrow,
        } => {
            let cat = Arc::new(category.clone());
            let base = Arc::new(Presheaf::from_json(cat.clone(), base)?);
            let cover = Arc::new(Presheaf::from_json(cat, cover)?);
            let a = PresheafMorphism::new(cover, base, arrow.clone())?;
            Ok((canonical_shape(&a)?, true, None))
        }
        ShapeSource::RandomCanonical {
            category,
            base_knobs,
            cover_knobs,
        } => {
            let cat = Arc::new(category.clone());
            let mut r = rng(s.seed);
            let base = random_presheaf(&cat, &mut r, *base_knobs);
            let a = random_arrow_into(&base, &mut r, *cover_knobs);
            Ok((canonical_shape(&a)?, true, None))
        }
        ShapeSource::Cosets { degree, subgroup, over } => {
            let group = FiniteGroup::symmetric(*degree);
            let gens = |g: &[Vec<usize>]| -> Result<Vec<usize>> {
                let idx = g.iter().map(|p| permutation(p)).collect::<Result<Vec<_>>>()?;
                Ok(group.generate(&idx))
            };
            let (k, h) = (gens(subgroup)?, gens(over)?);
            let cat = group.delooping();
            let a = group.coset_projection(&cat, &k, &h)?;
            Ok((canonical_shape(&a)?, true, Some(CosetData { group, k, h })))
        }
        ShapeSource::Explicit { shape } => Ok((DescentShape::from_json(shape)?, false, None)),
    }
}

fn build_objects(
    s: &Scenario,
    shape: &DescentShape,
    kind: CoeffKind,
    cosets: Option<&CosetData>,
) -> Result<(Labelled, Labelled)> {
    let p = &s.objects;
    let cover = shape.cover();
    let mut objects = Vec::new();
    if p.representables {
        objects.extend(representable_objects(cover, kind));
    }
    let mut r = rng(s.seed.wrapping_add(1));
    for i in 0..p.random {
        objects.push((format!("random-{i}"), Arc::new(random_rep(cover, kind, &mut r, p.knobs))));
    }
    for (i, j) in p.explicit.iter().enumerate() {
        let m = Representation::from_json(cover.clone(), j)?;
        if m.kind() != kind {
            return Err(Error::KindMismatch(format!("explicit object {i} is over {}", m.kind())));
        }
        objects.push((format!("explicit-{i}"), Arc::new(m)));
    }
    if !p.subgroup_reps.is_empty() {
        let (c, field) = match (cosets, kind) {
            (Some(c), CoeffKind::Vect(f)) => (c, f),
            _ => {
                return Err(Error::Precondition(
                    "subgroup representations need a coset shape with linear coefficients".into(),
                ))
            }
        };
        for (i, j) in p.subgroup_reps.iter().enumerate() {
            let gens = j
                .generators
                .iter()
                .map(|g| {
                    let rows: Vec<&[i64]> = g.matrix.iter().map(Vec::as_slice).collect();
                    Ok((permutation(&g.element)?, Matrix::from_i64(field, &rows)))
                })
                .collect::<Result<Vec<_>>>()?;
            let rep = SubgroupRep::from_generators(&c.group, &c.k, field, j.dim, &gens)?;
            objects.push((format!("subgroup-rep-{i}"), Arc::new(rep.to_groupoid_rep(&c.group, cover)?)));
        }
    }
    let mut base_objects = representable_objects(shape.base(), kind);
    let mut r = rng(s.seed.wrapping_add(2));
    for i in 0..p.base_random {
        base_objects.push((format!("base-random-{i}"), Arc::new(random_rep(shape.base(), kind, &mut r, p.knobs))));
    }
    Ok((objects, base_objects))
}

/// Builds and validates the shape and the test objects of a scenario.
pub fn instantiate(s: &Scenario) -> Result<Instance> {
    let kind = parse_coeff(&s.coeff)?;
    if let Some(b) = &s.battery {
        let known = law_names();
        if let Some(bad) = b.iter().find(|n| !known.contains(&n.as_str())) {
            return Err(Error::Precondition(format!("unknown law {bad:?} in battery")));
        }
    }
    let (shape, fibre_product, cosets) = build_shape(s)?;
    let violations = validate_shape(&shape)?;
    if !violations.is_empty() {
        let names: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::Precondition(format!("shape violates {}", names.join("; "))));
    }
    let (objects, base_objects) = build_objects(s, &shape, kind, cosets.as_ref())?;
    let expect = s.expect.exchange.or(if fibre_product { Some(ChiStatus::Iso) } else { None });
    Ok(Instance {
        scenario: s.clone(),
        ctx: DescentContext::new(shape)?,
        kind,
        budget: s.budget,
        seed: s.seed,
        objects,
        base_objects,
        fibre_product,
        cosets,
        expect,
    })
}

/// Result of one law before it is named.
struct Outcome {
    pass: bool,
    checked: usize,
    witness: Option<String>,
    note: Option<String>,
}

impl Outcome {
    fn tally(checked: usize, failures: Vec<String>) -> Self {
        let witness = failures.first().map(|f| {
            if failures.len() > 1 {
                format!("{f} (and {} more)", failures.len() - 1)
            } else {
                f.clone()
            }
        });
        Outcome {
            pass: failures.is_empty(),
            checked,
            witness,
            note: None,
        }
    }

    fn not_applicable(note: impl Into<String>) -> Self {
        Outcome {
            pass: true,
            checked: 0,
            witness: None,
            note: Some(format!("not applicable: {}", note.into())),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

type LawFn = fn(&Instance, &mut RoundTrip) -> Result<Outcome>;

const LAWS: &[(&str, LawFn)] = &[
    ("adjunction", law_adjunction),
    ("algebra-descent-round-trip", law_round_trip),
    ("associativity-cocycle", law_associativity_cocycle),
    ("chevalley", law_chevalley),
    ("cocycle-invertibility", law_cocycle_invertibility),
    ("comparison-algebra", law_comparison_algebra),
    ("comparison-identity-datum", law_comparison_datum),
    ("determinism", law_determinism),
    ("diagonal-unit", law_diagonal_unit),
    ("double-coset-count", law_double_cosets),
    ("double-exchange-diagram", law_double_exchange),
    ("exchange", law_exchange),
    ("exchange-closed-form", law_closed_form),
    ("face-composition", law_face_composition),
    ("induced-action", law_induced_action),
    ("monad-laws", law_monad),
    ("outer-face-action", law_outer_face),
    ("pullback-retraction", law_retraction),
    ("shape-axioms", law_shape),
    ("unital-algebra-splitting", law_splitting),
    ("xi-definition", law_xi_definition),
    ("xi-injective", law_xi_injective),
];

/// Every law a verdict reports, in report order.
pub fn law_names() -> Vec<&'static str> {
    LAWS.iter().map(|l| l.0).collect()
}

pub fn run_scenario(s: &Scenario) -> Result<Verdict> {
    let inst = instantiate(s)?;
    let ctx = &inst.ctx;
    let mut roundtrip = RoundTrip::default();
    let mut laws = Vec::with_capacity(LAWS.len());
    for (name, law) in LAWS {
        let selected = s.battery.as_ref().map_or(true, |b| b.iter().any(|n| n == name));
        let outcome = if selected {
            law(&inst, &mut roundtrip).unwrap_or_else(|e| Outcome {
                pass: false,
                checked: 0,
                witness: Some(format!("error: {e}")),
                note: None,
            })
        } else {
            Outcome {
                pass: true,
                checked: 0,
                witness: None,
                note: Some("not selected by the scenario battery".into()),
            }
        };
        laws.push(LawResult {
            name: name.to_string(),
            pass: outcome.pass,
            checked: outcome.checked,
            witness: outcome.witness,
            note: outcome.note,
        });
    }
    laws.sort_by(|x, y| x.name.cmp(&y.name));
    let exchange = exchange_status(ctx.exchange_square(), &inst.objects).ok();
    let pulled: Result<Labelled> = inst
        .objects
        .iter()
        .map(|(l, m)| Ok((format!("a1*{l}"), ctx.a1.pullback(m)?)))
        .collect();
    let lambda_status = pulled
        .and_then(|p| exchange_status(ctx.lambda_square(), &p))
        .map_or(ChiStatus::Neither, |r| r.overall);
    Ok(Verdict {
        scenario: s.name.clone(),
        tested_objects: inst.objects.iter().map(|o| o.0.clone()).collect(),
        base_objects: inst.base_objects.iter().map(|o| o.0.clone()).collect(),
        chi_status: exchange.as_ref().map_or(ChiStatus::Neither, |r| r.overall),
        lambda_status,
        exchange: exchange.map(|r| r.entries).unwrap_or_default(),
        laws,
        roundtrip,
        environment: Environment {
            engine: format!("descent-engine {}", env!("CARGO_PKG_VERSION")),
            coeff: s.coeff.clone(),
            seed: s.seed,
            budget: s.budget,
        },
    })
}

impl Instance {
    pub fn reps(&self) -> Vec<Arc<Representation>> {
        self.objects.iter().map(|o| o.1.clone()).collect()
    }

    /// `(i, j)` index pairs for laws with a source and a target object:
    /// every ordered pair.
    fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.objects.len();
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect()
    }

    fn homs(&self, m: &Arc<Representation>, n: &Arc<Representation>) -> Result<Vec<RepMorphism>> {
        Ok(hom_reps(m, n, self.budget)?.morphisms().to_vec())
    }

    /// `hom(T M, N)`.
    fn actions(&self, m: &Arc<Representation>, n: &Arc<Representation>) -> Result<Vec<RepMorphism>> {
        self.homs(&self.ctx.monad().apply(m)?, n)
    }
}

fn law_shape(inst: &Instance, _: &mut RoundTrip) -> Result<Outcome> {
    let shape = inst.ctx.shape();
    let failures = validate_shape(shape)?.iter().map(|v| v.to_string()).collect();
    let present: Vec<&str> = [
        ("delta", shape.delta.is_some()),
        ("s1", shape.s1.is_some()),
        ("s2", shape.s2.is_some()),
        ("sigma", shape.sigma.is_some()),
        ("gamma", shape.gamma.is_some()),
    ]
    .iter()
    .filter(|x| x.1)
    .map(|x| x.0)
    .collect();
    Ok(Outcome::tally(1, failures).with_note(format!("structure maps: {}", present.join(", "))))
}

fn law_adjunction(inst: &Instance, _: &mut RoundTrip) -> Result<Outcome> {
    let ctx = &inst.ctx;
    let covers = inst.reps();
    let bases: Vec<Arc<Representation>> = inst.base_objects.iter().map(|o| o.1.clone()).collect();
    let mut failures = Vec::new();
    for f in verify_adjunction(&ctx.a, &covers, &bases, inst.budget)? {
        failures.push(format!("a: {}: {}", f.law, f.detail));
    }
    let mut checked = covers.len() + bases.len() + covers.len() * bases.len();
    let pair_samples = covers
        .iter()
        .take(4)
        .flat_map(|m| [ctx.a1.pullback(m), ctx.a2.pullback(m)])
        .collect::<Result<Vec<_>>>()?;
    for (label, adj) in [("a1", &ctx.a1), ("a2", &ctx.a2)] {
        for f in verify_adjunction(adj, &pair_samples, &covers, inst.budget)? {
            failures.push(format!("{label}: {}: {}", f.law, f.detail));
        }
        checked += pair_samples.len() + covers.len() + pair_samples.len() * covers.len();
    }
    Ok(Outcome::tally(checked, failures))
}

fn law_monad(inst: &Instance, _: &mut RoundTrip) -> Result<Outcome> {
    let t = inst.ctx.monad();
    let mut failures = Vec::new();
    let mut checked = 0;
    for (label, m) in &inst.objects {
        for law in t.check_monad_laws(m)? {
            failures.push(format!("{label}: {law}"));
        }
        checked += 1;
    }
    for (i, j) in inst.pairs() {
        let (m, n) = (&inst.objects[i].1, &inst.objects[j].1);
        for f in inst.homs(m, n)?.iter().take(4) {
            checked += 1;
            if !t.mu_is_natural(f)? {
                failures.push(format!("mu not natural at a map {} -> {}", inst.objects[i].0, inst.objects[j].0));
            }
        }
    }
    Ok(Outcome::tally(checked, failures))
}

fn law_xi_definition(inst: &Instance, _: &mut RoundTrip) -> Result<Outcome> {
    let ctx = &inst.ctx;
    let mut failures = Vec::new();
    let mut checked = 0;
    for (i, j) in inst.pairs() {
        let (m, n) = (&inst.objects[i].1, &inst.objects[j].1);
        for (k, phi) in inst.actions(m, n)?.iter().enumerate() {
            checked += 1;
            if ctx.xi(m, phi)? != ctx.xi_via_definition(m, phi)? {
                failures.push(format!("T {} -> {}, map {k}", inst.objects[i].0, inst.objects[j].0));
            }
        }
    }
    Ok(Outcome::tally(checked, failures))
}

fn law_double_exchange(inst: &Instance, _: &mut RoundTrip) -> Result<Outcome> {
    let mut failures = Vec::new();
    for (label, m) in &inst.objects {
        if !inst.ctx.check_l1_diagram(m)? {
            failures.push(label.clone());
        }
    }
    Ok(Outcome::tally(inst.objects.len(), failures))
}

fn law_outer_face(inst: &Instance, _: &mut RoundTrip) -> Result<Outcome> {
    let ctx = &inst.ctx;
    let mut failures = Vec::new();
    let mut checked = 0;
    for (i, j) in inst.pairs() {
        let (m, n) = (&inst.objects[i].1, &inst.objects[j].1);
        let de = ctx.double_exchange(m)?;
        let mu = ctx.monad().mu(m)?;
        for (k, phi) in inst.actions(m, n)?.iter().enumerate() {
            checked += 1;
            if ctx.theta(Face::F13, m, phi)? != ctx.rho_with(m, &phi.compose(&mu)?, &de)? {
                failures.push(format!("T {} -> {}, map {k}", inst.objects[i].0, inst.objects[j].0));
            }
        }
    }
    Ok(Outcome::tally(checked, failures))
}

/// Index pairs `(first, second)` into a list of `n` maps: all of them for
/// short lists, otherwise each map with a fixed stride partner.
fn sampled_pairs(n: usize) -> Vec<(usize, usize)> {
    if n <= 8 {
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect()
    } else {
        (0..n).map(|i| (i, (5 * i + 1) % n)).collect()
    }
}

fn law_face_composition(inst: &Instance, _: &mut RoundTrip) -> Result<Outcome> {
    let ctx = &inst.ctx;
    let t = ctx.monad();
    let mut failures = Vec::new();
    let mut checked = 0;
    for (label, m) in &inst.objects {
        let de = ctx.double_exchange(m)?;
        let actions = inst.actions(m, m)?;
        for (x, y) in sampled_pairs(actions.len()) {
            let (phi12, phi23) = (&actions[x], &actions[y]);
            checked += 1;
            let lhs = ctx.rho_with(m, &phi23.compose(&t.apply_mor(phi12)?)?, &de)?;
            let rhs = ctx
                .theta(Face::F23, m, phi23)?
                .compose(&ctx.theta(Face::F12, m, phi12)?)?;
            if lhs != rhs {
                failures.push(format!("{label}: maps {x} then {y}"));
            }
        }
    }
    Ok(Outcome::tally(checked, failures).with_note("pairs: all for at most 8 actions, else a stride-5 sample"))
}

fn law_associativity_cocycle(inst: &Instance, _: &mut RoundTrip) -> Result<Outcome> {
    let ctx = &inst.ctx;
    let t = ctx.monad();
    let mut failures = Vec::new();
    let (mut checked, mut associative, mut unforced) = (0, 0, 0);
    for (label, m) in &inst.objects {
        let converse_forced = ctx.double_exchange(m)?.is_epi();
        for (k, phi) in inst.actions(m, m)?.iter().enumerate() {
            checked += 1;
            let cand = AlgebraCandidate {
                carrier: m.clone(),
                action: phi.clone(),
            };
            let assoc = check_associative(t, &cand)?;
            let datum = PreDescentDatum {
                carrier: m.clone(),
                v: ctx.xi(m, phi)?,
            };
            let cocycle = ctx.predescent_check(&datum)?;
            associative += assoc as usize;
            if assoc && !cocycle {
                failures.push(format!("{label}: associative action {k} gives no cocycle"));
            } else if cocycle && !assoc {
                if converse_forced {
                    failures.push(format!("{label}: cocycle from non-associative action {k}"));
                } else {
                    unforced += 1;
                }
            }
        }
    }
    Ok(Outcome::tally(checked, failures).with_note(format!(
        "{associative} associative; {unforced} cocycles from non-associative actions where the double exchange map is not epi"
    )))
}

fn law_induced_action(inst: &Instance, _: &mut RoundTrip) -> Result<Outcome> {
    let mut failures = Vec::new();
    let mut checked = 0;
    for (label, m) in &inst.objects {
        for (label0, m0) in &inst.base_objects {
            let (n, bad) = inst.ctx.lemma_l3_check(m, m0, inst.budget)?;
            checked += n;
            if bad > 0 {
                failures.push(format!("{label} -> a* {label0}: {bad} of {n}"));
            }
        }
    }
    Ok(Outcome::tally(checked, failures))
}

fn law_exchange(inst: &Instance, _: &mut RoundTrip) -> Result<Outcome> {
    let report = exchange_status(inst.ctx.exchange_square(), &inst.objects)?;
    let note = format!("overall {}", report.overall);
    let Some(expected) = inst.expect else {
        return Ok(Outcome::tally(report.entries.len(), vec![]).with_note(format!("{note}; no expectation declared")));
    };
    let mut failures = Vec::new();
    if report.overall != expected {
        let culprit = report
            .entries
            .iter()
            .find(|e| e.status == report.overall)
            .map_or(String::new(), |e| format!(" at {}", e.object));
        failures.push(format!("expected {expected}, found {}{culprit}", report.overall));
    }
    Ok(Outcome::tally(report.entries.len(), failures).with_note(format!("{note}; expected {expected}")))
}

fn law_closed_form(inst: &Instance, _: &mut RoundTrip) -> Result<Outcome> {
    if !inst.fibre_product {
        return Ok(Outcome::not_applicable("the shape is not built from a fibre product"));
    }
    let n = inst.ctx.shape().cover().elements().category.object_count();
    let mut failures = Vec::new();
    let mut points = 0;
    for top in 0..n {
        let r = inst.ctx.closed_form_check(top)?;
        points += r.points;
        if !r.passes() {
            failures.push(format!("y({}): {r:?}", r.top));
        }
    }
    Ok(Outcome::tally(n, failures).with_note(format!("{points} labelled elements compared")))
}

fn law_double_cosets(inst: &Instance, _: &mut RoundTrip) -> Result<Outcome> {
    let Some(c) = &inst.cosets else {
        return Ok(Outcome::not_applicable("the shape is not a coset shape"));
    };
    let ctx = &inst.ctx;
    let cover = ctx.shape().cover();
    let el1 = cover.elements();
    let identity_coset = c
        .group
        .right_cosets(&c.k)?
        .iter()
        .position(|s| s.contains(&c.group.identity()))
        .expect("some coset contains the identity");
    let at = el1.object(0, identity_coset);
    // K-orbits on the pairs over the identity coset, one per double coset.
    let pairs = ctx.shape().pairs();
    let fibre: Vec<usize> = (0..pairs.size(0))
        .filter(|&x| ctx.shape().a2.apply(0, x) == identity_coset)
        .collect();
    let mut orbit_sizes = Vec::new();
    let mut seen = BTreeSet::new();
    for &x in &fibre {
        if seen.contains(&x) {
            continue;
        }
        let orbit: BTreeSet<usize> = c.k.iter().map(|&g| pairs.restrict(g, x)).collect();
        orbit_sizes.push(orbit.len());
        seen.extend(orbit);
    }
    orbit_sizes.sort_unstable();
    let mut failures = Vec::new();
    let mut checked = 0;
    for (label, m) in &inst.objects {
        let dims: BTreeSet<usize> = m.values().iter().map(|v| v.size()).collect();
        let [dim] = dims.iter().copied().collect::<Vec<_>>()[..] else {
            continue;
        };
        checked += 1;
        let oracle = mackey_oracle(&c.group, &c.h, &c.k, dim)?;
        let mut indices: Vec<usize> = oracle.terms.iter().map(|t| t.index).collect();
        indices.sort_unstable();
        let monad_dim = ctx.monad().apply(m)?.value(at).size();
        let pair_dim = ctx.a2.push(&ctx.a1.pullback(m)?)?.value(at).size();
        let iso = ctx.chi(m)?.is_iso();
        if monad_dim != oracle.total_dim || pair_dim != oracle.total_dim || indices != orbit_sizes || !iso {
            failures.push(format!(
                "{label}: predicted {} over {:?}, monad {monad_dim}, pairs {pair_dim} over {orbit_sizes:?}, exchange iso {iso}",
                oracle.total_dim, indices
            ));
        }
    }
    Ok(Outcome::tally(checked, failures)
        .with_note(format!("{} double cosets of orbit sizes {orbit_sizes:?}", orbit_sizes.len())))
}

fn law_xi_injective(inst: &Instance, _: &mut RoundTrip) -> Result<Outcome> {
    let mut failures = Vec::new();
    let mut checked = 0;
    for (label, m) in &inst.objects {
        if !inst.ctx.chi(m)?.is_epi() {
            continue;
        }
        checked += 1;
        if !inst.ctx.xi_injective(m, inst.budget)? {
            failures.push(label.clone());
        }
    }
    Ok(Outcome::tally(checked, failures).with_note("objects with epi exchange map"))
}

/// Every map `a₁* M -> a₂* M` (Set) or a basis of them (Vect).
fn datum_sweep(inst: &Instance, m: &Arc<Representation>) -> Result<HomSet> {
    hom_reps(&inst.ctx.a1.pullback(m)?, &inst.ctx.a2.pullback(m)?, inst.budget)
}

fn law_round_trip(inst: &Instance, rt: &mut RoundTrip) -> Result<Outcome> {
    let ctx = &inst.ctx;
    let mut failures = Vec::new();
    for (label, m) in &inst.objects {
        if ctx.chi(m)?.is_iso() {
            rt.carriers += 1;
            for (k, phi) in inst.actions(m, m)?.iter().enumerate() {
                rt.candidates += 1;
                let cand = AlgebraCandidate {
                    carrier: m.clone(),
                    action: phi.clone(),
                };
                let d = ctx.algebra_to_descent(&cand)?;
                match ctx.descent_to_algebra(&d, InverseMode::Exact, inst.budget)? {
                    InverseOutcome::Found(back) if back.action == *phi => rt.candidates_recovered += 1,
                    other => failures.push(format!("{label}: action {k} came back as {}", outcome_name(&other))),
                }
            }
            for (k, v) in datum_sweep(inst, m)?.morphisms().iter().enumerate() {
                rt.data += 1;
                let d = PreDescentDatum {
                    carrier: m.clone(),
                    v: v.clone(),
                };
                match ctx.descent_to_algebra(&d, InverseMode::Exact, inst.budget)? {
                    InverseOutcome::Found(c) if ctx.algebra_to_descent(&c)? == d => rt.data_recovered += 1,
                    other => failures.push(format!("{label}: datum {k} came back as {}", outcome_name(&other))),
                }
            }
        } else if ctx.shape().delta.is_some() {
            for v in datum_sweep(inst, m)?.morphisms() {
                let d = PreDescentDatum {
                    carrier: m.clone(),
                    v: v.clone(),
                };
                if !ctx.descent_check(&d)? {
                    continue;
                }
                rt.searched += 1;
                match ctx.descent_to_algebra(&d, InverseMode::Search, inst.budget)? {
                    InverseOutcome::Found(_) => rt.search_found += 1,
                    InverseOutcome::NoPreimage => rt.search_no_preimage += 1,
                    InverseOutcome::NotUnique(_) => rt.search_not_unique += 1,
                }
            }
        }
    }
    let checked = rt.candidates + rt.data;
    let mut out = Outcome::tally(checked, failures);
    if rt.searched > 0 {
        out = out.with_note(format!(
            "search over {} descent data on carriers without invertible exchange: {} found, {} without preimage, {} ambiguous",
            rt.searched, rt.search_found, rt.search_no_preimage, rt.search_not_unique
        ));
    }
    Ok(out)
}

fn outcome_name(o: &InverseOutcome) -> String {
    match o {
        InverseOutcome::Found(_) => "a different action".into(),
        InverseOutcome::NoPreimage => "no preimage".into(),
        InverseOutcome::NotUnique(n) => format!("{n} preimages"),
    }
}

fn law_diagonal_unit(inst: &Instance, _: &mut RoundTrip) -> Result<Outcome> {
    if inst.ctx.shape().delta.is_none() {
        return Ok(Outcome::not_applicable("the shape has no diagonal"));
    }
    let mut failures = Vec::new();
    let mut checked = 0;
    for (label, m) in &inst.objects {
        for (k, phi) in inst.actions(m, m)?.iter().enumerate() {
            checked += 1;
            if !inst.ctx.check_diagonal_unit(m, phi)? {
                failures.push(format!("{label}: action {k}"));
            }
        }
    }
    Ok(Outcome::tally(checked, failures))
}

fn law_comparison_datum(inst: &Instance, _: &mut RoundTrip) -> Result<Outcome> {
    let mut failures = Vec::new();
    for (label, m0) in &inst.base_objects {
        if !inst.ctx.check_comparison_datum(m0)? {
            failures.push(label.clone());
        }
    }
    Ok(Outcome::tally(inst.base_objects.len(), failures))
}

fn law_comparison_algebra(inst: &Instance, _: &mut RoundTrip) -> Result<Outcome> {
    let t = inst.ctx.monad();
    let mut failures = Vec::new();
    for (label, m0) in &inst.base_objects {
        let cand = comparison_ka(t, m0)?;
        let unital = crate::monad::check_unital(t, &cand)?;
        if !unital || !check_associative(t, &cand)? {
            failures.push(label.clone());
        }
    }
    Ok(Outcome::tally(inst.base_objects.len(), failures))
}

fn law_cocycle_invertibility(inst: &Instance, _: &mut RoundTrip) -> Result<Outcome> {
    let ctx = &inst.ctx;
    if ctx.shape().delta.is_none() {
        return Ok(Outcome::not_applicable("the shape has no diagonal"));
    }
    let mut failures = Vec::new();
    let (mut checked, mut inverted, mut swept_out) = (0, 0, 0);
    let mut check = |label: String, d: &PreDescentDatum, failures: &mut Vec<String>| -> Result<()> {
        let r = ctx.p41_check(d)?;
        checked += 1;
        inverted += (r.i_implies_ii == Some(true)) as usize;
        if !r.passes() {
            failures.push(format!("{label}: {r:?}"));
        }
        Ok(())
    };
    for (label, m) in &inst.objects {
        match datum_sweep(inst, m) {
            Ok(sweep) => {
                for (k, v) in sweep.morphisms().iter().enumerate() {
                    let d = PreDescentDatum {
                        carrier: m.clone(),
                        v: v.clone(),
                    };
                    if ctx.predescent_check(&d)? {
                        check(format!("{label} datum {k}"), &d, &mut failures)?;
                    }
                }
            }
            Err(Error::TooLarge { .. }) => swept_out += 1,
            Err(e) => return Err(e),
        }
        // Coboundaries `a₂* g ∘ a₁* g⁻¹` on `T M`, one per sampled automorphism.
        let tm = ctx.monad().apply(m)?;
        for (k, g) in automorphisms(&tm, inst.budget)?.iter().enumerate() {
            let g_inv = g.inverse().expect("automorphism");
            let v = ctx.a2.pullback_mor(g)?.compose(&ctx.a1.pullback_mor(&g_inv)?)?;
            let d = PreDescentDatum { carrier: tm.clone(), v };
            if !ctx.descent_check(&d)? {
                failures.push(format!("T {label}: coboundary {k} is not a descent datum"));
                continue;
            }
            check(format!("T {label} coboundary {k}"), &d, &mut failures)?;
        }
    }
    let mut note = format!("{inverted} data inverted by the swap");
    if swept_out > 0 {
        let _ = write!(note, "; {swept_out} objects with too many maps for a full sweep");
    }
    Ok(Outcome::tally(checked, failures).with_note(note))
}

fn law_splitting(inst: &Instance, _: &mut RoundTrip) -> Result<Outcome> {
    let ctx = &inst.ctx;
    let t = ctx.monad();
    let mut cands = Vec::new();
    for (_, m) in &inst.objects {
        cands.extend(algebra_candidates(t, m, inst.budget)?);
    }
    for (_, m0) in &inst.base_objects {
        cands.push(comparison_ka(t, m0)?);
    }
    // Direct images of every carrier, one per distinct carrier.
    let mut carriers: Vec<&Arc<Representation>> = Vec::new();
    for c in &cands {
        if !carriers.iter().any(|x| ***x == *c.carrier) {
            carriers.push(&c.carrier);
        }
    }
    let family = carriers.iter().map(|m| ctx.a.push(m)).collect::<Result<Vec<_>>>()?;
    let ff = is_fully_faithful(&ctx.a, &family, inst.budget)?;
    let reports = ka_essential_surjectivity_check(t, &cands, if ff { &family } else { &[] }, inst.budget)?;
    let unital: Vec<_> = reports.iter().filter(|r| r.unital).collect();
    let split = unital.iter().filter(|r| r.split == Some(true)).count();
    if !ff {
        return Ok(Outcome::not_applicable(format!(
            "pullback is not fully faithful on the direct images of the candidate carriers ({split} of {} unital candidates split regardless)",
            unital.len()
        )));
    }
    let failures = reports
        .iter()
        .filter(|r| !r.passes())
        .map(|r| format!("candidate {}: {}", r.index, r.detail.clone().unwrap_or_else(|| "not associative".into())))
        .collect();
    Ok(Outcome::tally(unital.len(), failures).with_note(format!(
        "pullback fully faithful on the direct images of the carriers; {split} of {} unital candidates split",
        unital.len()
    )))
}

fn law_chevalley(inst: &Instance, _: &mut RoundTrip) -> Result<Outcome> {
    let r = inst.ctx.chevalley_check(&inst.objects, inst.budget)?;
    let mut failures = Vec::new();
    if !r.consistent() {
        failures.push(format!(
            "chi iso {}, (C) {}/{} failing, (C') {}/{} failing, {} non-commuting, witnesses decide chi {}",
            r.chi_iso, r.c_failures, r.c_squares, r.c_prime_failures, r.c_prime_squares, r.non_commuting,
            r.witnesses_decide_chi
        ));
    }
    let mut out = Outcome::tally(r.c_squares + r.c_prime_squares, failures);
    if out.pass {
        out.witness = r
            .witnesses
            .first()
            .map(|w| format!("{} fails at {}: {}", w.condition, w.object, w.detail));
    }
    Ok(out.with_note(format!(
        "{} (C) and {} (C') squares, {} and {} failing",
        r.c_squares, r.c_prime_squares, r.c_failures, r.c_prime_failures
    )))
}

fn random_scalar(field: Field, r: &mut ChaCha8Rng) -> Scalar {
    match field {
        Field::Prime(p) => field.from_i64(r.gen_range(0..p as i64)),
        Field::Rationals => field.from_i64(r.gen_range(-3..=3)),
    }
}

/// A seeded element of a hom-set: uniform (Set) or a random combination of
/// the basis (Vect).
fn random_map(homs: &HomSet, kind: CoeffKind, r: &mut ChaCha8Rng) -> Result<Option<RepMorphism>> {
    match (homs, kind) {
        (HomSet::All(all), _) => Ok(all.choose(r).cloned()),
        (HomSet::Basis(basis), CoeffKind::Vect(field)) if !basis.is_empty() => {
            let coeffs: Vec<Scalar> = basis.iter().map(|_| random_scalar(field, r)).collect();
            Ok(Some(linear_combination(basis, &coeffs)?))
        }
        _ => Ok(None),
    }
}

fn law_retraction(inst: &Instance, _: &mut RoundTrip) -> Result<Outcome> {
    let adj = &inst.ctx.a;
    let mut failures = Vec::new();
    let mut checked = 0;
    for (i, j) in inst.pairs() {
        let (m, n) = (&inst.objects[i].1, &inst.objects[j].1);
        for (k, g) in inst.homs(&adj.push(m)?, &adj.push(n)?)?.iter().enumerate() {
            checked += 1;
            if retraction_r(adj, m, n, &adj.pullback_mor(g)?)? != *g {
                failures.push(format!("r(a* g) != g for map {k}: {} -> {}", inst.objects[i].0, inst.objects[j].0));
            }
        }
    }
    let t = inst.ctx.monad();
    let mut r = rng(inst.seed.wrapping_add(3));
    let n = inst.objects.len();
    let (mut sampled, mut attempts) = (0, 0);
    while sampled < 10 && attempts < 200 && n > 0 {
        attempts += 1;
        let (x, y, z) = (r.gen_range(0..n), r.gen_range(0..n), r.gen_range(0..n));
        let (m, nn, p) = (&inst.objects[x].1, &inst.objects[y].1, &inst.objects[z].1);
        let f = random_map(&hom_reps(&t.apply(m)?, &t.apply(nn)?, inst.budget)?, inst.kind, &mut r)?;
        let g = random_map(&hom_reps(&adj.push(nn)?, &adj.push(p)?, inst.budget)?, inst.kind, &mut r)?;
        let (Some(f), Some(g)) = (f, g) else { continue };
        sampled += 1;
        let lhs = retraction_r(adj, m, p, &adj.pullback_mor(&g)?.compose(&f)?)?;
        if lhs != g.compose(&retraction_r(adj, m, nn, &f)?)? {
            failures.push(format!("r(a* g . f) != g . r(f) on sample {sampled}"));
        }
    }
    Ok(Outcome::tally(checked + sampled, failures).with_note(format!("{sampled} seeded composites")))
}

fn law_determinism(inst: &Instance, _: &mut RoundTrip) -> Result<Outcome> {
    let fingerprint = |objs: &Labelled| -> Vec<String> {
        objs.iter()
            .map(|(l, m)| format!("{l}:{}", serde_json::to_string(&m.to_json()).expect("serializes")))
            .collect()
    };
    let s = &inst.scenario;
    let (shape, _, cosets) = build_shape(s)?;
    let (objects, base_objects) = build_objects(s, &shape, inst.kind, cosets.as_ref())?;
    let mut failures = Vec::new();
    let shape_json = |x: &DescentShape| serde_json::to_string(&x.to_json()).expect("serializes");
    if shape_json(&shape) != shape_json(inst.ctx.shape()) {
        failures.push("shape differs on regeneration".into());
    }
    if fingerprint(&objects) != fingerprint(&inst.objects) {
        failures.push("objects over the cover differ on regeneration".into());
    }
    if fingerprint(&base_objects) != fingerprint(&inst.base_objects) {
        failures.push("objects over the base differ on regeneration".into());
    }
    Ok(Outcome::tally(1 + objects.len() + base_objects.len(), failures)
        .with_note("shape and seeded objects regenerate identically"))
}
