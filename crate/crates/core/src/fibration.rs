//! Representations over categories of elements, the pullback/direct-image
//! adjunction along a presheaf morphism, hom-sets of natural
//! transformations, and arrows of the total category.
//!
//! A representation over `A` is a contravariant functor on the category of
//! elements: `map(g)` for `g: y -> x` goes `value(x) -> value(y)`. The direct
//! image at `z` is the colimit over the comma category of pairs
//! `(x, u: z -> F x)` where `F` is the induced functor on elements.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Arc, Mutex};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::coeff::{colimit, CoeffKind, CoeffMorphism, CoeffObject, Colimit, MorphismJson, ObjectJson};
use crate::enumerate::FunctionalCsp;
use crate::error::{Error, Result};
use crate::fincat::{comma_category, CatFunctor, CommaDirection, FinCategory, MorId, ObjId};
use crate::linalg::{Field, Matrix, Scalar};
use crate::presheaf::{Presheaf, PresheafMorphism};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Representation {
    base: Arc<Presheaf>,
    kind: CoeffKind,
    values: Vec<CoeffObject>,
    maps: Vec<CoeffMorphism>,
}

impl Representation {
    pub fn new(
        base: Arc<Presheaf>,
        kind: CoeffKind,
        values: Vec<CoeffObject>,
        maps: Vec<CoeffMorphism>,
    ) -> Result<Self> {
        let r = Representation {
            base,
            kind,
            values,
            maps,
        };
        if let Some(first) = r.check().into_iter().next() {
            return Err(Error::Structural(first));
        }
        Ok(r)
    }

    /// Every failed typing or functoriality condition.
    pub fn check(&self) -> Vec<String> {
        let el = self.base.elements();
        let cat = &*el.category;
        if self.values.len() != cat.object_count() || self.maps.len() != cat.morphism_count() {
            return vec!["representation tables do not match the category of elements".into()];
        }
        let mut out = Vec::new();
        for v in &self.values {
            if v.kind() != self.kind {
                out.push(format!("value {v} is not in {}", self.kind));
            }
        }
        for g in 0..cat.morphism_count() {
            let m = &self.maps[g];
            if m.source() != self.values[cat.tgt(g)] || m.target() != self.values[cat.src(g)] {
                out.push(format!("map along element morphism {g} has the wrong type"));
            }
        }
        if !out.is_empty() {
            return out;
        }
        for o in 0..cat.object_count() {
            if self.maps[cat.identity(o)] != CoeffMorphism::identity(self.values[o]) {
                out.push(format!("identity at element {o} is not sent to the identity"));
            }
        }
        for g in 0..cat.morphism_count() {
            for &f in cat.into(cat.src(g)) {
                let gf = cat.comp(g, f);
                let composite = self.maps[f].compose(&self.maps[g]).expect("typed");
                if composite != self.maps[gf] {
                    out.push(format!("M({gf}) != M({f}) . M({g})"));
                }
            }
        }
        out
    }

    pub fn base(&self) -> &Arc<Presheaf> {
        &self.base
    }

    pub fn kind(&self) -> CoeffKind {
        self.kind
    }

    pub fn value(&self, o: ObjId) -> CoeffObject {
        self.values[o]
    }

    pub fn values(&self) -> &[CoeffObject] {
        &self.values
    }

    pub fn map(&self, g: MorId) -> &CoeffMorphism {
        &self.maps[g]
    }

    pub fn maps(&self) -> &[CoeffMorphism] {
        &self.maps
    }

    /// Sum of the sizes of all values.
    pub fn total_size(&self) -> usize {
        self.values.iter().map(CoeffObject::size).sum()
    }

    /// The representable `hom(-, top)` on the category of elements, or its
    /// linearization.
    pub fn representable(base: Arc<Presheaf>, top: ObjId, kind: CoeffKind) -> Self {
        let el = base.elements();
        let cat = &*el.category;
        let homs: Vec<Vec<MorId>> = (0..cat.object_count()).map(|y| cat.hom(y, top)).collect();
        let pos: Vec<HashMap<MorId, usize>> = homs
            .iter()
            .map(|h| h.iter().enumerate().map(|(i, &m)| (m, i)).collect())
            .collect();
        let set_maps: Vec<CoeffMorphism> = (0..cat.morphism_count())
            .map(|g| {
                let (y, x) = (cat.src(g), cat.tgt(g));
                CoeffMorphism::Set {
                    target: homs[y].len(),
                    map: homs[x].iter().map(|&h| pos[y][&cat.comp(h, g)]).collect(),
                }
            })
            .collect();
        let set_rep = Representation {
            values: homs.iter().map(|h| CoeffObject::Set(h.len())).collect(),
            maps: set_maps,
            kind: CoeffKind::Set,
            base,
        };
        match kind {
            CoeffKind::Set => set_rep,
            CoeffKind::Vect(field) => set_rep.linearize(field),
        }
    }

    /// The constant representation with identity maps.
    pub fn constant(base: Arc<Presheaf>, value: CoeffObject) -> Self {
        let el = base.elements();
        let cat = &*el.category;
        Representation {
            values: vec![value; cat.object_count()],
            maps: vec![CoeffMorphism::identity(value); cat.morphism_count()],
            kind: value.kind(),
            base,
        }
    }

    /// Free vector spaces on a set-valued representation.
    pub fn linearize(&self, field: Field) -> Self {
        assert_eq!(self.kind, CoeffKind::Set, "linearize expects a set-valued representation");
        Representation {
            base: self.base.clone(),
            kind: CoeffKind::Vect(field),
            values: self
                .values
                .iter()
                .map(|v| CoeffObject::Vect { field, dim: v.size() })
                .collect(),
            maps: self
                .maps
                .iter()
                .map(|m| crate::coeff::free_map(m, field).expect("set map"))
                .collect(),
        }
    }

    pub fn to_json(&self) -> RepresentationJson {
        let el = self.base.elements();
        let cat = &*el.category;
        RepresentationJson {
            kind: self.kind,
            values: (0..cat.object_count())
                .map(|o| (cat.object_label(o).to_string(), self.values[o].to_json()))
                .collect(),
            maps: (0..cat.morphism_count())
                .filter(|&g| !cat.is_identity(g))
                .map(|g| MapJson {
                    source: cat.object_label(cat.src(g)).to_string(),
                    target: cat.object_label(cat.tgt(g)).to_string(),
                    morphism: el.morphisms[g].0,
                    map: self.maps[g].to_json(),
                })
                .collect(),
        }
    }

    pub fn from_json(base: Arc<Presheaf>, j: &RepresentationJson) -> Result<Self> {
        let el = base.elements();
        let cat = &*el.category;
        let index: HashMap<&str, ObjId> =
            (0..cat.object_count()).map(|o| (cat.object_label(o), o)).collect();
        let mut values = vec![None; cat.object_count()];
        for (label, v) in &j.values {
            let o = *index
                .get(label.as_str())
                .ok_or_else(|| Error::Structural(format!("unknown element {label}")))?;
            values[o] = Some(CoeffObject::from_json(v)?);
        }
        let values: Vec<CoeffObject> = values
            .into_iter()
            .enumerate()
            .map(|(o, v)| v.ok_or_else(|| Error::Structural(format!("no value at {}", cat.object_label(o)))))
            .collect::<Result<_>>()?;
        let mut maps: Vec<Option<CoeffMorphism>> = (0..cat.morphism_count())
            .map(|g| {
                cat.is_identity(g)
                    .then(|| CoeffMorphism::identity(values[cat.src(g)]))
            })
            .collect();
        for m in &j.maps {
            let (s, t) = (index.get(m.source.as_str()), index.get(m.target.as_str()));
            let (Some(&s), Some(&t)) = (s, t) else {
                return Err(Error::Structural(format!("unknown endpoints {} -> {}", m.source, m.target)));
            };
            let g = cat
                .hom(s, t)
                .into_iter()
                .find(|&g| el.morphisms[g].0 == m.morphism)
                .ok_or_else(|| Error::Structural(format!("no element morphism over {}", m.morphism)))?;
            maps[g] = Some(CoeffMorphism::from_json(&m.map)?);
        }
        let maps = maps
            .into_iter()
            .enumerate()
            .map(|(g, m)| m.ok_or_else(|| Error::Structural(format!("no map along element morphism {g}"))))
            .collect::<Result<_>>()?;
        Representation::new(base, j.kind, values, maps)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapJson {
    pub source: String,
    pub target: String,
    /// The underlying base morphism.
    pub morphism: MorId,
    pub map: MorphismJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepresentationJson {
    pub kind: CoeffKind,
    pub values: BTreeMap<String, ObjectJson>,
    pub maps: Vec<MapJson>,
}

/// A natural transformation between representations over the same base.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RepMorphism {
    pub source: Arc<Representation>,
    pub target: Arc<Representation>,
    components: Vec<CoeffMorphism>,
}

impl RepMorphism {
    pub fn new(
        source: Arc<Representation>,
        target: Arc<Representation>,
        components: Vec<CoeffMorphism>,
    ) -> Result<Self> {
        let f = RepMorphism {
            source,
            target,
            components,
        };
        if let Some(first) = f.check().into_iter().next() {
            return Err(Error::Structural(first));
        }
        Ok(f)
    }

    /// Assembles components computed by a construction that guarantees
    /// naturality; checked in debug builds.
    pub(crate) fn assemble(
        source: Arc<Representation>,
        target: Arc<Representation>,
        components: Vec<CoeffMorphism>,
    ) -> Self {
        let f = RepMorphism {
            source,
            target,
            components,
        };
        debug_assert!(f.check().is_empty(), "{:?}", f.check());
        f
    }

    pub fn check(&self) -> Vec<String> {
        let (m, n) = (&*self.source, &*self.target);
        if *m.base != *n.base {
            return vec!["natural transformation between different bases".into()];
        }
        let el = m.base.elements();
        let cat = &*el.category;
        if self.components.len() != cat.object_count() {
            return vec!["wrong number of components".into()];
        }
        let mut out = Vec::new();
        for o in 0..cat.object_count() {
            let c = &self.components[o];
            if c.source() != m.values[o] || c.target() != n.values[o] {
                out.push(format!("component at element {o} has the wrong type"));
            }
        }
        if !out.is_empty() {
            return out;
        }
        for g in 0..cat.morphism_count() {
            if cat.is_identity(g) {
                continue;
            }
            let (y, x) = (cat.src(g), cat.tgt(g));
            let lhs = self.components[y].compose(&m.maps[g]).expect("typed");
            let rhs = n.maps[g].compose(&self.components[x]).expect("typed");
            if lhs != rhs {
                out.push(format!("naturality fails along element morphism {g}"));
            }
        }
        out
    }

    pub fn identity(m: Arc<Representation>) -> Self {
        let components = m.values.iter().map(|&v| CoeffMorphism::identity(v)).collect();
        RepMorphism {
            source: m.clone(),
            target: m,
            components,
        }
    }

    pub fn zero(source: Arc<Representation>, target: Arc<Representation>) -> Result<Self> {
        let components = source
            .values
            .iter()
            .zip(&target.values)
            .map(|(&s, &t)| CoeffMorphism::zero(s, t))
            .collect::<Result<_>>()?;
        Ok(RepMorphism {
            source,
            target,
            components,
        })
    }

    pub fn component(&self, o: ObjId) -> &CoeffMorphism {
        &self.components[o]
    }

    pub fn components(&self) -> &[CoeffMorphism] {
        &self.components
    }

    /// `self ∘ rhs`.
    pub fn compose(&self, rhs: &RepMorphism) -> Result<RepMorphism> {
        if rhs.target != self.source {
            return Err(Error::Structural("natural transformations are not composable".into()));
        }
        let components = self
            .components
            .iter()
            .zip(&rhs.components)
            .map(|(g, f)| g.compose(f))
            .collect::<Result<_>>()?;
        Ok(RepMorphism {
            source: rhs.source.clone(),
            target: self.target.clone(),
            components,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target
            && self
                .components
                .iter()
                .zip(self.source.values.iter())
                .all(|(c, &v)| *c == CoeffMorphism::identity(v))
    }

    pub fn is_iso(&self) -> bool {
        self.components.iter().all(CoeffMorphism::is_iso)
    }

    pub fn is_epi(&self) -> bool {
        self.components.iter().all(CoeffMorphism::is_epi)
    }

    pub fn is_mono(&self) -> bool {
        self.components.iter().all(CoeffMorphism::is_mono)
    }

    pub fn inverse(&self) -> Option<RepMorphism> {
        let components = self
            .components
            .iter()
            .map(CoeffMorphism::inverse)
            .collect::<Option<_>>()?;
        Some(RepMorphism {
            source: self.target.clone(),
            target: self.source.clone(),
            components,
        })
    }

    /// Componentwise sum (linear case).
    pub fn add(&self, rhs: &RepMorphism) -> Result<RepMorphism> {
        if self.source != rhs.source || self.target != rhs.target {
            return Err(Error::Structural("sum of non-parallel transformations".into()));
        }
        let components = self
            .components
            .iter()
            .zip(&rhs.components)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(RepMorphism {
            source: self.source.clone(),
            target: self.target.clone(),
            components,
        })
    }

    pub fn scale(&self, c: &Scalar) -> Result<RepMorphism> {
        let components = self
            .components
            .iter()
            .map(|a| a.scale(c))
            .collect::<Result<_>>()?;
        Ok(RepMorphism {
            source: self.source.clone(),
            target: self.target.clone(),
            components,
        })
    }

    /// All matrix entries in component order (linear case).
    pub fn flatten(&self) -> Vec<Scalar> {
        self.components
            .iter()
            .flat_map(|c| c.as_matrix().expect("linear").entries().to_vec())
            .collect()
    }

    pub fn to_json(&self) -> RepMorphismJson {
        let el = self.source.base.elements();
        let cat = &*el.category;
        RepMorphismJson {
            components: (0..cat.object_count())
                .map(|o| (cat.object_label(o).to_string(), self.components[o].to_json()))
                .collect(),
        }
    }

    pub fn from_json(
        source: Arc<Representation>,
        target: Arc<Representation>,
        j: &RepMorphismJson,
    ) -> Result<Self> {
        let el = source.base.elements();
        let cat = &*el.category;
        let components = (0..cat.object_count())
            .map(|o| {
                let label = cat.object_label(o);
                let c = j
                    .components
                    .get(label)
                    .ok_or_else(|| Error::Structural(format!("no component at {label}")))?;
                CoeffMorphism::from_json(c)
            })
            .collect::<Result<_>>()?;
        RepMorphism::new(source, target, components)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepMorphismJson {
    pub components: BTreeMap<String, MorphismJson>,
}

/// `Σ coeffs[i] · basis[i]`; the basis must be non-empty.
pub fn linear_combination(basis: &[RepMorphism], coeffs: &[Scalar]) -> Result<RepMorphism> {
    let mut acc = RepMorphism::zero(basis[0].source.clone(), basis[0].target.clone())?;
    for (b, c) in basis.iter().zip(coeffs) {
        if !c.is_zero() {
            acc = acc.add(&b.scale(c)?)?;
        }
    }
    Ok(acc)
}

/// Rank of a family of parallel linear transformations.
pub fn span_rank(family: &[RepMorphism], field: Field) -> usize {
    if family.is_empty() {
        return 0;
    }
    let rows: Vec<Vec<Scalar>> = family.iter().map(RepMorphism::flatten).collect();
    let cols = rows[0].len();
    Matrix::from_rows(field, rows, cols).expect("parallel").rank(field)
}

fn reindex(functor: &CatFunctor, base: Arc<Presheaf>, m: &Representation) -> Representation {
    Representation {
        base,
        kind: m.kind,
        values: functor.object_map.iter().map(|&o| m.values[o]).collect(),
        maps: functor.morphism_map.iter().map(|&g| m.maps[g].clone()).collect(),
    }
}

/// Coefficients expressing `target` in terms of `family` (linear case), if
/// it lies in their span.
pub fn solve_in_span(family: &[RepMorphism], target: &RepMorphism, field: Field) -> Option<Vec<Scalar>> {
    let b = Matrix::column(target.flatten());
    if family.is_empty() {
        return b.is_zero().then(Vec::new);
    }
    let cols: Vec<Vec<Scalar>> = family.iter().map(RepMorphism::flatten).collect();
    let rows = (0..b.rows())
        .map(|i| cols.iter().map(|c| c[i].clone()).collect())
        .collect();
    let a = Matrix::from_rows(field, rows, family.len()).ok()?;
    let x = a.solve(&b, field)?;
    Some((0..x.rows()).map(|i| x.get(i, 0).clone()).collect())
}

/// `a* M₀ = M₀ ∘ ∫a`.
pub fn pullback_rep(a: &PresheafMorphism, m: &Representation) -> Result<Representation> {
    if *m.base != *a.target {
        return Err(Error::BaseMismatch("pullback of a representation over another base".into()));
    }
    Ok(reindex(&a.elements_functor(), a.source.clone(), m))
}

/// Componentwise reindexing of a natural transformation.
pub fn pullback_mor(a: &PresheafMorphism, f: &RepMorphism) -> Result<RepMorphism> {
    if *f.source.base != *a.target {
        return Err(Error::BaseMismatch("pullback of a transformation over another base".into()));
    }
    let functor = a.elements_functor();
    Ok(RepMorphism {
        source: Arc::new(reindex(&functor, a.source.clone(), &f.source)),
        target: Arc::new(reindex(&functor, a.source.clone(), &f.target)),
        components: functor
            .object_map
            .iter()
            .map(|&o| f.components[o].clone())
            .collect(),
    })
}

/// Colimit data of a direct image.
#[derive(Debug)]
pub struct DirectImage {
    pub source: Arc<Representation>,
    pub image: Arc<Representation>,
    colimits: Vec<Colimit>,
}

impl DirectImage {
    pub fn colimit(&self, z: ObjId) -> &Colimit {
        &self.colimits[z]
    }
}

/// Comma data at one object `z` of the base category of elements.
#[derive(Debug)]
struct CommaData {
    /// `(x, u)` pairs.
    objects: Vec<(ObjId, MorId)>,
    index: HashMap<(ObjId, MorId), usize>,
    /// Non-identity comma morphisms `(i, j, g)` with `g: x_i -> x_j`.
    arrows: Vec<(usize, usize, MorId)>,
    /// Per comma object, the morphism `z -> F x` along which the counit
    /// restricts, if one exists.
    counit_arrow: Vec<Option<MorId>>,
}

/// The adjunction `a_* ⊣ a*` along one presheaf morphism, with per-object
/// comma data and a memo of computed direct images.
#[derive(Debug)]
pub struct Adjunction {
    arrow: PresheafMorphism,
    functor: CatFunctor,
    direction: CommaDirection,
    commas: Vec<CommaData>,
    /// For each base element morphism `h: z' -> z`, the comma object at `z'`
    /// that each comma object at `z` restricts to.
    restriction: Vec<Vec<Option<usize>>>,
    /// For each cover element `x`, the comma object `(x, id)` at `F x`.
    unit_slot: Vec<usize>,
    images: Mutex<HashMap<Arc<Representation>, Arc<DirectImage>>>,
}

fn inverse_of(cat: &FinCategory, m: MorId) -> Option<MorId> {
    let (s, t) = (cat.src(m), cat.tgt(m));
    cat.hom(t, s)
        .into_iter()
        .find(|&v| cat.comp(v, m) == cat.identity(s) && cat.comp(m, v) == cat.identity(t))
}

impl Adjunction {
    pub fn new(arrow: &PresheafMorphism) -> Self {
        Self::with_direction(arrow, CommaDirection::Under)
    }

    /// The `Over` direction is the wrong one for contravariant
    /// representations; it is kept so the verifier can demonstrate that.
    /// Restrictions and counit legs are built only along invertible arrows.
    pub fn with_direction(arrow: &PresheafMorphism, direction: CommaDirection) -> Self {
        let functor = arrow.elements_functor();
        let cat0 = functor.codomain.clone();
        let commas: Vec<CommaData> = (0..cat0.object_count())
            .map(|z| {
                let k = comma_category(&functor, z, direction);
                let kc = &*k.category;
                let arrows = (0..kc.morphism_count())
                    .filter(|&m| !kc.is_identity(m))
                    .map(|m| (kc.src(m), kc.tgt(m), k.underlying[m]))
                    .collect();
                let counit_arrow = k
                    .objects
                    .iter()
                    .map(|&(_, u)| match direction {
                        CommaDirection::Under => Some(u),
                        CommaDirection::Over => inverse_of(&cat0, u),
                    })
                    .collect();
                let index = k.objects.iter().enumerate().map(|(i, &p)| (p, i)).collect();
                CommaData {
                    objects: k.objects,
                    index,
                    arrows,
                    counit_arrow,
                }
            })
            .collect();
        let restriction = (0..cat0.morphism_count())
            .map(|h| {
                let (z1, z) = (cat0.src(h), cat0.tgt(h));
                commas[z]
                    .objects
                    .iter()
                    .map(|&(x, u)| {
                        let u1 = match direction {
                            CommaDirection::Under => Some(cat0.comp(u, h)),
                            CommaDirection::Over => inverse_of(&cat0, h).map(|hi| cat0.comp(hi, u)),
                        };
                        u1.and_then(|u1| commas[z1].index.get(&(x, u1)).copied())
                    })
                    .collect()
            })
            .collect();
        let unit_slot = (0..functor.domain.object_count())
            .map(|x| {
                let fx = functor.obj(x);
                commas[fx].index[&(x, cat0.identity(fx))]
            })
            .collect();
        Adjunction {
            arrow: arrow.clone(),
            functor,
            direction,
            commas,
            restriction,
            unit_slot,
            images: Mutex::new(HashMap::new()),
        }
    }

    pub fn arrow(&self) -> &PresheafMorphism {
        &self.arrow
    }

    pub fn direction(&self) -> CommaDirection {
        self.direction
    }

    /// Number of objects of the comma category at a base element.
    pub fn comma_size(&self, z: ObjId) -> usize {
        self.commas[z].objects.len()
    }

    /// Comma objects `(x, u: z -> F x)` at `z`, in the order of the colimit
    /// cocone legs of every direct image.
    pub fn comma_objects(&self, z: ObjId) -> &[(ObjId, MorId)] {
        &self.commas[z].objects
    }

    /// Comma objects at `z` that are initial in their connected component.
    pub fn initial_comma_objects(&self, z: ObjId) -> Vec<(ObjId, MorId)> {
        let k = comma_category(&self.functor, z, self.direction);
        k.category
            .connected_components()
            .into_iter()
            .filter_map(|comp| {
                comp.iter()
                    .copied()
                    .find(|&i| comp.iter().all(|&j| k.category.hom(i, j).len() == 1))
                    .map(|i| k.objects[i])
            })
            .collect()
    }

    pub fn pullback(&self, n: &Representation) -> Result<Arc<Representation>> {
        if *n.base != *self.arrow.target {
            return Err(Error::BaseMismatch("pullback of a representation over another base".into()));
        }
        Ok(Arc::new(reindex(&self.functor, self.arrow.source.clone(), n)))
    }

    pub fn pullback_mor(&self, f: &RepMorphism) -> Result<RepMorphism> {
        Ok(RepMorphism {
            source: self.pullback(&f.source)?,
            target: self.pullback(&f.target)?,
            components: self
                .functor
                .object_map
                .iter()
                .map(|&o| f.components[o].clone())
                .collect(),
        })
    }

    pub fn direct_image(&self, m: &Arc<Representation>) -> Result<Arc<DirectImage>> {
        if *m.base != *self.arrow.source {
            return Err(Error::BaseMismatch("direct image of a representation over another base".into()));
        }
        if let Some(d) = self.images.lock().expect("memo lock").get(m) {
            return Ok(d.clone());
        }
        let cat0 = &*self.functor.codomain;
        let mut colimits = Vec::with_capacity(self.commas.len());
        for comma in &self.commas {
            let values: Vec<CoeffObject> = comma.objects.iter().map(|&(x, _)| m.values[x]).collect();
            let arrows: Vec<(usize, usize, &CoeffMorphism)> =
                comma.arrows.iter().map(|&(i, j, g)| (j, i, &m.maps[g])).collect();
            colimits.push(colimit(m.kind, &values, &arrows)?);
        }
        let mut maps = Vec::with_capacity(cat0.morphism_count());
        for h in 0..cat0.morphism_count() {
            let (z1, z) = (cat0.src(h), cat0.tgt(h));
            let legs = self.restriction[h]
                .iter()
                .map(|slot| {
                    slot.map(|j| colimits[z1].cocone[j].clone()).ok_or_else(|| {
                        Error::Precondition(format!(
                            "no restriction of comma objects along base element morphism {h}"
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            maps.push(colimits[z].mediate(&legs, colimits[z1].object)?);
        }
        let image = Arc::new(Representation {
            base: self.arrow.target.clone(),
            kind: m.kind,
            values: colimits.iter().map(|c| c.object).collect(),
            maps,
        });
        debug_assert!(image.check().is_empty());
        let d = Arc::new(DirectImage {
            source: m.clone(),
            image,
            colimits,
        });
        self.images
            .lock()
            .expect("memo lock")
            .insert(m.clone(), d.clone());
        Ok(d)
    }

    pub fn push(&self, m: &Arc<Representation>) -> Result<Arc<Representation>> {
        Ok(self.direct_image(m)?.image.clone())
    }

    /// `a_* f`.
    pub fn push_mor(&self, f: &RepMorphism) -> Result<RepMorphism> {
        let (ds, dt) = (self.direct_image(&f.source)?, self.direct_image(&f.target)?);
        let components = self
            .commas
            .iter()
            .enumerate()
            .map(|(z, comma)| {
                let legs = comma
                    .objects
                    .iter()
                    .enumerate()
                    .map(|(i, &(x, _))| dt.colimits[z].cocone[i].compose(&f.components[x]))
                    .collect::<Result<Vec<_>>>()?;
                ds.colimits[z].mediate(&legs, dt.colimits[z].object)
            })
            .collect::<Result<_>>()?;
        Ok(RepMorphism::assemble(ds.image.clone(), dt.image.clone(), components))
    }

    /// `η_M: M -> a* a_* M`.
    pub fn unit(&self, m: &Arc<Representation>) -> Result<RepMorphism> {
        let d = self.direct_image(m)?;
        let target = self.pullback(&d.image)?;
        let components = self
            .unit_slot
            .iter()
            .enumerate()
            .map(|(x, &slot)| d.colimits[self.functor.obj(x)].cocone[slot].clone())
            .collect();
        Ok(RepMorphism::assemble(m.clone(), target, components))
    }

    /// `ε_N: a_* a* N -> N`.
    pub fn counit(&self, n: &Arc<Representation>) -> Result<RepMorphism> {
        let pn = self.pullback(n)?;
        let d = self.direct_image(&pn)?;
        let components = self
            .commas
            .iter()
            .enumerate()
            .map(|(z, comma)| {
                let legs = comma
                    .counit_arrow
                    .iter()
                    .map(|u| {
                        u.map(|u| n.maps[u].clone()).ok_or_else(|| {
                            Error::Precondition(format!(
                                "counit component at base element {z} not constructible"
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                d.colimits[z].mediate(&legs, n.values[z])
            })
            .collect::<Result<_>>()?;
        Ok(RepMorphism::assemble(d.image.clone(), n.clone(), components))
    }

    /// `θ: M -> a* N` to `ε_N ∘ a_* θ: a_* M -> N`.
    pub fn untranspose(&self, theta: &RepMorphism, n: &Arc<Representation>) -> Result<RepMorphism> {
        if *theta.target != *self.pullback(n)? {
            return Err(Error::Structural("transpose target is not a pullback of the given object".into()));
        }
        self.counit(n)?.compose(&self.push_mor(theta)?)
    }

    /// `ψ: a_* M -> N` to `a* ψ ∘ η_M: M -> a* N`.
    pub fn transpose(&self, m: &Arc<Representation>, psi: &RepMorphism) -> Result<RepMorphism> {
        self.pullback_mor(psi)?.compose(&self.unit(m)?)
    }
}

/// A hom-set of representations: every morphism (Set) or a basis (Vect).
#[derive(Clone, Debug)]
pub enum HomSet {
    All(Vec<RepMorphism>),
    Basis(Vec<RepMorphism>),
}

impl HomSet {
    pub fn morphisms(&self) -> &[RepMorphism] {
        match self {
            HomSet::All(v) | HomSet::Basis(v) => v,
        }
    }

    pub fn len(&self) -> usize {
        self.morphisms().len()
    }

    pub fn is_empty(&self) -> bool {
        self.morphisms().is_empty()
    }
}

/// `hom(M, N)`: all natural transformations in lexicographic order of
/// components (Set), or a basis of the solution space of the naturality
/// equations (Vect).
pub fn hom_reps(m: &Arc<Representation>, n: &Arc<Representation>, budget: u64) -> Result<HomSet> {
    if *m.base != *n.base {
        return Err(Error::BaseMismatch("hom between representations over different bases".into()));
    }
    if m.kind != n.kind {
        return Err(Error::KindMismatch("hom between different coefficient kinds".into()));
    }
    let el = m.base.elements();
    let cat = &*el.category;
    match m.kind {
        CoeffKind::Set => {
            let mut csp = FunctionalCsp::default();
            let vars: Vec<Vec<usize>> = (0..cat.object_count())
                .map(|o| (0..m.values[o].size()).map(|_| csp.add_var(n.values[o].size())).collect())
                .collect();
            for g in 0..cat.morphism_count() {
                if cat.is_identity(g) {
                    continue;
                }
                let (y, x) = (cat.src(g), cat.tgt(g));
                let mg = m.maps[g].as_set_map().expect("set");
                let ng = n.maps[g].as_set_map().expect("set");
                for (e, &img) in mg.iter().enumerate() {
                    csp.constrain(vars[x][e], vars[y][img], ng.to_vec());
                }
            }
            let sols = csp.solve_all(budget, "natural transformation search")?;
            Ok(HomSet::All(
                sols.into_iter()
                    .map(|s| RepMorphism {
                        source: m.clone(),
                        target: n.clone(),
                        components: (0..cat.object_count())
                            .map(|o| CoeffMorphism::Set {
                                target: n.values[o].size(),
                                map: vars[o].iter().map(|&v| s[v]).collect(),
                            })
                            .collect(),
                    })
                    .collect(),
            ))
        }
        CoeffKind::Vect(field) => {
            let system = NaturalitySystem::new(m, n);
            let kernel = system.matrix(field).kernel(field);
            let basis = (0..kernel.cols())
                .map(|c| system.morphism(m, n, field, |k| kernel.get(k, c).clone()))
                .collect();
            Ok(HomSet::Basis(basis))
        }
    }
}

/// The linear naturality equations for `hom(M, N)`: one unknown per matrix
/// entry of each component.
pub(crate) struct NaturalitySystem {
    offsets: Vec<usize>,
    unknowns: usize,
    rows: Vec<Vec<(usize, Scalar)>>,
}

impl NaturalitySystem {
    pub(crate) fn new(m: &Representation, n: &Representation) -> Self {
        let el = m.base.elements();
        let cat = &*el.category;
        let mut offsets = Vec::with_capacity(cat.object_count());
        let mut unknowns = 0;
        for o in 0..cat.object_count() {
            offsets.push(unknowns);
            unknowns += m.values[o].size() * n.values[o].size();
        }
        let var = |o: ObjId, i: usize, k: usize| offsets[o] + i * m.values[o].size() + k;
        let mut rows = Vec::new();
        for g in 0..cat.morphism_count() {
            if cat.is_identity(g) {
                continue;
            }
            let (y, x) = (cat.src(g), cat.tgt(g));
            let mg = m.maps[g].as_matrix().expect("linear");
            let ng = n.maps[g].as_matrix().expect("linear");
            // f_y · M(g) − N(g) · f_x = 0, entry (i, j)
            for i in 0..n.values[y].size() {
                for j in 0..m.values[x].size() {
                    let mut row: HashMap<usize, Scalar> = HashMap::new();
                    for k in 0..m.values[y].size() {
                        let c = mg.get(k, j);
                        if !c.is_zero() {
                            *row.entry(var(y, i, k)).or_insert_with(Scalar::zero) += c;
                        }
                    }
                    for k in 0..n.values[x].size() {
                        let c = ng.get(i, k);
                        if !c.is_zero() {
                            *row.entry(var(x, k, j)).or_insert_with(Scalar::zero) -= c;
                        }
                    }
                    let mut row: Vec<(usize, Scalar)> = row.into_iter().filter(|(_, c)| !c.is_zero()).collect();
                    if !row.is_empty() {
                        row.sort_by_key(|e| e.0);
                        rows.push(row);
                    }
                }
            }
        }
        NaturalitySystem {
            offsets,
            unknowns,
            rows,
        }
    }

    pub(crate) fn matrix(&self, field: Field) -> Matrix {
        let mut a = Matrix::zeros(self.rows.len(), self.unknowns);
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row {
                a.set(r, *c, field.reduce(v.clone()));
            }
        }
        a
    }

    pub(crate) fn morphism(
        &self,
        m: &Arc<Representation>,
        n: &Arc<Representation>,
        field: Field,
        coord: impl Fn(usize) -> Scalar,
    ) -> RepMorphism {
        let components = (0..self.offsets.len())
            .map(|o| {
                let (s, t) = (m.values[o].size(), n.values[o].size());
                let mut mat = Matrix::zeros(t, s);
                for i in 0..t {
                    for k in 0..s {
                        mat.set(i, k, coord(self.offsets[o] + i * s + k));
                    }
                }
                CoeffMorphism::Vect { field, matrix: mat }
            })
            .collect();
        RepMorphism {
            source: m.clone(),
            target: n.clone(),
            components,
        }
    }
}

/// One failed adjunction law.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjunctionFailure {
    pub law: String,
    pub detail: String,
}

/// Checks both triangle identities on every sample and that transposition
/// is a bijection on every hom-set between samples. An empty result means
/// the adjunction verified.
pub fn verify_adjunction(
    adj: &Adjunction,
    cover_samples: &[Arc<Representation>],
    base_samples: &[Arc<Representation>],
    budget: u64,
) -> Result<Vec<AdjunctionFailure>> {
    let mut out = Vec::new();
    let mut fail = |law: &str, detail: String| {
        out.push(AdjunctionFailure {
            law: law.to_string(),
            detail,
        })
    };
    const LEFT: &str = "(eps a_*) . (a_* eta) = id";
    const RIGHT: &str = "(a* eps) . (eta a*) = id";
    for (i, m) in cover_samples.iter().enumerate() {
        let tri = || -> Result<bool> {
            let eta = adj.unit(m)?;
            let pushed = adj.push(m)?;
            let lhs = adj.counit(&pushed)?.compose(&adj.push_mor(&eta)?)?;
            Ok(lhs.is_identity())
        };
        match tri() {
            Ok(true) => {}
            Ok(false) => fail(LEFT, format!("cover sample {i}: composite is not the identity")),
            Err(e) => fail(LEFT, format!("cover sample {i}: {e}")),
        }
    }
    for (i, n) in base_samples.iter().enumerate() {
        let tri = || -> Result<bool> {
            let pn = adj.pullback(n)?;
            let lhs = adj.pullback_mor(&adj.counit(n)?)?.compose(&adj.unit(&pn)?)?;
            Ok(lhs.is_identity())
        };
        match tri() {
            Ok(true) => {}
            Ok(false) => fail(RIGHT, format!("base sample {i}: composite is not the identity")),
            Err(e) => fail(RIGHT, format!("base sample {i}: {e}")),
        }
    }
    for (i, m) in cover_samples.iter().enumerate() {
        for (j, n) in base_samples.iter().enumerate() {
            let pushed = match adj.push(m) {
                Ok(p) => p,
                Err(e) => {
                    fail("transpose bijection", format!("({i},{j}): {e}"));
                    continue;
                }
            };
            let pn = adj.pullback(n)?;
            let left = hom_reps(&pushed, n, budget)?;
            let right = hom_reps(m, &pn, budget)?;
            let mut bad = None;
            let transposed: Vec<RepMorphism> = left
                .morphisms()
                .iter()
                .map(|psi| adj.transpose(m, psi))
                .collect::<Result<_>>()?;
            for (psi, t) in left.morphisms().iter().zip(&transposed) {
                if adj.untranspose(t, n)? != *psi {
                    bad = Some("untranspose . transpose != id".to_string());
                    break;
                }
            }
            if bad.is_none() {
                for theta in right.morphisms() {
                    let back = adj.untranspose(theta, n)?;
                    if adj.transpose(m, &back)? != *theta {
                        bad = Some("transpose . untranspose != id".to_string());
                        break;
                    }
                }
            }
            if bad.is_none() {
                match (&left, m.kind) {
                    (HomSet::All(_), _) => {
                        let distinct: HashSet<&RepMorphism> = transposed.iter().collect();
                        if distinct.len() != transposed.len() || left.len() != right.len() {
                            bad = Some(format!("hom sizes {} and {} do not match", left.len(), right.len()));
                        }
                    }
                    (HomSet::Basis(_), CoeffKind::Vect(field)) => {
                        if left.len() != right.len() || span_rank(&transposed, field) != left.len() {
                            bad = Some(format!("hom dimensions {} and {} do not match", left.len(), right.len()));
                        }
                    }
                    _ => unreachable!("basis only for linear coefficients"),
                }
            }
            if let Some(detail) = bad {
                fail("transpose bijection", format!("({i},{j}): {detail}"));
            }
        }
    }
    Ok(out)
}

/// An arrow `M₁ -> M₀` of the total category lying over `a: A₁ -> A₀`, given
/// by either of its two transposes.
#[derive(Clone, Debug)]
pub struct TotalArrow {
    pub base: PresheafMorphism,
    pub source: Arc<Representation>,
    pub target: Arc<Representation>,
    pub tilde_cart: Option<RepMorphism>,
    pub tilde_cocart: Option<RepMorphism>,
}

impl TotalArrow {
    /// From `M₁ -> a* M₀`.
    pub fn from_cart(adj: &Adjunction, target: Arc<Representation>, cart: RepMorphism) -> Result<Self> {
        if *cart.target != *adj.pullback(&target)? {
            return Err(Error::Structural("cartesian transpose must land in a* of the target".into()));
        }
        Ok(TotalArrow {
            base: adj.arrow.clone(),
            source: cart.source.clone(),
            target,
            tilde_cart: Some(cart),
            tilde_cocart: None,
        })
    }

    /// From `a_* M₁ -> M₀`.
    pub fn from_cocart(adj: &Adjunction, source: Arc<Representation>, cocart: RepMorphism) -> Result<Self> {
        if *cocart.source != *adj.push(&source)? {
            return Err(Error::Structural("cocartesian transpose must start at a_* of the source".into()));
        }
        Ok(TotalArrow {
            base: adj.arrow.clone(),
            target: cocart.target.clone(),
            source,
            tilde_cart: None,
            tilde_cocart: Some(cocart),
        })
    }

    pub fn cart(&self, adj: &Adjunction) -> Result<RepMorphism> {
        match (&self.tilde_cart, &self.tilde_cocart) {
            (Some(c), _) => Ok(c.clone()),
            (None, Some(cc)) => adj.transpose(&self.source, cc),
            (None, None) => Err(Error::Structural("total arrow without data".into())),
        }
    }

    pub fn cocart(&self, adj: &Adjunction) -> Result<RepMorphism> {
        match (&self.tilde_cocart, &self.tilde_cart) {
            (Some(c), _) => Ok(c.clone()),
            (None, Some(c)) => adj.untranspose(c, &self.target),
            (None, None) => Err(Error::Structural("total arrow without data".into())),
        }
    }

    /// Both transposes present and mutually transpose.
    pub fn is_consistent(&self, adj: &Adjunction) -> Result<bool> {
        match (&self.tilde_cart, &self.tilde_cocart) {
            (Some(c), Some(cc)) => Ok(adj.transpose(&self.source, cc)? == *c),
            _ => Ok(true),
        }
    }
}

pub fn is_cartesian(t: &TotalArrow, adj: &Adjunction) -> Result<bool> {
    Ok(t.cart(adj)?.is_iso())
}

pub fn is_cocartesian(t: &TotalArrow, adj: &Adjunction) -> Result<bool> {
    Ok(t.cocart(adj)?.is_iso())
}

/// Brute-force universal property: postcomposition with `f: X -> Y` is a
/// bijection `hom(T, X) -> hom(T, Y)` for `T ∈ {X, Y}` (Set: by
/// enumeration; Vect: by dimension and rank). This holds iff `f` is an
/// isomorphism, without inspecting `f` pointwise.
pub fn postcomposition_bijective(f: &RepMorphism, budget: u64) -> Result<bool> {
    for t in [&f.source, &f.target] {
        let dom = hom_reps(t, &f.source, budget)?;
        let cod = hom_reps(t, &f.target, budget)?;
        let images: Vec<RepMorphism> = dom
            .morphisms()
            .iter()
            .map(|g| f.compose(g))
            .collect::<Result<_>>()?;
        let ok = match (&dom, f.source.kind) {
            (HomSet::All(_), _) => {
                images.iter().collect::<HashSet<_>>().len() == images.len() && images.len() == cod.len()
            }
            (_, CoeffKind::Vect(field)) => dom.len() == cod.len() && span_rank(&images, field) == dom.len(),
            _ => unreachable!(),
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Dual of [`postcomposition_bijective`] via precomposition on `hom(-, T)`.
pub fn precomposition_bijective(f: &RepMorphism, budget: u64) -> Result<bool> {
    for t in [&f.source, &f.target] {
        let dom = hom_reps(&f.target, t, budget)?;
        let cod = hom_reps(&f.source, t, budget)?;
        let images: Vec<RepMorphism> = dom
            .morphisms()
            .iter()
            .map(|g| g.compose(f))
            .collect::<Result<_>>()?;
        let ok = match (&dom, f.source.kind) {
            (HomSet::All(_), _) => {
                images.iter().collect::<HashSet<_>>().len() == images.len() && images.len() == cod.len()
            }
            (_, CoeffKind::Vect(field)) => dom.len() == cod.len() && span_rank(&images, field) == dom.len(),
            _ => unreachable!(),
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `r(f) = ε_{a_* N} ∘ a_* f ∘ a_* η_M` for `f: T M -> T N`.
pub fn retraction_r(
    adj: &Adjunction,
    m: &Arc<Representation>,
    n: &Arc<Representation>,
    f: &RepMorphism,
) -> Result<RepMorphism> {
    let pushed_n = adj.push(n)?;
    let eta_m = adj.unit(m)?;
    adj.counit(&pushed_n)?
        .compose(&adj.push_mor(f)?)?
        .compose(&adj.push_mor(&eta_m)?)
}

/// Whether `a*: hom(M₀, N₀) -> hom(a* M₀, a* N₀)` is bijective for every
/// ordered pair drawn from `family`.
pub fn is_fully_faithful(adj: &Adjunction, family: &[Arc<Representation>], budget: u64) -> Result<bool> {
    for m in family {
        for n in family {
            let src = hom_reps(m, n, budget)?;
            let (pm, pn) = (adj.pullback(m)?, adj.pullback(n)?);
            let tgt = hom_reps(&pm, &pn, budget)?;
            let images: Vec<RepMorphism> = src
                .morphisms()
                .iter()
                .map(|g| adj.pullback_mor(g))
                .collect::<Result<_>>()?;
            let ok = match (&src, m.kind) {
                (HomSet::All(_), _) => {
                    images.iter().collect::<HashSet<_>>().len() == images.len() && images.len() == tgt.len()
                }
                (_, CoeffKind::Vect(field)) => src.len() == tgt.len() && span_rank(&images, field) == src.len(),
                _ => unreachable!(),
            };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// All representables over the category of elements of `base`.
pub fn representables(base: &Arc<Presheaf>, kind: CoeffKind) -> Vec<Arc<Representation>> {
    let n = base.elements().category.object_count();
    (0..n)
        .map(|o| Arc::new(Representation::representable(base.clone(), o, kind)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presheaf::Presheaf;

    fn arrow_cat() -> Arc<FinCategory> {
        Arc::new(
            FinCategory::new(
                vec!["0".into(), "1".into()],
                vec![(0, 0), (1, 1), (0, 1)],
                vec![0, 1],
                vec![(0, 0, 0), (1, 1, 1), (2, 0, 2), (1, 2, 2)],
            )
            .unwrap(),
        )
    }

    fn sample_arrow() -> PresheafMorphism {
        let cat = arrow_cat();
        let a1 = Arc::new(Presheaf::new(cat.clone(), vec![2, 2], vec![vec![0, 1], vec![0, 1], vec![0, 0]]).unwrap());
        PresheafMorphism::to_terminal(a1)
    }

    #[test]
    fn identity_pullback_is_exact() {
        let a = sample_arrow();
        let id = PresheafMorphism::identity(a.source.clone());
        for m in representables(&a.source, CoeffKind::Set) {
            assert_eq!(pullback_rep(&id, &m).unwrap(), *m);
        }
    }

    #[test]
    fn triangles_hold_on_representables() {
        let a = sample_arrow();
        let adj = Adjunction::new(&a);
        for kind in [CoeffKind::Set, CoeffKind::Vect(Field::Prime(3))] {
            let cover = representables(&a.source, kind);
            let base = representables(&a.target, kind);
            let report = verify_adjunction(&adj, &cover, &base, 100_000).unwrap();
            assert!(report.is_empty(), "{report:?}");
        }
    }

    #[test]
    fn over_direction_fails_by_name() {
        let a = sample_arrow();
        let adj = Adjunction::with_direction(&a, CommaDirection::Over);
        let cover = representables(&a.source, CoeffKind::Set);
        let base = representables(&a.target, CoeffKind::Set);
        let report = verify_adjunction(&adj, &cover, &base, 100_000).unwrap();
        assert!(report.iter().any(|f| f.law.contains("eps")));
    }

    #[test]
    fn unit_is_transpose_of_identity() {
        let a = sample_arrow();
        let adj = Adjunction::new(&a);
        for m in representables(&a.source, CoeffKind::Set) {
            let pushed = adj.push(&m).unwrap();
            let id = RepMorphism::identity(pushed.clone());
            assert_eq!(adj.transpose(&m, &id).unwrap(), adj.unit(&m).unwrap());
            let back = adj.untranspose(&adj.unit(&m).unwrap(), &pushed).unwrap();
            assert!(back.is_identity());
        }
    }

    #[test]
    fn json_round_trip() {
        let a = sample_arrow();
        for kind in [CoeffKind::Set, CoeffKind::Vect(Field::Rationals)] {
            for m in representables(&a.source, kind) {
                let j = serde_json::to_string(&m.to_json()).unwrap();
                let back: RepresentationJson = serde_json::from_str(&j).unwrap();
                assert_eq!(Representation::from_json(a.source.clone(), &back).unwrap(), *m);
            }
        }
    }
}
