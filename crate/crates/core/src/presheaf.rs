//! Presheaves of finite sets on a finite category, their categories of
//! elements, fibre products and descent shapes.
//!
//! Variance: `maps[φ]` for `φ: d -> c` is the restriction `A(c) -> A(d)`, and
//! a morphism `(d,δ) -> (c,γ)` of the category of elements is a base morphism
//! `φ: d -> c` with `A(φ)(γ) = δ`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::enumerate::FunctionalCsp;
use crate::error::{structural, Error, Result};
use crate::fincat::{CatFunctor, FinCategory, MorId, ObjId};

#[derive(Clone, Debug)]
pub struct Presheaf {
    base: Arc<FinCategory>,
    sizes: Vec<usize>,
    maps: Vec<Vec<usize>>,
    elements: OnceLock<Arc<Elements>>,
}

impl PartialEq for Presheaf {
    fn eq(&self, other: &Self) -> bool {
        self.sizes == other.sizes
            && self.maps == other.maps
            && (Arc::ptr_eq(&self.base, &other.base) || self.base == other.base)
    }
}

impl Eq for Presheaf {}

impl Hash for Presheaf {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.sizes.hash(state);
        self.maps.hash(state);
    }
}

/// The category of elements together with the labelling of its objects and
/// morphisms by base data.
#[derive(Debug)]
pub struct Elements {
    pub category: Arc<FinCategory>,
    /// Object `i` is `(c, γ)`.
    pub objects: Vec<(ObjId, usize)>,
    /// Morphism `k` is `(φ, γ)`: `(src φ, A(φ)γ) -> (tgt φ, γ)`.
    pub morphisms: Vec<(MorId, usize)>,
    obj_offset: Vec<usize>,
    mor_offset: Vec<usize>,
}

impl Elements {
    pub fn object(&self, c: ObjId, x: usize) -> ObjId {
        self.obj_offset[c] + x
    }

    pub fn morphism(&self, phi: MorId, x: usize) -> MorId {
        self.mor_offset[phi] + x
    }
}

impl Presheaf {
    pub fn new(base: Arc<FinCategory>, sizes: Vec<usize>, maps: Vec<Vec<usize>>) -> Result<Self> {
        let p = Presheaf {
            base,
            sizes,
            maps,
            elements: OnceLock::new(),
        };
        let problems = p.check();
        if let Some(first) = problems.into_iter().next() {
            return Err(Error::Structural(first));
        }
        Ok(p)
    }

    /// Lists every failed functoriality or typing condition.
    pub fn check(&self) -> Vec<String> {
        let cat = &*self.base;
        let mut out = Vec::new();
        if self.sizes.len() != cat.object_count() || self.maps.len() != cat.morphism_count() {
            out.push("presheaf tables do not match the base category".to_string());
            return out;
        }
        for phi in 0..cat.morphism_count() {
            let (d, c) = (cat.src(phi), cat.tgt(phi));
            let m = &self.maps[phi];
            if m.len() != self.sizes[c] || m.iter().any(|&y| y >= self.sizes[d]) {
                out.push(format!("restriction along morphism {phi} is not a map A({c}) -> A({d})"));
            }
        }
        if !out.is_empty() {
            return out;
        }
        for c in 0..cat.object_count() {
            let id = &self.maps[cat.identity(c)];
            if id.iter().enumerate().any(|(i, &y)| i != y) {
                out.push(format!("restriction along the identity of object {c} is not the identity"));
            }
        }
        for g in 0..cat.morphism_count() {
            for f in cat.into(cat.src(g)).to_vec() {
                let gf = cat.comp(g, f);
                // A(g∘f) = A(f)∘A(g)
                let lhs = &self.maps[gf];
                if lhs
                    .iter()
                    .enumerate()
                    .any(|(x, &y)| self.maps[f][self.maps[g][x]] != y)
                {
                    out.push(format!("A({gf}) != A({f}) . A({g})"));
                }
            }
        }
        out
    }

    pub fn base(&self) -> &Arc<FinCategory> {
        &self.base
    }

    pub fn size(&self, c: ObjId) -> usize {
        self.sizes[c]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// `A(φ)(x)`.
    pub fn restrict(&self, phi: MorId, x: usize) -> usize {
        self.maps[phi][x]
    }

    pub fn restriction(&self, phi: MorId) -> &[usize] {
        &self.maps[phi]
    }

    pub fn total_size(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// The presheaf with one element everywhere.
    pub fn terminal(base: Arc<FinCategory>) -> Self {
        let n = base.object_count();
        let m = base.morphism_count();
        Presheaf {
            base,
            sizes: vec![1; n],
            maps: vec![vec![0]; m],
            elements: OnceLock::new(),
        }
    }

    pub fn empty(base: Arc<FinCategory>) -> Self {
        let n = base.object_count();
        let m = base.morphism_count();
        Presheaf {
            base,
            sizes: vec![0; n],
            maps: vec![Vec::new(); m],
            elements: OnceLock::new(),
        }
    }

    /// `hom(-, c)`; the element of `hom(d, c)` at position `i` is `base.hom(d, c)[i]`.
    pub fn representable(base: Arc<FinCategory>, c: ObjId) -> Self {
        let cat = &*base;
        let homs: Vec<Vec<MorId>> = (0..cat.object_count()).map(|d| cat.hom(d, c)).collect();
        let pos: Vec<HashMap<MorId, usize>> = homs
            .iter()
            .map(|h| h.iter().enumerate().map(|(i, &m)| (m, i)).collect())
            .collect();
        let maps = (0..cat.morphism_count())
            .map(|phi| {
                let (e, d) = (cat.src(phi), cat.tgt(phi));
                homs[d].iter().map(|&psi| pos[e][&cat.comp(psi, phi)]).collect()
            })
            .collect();
        let sizes = homs.iter().map(Vec::len).collect();
        Presheaf {
            base,
            sizes,
            maps,
            elements: OnceLock::new(),
        }
    }

    /// Coproduct with its injections; elements of summand `k` come after
    /// those of summands `< k` at every object.
    pub fn coproduct(base: Arc<FinCategory>, parts: &[Arc<Presheaf>]) -> Result<(Arc<Presheaf>, Vec<PresheafMorphism>)> {
        let cat = &*base;
        for p in parts {
            if *p.base != *cat {
                return Err(Error::BaseMismatch("coproduct summands over different bases".into()));
            }
        }
        let n = cat.object_count();
        let mut offsets = vec![vec![0; n]; parts.len()];
        let mut sizes = vec![0; n];
        for (k, p) in parts.iter().enumerate() {
            for c in 0..n {
                offsets[k][c] = sizes[c];
                sizes[c] += p.sizes[c];
            }
        }
        let maps = (0..cat.morphism_count())
            .map(|phi| {
                let d = cat.src(phi);
                parts
                    .iter()
                    .enumerate()
                    .flat_map(|(k, p)| p.maps[phi].iter().map(move |&y| (k, y)))
                    .map(|(k, y)| offsets[k][d] + y)
                    .collect()
            })
            .collect();
        let sum = Arc::new(Presheaf {
            base: base.clone(),
            sizes,
            maps,
            elements: OnceLock::new(),
        });
        let injections = parts
            .iter()
            .enumerate()
            .map(|(k, p)| PresheafMorphism {
                source: p.clone(),
                target: sum.clone(),
                components: (0..n)
                    .map(|c| (0..p.sizes[c]).map(|x| offsets[k][c] + x).collect())
                    .collect(),
            })
            .collect();
        Ok((sum, injections))
    }

    /// The category of elements, built once and cached.
    pub fn elements(&self) -> Arc<Elements> {
        self.elements.get_or_init(|| Arc::new(self.build_elements())).clone()
    }

    fn build_elements(&self) -> Elements {
        let cat = &*self.base;
        let mut obj_offset = Vec::with_capacity(cat.object_count());
        let mut objects = Vec::new();
        for c in 0..cat.object_count() {
            obj_offset.push(objects.len());
            objects.extend((0..self.sizes[c]).map(|x| (c, x)));
        }
        let mut mor_offset = Vec::with_capacity(cat.morphism_count());
        let mut morphisms = Vec::new();
        let mut endpoints = Vec::new();
        for phi in 0..cat.morphism_count() {
            mor_offset.push(morphisms.len());
            let (d, c) = (cat.src(phi), cat.tgt(phi));
            for x in 0..self.sizes[c] {
                morphisms.push((phi, x));
                endpoints.push((obj_offset[d] + self.maps[phi][x], obj_offset[c] + x));
            }
        }
        let identity = objects
            .iter()
            .map(|&(c, x)| mor_offset[cat.identity(c)] + x)
            .collect();
        let mut compose = Vec::new();
        for (k2, &(psi, y)) in morphisms.iter().enumerate() {
            let c = cat.src(psi);
            let x = self.maps[psi][y];
            for &phi in cat.into(c) {
                let k1 = mor_offset[phi] + x;
                compose.push((k2, k1, mor_offset[cat.comp(psi, phi)] + y));
            }
        }
        let labels = objects
            .iter()
            .map(|&(c, x)| format!("({},{})", cat.object_label(c), x))
            .collect();
        let category = FinCategory::new(labels, endpoints, identity, compose)
            .expect("category of elements is well-formed for a valid presheaf");
        Elements {
            category: Arc::new(category),
            objects,
            morphisms,
            obj_offset,
            mor_offset,
        }
    }

    pub fn to_json(&self) -> PresheafJson {
        PresheafJson {
            sizes: self.sizes.clone(),
            maps: self.maps.clone(),
        }
    }

    pub fn from_json(base: Arc<FinCategory>, j: &PresheafJson) -> Result<Self> {
        Presheaf::new(base, j.sizes.clone(), j.maps.clone())
    }
}

impl fmt::Display for Presheaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "presheaf{:?}", self.sizes)
    }
}

/// A natural transformation of presheaves.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PresheafMorphism {
    pub source: Arc<Presheaf>,
    pub target: Arc<Presheaf>,
    components: Vec<Vec<usize>>,
}

impl PresheafMorphism {
    pub fn new(source: Arc<Presheaf>, target: Arc<Presheaf>, components: Vec<Vec<usize>>) -> Result<Self> {
        let m = PresheafMorphism {
            source,
            target,
            components,
        };
        if let Some(first) = m.check().into_iter().next() {
            return Err(Error::Structural(first));
        }
        Ok(m)
    }

    pub fn check(&self) -> Vec<String> {
        let (a, b) = (&*self.source, &*self.target);
        if *a.base != *b.base {
            return vec!["presheaf morphism between different bases".into()];
        }
        let cat = &*a.base;
        if self.components.len() != cat.object_count() {
            return vec!["presheaf morphism has the wrong number of components".into()];
        }
        let mut out = Vec::new();
        for c in 0..cat.object_count() {
            let u = &self.components[c];
            if u.len() != a.sizes[c] || u.iter().any(|&y| y >= b.sizes[c]) {
                out.push(format!("component at object {c} is not a map A({c}) -> B({c})"));
            }
        }
        if !out.is_empty() {
            return out;
        }
        for phi in 0..cat.morphism_count() {
            let (d, c) = (cat.src(phi), cat.tgt(phi));
            for x in 0..a.sizes[c] {
                if self.components[d][a.maps[phi][x]] != b.maps[phi][self.components[c][x]] {
                    out.push(format!("naturality fails along morphism {phi} at element {x}"));
                    break;
                }
            }
        }
        out
    }

    pub fn identity(p: Arc<Presheaf>) -> Self {
        let components = p.sizes.iter().map(|&n| (0..n).collect()).collect();
        PresheafMorphism {
            source: p.clone(),
            target: p,
            components,
        }
    }

    /// The unique morphism into the terminal presheaf.
    pub fn to_terminal(p: Arc<Presheaf>) -> Self {
        let target = Arc::new(Presheaf::terminal(p.base.clone()));
        let components = p.sizes.iter().map(|&n| vec![0; n]).collect();
        PresheafMorphism {
            source: p,
            target,
            components,
        }
    }

    pub fn component(&self, c: ObjId) -> &[usize] {
        &self.components[c]
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn apply(&self, c: ObjId, x: usize) -> usize {
        self.components[c][x]
    }

    /// `self ∘ rhs`.
    pub fn compose(&self, rhs: &PresheafMorphism) -> Result<PresheafMorphism> {
        if *rhs.target != *self.source {
            return Err(Error::BaseMismatch("presheaf morphisms are not composable".into()));
        }
        Ok(PresheafMorphism {
            source: rhs.source.clone(),
            target: self.target.clone(),
            components: rhs
                .components
                .iter()
                .zip(&self.components)
                .map(|(f, g)| f.iter().map(|&x| g[x]).collect())
                .collect(),
        })
    }

    /// Same underlying maps, ignoring how the endpoints are shared.
    pub fn same_as(&self, other: &PresheafMorphism) -> bool {
        self.components == other.components
            && *self.source == *other.source
            && *self.target == *other.target
    }

    pub fn is_iso(&self) -> bool {
        (0..self.components.len()).all(|c| {
            let n = self.target.sizes[c];
            let mut hit = vec![false; n];
            self.components[c].len() == n && self.components[c].iter().all(|&y| !std::mem::replace(&mut hit[y], true))
        })
    }

    pub fn is_identity(&self) -> bool {
        *self.source == *self.target
            && self
                .components
                .iter()
                .all(|u| u.iter().enumerate().all(|(i, &y)| i == y))
    }

    /// The induced functor between categories of elements.
    pub fn elements_functor(&self) -> CatFunctor {
        let (ea, eb) = (self.source.elements(), self.target.elements());
        let object_map = ea
            .objects
            .iter()
            .map(|&(c, x)| eb.object(c, self.components[c][x]))
            .collect();
        let cat = &*self.source.base;
        let morphism_map = ea
            .morphisms
            .iter()
            .map(|&(phi, x)| eb.morphism(phi, self.components[cat.tgt(phi)][x]))
            .collect();
        CatFunctor {
            domain: ea.category.clone(),
            codomain: eb.category.clone(),
            object_map,
            morphism_map,
        }
    }
}

/// All presheaf morphisms `source -> target` in lexicographic order of
/// their component tables.
pub fn presheaf_homs(source: &Arc<Presheaf>, target: &Arc<Presheaf>, budget: u64) -> Result<Vec<PresheafMorphism>> {
    let cat = &*source.base;
    let mut var = vec![Vec::new(); cat.object_count()];
    let mut csp = FunctionalCsp::default();
    for c in 0..cat.object_count() {
        for _ in 0..source.sizes[c] {
            var[c].push(csp.add_var(target.sizes[c]));
        }
    }
    for phi in 0..cat.morphism_count() {
        if cat.is_identity(phi) {
            continue;
        }
        let (d, c) = (cat.src(phi), cat.tgt(phi));
        for x in 0..source.sizes[c] {
            csp.constrain(var[c][x], var[d][source.maps[phi][x]], target.maps[phi].clone());
        }
    }
    let sols = csp.solve_all(budget, "presheaf morphism search")?;
    Ok(sols
        .into_iter()
        .map(|s| PresheafMorphism {
            source: source.clone(),
            target: target.clone(),
            components: var.iter().map(|vs| vs.iter().map(|&v| s[v]).collect()).collect(),
        })
        .collect())
}

/// Pointwise fibre product `A ×_C B` of `f: A -> C` and `g: B -> C`,
/// elements ordered lexicographically by pairs.
#[derive(Clone, Debug)]
pub struct FibreProduct {
    pub object: Arc<Presheaf>,
    pub first: PresheafMorphism,
    pub second: PresheafMorphism,
    pairs: Vec<Vec<(usize, usize)>>,
}

impl FibreProduct {
    pub fn pair(&self, c: ObjId, i: usize) -> (usize, usize) {
        self.pairs[c][i]
    }

    pub fn index_of(&self, c: ObjId, x: usize, y: usize) -> Option<usize> {
        self.pairs[c].binary_search(&(x, y)).ok()
    }
}

pub fn fibre_product(f: &PresheafMorphism, g: &PresheafMorphism) -> Result<FibreProduct> {
    if *f.target != *g.target {
        return Err(Error::BaseMismatch("fibre product of maps with different codomains".into()));
    }
    let (a, b) = (&f.source, &g.source);
    let cat = &*a.base;
    let pairs: Vec<Vec<(usize, usize)>> = (0..cat.object_count())
        .map(|c| {
            let mut v = Vec::new();
            for x in 0..a.sizes[c] {
                for y in 0..b.sizes[c] {
                    if f.components[c][x] == g.components[c][y] {
                        v.push((x, y));
                    }
                }
            }
            v
        })
        .collect();
    let maps = (0..cat.morphism_count())
        .map(|phi| {
            let (d, c) = (cat.src(phi), cat.tgt(phi));
            pairs[c]
                .iter()
                .map(|&(x, y)| {
                    let img = (a.maps[phi][x], b.maps[phi][y]);
                    pairs[d].binary_search(&img).expect("restriction preserves the fibre condition")
                })
                .collect()
        })
        .collect();
    let object = Arc::new(Presheaf {
        base: a.base.clone(),
        sizes: pairs.iter().map(Vec::len).collect(),
        maps,
        elements: OnceLock::new(),
    });
    let first = PresheafMorphism {
        source: object.clone(),
        target: a.clone(),
        components: pairs.iter().map(|v| v.iter().map(|p| p.0).collect()).collect(),
    };
    let second = PresheafMorphism {
        source: object.clone(),
        target: b.clone(),
        components: pairs.iter().map(|v| v.iter().map(|p| p.1).collect()).collect(),
    };
    Ok(FibreProduct {
        object,
        first,
        second,
        pairs,
    })
}

/// The simplicial-style data `A₃ ⇉ A₂ ⇉ A₁ -> A₀` of a descent problem.
/// `pairs` is the source of `a1, a2`; `triples` the source of `p1, p2, p3`.
#[derive(Clone, Debug)]
pub struct DescentShape {
    pub a: PresheafMorphism,
    pub a1: PresheafMorphism,
    pub a2: PresheafMorphism,
    pub p1: PresheafMorphism,
    pub p2: PresheafMorphism,
    pub p3: PresheafMorphism,
    pub delta: Option<PresheafMorphism>,
    pub s1: Option<PresheafMorphism>,
    pub s2: Option<PresheafMorphism>,
    pub sigma: Option<PresheafMorphism>,
    pub gamma: Option<PresheafMorphism>,
}

/// One violated shape equation, with the first place it fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeViolation {
    pub equation: String,
    pub object: ObjId,
    pub element: usize,
}

impl fmt::Display for ShapeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} fails at object {} on element {}",
            self.equation, self.object, self.element
        )
    }
}

impl DescentShape {
    pub fn base(&self) -> &Arc<Presheaf> {
        &self.a.target
    }

    pub fn cover(&self) -> &Arc<Presheaf> {
        &self.a.source
    }

    pub fn pairs(&self) -> &Arc<Presheaf> {
        &self.a1.source
    }

    pub fn triples(&self) -> &Arc<Presheaf> {
        &self.p1.source
    }

    pub fn category(&self) -> &Arc<FinCategory> {
        &self.a.source.base
    }

    /// `b1 = a1 p2`, the projection of triples onto the first factor.
    pub fn b1(&self) -> PresheafMorphism {
        self.a1.compose(&self.p2).expect("typed shape")
    }

    /// `b2 = a1 p1`.
    pub fn b2(&self) -> PresheafMorphism {
        self.a1.compose(&self.p1).expect("typed shape")
    }

    /// `b3 = a2 p1`.
    pub fn b3(&self) -> PresheafMorphism {
        self.a2.compose(&self.p1).expect("typed shape")
    }

    /// Checks that every arrow has the right endpoints.
    pub fn check_types(&self) -> Result<()> {
        let (a0, a1, a2, a3) = (self.base(), self.cover(), self.pairs(), self.triples());
        let expect = |name: &str, m: &PresheafMorphism, s: &Presheaf, t: &Presheaf| -> Result<()> {
            if *m.source != *s || *m.target != *t {
                return Err(structural(&format!("{name} has the wrong source or target")));
            }
            if let Some(problem) = m.check().into_iter().next() {
                return Err(structural(&format!("{name}: {problem}")));
            }
            Ok(())
        };
        expect("a", &self.a, a1, a0)?;
        expect("a1", &self.a1, a2, a1)?;
        expect("a2", &self.a2, a2, a1)?;
        for (name, p) in [("p1", &self.p1), ("p2", &self.p2), ("p3", &self.p3)] {
            expect(name, p, a3, a2)?;
        }
        if let Some(d) = &self.delta {
            expect("delta", d, a1, a2)?;
        }
        for (name, s) in [("s1", &self.s1), ("s2", &self.s2), ("gamma", &self.gamma)] {
            if let Some(s) = s {
                expect(name, s, a2, a3)?;
            }
        }
        if let Some(s) = &self.sigma {
            expect("sigma", s, a2, a2)?;
        }
        if self.delta.is_none() && (self.s1.is_some() || self.s2.is_some() || self.gamma.is_some()) {
            return Err(structural("s1, s2 and gamma are only meaningful with delta"));
        }
        if self.gamma.is_some() && self.sigma.is_none() {
            return Err(structural("gamma is given but sigma is not"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> ShapeJson {
        let comp = |m: &PresheafMorphism| m.components.clone();
        ShapeJson {
            category: (**self.category()).clone(),
            base: self.base().to_json(),
            cover: self.cover().to_json(),
            pairs: self.pairs().to_json(),
            triples: self.triples().to_json(),
            a: comp(&self.a),
            a1: comp(&self.a1),
            a2: comp(&self.a2),
            p1: comp(&self.p1),
            p2: comp(&self.p2),
            p3: comp(&self.p3),
            delta: self.delta.as_ref().map(comp),
            s1: self.s1.as_ref().map(comp),
            s2: self.s2.as_ref().map(comp),
            sigma: self.sigma.as_ref().map(comp),
            gamma: self.gamma.as_ref().map(comp),
        }
    }

    /// Parses and type-checks a shape; the shape equations are left to
    /// [`validate_shape`].
    pub fn from_json(j: &ShapeJson) -> Result<Self> {
        let cat = Arc::new(j.category.clone());
        if let Some(v) = cat.validate().into_iter().next() {
            return Err(Error::Structural(format!("base category: {v}")));
        }
        let a0 = Arc::new(Presheaf::from_json(cat.clone(), &j.base)?);
        let a1 = Arc::new(Presheaf::from_json(cat.clone(), &j.cover)?);
        let a2 = Arc::new(Presheaf::from_json(cat.clone(), &j.pairs)?);
        let a3 = Arc::new(Presheaf::from_json(cat, &j.triples)?);
        let mk = |name: &str, s: &Arc<Presheaf>, t: &Arc<Presheaf>, c: &[Vec<usize>]| {
            PresheafMorphism::new(s.clone(), t.clone(), c.to_vec())
                .map_err(|e| Error::Structural(format!("{name}: {e}")))
        };
        let opt = |name: &str, s: &Arc<Presheaf>, t: &Arc<Presheaf>, c: &Option<Vec<Vec<usize>>>| {
            c.as_ref().map(|c| mk(name, s, t, c)).transpose()
        };
        let shape = DescentShape {
            a: mk("a", &a1, &a0, &j.a)?,
            a1: mk("a1", &a2, &a1, &j.a1)?,
            a2: mk("a2", &a2, &a1, &j.a2)?,
            p1: mk("p1", &a3, &a2, &j.p1)?,
            p2: mk("p2", &a3, &a2, &j.p2)?,
            p3: mk("p3", &a3, &a2, &j.p3)?,
            delta: opt("delta", &a1, &a2, &j.delta)?,
            s1: opt("s1", &a2, &a3, &j.s1)?,
            s2: opt("s2", &a2, &a3, &j.s2)?,
            sigma: opt("sigma", &a2, &a2, &j.sigma)?,
            gamma: opt("gamma", &a2, &a3, &j.gamma)?,
        };
        shape.check_types()?;
        Ok(shape)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresheafJson {
    pub sizes: Vec<usize>,
    pub maps: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShapeJson {
    pub category: FinCategory,
    pub base: PresheafJson,
    pub cover: PresheafJson,
    pub pairs: PresheafJson,
    pub triples: PresheafJson,
    pub a: Vec<Vec<usize>>,
    pub a1: Vec<Vec<usize>>,
    pub a2: Vec<Vec<usize>>,
    pub p1: Vec<Vec<usize>>,
    pub p2: Vec<Vec<usize>>,
    pub p3: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s1: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s2: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<Vec<usize>>>,
}

/// First place where two parallel presheaf morphisms differ.
fn first_difference(f: &PresheafMorphism, g: &PresheafMorphism) -> Option<(ObjId, usize)> {
    for (c, (u, v)) in f.components.iter().zip(&g.components).enumerate() {
        if let Some(x) = u.iter().zip(v).position(|(p, q)| p != q) {
            return Some((c, x));
        }
    }
    None
}

fn equation(name: &str, lhs: PresheafMorphism, rhs: PresheafMorphism, out: &mut Vec<ShapeViolation>) {
    if let Some((object, element)) = first_difference(&lhs, &rhs) {
        out.push(ShapeViolation {
            equation: name.to_string(),
            object,
            element,
        });
    }
}

/// Every shape equation that fails, in a fixed order. Cartesianity is not
/// part of the axioms and is not checked.
pub fn validate_shape(s: &DescentShape) -> Result<Vec<ShapeViolation>> {
    s.check_types()?;
    let c = |g: &PresheafMorphism, f: &PresheafMorphism| g.compose(f).expect("typed shape");
    let id1 = PresheafMorphism::identity(s.cover().clone());
    let id2 = PresheafMorphism::identity(s.pairs().clone());
    let mut out = Vec::new();
    equation("a a1 = a a2", c(&s.a, &s.a1), c(&s.a, &s.a2), &mut out);
    equation("a1 p2 = a1 p3", c(&s.a1, &s.p2), c(&s.a1, &s.p3), &mut out);
    equation("a1 p1 = a2 p3", c(&s.a1, &s.p1), c(&s.a2, &s.p3), &mut out);
    equation("a2 p1 = a2 p2", c(&s.a2, &s.p1), c(&s.a2, &s.p2), &mut out);
    if let Some(d) = &s.delta {
        equation("a1 delta = id", c(&s.a1, d), id1.clone(), &mut out);
        equation("a2 delta = id", c(&s.a2, d), id1.clone(), &mut out);
        if let Some(s1) = &s.s1 {
            equation("p1 s1 = delta a2", c(&s.p1, s1), c(d, &s.a2), &mut out);
            equation("p2 s1 = id", c(&s.p2, s1), id2.clone(), &mut out);
            equation("p3 s1 = id", c(&s.p3, s1), id2.clone(), &mut out);
        }
        if let Some(s2) = &s.s2 {
            equation("p1 s2 = id", c(&s.p1, s2), id2.clone(), &mut out);
            equation("p2 s2 = id", c(&s.p2, s2), id2.clone(), &mut out);
            equation("p3 s2 = delta a1", c(&s.p3, s2), c(d, &s.a1), &mut out);
        }
        if let (Some(sigma), Some(gamma)) = (&s.sigma, &s.gamma) {
            equation("p1 gamma = sigma", c(&s.p1, gamma), sigma.clone(), &mut out);
            equation("p2 gamma = delta a1", c(&s.p2, gamma), c(d, &s.a1), &mut out);
            equation("p3 gamma = id", c(&s.p3, gamma), id2.clone(), &mut out);
        }
    }
    if let Some(sigma) = &s.sigma {
        equation("sigma sigma = id", c(sigma, sigma), id2, &mut out);
    }
    Ok(out)
}

/// The standard shape of a single arrow `a`: pairs and triples of elements
/// with a common image, projections, diagonals, swap and `(x,y) ↦ (x,y,x)`.
pub fn canonical_shape(a: &PresheafMorphism) -> Result<DescentShape> {
    let fp = fibre_product(a, a)?;
    let a1p = a.source.clone();
    let pairs = fp.object.clone();
    let cat = &*a1p.base;
    let n = cat.object_count();
    let triples_list: Vec<Vec<(usize, usize, usize)>> = (0..n)
        .map(|c| {
            let mut v = Vec::new();
            let s = a1p.sizes[c];
            for x in 0..s {
                for y in 0..s {
                    for z in 0..s {
                        let ac = &a.components[c];
                        if ac[x] == ac[y] && ac[y] == ac[z] {
                            v.push((x, y, z));
                        }
                    }
                }
            }
            v
        })
        .collect();
    let tri_index = |c: ObjId, t: (usize, usize, usize)| triples_list[c].binary_search(&t).expect("triple");
    let maps = (0..cat.morphism_count())
        .map(|phi| {
            let (d, c) = (cat.src(phi), cat.tgt(phi));
            let r = &a1p.maps[phi];
            triples_list[c]
                .iter()
                .map(|&(x, y, z)| tri_index(d, (r[x], r[y], r[z])))
                .collect()
        })
        .collect();
    let triples = Arc::new(Presheaf {
        base: a1p.base.clone(),
        sizes: triples_list.iter().map(Vec::len).collect(),
        maps,
        elements: OnceLock::new(),
    });
    let pair_idx = |c: ObjId, x: usize, y: usize| fp.index_of(c, x, y).expect("pair");
    let proj = |f: &dyn Fn(usize, usize, usize) -> (usize, usize)| PresheafMorphism {
        source: triples.clone(),
        target: pairs.clone(),
        components: (0..n)
            .map(|c| {
                triples_list[c]
                    .iter()
                    .map(|&(x, y, z)| {
                        let (p, q) = f(x, y, z);
                        pair_idx(c, p, q)
                    })
                    .collect()
            })
            .collect(),
    };
    let p1 = proj(&|_, y, z| (y, z));
    let p2 = proj(&|x, _, z| (x, z));
    let p3 = proj(&|x, y, _| (x, y));
    let from_pairs = |f: &dyn Fn(usize, usize) -> (usize, usize, usize)| PresheafMorphism {
        source: pairs.clone(),
        target: triples.clone(),
        components: (0..n)
            .map(|c| {
                (0..pairs.sizes[c])
                    .map(|i| {
                        let (x, y) = fp.pair(c, i);
                        tri_index(c, f(x, y))
                    })
                    .collect()
            })
            .collect(),
    };
    let s1 = from_pairs(&|x, y| (x, y, y));
    let s2 = from_pairs(&|x, y| (x, x, y));
    let gamma = from_pairs(&|x, y| (x, y, x));
    let sigma = PresheafMorphism {
        source: pairs.clone(),
        target: pairs.clone(),
        components: (0..n)
            .map(|c| {
                (0..pairs.sizes[c])
                    .map(|i| {
                        let (x, y) = fp.pair(c, i);
                        pair_idx(c, y, x)
                    })
                    .collect()
            })
            .collect(),
    };
    let delta = PresheafMorphism {
        source: a1p.clone(),
        target: pairs.clone(),
        components: (0..n)
            .map(|c| (0..a1p.sizes[c]).map(|x| pair_idx(c, x, x)).collect())
            .collect(),
    };
    let shape = DescentShape {
        a: a.clone(),
        a1: fp.first.clone(),
        a2: fp.second.clone(),
        p1,
        p2,
        p3,
        delta: Some(delta),
        s1: Some(s1),
        s2: Some(s2),
        sigma: Some(sigma),
        gamma: Some(gamma),
    };
    let violations = validate_shape(&shape)?;
    if let Some(v) = violations.first() {
        return Err(Error::Internal(format!("canonical shape: {v}")));
    }
    Ok(shape)
}

/// Outcome of searching a shape for its optional structure maps.
#[derive(Clone, Debug)]
pub struct StructureSearch {
    pub delta: Option<PresheafMorphism>,
    pub s1: Option<PresheafMorphism>,
    pub s2: Option<PresheafMorphism>,
    pub sigma: Option<PresheafMorphism>,
    pub gamma: Option<PresheafMorphism>,
}

impl StructureSearch {
    pub fn found(&self) -> BTreeMap<&'static str, bool> {
        BTreeMap::from([
            ("delta", self.delta.is_some()),
            ("s1", self.s1.is_some()),
            ("s2", self.s2.is_some()),
            ("sigma", self.sigma.is_some()),
            ("gamma", self.gamma.is_some()),
        ])
    }

    fn score(&self) -> usize {
        self.found().values().filter(|&&b| b).count()
    }
}

/// Exhaustive search for `Δ, s₁, s₂, σ, Γ` satisfying their equations. The
/// maps `s₁, s₂, Γ` depend on the chosen `Δ`; the first `Δ` (in enumeration
/// order) admitting the most companions is reported.
pub fn search_structure_maps(s: &DescentShape, budget: u64) -> Result<StructureSearch> {
    let (a1p, a2p, a3p) = (s.cover(), s.pairs(), s.triples());
    let id1 = PresheafMorphism::identity(a1p.clone());
    let id2 = PresheafMorphism::identity(a2p.clone());
    let c = |g: &PresheafMorphism, f: &PresheafMorphism| g.compose(f).expect("typed shape");
    let deltas: Vec<_> = presheaf_homs(a1p, a2p, budget)?
        .into_iter()
        .filter(|d| c(&s.a1, d).same_as(&id1) && c(&s.a2, d).same_as(&id1))
        .collect();
    let sigmas: Vec<_> = presheaf_homs(a2p, a2p, budget)?
        .into_iter()
        .filter(|sg| c(sg, sg).same_as(&id2))
        .collect();
    let lifts = presheaf_homs(a2p, a3p, budget)?;
    let mut best = StructureSearch {
        delta: None,
        s1: None,
        s2: None,
        sigma: sigmas.first().cloned(),
        gamma: None,
    };
    for d in deltas {
        let da1 = c(&d, &s.a1);
        let da2 = c(&d, &s.a2);
        let s1 = lifts
            .iter()
            .find(|t| c(&s.p1, t).same_as(&da2) && c(&s.p2, t).same_as(&id2) && c(&s.p3, t).same_as(&id2))
            .cloned();
        let s2 = lifts
            .iter()
            .find(|t| c(&s.p1, t).same_as(&id2) && c(&s.p2, t).same_as(&id2) && c(&s.p3, t).same_as(&da1))
            .cloned();
        let mut sg_pair = None;
        for sg in &sigmas {
            if let Some(g) = lifts
                .iter()
                .find(|t| c(&s.p1, t).same_as(sg) && c(&s.p2, t).same_as(&da1) && c(&s.p3, t).same_as(&id2))
            {
                sg_pair = Some((sg.clone(), g.clone()));
                break;
            }
        }
        let candidate = StructureSearch {
            delta: Some(d),
            s1,
            s2,
            sigma: sg_pair.as_ref().map(|p| p.0.clone()).or_else(|| sigmas.first().cloned()),
            gamma: sg_pair.map(|p| p.1),
        };
        if candidate.score() > best.score() {
            let done = candidate.score() == 5;
            best = candidate;
            if done {
                break;
            }
        }
    }
    Ok(best)
}
