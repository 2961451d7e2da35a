//! Finite categories given by explicit composition tables, functors between
//! them, comma categories and a few structural queries.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{structural, Error, Result};
use crate::unionfind::UnionFind;

pub type ObjId = usize;
pub type MorId = usize;

/// A finite category. Objects and morphisms are interned as dense integer
/// ids; the composition table is total on composable pairs.
#[derive(Clone, Debug)]
pub struct FinCategory {
    objects: Vec<String>,
    src: Vec<ObjId>,
    tgt: Vec<ObjId>,
    identity: Vec<MorId>,
    compose: HashMap<(MorId, MorId), MorId>,
    out_of: Vec<Vec<MorId>>,
    into: Vec<Vec<MorId>>,
}

impl PartialEq for FinCategory {
    fn eq(&self, other: &Self) -> bool {
        self.objects == other.objects
            && self.src == other.src
            && self.tgt == other.tgt
            && self.identity == other.identity
            && self.compose == other.compose
    }
}

impl Eq for FinCategory {}

/// One failed instance of a category or functor law.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum LawViolation {
    Associativity { h: MorId, g: MorId, f: MorId },
    LeftIdentity { f: MorId },
    RightIdentity { f: MorId },
    CompositeEndpoints { g: MorId, f: MorId, gf: MorId },
    FunctorIdentity { object: ObjId },
    FunctorComposite { g: MorId, f: MorId },
    FunctorEndpoints { f: MorId },
}

impl fmt::Display for LawViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LawViolation::Associativity { h, g, f: ff } => {
                write!(f, "associativity fails on (h,g,f) = ({h},{g},{ff})")
            }
            LawViolation::LeftIdentity { f: m } => write!(f, "id . {m} != {m}"),
            LawViolation::RightIdentity { f: m } => write!(f, "{m} . id != {m}"),
            LawViolation::CompositeEndpoints { g, f: ff, gf } => {
                write!(f, "composite {g}.{ff} = {gf} has wrong endpoints")
            }
            LawViolation::FunctorIdentity { object } => {
                write!(f, "identity of object {object} not preserved")
            }
            LawViolation::FunctorComposite { g, f: ff } => {
                write!(f, "composite {g}.{ff} not preserved")
            }
            LawViolation::FunctorEndpoints { f: m } => {
                write!(f, "image of morphism {m} has wrong endpoints")
            }
        }
    }
}

impl FinCategory {
    /// Builds a category from raw tables, rejecting dangling ids, identities
    /// that are not endomorphisms, ill-typed or missing composition entries.
    /// Category laws are checked separately by [`FinCategory::validate`].
    pub fn new(
        objects: Vec<String>,
        morphisms: Vec<(ObjId, ObjId)>,
        identity: Vec<MorId>,
        compose: Vec<(MorId, MorId, MorId)>,
    ) -> Result<Self> {
        let n_obj = objects.len();
        let n_mor = morphisms.len();
        let mut src = Vec::with_capacity(n_mor);
        let mut tgt = Vec::with_capacity(n_mor);
        let mut out_of = vec![Vec::new(); n_obj];
        let mut into = vec![Vec::new(); n_obj];
        for (m, &(s, t)) in morphisms.iter().enumerate() {
            if s >= n_obj || t >= n_obj {
                return Err(structural(format!("morphism {m} has dangling endpoint")));
            }
            src.push(s);
            tgt.push(t);
            out_of[s].push(m);
            into[t].push(m);
        }
        if identity.len() != n_obj {
            return Err(structural(format!(
                "identity table has {} entries for {n_obj} objects",
                identity.len()
            )));
        }
        for (o, &i) in identity.iter().enumerate() {
            if i >= n_mor || src[i] != o || tgt[i] != o {
                return Err(structural(format!(
                    "identity of object {o} is not an endomorphism of it"
                )));
            }
        }
        let mut table = HashMap::with_capacity(compose.len());
        for &(g, f, gf) in &compose {
            if g >= n_mor || f >= n_mor || gf >= n_mor {
                return Err(structural(format!("composition entry ({g},{f},{gf}) dangles")));
            }
            if src[g] != tgt[f] {
                return Err(structural(format!("composition entry ({g},{f}) not composable")));
            }
            if let Some(prev) = table.insert((g, f), gf) {
                if prev != gf {
                    return Err(structural(format!(
                        "composition entry ({g},{f}) given twice with different values"
                    )));
                }
            }
        }
        for o in 0..n_obj {
            for &f in &into[o] {
                for &g in &out_of[o] {
                    if !table.contains_key(&(g, f)) {
                        return Err(structural(format!("composite of ({g},{f}) missing")));
                    }
                }
            }
        }
        Ok(FinCategory {
            objects,
            src,
            tgt,
            identity,
            compose: table,
            out_of,
            into,
        })
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn morphism_count(&self) -> usize {
        self.src.len()
    }

    pub fn object_label(&self, o: ObjId) -> &str {
        &self.objects[o]
    }

    pub fn object_labels(&self) -> &[String] {
        &self.objects
    }

    pub fn src(&self, m: MorId) -> ObjId {
        self.src[m]
    }

    pub fn tgt(&self, m: MorId) -> ObjId {
        self.tgt[m]
    }

    pub fn identity(&self, o: ObjId) -> MorId {
        self.identity[o]
    }

    pub fn is_identity(&self, m: MorId) -> bool {
        self.identity[self.src[m]] == m
    }

    /// `g ∘ f`, or `None` if not composable.
    pub fn compose(&self, g: MorId, f: MorId) -> Option<MorId> {
        self.compose.get(&(g, f)).copied()
    }

    /// `g ∘ f` for a pair known to be composable.
    pub fn comp(&self, g: MorId, f: MorId) -> MorId {
        self.compose[&(g, f)]
    }

    pub fn out_of(&self, o: ObjId) -> &[MorId] {
        &self.out_of[o]
    }

    pub fn into(&self, o: ObjId) -> &[MorId] {
        &self.into[o]
    }

    /// Morphisms `x -> y`, in increasing id order.
    pub fn hom(&self, x: ObjId, y: ObjId) -> Vec<MorId> {
        self.out_of[x]
            .iter()
            .copied()
            .filter(|&m| self.tgt[m] == y)
            .collect()
    }

    /// Checks associativity, unit laws and endpoints of composites.
    pub fn validate(&self) -> Vec<LawViolation> {
        let mut out = Vec::new();
        for f in 0..self.morphism_count() {
            if self.comp(self.identity[self.tgt[f]], f) != f {
                out.push(LawViolation::LeftIdentity { f });
            }
            if self.comp(f, self.identity[self.src[f]]) != f {
                out.push(LawViolation::RightIdentity { f });
            }
        }
        let mut pairs: Vec<_> = self.compose.iter().map(|(&k, &v)| (k, v)).collect();
        pairs.sort_unstable();
        for &((g, f), gf) in &pairs {
            if self.src[gf] != self.src[f] || self.tgt[gf] != self.tgt[g] {
                out.push(LawViolation::CompositeEndpoints { g, f, gf });
            }
        }
        for &((g, f), gf) in &pairs {
            for &h in &self.out_of[self.tgt[g]] {
                let left = self.compose(h, gf);
                let right = self.compose(h, g).and_then(|hg| self.compose(hg, f));
                if left.is_none() || left != right {
                    out.push(LawViolation::Associativity { h, g, f });
                }
            }
        }
        out
    }

    /// The opposite category; morphism and object ids are preserved.
    pub fn opposite(&self) -> FinCategory {
        let morphisms = (0..self.morphism_count())
            .map(|m| (self.tgt[m], self.src[m]))
            .collect();
        let mut compose: Vec<_> = self
            .compose
            .iter()
            .map(|(&(g, f), &gf)| (f, g, gf))
            .collect();
        compose.sort_unstable();
        FinCategory::new(
            self.objects.clone(),
            morphisms,
            self.identity.clone(),
            compose,
        )
        .expect("opposite of a well-formed category")
    }

    /// Objects with exactly one morphism to every object.
    pub fn initial_objects(&self) -> Vec<ObjId> {
        let n = self.object_count();
        (0..n)
            .filter(|&o| {
                let mut counts = vec![0usize; n];
                for &m in &self.out_of[o] {
                    counts[self.tgt[m]] += 1;
                }
                counts.iter().all(|&c| c == 1)
            })
            .collect()
    }

    /// Objects with exactly one morphism from every object.
    pub fn terminal_objects(&self) -> Vec<ObjId> {
        let n = self.object_count();
        (0..n)
            .filter(|&o| {
                let mut counts = vec![0usize; n];
                for &m in &self.into[o] {
                    counts[self.src[m]] += 1;
                }
                counts.iter().all(|&c| c == 1)
            })
            .collect()
    }

    /// Classes of the zig-zag relation, each sorted, ordered by least member.
    pub fn connected_components(&self) -> Vec<Vec<ObjId>> {
        let mut uf = UnionFind::new(self.object_count());
        for m in 0..self.morphism_count() {
            uf.union(self.src[m], self.tgt[m]);
        }
        uf.classes()
    }

    /// The one-object category of a group given by its multiplication table.
    pub fn delooping(table: &[Vec<usize>]) -> Result<FinCategory> {
        let n = table.len();
        check_group_table(table)?;
        let e = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x))
            .expect("checked");
        let morphisms = vec![(0, 0); n];
        let mut compose = Vec::with_capacity(n * n);
        for g in 0..n {
            for f in 0..n {
                compose.push((g, f, table[g][f]));
            }
        }
        FinCategory::new(vec!["*".into()], morphisms, vec![e], compose)
    }

    pub fn to_json(&self) -> CategoryJson {
        let mut compose: Vec<[usize; 3]> = self
            .compose
            .iter()
            .map(|(&(g, f), &gf)| [g, f, gf])
            .collect();
        compose.sort_unstable();
        CategoryJson {
            objects: self.objects.clone(),
            morphisms: (0..self.morphism_count())
                .map(|m| MorphismJson {
                    id: m,
                    src: self.src[m],
                    tgt: self.tgt[m],
                })
                .collect(),
            identity: self.identity.clone(),
            compose,
        }
    }

    pub fn from_json(j: &CategoryJson) -> Result<FinCategory> {
        let n_obj = j.objects.len();
        let mut morphisms = vec![None; j.morphisms.len()];
        for m in &j.morphisms {
            if m.id >= morphisms.len() || morphisms[m.id].is_some() {
                return Err(structural(format!("morphism ids must be 0..n, got {}", m.id)));
            }
            morphisms[m.id] = Some((m.src, m.tgt));
        }
        let morphisms = morphisms.into_iter().map(|m| m.unwrap()).collect();
        if j.identity.len() != n_obj {
            return Err(structural("identity table must list one morphism per object"));
        }
        let compose = j.compose.iter().map(|c| (c[0], c[1], c[2])).collect();
        FinCategory::new(j.objects.clone(), morphisms, j.identity.clone(), compose)
    }
}

/// Checks closure, associativity, a two-sided identity and inverses.
pub fn check_group_table(table: &[Vec<usize>]) -> Result<()> {
    let n = table.len();
    if n == 0 {
        return Err(Error::Precondition("empty group table".into()));
    }
    for (i, row) in table.iter().enumerate() {
        if row.len() != n || row.iter().any(|&x| x >= n) {
            return Err(Error::Precondition(format!("row {i} of group table is malformed")));
        }
    }
    let e = (0..n)
        .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
        .ok_or_else(|| Error::Precondition("group table has no identity".into()))?;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if table[table[a][b]][c] != table[a][table[b][c]] {
                    return Err(Error::Precondition(format!(
                        "group table not associative at ({a},{b},{c})"
                    )));
                }
            }
        }
        if !(0..n).any(|b| table[a][b] == e && table[b][a] == e) {
            return Err(Error::Precondition(format!("element {a} has no inverse")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismJson {
    pub id: MorId,
    pub src: ObjId,
    pub tgt: ObjId,
}

/// Serialized form of a [`FinCategory`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryJson {
    pub objects: Vec<String>,
    pub morphisms: Vec<MorphismJson>,
    /// `identity[o]` is the identity of object `o`.
    pub identity: Vec<MorId>,
    pub compose: Vec<[usize; 3]>,
}

impl Serialize for FinCategory {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for FinCategory {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = CategoryJson::deserialize(d)?;
        FinCategory::from_json(&j).map_err(serde::de::Error::custom)
    }
}

/// A functor between finite categories.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatFunctor {
    pub domain: Arc<FinCategory>,
    pub codomain: Arc<FinCategory>,
    pub object_map: Vec<ObjId>,
    pub morphism_map: Vec<MorId>,
}

impl CatFunctor {
    pub fn new(
        domain: Arc<FinCategory>,
        codomain: Arc<FinCategory>,
        object_map: Vec<ObjId>,
        morphism_map: Vec<MorId>,
    ) -> Result<Self> {
        if object_map.len() != domain.object_count()
            || morphism_map.len() != domain.morphism_count()
            || object_map.iter().any(|&o| o >= codomain.object_count())
            || morphism_map.iter().any(|&m| m >= codomain.morphism_count())
        {
            return Err(structural("functor tables do not match domain/codomain"));
        }
        Ok(CatFunctor {
            domain,
            codomain,
            object_map,
            morphism_map,
        })
    }

    pub fn identity(c: Arc<FinCategory>) -> Self {
        CatFunctor {
            object_map: (0..c.object_count()).collect(),
            morphism_map: (0..c.morphism_count()).collect(),
            domain: c.clone(),
            codomain: c,
        }
    }

    pub fn obj(&self, o: ObjId) -> ObjId {
        self.object_map[o]
    }

    pub fn mor(&self, m: MorId) -> MorId {
        self.morphism_map[m]
    }

    /// `self ∘ other`.
    pub fn after(&self, other: &CatFunctor) -> Result<CatFunctor> {
        if *other.codomain != *self.domain {
            return Err(Error::BaseMismatch("functor composite: categories differ".into()));
        }
        Ok(CatFunctor {
            domain: other.domain.clone(),
            codomain: self.codomain.clone(),
            object_map: other.object_map.iter().map(|&o| self.object_map[o]).collect(),
            morphism_map: other
                .morphism_map
                .iter()
                .map(|&m| self.morphism_map[m])
                .collect(),
        })
    }

    pub fn validate(&self) -> Vec<LawViolation> {
        let (d, c) = (&self.domain, &self.codomain);
        let mut out = Vec::new();
        for o in 0..d.object_count() {
            if self.mor(d.identity(o)) != c.identity(self.obj(o)) {
                out.push(LawViolation::FunctorIdentity { object: o });
            }
        }
        for f in 0..d.morphism_count() {
            let img = self.mor(f);
            if c.src(img) != self.obj(d.src(f)) || c.tgt(img) != self.obj(d.tgt(f)) {
                out.push(LawViolation::FunctorEndpoints { f });
            }
        }
        if !out.is_empty() {
            return out;
        }
        let mut pairs: Vec<_> = d.compose.iter().map(|(&k, &v)| (k, v)).collect();
        pairs.sort_unstable();
        for ((g, f), gf) in pairs {
            if c.compose(self.mor(g), self.mor(f)) != Some(self.mor(gf)) {
                out.push(LawViolation::FunctorComposite { g, f });
            }
        }
        out
    }
}

/// Which slice of the target category a comma category is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommaDirection {
    /// Pairs `(x, u: z0 -> F x)`.
    Under,
    /// Pairs `(x, u: F x -> z0)`.
    Over,
}

/// A comma category of a functor `F: X -> Z` relative to an object `z0`.
#[derive(Clone, Debug)]
pub struct CommaCategory {
    pub category: Arc<FinCategory>,
    /// Object `i` is the pair `(x, u)`.
    pub objects: Vec<(ObjId, MorId)>,
    /// Underlying `X`-morphism of each comma morphism.
    pub underlying: Vec<MorId>,
    pub projection: CatFunctor,
    pub direction: CommaDirection,
    index: HashMap<(ObjId, MorId), usize>,
}

impl CommaCategory {
    pub fn index_of(&self, x: ObjId, u: MorId) -> Option<usize> {
        self.index.get(&(x, u)).copied()
    }
}

/// Builds `z0 ↓ F` (direction `Under`) or `F ↓ z0` (direction `Over`).
pub fn comma_category(f: &CatFunctor, z0: ObjId, direction: CommaDirection) -> CommaCategory {
    let (x_cat, z_cat) = (&*f.domain, &*f.codomain);
    let mut objects = Vec::new();
    for x in 0..x_cat.object_count() {
        let arrows = match direction {
            CommaDirection::Under => z_cat.hom(z0, f.obj(x)),
            CommaDirection::Over => z_cat.hom(f.obj(x), z0),
        };
        for u in arrows {
            objects.push((x, u));
        }
    }
    let index: HashMap<(ObjId, MorId), usize> =
        objects.iter().enumerate().map(|(i, &k)| (k, i)).collect();

    // Morphism k is (i, g, j): g: x_i -> x_j in X with the triangle commuting.
    let mut mor_src = Vec::new();
    let mut mor_tgt = Vec::new();
    let mut underlying = Vec::new();
    let mut mor_index: HashMap<(usize, MorId, usize), usize> = HashMap::new();
    let mut push = |i: usize, g: MorId, j: usize| {
        mor_index.insert((i, g, j), underlying.len());
        mor_src.push(i);
        mor_tgt.push(j);
        underlying.push(g);
    };
    for (i, &(x, u)) in objects.iter().enumerate() {
        for &g in x_cat.out_of(x) {
            let x2 = x_cat.tgt(g);
            match direction {
                CommaDirection::Under => {
                    let j = index[&(x2, z_cat.comp(f.mor(g), u))];
                    push(i, g, j);
                }
                CommaDirection::Over => {
                    for u2 in z_cat.hom(f.obj(x2), z0) {
                        if z_cat.comp(u2, f.mor(g)) == u {
                            push(i, g, index[&(x2, u2)]);
                        }
                    }
                }
            }
        }
    }
    let key = |i: usize, g: MorId, j: usize| (i, g, j);
    let identity: Vec<MorId> = objects
        .iter()
        .enumerate()
        .map(|(i, &(x, _))| mor_index[&key(i, x_cat.identity(x), i)])
        .collect();
    let mut compose = Vec::new();
    for k1 in 0..underlying.len() {
        let mid = mor_tgt[k1];
        for k2 in 0..underlying.len() {
            if mor_src[k2] != mid {
                continue;
            }
            let g = x_cat.comp(underlying[k2], underlying[k1]);
            let k = mor_index[&key(mor_src[k1], g, mor_tgt[k2])];
            compose.push((k2, k1, k));
        }
    }
    let labels = objects
        .iter()
        .map(|&(x, u)| format!("({},{})", x_cat.object_label(x), u))
        .collect();
    let category = Arc::new(
        FinCategory::new(
            labels,
            mor_src.iter().copied().zip(mor_tgt.iter().copied()).collect(),
            identity,
            compose,
        )
        .expect("comma category tables are well-formed"),
    );
    let projection = CatFunctor {
        domain: category.clone(),
        codomain: f.domain.clone(),
        object_map: objects.iter().map(|&(x, _)| x).collect(),
        morphism_map: underlying.clone(),
    };
    CommaCategory {
        category,
        objects,
        underlying,
        projection,
        direction,
        index,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn terminal() -> FinCategory {
        FinCategory::new(vec!["*".into()], vec![(0, 0)], vec![0], vec![(0, 0, 0)]).unwrap()
    }

    #[test]
    fn terminal_category_is_valid() {
        let c = terminal();
        assert!(c.validate().is_empty());
        assert_eq!(c.initial_objects(), vec![0]);
    }

    #[test]
    fn non_associative_monoid_is_reported() {
        // {e, a, b} with a.a = b, a.b = a, b.a = b, b.b = b, e neutral.
        let mut compose = Vec::new();
        let t = [[0, 1, 2], [1, 2, 1], [2, 2, 2]];
        for g in 0..3 {
            for f in 0..3 {
                compose.push((g, f, t[g][f]));
            }
        }
        let c = FinCategory::new(vec!["*".into()], vec![(0, 0); 3], vec![0], compose).unwrap();
        let report = c.validate();
        assert!(report
            .iter()
            .any(|v| matches!(v, LawViolation::Associativity { .. })));
        // (a.a).a = b.a = b but a.(a.a) = a.b = a
        assert!(report.contains(&LawViolation::Associativity { h: 1, g: 1, f: 1 }));
    }

    #[test]
    fn dangling_ids_are_structural() {
        let err = FinCategory::new(vec!["*".into()], vec![(0, 1)], vec![0], vec![]);
        assert!(matches!(err, Err(Error::Structural(_))));
        let err = FinCategory::new(vec!["*".into()], vec![(0, 0)], vec![0], vec![]);
        assert!(matches!(err, Err(Error::Structural(_))));
    }

    #[test]
    fn discrete_two_objects() {
        let c = FinCategory::new(
            vec!["a".into(), "b".into()],
            vec![(0, 0), (1, 1)],
            vec![0, 1],
            vec![(0, 0, 0), (1, 1, 1)],
        )
        .unwrap();
        assert!(c.initial_objects().is_empty());
        assert_eq!(c.connected_components().len(), 2);
    }

    #[test]
    fn delooping_c2() {
        let c = FinCategory::delooping(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(c.morphism_count(), 2);
        assert!(c.validate().is_empty());
        for g in 0..2 {
            assert!((0..2).any(|h| c.comp(g, h) == 0 && c.comp(h, g) == 0));
        }
        assert!(FinCategory::delooping(&[vec![0, 1], vec![1, 1]]).is_err());
    }

    #[test]
    fn json_round_trip_is_byte_stable() {
        let c = FinCategory::delooping(&[vec![0, 1], vec![1, 0]]).unwrap();
        let s1 = serde_json::to_string(&c).unwrap();
        let back: FinCategory = serde_json::from_str(&s1).unwrap();
        assert_eq!(back, c);
        assert_eq!(serde_json::to_string(&back).unwrap(), s1);
    }

    #[test]
    fn comma_of_identity_on_terminal() {
        let c = Arc::new(terminal());
        let id = CatFunctor::identity(c);
        for dir in [CommaDirection::Under, CommaDirection::Over] {
            let k = comma_category(&id, 0, dir);
            assert_eq!(k.category.object_count(), 1);
            assert!(k.category.validate().is_empty());
        }
    }
}
