//! The coefficient category: finite sets, or finite-dimensional vector spaces
//! over an exact field. Provides finite colimits, the epi/mono/iso
//! predicates, hom-set enumeration, idempotent splitting and the
//! free/forgetful pair between the two kinds.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fincat::FinCategory;
use crate::linalg::{Field, Matrix, Scalar};
use crate::unionfind::UnionFind;

/// Default cap on the number of candidates any enumeration may visit.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Which coefficient category a computation lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffKind {
    Set,
    Vect(Field),
}

impl fmt::Display for CoeffKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffKind::Set => write!(f, "Set"),
            CoeffKind::Vect(k) => write!(f, "Vect({k})"),
        }
    }
}

impl CoeffKind {
    pub fn initial(&self) -> CoeffObject {
        self.object(0)
    }

    /// The object of size `n`: an `n`-element set or an `n`-dimensional space.
    pub fn object(&self, n: usize) -> CoeffObject {
        match *self {
            CoeffKind::Set => CoeffObject::Set(n),
            CoeffKind::Vect(field) => CoeffObject::Vect { field, dim: n },
        }
    }
}

/// A finite set `{0, .., n-1}` or the space `field^dim`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoeffObject {
    Set(usize),
    Vect { field: Field, dim: usize },
}

impl CoeffObject {
    pub fn kind(&self) -> CoeffKind {
        match *self {
            CoeffObject::Set(_) => CoeffKind::Set,
            CoeffObject::Vect { field, .. } => CoeffKind::Vect(field),
        }
    }

    /// Cardinality or dimension.
    pub fn size(&self) -> usize {
        match *self {
            CoeffObject::Set(n) => n,
            CoeffObject::Vect { dim, .. } => dim,
        }
    }
}

impl fmt::Display for CoeffObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffObject::Set(n) => write!(f, "set[{n}]"),
            CoeffObject::Vect { field, dim } => write!(f, "{field}^{dim}"),
        }
    }
}

/// A morphism of the coefficient category. Set maps are total index maps;
/// linear maps are `dim target x dim source` matrices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CoeffMorphism {
    Set { target: usize, map: Vec<usize> },
    Vect { field: Field, matrix: Matrix },
}

impl CoeffMorphism {
    pub fn set_map(target: usize, map: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = map.iter().find(|&&x| x >= target) {
            return Err(Error::Structural(format!(
                "set map sends an element to {bad}, outside a target of size {target}"
            )));
        }
        Ok(CoeffMorphism::Set { target, map })
    }

    pub fn linear(field: Field, matrix: Matrix) -> Self {
        CoeffMorphism::Vect { field, matrix }
    }

    pub fn identity(obj: CoeffObject) -> Self {
        match obj {
            CoeffObject::Set(n) => CoeffMorphism::Set {
                target: n,
                map: (0..n).collect(),
            },
            CoeffObject::Vect { field, dim } => CoeffMorphism::Vect {
                field,
                matrix: Matrix::identity(dim),
            },
        }
    }

    /// The unique map out of the initial object.
    pub fn from_initial(target: CoeffObject) -> Self {
        match target {
            CoeffObject::Set(n) => CoeffMorphism::Set {
                target: n,
                map: Vec::new(),
            },
            CoeffObject::Vect { field, dim } => CoeffMorphism::Vect {
                field,
                matrix: Matrix::zeros(dim, 0),
            },
        }
    }

    pub fn zero(source: CoeffObject, target: CoeffObject) -> Result<Self> {
        match (source, target) {
            (CoeffObject::Vect { field, dim: s }, CoeffObject::Vect { dim: t, .. }) => {
                Ok(CoeffMorphism::Vect {
                    field,
                    matrix: Matrix::zeros(t, s),
                })
            }
            _ => Err(Error::KindMismatch("zero maps exist only between vector spaces".into())),
        }
    }

    pub fn source(&self) -> CoeffObject {
        match self {
            CoeffMorphism::Set { map, .. } => CoeffObject::Set(map.len()),
            CoeffMorphism::Vect { field, matrix } => CoeffObject::Vect {
                field: *field,
                dim: matrix.cols(),
            },
        }
    }

    pub fn target(&self) -> CoeffObject {
        match self {
            CoeffMorphism::Set { target, .. } => CoeffObject::Set(*target),
            CoeffMorphism::Vect { field, matrix } => CoeffObject::Vect {
                field: *field,
                dim: matrix.rows(),
            },
        }
    }

    pub fn kind(&self) -> CoeffKind {
        self.source().kind()
    }

    /// `self ∘ rhs`.
    pub fn compose(&self, rhs: &CoeffMorphism) -> Result<CoeffMorphism> {
        if rhs.target() != self.source() {
            return Err(Error::Structural(format!(
                "cannot compose {} -> {} after {} -> {}",
                self.source(),
                self.target(),
                rhs.source(),
                rhs.target()
            )));
        }
        Ok(match (self, rhs) {
            (CoeffMorphism::Set { target, map: g }, CoeffMorphism::Set { map: f, .. }) => {
                CoeffMorphism::Set {
                    target: *target,
                    map: f.iter().map(|&x| g[x]).collect(),
                }
            }
            (CoeffMorphism::Vect { field, matrix: g }, CoeffMorphism::Vect { matrix: f, .. }) => {
                CoeffMorphism::Vect {
                    field: *field,
                    matrix: g.mul(f, *field),
                }
            }
            _ => unreachable!("kinds agree once objects agree"),
        })
    }

    pub fn as_set_map(&self) -> Option<&[usize]> {
        match self {
            CoeffMorphism::Set { map, .. } => Some(map),
            _ => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&Matrix> {
        match self {
            CoeffMorphism::Vect { matrix, .. } => Some(matrix),
            _ => None,
        }
    }

    /// Surjective / full row rank.
    pub fn is_epi(&self) -> bool {
        match self {
            CoeffMorphism::Set { target, map } => {
                let mut hit = vec![false; *target];
                for &x in map {
                    hit[x] = true;
                }
                hit.into_iter().all(|h| h)
            }
            CoeffMorphism::Vect { field, matrix } => matrix.rank(*field) == matrix.rows(),
        }
    }

    /// Injective / full column rank.
    pub fn is_mono(&self) -> bool {
        match self {
            CoeffMorphism::Set { target, map } => {
                let mut hit = vec![false; *target];
                map.iter().all(|&x| !std::mem::replace(&mut hit[x], true))
            }
            CoeffMorphism::Vect { field, matrix } => matrix.rank(*field) == matrix.cols(),
        }
    }

    pub fn is_iso(&self) -> bool {
        self.source().size() == self.target().size() && self.is_mono()
    }

    pub fn inverse(&self) -> Option<CoeffMorphism> {
        if !self.is_iso() {
            return None;
        }
        Some(match self {
            CoeffMorphism::Set { map, .. } => {
                let mut inv = vec![0; map.len()];
                for (x, &y) in map.iter().enumerate() {
                    inv[y] = x;
                }
                CoeffMorphism::Set {
                    target: map.len(),
                    map: inv,
                }
            }
            CoeffMorphism::Vect { field, matrix } => CoeffMorphism::Vect {
                field: *field,
                matrix: matrix.inverse(*field)?,
            },
        })
    }

    /// Sum of two parallel linear maps.
    pub fn add(&self, rhs: &CoeffMorphism) -> Result<CoeffMorphism> {
        match (self, rhs) {
            (CoeffMorphism::Vect { field, matrix: a }, CoeffMorphism::Vect { matrix: b, .. })
                if a.rows() == b.rows() && a.cols() == b.cols() =>
            {
                Ok(CoeffMorphism::Vect {
                    field: *field,
                    matrix: a.add(b, *field),
                })
            }
            _ => Err(Error::KindMismatch("sum of non-parallel or non-linear maps".into())),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Result<CoeffMorphism> {
        match self {
            CoeffMorphism::Vect { field, matrix } => Ok(CoeffMorphism::Vect {
                field: *field,
                matrix: matrix.scale(c, *field),
            }),
            _ => Err(Error::KindMismatch("scaling a set map".into())),
        }
    }
}

/// Colimit of a finite diagram together with what is needed to compute
/// mediating morphisms out of it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Colimit {
    pub object: CoeffObject,
    /// Insertion of each diagram value into the colimit.
    pub cocone: Vec<CoeffMorphism>,
    section: Section,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Section {
    /// Canonical representative `(diagram object, element)` of each class.
    Set(Vec<(usize, usize)>),
    /// `total x dim` matrix choosing a preimage in the direct sum.
    Vect(Matrix),
}

/// Colimit of the diagram with the given values and arrows. An arrow
/// `(s, t, f)` carries `f: values[s] -> values[t]`; identities may be
/// omitted. Set: disjoint union modulo the generated equivalence, classes
/// ordered by their least element. Vect: direct sum modulo the relation
/// span, with the quotient basis given by the non-pivot coordinates.
pub fn colimit(
    kind: CoeffKind,
    values: &[CoeffObject],
    arrows: &[(usize, usize, &CoeffMorphism)],
) -> Result<Colimit> {
    for v in values {
        if v.kind() != kind {
            return Err(Error::KindMismatch(format!("{v} in a {kind} diagram")));
        }
    }
    for &(s, t, f) in arrows {
        if f.source() != values[s] || f.target() != values[t] {
            return Err(Error::Structural(format!(
                "diagram arrow {s}->{t} does not match its endpoint values"
            )));
        }
    }
    let mut offsets = Vec::with_capacity(values.len());
    let mut total = 0;
    for v in values {
        offsets.push(total);
        total += v.size();
    }
    match kind {
        CoeffKind::Set => {
            let mut uf = UnionFind::new(total);
            for &(s, t, f) in arrows {
                let map = f.as_set_map().expect("set diagram");
                for (x, &y) in map.iter().enumerate() {
                    uf.union(offsets[s] + x, offsets[t] + y);
                }
            }
            let mut class_of = vec![usize::MAX; total];
            let mut reps = Vec::new();
            for g in 0..total {
                let r = uf.find(g);
                if class_of[r] == usize::MAX {
                    class_of[r] = reps.len();
                    reps.push(r);
                }
                class_of[g] = class_of[r];
            }
            let n = reps.len();
            let cocone = values
                .iter()
                .enumerate()
                .map(|(i, v)| CoeffMorphism::Set {
                    target: n,
                    map: (0..v.size()).map(|x| class_of[offsets[i] + x]).collect(),
                })
                .collect();
            let owner: Vec<(usize, usize)> = values
                .iter()
                .enumerate()
                .flat_map(|(i, v)| (0..v.size()).map(move |x| (i, x)))
                .collect();
            Ok(Colimit {
                object: CoeffObject::Set(n),
                cocone,
                section: Section::Set(reps.into_iter().map(|g| owner[g]).collect()),
            })
        }
        CoeffKind::Vect(field) => {
            // Contract along invertible arrows: value `i` is expressed in the
            // coordinates of its tree root by `to_root[i]`.
            let n = values.len();
            let mut adjacent: Vec<Vec<(usize, Matrix)>> = vec![Vec::new(); n];
            for &(s, t, f) in arrows {
                let m = f.as_matrix().expect("vect diagram");
                if s != t {
                    if let Some(inv) = m.inverse(field) {
                        adjacent[t].push((s, m.clone()));
                        adjacent[s].push((t, inv));
                    }
                }
            }
            let mut root = vec![usize::MAX; n];
            let mut to_root: Vec<Option<Matrix>> = vec![None; n];
            for r in 0..n {
                if root[r] != usize::MAX {
                    continue;
                }
                root[r] = r;
                to_root[r] = Some(Matrix::identity(values[r].size()));
                let mut queue = std::collections::VecDeque::from([r]);
                while let Some(x) = queue.pop_front() {
                    let px = to_root[x].clone().expect("visited");
                    for (y, m) in &adjacent[x] {
                        if root[*y] == usize::MAX {
                            root[*y] = r;
                            to_root[*y] = Some(px.mul(m, field));
                            queue.push_back(*y);
                        }
                    }
                }
            }
            let to_root: Vec<Matrix> = to_root.into_iter().map(|m| m.expect("every value has a root")).collect();
            let mut reduced_offset = vec![usize::MAX; n];
            let mut reduced = 0;
            for i in (0..n).filter(|&i| root[i] == i) {
                reduced_offset[i] = reduced;
                reduced += values[i].size();
            }
            let mut rows = Vec::new();
            for &(s, t, f) in arrows {
                let m = f.as_matrix().expect("vect diagram");
                let lhs = &to_root[s];
                let rhs = to_root[t].mul(m, field);
                if root[s] == root[t] && *lhs == rhs {
                    continue;
                }
                let (os, ot) = (reduced_offset[root[s]], reduced_offset[root[t]]);
                for j in 0..m.cols() {
                    let mut row = vec![Scalar::zero(); reduced];
                    for i in 0..rhs.rows() {
                        row[ot + i] = rhs.get(i, j).clone();
                    }
                    for i in 0..lhs.rows() {
                        row[os + i] = field.sub(&row[os + i], lhs.get(i, j));
                    }
                    if row.iter().any(|x| !x.is_zero()) {
                        rows.push(row);
                    }
                }
            }
            let rel = Matrix::from_rows(field, rows, reduced)?;
            let (rref, pivots) = rel.rref(field);
            let free: Vec<usize> = (0..reduced).filter(|c| !pivots.contains(c)).collect();
            let dim = free.len();
            let mut q = Matrix::zeros(dim, reduced);
            for (r, &k) in free.iter().enumerate() {
                q.set(r, k, Scalar::one());
            }
            for (row, &p) in pivots.iter().enumerate() {
                for (r, &k) in free.iter().enumerate() {
                    let v = rref.get(row, k);
                    if !v.is_zero() {
                        q.set(r, p, field.neg(v));
                    }
                }
            }
            // The section picks root coordinates inside the full direct sum.
            let full_index: Vec<usize> = (0..n)
                .filter(|&i| root[i] == i)
                .flat_map(|i| offsets[i]..offsets[i] + values[i].size())
                .collect();
            let mut s = Matrix::zeros(total, dim);
            for (r, &k) in free.iter().enumerate() {
                s.set(full_index[k], r, Scalar::one());
            }
            let cocone = (0..n)
                .map(|i| {
                    let block = q.column_block(reduced_offset[root[i]], values[root[i]].size());
                    CoeffMorphism::Vect {
                        field,
                        matrix: block.mul(&to_root[i], field),
                    }
                })
                .collect();
            Ok(Colimit {
                object: CoeffObject::Vect { field, dim },
                cocone,
                section: Section::Vect(s),
            })
        }
    }
}

impl Colimit {
    /// The morphism out of the colimit induced by a cocone. The cocone is
    /// assumed compatible; use [`Colimit::is_cocone`] to check.
    pub fn mediate(&self, cocone: &[CoeffMorphism], target: CoeffObject) -> Result<CoeffMorphism> {
        if cocone.len() != self.cocone.len() {
            return Err(Error::Structural("cocone has the wrong number of legs".into()));
        }
        for (leg, ins) in cocone.iter().zip(&self.cocone) {
            if leg.source() != ins.source() || leg.target() != target {
                return Err(Error::Structural("cocone leg has the wrong type".into()));
            }
        }
        Ok(match &self.section {
            Section::Set(reps) => CoeffMorphism::Set {
                target: target.size(),
                map: reps
                    .iter()
                    .map(|&(i, x)| cocone[i].as_set_map().expect("set cocone")[x])
                    .collect(),
            },
            Section::Vect(matrix) => {
                let CoeffObject::Vect { field, dim } = target else {
                    return Err(Error::KindMismatch("set target for a linear colimit".into()));
                };
                let blocks: Vec<&Matrix> = cocone
                    .iter()
                    .map(|c| c.as_matrix().expect("vect cocone"))
                    .collect();
                let c = Matrix::hstack(dim, &blocks);
                CoeffMorphism::Vect {
                    field,
                    matrix: c.mul(matrix, field),
                }
            }
        })
    }

    /// Whether `legs` is compatible with every arrow of the diagram.
    pub fn is_cocone(arrows: &[(usize, usize, &CoeffMorphism)], legs: &[CoeffMorphism]) -> bool {
        arrows.iter().all(|&(s, t, f)| {
            legs[t]
                .compose(f)
                .map(|c| c == legs[s])
                .unwrap_or(false)
        })
    }
}

/// A functor from a finite category into the coefficient category.
#[derive(Clone, Debug)]
pub struct Diagram {
    pub shape: Arc<FinCategory>,
    pub kind: CoeffKind,
    pub values: Vec<CoeffObject>,
    pub maps: Vec<CoeffMorphism>,
}

impl Diagram {
    /// Functoriality failures, as readable messages.
    pub fn check_functorial(&self) -> Vec<String> {
        let c = &*self.shape;
        let mut out = Vec::new();
        if self.values.len() != c.object_count() || self.maps.len() != c.morphism_count() {
            out.push("diagram tables do not match the shape".to_string());
            return out;
        }
        for m in 0..c.morphism_count() {
            let f = &self.maps[m];
            if f.source() != self.values[c.src(m)] || f.target() != self.values[c.tgt(m)] {
                out.push(format!("morphism {m} mapped with wrong endpoints"));
            }
        }
        if !out.is_empty() {
            return out;
        }
        for o in 0..c.object_count() {
            if self.maps[c.identity(o)] != CoeffMorphism::identity(self.values[o]) {
                out.push(format!("identity of object {o} not preserved"));
            }
        }
        for f in 0..c.morphism_count() {
            for &g in c.out_of(c.tgt(f)) {
                let gf = c.comp(g, f);
                if self.maps[g].compose(&self.maps[f]).ok().as_ref() != Some(&self.maps[gf]) {
                    out.push(format!("composite ({g},{f}) not preserved"));
                }
            }
        }
        out
    }

    pub fn colimit(&self) -> Result<Colimit> {
        let problems = self.check_functorial();
        if !problems.is_empty() {
            return Err(Error::Precondition(format!(
                "non-functorial diagram: {}",
                problems.join("; ")
            )));
        }
        let c = &*self.shape;
        let arrows: Vec<_> = (0..c.morphism_count())
            .filter(|&m| !c.is_identity(m))
            .map(|m| (c.src(m), c.tgt(m), &self.maps[m]))
            .collect();
        colimit(self.kind, &self.values, &arrows)
    }
}

/// All set maps `x -> y`, or the matrix-unit basis of linear maps.
pub fn hom_set(x: CoeffObject, y: CoeffObject, budget: u64) -> Result<Vec<CoeffMorphism>> {
    match (x, y) {
        (CoeffObject::Set(n), CoeffObject::Set(m)) => {
            let count = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
            if count > budget as u128 {
                return Err(Error::TooLarge {
                    what: format!("hom({x}, {y})"),
                    needed: count,
                    budget,
                });
            }
            let mut out = Vec::with_capacity(count as usize);
            let mut cur = vec![0usize; n];
            if m == 0 && n > 0 {
                return Ok(out);
            }
            loop {
                out.push(CoeffMorphism::Set {
                    target: m,
                    map: cur.clone(),
                });
                // odometer, last coordinate fastest
                let mut i = n;
                loop {
                    if i == 0 {
                        return Ok(out);
                    }
                    i -= 1;
                    cur[i] += 1;
                    if cur[i] < m {
                        break;
                    }
                    cur[i] = 0;
                }
            }
        }
        (CoeffObject::Vect { field, dim: s }, CoeffObject::Vect { dim: t, .. }) => {
            let mut out = Vec::with_capacity(s * t);
            for i in 0..t {
                for j in 0..s {
                    let mut m = Matrix::zeros(t, s);
                    m.set(i, j, Scalar::one());
                    out.push(CoeffMorphism::Vect { field, matrix: m });
                }
            }
            Ok(out)
        }
        _ => Err(Error::KindMismatch(format!("hom({x}, {y})"))),
    }
}

/// Epi-mono factorization of an idempotent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdempotentSplit {
    pub image: CoeffObject,
    /// `image -> X`, mono.
    pub iota: CoeffMorphism,
    /// `X -> image`, epi.
    pub pi: CoeffMorphism,
}

pub fn split_idempotent(e: &CoeffMorphism) -> Result<IdempotentSplit> {
    if e.source() != e.target() || e.compose(e)? != *e {
        return Err(Error::Precondition("morphism is not idempotent".into()));
    }
    Ok(match e {
        CoeffMorphism::Set { target, map } => {
            let fixed: Vec<usize> = (0..*target).filter(|&x| map[x] == x).collect();
            let mut pos = vec![usize::MAX; *target];
            for (i, &x) in fixed.iter().enumerate() {
                pos[x] = i;
            }
            IdempotentSplit {
                image: CoeffObject::Set(fixed.len()),
                iota: CoeffMorphism::Set {
                    target: *target,
                    map: fixed.clone(),
                },
                pi: CoeffMorphism::Set {
                    target: fixed.len(),
                    map: map.iter().map(|&y| pos[y]).collect(),
                },
            }
        }
        CoeffMorphism::Vect { field, matrix } => {
            let (rref, pivots) = matrix.rref(*field);
            let r = pivots.len();
            let iota = matrix.select_columns(&pivots);
            let mut pi = Matrix::zeros(r, matrix.cols());
            for i in 0..r {
                for j in 0..matrix.cols() {
                    pi.set(i, j, rref.get(i, j).clone());
                }
            }
            IdempotentSplit {
                image: CoeffObject::Vect {
                    field: *field,
                    dim: r,
                },
                iota: CoeffMorphism::Vect {
                    field: *field,
                    matrix: iota,
                },
                pi: CoeffMorphism::Vect {
                    field: *field,
                    matrix: pi,
                },
            }
        }
    })
}

/// The free vector space on a finite set.
pub fn free_object(s: CoeffObject, field: Field) -> Result<CoeffObject> {
    match s {
        CoeffObject::Set(n) => Ok(CoeffObject::Vect { field, dim: n }),
        _ => Err(Error::KindMismatch("free_object expects a set".into())),
    }
}

/// The linear extension of a set map.
pub fn free_map(f: &CoeffMorphism, field: Field) -> Result<CoeffMorphism> {
    let CoeffMorphism::Set { target, map } = f else {
        return Err(Error::KindMismatch("free_map expects a set map".into()));
    };
    let mut m = Matrix::zeros(*target, map.len());
    for (j, &i) in map.iter().enumerate() {
        m.set(i, j, Scalar::one());
    }
    Ok(CoeffMorphism::Vect { field, matrix: m })
}

/// Elements of `F_p^dim`, indexed in base `p` with the last coordinate
/// varying fastest.
pub fn underlying_set(v: CoeffObject) -> Result<CoeffObject> {
    match v {
        CoeffObject::Vect {
            field: Field::Prime(p),
            dim,
        } => {
            let n = (p as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
            if n > usize::MAX as u128 / 2 {
                return Err(Error::NotEnumerable(format!("{v} is too large")));
            }
            Ok(CoeffObject::Set(n as usize))
        }
        CoeffObject::Vect {
            field: Field::Rationals,
            ..
        } => Err(Error::NotEnumerable("vector spaces over Q are infinite".into())),
        CoeffObject::Set(_) => Err(Error::KindMismatch("underlying_set expects a space".into())),
    }
}

/// Coordinates of the `index`-th element of `F_p^dim`.
pub fn vector_at(p: u64, dim: usize, mut index: usize) -> Vec<Scalar> {
    let mut out = vec![Scalar::zero(); dim];
    for i in (0..dim).rev() {
        out[i] = Scalar::from_integer((index as u64 % p).into());
        index /= p as usize;
    }
    out
}

pub fn index_of_vector(p: u64, v: &[Scalar]) -> usize {
    v.iter().fold(0usize, |acc, x| {
        acc * p as usize + Field::Prime(p).index_of(x).expect("reduced entry") as usize
    })
}

/// The underlying set map of a linear map over a prime field.
pub fn underlying_map(f: &CoeffMorphism) -> Result<CoeffMorphism> {
    let CoeffMorphism::Vect { field, matrix } = f else {
        return Err(Error::KindMismatch("underlying_map expects a linear map".into()));
    };
    let Field::Prime(p) = *field else {
        return Err(Error::NotEnumerable("vector spaces over Q are infinite".into()));
    };
    let src = underlying_set(f.source())?.size();
    let tgt = underlying_set(f.target())?.size();
    let map = (0..src)
        .map(|i| {
            let v = Matrix::column(vector_at(p, matrix.cols(), i));
            let w = matrix.mul(&v, *field);
            let coords: Vec<Scalar> = (0..w.rows()).map(|r| w.get(r, 0).clone()).collect();
            index_of_vector(p, &coords)
        })
        .collect();
    Ok(CoeffMorphism::Set { target: tgt, map })
}

/// Every linear map between two spaces over a prime field (budgeted).
pub fn all_linear_maps(x: CoeffObject, y: CoeffObject, budget: u64) -> Result<Vec<CoeffMorphism>> {
    let (CoeffObject::Vect { field, dim: s }, CoeffObject::Vect { dim: t, .. }) = (x, y) else {
        return Err(Error::KindMismatch("all_linear_maps expects spaces".into()));
    };
    let Field::Prime(p) = field else {
        return Err(Error::NotEnumerable("hom over Q is infinite".into()));
    };
    let entries = s * t;
    let count = (p as u128).checked_pow(entries as u32).unwrap_or(u128::MAX);
    if count > budget as u128 {
        return Err(Error::TooLarge {
            what: format!("all linear maps {x} -> {y}"),
            needed: count,
            budget,
        });
    }
    Ok((0..count as usize)
        .map(|i| {
            let flat = vector_at(p, entries, i);
            let rows = flat.chunks(s.max(1)).take(t).map(|r| r.to_vec()).collect();
            let matrix = if s == 0 {
                Matrix::zeros(t, 0)
            } else {
                Matrix::from_rows(field, rows, s).expect("shape")
            };
            CoeffMorphism::Vect { field, matrix }
        })
        .collect())
}

/// Wire form of a coefficient object: a set lists its elements, a space
/// names its field and dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectJson {
    Set { elements: Vec<usize> },
    Vect { field: Field, dim: usize },
}

/// Wire form of a coefficient morphism; matrix entries are exact decimal
/// strings in row-major order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MorphismJson {
    Set { source: Vec<usize>, target: Vec<usize>, map: Vec<usize> },
    Vect { field: Field, rows: usize, cols: usize, entries: Vec<Vec<String>> },
}

impl CoeffObject {
    pub fn to_json(&self) -> ObjectJson {
        match *self {
            CoeffObject::Set(n) => ObjectJson::Set {
                elements: (0..n).collect(),
            },
            CoeffObject::Vect { field, dim } => ObjectJson::Vect { field, dim },
        }
    }

    pub fn from_json(j: &ObjectJson) -> Result<Self> {
        match j {
            ObjectJson::Set { elements } => {
                if elements.iter().enumerate().any(|(i, &x)| i != x) {
                    return Err(Error::Structural("set elements must be listed as 0..n".into()));
                }
                Ok(CoeffObject::Set(elements.len()))
            }
            ObjectJson::Vect { field, dim } => {
                field.validate()?;
                Ok(CoeffObject::Vect {
                    field: *field,
                    dim: *dim,
                })
            }
        }
    }
}

impl CoeffMorphism {
    pub fn to_json(&self) -> MorphismJson {
        match self {
            CoeffMorphism::Set { target, map } => MorphismJson::Set {
                source: (0..map.len()).collect(),
                target: (0..*target).collect(),
                map: map.clone(),
            },
            CoeffMorphism::Vect { field, matrix } => MorphismJson::Vect {
                field: *field,
                rows: matrix.rows(),
                cols: matrix.cols(),
                entries: matrix.to_strings(),
            },
        }
    }

    pub fn from_json(j: &MorphismJson) -> Result<Self> {
        match j {
            MorphismJson::Set {
                source,
                target,
                map,
            } => {
                CoeffObject::from_json(&ObjectJson::Set {
                    elements: source.clone(),
                })?;
                CoeffObject::from_json(&ObjectJson::Set {
                    elements: target.clone(),
                })?;
                if map.len() != source.len() {
                    return Err(Error::Structural("set map length differs from its source".into()));
                }
                CoeffMorphism::set_map(target.len(), map.clone())
            }
            MorphismJson::Vect {
                field,
                rows,
                cols,
                entries,
            } => {
                field.validate()?;
                if entries.len() != *rows {
                    return Err(Error::Structural("matrix has the wrong number of rows".into()));
                }
                let matrix = if *rows == 0 {
                    Matrix::zeros(0, *cols)
                } else {
                    Matrix::from_strings(*field, entries, *cols)?
                };
                Ok(CoeffMorphism::Vect {
                    field: *field,
                    matrix,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(n: usize) -> CoeffObject {
        CoeffObject::Set(n)
    }

    #[test]
    fn coproduct_of_sets() {
        let c = colimit(CoeffKind::Set, &[set(2), set(1)], &[]).unwrap();
        assert_eq!(c.object, set(3));
    }

    #[test]
    fn coequalizer_of_identical_arrows() {
        let id = CoeffMorphism::identity(set(4));
        let c = colimit(CoeffKind::Set, &[set(4), set(4)], &[(0, 1, &id), (0, 1, &id)]).unwrap();
        assert_eq!(c.object, set(4));
        assert!(c.cocone[1].is_iso());
        assert_eq!(c.cocone[0], c.cocone[1]);
    }

    #[test]
    fn epi_mono_predicates() {
        for o in [set(3), CoeffKind::Vect(Field::Prime(5)).object(2)] {
            let id = CoeffMorphism::identity(o);
            assert!(id.is_epi() && id.is_mono() && id.is_iso());
        }
        let bang = CoeffMorphism::set_map(1, vec![0, 0]).unwrap();
        assert!(bang.is_epi() && !bang.is_mono());
        let f = Field::Prime(5);
        let m = CoeffMorphism::linear(f, Matrix::from_i64(f, &[&[1, 0, 2], &[0, 1, 3]]));
        assert!(m.is_epi() && !m.is_mono());
    }

    #[test]
    fn hom_set_counts() {
        assert_eq!(hom_set(set(1), set(2), DEFAULT_BUDGET).unwrap().len(), 2);
        assert_eq!(hom_set(set(3), set(2), DEFAULT_BUDGET).unwrap().len(), 8);
        assert_eq!(hom_set(set(0), set(0), DEFAULT_BUDGET).unwrap().len(), 1);
        assert_eq!(hom_set(set(2), set(0), DEFAULT_BUDGET).unwrap().len(), 0);
        let f3 = CoeffKind::Vect(Field::Prime(3));
        assert_eq!(hom_set(f3.object(2), f3.object(1), DEFAULT_BUDGET).unwrap().len(), 2);
        assert!(matches!(
            hom_set(set(30), set(30), DEFAULT_BUDGET),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn split_projection_matrix() {
        let q = Field::Rationals;
        let e = CoeffMorphism::linear(q, Matrix::from_i64(q, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 0]]));
        let s = split_idempotent(&e).unwrap();
        assert_eq!(s.image.size(), 2);
        assert_eq!(s.pi.compose(&s.iota).unwrap(), CoeffMorphism::identity(s.image));
        assert_eq!(s.iota.compose(&s.pi).unwrap(), e);
    }

    #[test]
    fn split_constant_map() {
        let e = CoeffMorphism::set_map(3, vec![1, 1, 1]).unwrap();
        let s = split_idempotent(&e).unwrap();
        assert_eq!(s.image, set(1));
        let not_idem = CoeffMorphism::set_map(3, vec![1, 2, 0]).unwrap();
        assert!(split_idempotent(&not_idem).is_err());
    }

    #[test]
    fn free_and_underlying() {
        let f2 = Field::Prime(2);
        assert_eq!(free_object(set(0), f2).unwrap().size(), 0);
        let v = free_object(set(2), f2).unwrap();
        assert_eq!(underlying_set(v).unwrap(), set(4));
        assert!(matches!(
            underlying_set(CoeffKind::Vect(Field::Rationals).object(1)),
            Err(Error::NotEnumerable(_))
        ));
    }
}
