//! Finite groups by multiplication table, their coset presheaves on the
//! one-object category, and representations of subgroups transported to
//! the corresponding action groupoids.

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coeff::{CoeffKind, CoeffMorphism, CoeffObject};
use crate::error::{Error, Result};
use crate::fibration::Representation;
use crate::fincat::{check_group_table, FinCategory};
use crate::linalg::{Field, Matrix};
use crate::presheaf::{Presheaf, PresheafMorphism};

/// A finite group; `table[g][f]` is the product `g f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self> {
        check_group_table(&table)?;
        let n = table.len();
        let identity = (0..n).find(|&e| (0..n).all(|x| table[e][x] == x)).expect("checked");
        let inverse = (0..n)
            .map(|g| (0..n).find(|&h| table[g][h] == identity).expect("checked"))
            .collect();
        Ok(FiniteGroup {
            table,
            identity,
            inverse,
        })
    }

    /// The symmetric group on `n` letters. Elements are the permutations in
    /// lexicographic order of their image lists; `g f` applies `f` first.
    pub fn symmetric(n: usize) -> Self {
        let perms = permutations(n);
        let index = |p: &[usize]| perms.iter().position(|q| q == p).expect("permutation");
        let table = perms
            .iter()
            .map(|g| {
                perms
                    .iter()
                    .map(|f| index(&f.iter().map(|&i| g[i]).collect::<Vec<_>>()))
                    .collect()
            })
            .collect();
        FiniteGroup::from_table(table).expect("symmetric group")
    }

    /// Index in [`FiniteGroup::symmetric`] of the permutation with the given
    /// image list.
    pub fn permutation_index(images: &[usize]) -> Option<usize> {
        permutations(images.len()).iter().position(|p| p == images)
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, g: usize, f: usize) -> usize {
        self.table[g][f]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inverse[g]
    }

    /// The subgroup generated by `gens`, sorted.
    pub fn generate(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = BTreeSet::from([self.identity]);
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &s in gens {
                let y = self.mul(x, s);
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen.into_iter().collect()
    }

    pub fn is_subgroup(&self, set: &[usize]) -> bool {
        let s: BTreeSet<usize> = set.iter().copied().collect();
        !s.is_empty()
            && s.iter().all(|&x| x < self.order())
            && s.iter().all(|&x| s.iter().all(|&y| s.contains(&self.mul(x, self.inv(y)))))
    }

    fn require_subgroup(&self, set: &[usize], what: &str) -> Result<()> {
        if self.is_subgroup(set) {
            Ok(())
        } else {
            Err(Error::Precondition(format!("{what} is not a subgroup")))
        }
    }

    /// Right cosets `K t`, each sorted, ordered by smallest element. The
    /// smallest element of each coset is its representative.
    pub fn right_cosets(&self, k: &[usize]) -> Result<Vec<Vec<usize>>> {
        self.require_subgroup(k, "K")?;
        let mut assigned = vec![false; self.order()];
        let mut cosets = Vec::new();
        for t in 0..self.order() {
            if assigned[t] {
                continue;
            }
            let mut coset: Vec<usize> = k.iter().map(|&x| self.mul(x, t)).collect();
            coset.sort_unstable();
            coset.dedup();
            for &x in &coset {
                assigned[x] = true;
            }
            cosets.push(coset);
        }
        Ok(cosets)
    }

    /// Double cosets `K s L` of elements of `h`, ordered by smallest element.
    pub fn double_cosets(&self, k: &[usize], h: &[usize], l: &[usize]) -> Result<Vec<Vec<usize>>> {
        self.require_subgroup(k, "K")?;
        self.require_subgroup(h, "H")?;
        self.require_subgroup(l, "L")?;
        let hs: BTreeSet<usize> = h.iter().copied().collect();
        let mut assigned = BTreeSet::new();
        let mut out = Vec::new();
        for &s in h {
            if assigned.contains(&s) {
                continue;
            }
            let cls: BTreeSet<usize> = k
                .iter()
                .flat_map(|&x| l.iter().map(move |&y| (x, y)))
                .map(|(x, y)| self.mul(self.mul(x, s), y))
                .collect();
            if !cls.is_subset(&hs) {
                return Err(Error::Precondition("K or L is not contained in H".into()));
            }
            assigned.extend(cls.iter().copied());
            out.push(cls.into_iter().collect());
        }
        out.sort();
        Ok(out)
    }

    pub fn delooping(&self) -> Arc<FinCategory> {
        Arc::new(FinCategory::delooping(&self.table).expect("valid group table"))
    }

    /// The right `G`-set `K\G` as a presheaf on the delooping `cat`:
    /// `A(g)(K t) = K t g`.
    pub fn coset_presheaf(&self, cat: &Arc<FinCategory>, k: &[usize]) -> Result<Arc<Presheaf>> {
        let cosets = self.right_cosets(k)?;
        let of = coset_lookup(self.order(), &cosets);
        let maps = (0..self.order())
            .map(|g| cosets.iter().map(|c| of[self.mul(c[0], g)]).collect())
            .collect();
        Ok(Arc::new(Presheaf::new(cat.clone(), vec![cosets.len()], maps)?))
    }

    /// The projection `K\G -> H\G` for `K ≤ H`.
    pub fn coset_projection(&self, cat: &Arc<FinCategory>, k: &[usize], h: &[usize]) -> Result<PresheafMorphism> {
        if !k.iter().all(|x| h.contains(x)) {
            return Err(Error::Precondition("K is not contained in H".into()));
        }
        let source = self.coset_presheaf(cat, k)?;
        let target = self.coset_presheaf(cat, h)?;
        let small = self.right_cosets(k)?;
        let of = coset_lookup(self.order(), &self.right_cosets(h)?);
        let component = small.iter().map(|c| of[c[0]]).collect();
        PresheafMorphism::new(source, target, vec![component])
    }
}

fn coset_lookup(order: usize, cosets: &[Vec<usize>]) -> Vec<usize> {
    let mut of = vec![0; order];
    for (i, c) in cosets.iter().enumerate() {
        for &x in c {
            of[x] = i;
        }
    }
    of
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for p in &out {
            for i in (0..n).filter(|i| !p.contains(i)) {
                let mut q: Vec<usize> = p.clone();
                q.push(i);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// A linear representation of a subgroup `K`, one matrix per element of `K`
/// (indexed by group element), satisfying `rho(x y) = rho(x) rho(y)`.
#[derive(Clone, Debug)]
pub struct SubgroupRep {
    pub field: Field,
    pub dim: usize,
    pub subgroup: Vec<usize>,
    matrices: Vec<Option<Matrix>>,
}

impl SubgroupRep {
    pub fn trivial(group: &FiniteGroup, subgroup: &[usize], field: Field, dim: usize) -> Result<Self> {
        let gens: Vec<(usize, Matrix)> = subgroup.iter().map(|&x| (x, Matrix::identity(dim))).collect();
        SubgroupRep::from_generators(group, subgroup, field, dim, &gens)
    }

    /// Extends generator images to the whole subgroup, rejecting images that
    /// do not define a homomorphism.
    pub fn from_generators(
        group: &FiniteGroup,
        subgroup: &[usize],
        field: Field,
        dim: usize,
        gens: &[(usize, Matrix)],
    ) -> Result<Self> {
        group.require_subgroup(subgroup, "K")?;
        for (s, m) in gens {
            if !subgroup.contains(s) {
                return Err(Error::Precondition(format!("generator {s} lies outside K")));
            }
            if m.rows() != dim || m.cols() != dim {
                return Err(Error::Precondition(format!("generator {s} has the wrong shape")));
            }
        }
        let mut matrices: Vec<Option<Matrix>> = vec![None; group.order()];
        matrices[group.identity()] = Some(Matrix::identity(dim));
        let mut queue = VecDeque::from([group.identity()]);
        while let Some(x) = queue.pop_front() {
            let mx = matrices[x].clone().expect("visited");
            for (s, ms) in gens {
                let y = group.mul(x, *s);
                let my = mx.mul(ms, field);
                match &matrices[y] {
                    Some(existing) if *existing != my => {
                        return Err(Error::Precondition("generator images violate a group relation".into()))
                    }
                    Some(_) => {}
                    None => {
                        matrices[y] = Some(my);
                        queue.push_back(y);
                    }
                }
            }
        }
        let span = group.generate(&gens.iter().map(|g| g.0).collect::<Vec<_>>());
        let mut sorted = subgroup.to_vec();
        sorted.sort_unstable();
        if span != sorted {
            return Err(Error::Precondition("generators do not generate K".into()));
        }
        Ok(SubgroupRep {
            field,
            dim,
            subgroup: sorted,
            matrices,
        })
    }

    pub fn matrix(&self, x: usize) -> &Matrix {
        self.matrices[x].as_ref().expect("element of the subgroup")
    }

    /// The representation of the action groupoid of `K\G` equivalent to this
    /// `K`-representation: for the morphism `(g, K t_j)` from `K t_i = K t_j g`
    /// to `K t_j`, the map `M(K t_j) -> M(K t_i)` is `rho(t_j g t_i⁻¹)⁻¹`,
    /// with `t` the coset representatives.
    pub fn to_groupoid_rep(&self, group: &FiniteGroup, cosets: &Arc<Presheaf>) -> Result<Representation> {
        let reps: Vec<usize> = group.right_cosets(&self.subgroup)?.iter().map(|c| c[0]).collect();
        if cosets.base().object_count() != 1 || cosets.size(0) != reps.len() {
            return Err(Error::BaseMismatch("coset presheaf does not match the subgroup".into()));
        }
        let el = cosets.elements();
        let cat = &*el.category;
        let values = vec![CoeffObject::Vect { field: self.field, dim: self.dim }; cat.object_count()];
        let mut maps = Vec::with_capacity(cat.morphism_count());
        for &(g, j) in &el.morphisms {
            let i = cosets.restrict(g, j);
            let k = group.mul(group.mul(reps[j], g), group.inv(reps[i]));
            let m = self.matrix(k).inverse(self.field).expect("group element acts invertibly");
            maps.push(CoeffMorphism::Vect {
                field: self.field,
                matrix: m,
            });
        }
        Representation::new(cosets.clone(), CoeffKind::Vect(self.field), values, maps)
    }
}

/// One double coset `K s K` and its predicted summand of `Res Ind V`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MackeyTerm {
    pub representative: usize,
    pub double_coset_size: usize,
    /// `[K : K ∩ s K s⁻¹]`.
    pub index: usize,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MackeyPrediction {
    pub terms: Vec<MackeyTerm>,
    pub total_dim: usize,
}

/// Predicted dimensions of `Res^H_K Ind_K^H V` by counting double cosets
/// `K\H/K`, with no reference to colimits.
pub fn mackey_oracle(group: &FiniteGroup, h: &[usize], k: &[usize], dim_v: usize) -> Result<MackeyPrediction> {
    if !k.iter().all(|x| h.contains(x)) {
        return Err(Error::Precondition("K is not contained in H".into()));
    }
    let ks: BTreeSet<usize> = k.iter().copied().collect();
    let mut terms = Vec::new();
    for cls in group.double_cosets(k, h, k)? {
        let s = cls[0];
        let conj: BTreeSet<usize> = k.iter().map(|&x| group.mul(group.mul(s, x), group.inv(s))).collect();
        let meet = ks.intersection(&conj).count();
        let index = k.len() / meet;
        terms.push(MackeyTerm {
            representative: s,
            double_coset_size: cls.len(),
            index,
            dim: index * dim_v,
        });
    }
    let total_dim = terms.iter().map(|t| t.dim).sum();
    Ok(MackeyPrediction { terms, total_dim })
}
