//! Seeded generation of test objects.
//!
//! Every generator draws from a `ChaCha8Rng` seeded with `seed_from_u64`, so
//! outputs are identical on every platform. Set-valued objects are quotients
//! of coproducts of representables by a congruence generated from a few
//! random identifications; linear ones are linearizations of those, further
//! quotiented by the subrepresentation generated by a random vector.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coeff::{CoeffKind, CoeffMorphism, CoeffObject};
use crate::fibration::Representation;
use crate::fincat::FinCategory;
use crate::linalg::{Field, Matrix, Scalar};
use crate::presheaf::{Presheaf, PresheafMorphism};
use crate::unionfind::UnionFind;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Size knobs for the generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Knobs {
    /// Number of representable summands (at least one is used).
    pub generators: usize,
    /// Number of random identifications before closing to a congruence.
    pub merges: usize,
}

impl Default for Knobs {
    fn default() -> Self {
        Knobs {
            generators: 2,
            merges: 1,
        }
    }
}

/// Closes `seeds` (pairs of global indices at the same object) to the least
/// congruence for the restriction tables `restrict[k] = (from_offset,
/// to_offset, map)`.
fn congruence(total: usize, seeds: &[(usize, usize)], restrict: &[(usize, usize, &[usize])]) -> UnionFind {
    let mut uf = UnionFind::new(total);
    for &(x, y) in seeds {
        uf.union(x, y);
    }
    loop {
        let mut changed = false;
        for &(from, to, map) in restrict {
            for (e, &img) in map.iter().enumerate() {
                let r = uf.find(from + e) - from;
                if r < map.len() {
                    changed |= uf.union(to + img, to + map[r]);
                }
            }
        }
        if !changed {
            return uf;
        }
    }
}

/// Random quotient of a coproduct of representable presheaves.
pub fn random_presheaf(base: &Arc<FinCategory>, rng: &mut ChaCha8Rng, knobs: Knobs) -> Arc<Presheaf> {
    let n = base.object_count();
    let parts: Vec<Arc<Presheaf>> = (0..knobs.generators.max(1))
        .map(|_| Arc::new(Presheaf::representable(base.clone(), rng.gen_range(0..n))))
        .collect();
    let (sum, _) = Presheaf::coproduct(base.clone(), &parts).expect("same base");
    let seeds = random_seeds(sum.sizes(), rng, knobs.merges, |_, _, _| true);
    quotient_presheaf(&sum, &seeds).0
}

fn random_seeds(
    sizes: &[usize],
    rng: &mut ChaCha8Rng,
    merges: usize,
    allowed: impl Fn(usize, usize, usize) -> bool,
) -> Vec<(usize, usize)> {
    let offsets: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, &s| {
            let o = *acc;
            *acc += s;
            Some(o)
        })
        .collect();
    let mut seeds = Vec::new();
    for _ in 0..merges {
        let c = rng.gen_range(0..sizes.len());
        if sizes[c] < 2 {
            continue;
        }
        let (x, y) = (rng.gen_range(0..sizes[c]), rng.gen_range(0..sizes[c]));
        if allowed(c, x, y) {
            seeds.push((offsets[c] + x, offsets[c] + y));
        }
    }
    seeds
}

/// Quotient of a presheaf by the congruence generated by `seeds` (global
/// element indices), with the quotient map.
fn quotient_presheaf(p: &Arc<Presheaf>, seeds: &[(usize, usize)]) -> (Arc<Presheaf>, Vec<Vec<usize>>) {
    let cat = p.base().clone();
    let offsets: Vec<usize> = (0..cat.object_count())
        .scan(0, |acc, c| {
            let o = *acc;
            *acc += p.size(c);
            Some(o)
        })
        .collect();
    let total = p.total_size();
    let restrict: Vec<(usize, usize, &[usize])> = (0..cat.morphism_count())
        .map(|phi| (offsets[cat.tgt(phi)], offsets[cat.src(phi)], p.restriction(phi)))
        .collect();
    let mut uf = congruence(total, seeds, &restrict);
    let obj_of: Vec<usize> = (0..cat.object_count()).flat_map(|c| std::iter::repeat(c).take(p.size(c))).collect();
    let classes = uf.classes();
    let mut class_of = vec![0; total];
    let mut local = vec![0; classes.len()];
    let mut sizes = vec![0; cat.object_count()];
    for (k, cls) in classes.iter().enumerate() {
        let c = obj_of[cls[0]];
        local[k] = sizes[c];
        sizes[c] += 1;
        for &e in cls {
            class_of[e] = k;
        }
    }
    let component: Vec<Vec<usize>> = (0..cat.object_count())
        .map(|c| (0..p.size(c)).map(|x| local[class_of[offsets[c] + x]]).collect())
        .collect();
    let mut maps = Vec::with_capacity(cat.morphism_count());
    for phi in 0..cat.morphism_count() {
        let (d, c) = (cat.src(phi), cat.tgt(phi));
        let mut m = vec![0; sizes[c]];
        for x in 0..p.size(c) {
            m[component[c][x]] = component[d][p.restrict(phi, x)];
        }
        maps.push(m);
    }
    let q = Presheaf::new(cat, sizes, maps).expect("quotient by a congruence is a presheaf");
    (Arc::new(q), component)
}

/// A random presheaf `A₁` with a morphism `a: A₁ -> A₀`: a coproduct of
/// representables mapped by random Yoneda elements, quotiented by a random
/// congruence inside the fibres of `a`.
pub fn random_arrow_into(target: &Arc<Presheaf>, rng: &mut ChaCha8Rng, knobs: Knobs) -> PresheafMorphism {
    let cat = target.base().clone();
    let candidates: Vec<usize> = (0..cat.object_count()).filter(|&c| target.size(c) > 0).collect();
    assert!(!candidates.is_empty(), "target presheaf is empty");
    let mut parts = Vec::new();
    let mut elements = Vec::new();
    for _ in 0..knobs.generators.max(1) {
        let c = candidates[rng.gen_range(0..candidates.len())];
        parts.push(Arc::new(Presheaf::representable(cat.clone(), c)));
        elements.push((c, rng.gen_range(0..target.size(c))));
    }
    let (sum, _) = Presheaf::coproduct(cat.clone(), &parts).expect("same base");
    // Yoneda: ψ ∈ hom(d, c) in summand k goes to A₀(ψ)(x_k).
    let components: Vec<Vec<usize>> = (0..cat.object_count())
        .map(|d| {
            parts
                .iter()
                .zip(&elements)
                .flat_map(|(_, &(c, x))| cat.hom(d, c).into_iter().map(move |psi| (psi, x)))
                .map(|(psi, x)| target.restrict(psi, x))
                .collect()
        })
        .collect();
    let image = components.clone();
    let seeds = random_seeds(sum.sizes(), rng, knobs.merges, |c, x, y| image[c][x] == image[c][y]);
    let (quot, proj) = quotient_presheaf(&sum, &seeds);
    let mut comps: Vec<Vec<usize>> = (0..cat.object_count()).map(|c| vec![0; quot.size(c)]).collect();
    for c in 0..cat.object_count() {
        for x in 0..sum.size(c) {
            comps[c][proj[c][x]] = components[c][x];
        }
    }
    PresheafMorphism::new(quot, target.clone(), comps).expect("congruence inside fibres")
}

/// Random set-valued representation: a quotient of a coproduct of
/// representables on the category of elements.
pub fn random_set_rep(base: &Arc<Presheaf>, rng: &mut ChaCha8Rng, knobs: Knobs) -> Representation {
    let el = base.elements();
    let cat = &*el.category;
    let n = cat.object_count();
    assert!(n > 0, "no elements to represent");
    let tops: Vec<usize> = (0..knobs.generators.max(1)).map(|_| rng.gen_range(0..n)).collect();
    // Coproduct of representables, summand k contributing hom(y, tops[k]).
    let homs: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|y| {
            tops.iter()
                .enumerate()
                .flat_map(|(k, &t)| cat.hom(y, t).into_iter().map(move |h| (k, h)))
                .collect()
        })
        .collect();
    let pos = |y: usize, key: (usize, usize)| homs[y].iter().position(|&e| e == key).expect("element");
    let maps: Vec<Vec<usize>> = (0..cat.morphism_count())
        .map(|g| {
            let (y, x) = (cat.src(g), cat.tgt(g));
            homs[x].iter().map(|&(k, h)| pos(y, (k, cat.comp(h, g)))).collect()
        })
        .collect();
    let sizes: Vec<usize> = homs.iter().map(Vec::len).collect();
    let offsets: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, &s| {
            let o = *acc;
            *acc += s;
            Some(o)
        })
        .collect();
    let total: usize = sizes.iter().sum();
    let seeds = random_seeds(&sizes, rng, knobs.merges, |_, _, _| true);
    let restrict: Vec<(usize, usize, &[usize])> = (0..cat.morphism_count())
        .map(|g| (offsets[cat.tgt(g)], offsets[cat.src(g)], maps[g].as_slice()))
        .collect();
    let mut uf = congruence(total, &seeds, &restrict);
    let mut local = vec![usize::MAX; total];
    let mut new_sizes = vec![0; n];
    for o in 0..n {
        for e in 0..sizes[o] {
            let r = uf.find(offsets[o] + e);
            if local[r] == usize::MAX {
                local[r] = new_sizes[o];
                new_sizes[o] += 1;
            }
        }
    }
    let mut cls = |o: usize, e: usize| local[uf.find(offsets[o] + e)];
    let values: Vec<CoeffObject> = new_sizes.iter().map(|&s| CoeffObject::Set(s)).collect();
    let mut qmaps = Vec::with_capacity(cat.morphism_count());
    for g in 0..cat.morphism_count() {
        let (y, x) = (cat.src(g), cat.tgt(g));
        let mut m = vec![0; new_sizes[x]];
        for e in 0..sizes[x] {
            m[cls(x, e)] = cls(y, maps[g][e]);
        }
        qmaps.push(CoeffMorphism::Set {
            target: new_sizes[y],
            map: m,
        });
    }
    Representation::new(base.clone(), CoeffKind::Set, values, qmaps).expect("quotient by a congruence")
}

fn random_scalar(field: Field, rng: &mut ChaCha8Rng) -> Scalar {
    match field {
        Field::Prime(p) => field.element(rng.gen_range(0..p)),
        Field::Rationals => field.from_i64(rng.gen_range(-2..=2)),
    }
}

/// Random linear representation: a linearized random set representation
/// modulo the subrepresentation generated by one random vector.
pub fn random_vect_rep(base: &Arc<Presheaf>, field: Field, rng: &mut ChaCha8Rng, knobs: Knobs) -> Representation {
    let free = random_set_rep(base, rng, knobs).linearize(field);
    if knobs.merges == 0 {
        return free;
    }
    let el = base.elements();
    let cat = &*el.category;
    let n = cat.object_count();
    let nonzero: Vec<usize> = (0..n).filter(|&o| free.value(o).size() > 0).collect();
    if nonzero.is_empty() {
        return free;
    }
    let x = nonzero[rng.gen_range(0..nonzero.len())];
    let v: Vec<Scalar> = (0..free.value(x).size()).map(|_| random_scalar(field, rng)).collect();
    let v = Matrix::column(v);
    let (mut proj, mut sect) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for y in 0..n {
        let dim = free.value(y).size();
        let rows: Vec<Vec<Scalar>> = cat
            .hom(y, x)
            .into_iter()
            .map(|g| {
                let w = free.map(g).as_matrix().expect("linear").mul(&v, field);
                (0..w.rows()).map(|i| w.get(i, 0).clone()).collect()
            })
            .collect();
        let span = Matrix::from_rows(field, rows, dim).expect("rows");
        let (p, s) = span.quotient_by_rows(field);
        proj.push(p);
        sect.push(s);
    }
    let values: Vec<CoeffObject> = proj
        .iter()
        .map(|p| CoeffObject::Vect { field, dim: p.rows() })
        .collect();
    let maps = (0..cat.morphism_count())
        .map(|g| {
            let (y, x) = (cat.src(g), cat.tgt(g));
            let m = free.map(g).as_matrix().expect("linear");
            CoeffMorphism::Vect {
                field,
                matrix: proj[y].mul(m, field).mul(&sect[x], field),
            }
        })
        .collect();
    Representation::new(base.clone(), CoeffKind::Vect(field), values, maps).expect("quotient by a subrepresentation")
}

pub fn random_rep(base: &Arc<Presheaf>, kind: CoeffKind, rng: &mut ChaCha8Rng, knobs: Knobs) -> Representation {
    match kind {
        CoeffKind::Set => random_set_rep(base, rng, knobs),
        CoeffKind::Vect(field) => random_vect_rep(base, field, rng, knobs),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn generators_are_valid_and_reproducible() {
        let cat = arrow_cat();
        for seed in 0..20 {
            let mut r = rng(seed);
            let a0 = random_presheaf(&cat, &mut r, Knobs { generators: 2, merges: 2 });
            assert!(a0.check().is_empty());
            let a = random_arrow_into(&a0, &mut r, Knobs { generators: 3, merges: 2 });
            assert!(a.check().is_empty());
            let m = random_set_rep(&a.source, &mut r, Knobs { generators: 2, merges: 2 });
            assert!(m.check().is_empty());
            let v = random_vect_rep(&a.source, Field::Prime(5), &mut r, Knobs::default());
            assert!(v.check().is_empty());
            let mut r2 = rng(seed);
            let b0 = random_presheaf(&cat, &mut r2, Knobs { generators: 2, merges: 2 });
            assert_eq!(a0, b0);
        }
    }
}
