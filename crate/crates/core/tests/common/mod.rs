//! Small random categories, presheaves and representations for the
//! property suites. Everything beyond the category itself is drawn from a
//! seed through the library's deterministic generators.
#![allow(dead_code)]

use std::sync::Arc;

use proptest::prelude::*;

use descent_engine::coeff::CoeffKind;
use descent_engine::fibration::Representation;
use descent_engine::fincat::FinCategory;
use descent_engine::linalg::Field;
use descent_engine::presheaf::{Presheaf, PresheafMorphism};
use descent_engine::random::{random_arrow_into, random_presheaf, random_rep, rng, Knobs};
use rand_chacha::ChaCha8Rng;

/// Poset on `n` objects; bit `k` of `mask` relates the `k`-th pair `i < j`.
pub fn poset(n: usize, mask: u32) -> FinCategory {
    let mut le = vec![vec![false; n]; n];
    let mut bit = 0;
    for i in 0..n {
        le[i][i] = true;
        for j in i + 1..n {
            le[i][j] = mask >> bit & 1 == 1;
            bit += 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if le[i][k] && le[k][j] {
                    le[i][j] = true;
                }
            }
        }
    }
    let mut morphisms = Vec::new();
    let mut id = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            if le[i][j] {
                id[i][j] = Some(morphisms.len());
                morphisms.push((i, j));
            }
        }
    }
    let mut compose = Vec::new();
    for &(i, j) in &morphisms {
        for k in 0..n {
            if let Some(g) = id[j][k] {
                compose.push((g, id[i][j].unwrap(), id[i][k].unwrap()));
            }
        }
    }
    let identity = (0..n).map(|i| id[i][i].unwrap()).collect();
    FinCategory::new(labels(n), morphisms, identity, compose).unwrap()
}

/// Objects `0..s` and `s..s+t` with `counts[i * t + j]` parallel arrows
/// from source `i` to target `j`; no composable non-identity pairs.
pub fn bipartite(s: usize, t: usize, counts: &[usize]) -> FinCategory {
    let n = s + t;
    let mut morphisms: Vec<(usize, usize)> = (0..n).map(|o| (o, o)).collect();
    for i in 0..s {
        for j in 0..t {
            for _ in 0..counts[i * t + j] {
                morphisms.push((i, s + j));
            }
        }
    }
    let mut compose = Vec::new();
    for (f, &(x, y)) in morphisms.iter().enumerate() {
        compose.push((y, f, f));
        if x != y {
            compose.push((f, x, f));
        }
    }
    FinCategory::new(labels(n), morphisms, (0..n).collect(), compose).unwrap()
}

pub fn cyclic(n: usize) -> FinCategory {
    let table: Vec<Vec<usize>> = (0..n).map(|g| (0..n).map(|f| (g + f) % n).collect()).collect();
    FinCategory::delooping(&table).unwrap()
}

/// One object with an idempotent endomorphism.
pub fn idempotent() -> FinCategory {
    FinCategory::new(
        labels(1),
        vec![(0, 0), (0, 0)],
        vec![0],
        vec![(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 1)],
    )
    .unwrap()
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

pub fn category() -> impl Strategy<Value = Arc<FinCategory>> {
    prop_oneof![
        (1usize..=3, any::<u32>()).prop_map(|(n, m)| poset(n, m)),
        (1usize..=2, 1usize..=2, prop::collection::vec(0usize..=2, 4)).prop_map(|(s, t, c)| bipartite(s, t, &c)),
        (1usize..=3).prop_map(cyclic),
        Just(idempotent()),
    ]
    .prop_map(Arc::new)
}

pub fn knobs() -> impl Strategy<Value = Knobs> {
    (1usize..=2, 0usize..=2).prop_map(|(generators, merges)| Knobs { generators, merges })
}

pub fn knobs_small() -> Knobs {
    Knobs { generators: 1, merges: 1 }
}

pub fn kind() -> impl Strategy<Value = CoeffKind> {
    prop_oneof![
        Just(CoeffKind::Set),
        Just(CoeffKind::Vect(Field::Prime(2))),
        Just(CoeffKind::Vect(Field::Prime(3))),
    ]
}

/// A random arrow `a: A₁ -> A₀` together with the generator that drew it.
pub fn arrow(cat: &Arc<FinCategory>, seed: u64, knobs: Knobs) -> (PresheafMorphism, ChaCha8Rng) {
    let mut r = rng(seed);
    let base = random_presheaf(cat, &mut r, knobs);
    let a = random_arrow_into(&base, &mut r, knobs);
    (a, r)
}

pub fn reps(base: &Arc<Presheaf>, kind: CoeffKind, r: &mut ChaCha8Rng, n: usize) -> Vec<Arc<Representation>> {
    (0..n).map(|_| Arc::new(random_rep(base, kind, r, knobs_small()))).collect()
}
