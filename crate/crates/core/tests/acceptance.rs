//! End-to-end acceptance run: one line per criterion, non-zero exit on any
//! failure. Every comparison is exact equality.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use descent_engine::coeff::CoeffKind;
use descent_engine::descent::{
    automorphisms, exchange_status, ChiStatus, DescentContext, InverseMode, InverseOutcome, PreDescentDatum,
};
use descent_engine::fibration::{
    hom_reps, is_fully_faithful, linear_combination, pullback_mor, retraction_r, HomSet, RepMorphism,
    Representation,
};
use descent_engine::group::{mackey_oracle, FiniteGroup, SubgroupRep};
use descent_engine::linalg::{Field, Matrix};
use descent_engine::monad::{algebra_candidates, check_associative, check_unital, comparison_ka, split_unital_algebra};
use descent_engine::presheaf::canonical_shape;
use descent_engine::random::rng;
use descent_engine::scenarios::{builtin_names, instantiate, run_scenario, Instance, Scenario, Verdict};
use descent_engine::Error;

type Check = Result<String, Box<dyn std::error::Error>>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+).into());
        }
    };
}

fn builtin(name: &str) -> Scenario {
    Scenario::builtin(name).unwrap_or_else(|| panic!("builtin {name}"))
}

fn instance(name: &str) -> Instance {
    instantiate(&builtin(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Builtins whose shape is a fibre product, so the exchange map is iso.
const CARTESIAN: [&str; 4] = ["identity", "sieve-split", "set-canonical", "mackey-s3"];

fn homs(m: &Arc<Representation>, n: &Arc<Representation>, budget: u64) -> Result<Vec<RepMorphism>, Error> {
    Ok(hom_reps(m, n, budget)?.morphisms().to_vec())
}

/// Seeded hom-set element: uniform over a full list, random combination of a basis.
fn sample(homs: &HomSet, kind: CoeffKind, r: &mut impl Rng) -> Result<Option<RepMorphism>, Error> {
    match (homs, kind) {
        (HomSet::All(all), _) => Ok(all.choose(r).cloned()),
        (HomSet::Basis(basis), CoeffKind::Vect(field)) if !basis.is_empty() => {
            let coeffs: Vec<_> = basis.iter().map(|_| field.from_i64(r.gen_range(0..5))).collect();
            Ok(Some(linear_combination(basis, &coeffs)?))
        }
        _ => Ok(None),
    }
}

fn adjunction_soundness(name: &str) -> Check {
    let started = Instant::now();
    let inst = instance(name);
    let adj = &inst.ctx.a;
    for (label, m) in &inst.objects {
        let lhs = adj.counit(&adj.push(m)?)?.compose(&adj.push_mor(&adj.unit(m)?)?)?;
        ensure!(lhs.is_identity(), "{name}: eps a_* . a_* eta != id at {label}");
    }
    for (label, n) in &inst.base_objects {
        let lhs = adj.pullback_mor(&adj.counit(n)?)?.compose(&adj.unit(&adj.pullback(n)?)?)?;
        ensure!(lhs.is_identity(), "{name}: a* eps . eta a* != id at {label}");
    }
    let mut maps = 0;
    for (lm, m) in &inst.objects {
        let pushed = adj.push(m)?;
        for (ln, n) in &inst.base_objects {
            let left = hom_reps(&pushed, n, inst.budget)?;
            let right = hom_reps(m, &adj.pullback(n)?, inst.budget)?;
            ensure!(left.len() == right.len(), "{name}: hom sizes differ for {lm}, {ln}");
            for psi in left.morphisms() {
                let theta = adj.transpose(m, psi)?;
                ensure!(adj.untranspose(&theta, n)? == *psi, "{name}: transpose not injective at {lm}, {ln}");
            }
            for theta in right.morphisms() {
                let psi = adj.untranspose(theta, n)?;
                ensure!(adj.transpose(m, &psi)? == *theta, "{name}: transpose not surjective at {lm}, {ln}");
            }
            maps += left.len() + right.len();
        }
    }
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "{name}: took {elapsed:?}");
    Ok(format!("{name} {maps} maps in {:.2}s", elapsed.as_secs_f64()))
}

fn c1_adjunction() -> Check {
    let parts = ["identity", "set-canonical", "mackey-s3"]
        .iter()
        .map(|n| adjunction_soundness(n))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(parts.join("; "))
}

/// `ξ` three ways: the library's two routes and `a₂* φ ∘ a₁* η_M` assembled here.
fn xi_agreement(inst: &Instance) -> Result<usize, Box<dyn std::error::Error>> {
    let ctx = &inst.ctx;
    let t = ctx.monad();
    let mut n = 0;
    for (lm, m) in &inst.objects {
        let tm = t.apply(m)?;
        let lifted_unit = ctx.a1.pullback_mor(&ctx.a.unit(m)?)?;
        for (ln, target) in &inst.objects {
            for phi in homs(&tm, target, inst.budget)? {
                let direct = ctx.a2.pullback_mor(&phi)?.compose(&lifted_unit)?;
                let xi = ctx.xi(m, &phi)?;
                ensure!(xi == direct && ctx.xi_via_definition(m, &phi)? == direct, "xi disagrees on T {lm} -> {ln}");
                n += 1;
            }
        }
    }
    Ok(n)
}

fn c2_xi_definition() -> Check {
    let set = xi_agreement(&instance("set-canonical"))?;
    ensure!(set >= 50, "only {set} maps on set-canonical");
    let vect = xi_agreement(&instance("mackey-s3"))?;
    ensure!(vect > 0, "empty basis on mackey-s3");
    Ok(format!("{set} maps over set-canonical, {vect} basis maps over mackey-s3"))
}

fn c3_face_laws(verdicts: &[Verdict]) -> Check {
    let laws = [
        "double-exchange-diagram",
        "outer-face-action",
        "face-composition",
        "associativity-cocycle",
        "induced-action",
    ];
    let mut totals = vec![0; laws.len()];
    for v in verdicts {
        for (k, name) in laws.iter().enumerate() {
            let law = v.law(name).ok_or(format!("{}: {name} missing", v.scenario))?;
            ensure!(law.pass, "{}: {name} failed: {:?}", v.scenario, law.witness);
            totals[k] += law.checked;
        }
    }
    ensure!(totals.iter().all(|&t| t > 0), "some law checked nothing: {totals:?}");
    // Associative actions give cocycles, checked here without the battery.
    let inst = instance("set-canonical");
    let (ctx, t) = (&inst.ctx, inst.ctx.monad());
    let mut associative = 0;
    for (_, m) in &inst.objects {
        let tm = t.apply(m)?;
        let mu = t.mu(m)?;
        for phi in homs(&tm, m, inst.budget)? {
            if phi.compose(&t.apply_mor(&phi)?)? != phi.compose(&mu)? {
                continue;
            }
            associative += 1;
            let v = ctx.xi(m, &phi)?;
            let rhs = ctx.p1.pullback_mor(&v)?.compose(&ctx.p3.pullback_mor(&v)?)?;
            ensure!(ctx.p2.pullback_mor(&v)? == rhs, "associative action without cocycle");
        }
    }
    ensure!(associative > 0, "no associative action on set-canonical");
    let summary: Vec<String> = laws.iter().zip(&totals).map(|(l, t)| format!("{l} {t}")).collect();
    Ok(format!("{}; {associative} associative actions re-checked", summary.join(", ")))
}

fn exchange_on(coeff: &str) -> Result<String, Box<dyn std::error::Error>> {
    let mut s = builtin("set-canonical");
    s.coeff = coeff.into();
    let inst = instantiate(&s)?;
    let ctx = &inst.ctx;
    let cover = ctx.shape().cover().clone();
    let el = cover.elements();
    let representables = el.category.object_count();
    let random = inst.objects.iter().filter(|o| o.0.starts_with("random-")).count();
    ensure!(random == 20, "{coeff}: {random} random objects");
    ensure!(inst.objects.len() == representables + 20, "{coeff}: representables missing");
    for (label, m) in &inst.objects {
        ensure!(ctx.chi(m)?.is_iso(), "{coeff}: chi not iso at {label}");
    }
    // Closed form: T y(c,γ) at (d,δ) is indexed by {φ: d -> c | a(φ*γ) = a(δ)}.
    let (cat, a) = (cover.base().clone(), &ctx.shape().a);
    let mut points = 0;
    for top in 0..representables {
        let report = ctx.closed_form_check(top)?;
        ensure!(report.passes(), "{coeff}: labels differ at {}", report.top);
        points += report.points;
        let (c, gamma) = el.objects[top];
        let y = Arc::new(Representation::representable(cover.clone(), top, inst.kind));
        let ty = ctx.monad().apply(&y)?;
        let mut total = 0;
        for (at, &(d, delta)) in el.objects.iter().enumerate() {
            let expected = cat
                .hom(d, c)
                .into_iter()
                .filter(|&phi| a.apply(d, cover.restrict(phi, gamma)) == a.apply(d, delta))
                .count();
            ensure!(ty.value(at).size() == expected, "{coeff}: size of T y at ({d},{delta}) is not {expected}");
            total += expected;
        }
        ensure!(total == report.points, "{coeff}: closed form counted {} not {total}", report.points);
    }
    Ok(format!("{coeff}: {} objects iso, {points} closed-form elements", inst.objects.len()))
}

fn c4_exchange() -> Check {
    Ok(format!("{}; {}", exchange_on("set")?, exchange_on("vect-5")?))
}

type Perm = [usize; 3];

fn perm_mul(g: &Perm, f: &Perm) -> Perm {
    [g[f[0]], g[f[1]], g[f[2]]]
}

fn perm_inv(g: &Perm) -> Perm {
    let mut out = [0; 3];
    for (i, &x) in g.iter().enumerate() {
        out[x] = i;
    }
    out
}

/// `dim Res_K Ind_K^G V` by double-coset counting over explicit permutations.
fn double_coset_dim(k: &[Perm], dim: usize) -> usize {
    let mut all = Vec::new();
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                if a != b && b != c && a != c {
                    all.push([a, b, c]);
                }
            }
        }
    }
    let mut seen = BTreeSet::new();
    let mut total = 0;
    for s in &all {
        if seen.contains(s) {
            continue;
        }
        for x in k {
            for y in k {
                seen.insert(perm_mul(&perm_mul(x, s), y));
            }
        }
        let conj: BTreeSet<Perm> = k.iter().map(|x| perm_mul(&perm_mul(s, x), &perm_inv(s))).collect();
        let meet = k.iter().filter(|x| conj.contains(*x)).count();
        total += k.len() / meet * dim;
    }
    total
}

fn c5_mackey() -> Check {
    let started = Instant::now();
    let group = FiniteGroup::symmetric(3);
    let field = Field::Prime(5);
    let whole: Vec<usize> = (0..group.order()).collect();
    let idx = |p: &Perm| FiniteGroup::permutation_index(p).expect("permutation");
    let transposition = [1, 0, 2];
    let cycle = [1, 2, 0];
    let cases: [(&str, Vec<Perm>, Option<(Perm, Vec<Vec<i64>>)>); 3] = [
        ("<(12)>", vec![[0, 1, 2], transposition], Some((transposition, vec![vec![0, 1], vec![1, 0]]))),
        ("<(123)>", vec![[0, 1, 2], cycle, perm_mul(&cycle, &cycle)], Some((cycle, vec![vec![0, -1], vec![1, -1]]))),
        ("trivial", vec![[0, 1, 2]], None),
    ];
    let mut lines = Vec::new();
    for (label, perms, two_dim) in &cases {
        let k = group.generate(&perms.iter().map(idx).collect::<Vec<_>>());
        ensure!(k.len() == perms.len(), "{label}: generated {} elements", k.len());
        let cat = group.delooping();
        let ctx = DescentContext::new(canonical_shape(&group.coset_projection(&cat, &k, &whole)?)?)?;
        let cover = ctx.shape().cover();
        let mut reps = vec![(1, SubgroupRep::trivial(&group, &k, field, 1)?)];
        reps.push(match two_dim {
            Some((g, rows)) => {
                let rows: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
                (2, SubgroupRep::from_generators(&group, &k, field, 2, &[(idx(g), Matrix::from_i64(field, &rows))])?)
            }
            None => (2, SubgroupRep::trivial(&group, &k, field, 2)?),
        });
        for (dim, v) in reps {
            let m = Arc::new(v.to_groupoid_rep(&group, cover)?);
            let predicted = double_coset_dim(perms, dim);
            let library = mackey_oracle(&group, &whole, &k, dim)?.total_dim;
            ensure!(library == predicted, "{label} dim {dim}: library oracle {library}, count {predicted}");
            let tv = ctx.monad().apply(&m)?;
            ensure!(
                tv.values().iter().all(|x| x.size() == predicted),
                "{label} dim {dim}: T V has dims {:?}, predicted {predicted}",
                tv.values().iter().map(|x| x.size()).collect::<Vec<_>>()
            );
            ensure!(ctx.chi(&m)?.is_iso(), "{label} dim {dim}: exchange not iso");
            lines.push(format!("{label}/{dim}: {predicted}"));
        }
    }
    ensure!(lines[0] == "<(12)>/1: 3", "dim Ind triv over <(12)> is not 3: {}", lines[0]);
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!("{} in {:.2}s", lines.join(", "), elapsed.as_secs_f64()))
}

fn c6_round_trip() -> Check {
    let mut summary = Vec::new();
    for name in CARTESIAN {
        let inst = instance(name);
        let ctx = &inst.ctx;
        let delta = ctx.shape().delta.clone().ok_or(format!("{name}: no diagonal"))?;
        let (mut cands, mut data) = (0, 0);
        for (label, m) in &inst.objects {
            if !ctx.chi(m)?.is_iso() {
                continue;
            }
            let eta = ctx.monad().unit(m)?;
            for phi in homs(&ctx.monad().apply(m)?, m, inst.budget)? {
                let cand = descent_engine::monad::AlgebraCandidate {
                    carrier: m.clone(),
                    action: phi.clone(),
                };
                let d = ctx.algebra_to_descent(&cand)?;
                ensure!(pullback_mor(&delta, &d.v)? == phi.compose(&eta)?, "{name}: diagonal unit fails at {label}");
                match ctx.descent_to_algebra(&d, InverseMode::Exact, inst.budget)? {
                    InverseOutcome::Found(back) if back.action == phi => cands += 1,
                    _ => return Err(format!("{name}: candidate on {label} not recovered").into()),
                }
            }
            for v in homs(&ctx.a1.pullback(m)?, &ctx.a2.pullback(m)?, inst.budget)? {
                let d = PreDescentDatum { carrier: m.clone(), v };
                match ctx.descent_to_algebra(&d, InverseMode::Exact, inst.budget)? {
                    InverseOutcome::Found(c) if ctx.algebra_to_descent(&c)? == d => data += 1,
                    _ => return Err(format!("{name}: datum on {label} not recovered").into()),
                }
            }
        }
        ensure!(cands > 0 && data > 0, "{name}: empty sweep");
        summary.push(format!("{name} {cands}/{data}"));
    }
    Ok(format!("candidates/data recovered: {}", summary.join(", ")))
}

fn c7_comparison_datum() -> Check {
    let mut total = 0;
    for name in builtin_names() {
        let inst = instance(name);
        let seeded: Vec<_> = inst.base_objects.iter().filter(|o| o.0.starts_with("base-random-")).collect();
        ensure!(seeded.len() == 10, "{name}: {} seeded base objects", seeded.len());
        for (label, m0) in seeded {
            let cand = comparison_ka(inst.ctx.monad(), m0)?;
            ensure!(inst.ctx.algebra_to_descent(&cand)?.v.is_identity(), "{name}: datum of {label} is not the identity");
            total += 1;
        }
    }
    Ok(format!("{total} seeded base objects give identity data"))
}

fn c8_invertibility() -> Check {
    let (mut descent, mut invertible) = (0, 0);
    for name in CARTESIAN {
        let inst = instance(name);
        let ctx = &inst.ctx;
        let sigma = ctx.shape().sigma.clone().ok_or(format!("{name}: no swap"))?;
        let delta = ctx.shape().delta.clone().ok_or(format!("{name}: no diagonal"))?;
        let mut data = Vec::new();
        for (_, m) in &inst.objects {
            match homs(&ctx.a1.pullback(m)?, &ctx.a2.pullback(m)?, inst.budget) {
                Ok(vs) => data.extend(vs.into_iter().map(|v| PreDescentDatum { carrier: m.clone(), v })),
                Err(Error::TooLarge { .. }) => {}
                Err(e) => return Err(e.into()),
            }
            let tm = ctx.monad().apply(m)?;
            for g in automorphisms(&tm, inst.budget)? {
                let v = ctx.a2.pullback_mor(&g)?.compose(&ctx.a1.pullback_mor(&g.inverse().expect("automorphism"))?)?;
                data.push(PreDescentDatum { carrier: tm.clone(), v });
            }
        }
        for d in &data {
            if !ctx.predescent_check(d)? {
                continue;
            }
            let report = ctx.p41_check(d)?;
            if pullback_mor(&delta, &d.v)?.is_identity() {
                descent += 1;
                let swapped = pullback_mor(&sigma, &d.v)?;
                ensure!(
                    swapped.compose(&d.v)?.is_identity() && d.v.compose(&swapped)?.is_identity(),
                    "{name}: sigma* v is not inverse to v"
                );
                ensure!(report.i_implies_ii == Some(true), "{name}: (i) => (ii) not confirmed");
            }
            if d.v.is_iso() {
                invertible += 1;
                ensure!(pullback_mor(&delta, &d.v)?.is_identity(), "{name}: invertible cocycle without unit");
                ensure!(report.ii_implies_i == Some(true), "{name}: (ii) => (i) not confirmed");
            }
        }
    }
    ensure!(descent > 0 && invertible > 0, "empty sweep");
    Ok(format!("{descent} descent data inverted by the swap, {invertible} invertible cocycles unital"))
}

fn c9_splitting() -> Check {
    let inst = instance("sieve-split");
    let t = inst.ctx.monad();
    let adj = &inst.ctx.a;
    let mut cands = Vec::new();
    for (_, m) in &inst.objects {
        cands.extend(algebra_candidates(t, m, inst.budget)?);
    }
    for (_, m0) in &inst.base_objects {
        cands.push(comparison_ka(t, m0)?);
    }
    let family = cands.iter().map(|c| adj.push(&c.carrier)).collect::<Result<Vec<_>, _>>()?;
    ensure!(is_fully_faithful(adj, &family, inst.budget)?, "pullback not fully faithful on the carriers");
    let mut unital = 0;
    for cand in &cands {
        if !check_unital(t, cand)? {
            continue;
        }
        unital += 1;
        let s = split_unital_algebra(t, cand, &family, inst.budget)?;
        let nu_inv = s.nu.inverse().ok_or("nu is not invertible")?;
        let rebuilt = nu_inv
            .compose(&adj.pullback_mor(&adj.counit(&s.base_rep)?)?)?
            .compose(&t.apply_mor(&s.nu)?)?;
        ensure!(rebuilt == cand.action, "phi differs from nu^-1 . a* eps . T nu");
        ensure!(check_associative(t, cand)?, "unital candidate is not associative");
    }
    ensure!(unital > 0, "no unital candidates");
    Ok(format!("sieve-split: {unital} of {unital} unital candidates split, all associative"))
}

fn c10_chevalley() -> Check {
    let mut squares = 0;
    for name in CARTESIAN {
        let inst = instance(name);
        let r = inst.ctx.chevalley_check(&inst.objects, inst.budget)?;
        ensure!(r.chi_iso, "{name}: exchange not iso");
        ensure!(r.c_failures == 0 && r.c_prime_failures == 0, "{name}: {r:?}");
        ensure!(r.c_squares > 0 && r.c_prime_squares > 0, "{name}: no squares generated");
        squares += r.c_squares + r.c_prime_squares;
    }
    let inst = instance("epi-only");
    let status = exchange_status(inst.ctx.exchange_square(), &inst.objects)?.overall;
    ensure!(status == ChiStatus::EpiOnly, "epi-only exchange status is {status}");
    let r = inst.ctx.chevalley_check(&inst.objects, inst.budget)?;
    let witness = r.witnesses.iter().find(|w| w.condition == "C").ok_or("no (C) witness")?;
    ensure!(r.c_failures > 0, "no failing (C) square");
    Ok(format!(
        "{squares} squares pass under iso exchange; epi-only (C) fails at {}: {}",
        witness.object, witness.detail
    ))
}

fn c11_retraction() -> Check {
    let (mut exact, mut seeded) = (0, 0);
    for name in builtin_names() {
        let inst = instance(name);
        let adj = &inst.ctx.a;
        let t = inst.ctx.monad();
        for (_, m) in &inst.objects {
            for (_, n) in &inst.objects {
                for g in homs(&adj.push(m)?, &adj.push(n)?, inst.budget)? {
                    ensure!(retraction_r(adj, m, n, &adj.pullback_mor(&g)?)? == g, "{name}: r(a* g) != g");
                    exact += 1;
                }
            }
        }
        let mut r = rng(inst.seed.wrapping_add(3));
        let objs = &inst.objects;
        let mut here = 0;
        for _ in 0..200 {
            if here == 10 {
                break;
            }
            let pick = |r: &mut rand_chacha::ChaCha8Rng| objs[r.gen_range(0..objs.len())].1.clone();
            let (m, n, p) = (pick(&mut r), pick(&mut r), pick(&mut r));
            let f = sample(&hom_reps(&t.apply(&m)?, &t.apply(&n)?, inst.budget)?, inst.kind, &mut r)?;
            let g = sample(&hom_reps(&adj.push(&n)?, &adj.push(&p)?, inst.budget)?, inst.kind, &mut r)?;
            let (Some(f), Some(g)) = (f, g) else { continue };
            let lhs = retraction_r(adj, &m, &p, &adj.pullback_mor(&g)?.compose(&f)?)?;
            ensure!(lhs == g.compose(&retraction_r(adj, &m, &n, &f)?)?, "{name}: r(a* g . f) != g . r(f)");
            here += 1;
        }
        ensure!(here == 10, "{name}: only {here} seeded composites");
        seeded += here;
    }
    Ok(format!("{exact} exact retractions, {seeded} seeded composites"))
}

fn c12_determinism(first: &[Verdict]) -> Check {
    for v in first {
        let again = run_scenario(&builtin(&v.scenario))?;
        ensure!(again.to_json() == v.to_json(), "{}: verdict bytes differ", v.scenario);
    }
    Ok(format!("{} builtins byte-identical on rerun", first.len()))
}

fn main() {
    let verdicts: Vec<Verdict> = builtin_names()
        .iter()
        .map(|n| run_scenario(&builtin(n)).unwrap_or_else(|e| panic!("{n}: {e}")))
        .collect();
    let criteria: Vec<(&str, Box<dyn Fn() -> Check + '_>)> = vec![
        ("adjunction soundness", Box::new(c1_adjunction)),
        ("xi agrees with its definition", Box::new(c2_xi_definition)),
        ("face and cocycle laws", Box::new(|| c3_face_laws(&verdicts))),
        ("exchange iso with closed form", Box::new(c4_exchange)),
        ("double coset cross-check", Box::new(c5_mackey)),
        ("algebra/descent round trip", Box::new(c6_round_trip)),
        ("comparison algebras give identity data", Box::new(c7_comparison_datum)),
        ("cocycle invertibility", Box::new(c8_invertibility)),
        ("unital algebras split", Box::new(c9_splitting)),
        ("chevalley conditions", Box::new(c10_chevalley)),
        ("pullback retraction", Box::new(c11_retraction)),
        ("determinism", Box::new(|| c12_determinism(&verdicts))),
    ];
    let mut failed = 0;
    for (k, (title, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}").into())
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {title}: {detail}", k + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {:>2} {title}: {e}", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
