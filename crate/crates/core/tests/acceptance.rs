//! End-to-end checks against brute-force oracles. Runs as a plain binary and
//! prints one PASS/FAIL line per check.

mod common;

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use arboreal::cayley::CayleyBall;
use arboreal::chains::{hnn_chain, reduce_chain, run_chain_free, verify_strict};
use arboreal::core_maps::{build_core_map, MapConstants};
use arboreal::displacement::{displacement_bound_check, enumerate_bounded};
use arboreal::metric_core::{max_edges, FoldMove, MetricCore, SearchParams};
use arboreal::stallings::folded_core;
use arboreal::{Group, Letter, Presentation, Rational, Word};
use common::*;
use rand::Rng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn int(n: i64) -> Rational {
    Rational::from_integer(n)
}

fn fold(g: &Group, gens: &[Word]) -> MetricCore {
    let c = MetricCore::from_generators(g, gens).unwrap();
    let out = c.fold_to_minimal(g, SearchParams::default(), 1000).unwrap();
    assert!(!out.budget_exhausted);
    out.core
}

fn fmt(g: &Group, ws: &[Word]) -> String {
    ws.iter().map(|w| g.format(w)).collect::<Vec<_>>().join(",")
}

fn folding_matches_stallings() -> Check {
    let g = Group::free(2);
    let mut rng = rng(101);
    for _ in 0..50 {
        let rank = rng.gen_range(1..=3);
        let gens = random_tuple(&mut rng, rank, 6);
        let core = fold(&g, &gens);
        let expected = folded_core(&gens).num_edges();
        ensure!(core.size() == expected, "{}: size {} vs {expected} edges", fmt(&g, &gens), core.size());
        let qi = core.measure_qi(&g, 8).map_err(|e| e.to_string())?;
        ensure!((qi.estimate.k, qi.estimate.c) == (int(1), int(0)), "{}: measured ({}, {})", fmt(&g, &gens), qi.estimate.k, qi.estimate.c);
    }
    Ok("50 tuples, sizes equal, (K, C) = (1, 0)".into())
}

fn membership_matches_closure() -> Check {
    let g = Group::free(2);
    let mut rng = rng(202);
    let mut words = 0;
    let mut members = 0;
    while words < 1000 {
        let rank = rng.gen_range(1..=3);
        let gens = random_tuple(&mut rng, rank, 4);
        let stallings = folded_core(&gens);
        let known = subgroup_ball(&gens, 6, 10);
        let known_list: Vec<&Word> = known.iter().collect();
        for i in 0..50 {
            let w = if i % 2 == 0 {
                random_word(&mut rng, 2, 6)
            } else {
                known_list[rng.gen_range(0..known_list.len())].clone()
            };
            let got = stallings.membership(&w).map_err(|e| e.to_string())?;
            let want = known.contains(&reduce(w.0.iter().copied()));
            ensure!(got == want, "{} in <{}>: folding says {got}, closure says {want}", g.format(&w), fmt(&g, &gens));
            members += want as usize;
            words += 1;
        }
    }
    Ok(format!("{words} words, {members} members"))
}

/// A nested chain built backwards: each group is generated by products of
/// the next group's generators, and the last group is repeated.
fn random_chain(rng: &mut rand_chacha::ChaCha8Rng) -> Vec<Vec<Word>> {
    let rank = rng.gen_range(2..=3);
    let len = rng.gen_range(2..=6);
    let mut chain = vec![random_tuple(rng, rank, 3)];
    chain.push(chain[0].clone());
    while chain.len() < len {
        let next = &chain[0];
        let mut t = Vec::new();
        while t.len() < rank {
            let k = rng.gen_range(1..=3);
            let mut w = Word(Vec::new());
            for _ in 0..k {
                let x = &next[rng.gen_range(0..rank)];
                w = product(&w, &if rng.gen() { x.clone() } else { inverse(x) });
            }
            if !w.0.is_empty() {
                t.push(w);
            }
        }
        chain.insert(0, t);
    }
    chain
}

fn chains_stabilize() -> Check {
    let g = Group::free(2);
    let mut rng = rng(303);
    let mut reductions = 0;
    for _ in 0..100 {
        let chain = random_chain(&mut rng);
        let show = || chain.iter().map(|t| fmt(&g, t)).collect::<Vec<_>>().join(" ; ");
        let run = run_chain_free(&g, &chain).map_err(|e| e.to_string())?;
        ensure!(run.stabilization_index.is_some(), "{}: no stabilization", show());
        let reduced = reduce_chain(&g, &chain).map_err(|e| e.to_string())?;
        let rec = &reduced.record;
        ensure!(rec.transitions.iter().all(|t| t.surjective), "{}: non-surjective step after reduction", show());
        ensure!(rec.edges_non_increasing == Some(true), "{}: edge counts increase", show());
        ensure!(rec.stabilization_index.is_some(), "{}: reduced chain does not stabilize", show());
        for &(_, before, after) in &reduced.rank_history {
            ensure!(after < before, "{}: rank did not drop", show());
        }
        // each replacement lies inside the group it replaced
        let words = reduced.words(&g).map_err(|e| e.to_string())?;
        for (new, old) in words.iter().zip(&chain) {
            let core = folded_core(old);
            for w in new {
                ensure!(core.membership(w).unwrap(), "{}: replacement escapes", show());
            }
        }
        reductions += reduced.rank_history.len();
    }
    Ok(format!("100 chains, {reductions} replacements"))
}

fn hnn_chain_is_strict() -> Check {
    let g = Group::new(Presentation::hnn_example()).unwrap();
    let chain = hnn_chain(&g, 4).map_err(|e| e.to_string())?;
    let strict = verify_strict(&g, &chain).map_err(|e| e.to_string())?;
    ensure!(strict == vec![true; 4], "strictness {strict:?}");
    // a -> ab, b -> ba read off the relators t x t' = phi(x)
    let (a, b) = (Letter { gen: 0, inverse: false }, Letter { gen: 1, inverse: false });
    let mut expected = vec![a];
    for i in 0..=10u32 {
        let got = g.apply_endomorphism(&Word(vec![a]), i as usize).map_err(|e| e.to_string())?;
        ensure!(got.len() == 1 << i, "|phi^{i}(a)| = {}", got.len());
        ensure!(got.0 == expected, "phi^{i}(a) differs from the substitution");
        expected = expected.iter().flat_map(|&l| if l == a { [a, b] } else { [b, a] }).collect();
    }
    Ok("4 strict steps, |phi^i(a)| = 2^i for i <= 10".into())
}

/// Four-point constant of a finite metric, doubled.
fn four_point_twice(d: &[Vec<i64>]) -> i64 {
    let n = d.len();
    let mut best = 0;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                for w in 0..n {
                    let mut s = [d[x][y] + d[z][w], d[x][z] + d[y][w], d[x][w] + d[y][z]];
                    s.sort();
                    best = best.max(s[2] - s[1]);
                }
            }
        }
    }
    best
}

fn delta_checks() -> Check {
    let free = Group::free(2);
    for r in 0..=5 {
        let d = CayleyBall::new(&free, r).and_then(|b| b.estimate_delta()).map_err(|e| e.to_string())?;
        ensure!(d == int(0), "free ball of radius {r}: delta {d}");
    }
    let z2 = Group::new(Presentation::z2()).unwrap();
    let mut deltas = Vec::new();
    for r in 2..=4 {
        let ball = CayleyBall::new(&z2, r).map_err(|e| e.to_string())?;
        let got = ball.estimate_delta().map_err(|e| e.to_string())?;
        // word metric on Z^2 is the l1 metric on exponent sums
        let pts: Vec<(i64, i64)> = (-(r as i64)..=r as i64)
            .flat_map(|x| (-(r as i64)..=r as i64).map(move |y| (x, y)))
            .filter(|(x, y)| x.abs() + y.abs() <= r as i64)
            .collect();
        ensure!(pts.len() == ball.len(), "radius {r}: {} vertices, expected {}", ball.len(), pts.len());
        let d: Vec<Vec<i64>> = pts.iter().map(|p| pts.iter().map(|q| (p.0 - q.0).abs() + (p.1 - q.1).abs()).collect()).collect();
        let want = Rational::new(four_point_twice(&d), 2);
        ensure!(got == want, "Z^2 radius {r}: delta {got}, l1 oracle {want}");
        deltas.push(got);
    }
    ensure!(deltas.windows(2).all(|w| w[0] <= w[1]), "Z^2 deltas decrease: {deltas:?}");
    ensure!(deltas[0] < deltas[2], "Z^2 delta does not grow from radius 2 to 4: {deltas:?}");
    Ok(format!("free 0 for R <= 5, Z^2 deltas {}, {}, {} for R = 2, 3, 4", deltas[0], deltas[1], deltas[2]))
}

fn dehn_matches_relator_closure() -> Check {
    let g = Group::new(Presentation::surface(2)).unwrap();
    ensure!(g.check_small_cancellation(Rational::new(1, 6)).map_err(|e| e.to_string())?, "C'(1/6) check failed");
    let trivial = relator_closure(&g.presentation().relators, 4, 12);
    let words = all_words(4, 6);
    let mut classes: HashMap<Word, Vec<&Word>> = HashMap::new();
    for w in &words {
        let nf = g.normal_form(w).map_err(|e| e.to_string())?;
        let trivial_by_oracle = trivial.contains(w);
        ensure!(nf.is_empty() == trivial_by_oracle, "{}: normal form {}, oracle trivial {trivial_by_oracle}", g.format(w), g.format(&nf));
        classes.entry(g.key(w)).or_default().push(w);
    }
    // words with the same key are equal
    for members in classes.values() {
        let rep = members[0];
        for &w in &members[1..] {
            ensure!(trivial.contains(&product(w, &inverse(rep))), "{} and {} share a key but differ", g.format(w), g.format(rep));
        }
    }
    // equal words have the same key: if u = v with u = x s, v = y s reduced,
    // then x y' is a reduced trivial word of length at most 12
    let suffixes = all_words(4, 6);
    let mut pairs = 0usize;
    for t in &trivial {
        for cut in 0..=t.0.len() {
            let x = Word(t.0[..cut].to_vec());
            let y = inverse(&Word(t.0[cut..].to_vec()));
            if x.0.len() > 6 || y.0.len() > 6 {
                continue;
            }
            for s in suffixes.iter().filter(|s| s.0.len() + x.0.len().max(y.0.len()) <= 6) {
                let (u, v) = (product(&x, s), product(&y, s));
                if u.0.len() != x.0.len() + s.0.len() || v.0.len() != y.0.len() + s.0.len() {
                    continue;
                }
                ensure!(g.key(&u) == g.key(&v), "{} = {} but keys differ", g.format(&u), g.format(&v));
                pairs += 1;
            }
        }
    }
    Ok(format!("{} words, {} elements, {} trivial words up to 12, {pairs} equal pairs", words.len(), classes.len(), trivial.len()))
}

fn basis_membership(g: &Group, core: &MetricCore, words: &[Word]) -> Vec<bool> {
    let basis = core.loop_basis(g, core.require_based().unwrap(), None);
    let s = folded_core(&basis);
    words.iter().map(|w| s.membership(w).unwrap()).collect()
}

fn improvements_are_sound() -> Check {
    let g = Group::free(2);
    let params = SearchParams::default();
    let mut rng = rng(707);
    let mut cores = 0;
    let mut moves = 0;
    while cores < 200 {
        let rank = rng.gen_range(1..=3);
        let gens = random_tuple(&mut rng, rank, 6);
        // free bases only: for dependent tuples the redundant-edge move
        // lowers the rank on purpose
        if folded_core(&gens).rank().unwrap() != rank {
            continue;
        }
        let words: Vec<Word> = (0..100).map(|_| random_word(&mut rng, 2, 8)).collect();
        let mut core = MetricCore::from_generators(&g, &gens).unwrap();
        let before = basis_membership(&g, &core, &words);
        cores += 1;
        'walk: loop {
            for e in 0..core.num_edges() {
                let Some(mv) = core.search_improvement(&g, e, params).map_err(|e| e.to_string())? else { continue };
                ensure!(!matches!(mv, FoldMove::DiscardRedundantEdge { .. }), "{}: redundant edge in a free basis", fmt(&g, &gens));
                let next = core.apply_move(&g, &mv).map_err(|e| e.to_string())?;
                ensure!(next.size() < core.size(), "{}: {} does not shrink", fmt(&g, &gens), mv.kind());
                ensure!(next.rank() == core.rank(), "{}: {} changes the rank", fmt(&g, &gens), mv.kind());
                ensure!(basis_membership(&g, &next, &words) == before, "{}: {} changes the subgroup", fmt(&g, &gens), mv.kind());
                moves += 1;
                core = next;
                continue 'walk;
            }
            break;
        }
    }
    Ok(format!("{cores} cores, {moves} moves"))
}

fn core_maps_bounds() -> Check {
    let g = Group::free(2);
    let radius = 10;
    let mut rng = rng(808);
    let mut pairs = 0;
    let mut surjective = 0;
    while pairs < 20 {
        let big = random_tuple(&mut rng, 2, 2);
        let small: Vec<Word> = (0..rng.gen_range(1..=2))
            .map(|_| {
                let mut w = Word(Vec::new());
                for _ in 0..rng.gen_range(1..=2) {
                    let x = &big[rng.gen_range(0..2)];
                    w = product(&w, &if rng.gen() { x.clone() } else { inverse(x) });
                }
                w
            })
            .filter(|w| !w.0.is_empty())
            .collect();
        if small.is_empty() {
            continue;
        }
        let (c1, c2) = (fold(&g, &small), fold(&g, &big));
        let m = build_core_map(&g, &c1, &c2, radius).map_err(|e| e.to_string())?;
        let show = format!("<{}> -> <{}>", fmt(&g, &small), fmt(&g, &big));
        ensure!(m.check_equivariance(&g).is_none(), "{show}: not equivariant");
        let classical = folded_core(&small).core_morphism(&folded_core(&big)).unwrap().is_surjective();
        ensure!(m.is_surjective() == classical, "{show}: surjective {} vs classical {classical}", m.is_surjective());
        let (q1, q2) = (c1.measure_qi(&g, radius).unwrap(), c2.measure_qi(&g, radius).unwrap());
        let (k, c) = (q1.estimate.k.max(q2.estimate.k), q1.estimate.c.max(q2.estimate.c));
        let consts = m.constants();
        // in a tree the subgroup's hull lies inside the larger hull
        ensure!(consts.d == 0, "{show}: closeness {}", consts.d);
        let two = int(2);
        let (k0, c0) = (k * k, two * k * int(consts.d as i64) + two * k * c);
        let want = MapConstants { d: consts.d, k, c, k0, c0, k_prime: k0, c_prime: int(3) * k0 + two * c0 };
        ensure!(*consts == want, "{show}: constants {consts:?}, expected {want:?}");
        let qi = m.measure_qi(&g, radius).map_err(|e| e.to_string())?;
        ensure!(qi.step1_holds && qi.holds, "{show}: sampled pairs break the predicted constants");
        ensure!(qi.empirical.k <= consts.k_prime, "{show}: empirical K {}", qi.empirical.k);
        if m.is_surjective() {
            ensure!(m.size_bound_check().unwrap(), "{show}: size bound fails");
            surjective += 1;
        }
        pairs += 1;
    }
    Ok(format!("20 pairs, {surjective} surjective"))
}

fn displacement_checks() -> Check {
    let g = Group::free(2);
    let mut rng = rng(909);
    for _ in 0..50 {
        let rank = rng.gen_range(1..=3);
        let gens = random_tuple(&mut rng, rank, 5);
        let core = fold(&g, &gens);
        let qi = core.measure_qi(&g, 10).map_err(|e| e.to_string())?;
        ensure!((qi.estimate.k, qi.estimate.c) == (int(1), int(0)), "{}: measured ({}, {})", fmt(&g, &gens), qi.estimate.k, qi.estimate.c);
        ensure!(displacement_bound_check(&g, &core, int(1), int(0)).unwrap(), "{}: bound fails", fmt(&g, &gens));
    }
    let e = enumerate_bounded(&g, 3, 1).map_err(|e| e.to_string())?;
    // brute force: non-trivial reduced words of length <= 3, two of them
    // generating the same cyclic subgroup when each is a power of the other
    let words: Vec<Word> = all_words(2, 3).into_iter().filter(|w| !w.0.is_empty()).collect();
    let power = |w: &Word, k: i64| {
        let base = if k < 0 { inverse(w) } else { w.clone() };
        (0..k.abs()).fold(Word(Vec::new()), |acc, _| product(&acc, &base))
    };
    let in_cyclic = |x: &Word, w: &Word| (-3..=3).any(|k| power(w, k) == *x);
    let mut reps: Vec<&Word> = Vec::new();
    for w in &words {
        if !reps.iter().any(|r| in_cyclic(w, r) && in_cyclic(r, w)) {
            reps.push(w);
        }
    }
    ensure!(e.tuples.len() == words.len(), "{} tuples, brute force {}", e.tuples.len(), words.len());
    ensure!(e.num_classes == reps.len(), "{} classes, brute force {}", e.num_classes, reps.len());
    Ok(format!("50 cores within bound, {} tuples in {} subgroups", words.len(), reps.len()))
}

fn edge_bound() -> Check {
    let mut seen = Vec::new();
    for r in 1..=3 {
        let got = max_edges(r).map_err(|e| e.to_string())?;
        let want = coarse_graph_max_edges(r);
        ensure!(got == want, "rank {r}: {got} vs enumeration {want}");
        seen.push(got);
    }
    Ok(format!("max edges {seen:?} for ranks 1..=3"))
}

fn main() -> ExitCode {
    let checks: [(&str, fn() -> Check); 10] = [
        ("folding matches Stallings", folding_matches_stallings),
        ("membership matches closure", membership_matches_closure),
        ("chains stabilize after reduction", chains_stabilize),
        ("HNN chain strict ascent", hnn_chain_is_strict),
        ("delta on free and Z^2 balls", delta_checks),
        ("Dehn backend soundness", dehn_matches_relator_closure),
        ("improvement soundness", improvements_are_sound),
        ("core map bounds", core_maps_bounds),
        ("displacement", displacement_checks),
        ("edge bound", edge_bound),
    ];
    let mut failed = 0;
    for (i, (name, f)) in checks.iter().enumerate() {
        let t = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({secs:.2}s)", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
