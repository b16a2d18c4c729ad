//! Random inputs and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use arboreal::{Letter, Word};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform freely reduced non-empty word of length `1..=max` over `gens`
/// generators.
pub fn random_word(rng: &mut ChaCha8Rng, gens: u16, max: usize) -> Word {
    let n = rng.gen_range(1..=max);
    let mut w: Vec<Letter> = Vec::with_capacity(n);
    while w.len() < n {
        let l = Letter { gen: rng.gen_range(0..gens), inverse: rng.gen() };
        if w.last().is_some_and(|&p| p.gen == l.gen && p.inverse != l.inverse) {
            continue;
        }
        w.push(l);
    }
    Word(w)
}

pub fn random_tuple(rng: &mut ChaCha8Rng, rank: usize, max: usize) -> Vec<Word> {
    (0..rank).map(|_| random_word(rng, 2, max)).collect()
}

/// Free reduction written out directly with a stack.
pub fn reduce(letters: impl IntoIterator<Item = Letter>) -> Word {
    let mut out: Vec<Letter> = Vec::new();
    for l in letters {
        match out.last() {
            Some(&p) if p.gen == l.gen && p.inverse != l.inverse => {
                out.pop();
            }
            _ => out.push(l),
        }
    }
    Word(out)
}

pub fn inverse(w: &Word) -> Word {
    Word(w.0.iter().rev().map(|l| Letter { gen: l.gen, inverse: !l.inverse }).collect())
}

pub fn product(u: &Word, v: &Word) -> Word {
    reduce(u.0.iter().chain(&v.0).copied())
}

/// Every freely reduced word of length at most `n` over `gens` generators.
pub fn all_words(gens: u16, n: usize) -> Vec<Word> {
    let letters: Vec<Letter> = (0..gens).flat_map(|g| [Letter { gen: g, inverse: false }, Letter { gen: g, inverse: true }]).collect();
    let mut out = vec![Word(Vec::new())];
    let mut frontier = out.clone();
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &frontier {
            for &l in &letters {
                if w.0.last().is_some_and(|&p| p.gen == l.gen && p.inverse != l.inverse) {
                    continue;
                }
                let mut v = w.clone();
                v.0.push(l);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Elements of `<gens>` of length at most `bound`: products of at most four
/// generators, then closed under multiplication by generators while staying
/// within `cap` letters.
pub fn subgroup_ball(gens: &[Word], bound: usize, cap: usize) -> HashSet<Word> {
    let steps: Vec<Word> = gens.iter().flat_map(|g| [reduce(g.0.iter().copied()), inverse(&reduce(g.0.iter().copied()))]).collect();
    let mut seen: HashSet<Word> = HashSet::from([Word(Vec::new())]);
    let mut layer = vec![Word(Vec::new())];
    for _ in 0..4 {
        let mut next = Vec::new();
        for w in &layer {
            for s in &steps {
                let p = product(w, s);
                if seen.insert(p.clone()) {
                    next.push(p);
                }
            }
        }
        layer = next;
    }
    let mut queue: VecDeque<Word> = seen.iter().filter(|w| w.0.len() <= cap).cloned().collect();
    while let Some(w) = queue.pop_front() {
        for s in &steps {
            let p = product(&w, s);
            if p.0.len() <= cap && seen.insert(p.clone()) {
                queue.push_back(p);
            }
        }
    }
    seen.into_iter().filter(|w| w.0.len() <= bound).collect()
}

/// Freely reduced words of length at most `cap` that are trivial in the
/// group with the given relators, grown from the empty word by inserting
/// conjugates `k r k'` of cyclic relator variants, with `2|k| + |r| <= cap`.
/// For a C'(1/6) presentation this reaches every trivial word of length at
/// most `cap`: undoing one Dehn step is such an insertion.
pub fn relator_closure(relators: &[Word], gens: u16, cap: usize) -> HashSet<Word> {
    let mut variants: Vec<Word> = Vec::new();
    for r in relators {
        for base in [r.clone(), inverse(r)] {
            for k in 0..base.0.len() {
                let mut v = base.0[k..].to_vec();
                v.extend_from_slice(&base.0[..k]);
                variants.push(Word(v));
            }
        }
    }
    let mut inserts: HashSet<Word> = HashSet::new();
    for v in &variants {
        for k in all_words(gens, cap.saturating_sub(v.0.len()) / 2) {
            let c = product(&product(&k, v), &inverse(&k));
            if c.0.len() <= cap {
                inserts.insert(c);
            }
        }
    }
    let mut inserts: Vec<Word> = inserts.into_iter().collect();
    inserts.sort_by_key(|w| w.0.len());
    let mut seen: HashSet<Word> = HashSet::from([Word(Vec::new())]);
    let mut queue = VecDeque::from([Word(Vec::new())]);
    while let Some(w) = queue.pop_front() {
        for i in 0..=w.0.len() {
            for c in &inserts {
                let u = reduce(w.0[..i].iter().chain(&c.0).chain(&w.0[i..]).copied());
                if u.0.len() <= cap && seen.insert(u.clone()) {
                    queue.push_back(u);
                }
            }
        }
    }
    seen
}

/// Largest edge count of a connected multigraph (loops allowed) with
/// `E - V + 1 = r` whose vertices all have valence at least three, the
/// one-vertex graphs excepted. Exhaustive over edge multisets.
pub fn coarse_graph_max_edges(r: usize) -> usize {
    let mut best = 0;
    for v in 1..=(2 * r).max(1) {
        let e = r + v - 1;
        let pairs: Vec<(usize, usize)> = (0..v).flat_map(|a| (a..v).map(move |b| (a, b))).collect();
        let mut choice = vec![0usize; e];
        loop {
            let edges: Vec<(usize, usize)> = choice.iter().map(|&i| pairs[i]).collect();
            if coarse(v, &edges) {
                best = best.max(e);
            }
            // next non-decreasing index sequence
            let mut k = e;
            while k > 0 && choice[k - 1] == pairs.len() - 1 {
                k -= 1;
            }
            if k == 0 {
                break;
            }
            choice[k - 1] += 1;
            let x = choice[k - 1];
            for c in &mut choice[k..] {
                *c = x;
            }
        }
    }
    best
}

fn coarse(v: usize, edges: &[(usize, usize)]) -> bool {
    let mut deg = vec![0; v];
    let mut parent: Vec<usize> = (0..v).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for &(a, b) in edges {
        deg[a] += 1;
        deg[b] += 1;
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    let root = find(&mut parent, 0);
    let connected = (0..v).all(|x| find(&mut parent, x) == root);
    connected && (v == 1 || deg.iter().all(|&d| d >= 3))
}
