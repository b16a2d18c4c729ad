use std::collections::{BTreeSet, HashSet, VecDeque};

use num_rational::Ratio;

use super::word::{Letter, Word};
use crate::error::{Error, Result};

/// Upper bound on the number of words visited when searching for the
/// shortlex-least geodesic representative.
const CLOSURE_CAP: usize = 20_000;

/// Dehn's algorithm over the symmetrized closure of a relator set: every cyclic
/// shift of every relator and of its inverse, counted by position.
#[derive(Clone, Debug)]
pub struct DehnSolver {
    cyclic: Vec<Word>,
    by_first: Vec<Vec<usize>>,
}

impl DehnSolver {
    pub fn new(relators: &[Word], num_generators: usize) -> Self {
        let mut cyclic = Vec::new();
        for r in relators {
            for base in [r.clone(), r.inverse()] {
                for k in 0..base.len() {
                    cyclic.push(base.rotate(k));
                }
            }
        }
        let mut by_first = vec![Vec::new(); 2 * num_generators];
        for (i, r) in cyclic.iter().enumerate() {
            if let Some(l) = r.first() {
                by_first[l.index()].push(i);
            }
        }
        DehnSolver { cyclic, by_first }
    }

    /// Longest match at position `i` against the symmetrized relators:
    /// returns `(relator index, match length)`.
    fn best_match(&self, w: &[Letter], i: usize, accept: impl Fn(usize, usize) -> bool) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for &ri in &self.by_first[w[i].index()] {
            let r = self.cyclic[ri].letters();
            let m = r.iter().zip(&w[i..]).take_while(|(a, b)| a == b).count();
            if accept(m, r.len()) && best.is_none_or(|(_, bm)| m > bm) {
                best = Some((ri, m));
            }
        }
        best
    }

    fn replace(w: &[Letter], i: usize, m: usize, r: &Word) -> Word {
        let mut out: Vec<Letter> = w[..i].to_vec();
        out.extend(r.suffix_from(m).inverse().0);
        out.extend_from_slice(&w[i + m..]);
        Word(out).free_reduce()
    }

    /// Repeatedly replaces the leftmost-longest subword that is more than half
    /// of a relator by the shorter complement, with free reduction in between.
    pub fn reduce(&self, w: &Word) -> Word {
        let mut cur = w.free_reduce();
        'outer: loop {
            for i in 0..cur.len() {
                if let Some((ri, m)) = self.best_match(cur.letters(), i, |m, n| 2 * m > n) {
                    cur = Self::replace(cur.letters(), i, m, &self.cyclic[ri]);
                    continue 'outer;
                }
            }
            return cur;
        }
    }

    pub fn is_trivial(&self, w: &Word) -> bool {
        self.reduce(w).is_empty()
    }

    /// Shortlex-least word among those reachable from the Dehn-reduced form by
    /// swapping exact relator halves and reducing again. Used as the canonical
    /// geodesic representative of the element.
    pub fn geodesic_key(&self, w: &Word) -> Word {
        let start = self.reduce(w);
        let mut best = start.clone();
        let mut seen: HashSet<Word> = HashSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            if u.shortlex_cmp(&best).is_lt() {
                best = u.clone();
            }
            for i in 0..u.len() {
                for &ri in &self.by_first[u.letters()[i].index()] {
                    let r = &self.cyclic[ri];
                    if !r.len().is_multiple_of(2) {
                        continue;
                    }
                    let half = r.len() / 2;
                    let m = r.letters().iter().zip(&u.letters()[i..]).take_while(|(a, b)| a == b).count();
                    if m != half {
                        continue;
                    }
                    let v = self.reduce(&Self::replace(u.letters(), i, m, r));
                    if seen.len() < CLOSURE_CAP && seen.insert(v.clone()) {
                        queue.push_back(v);
                    }
                }
            }
        }
        if seen.len() >= CLOSURE_CAP {
            log::warn!("geodesic search capped at {CLOSURE_CAP} words");
        }
        best
    }

    /// Length of the longest piece: a common prefix of two position-distinct
    /// entries of the symmetrized relator set.
    pub fn max_piece(&self) -> usize {
        let mut best = 0;
        for i in 0..self.cyclic.len() {
            for j in i + 1..self.cyclic.len() {
                let m = self.cyclic[i].common_prefix_len(&self.cyclic[j]);
                best = best.max(m);
            }
        }
        best
    }
}

/// The `C'(lambda)` condition: every piece is shorter than `lambda` times the
/// shortest relator length.
pub fn check_small_cancellation(relators: &[Word], num_generators: usize, lambda: Ratio<i64>) -> Result<bool> {
    if relators.is_empty() {
        return Err(Error::EmptyRelators);
    }
    let shortest = relators.iter().map(Word::len).min().unwrap_or(0) as i64;
    let piece = DehnSolver::new(relators, num_generators).max_piece() as i64;
    Ok(Ratio::from_integer(piece) < lambda * Ratio::from_integer(shortest))
}

/// Independent piece enumeration: every subword of every cyclic relator word
/// (and inverse), keyed by content, collecting distinct starting positions.
pub fn brute_force_max_piece(relators: &[Word]) -> usize {
    let mut occurrences: std::collections::HashMap<Vec<Letter>, BTreeSet<(usize, bool, usize)>> = Default::default();
    for (ri, r) in relators.iter().enumerate() {
        for (inv, base) in [(false, r.clone()), (true, r.inverse())] {
            let n = base.len();
            for start in 0..n {
                for len in 1..=n {
                    let sub: Vec<Letter> = (0..len).map(|k| base.letters()[(start + k) % n]).collect();
                    occurrences.entry(sub).or_default().insert((ri, inv, start));
                }
            }
        }
    }
    occurrences.iter().filter(|(_, occ)| occ.len() >= 2).map(|(w, _)| w.len()).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Presentation;

    #[test]
    fn surface_relator_is_trivial() {
        let p = Presentation::surface(2);
        let d = DehnSolver::new(&p.relators, 4);
        assert!(d.is_trivial(&p.parse_word("a b a' b' c d c' d'").unwrap()));
        assert!(d.is_trivial(&Word::empty()));
        assert!(!d.is_trivial(&p.parse_word("a b a' b'").unwrap()));
        // seven letters of the relator collapse to the missing one
        assert_eq!(d.reduce(&p.parse_word("a b a' b' c d c'").unwrap()), p.parse_word("d").unwrap());
    }

    #[test]
    fn small_cancellation_examples() {
        let s = Presentation::surface(2);
        assert!(check_small_cancellation(&s.relators, 4, Ratio::new(1, 6)).unwrap());
        assert_eq!(brute_force_max_piece(&s.relators), 1);
        assert_eq!(DehnSolver::new(&s.relators, 4).max_piece(), 1);
        let z3 = Presentation::parse("gens: a\nbackend: dehn\nrel: a a a\n").unwrap();
        assert!(!check_small_cancellation(&z3.relators, 1, Ratio::new(1, 6)).unwrap());
        assert_eq!(brute_force_max_piece(&z3.relators), 3);
        assert_eq!(check_small_cancellation(&[], 2, Ratio::new(1, 6)), Err(Error::EmptyRelators));
    }

    #[test]
    fn geodesic_key_takes_shortlex_half() {
        let p = Presentation::surface(2);
        let d = DehnSolver::new(&p.relators, 4);
        // c d c' d' equals b a b' a'; the key is the shortlex-least of the two
        let k1 = d.geodesic_key(&p.parse_word("c d c' d'").unwrap());
        let k2 = d.geodesic_key(&p.parse_word("b a b' a'").unwrap());
        assert_eq!(k1, k2);
        assert_eq!(k1.len(), 4);
    }
}
