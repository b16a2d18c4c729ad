//! Words, presentations and word-problem backends.
//!
//! A [`Group`] wraps a [`Presentation`] with the machinery for its backend and
//! answers three kinds of question about group elements given as words:
//! a deterministic normal form, a canonical key for equality testing, and a
//! geodesic representative (shortlex-least among geodesics).

mod dehn;
mod hnn;
mod presentation;
mod word;

use std::collections::HashMap;
use std::sync::Mutex;

pub use dehn::{brute_force_max_piece, check_small_cancellation, DehnSolver};
pub use hnn::{BrittonForm, HnnSolver};
pub use num_rational::Ratio;
pub use presentation::{BackendKind, Endomorphism, Presentation};
pub use word::{Alphabet, Letter, Word, WordDisplay};

use crate::error::{Error, Result};

/// Default cap on the number of elements held by a breadth-first geodesic
/// index.
pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug)]
enum Kernel {
    Free,
    Dehn(DehnSolver),
    Hnn(HnnSolver),
}

/// Breadth-first enumeration of the group from the identity, keyed by the
/// backend's canonical key. Stores the shortlex-least geodesic of each
/// element.
#[derive(Debug, Default)]
struct GeodesicIndex {
    rep: HashMap<Word, Word>,
    layers: Vec<Vec<Word>>,
}

/// A presentation together with its word-problem backend.
#[derive(Debug)]
pub struct Group {
    pres: Presentation,
    kernel: Kernel,
    index: Mutex<GeodesicIndex>,
    budget: usize,
}

impl Group {
    pub fn new(pres: Presentation) -> Result<Self> {
        let kernel = match pres.backend {
            BackendKind::Free => Kernel::Free,
            BackendKind::Dehn => {
                if !check_small_cancellation(&pres.relators, pres.num_generators(), Ratio::new(1, 6))? {
                    log::warn!("presentation is not C'(1/6); Dehn's algorithm may not decide equality");
                }
                Kernel::Dehn(DehnSolver::new(&pres.relators, pres.num_generators()))
            }
            BackendKind::Hnn => {
                let (t, phi) = pres.hnn_structure()?;
                Kernel::Hnn(HnnSolver::new(t, phi)?)
            }
        };
        Ok(Group { pres, kernel, index: Mutex::new(GeodesicIndex::default()), budget: DEFAULT_BUDGET })
    }

    pub fn free(rank: usize) -> Self {
        Group::new(Presentation::free(rank)).expect("free presentation")
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget.max(1);
        self
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn presentation(&self) -> &Presentation {
        &self.pres
    }

    pub fn backend(&self) -> BackendKind {
        self.pres.backend
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.pres.alphabet
    }

    pub fn parse_word(&self, s: &str) -> Result<Word> {
        self.pres.parse_word(s)
    }

    pub fn parse_words(&self, s: &str) -> Result<Vec<Word>> {
        self.pres.parse_words(s)
    }

    pub fn format(&self, w: &Word) -> String {
        self.pres.format(w)
    }

    /// The HNN solver, for ascending-HNN presentations.
    pub fn hnn(&self) -> Option<&HnnSolver> {
        match &self.kernel {
            Kernel::Hnn(h) => Some(h),
            _ => None,
        }
    }

    /// Deterministic normal form: free reduction, Dehn reduction, or the
    /// Britton form `t^-i u t^j` with `i` minimal.
    pub fn normal_form(&self, w: &Word) -> Result<Word> {
        self.pres.check_letters(w)?;
        Ok(match &self.kernel {
            Kernel::Free => w.free_reduce(),
            Kernel::Dehn(d) => d.reduce(w),
            Kernel::Hnn(h) => h.normal_form(w),
        })
    }

    /// Canonical representative: equal elements have equal keys.
    pub fn key(&self, w: &Word) -> Word {
        match &self.kernel {
            Kernel::Free => w.free_reduce(),
            Kernel::Dehn(d) => d.geodesic_key(w),
            Kernel::Hnn(h) => h.normal_form(w),
        }
    }

    pub fn is_trivial(&self, w: &Word) -> bool {
        match &self.kernel {
            Kernel::Free => w.free_reduce().is_empty(),
            Kernel::Dehn(d) => d.is_trivial(w),
            Kernel::Hnn(h) => h.normal_form(w).is_empty(),
        }
    }

    pub fn equal(&self, u: &Word, v: &Word) -> bool {
        self.is_trivial(&u.inverse().concat(v))
    }

    /// Key of the product `u v`.
    pub fn mul(&self, u: &Word, v: &Word) -> Word {
        self.key(&u.concat(v))
    }

    /// Whether keys are themselves geodesic words, so no search is needed.
    pub fn keys_are_geodesic(&self) -> bool {
        !matches!(self.kernel, Kernel::Hnn(_))
    }

    /// Shortlex-least geodesic word for the element `w`.
    pub fn geodesic(&self, w: &Word) -> Result<Word> {
        match &self.kernel {
            Kernel::Free => Ok(w.free_reduce()),
            Kernel::Dehn(d) => Ok(d.geodesic_key(w)),
            Kernel::Hnn(_) => {
                let key = self.key(w);
                let bound = w.free_reduce().len();
                let mut index = self.index.lock().unwrap();
                loop {
                    if let Some(rep) = index.rep.get(&key) {
                        return Ok(rep.clone());
                    }
                    let radius = index.layers.len().saturating_sub(1);
                    if !index.layers.is_empty() && radius >= bound {
                        // unreachable for a correct key function
                        return Err(Error::BackendCannotDecide);
                    }
                    self.grow(&mut index)?;
                }
            }
        }
    }

    pub fn geodesic_len(&self, w: &Word) -> Result<usize> {
        match &self.kernel {
            Kernel::Free => Ok(w.free_reduce().len()),
            _ => self.geodesic(w).map(|g| g.len()),
        }
    }

    /// Word-metric distance `|x^-1 y|`.
    pub fn distance(&self, x: &Word, y: &Word) -> Result<usize> {
        self.geodesic_len(&x.inverse().concat(y))
    }

    fn grow(&self, index: &mut GeodesicIndex) -> Result<()> {
        if index.layers.is_empty() {
            index.rep.insert(self.key(&Word::empty()), Word::empty());
            index.layers.push(vec![Word::empty()]);
            return Ok(());
        }
        let letters = self.pres.letters();
        let last = index.layers.last().unwrap().clone();
        let mut next = Vec::new();
        for rep in &last {
            for &l in &letters {
                if rep.last().is_some_and(|x| x.cancels(l)) {
                    continue;
                }
                let mut c = rep.clone();
                c.0.push(l);
                let k = self.key(&c);
                if !index.rep.contains_key(&k) {
                    if index.rep.len() >= self.budget {
                        return Err(Error::BudgetExceeded { cap: self.budget });
                    }
                    index.rep.insert(k, c.clone());
                    next.push(c);
                }
            }
        }
        next.sort_by(|a, b| a.shortlex_cmp(b));
        index.layers.push(next);
        Ok(())
    }

    /// Elements of word length at most `radius` as shortlex-least geodesics,
    /// in shortlex order.
    pub fn sphere_reps(&self, radius: usize) -> Result<Vec<Word>> {
        let mut index = self.index.lock().unwrap();
        while index.layers.len() <= radius {
            let before = index.rep.len();
            self.grow(&mut index)?;
            if index.rep.len() == before && index.layers.len() > 1 {
                // finite group exhausted
                break;
            }
        }
        Ok(index.layers.iter().take(radius + 1).flatten().cloned().collect())
    }

    /// `phi^n(w)` for the endomorphism of an ascending-HNN presentation.
    pub fn apply_endomorphism(&self, w: &Word, n: usize) -> Result<Word> {
        match &self.kernel {
            Kernel::Hnn(h) => h.endomorphism().apply(w, n),
            _ => Err(Error::Unsupported("presentation has no endomorphism".into())),
        }
    }

    pub fn check_small_cancellation(&self, lambda: Ratio<i64>) -> Result<bool> {
        check_small_cancellation(&self.pres.relators, self.pres.num_generators(), lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_form_examples() {
        let hnn = Group::new(Presentation::hnn_example()).unwrap();
        let w = hnn.parse_word("t a t'").unwrap();
        assert_eq!(hnn.format(&hnn.normal_form(&w).unwrap()), "ab");
        for g in [Group::free(2), Group::new(Presentation::surface(2)).unwrap(), hnn] {
            assert_eq!(g.normal_form(&Word::empty()).unwrap(), Word::empty());
        }
        let s = Group::new(Presentation::surface(2)).unwrap();
        let rel = s.parse_word("a b a' b' c d c' d'").unwrap();
        assert!(s.normal_form(&rel).unwrap().is_empty());
        let f = Group::free(2);
        assert!(matches!(f.normal_form(&Word::letter(Letter::pos(5))), Err(Error::UnknownGenerator(_))));
    }

    #[test]
    fn hnn_geodesics_by_search() {
        let z2 = Group::new(Presentation::z2()).unwrap();
        let w = z2.parse_word("b a b' a' a a b").unwrap();
        assert_eq!(z2.geodesic_len(&w).unwrap(), 3);
        assert_eq!(z2.format(&z2.geodesic(&w).unwrap()), "aab");
        let hnn = Group::new(Presentation::hnn_example()).unwrap();
        assert_eq!(hnn.geodesic_len(&hnn.parse_word("a b").unwrap()).unwrap(), 2);
        assert_eq!(hnn.geodesic_len(&hnn.parse_word("t a b t'").unwrap()).unwrap(), 4);
        // a b b a = phi(a b) = t a b t'
        assert_eq!(hnn.geodesic_len(&hnn.parse_word("a b b a").unwrap()).unwrap(), 4);
    }

    #[test]
    fn finite_group_ball() {
        let z3 = Group::new(Presentation::parse("gens: a\nbackend: dehn\nrel: a a a\n").unwrap()).unwrap();
        assert_eq!(z3.sphere_reps(1).unwrap().len(), 3);
        assert_eq!(z3.sphere_reps(4).unwrap().len(), 3);
    }

    #[test]
    fn budget_enforced() {
        let g = Group::new(Presentation::hnn_example()).unwrap().with_budget(10);
        assert!(matches!(g.sphere_reps(3), Err(Error::BudgetExceeded { .. })));
    }
}
