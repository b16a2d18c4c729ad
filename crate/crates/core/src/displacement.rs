//! Displacement of generating sets and enumeration of subgroups with small
//! displacement.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{BackendKind, Group, Word};
use crate::metric_core::MetricCore;
use crate::stallings::{folded_core, StallingsEdge};
use crate::Rational;

/// Sum of the geodesic lengths of the elements.
pub fn tau(g: &Group, words: &[Word]) -> Result<usize> {
    words.iter().map(|w| g.geodesic_len(w)).sum()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratingTuple {
    pub words: Vec<Word>,
    pub tau: usize,
}

/// How tuples were grouped into classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dedup {
    /// Same folded based core, i.e. the same subgroup.
    FoldedCore,
    /// Same set of normal forms only.
    NormalForm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enumeration {
    pub tuples: Vec<GeneratingTuple>,
    /// Class id of each tuple, numbered by first appearance.
    pub classes: Vec<usize>,
    pub num_classes: usize,
    pub dedup: Dedup,
}

/// One line of the JSON-lines output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleLine {
    pub tuple: Vec<String>,
    pub tau: usize,
    pub class: usize,
    pub dedup: Dedup,
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum ClassKey {
    Core(usize, Vec<StallingsEdge>),
    Forms(Vec<Vec<crate::group::Letter>>),
}

/// All ordered `r`-tuples of nontrivial elements with total geodesic length
/// at most `alpha`, each element written as its shortlex geodesic, grouped
/// into classes.
pub fn enumerate_bounded(g: &Group, alpha: usize, r: usize) -> Result<Enumeration> {
    let dedup = if g.backend() == BackendKind::Free { Dedup::FoldedCore } else { Dedup::NormalForm };
    let mut by_len: Vec<Vec<Word>> = vec![Vec::new(); alpha + 1];
    if alpha > 0 {
        for w in g.sphere_reps(alpha)? {
            let n = w.len();
            if n > 0 {
                by_len[n].push(w);
            }
        }
    }
    let elements: Vec<&Word> = by_len.iter().flatten().collect();

    // count first so the budget is checked before any work
    let mut count = vec![vec![0usize; alpha + 1]; r + 1];
    count[0] = vec![1; alpha + 1];
    for k in 1..=r {
        for a in 0..=alpha {
            count[k][a] = (1..=a).map(|l| by_len[l].len().saturating_mul(count[k - 1][a - l])).fold(0usize, usize::saturating_add);
        }
    }
    let total = if r == 0 { 0 } else { count[r][alpha] };
    if total > g.budget() {
        return Err(Error::BudgetExceeded { cap: g.budget() });
    }

    fn extend(by_len: &[Vec<Word>], left: usize, k: usize, cur: &mut Vec<Word>, out: &mut Vec<Vec<Word>>) {
        if k == 0 {
            out.push(cur.clone());
            return;
        }
        for l in 1..=left {
            for w in &by_len[l] {
                cur.push(w.clone());
                extend(by_len, left - l, k - 1, cur, out);
                cur.pop();
            }
        }
    }

    let parts: Vec<Vec<(GeneratingTuple, ClassKey)>> = if r == 0 {
        Vec::new()
    } else {
        elements
            .par_iter()
            .map(|first| {
                let mut rest = Vec::new();
                extend(&by_len, alpha - first.len(), r - 1, &mut Vec::new(), &mut rest);
                rest.into_iter()
                    .map(|tail| {
                        let mut words = vec![(*first).clone()];
                        words.extend(tail);
                        let tau = words.iter().map(|w| w.len()).sum();
                        let key = match dedup {
                            Dedup::FoldedCore => {
                                let core = folded_core(&words);
                                let mut edges = core.edges().to_vec();
                                edges.sort();
                                ClassKey::Core(core.num_vertices(), edges)
                            }
                            Dedup::NormalForm => {
                                let mut forms: Vec<_> = words.iter().map(|w| g.key(w).letters().to_vec()).collect();
                                forms.sort();
                                forms.dedup();
                                ClassKey::Forms(forms)
                            }
                        };
                        (GeneratingTuple { words, tau }, key)
                    })
                    .collect()
            })
            .collect()
    };

    let mut ids: HashMap<ClassKey, usize> = HashMap::new();
    let mut tuples = Vec::new();
    let mut classes = Vec::new();
    for (t, key) in parts.into_iter().flatten() {
        let next = ids.len();
        classes.push(*ids.entry(key).or_insert(next));
        tuples.push(t);
    }
    Ok(Enumeration { tuples, classes, num_classes: ids.len(), dedup })
}

impl Enumeration {
    pub fn to_lines(&self, g: &Group) -> Vec<TupleLine> {
        self.tuples
            .iter()
            .zip(&self.classes)
            .map(|(t, &class)| TupleLine { tuple: t.words.iter().map(|w| g.format(w)).collect(), tau: t.tau, class, dedup: self.dedup })
            .collect()
    }
}

/// One loop per edge outside a breadth-first spanning tree rooted at the
/// basepoint, read as a group element.
pub fn spanning_tree_basis(g: &Group, core: &MetricCore) -> Result<Vec<Word>> {
    let root = core.require_based()?;
    Ok(core.loop_basis(g, root, None))
}

/// The quantities compared by [`displacement_bound_check`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisplacementReport {
    pub basis: Vec<String>,
    /// Length of each basis loop as a path in the core.
    pub loop_lengths: Vec<usize>,
    pub tau: usize,
    pub rank: usize,
    pub size: usize,
    /// `2 k r size + r c`.
    pub bound: Rational,
    pub holds: bool,
}

pub fn displacement_report(g: &Group, core: &MetricCore, k: Rational, c: Rational) -> Result<DisplacementReport> {
    let root = core.require_based()?;
    let loops = core.spanning_tree_loops(root, None);
    let loop_lengths = loops.iter().map(|l| l.iter().map(|s| core.edges()[s.edge].length()).sum()).collect();
    let basis: Vec<Word> = loops.iter().map(|l| core.path_label(g, l)).collect();
    let t = tau(g, &basis)?;
    let (r, size) = (basis.len(), core.size());
    let r_q = Rational::from_integer(r as i64);
    let bound = Rational::from_integer(2) * k * r_q * Rational::from_integer(size as i64) + r_q * c;
    Ok(DisplacementReport {
        basis: basis.iter().map(|w| g.format(w)).collect(),
        loop_lengths,
        tau: t,
        rank: r,
        size,
        bound,
        holds: Rational::from_integer(t as i64) <= bound,
    })
}

/// Whether the spanning-tree basis has displacement at most
/// `2 k r size + r c`.
pub fn displacement_bound_check(g: &Group, core: &MetricCore, k: Rational, c: Rational) -> Result<bool> {
    Ok(displacement_report(g, core, k, c)?.holds)
}
