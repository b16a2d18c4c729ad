//! Ascending chains of subgroups: strictness checks, the free-group chain
//! runner and free-factor reduction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{BackendKind, Group, Letter, Word};
use crate::stallings::{folded_core, StallingsGraph};

/// Generating tuples `{t^-i x t^i : x a base generator}` for `i = 0..=n`.
pub fn hnn_chain(g: &Group, n: usize) -> Result<Vec<Vec<Word>>> {
    let hnn = g.hnn().ok_or_else(|| Error::Unsupported("hnn_chain needs an HNN presentation".into()))?;
    let t = hnn.stable();
    let base = hnn.endomorphism().base_generators();
    Ok((0..=n)
        .map(|i| {
            base.iter()
                .map(|&x| {
                    let mut w = vec![Letter::neg(t); i];
                    w.push(Letter::pos(x));
                    w.extend(std::iter::repeat_n(Letter::pos(t), i));
                    g.key(&Word(w))
                })
                .collect()
        })
        .collect())
}

/// Decides `w ∈ ⟨gens⟩`.
///
/// Free groups use a folded Stallings graph. In an ascending HNN extension
/// every element involved must have the form `t^-i u t^i` with `u` in the
/// base; conjugating by a common power of `t` moves everything into the base,
/// where the question is again decided by folding.
pub fn member(g: &Group, gens: &[Word], w: &Word) -> Result<bool> {
    match g.backend() {
        BackendKind::Free => folded_core(gens).membership(w),
        BackendKind::Hnn => {
            let hnn = g.hnn().unwrap();
            let split = |x: &Word| {
                let f = hnn.britton(x);
                if f.left != f.right {
                    Err(Error::Unsupported(format!("{} is not conjugate into the base", g.format(x))))
                } else {
                    Ok((f.left, f.core))
                }
            };
            let gens: Vec<(usize, Word)> = gens.iter().map(split).collect::<Result<_>>()?;
            let (wi, wu) = split(w)?;
            let n = gens.iter().map(|(i, _)| *i).chain([wi]).max().unwrap();
            let phi = hnn.endomorphism();
            let images: Vec<Word> = gens.iter().map(|(i, u)| phi.apply(u, n - i)).collect::<Result<_>>()?;
            folded_core(&images).membership(&phi.apply(&wu, n - wi)?)
        }
        BackendKind::Dehn => Err(Error::Unsupported("membership in the small-cancellation backend".into())),
    }
}

fn check_cardinality(chain: &[Vec<Word>]) -> Result<()> {
    if let Some(first) = chain.first() {
        for t in chain {
            if t.len() != first.len() {
                return Err(Error::RankMismatch { expected: first.len(), found: t.len() });
            }
        }
    }
    Ok(())
}

/// Fails with the first generator of `chain[i]` outside `chain[i + 1]`.
fn check_nested(g: &Group, chain: &[Vec<Word>]) -> Result<()> {
    for (i, pair) in chain.windows(2).enumerate() {
        for x in &pair[0] {
            if !member(g, &pair[1], x)? {
                return Err(Error::NotNested { step: i + 1, witness: g.format(x) });
            }
        }
    }
    Ok(())
}

/// For each consecutive pair, whether some generator of the larger group lies
/// outside the smaller one.
pub fn verify_strict(g: &Group, chain: &[Vec<Word>]) -> Result<Vec<bool>> {
    check_cardinality(chain)?;
    check_nested(g, chain)?;
    chain
        .windows(2)
        .map(|pair| {
            for y in &pair[1] {
                if !member(g, &pair[0], y)? {
                    return Ok(true);
                }
            }
            Ok(false)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStep {
    pub generators: Vec<String>,
    pub rank: usize,
    pub edges: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    /// The larger group is strictly larger.
    pub strict: bool,
    /// The core morphism into the larger group's core is onto.
    pub surjective: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub steps: Vec<ChainStep>,
    pub transitions: Vec<Transition>,
    /// Present when every morphism is surjective: whether edge counts never
    /// increase along the chain.
    pub edges_non_increasing: Option<bool>,
    /// First (1-based) index from which all cores coincide, if that stretch
    /// has at least two groups or the chain has one group.
    pub stabilization_index: Option<usize>,
}

fn analyze(g: &Group, chain: &[Vec<Word>], cores: &[StallingsGraph]) -> Result<ChainRecord> {
    let mut steps = Vec::new();
    for (gens, core) in chain.iter().zip(cores) {
        steps.push(ChainStep { generators: gens.iter().map(|w| g.format(w)).collect(), rank: core.rank()?, edges: core.num_edges() });
    }
    let mut transitions = Vec::new();
    for (i, pair) in cores.windows(2).enumerate() {
        let m = pair[0].core_morphism(&pair[1]).map_err(|_| {
            let witness = pair[0].basis().into_iter().find(|b| !pair[1].membership(b).unwrap_or(false)).unwrap_or_default();
            Error::NotNested { step: i + 1, witness: g.format(&witness) }
        })?;
        transitions.push(Transition { strict: !pair[0].same_subgroup(&pair[1]), surjective: m.is_surjective() });
    }
    let edges_non_increasing = transitions
        .iter()
        .all(|t| t.surjective)
        .then(|| steps.windows(2).all(|w| w[1].edges <= w[0].edges));
    let mut start = cores.len();
    while start > 1 && !transitions[start - 2].strict {
        start -= 1;
    }
    let stabilization_index = (cores.len() == 1 || start < cores.len()).then_some(start);
    Ok(ChainRecord { steps, transitions, edges_non_increasing, stabilization_index })
}

fn require_free(g: &Group) -> Result<()> {
    if g.backend() != BackendKind::Free {
        return Err(Error::Unsupported("chain runner needs a free ambient group".into()));
    }
    Ok(())
}

/// Folds each group of a chain of equal-size generating tuples in a free
/// group and records the morphisms between consecutive cores.
pub fn run_chain_free(g: &Group, chain: &[Vec<Word>]) -> Result<ChainRecord> {
    require_free(g)?;
    check_cardinality(chain)?;
    let cores: Vec<StallingsGraph> = chain.iter().map(|t| folded_core(t)).collect();
    analyze(g, chain, &cores)
}

/// A chain after free-factor reduction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedChain {
    pub chain: Vec<Vec<String>>,
    /// `(index, rank before, rank after)` for each replaced group, 1-based.
    pub rank_history: Vec<(usize, usize, usize)>,
    pub record: ChainRecord,
}

impl ReducedChain {
    pub fn words(&self, g: &Group) -> Result<Vec<Vec<Word>>> {
        self.chain.iter().map(|t| t.iter().map(|w| g.parse_word(w)).collect()).collect()
    }
}

/// Replaces each group whose core receives a non-surjective morphism from
/// its predecessor by the free factor carried by the image subgraph, in one
/// pass from the front.
pub fn reduce_chain(g: &Group, chain: &[Vec<Word>]) -> Result<ReducedChain> {
    require_free(g)?;
    let mut gens: Vec<Vec<Word>> = chain.to_vec();
    let mut cores: Vec<StallingsGraph> = chain.iter().map(|t| folded_core(t)).collect();
    let mut rank_history = Vec::new();
    for i in 0..cores.len().saturating_sub(1) {
        let m = cores[i].core_morphism(&cores[i + 1]).map_err(|_| {
            let witness = gens[i].iter().find(|x| !cores[i + 1].membership(x).unwrap_or(false)).cloned().unwrap_or_default();
            Error::NotNested { step: i + 1, witness: g.format(&witness) }
        })?;
        if let Some(w) = cores[i + 1].free_factor_witness(&m) {
            let before = cores[i + 1].rank()?;
            let core = folded_core(&w.factor_basis);
            let after = core.rank()?;
            debug_assert!(after < before);
            rank_history.push((i + 2, before, after));
            gens[i + 1] = w.factor_basis;
            cores[i + 1] = core;
        }
    }
    let record = analyze(g, &gens, &cores)?;
    Ok(ReducedChain { chain: gens.iter().map(|t| t.iter().map(|w| g.format(w)).collect()).collect(), rank_history, record })
}
