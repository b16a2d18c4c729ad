//! Serializable records for command-line and foreign-language output.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::group::Group;
use crate::metric_core::{CoreJson, FoldOutcome, MoveJson};
use crate::stallings::StallingsGraph;
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationReport {
    pub backend: String,
    pub generators: Vec<String>,
    pub relators: Vec<String>,
    /// Small-cancellation check, for presentations with relators.
    pub small_cancellation: Option<bool>,
    pub lambda: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub radius: usize,
    pub vertices: usize,
    pub delta: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StallingsEdgeJson {
    pub from: usize,
    pub to: usize,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StallingsJson {
    pub vertices: usize,
    pub basepoint: usize,
    pub edges: Vec<StallingsEdgeJson>,
    pub rank: usize,
}

impl StallingsJson {
    pub fn new(g: &Group, s: &StallingsGraph) -> Result<Self> {
        Ok(StallingsJson {
            vertices: s.num_vertices(),
            basepoint: s.basepoint(),
            edges: s
                .edges()
                .iter()
                .map(|e| StallingsEdgeJson { from: e.from, to: e.to, label: g.alphabet().name(e.label).to_string() })
                .collect(),
            rank: s.rank()?,
        })
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph stallings {\n");
        for v in 0..self.vertices {
            let shape = if v == self.basepoint { " [shape=doublecircle]" } else { "" };
            let _ = writeln!(s, "  {v}{shape};");
        }
        for e in &self.edges {
            let _ = writeln!(s, "  {} -> {} [label=\"{}\"];", e.from, e.to, e.label);
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberReport {
    pub word: String,
    pub member: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldReport {
    pub initial_size: usize,
    pub size: usize,
    pub moves: Vec<MoveJson>,
    pub horizon_binding: bool,
    pub budget_exhausted: bool,
    pub core: CoreJson,
}

impl FoldReport {
    pub fn new(g: &Group, initial_size: usize, out: &FoldOutcome) -> Self {
        FoldReport {
            initial_size,
            size: out.core.size(),
            moves: out.moves.iter().map(|m| m.to_json(g)).collect(),
            horizon_binding: out.horizon_binding,
            budget_exhausted: out.budget_exhausted,
            core: out.core.to_json(g),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalCheck {
    pub edge: usize,
    pub length: usize,
    pub shortest: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauReport {
    pub words: Vec<String>,
    pub tau: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeBoundReport {
    pub source_size: usize,
    pub target_size: usize,
    pub k_prime: Rational,
    pub c_prime: Rational,
    pub holds: bool,
}

/// One group of an HNN chain, with strictness against its successor when
/// checked.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainLine {
    pub index: usize,
    pub generators: Vec<String>,
    pub strict: Option<bool>,
}
