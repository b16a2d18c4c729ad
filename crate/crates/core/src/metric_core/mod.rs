//! Cores: finite graphs with group-labelled edges whose universal covers map
//! equivariantly into the Cayley graph.
//!
//! Each edge carries a label `g` (stored as the shortlex geodesic word of `g`)
//! such that for every lift of the edge, `iota(head) = iota(tail) * g`. Its
//! length is `|g|`. Each vertex stores the `iota`-image of one chosen lift.

mod cover;
mod enumerate;
mod ledger;
mod moves;
mod search;

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub(crate) use cover::eccentricity;
pub use cover::{CoverBall, CoverNode, QiMeasurement};
pub use enumerate::{enumerate_small_cores, max_edges, SMALL_CORE_CAP};
pub use ledger::ConstantLedger;
pub use moves::{FoldMove, MoveJson, PathSpec, Point, Step};
pub use search::{EdgeSplit, FoldOutcome, SearchParams};

use crate::error::{Error, Result};
use crate::group::{Group, Letter, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreEdge {
    pub from: usize,
    pub to: usize,
    pub label: Word,
}

impl CoreEdge {
    pub fn length(&self) -> usize {
        self.label.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricCore {
    anchors: Vec<Word>,
    edges: Vec<CoreEdge>,
    basepoint: Option<usize>,
}

impl MetricCore {
    /// The single-vertex core of the trivial subgroup, based at 1.
    pub fn point() -> Self {
        MetricCore { anchors: vec![Word::empty()], edges: Vec::new(), basepoint: Some(0) }
    }

    /// Assembles a core from raw parts, replacing every label by its geodesic
    /// representative.
    pub fn from_parts(g: &Group, anchors: Vec<Word>, edges: Vec<CoreEdge>, basepoint: Option<usize>) -> Result<Self> {
        let n = anchors.len();
        if n == 0 {
            return Err(Error::InvalidArgument("core has no vertices".into()));
        }
        let mut out = Vec::with_capacity(edges.len());
        for (i, e) in edges.into_iter().enumerate() {
            if e.from >= n || e.to >= n {
                return Err(Error::InvalidArgument(format!("edge {i} has an endpoint out of range")));
            }
            let label = g.geodesic(&e.label)?;
            if label.is_empty() {
                return Err(Error::InvalidArgument(format!("edge {i} has trivial label")));
            }
            out.push(CoreEdge { label, ..e });
        }
        let anchors = anchors.iter().map(|a| g.key(a)).collect();
        if let Some(b) = basepoint {
            if b >= n {
                return Err(Error::InvalidArgument("basepoint out of range".into()));
            }
        }
        let core = MetricCore { anchors, edges: out, basepoint };
        if !core.is_connected() {
            return Err(Error::Disconnected);
        }
        if let Some(b) = basepoint {
            if !g.is_trivial(&core.anchors[b]) {
                return Err(Error::InvalidArgument("basepoint must be anchored at 1".into()));
            }
        }
        Ok(core)
    }

    /// Rose with one petal per generator, each petal subdivided into
    /// single-letter edges along the generator's geodesic.
    pub fn from_generators(g: &Group, gens: &[Word]) -> Result<Self> {
        let mut core = MetricCore::point();
        for (i, w) in gens.iter().enumerate() {
            g.presentation().check_letters(w)?;
            if g.is_trivial(w) {
                return Err(Error::TrivialGenerator(i));
            }
            let geo = g.geodesic(w)?;
            let mut cur = 0;
            for (k, &l) in geo.letters().iter().enumerate() {
                let to = if k + 1 == geo.len() {
                    0
                } else {
                    core.anchors.push(g.key(&geo.prefix(k + 1)));
                    core.anchors.len() - 1
                };
                core.edges.push(CoreEdge { from: cur, to, label: Word::letter(l) });
                cur = to;
            }
        }
        Ok(core)
    }

    pub fn num_vertices(&self) -> usize {
        self.anchors.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[CoreEdge] {
        &self.edges
    }

    pub fn anchors(&self) -> &[Word] {
        &self.anchors
    }

    pub fn basepoint(&self) -> Option<usize> {
        self.basepoint
    }

    pub fn require_based(&self) -> Result<usize> {
        self.basepoint.ok_or(Error::NotBased)
    }

    /// Vertex the universal cover is grown from: the basepoint, or vertex 0.
    pub fn root(&self) -> usize {
        self.basepoint.unwrap_or(0)
    }

    /// Total edge length.
    pub fn size(&self) -> usize {
        self.edges.iter().map(CoreEdge::length).sum()
    }

    /// First Betti number `E - V + 1`.
    pub fn rank(&self) -> usize {
        self.edges.len() + 1 - self.anchors.len()
    }

    pub fn valence(&self, v: usize) -> usize {
        self.edges.iter().map(|e| (e.from == v) as usize + (e.to == v) as usize).sum()
    }

    pub fn is_connected(&self) -> bool {
        self.component(0, None).iter().all(|&b| b)
    }

    /// Vertices reachable from `start` without crossing `skip`.
    pub(crate) fn component(&self, start: usize, skip: Option<usize>) -> Vec<bool> {
        let mut seen = vec![false; self.anchors.len()];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for (i, e) in self.edges.iter().enumerate() {
                if Some(i) == skip {
                    continue;
                }
                for (a, b) in [(e.from, e.to), (e.to, e.from)] {
                    if a == v && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        seen
    }

    /// Whether removing edge `e` disconnects the graph.
    pub fn is_separating(&self, e: usize) -> bool {
        let edge = &self.edges[e];
        !self.component(edge.from, Some(e))[edge.to]
    }

    /// Steps leaving `v`, in edge order with forward before backward.
    pub(crate) fn steps_from(&self, v: usize) -> Vec<Step> {
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.from == v {
                out.push(Step { edge: i, forward: true });
            }
            if e.to == v {
                out.push(Step { edge: i, forward: false });
            }
        }
        out
    }

    pub(crate) fn step_label(&self, s: Step) -> Word {
        let l = &self.edges[s.edge].label;
        if s.forward {
            l.clone()
        } else {
            l.inverse()
        }
    }

    pub(crate) fn step_target(&self, s: Step) -> usize {
        let e = &self.edges[s.edge];
        if s.forward {
            e.to
        } else {
            e.from
        }
    }

    pub(crate) fn step_source(&self, s: Step) -> usize {
        let e = &self.edges[s.edge];
        if s.forward {
            e.from
        } else {
            e.to
        }
    }

    /// Pairs of edge ends at a common vertex whose geodesics start with the
    /// same letter: the places where the map to the Cayley graph fails to be
    /// locally injective.
    pub fn immersion_violations(&self) -> Vec<(usize, Step, Step)> {
        let mut out = Vec::new();
        for v in 0..self.anchors.len() {
            let mut first: BTreeMap<Letter, Step> = BTreeMap::new();
            for s in self.steps_from(v) {
                let l = self.step_label(s).first().expect("edge labels are nontrivial");
                if let Some(&prev) = first.get(&l) {
                    out.push((v, prev, s));
                } else {
                    first.insert(l, s);
                }
            }
        }
        out
    }

    /// Splits edge `e` at distance `k` from its tail. The first half keeps
    /// index `e`, the second half is appended. Returns the new vertex.
    pub fn subdivide(&mut self, g: &Group, e: usize, k: usize) -> Result<usize> {
        let edge = self.edges[e].clone();
        if k == 0 || k >= edge.length() {
            return Err(Error::InvalidArgument(format!("cannot split edge {e} of length {} at {k}", edge.length())));
        }
        let w = self.anchors.len();
        self.anchors.push(g.mul(&self.anchors[edge.from], &edge.label.prefix(k)));
        self.edges[e] = CoreEdge { from: edge.from, to: w, label: edge.label.prefix(k) };
        self.edges.push(CoreEdge { from: w, to: edge.to, label: edge.label.suffix_from(k) });
        Ok(w)
    }

    /// Subdivides every edge into unit edges.
    pub fn unit_subdivision(&self, g: &Group) -> Result<Self> {
        let mut c = self.clone();
        let mut e = 0;
        while e < c.edges.len() {
            if c.edges[e].length() > 1 {
                c.subdivide(g, e, 1)?;
            }
            e += 1;
        }
        Ok(c)
    }

    pub(crate) fn remove_edge(&mut self, e: usize) {
        self.edges.remove(e);
    }

    /// Identifies `gone` with `keep` and deletes `gone`; if `gone` is the
    /// basepoint the roles are swapped. Returns the surviving vertex index
    /// after renumbering.
    pub(crate) fn merge_vertices(&mut self, keep: usize, gone: usize) -> usize {
        let (keep, gone) = if Some(gone) == self.basepoint { (gone, keep) } else { (keep, gone) };
        if keep == gone {
            return keep;
        }
        for e in &mut self.edges {
            if e.from == gone {
                e.from = keep;
            }
            if e.to == gone {
                e.to = keep;
            }
        }
        self.delete_vertex(gone);
        if keep > gone {
            keep - 1
        } else {
            keep
        }
    }

    /// Removes an isolated vertex and renumbers.
    fn delete_vertex(&mut self, v: usize) {
        self.anchors.remove(v);
        for e in &mut self.edges {
            if e.from > v {
                e.from -= 1;
            }
            if e.to > v {
                e.to -= 1;
            }
        }
        if let Some(b) = self.basepoint.as_mut() {
            if *b > v {
                *b -= 1;
            }
        }
    }

    /// Repeatedly deletes valence-one vertices other than the basepoint.
    pub fn trim_to_hull(&self) -> Result<Self> {
        self.require_based()?;
        let mut c = self.clone();
        loop {
            let leaf = (0..c.anchors.len()).find(|&v| Some(v) != c.basepoint && c.valence(v) == 1);
            let Some(v) = leaf else { return Ok(c) };
            let e = c.edges.iter().position(|e| e.from == v || e.to == v).unwrap();
            c.edges.remove(e);
            c.delete_vertex(v);
        }
    }

    /// Marks a vertex anchored at 1 as basepoint, subdividing an edge if 1 is
    /// an interior point of some edge's image; otherwise attaches a leaf
    /// from a new basepoint to the nearest point of the image found within
    /// `radius` of the root.
    pub fn attach_basepoint(&self, g: &Group, radius: usize) -> Result<Self> {
        if self.anchors.is_empty() {
            return Err(Error::InvalidArgument("core has no vertices".into()));
        }
        if self.basepoint.is_some() {
            return Ok(self.clone());
        }
        let ball = CoverBall::grow(g, self, self.root(), &self.anchors[self.root()], radius)?;
        let mut best: Option<(usize, Word, usize)> = None;
        for (i, node) in ball.nodes().iter().enumerate() {
            let d = g.geodesic_len(&node.anchor)?;
            let key = g.geodesic(&node.anchor)?;
            let better = match &best {
                None => true,
                Some((bd, bk, _)) => d < *bd || (d == *bd && key.shortlex_cmp(bk).is_lt()),
            };
            if better {
                best = Some((d, key, i));
            }
        }
        let (d, key, i) = best.expect("cover ball contains its root");
        let node = &ball.nodes()[i];
        let mut c = self.clone();
        let v = match node.point {
            Point::Vertex(v) => v,
            Point::Interior { edge, offset } => c.subdivide(g, edge, offset)?,
        };
        // Re-anchor every vertex so that the chosen lift of `v` sits at the
        // found point.
        let shift = g.mul(&node.anchor, &c.anchors[v].inverse());
        for a in &mut c.anchors {
            *a = g.mul(&shift, a);
        }
        if d == 0 {
            c.basepoint = Some(v);
            c.anchors[v] = Word::empty();
        } else {
            c.anchors.push(Word::empty());
            let b = c.anchors.len() - 1;
            c.edges.push(CoreEdge { from: b, to: v, label: key });
            c.basepoint = Some(b);
        }
        Ok(c)
    }

    /// Anchors recomputed along a breadth-first spanning tree from the root,
    /// keeping the root anchor.
    pub fn tree_anchors(&self, g: &Group) -> Vec<Word> {
        let root = self.root();
        let mut out: Vec<Option<Word>> = vec![None; self.anchors.len()];
        out[root] = Some(self.anchors[root].clone());
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for s in self.steps_from(v) {
                let t = self.step_target(s);
                if out[t].is_none() {
                    out[t] = Some(g.mul(out[v].as_ref().unwrap(), &self.step_label(s)));
                    queue.push_back(t);
                }
            }
        }
        out.into_iter().map(|a| a.unwrap_or_default()).collect()
    }

    /// Breadth-first spanning tree of the component of `root` in
    /// `core - avoid`, exploring steps in shortlex order of their labels.
    /// Returns the tree path to each reached vertex and the tree edges.
    pub(crate) fn spanning_tree(&self, root: usize, avoid: Option<usize>) -> (Vec<Option<Vec<Step>>>, Vec<bool>) {
        let n = self.anchors.len();
        let mut path: Vec<Option<Vec<Step>>> = vec![None; n];
        let mut tree = vec![false; self.edges.len()];
        path[root] = Some(Vec::new());
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let mut steps: Vec<Step> = self.steps_from(v).into_iter().filter(|s| Some(s.edge) != avoid).collect();
            steps.sort_by(|a, b| self.step_label(*a).shortlex_cmp(&self.step_label(*b)).then(a.cmp(b)));
            for s in steps {
                let t = self.step_target(s);
                if path[t].is_none() {
                    let mut p = path[v].clone().unwrap();
                    p.push(s);
                    path[t] = Some(p);
                    tree[s.edge] = true;
                    queue.push_back(t);
                }
            }
        }
        (path, tree)
    }

    /// One closed path at `root` per non-tree edge of [`Self::spanning_tree`]:
    /// tree path to the tail, the edge, tree path back.
    pub fn spanning_tree_loops(&self, root: usize, avoid: Option<usize>) -> Vec<Vec<Step>> {
        let (path, tree) = self.spanning_tree(root, avoid);
        let mut loops = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if tree[i] || Some(i) == avoid {
                continue;
            }
            let (Some(p), Some(q)) = (&path[e.from], &path[e.to]) else { continue };
            let mut l = p.clone();
            l.push(Step { edge: i, forward: true });
            l.extend(q.iter().rev().map(|s| s.reversed()));
            loops.push(l);
        }
        loops
    }

    /// Product of labels along a sequence of steps, as a group element key.
    pub fn path_label(&self, g: &Group, steps: &[Step]) -> Word {
        let w = steps.iter().fold(Word::empty(), |acc, &s| acc.concat(&self.step_label(s)));
        g.key(&w)
    }

    /// Generators of the image of the fundamental group at `root` of the
    /// component of `core - avoid`.
    pub fn loop_basis(&self, g: &Group, root: usize, avoid: Option<usize>) -> Vec<Word> {
        self.spanning_tree_loops(root, avoid).iter().map(|l| self.path_label(g, l)).collect()
    }

    /// In the free backend, the classical labelled graph obtained by
    /// subdividing every edge into unit edges.
    pub fn to_stallings(&self, g: &Group) -> Result<crate::stallings::StallingsGraph> {
        use crate::stallings::{StallingsEdge, StallingsGraph};
        let unit = self.unit_subdivision(g)?;
        let edges = unit
            .edges
            .iter()
            .map(|e| {
                let l = e.label.letters()[0];
                if l.inverse {
                    StallingsEdge { from: e.to, to: e.from, label: l.gen }
                } else {
                    StallingsEdge { from: e.from, to: e.to, label: l.gen }
                }
            })
            .collect();
        StallingsGraph::from_parts(unit.anchors.len(), edges, unit.root())
    }

    pub fn to_json(&self, g: &Group) -> CoreJson {
        CoreJson {
            vertices: self
                .anchors
                .iter()
                .enumerate()
                .map(|(id, a)| VertexJson { id, anchor: g.format(a) })
                .collect(),
            edges: self
                .edges
                .iter()
                .enumerate()
                .map(|(id, e)| EdgeJson { id, from: e.from, to: e.to, label: g.format(&e.label), length: e.length() })
                .collect(),
            basepoint: self.basepoint,
        }
    }

    pub fn from_json(g: &Group, j: &CoreJson) -> Result<Self> {
        let mut anchors = vec![Word::empty(); j.vertices.len()];
        for v in &j.vertices {
            let slot = anchors
                .get_mut(v.id)
                .ok_or_else(|| Error::InvalidArgument(format!("vertex id {} out of range", v.id)))?;
            *slot = g.parse_word(&v.anchor)?;
        }
        let mut edges = Vec::new();
        for e in &j.edges {
            let label = g.parse_word(&e.label)?;
            edges.push(CoreEdge { from: e.from, to: e.to, label });
        }
        let core = MetricCore::from_parts(g, anchors, edges, j.basepoint)?;
        for (e, je) in core.edges.iter().zip(&j.edges) {
            if e.length() != je.length {
                return Err(Error::InvalidArgument(format!(
                    "edge {} has length {} but its label has geodesic length {}",
                    je.id,
                    je.length,
                    e.length()
                )));
            }
        }
        Ok(core)
    }

    pub fn to_dot(&self, g: &Group) -> String {
        let mut s = String::from("digraph core {\n");
        for (i, a) in self.anchors.iter().enumerate() {
            let shape = if Some(i) == self.basepoint { ", shape=doublecircle" } else { "" };
            let _ = writeln!(s, "  {i} [label=\"{}\"{shape}];", g.format(a));
        }
        for e in &self.edges {
            let _ = writeln!(s, "  {} -> {} [label=\"{} ({})\"];", e.from, e.to, g.format(&e.label), e.length());
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexJson {
    pub id: usize,
    pub anchor: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub id: usize,
    pub from: usize,
    pub to: usize,
    pub label: String,
    pub length: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreJson {
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<EdgeJson>,
    pub basepoint: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Presentation;

    fn free2() -> Group {
        Group::free(2)
    }

    #[test]
    fn rose_sizes() {
        let g = free2();
        let c = MetricCore::from_generators(&g, &g.parse_words("a,ab").unwrap()).unwrap();
        assert_eq!(c.size(), 3);
        assert_eq!(c.rank(), 2);
        assert_eq!(MetricCore::point().size(), 0);
        let h = Group::new(Presentation::hnn_example()).unwrap();
        assert_eq!(MetricCore::from_generators(&h, &h.parse_words("a,b").unwrap()).unwrap().size(), 2);
        let err = MetricCore::from_generators(&g, &[g.parse_word("a a'").unwrap()]);
        assert_eq!(err, Err(Error::TrivialGenerator(0)));
    }

    #[test]
    fn immersion_check() {
        let g = free2();
        let c = MetricCore::from_generators(&g, &g.parse_words("ab,ab'").unwrap()).unwrap();
        assert_eq!(c.immersion_violations().len(), 1);
        let c = MetricCore::from_generators(&g, &g.parse_words("a,b").unwrap()).unwrap();
        assert!(c.immersion_violations().is_empty());
    }

    #[test]
    fn trim_examples() {
        let g = free2();
        let rose = MetricCore::from_generators(&g, &g.parse_words("a,b").unwrap()).unwrap();
        assert_eq!(rose.trim_to_hull().unwrap(), rose);
        let path = MetricCore::from_parts(
            &g,
            vec![Word::empty(), g.parse_word("a").unwrap(), g.parse_word("ab").unwrap()],
            vec![
                CoreEdge { from: 0, to: 1, label: g.parse_word("a").unwrap() },
                CoreEdge { from: 1, to: 2, label: g.parse_word("b").unwrap() },
            ],
            Some(0),
        )
        .unwrap();
        let t = path.trim_to_hull().unwrap();
        assert_eq!((t.num_vertices(), t.num_edges()), (1, 0));
        let mut dangling = rose.clone();
        dangling.anchors.push(g.parse_word("b'").unwrap());
        dangling.edges.push(CoreEdge { from: 0, to: 1, label: g.parse_word("b'").unwrap() });
        assert_eq!(dangling.trim_to_hull().unwrap(), rose);
    }

    #[test]
    fn attach_basepoint_examples() {
        let g = free2();
        let rose = MetricCore::from_generators(&g, &g.parse_words("a").unwrap()).unwrap();
        let mut unbased = rose.clone();
        unbased.basepoint = None;
        assert_eq!(unbased.attach_basepoint(&g, 2).unwrap(), rose);
        // <a> conjugated by b
        let conj = MetricCore::from_parts(
            &g,
            vec![g.parse_word("b").unwrap()],
            vec![CoreEdge { from: 0, to: 0, label: g.parse_word("a").unwrap() }],
            None,
        )
        .unwrap();
        let based = conj.attach_basepoint(&g, 3).unwrap();
        assert_eq!(based.size(), 2);
        let leaf = based.edges().last().unwrap();
        assert_eq!(g.format(&leaf.label), "b");
        assert_eq!(based.anchors()[based.basepoint().unwrap()], Word::empty());
    }

    #[test]
    fn json_round_trip() {
        let g = free2();
        let c = MetricCore::from_generators(&g, &g.parse_words("ab,ab'").unwrap()).unwrap();
        let j = c.to_json(&g);
        let text = serde_json::to_string(&j).unwrap();
        let back = MetricCore::from_json(&g, &serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(c.to_dot(&g).contains("doublecircle"));
    }

    #[test]
    fn stallings_view() {
        let g = free2();
        let c = MetricCore::from_generators(&g, &g.parse_words("ab,ab'").unwrap()).unwrap();
        let s = c.to_stallings(&g).unwrap().fold();
        assert_eq!(s.num_edges(), 3);
    }
}
