//! Classical Stallings subgroup graphs over a free group.
//!
//! Graphs are directed with positive generator labels: an edge `u -> v`
//! labelled `x` is read as `x` from `u` and as `x'` from `v`. Vertex `0` is not
//! special; the basepoint is stored explicitly.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Letter, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StallingsEdge {
    pub from: usize,
    pub to: usize,
    pub label: u16,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StallingsGraph {
    num_vertices: usize,
    edges: Vec<StallingsEdge>,
    basepoint: usize,
    folded: bool,
}

/// Label-preserving, basepoint-preserving morphism between folded graphs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphMorphism {
    pub vertex_map: Vec<usize>,
    pub edge_map: Vec<usize>,
    pub target_edges: usize,
    pub target_vertices: usize,
}

/// A free factor of the target's fundamental group containing the image of a
/// non-surjective morphism, together with a complementary set of basis
/// elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeFactorWitness {
    pub factor_basis: Vec<Word>,
    pub complement_basis: Vec<Word>,
}

impl StallingsGraph {
    /// The graph with a single vertex and no edges.
    pub fn trivial() -> Self {
        StallingsGraph { num_vertices: 1, edges: Vec::new(), basepoint: 0, folded: true }
    }

    /// Wedge of subdivided petals, one per non-empty generator. Empty words are
    /// dropped with a warning.
    pub fn from_generators(gens: &[Word]) -> Self {
        let mut g = StallingsGraph::trivial();
        for (i, w) in gens.iter().enumerate() {
            let w = w.free_reduce();
            if w.is_empty() {
                log::warn!("dropping empty generator #{i}");
                continue;
            }
            let n = w.len();
            let mut cur = 0;
            for (k, &l) in w.letters().iter().enumerate() {
                let next = if k + 1 == n {
                    0
                } else {
                    g.num_vertices += 1;
                    g.num_vertices - 1
                };
                g.push_letter_edge(cur, next, l);
                cur = next;
            }
        }
        g.folded = g.compute_folded();
        g
    }

    fn push_letter_edge(&mut self, from: usize, to: usize, l: Letter) {
        let e = if l.inverse {
            StallingsEdge { from: to, to: from, label: l.gen }
        } else {
            StallingsEdge { from, to, label: l.gen }
        };
        self.edges.push(e);
    }

    pub fn from_parts(num_vertices: usize, edges: Vec<StallingsEdge>, basepoint: usize) -> Result<Self> {
        if basepoint >= num_vertices || edges.iter().any(|e| e.from >= num_vertices || e.to >= num_vertices) {
            return Err(Error::InvalidArgument("edge endpoint out of range".into()));
        }
        let mut g = StallingsGraph { num_vertices, edges, basepoint, folded: false };
        g.folded = g.compute_folded();
        Ok(g)
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[StallingsEdge] {
        &self.edges
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn is_folded(&self) -> bool {
        self.folded
    }

    fn compute_folded(&self) -> bool {
        let mut seen = HashMap::new();
        for e in &self.edges {
            if seen.insert((e.from, Letter::pos(e.label)), ()).is_some() {
                return false;
            }
            if seen.insert((e.to, Letter::neg(e.label)), ()).is_some() {
                return false;
            }
        }
        true
    }

    /// Identifies same-label same-direction edge pairs until none remain, then
    /// renumbers vertices canonically (breadth-first from the basepoint in
    /// letter order).
    pub fn fold(&self) -> StallingsGraph {
        let mut uf = UnionFind::new(self.num_vertices);
        let mut edges = self.edges.clone();
        loop {
            for e in edges.iter_mut() {
                e.from = uf.find(e.from);
                e.to = uf.find(e.to);
            }
            edges.sort();
            edges.dedup();
            let mut merged = false;
            // Lowest vertex first: edges are sorted by `from`.
            let mut out: BTreeMap<(usize, u16), usize> = BTreeMap::new();
            let mut inc: BTreeMap<(usize, u16), usize> = BTreeMap::new();
            for e in &edges {
                if let Some(&w) = out.get(&(e.from, e.label)) {
                    if uf.find(w) != uf.find(e.to) {
                        uf.union(w, e.to);
                        merged = true;
                    }
                } else {
                    out.insert((e.from, e.label), e.to);
                }
                if let Some(&w) = inc.get(&(e.to, e.label)) {
                    if uf.find(w) != uf.find(e.from) {
                        uf.union(w, e.from);
                        merged = true;
                    }
                } else {
                    inc.insert((e.to, e.label), e.from);
                }
            }
            if !merged {
                break;
            }
        }
        let basepoint = uf.find(self.basepoint);
        let g = StallingsGraph { num_vertices: self.num_vertices, edges, basepoint, folded: true };
        g.canonical_relabel(|v| uf.find(v))
    }

    /// Renumbers the vertices reachable from the basepoint in breadth-first
    /// order; `rep` maps a raw vertex id to its representative.
    fn canonical_relabel(&self, mut rep: impl FnMut(usize) -> usize) -> StallingsGraph {
        let mut adj: HashMap<usize, Vec<(Letter, usize)>> = HashMap::new();
        for e in &self.edges {
            let (f, t) = (rep(e.from), rep(e.to));
            adj.entry(f).or_default().push((Letter::pos(e.label), t));
            adj.entry(t).or_default().push((Letter::neg(e.label), f));
        }
        for v in adj.values_mut() {
            v.sort();
        }
        let mut order: HashMap<usize, usize> = HashMap::new();
        let start = rep(self.basepoint);
        order.insert(start, 0);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &(_, w) in adj.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
                if !order.contains_key(&w) {
                    order.insert(w, order.len());
                    queue.push_back(w);
                }
            }
        }
        let mut edges: Vec<StallingsEdge> = self
            .edges
            .iter()
            .filter_map(|e| {
                Some(StallingsEdge {
                    from: *order.get(&rep(e.from))?,
                    to: *order.get(&rep(e.to))?,
                    label: e.label,
                })
            })
            .collect();
        edges.sort();
        edges.dedup();
        let folded = self.folded;
        let mut g = StallingsGraph { num_vertices: order.len(), edges, basepoint: 0, folded };
        g.folded = g.compute_folded();
        g
    }

    /// Neighbour reached by reading `l` from `v` in a folded graph.
    pub fn step(&self, v: usize, l: Letter) -> Option<usize> {
        self.edges.iter().find_map(|e| {
            if l.inverse {
                (e.to == v && e.label == l.gen).then_some(e.from)
            } else {
                (e.from == v && e.label == l.gen).then_some(e.to)
            }
        })
    }

    fn step_edge(&self, v: usize, l: Letter) -> Option<(usize, usize)> {
        self.edges.iter().enumerate().find_map(|(i, e)| {
            if l.inverse {
                (e.to == v && e.label == l.gen).then_some((i, e.from))
            } else {
                (e.from == v && e.label == l.gen).then_some((i, e.to))
            }
        })
    }

    /// Vertex reached by reading `w` from `start`, if the path exists.
    pub fn read(&self, start: usize, w: &Word) -> Option<usize> {
        w.letters().iter().try_fold(start, |v, &l| self.step(v, l))
    }

    /// Whether `w` labels a closed path at the basepoint.
    pub fn membership(&self, w: &Word) -> Result<bool> {
        if !self.folded {
            return Err(Error::NotFolded);
        }
        Ok(self.read(self.basepoint, &w.free_reduce()) == Some(self.basepoint))
    }

    pub fn is_connected(&self) -> bool {
        self.reachable_from(self.basepoint).iter().all(|&r| r)
    }

    fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.num_vertices];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for e in &self.edges {
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

    /// First Betti number `E - V + 1`.
    pub fn rank(&self) -> Result<usize> {
        if !self.folded {
            return Err(Error::NotFolded);
        }
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(self.edges.len() + 1 - self.num_vertices)
    }

    /// Breadth-first spanning tree from the basepoint, exploring letters in
    /// order. Returns the tree flag per edge and the tree path word to every
    /// vertex.
    fn spanning_tree(&self, restrict: Option<&[bool]>) -> (Vec<bool>, Vec<Option<Word>>) {
        let allowed = |i: usize| restrict.is_none_or(|r| r[i]);
        let mut in_tree = vec![false; self.edges.len()];
        let mut path: Vec<Option<Word>> = vec![None; self.num_vertices];
        path[self.basepoint] = Some(Word::empty());
        let mut queue = VecDeque::from([self.basepoint]);
        while let Some(v) = queue.pop_front() {
            let mut nbrs: Vec<(Letter, usize, usize)> = Vec::new();
            for (i, e) in self.edges.iter().enumerate() {
                if !allowed(i) {
                    continue;
                }
                if e.from == v {
                    nbrs.push((Letter::pos(e.label), i, e.to));
                }
                if e.to == v {
                    nbrs.push((Letter::neg(e.label), i, e.from));
                }
            }
            nbrs.sort();
            for (l, i, w) in nbrs {
                if path[w].is_none() {
                    let mut p = path[v].clone().unwrap();
                    p.0.push(l);
                    path[w] = Some(p);
                    in_tree[i] = true;
                    queue.push_back(w);
                }
            }
        }
        (in_tree, path)
    }

    /// Free basis of the fundamental group read off a breadth-first spanning
    /// tree: one loop per non-tree edge.
    pub fn basis(&self) -> Vec<Word> {
        let (in_tree, path) = self.spanning_tree(None);
        self.loops_for(&in_tree, &path, |_| true)
    }

    fn loops_for(&self, in_tree: &[bool], path: &[Option<Word>], pick: impl Fn(usize) -> bool) -> Vec<Word> {
        self.edges
            .iter()
            .enumerate()
            .filter(|&(i, _)| !in_tree[i] && pick(i))
            .filter_map(|(_, e)| {
                let p = path[e.from].as_ref()?;
                let q = path[e.to].as_ref()?;
                let mut w = p.clone();
                w.0.push(Letter::pos(e.label));
                Some(w.mul(&q.inverse()))
            })
            .collect()
    }

    /// The unique label- and basepoint-preserving morphism into `target`,
    /// computed by tracing edges breadth-first.
    pub fn core_morphism(&self, target: &StallingsGraph) -> Result<GraphMorphism> {
        if !self.folded || !target.folded {
            return Err(Error::NotFolded);
        }
        let witness = || {
            let w = self
                .basis()
                .into_iter()
                .find(|b| target.read(target.basepoint, b) != Some(target.basepoint))
                .unwrap_or_default();
            Error::NotSubgroup { witness: format!("{w:?}") }
        };
        let mut vmap: Vec<Option<usize>> = vec![None; self.num_vertices];
        let mut emap: Vec<Option<usize>> = vec![None; self.edges.len()];
        vmap[self.basepoint] = Some(target.basepoint);
        let mut queue = VecDeque::from([self.basepoint]);
        while let Some(v) = queue.pop_front() {
            let img = vmap[v].unwrap();
            for (i, e) in self.edges.iter().enumerate() {
                let (l, other) = if e.from == v {
                    (Letter::pos(e.label), e.to)
                } else if e.to == v {
                    (Letter::neg(e.label), e.from)
                } else {
                    continue;
                };
                let (te, timg) = target.step_edge(img, l).ok_or_else(witness)?;
                emap[i] = Some(te);
                match vmap[other] {
                    Some(x) if x != timg => return Err(witness()),
                    Some(_) => {}
                    None => {
                        vmap[other] = Some(timg);
                        queue.push_back(other);
                    }
                }
            }
        }
        if vmap.iter().any(Option::is_none) || emap.iter().any(Option::is_none) {
            return Err(Error::Disconnected);
        }
        Ok(GraphMorphism {
            vertex_map: vmap.into_iter().map(Option::unwrap).collect(),
            edge_map: emap.into_iter().map(Option::unwrap).collect(),
            target_edges: target.edges.len(),
            target_vertices: target.num_vertices,
        })
    }

    /// On a non-surjective morphism into `self`, the basis of the image
    /// subgraph's fundamental group together with the extra basis elements
    /// obtained from a spanning tree of `self` extending one of the image.
    pub fn free_factor_witness(&self, m: &GraphMorphism) -> Option<FreeFactorWitness> {
        if m.is_surjective() {
            return None;
        }
        let mut covered = vec![false; self.edges.len()];
        for &e in &m.edge_map {
            covered[e] = true;
        }
        let (sub_tree, sub_path) = self.spanning_tree(Some(&covered));
        // Extend the image tree to a spanning tree of the whole graph.
        let mut in_tree = sub_tree.clone();
        let mut path = sub_path.clone();
        let mut queue: VecDeque<usize> = (0..self.num_vertices).filter(|&v| path[v].is_some()).collect();
        while let Some(v) = queue.pop_front() {
            let mut nbrs: Vec<(Letter, usize, usize)> = Vec::new();
            for (i, e) in self.edges.iter().enumerate() {
                if e.from == v {
                    nbrs.push((Letter::pos(e.label), i, e.to));
                }
                if e.to == v {
                    nbrs.push((Letter::neg(e.label), i, e.from));
                }
            }
            nbrs.sort();
            for (l, i, w) in nbrs {
                if path[w].is_none() {
                    let mut p = path[v].clone().unwrap();
                    p.0.push(l);
                    path[w] = Some(p);
                    in_tree[i] = true;
                    queue.push_back(w);
                }
            }
        }
        let factor_basis = self.loops_for(&sub_tree, &sub_path, |i| covered[i]);
        let complement_basis = self.loops_for(&in_tree, &path, |i| !covered[i]);
        Some(FreeFactorWitness { factor_basis, complement_basis })
    }

    /// Subgraph spanned by the given edges, keeping the basepoint.
    pub fn subgraph(&self, keep: &[bool]) -> StallingsGraph {
        let edges = self.edges.iter().zip(keep).filter(|(_, &k)| k).map(|(e, _)| *e).collect();
        let g = StallingsGraph { num_vertices: self.num_vertices, edges, basepoint: self.basepoint, folded: self.folded };
        g.canonical_relabel(|v| v)
    }

    /// Removes valence-one vertices other than the basepoint.
    pub fn trim(&self) -> StallingsGraph {
        let mut keep = vec![true; self.edges.len()];
        loop {
            let mut deg = vec![0usize; self.num_vertices];
            for (e, _) in self.edges.iter().zip(&keep).filter(|(_, &k)| k) {
                deg[e.from] += 1;
                deg[e.to] += 1;
            }
            let mut changed = false;
            for (i, e) in self.edges.iter().enumerate() {
                if !keep[i] {
                    continue;
                }
                let leaf = |v: usize| v != self.basepoint && deg[v] == 1;
                if e.from != e.to && (leaf(e.from) || leaf(e.to)) {
                    keep[i] = false;
                    changed = true;
                    break;
                }
            }
            if !changed {
                break;
            }
        }
        self.subgraph(&keep)
    }

    /// Whether both graphs are identical after canonical renumbering; for
    /// folded graphs this is equality of the subgroups they represent.
    pub fn same_subgroup(&self, other: &StallingsGraph) -> bool {
        let a = self.canonical_relabel(|v| v);
        let b = other.canonical_relabel(|v| v);
        a.num_vertices == b.num_vertices && a.edges == b.edges
    }
}

impl GraphMorphism {
    pub fn is_surjective(&self) -> bool {
        let mut covered = vec![false; self.target_edges];
        for &e in &self.edge_map {
            covered[e] = true;
        }
        covered.iter().all(|&c| c)
    }

    pub fn is_identity(&self) -> bool {
        self.vertex_map.iter().enumerate().all(|(i, &v)| i == v) && self.edge_map.iter().enumerate().all(|(i, &e)| i == e)
    }
}

/// Folded graph of the subgroup generated by `gens`.
pub fn folded_core(gens: &[Word]) -> StallingsGraph {
    StallingsGraph::from_generators(gens).fold()
}

#[derive(Clone, Debug)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Unions the sets, keeping the smaller root as representative.
    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// A folded graph whose edges also carry words over an abstract basis
/// `y_0, y_1, ...` (one symbol per input generator), so that reading a closed
/// path yields the element both as a word in the letters and as a word in the
/// input generators.
#[derive(Clone, Debug)]
pub struct TrackedGraph {
    edges: Vec<(usize, usize, u16, Word)>,
    basepoint: usize,
    injective: bool,
}

impl TrackedGraph {
    pub fn new(gens: &[Word]) -> Self {
        let mut edges = Vec::new();
        let mut next = 1usize;
        let mut injective = true;
        for (k, w) in gens.iter().enumerate() {
            let w = w.free_reduce();
            if w.is_empty() {
                injective = false;
                continue;
            }
            let mut cur = 0;
            for (i, &l) in w.letters().iter().enumerate() {
                let to = if i + 1 == w.len() {
                    0
                } else {
                    next += 1;
                    next - 1
                };
                let y = if i + 1 == w.len() { Word::letter(Letter::pos(k as u16)) } else { Word::empty() };
                if l.inverse {
                    edges.push((to, cur, l.gen, y.inverse()));
                } else {
                    edges.push((cur, to, l.gen, y));
                }
                cur = to;
            }
        }
        let mut g = TrackedGraph { edges, basepoint: 0, injective };
        g.fold();
        g
    }

    /// Whether the generators freely generate their span.
    pub fn is_injective(&self) -> bool {
        self.injective
    }

    fn find_fold(&self) -> Option<(usize, usize, bool)> {
        let mut out: HashMap<(usize, u16), usize> = HashMap::new();
        let mut inc: HashMap<(usize, u16), usize> = HashMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            if let Some(&j) = out.get(&(e.0, e.2)) {
                return Some((j, i, true));
            }
            out.insert((e.0, e.2), i);
            if let Some(&j) = inc.get(&(e.1, e.2)) {
                return Some((j, i, false));
            }
            inc.insert((e.1, e.2), i);
        }
        None
    }

    fn fold(&mut self) {
        while let Some((i1, i2, outgoing)) = self.find_fold() {
            let (e1, e2) = (self.edges[i1].clone(), self.edges[i2].clone());
            // Far endpoints and the gauge making e2 agree with e1.
            let (w1, w2) = if outgoing { (e1.1, e2.1) } else { (e1.0, e2.0) };
            if w1 == w2 {
                if e1.3 != e2.3 {
                    self.injective = false;
                }
                self.edges.remove(i2);
                continue;
            }
            let (keep, gone, gauge) = if w2 != self.basepoint {
                let c = if outgoing { e2.3.inverse().mul(&e1.3) } else { e2.3.mul(&e1.3.inverse()) };
                (w1, w2, c)
            } else {
                let c = if outgoing { e1.3.inverse().mul(&e2.3) } else { e1.3.mul(&e2.3.inverse()) };
                (w2, w1, c)
            };
            let cinv = gauge.inverse();
            for e in self.edges.iter_mut() {
                if e.1 == gone {
                    e.3 = e.3.mul(&gauge);
                }
                if e.0 == gone {
                    e.3 = cinv.mul(&e.3);
                }
            }
            for e in self.edges.iter_mut() {
                if e.0 == gone {
                    e.0 = keep;
                }
                if e.1 == gone {
                    e.1 = keep;
                }
            }
            self.edges.remove(i2);
        }
    }

    /// If `w` lies in the span, its expression as a reduced word in the basis
    /// symbols (letter `gen = k` stands for the `k`-th input generator).
    pub fn express(&self, w: &Word) -> Option<Word> {
        let mut v = self.basepoint;
        let mut acc = Word::empty();
        for &l in w.free_reduce().letters() {
            let (next, y) = self.edges.iter().find_map(|e| {
                if l.inverse {
                    (e.1 == v && e.2 == l.gen).then(|| (e.0, e.3.inverse()))
                } else {
                    (e.0 == v && e.2 == l.gen).then(|| (e.1, e.3.clone()))
                }
            })?;
            acc = acc.mul(&y);
            v = next;
        }
        (v == self.basepoint).then_some(acc)
    }
}
