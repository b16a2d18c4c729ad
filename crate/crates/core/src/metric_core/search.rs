use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::moves::{FoldMove, PathSpec, Point, Step};
use super::MetricCore;
use crate::error::{Error, Result};
use crate::group::{Group, Word};

/// Horizon for improvement searches: windows reach `depth` along the core,
/// and the ball in the Cayley graph must cover `depth + length(e)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchParams {
    pub depth: usize,
    pub radius: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams { depth: 2, radius: 8 }
    }
}

/// A point of a window in the universal cover: the path reaching it, its
/// projection, and its image relative to the window's root.
#[derive(Clone, Debug)]
pub(crate) struct WindowNode {
    pub path: PathSpec,
    pub point: Point,
    pub rel: Word,
    pub depth: usize,
}

/// The depth-bounded part of the universal cover of the component of
/// `core - avoid` containing `start`, grown from a lift of `start`.
pub(crate) fn window(g: &Group, core: &MetricCore, start: usize, avoid: Option<usize>, depth: usize) -> (Vec<WindowNode>, bool) {
    let mut nodes = vec![WindowNode { path: PathSpec::default(), point: Point::Vertex(start), rel: Word::empty(), depth: 0 }];
    let mut truncated = false;
    let mut queue: VecDeque<(usize, usize, Option<Step>)> = VecDeque::from([(0, start, None)]);
    while let Some((idx, v, last)) = queue.pop_front() {
        let (path, rel, d) = (nodes[idx].path.clone(), nodes[idx].rel.clone(), nodes[idx].depth);
        for s in core.steps_from(v) {
            if Some(s.edge) == avoid || last == Some(s.reversed()) {
                continue;
            }
            let label = core.step_label(s);
            let len = label.len();
            for k in 1..len {
                if d + k > depth {
                    truncated = true;
                    break;
                }
                let offset = if s.forward { k } else { len - k };
                nodes.push(WindowNode {
                    path: PathSpec { steps: path.steps.clone(), tail: Some((s, k)) },
                    point: Point::Interior { edge: s.edge, offset },
                    rel: g.mul(&rel, &label.prefix(k)),
                    depth: d + k,
                });
            }
            if d + len > depth {
                truncated = true;
                continue;
            }
            let mut steps = path.steps.clone();
            steps.push(s);
            let t = core.step_target(s);
            nodes.push(WindowNode { path: PathSpec { steps, tail: None }, point: Point::Vertex(t), rel: g.mul(&rel, &label), depth: d + len });
            queue.push_back((nodes.len() - 1, t, Some(s)));
        }
    }
    // stable: ties keep discovery order
    nodes.sort_by_key(|n| n.depth);
    (nodes, truncated)
}

/// Shortest path (by length, then step order) from `from` to `to` avoiding
/// edge `avoid`.
pub(crate) fn shortest_path(core: &MetricCore, from: usize, to: usize, avoid: Option<usize>) -> Option<PathSpec> {
    let n = core.num_vertices();
    let mut dist = vec![usize::MAX; n];
    let mut prev: Vec<Option<Step>> = vec![None; n];
    dist[from] = 0;
    let mut heap = BinaryHeap::from([Reverse((0usize, from))]);
    while let Some(Reverse((d, v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for s in core.steps_from(v) {
            if Some(s.edge) == avoid {
                continue;
            }
            let t = core.step_target(s);
            let nd = d + core.edges()[s.edge].length();
            if nd < dist[t] {
                dist[t] = nd;
                prev[t] = Some(s);
                heap.push(Reverse((nd, t)));
            }
        }
    }
    if dist[to] == usize::MAX {
        return None;
    }
    let mut steps = Vec::new();
    let mut v = to;
    while v != from {
        let s = prev[v].unwrap();
        steps.push(s);
        v = core.step_source(s);
    }
    steps.reverse();
    Some(PathSpec { steps, tail: None })
}

/// Which kinds of move a search may return.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Scope {
    All,
    Shortest,
}

struct Found {
    mv: Option<FoldMove>,
    truncated: bool,
}

fn search(g: &Group, core: &MetricCore, e: usize, params: SearchParams, scope: Scope) -> Result<Found> {
    let edge = core.edges().get(e).ok_or_else(|| Error::InvalidArgument(format!("no edge {e}")))?.clone();
    let len = edge.length();
    let need = params.depth + len;
    if params.radius < need {
        return Err(Error::RadiusInsufficient { need, have: params.radius });
    }
    let lambda = edge.label.clone();
    let (w1, t1) = window(g, core, edge.from, Some(e), params.depth);
    let (w2, t2) = window(g, core, edge.to, Some(e), params.depth);
    let truncated = t1 || t2;
    // images of the second window, seen from the first window's root
    let img2: Vec<Word> = w2.iter().map(|n| g.mul(&lambda, &n.rel)).collect();

    let mut first: HashMap<&Word, usize> = HashMap::new();
    for (i, n) in w1.iter().enumerate() {
        first.entry(&n.rel).or_insert(i);
    }
    for (j, y) in img2.iter().enumerate() {
        if let Some(&i) = first.get(y) {
            let (path1, path2) = (w1[i].path.clone(), w2[j].path.clone());
            let mv = if w1[i].point == w2[j].point {
                FoldMove::DiscardRedundantEdge { edge: e, path1, path2 }
            } else {
                FoldMove::IdentifyVertices { edge: e, path1, path2 }
            };
            return Ok(Found { mv: Some(mv), truncated });
        }
    }

    if len >= 2 {
        let mut best: Option<(usize, usize, usize)> = None;
        for (i, x) in w1.iter().enumerate() {
            for (j, y) in img2.iter().enumerate() {
                let d = g.distance(&x.rel, y)?;
                if d < len && best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, i, j));
                }
            }
        }
        if let Some((_, i, j)) = best {
            let label = g.geodesic(&w1[i].rel.inverse().concat(&img2[j]))?;
            let mv = FoldMove::ReplaceEdge { edge: e, path1: w1[i].path.clone(), path2: w2[j].path.clone(), label };
            return Ok(Found { mv: Some(mv), truncated });
        }
    }

    if scope == Scope::All && len >= 2 {
        if let Some(back) = shortest_path(core, edge.to, edge.from, Some(e)) {
            let (_, wb) = back.walk(core, edge.to, Some(e))?;
            let mut best: Option<(usize, bool, usize, Word)> = None;
            for reversed in [false, true] {
                let (lam, h) = if reversed {
                    (lambda.inverse(), lambda.inverse().concat(&wb.inverse()))
                } else {
                    (lambda.clone(), lambda.concat(&wb))
                };
                if g.is_trivial(&h) {
                    let mv = FoldMove::DiscardRedundantEdge { edge: e, path1: PathSpec::default(), path2: back.clone() };
                    return Ok(Found { mv: Some(mv), truncated });
                }
                for k in 1..len {
                    let p = lam.prefix(k);
                    let loop_label = g.geodesic(&p.inverse().concat(&h).concat(&p))?;
                    let total = k + loop_label.len();
                    if total < len && best.as_ref().is_none_or(|b| total < b.0) {
                        best = Some((total, reversed, k, loop_label));
                    }
                }
            }
            if let Some((_, reversed, stem, loop_label)) = best {
                let return_path = if reversed { back.reversed_steps() } else { back };
                let mv = FoldMove::AddBalloon { edge: e, reversed, return_path, stem, loop_label };
                return Ok(Found { mv: Some(mv), truncated });
            }
        }
    }
    Ok(Found { mv: None, truncated })
}

impl MetricCore {
    /// Looks for an improvement of edge `e` inside the horizon: a coincidence
    /// of the two window images, a shorter connection between them, or a
    /// balloon. `None` only means nothing was found within the horizon.
    pub fn search_improvement(&self, g: &Group, e: usize, params: SearchParams) -> Result<Option<FoldMove>> {
        Ok(search(g, self, e, params, Scope::All)?.mv)
    }

    /// Whether, inside the horizon, the two window images are disjoint and no
    /// connection between them is shorter than `e`.
    pub fn check_minimal_edge_shortest(&self, g: &Group, e: usize, params: SearchParams) -> Result<bool> {
        Ok(search(g, self, e, params, Scope::Shortest)?.mv.is_none())
    }

    /// Applies improvements greedily, scanning edges in order, until none is
    /// found or `budget` moves have been made.
    pub fn fold_to_minimal(&self, g: &Group, params: SearchParams, budget: usize) -> Result<FoldOutcome> {
        let mut core = self.clone();
        let mut moves = Vec::new();
        let mut budget_exhausted = false;
        let mut horizon_binding;
        'outer: loop {
            horizon_binding = false;
            for e in 0..core.num_edges() {
                let found = search(g, &core, e, params, Scope::All)?;
                horizon_binding |= found.truncated;
                if let Some(mv) = found.mv {
                    if moves.len() >= budget {
                        budget_exhausted = true;
                        break 'outer;
                    }
                    log::debug!("applying {} on edge {e}", mv.kind());
                    core = core.apply_move(g, &mv)?;
                    moves.push(mv);
                    continue 'outer;
                }
            }
            break;
        }
        Ok(FoldOutcome { core, moves, horizon_binding, budget_exhausted })
    }

    /// Decomposition data for edge `e`: whether it separates, and loop
    /// generators of the stabilizers of the two sides.
    pub fn edge_split(&self, g: &Group, e: usize, depth: usize) -> Result<EdgeSplit> {
        let edge = self.edges().get(e).ok_or_else(|| Error::InvalidArgument(format!("no edge {e}")))?;
        let separating = self.is_separating(e);
        let h1 = self.loop_basis(g, edge.from, Some(e));
        let h2 = self.loop_basis(g, edge.to, Some(e));
        let (w1, _) = window(g, self, edge.from, Some(e), depth);
        let (w2, _) = window(g, self, edge.to, Some(e), depth);
        Ok(EdgeSplit { edge: e, separating, h1, h2, window1: w1.len(), window2: w2.len() })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSplit {
    pub edge: usize,
    pub separating: bool,
    pub h1: Vec<Word>,
    pub h2: Vec<Word>,
    pub window1: usize,
    pub window2: usize,
}

#[derive(Clone, Debug)]
pub struct FoldOutcome {
    pub core: MetricCore,
    pub moves: Vec<FoldMove>,
    /// Some window in the last scan was cut off by the depth bound.
    pub horizon_binding: bool,
    pub budget_exhausted: bool,
}
