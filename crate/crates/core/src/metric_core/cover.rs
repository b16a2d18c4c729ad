use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::moves::{Point, Step};
use super::MetricCore;
use crate::cayley::QiEstimate;
use crate::error::{Error, Result};
use crate::group::{BackendKind, Group, Word};
use crate::Rational;

/// A point of the universal cover at an integer distance from the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverNode {
    pub parent: Option<usize>,
    pub depth: usize,
    pub point: Point,
    pub anchor: Word,
}

/// Ball of integer points in the universal cover around a lift of the root,
/// each carrying its image in the group.
#[derive(Clone, Debug)]
pub struct CoverBall {
    nodes: Vec<CoverNode>,
    radius: usize,
}

impl CoverBall {
    pub(crate) fn grow(g: &Group, core: &MetricCore, root: usize, root_anchor: &Word, radius: usize) -> Result<Self> {
        let mut nodes = vec![CoverNode { parent: None, depth: 0, point: Point::Vertex(root), anchor: g.key(root_anchor) }];
        let mut heap: BinaryHeap<Reverse<(usize, usize, usize, Option<Step>)>> = BinaryHeap::from([Reverse((0, 0, root, None))]);
        while let Some(Reverse((d, idx, v, last))) = heap.pop() {
            for s in core.steps_from(v) {
                if last == Some(s.reversed()) {
                    continue;
                }
                let label = core.step_label(s);
                let len = label.len();
                let mut parent = idx;
                for k in 1..=len {
                    if d + k > radius {
                        break;
                    }
                    let point = if k == len {
                        Point::Vertex(core.step_target(s))
                    } else {
                        Point::Interior { edge: s.edge, offset: if s.forward { k } else { len - k } }
                    };
                    let anchor = g.mul(&nodes[parent].anchor, &Word::letter(label.letters()[k - 1]));
                    nodes.push(CoverNode { parent: Some(parent), depth: d + k, point, anchor });
                    parent = nodes.len() - 1;
                }
                if d + len <= radius {
                    heap.push(Reverse((d + len, parent, core.step_target(s), Some(s))));
                }
            }
        }
        Ok(CoverBall { nodes, radius })
    }

    pub fn nodes(&self) -> &[CoverNode] {
        &self.nodes
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(p) = n.parent {
                adj[i].push(p);
                adj[p].push(i);
            }
        }
        adj
    }

    fn tree_distances(adj: &[Vec<usize>], from: usize) -> Vec<usize> {
        let mut d = vec![usize::MAX; adj.len()];
        d[from] = 0;
        let mut q = VecDeque::from([from]);
        while let Some(v) = q.pop_front() {
            for &w in &adj[v] {
                if d[w] == usize::MAX {
                    d[w] = d[v] + 1;
                    q.push_back(w);
                }
            }
        }
        d
    }

    /// Tree distance between two nodes.
    pub fn tree_distance(&self, mut a: usize, mut b: usize) -> usize {
        let mut d = 0;
        while a != b {
            if self.nodes[a].depth >= self.nodes[b].depth {
                a = self.nodes[a].parent.unwrap();
            } else {
                b = self.nodes[b].parent.unwrap();
            }
            d += 1;
        }
        d
    }

    /// One node per point of the core, at minimal depth: a fundamental
    /// domain for the deck group.
    pub fn fundamental_domain(&self) -> Vec<usize> {
        let mut best: BTreeMap<Point, usize> = BTreeMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let e = best.entry(n.point).or_insert(i);
            if self.nodes[*e].depth > n.depth {
                *e = i;
            }
        }
        let mut out: Vec<usize> = best.into_values().collect();
        out.sort_unstable();
        out
    }
}

/// Result of comparing tree distance with group distance over a cover ball.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QiMeasurement {
    /// Smallest `C` at `K = 1`, with a witness pair of cover nodes.
    pub estimate: QiEstimate,
    /// Pairs `(K, C)` where no smaller `C` works at that `K`, for increasing
    /// `K`.
    pub pareto: Vec<(Rational, Rational)>,
    /// Smallest group distance seen at each tree distance.
    pub profile: Vec<(usize, usize)>,
    pub pairs: usize,
    /// Whether `d_X <= d_tree` held on every pair.
    pub lipschitz: bool,
}

fn free_distance(a: &Word, b: &Word) -> usize {
    a.len() + b.len() - 2 * a.common_prefix_len(b)
}

/// Largest distance from the root to any integer point of the core.
pub(crate) fn eccentricity(core: &MetricCore, root: usize) -> usize {
    let n = core.num_vertices();
    let mut dist = vec![usize::MAX; n];
    dist[root] = 0;
    let mut heap = BinaryHeap::from([Reverse((0usize, root))]);
    while let Some(Reverse((d, v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for s in core.steps_from(v) {
            let t = core.step_target(s);
            let nd = d + core.edges()[s.edge].length();
            if nd < dist[t] {
                dist[t] = nd;
                heap.push(Reverse((nd, t)));
            }
        }
    }
    let mut ecc = dist.iter().copied().max().unwrap_or(0);
    for e in core.edges() {
        for k in 1..e.length() {
            ecc = ecc.max((dist[e.from] + k).min(dist[e.to] + e.length() - k));
        }
    }
    ecc
}

impl MetricCore {
    pub fn universal_cover_ball(&self, g: &Group, radius: usize) -> Result<CoverBall> {
        let b = self.require_based()?;
        CoverBall::grow(g, self, b, &Word::empty(), radius)
    }

    /// Compares the tree metric on the universal cover with the word metric
    /// on the images. Every pair has one end in a fundamental domain and the
    /// other anywhere in the ball of the given radius; by equivariance this
    /// covers every pair of points up to translation.
    pub fn measure_qi(&self, g: &Group, radius: usize) -> Result<QiMeasurement> {
        let root = self.require_based()?;
        let need = eccentricity(self, root);
        if radius < need {
            return Err(Error::RadiusInsufficient { need, have: radius });
        }
        let ball = self.universal_cover_ball(g, radius)?;
        let adj = ball.adjacency();
        let free = g.backend() == BackendKind::Free;
        // tree distance -> (min d_X, witness)
        let mut by_t: HashMap<usize, (usize, (usize, usize))> = HashMap::new();
        // (slack, -d_X): ties prefer pairs with equal images
        let mut worst: Option<((i64, i64), (usize, usize))> = None;
        let mut lipschitz = true;
        let mut pairs = 0;
        for x in ball.fundamental_domain() {
            let dt = CoverBall::tree_distances(&adj, x);
            for (y, &t) in dt.iter().enumerate() {
                if y == x {
                    continue;
                }
                let (ax, ay) = (&ball.nodes[x].anchor, &ball.nodes[y].anchor);
                let dx = if free { free_distance(ax, ay) } else { g.distance(ax, ay)? };
                pairs += 1;
                lipschitz &= dx <= t;
                let slack = t as i64 - dx as i64;
                if worst.is_none_or(|(w, _)| (slack, -(dx as i64)) > w) {
                    worst = Some(((slack, -(dx as i64)), (x, y)));
                }
                let entry = by_t.entry(t).or_insert((dx, (x, y)));
                if dx < entry.0 {
                    *entry = (dx, (x, y));
                }
            }
        }
        let zero = Rational::from_integer(0);
        let c_at = |k: Rational| {
            by_t.iter()
                .map(|(&t, &(m, _))| Rational::from_integer(t as i64) / k - Rational::from_integer(m as i64))
                .fold(zero, |a, b| a.max(b))
        };
        let (c1, witness) = match worst {
            Some(((s, _), w)) if s > 0 => (Rational::from_integer(s), Some(w)),
            _ => (zero, None),
        };
        let one = Rational::from_integer(1);
        let mut ks: Vec<Rational> = by_t
            .iter()
            .filter(|(_, &(m, _))| m > 0)
            .map(|(&t, &(m, _))| Rational::new(t as i64, m as i64))
            .filter(|k| *k >= one)
            .collect();
        ks.push(one);
        ks.sort();
        ks.dedup();
        let mut pareto: Vec<(Rational, Rational)> = Vec::new();
        for k in ks {
            let c = c_at(k);
            if pareto.last().is_none_or(|&(_, pc)| c < pc) {
                pareto.push((k, c));
            }
        }
        let mut profile: Vec<(usize, usize)> = by_t.iter().map(|(&t, &(m, _))| (t, m)).collect();
        profile.sort_unstable();
        Ok(QiMeasurement { estimate: QiEstimate { k: one, c: c1, radius, witness }, pareto, profile, pairs, lipschitz })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_core::SearchParams;
    use std::collections::HashSet;

    fn rose(g: &Group, gens: &str) -> MetricCore {
        MetricCore::from_generators(g, &g.parse_words(gens).unwrap()).unwrap()
    }

    #[test]
    fn cover_of_single_loop() {
        let g = Group::free(2);
        let ball = rose(&g, "a").universal_cover_ball(&g, 2).unwrap();
        let mut anchors: Vec<String> = ball.nodes().iter().map(|n| g.format(&n.anchor)).collect();
        anchors.sort();
        assert_eq!(anchors, vec!["1", "a", "a'", "a'a'", "aa"]);
        let star = rose(&g, "a,b").universal_cover_ball(&g, 1).unwrap();
        assert_eq!(star.len(), 5);
    }

    #[test]
    fn folded_cover_is_injective() {
        let g = Group::free(2);
        let c = rose(&g, "ab,ab'").fold_to_minimal(&g, SearchParams::default(), 100).unwrap().core;
        let ball = c.universal_cover_ball(&g, 3).unwrap();
        let distinct: HashSet<&Word> = ball.nodes().iter().map(|n| &n.anchor).collect();
        assert_eq!(distinct.len(), ball.len());
        let m = c.measure_qi(&g, 6).unwrap();
        assert_eq!((m.estimate.k, m.estimate.c), (Rational::from_integer(1), Rational::from_integer(0)));
        assert!(m.lipschitz);
    }

    #[test]
    fn unfolded_rose_needs_additive_constant() {
        let g = Group::free(2);
        let c = rose(&g, "ab,ab'");
        let m = c.measure_qi(&g, 4).unwrap();
        assert!(m.estimate.c >= Rational::from_integer(2));
        let (x, y) = m.estimate.witness.unwrap();
        let ball = c.universal_cover_ball(&g, 4).unwrap();
        assert_eq!(ball.nodes()[x].anchor, ball.nodes()[y].anchor);
        assert!(m.lipschitz);
        assert!(m.pareto.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 > w[1].1));
        let single = rose(&g, "a").measure_qi(&g, 4).unwrap();
        assert_eq!(single.estimate.c, Rational::from_integer(0));
    }

    #[test]
    fn tree_distance_agrees_with_bfs() {
        let g = Group::free(2);
        let ball = rose(&g, "ab,ba").universal_cover_ball(&g, 4).unwrap();
        let adj = ball.adjacency();
        let d = CoverBall::tree_distances(&adj, 3);
        for j in 0..ball.len() {
            assert_eq!(d[j], ball.tree_distance(3, j));
        }
    }

    #[test]
    fn radius_must_cover_the_core() {
        let g = Group::free(2);
        let c = rose(&g, "abab");
        assert_eq!(c.measure_qi(&g, 1), Err(Error::RadiusInsufficient { need: 2, have: 1 }));
    }
}
