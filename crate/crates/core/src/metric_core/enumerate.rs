use std::collections::HashSet;

use super::{CoreEdge, MetricCore};
use crate::error::{Error, Result};
use crate::group::{Group, Letter, Word};

/// Largest `n_edges * L` accepted by [`enumerate_small_cores`].
pub const SMALL_CORE_CAP: usize = 12;

/// Largest number of label assignments examined by [`enumerate_small_cores`].
const ASSIGNMENT_CAP: usize = 20_000_000;

/// Maximum number of edges of a connected graph of rank `r` with no vertices
/// of valence one or two (a single vertex with loops excepted).
pub fn max_edges(r: usize) -> Result<usize> {
    match r {
        0 => Err(Error::InvalidArgument("rank must be at least 1".into())),
        1 => Ok(1),
        _ => Ok(3 * r - 3),
    }
}

type Canon = Vec<(usize, usize, Vec<Letter>)>;

/// Multisets of `k` unordered vertex pairs on `n` vertices, as sorted lists.
fn pair_multisets(n: usize, k: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(pairs: &[(usize, usize)], start: usize, k: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..pairs.len() {
            cur.push(pairs[i]);
            rec(pairs, i, k, cur, out);
            cur.pop();
        }
    }
    rec(&pairs, 0, k, &mut cur, &mut out);
    out
}

fn connected_without_leaves(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut deg = vec![0; n];
    for &(a, b) in edges {
        deg[a] += 1;
        deg[b] += 1;
    }
    if deg.iter().any(|&d| d < 2) {
        return false;
    }
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut stack = vec![0];
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Minimum over vertex relabellings of the sorted edge list, each edge
/// written in whichever orientation sorts first.
fn canonical_form(edges: &[(usize, usize, usize)], labels: &[Word], inverses: &[Word], perms: &[Vec<usize>]) -> Canon {
    perms
        .iter()
        .map(|p| {
            let mut list: Canon = edges
                .iter()
                .map(|&(a, b, l)| {
                    let fwd = (p[a], p[b], labels[l].letters().to_vec());
                    let bwd = (p[b], p[a], inverses[l].letters().to_vec());
                    fwd.min(bwd)
                })
                .collect();
            list.sort();
            list
        })
        .min()
        .unwrap()
}

/// Connected cores without leaves having at most `n_edges` edges, each of
/// length between 1 and `max_len`, up to label-preserving isomorphism. Only
/// immersed cores are kept. The one-vertex core appears only for
/// `n_edges = 0`.
pub fn enumerate_small_cores(g: &Group, n_edges: usize, max_len: usize, radius: usize) -> Result<Vec<MetricCore>> {
    if n_edges * max_len > SMALL_CORE_CAP {
        return Err(Error::BudgetExceeded { cap: SMALL_CORE_CAP });
    }
    if radius < n_edges * max_len {
        return Err(Error::RadiusInsufficient { need: n_edges * max_len, have: radius });
    }
    if n_edges == 0 {
        let mut p = MetricCore::point();
        p.basepoint = None;
        return Ok(vec![p]);
    }
    let labels: Vec<Word> = g.sphere_reps(max_len)?.into_iter().filter(|w| !w.is_empty()).collect();
    let inverses: Vec<Word> = labels.iter().map(|w| g.geodesic(&w.inverse())).collect::<Result<_>>()?;
    let mut seen: HashSet<Canon> = HashSet::new();
    let mut out = Vec::new();
    let mut examined = 0usize;
    for e in 1..=n_edges {
        for v in 1..=e {
            let perms = permutations(v);
            for shape in pair_multisets(v, e) {
                if !connected_without_leaves(v, &shape) {
                    continue;
                }
                let total = labels.len().checked_pow(e as u32).unwrap_or(usize::MAX);
                examined = examined.saturating_add(total);
                if examined > ASSIGNMENT_CAP {
                    return Err(Error::BudgetExceeded { cap: ASSIGNMENT_CAP });
                }
                for mut code in 0..total {
                    let mut edges = Vec::with_capacity(e);
                    for &(a, b) in &shape {
                        edges.push((a, b, code % labels.len()));
                        code /= labels.len();
                    }
                    let core = MetricCore {
                        anchors: vec![Word::empty(); v],
                        edges: edges.iter().map(|&(a, b, l)| CoreEdge { from: a, to: b, label: labels[l].clone() }).collect(),
                        basepoint: None,
                    };
                    if !core.immersion_violations().is_empty() {
                        continue;
                    }
                    if seen.insert(canonical_form(&edges, &labels, &inverses, &perms)) {
                        let anchors = core.tree_anchors(g);
                        out.push(MetricCore { anchors, ..core });
                    }
                }
            }
        }
    }
    Ok(out)
}
