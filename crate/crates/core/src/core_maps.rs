//! Maps between cores of nested subgroups and their measured constants.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::cayley::QiEstimate;
use crate::error::{Error, Result};
use crate::group::{BackendKind, Group, Word};
use crate::metric_core::{CoreJson, MetricCore, Step};
use crate::Rational;

/// Cancels backtracking in a sequence of steps.
pub fn reduce_steps(steps: impl IntoIterator<Item = Step>) -> Vec<Step> {
    let mut out: Vec<Step> = Vec::new();
    for s in steps {
        if out.last() == Some(&s.reversed()) {
            out.pop();
        } else {
            out.push(s);
        }
    }
    out
}

fn reverse_path(p: &[Step]) -> impl Iterator<Item = Step> + '_ {
    p.iter().rev().map(|s| s.reversed())
}

fn common_prefix(a: &[Step], b: &[Step]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// Tree distance between the ends of two reduced paths from the same root.
fn tree_distance(a: &[Step], b: &[Step]) -> usize {
    a.len() + b.len() - 2 * common_prefix(a, b)
}

fn path_word(core: &MetricCore, steps: &[Step]) -> Word {
    steps.iter().fold(Word::empty(), |acc, &s| acc.concat(&core.step_label(s)))
}

/// Non-backtracking walks from the basepoint of a unit-length core.
struct PathBall {
    parent: Vec<Option<(usize, Step)>>,
    depth: Vec<usize>,
    vertex: Vec<usize>,
    anchor: Vec<Word>,
}

impl PathBall {
    fn grow(g: &Group, core: &MetricCore, root: usize, radius: usize) -> Self {
        let mut b = PathBall { parent: vec![None], depth: vec![0], vertex: vec![root], anchor: vec![Word::empty()] };
        let mut i = 0;
        while i < b.parent.len() {
            if b.depth[i] < radius {
                let back = b.parent[i].map(|(_, s)| s.reversed());
                for s in core.steps_from(b.vertex[i]) {
                    if Some(s) == back {
                        continue;
                    }
                    b.parent.push(Some((i, s)));
                    b.depth.push(b.depth[i] + 1);
                    b.vertex.push(core.step_target(s));
                    b.anchor.push(g.mul(&b.anchor[i], &core.step_label(s)));
                }
            }
            i += 1;
        }
        b
    }

    fn len(&self) -> usize {
        self.parent.len()
    }

    fn path(&self, mut i: usize) -> Vec<Step> {
        let mut out = Vec::new();
        while let Some((p, s)) = self.parent[i] {
            out.push(s);
            i = p;
        }
        out.reverse();
        out
    }
}

/// Everything `images_close` and `build_core_map` share.
struct Setup {
    source: MetricCore,
    target: MetricCore,
    ball: PathBall,
    radius: usize,
    tree_paths: Vec<Vec<Step>>,
    tree_edges: Vec<bool>,
}

impl Setup {
    fn new(g: &Group, core1: &MetricCore, core2: &MetricCore, radius: usize) -> Result<Self> {
        let b1 = core1.require_based()?;
        let b2 = core2.require_based()?;
        let source = core1.unit_subdivision(g)?;
        let target = core2.unit_subdivision(g)?;
        let ball = PathBall::grow(g, &target, b2, radius);
        let (paths, tree_edges) = source.spanning_tree(b1, None);
        let tree_paths = paths.into_iter().map(|p| p.ok_or(Error::Disconnected)).collect::<Result<_>>()?;
        Ok(Setup { source, target, ball, radius, tree_paths, tree_edges })
    }

    /// Ball node whose anchor is nearest to `x`, ties broken by shortlex
    /// order of the anchor.
    fn nearest(&self, g: &Group, x: &Word) -> Result<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in 0..self.ball.len() {
            let d = g.distance(x, &self.ball.anchor[i])?;
            let better = match best {
                None => true,
                Some((j, bd)) => d < bd || (d == bd && self.ball.anchor[i].shortlex_cmp(&self.ball.anchor[j]).is_lt()),
            };
            if better {
                best = Some((i, d));
            }
        }
        let (i, d) = best.unwrap();
        if d > 0 && (0..self.ball.len()).any(|j| self.ball.depth[j] == self.radius && g.distance(x, &self.ball.anchor[j]).ok() == Some(d)) {
            return Err(Error::RadiusInsufficient { need: self.radius + 1, have: self.radius });
        }
        Ok((i, d))
    }

    /// Closed reduced path at the target basepoint reading `h`.
    fn read_loop(&self, g: &Group, h: &Word) -> Result<Vec<Step>> {
        let root = self.target.root();
        if g.backend() == BackendKind::Free {
            let mut v = root;
            let mut out = Vec::new();
            for &l in h.letters() {
                let s = self.target.steps_from(v).into_iter().find(|&s| self.target.step_label(s).letters() == [l]);
                match s {
                    Some(s) => {
                        out.push(s);
                        v = self.target.step_target(s);
                    }
                    None => return Err(Error::NotNested { step: 0, witness: g.format(h) }),
                }
            }
            if v != root {
                return Err(Error::NotNested { step: 0, witness: g.format(h) });
            }
            return Ok(out);
        }
        let key = g.key(h);
        (0..self.ball.len())
            .find(|&i| self.ball.vertex[i] == root && self.ball.anchor[i] == key)
            .map(|i| self.ball.path(i))
            .ok_or(Error::RadiusInsufficient { need: self.radius + 1, have: self.radius })
    }

    fn check_nested(&self, g: &Group) -> Result<()> {
        for l in self.source.spanning_tree_loops(self.source.root(), None) {
            self.read_loop(g, &g.key(&path_word(&self.source, &l)))?;
        }
        Ok(())
    }

    fn omega_anchors(&self, g: &Group) -> Vec<Word> {
        self.tree_paths.iter().map(|p| g.key(&path_word(&self.source, p))).collect()
    }
}

/// Largest distance from an image point of the first core's cover to the
/// image of the second core's cover. The first core's subgroup must lie in
/// the second's.
pub fn images_close(g: &Group, core1: &MetricCore, core2: &MetricCore, radius: usize) -> Result<usize> {
    let s = Setup::new(g, core1, core2, radius)?;
    s.check_nested(g)?;
    let mut d = 0;
    for x in s.omega_anchors(g) {
        d = d.max(s.nearest(g, &x)?.1);
    }
    Ok(d)
}

/// Measured and predicted constants of a core map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapConstants {
    pub d: usize,
    /// Pairwise maxima of the two cores' measured constants.
    pub k: Rational,
    pub c: Rational,
    pub k0: Rational,
    pub c0: Rational,
    pub k_prime: Rational,
    pub c_prime: Rational,
}

impl MapConstants {
    pub fn predict(k: Rational, c: Rational, d: usize) -> Self {
        let two = Rational::from_integer(2);
        let d_r = Rational::from_integer(d as i64);
        let k0 = k * k;
        let c0 = two * k * d_r + two * k * c;
        MapConstants { d, k, c, k0, c0, k_prime: k0, c_prime: Rational::from_integer(3) * k0 + two * c0 }
    }
}

/// An equivariant map from the cover of one core to the cover of another,
/// stored on unit subdivisions of both: each source vertex goes to a reduced
/// path from the target basepoint, each source edge to a reduced target path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreMap {
    source: MetricCore,
    target: MetricCore,
    /// Source vertices below this index are vertices of the unsubdivided
    /// core.
    original_vertices: usize,
    assignment: Vec<Vec<Step>>,
    edge_paths: Vec<Vec<Step>>,
    constants: MapConstants,
}

/// Builds the map by sending each vertex of a spanning-tree fundamental
/// domain to the nearest point of the target image and joining images of
/// adjacent vertices by target geodesics.
pub fn build_core_map(g: &Group, core1: &MetricCore, core2: &MetricCore, radius: usize) -> Result<CoreMap> {
    let s = Setup::new(g, core1, core2, radius)?;
    s.check_nested(g)?;
    let mut d = 0;
    let mut assignment = Vec::new();
    for x in s.omega_anchors(g) {
        let (node, dist) = s.nearest(g, &x)?;
        d = d.max(dist);
        assignment.push(s.ball.path(node));
    }
    let mut edge_paths = Vec::new();
    for (e, edge) in s.source.edges().iter().enumerate() {
        let gamma = if s.tree_edges[e] {
            Vec::new()
        } else {
            let h = path_word(&s.source, &s.tree_paths[edge.from])
                .concat(&edge.label)
                .concat(&path_word(&s.source, &s.tree_paths[edge.to]).inverse());
            s.read_loop(g, &g.key(&h))?
        };
        let walk = reverse_path(&assignment[edge.from]).chain(gamma).chain(assignment[edge.to].iter().copied());
        edge_paths.push(reduce_steps(walk));
    }
    let q1 = core1.measure_qi(g, radius)?;
    let q2 = core2.measure_qi(g, radius)?;
    let k = q1.estimate.k.max(q2.estimate.k);
    let c = q1.estimate.c.max(q2.estimate.c);
    Ok(CoreMap {
        source: s.source,
        target: s.target,
        original_vertices: core1.num_vertices(),
        assignment,
        edge_paths,
        constants: MapConstants::predict(k, c, d),
    })
}

/// Empirical constants of a map over a window, with the predicted ones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapQi {
    pub empirical: QiEstimate,
    pub predicted: MapConstants,
    /// Pairs of original source vertices satisfy `(k0, c0)`.
    pub step1_holds: bool,
    /// All sampled pairs satisfy `(k_prime, c_prime)`.
    pub holds: bool,
    /// Largest distance between a sampled source image and its target.
    pub max_offset: usize,
    pub pairs: usize,
}

fn satisfies(d1: usize, d2: usize, k: Rational, c: Rational) -> bool {
    let (d1, d2) = (Rational::from_integer(d1 as i64), Rational::from_integer(d2 as i64));
    d1 / k - c <= d2 && d2 <= k * d1 + c
}

impl CoreMap {
    pub fn source(&self) -> &MetricCore {
        &self.source
    }

    pub fn target(&self) -> &MetricCore {
        &self.target
    }

    pub fn assignment(&self) -> &[Vec<Step>] {
        &self.assignment
    }

    pub fn edge_paths(&self) -> &[Vec<Step>] {
        &self.edge_paths
    }

    pub fn constants(&self) -> &MapConstants {
        &self.constants
    }

    /// Image of a source path from the basepoint, as a reduced target path
    /// from the basepoint.
    pub fn image(&self, path: &[Step]) -> Vec<Step> {
        let mut out = self.assignment[self.source.root()].clone();
        for &s in path {
            let p = &self.edge_paths[s.edge];
            if s.forward {
                out.extend(p.iter().copied());
            } else {
                out.extend(reverse_path(p));
            }
        }
        reduce_steps(out)
    }

    /// Whether the edge images cover every target edge.
    pub fn is_surjective(&self) -> bool {
        let hit: HashSet<usize> = self.edge_paths.iter().flatten().map(|s| s.edge).collect();
        hit.len() == self.target.num_edges()
    }

    /// Checks `image(h x) = h image(x)` for every loop generator `h` of the
    /// source and every vertex `x` of the fundamental domain. Returns the
    /// first failing pair.
    pub fn check_equivariance(&self, g: &Group) -> Option<(Word, usize)> {
        let root = self.source.root();
        let (paths, _) = self.source.spanning_tree(root, None);
        for l in self.source.spanning_tree_loops(root, None) {
            let h = self.source.path_label(g, &l);
            for (v, p) in paths.iter().enumerate() {
                let p = p.as_ref().unwrap();
                let moved = reduce_steps(l.iter().chain(p).copied());
                let lhs = g.key(&path_word(&self.target, &self.image(&moved)));
                let rhs = g.mul(&h, &path_word(&self.target, &self.assignment[v]));
                if lhs != rhs {
                    return Some((h, v));
                }
            }
        }
        None
    }

    /// Compares tree distances in the source and target covers over pairs
    /// with one end in the fundamental domain and the other within `radius`.
    pub fn measure_qi(&self, g: &Group, radius: usize) -> Result<MapQi> {
        let root = self.source.root();
        let need = crate::metric_core::eccentricity(&self.source, root);
        if radius < need {
            return Err(Error::RadiusInsufficient { need, have: radius });
        }
        let original = |v: usize| v < self.original_vertices;
        let ball = PathBall::grow(g, &self.source, root, radius);
        let nodes: Vec<(Vec<Step>, Vec<Step>)> = (0..ball.len())
            .map(|i| {
                let p = ball.path(i);
                let q = self.image(&p);
                (p, q)
            })
            .collect();
        let (paths, _) = self.source.spanning_tree(root, None);
        let c = &self.constants;
        let mut step1_holds = true;
        let mut holds = true;
        let mut pairs = Vec::new();
        let mut max_offset = 0;
        for (i, (p, q)) in nodes.iter().enumerate() {
            let a1 = g.key(&path_word(&self.source, p));
            let a2 = g.key(&path_word(&self.target, q));
            max_offset = max_offset.max(g.distance(&a1, &a2)?);
            for (x, xp) in paths.iter().enumerate() {
                let xp = xp.as_ref().unwrap();
                let xq = &self.assignment[x];
                let d1 = tree_distance(xp, p);
                let d2 = tree_distance(xq, q);
                holds &= satisfies(d1, d2, c.k_prime, c.c_prime);
                if original(x) && original(ball.vertex[i]) {
                    step1_holds &= satisfies(d1, d2, c.k0, c.c0);
                }
                pairs.push((d1, d2, (x, i)));
            }
        }
        let empirical = QiEstimate::from_pairs(pairs.iter().copied(), radius);
        Ok(MapQi { empirical, predicted: self.constants.clone(), step1_holds, holds, max_offset, pairs: pairs.len() })
    }

    /// `size(target) <= k_prime size(source) + c_prime`, for surjective maps.
    pub fn size_bound_check(&self) -> Result<bool> {
        if !self.is_surjective() {
            return Err(Error::NotSurjective);
        }
        let lhs = Rational::from_integer(self.target.size() as i64);
        let rhs = self.constants.k_prime * Rational::from_integer(self.source.size() as i64) + self.constants.c_prime;
        Ok(lhs <= rhs)
    }

    pub fn to_json(&self, g: &Group) -> CoreMapJson {
        CoreMapJson {
            source: self.source.to_json(g),
            target: self.target.to_json(g),
            original_vertices: self.original_vertices,
            assignment: self
                .assignment
                .iter()
                .enumerate()
                .map(|(v, p)| AssignmentJson { vertex: v, anchor: g.format(&g.key(&path_word(&self.target, p))), path: p.clone() })
                .collect(),
            edge_paths: self.edge_paths.clone(),
            constants: self.constants.clone(),
        }
    }

    /// Rebuilds a map and checks that every path is a walk with the right
    /// endpoints.
    pub fn from_json(g: &Group, j: &CoreMapJson) -> Result<Self> {
        let source = MetricCore::from_json(g, &j.source)?;
        let target = MetricCore::from_json(g, &j.target)?;
        let bad = |m: &str| Error::InvalidArgument(format!("map json: {m}"));
        if source.edges().iter().chain(target.edges()).any(|e| e.length() != 1) {
            return Err(bad("cores must have unit edges"));
        }
        if j.assignment.len() != source.num_vertices() || j.edge_paths.len() != source.num_edges() {
            return Err(bad("table sizes do not match the source core"));
        }
        let walk = |start: usize, p: &[Step]| -> Result<usize> {
            let mut v = start;
            for &s in p {
                if s.edge >= target.num_edges() || target.step_source(s) != v {
                    return Err(bad("path is not a walk in the target"));
                }
                v = target.step_target(s);
            }
            Ok(v)
        };
        let mut ends = vec![0; source.num_vertices()];
        for a in &j.assignment {
            if a.vertex >= ends.len() {
                return Err(bad("vertex out of range"));
            }
            ends[a.vertex] = walk(target.root(), &a.path)?;
        }
        for (e, p) in source.edges().iter().zip(&j.edge_paths) {
            if walk(ends[e.from], p)? != ends[e.to] {
                return Err(bad("edge path ends at the wrong vertex"));
            }
        }
        let mut assignment = vec![Vec::new(); source.num_vertices()];
        for a in &j.assignment {
            assignment[a.vertex] = a.path.clone();
        }
        if j.original_vertices > source.num_vertices() {
            return Err(bad("vertex out of range"));
        }
        Ok(CoreMap {
            source,
            target,
            original_vertices: j.original_vertices,
            assignment,
            edge_paths: j.edge_paths.clone(),
            constants: j.constants.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentJson {
    pub vertex: usize,
    pub anchor: String,
    pub path: Vec<Step>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreMapJson {
    pub source: CoreJson,
    pub target: CoreJson,
    pub original_vertices: usize,
    pub assignment: Vec<AssignmentJson>,
    pub edge_paths: Vec<Vec<Step>>,
    pub constants: MapConstants,
}
