use serde::{Deserialize, Serialize};

use super::{CoreEdge, MetricCore};
use crate::error::{Error, Result};
use crate::group::{Group, Word};

/// Traversal of an edge in a given direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Step {
    pub edge: usize,
    pub forward: bool,
}

impl Step {
    pub fn reversed(self) -> Step {
        Step { edge: self.edge, forward: !self.forward }
    }
}

/// A vertex, or the point `offset` letters along an edge from its tail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Point {
    Vertex(usize),
    Interior { edge: usize, offset: usize },
}

/// A path starting at a vertex: whole steps, then optionally part of one
/// more edge (`k` letters along the step's direction).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathSpec {
    pub steps: Vec<Step>,
    pub tail: Option<(Step, usize)>,
}

impl PathSpec {
    /// Follows the path from `start`, refusing to cross `avoid`. Returns the
    /// end point and the (unreduced) product of labels read.
    pub fn walk(&self, core: &MetricCore, start: usize, avoid: Option<usize>) -> Result<(Point, Word)> {
        let mut v = start;
        let mut word = Word::empty();
        let check = |s: Step, v: usize| -> Result<()> {
            if s.edge >= core.edges.len() || Some(s.edge) == avoid || core.step_source(s) != v {
                return Err(Error::MoveInvalid(format!("path step over edge {} does not continue from vertex {v}", s.edge)));
            }
            Ok(())
        };
        for &s in &self.steps {
            check(s, v)?;
            word = word.concat(&core.step_label(s));
            v = core.step_target(s);
        }
        match self.tail {
            None => Ok((Point::Vertex(v), word)),
            Some((s, k)) => {
                check(s, v)?;
                let len = core.edges[s.edge].length();
                if k == 0 || k >= len {
                    return Err(Error::MoveInvalid(format!("partial step of {k} along an edge of length {len}")));
                }
                word = word.concat(&core.step_label(s).prefix(k));
                let offset = if s.forward { k } else { len - k };
                Ok((Point::Interior { edge: s.edge, offset }, word))
            }
        }
    }

    pub fn reversed_steps(&self) -> PathSpec {
        debug_assert!(self.tail.is_none());
        PathSpec { steps: self.steps.iter().rev().map(|s| s.reversed()).collect(), tail: None }
    }
}

/// A simple folding of one edge `e`, oriented from `v1 = tail(e)` to
/// `v2 = head(e)`. Paths labelled `path1` start at `v1` and `path2` at `v2`;
/// neither crosses `e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FoldMove {
    /// Delete `e` and glue the endpoints of the two paths, which have the same
    /// image in the Cayley graph.
    IdentifyVertices { edge: usize, path1: PathSpec, path2: PathSpec },
    /// Replace `e` by a shorter edge between the endpoints of the two paths.
    ReplaceEdge { edge: usize, path1: PathSpec, path2: PathSpec, label: Word },
    /// Replace the non-separating edge `e` by a stem of length `stem` along
    /// `e` and a loop labelled `loop_label` at its end. When `reversed` the
    /// stem starts at `v2`. `return_path` closes `e` into a loop.
    AddBalloon { edge: usize, reversed: bool, return_path: PathSpec, stem: usize, loop_label: Word },
    /// Delete `e`: the loop formed with the two paths maps to the identity.
    DiscardRedundantEdge { edge: usize, path1: PathSpec, path2: PathSpec },
}

impl FoldMove {
    pub fn edge(&self) -> usize {
        match self {
            FoldMove::IdentifyVertices { edge, .. }
            | FoldMove::ReplaceEdge { edge, .. }
            | FoldMove::AddBalloon { edge, .. }
            | FoldMove::DiscardRedundantEdge { edge, .. } => *edge,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FoldMove::IdentifyVertices { .. } => "identify-vertices",
            FoldMove::ReplaceEdge { .. } => "replace-edge",
            FoldMove::AddBalloon { .. } => "add-balloon",
            FoldMove::DiscardRedundantEdge { .. } => "discard-redundant-edge",
        }
    }

    pub fn to_json(&self, g: &Group) -> MoveJson {
        let (p1, p2, label, stem, reversed) = match self {
            FoldMove::IdentifyVertices { path1, path2, .. } | FoldMove::DiscardRedundantEdge { path1, path2, .. } => {
                (Some(path1.clone()), Some(path2.clone()), None, None, None)
            }
            FoldMove::ReplaceEdge { path1, path2, label, .. } => {
                (Some(path1.clone()), Some(path2.clone()), Some(g.format(label)), None, None)
            }
            FoldMove::AddBalloon { reversed, return_path, stem, loop_label, .. } => {
                (Some(return_path.clone()), None, Some(g.format(loop_label)), Some(*stem), Some(*reversed))
            }
        };
        MoveJson { kind: self.kind().to_string(), edge: self.edge(), path1: p1, path2: p2, label, stem, reversed }
    }

    pub fn from_json(g: &Group, j: &MoveJson) -> Result<Self> {
        let path = |p: &Option<PathSpec>| p.clone().ok_or_else(|| Error::InvalidArgument(format!("{} move needs paths", j.kind)));
        let label = || -> Result<Word> {
            let s = j.label.as_deref().ok_or_else(|| Error::InvalidArgument(format!("{} move needs a label", j.kind)))?;
            g.parse_word(s)
        };
        let edge = j.edge;
        Ok(match j.kind.as_str() {
            "identify-vertices" => FoldMove::IdentifyVertices { edge, path1: path(&j.path1)?, path2: path(&j.path2)? },
            "discard-redundant-edge" => FoldMove::DiscardRedundantEdge { edge, path1: path(&j.path1)?, path2: path(&j.path2)? },
            "replace-edge" => FoldMove::ReplaceEdge { edge, path1: path(&j.path1)?, path2: path(&j.path2)?, label: label()? },
            "add-balloon" => FoldMove::AddBalloon {
                edge,
                reversed: j.reversed.unwrap_or(false),
                return_path: path(&j.path1)?,
                stem: j.stem.ok_or_else(|| Error::InvalidArgument("balloon needs a stem length".into()))?,
                loop_label: label()?,
            },
            other => return Err(Error::InvalidArgument(format!("unknown move kind {other:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveJson {
    pub kind: String,
    pub edge: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path1: Option<PathSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path2: Option<PathSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reversed: Option<bool>,
}

impl MetricCore {
    /// Subdivides as needed so both points become vertices.
    fn realize_points(&mut self, g: &Group, p1: Point, p2: Point) -> Result<(usize, usize)> {
        let x1 = match p1 {
            Point::Vertex(v) => v,
            Point::Interior { edge, offset } => self.subdivide(g, edge, offset)?,
        };
        let p2 = match (p1, p2) {
            (Point::Interior { edge: f1, offset: k1 }, Point::Interior { edge: f2, offset: k2 }) if f1 == f2 => {
                if k2 > k1 {
                    Point::Interior { edge: self.edges.len() - 1, offset: k2 - k1 }
                } else if k2 == k1 {
                    Point::Vertex(x1)
                } else {
                    p2
                }
            }
            _ => p2,
        };
        let x2 = match p2 {
            Point::Vertex(v) => v,
            Point::Interior { edge, offset } => self.subdivide(g, edge, offset)?,
        };
        Ok((x1, x2))
    }

    /// Applies a move after checking it against the group: the claimed
    /// coincidences must hold and the size must strictly drop.
    pub fn apply_move(&self, g: &Group, mv: &FoldMove) -> Result<MetricCore> {
        let e = mv.edge();
        let edge = self.edges.get(e).ok_or_else(|| Error::MoveInvalid(format!("no edge {e}")))?.clone();
        let lambda = edge.label.clone();
        match mv {
            FoldMove::IdentifyVertices { path1, path2, .. } | FoldMove::DiscardRedundantEdge { path1, path2, .. } => {
                let (p1, w1) = path1.walk(self, edge.from, Some(e))?;
                let (p2, w2) = path2.walk(self, edge.to, Some(e))?;
                if !g.equal(&w1, &lambda.concat(&w2)) {
                    return Err(Error::MoveInvalid("the two path ends have different images".into()));
                }
                let mut c = self.clone();
                if let FoldMove::DiscardRedundantEdge { .. } = mv {
                    if p1 != p2 {
                        return Err(Error::MoveInvalid("path ends differ; identify them instead".into()));
                    }
                    c.remove_edge(e);
                    return Ok(c);
                }
                if p1 == p2 {
                    return Err(Error::MoveInvalid("path ends coincide; the edge is redundant".into()));
                }
                let (x1, x2) = c.realize_points(g, p1, p2)?;
                c.remove_edge(e);
                c.merge_vertices(x1, x2);
                Ok(c)
            }
            FoldMove::ReplaceEdge { path1, path2, label, .. } => {
                let (p1, w1) = path1.walk(self, edge.from, Some(e))?;
                let (p2, w2) = path2.walk(self, edge.to, Some(e))?;
                let target = w1.inverse().concat(&lambda).concat(&w2);
                if !g.equal(label, &target) {
                    return Err(Error::MoveInvalid("replacement label does not connect the path ends".into()));
                }
                let geo = g.geodesic(&target)?;
                if geo.is_empty() {
                    return Err(Error::MoveInvalid("replacement has length 0; identify instead".into()));
                }
                if geo.len() >= edge.length() {
                    return Err(Error::MoveInvalid(format!("replacement length {} is not below {}", geo.len(), edge.length())));
                }
                let mut c = self.clone();
                let (x1, x2) = c.realize_points(g, p1, p2)?;
                c.remove_edge(e);
                c.edges.push(CoreEdge { from: x1, to: x2, label: geo });
                Ok(c)
            }
            FoldMove::AddBalloon { reversed, return_path, stem, loop_label, .. } => {
                if self.is_separating(e) {
                    return Err(Error::MoveInvalid("balloon requires a non-separating edge".into()));
                }
                let (start, end, lam) =
                    if *reversed { (edge.to, edge.from, lambda.inverse()) } else { (edge.from, edge.to, lambda.clone()) };
                let (p, w) = return_path.walk(self, end, Some(e))?;
                if p != super::Point::Vertex(start) {
                    return Err(Error::MoveInvalid("return path does not close the loop".into()));
                }
                if *stem == 0 || *stem >= edge.length() {
                    return Err(Error::MoveInvalid(format!("stem length {stem} must lie strictly inside the edge")));
                }
                let h = lam.concat(&w);
                let pre = lam.prefix(*stem);
                let conj = pre.inverse().concat(&h).concat(&pre);
                if !g.equal(loop_label, &conj) {
                    return Err(Error::MoveInvalid("loop label is not the conjugated holonomy".into()));
                }
                let geo = g.geodesic(&conj)?;
                if geo.is_empty() {
                    return Err(Error::MoveInvalid("holonomy is trivial".into()));
                }
                if stem + geo.len() >= edge.length() {
                    return Err(Error::MoveInvalid(format!(
                        "balloon of size {} does not shorten an edge of length {}",
                        stem + geo.len(),
                        edge.length()
                    )));
                }
                let mut c = self.clone();
                c.remove_edge(e);
                c.anchors.push(g.mul(&c.anchors[start], &pre));
                let w = c.anchors.len() - 1;
                c.edges.push(CoreEdge { from: start, to: w, label: pre });
                c.edges.push(CoreEdge { from: w, to: w, label: geo });
                Ok(c)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Presentation;

    fn step(edge: usize, forward: bool) -> Step {
        Step { edge, forward }
    }

    #[test]
    fn identify_interior_points_of_rose() {
        let g = Group::free(2);
        let c = MetricCore::from_generators(&g, &g.parse_words("ab,ab'").unwrap()).unwrap();
        // edges: 0: * -a-> v1, 1: v1 -b-> *, 2: * -a-> v2, 3: v2 -b'-> *
        assert_eq!(c.size(), 4);
        let mv = FoldMove::IdentifyVertices { edge: 0, path1: PathSpec { steps: vec![step(2, true)], tail: None }, path2: PathSpec::default() };
        let d = c.apply_move(&g, &mv).unwrap();
        assert_eq!(d.size(), 3);
        assert_eq!(d.rank(), 2);
        assert!(d.immersion_violations().is_empty());
        let bad = FoldMove::IdentifyVertices { edge: 0, path1: PathSpec::default(), path2: PathSpec::default() };
        assert!(matches!(c.apply_move(&g, &bad), Err(Error::MoveInvalid(_))));
    }

    #[test]
    fn replace_edge_shortens() {
        // A length-3 edge from * to v whose label equals a path of length 1.
        let g = Group::free(2);
        let w = |s| g.parse_word(s).unwrap();
        let c = MetricCore::from_parts(
            &g,
            vec![Word::empty(), w("a")],
            vec![
                CoreEdge { from: 0, to: 1, label: w("a") },
                CoreEdge { from: 1, to: 1, label: w("b") },
                CoreEdge { from: 0, to: 1, label: w("a b a' b' a") },
            ],
            Some(0),
        )
        .unwrap();
        // path1 from *: take edge 0 to v, then loop b; path2 from v: empty.
        let p1 = PathSpec { steps: vec![step(0, true), step(1, true)], tail: None };
        let mv = FoldMove::ReplaceEdge { edge: 2, path1: p1.clone(), path2: PathSpec::default(), label: w("a' b'") };
        // target: (ab)^-1 (a b a' b' a) = a' b' a
        assert!(c.apply_move(&g, &mv).is_err());
        let mv = FoldMove::ReplaceEdge { edge: 2, path1: p1, path2: PathSpec::default(), label: w("b' a' a b a' b' a") };
        let d = c.apply_move(&g, &mv).unwrap();
        assert_eq!(c.size() - d.size(), 5 - 3);
        assert_eq!(d.rank(), c.rank());
    }

    #[test]
    fn balloon_validation() {
        let g = Group::free(2);
        let w = |s| g.parse_word(s).unwrap();
        // Single loop labelled a b a' : holonomy b conjugated by a.
        let c = MetricCore::from_parts(&g, vec![Word::empty()], vec![CoreEdge { from: 0, to: 0, label: w("a b a'") }], Some(0)).unwrap();
        let too_big = FoldMove::AddBalloon { edge: 0, reversed: false, return_path: PathSpec::default(), stem: 2, loop_label: w("b'") };
        assert!(c.apply_move(&g, &too_big).is_err());
        let ok = FoldMove::AddBalloon { edge: 0, reversed: false, return_path: PathSpec::default(), stem: 1, loop_label: w("b") };
        let d = c.apply_move(&g, &ok).unwrap();
        assert_eq!(d.size(), 2);
        assert_eq!(d.rank(), 1);
        let sep = MetricCore::from_parts(&g, vec![Word::empty(), w("a b")], vec![CoreEdge { from: 0, to: 1, label: w("a b") }], Some(0)).unwrap();
        let mv = FoldMove::AddBalloon { edge: 0, reversed: false, return_path: PathSpec::default(), stem: 1, loop_label: w("b") };
        assert!(matches!(sep.apply_move(&g, &mv), Err(Error::MoveInvalid(_))));
    }

    #[test]
    fn discard_redundant_edge() {
        let g = Group::free(2);
        let c = MetricCore::from_generators(&g, &g.parse_words("a,a").unwrap()).unwrap();
        let mv = FoldMove::DiscardRedundantEdge { edge: 1, path1: PathSpec { steps: vec![step(0, true)], tail: None }, path2: PathSpec::default() };
        let d = c.apply_move(&g, &mv).unwrap();
        assert_eq!((d.size(), d.rank()), (1, 1));
    }

    #[test]
    fn move_json_round_trip() {
        let g = Group::new(Presentation::surface(2)).unwrap();
        let mv = FoldMove::AddBalloon { edge: 3, reversed: true, return_path: PathSpec { steps: vec![step(1, false)], tail: None }, stem: 2, loop_label: g.parse_word("c d").unwrap() };
        let j = mv.to_json(&g);
        let text = serde_json::to_string(&j).unwrap();
        assert_eq!(FoldMove::from_json(&g, &serde_json::from_str(&text).unwrap()).unwrap(), mv);
    }
}
