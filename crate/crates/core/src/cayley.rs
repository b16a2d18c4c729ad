//! Finite balls in Cayley graphs and the measurements taken on them.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Group, Letter, Word};
use crate::Rational;

/// The ball of radius `R` about the identity. Vertices are shortlex-least
/// geodesic words; distances are group distances, not in-ball path lengths.
#[derive(Debug)]
pub struct CayleyBall<'g> {
    group: &'g Group,
    radius: usize,
    vertices: Vec<Word>,
    index: HashMap<Word, usize>,
    edges: Vec<(usize, usize, u16)>,
    matrix: OnceLock<Vec<u16>>,
}

impl<'g> CayleyBall<'g> {
    pub fn new(group: &'g Group, radius: usize) -> Result<Self> {
        let vertices = group.sphere_reps(radius)?;
        let index: HashMap<Word, usize> = vertices.iter().enumerate().map(|(i, w)| (group.key(w), i)).collect();
        let ngens = group.presentation().num_generators() as u16;
        let mut edges = Vec::new();
        for (i, w) in vertices.iter().enumerate() {
            for g in 0..ngens {
                if let Some(&j) = index.get(&group.mul(w, &Word::letter(Letter::pos(g)))) {
                    edges.push((i, j, g));
                }
            }
        }
        Ok(CayleyBall { group, radius, vertices, index, edges, matrix: OnceLock::new() })
    }

    pub fn group(&self) -> &'g Group {
        self.group
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Word] {
        &self.vertices
    }

    /// Edges `(from, to, generator)` with `to = from * generator`.
    pub fn edges(&self) -> &[(usize, usize, u16)] {
        &self.edges
    }

    pub fn position(&self, w: &Word) -> Option<usize> {
        self.index.get(&self.group.key(w)).copied()
    }

    fn locate(&self, w: &Word) -> Result<usize> {
        self.position(w).ok_or_else(|| {
            let s = self.group.format(w);
            Error::DistanceUnknown(s.clone(), s)
        })
    }

    /// Distance between two ball vertices by index.
    pub fn dist(&self, i: usize, j: usize) -> Result<usize> {
        if let Some(m) = self.matrix.get() {
            return Ok(m[i * self.len() + j] as usize);
        }
        self.group.distance(&self.vertices[i], &self.vertices[j])
    }

    /// Distance between two elements, both of which must lie in the ball.
    pub fn distance(&self, x: &Word, y: &Word) -> Result<usize> {
        let (i, j) = (self.locate(x)?, self.locate(y)?);
        self.dist(i, j)
    }

    /// All-pairs distance matrix in row-major order.
    pub fn distance_matrix(&self) -> Result<&[u16]> {
        if let Some(m) = self.matrix.get() {
            return Ok(m);
        }
        let n = self.len();
        let rows: Vec<Result<Vec<u16>>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = vec![0u16; n];
                for j in i + 1..n {
                    row[j] = self.group.distance(&self.vertices[i], &self.vertices[j])? as u16;
                }
                Ok(row)
            })
            .collect();
        let mut m = vec![0u16; n * n];
        for (i, row) in rows.into_iter().enumerate() {
            let row = row?;
            for j in i + 1..n {
                m[i * n + j] = row[j];
                m[j * n + i] = row[j];
            }
        }
        Ok(self.matrix.get_or_init(|| m))
    }

    /// `(x|y)_z`.
    pub fn gromov_product(&self, x: &Word, y: &Word, z: &Word) -> Result<Rational> {
        let (x, y, z) = (self.locate(x)?, self.locate(y)?, self.locate(z)?);
        Ok(gromov_product(self.dist(x, z)?, self.dist(y, z)?, self.dist(x, y)?))
    }

    /// Smallest `delta` for which the four-point condition holds on every
    /// quadruple of ball vertices.
    pub fn estimate_delta(&self) -> Result<Rational> {
        let n = self.len();
        let m = self.distance_matrix()?;
        let twice = (0..n).into_par_iter().map(|i| four_point_from(m, n, i)).max().unwrap_or(0);
        Ok(Rational::new(twice as i64, 2))
    }

    fn path_indices(&self, path: &[Word]) -> Result<Vec<usize>> {
        let idx = path.iter().map(|w| self.locate(w)).collect::<Result<Vec<_>>>()?;
        for (k, pair) in idx.windows(2).enumerate() {
            if self.dist(pair[0], pair[1])? != 1 {
                return Err(Error::InvalidArgument(format!("path vertices {k} and {} are not adjacent", k + 1)));
            }
        }
        Ok(idx)
    }

    /// Checks every subpath of length at most `l`; returns the first violating
    /// index pair, or `None` when the path is an `l`-local `(k, c)`-quasigeodesic.
    pub fn is_local_quasigeodesic(&self, path: &[Word], l: usize, k: Rational, c: Rational) -> Result<Option<(usize, usize)>> {
        if l == 0 || k < Rational::from_integer(1) {
            return Err(Error::InvalidArgument("need L > 0 and K >= 1".into()));
        }
        let idx = self.path_indices(path)?;
        for i in 0..idx.len() {
            for j in i + 1..idx.len().min(i + l + 1) {
                let d = Rational::from_integer(self.dist(idx[i], idx[j])? as i64);
                let s = Rational::from_integer((j - i) as i64);
                if d < s / k - c || d > k * s + c {
                    return Ok(Some((i, j)));
                }
            }
        }
        Ok(None)
    }

    pub fn quasigeodesic_constants(&self, path: &[Word]) -> Result<QiEstimate> {
        let idx = self.path_indices(path)?;
        let mut pairs = Vec::new();
        for i in 0..idx.len() {
            for j in i + 1..idx.len() {
                pairs.push((j - i, self.dist(idx[i], idx[j])?, (i, j)));
            }
        }
        Ok(QiEstimate::from_pairs(pairs.into_iter(), self.radius))
    }

    pub fn to_json(&self, with_distances: bool) -> Result<BallJson> {
        let distances = if with_distances {
            let n = self.len();
            let m = self.distance_matrix()?;
            Some(m.chunks(n.max(1)).map(|r| r.to_vec()).collect())
        } else {
            None
        };
        Ok(BallJson {
            radius: self.radius,
            vertices: self.vertices.iter().map(|w| self.group.format(w)).collect(),
            edges: self
                .edges
                .iter()
                .map(|&(from, to, g)| BallEdge { from, to, generator: self.group.alphabet().name(g).to_string() })
                .collect(),
            distances,
        })
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph ball {\n");
        for (i, w) in self.vertices.iter().enumerate() {
            let _ = writeln!(s, "  {i} [label=\"{}\"];", self.group.format(w));
        }
        for &(a, b, g) in &self.edges {
            let _ = writeln!(s, "  {a} -> {b} [label=\"{}\"];", self.group.alphabet().name(g));
        }
        s.push_str("}\n");
        s
    }
}

/// `(x|y)_z` from the three distances `d(x,z)`, `d(y,z)`, `d(x,y)`.
pub fn gromov_product(dxz: usize, dyz: usize, dxy: usize) -> Rational {
    Rational::new(dxz as i64 + dyz as i64 - dxy as i64, 2)
}

/// Twice the four-point defect of the quadruple: the largest of the three
/// pair sums minus the middle one.
#[inline]
fn defect(s1: u16, s2: u16, s3: u16) -> u16 {
    let hi = s1.max(s2).max(s3);
    let lo = s1.min(s2).min(s3);
    let mid = s1 + s2 + s3 - hi - lo;
    hi - mid
}

/// Max over quadruples `i < j < k < l` with the given `i`.
fn four_point_from(m: &[u16], n: usize, i: usize) -> u16 {
    let row = |r: usize| &m[r * n..(r + 1) * n];
    let ri = row(i);
    let mut best = 0u16;
    for j in i + 1..n {
        let rj = row(j);
        let dij = ri[j];
        for k in j + 1..n {
            let rk = row(k);
            let (dik, djk) = (ri[k], rj[k]);
            let tail = k + 1;
            let b = ri[tail..]
                .iter()
                .zip(&rj[tail..])
                .zip(&rk[tail..])
                .map(|((&dil, &djl), &dkl)| defect(dij + dkl, dik + djl, djk + dil))
                .fold(0u16, u16::max);
            best = best.max(b);
        }
    }
    best
}

/// Quasi-isometry constants: `(1/K) d - C <= d' <= K d + C` over a sample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QiEstimate {
    pub k: Rational,
    pub c: Rational,
    pub radius: usize,
    /// Index pair (or sample pair) realizing `c`, if any constraint is tight.
    pub witness: Option<(usize, usize)>,
}

impl QiEstimate {
    /// `K` is the best multiplicative constant over pairs with `d' > 0`, and `C`
    /// the smallest additive constant that makes every pair satisfy the bounds
    /// at that `K`. Pairs are `(d, d', witness)`.
    pub fn from_pairs(pairs: impl Iterator<Item = (usize, usize, (usize, usize))> + Clone, radius: usize) -> Self {
        let one = Rational::from_integer(1);
        let mut k = one;
        for (d, dx, _) in pairs.clone() {
            if dx > 0 {
                k = k.max(Rational::new(d as i64, dx as i64));
                if d > 0 {
                    k = k.max(Rational::new(dx as i64, d as i64));
                }
            }
        }
        let mut c = Rational::from_integer(0);
        let mut witness = None;
        for (d, dx, w) in pairs {
            let (d, dx) = (Rational::from_integer(d as i64), Rational::from_integer(dx as i64));
            let need = (d / k - dx).max(dx - k * d);
            if need > c {
                c = need;
                witness = Some(w);
            }
        }
        QiEstimate { k, c, radius, witness }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallEdge {
    pub from: usize,
    pub to: usize,
    pub generator: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallJson {
    pub radius: usize,
    pub vertices: Vec<String>,
    pub edges: Vec<BallEdge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<Vec<u16>>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Presentation;
    use std::collections::VecDeque;

    fn in_ball_bfs(ball: &CayleyBall, s: usize) -> Vec<Option<usize>> {
        let mut d = vec![None; ball.len()];
        d[s] = Some(0);
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &(a, b, _) in ball.edges() {
                for (x, y) in [(a, b), (b, a)] {
                    if x == v && d[y].is_none() {
                        d[y] = Some(d[v].unwrap() + 1);
                        q.push_back(y);
                    }
                }
            }
        }
        d
    }

    #[test]
    fn free_ball_sizes() {
        let f = Group::free(2);
        let b = CayleyBall::new(&f, 1).unwrap();
        assert_eq!((b.len(), b.edges().len()), (5, 4));
        for r in 0..=6 {
            let n = 3usize.pow(r as u32);
            assert_eq!(CayleyBall::new(&f, r).unwrap().len(), 2 * n - 1);
        }
    }

    #[test]
    fn z3_ball() {
        let z3 = Group::new(Presentation::parse("gens: a\nbackend: dehn\nrel: a a a\n").unwrap()).unwrap();
        assert_eq!(CayleyBall::new(&z3, 1).unwrap().len(), 3);
        assert_eq!(CayleyBall::new(&z3, 3).unwrap().len(), 3);
    }

    #[test]
    fn distances_match_in_ball_bfs() {
        for g in [Group::free(2), Group::new(Presentation::z2()).unwrap()] {
            let b = CayleyBall::new(&g, 3).unwrap();
            for i in 0..b.len() {
                let bfs = in_ball_bfs(&b, i);
                for j in 0..b.len() {
                    assert_eq!(bfs[j], Some(b.dist(i, j).unwrap()));
                }
            }
        }
    }

    #[test]
    fn gromov_products() {
        assert_eq!(gromov_product(5, 7, 8), Rational::from_integer(2));
        let f = Group::free(2);
        let b = CayleyBall::new(&f, 2).unwrap();
        let w = |s| f.parse_word(s).unwrap();
        assert_eq!(b.gromov_product(&w("ab"), &w("ab'"), &Word::empty()).unwrap(), Rational::from_integer(1));
        assert_eq!(b.gromov_product(&w("ab"), &w("b"), &w("ab")).unwrap(), Rational::from_integer(0));
        assert!(matches!(b.gromov_product(&w("aaa"), &w("b"), &w("a")), Err(Error::DistanceUnknown(..))));
    }

    #[test]
    fn delta_values() {
        let f = Group::free(2);
        assert_eq!(CayleyBall::new(&f, 3).unwrap().estimate_delta().unwrap(), Rational::from_integer(0));
        let z2 = Group::new(Presentation::z2()).unwrap();
        let d2 = CayleyBall::new(&z2, 2).unwrap().estimate_delta().unwrap();
        let d4 = CayleyBall::new(&z2, 4).unwrap().estimate_delta().unwrap();
        assert!(d4 >= Rational::from_integer(1));
        assert!(d4 > d2);
    }

    #[test]
    fn local_quasigeodesic_checks() {
        let f = Group::free(2);
        let b = CayleyBall::new(&f, 3).unwrap();
        let w = |s| f.parse_word(s).unwrap();
        let one = Rational::from_integer(1);
        let zero = Rational::from_integer(0);
        let back = [Word::empty(), w("a"), Word::empty()];
        assert_eq!(b.is_local_quasigeodesic(&back, 2, one, zero).unwrap(), Some((0, 2)));
        let geo = [Word::empty(), w("a"), w("ab"), w("abb")];
        assert_eq!(b.is_local_quasigeodesic(&geo, 3, one, zero).unwrap(), None);
        let q = b.quasigeodesic_constants(&geo).unwrap();
        assert_eq!((q.k, q.c), (one, zero));
        let q = b.quasigeodesic_constants(&back).unwrap();
        assert_eq!(q.k, one);
        assert!(q.c >= Rational::from_integer(2));
        assert!(b.is_local_quasigeodesic(&[Word::empty(), w("ab")], 2, one, zero).is_err());
    }

    #[test]
    fn z2_spiral_is_distorted() {
        let z2 = Group::new(Presentation::z2()).unwrap();
        let b = CayleyBall::new(&z2, 4).unwrap();
        let mut path = vec![z2.parse_word("a").unwrap()];
        for l in ["b", "a'", "a'", "b'", "b'", "a", "a", "b"] {
            let next = path.last().unwrap().concat(&z2.parse_word(l).unwrap());
            path.push(next);
        }
        let q = b.quasigeodesic_constants(&path).unwrap();
        assert!(q.k >= Rational::from_integer(2));
    }

    #[test]
    fn json_and_dot() {
        let f = Group::free(2);
        let b = CayleyBall::new(&f, 1).unwrap();
        let j = b.to_json(true).unwrap();
        let back: BallJson = serde_json::from_str(&serde_json::to_string(&j).unwrap()).unwrap();
        assert_eq!(back, j);
        assert_eq!(j.vertices, vec!["1", "a", "a'", "b", "b'"]);
        assert!(b.to_dot().contains("0 -> 1 [label=\"a\"]"));
    }
}
