use serde::{Deserialize, Serialize};

use super::search::{window, SearchParams};
use super::MetricCore;
use crate::cayley::{gromov_product, CayleyBall, QiEstimate};
use crate::error::Result;
use crate::group::{Group, Word};
use crate::Rational;

/// Constants measured on a based core. Every entry is an observed value over
/// the finite windows examined, not a proven bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantLedger {
    /// Four-point constant of the Cayley ball.
    pub delta: Rational,
    /// Largest Hausdorff distance between a path in a component window and
    /// a geodesic with the same endpoints.
    pub m0: usize,
    /// `m0 + 2 delta + 1`.
    pub m1: Rational,
    /// Same as `m1` but with paths of the whole cover ball in place of the
    /// component windows.
    pub m2: Rational,
    /// Longest edge.
    pub l: usize,
    /// Quasi-isometry constants of the cover restricted to pairs at tree
    /// distance at most `l_list[n]`.
    pub k_list: Vec<Rational>,
    pub c_list: Vec<Rational>,
    pub l_list: Vec<usize>,
    /// Global constants from the cover ball.
    pub k: Rational,
    pub c: Rational,
    /// `k (2 m1 + delta + c + 1)`.
    pub m: Rational,
    /// Largest Gromov product `(x|y)_v` with `x` on an edge, `y` in the
    /// window on the side of its endpoint `v`.
    pub window_gromov_max: Rational,
    /// Whether `window_gromov_max < m1`.
    pub lemma_holds: bool,
}

/// Hausdorff distance between the prefix points of `path` and those of a
/// geodesic for the same element.
fn hausdorff_to_geodesic(g: &Group, path: &Word) -> Result<usize> {
    let geo = g.geodesic(path)?;
    let pts: Vec<Word> = (0..=path.len()).map(|k| g.key(&path.prefix(k))).collect();
    let gpts: Vec<Word> = (0..=geo.len()).map(|k| g.key(&geo.prefix(k))).collect();
    let mut d = vec![vec![0usize; gpts.len()]; pts.len()];
    for (i, p) in pts.iter().enumerate() {
        for (j, q) in gpts.iter().enumerate() {
            d[i][j] = g.distance(p, q)?;
        }
    }
    let one = d.iter().map(|row| *row.iter().min().unwrap()).max().unwrap_or(0);
    let two = (0..gpts.len()).map(|j| d.iter().map(|row| row[j]).min().unwrap()).max().unwrap_or(0);
    Ok(one.max(two))
}

impl ConstantLedger {
    /// Measures the ledger of `core`. Windows use `params.depth`; the cover
    /// ball and the Cayley ball for `delta` use `ball_radius`.
    pub fn measure(g: &Group, core: &MetricCore, params: SearchParams, ball_radius: usize) -> Result<Self> {
        let delta = CayleyBall::new(g, ball_radius)?.estimate_delta()?;
        let qi = core.measure_qi(g, ball_radius)?;
        let (k, c) = (qi.estimate.k, qi.estimate.c);
        let l = core.edges().iter().map(|e| e.length()).max().unwrap_or(0);

        let mut m0 = 0;
        let mut gromov_max = Rational::from_integer(0);
        for (e, edge) in core.edges().iter().enumerate() {
            // coordinates with the tail of the edge at 1
            let sides = [(edge.from, Word::empty()), (edge.to, edge.label.clone())];
            for (v, base) in sides {
                let (nodes, _) = window(g, core, v, Some(e), params.depth);
                for n in &nodes {
                    let (_, path) = n.path.walk(core, v, Some(e))?;
                    m0 = m0.max(hausdorff_to_geodesic(g, &path)?);
                    let y = g.mul(&base, &n.rel);
                    for i in 0..=edge.length() {
                        let x = edge.label.prefix(i);
                        let gp = gromov_product(g.distance(&x, &base)?, g.distance(&y, &base)?, g.distance(&x, &y)?);
                        gromov_max = gromov_max.max(gp);
                    }
                }
            }
        }

        let ball = core.universal_cover_ball(g, ball_radius)?;
        let mut m0_ball = 0;
        for (i, n) in ball.nodes().iter().enumerate() {
            if n.parent.is_none() {
                continue;
            }
            let mut letters = Vec::new();
            let mut cur = i;
            while let Some(p) = ball.nodes()[cur].parent {
                let step = g.normal_form(&ball.nodes()[p].anchor.inverse().concat(&ball.nodes()[cur].anchor))?;
                letters.extend(step.letters().iter().rev().copied());
                cur = p;
            }
            letters.reverse();
            m0_ball = m0_ball.max(hausdorff_to_geodesic(g, &Word(letters))?);
        }

        let twice = Rational::from_integer(2) * delta;
        let m1 = Rational::from_integer(m0 as i64) + twice + 1;
        let m2 = Rational::from_integer(m0_ball as i64) + twice + 1;
        let m = k * (Rational::from_integer(2) * m1 + delta + c + 1);

        let (mut k_list, mut c_list, mut l_list) = (Vec::new(), Vec::new(), Vec::new());
        for n in 1..=l {
            let local = qi.profile.iter().filter(|&&(t, _)| t <= n).map(|&(t, d)| (t, d, (t, d)));
            let est = QiEstimate::from_pairs(local, ball_radius);
            k_list.push(est.k);
            c_list.push(est.c);
            l_list.push(n);
        }

        Ok(ConstantLedger {
            delta,
            m0,
            m1,
            m2,
            l,
            k_list,
            c_list,
            l_list,
            k,
            c,
            m,
            window_gromov_max: gromov_max,
            lemma_holds: gromov_max < m1,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_folded_core() {
        let g = Group::free(2);
        let core = MetricCore::from_generators(&g, &g.parse_words("ab,ab'").unwrap()).unwrap();
        let core = core.fold_to_minimal(&g, SearchParams::default(), 100).unwrap().core;
        let led = ConstantLedger::measure(&g, &core, SearchParams::default(), 4).unwrap();
        assert_eq!(led.delta, Rational::from_integer(0));
        assert_eq!(led.m0, 0);
        assert_eq!(led.m1, Rational::from_integer(1));
        assert_eq!((led.k, led.c), (Rational::from_integer(1), Rational::from_integer(0)));
        assert_eq!(led.m, Rational::from_integer(3));
        assert!(led.lemma_holds);
        assert_eq!(led.k_list.len(), led.l);
    }

    #[test]
    fn unfolded_rose_has_detours() {
        let g = Group::free(2);
        let core = MetricCore::from_generators(&g, &g.parse_words("ab,ab'").unwrap()).unwrap();
        let led = ConstantLedger::measure(&g, &core, SearchParams::default(), 4).unwrap();
        assert!(led.m2 > led.m1 || led.m0 > 0);
        assert_eq!(led.m1, Rational::from_integer(led.m0 as i64) + Rational::from_integer(2) * led.delta + 1);
    }
}
