use std::sync::Mutex;

use super::presentation::Endomorphism;
use super::word::{Letter, Word};
use crate::error::{Error, Result};
use crate::stallings::TrackedGraph;

/// Britton normal forms `t^-i u t^j` for an ascending HNN extension of a free
/// group by an injective endomorphism `phi`, using `t x t' = phi(x)`.
#[derive(Debug)]
pub struct HnnSolver {
    stable: u16,
    phi: Endomorphism,
    base: Vec<u16>,
    image: TrackedGraph,
    /// `powers[j][g] = phi^j(g)` for base generators.
    powers: Mutex<Vec<Vec<Word>>>,
}

/// Decomposition `t^-i u t^j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BrittonForm {
    pub left: usize,
    pub core: Word,
    pub right: usize,
}

impl HnnSolver {
    pub fn new(stable: u16, phi: Endomorphism) -> Result<Self> {
        let base = phi.base_generators();
        let images: Vec<Word> = base.iter().map(|&g| phi.images[g as usize].clone()).collect();
        let image = TrackedGraph::new(&images);
        if !image.is_injective() {
            return Err(Error::InvalidPresentation("endomorphism is not injective".into()));
        }
        let identity: Vec<Word> = (0..phi.images.len() as u16).map(|g| Word::letter(Letter::pos(g))).collect();
        Ok(HnnSolver { stable, phi, base, image, powers: Mutex::new(vec![identity]) })
    }

    pub fn stable(&self) -> u16 {
        self.stable
    }

    pub fn endomorphism(&self) -> &Endomorphism {
        &self.phi
    }

    fn phi_power(&self, l: Letter, j: usize) -> Word {
        let mut powers = self.powers.lock().unwrap();
        while powers.len() <= j {
            let last = powers.last().unwrap();
            let next = last.iter().map(|w| self.phi.apply_once(w)).collect();
            powers.push(next);
        }
        let w = &powers[j][l.gen as usize];
        if l.inverse {
            w.inverse()
        } else {
            w.clone()
        }
    }

    /// `phi^-1(u)` when `u` lies in the image of `phi`.
    pub fn preimage(&self, u: &Word) -> Option<Word> {
        let y = self.image.express(u)?;
        Some(Word(y.letters().iter().map(|l| Letter::new(self.base[l.gen as usize], l.inverse)).collect()))
    }

    pub fn britton(&self, w: &Word) -> BrittonForm {
        let (mut i, mut u, mut j) = (0usize, Word::empty(), 0usize);
        for &l in w.letters() {
            if l.gen == self.stable {
                if !l.inverse {
                    j += 1;
                } else if j > 0 {
                    j -= 1;
                } else {
                    // u t' = t' phi(u)
                    i += 1;
                    u = self.phi.apply_once(&u);
                }
            } else {
                // t^j x = phi^j(x) t^j
                for &m in self.phi_power(l, j).letters() {
                    u.push_reduced(m);
                }
            }
        }
        // t^-i phi(v) t^j = t^-(i-1) v t^(j-1)
        while i > 0 && j > 0 {
            match self.preimage(&u) {
                Some(v) => {
                    u = v;
                    i -= 1;
                    j -= 1;
                }
                None => break,
            }
        }
        BrittonForm { left: i, core: u, right: j }
    }

    pub fn normal_form(&self, w: &Word) -> Word {
        let f = self.britton(w);
        let mut out = vec![Letter::neg(self.stable); f.left];
        out.extend_from_slice(f.core.letters());
        out.extend(std::iter::repeat_n(Letter::pos(self.stable), f.right));
        Word(out)
    }
}
