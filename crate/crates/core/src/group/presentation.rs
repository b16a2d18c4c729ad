use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::word::{Alphabet, Letter, Word};
use crate::error::{Error, Result};

/// Word-problem strategy attached to a presentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    /// Free group; no relators.
    Free,
    /// Small-cancellation presentation solved by Dehn's algorithm.
    Dehn,
    /// Ascending HNN extension of a free group, solved by Britton's lemma.
    Hnn,
}

impl BackendKind {
    pub fn keyword(self) -> &'static str {
        match self {
            BackendKind::Free => "free",
            BackendKind::Dehn => "dehn",
            BackendKind::Hnn => "hnn",
        }
    }
}

/// Generators, relators and backend as read from a presentation file.
///
/// File grammar, one directive per line (`#` starts a comment):
///
/// ```text
/// gens: a b t
/// backend: hnn
/// stable: t
/// rel: t a t' b' a'
/// ```
///
/// `stable:` is optional for `hnn`; when absent the stable letter is the first
/// letter shared by every relator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub alphabet: Alphabet,
    pub relators: Vec<Word>,
    pub backend: BackendKind,
    pub stable: Option<u16>,
}

impl Presentation {
    pub fn free(rank: usize) -> Self {
        Presentation { alphabet: Alphabet::standard(rank), relators: Vec::new(), backend: BackendKind::Free, stable: None }
    }

    /// The genus-`g` surface group `<a1,b1,...| [a1,b1]...[ag,bg]>` on the
    /// letters `a, b, c, d, ...`.
    pub fn surface(genus: usize) -> Self {
        let alphabet = Alphabet::standard(2 * genus);
        let mut rel = Vec::new();
        for i in 0..genus as u16 {
            let (x, y) = (2 * i, 2 * i + 1);
            rel.extend([Letter::pos(x), Letter::pos(y), Letter::neg(x), Letter::neg(y)]);
        }
        Presentation { alphabet, relators: vec![Word(rel)], backend: BackendKind::Dehn, stable: None }
    }

    /// `<a, b, t | t a t' = a b, t b t' = b a>`.
    pub fn hnn_example() -> Self {
        Self::parse("gens: a b t\nbackend: hnn\nrel: t a t' b' a'\nrel: t b t' a' b'\n").expect("static presentation")
    }

    /// `Z^2` as the ascending HNN extension of `<a>` by the identity.
    pub fn z2() -> Self {
        Self::parse("gens: a b\nbackend: hnn\nstable: b\nrel: b a b' a'\n").expect("static presentation")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut gens: Option<Vec<String>> = None;
        let mut backend: Option<BackendKind> = None;
        let mut stable: Option<String> = None;
        let mut rels: Vec<(usize, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| Error::Parse { line: line_no, message: format!("expected `key: value`, got {line:?}") })?;
            let value = value.trim();
            match key.trim() {
                "gens" => {
                    if gens.is_some() {
                        return Err(Error::Parse { line: line_no, message: "duplicate gens".into() });
                    }
                    gens = Some(value.split_whitespace().map(str::to_string).collect());
                }
                "backend" => {
                    backend = Some(match value {
                        "free" => BackendKind::Free,
                        "dehn" => BackendKind::Dehn,
                        "hnn" => BackendKind::Hnn,
                        other => {
                            return Err(Error::Parse { line: line_no, message: format!("unknown backend {other:?}") })
                        }
                    })
                }
                "stable" => stable = Some(value.to_string()),
                "rel" => rels.push((line_no, value.to_string())),
                other => return Err(Error::Parse { line: line_no, message: format!("unknown key {other:?}") }),
            }
        }
        let gens = gens.ok_or(Error::Parse { line: 0, message: "missing gens".into() })?;
        let alphabet = Alphabet::new(gens)?;
        let backend = backend.ok_or(Error::Parse { line: 0, message: "missing backend".into() })?;
        let relators = rels
            .iter()
            .map(|(line, r)| {
                alphabet.parse_word(r).map_err(|e| match e {
                    Error::UnknownGenerator(g) => Error::Parse { line: *line, message: format!("unknown generator {g:?}") },
                    e => e,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let stable = match stable {
            Some(s) => Some(alphabet.index_of(&s).ok_or(Error::UnknownGenerator(s))?),
            None => None,
        };
        let p = Presentation { alphabet, relators, backend, stable };
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "gens: {}", self.alphabet.names().join(" "));
        let _ = writeln!(s, "backend: {}", self.backend.keyword());
        if let Some(t) = self.stable {
            let _ = writeln!(s, "stable: {}", self.alphabet.name(t));
        }
        for r in &self.relators {
            let letters: Vec<String> = r
                .letters()
                .iter()
                .map(|l| format!("{}{}", self.alphabet.name(l.gen), if l.inverse { "'" } else { "" }))
                .collect();
            let _ = writeln!(s, "rel: {}", letters.join(" "));
        }
        s
    }

    fn validate(&self) -> Result<()> {
        match self.backend {
            BackendKind::Free if !self.relators.is_empty() => {
                Err(Error::InvalidPresentation("free backend requires no relators".into()))
            }
            BackendKind::Dehn => {
                if self.relators.iter().any(|r| r.is_empty() || !r.is_cyclically_reduced()) {
                    return Err(Error::InvalidPresentation("relators must be nonempty and cyclically reduced".into()));
                }
                Ok(())
            }
            BackendKind::Hnn => self.hnn_structure().map(|_| ()),
            _ => Ok(()),
        }
    }

    pub fn num_generators(&self) -> usize {
        self.alphabet.len()
    }

    /// All letters `a, a', b, b', ...` in shortlex order.
    pub fn letters(&self) -> Vec<Letter> {
        (0..2 * self.num_generators()).map(Letter::from_index).collect()
    }

    pub fn parse_word(&self, s: &str) -> Result<Word> {
        self.alphabet.parse_word(s)
    }

    pub fn parse_words(&self, s: &str) -> Result<Vec<Word>> {
        self.alphabet.parse_words(s)
    }

    pub fn format(&self, w: &Word) -> String {
        self.alphabet.format(w)
    }

    pub fn check_letters(&self, w: &Word) -> Result<()> {
        match w.max_gen() {
            Some(g) if g as usize >= self.num_generators() => Err(Error::UnknownGenerator(format!("#{g}"))),
            _ => Ok(()),
        }
    }

    /// Decodes an ascending-HNN presentation into its stable letter and the
    /// endomorphism of the base free group. Every relator must read
    /// `t x t' w'` with `x` a base generator and `w = phi(x)` a reduced base
    /// word; every base generator needs exactly one relator.
    pub fn hnn_structure(&self) -> Result<(u16, Endomorphism)> {
        let bad = |m: &str| Error::InvalidPresentation(m.to_string());
        let stable = match self.stable {
            Some(t) => t,
            None => {
                let first = self.relators.first().and_then(Word::first).ok_or_else(|| bad("hnn needs relators"))?;
                if first.inverse || !self.relators.iter().all(|r| r.first() == Some(first)) {
                    return Err(bad("cannot infer stable letter; add `stable:`"));
                }
                first.gen
            }
        };
        let n = self.num_generators();
        let mut images: Vec<Option<Word>> = vec![None; n];
        for r in &self.relators {
            let l = r.letters();
            if l.len() < 3 || l[0] != Letter::pos(stable) || l[2] != Letter::neg(stable) || l[1].inverse || l[1].gen == stable {
                return Err(bad("hnn relators must read t x t' phi(x)'"));
            }
            let image = Word(l[3..].to_vec()).inverse();
            if image.contains_gen(stable) || !image.is_reduced() || image.is_empty() {
                return Err(bad("phi(x) must be a nonempty reduced word over base generators"));
            }
            let slot = &mut images[l[1].gen as usize];
            if slot.is_some() {
                return Err(bad("duplicate relator for a base generator"));
            }
            *slot = Some(image);
        }
        let mut out = Vec::with_capacity(n);
        for (g, img) in images.into_iter().enumerate() {
            if g as u16 == stable {
                out.push(Word::empty());
            } else {
                out.push(img.ok_or_else(|| bad("every base generator needs a relator"))?);
            }
        }
        Ok((stable, Endomorphism { images: out, stable: Some(stable) }))
    }
}

/// Endomorphism of a free group given by generator images. The stable letter
/// of an HNN presentation, if any, has no image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Endomorphism {
    pub images: Vec<Word>,
    pub stable: Option<u16>,
}

impl Endomorphism {
    pub fn new(images: Vec<Word>) -> Self {
        Endomorphism { images, stable: None }
    }

    pub fn image(&self, l: Letter) -> Word {
        let w = &self.images[l.gen as usize];
        if l.inverse {
            w.inverse()
        } else {
            w.clone()
        }
    }

    pub fn apply_once(&self, w: &Word) -> Word {
        let mut out = Word::empty();
        for &l in w.letters() {
            for &m in self.image(l).letters() {
                out.push_reduced(m);
            }
        }
        out
    }

    /// The reduced word `phi^n(w)`.
    pub fn apply(&self, w: &Word, n: usize) -> Result<Word> {
        if let Some(t) = self.stable {
            if w.contains_gen(t) {
                return Err(Error::StableLetterInInput);
            }
        }
        let mut cur = w.free_reduce();
        for _ in 0..n {
            cur = self.apply_once(&cur);
        }
        Ok(cur)
    }

    /// Base generators, i.e. everything except the stable letter.
    pub fn base_generators(&self) -> Vec<u16> {
        (0..self.images.len() as u16).filter(|&g| Some(g) != self.stable).collect()
    }
}
