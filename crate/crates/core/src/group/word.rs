use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// A generator or its inverse. Generators are indices into a presentation's
/// generator list.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Letter {
    pub gen: u16,
    pub inverse: bool,
}

impl Letter {
    pub const fn new(gen: u16, inverse: bool) -> Self {
        Letter { gen, inverse }
    }

    pub const fn pos(gen: u16) -> Self {
        Letter { gen, inverse: false }
    }

    pub const fn neg(gen: u16) -> Self {
        Letter { gen, inverse: true }
    }

    #[inline]
    pub fn inv(self) -> Self {
        Letter { gen: self.gen, inverse: !self.inverse }
    }

    #[inline]
    pub fn cancels(self, other: Letter) -> bool {
        self.gen == other.gen && self.inverse != other.inverse
    }

    /// +1 or -1.
    pub fn sign(self) -> i32 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    /// Dense index in `0..2n`, ordering `a, a', b, b', ...`.
    #[inline]
    pub fn index(self) -> usize {
        2 * self.gen as usize + self.inverse as usize
    }

    pub fn from_index(i: usize) -> Self {
        Letter { gen: (i / 2) as u16, inverse: i % 2 == 1 }
    }
}

/// A finite sequence of letters. Not necessarily reduced; [`Word::free_reduce`]
/// produces the reduced form.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        Word(letters.into_iter().collect())
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    /// Concatenation without reduction.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Freely reduced product `self * other`.
    pub fn mul(&self, other: &Word) -> Word {
        let mut out = self.clone();
        for &l in &other.0 {
            out.push_reduced(l);
        }
        out
    }

    /// Appends a letter, cancelling against the last letter when possible.
    #[inline]
    pub fn push_reduced(&mut self, l: Letter) {
        match self.0.last() {
            Some(&last) if last.cancels(l) => {
                self.0.pop();
            }
            _ => self.0.push(l),
        }
    }

    pub fn free_reduce(&self) -> Word {
        let mut out = Word(Vec::with_capacity(self.len()));
        for &l in &self.0 {
            out.push_reduced(l);
        }
        out
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| !w[0].cancels(w[1]))
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_reduced()
            && match (self.first(), self.last()) {
                (Some(a), Some(b)) if self.len() > 1 => !a.cancels(b),
                _ => true,
            }
    }

    pub fn prefix(&self, k: usize) -> Word {
        Word(self.0[..k].to_vec())
    }

    pub fn suffix_from(&self, k: usize) -> Word {
        Word(self.0[k..].to_vec())
    }

    /// The cyclic shift starting at position `k`.
    pub fn rotate(&self, k: usize) -> Word {
        let mut v = self.0.clone();
        if !v.is_empty() {
            v.rotate_left(k % self.len());
        }
        Word(v)
    }

    pub fn power(&self, n: usize) -> Word {
        let mut out = Word::empty();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Highest generator index used, if any.
    pub fn max_gen(&self) -> Option<u16> {
        self.0.iter().map(|l| l.gen).max()
    }

    pub fn contains_gen(&self, gen: u16) -> bool {
        self.0.iter().any(|l| l.gen == gen)
    }

    /// Shortlex comparison: shorter words first, then lexicographic in the
    /// letter order `a < a' < b < b' < ...`.
    pub fn shortlex_cmp(&self, other: &Word) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }

    /// Length of the longest common prefix.
    pub fn common_prefix_len(&self, other: &Word) -> usize {
        self.0.iter().zip(&other.0).take_while(|(a, b)| a == b).count()
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

/// Generator names used to print and parse words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new(names: Vec<String>) -> Result<Self> {
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || n.contains('\'') || n.chars().any(char::is_whitespace) || n == "1" {
                return Err(Error::InvalidPresentation(format!("bad generator name {n:?}")));
            }
            if names[..i].contains(n) {
                return Err(Error::InvalidPresentation(format!("duplicate generator {n:?}")));
            }
        }
        if names.len() > u16::MAX as usize {
            return Err(Error::InvalidPresentation("too many generators".into()));
        }
        Ok(Alphabet { names })
    }

    /// Alphabet `a, b, c, ...` of the given size.
    pub fn standard(n: usize) -> Self {
        let names = (0..n)
            .map(|i| {
                if i < 26 {
                    ((b'a' + i as u8) as char).to_string()
                } else {
                    format!("x{i}")
                }
            })
            .collect();
        Alphabet { names }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, gen: u16) -> &str {
        &self.names[gen as usize]
    }

    pub fn index_of(&self, name: &str) -> Option<u16> {
        self.names.iter().position(|n| n == name).map(|i| i as u16)
    }

    fn single_char(&self) -> bool {
        self.names.iter().all(|n| n.chars().count() == 1)
    }

    fn parse_token(&self, tok: &str) -> Result<Letter> {
        let (name, inverse) = match tok.strip_suffix('\'') {
            Some(n) => (n, true),
            None => (tok, false),
        };
        self.index_of(name)
            .map(|g| Letter::new(g, inverse))
            .ok_or_else(|| Error::UnknownGenerator(tok.to_string()))
    }

    /// Parses a word. Letters are separated by whitespace (`a b' t`); when
    /// every generator name is a single character the compact form `ab't` is
    /// accepted too. `1` and the empty string denote the identity.
    pub fn parse_word(&self, s: &str) -> Result<Word> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(Word::empty());
        }
        let mut out = Vec::new();
        if s.contains(char::is_whitespace) || !self.single_char() {
            for tok in s.split_whitespace() {
                out.push(self.parse_token(tok)?);
            }
        } else {
            let chars: Vec<char> = s.chars().collect();
            let mut i = 0;
            while i < chars.len() {
                let name = chars[i].to_string();
                let g = self.index_of(&name).ok_or(Error::UnknownGenerator(name))?;
                let inverse = chars.get(i + 1) == Some(&'\'');
                out.push(Letter::new(g, inverse));
                i += if inverse { 2 } else { 1 };
            }
        }
        Ok(Word(out))
    }

    /// Parses a comma-separated list of words.
    pub fn parse_words(&self, s: &str) -> Result<Vec<Word>> {
        if s.trim().is_empty() {
            return Ok(Vec::new());
        }
        s.split(',').map(|w| self.parse_word(w)).collect()
    }

    /// Formats a word in compact form when all names are single characters,
    /// space-separated otherwise. The identity prints as `1`.
    pub fn format(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".into();
        }
        let sep = if self.single_char() { "" } else { " " };
        w.0.iter()
            .map(|l| format!("{}{}", self.name(l.gen), if l.inverse { "'" } else { "" }))
            .collect::<Vec<_>>()
            .join(sep)
    }

    pub fn display<'a>(&'a self, w: &'a Word) -> WordDisplay<'a> {
        WordDisplay { alphabet: self, word: w }
    }
}

pub struct WordDisplay<'a> {
    alphabet: &'a Alphabet,
    word: &'a Word,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.alphabet.format(self.word))
    }
}
