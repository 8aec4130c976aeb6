//! Words in the free monoid on noncommuting variables `x1, x2, ...` and
//! polynomials with real coefficients.
//!
//! Words are ordered by degree first, then lexicographically by letter
//! (deglex); the empty word `1` is the minimum. Polynomials are stored as
//! sorted term maps with exact zero pruning, so structural equality is
//! equality of term maps.

mod parse;

pub use parse::ParseError;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// A word in the free monoid: a finite sequence of variable indices (1-based).
///
/// The empty sequence is the monoid identity and prints as `1`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<u32>);

impl Word {
    /// The empty word.
    pub fn one() -> Self {
        Word(Vec::new())
    }

    /// The single-letter word for variable `xi`. Panics if `i == 0`;
    /// variable indices are 1-based.
    pub fn var(i: u32) -> Self {
        assert!(i >= 1, "variable indices are 1-based");
        Word(vec![i])
    }

    /// Builds a word from a letter sequence. Panics on a zero letter.
    pub fn from_letters<I: IntoIterator<Item = u32>>(letters: I) -> Self {
        let v: Vec<u32> = letters.into_iter().collect();
        assert!(v.iter().all(|&l| l >= 1), "variable indices are 1-based");
        Word(v)
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    /// Number of letters.
    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// The reversal `w*`; an involution on words with `(uv)* = v* u*`.
    pub fn involution(&self) -> Self {
        Word(self.0.iter().rev().copied().collect())
    }

    /// Whether `w* = w`.
    pub fn is_symmetric(&self) -> bool {
        let n = self.0.len();
        (0..n / 2).all(|i| self.0[i] == self.0[n - 1 - i])
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &Word) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// The right chip: the suffix of length `i`, the whole word when
    /// `i >= degree`, and `1` when `i == 0`.
    pub fn right_chip(&self, i: usize) -> Self {
        let n = self.0.len();
        let k = i.min(n);
        Word(self.0[n - k..].to_vec())
    }

    /// All splittings `w = u* v` with `v` a right chip of `w`: for each
    /// `n = 0..=degree`, the pair `(rc(w*, degree - n), rc(w, n))`.
    /// Returns exactly `degree + 1` pairs.
    pub fn rc_decompositions(&self) -> Vec<(Word, Word)> {
        let d = self.degree();
        let star = self.involution();
        (0..=d)
            .map(|n| (star.right_chip(d - n), self.right_chip(n)))
            .collect()
    }

    /// Largest letter occurring, or 0 for the empty word.
    pub fn max_variable(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    /// Degree-lexicographic order: shorter words first, ties by letters.
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        let mut i = 0;
        while i < self.0.len() {
            let letter = self.0[i];
            let mut run = 1;
            while i + run < self.0.len() && self.0[i + run] == letter {
                run += 1;
            }
            if !first {
                write!(f, " ")?;
            }
            first = false;
            if run == 1 {
                write!(f, "x{letter}")?;
            } else {
                write!(f, "x{letter}^{run}")?;
            }
            i += run;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Word {
    type Err = ParseError;

    /// Parses a single monomial such as `x1 x2^2` or `1`.
    fn from_str(s: &str) -> Result<Self, ParseError> {
        parse::parse_word(s)
    }
}

/// A polynomial in noncommuting variables with `f64` coefficients.
///
/// Terms are kept in deglex order and exactly-zero coefficients are never
/// stored, so `==` is canonical structural equality.
#[derive(Clone, PartialEq, Default)]
pub struct Polynomial {
    terms: BTreeMap<Word, f64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::from_term(c, Word::one())
    }

    pub fn from_term(c: f64, w: Word) -> Self {
        let mut p = Polynomial::default();
        p.add_term(c, w);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (f64, Word)>>(terms: I) -> Self {
        let mut p = Polynomial::default();
        for (c, w) in terms {
            p.add_term(c, w);
        }
        p
    }

    /// Adds `c · w` in place, pruning the term if the sum is exactly zero.
    pub fn add_term(&mut self, c: f64, w: Word) {
        use std::collections::btree_map::Entry;
        if c == 0.0 {
            return;
        }
        match self.terms.entry(w) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == 0.0 {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `w`, zero when absent.
    pub fn coeff(&self, w: &Word) -> f64 {
        self.terms.get(w).copied().unwrap_or(0.0)
    }

    /// Terms in deglex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Word, f64)> {
        self.terms.iter().map(|(w, &c)| (w, c))
    }

    /// Words with nonzero coefficient, in deglex order.
    pub fn support(&self) -> impl Iterator<Item = &Word> {
        self.terms.keys()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Maximum word degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        // deglex sorts by length first, so the last key is a longest word
        self.terms.last_key_value().map(|(w, _)| w.degree())
    }

    /// Largest variable index occurring, 0 for constants.
    pub fn max_variable(&self) -> u32 {
        self.terms.keys().map(Word::max_variable).max().unwrap_or(0)
    }

    /// The involution extended coefficient-linearly: reverses every word.
    pub fn involution(&self) -> Self {
        Polynomial::from_terms(self.terms.iter().map(|(w, &c)| (c, w.involution())))
    }

    /// Whether `f* = f`.
    pub fn is_symmetric(&self) -> bool {
        self.terms
            .iter()
            .all(|(w, &c)| self.coeff(&w.involution()) == c)
    }

    pub fn scale(&self, s: f64) -> Self {
        Polynomial::from_terms(self.terms.iter().map(|(w, &c)| (s * c, w.clone())))
    }

    /// Coefficient-wise comparison: every coefficient of `self - other` has
    /// absolute value at most `tol`.
    pub fn approx_eq(&self, other: &Polynomial, tol: f64) -> bool {
        let mut words: Vec<&Word> = self.terms.keys().collect();
        words.extend(other.terms.keys());
        words
            .into_iter()
            .all(|w| (self.coeff(w) - other.coeff(w)).abs() <= tol)
    }
}

impl std::ops::Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (w, &c) in &rhs.terms {
            out.add_term(c, w.clone());
        }
        out
    }
}

impl std::ops::Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (w, &c) in &rhs.terms {
            out.add_term(-c, w.clone());
        }
        out
    }
}

impl std::ops::Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl std::ops::Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::default();
        for (u, &a) in &self.terms {
            for (v, &b) in &rhs.terms {
                out.add_term(a * b, u.concat(v));
            }
        }
        out
    }
}

impl std::ops::Mul<f64> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: f64) -> Polynomial {
        self.scale(rhs)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (w, &c)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            if idx == 0 {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else if c < 0.0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if w.is_one() {
                write!(f, "{mag}")?;
            } else if mag == 1.0 {
                write!(f, "{w}")?;
            } else {
                write!(f, "{mag} {w}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Polynomial {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        parse::parse_polynomial(s)
    }
}
