//! Text format for polynomials.
//!
//! Terms are separated by `+` or `-`; a term is an optional coefficient,
//! an optional `*`, then juxtaposed variable factors. A factor is `x<digits>`
//! with an optional `^<digits>` exponent, and the literal `1` denotes the
//! empty word. Whitespace between tokens carries no meaning.
//!
//! `Display` for [`super::Polynomial`] emits this grammar back (terms in
//! deglex order), so printing and parsing round-trip.

use super::{Polynomial, Word};

/// Syntax error with the byte offset where parsing stopped.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at position {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl ParseError {
    fn new(position: usize, message: impl Into<String>) -> Self {
        ParseError {
            position,
            message: message.into(),
        }
    }
}

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) {
        self.pos += 1;
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.bump();
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn take_digits(&mut self) -> &'a str {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.bump();
        }
        std::str::from_utf8(&self.src[start..self.pos]).expect("digits are ascii")
    }

    /// Scans a floating literal: digits, optional fraction, optional exponent.
    fn take_number(&mut self) -> Result<f64, ParseError> {
        let start = self.pos;
        self.take_digits();
        if self.peek() == Some(b'.') {
            self.bump();
            self.take_digits();
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.bump();
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.bump();
            }
            if self.take_digits().is_empty() {
                // not an exponent after all; leave the letter for the caller
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("number is ascii");
        text.parse::<f64>()
            .map_err(|_| ParseError::new(start, format!("invalid number `{text}`")))
    }

    /// Parses one factor and appends its letters. `1` contributes nothing.
    fn take_factor(&mut self, letters: &mut Vec<u32>) -> Result<(), ParseError> {
        match self.peek() {
            Some(b'1') => {
                self.bump();
                let _ = self.take_exponent()?;
                Ok(())
            }
            Some(b'x') => {
                self.bump();
                let start = self.pos;
                let digits = self.take_digits();
                if digits.is_empty() {
                    return Err(ParseError::new(start, "expected a variable index after `x`"));
                }
                let index: u32 = digits
                    .parse()
                    .map_err(|_| ParseError::new(start, format!("variable index `{digits}` out of range")))?;
                if index == 0 {
                    return Err(ParseError::new(start, "variable indices start at 1"));
                }
                let exp = self.take_exponent()?.unwrap_or(1);
                for _ in 0..exp {
                    letters.push(index);
                }
                Ok(())
            }
            _ => Err(ParseError::new(self.pos, "expected a factor")),
        }
    }

    fn take_exponent(&mut self) -> Result<Option<u32>, ParseError> {
        if self.peek() != Some(b'^') {
            return Ok(None);
        }
        self.bump();
        let start = self.pos;
        let digits = self.take_digits();
        if digits.is_empty() {
            return Err(ParseError::new(start, "expected digits after `^`"));
        }
        let exp: u32 = digits
            .parse()
            .map_err(|_| ParseError::new(start, format!("exponent `{digits}` out of range")))?;
        if exp > 1_000_000 {
            return Err(ParseError::new(start, format!("exponent `{digits}` out of range")));
        }
        Ok(Some(exp))
    }

    /// One term: `[coefficient] [*] factor*`. At least a coefficient or one
    /// factor must be present.
    fn take_term(&mut self) -> Result<(f64, Word), ParseError> {
        let term_start = self.pos;
        let mut coeff = 1.0;
        let mut saw_anything = false;

        if matches!(self.peek(), Some(b) if b.is_ascii_digit() || b == b'.') {
            coeff = self.take_number()?;
            saw_anything = true;
            self.skip_ws();
            if self.peek() == Some(b'*') {
                self.bump();
                self.skip_ws();
            }
        }

        let mut letters = Vec::new();
        loop {
            match self.peek() {
                Some(b'x') | Some(b'1') => {
                    self.take_factor(&mut letters)?;
                    saw_anything = true;
                    self.skip_ws();
                    // a `*` between factors is tolerated
                    if self.peek() == Some(b'*') {
                        self.bump();
                        self.skip_ws();
                    }
                }
                _ => break,
            }
        }

        if !saw_anything {
            return Err(ParseError::new(term_start, "expected a term"));
        }
        Ok((coeff, Word::from_letters(letters)))
    }
}

pub(super) fn parse_polynomial(s: &str) -> Result<Polynomial, ParseError> {
    let mut cur = Cursor::new(s);
    let mut poly = Polynomial::zero();
    cur.skip_ws();
    if cur.at_end() {
        return Err(ParseError::new(cur.pos, "expected a polynomial"));
    }

    let mut sign = 1.0;
    if cur.peek() == Some(b'-') {
        sign = -1.0;
        cur.bump();
        cur.skip_ws();
    } else if cur.peek() == Some(b'+') {
        cur.bump();
        cur.skip_ws();
    }

    loop {
        let (coeff, word) = cur.take_term()?;
        poly.add_term(sign * coeff, word);
        cur.skip_ws();
        match cur.peek() {
            None => return Ok(poly),
            Some(b'+') => sign = 1.0,
            Some(b'-') => sign = -1.0,
            Some(_) => return Err(ParseError::new(cur.pos, "expected `+`, `-`, or end of input")),
        }
        cur.bump();
        cur.skip_ws();
    }
}

pub(super) fn parse_word(s: &str) -> Result<Word, ParseError> {
    let poly = parse_polynomial(s)?;
    let mut terms = poly.terms();
    match (terms.next(), terms.next()) {
        (Some((w, c)), None) if c == 1.0 => Ok(w.clone()),
        _ => Err(ParseError::new(0, "expected a single monomial with coefficient 1")),
    }
}
