//! Freely reduced words, stored as syllables `g^k`.

use crate::lang::lexer::{Cursor, Tok};
use crate::lang::ParseError;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<(String, i64)>);

impl Word {
    pub fn identity() -> Word {
        Word(Vec::new())
    }

    pub fn gen(g: &str) -> Word {
        Word(vec![(g.to_string(), 1)])
    }

    pub fn power(g: &str, k: i64) -> Word {
        let mut w = Word::identity();
        w.push(g, k);
        w
    }

    pub fn from_syllables<S: Into<String>>(it: impl IntoIterator<Item = (S, i64)>) -> Word {
        let mut w = Word::identity();
        for (g, k) in it {
            w.push(&g.into(), k);
        }
        w
    }

    /// Appends `g^k`, cancelling against the last syllable.
    pub fn push(&mut self, g: &str, k: i64) {
        if k == 0 {
            return;
        }
        if let Some(last) = self.0.last_mut() {
            if last.0 == g {
                last.1 += k;
                if last.1 == 0 {
                    self.0.pop();
                }
                return;
            }
        }
        self.0.push((g.to_string(), k));
    }

    pub fn syllables(&self) -> &[(String, i64)] {
        &self.0
    }

    /// One entry per letter, exponents ±1.
    pub fn letters(&self) -> Vec<(&str, i64)> {
        self.0.iter().flat_map(|(g, k)| std::iter::repeat((g.as_str(), k.signum())).take(k.unsigned_abs() as usize)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of letters.
    pub fn len(&self) -> usize {
        self.0.iter().map(|(_, k)| k.unsigned_abs() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, o: &Word) -> Word {
        let mut w = self.clone();
        for (g, k) in &o.0 {
            w.push(g, *k);
        }
        w
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|(g, k)| (g.clone(), -k)).collect())
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut w = Word::identity();
        for _ in 0..k.unsigned_abs() {
            w = w.mul(&base);
        }
        w
    }

    pub fn generators(&self) -> BTreeSet<String> {
        self.0.iter().map(|(g, _)| g.clone()).collect()
    }

    pub fn exponent_sum(&self, g: &str) -> i64 {
        self.0.iter().filter(|(x, _)| x == g).map(|(_, k)| k).sum()
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> Word {
        Word::from_syllables(self.0.iter().map(|(g, k)| (map.get(g).cloned().unwrap_or_else(|| g.clone()), *k)))
    }

    /// Substitutes a word for every generator.
    pub fn substitute(&self, images: &dyn Fn(&str) -> Word) -> Word {
        let mut w = Word::identity();
        for (g, k) in &self.0 {
            w = w.mul(&images(g).pow(*k));
        }
        w
    }

    /// Word from ±1 letters.
    pub fn from_letters<'a>(letters: impl IntoIterator<Item = (&'a str, i64)>) -> Word {
        Word::from_syllables(letters.into_iter().map(|(g, k)| (g.to_string(), k)))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for (i, (g, k)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if *k == 1 {
                write!(f, "{}", g)?;
            } else {
                write!(f, "{}^{}", g, k)?;
            }
        }
        Ok(())
    }
}

fn err(cur: &Cursor, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { pos: cur.pos(), msg: msg.into() }
}

/// Juxtaposed factors must start with a known generator, `e`, `1` or `(`.
fn starts_factor(cur: &Cursor, gens: &BTreeSet<String>) -> bool {
    matches!(cur.peek(), Tok::Ident(g) if g == "e" || gens.contains(g)) || cur.at_sym("(") || matches!(cur.peek(), Tok::Num(n) if *n == num_rational::BigRational::from_integer(1.into()))
}

/// `word := factor (("*" | "·")? factor)*`, `factor := atom ("^" ["-"] n | "^-1" | "⁻¹")?`,
/// `atom := "e" | "1" | generator | "(" word ")"`.
pub fn parse_word(cur: &mut Cursor, gens: &BTreeSet<String>) -> Result<Word, ParseError> {
    let mut w = factor(cur, gens)?;
    loop {
        if cur.eat_sym("*") || cur.eat_sym("·") {
            w = w.mul(&factor(cur, gens)?);
        } else if starts_factor(cur, gens) {
            w = w.mul(&factor(cur, gens)?);
        } else {
            return Ok(w);
        }
    }
}

fn factor(cur: &mut Cursor, gens: &BTreeSet<String>) -> Result<Word, ParseError> {
    let base = match cur.peek().clone() {
        Tok::Ident(g) if g == "e" => {
            cur.next();
            Word::identity()
        }
        Tok::Num(n) if n == num_rational::BigRational::from_integer(1.into()) => {
            cur.next();
            Word::identity()
        }
        Tok::Ident(g) => {
            if !gens.contains(&g) {
                return Err(err(cur, format!("unknown generator `{}`", g)));
            }
            cur.next();
            Word::gen(&g)
        }
        Tok::Sym("(") => {
            cur.next();
            let w = parse_word(cur, gens)?;
            if !cur.eat_sym(")") {
                return Err(err(cur, "expected `)`"));
            }
            w
        }
        t => return Err(err(cur, format!("expected a group word, found {}", t))),
    };
    if cur.eat_sym("^-1") || cur.eat_sym("⁻¹") {
        return Ok(base.inverse());
    }
    if cur.eat_sym("^") {
        let neg = cur.eat_sym("-");
        let pos = cur.pos();
        let k = match cur.next().tok {
            Tok::Num(n) if n.is_integer() => n.to_integer(),
            _ => return Err(ParseError::Syntax { pos, msg: "expected an integer exponent".into() }),
        };
        let k: i64 = num_traits::ToPrimitive::to_i64(&k).ok_or_else(|| ParseError::Syntax { pos, msg: "exponent too large".into() })?;
        return Ok(base.pow(if neg { -k } else { k }));
    }
    Ok(base)
}
