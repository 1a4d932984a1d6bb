//! CCG categories: parsing, printing and feature-aware matching.
//!
//! Text syntax: an atom is a run of `[A-Za-z.,;:]` optionally followed by a
//! single bracketed feature (`S[dcl]`). A functor is `RESULT/ARG` or
//! `RESULT\ARG`; nested functors must be parenthesized on either side, so
//! `(S\NP)/NP` is accepted and `S\NP/NP` is not. The reserved feature
//! `[conj]` may follow any category and marks the intermediate result of
//! coordination (`NP[conj]`, `S[dcl][conj]`, `(S\NP)[conj]`).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Feature token reserved for the coordination marker.
pub const CONJ_FEATURE: &str = "conj";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slash {
    /// `/`, argument to the right.
    Forward,
    /// `\`, argument to the left.
    Backward,
}

impl Slash {
    pub fn symbol(self) -> char {
        match self {
            Slash::Forward => '/',
            Slash::Backward => '\\',
        }
    }

    pub fn flip(self) -> Slash {
        match self {
            Slash::Forward => Slash::Backward,
            Slash::Backward => Slash::Forward,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Functor {
    pub result: Category,
    pub slash: Slash,
    pub argument: Category,
}

/// An immutable CCG category. Cloning is cheap (reference counted).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Atomic {
        base: Arc<str>,
        feature: Option<Arc<str>>,
    },
    Functor(Arc<Functor>),
    /// `X[conj]`: a conjunct that still waits for its left coordinate.
    Conjoined(Arc<Category>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed category at byte {position}: {reason}")]
pub struct MalformedCategory {
    pub position: usize,
    pub reason: String,
}

impl Category {
    pub fn atom(base: &str) -> Category {
        Category::Atomic {
            base: base.into(),
            feature: None,
        }
    }

    pub fn featured(base: &str, feature: &str) -> Category {
        Category::Atomic {
            base: base.into(),
            feature: Some(feature.into()),
        }
    }

    pub fn functor(result: Category, slash: Slash, argument: Category) -> Category {
        Category::Functor(Arc::new(Functor {
            result,
            slash,
            argument,
        }))
    }

    pub fn forward(result: Category, argument: Category) -> Category {
        Category::functor(result, Slash::Forward, argument)
    }

    pub fn backward(result: Category, argument: Category) -> Category {
        Category::functor(result, Slash::Backward, argument)
    }

    pub fn conjoined(inner: Category) -> Category {
        Category::Conjoined(Arc::new(inner))
    }

    pub fn parse(text: &str) -> Result<Category, MalformedCategory> {
        CategoryParser::new(text).parse_all()
    }

    pub fn as_functor(&self) -> Option<&Functor> {
        match self {
            Category::Functor(f) => Some(f),
            _ => None,
        }
    }

    pub fn is_functor(&self) -> bool {
        matches!(self, Category::Functor(_))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Category::Atomic { .. })
    }

    pub fn base(&self) -> Option<&str> {
        match self {
            Category::Atomic { base, .. } => Some(base),
            _ => None,
        }
    }

    /// Functor with the given slash direction, if any.
    pub fn functor_with(&self, slash: Slash) -> Option<&Functor> {
        self.as_functor().filter(|f| f.slash == slash)
    }

    /// Copy of this category with every atomic feature removed.
    pub fn strip_features(&self) -> Category {
        match self {
            Category::Atomic { base, .. } => Category::Atomic {
                base: base.clone(),
                feature: None,
            },
            Category::Functor(f) => Category::functor(
                f.result.strip_features(),
                f.slash,
                f.argument.strip_features(),
            ),
            Category::Conjoined(inner) => Category::conjoined(inner.strip_features()),
        }
    }

    /// Structural equality where a missing feature matches any feature.
    pub fn matches(&self, other: &Category) -> bool {
        match (self, other) {
            (
                Category::Atomic {
                    base: b1,
                    feature: f1,
                },
                Category::Atomic {
                    base: b2,
                    feature: f2,
                },
            ) => {
                b1 == b2
                    && match (f1, f2) {
                        (Some(x), Some(y)) => x == y,
                        _ => true,
                    }
            }
            (Category::Functor(a), Category::Functor(b)) => {
                a.slash == b.slash && a.result.matches(&b.result) && a.argument.matches(&b.argument)
            }
            (Category::Conjoined(a), Category::Conjoined(b)) => a.matches(b),
            _ => false,
        }
    }

    /// Merge two matching categories, keeping every concrete feature.
    /// Returns `None` when they do not match.
    pub fn unify(&self, other: &Category) -> Option<Category> {
        match (self, other) {
            (
                Category::Atomic {
                    base: b1,
                    feature: f1,
                },
                Category::Atomic {
                    base: b2,
                    feature: f2,
                },
            ) if b1 == b2 => match (f1, f2) {
                (Some(x), Some(y)) if x != y => None,
                (Some(_), _) => Some(self.clone()),
                (None, _) => Some(other.clone()),
            },
            (Category::Functor(a), Category::Functor(b)) if a.slash == b.slash => {
                let result = a.result.unify(&b.result)?;
                let argument = a.argument.unify(&b.argument)?;
                Some(Category::functor(result, a.slash, argument))
            }
            (Category::Conjoined(a), Category::Conjoined(b)) => {
                Some(Category::conjoined(a.unify(b)?))
            }
            _ => None,
        }
    }

    /// `X/X` or `X\X`, compared with features ignored.
    pub fn is_modifier(&self) -> bool {
        match self {
            Category::Functor(f) => f.result.strip_features() == f.argument.strip_features(),
            _ => false,
        }
    }

    /// `X/(X\Y)` or `X\(X/Y)`, compared with features ignored.
    pub fn is_type_raised(&self) -> bool {
        let Some(outer) = self.as_functor() else {
            return false;
        };
        let Some(inner) = outer.argument.functor_with(outer.slash.flip()) else {
            return false;
        };
        outer.result.strip_features() == inner.result.strip_features()
    }

    /// Number of nested functor levels.
    pub fn depth(&self) -> usize {
        match self {
            Category::Atomic { .. } => 0,
            Category::Functor(f) => 1 + f.result.depth().max(f.argument.depth()),
            Category::Conjoined(inner) => inner.depth(),
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_functor() {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Category::Atomic { base, feature } => {
                f.write_str(base)?;
                if let Some(feat) = feature {
                    write!(f, "[{feat}]")?;
                }
                Ok(())
            }
            Category::Functor(func) => {
                func.result.fmt_child(f)?;
                write!(f, "{}", func.slash.symbol())?;
                func.argument.fmt_child(f)
            }
            Category::Conjoined(inner) => {
                inner.fmt_child(f)?;
                write!(f, "[{CONJ_FEATURE}]")
            }
        }
    }
}

impl FromStr for Category {
    type Err = MalformedCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::parse(s)
    }
}

impl Serialize for Category {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Category {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Category::parse(&text).map_err(serde::de::Error::custom)
    }
}

fn is_atom_char(c: char) -> bool {
    c.is_ascii_alphabetic() || matches!(c, '.' | ',' | ';' | ':')
}

fn is_feature_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '[' | ']' | '(' | ')' | '/' | '\\')
}

struct CategoryParser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> CategoryParser<'a> {
    fn new(text: &'a str) -> Self {
        CategoryParser { text, pos: 0 }
    }

    fn error<T>(&self, reason: impl Into<String>) -> Result<T, MalformedCategory> {
        Err(MalformedCategory {
            position: self.pos,
            reason: reason.into(),
        })
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn parse_all(mut self) -> Result<Category, MalformedCategory> {
        if self.text.is_empty() {
            return self.error("empty category");
        }
        let cat = self.category()?;
        match self.peek() {
            None => Ok(cat),
            Some(')') => self.error("unbalanced ')'"),
            Some('/' | '\\') => {
                self.error("unparenthesized multi-slash category; parenthesize the result")
            }
            Some(c) => self.error(format!("unexpected character {c:?}")),
        }
    }

    fn category(&mut self) -> Result<Category, MalformedCategory> {
        let result = self.primary()?;
        let slash = match self.peek() {
            Some('/') => Slash::Forward,
            Some('\\') => Slash::Backward,
            _ => return Ok(result),
        };
        self.bump();
        let argument = self.primary()?;
        Ok(Category::functor(result, slash, argument))
    }

    fn primary(&mut self) -> Result<Category, MalformedCategory> {
        let cat = match self.peek() {
            Some('(') => {
                self.bump();
                let inner = self.category()?;
                match self.peek() {
                    Some(')') => {
                        self.bump();
                    }
                    Some('/' | '\\') => {
                        return self
                            .error("unparenthesized multi-slash category; parenthesize the result")
                    }
                    Some(c) => return self.error(format!("expected ')', found {c:?}")),
                    None => return self.error("unbalanced '('"),
                }
                inner
            }
            Some(c) if is_atom_char(c) => self.atom()?,
            Some(c) => return self.error(format!("illegal character {c:?}")),
            None => return self.error("empty argument"),
        };
        self.conj_suffix(cat)
    }

    fn atom(&mut self) -> Result<Category, MalformedCategory> {
        let start = self.pos;
        while self.peek().is_some_and(is_atom_char) {
            self.bump();
        }
        let base: Arc<str> = self.text[start..self.pos].into();
        if self.peek() != Some('[') {
            return Ok(Category::Atomic {
                base,
                feature: None,
            });
        }
        let feature = self.feature()?;
        if feature == CONJ_FEATURE {
            return Ok(Category::conjoined(Category::Atomic {
                base,
                feature: None,
            }));
        }
        Ok(Category::Atomic {
            base,
            feature: Some(feature.into()),
        })
    }

    fn feature(&mut self) -> Result<&'a str, MalformedCategory> {
        self.bump();
        let start = self.pos;
        while self.peek().is_some_and(is_feature_char) {
            self.bump();
        }
        let token = &self.text[start..self.pos];
        if token.is_empty() {
            return self.error("empty feature");
        }
        match self.peek() {
            Some(']') => {
                self.bump();
                Ok(token)
            }
            Some(c) => self.error(format!("illegal character {c:?} in feature")),
            None => self.error("unterminated feature"),
        }
    }

    fn conj_suffix(&mut self, cat: Category) -> Result<Category, MalformedCategory> {
        if self.peek() != Some('[') {
            return Ok(cat);
        }
        let at = self.pos;
        let feature = self.feature()?;
        if feature != CONJ_FEATURE {
            self.pos = at;
            return self.error("only one feature per atomic category");
        }
        if matches!(cat, Category::Conjoined(_)) {
            self.pos = at;
            return self.error("duplicate [conj] marker");
        }
        Ok(Category::conjoined(cat))
    }
}
