//! Derivation trees produced by the parser.

use serde::{Deserialize, Serialize};

use crate::categories::Category;
use crate::combinators::{head_direction, nf_permitted, HeadDirection, HeadScheme, RuleId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    /// 1-based word position.
    pub index: usize,
    pub word: String,
    pub category: Category,
    pub log_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binary {
    pub rule: RuleId,
    pub category: Category,
    /// Position of the head word of this constituent.
    pub head: usize,
    pub left: Box<Derivation>,
    pub right: Box<Derivation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum Derivation {
    Leaf(Leaf),
    Binary(Binary),
}

impl Derivation {
    pub fn leaf(index: usize, word: impl Into<String>, category: Category, log_prob: f64) -> Self {
        Derivation::Leaf(Leaf {
            index,
            word: word.into(),
            category,
            log_prob,
        })
    }

    /// Combine two subtrees, choosing the head word per `scheme`.
    pub fn combine(
        rule: RuleId,
        category: Category,
        left: Derivation,
        right: Derivation,
        scheme: HeadScheme,
    ) -> Self {
        let head = match head_direction(rule, left.category(), right.category(), scheme) {
            HeadDirection::Left => left.head(),
            HeadDirection::Right => right.head(),
        };
        Derivation::Binary(Binary {
            rule,
            category,
            head,
            left: Box::new(left),
            right: Box::new(right),
        })
    }

    pub fn category(&self) -> &Category {
        match self {
            Derivation::Leaf(l) => &l.category,
            Derivation::Binary(b) => &b.category,
        }
    }

    pub fn head(&self) -> usize {
        match self {
            Derivation::Leaf(l) => l.index,
            Derivation::Binary(b) => b.head,
        }
    }

    /// Rule that built this node; `None` for leaves.
    pub fn producer(&self) -> Option<RuleId> {
        match self {
            Derivation::Leaf(_) => None,
            Derivation::Binary(b) => Some(b.rule),
        }
    }

    /// 1-based inclusive span.
    pub fn span(&self) -> (usize, usize) {
        match self {
            Derivation::Leaf(l) => (l.index, l.index),
            Derivation::Binary(b) => (b.left.span().0, b.right.span().1),
        }
    }

    pub fn leaves(&self) -> Vec<&Leaf> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Leaf>) {
        match self {
            Derivation::Leaf(l) => out.push(l),
            Derivation::Binary(b) => {
                b.left.collect_leaves(out);
                b.right.collect_leaves(out);
            }
        }
    }

    pub fn words(&self) -> Vec<String> {
        self.leaves().into_iter().map(|l| l.word.clone()).collect()
    }

    pub fn len(&self) -> usize {
        let (i, j) = self.span();
        j + 1 - i
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Sum of the lexical tag log-probabilities.
    pub fn tag_score(&self) -> f64 {
        self.leaves().iter().map(|l| l.log_prob).sum()
    }

    /// Visit every binary node, children before parents.
    pub fn for_each_binary<'a>(&'a self, f: &mut impl FnMut(&'a Binary)) {
        if let Derivation::Binary(b) = self {
            b.left.for_each_binary(f);
            b.right.for_each_binary(f);
            f(b);
        }
    }

    /// Same tree with heads recomputed under `scheme`.
    pub fn reheaded(&self, scheme: HeadScheme) -> Derivation {
        match self {
            Derivation::Leaf(_) => self.clone(),
            Derivation::Binary(b) => Derivation::combine(
                b.rule,
                b.category.clone(),
                b.left.reheaded(scheme),
                b.right.reheaded(scheme),
                scheme,
            ),
        }
    }

    /// Number of binary nodes breaking a normal-form constraint.
    pub fn nf_violations(&self) -> usize {
        let mut count = 0;
        self.for_each_binary(&mut |b| {
            if !nf_permitted(b.rule, b.left.producer(), b.right.producer()) {
                count += 1;
            }
        });
        count
    }
}
