//! Dependency trees read off derivations.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinators::{head_direction, HeadDirection, HeadScheme};
use crate::derivation::Derivation;
use crate::scores::ScoreTable;

pub const ROOT_LABEL: &str = "root";

/// `heads[k]` is the head of word `k + 1`; 0 is the virtual root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyTree {
    pub heads: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("word {dependent} has head {head} outside 0..={len}")]
    OutOfRange {
        dependent: usize,
        head: usize,
        len: usize,
    },
    #[error("word {0} heads itself")]
    SelfLoop(usize),
    #[error("several words attach to the root: {0:?}")]
    MultipleRoots(Vec<usize>),
    #[error("cycle through words {0:?}")]
    Cycle(Vec<usize>),
}

impl DependencyTree {
    pub fn unlabeled(heads: Vec<usize>) -> Self {
        DependencyTree {
            heads,
            labels: None,
        }
    }

    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    pub fn head(&self, word: usize) -> usize {
        self.heads[word - 1]
    }

    pub fn label(&self, word: usize) -> Option<&str> {
        self.labels.as_ref().map(|l| l[word - 1].as_str())
    }

    /// `(dependent, head)` pairs, root arc included.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.heads.iter().enumerate().map(|(k, &h)| (k + 1, h))
    }

    pub fn root(&self) -> Option<usize> {
        self.arcs().find(|&(_, h)| h == 0).map(|(d, _)| d)
    }

    /// Sum of `log P(head)` over every arc, root attachment included.
    pub fn arc_score(&self, table: &ScoreTable) -> f64 {
        self.arcs().map(|(d, h)| table.head_log(d, h)).sum()
    }

    /// Non-root arcs whose head precedes the dependent, and all non-root arcs.
    pub fn direction_counts(&self) -> (usize, usize) {
        let mut rightward = 0;
        let mut total = 0;
        for (d, h) in self.arcs().filter(|&(_, h)| h != 0) {
            total += 1;
            if h < d {
                rightward += 1;
            }
        }
        (rightward, total)
    }
}

/// Arcs of a complete derivation under `scheme`: at every binary node the
/// non-head child's head word depends on the head child's head word, and
/// the head of the whole derivation attaches to 0.
pub fn extract_dependencies(d: &Derivation, scheme: HeadScheme) -> DependencyTree {
    let n = d.len();
    let mut heads = vec![0; n];
    let mut labels = vec![ROOT_LABEL.to_string(); n];
    let offset = d.span().0;
    fn walk(
        d: &Derivation,
        scheme: HeadScheme,
        offset: usize,
        heads: &mut [usize],
        labels: &mut [String],
    ) -> usize {
        match d {
            Derivation::Leaf(l) => l.index,
            Derivation::Binary(b) => {
                let lh = walk(&b.left, scheme, offset, heads, labels);
                let rh = walk(&b.right, scheme, offset, heads, labels);
                let (head, dep) =
                    match head_direction(b.rule, b.left.category(), b.right.category(), scheme) {
                        HeadDirection::Left => (lh, rh),
                        HeadDirection::Right => (rh, lh),
                    };
                heads[dep - offset] = head + 1 - offset;
                labels[dep - offset] = b.rule.label();
                head
            }
        }
    }
    walk(d, scheme, offset, &mut heads, &mut labels);
    DependencyTree {
        heads,
        labels: Some(labels),
    }
}

pub fn validate(t: &DependencyTree) -> Result<(), ValidationError> {
    let n = t.len();
    for (d, h) in t.arcs() {
        if h > n {
            return Err(ValidationError::OutOfRange {
                dependent: d,
                head: h,
                len: n,
            });
        }
        if h == d {
            return Err(ValidationError::SelfLoop(d));
        }
    }
    let roots: Vec<usize> = t.arcs().filter(|&(_, h)| h == 0).map(|(d, _)| d).collect();
    if roots.len() > 1 {
        return Err(ValidationError::MultipleRoots(roots));
    }
    for start in 1..=n {
        let mut node = start;
        let mut steps = 0;
        while node != 0 && steps <= n {
            node = t.head(node);
            steps += 1;
        }
        if node != 0 {
            // `node` is now on the cycle
            let mut cycle = vec![node];
            let mut next = t.head(node);
            while next != node {
                cycle.push(next);
                next = t.head(next);
            }
            cycle.sort_unstable();
            return Err(ValidationError::Cycle(cycle));
        }
    }
    Ok(())
}
