//! Exhaustive CKY enumeration used as ground truth for the A* engine.
//!
//! Every cell keeps one entry per (category, head word, producing rule), so
//! normal-form filtering is applied to exactly the derivations that exist.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::astar::ParseConfig;
use crate::categories::Category;
use crate::combinators::{apply_rules, head_direction, nf_permitted, HeadDirection, RuleId};
use crate::derivation::{Binary, Derivation, Leaf};
use crate::scores::ScoreTable;

/// Longest sentence the oracle accepts by default.
pub const DEFAULT_BOUND: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("no parse")]
    NoParse,
    #[error("sentence of {len} words exceeds the oracle bound of {bound}")]
    BoundExceeded { len: usize, bound: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ForestKey {
    pub category: Category,
    pub head: usize,
    pub producer: Option<RuleId>,
}

#[derive(Debug, Clone)]
enum Back {
    Lexical,
    Binary {
        split: usize,
        rule: RuleId,
        left: ForestKey,
        right: ForestKey,
    },
}

#[derive(Debug, Clone)]
pub struct ForestEntry {
    /// Best inside score (root attachment excluded).
    pub score: f64,
    /// Number of distinct derivations with a finite score.
    pub count: u128,
    back: Back,
}

/// All derivations of every span, packed by key.
#[derive(Debug)]
pub struct ParseForest {
    table: ScoreTable,
    use_dep: bool,
    cells: Vec<Vec<BTreeMap<ForestKey, ForestEntry>>>,
}

impl ParseForest {
    pub fn build(table: &ScoreTable, cfg: &ParseConfig, bound: usize) -> Result<Self, OracleError> {
        let table = table.pruned(&cfg.pruning);
        let n = table.len();
        if n > bound {
            return Err(OracleError::BoundExceeded { len: n, bound });
        }
        let mut cells = vec![vec![BTreeMap::new(); n + 1]; n + 1];
        for (i, row) in cells.iter_mut().enumerate().skip(1) {
            for (category, lp) in table.candidates(i) {
                let key = ForestKey {
                    category: category.clone(),
                    head: i,
                    producer: None,
                };
                row[i].insert(
                    key,
                    ForestEntry {
                        score: *lp,
                        count: 1,
                        back: Back::Lexical,
                    },
                );
            }
        }
        for width in 2..=n {
            for i in 1..=n + 1 - width {
                let j = i + width - 1;
                let mut cell: BTreeMap<ForestKey, ForestEntry> = BTreeMap::new();
                for k in i..j {
                    for (lk, le) in &cells[i][k] {
                        for (rk, re) in &cells[k + 1][j] {
                            for (category, rule) in
                                apply_rules(&lk.category, &rk.category, &cfg.rules)
                            {
                                if cfg.rules.normal_form
                                    && !nf_permitted(rule, lk.producer, rk.producer)
                                {
                                    continue;
                                }
                                let (head, dep) = match head_direction(
                                    rule,
                                    &lk.category,
                                    &rk.category,
                                    cfg.scheme,
                                ) {
                                    HeadDirection::Left => (lk.head, rk.head),
                                    HeadDirection::Right => (rk.head, lk.head),
                                };
                                let arc = if cfg.use_dep {
                                    table.head_log(dep, head)
                                } else {
                                    0.0
                                };
                                let score = le.score + re.score + arc;
                                if !score.is_finite() {
                                    continue;
                                }
                                let count = le.count.saturating_mul(re.count);
                                let key = ForestKey {
                                    category,
                                    head,
                                    producer: Some(rule),
                                };
                                let back = Back::Binary {
                                    split: k,
                                    rule,
                                    left: lk.clone(),
                                    right: rk.clone(),
                                };
                                match cell.get_mut(&key) {
                                    Some(entry) => {
                                        entry.count = entry.count.saturating_add(count);
                                        if score > entry.score {
                                            entry.score = score;
                                            entry.back = back;
                                        }
                                    }
                                    None => {
                                        cell.insert(key, ForestEntry { score, count, back });
                                    }
                                }
                            }
                        }
                    }
                }
                cells[i][j] = cell;
            }
        }
        Ok(ParseForest {
            table,
            use_dep: cfg.use_dep,
            cells,
        })
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn cell(&self, i: usize, j: usize) -> &BTreeMap<ForestKey, ForestEntry> {
        &self.cells[i][j]
    }

    /// Complete derivations: `(key, final score including the root arc)`.
    pub fn goals(&self) -> impl Iterator<Item = (&ForestKey, &ForestEntry, f64)> + '_ {
        let n = self.len();
        self.cells[1][n].iter().filter_map(move |(key, entry)| {
            if matches!(key.category, Category::Conjoined(_)) {
                return None;
            }
            let root = if self.use_dep {
                self.table.head_log(key.head, 0)
            } else {
                0.0
            };
            let total = entry.score + root;
            total.is_finite().then_some((key, entry, total))
        })
    }

    pub fn derivation(&self, i: usize, j: usize, key: &ForestKey) -> Derivation {
        let entry = &self.cells[i][j][key];
        match &entry.back {
            Back::Lexical => Derivation::Leaf(Leaf {
                index: i,
                word: self.table.token(i).to_string(),
                category: key.category.clone(),
                log_prob: entry.score,
            }),
            Back::Binary {
                split,
                rule,
                left,
                right,
            } => Derivation::Binary(Binary {
                rule: *rule,
                category: key.category.clone(),
                head: key.head,
                left: Box::new(self.derivation(i, *split, left)),
                right: Box::new(self.derivation(split + 1, j, right)),
            }),
        }
    }
}

/// Best complete derivation and its score. Among equal scores the first
/// goal in key order wins.
pub fn oracle_best(
    table: &ScoreTable,
    cfg: &ParseConfig,
) -> Result<(f64, Derivation), OracleError> {
    oracle_best_bounded(table, cfg, DEFAULT_BOUND)
}

pub fn oracle_best_bounded(
    table: &ScoreTable,
    cfg: &ParseConfig,
    bound: usize,
) -> Result<(f64, Derivation), OracleError> {
    let forest = ParseForest::build(table, cfg, bound)?;
    let mut best: Option<(&ForestKey, f64)> = None;
    for (key, _, total) in forest.goals() {
        if best.is_none_or(|(_, s)| total > s) {
            best = Some((key, total));
        }
    }
    let (key, score) = best.ok_or(OracleError::NoParse)?;
    Ok((score, forest.derivation(1, forest.len(), key)))
}

/// Number of distinct complete derivations with a finite score.
pub fn count_parses(table: &ScoreTable, cfg: &ParseConfig) -> Result<u128, OracleError> {
    let forest = ParseForest::build(table, cfg, DEFAULT_BOUND)?;
    Ok(forest
        .goals()
        .fold(0u128, |acc, (_, e, _)| acc.saturating_add(e.count)))
}
