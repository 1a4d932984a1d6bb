//! Per-sentence score tables: loading, pruning and outside-estimate sums.
//!
//! A score file holds one JSON object per line:
//!
//! ```text
//! {"tokens":["dogs","bark"],
//!  "tags":[[["NP",-0.105]],[["S\\NP",-0.223]]],
//!  "heads":[[[2,-0.105],[0,-2.302]],[[0,-0.356],[1,-1.203]]]}
//! ```
//!
//! Head rows are sparse; a missing head index scores negative infinity.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use crate::categories::Category;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("token {0} lists itself as a head")]
    SelfHead(usize),
    #[error("token {token} has head index {head} outside 0..={len}")]
    HeadOutOfRange {
        token: usize,
        head: usize,
        len: usize,
    },
    #[error("token {token} lists head {head} twice")]
    DuplicateHead { token: usize, head: usize },
    #[error("token {token} lists category {category} twice")]
    DuplicateTag { token: usize, category: String },
    #[error("token {0} has no tag candidates")]
    EmptyTagRow(usize),
    #[error("non-finite log probability for token {0}")]
    NonFinite(usize),
    #[error("empty sentence")]
    EmptySentence,
}

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("line {line}: {source}")]
    Table {
        line: usize,
        #[source]
        source: TableError,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no tag candidate survives pruning")]
pub struct EmptyAfterPruning;

/// Prefix sums that keep negative infinities out of the arithmetic.
#[derive(Debug, Clone)]
struct PrefixSums {
    finite: Vec<f64>,
    neg_inf: Vec<usize>,
}

impl PrefixSums {
    fn new(values: &[f64]) -> Self {
        let mut finite = Vec::with_capacity(values.len() + 1);
        let mut neg_inf = Vec::with_capacity(values.len() + 1);
        finite.push(0.0);
        neg_inf.push(0);
        for &v in values {
            let (f, n) = (*finite.last().unwrap(), *neg_inf.last().unwrap());
            if v == f64::NEG_INFINITY {
                finite.push(f);
                neg_inf.push(n + 1);
            } else {
                finite.push(f + v);
                neg_inf.push(n);
            }
        }
        PrefixSums { finite, neg_inf }
    }

    /// Sum over all positions outside the 1-based inclusive range `[i, j]`.
    fn outside(&self, i: usize, j: usize) -> f64 {
        let n = self.finite.len() - 1;
        let infs = self.neg_inf[n] - (self.neg_inf[j] - self.neg_inf[i - 1]);
        if infs > 0 {
            return f64::NEG_INFINITY;
        }
        (self.finite[i - 1] - self.finite[0]) + (self.finite[n] - self.finite[j])
    }
}

/// Pruning settings for tag candidates.
#[derive(Debug, Clone)]
pub struct PruneConfig {
    pub max_k: usize,
    pub beta: f64,
    pub tag_dictionary: Option<Arc<TagDictionary>>,
}

impl Default for PruneConfig {
    fn default() -> Self {
        PruneConfig {
            max_k: 50,
            beta: 0.00001,
            tag_dictionary: None,
        }
    }
}

impl PruneConfig {
    /// No pruning at all.
    pub fn none() -> Self {
        PruneConfig {
            max_k: usize::MAX,
            beta: 0.0,
            tag_dictionary: None,
        }
    }
}

/// Maps frequent words to the categories they were seen with.
#[derive(Debug, Clone, Default)]
pub struct TagDictionary {
    entries: HashMap<String, BTreeSet<Category>>,
    cutoff: usize,
}

impl TagDictionary {
    /// Build from `(word, category)` observations, keeping words seen at
    /// least `cutoff` times.
    pub fn from_observations<I>(observations: I, cutoff: usize) -> Self
    where
        I: IntoIterator<Item = (String, Category)>,
    {
        let mut counts: HashMap<String, (usize, BTreeSet<Category>)> = HashMap::new();
        for (word, cat) in observations {
            let entry = counts.entry(word).or_default();
            entry.0 += 1;
            entry.1.insert(cat);
        }
        let entries = counts
            .into_iter()
            .filter(|(_, (n, _))| *n >= cutoff)
            .map(|(w, (_, cats))| (w, cats))
            .collect();
        TagDictionary { entries, cutoff }
    }

    /// One word per line: `word<TAB>cat cat ...`.
    pub fn read<R: Read>(reader: R) -> Result<Self, ScoreError> {
        let mut entries = HashMap::new();
        for (idx, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let Some((word, cats)) = line.split_once('\t') else {
                return Err(ScoreError::Format {
                    line: line_no,
                    reason: "expected word<TAB>categories".into(),
                });
            };
            let mut set = BTreeSet::new();
            for text in cats.split_whitespace() {
                let cat = Category::parse(text).map_err(|e| ScoreError::Format {
                    line: line_no,
                    reason: e.to_string(),
                })?;
                set.insert(cat);
            }
            if set.is_empty() {
                return Err(ScoreError::Format {
                    line: line_no,
                    reason: format!("no categories for {word:?}"),
                });
            }
            entries.insert(word.to_string(), set);
        }
        Ok(TagDictionary { entries, cutoff: 0 })
    }

    pub fn load(path: &Path) -> Result<Self, ScoreError> {
        Self::read(File::open(path)?)
    }

    pub fn allowed(&self, word: &str) -> Option<&BTreeSet<Category>> {
        self.entries.get(word)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn sort_row(row: &mut [(Category, f64)]) {
    row.sort_by(|(ca, a), (cb, b)| {
        b.total_cmp(a)
            .then_with(|| ca.to_string().cmp(&cb.to_string()))
    });
}

/// Restrict to dictionary-allowed categories, drop entries below
/// `beta * max`, keep the `max_k` best.
pub fn prune_tags(
    full_row: &[(Category, f64)],
    max_k: usize,
    beta: f64,
    allowed: Option<&BTreeSet<Category>>,
) -> Result<Vec<(Category, f64)>, EmptyAfterPruning> {
    let mut row: Vec<(Category, f64)> = full_row
        .iter()
        .filter(|(c, _)| allowed.is_none_or(|set| set.contains(c)))
        .cloned()
        .collect();
    let Some(best) = row.iter().map(|(_, lp)| *lp).max_by(f64::total_cmp) else {
        return Err(EmptyAfterPruning);
    };
    let threshold = best + beta.ln();
    row.retain(|(_, lp)| *lp >= threshold);
    sort_row(&mut row);
    row.truncate(max_k);
    if row.is_empty() {
        return Err(EmptyAfterPruning);
    }
    Ok(row)
}

/// Scores for one sentence. Word positions are 1-based; head index 0 is
/// the virtual root.
#[derive(Debug, Clone)]
pub struct ScoreTable {
    tokens: Vec<String>,
    full_tags: Vec<Vec<(Category, f64)>>,
    candidates: Vec<Vec<(Category, f64)>>,
    heads: Vec<Vec<(usize, f64)>>,
    max_tag: Vec<f64>,
    max_dep: Vec<f64>,
    tag_sums: PrefixSums,
    dep_sums: PrefixSums,
}

impl ScoreTable {
    pub fn new(
        tokens: Vec<String>,
        tags: Vec<Vec<(Category, f64)>>,
        heads: Vec<Vec<(usize, f64)>>,
    ) -> Result<Self, TableError> {
        let n = tokens.len();
        if n == 0 {
            return Err(TableError::EmptySentence);
        }
        if tags.len() != n || heads.len() != n {
            return Err(TableError::LengthMismatch(format!(
                "{} tokens, {} tag rows, {} head rows",
                n,
                tags.len(),
                heads.len()
            )));
        }
        let mut full_tags = tags;
        for (idx, row) in full_tags.iter_mut().enumerate() {
            let token = idx + 1;
            if row.is_empty() {
                return Err(TableError::EmptyTagRow(token));
            }
            if row.iter().any(|(_, lp)| !lp.is_finite()) {
                return Err(TableError::NonFinite(token));
            }
            sort_row(row);
            let mut seen = BTreeSet::new();
            for (c, _) in row.iter() {
                if !seen.insert(c) {
                    return Err(TableError::DuplicateTag {
                        token,
                        category: c.to_string(),
                    });
                }
            }
        }
        let mut heads = heads;
        for (idx, row) in heads.iter_mut().enumerate() {
            let token = idx + 1;
            row.sort_by_key(|(j, _)| *j);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(TableError::DuplicateHead {
                        token,
                        head: w[0].0,
                    });
                }
            }
            for &(j, lp) in row.iter() {
                if j == token {
                    return Err(TableError::SelfHead(token));
                }
                if j > n {
                    return Err(TableError::HeadOutOfRange {
                        token,
                        head: j,
                        len: n,
                    });
                }
                if !lp.is_finite() {
                    return Err(TableError::NonFinite(token));
                }
            }
        }
        let max_tag: Vec<f64> = full_tags.iter().map(|row| row[0].1).collect();
        let max_dep: Vec<f64> = heads
            .iter()
            .map(|row| {
                row.iter()
                    .map(|(_, lp)| *lp)
                    .max_by(f64::total_cmp)
                    .unwrap_or(f64::NEG_INFINITY)
            })
            .collect();
        Ok(ScoreTable {
            tokens,
            candidates: full_tags.clone(),
            full_tags,
            heads,
            tag_sums: PrefixSums::new(&max_tag),
            dep_sums: PrefixSums::new(&max_dep),
            max_tag,
            max_dep,
        })
    }

    /// Copy with tag candidates pruned. Maxima still come from full rows.
    pub fn pruned(&self, cfg: &PruneConfig) -> ScoreTable {
        let candidates = self
            .full_tags
            .iter()
            .zip(&self.tokens)
            .map(|(row, word)| {
                let allowed = cfg.tag_dictionary.as_deref().and_then(|d| d.allowed(word));
                prune_tags(row, cfg.max_k, cfg.beta, allowed)
                    .unwrap_or_else(|_| vec![row[0].clone()])
            })
            .collect();
        ScoreTable {
            candidates,
            ..self.clone()
        }
    }

    /// Replace the tokens, keeping every score.
    pub fn with_tokens(self, tokens: Vec<String>) -> Result<Self, TableError> {
        if tokens.len() != self.tokens.len() {
            return Err(TableError::LengthMismatch(format!(
                "{} tokens given for a table of {}",
                tokens.len(),
                self.tokens.len()
            )));
        }
        Ok(ScoreTable { tokens, ..self })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token(&self, i: usize) -> &str {
        &self.tokens[i - 1]
    }

    /// Retained candidates of word `i`, best first.
    pub fn candidates(&self, i: usize) -> &[(Category, f64)] {
        &self.candidates[i - 1]
    }

    pub fn full_tags(&self, i: usize) -> &[(Category, f64)] {
        &self.full_tags[i - 1]
    }

    pub fn head_row(&self, i: usize) -> &[(usize, f64)] {
        &self.heads[i - 1]
    }

    /// `log P(head of i = j)`, negative infinity when absent.
    pub fn head_log(&self, dependent: usize, head: usize) -> f64 {
        let row = &self.heads[dependent - 1];
        match row.binary_search_by_key(&head, |(j, _)| *j) {
            Ok(k) => row[k].1,
            Err(_) => f64::NEG_INFINITY,
        }
    }

    pub fn max_tag_log(&self, i: usize) -> f64 {
        self.max_tag[i - 1]
    }

    pub fn max_dep_log(&self, i: usize) -> f64 {
        self.max_dep[i - 1]
    }

    pub fn total_candidates(&self) -> usize {
        self.candidates.iter().map(Vec::len).sum()
    }

    /// Best tag scores of the words outside `[i, j]`.
    pub fn outside_tag(&self, i: usize, j: usize) -> f64 {
        self.tag_sums.outside(i, j)
    }

    /// Best head scores of the words outside `[i, j]`, plus the subtree
    /// root whose head is still open.
    pub fn outside_dep(&self, i: usize, j: usize, root: usize) -> f64 {
        self.dep_sums.outside(i, j) + self.max_dep_log(root)
    }

    pub fn outside_estimate(&self, i: usize, j: usize, root: usize) -> f64 {
        self.outside_tag(i, j) + self.outside_dep(i, j, root)
    }

    /// `(inside, outside)` for every lexical item, indexed `[word-1][candidate]`.
    pub fn initial_agenda_scores(&self) -> Vec<Vec<(f64, f64)>> {
        (1..=self.len())
            .map(|i| {
                let outside = self.outside_estimate(i, i, i);
                self.candidates(i)
                    .iter()
                    .map(|(_, lp)| (*lp, outside))
                    .collect()
            })
            .collect()
    }

    /// One score-file line (no trailing newline). Writes the full tag rows.
    pub fn to_record_line(&self) -> String {
        let mut out = String::from("{\"tokens\":");
        out.push_str(&serde_json::to_string(&self.tokens).expect("strings serialize"));
        out.push_str(",\"tags\":[");
        for (i, row) in self.full_tags.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push('[');
            for (k, (cat, lp)) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                let name = serde_json::to_string(&cat.to_string()).expect("strings serialize");
                write!(out, "[{name},{}]", format_log(*lp)).unwrap();
            }
            out.push(']');
        }
        out.push_str("],\"heads\":[");
        for (i, row) in self.heads.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push('[');
            for (k, (j, lp)) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write!(out, "[{j},{}]", format_log(*lp)).unwrap();
            }
            out.push(']');
        }
        out.push_str("]}");
        out
    }
}

/// Scientific notation with 17 significant digits, exact on re-read.
pub fn format_log(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Deserialize)]
struct RawRecord {
    tokens: Vec<String>,
    tags: Vec<Vec<(String, f64)>>,
    heads: Vec<Vec<(usize, f64)>>,
}

fn parse_record(line: &str, line_no: usize) -> Result<ScoreTable, ScoreError> {
    let raw: RawRecord = serde_json::from_str(line).map_err(|e| ScoreError::Format {
        line: line_no,
        reason: e.to_string(),
    })?;
    let tags = raw
        .tags
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|(text, lp)| {
                    Category::parse(&text)
                        .map(|c| (c, lp))
                        .map_err(|e| ScoreError::Format {
                            line: line_no,
                            reason: format!("category {text:?}: {e}"),
                        })
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    ScoreTable::new(raw.tokens, tags, raw.heads).map_err(|source| ScoreError::Table {
        line: line_no,
        source,
    })
}

pub fn read_score_records<R: Read>(reader: R) -> Result<Vec<ScoreTable>, ScoreError> {
    let mut tables = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        tables.push(parse_record(&line, idx + 1)?);
    }
    Ok(tables)
}

pub fn parse_score_line(line: &str) -> Result<ScoreTable, ScoreError> {
    parse_record(line, 1)
}

pub fn load_score_file(path: &Path) -> Result<Vec<ScoreTable>, ScoreError> {
    read_score_records(File::open(path)?)
}
