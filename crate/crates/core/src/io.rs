//! Sentence readers, engine configuration and output emitters.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::astar::ParseConfig;
use crate::combinators::HeadScheme;
use crate::deptree::{DependencyTree, ROOT_LABEL};
use crate::derivation::Derivation;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("empty input")]
    EmptyInput,
    #[error("line {line}: {reason}")]
    Record { line: usize, reason: String },
    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Deriv,
    Conll,
    Tikz,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "deriv" => Ok(OutputFormat::Deriv),
            "conll" => Ok(OutputFormat::Conll),
            "tikz" => Ok(OutputFormat::Tikz),
            "json" => Ok(OutputFormat::Json),
            _ => Err(format!("unknown output format {s:?}")),
        }
    }
}

/// One parsed sentence in machine-readable form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonRecord {
    pub tokens: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<HeadScheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    pub derivation: Derivation,
    pub heads: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl JsonRecord {
    pub fn new(d: &Derivation, t: &DependencyTree) -> Self {
        JsonRecord {
            tokens: d.words(),
            scheme: None,
            score: None,
            derivation: d.clone(),
            heads: t.heads.clone(),
            labels: t.labels.clone(),
        }
    }

    pub fn tree(&self) -> DependencyTree {
        DependencyTree {
            heads: self.heads.clone(),
            labels: self.labels.clone(),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

pub fn parse_json_record(line: &str) -> Result<JsonRecord, IoError> {
    serde_json::from_str(line).map_err(|e| IoError::Record {
        line: 1,
        reason: e.to_string(),
    })
}

/// Stand-in for a sentence that could not be parsed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub tokens: Vec<String>,
    pub error: String,
}

impl Diagnostic {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("diagnostics serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum RecordLine {
    Failed(Diagnostic),
    Parsed(Box<JsonRecord>),
}

/// Newline-delimited JSON records. Blank lines are skipped; diagnostic
/// records are counted but not returned.
pub fn read_json_records(path: &Path) -> Result<(Vec<JsonRecord>, usize), IoError> {
    parse_json_records(&read_text(path)?)
}

pub fn parse_json_records(text: &str) -> Result<(Vec<JsonRecord>, usize), IoError> {
    let mut records = Vec::new();
    let mut failed = 0;
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(RecordLine::Parsed(r)) => records.push(*r),
            Ok(RecordLine::Failed(_)) => failed += 1,
            Err(_) => {
                // re-parse as a record for a useful message
                let reason = match serde_json::from_str::<JsonRecord>(line) {
                    Err(e) => e.to_string(),
                    Ok(_) => "unrecognised record".into(),
                };
                return Err(IoError::Record {
                    line: idx + 1,
                    reason,
                });
            }
        }
    }
    Ok((records, failed))
}

fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn emit(d: &Derivation, t: &DependencyTree, fmt: OutputFormat) -> String {
    match fmt {
        OutputFormat::Deriv => emit_deriv(d),
        OutputFormat::Conll => emit_conll(d, t),
        OutputFormat::Tikz => emit_tikz(d, t),
        OutputFormat::Json => JsonRecord::new(d, t).to_line() + "\n",
    }
}

/// `(rule head left right)` with leaves written `word|category`.
pub fn emit_deriv(d: &Derivation) -> String {
    fn go(d: &Derivation, out: &mut String) {
        match d {
            Derivation::Leaf(l) => write!(out, "{}|{}", l.word, l.category).unwrap(),
            Derivation::Binary(b) => {
                write!(out, "({} {} ", b.rule, b.head).unwrap();
                go(&b.left, out);
                out.push(' ');
                go(&b.right, out);
                out.push(')');
            }
        }
    }
    let mut out = String::new();
    go(d, &mut out);
    out.push('\n');
    out
}

fn arc_label(t: &DependencyTree, word: usize) -> &str {
    match t.label(word) {
        Some(l) => l,
        None if t.head(word) == 0 => ROOT_LABEL,
        None => "_",
    }
}

/// Ten tab-separated columns per token, then a blank line.
pub fn emit_conll(d: &Derivation, t: &DependencyTree) -> String {
    let mut out = String::new();
    for leaf in d.leaves() {
        let i = leaf.index;
        writeln!(
            out,
            "{i}\t{}\t_\t{}\t_\t_\t{}\t{}\t_\t_",
            leaf.word,
            leaf.category,
            t.head(i),
            arc_label(t, i)
        )
        .unwrap();
    }
    out.push('\n');
    out
}

/// Escape LaTeX special characters.
pub fn latex_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\textbackslash{}"),
            '$' | '&' | '%' | '#' | '_' | '{' | '}' => {
                out.push('\\');
                out.push(c);
            }
            _ => out.push(c),
        }
    }
    out
}

/// A `dependency` environment for the tikz-dependency LaTeX package.
pub fn emit_tikz(d: &Derivation, t: &DependencyTree) -> String {
    let words: Vec<String> = d.leaves().iter().map(|l| latex_escape(&l.word)).collect();
    let mut out = String::from("\\begin{dependency}\n\\begin{deptext}\n");
    out.push_str(&words.join(" \\& "));
    out.push_str(" \\\\\n\\end{deptext}\n");
    for (dep, head) in t.arcs().filter(|&(_, h)| h != 0) {
        writeln!(
            out,
            "\\depedge{{{head}}}{{{dep}}}{{{}}}",
            latex_escape(arc_label(t, dep))
        )
        .unwrap();
    }
    if let Some(root) = t.root() {
        writeln!(out, "\\deproot{{{root}}}{{{ROOT_LABEL}}}").unwrap();
    }
    out.push_str("\\end{dependency}\n");
    out
}

/// One sentence per line, whitespace-separated tokens, blank lines skipped.
pub fn read_sentences(path: &Path) -> Result<Vec<Vec<String>>, IoError> {
    parse_sentences(&read_text(path)?)
}

pub fn parse_sentences(text: &str) -> Result<Vec<Vec<String>>, IoError> {
    let sentences: Vec<Vec<String>> = text
        .lines()
        .map(|line| {
            line.split_whitespace()
                .map(str::to_string)
                .collect::<Vec<_>>()
        })
        .filter(|tokens| !tokens.is_empty())
        .collect();
    if sentences.is_empty() {
        return Err(IoError::EmptyInput);
    }
    Ok(sentences)
}

fn parse_bool(value: &str) -> Option<bool> {
    match value {
        "on" | "true" | "yes" | "1" => Some(true),
        "off" | "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

/// Apply `key = value` lines on top of `base`. Recognised keys: `scheme`,
/// `nf`, `beta`, `max_tags`, `use_dep`, `max_composition_degree`,
/// `punctuation` (whitespace-separated symbols). `#` starts a comment line.
pub fn parse_engine_config(text: &str, base: ParseConfig) -> Result<ParseConfig, IoError> {
    let mut cfg = base;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |reason: String| IoError::Config {
            line: line_no,
            reason,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad("expected key=value".into()))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "scheme" => cfg.scheme = value.parse().map_err(|e| bad(format!("{e}")))?,
            "nf" => {
                cfg.rules.normal_form =
                    parse_bool(value).ok_or_else(|| bad(format!("bad boolean {value:?}")))?
            }
            "use_dep" => {
                cfg.use_dep =
                    parse_bool(value).ok_or_else(|| bad(format!("bad boolean {value:?}")))?
            }
            "beta" => {
                let beta: f64 = value
                    .parse()
                    .map_err(|_| bad(format!("bad number {value:?}")))?;
                if !(0.0..1.0).contains(&beta) {
                    return Err(bad(format!("beta {beta} outside [0, 1)")));
                }
                cfg.pruning.beta = beta;
            }
            "max_tags" => {
                let k: usize = value
                    .parse()
                    .map_err(|_| bad(format!("bad integer {value:?}")))?;
                if k == 0 {
                    return Err(bad("max_tags must be at least 1".into()));
                }
                cfg.pruning.max_k = k;
            }
            "max_composition_degree" => {
                let d: u8 = value
                    .parse()
                    .map_err(|_| bad(format!("bad integer {value:?}")))?;
                if d == 0 {
                    return Err(bad("max_composition_degree must be at least 1".into()));
                }
                cfg.rules.max_composition_degree = d;
            }
            "punctuation" => {
                cfg.rules.punctuation = value.split_whitespace().map(str::to_string).collect();
            }
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
    }
    Ok(cfg)
}

pub fn load_engine_config(path: &Path, base: ParseConfig) -> Result<ParseConfig, IoError> {
    parse_engine_config(&read_text(path)?, base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::categories::Category;
    use crate::combinators::RuleId;
    use crate::deptree::extract_dependencies;

    fn cat(s: &str) -> Category {
        Category::parse(s).unwrap()
    }

    fn dogs_bark() -> (Derivation, DependencyTree) {
        let d = Derivation::combine(
            RuleId::BackwardApplication,
            cat("S"),
            Derivation::leaf(1, "dogs", cat("NP"), -0.1),
            Derivation::leaf(2, "bark", cat("S\\NP"), -0.2),
            HeadScheme::LewisRule,
        );
        let t = extract_dependencies(&d, HeadScheme::LewisRule);
        (d, t)
    }

    #[test]
    fn tikz_edges() {
        let (d, t) = dogs_bark();
        let out = emit(&d, &t, OutputFormat::Tikz);
        assert!(out.contains("\\depedge{2}{1}{ba}\n"), "{out}");
        assert!(out.contains("\\deproot{2}{root}\n"), "{out}");
        assert!(out.contains("dogs \\& bark \\\\\n"));
    }

    #[test]
    fn conll_single_word() {
        let d = Derivation::leaf(1, "go", cat("S"), 0.0);
        let t = extract_dependencies(&d, HeadScheme::HeadFirst);
        assert_eq!(
            emit(&d, &t, OutputFormat::Conll),
            "1\tgo\t_\tS\t_\t_\t0\troot\t_\t_\n\n"
        );
        let unlabeled = DependencyTree::unlabeled(vec![0]);
        assert!(emit_conll(&d, &unlabeled).contains("\t0\troot\t"));
    }

    #[test]
    fn conll_line_count() {
        let (d, t) = dogs_bark();
        let out = emit(&d, &t, OutputFormat::Conll);
        assert_eq!(out.lines().count(), 3);
        assert!(out.starts_with("1\tdogs\t_\tNP\t_\t_\t2\tba\t_\t_\n"));
    }

    #[test]
    fn deriv_line() {
        let (d, t) = dogs_bark();
        assert_eq!(
            emit(&d, &t, OutputFormat::Deriv),
            "(ba 2 dogs|NP bark|S\\NP)\n"
        );
    }

    #[test]
    fn json_round_trip() {
        let (d, t) = dogs_bark();
        let line = emit(&d, &t, OutputFormat::Json);
        let rec = parse_json_record(line.trim_end()).unwrap();
        assert_eq!(rec.derivation, d);
        assert_eq!(rec.heads, t.heads);
        assert_eq!(rec.tree(), t);
        assert_eq!(rec.tokens, ["dogs", "bark"]);
    }

    #[test]
    fn record_files_skip_diagnostics() {
        let (d, t) = dogs_bark();
        let diag = Diagnostic {
            tokens: vec!["x".into()],
            error: "noparse".into(),
        };
        let text = format!(
            "{}\n\n{}\n",
            JsonRecord::new(&d, &t).to_line(),
            diag.to_line()
        );
        let (records, failed) = parse_json_records(&text).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(failed, 1);
        assert_eq!(parse_json_records("").unwrap().0.len(), 0);
        let err = parse_json_records("{\"tokens\":[]}\n").unwrap_err();
        assert!(matches!(err, IoError::Record { line: 1, .. }));
    }

    #[test]
    fn escaping() {
        assert_eq!(
            latex_escape("a&b_c\\d$%#{}"),
            "a\\&b\\_c\\textbackslash{}d\\$\\%\\#\\{\\}"
        );
    }

    #[test]
    fn sentences() {
        assert_eq!(
            parse_sentences("My dog\n").unwrap(),
            vec![vec!["My", "dog"]]
        );
        assert_eq!(
            parse_sentences("  a   b \n\n c\n").unwrap(),
            vec![
                vec!["a".to_string(), "b".to_string()],
                vec!["c".to_string()]
            ]
        );
        assert!(matches!(parse_sentences(""), Err(IoError::EmptyInput)));
        assert!(matches!(
            parse_sentences("\n  \n"),
            Err(IoError::EmptyInput)
        ));
    }

    #[test]
    fn engine_config() {
        let text = "# comment\nscheme = lewis\nnf=off\nbeta=0.001\nmax_tags=10\nuse_dep=false\nmax_composition_degree=3\npunctuation = , . ! \n";
        let cfg = parse_engine_config(text, ParseConfig::default()).unwrap();
        assert_eq!(cfg.scheme, HeadScheme::LewisRule);
        assert!(!cfg.rules.normal_form);
        assert_eq!(cfg.pruning.beta, 0.001);
        assert_eq!(cfg.pruning.max_k, 10);
        assert!(!cfg.use_dep);
        assert_eq!(cfg.rules.max_composition_degree, 3);
        assert_eq!(cfg.rules.punctuation.len(), 3);

        for bad in [
            "scheme=x",
            "nf=maybe",
            "beta=1.5",
            "max_tags=0",
            "colour=red",
            "novalue",
        ] {
            assert!(
                matches!(
                    parse_engine_config(bad, ParseConfig::default()),
                    Err(IoError::Config { line: 1, .. })
                ),
                "{bad}"
            );
        }
    }
}
