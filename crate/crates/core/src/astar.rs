//! A* search over the chart with supertag- and head-factored scores.
//!
//! An edge's inside score holds the tag scores of its words and the head
//! scores of every word except its own head word, whose attachment is not
//! resolved until a parent combination (or the final root attachment).
//! Edges are therefore keyed by their head position as well as by span and
//! category: two edges that differ only in head word can complete
//! differently.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::categories::Category;
use crate::combinators::{
    apply_rules, head_direction, nf_permitted_class, HeadDirection, HeadScheme, NfClass, RuleId,
    RuleSetConfig,
};
use crate::derivation::{Binary, Derivation, Leaf};
use crate::scores::{PruneConfig, ScoreTable};

#[derive(Debug, Clone)]
pub struct ParseConfig {
    pub scheme: HeadScheme,
    pub rules: RuleSetConfig,
    /// Score head choices. When off, only tag scores count.
    pub use_dep: bool,
    pub pruning: PruneConfig,
    /// Pop limit; `None` means `10 * N * C^2` for `C` retained candidates.
    pub max_agenda_pops: Option<usize>,
    /// Record every pop in [`Parse::trace`].
    pub trace: bool,
    /// Keep popping after the first final item until the agenda is empty.
    pub exhaust_agenda: bool,
    /// Negative control: replaces the outside estimate with an
    /// inadmissible one. Never set outside of testing.
    pub corrupt_heuristic: bool,
}

impl Default for ParseConfig {
    fn default() -> Self {
        ParseConfig {
            scheme: HeadScheme::default(),
            rules: RuleSetConfig::default(),
            use_dep: true,
            pruning: PruneConfig::default(),
            max_agenda_pops: None,
            trace: false,
            exhaust_agenda: false,
            corrupt_heuristic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("no parse")]
    NoParse,
    #[error("agenda pop budget of {0} exhausted")]
    Budget(usize),
}

pub type ItemId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backpointer {
    Lexical,
    Binary(ItemId, ItemId),
    /// The root attachment applied to a complete edge.
    Goal(ItemId),
}

#[derive(Debug, Clone)]
pub struct ChartItem {
    pub start: usize,
    pub end: usize,
    pub category: Category,
    pub head: usize,
    pub inside: f64,
    pub producer: Option<RuleId>,
    pub backpointers: Backpointer,
    pub is_final: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct ChartKey {
    start: usize,
    end: usize,
    category: Category,
    head: usize,
    is_final: bool,
    nf: NfClass,
}

#[derive(Debug, Clone)]
pub struct AgendaItem {
    pub item: ChartItem,
    pub priority: f64,
    /// Secondary key, smaller pops first. Arc length in tag-only mode.
    pub tie: usize,
    pub seq: u64,
}

impl PartialEq for AgendaItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for AgendaItem {}

impl PartialOrd for AgendaItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AgendaItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.tie.cmp(&self.tie))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Items popped so far, at most one per key.
#[derive(Debug)]
pub struct Chart {
    items: Vec<ChartItem>,
    keys: HashMap<ChartKey, ItemId>,
    by_start: Vec<Vec<ItemId>>,
    by_end: Vec<Vec<ItemId>>,
    track_nf: bool,
}

impl Chart {
    /// `track_nf` adds the producer's normal-form class to the key, which
    /// keeps the search exact when normal-form constraints are on.
    pub fn new(len: usize, track_nf: bool) -> Self {
        Chart {
            items: Vec::new(),
            keys: HashMap::new(),
            by_start: vec![Vec::new(); len + 2],
            by_end: vec![Vec::new(); len + 2],
            track_nf,
        }
    }

    /// Insert unless an item with the same key is already present.
    pub fn insert(&mut self, item: ChartItem) -> Option<ItemId> {
        let key = ChartKey {
            start: item.start,
            end: item.end,
            category: item.category.clone(),
            head: item.head,
            is_final: item.is_final,
            nf: if self.track_nf {
                NfClass::of(item.producer)
            } else {
                NfClass::Plain
            },
        };
        if self.keys.contains_key(&key) {
            return None;
        }
        let id = self.items.len();
        if !item.is_final {
            self.by_start[item.start].push(id);
            self.by_end[item.end].push(id);
        }
        self.items.push(item);
        self.keys.insert(key, id);
        Some(id)
    }

    pub fn get(&self, id: ItemId) -> &ChartItem {
        &self.items[id]
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Rebuild the derivation rooted at `id`.
    pub fn derivation(&self, id: ItemId, table: &ScoreTable) -> Derivation {
        let item = &self.items[id];
        match item.backpointers {
            Backpointer::Goal(goal) => self.derivation(goal, table),
            Backpointer::Lexical => Derivation::Leaf(Leaf {
                index: item.start,
                word: table.token(item.start).to_string(),
                category: item.category.clone(),
                log_prob: item.inside,
            }),
            Backpointer::Binary(l, r) => Derivation::Binary(Binary {
                rule: item.producer.expect("binary items record their rule"),
                category: item.category.clone(),
                head: item.head,
                left: Box::new(self.derivation(l, table)),
                right: Box::new(self.derivation(r, table)),
            }),
        }
    }
}

/// One agenda pop, printed as `POP i j category headPos inside priority`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopEvent {
    pub start: usize,
    pub end: usize,
    pub category: Category,
    pub head: usize,
    pub inside: f64,
    pub priority: f64,
    pub is_final: bool,
}

impl fmt::Display for PopEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "POP {} {} {} {} {} {}",
            self.start, self.end, self.category, self.head, self.inside, self.priority
        )
    }
}

#[derive(Debug, Clone)]
pub struct Parse {
    pub derivation: Derivation,
    /// Inside score of the first popped final item.
    pub score: f64,
    pub pops: usize,
    pub trace: Vec<PopEvent>,
    /// Inside scores of every final item pushed (all of them when
    /// `exhaust_agenda` is set).
    pub enqueued_finals: Vec<f64>,
}

/// Admissible estimate of the best completion of an edge.
pub fn outside_score(
    table: &ScoreTable,
    cfg: &ParseConfig,
    start: usize,
    end: usize,
    head: usize,
) -> f64 {
    let mut outside = table.outside_tag(start, end);
    if cfg.use_dep {
        outside += table.outside_dep(start, end, head);
    }
    if cfg.corrupt_heuristic {
        outside = 3.0 * outside - 1.0;
    }
    outside
}

fn agenda_item(item: ChartItem, priority: f64, tie: usize, seq: &mut u64) -> AgendaItem {
    *seq += 1;
    AgendaItem {
        item,
        priority,
        tie,
        seq: *seq,
    }
}

fn is_goal(item: &ChartItem, n: usize) -> bool {
    item.start == 1
        && item.end == n
        && !item.is_final
        && !matches!(item.category, Category::Conjoined(_))
}

fn combine(
    left_id: ItemId,
    right_id: ItemId,
    chart: &Chart,
    table: &ScoreTable,
    cfg: &ParseConfig,
    seq: &mut u64,
    out: &mut Vec<AgendaItem>,
) {
    let (left, right) = (chart.get(left_id), chart.get(right_id));
    for (category, rule) in apply_rules(&left.category, &right.category, &cfg.rules) {
        if cfg.rules.normal_form
            && !nf_permitted_class(
                rule,
                NfClass::of(left.producer),
                NfClass::of(right.producer),
            )
        {
            continue;
        }
        let (head, dependent) =
            match head_direction(rule, &left.category, &right.category, cfg.scheme) {
                HeadDirection::Left => (left.head, right.head),
                HeadDirection::Right => (right.head, left.head),
            };
        let arc = if cfg.use_dep {
            table.head_log(dependent, head)
        } else {
            0.0
        };
        if arc == f64::NEG_INFINITY {
            continue;
        }
        let inside = left.inside + right.inside + arc;
        let priority = inside + outside_score(table, cfg, left.start, right.end, head);
        if !priority.is_finite() {
            continue;
        }
        let tie = if cfg.use_dep {
            0
        } else {
            head.abs_diff(dependent)
        };
        let item = ChartItem {
            start: left.start,
            end: right.end,
            category,
            head,
            inside,
            producer: Some(rule),
            backpointers: Backpointer::Binary(left_id, right_id),
            is_final: false,
        };
        out.push(agenda_item(item, priority, tie, seq));
    }
}

/// New agenda items from combining a freshly inserted item with its chart
/// neighbours on either side.
pub fn expand(
    popped: ItemId,
    chart: &Chart,
    table: &ScoreTable,
    cfg: &ParseConfig,
    seq: &mut u64,
) -> Vec<AgendaItem> {
    let item = chart.get(popped);
    let mut out = Vec::new();
    if item.start > 1 {
        for &left in &chart.by_end[item.start - 1] {
            combine(left, popped, chart, table, cfg, seq, &mut out);
        }
    }
    for &right in &chart.by_start[item.end + 1] {
        combine(popped, right, chart, table, cfg, seq, &mut out);
    }
    out
}

/// Attach the head word of a complete edge to the virtual root.
pub fn finalize(
    goal: ItemId,
    chart: &Chart,
    table: &ScoreTable,
    cfg: &ParseConfig,
    seq: &mut u64,
) -> Option<AgendaItem> {
    let g = chart.get(goal);
    let root_arc = if cfg.use_dep {
        table.head_log(g.head, 0)
    } else {
        0.0
    };
    let inside = g.inside + root_arc;
    if !inside.is_finite() {
        return None;
    }
    let item = ChartItem {
        start: g.start,
        end: g.end,
        category: g.category.clone(),
        head: g.head,
        inside,
        producer: g.producer,
        backpointers: Backpointer::Goal(goal),
        is_final: true,
    };
    Some(agenda_item(item, inside, 0, seq))
}

/// Default pop budget for a pruned table.
pub fn default_pop_budget(table: &ScoreTable) -> usize {
    let c = table.total_candidates();
    10usize
        .saturating_mul(table.len())
        .saturating_mul(c)
        .saturating_mul(c)
}

/// Find the highest-scoring derivation. The table is pruned with
/// `cfg.pruning` first.
pub fn parse(table: &ScoreTable, cfg: &ParseConfig) -> Result<Parse, ParseError> {
    let table = table.pruned(&cfg.pruning);
    let n = table.len();
    let budget = cfg
        .max_agenda_pops
        .unwrap_or_else(|| default_pop_budget(&table));

    let mut chart = Chart::new(n, cfg.rules.normal_form);
    let mut agenda = BinaryHeap::new();
    let mut seq = 0u64;

    for i in 1..=n {
        let outside = outside_score(&table, cfg, i, i, i);
        for (category, lp) in table.candidates(i) {
            let priority = lp + outside;
            if !priority.is_finite() {
                continue;
            }
            let item = ChartItem {
                start: i,
                end: i,
                category: category.clone(),
                head: i,
                inside: *lp,
                producer: None,
                backpointers: Backpointer::Lexical,
                is_final: false,
            };
            agenda.push(agenda_item(item, priority, 0, &mut seq));
        }
    }

    let mut pops = 0usize;
    let mut trace = Vec::new();
    let mut enqueued_finals = Vec::new();
    let mut best: Option<(ItemId, f64)> = None;

    while let Some(entry) = agenda.pop() {
        pops += 1;
        if pops > budget {
            return Err(ParseError::Budget(budget));
        }
        if cfg.trace {
            trace.push(PopEvent {
                start: entry.item.start,
                end: entry.item.end,
                category: entry.item.category.clone(),
                head: entry.item.head,
                inside: entry.item.inside,
                priority: entry.priority,
                is_final: entry.item.is_final,
            });
        }
        let is_final = entry.item.is_final;
        let inside = entry.item.inside;
        let Some(id) = chart.insert(entry.item) else {
            continue;
        };
        if is_final {
            if best.is_none() {
                best = Some((id, inside));
                if !cfg.exhaust_agenda {
                    break;
                }
            }
            continue;
        }
        if is_goal(chart.get(id), n) {
            if let Some(fin) = finalize(id, &chart, &table, cfg, &mut seq) {
                enqueued_finals.push(fin.item.inside);
                agenda.push(fin);
            }
        }
        for next in expand(id, &chart, &table, cfg, &mut seq) {
            agenda.push(next);
        }
    }

    let (id, score) = best.ok_or(ParseError::NoParse)?;
    Ok(Parse {
        derivation: chart.derivation(id, &table),
        score,
        pops,
        trace,
        enqueued_finals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deptree::extract_dependencies;

    fn cat(s: &str) -> Category {
        Category::parse(s).unwrap()
    }

    fn dogs_bark() -> ScoreTable {
        ScoreTable::new(
            vec!["dogs".into(), "bark".into()],
            vec![
                vec![(cat("NP"), 0.9f64.ln())],
                vec![(cat("S\\NP"), 0.8f64.ln())],
            ],
            vec![
                vec![(2, 0.9f64.ln()), (0, 0.1f64.ln())],
                vec![(0, 0.7f64.ln()), (1, 0.3f64.ln())],
            ],
        )
        .unwrap()
    }

    fn cfg(scheme: HeadScheme) -> ParseConfig {
        ParseConfig {
            scheme,
            ..ParseConfig::default()
        }
    }

    #[test]
    fn single_certain_word() {
        let t = ScoreTable::new(
            vec!["go".into()],
            vec![vec![(cat("S"), 0.0)]],
            vec![vec![(0, 0.0)]],
        )
        .unwrap();
        let p = parse(&t, &ParseConfig::default()).unwrap();
        assert_eq!(p.score, 0.0);
        assert!(matches!(p.derivation, Derivation::Leaf(_)));
    }

    #[test]
    fn single_word_adds_root_attachment() {
        let t = ScoreTable::new(
            vec!["go".into()],
            vec![vec![(cat("S"), -0.25)]],
            vec![vec![(0, -0.5)]],
        )
        .unwrap();
        let p = parse(&t, &ParseConfig::default()).unwrap();
        assert_eq!(p.score, -0.75);
    }

    #[test]
    fn dogs_bark_lewis() {
        let p = parse(&dogs_bark(), &cfg(HeadScheme::LewisRule)).unwrap();
        let expected = 0.9f64.ln() + 0.8f64.ln() + 0.9f64.ln() + 0.7f64.ln();
        assert!((p.score - expected).abs() < 1e-12);
        assert!((p.score - -0.7905).abs() < 1e-4);
        let Derivation::Binary(b) = &p.derivation else {
            panic!("expected a binary derivation")
        };
        assert_eq!(b.rule, RuleId::BackwardApplication);
        assert_eq!(b.head, 2);
        assert_eq!(
            extract_dependencies(&p.derivation, HeadScheme::LewisRule).heads,
            vec![2, 0]
        );
    }

    #[test]
    fn dogs_bark_headfirst_pays_for_its_arcs() {
        let p = parse(&dogs_bark(), &cfg(HeadScheme::HeadFirst)).unwrap();
        let expected = 0.9f64.ln() + 0.8f64.ln() + 0.3f64.ln() + 0.1f64.ln();
        assert!((p.score - expected).abs() < 1e-12);
    }

    #[test]
    fn tag_only_mode_ignores_heads() {
        let c = ParseConfig {
            use_dep: false,
            ..cfg(HeadScheme::LewisRule)
        };
        let p = parse(&dogs_bark(), &c).unwrap();
        assert!((p.score - (0.9f64.ln() + 0.8f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn missing_arc_blocks_combination() {
        // bark may not head dogs: LewisRule has no way to build the tree.
        let t = ScoreTable::new(
            vec!["dogs".into(), "bark".into()],
            vec![vec![(cat("NP"), -0.1)], vec![(cat("S\\NP"), -0.2)]],
            vec![vec![(0, -1.0)], vec![(0, -0.1), (1, -0.3)]],
        )
        .unwrap();
        assert_eq!(
            parse(&t, &cfg(HeadScheme::LewisRule)).unwrap_err(),
            ParseError::NoParse
        );
        // HeadFirst needs dogs -> root and bark -> dogs, both present.
        let p = parse(&t, &cfg(HeadScheme::HeadFirst)).unwrap();
        assert!((p.score - (-0.1 - 0.2 - 0.3 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn missing_root_entry_suppresses_final() {
        let t =
            ScoreTable::new(vec!["go".into()], vec![vec![(cat("S"), 0.0)]], vec![vec![]]).unwrap();
        assert_eq!(
            parse(&t, &ParseConfig::default()).unwrap_err(),
            ParseError::NoParse
        );
    }

    #[test]
    fn root_choice_decides_the_winner() {
        // Two categories for "a b": A/B B (head a under LewisRule) or
        // B C\B (head b). Tags favour the first; the root row favours b.
        let t = ScoreTable::new(
            vec!["a".into(), "b".into()],
            vec![
                vec![(cat("A/B"), 0.6f64.ln()), (cat("B"), 0.4f64.ln())],
                vec![(cat("B"), 0.6f64.ln()), (cat("C\\B"), 0.4f64.ln())],
            ],
            vec![
                vec![(0, 0.01f64.ln()), (2, 0.99f64.ln())],
                vec![(0, 0.99f64.ln()), (1, 0.01f64.ln())],
            ],
        )
        .unwrap();
        let c = ParseConfig {
            exhaust_agenda: true,
            ..cfg(HeadScheme::LewisRule)
        };
        let p = parse(&t, &c).unwrap();
        assert_eq!(p.enqueued_finals.len(), 2);
        assert_eq!(p.derivation.head(), 2);
        let best = 0.4f64.ln() * 2.0 + 0.99f64.ln() * 2.0;
        assert!((p.score - best).abs() < 1e-12);
    }

    #[test]
    fn finalize_adds_root_arc() {
        let t = dogs_bark();
        let c = cfg(HeadScheme::LewisRule);
        let mut chart = Chart::new(2, true);
        let goal = chart
            .insert(ChartItem {
                start: 1,
                end: 2,
                category: cat("S"),
                head: 2,
                inside: -0.33,
                producer: Some(RuleId::BackwardApplication),
                backpointers: Backpointer::Lexical,
                is_final: false,
            })
            .unwrap();
        let mut seq = 0;
        let fin = finalize(goal, &chart, &t, &c, &mut seq).unwrap();
        assert!((fin.item.inside - (-0.33 + 0.7f64.ln())).abs() < 1e-12);
        assert!((fin.item.inside - -0.6867).abs() < 1e-4);
        assert!(fin.item.is_final);
        assert_eq!(fin.priority, fin.item.inside);
    }

    fn lexical(i: usize, c: &str, head: usize, inside: f64) -> ChartItem {
        ChartItem {
            start: i,
            end: i,
            category: cat(c),
            head,
            inside,
            producer: None,
            backpointers: Backpointer::Lexical,
            is_final: false,
        }
    }

    #[test]
    fn chart_dedupes_on_full_key() {
        let mut chart = Chart::new(3, true);
        assert!(chart.insert(lexical(1, "NP", 1, -0.1)).is_some());
        assert!(chart.insert(lexical(1, "NP", 1, -0.5)).is_none());
        assert!(chart.insert(lexical(1, "N", 1, -0.5)).is_some());

        let mut spanning = lexical(1, "S", 1, -1.0);
        spanning.end = 2;
        let mut other_head = spanning.clone();
        other_head.head = 2;
        assert!(chart.insert(spanning.clone()).is_some());
        assert!(chart.insert(other_head).is_some());

        let mut composed = spanning.clone();
        composed.producer = Some(RuleId::ForwardComposition(1));
        assert!(chart.insert(composed.clone()).is_some());
        let mut untracked = Chart::new(3, false);
        assert!(untracked.insert(spanning).is_some());
        assert!(untracked.insert(composed).is_none());
        assert_eq!(chart.len(), 5);
    }

    #[test]
    fn expand_adds_the_resolved_arc() {
        let t = dogs_bark();
        let c = cfg(HeadScheme::LewisRule);
        let mut chart = Chart::new(2, true);
        let mut seq = 0;
        chart.insert(lexical(1, "NP", 1, 0.9f64.ln())).unwrap();
        let bark = chart.insert(lexical(2, "S\\NP", 2, 0.8f64.ln())).unwrap();
        let items = expand(bark, &chart, &t, &c, &mut seq);
        assert_eq!(items.len(), 1);
        let e = &items[0].item;
        assert_eq!((e.start, e.end, e.head), (1, 2, 2));
        assert!((e.inside - (0.9f64.ln() + 0.8f64.ln() + t.head_log(1, 2))).abs() < 1e-12);

        let no_dep = ParseConfig {
            use_dep: false,
            ..c
        };
        let items = expand(bark, &chart, &t, &no_dep, &mut seq);
        assert!((items[0].item.inside - (0.9f64.ln() + 0.8f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn trace_lines() {
        let c = ParseConfig {
            trace: true,
            ..cfg(HeadScheme::LewisRule)
        };
        let p = parse(&dogs_bark(), &c).unwrap();
        assert_eq!(p.trace.len(), p.pops);
        assert!(p.trace.last().unwrap().is_final);
        let line = p.trace[0].to_string();
        assert!(line.starts_with("POP "), "{line}");
        assert_eq!(line.split(' ').count(), 7);
    }

    #[test]
    fn budget_is_enforced() {
        let c = ParseConfig {
            max_agenda_pops: Some(1),
            ..cfg(HeadScheme::LewisRule)
        };
        assert_eq!(parse(&dogs_bark(), &c).unwrap_err(), ParseError::Budget(1));
    }

    #[test]
    fn agenda_order() {
        let item = lexical(1, "NP", 1, -1.0);
        let a = AgendaItem {
            item: item.clone(),
            priority: -1.0,
            tie: 0,
            seq: 2,
        };
        let b = AgendaItem {
            item: item.clone(),
            priority: -1.0,
            tie: 0,
            seq: 1,
        };
        let c = AgendaItem {
            item: item.clone(),
            priority: -0.5,
            tie: 9,
            seq: 3,
        };
        let d = AgendaItem {
            item,
            priority: -1.0,
            tie: 1,
            seq: 0,
        };
        let mut heap: BinaryHeap<_> = vec![a, b, c, d].into_iter().collect();
        let order: Vec<u64> = std::iter::from_fn(|| heap.pop()).map(|e| e.seq).collect();
        assert_eq!(order, vec![3, 1, 2, 0]);
    }
}
