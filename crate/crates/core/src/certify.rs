//! Cross-check the A* engine against the exhaustive oracle.

use crate::astar::{parse, ParseConfig, ParseError};
use crate::combinators::HeadScheme;
use crate::oracle::{oracle_best_bounded, OracleError};
use crate::scores::ScoreTable;

/// Largest allowed difference between the A* and oracle scores.
pub const OPTIMALITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Variant {
    pub scheme: HeadScheme,
    pub normal_form: bool,
    pub use_dep: bool,
}

impl Variant {
    /// Every scheme with normal form on and off, dependencies on and off.
    pub fn all() -> Vec<Variant> {
        let mut out = Vec::with_capacity(12);
        for scheme in HeadScheme::ALL {
            for normal_form in [true, false] {
                for use_dep in [true, false] {
                    out.push(Variant {
                        scheme,
                        normal_form,
                        use_dep,
                    });
                }
            }
        }
        out
    }

    pub fn apply(&self, base: &ParseConfig) -> ParseConfig {
        let mut cfg = base.clone();
        cfg.scheme = self.scheme;
        cfg.rules.normal_form = self.normal_form;
        cfg.use_dep = self.use_dep;
        cfg
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "scheme={} nf={} dep={}",
            self.scheme,
            if self.normal_form { "on" } else { "off" },
            if self.use_dep { "on" } else { "off" }
        )
    }
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub instance: usize,
    pub variant: Variant,
    pub astar: Result<f64, ParseError>,
    pub oracle: Result<f64, OracleError>,
    pub table: ScoreTable,
}

impl Violation {
    pub fn gap(&self) -> f64 {
        match (&self.astar, &self.oracle) {
            (Ok(a), Ok(o)) => (a - o).abs(),
            _ => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CheckReport {
    pub instances: usize,
    pub runs: usize,
    /// Runs where both sides agree there is no parse.
    pub no_parse: usize,
    pub max_gap: f64,
    pub violations: Vec<Violation>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.max_gap <= OPTIMALITY_TOLERANCE
    }
}

/// Run every variant of `base` over every table with both search methods.
/// Fails only if a sentence is too long for the oracle.
pub fn certify(
    tables: &[ScoreTable],
    base: &ParseConfig,
    bound: usize,
) -> Result<CheckReport, OracleError> {
    if let Some(t) = tables.iter().find(|t| t.len() > bound) {
        return Err(OracleError::BoundExceeded {
            len: t.len(),
            bound,
        });
    }
    let mut report = CheckReport {
        instances: tables.len(),
        ..CheckReport::default()
    };
    for (idx, table) in tables.iter().enumerate() {
        for variant in Variant::all() {
            let cfg = variant.apply(base);
            report.runs += 1;
            let astar = parse(table, &cfg).map(|p| p.score);
            let oracle = oracle_best_bounded(table, &cfg, bound).map(|(s, _)| s);
            let ok = match (&astar, &oracle) {
                (Ok(a), Ok(o)) => {
                    let gap = (a - o).abs();
                    report.max_gap = report.max_gap.max(gap);
                    gap <= OPTIMALITY_TOLERANCE
                }
                (Err(ParseError::NoParse), Err(OracleError::NoParse)) => {
                    report.no_parse += 1;
                    true
                }
                _ => false,
            };
            if !ok {
                let gap = match (&astar, &oracle) {
                    (Ok(a), Ok(o)) => (a - o).abs(),
                    _ => f64::INFINITY,
                };
                report.max_gap = report.max_gap.max(gap);
                report.violations.push(Violation {
                    instance: idx,
                    variant,
                    astar,
                    oracle,
                    table: table.clone(),
                });
            }
        }
    }
    Ok(report)
}
