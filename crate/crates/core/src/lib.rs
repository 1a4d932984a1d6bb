//! Exact A* parsing for Combinatory Categorial Grammar.
//!
//! A tree's score is the sum of per-word supertag log-probabilities and
//! per-word head-choice log-probabilities. Both factor over words, so the
//! best completion of any chart edge can be bounded from precomputed
//! per-word maxima and the first complete parse popped from the agenda is
//! optimal.
//!
//! ```
//! use astarccg::{parse, Category, HeadScheme, ParseConfig, ScoreTable};
//!
//! let np = Category::parse("NP").unwrap();
//! let vp = Category::parse("S\\NP").unwrap();
//! let table = ScoreTable::new(
//!     vec!["dogs".into(), "bark".into()],
//!     vec![vec![(np, 0.9f64.ln())], vec![(vp, 0.8f64.ln())]],
//!     vec![vec![(2, 0.9f64.ln()), (0, 0.1f64.ln())], vec![(0, 0.7f64.ln()), (1, 0.3f64.ln())]],
//! )
//! .unwrap();
//! let cfg = ParseConfig { scheme: HeadScheme::LewisRule, ..ParseConfig::default() };
//! let result = parse(&table, &cfg).unwrap();
//! assert_eq!(result.derivation.head(), 2);
//! ```

pub mod astar;
pub mod categories;
pub mod certify;
pub mod combinators;
pub mod deptree;
pub mod derivation;
pub mod io;
pub mod oracle;
pub mod random;
pub mod scores;

pub use astar::{parse, Parse, ParseConfig, ParseError, PopEvent};
pub use categories::{Category, MalformedCategory, Slash};
pub use combinators::{
    apply_rules, head_direction, nf_permitted, HeadDirection, HeadScheme, RuleId, RuleSetConfig,
};
pub use deptree::{extract_dependencies, validate, DependencyTree, ValidationError};
pub use derivation::Derivation;
pub use io::{emit, OutputFormat};
pub use oracle::{count_parses, oracle_best, OracleError};
pub use scores::{load_score_file, prune_tags, PruneConfig, ScoreError, ScoreTable, TagDictionary};
