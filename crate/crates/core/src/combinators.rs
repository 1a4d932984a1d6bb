//! Binary combinatory rules, normal-form filtering and head assignment.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::categories::Category;

/// Atomic base of the coordinating conjunction category.
pub const CONJ_BASE: &str = "conj";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    /// `X/Y Y => X`
    ForwardApplication,
    /// `Y X\Y => X`
    BackwardApplication,
    /// `X/Y Y/Z1../Zd => X/Z1../Zd`, harmonic, of the given degree.
    ForwardComposition(u8),
    /// `Y/Z X\Y => X/Z`
    BackwardCrossedComposition,
    /// `conj X => X[conj]` and `X X[conj] => X`
    Conjunction,
    /// `P X => X` for punctuation `P`.
    RemovePunctuationLeft,
    /// `X P => X` for punctuation `P`.
    RemovePunctuationRight,
}

impl RuleId {
    /// Short label used in derivation output and as the default arc label.
    pub fn label(self) -> String {
        match self {
            RuleId::ForwardApplication => "fa".into(),
            RuleId::BackwardApplication => "ba".into(),
            RuleId::ForwardComposition(1) => "fc".into(),
            RuleId::ForwardComposition(d) => format!("fc{d}"),
            RuleId::BackwardCrossedComposition => "bx".into(),
            RuleId::Conjunction => "conj".into(),
            RuleId::RemovePunctuationLeft => "lp".into(),
            RuleId::RemovePunctuationRight => "rp".into(),
        }
    }

    fn is_forward_primary(self) -> bool {
        matches!(
            self,
            RuleId::ForwardApplication | RuleId::ForwardComposition(_)
        )
    }

    fn is_backward_primary(self) -> bool {
        matches!(
            self,
            RuleId::BackwardApplication | RuleId::BackwardCrossedComposition
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown rule label {0:?}")]
pub struct UnknownRule(pub String);

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for RuleId {
    type Err = UnknownRule;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "fa" => RuleId::ForwardApplication,
            "ba" => RuleId::BackwardApplication,
            "fc" => RuleId::ForwardComposition(1),
            "bx" => RuleId::BackwardCrossedComposition,
            "conj" => RuleId::Conjunction,
            "lp" => RuleId::RemovePunctuationLeft,
            "rp" => RuleId::RemovePunctuationRight,
            other => match other.strip_prefix("fc").and_then(|d| d.parse::<u8>().ok()) {
                Some(d) if d >= 1 => RuleId::ForwardComposition(d),
                _ => return Err(UnknownRule(s.to_string())),
            },
        })
    }
}

impl Serialize for RuleId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for RuleId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// How a binary combination picks its head child.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadScheme {
    /// Functor heads, except modifiers and type-raised functors.
    #[serde(rename = "lewis")]
    LewisRule,
    /// The left child always heads.
    #[default]
    HeadFirst,
    /// The right child always heads.
    HeadFinal,
}

impl HeadScheme {
    pub const ALL: [HeadScheme; 3] = [
        HeadScheme::LewisRule,
        HeadScheme::HeadFirst,
        HeadScheme::HeadFinal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HeadScheme::LewisRule => "lewis",
            HeadScheme::HeadFirst => "headfirst",
            HeadScheme::HeadFinal => "headfinal",
        }
    }
}

impl fmt::Display for HeadScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown head scheme {0:?} (expected lewis, headfirst or headfinal)")]
pub struct UnknownScheme(pub String);

impl FromStr for HeadScheme {
    type Err = UnknownScheme;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lewis" | "lewisrule" => Ok(HeadScheme::LewisRule),
            "headfirst" => Ok(HeadScheme::HeadFirst),
            "headfinal" => Ok(HeadScheme::HeadFinal),
            _ => Err(UnknownScheme(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeadDirection {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSetConfig {
    pub max_composition_degree: u8,
    pub allow_conjunction: bool,
    /// Atomic bases treated as punctuation.
    pub punctuation: BTreeSet<String>,
    pub normal_form: bool,
}

impl Default for RuleSetConfig {
    fn default() -> Self {
        RuleSetConfig {
            max_composition_degree: 2,
            allow_conjunction: true,
            punctuation: [",", ".", ";", ":"].iter().map(|s| s.to_string()).collect(),
            normal_form: true,
        }
    }
}

impl RuleSetConfig {
    pub fn is_punctuation(&self, c: &Category) -> bool {
        match c {
            Category::Atomic { base, .. } => self.punctuation.contains(&**base),
            _ => false,
        }
    }
}

fn is_conj_word(c: &Category) -> bool {
    c.base() == Some(CONJ_BASE)
}

/// Result of a modifier keeps the features of whatever it modifies.
fn modifier_result(functor: &Category, result: &Category, modified: &Category) -> Category {
    if functor.is_modifier() {
        result.unify(modified).unwrap_or_else(|| result.clone())
    } else {
        result.clone()
    }
}

/// Peel `degree` forward arguments off `cat`. Returns the core category and
/// the peeled arguments, innermost first.
fn peel_forward(cat: &Category, degree: u8) -> Option<(Category, Vec<Category>)> {
    let mut args = Vec::with_capacity(degree as usize);
    let mut core = cat.clone();
    for _ in 0..degree {
        let f = core.functor_with(crate::categories::Slash::Forward)?;
        args.push(f.argument.clone());
        let next = f.result.clone();
        core = next;
    }
    args.reverse();
    Some((core, args))
}

/// Every licensed combination of `left` and `right`, in a fixed order:
/// application, composition, conjunction, punctuation.
pub fn apply_rules(
    left: &Category,
    right: &Category,
    cfg: &RuleSetConfig,
) -> Vec<(Category, RuleId)> {
    use crate::categories::Slash::{Backward, Forward};

    let mut out = Vec::new();

    if let Some(f) = left.functor_with(Forward) {
        if f.argument.matches(right) {
            out.push((
                modifier_result(left, &f.result, right),
                RuleId::ForwardApplication,
            ));
        }
    }
    if let Some(f) = right.functor_with(Backward) {
        if f.argument.matches(left) {
            out.push((
                modifier_result(right, &f.result, left),
                RuleId::BackwardApplication,
            ));
        }
    }

    if let Some(f) = left.functor_with(Forward) {
        for degree in 1..=cfg.max_composition_degree {
            let Some((core, args)) = peel_forward(right, degree) else {
                break;
            };
            if f.argument.matches(&core) {
                let mut result = modifier_result(left, &f.result, &core);
                for arg in args {
                    result = Category::forward(result, arg);
                }
                out.push((result, RuleId::ForwardComposition(degree)));
            }
        }
    }
    if let (Some(g), Some(f)) = (left.functor_with(Forward), right.functor_with(Backward)) {
        if f.argument.matches(&g.result) {
            let result = modifier_result(right, &f.result, &g.result);
            out.push((
                Category::forward(result, g.argument.clone()),
                RuleId::BackwardCrossedComposition,
            ));
        }
    }

    if cfg.allow_conjunction {
        if is_conj_word(left) && !is_conj_word(right) && !matches!(right, Category::Conjoined(_)) {
            out.push((Category::conjoined(right.clone()), RuleId::Conjunction));
        }
        if let Category::Conjoined(inner) = right {
            if !matches!(left, Category::Conjoined(_)) {
                if let Some(result) = left.unify(inner) {
                    out.push((result, RuleId::Conjunction));
                }
            }
        }
    }

    if cfg.is_punctuation(left) {
        out.push((right.clone(), RuleId::RemovePunctuationLeft));
    }
    if cfg.is_punctuation(right) {
        out.push((left.clone(), RuleId::RemovePunctuationRight));
    }

    out
}

/// Which normal-form constraints an edge's producing rule can trigger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NfClass {
    Plain,
    ForwardComposed,
    BackwardCrossed,
}

impl NfClass {
    pub fn of(producer: Option<RuleId>) -> NfClass {
        match producer {
            Some(RuleId::ForwardComposition(_)) => NfClass::ForwardComposed,
            Some(RuleId::BackwardCrossedComposition) => NfClass::BackwardCrossed,
            _ => NfClass::Plain,
        }
    }
}

/// Normal-form check on the producers of the two children (`None` for
/// lexical edges).
///
/// * the output of forward composition may not be the primary (left)
///   functor of forward application or composition;
/// * the output of backward crossed composition may not be the primary
///   (right) functor of backward application or crossed composition.
pub fn nf_permitted(
    rule: RuleId,
    left_producer: Option<RuleId>,
    right_producer: Option<RuleId>,
) -> bool {
    nf_permitted_class(
        rule,
        NfClass::of(left_producer),
        NfClass::of(right_producer),
    )
}

pub fn nf_permitted_class(rule: RuleId, left: NfClass, right: NfClass) -> bool {
    if rule.is_forward_primary() && left == NfClass::ForwardComposed {
        return false;
    }
    if rule.is_backward_primary() && right == NfClass::BackwardCrossed {
        return false;
    }
    true
}

/// Which child's head word heads the combination.
pub fn head_direction(
    rule: RuleId,
    left: &Category,
    right: &Category,
    scheme: HeadScheme,
) -> HeadDirection {
    use HeadDirection::{Left, Right};
    match scheme {
        HeadScheme::HeadFirst => Left,
        HeadScheme::HeadFinal => Right,
        HeadScheme::LewisRule => match rule {
            RuleId::ForwardApplication | RuleId::ForwardComposition(_) => {
                if left.is_modifier() || left.is_type_raised() {
                    Right
                } else {
                    Left
                }
            }
            RuleId::BackwardApplication | RuleId::BackwardCrossedComposition => {
                if right.is_modifier() || right.is_type_raised() {
                    Left
                } else {
                    Right
                }
            }
            RuleId::Conjunction => Right,
            RuleId::RemovePunctuationLeft => Right,
            RuleId::RemovePunctuationRight => Left,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat(s: &str) -> Category {
        Category::parse(s).unwrap()
    }

    fn rules(l: &str, r: &str) -> Vec<(String, RuleId)> {
        apply_rules(&cat(l), &cat(r), &RuleSetConfig::default())
            .into_iter()
            .map(|(c, r)| (c.to_string(), r))
            .collect()
    }

    #[test]
    fn forward_application() {
        assert_eq!(
            rules("N/N", "N"),
            vec![("N".to_string(), RuleId::ForwardApplication)]
        );
    }

    #[test]
    fn backward_application_keeps_result_features() {
        assert_eq!(
            rules("NP", "S[dcl]\\NP"),
            vec![("S[dcl]".to_string(), RuleId::BackwardApplication)]
        );
    }

    #[test]
    fn modifier_passes_features_through() {
        assert_eq!(
            rules("S/S", "S[dcl]"),
            vec![("S[dcl]".to_string(), RuleId::ForwardApplication)]
        );
        assert_eq!(
            rules("S[dcl]\\NP", "(S\\NP)\\(S\\NP)"),
            vec![("S[dcl]\\NP".to_string(), RuleId::BackwardApplication)]
        );
    }

    #[test]
    fn forward_composition() {
        assert_eq!(
            rules("A/B", "B/C"),
            vec![("A/C".to_string(), RuleId::ForwardComposition(1))]
        );
        assert_eq!(
            rules("A/B", "(B/C)/D"),
            vec![("(A/C)/D".to_string(), RuleId::ForwardComposition(2))]
        );
        let cfg = RuleSetConfig {
            max_composition_degree: 1,
            ..RuleSetConfig::default()
        };
        assert!(apply_rules(&cat("A/B"), &cat("(B/C)/D"), &cfg).is_empty());
        // harmonic only
        assert!(rules("A/B", "B\\C").is_empty());
    }

    #[test]
    fn backward_crossed_composition() {
        assert_eq!(
            rules("(S\\NP)/NP", "(S\\NP)\\(S\\NP)"),
            vec![("(S\\NP)/NP".to_string(), RuleId::BackwardCrossedComposition)]
        );
    }

    #[test]
    fn coordination_in_two_steps() {
        assert_eq!(
            rules("conj", "S\\NP"),
            vec![("(S\\NP)[conj]".to_string(), RuleId::Conjunction)]
        );
        assert_eq!(
            rules("S\\NP", "(S\\NP)[conj]"),
            vec![("S\\NP".to_string(), RuleId::Conjunction)]
        );
        assert_eq!(
            rules("S", "S[dcl][conj]"),
            vec![("S[dcl]".to_string(), RuleId::Conjunction)]
        );
        assert!(rules("conj", "NP[conj]").is_empty());
        let cfg = RuleSetConfig {
            allow_conjunction: false,
            ..RuleSetConfig::default()
        };
        assert!(apply_rules(&cat("conj"), &cat("NP"), &cfg).is_empty());
    }

    #[test]
    fn punctuation_removal() {
        assert_eq!(
            rules(",", "NP"),
            vec![("NP".to_string(), RuleId::RemovePunctuationLeft)]
        );
        assert_eq!(
            rules("S[dcl]", "."),
            vec![("S[dcl]".to_string(), RuleId::RemovePunctuationRight)]
        );
        assert_eq!(
            rules(",", "."),
            vec![
                (".".to_string(), RuleId::RemovePunctuationLeft),
                (",".to_string(), RuleId::RemovePunctuationRight)
            ]
        );
    }

    #[test]
    fn rule_order_is_fixed() {
        // S/NP applied to NP, then composition cannot fire; a category pair
        // licensing both application and punctuation lists application first.
        let mut cfg = RuleSetConfig::default();
        cfg.punctuation.insert("NP".into());
        let out = apply_rules(&cat("S/NP"), &cat("NP"), &cfg);
        assert_eq!(out[0].1, RuleId::ForwardApplication);
        assert_eq!(out[1].1, RuleId::RemovePunctuationRight);
        assert_eq!(out, apply_rules(&cat("S/NP"), &cat("NP"), &cfg));
    }

    #[test]
    fn normal_form_constraints() {
        use RuleId::*;
        assert!(!nf_permitted(
            ForwardApplication,
            Some(ForwardComposition(1)),
            None
        ));
        assert!(!nf_permitted(
            ForwardComposition(2),
            Some(ForwardComposition(1)),
            None
        ));
        assert!(nf_permitted(ForwardApplication, None, None));
        assert!(nf_permitted(Conjunction, Some(ForwardComposition(1)), None));
        assert!(nf_permitted(
            BackwardApplication,
            Some(ForwardComposition(1)),
            None
        ));
        assert!(!nf_permitted(
            BackwardApplication,
            None,
            Some(BackwardCrossedComposition)
        ));
        assert!(!nf_permitted(
            BackwardCrossedComposition,
            None,
            Some(BackwardCrossedComposition)
        ));
        assert!(nf_permitted(
            ForwardApplication,
            None,
            Some(ForwardComposition(1))
        ));
    }

    #[test]
    fn head_directions() {
        use HeadDirection::*;
        let (black, monday) = (cat("N/N"), cat("N"));
        let fa = RuleId::ForwardApplication;
        assert_eq!(
            head_direction(fa, &black, &monday, HeadScheme::LewisRule),
            Right
        );
        assert_eq!(
            head_direction(fa, &black, &monday, HeadScheme::HeadFirst),
            Left
        );
        assert_eq!(
            head_direction(fa, &black, &monday, HeadScheme::HeadFinal),
            Right
        );

        let ba = RuleId::BackwardApplication;
        let (np, vp) = (cat("NP"), cat("S\\NP"));
        assert_eq!(head_direction(ba, &np, &vp, HeadScheme::HeadFinal), Right);
        assert_eq!(head_direction(ba, &np, &vp, HeadScheme::LewisRule), Right);
        assert_eq!(
            head_direction(ba, &vp, &cat("(S\\NP)\\(S\\NP)"), HeadScheme::LewisRule),
            Left
        );

        assert_eq!(
            head_direction(fa, &cat("(S\\NP)/NP"), &np, HeadScheme::LewisRule),
            Left
        );
        assert_eq!(
            head_direction(fa, &cat("S/(S\\NP)"), &vp, HeadScheme::LewisRule),
            Right
        );

        // features ignored: tabe ta
        let ta = cat("S[f1]\\S[f2]");
        assert_eq!(
            head_direction(ba, &cat("S[f2]"), &ta, HeadScheme::LewisRule),
            Left
        );

        let c = cat("conj");
        assert_eq!(
            head_direction(RuleId::Conjunction, &c, &np, HeadScheme::LewisRule),
            Right
        );
        assert_eq!(
            head_direction(
                RuleId::RemovePunctuationLeft,
                &cat(","),
                &np,
                HeadScheme::LewisRule
            ),
            Right
        );
        assert_eq!(
            head_direction(
                RuleId::RemovePunctuationRight,
                &np,
                &cat("."),
                HeadScheme::LewisRule
            ),
            Left
        );
    }

    #[test]
    fn labels_round_trip() {
        use RuleId::*;
        for r in [
            ForwardApplication,
            BackwardApplication,
            ForwardComposition(1),
            ForwardComposition(3),
            BackwardCrossedComposition,
            Conjunction,
            RemovePunctuationLeft,
            RemovePunctuationRight,
        ] {
            assert_eq!(r.label().parse::<RuleId>().unwrap(), r);
        }
        assert!("fc0".parse::<RuleId>().is_err());
        assert!("xx".parse::<RuleId>().is_err());
    }

    #[test]
    fn scheme_names() {
        for s in HeadScheme::ALL {
            assert_eq!(s.name().parse::<HeadScheme>().unwrap(), s);
        }
        assert_eq!(HeadScheme::default(), HeadScheme::HeadFirst);
    }
}
