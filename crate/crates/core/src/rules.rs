//! Weakness rules and the string patterns they are built from.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use regex::Regex;
use serde::Serialize;

use crate::frontend::SourceLocation;
use crate::syntax::{
    AttributeId, CallContext, ClassifiedExpression, ExpressionKind, FunctionCallSite, Owner,
    ValueView,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum WeaknessCategory {
    AdminByDefault,
    EmptyPassword,
    HardCodedSecret,
    InvalidIpBinding,
    HttpWithoutTls,
    WeakCryptoAlgorithm,
}

impl WeaknessCategory {
    pub const ALL: [WeaknessCategory; 6] = [
        WeaknessCategory::AdminByDefault,
        WeaknessCategory::EmptyPassword,
        WeaknessCategory::HardCodedSecret,
        WeaknessCategory::InvalidIpBinding,
        WeaknessCategory::HttpWithoutTls,
        WeaknessCategory::WeakCryptoAlgorithm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            WeaknessCategory::AdminByDefault => "AdminByDefault",
            WeaknessCategory::EmptyPassword => "EmptyPassword",
            WeaknessCategory::HardCodedSecret => "HardCodedSecret",
            WeaknessCategory::InvalidIpBinding => "InvalidIpBinding",
            WeaknessCategory::HttpWithoutTls => "HttpWithoutTls",
            WeaknessCategory::WeakCryptoAlgorithm => "WeakCryptoAlgorithm",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            WeaknessCategory::AdminByDefault => "Administrative privileges for users by default",
            WeaknessCategory::EmptyPassword => "Using a string of length zero for a password",
            WeaknessCategory::HardCodedSecret => "Hard-coded user name, password or private key",
            WeaknessCategory::InvalidIpBinding => "Assigning 0.0.0.0 as an IP address",
            WeaknessCategory::HttpWithoutTls => "Using HTTP without TLS",
            WeaknessCategory::WeakCryptoAlgorithm => "Using MD5 or SHA1",
        }
    }
}

impl fmt::Display for WeaknessCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WeaknessCategory {
    type Err = RulesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| RulesError::UnknownCategory(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Predicate {
    IsAdmin,
    IsUser,
    IsPassword,
    IsPvtKey,
    IsHttp,
    IsInvalidBind,
    UsesWeakAlgo,
}

impl Predicate {
    pub const ALL: [Predicate; 7] = [
        Predicate::IsAdmin,
        Predicate::IsUser,
        Predicate::IsPassword,
        Predicate::IsPvtKey,
        Predicate::IsHttp,
        Predicate::IsInvalidBind,
        Predicate::UsesWeakAlgo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Predicate::IsAdmin => "isAdmin",
            Predicate::IsUser => "isUser",
            Predicate::IsPassword => "isPassword",
            Predicate::IsPvtKey => "isPvtKey",
            Predicate::IsHttp => "isHTTP",
            Predicate::IsInvalidBind => "isInvalidBind",
            Predicate::UsesWeakAlgo => "usesWeakAlgo",
        }
    }
}

impl FromStr for Predicate {
    type Err = RulesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| RulesError::UnknownPredicate(s.to_string()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RulesError {
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("unknown weakness category `{0}`")]
    UnknownCategory(String),
    #[error("invalid pattern for {predicate}: {message}")]
    InvalidPattern { predicate: String, message: String },
    #[error("cannot read pattern file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed pattern file {path}: {message}")]
    Format { path: String, message: String },
}

/// One entry of a predicate's pattern list.
///
/// In override files a plain string is a substring, `re:` introduces a
/// regular expression and `!` a substring that vetoes the match.
#[derive(Debug, Clone)]
pub enum Pattern {
    Substring(String),
    Regex(Regex),
    Exclude(String),
}

impl Pattern {
    pub fn parse(predicate: &str, spec: &str) -> Result<Self, RulesError> {
        if let Some(re) = spec.strip_prefix("re:") {
            Regex::new(&format!("(?i){re}"))
                .map(Pattern::Regex)
                .map_err(|e| RulesError::InvalidPattern {
                    predicate: predicate.to_string(),
                    message: e.to_string(),
                })
        } else if let Some(ex) = spec.strip_prefix('!') {
            Ok(Pattern::Exclude(ex.to_lowercase()))
        } else {
            Ok(Pattern::Substring(spec.to_lowercase()))
        }
    }
}

#[derive(Debug, Clone)]
pub struct PatternSet {
    patterns: BTreeMap<Predicate, Vec<Pattern>>,
    /// Lowercase names of functions whose result carries no taint from
    /// their arguments. Empty by default.
    sanitizers: BTreeSet<String>,
}

const SANITIZERS_KEY: &str = "sanitizers";

const DEFAULT_PATTERNS: [(Predicate, &[&str]); 7] = [
    (Predicate::IsAdmin, &["admin"]),
    (Predicate::IsHttp, &["http:", r"re:^http\b", "!https"]),
    (Predicate::IsInvalidBind, &["0.0.0.0"]),
    (Predicate::IsPassword, &["pwd", "pass", "password"]),
    (
        Predicate::IsPvtKey,
        &["re:(pvt|priv).*(cert|key|rsa|secret|ssl)"],
    ),
    (Predicate::IsUser, &["user"]),
    (Predicate::UsesWeakAlgo, &["md5", "sha1"]),
];

impl Default for PatternSet {
    fn default() -> Self {
        let patterns = DEFAULT_PATTERNS
            .iter()
            .map(|(pred, specs)| {
                let list = specs
                    .iter()
                    .map(|s| Pattern::parse(pred.as_str(), s).expect("default pattern"))
                    .collect();
                (*pred, list)
            })
            .collect();
        PatternSet {
            patterns,
            sanitizers: BTreeSet::new(),
        }
    }
}

impl PatternSet {
    /// Defaults overridden by the predicates present in a JSON object of
    /// predicate name to pattern list. The key `sanitizers` instead lists
    /// function names that stop propagation.
    pub fn from_json(text: &str, origin: &str) -> Result<Self, RulesError> {
        let raw: BTreeMap<String, Vec<String>> =
            serde_json::from_str(text).map_err(|e| RulesError::Format {
                path: origin.to_string(),
                message: e.to_string(),
            })?;
        let mut set = PatternSet::default();
        for (name, specs) in raw {
            if name == SANITIZERS_KEY {
                set.sanitizers = specs.iter().map(|s| s.to_lowercase()).collect();
                continue;
            }
            let pred: Predicate = name.parse()?;
            let list = specs
                .iter()
                .map(|s| Pattern::parse(&name, s))
                .collect::<Result<Vec<_>, _>>()?;
            set.patterns.insert(pred, list);
        }
        Ok(set)
    }

    pub fn sanitizers(&self) -> &BTreeSet<String> {
        &self.sanitizers
    }

    pub fn with_sanitizers<S: AsRef<str>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.sanitizers = names.into_iter().map(|n| n.as_ref().to_lowercase()).collect();
        self
    }

    pub fn load(path: &Path) -> Result<Self, RulesError> {
        let text = std::fs::read_to_string(path).map_err(|source| RulesError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text, &path.display().to_string())
    }

    /// Case-insensitive match: some positive pattern matches and no
    /// exclusion does.
    pub fn matches(&self, predicate: Predicate, text: &str) -> bool {
        let lowered = text.to_lowercase();
        let list = self.patterns.get(&predicate).map(Vec::as_slice).unwrap_or(&[]);
        let mut hit = false;
        for pattern in list {
            match pattern {
                Pattern::Exclude(ex) if lowered.contains(ex.as_str()) => return false,
                Pattern::Exclude(_) => {}
                Pattern::Substring(s) => hit |= lowered.contains(s.as_str()),
                Pattern::Regex(re) => hit |= re.is_match(&lowered),
            }
        }
        hit
    }
}

pub fn evaluate_predicate(
    predicate: &str,
    text: &str,
    patterns: &PatternSet,
) -> Result<bool, RulesError> {
    Ok(patterns.matches(predicate.parse()?, text))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CandidateElement {
    /// Index into the manifest's classified expressions.
    Expression(usize),
    /// Index into the manifest's function call sites.
    FunctionCall(usize),
}

/// Where the weak value is stored, which decides how it can propagate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TaintOrigin {
    /// A variable or parameter definition at `location`.
    Definition { var: String, location: SourceLocation },
    Attribute(AttributeId),
    /// A value that is not stored anywhere.
    Detached,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeaknessCandidate {
    pub category: WeaknessCategory,
    pub element: CandidateElement,
    /// Variable, attribute, parameter or function name.
    pub name: String,
    pub matched_text: String,
    pub location: SourceLocation,
    pub origin: TaintOrigin,
}

fn origin_of(expr: &ClassifiedExpression) -> TaintOrigin {
    match &expr.owner {
        Owner::Variable(var) => TaintOrigin::Definition {
            var: var.clone(),
            location: expr.location.clone(),
        },
        Owner::Parameter { param_name, .. } => TaintOrigin::Definition {
            var: param_name.clone(),
            location: expr.location.clone(),
        },
        Owner::Attribute(id) => TaintOrigin::Attribute(id.clone()),
    }
}

pub fn detect_candidates(
    classified: &[ClassifiedExpression],
    function_calls: &[FunctionCallSite],
    patterns: &PatternSet,
) -> Vec<WeaknessCandidate> {
    let mut out = Vec::new();
    for expr in classified {
        let mut emit = |category, matched: &str| {
            out.push(WeaknessCandidate {
                category,
                element: CandidateElement::Expression(expr.id),
                name: expr.name.clone(),
                matched_text: matched.to_string(),
                location: expr.location.clone(),
                origin: origin_of(expr),
            })
        };

        if let Some(value) = expr.value.as_string() {
            let is_string = matches!(
                expr.kind,
                Some(ExpressionKind::StringExpr | ExpressionKind::ParameterExpr)
            );
            if is_string {
                if expr.kind == Some(ExpressionKind::ParameterExpr)
                    && patterns.matches(Predicate::IsUser, &expr.name)
                    && patterns.matches(Predicate::IsAdmin, value)
                {
                    emit(WeaknessCategory::AdminByDefault, &expr.name);
                }
                let password_name = patterns.matches(Predicate::IsPassword, &expr.name);
                if value.is_empty() && password_name {
                    emit(WeaknessCategory::EmptyPassword, &expr.name);
                }
                let secret_name = password_name
                    || patterns.matches(Predicate::IsUser, &expr.name)
                    || patterns.matches(Predicate::IsPvtKey, &expr.name);
                if !value.is_empty() && secret_name {
                    emit(WeaknessCategory::HardCodedSecret, &expr.name);
                }
            }
            if patterns.matches(Predicate::IsInvalidBind, value) {
                emit(WeaknessCategory::InvalidIpBinding, value);
            }
            if patterns.matches(Predicate::IsHttp, value) {
                emit(WeaknessCategory::HttpWithoutTls, value);
            }
        } else if let ValueView::CompositeValue { literal_fragments } = &expr.value {
            if let Some(frag) = literal_fragments
                .iter()
                .find(|f| patterns.matches(Predicate::IsInvalidBind, f))
            {
                emit(WeaknessCategory::InvalidIpBinding, frag);
            }
            if let Some(frag) = literal_fragments
                .iter()
                .find(|f| patterns.matches(Predicate::IsHttp, f))
            {
                emit(WeaknessCategory::HttpWithoutTls, frag);
            }
        }
    }

    for (index, call) in function_calls.iter().enumerate() {
        if patterns.matches(Predicate::UsesWeakAlgo, &call.name) {
            out.push(WeaknessCandidate {
                category: WeaknessCategory::WeakCryptoAlgorithm,
                element: CandidateElement::FunctionCall(index),
                name: call.name.clone(),
                matched_text: call.name.clone(),
                location: call.location.clone(),
                origin: match &call.context {
                    CallContext::Definition { var, location } => TaintOrigin::Definition {
                        var: var.clone(),
                        location: location.clone(),
                    },
                    CallContext::Attribute(id) => TaintOrigin::Attribute(id.clone()),
                    CallContext::Detached => TaintOrigin::Detached,
                },
            });
        }
    }

    out.sort_by(|a, b| {
        (&a.location, a.category, &a.name, a.element).cmp(&(&b.location, b.category, &b.name, b.element))
    });
    out
}
