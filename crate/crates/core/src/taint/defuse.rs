//! Reaching definitions over the structured syntax tree.
//!
//! Definitions are assignments and class/defined-type parameters. A
//! definition reaches a use when some branch-consistent path connects them
//! without another definition of the same variable in between. Branches
//! merge by union; an `if` without `else` and a `case` without `default`
//! have an implicit empty branch.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::frontend::{Expr, ExprKind, Manifest, SourceLocation, Statement, StatementKind, StringPart};
use crate::syntax::{attribute_id, resource_parts, AttributeId};

pub type DefId = usize;

/// Every variable name referenced in `expr`.
pub fn uses_of(expr: &Expr) -> BTreeSet<String> {
    uses_of_filtered(expr, &BTreeSet::new())
}

/// Variable names referenced in `expr`, except inside the arguments of
/// calls to `sanitizers` (lowercase function names).
pub fn uses_of_filtered(expr: &Expr, sanitizers: &BTreeSet<String>) -> BTreeSet<String> {
    fn go(e: &Expr, sanitizers: &BTreeSet<String>, out: &mut BTreeSet<String>) {
        match &e.kind {
            ExprKind::Var(name) => {
                out.insert(name.clone());
            }
            ExprKind::Interpolated(parts) => {
                for part in parts {
                    match part {
                        StringPart::Var { name, .. } => {
                            out.insert(name.clone());
                        }
                        StringPart::Expr(inner) => go(inner, sanitizers, out),
                        StringPart::Literal(_) => {}
                    }
                }
            }
            ExprKind::Call { name, args } => {
                if !sanitizers.contains(&name.to_lowercase()) {
                    args.iter().for_each(|a| go(a, sanitizers, out));
                }
            }
            ExprKind::Array(items) => items.iter().for_each(|i| go(i, sanitizers, out)),
            ExprKind::Hash(pairs) => {
                for (k, v) in pairs {
                    go(k, sanitizers, out);
                    go(v, sanitizers, out);
                }
            }
            ExprKind::Access { base, keys } => {
                go(base, sanitizers, out);
                keys.iter().for_each(|k| go(k, sanitizers, out));
            }
            ExprKind::Selector { scrutinee, arms } => {
                go(scrutinee, sanitizers, out);
                for (m, v) in arms {
                    go(m, sanitizers, out);
                    go(v, sanitizers, out);
                }
            }
            ExprKind::Binary { lhs, rhs, .. } => {
                go(lhs, sanitizers, out);
                go(rhs, sanitizers, out);
            }
            ExprKind::Unary { operand, .. } => go(operand, sanitizers, out),
            ExprKind::Str(_)
            | ExprKind::Undef
            | ExprKind::Bool(_)
            | ExprKind::Number(_)
            | ExprKind::Bareword(_)
            | ExprKind::TypeRef(_)
            | ExprKind::Regex(_)
            | ExprKind::Default => {}
        }
    }
    let mut out = BTreeSet::new();
    go(expr, sanitizers, &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DefKind {
    Assignment,
    Parameter,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DefSite {
    pub id: DefId,
    pub var: String,
    pub location: SourceLocation,
    pub kind: DefKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum UseSite {
    /// Right-hand side of an assignment or a parameter default.
    Definition(DefId),
    Attribute(AttributeId),
    /// Conditions, resource titles, defaults bodies and bare expressions.
    Statement(SourceLocation),
}

#[derive(Debug, Clone, Default)]
pub struct DefUseChains {
    pub defs: Vec<DefSite>,
    /// Use sites reached by each definition.
    pub reached: BTreeMap<DefId, BTreeSet<UseSite>>,
    pub attribute_locations: BTreeMap<AttributeId, SourceLocation>,
}

type ReachingSet = BTreeMap<String, BTreeSet<DefId>>;

impl DefUseChains {
    pub fn compute(manifest: &Manifest) -> Self {
        Self::compute_with(manifest, &BTreeSet::new())
    }

    /// Like [`compute`](Self::compute), but values passed to a sanitizer
    /// function do not count as uses.
    pub fn compute_with(manifest: &Manifest, sanitizers: &BTreeSet<String>) -> Self {
        let mut walker = Walker {
            manifest,
            sanitizers,
            chains: DefUseChains::default(),
            resource_ordinal: 0,
        };
        let mut state = ReachingSet::new();
        walker.block(&manifest.statements, &mut state);
        walker.chains
    }

    pub fn reaches(&self, def: DefId, site: &UseSite) -> bool {
        self.reached.get(&def).is_some_and(|s| s.contains(site))
    }

    pub fn uses_reached_by(&self, def: DefId) -> impl Iterator<Item = &UseSite> {
        self.reached.get(&def).into_iter().flatten()
    }

    pub fn find_def(&self, var: &str, location: &SourceLocation) -> Option<DefId> {
        self.defs
            .iter()
            .find(|d| d.var == var && &d.location == location)
            .map(|d| d.id)
    }

    pub fn location_of<'a>(&'a self, site: &'a UseSite) -> Option<&'a SourceLocation> {
        match site {
            UseSite::Definition(d) => self.defs.get(*d).map(|d| &d.location),
            UseSite::Attribute(a) => self.attribute_locations.get(a),
            UseSite::Statement(l) => Some(l),
        }
    }
}

/// Whether the definition of `var` at `def_location` reaches `site`.
pub fn reaches(manifest: &Manifest, var: &str, def_location: &SourceLocation, site: &UseSite) -> bool {
    let chains = DefUseChains::compute(manifest);
    chains
        .find_def(var, def_location)
        .is_some_and(|d| chains.reaches(d, site))
}

struct Walker<'m> {
    manifest: &'m Manifest,
    sanitizers: &'m BTreeSet<String>,
    chains: DefUseChains,
    resource_ordinal: usize,
}

impl Walker<'_> {
    fn record_uses(&mut self, expr: &Expr, site: &UseSite, state: &ReachingSet) {
        for var in uses_of_filtered(expr, self.sanitizers) {
            for def in state.get(&var).into_iter().flatten() {
                self.chains
                    .reached
                    .entry(*def)
                    .or_default()
                    .insert(site.clone());
            }
        }
    }

    fn define(&mut self, var: &str, location: &SourceLocation, kind: DefKind) -> DefId {
        let id = self.chains.defs.len();
        self.chains.defs.push(DefSite {
            id,
            var: var.to_string(),
            location: location.clone(),
            kind,
        });
        id
    }

    fn block(&mut self, stmts: &[Statement], state: &mut ReachingSet) {
        for stmt in stmts {
            self.statement(stmt, state);
        }
    }

    fn statement(&mut self, stmt: &Statement, state: &mut ReachingSet) {
        let here = UseSite::Statement(stmt.location.clone());
        match &stmt.kind {
            StatementKind::Assignment { var, value } => {
                let id = self.define(var, &stmt.location, DefKind::Assignment);
                self.record_uses(value, &UseSite::Definition(id), state);
                state.insert(var.clone(), BTreeSet::from([id]));
            }
            StatementKind::ResourceDecl(_) | StatementKind::ResourceOverride(_) => {
                if let Some((ty, title, attributes)) = resource_parts(stmt) {
                    self.record_uses(title, &here, state);
                    for attr in attributes {
                        let id = attribute_id(self.manifest, ty, title, &attr.name, self.resource_ordinal);
                        self.chains
                            .attribute_locations
                            .insert(id.clone(), attr.location.clone());
                        self.record_uses(&attr.value, &UseSite::Attribute(id), state);
                    }
                }
                self.resource_ordinal += 1;
            }
            StatementKind::ResourceDefaults { attributes, .. } => {
                for attr in attributes {
                    self.record_uses(&attr.value, &here, state);
                }
            }
            StatementKind::ClassDef(def) | StatementKind::DefinedTypeDef(def) => {
                for param in &def.parameters {
                    let id = self.define(&param.name, &param.location, DefKind::Parameter);
                    if let Some(default) = &param.default {
                        self.record_uses(default, &UseSite::Definition(id), state);
                    }
                    state.insert(param.name.clone(), BTreeSet::from([id]));
                }
                self.block(&def.body, state);
            }
            StatementKind::If(ifs) => {
                self.record_uses(&ifs.condition, &here, state);
                let mut then_state = state.clone();
                self.block(&ifs.then_branch, &mut then_state);
                if let Some(else_branch) = &ifs.else_branch {
                    self.block(else_branch, state);
                }
                merge_into(state, then_state);
            }
            StatementKind::Case(case) => {
                self.record_uses(&case.scrutinee, &here, state);
                for arm in &case.arms {
                    for m in &arm.matches {
                        self.record_uses(m, &here, state);
                    }
                }
                let entry = state.clone();
                let mut merged = if case.arms.iter().any(|a| a.is_default()) {
                    ReachingSet::new()
                } else {
                    entry.clone()
                };
                for arm in &case.arms {
                    let mut arm_state = entry.clone();
                    self.block(&arm.body, &mut arm_state);
                    merge_into(&mut merged, arm_state);
                }
                *state = merged;
            }
            StatementKind::Expr(expr) => self.record_uses(expr, &here, state),
        }
    }
}

fn merge_into(target: &mut ReachingSet, other: ReachingSet) {
    for (var, defs) in other {
        target.entry(var).or_default().extend(defs);
    }
}
