//! Expression classification and attribute membership.
//!
//! Every variable assignment, resource attribute and parameter default is
//! turned into a [`ClassifiedExpression`] carrying its name and a view of
//! its value. Attributes additionally get an [`AttributeId`] that ties them
//! to their resource and manifest through the [`MembershipIndex`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::frontend::{
    Attribute, Expr, ExprKind, Manifest, Parameter, SourceLocation, Statement, StatementKind,
    StringPart,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ExpressionKind {
    /// Directly assigned a string value.
    StringExpr,
    /// Assigned the result of a function call.
    FunctionExpr,
    /// Class or defined-type parameter with a string default.
    ParameterExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct AttributeId {
    pub manifest_path: Arc<str>,
    pub resource_type: String,
    pub resource_title: String,
    pub attribute_name: String,
    /// Index of the resource among all resources of the manifest.
    pub ordinal: usize,
}

impl AttributeId {
    pub fn resource(&self) -> ResourceId {
        ResourceId {
            manifest_path: self.manifest_path.clone(),
            resource_type: self.resource_type.clone(),
            resource_title: self.resource_title.clone(),
            ordinal: self.ordinal,
        }
    }
}

impl fmt::Display for AttributeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}[{}].{}",
            self.resource_type, self.resource_title, self.attribute_name
        )
    }
}

/// Identity of one resource within a run.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ResourceId {
    pub manifest_path: Arc<str>,
    pub resource_type: String,
    pub resource_title: String,
    pub ordinal: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Owner {
    Variable(String),
    Attribute(AttributeId),
    Parameter { class_name: String, param_name: String },
}

impl Owner {
    pub fn is_variable_like(&self) -> bool {
        matches!(self, Owner::Variable(_) | Owner::Parameter { .. })
    }

    /// Name of the variable this owner defines, if any.
    pub fn variable_name(&self) -> Option<&str> {
        match self {
            Owner::Variable(v) => Some(v),
            Owner::Parameter { param_name, .. } => Some(param_name),
            Owner::Attribute(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ValueView {
    StringValue(String),
    FunctionValue { name: String, args: Vec<ValueView> },
    UndefValue,
    /// Interpolated strings with embedded parts, arrays and hashes. Only
    /// the literal fragments of interpolated strings are kept.
    CompositeValue { literal_fragments: Vec<String> },
    OtherValue,
}

impl ValueView {
    pub fn of(expr: &Expr) -> Self {
        match &expr.kind {
            ExprKind::Str(s) => ValueView::StringValue(s.clone()),
            ExprKind::Interpolated(parts) => match literal_text(parts) {
                Some(text) => ValueView::StringValue(text),
                None => ValueView::CompositeValue {
                    literal_fragments: parts
                        .iter()
                        .filter_map(|p| match p {
                            StringPart::Literal(l) => Some(l.clone()),
                            _ => None,
                        })
                        .collect(),
                },
            },
            ExprKind::Call { name, args } => ValueView::FunctionValue {
                name: name.clone(),
                args: args.iter().map(ValueView::of).collect(),
            },
            ExprKind::Undef => ValueView::UndefValue,
            ExprKind::Array(_) | ExprKind::Hash(_) => ValueView::CompositeValue {
                literal_fragments: Vec::new(),
            },
            _ => ValueView::OtherValue,
        }
    }

    pub fn as_string(&self) -> Option<&str> {
        match self {
            ValueView::StringValue(s) => Some(s),
            _ => None,
        }
    }
}

/// Concatenated text of a double-quoted string with no embedded parts.
fn literal_text(parts: &[StringPart]) -> Option<String> {
    parts
        .iter()
        .map(|p| match p {
            StringPart::Literal(l) => Some(l.as_str()),
            _ => None,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifiedExpression {
    /// Position in the classification order of the manifest.
    pub id: usize,
    pub owner: Owner,
    /// `None` for values that are neither strings nor function results,
    /// including `undef`.
    pub kind: Option<ExpressionKind>,
    pub name: String,
    pub value: ValueView,
    pub location: SourceLocation,
}

/// Resource as recorded in the membership index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResourceEntry {
    pub id: ResourceId,
    pub location: SourceLocation,
    pub is_override: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MembershipIndex {
    pub attr_to_resource: BTreeMap<AttributeId, ResourceId>,
    pub resource_list: Vec<ResourceEntry>,
}

impl MembershipIndex {
    pub fn resource_of(&self, attr: &AttributeId) -> Option<&ResourceId> {
        self.attr_to_resource.get(attr)
    }
}

/// Where a function call's result ends up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum CallContext {
    /// Right-hand side of an assignment or a parameter default.
    Definition { var: String, location: SourceLocation },
    Attribute(AttributeId),
    /// Statement position, resource title, or condition: the result is not
    /// stored anywhere.
    Detached,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionCallSite {
    pub name: String,
    pub location: SourceLocation,
    pub context: CallContext,
}

/// Textual form of a resource title: the string itself for plain strings,
/// otherwise the source text of the title expression.
pub fn title_text(title: &Expr) -> String {
    match &title.kind {
        ExprKind::Str(s) => s.clone(),
        ExprKind::Interpolated(parts) => literal_text(parts).unwrap_or_else(|| title.to_source()),
        _ => title.to_source(),
    }
}

/// Resource statements of a manifest in the order that defines ordinals.
pub fn resources_in_order(manifest: &Manifest) -> Vec<&Statement> {
    let mut out = Vec::new();
    manifest.walk_statements(|stmt| {
        if matches!(
            stmt.kind,
            StatementKind::ResourceDecl(_) | StatementKind::ResourceOverride(_)
        ) {
            out.push(stmt);
        }
    });
    out
}

/// Type, title and attributes of a resource statement.
pub fn resource_parts(stmt: &Statement) -> Option<(&str, &Expr, &[Attribute])> {
    match &stmt.kind {
        StatementKind::ResourceDecl(r) => Some((&r.type_name, &r.title, &r.attributes)),
        StatementKind::ResourceOverride(r) => Some((&r.type_ref, &r.title, &r.attributes)),
        _ => None,
    }
}

pub fn attribute_id(
    manifest: &Manifest,
    resource_type: &str,
    title: &Expr,
    attribute: &str,
    ordinal: usize,
) -> AttributeId {
    AttributeId {
        manifest_path: manifest.path.clone(),
        resource_type: resource_type.to_string(),
        resource_title: title_text(title),
        attribute_name: attribute.to_string(),
        ordinal,
    }
}

pub fn build_membership_index(manifest: &Manifest) -> MembershipIndex {
    let mut index = MembershipIndex::default();
    for (ordinal, stmt) in resources_in_order(manifest).into_iter().enumerate() {
        let Some((ty, title, attributes)) = resource_parts(stmt) else {
            continue;
        };
        let id = ResourceId {
            manifest_path: manifest.path.clone(),
            resource_type: ty.to_string(),
            resource_title: title_text(title),
            ordinal,
        };
        for attr in attributes {
            index.attr_to_resource.insert(
                attribute_id(manifest, ty, title, &attr.name, ordinal),
                id.clone(),
            );
        }
        index.resource_list.push(ResourceEntry {
            id,
            location: stmt.location.clone(),
            is_override: matches!(stmt.kind, StatementKind::ResourceOverride(_)),
        });
    }
    index
}

fn kind_for(value: &ValueView) -> Option<ExpressionKind> {
    match value {
        ValueView::StringValue(_) => Some(ExpressionKind::StringExpr),
        ValueView::FunctionValue { .. } => Some(ExpressionKind::FunctionExpr),
        _ => None,
    }
}

pub fn classify_expressions(manifest: &Manifest) -> Vec<ClassifiedExpression> {
    let mut out = Vec::new();
    let mut ordinal = 0usize;
    classify_block(manifest, &manifest.statements, &mut ordinal, &mut out);
    out
}

fn push(
    out: &mut Vec<ClassifiedExpression>,
    owner: Owner,
    kind: Option<ExpressionKind>,
    name: &str,
    value: ValueView,
    location: &SourceLocation,
) {
    out.push(ClassifiedExpression {
        id: out.len(),
        owner,
        kind,
        name: name.to_string(),
        value,
        location: location.clone(),
    });
}

fn classify_block(
    manifest: &Manifest,
    stmts: &[Statement],
    ordinal: &mut usize,
    out: &mut Vec<ClassifiedExpression>,
) {
    for stmt in stmts {
        match &stmt.kind {
            StatementKind::Assignment { var, value } => {
                let view = ValueView::of(value);
                let kind = kind_for(&view);
                push(out, Owner::Variable(var.clone()), kind, var, view, &stmt.location);
            }
            StatementKind::ResourceDecl(_) | StatementKind::ResourceOverride(_) => {
                if let Some((ty, title, attributes)) = resource_parts(stmt) {
                    for attr in attributes {
                        let view = ValueView::of(&attr.value);
                        let kind = kind_for(&view);
                        let id = attribute_id(manifest, ty, title, &attr.name, *ordinal);
                        push(out, Owner::Attribute(id), kind, &attr.name, view, &attr.location);
                    }
                }
                *ordinal += 1;
            }
            StatementKind::ClassDef(def) | StatementKind::DefinedTypeDef(def) => {
                for param in &def.parameters {
                    classify_parameter(&def.name, param, out);
                }
                classify_block(manifest, &def.body, ordinal, out);
            }
            StatementKind::If(ifs) => {
                classify_block(manifest, &ifs.then_branch, ordinal, out);
                if let Some(else_branch) = &ifs.else_branch {
                    classify_block(manifest, else_branch, ordinal, out);
                }
            }
            StatementKind::Case(case) => {
                for arm in &case.arms {
                    classify_block(manifest, &arm.body, ordinal, out);
                }
            }
            StatementKind::ResourceDefaults { .. } | StatementKind::Expr(_) => {}
        }
    }
}

fn classify_parameter(class_name: &str, param: &Parameter, out: &mut Vec<ClassifiedExpression>) {
    let Some(default) = &param.default else {
        return;
    };
    let view = ValueView::of(default);
    let kind = match &view {
        ValueView::StringValue(_) => Some(ExpressionKind::ParameterExpr),
        ValueView::FunctionValue { .. } => Some(ExpressionKind::FunctionExpr),
        _ => None,
    };
    push(
        out,
        Owner::Parameter {
            class_name: class_name.to_string(),
            param_name: param.name.clone(),
        },
        kind,
        &param.name,
        view,
        &param.location,
    );
}

/// Every function call in the manifest, with where its result flows.
pub fn collect_function_calls(manifest: &Manifest) -> Vec<FunctionCallSite> {
    let mut out = Vec::new();
    let mut ordinal = 0usize;
    calls_in_block(manifest, &manifest.statements, &mut ordinal, &mut out);
    out
}

fn calls_in_expr(expr: &Expr, context: &CallContext, out: &mut Vec<FunctionCallSite>) {
    expr.walk(&mut |e| {
        if let ExprKind::Call { name, .. } = &e.kind {
            out.push(FunctionCallSite {
                name: name.clone(),
                location: e.location.clone(),
                context: context.clone(),
            });
        }
    });
}

fn calls_in_block(
    manifest: &Manifest,
    stmts: &[Statement],
    ordinal: &mut usize,
    out: &mut Vec<FunctionCallSite>,
) {
    for stmt in stmts {
        match &stmt.kind {
            StatementKind::Assignment { var, value } => {
                let ctx = CallContext::Definition {
                    var: var.clone(),
                    location: stmt.location.clone(),
                };
                calls_in_expr(value, &ctx, out);
            }
            StatementKind::ResourceDecl(_) | StatementKind::ResourceOverride(_) => {
                if let Some((ty, title, attributes)) = resource_parts(stmt) {
                    calls_in_expr(title, &CallContext::Detached, out);
                    for attr in attributes {
                        let ctx = CallContext::Attribute(attribute_id(
                            manifest, ty, title, &attr.name, *ordinal,
                        ));
                        calls_in_expr(&attr.value, &ctx, out);
                    }
                }
                *ordinal += 1;
            }
            StatementKind::ResourceDefaults { attributes, .. } => {
                for attr in attributes {
                    calls_in_expr(&attr.value, &CallContext::Detached, out);
                }
            }
            StatementKind::ClassDef(def) | StatementKind::DefinedTypeDef(def) => {
                for param in &def.parameters {
                    if let Some(default) = &param.default {
                        let ctx = CallContext::Definition {
                            var: param.name.clone(),
                            location: param.location.clone(),
                        };
                        calls_in_expr(default, &ctx, out);
                    }
                }
                calls_in_block(manifest, &def.body, ordinal, out);
            }
            StatementKind::If(ifs) => {
                calls_in_expr(&ifs.condition, &CallContext::Detached, out);
                calls_in_block(manifest, &ifs.then_branch, ordinal, out);
                if let Some(else_branch) = &ifs.else_branch {
                    calls_in_block(manifest, else_branch, ordinal, out);
                }
            }
            StatementKind::Case(case) => {
                calls_in_expr(&case.scrutinee, &CallContext::Detached, out);
                for arm in &case.arms {
                    for m in &arm.matches {
                        calls_in_expr(m, &CallContext::Detached, out);
                    }
                    calls_in_block(manifest, &arm.body, ordinal, out);
                }
            }
            StatementKind::Expr(expr) => calls_in_expr(expr, &CallContext::Detached, out),
        }
    }
}
