//! Typed syntax tree for the supported Puppet subset.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

/// Position of a syntax node in its manifest. Line and column are 1-based;
/// columns count characters, not bytes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SourceLocation {
    pub path: Arc<str>,
    pub line: u32,
    pub column: u32,
}

impl SourceLocation {
    pub fn new(path: Arc<str>, line: u32, column: u32) -> Self {
        debug_assert!(line >= 1 && column >= 1);
        Self { path, line, column }
    }
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.path, self.line, self.column)
    }
}

/// One parsed `.pp` file.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub path: Arc<str>,
    /// Top-level statements in textual order.
    pub statements: Vec<Statement>,
    pub raw_text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    pub kind: StatementKind,
    pub location: SourceLocation,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatementKind {
    /// `$name = value`. Assignments to `$h['k']` are recorded against `h`.
    Assignment { var: String, value: Expr },
    ResourceDecl(ResourceDecl),
    /// `File['title'] { ... }`
    ResourceOverride(ResourceOverride),
    /// `File { mode => '0644' }`. Not a resource; its attributes are not sinks.
    ResourceDefaults {
        type_name: String,
        attributes: Vec<Attribute>,
    },
    ClassDef(Definition),
    DefinedTypeDef(Definition),
    If(IfStatement),
    Case(CaseStatement),
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attribute {
    pub name: String,
    pub value: Expr,
    pub location: SourceLocation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceDecl {
    pub type_name: String,
    pub title: Expr,
    pub attributes: Vec<Attribute>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceOverride {
    /// Type as written in the reference, e.g. `File`.
    pub type_ref: String,
    pub title: Expr,
    pub attributes: Vec<Attribute>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub type_annotation: Option<Expr>,
    pub default: Option<Expr>,
    pub location: SourceLocation,
}

/// Shared shape of `class` and `define` bodies.
#[derive(Debug, Clone, PartialEq)]
pub struct Definition {
    pub name: String,
    pub parameters: Vec<Parameter>,
    pub parent: Option<String>,
    pub body: Vec<Statement>,
}

/// `elsif` chains are nested as an `If` inside `else_branch`.
#[derive(Debug, Clone, PartialEq)]
pub struct IfStatement {
    pub condition: Expr,
    pub then_branch: Vec<Statement>,
    pub else_branch: Option<Vec<Statement>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseStatement {
    pub scrutinee: Expr,
    pub arms: Vec<CaseArm>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseArm {
    pub matches: Vec<Expr>,
    pub body: Vec<Statement>,
}

impl CaseArm {
    pub fn is_default(&self) -> bool {
        self.matches.iter().any(|m| matches!(m.kind, ExprKind::Default))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub location: SourceLocation,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    /// Single-quoted string, escapes already processed.
    Str(String),
    /// Double-quoted string; a string without interpolation has a single
    /// literal part.
    Interpolated(Vec<StringPart>),
    Var(String),
    Call { name: String, args: Vec<Expr> },
    Hash(Vec<(Expr, Expr)>),
    Array(Vec<Expr>),
    /// `$h['k']`, `File['x']`, `Optional[String]`
    Access { base: Box<Expr>, keys: Vec<Expr> },
    /// `undef`. Never the same thing as an empty string or the text "undef".
    Undef,
    Bool(bool),
    /// Kept as written; nothing in the analysis needs the numeric value.
    Number(String),
    Selector {
        scrutinee: Box<Expr>,
        arms: Vec<(Expr, Expr)>,
    },
    /// Unquoted word such as `present` or `::magnum::keystone`.
    Bareword(String),
    /// Capitalized type name such as `File` or `String`.
    TypeRef(String),
    Regex(String),
    /// `default` in case arms and selectors.
    Default,
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Unary { op: UnaryOp, operand: Box<Expr> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum StringPart {
    Literal(String),
    Var { name: String, location: SourceLocation },
    Expr(Expr),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
    Match,
    NoMatch,
    In,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Shl,
    Shr,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Or => "or",
            BinaryOp::And => "and",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Gt => ">",
            BinaryOp::Le => "<=",
            BinaryOp::Ge => ">=",
            BinaryOp::Match => "=~",
            BinaryOp::NoMatch => "!~",
            BinaryOp::In => "in",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Mod => "%",
            BinaryOp::Shl => "<<",
            BinaryOp::Shr => ">>",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    Neg,
}

impl Manifest {
    /// Visits every statement, depth first, in textual order.
    pub fn walk_statements<'a>(&'a self, mut visit: impl FnMut(&'a Statement)) {
        fn go<'a>(stmts: &'a [Statement], visit: &mut impl FnMut(&'a Statement)) {
            for stmt in stmts {
                visit(stmt);
                match &stmt.kind {
                    StatementKind::ClassDef(def) | StatementKind::DefinedTypeDef(def) => {
                        go(&def.body, visit)
                    }
                    StatementKind::If(ifs) => {
                        go(&ifs.then_branch, visit);
                        if let Some(else_branch) = &ifs.else_branch {
                            go(else_branch, visit);
                        }
                    }
                    StatementKind::Case(case) => {
                        for arm in &case.arms {
                            go(&arm.body, visit);
                        }
                    }
                    _ => {}
                }
            }
        }
        go(&self.statements, &mut visit);
    }
}

impl Expr {
    /// Visits this expression and all sub-expressions, parents first.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Expr)) {
        visit(self);
        match &self.kind {
            ExprKind::Interpolated(parts) => {
                for part in parts {
                    if let StringPart::Expr(e) = part {
                        e.walk(visit);
                    }
                }
            }
            ExprKind::Call { args, .. } => args.iter().for_each(|a| a.walk(visit)),
            ExprKind::Hash(entries) => {
                for (k, v) in entries {
                    k.walk(visit);
                    v.walk(visit);
                }
            }
            ExprKind::Array(items) => items.iter().for_each(|i| i.walk(visit)),
            ExprKind::Access { base, keys } => {
                base.walk(visit);
                keys.iter().for_each(|k| k.walk(visit));
            }
            ExprKind::Selector { scrutinee, arms } => {
                scrutinee.walk(visit);
                for (m, v) in arms {
                    m.walk(visit);
                    v.walk(visit);
                }
            }
            ExprKind::Binary { lhs, rhs, .. } => {
                lhs.walk(visit);
                rhs.walk(visit);
            }
            ExprKind::Unary { operand, .. } => operand.walk(visit),
            ExprKind::Str(_)
            | ExprKind::Var(_)
            | ExprKind::Undef
            | ExprKind::Bool(_)
            | ExprKind::Number(_)
            | ExprKind::Bareword(_)
            | ExprKind::TypeRef(_)
            | ExprKind::Regex(_)
            | ExprKind::Default => {}
        }
    }

    /// Source-like rendering used for resource titles and report text.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        write_expr(&mut out, self);
        out
    }
}

fn write_expr(out: &mut String, expr: &Expr) {
    match &expr.kind {
        ExprKind::Str(s) => {
            out.push('\'');
            for c in s.chars() {
                if c == '\'' || c == '\\' {
                    out.push('\\');
                }
                out.push(c);
            }
            out.push('\'');
        }
        ExprKind::Interpolated(parts) => {
            out.push('"');
            for part in parts {
                match part {
                    StringPart::Literal(lit) => {
                        for c in lit.chars() {
                            match c {
                                '"' => out.push_str("\\\""),
                                '\\' => out.push_str("\\\\"),
                                '$' => out.push_str("\\$"),
                                '\n' => out.push_str("\\n"),
                                '\t' => out.push_str("\\t"),
                                c => out.push(c),
                            }
                        }
                    }
                    StringPart::Var { name, .. } => {
                        out.push_str("${");
                        out.push_str(name);
                        out.push('}');
                    }
                    StringPart::Expr(e) => {
                        out.push_str("${");
                        write_expr(out, e);
                        out.push('}');
                    }
                }
            }
            out.push('"');
        }
        ExprKind::Var(name) => {
            out.push('$');
            out.push_str(name);
        }
        ExprKind::Call { name, args } => {
            out.push_str(name);
            out.push('(');
            write_list(out, args);
            out.push(')');
        }
        ExprKind::Hash(entries) => {
            out.push('{');
            for (i, (k, v)) in entries.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, k);
                out.push_str(" => ");
                write_expr(out, v);
            }
            out.push('}');
        }
        ExprKind::Array(items) => {
            out.push('[');
            write_list(out, items);
            out.push(']');
        }
        ExprKind::Access { base, keys } => {
            write_expr(out, base);
            out.push('[');
            write_list(out, keys);
            out.push(']');
        }
        ExprKind::Undef => out.push_str("undef"),
        ExprKind::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        ExprKind::Number(n) => out.push_str(n),
        ExprKind::Selector { scrutinee, arms } => {
            write_expr(out, scrutinee);
            out.push_str(" ? {");
            for (i, (m, v)) in arms.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push(' ');
                write_expr(out, m);
                out.push_str(" => ");
                write_expr(out, v);
            }
            out.push_str(" }");
        }
        ExprKind::Bareword(w) | ExprKind::TypeRef(w) => out.push_str(w),
        ExprKind::Regex(r) => {
            out.push('/');
            out.push_str(r);
            out.push('/');
        }
        ExprKind::Default => out.push_str("default"),
        ExprKind::Binary { op, lhs, rhs } => {
            out.push('(');
            write_expr(out, lhs);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_expr(out, rhs);
            out.push(')');
        }
        ExprKind::Unary { op, operand } => {
            out.push_str(match op {
                UnaryOp::Not => "!",
                UnaryOp::Neg => "-",
            });
            write_expr(out, operand);
        }
    }
}

fn write_list(out: &mut String, items: &[Expr]) {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, item);
    }
}
