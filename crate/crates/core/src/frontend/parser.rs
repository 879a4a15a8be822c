//! Recursive descent parser over the token stream.

use std::collections::HashSet;

use super::ast::*;
use super::interpolation::parse_interpolation;
use super::lexer::{Tok, Token};
use super::FrontendError;

/// Functions Puppet allows in statement position without parentheses.
const STATEMENT_FUNCTIONS: &[&str] = &[
    "include",
    "require",
    "contain",
    "notice",
    "warning",
    "info",
    "debug",
    "err",
    "fail",
    "realize",
    "tag",
    "hiera_include",
];

const MAX_DEPTH: usize = 200;

pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
}

type PResult<T> = Result<T, FrontendError>;

impl Parser {
    pub fn new(tokens: Vec<Token>) -> Self {
        Self {
            tokens,
            pos: 0,
            depth: 0,
        }
    }

    fn tok(&self) -> &Tok {
        self.tok_at(0)
    }

    fn tok_at(&self, offset: usize) -> &Tok {
        self.tokens
            .get(self.pos + offset)
            .or_else(|| self.tokens.last())
            .map(|t| &t.tok)
            .unwrap_or(&Tok::Eof)
    }

    fn loc(&self) -> SourceLocation {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|t| t.location.clone())
            .expect("token stream always ends with Eof")
    }

    fn bump(&mut self) -> Token {
        let token = self
            .tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .cloned()
            .expect("token stream always ends with Eof");
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        token
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.tok() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok) -> PResult<SourceLocation> {
        if self.tok() == tok {
            Ok(self.bump().location)
        } else {
            Err(self.unexpected(&format!("`{}`", tok.keyword_text().unwrap_or("?"))))
        }
    }

    fn unexpected(&self, wanted: &str) -> FrontendError {
        FrontendError::parse(
            self.loc(),
            format!("expected {wanted}, found {}", self.tok().describe()),
        )
    }

    fn unsupported(&self, construct: &str) -> FrontendError {
        FrontendError::unsupported(self.loc(), construct)
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(FrontendError::parse(self.loc(), "nesting too deep"));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    pub fn parse_program(&mut self) -> PResult<Vec<Statement>> {
        let stmts = self.parse_statements()?;
        if *self.tok() != Tok::Eof {
            return Err(self.unexpected("statement"));
        }
        Ok(stmts)
    }

    /// Parses a single expression that must consume the whole input.
    pub fn parse_standalone_expression(&mut self) -> PResult<Expr> {
        let expr = self.parse_expr()?;
        if *self.tok() != Tok::Eof {
            return Err(self.unexpected("end of embedded expression"));
        }
        Ok(expr)
    }

    fn parse_statements(&mut self) -> PResult<Vec<Statement>> {
        let mut stmts = Vec::new();
        loop {
            while matches!(self.tok(), Tok::Semi | Tok::Chain) {
                self.bump();
            }
            if matches!(self.tok(), Tok::RBrace | Tok::Eof) {
                return Ok(stmts);
            }
            self.parse_statement(&mut stmts)?;
        }
    }

    fn parse_block(&mut self) -> PResult<Vec<Statement>> {
        self.expect(&Tok::LBrace)?;
        self.enter()?;
        let body = self.parse_statements()?;
        self.leave();
        self.expect(&Tok::RBrace)?;
        Ok(body)
    }

    fn parse_statement(&mut self, out: &mut Vec<Statement>) -> PResult<()> {
        let location = self.loc();
        match self.tok().clone() {
            Tok::Class if *self.tok_at(1) == Tok::LBrace => {
                self.bump();
                self.parse_resource_bodies("class".to_string(), location, out)
            }
            Tok::Class => {
                let def = self.parse_definition()?;
                out.push(Statement {
                    kind: StatementKind::ClassDef(def),
                    location,
                });
                Ok(())
            }
            Tok::Define => {
                let def = self.parse_definition()?;
                out.push(Statement {
                    kind: StatementKind::DefinedTypeDef(def),
                    location,
                });
                Ok(())
            }
            Tok::If => {
                let stmt = self.parse_if()?;
                out.push(stmt);
                Ok(())
            }
            Tok::Unless => {
                self.bump();
                let cond = self.parse_expr()?;
                let cond_loc = cond.location.clone();
                let then_branch = self.parse_block()?;
                if *self.tok() == Tok::Elsif {
                    return Err(FrontendError::parse(self.loc(), "`unless` cannot have `elsif`"));
                }
                let else_branch = if self.eat(&Tok::Else) {
                    Some(self.parse_block()?)
                } else {
                    None
                };
                out.push(Statement {
                    kind: StatementKind::If(IfStatement {
                        condition: Expr {
                            kind: ExprKind::Unary {
                                op: UnaryOp::Not,
                                operand: Box::new(cond),
                            },
                            location: cond_loc,
                        },
                        then_branch,
                        else_branch,
                    }),
                    location,
                });
                Ok(())
            }
            Tok::Case => {
                let stmt = self.parse_case()?;
                out.push(stmt);
                Ok(())
            }
            Tok::Node => Err(self.unsupported("node definition")),
            Tok::At => Err(self.unsupported("virtual resource")),
            Tok::AtAt => Err(self.unsupported("exported resource")),
            Tok::Heredoc => Err(self.unsupported("heredoc")),
            Tok::Name(name) => match self.tok_at(1) {
                Tok::LBrace => {
                    self.bump();
                    self.parse_resource_bodies(name, location, out)
                }
                Tok::LParen => self.parse_expr_statement(location, out),
                Tok::Name(_) | Tok::TypeName(_)
                    if matches!(name.as_str(), "function" | "type" | "plan" | "application" | "site") =>
                {
                    Err(self.unsupported(&format!("{name} definition")))
                }
                _ if STATEMENT_FUNCTIONS.contains(&name.as_str()) => {
                    self.bump();
                    let mut args = vec![self.parse_expr()?];
                    while self.eat(&Tok::Comma) {
                        args.push(self.parse_expr()?);
                    }
                    out.push(Statement {
                        kind: StatementKind::Expr(Expr {
                            kind: ExprKind::Call { name, args },
                            location: location.clone(),
                        }),
                        location,
                    });
                    Ok(())
                }
                _ => Err(FrontendError::parse(
                    location,
                    format!("unexpected bare word `{name}` in statement position"),
                )),
            },
            Tok::TypeName(_) => {
                let expr = self.parse_expr()?;
                if *self.tok() != Tok::LBrace {
                    out.push(Statement {
                        kind: StatementKind::Expr(expr),
                        location,
                    });
                    return Ok(());
                }
                match expr.kind {
                    ExprKind::TypeRef(type_name) => {
                        self.bump();
                        let attributes = self.parse_attributes()?;
                        self.expect(&Tok::RBrace)?;
                        out.push(Statement {
                            kind: StatementKind::ResourceDefaults {
                                type_name,
                                attributes,
                            },
                            location,
                        });
                        Ok(())
                    }
                    ExprKind::Access { base, mut keys } => {
                        let ExprKind::TypeRef(type_ref) = base.kind else {
                            return Err(FrontendError::parse(location, "malformed resource reference"));
                        };
                        let title = if keys.len() == 1 {
                            keys.remove(0)
                        } else {
                            Expr {
                                kind: ExprKind::Array(keys),
                                location: base.location.clone(),
                            }
                        };
                        self.bump();
                        let attributes = self.parse_attributes()?;
                        self.expect(&Tok::RBrace)?;
                        out.push(Statement {
                            kind: StatementKind::ResourceOverride(ResourceOverride {
                                type_ref,
                                title,
                                attributes,
                            }),
                            location,
                        });
                        Ok(())
                    }
                    _ => Err(FrontendError::parse(location, "expected resource reference before `{`")),
                }
            }
            _ => self.parse_expr_statement(location, out),
        }
    }

    fn parse_expr_statement(
        &mut self,
        location: SourceLocation,
        out: &mut Vec<Statement>,
    ) -> PResult<()> {
        let expr = self.parse_expr()?;
        if *self.tok() == Tok::Assign {
            let var = assignment_target(&expr).ok_or_else(|| {
                if matches!(expr.kind, ExprKind::Array(_)) {
                    FrontendError::unsupported(location.clone(), "destructuring assignment")
                } else {
                    FrontendError::parse(location.clone(), "invalid assignment target")
                }
            })?;
            self.bump();
            let value = self.parse_expr()?;
            out.push(Statement {
                kind: StatementKind::Assignment { var, value },
                location,
            });
        } else {
            out.push(Statement {
                kind: StatementKind::Expr(expr),
                location,
            });
        }
        Ok(())
    }

    fn parse_resource_bodies(
        &mut self,
        type_name: String,
        location: SourceLocation,
        out: &mut Vec<Statement>,
    ) -> PResult<()> {
        self.expect(&Tok::LBrace)?;
        let mut first = true;
        loop {
            if self.eat(&Tok::RBrace) {
                return Ok(());
            }
            let body_loc = self.loc();
            if *self.tok() == Tok::Default && *self.tok_at(1) == Tok::Colon {
                return Err(self.unsupported("resource default body"));
            }
            let title = self.parse_expr()?;
            self.expect(&Tok::Colon)?;
            let attributes = self.parse_attributes()?;
            out.push(Statement {
                kind: StatementKind::ResourceDecl(ResourceDecl {
                    type_name: type_name.clone(),
                    title,
                    attributes,
                }),
                location: if first { location.clone() } else { body_loc },
            });
            first = false;
            if !self.eat(&Tok::Semi) {
                self.expect(&Tok::RBrace)?;
                return Ok(());
            }
        }
    }

    fn parse_attributes(&mut self) -> PResult<Vec<Attribute>> {
        let mut attributes: Vec<Attribute> = Vec::new();
        let mut seen = HashSet::new();
        loop {
            if matches!(self.tok(), Tok::RBrace | Tok::Semi) {
                return Ok(attributes);
            }
            if *self.tok() == Tok::Splat {
                return Err(self.unsupported("attribute splat"));
            }
            let location = self.loc();
            let name = match self.tok() {
                Tok::Name(n) => n.clone(),
                other => match other.keyword_text() {
                    Some(kw) if kw.chars().all(|c| c.is_ascii_lowercase()) => kw.to_string(),
                    _ => return Err(self.unexpected("attribute name")),
                },
            };
            self.bump();
            if !self.eat(&Tok::FatArrow) && !self.eat(&Tok::PlusArrow) {
                return Err(self.unexpected("`=>`"));
            }
            let value = self.parse_expr()?;
            if !seen.insert(name.clone()) {
                return Err(FrontendError::parse(
                    location,
                    format!("duplicate attribute `{name}`"),
                ));
            }
            attributes.push(Attribute {
                name,
                value,
                location,
            });
            if !self.eat(&Tok::Comma) {
                return Ok(attributes);
            }
        }
    }

    fn parse_definition(&mut self) -> PResult<Definition> {
        self.bump();
        let name = match self.tok() {
            Tok::Name(n) | Tok::TypeName(n) => n.trim_start_matches("::").to_string(),
            _ => return Err(self.unexpected("definition name")),
        };
        self.bump();
        let parameters = if *self.tok() == Tok::LParen {
            self.parse_parameters()?
        } else {
            Vec::new()
        };
        let parent = if self.eat(&Tok::Inherits) {
            match self.bump().tok {
                Tok::Name(n) | Tok::TypeName(n) => Some(n),
                _ => return Err(FrontendError::parse(self.loc(), "expected parent class name")),
            }
        } else {
            None
        };
        let body = self.parse_block()?;
        Ok(Definition {
            name,
            parameters,
            parent,
            body,
        })
    }

    fn parse_parameters(&mut self) -> PResult<Vec<Parameter>> {
        self.expect(&Tok::LParen)?;
        let mut params: Vec<Parameter> = Vec::new();
        let mut seen = HashSet::new();
        loop {
            if self.eat(&Tok::RParen) {
                return Ok(params);
            }
            let location = self.loc();
            let type_annotation = if matches!(self.tok(), Tok::TypeName(_)) {
                Some(self.parse_postfix()?)
            } else {
                None
            };
            if *self.tok() == Tok::Star {
                return Err(self.unsupported("captures-rest parameter"));
            }
            let name = match self.tok() {
                Tok::Variable(v) => v.clone(),
                _ => return Err(self.unexpected("parameter variable")),
            };
            self.bump();
            let default = if self.eat(&Tok::Assign) {
                Some(self.parse_expr()?)
            } else {
                None
            };
            if !seen.insert(name.clone()) {
                return Err(FrontendError::parse(
                    location,
                    format!("duplicate parameter `${name}`"),
                ));
            }
            params.push(Parameter {
                name,
                type_annotation,
                default,
                location,
            });
            if !self.eat(&Tok::Comma) {
                self.expect(&Tok::RParen)?;
                return Ok(params);
            }
        }
    }

    fn parse_if(&mut self) -> PResult<Statement> {
        let location = self.bump().location;
        let condition = self.parse_expr()?;
        let then_branch = self.parse_block()?;
        let else_branch = match self.tok() {
            Tok::Elsif => {
                self.enter()?;
                let nested = self.parse_if()?;
                self.leave();
                Some(vec![nested])
            }
            Tok::Else => {
                self.bump();
                Some(self.parse_block()?)
            }
            _ => None,
        };
        Ok(Statement {
            kind: StatementKind::If(IfStatement {
                condition,
                then_branch,
                else_branch,
            }),
            location,
        })
    }

    fn parse_case(&mut self) -> PResult<Statement> {
        let location = self.bump().location;
        let scrutinee = self.parse_expr()?;
        self.expect(&Tok::LBrace)?;
        let mut arms = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let mut matches = vec![self.parse_expr()?];
            while self.eat(&Tok::Comma) {
                if *self.tok() == Tok::Colon {
                    break;
                }
                matches.push(self.parse_expr()?);
            }
            self.expect(&Tok::Colon)?;
            let body = self.parse_block()?;
            arms.push(CaseArm { matches, body });
        }
        Ok(Statement {
            kind: StatementKind::Case(CaseStatement { scrutinee, arms }),
            location,
        })
    }

    pub fn parse_expr(&mut self) -> PResult<Expr> {
        self.enter()?;
        let result = self.parse_or();
        self.leave();
        result
    }

    fn binary(lhs: Expr, op: BinaryOp, rhs: Expr) -> Expr {
        let location = lhs.location.clone();
        Expr {
            kind: ExprKind::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            location,
        }
    }

    fn parse_or(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_and()?;
        while self.eat(&Tok::Or) {
            let rhs = self.parse_and()?;
            lhs = Self::binary(lhs, BinaryOp::Or, rhs);
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_comparison()?;
        while self.eat(&Tok::And) {
            let rhs = self.parse_comparison()?;
            lhs = Self::binary(lhs, BinaryOp::And, rhs);
        }
        Ok(lhs)
    }

    fn parse_comparison(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_shift()?;
        loop {
            let op = match self.tok() {
                Tok::Eq => BinaryOp::Eq,
                Tok::Ne => BinaryOp::Ne,
                Tok::Lt => BinaryOp::Lt,
                Tok::Gt => BinaryOp::Gt,
                Tok::Le => BinaryOp::Le,
                Tok::Ge => BinaryOp::Ge,
                Tok::Match => BinaryOp::Match,
                Tok::NoMatch => BinaryOp::NoMatch,
                Tok::In => BinaryOp::In,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.parse_shift()?;
            lhs = Self::binary(lhs, op, rhs);
        }
    }

    fn parse_shift(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_additive()?;
        loop {
            let op = match self.tok() {
                Tok::Shl => BinaryOp::Shl,
                Tok::Shr => BinaryOp::Shr,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.parse_additive()?;
            lhs = Self::binary(lhs, op, rhs);
        }
    }

    fn parse_additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_multiplicative()?;
        loop {
            let op = match self.tok() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.parse_multiplicative()?;
            lhs = Self::binary(lhs, op, rhs);
        }
    }

    fn parse_multiplicative(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.tok() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                Tok::Percent => BinaryOp::Mod,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.parse_unary()?;
            lhs = Self::binary(lhs, op, rhs);
        }
    }

    fn parse_unary(&mut self) -> PResult<Expr> {
        let op = match self.tok() {
            Tok::Not => UnaryOp::Not,
            Tok::Minus => UnaryOp::Neg,
            _ => return self.parse_postfix(),
        };
        let location = self.bump().location;
        self.enter()?;
        let operand = self.parse_unary();
        self.leave();
        Ok(Expr {
            kind: ExprKind::Unary {
                op,
                operand: Box::new(operand?),
            },
            location,
        })
    }

    fn parse_postfix(&mut self) -> PResult<Expr> {
        let mut expr = self.parse_primary()?;
        loop {
            match self.tok() {
                Tok::LBrack => {
                    self.bump();
                    let keys = self.parse_list(&Tok::RBrack)?;
                    let location = expr.location.clone();
                    expr = Expr {
                        kind: ExprKind::Access {
                            base: Box::new(expr),
                            keys,
                        },
                        location,
                    };
                }
                Tok::Question => {
                    self.bump();
                    self.expect(&Tok::LBrace)?;
                    let mut arms = Vec::new();
                    loop {
                        if self.eat(&Tok::RBrace) {
                            break;
                        }
                        let m = self.parse_expr()?;
                        self.expect(&Tok::FatArrow)?;
                        let v = self.parse_expr()?;
                        arms.push((m, v));
                        if !self.eat(&Tok::Comma) {
                            self.expect(&Tok::RBrace)?;
                            break;
                        }
                    }
                    let location = expr.location.clone();
                    expr = Expr {
                        kind: ExprKind::Selector {
                            scrutinee: Box::new(expr),
                            arms,
                        },
                        location,
                    };
                }
                Tok::Dot => return Err(self.unsupported("method call")),
                Tok::Pipe => return Err(self.unsupported("lambda")),
                Tok::CollectorOpen => return Err(self.unsupported("resource collector")),
                _ => return Ok(expr),
            }
        }
    }

    /// Comma-separated expressions up to `close`, trailing comma allowed.
    fn parse_list(&mut self, close: &Tok) -> PResult<Vec<Expr>> {
        let mut items = Vec::new();
        loop {
            if self.eat(close) {
                return Ok(items);
            }
            items.push(self.parse_expr()?);
            if !self.eat(&Tok::Comma) {
                self.expect(close)?;
                return Ok(items);
            }
        }
    }

    fn parse_primary(&mut self) -> PResult<Expr> {
        let location = self.loc();
        let kind = match self.tok().clone() {
            Tok::Variable(v) => {
                self.bump();
                ExprKind::Var(v)
            }
            Tok::SqStr(s) => {
                self.bump();
                ExprKind::Str(s)
            }
            Tok::DqStr(body, body_loc) => {
                self.bump();
                ExprKind::Interpolated(parse_interpolation(&body, &body_loc)?)
            }
            Tok::Number(n) => {
                self.bump();
                ExprKind::Number(n)
            }
            Tok::Regex(r) => {
                self.bump();
                ExprKind::Regex(r)
            }
            Tok::True => {
                self.bump();
                ExprKind::Bool(true)
            }
            Tok::False => {
                self.bump();
                ExprKind::Bool(false)
            }
            Tok::Undef => {
                self.bump();
                ExprKind::Undef
            }
            Tok::Default => {
                self.bump();
                ExprKind::Default
            }
            Tok::Name(name) => {
                self.bump();
                if self.eat(&Tok::LParen) {
                    let args = self.parse_list(&Tok::RParen)?;
                    if *self.tok() == Tok::Pipe {
                        return Err(self.unsupported("lambda"));
                    }
                    ExprKind::Call { name, args }
                } else {
                    ExprKind::Bareword(name)
                }
            }
            Tok::TypeName(name) => {
                self.bump();
                ExprKind::TypeRef(name)
            }
            Tok::LBrack => {
                self.bump();
                ExprKind::Array(self.parse_list(&Tok::RBrack)?)
            }
            Tok::LBrace => {
                self.bump();
                let mut entries = Vec::new();
                loop {
                    if self.eat(&Tok::RBrace) {
                        break;
                    }
                    let key = self.parse_expr()?;
                    self.expect(&Tok::FatArrow)?;
                    let value = self.parse_expr()?;
                    entries.push((key, value));
                    if !self.eat(&Tok::Comma) {
                        self.expect(&Tok::RBrace)?;
                        break;
                    }
                }
                ExprKind::Hash(entries)
            }
            Tok::LParen => {
                self.bump();
                let inner = self.parse_expr()?;
                self.expect(&Tok::RParen)?;
                return Ok(inner);
            }
            Tok::Pipe => return Err(self.unsupported("lambda")),
            Tok::Heredoc => return Err(self.unsupported("heredoc")),
            Tok::At => return Err(self.unsupported("virtual resource")),
            Tok::AtAt => return Err(self.unsupported("exported resource")),
            _ => return Err(self.unexpected("expression")),
        };
        Ok(Expr { kind, location })
    }
}

/// `$x` or `$x[...]...`; element assignments count against the container.
fn assignment_target(expr: &Expr) -> Option<String> {
    match &expr.kind {
        ExprKind::Var(v) => Some(v.clone()),
        ExprKind::Access { base, .. } => assignment_target(base),
        _ => None,
    }
}
