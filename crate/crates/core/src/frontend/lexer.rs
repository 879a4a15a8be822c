//! Tokenizer for the Puppet subset. Comments are dropped here.

use std::sync::Arc;

use super::ast::SourceLocation;
use super::FrontendError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    /// `$name`, with any leading `::` stripped.
    Variable(String),
    /// Lowercase bare word, possibly `::`-qualified.
    Name(String),
    /// Capitalized word such as `File` or `Mysql::Db`.
    TypeName(String),
    /// Single-quoted string with escapes processed.
    SqStr(String),
    /// Raw body of a double-quoted string plus the location of its first
    /// body character.
    DqStr(String, SourceLocation),
    Number(String),
    Regex(String),

    Class,
    Define,
    If,
    Elsif,
    Else,
    Unless,
    Case,
    Default,
    Undef,
    True,
    False,
    Node,
    Inherits,
    And,
    Or,
    In,

    LBrace,
    RBrace,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Colon,
    Semi,
    FatArrow,
    PlusArrow,
    Assign,
    Eq,
    Ne,
    Match,
    NoMatch,
    Lt,
    Gt,
    Le,
    Ge,
    Not,
    Question,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Shl,
    Shr,
    /// `->`, `~>`, `<-`, `<~`
    Chain,
    Pipe,
    Dot,
    /// `@` virtual resource marker.
    At,
    /// `@@` exported resource marker.
    AtAt,
    /// `@(` heredoc opener.
    Heredoc,
    /// `<|`, `<<|`
    CollectorOpen,
    /// `|>`, `|>>`
    CollectorClose,
    Splat,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Variable(v) => format!("variable `${v}`"),
            Tok::Name(n) => format!("name `{n}`"),
            Tok::TypeName(n) => format!("type `{n}`"),
            Tok::SqStr(_) | Tok::DqStr(..) => "string".to_string(),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::Regex(_) => "regex".to_string(),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.keyword_text().unwrap_or("?")),
        }
    }

    /// Source text for keywords and punctuation.
    pub fn keyword_text(&self) -> Option<&'static str> {
        Some(match self {
            Tok::Class => "class",
            Tok::Define => "define",
            Tok::If => "if",
            Tok::Elsif => "elsif",
            Tok::Else => "else",
            Tok::Unless => "unless",
            Tok::Case => "case",
            Tok::Default => "default",
            Tok::Undef => "undef",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Node => "node",
            Tok::Inherits => "inherits",
            Tok::And => "and",
            Tok::Or => "or",
            Tok::In => "in",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::FatArrow => "=>",
            Tok::PlusArrow => "+>",
            Tok::Assign => "=",
            Tok::Eq => "==",
            Tok::Ne => "!=",
            Tok::Match => "=~",
            Tok::NoMatch => "!~",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::Not => "!",
            Tok::Question => "?",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::Shl => "<<",
            Tok::Shr => ">>",
            Tok::Chain => "->",
            Tok::Pipe => "|",
            Tok::Dot => ".",
            Tok::At => "@",
            Tok::AtAt => "@@",
            Tok::Heredoc => "@(",
            Tok::CollectorOpen => "<|",
            Tok::CollectorClose => "|>",
            Tok::Splat => "*=>",
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub location: SourceLocation,
}

pub struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    column: u32,
    path: Arc<str>,
}

impl Lexer {
    pub fn new(src: &str, path: Arc<str>) -> Self {
        Self::with_origin(src, path, 1, 1)
    }

    /// Lexer whose first character sits at `line`/`column` of the enclosing
    /// file. Used for `${...}` bodies.
    pub fn with_origin(src: &str, path: Arc<str>, line: u32, column: u32) -> Self {
        Self {
            chars: src.chars().collect(),
            pos: 0,
            line,
            column,
            path,
        }
    }

    fn loc(&self) -> SourceLocation {
        SourceLocation::new(self.path.clone(), self.line, self.column)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars()
            .enumerate()
            .all(|(i, c)| self.peek_at(i) == Some(c))
    }

    pub fn tokenize(mut self) -> Result<Vec<Token>, FrontendError> {
        let mut tokens: Vec<Token> = Vec::new();
        loop {
            self.skip_trivia()?;
            let location = self.loc();
            let Some(c) = self.peek() else {
                tokens.push(Token {
                    tok: Tok::Eof,
                    location,
                });
                return Ok(tokens);
            };
            let prev = tokens.last().map(|t| &t.tok);
            let tok = self.lex_one(c, prev, &location)?;
            tokens.push(Token { tok, location });
        }
    }

    fn skip_trivia(&mut self) -> Result<(), FrontendError> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                Some('/') if self.peek_at(1) == Some('*') => {
                    let start = self.loc();
                    self.bump();
                    self.bump();
                    loop {
                        if self.starts_with("*/") {
                            self.bump();
                            self.bump();
                            break;
                        }
                        if self.bump().is_none() {
                            return Err(FrontendError::parse(start, "unterminated block comment"));
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn lex_one(
        &mut self,
        c: char,
        prev: Option<&Tok>,
        location: &SourceLocation,
    ) -> Result<Tok, FrontendError> {
        if c == '$' {
            return self.lex_variable(location);
        }
        if c == '\'' {
            return self.lex_single_quoted(location);
        }
        if c == '"' {
            return self.lex_double_quoted(location);
        }
        if c.is_ascii_digit() {
            return Ok(self.lex_number());
        }
        if c.is_ascii_lowercase() || c == '_' || (c == ':' && self.peek_at(1) == Some(':')) {
            return self.lex_word(location);
        }
        if c.is_ascii_uppercase() {
            return Ok(self.lex_type_name());
        }
        if c == '/' && regex_allowed(prev) {
            return self.lex_regex(location);
        }
        self.lex_punct(c, location)
    }

    fn lex_variable(&mut self, location: &SourceLocation) -> Result<Tok, FrontendError> {
        self.bump();
        if self.starts_with("::") {
            self.bump();
            self.bump();
        }
        let name = self.take_qualified(|c| c.is_ascii_alphanumeric() || c == '_');
        if name.is_empty() {
            return Err(FrontendError::parse(location.clone(), "expected variable name after `$`"));
        }
        Ok(Tok::Variable(name))
    }

    /// Reads `seg(::seg)*` where each segment is made of `is_part` chars.
    fn take_qualified(&mut self, is_part: impl Fn(char) -> bool) -> String {
        let mut name = String::new();
        loop {
            while let Some(c) = self.peek() {
                if !is_part(c) {
                    break;
                }
                name.push(c);
                self.bump();
            }
            let continues = self.starts_with("::")
                && self.peek_at(2).is_some_and(|c| c.is_ascii_alphanumeric() || c == '_');
            if !name.is_empty() && continues {
                name.push_str("::");
                self.bump();
                self.bump();
            } else {
                return name;
            }
        }
    }

    fn lex_single_quoted(&mut self, location: &SourceLocation) -> Result<Tok, FrontendError> {
        self.bump();
        let mut value = String::new();
        loop {
            match self.bump() {
                None => return Err(FrontendError::parse(location.clone(), "unterminated string")),
                Some('\'') => return Ok(Tok::SqStr(value)),
                Some('\\') => match self.peek() {
                    Some(c @ ('\'' | '\\')) => {
                        value.push(c);
                        self.bump();
                    }
                    _ => value.push('\\'),
                },
                Some(c) => value.push(c),
            }
        }
    }

    fn lex_double_quoted(&mut self, location: &SourceLocation) -> Result<Tok, FrontendError> {
        self.bump();
        let body_start = self.loc();
        let mut body = String::new();
        // Depth of `${ ... }` nesting; quotes inside an embedded expression
        // belong to that expression.
        let mut depth = 0usize;
        loop {
            let Some(c) = self.bump() else {
                return Err(FrontendError::parse(location.clone(), "unterminated string"));
            };
            match c {
                '\\' => {
                    body.push(c);
                    if let Some(next) = self.bump() {
                        body.push(next);
                    }
                }
                '"' if depth == 0 => return Ok(Tok::DqStr(body, body_start)),
                '$' if self.peek() == Some('{') => {
                    body.push('$');
                    body.push('{');
                    self.bump();
                    depth += 1;
                }
                '{' if depth > 0 => {
                    body.push(c);
                    depth += 1;
                }
                '}' if depth > 0 => {
                    body.push(c);
                    depth -= 1;
                }
                q @ ('\'' | '"') if depth > 0 => {
                    body.push(q);
                    loop {
                        let Some(inner) = self.bump() else {
                            return Err(FrontendError::parse(location.clone(), "unterminated string"));
                        };
                        body.push(inner);
                        if inner == '\\' {
                            if let Some(esc) = self.bump() {
                                body.push(esc);
                            }
                        } else if inner == q {
                            break;
                        }
                    }
                }
                c => body.push(c),
            }
        }
    }

    fn lex_number(&mut self) -> Tok {
        let mut text = String::new();
        if self.starts_with("0x") || self.starts_with("0X") {
            text.push(self.bump().unwrap_or('0'));
            text.push(self.bump().unwrap_or('x'));
            while let Some(c) = self.peek().filter(|c| c.is_ascii_hexdigit()) {
                text.push(c);
                self.bump();
            }
            return Tok::Number(text);
        }
        while let Some(c) = self.peek().filter(|c| c.is_ascii_digit()) {
            text.push(c);
            self.bump();
        }
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            text.push('.');
            self.bump();
            while let Some(c) = self.peek().filter(|c| c.is_ascii_digit()) {
                text.push(c);
                self.bump();
            }
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let sign = matches!(self.peek_at(1), Some('+' | '-'));
            let digit_at = if sign { 2 } else { 1 };
            if self.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                for _ in 0..digit_at {
                    if let Some(c) = self.bump() {
                        text.push(c);
                    }
                }
                while let Some(c) = self.peek().filter(|c| c.is_ascii_digit()) {
                    text.push(c);
                    self.bump();
                }
            }
        }
        Tok::Number(text)
    }

    fn lex_word(&mut self, location: &SourceLocation) -> Result<Tok, FrontendError> {
        let mut word = String::new();
        if self.starts_with("::") {
            word.push_str("::");
            self.bump();
            self.bump();
        }
        word.push_str(&self.take_qualified(|c| c.is_ascii_alphanumeric() || c == '_'));
        if word == "::" {
            return Err(FrontendError::parse(location.clone(), "dangling `::`"));
        }
        Ok(match word.as_str() {
            "class" => Tok::Class,
            "define" => Tok::Define,
            "if" => Tok::If,
            "elsif" => Tok::Elsif,
            "else" => Tok::Else,
            "unless" => Tok::Unless,
            "case" => Tok::Case,
            "default" => Tok::Default,
            "undef" => Tok::Undef,
            "true" => Tok::True,
            "false" => Tok::False,
            "node" => Tok::Node,
            "inherits" => Tok::Inherits,
            "and" => Tok::And,
            "or" => Tok::Or,
            "in" => Tok::In,
            _ => Tok::Name(word),
        })
    }

    fn lex_type_name(&mut self) -> Tok {
        Tok::TypeName(self.take_qualified(|c| c.is_ascii_alphanumeric() || c == '_'))
    }

    fn lex_regex(&mut self, location: &SourceLocation) -> Result<Tok, FrontendError> {
        self.bump();
        let mut body = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => {
                    return Err(FrontendError::parse(location.clone(), "unterminated regex"))
                }
                Some('/') => return Ok(Tok::Regex(body)),
                Some('\\') => {
                    body.push('\\');
                    if let Some(c) = self.bump() {
                        body.push(c);
                    }
                }
                Some(c) => body.push(c),
            }
        }
    }

    fn lex_punct(&mut self, c: char, location: &SourceLocation) -> Result<Tok, FrontendError> {
        const MULTI: &[(&str, Tok)] = &[
            ("<<|", Tok::CollectorOpen),
            ("|>>", Tok::CollectorClose),
            ("*=>", Tok::Splat),
            ("=>", Tok::FatArrow),
            ("+>", Tok::PlusArrow),
            ("==", Tok::Eq),
            ("!=", Tok::Ne),
            ("=~", Tok::Match),
            ("!~", Tok::NoMatch),
            ("<=", Tok::Le),
            (">=", Tok::Ge),
            ("->", Tok::Chain),
            ("~>", Tok::Chain),
            ("<-", Tok::Chain),
            ("<~", Tok::Chain),
            ("<|", Tok::CollectorOpen),
            ("|>", Tok::CollectorClose),
            ("<<", Tok::Shl),
            (">>", Tok::Shr),
            ("@@", Tok::AtAt),
            ("@(", Tok::Heredoc),
        ];
        for (text, tok) in MULTI {
            if self.starts_with(text) {
                for _ in 0..text.chars().count() {
                    self.bump();
                }
                return Ok(tok.clone());
            }
        }
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            ',' => Tok::Comma,
            ':' => Tok::Colon,
            ';' => Tok::Semi,
            '=' => Tok::Assign,
            '<' => Tok::Lt,
            '>' => Tok::Gt,
            '!' => Tok::Not,
            '?' => Tok::Question,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '%' => Tok::Percent,
            '|' => Tok::Pipe,
            '.' => Tok::Dot,
            '@' => Tok::At,
            other => {
                return Err(FrontendError::parse(
                    location.clone(),
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        self.bump();
        Ok(tok)
    }
}

/// A `/` starts a regex only where an operand is expected.
fn regex_allowed(prev: Option<&Tok>) -> bool {
    matches!(
        prev,
        None | Some(
            Tok::Match
                | Tok::NoMatch
                | Tok::LBrace
                | Tok::RBrace
                | Tok::Comma
                | Tok::LParen
                | Tok::LBrack
                | Tok::Question
                | Tok::Semi
                | Tok::Colon
                | Tok::FatArrow
                | Tok::Assign
                | Tok::Eq
                | Tok::Ne
                | Tok::Not
                | Tok::And
                | Tok::Or
                | Tok::In
                | Tok::Case
                | Tok::If
                | Tok::Elsif
                | Tok::Unless
        )
    )
}
