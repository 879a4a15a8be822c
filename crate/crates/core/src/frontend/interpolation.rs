//! Splits double-quoted string bodies into literal and embedded parts.

use super::ast::{Expr, ExprKind, SourceLocation, StringPart};
use super::lexer::Lexer;
use super::parser::Parser;
use super::FrontendError;

/// Splits `body` (the text between the double quotes, escapes unprocessed)
/// into literal fragments and embedded variables/expressions. `location`
/// is the position of the first body character.
///
/// Recognized forms are `${var}`, `$var` and `${expr}`. Adjacent literal
/// fragments are merged; an empty body yields no parts.
pub fn parse_interpolation(
    body: &str,
    location: &SourceLocation,
) -> Result<Vec<StringPart>, FrontendError> {
    let chars: Vec<char> = body.chars().collect();
    let mut cursor = Cursor {
        chars: &chars,
        pos: 0,
        line: location.line,
        column: location.column,
    };
    let mut parts = Vec::new();
    let mut literal = String::new();

    while let Some(c) = cursor.peek(0) {
        match c {
            '\\' => {
                cursor.bump();
                match cursor.bump() {
                    Some('"') => literal.push('"'),
                    Some('\\') => literal.push('\\'),
                    Some('$') => literal.push('$'),
                    Some('\'') => literal.push('\''),
                    Some('n') => literal.push('\n'),
                    Some('t') => literal.push('\t'),
                    Some('r') => literal.push('\r'),
                    Some('s') => literal.push(' '),
                    Some(other) => {
                        literal.push('\\');
                        literal.push(other);
                    }
                    None => literal.push('\\'),
                }
            }
            '$' if cursor.peek(1) == Some('{') => {
                let start = cursor.location(&location.path);
                cursor.bump();
                cursor.bump();
                let inner_start = cursor.location(&location.path);
                let inner = cursor
                    .take_braced()
                    .ok_or_else(|| FrontendError::parse(start.clone(), "unbalanced `${` in string"))?;
                flush(&mut literal, &mut parts);
                parts.push(embedded_part(&inner, &start, &inner_start)?);
            }
            '$' if cursor.peek(1).is_some_and(is_short_var_start)
                || (cursor.peek(1) == Some(':')
                    && cursor.peek(2) == Some(':')
                    && cursor.peek(3).is_some_and(is_short_var_start)) =>
            {
                let start = cursor.location(&location.path);
                cursor.bump();
                if cursor.peek(0) == Some(':') {
                    cursor.bump();
                    cursor.bump();
                }
                let name = cursor.take_var_name();
                flush(&mut literal, &mut parts);
                parts.push(StringPart::Var {
                    name,
                    location: start,
                });
            }
            c => {
                literal.push(c);
                cursor.bump();
            }
        }
    }
    flush(&mut literal, &mut parts);
    Ok(parts)
}

fn is_short_var_start(c: char) -> bool {
    c.is_ascii_lowercase() || c == '_'
}

fn is_var_start(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn flush(literal: &mut String, parts: &mut Vec<StringPart>) {
    if !literal.is_empty() {
        parts.push(StringPart::Literal(std::mem::take(literal)));
    }
}

fn embedded_part(
    inner: &str,
    start: &SourceLocation,
    inner_start: &SourceLocation,
) -> Result<StringPart, FrontendError> {
    let trimmed = inner.trim();
    if trimmed.is_empty() {
        return Err(FrontendError::parse(start.clone(), "empty `${}` in string"));
    }
    if is_plain_var_name(trimmed) {
        return Ok(StringPart::Var {
            name: trimmed.trim_start_matches("::").to_string(),
            location: start.clone(),
        });
    }
    let tokens = Lexer::with_origin(
        inner,
        inner_start.path.clone(),
        inner_start.line,
        inner_start.column,
    )
    .tokenize()?;
    let expr = Parser::new(tokens).parse_standalone_expression()?;
    let expr = barewords_to_vars(expr);
    Ok(match expr.kind {
        ExprKind::Var(name) => StringPart::Var {
            name,
            location: start.clone(),
        },
        _ => StringPart::Expr(expr),
    })
}

fn is_plain_var_name(s: &str) -> bool {
    let s = s.strip_prefix("::").unwrap_or(s);
    !s.is_empty()
        && s.split("::").all(|seg| {
            !seg.is_empty() && seg.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        })
        && s.chars().next().is_some_and(|c| !c.is_ascii_uppercase())
}

/// Inside `${...}` a bare name denotes a variable, including as the base
/// of an access such as `${facts['os']}`.
fn barewords_to_vars(expr: Expr) -> Expr {
    match expr.kind {
        ExprKind::Bareword(name) => Expr {
            kind: ExprKind::Var(name.trim_start_matches("::").to_string()),
            location: expr.location,
        },
        ExprKind::Access { base, keys } => Expr {
            kind: ExprKind::Access {
                base: Box::new(barewords_to_vars(*base)),
                keys,
            },
            location: expr.location,
        },
        kind => Expr {
            kind,
            location: expr.location,
        },
    }
}

struct Cursor<'a> {
    chars: &'a [char],
    pos: usize,
    line: u32,
    column: u32,
}

impl Cursor<'_> {
    fn peek(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek(0)?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn location(&self, path: &std::sync::Arc<str>) -> SourceLocation {
        SourceLocation::new(path.clone(), self.line, self.column)
    }

    fn take_var_name(&mut self) -> String {
        let mut name = String::new();
        loop {
            while let Some(c) = self.peek(0).filter(|c| is_var_start(*c)) {
                name.push(c);
                self.bump();
            }
            if self.peek(0) == Some(':')
                && self.peek(1) == Some(':')
                && self.peek(2).is_some_and(is_var_start)
            {
                name.push_str("::");
                self.bump();
                self.bump();
            } else {
                return name;
            }
        }
    }

    /// Consumes up to and including the `}` matching an already-consumed
    /// `${`, returning the text in between.
    fn take_braced(&mut self) -> Option<String> {
        let mut depth = 1usize;
        let mut out = String::new();
        while let Some(c) = self.bump() {
            match c {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(out);
                    }
                }
                q @ ('\'' | '"') => {
                    out.push(q);
                    loop {
                        let inner = self.bump()?;
                        out.push(inner);
                        if inner == '\\' {
                            out.push(self.bump()?);
                        } else if inner == q {
                            break;
                        }
                    }
                    continue;
                }
                _ => {}
            }
            out.push(c);
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;

    fn loc() -> SourceLocation {
        SourceLocation::new(Arc::from("t.pp"), 1, 2)
    }

    fn shape(parts: &[StringPart]) -> Vec<String> {
        parts
            .iter()
            .map(|p| match p {
                StringPart::Literal(l) => format!("lit:{l}"),
                StringPart::Var { name, .. } => format!("var:{name}"),
                StringPart::Expr(e) => format!("expr:{}", e.to_source()),
            })
            .collect()
    }

    #[test]
    fn braced_var_then_literal() {
        let parts = parse_interpolation("${magnum_protocol}://x", &loc()).unwrap();
        assert_eq!(shape(&parts), ["var:magnum_protocol", "lit:://x"]);
    }

    #[test]
    fn plain_text_is_one_literal() {
        assert_eq!(shape(&parse_interpolation("plain", &loc()).unwrap()), ["lit:plain"]);
    }

    #[test]
    fn alternating_literals_and_vars() {
        let parts = parse_interpolation("a${x}b${y}", &loc()).unwrap();
        assert_eq!(shape(&parts), ["lit:a", "var:x", "lit:b", "var:y"]);
    }

    #[test]
    fn short_form_var_stops_at_non_word() {
        let parts = parse_interpolation("$user:$group-x", &loc()).unwrap();
        assert_eq!(shape(&parts), ["var:user", "lit::", "var:group", "lit:-x"]);
    }

    #[test]
    fn embedded_access_uses_variable_base() {
        let parts = parse_interpolation("${facts['os']}", &loc()).unwrap();
        assert_eq!(shape(&parts), ["expr:$facts['os']"]);
    }

    #[test]
    fn embedded_call() {
        let parts = parse_interpolation("x ${join($a, ',')}", &loc()).unwrap();
        assert_eq!(shape(&parts), ["lit:x ", "expr:join($a, ',')"]);
    }

    #[test]
    fn escapes() {
        let parts = parse_interpolation(r#"a\"b\\c\$d\ne\tf\q"#, &loc()).unwrap();
        assert_eq!(shape(&parts), ["lit:a\"b\\c$d\ne\tf\\q"]);
    }

    #[test]
    fn lone_dollar_is_literal() {
        assert_eq!(shape(&parse_interpolation("cost $5", &loc()).unwrap()), ["lit:cost $5"]);
    }

    #[test]
    fn unbalanced_brace_is_error() {
        assert!(parse_interpolation("abc ${x", &loc()).is_err());
        assert!(parse_interpolation("${}", &loc()).is_err());
    }

    #[test]
    fn var_location_tracks_offset() {
        let parts = parse_interpolation("ab${x}", &loc()).unwrap();
        match &parts[1] {
            StringPart::Var { location, .. } => assert_eq!(location.column, 4),
            other => panic!("unexpected {other:?}"),
        }
    }
}
