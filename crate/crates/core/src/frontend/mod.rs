//! Lexer and parser for the supported Puppet subset.
//!
//! The subset covers assignments, class and defined-type definitions,
//! resource declarations, overrides and defaults, `if`/`unless`/`case`,
//! selectors, strings with interpolation, function calls, arrays, hashes,
//! access expressions, `undef`, booleans, numbers and resource references.
//! Heredocs, lambdas, method calls, node blocks, collectors, virtual and
//! exported resources are reported as [`FrontendError::UnsupportedConstruct`].

pub mod ast;
mod interpolation;
mod lexer;
mod parser;

use std::sync::Arc;

use thiserror::Error;

pub use ast::*;
pub use interpolation::parse_interpolation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("{location}: parse error: {message}")]
    Parse {
        location: SourceLocation,
        message: String,
    },
    #[error("{location}: unsupported construct: {construct}")]
    UnsupportedConstruct {
        location: SourceLocation,
        construct: String,
    },
}

impl FrontendError {
    pub(crate) fn parse(location: SourceLocation, message: impl Into<String>) -> Self {
        FrontendError::Parse {
            location,
            message: message.into(),
        }
    }

    pub(crate) fn unsupported(location: SourceLocation, construct: impl Into<String>) -> Self {
        FrontendError::UnsupportedConstruct {
            location,
            construct: construct.into(),
        }
    }

    pub fn location(&self) -> &SourceLocation {
        match self {
            FrontendError::Parse { location, .. }
            | FrontendError::UnsupportedConstruct { location, .. } => location,
        }
    }
}

/// Parses one manifest. `path` is recorded verbatim in every location.
pub fn parse_manifest(text: &str, path: &str) -> Result<Manifest, FrontendError> {
    let path: Arc<str> = Arc::from(path);
    if path.is_empty() {
        return Err(FrontendError::parse(
            SourceLocation::new(path, 1, 1),
            "manifest path must not be empty",
        ));
    }
    let tokens = lexer::Lexer::new(text, path.clone()).tokenize()?;
    let statements = parser::Parser::new(tokens).parse_program()?;
    Ok(Manifest {
        path,
        statements,
        raw_text: text.to_string(),
    })
}
