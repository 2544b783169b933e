//! Specification files: qualifier and datatype declarations, the component
//! library and one goal query.

pub(crate) mod lexer;
pub(crate) mod parser;
mod pretty;
mod wf;

pub use parser::{parse_prop, parse_sort, parse_term};
pub use wf::{check_well_formed, Violation};

use crate::logic::{Prop, QualSig, Sort, Vocab};
use std::fmt;

/// Source position. Compares equal to every other span so that structural
/// equality of syntax trees ignores where they came from.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("{span}: syntax error: {msg}")]
    Syntax { span: Span, msg: String },
    #[error("{span}: undeclared symbol `{name}`")]
    UndeclaredSymbol { name: String, span: Span },
    #[error("{span}: `{name}` expects {expected} argument(s), got {found}")]
    ArityMismatch { name: String, expected: usize, found: usize, span: Span },
    #[error("no query declared")]
    MissingQuery,
    #[error("{span}: {msg}")]
    Invalid { msg: String, span: Span },
}

impl SpecError {
    pub fn span(&self) -> Option<Span> {
        match self {
            SpecError::Syntax { span, .. }
            | SpecError::UndeclaredSymbol { span, .. }
            | SpecError::ArityMismatch { span, .. }
            | SpecError::Invalid { span, .. } => Some(*span),
            SpecError::MissingQuery => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualifierDecl {
    pub name: String,
    pub args: Vec<Sort>,
    pub result: Sort,
    pub interpreted: bool,
    pub span: Span,
}

/// `{v : S | φ}`; a bare sort `S` is `{v : S | true}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementType {
    pub var: String,
    pub sort: Sort,
    pub prop: Prop,
}

impl RefinementType {
    pub fn trivial(sort: Sort) -> RefinementType {
        RefinementType { var: "v".into(), sort, prop: Prop::True }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CtorDecl {
    pub name: String,
    pub params: Vec<(String, RefinementType)>,
    /// Refinement of the constructed value, over `v` and the params.
    pub refinement: Prop,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatatypeDecl {
    pub name: String,
    pub ctors: Vec<CtorDecl>,
    pub span: Span,
}

/// A named global heap location such as a queue reference.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalDecl {
    pub name: String,
    pub sort: Sort,
    pub span: Span,
}

/// `State {\(h : heap). \ (X : s). pre} v : τ {\(h : heap), (v : t), (h' : heap). \ (..). post}`
/// behind a chain of dependent parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSpec {
    pub name: String,
    pub params: Vec<(String, RefinementType)>,
    pub pre_heap: String,
    pub pre_ghosts: Vec<(String, Sort)>,
    pub pre: Prop,
    pub result_var: String,
    pub result: RefinementType,
    pub post_pre_heap: String,
    pub post_heap: String,
    pub post_ghosts: Vec<(String, Sort)>,
    pub post: Prop,
    pub span: Span,
}

pub type QuerySpec = ComponentSpec;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpecFile {
    pub sorts: Vec<(String, Span)>,
    pub qualifiers: Vec<QualifierDecl>,
    pub datatypes: Vec<DatatypeDecl>,
    pub globals: Vec<GlobalDecl>,
    pub library: Vec<ComponentSpec>,
    pub query: Option<QuerySpec>,
}

impl SpecFile {
    pub fn query(&self) -> &QuerySpec {
        self.query.as_ref().expect("checked by parse_spec_file")
    }

    pub fn component(&self, name: &str) -> Option<&ComponentSpec> {
        self.library.iter().find(|c| c.name == name)
    }

    /// Functions and sorts the file's propositions may mention.
    pub fn vocab(&self) -> Vocab {
        let mut v = Vocab::default();
        for (s, _) in &self.sorts {
            v.sorts.insert(s.clone());
        }
        for q in &self.qualifiers {
            v.quals.insert(q.name.clone(), QualSig { args: q.args.clone(), result: q.result.clone(), interpreted: q.interpreted });
        }
        for d in &self.datatypes {
            v.sorts.insert(d.name.clone());
            for c in &d.ctors {
                let args = c.params.iter().map(|(_, t)| t.sort.clone()).collect();
                v.ctors.insert(c.name.clone(), QualSig { args, result: Sort::Named(d.name.clone()), interpreted: false });
            }
        }
        v
    }
}

/// Parse without semantic checks. Fails only on syntax or a repeated query.
pub fn parse_spec_unchecked(text: &str) -> Result<SpecFile, SpecError> {
    parser::parse_file(text)
}

/// Parse and validate; the first violation becomes the error.
pub fn parse_spec_file(text: &str) -> Result<SpecFile, SpecError> {
    let file = parse_spec_unchecked(text)?;
    if file.query.is_none() {
        return Err(SpecError::MissingQuery);
    }
    match check_well_formed(&file).into_iter().next() {
        Some(v) => Err(v.into_error()),
        None => Ok(file),
    }
}

/// Canonical text; `parse_spec_file(pretty(s)) == s`.
pub fn pretty(file: &SpecFile) -> String {
    pretty::file(file)
}

#[cfg(test)]
mod tests;
