//! The counter-program language: parsing, macro expansion, compilation to
//! VASS, pretty printing, and a direct AST interpreter.

pub mod ast;
pub mod compile;
pub mod expand;
pub mod interp;
pub mod meta;
pub mod parser;
pub mod print;

use thiserror::Error;

pub use ast::CounterProgram;
pub use compile::{compile, Compiled};
pub use expand::{expand, Expansion, FlatCommand, FlatProgram};
pub use parser::{parse, ParseError};
pub use print::{print_flat, print_program};

use crate::vass::VassError;

#[derive(Debug, Error)]
pub enum LangError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("expansion error: {0}")]
    Expand(#[from] expand::ExpandError),
    #[error("compile error: {0}")]
    Compile(#[from] VassError),
}

/// A program together with its expansion and compiled VASS.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub program: CounterProgram,
    pub expansion: Expansion,
    pub compiled: Compiled,
}

pub fn build(p: &CounterProgram) -> Result<Artifact, LangError> {
    let expansion = expand(p)?;
    let compiled = compile(&expansion.program)?;
    Ok(Artifact {
        program: p.clone(),
        expansion,
        compiled,
    })
}

pub fn build_text(text: &str) -> Result<Artifact, LangError> {
    build(&parse(text)?)
}

/// Parse the printed flat program back into a `CounterProgram`.
pub fn flat_to_program(p: &FlatProgram) -> CounterProgram {
    parse(&print_flat(p)).expect("printed flat programs parse")
}
