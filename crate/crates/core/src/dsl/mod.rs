//! Declaration language: parsing, printing and running documents.

pub mod ast;
pub mod parser;
pub mod print;
pub mod report;
pub mod run;

pub use ast::ModelDocument;
pub use parser::{parse, DslError};
pub use print::print_document;
pub use run::{check_source, oracle_for_query, run, Report, RunOptions};
