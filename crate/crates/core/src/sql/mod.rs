//! SQL clause view: parsing, rendering and validation.

mod ast;
mod parse;
mod render;
mod validate;

pub use ast::*;
pub use parse::parse_sql;
pub use render::render_sql;
pub use validate::{check_structure, validate, Violation};
