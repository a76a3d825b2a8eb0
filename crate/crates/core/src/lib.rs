//! Clause-level SQL edits for interactive parse correction.
//!
//! * [`sql`]: parse Spider-style SQL into a clause view, render and validate it.
//! * [`edit`]: diff two queries into a [`SqlEdit`], apply it, and convert it
//!   to and from the linearized `<clause> add|remove ARG </clause>` form.
//! * [`explain`]: step-numbered natural language explanations of a query.
//! * [`synth`]: synthesize (initial parse, feedback, gold parse) examples by
//!   applying editors to gold queries.
//! * [`eval`]: exact-set-match accuracy, Edit↓/Edit↑ and Progress for any
//!   corrector.

pub mod edit;
pub mod error;
pub mod eval;
pub mod explain;
pub mod schema;
pub mod sql;
pub mod synth;
pub mod verbalize;

pub use edit::{apply, diff, edit_size, linearize, parse_linearized, ClauseEdit, LinearizedEdit, SqlEdit};
pub use error::{EditError, EvalError, ParseError, SchemaError, SynthError};
pub use eval::{evaluate, exact_set_match, MetricsReport};
pub use explain::{explain, Explanation};
pub use schema::{Schema, SchemaSet, Table};
pub use sql::{parse_sql, render_sql, validate, SqlQuery};
pub use synth::{synthesize, SynthConfig, SynthExample};
