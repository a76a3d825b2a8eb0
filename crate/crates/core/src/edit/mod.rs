//! SQL edits: the clause-level difference between two queries.
//!
//! An edit maps each clause kind to a set of arguments to remove and a set to
//! add. The SUBS clause carries a nested edit between the two subqueries.

mod apply;
mod diff;
mod linearize;

use std::collections::BTreeMap;

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::sql::{Argument, ClauseKind};

pub use apply::apply;
pub use diff::diff;
pub use linearize::{linearize, parse_linearized, LinearizedEdit};

/// Add/remove operations on one clause. Both lists are kept in canonical order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClauseEdit {
    pub to_remove: Vec<Argument>,
    pub to_add: Vec<Argument>,
}

fn sort_key(clause: ClauseKind, a: &Argument) -> (String, String) {
    (a.match_key(clause).to_string(), a.to_string())
}

impl ClauseEdit {
    pub fn new(clause: ClauseKind, to_remove: Vec<Argument>, to_add: Vec<Argument>) -> Self {
        let mut e = ClauseEdit { to_remove, to_add };
        e.normalize(clause);
        e
    }

    pub(crate) fn normalize(&mut self, clause: ClauseKind) {
        self.to_remove.sort_by_cached_key(|a| sort_key(clause, a));
        self.to_add.sort_by_cached_key(|a| sort_key(clause, a));
    }

    pub fn len(&self) -> usize {
        self.to_remove.len() + self.to_add.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The edit between two queries.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SqlEdit {
    clauses: BTreeMap<ClauseKind, ClauseEdit>,
    subs: Option<Box<SqlEdit>>,
}

impl SqlEdit {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores a clause edit; empty edits are dropped.
    pub fn set_clause(&mut self, clause: ClauseKind, mut edit: ClauseEdit) {
        assert!(clause != ClauseKind::Subs, "SUBS edits are nested SqlEdits");
        edit.normalize(clause);
        if edit.is_empty() {
            self.clauses.remove(&clause);
        } else {
            self.clauses.insert(clause, edit);
        }
    }

    pub fn clause(&self, clause: ClauseKind) -> Option<&ClauseEdit> {
        self.clauses.get(&clause)
    }

    /// Clause edits in linearization order, SUBS excluded.
    pub fn clauses(&self) -> impl Iterator<Item = (ClauseKind, &ClauseEdit)> {
        self.clauses.iter().map(|(k, v)| (*k, v))
    }

    pub fn subs(&self) -> Option<&SqlEdit> {
        self.subs.as_deref()
    }

    pub fn set_subs(&mut self, sub: Option<SqlEdit>) {
        self.subs = sub.filter(|s| !s.is_empty()).map(Box::new);
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty() && self.subs.is_none()
    }

    /// Clause kinds carrying edits, SUBS included.
    pub fn clause_kinds(&self) -> Vec<ClauseKind> {
        let mut kinds: Vec<_> = self.clauses.keys().copied().collect();
        if self.subs.is_some() {
            kinds.push(ClauseKind::Subs);
        }
        kinds
    }

    pub fn size(&self) -> usize {
        edit_size(self)
    }
}

/// Number of add and remove operations, counted recursively into SUBS.
pub fn edit_size(d: &SqlEdit) -> usize {
    d.clauses.values().map(ClauseEdit::len).sum::<usize>() + d.subs.as_deref().map_or(0, edit_size)
}

struct ClauseView<'a>(ClauseKind, &'a ClauseEdit);

impl Serialize for ClauseView<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let strings = |v: &[Argument]| v.iter().map(ToString::to_string).collect::<Vec<_>>();
        let mut st = s.serialize_struct("ClauseEdit", 3)?;
        st.serialize_field("clause", &self.0.to_string())?;
        st.serialize_field("to_remove", &strings(&self.1.to_remove))?;
        st.serialize_field("to_add", &strings(&self.1.to_add))?;
        st.end()
    }
}

/// JSON view: arguments appear in their canonical text form.
impl Serialize for SqlEdit {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let clauses: Vec<_> = self.clauses().map(|(k, e)| ClauseView(k, e)).collect();
        let mut st = s.serialize_struct("SqlEdit", 3)?;
        st.serialize_field("size", &self.size())?;
        st.serialize_field("clauses", &clauses)?;
        st.serialize_field("subs", &self.subs)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sql::{AggExpr, Column, Keyword};

    fn col(c: &str) -> Argument {
        Argument::Column(Column::named("t", c))
    }

    #[test]
    fn empty_edit_has_size_zero() {
        assert_eq!(edit_size(&SqlEdit::new()), 0);
        assert!(SqlEdit::new().is_empty());
    }

    #[test]
    fn size_counts_into_subs() {
        // Two ops inside SUBS plus one at the top level.
        let mut inner = SqlEdit::new();
        inner.set_clause(
            ClauseKind::Select,
            ClauseEdit::new(
                ClauseKind::Select,
                vec![Argument::Expr(AggExpr::column(Column::named("t", "a")))],
                vec![Argument::Expr(AggExpr::column(Column::named("t", "b")))],
            ),
        );
        let mut outer = SqlEdit::new();
        outer.set_clause(
            ClauseKind::GroupBy,
            ClauseEdit::new(ClauseKind::GroupBy, vec![], vec![col("a")]),
        );
        outer.set_subs(Some(inner));
        assert_eq!(edit_size(&outer), 3);
        assert_eq!(outer.clause_kinds(), vec![ClauseKind::GroupBy, ClauseKind::Subs]);
    }

    #[test]
    fn empty_clause_edits_are_not_stored() {
        let mut d = SqlEdit::new();
        d.set_clause(ClauseKind::Where, ClauseEdit::default());
        d.set_subs(Some(SqlEdit::new()));
        assert!(d.is_empty());
    }

    #[test]
    fn json_view_uses_canonical_text() {
        let mut d = SqlEdit::new();
        d.set_clause(
            ClauseKind::OrderBy,
            ClauseEdit::new(ClauseKind::OrderBy, vec![], vec![Argument::Keyword(Keyword::Desc)]),
        );
        let v = serde_json::to_value(&d).unwrap();
        assert_eq!(v["size"], 1);
        assert_eq!(v["clauses"][0]["clause"], "ORDER-BY");
        assert_eq!(v["clauses"][0]["to_add"][0], "desc");
    }
}
