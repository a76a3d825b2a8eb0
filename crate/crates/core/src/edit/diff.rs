use super::{ClauseEdit, SqlEdit};
use crate::error::EditError;
use crate::sql::{Argument, ClauseKind, SqlQuery};

/// Computes the edit turning `source` into `target`.
///
/// Arguments of each clause are exact-matched after canonicalization, with
/// WHERE/HAVING values erased; the edit itself carries only the erased
/// arguments, so it does not depend on condition values of either query. The SUBS edit is the recursive edit between the
/// two subqueries (either may be absent) and is pruned when the target no
/// longer references a subquery.
pub fn diff(source: &SqlQuery, target: &SqlQuery) -> Result<SqlEdit, EditError> {
    if let (Some(a), Some(b)) = (&source.db_id, &target.db_id) {
        if a != b {
            return Err(EditError::SchemaMismatch(a.clone(), b.clone()));
        }
    }
    Ok(diff_queries(source, target))
}

fn unmatched(kind: ClauseKind, from: &[Argument], against: &[Argument]) -> Vec<Argument> {
    let keys: Vec<Argument> = against.iter().map(|a| a.match_key(kind)).collect();
    from.iter()
        .map(|a| a.match_key(kind))
        .filter(|k| !keys.contains(k))
        .collect()
}

pub(crate) fn diff_queries(source: &SqlQuery, target: &SqlQuery) -> SqlEdit {
    let mut edit = SqlEdit::new();
    for kind in ClauseKind::ARGUMENT_CLAUSES {
        let (s, t) = (source.args(kind), target.args(kind));
        edit.set_clause(
            kind,
            ClauseEdit {
                to_remove: unmatched(kind, s, t),
                to_add: unmatched(kind, t, s),
            },
        );
    }
    let referenced = target.subquery_references() > 0;
    if let (Some(ts), true) = (target.subquery(), referenced) {
        let empty = SqlQuery::new();
        let ss = source.subquery().unwrap_or(&empty);
        edit.set_subs(Some(diff_queries(ss, ts)));
    }
    edit
}
