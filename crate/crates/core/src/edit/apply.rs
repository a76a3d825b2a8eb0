use super::SqlEdit;
use crate::error::EditError;
use crate::sql::{check_structure, SqlQuery};

/// Applies `d` to `source`.
///
/// Removals are matched with the same keys [`diff`](super::diff) uses, so a
/// removal matches regardless of WHERE/HAVING values. The result is checked
/// and rejected with [`EditError::InvalidResult`] if it breaks a query
/// invariant.
pub fn apply(d: &SqlEdit, source: &SqlQuery) -> Result<SqlQuery, EditError> {
    let q = apply_unchecked(d, source)?;
    let violations = check_structure(&q);
    if violations.is_empty() {
        Ok(q)
    } else {
        Err(EditError::InvalidResult(violations))
    }
}

fn apply_unchecked(d: &SqlEdit, source: &SqlQuery) -> Result<SqlQuery, EditError> {
    let mut q = source.clone();
    for (kind, edit) in d.clauses() {
        let mut args = q.args(kind).to_vec();
        for r in &edit.to_remove {
            let key = r.match_key(kind);
            let idx = args
                .iter()
                .position(|a| a.match_key(kind) == key)
                .ok_or_else(|| EditError::InapplicableEdit(format!("{kind} has no argument `{r}` to remove")))?;
            args.remove(idx);
        }
        for a in &edit.to_add {
            let key = a.match_key(kind);
            if args.iter().any(|x| x.match_key(kind) == key) {
                return Err(EditError::InapplicableEdit(format!("{kind} already has `{a}`")));
            }
            args.push(a.clone());
        }
        q.set_args(kind, args);
    }
    if let Some(sub_edit) = d.subs() {
        let base = q.subquery().cloned().unwrap_or_default();
        let sub = apply_unchecked(sub_edit, &base)?;
        q.set_subquery(Some(sub));
    }
    if q.subquery_references() == 0 {
        q.set_subquery(None);
    }
    q.tidy();
    Ok(q)
}
