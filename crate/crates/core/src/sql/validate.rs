use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::*;
use crate::schema::Schema;

/// A broken query invariant. Violations are data, not errors.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "violation", content = "detail", rename_all = "snake_case")]
pub enum Violation {
    #[error("{0} clause is empty")]
    EmptyClause(ClauseKind),
    #[error("argument `{arg}` does not belong in {clause}")]
    MisplacedArgument { clause: ClauseKind, arg: String },
    #[error("duplicate argument `{arg}` in {clause}")]
    DuplicateArgument { clause: ClauseKind, arg: String },
    #[error("marker `{arg}` in {clause} has nothing to qualify")]
    DanglingMarker { clause: ClauseKind, arg: String },
    #[error("IEU must hold one set operator and one subquery pointer")]
    MalformedIeu,
    #[error("LIMIT must hold exactly one value")]
    MalformedLimit,
    #[error("`{0}` points at a missing subquery")]
    DanglingSubqueryRef(String),
    #[error("subquery is not referenced by any argument")]
    UnreferencedSubquery,
    #[error("subquery is referenced {0} times")]
    MultipleSubqueryReferences(usize),
    #[error("subqueries nest deeper than one level")]
    NestingTooDeep,
    #[error("malformed condition `{0}`")]
    MalformedCondition(String),
    #[error("invalid use of `*` in `{0}`")]
    MisplacedStar(String),
    #[error("join condition `{0}` must link two different FROM tables")]
    BadJoin(String),
    #[error("column `{0}` belongs to a table missing from FROM")]
    TableNotInScope(String),
    #[error("{0}")]
    Resolution(String),
}

/// Checks every structural invariant and, when a schema is given, that every
/// table and column exists in it.
pub fn validate(q: &SqlQuery, schema: &Schema) -> Vec<Violation> {
    let mut out = Vec::new();
    check_query(q, Some(schema), None, 0, &mut out);
    out
}

/// Schema-free invariant check.
pub fn check_structure(q: &SqlQuery) -> Vec<Violation> {
    let mut out = Vec::new();
    check_query(q, None, None, 0, &mut out);
    out
}

fn allowed(kind: ClauseKind, arg: &Argument) -> bool {
    use Argument as A;
    match kind {
        ClauseKind::From => matches!(arg, A::Table(_) | A::Join(..)),
        ClauseKind::Select => matches!(arg, A::Expr(_) | A::Keyword(Keyword::Distinct)),
        ClauseKind::Where | ClauseKind::Having => matches!(arg, A::Cond(_) | A::Keyword(Keyword::Or)),
        ClauseKind::GroupBy => matches!(arg, A::Column(_)),
        ClauseKind::OrderBy => matches!(arg, A::Expr(_) | A::Keyword(Keyword::Desc)),
        ClauseKind::Limit => matches!(arg, A::Limit(_)),
        ClauseKind::Ieu => matches!(arg, A::Subquery(_)) || arg.as_keyword().is_some_and(Keyword::is_set_op),
        ClauseKind::Subs => false,
    }
}

fn expr_star_ok(e: &AggExpr, bare_star_ok: bool) -> bool {
    match &e.unit {
        ValUnit::Column(Column::Star) => match e.agg {
            Some(Agg::Count) => !e.distinct,
            Some(_) => false,
            None => bare_star_ok,
        },
        ValUnit::Column(_) => true,
        ValUnit::Arith { left, right, .. } => *left != Column::Star && *right != Column::Star,
    }
}

fn check_query(
    q: &SqlQuery,
    schema: Option<&Schema>,
    outer_tables: Option<&[&str]>,
    depth: usize,
    out: &mut Vec<Violation>,
) {
    for kind in [ClauseKind::Select, ClauseKind::From] {
        if !q.args(kind).iter().any(|a| a.as_keyword().is_none()) {
            out.push(Violation::EmptyClause(kind));
        }
    }

    let tables: Vec<&str> = q.tables().collect();
    let mut in_scope: Vec<&str> = tables.clone();
    if let Some(outer) = outer_tables {
        in_scope.extend_from_slice(outer);
    }

    for kind in ClauseKind::ARGUMENT_CLAUSES {
        let args = q.args(kind);
        for (i, arg) in args.iter().enumerate() {
            if !allowed(kind, arg) {
                out.push(Violation::MisplacedArgument {
                    clause: kind,
                    arg: arg.to_string(),
                });
                continue;
            }
            let key = arg.match_key(kind);
            if args[..i].iter().any(|a| a.match_key(kind) == key) {
                out.push(Violation::DuplicateArgument {
                    clause: kind,
                    arg: arg.to_string(),
                });
            }
            check_argument(kind, arg, &tables, &in_scope, schema, out);
        }
        check_markers(q, kind, out);
    }

    if let Some(t) = schema {
        for table in &tables {
            if t.table(table).is_none_or(|st| st.name != *table) {
                out.push(Violation::Resolution(format!("unknown table `{table}`")));
            }
        }
    }

    let limits = q.args(ClauseKind::Limit).len();
    if limits > 1 {
        out.push(Violation::MalformedLimit);
    }
    let ieu = q.args(ClauseKind::Ieu);
    if !ieu.is_empty() {
        let kws = ieu.iter().filter(|a| a.as_keyword().is_some()).count();
        let refs = ieu.iter().filter(|a| a.subquery_ref().is_some()).count();
        if ieu.len() != 2 || kws != 1 || refs != 1 {
            out.push(Violation::MalformedIeu);
        }
    }

    let refs: Vec<SubRef> = q.arguments().filter_map(|(_, a)| a.subquery_ref()).collect();
    match q.subquery() {
        None => {
            for r in &refs {
                out.push(Violation::DanglingSubqueryRef(r.to_string()));
            }
        }
        Some(sub) => {
            for r in refs.iter().filter(|r| r.0 != 0) {
                out.push(Violation::DanglingSubqueryRef(r.to_string()));
            }
            match refs.len() {
                0 => out.push(Violation::UnreferencedSubquery),
                1 => {}
                n => out.push(Violation::MultipleSubqueryReferences(n)),
            }
            if depth >= 1 {
                out.push(Violation::NestingTooDeep);
            } else {
                // IEU operands are independent queries; nested conditions may
                // reach into the outer FROM.
                let via_ieu = q.args(ClauseKind::Ieu).iter().any(|a| a.subquery_ref().is_some());
                let outer = if via_ieu { None } else { Some(tables.as_slice()) };
                check_query(sub, schema, outer, depth + 1, out);
            }
        }
    }
}

fn check_markers(q: &SqlQuery, kind: ClauseKind, out: &mut Vec<Violation>) {
    let args = q.args(kind);
    let non_markers = args.iter().filter(|a| a.as_keyword().is_none()).count();
    for arg in args {
        let Some(kw) = arg.as_keyword() else { continue };
        let needed = match (kind, kw) {
            (ClauseKind::Where | ClauseKind::Having, Keyword::Or) => 2,
            (ClauseKind::Select, Keyword::Distinct) | (ClauseKind::OrderBy, Keyword::Desc) => 1,
            _ => continue,
        };
        if non_markers < needed {
            out.push(Violation::DanglingMarker {
                clause: kind,
                arg: arg.to_string(),
            });
        }
    }
}

fn check_argument(
    kind: ClauseKind,
    arg: &Argument,
    tables: &[&str],
    in_scope: &[&str],
    schema: Option<&Schema>,
    out: &mut Vec<Violation>,
) {
    let shown = arg.to_string();
    match arg {
        Argument::Join(a, b) => {
            let ok = match (a.table(), b.table()) {
                (Some(x), Some(y)) => x != y && tables.contains(&x) && tables.contains(&y),
                _ => false,
            };
            if !ok || tables.len() < 2 {
                out.push(Violation::BadJoin(shown.clone()));
            }
        }
        Argument::Expr(e) => {
            if !expr_star_ok(e, kind == ClauseKind::Select) {
                out.push(Violation::MisplacedStar(shown.clone()));
            }
            if e.distinct && e.agg.is_none() {
                out.push(Violation::MalformedCondition(shown.clone()));
            }
        }
        Argument::Column(Column::Star) => out.push(Violation::MisplacedStar(shown.clone())),
        Argument::Cond(c) => {
            if !expr_star_ok(&c.lhs, false) {
                out.push(Violation::MisplacedStar(shown.clone()));
            }
            let shape_ok = match (&c.op, &c.rhs) {
                (CmpOp::Between, Operand::Range(..)) => true,
                (CmpOp::Between, _) | (_, Operand::Range(..)) => false,
                (CmpOp::In | CmpOp::NotIn, rhs) => matches!(rhs, Operand::Subquery(_)),
                (_, Operand::Column(Column::Star)) => false,
                _ => true,
            };
            if !shape_ok {
                out.push(Violation::MalformedCondition(shown.clone()));
            }
        }
        _ => {}
    }

    if kind == ClauseKind::From {
        if let Argument::Join(..) = arg {
            check_columns(arg, tables, schema, out);
        }
        return;
    }
    check_columns(arg, in_scope, schema, out);
}

fn check_columns(arg: &Argument, scope: &[&str], schema: Option<&Schema>, out: &mut Vec<Violation>) {
    for col in arg.columns() {
        let Column::Named { table, column } = col else { continue };
        if !scope.contains(&table.as_str()) {
            out.push(Violation::TableNotInScope(col.to_string()));
            continue;
        }
        if let Some(s) = schema {
            let exists = s
                .table(table)
                .and_then(|t| t.column(column))
                .is_some_and(|c| c == column);
            if !exists {
                out.push(Violation::Resolution(format!("unknown column `{col}`")));
            }
        }
    }
}
