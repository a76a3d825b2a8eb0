//! SQL text rendering, plus the canonical lowercase display of arguments.

use std::fmt::{self, Write};

use super::ast::*;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Case {
    Lower,
    Upper,
}

impl Case {
    fn kw(self, s: &str) -> String {
        match self {
            Case::Lower => s.to_lowercase(),
            Case::Upper => s.to_uppercase(),
        }
    }
}

fn column(c: &Column) -> String {
    match c {
        Column::Star => "*".into(),
        Column::Named { table, column } => format!("{table}.{column}"),
    }
}

fn val_unit(v: &ValUnit) -> String {
    match v {
        ValUnit::Column(c) => column(c),
        ValUnit::Arith { op, left, right } => {
            format!("{} {} {}", column(left), op.symbol(), column(right))
        }
    }
}

fn agg_expr(e: &AggExpr, case: Case) -> String {
    let inner = val_unit(&e.unit);
    match e.agg {
        None => inner,
        Some(agg) => {
            let distinct = if e.distinct {
                format!("{} ", case.kw("distinct"))
            } else {
                String::new()
            };
            format!("{}({distinct}{inner})", case.kw(agg.keyword()))
        }
    }
}

fn literal(l: &Literal, case: Case) -> String {
    match l {
        Literal::Number(n) => n.clone(),
        Literal::Text(s) => format!("'{}'", s.replace('\'', "''")),
        Literal::Placeholder => match case {
            Case::Lower => "value".into(),
            Case::Upper => "'value'".into(),
        },
    }
}

fn condition(c: &Condition, case: Case, sub: &dyn Fn(SubRef) -> String) -> String {
    let lhs = agg_expr(&c.lhs, case);
    let op = case.kw(c.op.symbol());
    let rhs = match &c.rhs {
        Operand::Value(v) => literal(v, case),
        Operand::Range(a, b) => format!("{} {} {}", literal(a, case), case.kw("and"), literal(b, case)),
        Operand::Column(col) => column(col),
        Operand::Subquery(r) => sub(*r),
    };
    format!("{lhs} {op} {rhs}")
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&column(self))
    }
}

impl fmt::Display for AggExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&agg_expr(self, Case::Lower))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&literal(self, Case::Lower))
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&condition(self, Case::Lower, &|r| r.to_string()))
    }
}

impl fmt::Display for Argument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Argument::Table(t) => f.write_str(t),
            Argument::Join(a, b) => write!(f, "{a} = {b}"),
            Argument::Expr(e) => write!(f, "{e}"),
            Argument::Column(c) => write!(f, "{c}"),
            Argument::Cond(c) => write!(f, "{c}"),
            Argument::Keyword(k) => f.write_str(k.as_str()),
            Argument::Limit(n) => write!(f, "{n}"),
            Argument::Subquery(r) => write!(f, "{r}"),
        }
    }
}

impl fmt::Display for SqlQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_sql(self))
    }
}

/// Renders a query as SQL text with fully qualified columns.
pub fn render_sql(q: &SqlQuery) -> String {
    let case = Case::Upper;
    let sub_sql = |_: SubRef| match q.subquery() {
        Some(s) => format!("({})", render_sql(s)),
        None => "()".into(),
    };
    let mut out = String::new();

    out.push_str("SELECT ");
    if q.has_keyword(ClauseKind::Select, Keyword::Distinct) {
        out.push_str("DISTINCT ");
    }
    let items: Vec<_> = q.exprs(ClauseKind::Select).map(|e| agg_expr(e, case)).collect();
    out.push_str(&items.join(", "));

    let tables: Vec<&str> = q.tables().collect();
    if !tables.is_empty() {
        out.push_str(" FROM ");
        out.push_str(&render_from(q, &tables));
    }

    for kind in [ClauseKind::Where, ClauseKind::Having] {
        let conds: Vec<_> = q.conditions(kind).map(|c| condition(c, case, &sub_sql)).collect();
        if conds.is_empty() {
            continue;
        }
        if kind == ClauseKind::Having {
            render_group_by(q, &mut out);
        }
        let joiner = if q.has_keyword(kind, Keyword::Or) {
            " OR "
        } else {
            " AND "
        };
        let _ = write!(
            out,
            " {} {}",
            if kind == ClauseKind::Where { "WHERE" } else { "HAVING" },
            conds.join(joiner)
        );
    }
    if q.conditions(ClauseKind::Having).next().is_none() {
        render_group_by(q, &mut out);
    }

    let order: Vec<_> = q.exprs(ClauseKind::OrderBy).map(|e| agg_expr(e, case)).collect();
    if !order.is_empty() {
        let _ = write!(out, " ORDER BY {}", order.join(", "));
        if q.has_keyword(ClauseKind::OrderBy, Keyword::Desc) {
            out.push_str(" DESC");
        }
    }
    if let Some(n) = q.limit() {
        let _ = write!(out, " LIMIT {n}");
    }
    if let Some(op) = q.set_op() {
        if let Some(s) = q.subquery() {
            let _ = write!(out, " {} {}", case.kw(op.as_str()), render_sql(s));
        }
    }
    out
}

fn render_group_by(q: &SqlQuery, out: &mut String) {
    let cols: Vec<_> = q
        .args(ClauseKind::GroupBy)
        .iter()
        .filter_map(|a| match a {
            Argument::Column(c) => Some(column(c)),
            _ => None,
        })
        .collect();
    if !cols.is_empty() {
        let _ = write!(out, " GROUP BY {}", cols.join(", "));
    }
}

/// Tables joined in FROM order; each join condition is attached to the first
/// JOIN at which both of its tables are in scope.
fn render_from(q: &SqlQuery, tables: &[&str]) -> String {
    let mut joins: Vec<(&Column, &Column)> = q
        .args(ClauseKind::From)
        .iter()
        .filter_map(|a| match a {
            Argument::Join(l, r) => Some((l, r)),
            _ => None,
        })
        .collect();
    let mut out = tables[0].to_string();
    for (i, table) in tables.iter().enumerate().skip(1) {
        let scope = &tables[..=i];
        let in_scope = |c: &Column| c.table().is_some_and(|t| scope.contains(&t));
        let (now, later): (Vec<_>, Vec<_>) = joins.into_iter().partition(|(l, r)| in_scope(l) && in_scope(r));
        joins = later;
        let mut conds: Vec<String> = now
            .iter()
            .map(|(l, r)| format!("{} = {}", column(l), column(r)))
            .collect();
        if i == tables.len() - 1 {
            conds.extend(joins.drain(..).map(|(l, r)| format!("{} = {}", column(l), column(r))));
        }
        let _ = write!(out, " JOIN {table}");
        if !conds.is_empty() {
            let _ = write!(out, " ON {}", conds.join(" AND "));
        }
    }
    out
}
