//! The editor catalog.
//!
//! Each editor enumerates its candidate transformations of a query (it is
//! feasible iff there is at least one), picks one at random, applies it and
//! binds the slots of its feedback templates. Editors only touch the main
//! query; subqueries are moved or dropped as a whole.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Deserialize;

use crate::error::SynthError;
use crate::schema::Schema;
use crate::sql::*;
use crate::verbalize;

const TEMPLATES_JSON: &str = include_str!("../../data/feedback_templates.json");

#[derive(Debug, Deserialize)]
struct FeedbackTemplates {
    #[allow(dead_code)]
    version: u32,
    phrases: BTreeMap<String, String>,
    templates: BTreeMap<String, Vec<String>>,
}

static TEMPLATES: LazyLock<FeedbackTemplates> =
    LazyLock::new(|| serde_json::from_str(TEMPLATES_JSON).expect("bundled feedback templates are valid JSON"));

fn phrase(name: &str) -> &'static str {
    TEMPLATES.phrases[name].as_str()
}

macro_rules! editors {
    ($($variant:ident => $id:literal, [$($clause:ident),*];)*) => {
        /// Identifier of one editor in the catalog.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum EditorId {
            $($variant,)*
        }

        impl EditorId {
            pub const ALL: &'static [EditorId] = &[$(EditorId::$variant,)*];

            /// Stable kebab-case name used in configs and output.
            pub fn id(self) -> &'static str {
                match self {
                    $(EditorId::$variant => $id,)*
                }
            }

            /// Clauses an application of this editor may change.
            pub fn clauses(self) -> &'static [ClauseKind] {
                match self {
                    $(EditorId::$variant => &[$(ClauseKind::$clause),*],)*
                }
            }
        }
    };
}

editors! {
    ReplaceSelectColumn => "replace-select-column", [Select];
    AddSelectColumn => "add-select-column", [Select];
    RemoveSelectColumn => "remove-select-column", [Select];
    ReplaceAggregate => "replace-aggregate", [Select];
    AddAggregate => "add-aggregate", [Select];
    RemoveAggregate => "remove-aggregate", [Select];
    ToggleDistinct => "toggle-distinct", [Select];
    ReplaceFromTable => "replace-from-table", [From, Where, GroupBy, Having, Select, OrderBy];
    AddFromTable => "add-from-table", [From];
    RemoveFromTable => "remove-from-table", [From];
    AddWhereCondition => "add-where-condition", [Where];
    RemoveWhereCondition => "remove-where-condition", [Where, Subs];
    ReplaceWhereOperator => "replace-where-operator", [Where];
    ReplaceWhereColumn => "replace-where-column", [Where];
    SwapAndOr => "swap-and-or", [Where];
    AddHavingCondition => "add-having-condition", [Having];
    RemoveHavingCondition => "remove-having-condition", [Having, Subs];
    ReplaceGroupByColumn => "replace-groupby-column", [GroupBy];
    AddGroupByColumn => "add-groupby-column", [GroupBy];
    RemoveGroupByColumn => "remove-groupby-column", [GroupBy];
    ReplaceOrderByColumn => "replace-orderby-column", [OrderBy];
    FlipOrderByDirection => "flip-orderby-direction", [OrderBy];
    AddOrderBy => "add-orderby", [OrderBy];
    RemoveOrderBy => "remove-orderby", [OrderBy];
    AddLimit => "add-limit", [Limit];
    RemoveLimit => "remove-limit", [Limit];
    ReplaceLimitValue => "replace-limit-value", [Limit];
    SwapIeuKeyword => "swap-ieu-keyword", [Ieu];
    RewriteSubqueryJoin => "rewrite-subquery-join", [From, Where, Subs];
}

impl fmt::Display for EditorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for EditorId {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EditorId::ALL
            .iter()
            .copied()
            .find(|e| e.id() == s)
            .ok_or_else(|| SynthError::UnknownEditor(s.to_string()))
    }
}

/// Template keys an editor can draw from (one per outcome variant).
pub fn template_keys(e: EditorId) -> Vec<String> {
    let prefix = format!("{}:", e.id());
    TEMPLATES
        .templates
        .keys()
        .filter(|k| *k == e.id() || k.starts_with(&prefix))
        .cloned()
        .collect()
}

/// Templates stored under a key, e.g. `remove-limit` or `toggle-distinct:add`.
pub fn templates(key: &str) -> &'static [String] {
    TEMPLATES.templates.get(key).map(Vec::as_slice).unwrap_or(&[])
}

/// One concrete transformation an editor could perform.
#[derive(Debug, Clone)]
enum Choice {
    At(usize),
    AtColumn(usize, Column),
    AtAgg(usize, Agg),
    AtOp(usize, CmpOp),
    Col(Column),
    ColOp(Column, CmpOp),
    ExprOp(AggExpr, CmpOp),
    Table(String),
    Swap(String, String),
    Kw(Keyword),
    Unit,
    ToJoin(usize),
    ToSubquery(String),
}

/// A transformed query together with the bindings of its feedback slots.
#[derive(Debug, Clone)]
pub struct Transformation {
    pub query: SqlQuery,
    /// Template key the feedback is drawn from.
    pub template_key: String,
    pub slots: Vec<(&'static str, String)>,
}

impl Transformation {
    /// Fills `template` with the bound slot values.
    pub fn fill(&self, template: &str) -> String {
        let mut text = template.to_string();
        for (slot, value) in &self.slots {
            text = text.replace(&format!("{{{slot}}}"), value);
        }
        text
    }
}

fn v() -> &'static verbalize::Verbalization {
    verbalize::table()
}

fn name(c: &Column) -> String {
    v().column_name(c)
}

fn expr_phrase(e: &AggExpr) -> String {
    v().expr(e)
}

fn cond_phrase(c: &Condition) -> String {
    v().condition(c, phrase("subquery"))
}

/// Named columns of the FROM tables, in FROM then schema order.
fn scope_columns(q: &SqlQuery, schema: &Schema) -> Vec<Column> {
    q.tables()
        .filter_map(|t| schema.table(t))
        .flat_map(|t| t.columns.iter().map(|c| Column::named(&t.name, c)))
        .collect()
}

fn has_key(q: &SqlQuery, kind: ClauseKind, arg: &Argument) -> bool {
    let key = arg.match_key(kind);
    q.args(kind).iter().any(|a| a.match_key(kind) == key)
}

fn plain_column(e: &AggExpr) -> Option<&Column> {
    match (&e.agg, e.distinct, &e.unit) {
        (None, false, ValUnit::Column(c @ Column::Named { .. })) => Some(c),
        _ => None,
    }
}

fn aggregated_column(e: &AggExpr) -> Option<(Agg, &Column)> {
    match (&e.agg, &e.unit) {
        (Some(a), ValUnit::Column(c @ Column::Named { .. })) => Some((*a, c)),
        _ => None,
    }
}

fn expr_at(q: &SqlQuery, kind: ClauseKind, i: usize) -> &AggExpr {
    match &q.args(kind)[i] {
        Argument::Expr(e) => e,
        other => panic!("expected an expression, found `{other}`"),
    }
}

fn cond_at(q: &SqlQuery, kind: ClauseKind, i: usize) -> &Condition {
    match &q.args(kind)[i] {
        Argument::Cond(c) => c,
        other => panic!("expected a condition, found `{other}`"),
    }
}

fn is_table(a: &str, b: &str) -> bool {
    a.eq_ignore_ascii_case(b)
}

fn in_from(q: &SqlQuery, t: &str) -> bool {
    q.tables().any(|x| is_table(x, t))
}

fn column_of(c: &Column, t: &str) -> bool {
    c.table().is_some_and(|x| is_table(x, t))
}

/// Tables the subquery reaches in the outer scope.
fn correlated_tables(q: &SqlQuery) -> Vec<String> {
    let Some(sub) = q.subquery() else { return vec![] };
    let own: Vec<&str> = sub.tables().collect();
    let mut out: Vec<String> = sub
        .arguments()
        .flat_map(|(_, a)| a.columns())
        .filter_map(|c| c.table())
        .filter(|t| !own.iter().any(|o| is_table(o, t)))
        .map(str::to_string)
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Columns of the main query, optionally skipping FROM join conditions.
fn main_columns(q: &SqlQuery, with_joins: bool) -> Vec<&Column> {
    q.arguments()
        .filter(|(k, _)| with_joins || *k != ClauseKind::From)
        .flat_map(|(_, a)| a.columns())
        .collect()
}

fn map_unit(u: &ValUnit, f: &dyn Fn(&Column) -> Column) -> ValUnit {
    match u {
        ValUnit::Column(c) => ValUnit::Column(f(c)),
        ValUnit::Arith { op, left, right } => ValUnit::Arith {
            op: *op,
            left: f(left),
            right: f(right),
        },
    }
}

fn map_columns(a: &Argument, f: &dyn Fn(&Column) -> Column) -> Argument {
    match a {
        Argument::Join(x, y) => Argument::join(f(x), f(y)),
        Argument::Expr(e) => Argument::Expr(AggExpr {
            unit: map_unit(&e.unit, f),
            ..e.clone()
        }),
        Argument::Column(c) => Argument::Column(f(c)),
        Argument::Cond(c) => Argument::Cond(Condition {
            lhs: AggExpr {
                unit: map_unit(&c.lhs.unit, f),
                ..c.lhs.clone()
            },
            op: c.op,
            rhs: match &c.rhs {
                Operand::Column(x) => Operand::Column(f(x)),
                other => other.clone(),
            },
        }),
        other => other.clone(),
    }
}

fn replace_arg(q: &mut SqlQuery, kind: ClauseKind, i: usize, arg: Argument) {
    q.args_mut(kind)[i] = arg;
}

/// Removes an argument, then any marker or subquery it leaves dangling.
fn remove_arg(q: &mut SqlQuery, kind: ClauseKind, i: usize) {
    q.args_mut(kind).remove(i);
    fix_markers(q, kind);
    if q.subquery_references() == 0 {
        q.set_subquery(None);
    }
    q.tidy();
}

fn fix_markers(q: &mut SqlQuery, kind: ClauseKind) {
    let args = q.args(kind);
    let items = args.iter().filter(|a| a.as_keyword().is_none()).count();
    let needed = match kind {
        ClauseKind::Where | ClauseKind::Having => 2,
        ClauseKind::Select | ClauseKind::OrderBy => 1,
        _ => return,
    };
    if items < needed {
        let kept: Vec<Argument> = args.iter().filter(|a| a.as_keyword().is_none()).cloned().collect();
        q.set_args(kind, kept);
    }
}

fn toggle(q: &mut SqlQuery, kind: ClauseKind, kw: Keyword) -> bool {
    let marker = Argument::Keyword(kw);
    let args = q.args_mut(kind);
    if let Some(i) = args.iter().position(|a| *a == marker) {
        args.remove(i);
        false
    } else {
        args.push(marker);
        true
    }
}

fn random_value(rng: &mut dyn rand::RngCore, op: CmpOp) -> Literal {
    const WORDS: [&str; 8] = ["Smith", "USA", "Paris", "red", "active", "John", "France", "yes"];
    let ordered = matches!(op, CmpOp::Gt | CmpOp::Lt | CmpOp::Ge | CmpOp::Le);
    if ordered || rng.gen_bool(0.5) {
        Literal::number(&rng.gen_range(1..=100u32).to_string())
    } else {
        Literal::text(*WORDS.choose(rng).expect("word list is non-empty"))
    }
}

/// Conditions of an IN-subquery that can be folded into a join.
fn join_rewrite_at(q: &SqlQuery, i: usize) -> bool {
    let c = cond_at(q, ClauseKind::Where, i);
    if c.op != CmpOp::In || !matches!(c.rhs, Operand::Subquery(_)) || plain_column(&c.lhs).is_none() {
        return false;
    }
    if q.has_keyword(ClauseKind::Where, Keyword::Or) {
        return false;
    }
    let Some(sub) = q.subquery() else { return false };
    let tables: Vec<&str> = sub.tables().collect();
    let [b] = tables.as_slice() else { return false };
    if in_from(q, b) || sub.args(ClauseKind::From).len() != 1 {
        return false;
    }
    let select = sub.args(ClauseKind::Select);
    if select.len() != 1 || sub.exprs(ClauseKind::Select).next().and_then(plain_column).is_none() {
        return false;
    }
    let clean = [
        ClauseKind::GroupBy,
        ClauseKind::Having,
        ClauseKind::OrderBy,
        ClauseKind::Limit,
        ClauseKind::Ieu,
    ]
    .iter()
    .all(|k| sub.args(*k).is_empty());
    if !clean || sub.subquery().is_some() || sub.has_keyword(ClauseKind::Where, Keyword::Or) {
        return false;
    }
    sub.args(ClauseKind::Where)
        .iter()
        .all(|a| a.subquery_ref().is_none() && a.columns().iter().all(|c| column_of(c, b)))
}

/// A two-table join whose `removed` side can become an IN-subquery.
fn subquery_rewrite(q: &SqlQuery, removed: &str) -> Option<(Column, Column)> {
    if q.subquery().is_some() || q.has_keyword(ClauseKind::Where, Keyword::Or) {
        return None;
    }
    let from = q.args(ClauseKind::From);
    let tables: Vec<&str> = q.tables().collect();
    if tables.len() != 2 || from.len() != 3 {
        return None;
    }
    let (keep, mine) = match from.iter().find_map(|a| match a {
        Argument::Join(x, y) => Some((x, y)),
        _ => None,
    })? {
        (x, y) if column_of(y, removed) && !column_of(x, removed) => (x.clone(), y.clone()),
        (x, y) if column_of(x, removed) && !column_of(y, removed) => (y.clone(), x.clone()),
        _ => return None,
    };
    for (kind, arg) in q.arguments() {
        if kind == ClauseKind::From {
            continue;
        }
        let touches = arg.columns().iter().any(|c| column_of(c, removed));
        if !touches {
            continue;
        }
        let movable = kind == ClauseKind::Where
            && match arg {
                Argument::Cond(c) => {
                    c.lhs.agg.is_none()
                        && matches!(c.rhs, Operand::Value(_) | Operand::Range(..))
                        && arg.columns().iter().all(|c| column_of(c, removed))
                }
                _ => false,
            };
        if !movable {
            return None;
        }
    }
    Some((keep, mine))
}

fn candidates(e: EditorId, q: &SqlQuery, schema: &Schema) -> Vec<Choice> {
    use ClauseKind as K;
    use EditorId as E;
    let cols = || scope_columns(q, schema);
    let indexed = |kind: ClauseKind| q.args(kind).iter().enumerate();
    let mut out = Vec::new();
    match e {
        E::ReplaceSelectColumn => {
            for (i, a) in indexed(K::Select) {
                let Argument::Expr(ex) = a else { continue };
                let Some(c1) = plain_column(ex) else { continue };
                for c2 in cols() {
                    if c2 != *c1 && !has_key(q, K::Select, &Argument::Expr(AggExpr::column(c2.clone()))) {
                        out.push(Choice::AtColumn(i, c2));
                    }
                }
            }
        }
        E::AddSelectColumn => {
            for c in cols() {
                if !has_key(q, K::Select, &Argument::Expr(AggExpr::column(c.clone()))) {
                    out.push(Choice::Col(c));
                }
            }
        }
        E::RemoveSelectColumn => {
            if q.exprs(K::Select).count() >= 2 {
                for (i, a) in indexed(K::Select) {
                    if matches!(a, Argument::Expr(_)) {
                        out.push(Choice::At(i));
                    }
                }
            }
        }
        E::ReplaceAggregate => {
            for (i, a) in indexed(K::Select) {
                let Argument::Expr(ex) = a else { continue };
                let Some((agg, _)) = aggregated_column(ex) else {
                    continue;
                };
                for new in Agg::ALL.into_iter().filter(|x| *x != agg) {
                    let e2 = AggExpr {
                        agg: Some(new),
                        ..ex.clone()
                    };
                    if !has_key(q, K::Select, &Argument::Expr(e2)) {
                        out.push(Choice::AtAgg(i, new));
                    }
                }
            }
        }
        E::AddAggregate => {
            for (i, a) in indexed(K::Select) {
                let Argument::Expr(ex) = a else { continue };
                let Some(c) = plain_column(ex) else { continue };
                for agg in Agg::ALL {
                    if !has_key(q, K::Select, &Argument::Expr(AggExpr::aggregated(agg, c.clone()))) {
                        out.push(Choice::AtAgg(i, agg));
                    }
                }
            }
        }
        E::RemoveAggregate => {
            for (i, a) in indexed(K::Select) {
                let Argument::Expr(ex) = a else { continue };
                let Some((_, c)) = aggregated_column(ex) else { continue };
                if !has_key(q, K::Select, &Argument::Expr(AggExpr::column(c.clone()))) {
                    out.push(Choice::At(i));
                }
            }
        }
        E::ToggleDistinct => {
            if q.exprs(K::Select).next().is_some() {
                out.push(Choice::Unit);
            }
        }
        E::ReplaceFromTable => {
            let correlated = correlated_tables(q);
            for t in q.tables() {
                if correlated.iter().any(|c| is_table(c, t)) {
                    continue;
                }
                let used: Vec<&Column> = main_columns(q, true).into_iter().filter(|c| column_of(c, t)).collect();
                for t2 in &schema.tables {
                    if in_from(q, &t2.name) {
                        continue;
                    }
                    if used.iter().all(|c| t2.column(c.name()).is_some()) {
                        out.push(Choice::Swap(t.to_string(), t2.name.clone()));
                    }
                }
            }
        }
        E::AddFromTable => {
            for t in &schema.tables {
                if !in_from(q, &t.name) {
                    out.push(Choice::Table(t.name.clone()));
                }
            }
        }
        E::RemoveFromTable => {
            if q.tables().count() >= 2 {
                let correlated = correlated_tables(q);
                let used = main_columns(q, false);
                for t in q.tables() {
                    let referenced = used.iter().any(|c| column_of(c, t)) || correlated.iter().any(|c| is_table(c, t));
                    if !referenced {
                        out.push(Choice::Table(t.to_string()));
                    }
                }
            }
        }
        E::AddWhereCondition => {
            for c in cols() {
                for op in CmpOp::SCALAR {
                    let cond = Argument::Cond(Condition {
                        lhs: AggExpr::column(c.clone()),
                        op,
                        rhs: Operand::Value(Literal::Placeholder),
                    });
                    if !has_key(q, K::Where, &cond) {
                        out.push(Choice::ColOp(c.clone(), op));
                    }
                }
            }
        }
        E::RemoveWhereCondition | E::RemoveHavingCondition => {
            let kind = if e == E::RemoveWhereCondition {
                K::Where
            } else {
                K::Having
            };
            for (i, a) in indexed(kind) {
                if matches!(a, Argument::Cond(_)) {
                    out.push(Choice::At(i));
                }
            }
        }
        E::ReplaceWhereOperator => {
            for (i, a) in indexed(K::Where) {
                let Argument::Cond(c) = a else { continue };
                let alternatives: Vec<CmpOp> = match c.op {
                    op if op.is_scalar() => CmpOp::SCALAR.into_iter().filter(|x| *x != op).collect(),
                    CmpOp::Like => vec![CmpOp::NotLike],
                    CmpOp::NotLike => vec![CmpOp::Like],
                    CmpOp::In => vec![CmpOp::NotIn],
                    CmpOp::NotIn => vec![CmpOp::In],
                    _ => vec![],
                };
                for op in alternatives {
                    if !has_key(q, K::Where, &Argument::Cond(Condition { op, ..c.clone() })) {
                        out.push(Choice::AtOp(i, op));
                    }
                }
            }
        }
        E::ReplaceWhereColumn => {
            for (i, a) in indexed(K::Where) {
                let Argument::Cond(c) = a else { continue };
                let Some(c1) = plain_column(&c.lhs) else { continue };
                for c2 in cols() {
                    if c2 == *c1 || c.rhs == Operand::Column(c2.clone()) {
                        continue;
                    }
                    let new = Condition {
                        lhs: AggExpr::column(c2.clone()),
                        ..c.clone()
                    };
                    if !has_key(q, K::Where, &Argument::Cond(new)) {
                        out.push(Choice::AtColumn(i, c2));
                    }
                }
            }
        }
        E::SwapAndOr => {
            if q.conditions(K::Where).count() >= 2 {
                out.push(Choice::Unit);
            }
        }
        E::AddHavingCondition => {
            if !q.args(K::GroupBy).is_empty() {
                let mut exprs = vec![AggExpr::count_star()];
                for c in cols() {
                    for agg in [Agg::Avg, Agg::Max, Agg::Min, Agg::Sum] {
                        exprs.push(AggExpr::aggregated(agg, c.clone()));
                    }
                }
                for ex in exprs {
                    for op in [CmpOp::Gt, CmpOp::Lt, CmpOp::Ge, CmpOp::Le, CmpOp::Eq] {
                        let cond = Argument::Cond(Condition {
                            lhs: ex.clone(),
                            op,
                            rhs: Operand::Value(Literal::Placeholder),
                        });
                        if !has_key(q, K::Having, &cond) {
                            out.push(Choice::ExprOp(ex.clone(), op));
                        }
                    }
                }
            }
        }
        E::ReplaceGroupByColumn => {
            for (i, a) in indexed(K::GroupBy) {
                let Argument::Column(c1) = a else { continue };
                for c2 in cols() {
                    if c2 != *c1 && !has_key(q, K::GroupBy, &Argument::Column(c2.clone())) {
                        out.push(Choice::AtColumn(i, c2));
                    }
                }
            }
        }
        E::AddGroupByColumn => {
            for c in cols() {
                if !has_key(q, K::GroupBy, &Argument::Column(c.clone())) {
                    out.push(Choice::Col(c));
                }
            }
        }
        E::RemoveGroupByColumn => {
            for (i, _) in indexed(K::GroupBy) {
                out.push(Choice::At(i));
            }
        }
        E::ReplaceOrderByColumn => {
            for (i, a) in indexed(K::OrderBy) {
                let Argument::Expr(ex) = a else { continue };
                let Some(c1) = plain_column(ex) else { continue };
                for c2 in cols() {
                    if c2 != *c1 && !has_key(q, K::OrderBy, &Argument::Expr(AggExpr::column(c2.clone()))) {
                        out.push(Choice::AtColumn(i, c2));
                    }
                }
            }
        }
        E::FlipOrderByDirection | E::RemoveOrderBy => {
            if q.exprs(K::OrderBy).next().is_some() {
                out.push(Choice::Unit);
            }
        }
        E::AddOrderBy => {
            if q.exprs(K::OrderBy).next().is_none() {
                out.extend(cols().into_iter().map(Choice::Col));
            }
        }
        E::AddLimit => {
            if q.limit().is_none() {
                out.push(Choice::Unit);
            }
        }
        E::RemoveLimit | E::ReplaceLimitValue => {
            if q.limit().is_some() {
                out.push(Choice::Unit);
            }
        }
        E::SwapIeuKeyword => {
            if let Some(k) = q.set_op() {
                out.extend(Keyword::SET_OPS.into_iter().filter(|x| *x != k).map(Choice::Kw));
            }
        }
        E::RewriteSubqueryJoin => {
            for (i, a) in indexed(K::Where) {
                if matches!(a, Argument::Cond(_)) && join_rewrite_at(q, i) {
                    out.push(Choice::ToJoin(i));
                }
            }
            for t in q.tables() {
                if subquery_rewrite(q, t).is_some() {
                    out.push(Choice::ToSubquery(t.to_string()));
                }
            }
        }
    }
    out
}

fn transform(
    e: EditorId,
    q: &SqlQuery,
    schema: &Schema,
    choice: Choice,
    rng: &mut dyn rand::RngCore,
) -> Transformation {
    use ClauseKind as K;
    use EditorId as E;
    let mut p = q.clone();
    let mut key = e.id().to_string();
    let mut slots: Vec<(&'static str, String)> = Vec::new();
    match (e, choice) {
        (E::ReplaceSelectColumn, Choice::AtColumn(i, c2)) => {
            let c1 = plain_column(expr_at(q, K::Select, i))
                .expect("candidate is a plain column")
                .clone();
            replace_arg(&mut p, K::Select, i, Argument::Expr(AggExpr::column(c2.clone())));
            slots = vec![("NEW-COL", name(&c2)), ("OLD-COL", name(&c1))];
        }
        (E::AddSelectColumn, Choice::Col(c)) => {
            p.push(K::Select, Argument::Expr(AggExpr::column(c.clone())));
            slots = vec![("COL", name(&c))];
        }
        (E::RemoveSelectColumn, Choice::At(i)) => {
            let old = expr_at(q, K::Select, i).clone();
            remove_arg(&mut p, K::Select, i);
            slots = vec![("COL", expr_phrase(&old))];
        }
        (E::ReplaceAggregate, Choice::AtAgg(i, agg)) => {
            let old = expr_at(q, K::Select, i).clone();
            let new = AggExpr {
                agg: Some(agg),
                ..old.clone()
            };
            replace_arg(&mut p, K::Select, i, Argument::Expr(new.clone()));
            slots = vec![("OLD-EXPR", expr_phrase(&old)), ("NEW-EXPR", expr_phrase(&new))];
        }
        (E::AddAggregate, Choice::AtAgg(i, agg)) => {
            let old = expr_at(q, K::Select, i).clone();
            let c = plain_column(&old).expect("candidate is a plain column").clone();
            let new = AggExpr::aggregated(agg, c);
            replace_arg(&mut p, K::Select, i, Argument::Expr(new.clone()));
            slots = vec![("COL", expr_phrase(&old)), ("NEW-EXPR", expr_phrase(&new))];
        }
        (E::RemoveAggregate, Choice::At(i)) => {
            let old = expr_at(q, K::Select, i).clone();
            let (_, c) = aggregated_column(&old).expect("candidate is aggregated");
            let new = AggExpr::column(c.clone());
            replace_arg(&mut p, K::Select, i, Argument::Expr(new.clone()));
            slots = vec![("OLD-EXPR", expr_phrase(&old)), ("COL", expr_phrase(&new))];
        }
        (E::ToggleDistinct, Choice::Unit) => {
            let added = toggle(&mut p, K::Select, Keyword::Distinct);
            key = format!("{key}:{}", if added { "add" } else { "remove" });
        }
        (E::ReplaceFromTable, Choice::Swap(old, new)) => {
            let target = schema.table(&new).expect("candidate table exists");
            let f = |c: &Column| match c {
                Column::Named { table, column } if is_table(table, &old) => {
                    Column::named(&target.name, target.column(column).unwrap_or(column))
                }
                other => other.clone(),
            };
            for kind in ClauseKind::ARGUMENT_CLAUSES {
                let args: Vec<Argument> = p
                    .args(kind)
                    .iter()
                    .map(|a| match a {
                        Argument::Table(t) if is_table(t, &old) => Argument::Table(target.name.clone()),
                        other => map_columns(other, &f),
                    })
                    .collect();
                p.set_args(kind, args);
            }
            slots = vec![("OLD-TABLE", old), ("NEW-TABLE", target.name.clone())];
        }
        (E::AddFromTable, Choice::Table(t)) => {
            let links: Vec<(Column, Column)> = schema
                .foreign_keys_of(&t)
                .filter_map(|(a, b)| {
                    let (mine, other) = if is_table(a.0, &t) { (a, b) } else { (b, a) };
                    (!is_table(other.0, &t) && in_from(q, other.0))
                        .then(|| (Column::named(mine.0, mine.1), Column::named(other.0, other.1)))
                })
                .collect();
            p.push(K::From, Argument::Table(t.clone()));
            if let Some((a, b)) = links.choose(rng) {
                p.push(K::From, Argument::join(a.clone(), b.clone()));
            }
            slots = vec![("TABLE", t)];
        }
        (E::RemoveFromTable, Choice::Table(t)) => {
            let kept: Vec<Argument> = p
                .args(K::From)
                .iter()
                .filter(|a| match a {
                    Argument::Table(x) => !is_table(x, &t),
                    other => !other.columns().iter().any(|c| column_of(c, &t)),
                })
                .cloned()
                .collect();
            p.set_args(K::From, kept);
            slots = vec![("TABLE", t)];
        }
        (E::AddWhereCondition, Choice::ColOp(c, op)) => {
            let value = random_value(rng, op);
            slots = vec![
                ("COL", name(&c)),
                ("OPERATOR", v().comparison(op).to_string()),
                ("VALUE", v().literal(&value)),
            ];
            p.push(
                K::Where,
                Argument::Cond(Condition {
                    lhs: AggExpr::column(c),
                    op,
                    rhs: Operand::Value(value),
                }),
            );
        }
        (E::RemoveWhereCondition, Choice::At(i)) | (E::RemoveHavingCondition, Choice::At(i)) => {
            let kind = if e == E::RemoveWhereCondition {
                K::Where
            } else {
                K::Having
            };
            slots = vec![("COND", cond_phrase(cond_at(q, kind, i)))];
            remove_arg(&mut p, kind, i);
        }
        (E::ReplaceWhereOperator, Choice::AtOp(i, op)) => {
            let old = cond_at(q, K::Where, i).clone();
            slots = vec![
                ("COL", expr_phrase(&old.lhs)),
                ("OLD-OP", v().comparison(old.op).to_string()),
                ("NEW-OP", v().comparison(op).to_string()),
                ("VALUE", v().operand(&old.rhs, phrase("subquery"))),
            ];
            replace_arg(&mut p, K::Where, i, Argument::Cond(Condition { op, ..old }));
        }
        (E::ReplaceWhereColumn, Choice::AtColumn(i, c2)) => {
            let old = cond_at(q, K::Where, i).clone();
            slots = vec![("OLD-COL", expr_phrase(&old.lhs)), ("NEW-COL", name(&c2))];
            let new = Condition {
                lhs: AggExpr::column(c2),
                ..old
            };
            replace_arg(&mut p, K::Where, i, Argument::Cond(new));
        }
        (E::SwapAndOr, Choice::Unit) => {
            let to_or = toggle(&mut p, K::Where, Keyword::Or);
            let (old, new) = if to_or { ("and", "or") } else { ("or", "and") };
            key = format!("{key}:{}", if to_or { "to-or" } else { "to-and" });
            slots = vec![
                ("OLD-CONN", phrase(old).to_string()),
                ("NEW-CONN", phrase(new).to_string()),
            ];
        }
        (E::AddHavingCondition, Choice::ExprOp(ex, op)) => {
            let hi = if ex == AggExpr::count_star() { 10 } else { 100 };
            let value = Literal::number(&rng.gen_range(1..=hi).to_string());
            let cond = Condition {
                lhs: ex,
                op,
                rhs: Operand::Value(value),
            };
            slots = vec![("COND", cond_phrase(&cond))];
            p.push(K::Having, Argument::Cond(cond));
        }
        (E::ReplaceGroupByColumn, Choice::AtColumn(i, c2)) => {
            let old = q.args(K::GroupBy)[i].columns()[0].clone();
            replace_arg(&mut p, K::GroupBy, i, Argument::Column(c2.clone()));
            slots = vec![("OLD-COL", name(&old)), ("NEW-COL", name(&c2))];
        }
        (E::AddGroupByColumn, Choice::Col(c)) => {
            slots = vec![("COL", name(&c))];
            p.push(K::GroupBy, Argument::Column(c));
        }
        (E::RemoveGroupByColumn, Choice::At(i)) => {
            slots = vec![("COL", name(q.args(K::GroupBy)[i].columns()[0]))];
            remove_arg(&mut p, K::GroupBy, i);
        }
        (E::ReplaceOrderByColumn, Choice::AtColumn(i, c2)) => {
            let old = expr_at(q, K::OrderBy, i).clone();
            replace_arg(&mut p, K::OrderBy, i, Argument::Expr(AggExpr::column(c2.clone())));
            slots = vec![("OLD-COL", expr_phrase(&old)), ("NEW-COL", name(&c2))];
        }
        (E::FlipOrderByDirection, Choice::Unit) => {
            let added = toggle(&mut p, K::OrderBy, Keyword::Desc);
            slots = vec![("OLD-DIR", direction(!added))];
        }
        (E::AddOrderBy, Choice::Col(c)) => {
            p.push(K::OrderBy, Argument::Expr(AggExpr::column(c.clone())));
            if rng.gen_bool(0.5) {
                p.push(K::OrderBy, Argument::Keyword(Keyword::Desc));
            }
            slots = vec![("ITEMS", name(&c))];
        }
        (E::RemoveOrderBy, Choice::Unit) => {
            let items: Vec<String> = q.exprs(K::OrderBy).map(expr_phrase).collect();
            slots = vec![
                ("ITEMS", items.join(&format!(" {} ", phrase("and")))),
                ("DIR", direction(q.has_keyword(K::OrderBy, Keyword::Desc))),
            ];
            p.set_args(K::OrderBy, vec![]);
        }
        (E::AddLimit, Choice::Unit) => {
            let n: u64 = rng.gen_range(1..=10);
            p.set_args(K::Limit, vec![Argument::Limit(n)]);
            slots = vec![("LIMIT-VALUE", n.to_string())];
        }
        (E::RemoveLimit, Choice::Unit) => {
            slots = vec![("LIMIT-VALUE", q.limit().expect("candidate has a limit").to_string())];
            p.set_args(K::Limit, vec![]);
        }
        (E::ReplaceLimitValue, Choice::Unit) => {
            let old = q.limit().expect("candidate has a limit");
            let options: Vec<u64> = (1..=10).filter(|n| *n != old).collect();
            let new = *options.choose(rng).expect("nine alternatives");
            p.set_args(K::Limit, vec![Argument::Limit(new)]);
            slots = vec![("OLD-LIMIT", old.to_string()), ("NEW-LIMIT", new.to_string())];
        }
        (E::SwapIeuKeyword, Choice::Kw(new)) => {
            let old = q.set_op().expect("candidate has a set operator");
            let args: Vec<Argument> = p
                .args(K::Ieu)
                .iter()
                .map(|a| {
                    if a.as_keyword() == Some(old) {
                        Argument::Keyword(new)
                    } else {
                        a.clone()
                    }
                })
                .collect();
            p.set_args(K::Ieu, args);
            slots = vec![
                ("OLD-IEU", v().keyword(old).to_string()),
                ("NEW-IEU", v().keyword(new).to_string()),
            ];
        }
        (E::RewriteSubqueryJoin, Choice::ToJoin(i)) => {
            let cond = cond_at(q, K::Where, i).clone();
            let x = plain_column(&cond.lhs).expect("candidate has a plain column").clone();
            let mut sub = p.take_subquery().expect("candidate has a subquery");
            let y = plain_column(sub.exprs(K::Select).next().expect("one select item"))
                .expect("plain column")
                .clone();
            let b = sub.tables().next().expect("one table").to_string();
            p.args_mut(K::Where).remove(i);
            p.push(K::From, Argument::Table(b.clone()));
            p.push(K::From, Argument::join(x.clone(), y.clone()));
            for a in sub.args_mut(K::Where).drain(..) {
                p.push(K::Where, a);
            }
            p.tidy();
            key = format!("{key}:to-join");
            slots = vec![("TABLE", b), ("COL", name(&x)), ("SUBCOL", name(&y))];
        }
        (E::RewriteSubqueryJoin, Choice::ToSubquery(b)) => {
            let (x, y) = subquery_rewrite(q, &b).expect("candidate is rewritable");
            let mut sub = SqlQuery::new();
            sub.push(K::Select, Argument::Expr(AggExpr::column(y.clone())));
            sub.push(K::From, Argument::Table(b.clone()));
            let (moved, kept): (Vec<Argument>, Vec<Argument>) = p
                .args(K::Where)
                .iter()
                .cloned()
                .partition(|a| a.columns().iter().any(|c| column_of(c, &b)));
            sub.set_args(K::Where, moved);
            let mut where_args = kept;
            where_args.push(Argument::Cond(Condition {
                lhs: AggExpr::column(x.clone()),
                op: CmpOp::In,
                rhs: Operand::Subquery(SubRef(0)),
            }));
            p.set_args(K::Where, where_args);
            let from: Vec<Argument> = p
                .args(K::From)
                .iter()
                .filter(|a| matches!(a, Argument::Table(t) if !is_table(t, &b)))
                .cloned()
                .collect();
            p.set_args(K::From, from);
            p.set_subquery(Some(sub));
            key = format!("{key}:to-subquery");
            slots = vec![("TABLE", b), ("COL", name(&x)), ("SUBCOL", name(&y))];
        }
        (e, c) => unreachable!("editor {e} cannot take choice {c:?}"),
    }
    p.tidy();
    Transformation {
        query: p,
        template_key: key,
        slots,
    }
}

fn direction(desc: bool) -> String {
    if desc {
        v().keyword(Keyword::Desc).to_string()
    } else {
        v().ascending.clone()
    }
}

/// Editors whose constraints hold for `q`, in catalog order.
pub fn feasible_editors(q: &SqlQuery, schema: &Schema) -> Vec<EditorId> {
    EditorId::ALL
        .iter()
        .copied()
        .filter(|e| !candidates(*e, q, schema).is_empty())
        .collect()
}

/// Applies `e` to `q`, consuming randomness for every choice it makes.
///
/// The result always validates against `schema`; a violation is reported as
/// [`SynthError::EditorBug`].
pub fn transform_with(
    e: EditorId,
    q: &SqlQuery,
    schema: &Schema,
    rng: &mut dyn rand::RngCore,
) -> Result<Transformation, SynthError> {
    let options = candidates(e, q, schema);
    let choice = options
        .choose(rng)
        .cloned()
        .ok_or_else(|| SynthError::InfeasibleEditor(e.id().to_string()))?;
    let mut t = transform(e, q, schema, choice, rng);
    t.query.db_id = q.db_id.clone();
    let violations = validate(&t.query, schema);
    if !violations.is_empty() {
        return Err(SynthError::EditorBug {
            editor: e.id().to_string(),
            violations,
        });
    }
    Ok(t)
}

/// Applies `e` to `q` and returns the mutated query with a feedback fragment
/// describing how to get back to `q`.
pub fn apply_editor(
    e: EditorId,
    q: &SqlQuery,
    schema: &Schema,
    rng: &mut dyn rand::RngCore,
) -> Result<(SqlQuery, String), SynthError> {
    let t = transform_with(e, q, schema, rng)?;
    let template = templates(&t.template_key)
        .choose(rng)
        .unwrap_or_else(|| panic!("no feedback template for `{}`", t.template_key));
    let fragment = t.fill(template);
    Ok((t.query, fragment))
}
