//! The clause view of a SQL query.
//!
//! A query is a map from [`ClauseKind`] to a sequence of [`Argument`]s plus an
//! optional subquery slot (the SUBS clause). Arguments are compared as sets;
//! literal values inside WHERE/HAVING conditions are ignored when comparing.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Clause kinds. The declaration order is the global linearization order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClauseKind {
    From,
    Where,
    GroupBy,
    Having,
    Select,
    OrderBy,
    Limit,
    Ieu,
    Subs,
}

impl ClauseKind {
    /// Every clause kind holding plain arguments (all but SUBS), in linearization order.
    pub const ARGUMENT_CLAUSES: [ClauseKind; 8] = [
        ClauseKind::From,
        ClauseKind::Where,
        ClauseKind::GroupBy,
        ClauseKind::Having,
        ClauseKind::Select,
        ClauseKind::OrderBy,
        ClauseKind::Limit,
        ClauseKind::Ieu,
    ];

    pub const ALL: [ClauseKind; 9] = [
        ClauseKind::From,
        ClauseKind::Where,
        ClauseKind::GroupBy,
        ClauseKind::Having,
        ClauseKind::Select,
        ClauseKind::OrderBy,
        ClauseKind::Limit,
        ClauseKind::Ieu,
        ClauseKind::Subs,
    ];

    /// Lowercase tag used in linearized edits.
    pub fn tag(self) -> &'static str {
        match self {
            ClauseKind::From => "from",
            ClauseKind::Where => "where",
            ClauseKind::GroupBy => "groupby",
            ClauseKind::Having => "having",
            ClauseKind::Select => "select",
            ClauseKind::OrderBy => "orderby",
            ClauseKind::Limit => "limit",
            ClauseKind::Ieu => "ieu",
            ClauseKind::Subs => "subs",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        ClauseKind::ALL.into_iter().find(|k| k.tag() == tag)
    }

    /// Whether literal values in this clause are erased before comparison.
    pub fn erases_values(self) -> bool {
        matches!(self, ClauseKind::Where | ClauseKind::Having)
    }
}

impl fmt::Display for ClauseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClauseKind::GroupBy => "GROUP-BY",
            ClauseKind::OrderBy => "ORDER-BY",
            other => return f.write_str(&other.tag().to_uppercase()),
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Column {
    Star,
    Named { table: String, column: String },
}

impl Column {
    pub fn named(table: impl Into<String>, column: impl Into<String>) -> Self {
        Column::Named {
            table: table.into(),
            column: column.into(),
        }
    }

    pub fn table(&self) -> Option<&str> {
        match self {
            Column::Star => None,
            Column::Named { table, .. } => Some(table),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Column::Star => "*",
            Column::Named { column, .. } => column,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agg {
    Max,
    Min,
    Count,
    Sum,
    Avg,
}

impl Agg {
    pub const ALL: [Agg; 5] = [Agg::Max, Agg::Min, Agg::Count, Agg::Sum, Agg::Avg];

    pub fn keyword(self) -> &'static str {
        match self {
            Agg::Max => "max",
            Agg::Min => "min",
            Agg::Count => "count",
            Agg::Sum => "sum",
            Agg::Avg => "avg",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Agg::ALL.into_iter().find(|a| a.keyword().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ArithOp {
    #[serde(rename = "+")]
    Add,
    #[serde(rename = "-")]
    Sub,
    #[serde(rename = "*")]
    Mul,
    #[serde(rename = "/")]
    Div,
}

impl ArithOp {
    pub const ALL: [ArithOp; 4] = [ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div];

    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

/// A column or a binary arithmetic expression over two columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValUnit {
    Column(Column),
    Arith { op: ArithOp, left: Column, right: Column },
}

impl ValUnit {
    pub fn columns(&self) -> Vec<&Column> {
        match self {
            ValUnit::Column(c) => vec![c],
            ValUnit::Arith { left, right, .. } => vec![left, right],
        }
    }
}

/// An optionally aggregated value unit, e.g. `count(distinct t.a)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AggExpr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agg: Option<Agg>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub distinct: bool,
    pub unit: ValUnit,
}

impl AggExpr {
    pub fn column(c: Column) -> Self {
        AggExpr {
            agg: None,
            distinct: false,
            unit: ValUnit::Column(c),
        }
    }

    pub fn aggregated(agg: Agg, c: Column) -> Self {
        AggExpr {
            agg: Some(agg),
            distinct: false,
            unit: ValUnit::Column(c),
        }
    }

    pub fn count_star() -> Self {
        Self::aggregated(Agg::Count, Column::Star)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CmpOp {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "like")]
    Like,
    #[serde(rename = "not like")]
    NotLike,
    #[serde(rename = "in")]
    In,
    #[serde(rename = "not in")]
    NotIn,
    #[serde(rename = "between")]
    Between,
}

impl CmpOp {
    pub const ALL: [CmpOp; 11] = [
        CmpOp::Eq,
        CmpOp::Ne,
        CmpOp::Gt,
        CmpOp::Lt,
        CmpOp::Ge,
        CmpOp::Le,
        CmpOp::Like,
        CmpOp::NotLike,
        CmpOp::In,
        CmpOp::NotIn,
        CmpOp::Between,
    ];

    /// Plain comparisons that take a single scalar operand.
    pub const SCALAR: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Ne, CmpOp::Gt, CmpOp::Lt, CmpOp::Ge, CmpOp::Le];

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Gt => ">",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Le => "<=",
            CmpOp::Like => "like",
            CmpOp::NotLike => "not like",
            CmpOp::In => "in",
            CmpOp::NotIn => "not in",
            CmpOp::Between => "between",
        }
    }

    pub fn is_scalar(self) -> bool {
        CmpOp::SCALAR.contains(&self)
    }
}

/// A literal value. Numbers keep their normalized text form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Literal {
    Number(String),
    Text(String),
    /// A value erased for comparison.
    Placeholder,
}

impl Literal {
    /// Normalizes a numeric literal: `20.0` and `020` become `20`.
    pub fn number(text: &str) -> Literal {
        if let Ok(i) = text.parse::<i64>() {
            return Literal::Number(i.to_string());
        }
        match text.parse::<f64>() {
            Ok(f) if f.is_finite() && f.fract() == 0.0 && f.abs() < 1e15 => Literal::Number((f as i64).to_string()),
            Ok(f) if f.is_finite() => Literal::Number(f.to_string()),
            _ => Literal::Number(text.to_string()),
        }
    }

    pub fn text(s: impl Into<String>) -> Literal {
        Literal::Text(s.into())
    }
}

/// Pointer into the SUBS clause. Only `SubRef(0)` exists under the
/// single-subquery assumption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubRef(pub usize);

impl fmt::Display for SubRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SUBS{}", self.0 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operand {
    Value(Literal),
    Range(Literal, Literal),
    Column(Column),
    Subquery(SubRef),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Condition {
    pub lhs: AggExpr,
    pub op: CmpOp,
    pub rhs: Operand,
}

/// Clause-wide flags expressed as marker arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Keyword {
    /// `SELECT DISTINCT`
    Distinct,
    /// Conditions of a WHERE/HAVING clause are joined by OR rather than AND.
    Or,
    /// `ORDER BY ... DESC`
    Desc,
    Intersect,
    Except,
    Union,
}

impl Keyword {
    pub const SET_OPS: [Keyword; 3] = [Keyword::Intersect, Keyword::Except, Keyword::Union];

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Distinct => "distinct",
            Keyword::Or => "or",
            Keyword::Desc => "desc",
            Keyword::Intersect => "intersect",
            Keyword::Except => "except",
            Keyword::Union => "union",
        }
    }

    pub fn is_set_op(self) -> bool {
        Keyword::SET_OPS.contains(&self)
    }
}

/// One argument of a clause.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum Argument {
    /// FROM: a table.
    Table(String),
    /// FROM: a join condition `a = b`, stored with the smaller column first.
    Join(Column, Column),
    /// SELECT / ORDER-BY item.
    Expr(AggExpr),
    /// GROUP-BY column.
    Column(Column),
    /// WHERE / HAVING condition.
    Cond(Condition),
    Keyword(Keyword),
    Limit(u64),
    /// IEU pointer to the subquery.
    Subquery(SubRef),
}

impl Argument {
    pub fn join(a: Column, b: Column) -> Self {
        if a <= b {
            Argument::Join(a, b)
        } else {
            Argument::Join(b, a)
        }
    }

    /// Canonical form: join sides ordered, numeric literals normalized.
    pub fn canonicalize(&self) -> Argument {
        fn lit(l: &Literal) -> Literal {
            match l {
                Literal::Number(n) => Literal::number(n),
                other => other.clone(),
            }
        }
        match self {
            Argument::Join(a, b) => Argument::join(a.clone(), b.clone()),
            Argument::Cond(c) => {
                let rhs = match &c.rhs {
                    Operand::Value(v) => Operand::Value(lit(v)),
                    Operand::Range(a, b) => Operand::Range(lit(a), lit(b)),
                    other => other.clone(),
                };
                Argument::Cond(Condition { rhs, ..c.clone() })
            }
            other => other.clone(),
        }
    }

    /// Canonical form with condition values replaced by placeholders.
    pub fn erased(&self) -> Argument {
        match self.canonicalize() {
            Argument::Cond(mut c) => {
                c.rhs = match c.rhs {
                    Operand::Value(_) => Operand::Value(Literal::Placeholder),
                    Operand::Range(..) => Operand::Range(Literal::Placeholder, Literal::Placeholder),
                    other => other,
                };
                Argument::Cond(c)
            }
            other => other,
        }
    }

    /// Comparison key used for matching: values are erased only where the
    /// clause discards them.
    pub fn match_key(&self, clause: ClauseKind) -> Argument {
        if clause.erases_values() {
            self.erased()
        } else {
            self.canonicalize()
        }
    }

    pub fn subquery_ref(&self) -> Option<SubRef> {
        match self {
            Argument::Subquery(r) => Some(*r),
            Argument::Cond(Condition {
                rhs: Operand::Subquery(r),
                ..
            }) => Some(*r),
            _ => None,
        }
    }

    /// Every column mentioned by this argument.
    pub fn columns(&self) -> Vec<&Column> {
        match self {
            Argument::Join(a, b) => vec![a, b],
            Argument::Expr(e) => e.unit.columns(),
            Argument::Column(c) => vec![c],
            Argument::Cond(c) => {
                let mut cols = c.lhs.unit.columns();
                if let Operand::Column(col) = &c.rhs {
                    cols.push(col);
                }
                cols
            }
            _ => vec![],
        }
    }

    /// Canonical lowercase token sequence.
    pub fn tokens(&self) -> Vec<String> {
        self.to_string().split(' ').map(str::to_string).collect()
    }

    pub fn as_keyword(&self) -> Option<Keyword> {
        match self {
            Argument::Keyword(k) => Some(*k),
            _ => None,
        }
    }
}

/// Clause view of a query.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SqlQuery {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub db_id: Option<String>,
    clauses: BTreeMap<ClauseKind, Vec<Argument>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    subquery: Option<Box<SqlQuery>>,
}

impl PartialEq for SqlQuery {
    /// Structural equality, including argument order and literal values.
    /// The owning database is not compared.
    fn eq(&self, other: &Self) -> bool {
        let non_empty = |q: &SqlQuery| {
            q.clauses
                .iter()
                .filter(|(_, v)| !v.is_empty())
                .map(|(k, v)| (*k, v.clone()))
                .collect::<Vec<_>>()
        };
        non_empty(self) == non_empty(other) && self.subquery == other.subquery
    }
}

impl Eq for SqlQuery {}

impl SqlQuery {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_db(mut self, db_id: impl Into<String>) -> Self {
        self.db_id = Some(db_id.into());
        self
    }

    /// Arguments of a clause (empty when absent). SUBS has no plain arguments.
    pub fn args(&self, kind: ClauseKind) -> &[Argument] {
        self.clauses.get(&kind).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn args_mut(&mut self, kind: ClauseKind) -> &mut Vec<Argument> {
        debug_assert!(kind != ClauseKind::Subs);
        self.clauses.entry(kind).or_default()
    }

    pub fn set_args(&mut self, kind: ClauseKind, args: Vec<Argument>) {
        if args.is_empty() {
            self.clauses.remove(&kind);
        } else {
            self.clauses.insert(kind, args);
        }
    }

    pub fn push(&mut self, kind: ClauseKind, arg: Argument) {
        self.args_mut(kind).push(arg);
    }

    pub fn subquery(&self) -> Option<&SqlQuery> {
        self.subquery.as_deref()
    }

    pub fn subquery_mut(&mut self) -> Option<&mut SqlQuery> {
        self.subquery.as_deref_mut()
    }

    pub fn set_subquery(&mut self, sub: Option<SqlQuery>) {
        self.subquery = sub.map(Box::new);
    }

    pub fn take_subquery(&mut self) -> Option<SqlQuery> {
        self.subquery.take().map(|b| *b)
    }

    /// Drops empty clause entries.
    pub fn tidy(&mut self) {
        self.clauses.retain(|_, v| !v.is_empty());
        if let Some(s) = self.subquery.as_deref_mut() {
            s.tidy();
        }
    }

    /// True when no clause has arguments and there is no subquery.
    pub fn is_empty(&self) -> bool {
        self.clauses.values().all(Vec::is_empty) && self.subquery.is_none()
    }

    /// Non-empty clause kinds, SUBS included when a subquery exists.
    pub fn clause_kinds(&self) -> Vec<ClauseKind> {
        let mut kinds: Vec<_> = self
            .clauses
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(k, _)| *k)
            .collect();
        if self.subquery.is_some() {
            kinds.push(ClauseKind::Subs);
        }
        kinds
    }

    /// Every (clause, argument) pair of the top-level query.
    pub fn arguments(&self) -> impl Iterator<Item = (ClauseKind, &Argument)> {
        self.clauses.iter().flat_map(|(k, v)| v.iter().map(move |a| (*k, a)))
    }

    /// Number of top-level arguments referencing the subquery.
    pub fn subquery_references(&self) -> usize {
        self.arguments().filter(|(_, a)| a.subquery_ref().is_some()).count()
    }

    pub fn has_keyword(&self, kind: ClauseKind, kw: Keyword) -> bool {
        self.args(kind).contains(&Argument::Keyword(kw))
    }

    /// FROM tables in order.
    pub fn tables(&self) -> impl Iterator<Item = &str> {
        self.args(ClauseKind::From).iter().filter_map(|a| match a {
            Argument::Table(t) => Some(t.as_str()),
            _ => None,
        })
    }

    /// WHERE/HAVING conditions, without the connective marker.
    pub fn conditions(&self, kind: ClauseKind) -> impl Iterator<Item = &Condition> {
        self.args(kind).iter().filter_map(|a| match a {
            Argument::Cond(c) => Some(c),
            _ => None,
        })
    }

    /// SELECT or ORDER-BY expressions, without markers.
    pub fn exprs(&self, kind: ClauseKind) -> impl Iterator<Item = &AggExpr> {
        self.args(kind).iter().filter_map(|a| match a {
            Argument::Expr(e) => Some(e),
            _ => None,
        })
    }

    pub fn limit(&self) -> Option<u64> {
        self.args(ClauseKind::Limit).iter().find_map(|a| match a {
            Argument::Limit(n) => Some(*n),
            _ => None,
        })
    }

    /// The IEU set operator, if any.
    pub fn set_op(&self) -> Option<Keyword> {
        self.args(ClauseKind::Ieu)
            .iter()
            .find_map(|a| a.as_keyword().filter(|k| k.is_set_op()))
    }
}
