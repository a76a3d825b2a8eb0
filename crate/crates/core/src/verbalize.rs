//! The operator verbalization table shared by the linearizer, its parser and
//! the explainer. Loaded once from `data/verbalization.json`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::LazyLock;

use serde::Deserialize;

use crate::schema::Schema;
use crate::sql::{Agg, AggExpr, ArithOp, CmpOp, Column, Condition, Keyword, Literal, Operand, ValUnit};

const TABLE_JSON: &str = include_str!("../data/verbalization.json");

#[derive(Debug, Deserialize)]
pub struct Verbalization {
    pub version: u32,
    aggregates: BTreeMap<String, String>,
    pub count_star: String,
    pub star: String,
    pub distinct_modifier: String,
    arithmetic: BTreeMap<String, String>,
    comparisons: BTreeMap<String, String>,
    keywords: BTreeMap<String, String>,
    pub ascending: String,
    pub join: String,
    pub range_joiner: String,
    pub placeholder: String,
    pub subquery: String,
    #[serde(skip)]
    reserved: BTreeSet<String>,
}

static TABLE: LazyLock<Verbalization> = LazyLock::new(|| {
    let mut v: Verbalization = serde_json::from_str(TABLE_JSON).expect("bundled verbalization table is valid JSON");
    let phrases = v
        .aggregates
        .values()
        .chain(v.arithmetic.values())
        .chain(v.comparisons.values())
        .chain(v.keywords.values())
        .chain([
            &v.count_star,
            &v.star,
            &v.distinct_modifier,
            &v.ascending,
            &v.join,
            &v.range_joiner,
            &v.placeholder,
            &v.subquery,
        ]);
    v.reserved = phrases
        .flat_map(|p| p.split_whitespace())
        .map(str::to_lowercase)
        .collect();
    v
});

/// The bundled table.
pub fn table() -> &'static Verbalization {
    &TABLE
}

impl Verbalization {
    pub fn agg(&self, agg: Agg) -> &str {
        &self.aggregates[agg.keyword()]
    }

    pub fn arith(&self, op: ArithOp) -> &str {
        &self.arithmetic[op.symbol()]
    }

    pub fn comparison(&self, op: CmpOp) -> &str {
        &self.comparisons[op.symbol()]
    }

    pub fn keyword(&self, kw: Keyword) -> &str {
        &self.keywords[kw.as_str()]
    }

    /// Whether a word appears in any phrase of the table.
    pub fn is_reserved(&self, word: &str) -> bool {
        self.reserved.contains(&word.to_lowercase())
    }

    /// Plain NL mention of a column: its bare name.
    pub fn column_name(&self, c: &Column) -> String {
        match c {
            Column::Star => self.star.clone(),
            Column::Named { column, .. } => column.clone(),
        }
    }

    /// NL form of an expression with bare column names, e.g. `average grade`.
    pub fn expr(&self, e: &AggExpr) -> String {
        if *e == AggExpr::count_star() {
            return self.count_star.clone();
        }
        let unit = match &e.unit {
            ValUnit::Column(c) => self.column_name(c),
            ValUnit::Arith { op, left, right } => {
                format!(
                    "{} {} {}",
                    self.column_name(left),
                    self.arith(*op),
                    self.column_name(right)
                )
            }
        };
        let mut parts = Vec::new();
        if let Some(agg) = e.agg {
            parts.push(self.agg(agg).to_string());
        }
        if e.distinct {
            parts.push(self.distinct_modifier.clone());
        }
        parts.push(unit);
        parts.join(" ")
    }

    pub fn literal(&self, l: &Literal) -> String {
        match l {
            Literal::Number(n) => n.clone(),
            Literal::Text(s) => format!("\"{s}\""),
            Literal::Placeholder => self.placeholder.clone(),
        }
    }

    /// Right-hand side of a condition; `subquery` names a nested query.
    pub fn operand(&self, rhs: &Operand, subquery: &str) -> String {
        match rhs {
            Operand::Value(l) => self.literal(l),
            Operand::Range(a, b) => format!("{} {} {}", self.literal(a), self.range_joiner, self.literal(b)),
            Operand::Column(c) => self.column_name(c),
            Operand::Subquery(_) => subquery.to_string(),
        }
    }

    /// NL form of a condition, e.g. `grade greater than 20`.
    pub fn condition(&self, c: &Condition, subquery: &str) -> String {
        format!(
            "{} {} {}",
            self.expr(&c.lhs),
            self.comparison(c.op),
            self.operand(&c.rhs, subquery)
        )
    }

    /// Column mention for linearized edits: the bare column name when it
    /// identifies the column uniquely in `schema`, `table.column` otherwise.
    pub fn column(&self, c: &Column, schema: &Schema) -> String {
        match c {
            Column::Star => self.star.clone(),
            Column::Named { table, column } => {
                let unique = schema.tables_with_column(column).count() == 1;
                if unique && !self.is_reserved(column) {
                    column.clone()
                } else {
                    format!("{table}.{column}")
                }
            }
        }
    }
}
