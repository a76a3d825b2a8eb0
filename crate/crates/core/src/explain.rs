//! Step-numbered natural language explanations of queries.
//!
//! A subquery is explained first; the main query then refers to its last step
//! ("the results of step 2"). Grouping is phrased as "for each ..." and tables
//! and columns are mentioned by their exact schema names. Templates live in
//! `data/explain_templates.json`; operator words come from the shared
//! verbalization table.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::schema::Schema;
use crate::sql::*;
use crate::verbalize;

const TEMPLATES_JSON: &str = include_str!("../data/explain_templates.json");

#[derive(Debug, Deserialize)]
struct Templates {
    #[allow(dead_code)]
    version: u32,
    #[serde(flatten)]
    entries: BTreeMap<String, serde_json::Value>,
}

static TEMPLATES: LazyLock<Templates> =
    LazyLock::new(|| serde_json::from_str(TEMPLATES_JSON).expect("bundled explanation templates are valid JSON"));

fn fill(name: &str, slots: &[(&str, &str)]) -> String {
    let mut text = TEMPLATES.entries[name]
        .as_str()
        .unwrap_or_else(|| panic!("template `{name}` is not a string"))
        .to_string();
    for (slot, value) in slots {
        text = text.replace(&format!("{{{slot}}}"), value);
    }
    text
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub number: usize,
    pub text: String,
    /// Clause kinds realized by this step.
    pub clauses: Vec<ClauseKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Explanation {
    pub steps: Vec<Step>,
}

impl Explanation {
    /// Step sentences in order.
    pub fn sentences(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.text.as_str()).collect()
    }

    /// Whitespace token count over all steps.
    pub fn token_len(&self) -> usize {
        self.steps.iter().map(|s| s.text.split_whitespace().count()).sum()
    }

    /// JSON array of step strings.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::from(self.sentences())
    }

    /// Clause kinds realized by at least one step.
    pub fn realized(&self) -> Vec<ClauseKind> {
        let mut kinds: Vec<_> = self.steps.iter().flat_map(|s| s.clauses.iter().copied()).collect();
        kinds.sort();
        kinds.dedup();
        kinds
    }
}

struct Builder<'a> {
    schema: &'a Schema,
    steps: Vec<Step>,
}

fn join_list(items: &[String], connective: &str) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} {connective} {last}", init.join(", ")),
    }
}

impl Builder<'_> {
    fn push(&mut self, text: String, clauses: Vec<ClauseKind>) -> usize {
        let number = self.steps.len() + 1;
        self.steps.push(Step { number, text, clauses });
        number
    }

    fn table(&self, t: &str) -> String {
        let name = self.schema.table(t).map_or(t, |t| t.name.as_str());
        fill("table", &[("table", name)])
    }

    fn item(&self, e: &AggExpr) -> String {
        let phrase = verbalize::table().expr(e);
        if e.agg.is_none() && e.unit == ValUnit::Column(Column::Star) {
            phrase
        } else {
            fill("item", &[("expr", &phrase)])
        }
    }

    fn condition(&self, c: &Condition, sub_step: Option<usize>) -> String {
        let v = verbalize::table();
        let sub = match sub_step {
            Some(n) => fill("step_ref", &[("n", &n.to_string())]),
            None => v.subquery.clone(),
        };
        v.condition(c, &sub)
    }

    fn conditions(&self, q: &SqlQuery, kind: ClauseKind, sub_step: Option<usize>) -> String {
        let conds: Vec<String> = q.conditions(kind).map(|c| self.condition(c, sub_step)).collect();
        let word = if q.has_keyword(kind, Keyword::Or) { "or" } else { "and" };
        let connective = TEMPLATES.entries[word].as_str().unwrap_or(word).to_string();
        conds.join(&format!(" {connective} "))
    }

    /// Explains one SELECT block; returns the number of its final step.
    fn query(&mut self, q: &SqlQuery, extra: &[ClauseKind], sub_step: Option<usize>) -> usize {
        let mut pending: Vec<ClauseKind> = extra.to_vec();
        let tables: Vec<String> = q.tables().map(|t| self.table(t)).collect();
        let mut source_is_step: Option<usize> = None;

        if tables.len() > 1 {
            let mut tags = pending.split_off(0);
            tags.push(ClauseKind::From);
            let others = join_list(&tables[1..], "and");
            let keys: Vec<String> = q
                .args(ClauseKind::From)
                .iter()
                .filter_map(|a| match a {
                    Argument::Join(l, r) => Some(fill(
                        "join_key",
                        &[
                            ("left", &verbalize::table().column_name(l)),
                            ("right", &verbalize::table().column_name(r)),
                        ],
                    )),
                    _ => None,
                })
                .collect();
            let text = if keys.is_empty() {
                fill("join", &[("first", &tables[0]), ("others", &others)])
            } else {
                fill(
                    "join_on",
                    &[
                        ("first", &tables[0]),
                        ("others", &others),
                        ("keys", &join_list(&keys, "and")),
                    ],
                )
            };
            source_is_step = Some(self.push(text, tags));
        } else {
            pending.push(ClauseKind::From);
        }
        let source = |step: Option<usize>| match step {
            Some(n) => fill("step_ref", &[("n", &n.to_string())]),
            None => tables.first().cloned().unwrap_or_default(),
        };

        if q.conditions(ClauseKind::Where).next().is_some() {
            let mut tags = pending.split_off(0);
            tags.push(ClauseKind::Where);
            let text = fill(
                "filter",
                &[
                    ("source", &source(source_is_step)),
                    ("conditions", &self.conditions(q, ClauseKind::Where, sub_step)),
                ],
            );
            source_is_step = Some(self.push(text, tags));
        }

        let rows = match source_is_step {
            Some(n) => source(Some(n)),
            None => fill("all_rows", &[("source", &source(None))]),
        };
        let items: Vec<String> = q.exprs(ClauseKind::Select).map(|e| self.item(e)).collect();
        let items = join_list(&items, "and");
        let distinct = q.has_keyword(ClauseKind::Select, Keyword::Distinct);
        let group: Vec<String> = q
            .args(ClauseKind::GroupBy)
            .iter()
            .flat_map(|a| a.columns())
            .map(|c| verbalize::table().column_name(c))
            .collect();

        let mut tags = pending.split_off(0);
        tags.push(ClauseKind::Select);
        let mut last = if group.is_empty() {
            let name = if distinct { "select_distinct" } else { "select" };
            self.push(fill(name, &[("items", &items), ("source", &rows)]), tags)
        } else {
            tags.push(ClauseKind::GroupBy);
            let name = if distinct { "group_distinct" } else { "group" };
            let text = fill(
                name,
                &[
                    ("columns", &join_list(&group, "and")),
                    ("items", &items),
                    ("source", &rows),
                ],
            );
            self.push(text, tags)
        };

        if q.conditions(ClauseKind::Having).next().is_some() {
            let text = fill(
                "group_filter",
                &[
                    ("n", &last.to_string()),
                    ("conditions", &self.conditions(q, ClauseKind::Having, sub_step)),
                ],
            );
            last = self.push(text, vec![ClauseKind::Having]);
        }

        let order: Vec<String> = q
            .exprs(ClauseKind::OrderBy)
            .map(|e| verbalize::table().expr(e))
            .collect();
        if !order.is_empty() {
            let v = verbalize::table();
            let direction = if q.has_keyword(ClauseKind::OrderBy, Keyword::Desc) {
                v.keyword(Keyword::Desc).to_string()
            } else {
                v.ascending.clone()
            };
            let n = last.to_string();
            let items = join_list(&order, "and");
            let mut slots = vec![
                ("n", n.as_str()),
                ("items", items.as_str()),
                ("direction", direction.as_str()),
            ];
            let limit = q.limit().map(|l| l.to_string());
            let (name, tags) = match &limit {
                Some(l) => {
                    slots.push(("limit", l));
                    ("order_limit", vec![ClauseKind::OrderBy, ClauseKind::Limit])
                }
                None => ("order", vec![ClauseKind::OrderBy]),
            };
            last = self.push(fill(name, &slots), tags);
        } else if let Some(l) = q.limit() {
            let text = fill("limit", &[("limit", &l.to_string()), ("n", &last.to_string())]);
            last = self.push(text, vec![ClauseKind::Limit]);
        }
        last
    }
}

/// Explains `q` step by step. Deterministic in `(q, schema)`.
pub fn explain(q: &SqlQuery, schema: &Schema) -> Explanation {
    let mut b = Builder {
        schema,
        steps: Vec::new(),
    };
    let sub_step = q.subquery().map(|s| b.query(s, &[ClauseKind::Subs], None));
    let main_last = b.query(q, &[], sub_step);
    if let (Some(op), Some(sub_last)) = (q.set_op(), sub_step) {
        let name = match op {
            Keyword::Intersect => "intersect",
            Keyword::Except => "except",
            _ => "union",
        };
        let text = fill(
            name,
            &[("left", &main_last.to_string()), ("right", &sub_last.to_string())],
        );
        b.push(text, vec![ClauseKind::Ieu, ClauseKind::Subs]);
    }
    Explanation { steps: b.steps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::Table;
    use crate::sql::parse_sql;

    fn schema() -> Schema {
        let t = |n: &str, cols: &[&str]| Table {
            name: n.into(),
            columns: cols.iter().map(|c| c.to_string()).collect(),
        };
        Schema::new(
            "x",
            vec![
                t("t", &["id", "name"]),
                t("VOTES", &["vote_id", "state"]),
                t("assignments", &["id", "grade"]),
                t("graduates", &["id"]),
            ],
            vec![],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn minimal_query_is_one_step() {
        let s = schema();
        let e = explain(&parse_sql("SELECT id FROM t", &s).unwrap(), &s);
        assert_eq!(e.sentences(), ["find the id of all rows in the t table"]);
        assert_eq!(e.steps[0].number, 1);
    }

    #[test]
    fn grouping_reads_for_each() {
        let s = schema();
        let q = parse_sql(
            "SELECT vote_id, count(*) FROM votes GROUP BY vote_id HAVING count(*) > 2",
            &s,
        )
        .unwrap();
        let e = explain(&q, &s);
        assert!(
            e.steps[0].text.starts_with("for each vote_id, find "),
            "{:?}",
            e.sentences()
        );
        assert!(e.steps[0].text.contains("the VOTES table"));
        for step in e.sentences() {
            let upper = step.to_uppercase();
            assert!(!upper.contains("GROUP BY") && !upper.contains("HAVING"), "{step}");
        }
    }

    #[test]
    fn subquery_steps_come_first() {
        let s = schema();
        let q = parse_sql(
            "SELECT id, MAX(grade) FROM assignments WHERE grade > 20 AND id NOT IN (SELECT id FROM graduates) GROUP BY id ORDER BY id DESC LIMIT 3",
            &s,
        )
        .unwrap();
        let e = explain(&q, &s);
        assert_eq!(
            e.sentences(),
            [
                "find the id of all rows in the graduates table",
                "find the rows in the assignments table whose grade greater than 20 and id not in the results of step 1",
                "for each id, find the id and the maximum grade of the results of step 2",
                "order the results of step 3 by id in descending order and keep only the top 3 rows",
            ]
        );
        let mut expected = q.clause_kinds();
        expected.sort();
        assert_eq!(e.realized(), expected);
    }

    #[test]
    fn set_operations_and_joins() {
        let s = schema();
        let q = parse_sql(
            "SELECT t.name FROM t JOIN assignments ON t.id = assignments.id EXCEPT SELECT name FROM t WHERE id = 1",
            &s,
        )
        .unwrap();
        let e = explain(&q, &s);
        let last = e.steps.last().unwrap();
        assert_eq!(
            last.text,
            "show the rows that are only in the results of step 4 but not in the results of step 2"
        );
        assert_eq!(e.steps.len(), 5);
        assert_eq!(e.to_json().as_array().unwrap().len(), 5);
    }
}
