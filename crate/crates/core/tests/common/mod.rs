#![allow(dead_code)]

use std::path::PathBuf;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use sqledit::schema::Table;
use sqledit::sql::*;
use sqledit::synth::{apply_editor, feasible_editors, load_seeds, Seed};
use sqledit::{Schema, SchemaSet};

pub const GRADES_SOURCE: &str =
    "SELECT id, MAX(grade) FROM assignments WHERE grade > 20 AND id NOT IN (SELECT id FROM graduates) GROUP BY id";
pub const GRADES_TARGET: &str = "SELECT id, AVG(grade) FROM assignments WHERE grade > 20 GROUP BY id ORDER BY id";

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn schemas() -> SchemaSet {
    SchemaSet::load(&fixtures().join("schemas")).expect("fixture schemas load")
}

pub fn school() -> Schema {
    schemas().get("school").expect("school schema").clone()
}

pub fn seeds(schemas: &SchemaSet) -> Vec<Seed> {
    let text = std::fs::read_to_string(fixtures().join("seeds.jsonl")).expect("seed fixture");
    load_seeds(&text, schemas).expect("fixture seeds parse")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random well-formed queries over one schema.
pub struct QueryGen<'a> {
    pub schema: &'a Schema,
    pub rng: ChaCha8Rng,
}

fn has_key(q: &SqlQuery, kind: ClauseKind, arg: &Argument) -> bool {
    let key = arg.match_key(kind);
    q.args(kind).iter().any(|a| a.match_key(kind) == key)
}

fn push_unique(q: &mut SqlQuery, kind: ClauseKind, arg: Argument) -> bool {
    if has_key(q, kind, &arg) {
        return false;
    }
    q.push(kind, arg);
    true
}

const WORDS: [&str; 6] = ["Paris", "it's", "USA", "%a%", "Smith", "x y"];

impl<'a> QueryGen<'a> {
    pub fn new(schema: &'a Schema, seed: u64) -> Self {
        QueryGen { schema, rng: rng(seed) }
    }

    fn literal(&mut self) -> Literal {
        match self.rng.gen_range(0..4) {
            0 => Literal::text(*WORDS.choose(&mut self.rng).unwrap()),
            1 => Literal::number(&format!("{}.5", self.rng.gen_range(0..50))),
            2 => Literal::number(&format!("-{}", self.rng.gen_range(1..9))),
            _ => Literal::number(&self.rng.gen_range(0..1000).to_string()),
        }
    }

    fn column(&mut self, cols: &[Column]) -> Column {
        cols.choose(&mut self.rng).unwrap().clone()
    }

    fn agg_expr(&mut self, cols: &[Column], allow_star: bool) -> AggExpr {
        match self.rng.gen_range(0..10) {
            0..=3 => AggExpr::column(self.column(cols)),
            4..=6 => AggExpr::aggregated(*Agg::ALL.choose(&mut self.rng).unwrap(), self.column(cols)),
            7 if allow_star => AggExpr::count_star(),
            8 => AggExpr {
                agg: Some(Agg::Count),
                distinct: true,
                unit: ValUnit::Column(self.column(cols)),
            },
            _ => AggExpr {
                agg: None,
                distinct: false,
                unit: ValUnit::Arith {
                    op: *ArithOp::ALL.choose(&mut self.rng).unwrap(),
                    left: self.column(cols),
                    right: self.column(cols),
                },
            },
        }
    }

    fn condition(&mut self, cols: &[Column], having: bool) -> Condition {
        let lhs = if having {
            if self.rng.gen_bool(0.5) {
                AggExpr::count_star()
            } else {
                AggExpr::aggregated(*Agg::ALL.choose(&mut self.rng).unwrap(), self.column(cols))
            }
        } else {
            AggExpr::column(self.column(cols))
        };
        let ops = [
            CmpOp::Eq,
            CmpOp::Ne,
            CmpOp::Gt,
            CmpOp::Lt,
            CmpOp::Ge,
            CmpOp::Le,
            CmpOp::Like,
            CmpOp::NotLike,
            CmpOp::Between,
        ];
        let op = *ops.choose(&mut self.rng).unwrap();
        let rhs = match op {
            CmpOp::Between => Operand::Range(self.literal(), self.literal()),
            CmpOp::Like | CmpOp::NotLike => Operand::Value(Literal::text(*WORDS.choose(&mut self.rng).unwrap())),
            _ if !having && self.rng.gen_bool(0.1) => Operand::Column(self.column(cols)),
            _ => Operand::Value(self.literal()),
        };
        Condition { lhs, op, rhs }
    }

    fn tables(&mut self) -> Vec<&'a Table> {
        let first = self.schema.tables.choose(&mut self.rng).unwrap();
        let mut out = vec![first];
        if self.schema.tables.len() > 1 && self.rng.gen_bool(0.3) {
            let linked: Vec<&Table> = self
                .schema
                .foreign_keys_of(&first.name)
                .filter_map(|(a, b)| {
                    let other = if a.0 == first.name { b.0 } else { a.0 };
                    self.schema.table(other).filter(|t| t.name != first.name)
                })
                .collect();
            let second = if !linked.is_empty() && self.rng.gen_bool(0.8) {
                *linked.choose(&mut self.rng).unwrap()
            } else {
                let others: Vec<&Table> = self.schema.tables.iter().filter(|t| t.name != first.name).collect();
                *others.choose(&mut self.rng).unwrap()
            };
            out.push(second);
        }
        out
    }

    /// A random query; `nested` allows one subquery.
    pub fn query(&mut self) -> SqlQuery {
        self.block(true)
    }

    fn block(&mut self, nested: bool) -> SqlQuery {
        use ClauseKind as K;
        let mut q = SqlQuery::new().with_db(self.schema.db_id.clone());
        let tables = self.tables();
        let cols: Vec<Column> = tables
            .iter()
            .flat_map(|t| t.columns.iter().map(|c| Column::named(&t.name, c)))
            .collect();
        for t in &tables {
            q.push(K::From, Argument::Table(t.name.clone()));
        }
        if let [a, b] = tables.as_slice() {
            let fk = self
                .schema
                .foreign_keys_of(&a.name)
                .find(|(x, y)| (x.0 == a.name && y.0 == b.name) || (x.0 == b.name && y.0 == a.name));
            let (l, r) = match fk {
                Some((x, y)) => (Column::named(x.0, x.1), Column::named(y.0, y.1)),
                None => (
                    Column::named(&a.name, a.columns.choose(&mut self.rng).unwrap()),
                    Column::named(&b.name, b.columns.choose(&mut self.rng).unwrap()),
                ),
            };
            q.push(K::From, Argument::join(l, r));
        }

        for _ in 0..self.rng.gen_range(1..=3) {
            let e = self.agg_expr(&cols, true);
            push_unique(&mut q, K::Select, Argument::Expr(e));
        }
        if self.rng.gen_bool(0.15) {
            q.push(K::Select, Argument::Keyword(Keyword::Distinct));
        }

        for _ in 0..self.rng.gen_range(0..=3) {
            let c = self.condition(&cols, false);
            push_unique(&mut q, K::Where, Argument::Cond(c));
        }

        if nested {
            match self.rng.gen_range(0..10) {
                0..=1 => {
                    let mut sub = self.block(false);
                    // A nested condition compares against one value column.
                    let first = sub.exprs(K::Select).next().unwrap().clone();
                    let mut select = vec![Argument::Expr(first)];
                    if sub.has_keyword(K::Select, Keyword::Distinct) {
                        select.push(Argument::Keyword(Keyword::Distinct));
                    }
                    sub.set_args(K::Select, select);
                    let op = *[CmpOp::In, CmpOp::NotIn, CmpOp::Gt, CmpOp::Eq]
                        .choose(&mut self.rng)
                        .unwrap();
                    let cond = Condition {
                        lhs: AggExpr::column(self.column(&cols)),
                        op,
                        rhs: Operand::Subquery(SubRef(0)),
                    };
                    if push_unique(&mut q, K::Where, Argument::Cond(cond)) {
                        q.set_subquery(Some(sub));
                    }
                }
                2 => {
                    let sub = self.block(false);
                    q.push(
                        K::Ieu,
                        Argument::Keyword(*Keyword::SET_OPS.choose(&mut self.rng).unwrap()),
                    );
                    q.push(K::Ieu, Argument::Subquery(SubRef(0)));
                    q.set_subquery(Some(sub));
                }
                _ => {}
            }
        }
        if q.conditions(K::Where).count() >= 2 && self.rng.gen_bool(0.3) {
            q.push(K::Where, Argument::Keyword(Keyword::Or));
        }

        if self.rng.gen_bool(0.3) {
            for _ in 0..self.rng.gen_range(1..=2) {
                let c = self.column(&cols);
                push_unique(&mut q, K::GroupBy, Argument::Column(c));
            }
            if self.rng.gen_bool(0.4) {
                for _ in 0..self.rng.gen_range(1..=2) {
                    let c = self.condition(&cols, true);
                    push_unique(&mut q, K::Having, Argument::Cond(c));
                }
                if q.conditions(K::Having).count() >= 2 && self.rng.gen_bool(0.3) {
                    q.push(K::Having, Argument::Keyword(Keyword::Or));
                }
            }
        }
        if self.rng.gen_bool(0.3) {
            for _ in 0..self.rng.gen_range(1..=2) {
                let e = self.agg_expr(&cols, false);
                push_unique(&mut q, K::OrderBy, Argument::Expr(e));
            }
            if self.rng.gen_bool(0.5) {
                q.push(K::OrderBy, Argument::Keyword(Keyword::Desc));
            }
        }
        if self.rng.gen_bool(0.25) {
            q.push(K::Limit, Argument::Limit(self.rng.gen_range(1..=10)));
        }
        q.tidy();
        q
    }

    /// `q` after 1..=4 random feasible editors.
    pub fn mutate(&mut self, q: &SqlQuery) -> SqlQuery {
        let mut p = q.clone();
        for _ in 0..self.rng.gen_range(1..=4) {
            let editors = feasible_editors(&p, self.schema);
            let Some(e) = editors.choose(&mut self.rng).copied() else {
                break;
            };
            p = apply_editor(e, &p, self.schema, &mut self.rng)
                .expect("feasible editor applies")
                .0;
        }
        p
    }

    /// `q` with every WHERE/HAVING literal replaced by a fresh random one.
    pub fn perturb_values(&mut self, q: &SqlQuery) -> SqlQuery {
        let mut p = q.clone();
        for kind in [ClauseKind::Where, ClauseKind::Having] {
            let args: Vec<Argument> = p
                .args(kind)
                .iter()
                .map(|a| match a {
                    Argument::Cond(c) => {
                        let rhs = match &c.rhs {
                            Operand::Value(_) => Operand::Value(self.literal()),
                            Operand::Range(..) => Operand::Range(self.literal(), self.literal()),
                            other => other.clone(),
                        };
                        Argument::Cond(Condition { rhs, ..c.clone() })
                    }
                    other => other.clone(),
                })
                .collect();
            p.set_args(kind, args);
        }
        if let Some(sub) = p.subquery() {
            let sub = self.perturb_values(sub);
            p.set_subquery(Some(sub));
        }
        p
    }
}

/// Every fixture schema with a deterministic generator per index.
pub fn generators(schemas: &SchemaSet, seed: u64) -> Vec<QueryGen<'_>> {
    schemas
        .iter()
        .enumerate()
        .map(|(i, s)| QueryGen::new(s, seed.wrapping_mul(31).wrapping_add(i as u64)))
        .collect()
}

/// A constructed evaluation set: the grades example pair first (edit size 4), then
/// nine fixture seeds corrupted by random editors.
pub fn eval_set(schemas: &SchemaSet) -> Vec<sqledit::eval::EvalExample> {
    let s = schemas.get("school").expect("school schema");
    let mut out = vec![sqledit::eval::EvalExample {
        db_id: "school".into(),
        question: "what is the average grade of each assignment id, ordered by id?".into(),
        initial: parse_sql(GRADES_SOURCE, s).unwrap(),
        feedback: "use average grade instead of maximum, drop the graduates check, and order by id".into(),
        gold: parse_sql(GRADES_TARGET, s).unwrap(),
        explanation: None,
    }];
    let seeds = seeds(schemas);
    let mut i = 0;
    while out.len() < 10 {
        let seed = &seeds[i * 11 % seeds.len()];
        i += 1;
        let mut gen = QueryGen::new(schemas.get(&seed.db_id).unwrap(), i as u64);
        let initial = gen.mutate(&seed.gold);
        if sqledit::exact_set_match(&initial, &seed.gold) {
            continue;
        }
        out.push(sqledit::eval::EvalExample {
            db_id: seed.db_id.clone(),
            question: seed.question.clone(),
            initial,
            feedback: "fix it".into(),
            gold: seed.gold.clone(),
            explanation: None,
        });
    }
    out
}
