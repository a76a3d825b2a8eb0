//! The linearized edit form: `<clause> add|remove ARG </clause>` repeated.
//!
//! Clauses follow the global order FROM, WHERE, GROUP-BY, HAVING, SELECT,
//! ORDER-BY, LIMIT, IEU, SUBS; within a clause removals come before
//! additions, each in canonical argument order. The SUBS edit is wrapped in a
//! `<subs> ... </subs>` pair around its own linearization. ARG is rendered
//! with the words of the shared verbalization table, so `avg(t.grade)` becomes
//! `average grade`.

use std::fmt;

use super::{ClauseEdit, SqlEdit};
use crate::error::EditError;
use crate::schema::Schema;
use crate::sql::*;
use crate::verbalize::{self, Verbalization};

/// Tokens of a linearized edit. Quoted string values form single tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearizedEdit(Vec<String>);

impl LinearizedEdit {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Splits text on whitespace, keeping `"..."` string values whole.
    pub fn parse(text: &str) -> Result<Self, EditError> {
        let mut tokens = Vec::new();
        let mut chars = text.chars().peekable();
        while let Some(&c) = chars.peek() {
            if c.is_whitespace() {
                chars.next();
                continue;
            }
            let mut tok = String::new();
            if c == '"' {
                tok.push(chars.next().unwrap_or('"'));
                let mut closed = false;
                while let Some(ch) = chars.next() {
                    tok.push(ch);
                    if ch == '\\' {
                        if let Some(esc) = chars.next() {
                            tok.push(esc);
                        }
                    } else if ch == '"' {
                        closed = true;
                        break;
                    }
                }
                if !closed {
                    return Err(EditError::MalformedLinearization("unterminated string value".into()));
                }
            } else {
                while let Some(&ch) = chars.peek() {
                    if ch.is_whitespace() {
                        break;
                    }
                    tok.push(ch);
                    chars.next();
                }
            }
            tokens.push(tok);
        }
        Ok(LinearizedEdit(tokens))
    }
}

impl fmt::Display for LinearizedEdit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

impl From<Vec<String>> for LinearizedEdit {
    fn from(tokens: Vec<String>) -> Self {
        LinearizedEdit(tokens)
    }
}

fn words(phrase: &str) -> impl Iterator<Item = String> + '_ {
    phrase.split_whitespace().map(str::to_string)
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn unquote(tok: &str) -> Option<String> {
    let inner = tok.strip_prefix('"')?.strip_suffix('"')?;
    let mut out = String::new();
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            out.push(chars.next()?);
        } else if c == '"' {
            return None;
        } else {
            out.push(c);
        }
    }
    Some(out)
}

struct Verbalizer<'a> {
    table: &'a Verbalization,
    schema: &'a Schema,
}

impl Verbalizer<'_> {
    fn column(&self, c: &Column, out: &mut Vec<String>) {
        out.extend(words(&self.table.column(c, self.schema)));
    }

    fn literal(&self, l: &Literal, out: &mut Vec<String>) {
        out.push(match l {
            Literal::Number(n) => n.clone(),
            Literal::Text(s) => quote(s),
            Literal::Placeholder => self.table.placeholder.clone(),
        });
    }

    fn val_unit(&self, v: &ValUnit, out: &mut Vec<String>) {
        match v {
            ValUnit::Column(c) => self.column(c, out),
            ValUnit::Arith { op, left, right } => {
                self.column(left, out);
                out.extend(words(self.table.arith(*op)));
                self.column(right, out);
            }
        }
    }

    fn agg_expr(&self, e: &AggExpr, out: &mut Vec<String>) {
        if *e == AggExpr::count_star() {
            out.extend(words(&self.table.count_star));
            return;
        }
        if let Some(agg) = e.agg {
            out.extend(words(self.table.agg(agg)));
        }
        if e.distinct {
            out.extend(words(&self.table.distinct_modifier));
        }
        self.val_unit(&e.unit, out);
    }

    fn subref(&self, r: SubRef) -> String {
        subref_token(self.table, r)
    }

    fn argument(&self, arg: &Argument, out: &mut Vec<String>) {
        match arg {
            Argument::Table(t) => out.push(t.clone()),
            Argument::Join(a, b) => {
                self.column(a, out);
                out.extend(words(&self.table.join));
                self.column(b, out);
            }
            Argument::Expr(e) => self.agg_expr(e, out),
            Argument::Column(c) => self.column(c, out),
            Argument::Cond(c) => {
                self.agg_expr(&c.lhs, out);
                out.extend(words(self.table.comparison(c.op)));
                match &c.rhs {
                    Operand::Value(v) => self.literal(v, out),
                    Operand::Range(a, b) => {
                        self.literal(a, out);
                        out.extend(words(&self.table.range_joiner));
                        self.literal(b, out);
                    }
                    Operand::Column(col) => self.column(col, out),
                    Operand::Subquery(r) => out.push(self.subref(*r)),
                }
            }
            Argument::Keyword(k) => out.extend(words(self.table.keyword(*k))),
            Argument::Limit(n) => out.push(n.to_string()),
            Argument::Subquery(r) => out.push(self.subref(*r)),
        }
    }

    fn edit(&self, d: &SqlEdit, out: &mut Vec<String>) {
        for (kind, ce) in d.clauses() {
            let ops = ce
                .to_remove
                .iter()
                .map(|a| ("remove", a))
                .chain(ce.to_add.iter().map(|a| ("add", a)));
            for (op, arg) in ops {
                out.push(format!("<{}>", kind.tag()));
                out.push(op.to_string());
                self.argument(arg, out);
                out.push(format!("</{}>", kind.tag()));
            }
        }
        if let Some(sub) = d.subs() {
            out.push(format!("<{}>", ClauseKind::Subs.tag()));
            self.edit(sub, out);
            out.push(format!("</{}>", ClauseKind::Subs.tag()));
        }
    }
}

fn subref_token(table: &Verbalization, r: SubRef) -> String {
    // "subs1" names the first (and only) subquery.
    let base = table.subquery.trim_end_matches(|c: char| c.is_ascii_digit());
    format!("{base}{}", r.0 + 1)
}

/// Linearizes an edit. Column mentions use bare names when `schema` makes
/// them unambiguous.
pub fn linearize(d: &SqlEdit, schema: &Schema) -> LinearizedEdit {
    let v = Verbalizer {
        table: verbalize::table(),
        schema,
    };
    let mut out = Vec::new();
    v.edit(d, &mut out);
    LinearizedEdit(out)
}

/// Parses a linearized edit back into a [`SqlEdit`], resolving column
/// mentions against `schema`.
pub fn parse_linearized(tokens: &LinearizedEdit, schema: &Schema) -> Result<SqlEdit, EditError> {
    let p = ArgParser {
        table: verbalize::table(),
        schema,
    };
    let toks = tokens.tokens();
    let mut pos = 0;
    let edit = p.edit(toks, &mut pos, None)?;
    if pos != toks.len() {
        return Err(malformed(format!("unexpected token `{}`", toks[pos])));
    }
    Ok(edit)
}

fn malformed(msg: impl Into<String>) -> EditError {
    EditError::MalformedLinearization(msg.into())
}

struct ArgParser<'a> {
    table: &'a Verbalization,
    schema: &'a Schema,
}

/// All parses of a phrase starting at a position, as (value, next position).
type Alts<T> = Vec<(T, usize)>;

impl ArgParser<'_> {
    fn edit(&self, toks: &[String], pos: &mut usize, closing: Option<&str>) -> Result<SqlEdit, EditError> {
        let mut clauses: Vec<(ClauseKind, ClauseEdit)> = Vec::new();
        let mut subs: Option<SqlEdit> = None;
        while *pos < toks.len() {
            let tok = &toks[*pos];
            if Some(tok.as_str()) == closing {
                return self.finish(clauses, subs);
            }
            let tag = tok
                .strip_prefix('<')
                .and_then(|t| t.strip_suffix('>'))
                .filter(|t| !t.starts_with('/'))
                .ok_or_else(|| malformed(format!("expected an opening clause tag, found `{tok}`")))?;
            let kind = ClauseKind::from_tag(tag).ok_or_else(|| malformed(format!("unknown clause tag `<{tag}>`")))?;
            let close = format!("</{tag}>");
            *pos += 1;
            if kind == ClauseKind::Subs {
                if subs.is_some() {
                    return Err(malformed("more than one <subs> block"));
                }
                let inner = self.edit(toks, pos, Some(&close))?;
                if toks.get(*pos) != Some(&close) {
                    return Err(malformed("unbalanced <subs> block"));
                }
                *pos += 1;
                subs = Some(inner);
                continue;
            }
            let op = toks.get(*pos).map(String::as_str);
            let is_add = match op {
                Some("add") => true,
                Some("remove") => false,
                _ => return Err(malformed(format!("expected add or remove after <{tag}>"))),
            };
            *pos += 1;
            let end = toks[*pos..]
                .iter()
                .position(|t| *t == close)
                .map(|i| *pos + i)
                .ok_or_else(|| malformed(format!("missing {close}")))?;
            let arg_toks = &toks[*pos..end];
            if let Some(bad) = arg_toks.iter().find(|t| t.starts_with('<') && t.ends_with('>')) {
                return Err(malformed(format!("unbalanced tag `{bad}` inside <{tag}>")));
            }
            let arg = self.argument(kind, arg_toks)?;
            *pos = end + 1;
            let idx = match clauses.iter().position(|(k, _)| *k == kind) {
                Some(i) => i,
                None => {
                    clauses.push((kind, ClauseEdit::default()));
                    clauses.len() - 1
                }
            };
            let ce = &mut clauses[idx].1;
            let list = if is_add { &mut ce.to_add } else { &mut ce.to_remove };
            if list.contains(&arg) {
                return Err(malformed(format!("duplicate operation on `{arg}`")));
            }
            list.push(arg);
        }
        if closing.is_some() {
            return Err(malformed("unbalanced <subs> block"));
        }
        self.finish(clauses, subs)
    }

    fn finish(&self, clauses: Vec<(ClauseKind, ClauseEdit)>, subs: Option<SqlEdit>) -> Result<SqlEdit, EditError> {
        let mut d = SqlEdit::new();
        for (kind, ce) in clauses {
            if ce.to_add.iter().any(|a| ce.to_remove.contains(a)) {
                return Err(malformed(format!("{kind} adds and removes the same argument")));
            }
            d.set_clause(kind, ce);
        }
        if let Some(s) = subs {
            if s.is_empty() {
                return Err(malformed("empty <subs> block"));
            }
            d.set_subs(Some(s));
        }
        Ok(d)
    }

    fn argument(&self, kind: ClauseKind, toks: &[String]) -> Result<Argument, EditError> {
        let alts: Alts<Argument> = match kind {
            ClauseKind::From => {
                let mut alts = Vec::new();
                if let [t] = toks {
                    if let Some(table) = self.schema.table(t) {
                        alts.push((Argument::Table(table.name.clone()), 1));
                    }
                }
                for (a, i) in self.column(toks, 0) {
                    if let Some(j) = self.phrase(toks, i, &self.table.join) {
                        for (b, k) in self.column(toks, j) {
                            alts.push((Argument::join(a.clone(), b), k));
                        }
                    }
                }
                alts
            }
            ClauseKind::Select => self.keyword_or(toks, Keyword::Distinct, |i| {
                self.agg_expr(toks, i)
                    .into_iter()
                    .map(|(e, j)| (Argument::Expr(e), j))
                    .collect()
            }),
            ClauseKind::OrderBy => self.keyword_or(toks, Keyword::Desc, |i| {
                self.agg_expr(toks, i)
                    .into_iter()
                    .map(|(e, j)| (Argument::Expr(e), j))
                    .collect()
            }),
            ClauseKind::GroupBy => self
                .column(toks, 0)
                .into_iter()
                .map(|(c, j)| (Argument::Column(c), j))
                .collect(),
            ClauseKind::Where | ClauseKind::Having => self.keyword_or(toks, Keyword::Or, |i| {
                self.condition(toks, i)
                    .into_iter()
                    .map(|(c, j)| (Argument::Cond(c), j))
                    .collect()
            }),
            ClauseKind::Limit => match toks {
                [n] => n
                    .parse::<u64>()
                    .map(|n| vec![(Argument::Limit(n), 1)])
                    .unwrap_or_default(),
                _ => vec![],
            },
            ClauseKind::Ieu => {
                let mut alts = Vec::new();
                for kw in Keyword::SET_OPS {
                    alts.extend(
                        self.phrase(toks, 0, self.table.keyword(kw))
                            .into_iter()
                            .map(|j| (Argument::Keyword(kw), j)),
                    );
                }
                alts.extend(
                    self.subref(toks, 0)
                        .into_iter()
                        .map(|(r, j)| (Argument::Subquery(r), j)),
                );
                alts
            }
            ClauseKind::Subs => vec![],
        };
        alts.into_iter()
            .find(|(_, end)| *end == toks.len())
            .map(|(a, _)| a)
            .ok_or_else(|| malformed(format!("cannot read `{}` as a {kind} argument", toks.join(" "))))
    }

    fn keyword_or(&self, toks: &[String], kw: Keyword, rest: impl Fn(usize) -> Alts<Argument>) -> Alts<Argument> {
        let mut alts: Alts<Argument> = self
            .phrase(toks, 0, self.table.keyword(kw))
            .into_iter()
            .map(|j| (Argument::Keyword(kw), j))
            .collect();
        alts.extend(rest(0));
        alts
    }

    /// Positions after matching every word of `phrase` at `i`.
    fn phrase(&self, toks: &[String], i: usize, phrase: &str) -> Option<usize> {
        let mut j = i;
        for w in phrase.split_whitespace() {
            if toks.get(j).map(String::as_str) != Some(w) {
                return None;
            }
            j += 1;
        }
        Some(j)
    }

    fn column(&self, toks: &[String], i: usize) -> Alts<Column> {
        let mut alts = Vec::new();
        if let Some(j) = self.phrase(toks, i, &self.table.star) {
            alts.push((Column::Star, j));
        }
        let Some(tok) = toks.get(i) else { return alts };
        if let Some((t, c)) = tok.split_once('.') {
            if let Some((t, c)) = self.schema.resolve_key(&format!("{t}.{c}")) {
                alts.push((Column::named(t, c), i + 1));
            }
        } else if !self.table.is_reserved(tok) {
            let mut hits = self.schema.tables_with_column(tok);
            if let (Some(t), None) = (hits.next(), hits.next()) {
                let c = t.column(tok).unwrap_or(tok);
                alts.push((Column::named(&t.name, c), i + 1));
            }
        }
        alts
    }

    fn val_unit(&self, toks: &[String], i: usize) -> Alts<ValUnit> {
        let mut alts = Vec::new();
        for (left, j) in self.column(toks, i) {
            alts.push((ValUnit::Column(left.clone()), j));
            for op in ArithOp::ALL {
                if let Some(k) = self.phrase(toks, j, self.table.arith(op)) {
                    for (right, l) in self.column(toks, k) {
                        alts.push((
                            ValUnit::Arith {
                                op,
                                left: left.clone(),
                                right,
                            },
                            l,
                        ));
                    }
                }
            }
        }
        alts
    }

    fn agg_expr(&self, toks: &[String], i: usize) -> Alts<AggExpr> {
        let mut alts = Vec::new();
        if let Some(j) = self.phrase(toks, i, &self.table.count_star) {
            alts.push((AggExpr::count_star(), j));
        }
        for agg in Agg::ALL {
            let Some(j) = self.phrase(toks, i, self.table.agg(agg)) else {
                continue;
            };
            let mut starts = vec![(false, j)];
            if let Some(k) = self.phrase(toks, j, &self.table.distinct_modifier) {
                starts.push((true, k));
            }
            for (distinct, k) in starts {
                for (unit, l) in self.val_unit(toks, k) {
                    alts.push((
                        AggExpr {
                            agg: Some(agg),
                            distinct,
                            unit,
                        },
                        l,
                    ));
                }
            }
        }
        alts.extend(self.val_unit(toks, i).into_iter().map(|(unit, j)| {
            (
                AggExpr {
                    agg: None,
                    distinct: false,
                    unit,
                },
                j,
            )
        }));
        alts
    }

    fn literal(&self, toks: &[String], i: usize) -> Option<(Literal, usize)> {
        let tok = toks.get(i)?;
        if *tok == self.table.placeholder {
            return Some((Literal::Placeholder, i + 1));
        }
        if let Some(s) = unquote(tok) {
            return Some((Literal::Text(s), i + 1));
        }
        let numeric = tok.strip_prefix('-').unwrap_or(tok);
        if !numeric.is_empty() && numeric.starts_with(|c: char| c.is_ascii_digit()) && numeric.parse::<f64>().is_ok() {
            return Some((Literal::number(tok), i + 1));
        }
        None
    }

    fn subref(&self, toks: &[String], i: usize) -> Option<(SubRef, usize)> {
        let tok = toks.get(i)?;
        let base = self.table.subquery.trim_end_matches(|c: char| c.is_ascii_digit());
        let n: usize = tok.strip_prefix(base)?.parse().ok()?;
        (n >= 1).then_some((SubRef(n - 1), i + 1))
    }

    fn condition(&self, toks: &[String], i: usize) -> Alts<Condition> {
        let mut alts = Vec::new();
        for (lhs, j) in self.agg_expr(toks, i) {
            for op in CmpOp::ALL {
                let Some(k) = self.phrase(toks, j, self.table.comparison(op)) else {
                    continue;
                };
                let mut rhs: Alts<Operand> = Vec::new();
                if op == CmpOp::Between {
                    if let Some((lo, l)) = self.literal(toks, k) {
                        if let Some(m) = self.phrase(toks, l, &self.table.range_joiner) {
                            if let Some((hi, n)) = self.literal(toks, m) {
                                rhs.push((Operand::Range(lo, hi), n));
                            }
                        }
                    }
                } else {
                    if let Some((r, l)) = self.subref(toks, k) {
                        rhs.push((Operand::Subquery(r), l));
                    }
                    if let Some((v, l)) = self.literal(toks, k) {
                        rhs.push((Operand::Value(v), l));
                    }
                    rhs.extend(self.column(toks, k).into_iter().map(|(c, l)| (Operand::Column(c), l)));
                }
                for (rhs, l) in rhs {
                    alts.push((
                        Condition {
                            lhs: lhs.clone(),
                            op,
                            rhs,
                        },
                        l,
                    ));
                }
            }
        }
        alts
    }
}
