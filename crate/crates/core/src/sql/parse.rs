//! Parser for the Spider-style SQL subset.
//!
//! Parsing happens in two passes per SELECT: the text is read into the clause
//! view with columns left as written (`alias.col` or bare `col`), then every
//! column is resolved against the FROM tables of its scope and qualified with
//! the exact schema table name.

use super::ast::*;
use crate::error::ParseError;
use crate::schema::Schema;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Str(String),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: usize,
}

const SYMBOLS: [&str; 15] = [
    "<>", "!=", ">=", "<=", "(", ")", ",", ".", "*", "+", "-", "/", "=", "<", ">",
];

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() || c == ';' {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(text[start..i].to_string()),
                pos: start,
            });
        } else if c.is_ascii_digit() {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Num(text[start..i].to_string()),
                pos: start,
            });
        } else if c == '\'' || c == '"' {
            let quote = bytes[i];
            i += 1;
            let mut s = String::new();
            loop {
                if i >= bytes.len() {
                    return Err(ParseError::syntax(start, "unterminated string literal"));
                }
                if bytes[i] == quote {
                    if bytes.get(i + 1) == Some(&quote) {
                        s.push(quote as char);
                        i += 2;
                        continue;
                    }
                    i += 1;
                    break;
                }
                let ch = text[i..].chars().next().unwrap_or('\0');
                s.push(ch);
                i += ch.len_utf8();
            }
            out.push(Token {
                tok: Tok::Str(s),
                pos: start,
            });
        } else if let Some(sym) = SYMBOLS.iter().find(|s| text[i..].starts_with(**s)) {
            i += sym.len();
            out.push(Token {
                tok: Tok::Sym(sym),
                pos: start,
            });
        } else {
            return Err(ParseError::syntax(start, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

const RESERVED: [&str; 26] = [
    "select",
    "from",
    "where",
    "group",
    "by",
    "having",
    "order",
    "limit",
    "join",
    "on",
    "and",
    "or",
    "not",
    "in",
    "like",
    "between",
    "as",
    "distinct",
    "asc",
    "desc",
    "intersect",
    "except",
    "union",
    "inner",
    "left",
    "is",
];

/// Tables visible in one SELECT: (name or alias, exact table name).
#[derive(Debug, Default, Clone)]
struct Scope {
    names: Vec<(String, String)>,
    tables: Vec<String>,
}

impl Scope {
    fn lookup(&self, qualifier: &str) -> Option<&str> {
        self.names
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(qualifier))
            .map(|(_, t)| t.as_str())
    }
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    end: usize,
    schema: &'a Schema,
}

type PResult<T> = Result<T, ParseError>;

/// Parses SQL text into its clause view, resolving columns against `schema`.
pub fn parse_sql(text: &str, schema: &Schema) -> Result<SqlQuery, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        schema,
    };
    let mut q = p.select(0, None)?;
    if p.pos < p.toks.len() {
        return Err(p.error("unexpected trailing input"));
    }
    q.db_id = Some(schema.db_id.clone());
    q.tidy();
    Ok(q)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, n: usize) -> Option<&Tok> {
        self.toks.get(self.pos + n).map(|t| &t.tok)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.pos)
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        let found = match self.peek() {
            Some(Tok::Ident(s)) | Some(Tok::Num(s)) => format!("`{s}`"),
            Some(Tok::Str(s)) => format!("'{s}'"),
            Some(Tok::Sym(s)) => format!("`{s}`"),
            None => "end of input".into(),
        };
        ParseError::syntax(self.here(), format!("{}, found {found}", msg.into()))
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s.eq_ignore_ascii_case(kw))
    }

    fn is_kw_at(&self, n: usize, kw: &str) -> bool {
        matches!(self.peek_at(n), Some(Tok::Ident(s)) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.error(format!("expected {}", kw.to_uppercase())))
        }
    }

    fn is_sym(&self, sym: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym)
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        if self.is_sym(sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, sym: &str) -> PResult<()> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{sym}`")))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !RESERVED.contains(&s.to_lowercase().as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected identifier")),
        }
    }

    /// One SELECT block; `depth` 0 is the main query, 1 a subquery.
    fn select(&mut self, depth: usize, outer: Option<&Scope>) -> PResult<SqlQuery> {
        let mut q = SqlQuery::new();
        self.expect_kw("select")?;
        if self.eat_kw("distinct") {
            q.push(ClauseKind::Select, Argument::Keyword(Keyword::Distinct));
        }
        loop {
            let e = self.agg_expr()?;
            push_unique(&mut q, ClauseKind::Select, Argument::Expr(e));
            if !self.eat_sym(",") {
                break;
            }
        }

        self.expect_kw("from")?;
        let scope = self.parse_from(&mut q)?;

        let mut sub: Option<SqlQuery> = None;
        if self.eat_kw("where") {
            self.conditions(&mut q, ClauseKind::Where, depth, &scope, &mut sub)?;
        }
        if self.is_kw("group") {
            self.pos += 1;
            self.expect_kw("by")?;
            loop {
                let c = self.column()?;
                push_unique(&mut q, ClauseKind::GroupBy, Argument::Column(c));
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        if self.eat_kw("having") {
            self.conditions(&mut q, ClauseKind::Having, depth, &scope, &mut sub)?;
        }
        if self.is_kw("order") {
            self.pos += 1;
            self.expect_kw("by")?;
            self.order_by(&mut q)?;
        }
        if self.eat_kw("limit") {
            match self.peek().cloned() {
                Some(Tok::Num(n)) => {
                    let value = n
                        .parse::<u64>()
                        .map_err(|_| self.error("LIMIT expects a non-negative integer"))?;
                    self.pos += 1;
                    q.push(ClauseKind::Limit, Argument::Limit(value));
                }
                _ => return Err(self.error("expected LIMIT value")),
            }
        }
        for kw in Keyword::SET_OPS {
            if self.is_kw(kw.as_str()) {
                if depth > 0 {
                    return Err(self.error("set operation inside a subquery exceeds one nesting level"));
                }
                if sub.is_some() {
                    return Err(self.error("at most one subquery is supported"));
                }
                self.pos += 1;
                let right = self.select(depth + 1, None)?;
                q.push(ClauseKind::Ieu, Argument::Keyword(kw));
                q.push(ClauseKind::Ieu, Argument::Subquery(SubRef(0)));
                sub = Some(right);
                break;
            }
        }

        self.resolve(&mut q, &scope, outer)?;
        q.set_subquery(sub);
        Ok(q)
    }

    fn parse_from(&mut self, q: &mut SqlQuery) -> PResult<Scope> {
        if self.is_sym("(") {
            return Err(self.error("subqueries in FROM are not supported"));
        }
        let mut scope = Scope::default();
        let mut joins = Vec::new();
        self.table_ref(q, &mut scope)?;
        loop {
            if self.eat_sym(",") {
                self.table_ref(q, &mut scope)?;
                continue;
            }
            if self.is_kw("inner") && self.is_kw_at(1, "join") {
                self.pos += 1;
            }
            if !self.eat_kw("join") {
                break;
            }
            self.table_ref(q, &mut scope)?;
            if self.eat_kw("on") {
                loop {
                    let pos = self.here();
                    let a = self.column()?;
                    self.expect_sym("=")?;
                    let b = self.column()?;
                    joins.push((a, b, pos));
                    if !self.eat_kw("and") {
                        break;
                    }
                }
            }
        }
        for (a, b, _) in joins {
            let a = self.resolve_column(a, &scope, None)?;
            let b = self.resolve_column(b, &scope, None)?;
            // Self-join conditions vanish once aliases of one table collapse.
            if a.table() == b.table() {
                continue;
            }
            push_unique(q, ClauseKind::From, Argument::join(a, b));
        }
        Ok(scope)
    }

    fn table_ref(&mut self, q: &mut SqlQuery, scope: &mut Scope) -> PResult<()> {
        if self.is_sym("(") {
            return Err(self.error("subqueries in FROM are not supported"));
        }
        let written = self.ident()?;
        let table = self
            .schema
            .table(&written)
            .ok_or_else(|| ParseError::Resolution(format!("unknown table `{written}`")))?
            .name
            .clone();
        let alias = if self.eat_kw("as") {
            Some(self.ident()?)
        } else {
            match self.peek() {
                Some(Tok::Ident(s)) if !RESERVED.contains(&s.to_lowercase().as_str()) => Some(self.ident()?),
                _ => None,
            }
        };
        if let Some(alias) = alias {
            if scope.lookup(&alias).is_some_and(|t| t != table) {
                return Err(ParseError::Resolution(format!("alias `{alias}` bound twice")));
            }
            scope.names.push((alias, table.clone()));
        }
        scope.names.push((table.clone(), table.clone()));
        if !scope.tables.contains(&table) {
            scope.tables.push(table.clone());
        }
        push_unique(q, ClauseKind::From, Argument::Table(table));
        Ok(())
    }

    fn order_by(&mut self, q: &mut SqlQuery) -> PResult<()> {
        let mut saw_asc = false;
        let mut saw_desc = false;
        loop {
            let e = self.agg_expr()?;
            push_unique(q, ClauseKind::OrderBy, Argument::Expr(e));
            if self.eat_kw("desc") {
                saw_desc = true;
            } else if self.eat_kw("asc") {
                saw_asc = true;
            }
            if !self.eat_sym(",") {
                break;
            }
        }
        if saw_asc && saw_desc {
            return Err(self.error("mixed ASC/DESC directions in one ORDER BY are not supported"));
        }
        if saw_desc {
            q.push(ClauseKind::OrderBy, Argument::Keyword(Keyword::Desc));
        }
        Ok(())
    }

    fn conditions(
        &mut self,
        q: &mut SqlQuery,
        kind: ClauseKind,
        depth: usize,
        scope: &Scope,
        sub: &mut Option<SqlQuery>,
    ) -> PResult<()> {
        // Some(true) for OR, Some(false) for AND.
        let mut connective: Option<bool> = None;
        loop {
            let cond = self.condition(depth, scope, sub)?;
            push_unique(q, kind, Argument::Cond(cond));
            let is_or = if self.is_kw("and") {
                false
            } else if self.is_kw("or") {
                true
            } else {
                break;
            };
            if connective.is_some_and(|c| c != is_or) {
                return Err(self.error("mixed AND/OR connectives in one clause are not supported"));
            }
            connective = Some(is_or);
            self.pos += 1;
        }
        if connective == Some(true) {
            q.push(kind, Argument::Keyword(Keyword::Or));
        }
        Ok(())
    }

    fn condition(&mut self, depth: usize, scope: &Scope, sub: &mut Option<SqlQuery>) -> PResult<Condition> {
        if self.is_kw("not") {
            return Err(self.error("prefix NOT is not supported"));
        }
        let lhs = self.agg_expr()?;
        let op = self.cmp_op()?;
        let rhs = if op == CmpOp::Between {
            let lo = self.literal()?;
            self.expect_kw("and")?;
            let hi = self.literal()?;
            Operand::Range(lo, hi)
        } else if self.is_sym("(") && self.is_kw_at(1, "select") {
            if depth > 0 {
                return Err(self.error("nested subqueries deeper than one level are not supported"));
            }
            if sub.is_some() {
                return Err(self.error("at most one subquery is supported"));
            }
            self.pos += 1;
            let s = self.select(depth + 1, Some(scope))?;
            self.expect_sym(")")?;
            *sub = Some(s);
            Operand::Subquery(SubRef(0))
        } else if matches!(op, CmpOp::In | CmpOp::NotIn) {
            return Err(self.error("IN expects a subquery"));
        } else if matches!(self.peek(), Some(Tok::Num(_)) | Some(Tok::Str(_)))
            || (self.is_sym("-") && matches!(self.peek_at(1), Some(Tok::Num(_))))
        {
            Operand::Value(self.literal()?)
        } else {
            let c = self.column()?;
            Operand::Column(c)
        };
        Ok(Condition { lhs, op, rhs })
    }

    fn cmp_op(&mut self) -> PResult<CmpOp> {
        let op = match self.peek() {
            Some(Tok::Sym("=")) => CmpOp::Eq,
            Some(Tok::Sym("!=")) | Some(Tok::Sym("<>")) => CmpOp::Ne,
            Some(Tok::Sym(">")) => CmpOp::Gt,
            Some(Tok::Sym("<")) => CmpOp::Lt,
            Some(Tok::Sym(">=")) => CmpOp::Ge,
            Some(Tok::Sym("<=")) => CmpOp::Le,
            Some(Tok::Ident(s)) if s.eq_ignore_ascii_case("like") => CmpOp::Like,
            Some(Tok::Ident(s)) if s.eq_ignore_ascii_case("in") => CmpOp::In,
            Some(Tok::Ident(s)) if s.eq_ignore_ascii_case("between") => CmpOp::Between,
            Some(Tok::Ident(s)) if s.eq_ignore_ascii_case("not") => {
                let op = if self.is_kw_at(1, "like") {
                    CmpOp::NotLike
                } else if self.is_kw_at(1, "in") {
                    CmpOp::NotIn
                } else {
                    return Err(self.error("expected LIKE or IN after NOT"));
                };
                self.pos += 2;
                return Ok(op);
            }
            _ => return Err(self.error("expected comparison operator")),
        };
        self.pos += 1;
        Ok(op)
    }

    fn literal(&mut self) -> PResult<Literal> {
        let negative = self.eat_sym("-");
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Literal::number(&if negative { format!("-{n}") } else { n }))
            }
            Some(Tok::Str(s)) if !negative => {
                self.pos += 1;
                Ok(Literal::Text(s))
            }
            _ => Err(self.error("expected literal value")),
        }
    }

    fn agg_expr(&mut self) -> PResult<AggExpr> {
        if let Some(Tok::Ident(name)) = self.peek() {
            if let Some(agg) = Agg::from_keyword(name) {
                if matches!(self.peek_at(1), Some(Tok::Sym("("))) {
                    self.pos += 2;
                    let distinct = self.eat_kw("distinct");
                    let unit = self.val_unit()?;
                    self.expect_sym(")")?;
                    return Ok(AggExpr {
                        agg: Some(agg),
                        distinct,
                        unit,
                    });
                }
            }
        }
        Ok(AggExpr {
            agg: None,
            distinct: false,
            unit: self.val_unit()?,
        })
    }

    fn val_unit(&mut self) -> PResult<ValUnit> {
        let left = self.column()?;
        let op = match self.peek() {
            Some(Tok::Sym("+")) => Some(ArithOp::Add),
            Some(Tok::Sym("-")) => Some(ArithOp::Sub),
            Some(Tok::Sym("/")) => Some(ArithOp::Div),
            Some(Tok::Sym("*")) if matches!(self.peek_at(1), Some(Tok::Ident(_))) => Some(ArithOp::Mul),
            _ => None,
        };
        match op {
            Some(op) => {
                self.pos += 1;
                let right = self.column()?;
                Ok(ValUnit::Arith { op, left, right })
            }
            None => Ok(ValUnit::Column(left)),
        }
    }

    /// A column as written; the table slot holds the qualifier (or is empty).
    fn column(&mut self) -> PResult<Column> {
        if self.eat_sym("*") {
            return Ok(Column::Star);
        }
        let first = self.ident()?;
        if self.eat_sym(".") {
            if self.is_sym("*") {
                return Err(self.error("qualified `*` is not supported"));
            }
            let second = self.ident()?;
            Ok(Column::named(first, second))
        } else {
            Ok(Column::named("", first))
        }
    }

    fn resolve_column(&self, c: Column, scope: &Scope, outer: Option<&Scope>) -> PResult<Column> {
        let Column::Named { table: qual, column } = c else {
            return Ok(Column::Star);
        };
        let schema = self.schema;
        let find = |table: &str| -> Option<Column> {
            let t = schema.table(table)?;
            t.column(&column).map(|c| Column::named(&t.name, c))
        };
        if !qual.is_empty() {
            let table = scope
                .lookup(&qual)
                .or_else(|| outer.and_then(|o| o.lookup(&qual)))
                .ok_or_else(|| ParseError::Resolution(format!("unknown table or alias `{qual}`")))?;
            return find(table)
                .ok_or_else(|| ParseError::Resolution(format!("unknown column `{column}` in table `{table}`")));
        }
        for s in std::iter::once(scope).chain(outer) {
            let hits: Vec<Column> = s.tables.iter().filter_map(|t| find(t)).collect();
            match hits.len() {
                0 => continue,
                1 => return Ok(hits.into_iter().next().unwrap()),
                _ => {
                    return Err(ParseError::Resolution(format!(
                        "ambiguous column `{column}` (candidates: {})",
                        hits.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
                    )))
                }
            }
        }
        Err(ParseError::Resolution(format!("unknown column `{column}`")))
    }

    fn resolve_expr(&self, e: &mut AggExpr, scope: &Scope, outer: Option<&Scope>) -> PResult<()> {
        match &mut e.unit {
            ValUnit::Column(c) => *c = self.resolve_column(c.clone(), scope, outer)?,
            ValUnit::Arith { left, right, .. } => {
                *left = self.resolve_column(left.clone(), scope, outer)?;
                *right = self.resolve_column(right.clone(), scope, outer)?;
            }
        }
        Ok(())
    }

    fn resolve(&self, q: &mut SqlQuery, scope: &Scope, outer: Option<&Scope>) -> PResult<()> {
        for kind in [
            ClauseKind::Select,
            ClauseKind::Where,
            ClauseKind::GroupBy,
            ClauseKind::Having,
            ClauseKind::OrderBy,
        ] {
            let mut args = std::mem::take(q.args_mut(kind));
            for arg in &mut args {
                match arg {
                    Argument::Expr(e) => self.resolve_expr(e, scope, outer)?,
                    Argument::Column(c) => *c = self.resolve_column(c.clone(), scope, outer)?,
                    Argument::Cond(cond) => {
                        self.resolve_expr(&mut cond.lhs, scope, outer)?;
                        if let Operand::Column(c) = &mut cond.rhs {
                            *c = self.resolve_column(c.clone(), scope, outer)?;
                        }
                    }
                    _ => {}
                }
            }
            let mut deduped: Vec<Argument> = Vec::with_capacity(args.len());
            for a in args {
                if !deduped.iter().any(|d| d.match_key(kind) == a.match_key(kind)) {
                    deduped.push(a);
                }
            }
            // Drop a connective marker left with fewer than two conditions.
            if deduped.iter().filter(|a| matches!(a, Argument::Cond(_))).count() < 2 {
                deduped.retain(|a| a.as_keyword() != Some(Keyword::Or));
            }
            q.set_args(kind, deduped);
        }
        Ok(())
    }
}

fn push_unique(q: &mut SqlQuery, kind: ClauseKind, arg: Argument) {
    let key = arg.match_key(kind);
    if !q.args(kind).iter().any(|a| a.match_key(kind) == key) {
        q.push(kind, arg);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::Table;

    fn schema() -> Schema {
        let t = |n: &str, cols: &[&str]| Table {
            name: n.into(),
            columns: cols.iter().map(|c| c.to_string()).collect(),
        };
        Schema::new(
            "school",
            vec![
                t("assignments", &["id", "grade"]),
                t("graduates", &["id", "name"]),
                t("t", &["id", "name"]),
            ],
            vec![],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn minimal_query() {
        let q = parse_sql("SELECT id FROM t", &schema()).unwrap();
        assert_eq!(
            q.args(ClauseKind::Select),
            &[Argument::Expr(AggExpr::column(Column::named("t", "id")))]
        );
        assert_eq!(q.args(ClauseKind::From), &[Argument::Table("t".into())]);
        assert_eq!(q.clause_kinds(), vec![ClauseKind::From, ClauseKind::Select]);
    }

    #[test]
    fn grades_example_source_clause_view() {
        let q = parse_sql(
            "SELECT id, MAX(grade) FROM assignments WHERE grade > 20 AND id NOT IN (SELECT id from graduates) GROUP BY id",
            &schema(),
        )
        .unwrap();
        let shown: Vec<String> = q.args(ClauseKind::Where).iter().map(ToString::to_string).collect();
        assert_eq!(shown, ["assignments.grade > 20", "assignments.id not in SUBS1"]);
        let sel: Vec<String> = q.args(ClauseKind::Select).iter().map(ToString::to_string).collect();
        assert_eq!(sel, ["assignments.id", "max(assignments.grade)"]);
        assert_eq!(q.args(ClauseKind::GroupBy).len(), 1);
        let sub = q.subquery().unwrap();
        assert_eq!(sub.args(ClauseKind::Select)[0].to_string(), "graduates.id");
    }

    #[test]
    fn aliases_resolve_to_tables() {
        let q = parse_sql(
            "SELECT T1.grade FROM assignments AS T1 JOIN graduates AS T2 ON T1.id = T2.id WHERE T2.name = 'x'",
            &schema(),
        )
        .unwrap();
        let from: Vec<String> = q.args(ClauseKind::From).iter().map(ToString::to_string).collect();
        assert_eq!(from, ["assignments", "graduates", "assignments.id = graduates.id"]);
    }

    #[test]
    fn ambiguous_and_unknown_columns_are_errors() {
        let s = schema();
        assert!(matches!(
            parse_sql("SELECT id FROM assignments JOIN graduates", &s),
            Err(ParseError::Resolution(m)) if m.contains("ambiguous")
        ));
        assert!(matches!(
            parse_sql("SELECT nope FROM t", &s),
            Err(ParseError::Resolution(_))
        ));
        assert!(matches!(
            parse_sql("SELECT id FROM nope", &s),
            Err(ParseError::Resolution(_))
        ));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_sql("SELECT id FROM t WHERE", &schema()) {
            Err(ParseError::Syntax { position, .. }) => assert_eq!(position, 22),
            other => panic!("{other:?}"),
        }
        match parse_sql("SELECT id t", &schema()) {
            Err(ParseError::Syntax { position, .. }) => assert_eq!(position, 10),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn one_nesting_level_only() {
        let s = schema();
        let deep = "SELECT id FROM t WHERE id IN (SELECT id FROM graduates WHERE id IN (SELECT id FROM t))";
        assert!(matches!(parse_sql(deep, &s), Err(ParseError::Syntax { .. })));
        let two = "SELECT id FROM t WHERE id IN (SELECT id FROM graduates) UNION SELECT id FROM t";
        assert!(matches!(parse_sql(two, &s), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn order_by_direction_and_connectives() {
        let s = schema();
        let q = parse_sql(
            "SELECT name FROM t WHERE id = 1 OR name = 'x' ORDER BY name DESC LIMIT 3",
            &s,
        )
        .unwrap();
        assert!(q.has_keyword(ClauseKind::Where, Keyword::Or));
        assert!(q.has_keyword(ClauseKind::OrderBy, Keyword::Desc));
        assert_eq!(q.limit(), Some(3));
        assert!(parse_sql("SELECT name FROM t WHERE id = 1 OR id = 2 AND id = 3", &s).is_err());
        assert!(parse_sql("SELECT name FROM t ORDER BY id ASC, name DESC", &s).is_err());
    }

    #[test]
    fn between_and_strings() {
        let q = parse_sql(
            r#"SELECT name FROM t WHERE id BETWEEN 1 AND 5.0 AND name LIKE "%a%""#,
            &schema(),
        )
        .unwrap();
        let shown: Vec<String> = q.args(ClauseKind::Where).iter().map(ToString::to_string).collect();
        assert_eq!(shown, ["t.id between 1 and 5", "t.name like '%a%'"]);
    }

    #[test]
    fn duplicate_arguments_collapse() {
        let q = parse_sql("SELECT id, id FROM t", &schema()).unwrap();
        assert_eq!(q.args(ClauseKind::Select).len(), 1);
    }
}
