//! Hand-written lexer and recursive-descent parser for the supported SQL
//! subset:
//!
//! ```text
//! SELECT item [, item]*          item: column | agg | CASE-in-SUM, optional alias
//! FROM t1 [, t2]*                comma joins; equi-join conditions recovered from WHERE
//! [WHERE pred]                   AND/OR/NOT over comparisons
//! [GROUP BY cols] [ORDER BY keys [ASC|DESC]] [LIMIT n]
//! ```
//!
//! Identifiers and keywords are case-insensitive; identifiers are lowercased.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::plan::{
    canonicalize, AggFunc, AggSpec, Catalog, CompareOp, PlanNode, ScalarExpr, SortKey,
};

const KEYWORDS: &[&str] = &[
    "select", "from", "where", "and", "or", "not", "group", "by", "order", "asc", "desc",
    "limit", "as", "sum", "count", "min", "max", "case", "when", "then", "else", "end", "null",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Float(f64),
    Str(String),
    Symbol(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(sql: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut line = 1usize;
    let mut column = 1usize;
    let chars: Vec<char> = sql.chars().collect();
    let mut i = 0;
    let err = |line: usize, column: usize, message: String| Error::Syntax {
        line,
        column,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, column);
        let mut advance = |i: &mut usize, line: &mut usize, column: &mut usize| {
            if chars[*i] == '\n' {
                *line += 1;
                *column = 1;
            } else {
                *column += 1;
            }
            *i += 1;
        };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut column);
            continue;
        }
        if c == '-' && i + 1 < chars.len() && chars[i + 1] == '-' {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut column);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                word.push(chars[i]);
                advance(&mut i, &mut line, &mut column);
            }
            tokens.push(Token {
                tok: Tok::Ident(word.to_ascii_lowercase()),
                line: tline,
                column: tcol,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let mut num = String::new();
            let mut is_float = false;
            while i < chars.len()
                && (chars[i].is_ascii_digit() || (chars[i] == '.' && !is_float))
            {
                if chars[i] == '.' {
                    // require a digit after the dot
                    if i + 1 >= chars.len() || !chars[i + 1].is_ascii_digit() {
                        break;
                    }
                    is_float = true;
                }
                num.push(chars[i]);
                advance(&mut i, &mut line, &mut column);
            }
            let tok = if is_float {
                Tok::Float(num.parse().map_err(|_| {
                    err(tline, tcol, format!("bad numeric literal `{num}`"))
                })?)
            } else {
                Tok::Int(num.parse().map_err(|_| {
                    err(tline, tcol, format!("bad numeric literal `{num}`"))
                })?)
            };
            tokens.push(Token {
                tok,
                line: tline,
                column: tcol,
            });
            continue;
        }
        if c == '\'' {
            advance(&mut i, &mut line, &mut column);
            let mut s = String::new();
            let mut closed = false;
            while i < chars.len() {
                if chars[i] == '\'' {
                    // '' escapes a quote
                    if i + 1 < chars.len() && chars[i + 1] == '\'' {
                        s.push('\'');
                        advance(&mut i, &mut line, &mut column);
                        advance(&mut i, &mut line, &mut column);
                        continue;
                    }
                    advance(&mut i, &mut line, &mut column);
                    closed = true;
                    break;
                }
                s.push(chars[i]);
                advance(&mut i, &mut line, &mut column);
            }
            if !closed {
                return Err(err(tline, tcol, "unterminated string literal".into()));
            }
            tokens.push(Token {
                tok: Tok::Str(s),
                line: tline,
                column: tcol,
            });
            continue;
        }
        let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let symbol = match two.as_str() {
            "!=" | "<>" => Some("!="),
            "<=" => Some("<="),
            ">=" => Some(">="),
            _ => None,
        };
        if let Some(sym) = symbol {
            advance(&mut i, &mut line, &mut column);
            advance(&mut i, &mut line, &mut column);
            tokens.push(Token {
                tok: Tok::Symbol(sym),
                line: tline,
                column: tcol,
            });
            continue;
        }
        let sym = match c {
            ',' => ",",
            '(' => "(",
            ')' => ")",
            '=' => "=",
            '<' => "<",
            '>' => ">",
            '*' => "*",
            '-' => "-",
            _ => {
                return Err(err(tline, tcol, format!("unexpected character `{c}`")));
            }
        };
        advance(&mut i, &mut line, &mut column);
        tokens.push(Token {
            tok: Tok::Symbol(sym),
            line: tline,
            column: tcol,
        });
    }
    tokens.push(Token {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(tokens)
}

#[derive(Debug, Clone)]
enum SelectItem {
    Column { name: String },
    Aggregate(AggSpec),
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    catalog: &'a Catalog,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos.min(self.tokens.len() - 1)].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let t = self.peek();
        Error::Syntax {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(w) if w == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<()> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{}`", kw.to_ascii_uppercase())))
        }
    }

    fn eat_symbol(&mut self, sym: &str) -> bool {
        if matches!(&self.peek().tok, Tok::Symbol(s) if *s == sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_symbol(&mut self, sym: &str) -> Result<()> {
        if self.eat_symbol(sym) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{sym}`")))
        }
    }

    fn expect_ident(&mut self) -> Result<String> {
        match &self.peek().tok {
            Tok::Ident(w) if !KEYWORDS.contains(&w.as_str()) => {
                let w = w.clone();
                self.bump();
                Ok(w)
            }
            Tok::Ident(w) => Err(self.error(format!("`{w}` is a reserved word"))),
            _ => Err(self.error("expected identifier")),
        }
    }

    // -- expressions ------------------------------------------------------

    fn parse_predicate(&mut self) -> Result<ScalarExpr> {
        self.parse_or()
    }

    fn parse_or(&mut self) -> Result<ScalarExpr> {
        let mut parts = vec![self.parse_and()?];
        while self.eat_keyword("or") {
            parts.push(self.parse_and()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            ScalarExpr::Or(parts)
        })
    }

    fn parse_and(&mut self) -> Result<ScalarExpr> {
        let mut parts = vec![self.parse_not()?];
        while self.eat_keyword("and") {
            parts.push(self.parse_not()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            ScalarExpr::And(parts)
        })
    }

    fn parse_not(&mut self) -> Result<ScalarExpr> {
        if self.eat_keyword("not") {
            return Ok(ScalarExpr::Not(Box::new(self.parse_not()?)));
        }
        self.parse_comparison()
    }

    fn parse_comparison(&mut self) -> Result<ScalarExpr> {
        if self.eat_symbol("(") {
            let inner = self.parse_predicate()?;
            self.expect_symbol(")")?;
            return Ok(inner);
        }
        let lhs = self.parse_operand()?;
        let op = match &self.peek().tok {
            Tok::Symbol("=") => CompareOp::Eq,
            Tok::Symbol("!=") => CompareOp::Ne,
            Tok::Symbol("<") => CompareOp::Lt,
            Tok::Symbol("<=") => CompareOp::Le,
            Tok::Symbol(">") => CompareOp::Gt,
            Tok::Symbol(">=") => CompareOp::Ge,
            _ => return Err(self.error("expected comparison operator")),
        };
        self.bump();
        let rhs = self.parse_operand()?;
        Ok(ScalarExpr::compare(op, lhs, rhs))
    }

    fn parse_operand(&mut self) -> Result<ScalarExpr> {
        if self.eat_symbol("-") {
            return match self.bump().tok {
                Tok::Int(v) => Ok(ScalarExpr::int(-v)),
                Tok::Float(v) => Ok(ScalarExpr::float(-v)),
                _ => Err(self.error("expected numeric literal after `-`")),
            };
        }
        match self.peek().tok.clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(ScalarExpr::int(v))
            }
            Tok::Float(v) => {
                self.bump();
                Ok(ScalarExpr::float(v))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(ScalarExpr::string(s))
            }
            Tok::Ident(_) => Ok(ScalarExpr::col(self.expect_ident()?)),
            _ => Err(self.error("expected column or literal")),
        }
    }

    // -- select list ------------------------------------------------------

    fn parse_select_item(&mut self) -> Result<SelectItem> {
        let func = ["sum", "count", "min", "max"]
            .iter()
            .find(|f| self.at_keyword(f))
            .copied();
        if let Some(func) = func {
            self.bump();
            self.expect_symbol("(")?;
            let func = match func {
                "sum" => AggFunc::Sum,
                "count" => AggFunc::Count,
                "min" => AggFunc::Min,
                _ => AggFunc::Max,
            };
            let (column, filter) = if self.eat_symbol("*") {
                if func != AggFunc::Count {
                    return Err(self.error("`*` is only valid inside COUNT"));
                }
                (None, None)
            } else if self.at_keyword("case") {
                if func != AggFunc::Sum {
                    return Err(self.error("CASE WHEN is only supported inside SUM"));
                }
                self.bump();
                self.expect_keyword("when")?;
                let cond = self.parse_predicate()?;
                self.expect_keyword("then")?;
                let column = self.expect_ident()?;
                if self.eat_keyword("else") {
                    self.expect_keyword("null")?;
                }
                self.expect_keyword("end")?;
                (Some(column), Some(cond))
            } else {
                (Some(self.expect_ident()?), None)
            };
            self.expect_symbol(")")?;
            let alias = self.parse_alias()?;
            let output = alias.unwrap_or_else(|| match &column {
                Some(c) => format!("{func}_{c}"),
                None => format!("{func}_all"),
            });
            return Ok(SelectItem::Aggregate(AggSpec {
                func,
                column,
                filter,
                output,
            }));
        }
        let name = self.expect_ident()?;
        // An alias on a plain column is accepted and dropped: the projection
        // keeps the source column name.
        let _ = self.parse_alias()?;
        Ok(SelectItem::Column { name })
    }

    fn parse_alias(&mut self) -> Result<Option<String>> {
        if self.eat_keyword("as") {
            return Ok(Some(self.expect_ident()?));
        }
        if let Tok::Ident(w) = &self.peek().tok {
            if !KEYWORDS.contains(&w.as_str()) {
                return Ok(Some(self.expect_ident()?));
            }
        }
        Ok(None)
    }

    // -- statement --------------------------------------------------------

    fn parse_query(&mut self) -> Result<PlanNode> {
        self.expect_keyword("select")?;
        let mut items = vec![self.parse_select_item()?];
        while self.eat_symbol(",") {
            items.push(self.parse_select_item()?);
        }
        self.expect_keyword("from")?;
        let mut tables = vec![self.expect_ident()?];
        while self.eat_symbol(",") {
            tables.push(self.expect_ident()?);
        }
        let predicate = if self.eat_keyword("where") {
            Some(self.parse_predicate()?)
        } else {
            None
        };
        let mut group_by = Vec::new();
        if self.eat_keyword("group") {
            self.expect_keyword("by")?;
            group_by.push(self.expect_ident()?);
            while self.eat_symbol(",") {
                group_by.push(self.expect_ident()?);
            }
        }
        let mut order_by = Vec::new();
        if self.eat_keyword("order") {
            self.expect_keyword("by")?;
            loop {
                let column = self.expect_ident()?;
                let descending = if self.eat_keyword("desc") {
                    true
                } else {
                    self.eat_keyword("asc");
                    false
                };
                order_by.push(SortKey { column, descending });
                if !self.eat_symbol(",") {
                    break;
                }
            }
        }
        let limit = if self.eat_keyword("limit") {
            match self.bump().tok {
                Tok::Int(v) if v >= 0 => Some(v as u64),
                _ => return Err(self.error("expected row count after LIMIT")),
            }
        } else {
            None
        };
        if self.peek().tok != Tok::Eof {
            return Err(self.error("unexpected trailing input"));
        }
        self.build_plan(items, tables, predicate, group_by, order_by, limit)
    }

    fn build_plan(
        &self,
        items: Vec<SelectItem>,
        tables: Vec<String>,
        predicate: Option<ScalarExpr>,
        group_by: Vec<String>,
        order_by: Vec<SortKey>,
        limit: Option<u64>,
    ) -> Result<PlanNode> {
        // Resolve the scope: every column name maps to exactly one table.
        let mut scope: BTreeMap<String, String> = BTreeMap::new();
        for table in &tables {
            if tables.iter().filter(|t| *t == table).count() > 1 {
                return Err(Error::InvalidConfig(format!(
                    "table `{table}` listed twice in FROM"
                )));
            }
            let schema = self.catalog.table(table)?;
            for name in schema.names() {
                if scope.contains_key(name) {
                    return Err(Error::AmbiguousColumn(name.to_string()));
                }
                scope.insert(name.to_string(), table.clone());
            }
        }
        let resolve = |name: &str| -> Result<String> {
            scope
                .get(name)
                .cloned()
                .ok_or_else(|| Error::UnknownColumn(name.to_string()))
        };

        // Split the WHERE clause: cross-table equality conjuncts become join
        // conditions, everything else stays as a filter.
        let mut join_conds: Vec<(String, String, ScalarExpr)> = Vec::new();
        let mut residue: Vec<ScalarExpr> = Vec::new();
        if let Some(pred) = &predicate {
            for col in pred.columns() {
                resolve(&col)?;
            }
            let conjuncts: Vec<ScalarExpr> = match pred {
                ScalarExpr::And(cs) => cs.clone(),
                other => vec![other.clone()],
            };
            for conj in conjuncts {
                if let ScalarExpr::Compare {
                    op: CompareOp::Eq,
                    lhs,
                    rhs,
                } = &conj
                {
                    if let (ScalarExpr::Column(a), ScalarExpr::Column(b)) =
                        (lhs.as_ref(), rhs.as_ref())
                    {
                        let ta = resolve(a)?;
                        let tb = resolve(b)?;
                        if ta != tb {
                            join_conds.push((ta, tb, canonicalize(&conj)));
                            continue;
                        }
                    }
                }
                residue.push(conj);
            }
        }

        // Left-deep join tree in FROM order; the first unused equi-join
        // predicate linking the accumulated side to the new table becomes
        // the join condition, otherwise a Cartesian product.
        let mut joined: Vec<String> = vec![tables[0].clone()];
        let mut node = PlanNode::scan(tables[0].clone());
        let mut used = vec![false; join_conds.len()];
        for table in &tables[1..] {
            let mut found = None;
            for (i, (ta, tb, cond)) in join_conds.iter().enumerate() {
                if used[i] {
                    continue;
                }
                let links = (joined.contains(ta) && tb == table)
                    || (joined.contains(tb) && ta == table);
                if links {
                    found = Some((i, cond.clone()));
                    break;
                }
            }
            let right = PlanNode::scan(table.clone());
            node = match found {
                Some((i, cond)) => {
                    used[i] = true;
                    PlanNode::join(cond, node, right)
                }
                None => PlanNode::CartesianProduct {
                    left: Box::new(node),
                    right: Box::new(right),
                },
            };
            joined.push(table.clone());
        }
        // Leftover join candidates (e.g. a second equality between two
        // already-joined tables) fall back to filters.
        for (i, (_, _, cond)) in join_conds.iter().enumerate() {
            if !used[i] {
                residue.push(cond.clone());
            }
        }
        if !residue.is_empty() {
            let pred = if residue.len() == 1 {
                residue.pop().unwrap()
            } else {
                ScalarExpr::And(residue)
            };
            node = PlanNode::filter(canonicalize(&pred), node);
        }

        // Aggregation.
        let mut aggregates: Vec<AggSpec> = Vec::new();
        let mut plain: Vec<String> = Vec::new();
        for item in &items {
            match item {
                SelectItem::Aggregate(spec) => {
                    let mut spec = spec.clone();
                    if let Some(f) = &spec.filter {
                        spec.filter = Some(canonicalize(f));
                    }
                    let base = spec.output.clone();
                    let mut n = 1;
                    while aggregates.iter().any(|a| a.output == spec.output) {
                        n += 1;
                        spec.output = format!("{base}_{n}");
                    }
                    aggregates.push(spec);
                }
                SelectItem::Column { name } => {
                    resolve(name)?;
                    if !plain.contains(name) {
                        plain.push(name.clone());
                    }
                }
            }
        }
        let has_agg = !aggregates.is_empty() || !group_by.is_empty();
        if has_agg {
            for g in &group_by {
                resolve(g)?;
            }
            for p in &plain {
                if !group_by.contains(p) {
                    return Err(Error::InvalidConfig(format!(
                        "column `{p}` must appear in GROUP BY"
                    )));
                }
            }
            for spec in &aggregates {
                if let Some(c) = &spec.column {
                    resolve(c)?;
                }
                if let Some(f) = &spec.filter {
                    for col in f.columns() {
                        resolve(&col)?;
                    }
                }
            }
            node = PlanNode::Aggregate {
                group_by: group_by.clone(),
                aggregates: aggregates.clone(),
                input: Box::new(node),
            };
        }

        // Output projection in SELECT order.
        let mut out_cols: Vec<String> = Vec::new();
        for item in &items {
            let name = match item {
                SelectItem::Column { name } => name.clone(),
                SelectItem::Aggregate(spec) => spec.output.clone(),
            };
            if !out_cols.contains(&name) {
                out_cols.push(name);
            }
        }
        node = PlanNode::Project {
            columns: out_cols.clone(),
            input: Box::new(node),
        };

        if !order_by.is_empty() {
            for key in &order_by {
                if !out_cols.contains(&key.column) {
                    return Err(Error::UnknownColumn(format!(
                        "{} (ORDER BY keys must appear in the SELECT list)",
                        key.column
                    )));
                }
            }
            node = PlanNode::Sort {
                keys: order_by,
                input: Box::new(node),
            };
        }
        if let Some(n) = limit {
            node = PlanNode::Limit {
                n,
                input: Box::new(node),
            };
        }
        Ok(node)
    }
}

/// Parses a single SELECT statement into an unoptimized plan rooted at the
/// output projection (with Sort/Limit above it when present).
pub fn parse_statement(sql: &str, catalog: &Catalog) -> Result<PlanNode> {
    let tokens = lex(sql)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        catalog,
    };
    parser.parse_query()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{output_schema, DataType, Schema};

    fn hr_catalog() -> Catalog {
        Catalog::default()
            .with_table(
                "employees",
                Schema::new(vec![
                    ("id".into(), DataType::Int64),
                    ("name".into(), DataType::Utf8),
                    ("dep".into(), DataType::Int64),
                    ("age".into(), DataType::Int64),
                    ("gender".into(), DataType::Utf8),
                ])
                .unwrap(),
            )
            .with_table(
                "salaries",
                Schema::new(vec![
                    ("emp_id".into(), DataType::Int64),
                    ("salary".into(), DataType::Int64),
                    ("from_date".into(), DataType::Int64),
                ])
                .unwrap(),
            )
            .with_table(
                "people",
                Schema::new(vec![
                    ("name2".into(), DataType::Utf8),
                    ("age2".into(), DataType::Int64),
                ])
                .unwrap(),
            )
    }

    #[test]
    fn minimal_query() {
        let catalog = hr_catalog();
        let plan = parse_statement("SELECT name2 FROM people", &catalog).unwrap();
        assert_eq!(
            plan,
            PlanNode::project(vec!["name2"], PlanNode::scan("people"))
        );
    }

    #[test]
    fn implicit_join_extracted_from_where() {
        let catalog = hr_catalog();
        let plan = parse_statement(
            "SELECT id, name, salary, from_date FROM employees, salaries \
             WHERE id = emp_id AND age > 30 AND salary > 30000",
            &catalog,
        )
        .unwrap();
        // Project over Filter over Join(employees, salaries, id=emp_id)
        match &plan {
            PlanNode::Project { input, columns } => {
                assert_eq!(columns, &["id", "name", "salary", "from_date"]);
                match input.as_ref() {
                    PlanNode::Filter { input, .. } => match input.as_ref() {
                        PlanNode::Join {
                            condition,
                            left,
                            right,
                            ..
                        } => {
                            assert_eq!(
                                condition.canonical_string(),
                                "(= col:emp_id col:id)"
                            );
                            assert_eq!(**left, PlanNode::scan("employees"));
                            assert_eq!(**right, PlanNode::scan("salaries"));
                        }
                        other => panic!("expected Join, got {}", other.label()),
                    },
                    other => panic!("expected Filter, got {}", other.label()),
                }
            }
            other => panic!("expected Project, got {}", other.label()),
        }
        let schema = output_schema(&plan, &catalog).unwrap();
        assert_eq!(
            schema.names().collect::<Vec<_>>(),
            vec!["id", "name", "salary", "from_date"]
        );
    }

    #[test]
    fn syntax_error_has_position() {
        let catalog = hr_catalog();
        match parse_statement("SELEC x FROM t", &catalog) {
            Err(Error::Syntax { line, column, .. }) => {
                assert_eq!(line, 1);
                assert_eq!(column, 1);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_table_and_column() {
        let catalog = hr_catalog();
        assert!(matches!(
            parse_statement("SELECT x FROM missing", &catalog),
            Err(Error::UnknownTable(_))
        ));
        assert!(matches!(
            parse_statement("SELECT missing_col FROM people", &catalog),
            Err(Error::UnknownColumn(_))
        ));
    }

    #[test]
    fn aggregates_with_case_when() {
        let catalog = Catalog::default().with_table(
            "sales",
            Schema::new(vec![
                ("day".into(), DataType::Utf8),
                ("price".into(), DataType::Float64),
                ("store".into(), DataType::Utf8),
            ])
            .unwrap(),
        );
        let plan = parse_statement(
            "SELECT store, sum(case when (day = 'Sunday') then price else null end) sun_sales, \
             count(*) AS cnt FROM sales GROUP BY store ORDER BY store LIMIT 10",
            &catalog,
        )
        .unwrap();
        let schema = output_schema(&plan, &catalog).unwrap();
        assert_eq!(
            schema.columns,
            vec![
                ("store".into(), DataType::Utf8),
                ("sun_sales".into(), DataType::Float64),
                ("cnt".into(), DataType::Int64),
            ]
        );
        match &plan {
            PlanNode::Limit { n, input } => {
                assert_eq!(*n, 10);
                assert!(matches!(input.as_ref(), PlanNode::Sort { .. }));
            }
            other => panic!("expected Limit at root, got {}", other.label()),
        }
    }

    #[test]
    fn negative_literals_parse() {
        let catalog = Catalog::default().with_table(
            "store",
            Schema::new(vec![
                ("s_gmt_offset".into(), DataType::Int64),
                ("s_store_name".into(), DataType::Utf8),
            ])
            .unwrap(),
        );
        let plan = parse_statement(
            "SELECT s_store_name FROM store WHERE s_gmt_offset = -5",
            &catalog,
        )
        .unwrap();
        assert!(output_schema(&plan, &catalog).is_ok());
    }

    #[test]
    fn non_grouped_column_rejected() {
        let catalog = hr_catalog();
        assert!(parse_statement(
            "SELECT name, sum(age) FROM employees GROUP BY gender",
            &catalog
        )
        .is_err());
    }

    #[test]
    fn statement_splitting_respects_strings() {
        let text = "SELECT a FROM t WHERE s = 'x;y';\nSELECT b FROM t";
        let stmts = crate::sql::split_statements(text);
        assert_eq!(stmts.len(), 2);
        assert!(stmts[0].contains("x;y"));
    }
}
