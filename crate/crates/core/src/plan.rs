//! Logical plan IR: relational operator trees, scalar expressions, schemas
//! and schema inference. Plans are immutable values; every optimizer stage
//! builds new trees instead of mutating shared nodes.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Schemas and values
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DataType {
    Int64,
    Float64,
    Utf8,
}

impl DataType {
    pub fn is_numeric(self) -> bool {
        matches!(self, DataType::Int64 | DataType::Float64)
    }
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DataType::Int64 => "Int64",
            DataType::Float64 => "Float64",
            DataType::Utf8 => "Utf8",
        };
        f.write_str(s)
    }
}

/// Ordered list of named, typed columns. Names are unique and the list is
/// non-empty for any schema produced by inference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<(String, DataType)>,
}

impl Schema {
    pub fn new(columns: Vec<(String, DataType)>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::SchemaMismatch("schema must be non-empty".into()));
        }
        for (i, (name, _)) in columns.iter().enumerate() {
            if columns[..i].iter().any(|(n, _)| n == name) {
                return Err(Error::SchemaMismatch(format!(
                    "duplicate column `{name}`"
                )));
            }
        }
        Ok(Schema { columns })
    }

    pub fn field(&self, name: &str) -> Option<(usize, DataType)> {
        self.columns
            .iter()
            .position(|(n, _)| n == name)
            .map(|i| (i, self.columns[i].1))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.field(name).is_some()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Compact `name:Type,name:Type` rendering used in error messages.
    pub fn describe(&self) -> String {
        self.columns
            .iter()
            .map(|(n, t)| format!("{n}:{t}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// A typed scalar constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Int64(i64),
    Float64(f64),
    Utf8(String),
}

impl Value {
    pub fn dtype(&self) -> DataType {
        match self {
            Value::Int64(_) => DataType::Int64,
            Value::Float64(_) => DataType::Float64,
            Value::Utf8(_) => DataType::Utf8,
        }
    }
}

// ---------------------------------------------------------------------------
// Scalar expressions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }

    /// True when swapping the operands leaves the predicate meaning intact.
    pub fn is_symmetric(self) -> bool {
        matches!(self, CompareOp::Eq | CompareOp::Ne)
    }
}

/// Boolean-valued expression tree used by filter predicates and join
/// conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScalarExpr {
    Column(String),
    Literal(Value),
    Compare {
        op: CompareOp,
        lhs: Box<ScalarExpr>,
        rhs: Box<ScalarExpr>,
    },
    And(Vec<ScalarExpr>),
    Or(Vec<ScalarExpr>),
    Not(Box<ScalarExpr>),
}

impl ScalarExpr {
    pub fn col(name: impl Into<String>) -> Self {
        ScalarExpr::Column(name.into())
    }

    pub fn int(v: i64) -> Self {
        ScalarExpr::Literal(Value::Int64(v))
    }

    pub fn float(v: f64) -> Self {
        ScalarExpr::Literal(Value::Float64(v))
    }

    pub fn string(v: impl Into<String>) -> Self {
        ScalarExpr::Literal(Value::Utf8(v.into()))
    }

    pub fn compare(op: CompareOp, lhs: ScalarExpr, rhs: ScalarExpr) -> Self {
        ScalarExpr::Compare {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn eq(lhs: ScalarExpr, rhs: ScalarExpr) -> Self {
        Self::compare(CompareOp::Eq, lhs, rhs)
    }

    /// The literal `true`, encoded as `1 = 1`. Used when a covering filter
    /// degenerates to pass-through while the node itself must survive.
    pub fn literal_true() -> Self {
        Self::eq(ScalarExpr::int(1), ScalarExpr::int(1))
    }

    pub fn is_literal_true(&self) -> bool {
        self == &Self::literal_true()
    }

    /// Column names referenced anywhere in the expression.
    pub fn columns(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_columns(&mut out);
        out
    }

    fn collect_columns(&self, out: &mut Vec<String>) {
        match self {
            ScalarExpr::Column(name) => {
                if !out.iter().any(|c| c == name) {
                    out.push(name.clone());
                }
            }
            ScalarExpr::Literal(_) => {}
            ScalarExpr::Compare { lhs, rhs, .. } => {
                lhs.collect_columns(out);
                rhs.collect_columns(out);
            }
            ScalarExpr::And(children) | ScalarExpr::Or(children) => {
                for c in children {
                    c.collect_columns(out);
                }
            }
            ScalarExpr::Not(child) => child.collect_columns(out),
        }
    }

    /// Deterministic prefix rendering with type-tagged literals, e.g.
    /// `(and (= col:a i:1) (> col:b f:0.5))`. Equality of these strings is
    /// the expression-equality test used throughout the optimizer, so always
    /// canonicalize first when comparing.
    pub fn canonical_string(&self) -> String {
        match self {
            ScalarExpr::Column(name) => format!("col:{name}"),
            ScalarExpr::Literal(Value::Int64(v)) => format!("i:{v}"),
            ScalarExpr::Literal(Value::Float64(v)) => format!("f:{v}"),
            ScalarExpr::Literal(Value::Utf8(v)) => {
                format!("s:\"{}\"", v.replace('\\', "\\\\").replace('"', "\\\""))
            }
            ScalarExpr::Compare { op, lhs, rhs } => format!(
                "({} {} {})",
                op.symbol(),
                lhs.canonical_string(),
                rhs.canonical_string()
            ),
            ScalarExpr::And(children) => {
                let inner: Vec<_> = children.iter().map(|c| c.canonical_string()).collect();
                format!("(and {})", inner.join(" "))
            }
            ScalarExpr::Or(children) => {
                let inner: Vec<_> = children.iter().map(|c| c.canonical_string()).collect();
                format!("(or {})", inner.join(" "))
            }
            ScalarExpr::Not(child) => format!("(not {})", child.canonical_string()),
        }
    }
}

/// Canonical form: And/Or lists flattened, children sorted by their
/// canonical string, duplicates removed, single-child conjunctions collapsed
/// and symmetric comparisons operand-sorted. Idempotent.
pub fn canonicalize(expr: &ScalarExpr) -> ScalarExpr {
    match expr {
        ScalarExpr::Column(_) | ScalarExpr::Literal(_) => expr.clone(),
        ScalarExpr::Not(child) => ScalarExpr::Not(Box::new(canonicalize(child))),
        ScalarExpr::Compare { op, lhs, rhs } => {
            let mut lhs = canonicalize(lhs);
            let mut rhs = canonicalize(rhs);
            if op.is_symmetric() && lhs.canonical_string() > rhs.canonical_string() {
                std::mem::swap(&mut lhs, &mut rhs);
            }
            ScalarExpr::Compare {
                op: *op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            }
        }
        ScalarExpr::And(children) => canonicalize_list(children, true),
        ScalarExpr::Or(children) => canonicalize_list(children, false),
    }
}

fn canonicalize_list(children: &[ScalarExpr], is_and: bool) -> ScalarExpr {
    let mut flat = Vec::new();
    for child in children {
        let c = canonicalize(child);
        match (is_and, c) {
            (true, ScalarExpr::And(inner)) => flat.extend(inner),
            (false, ScalarExpr::Or(inner)) => flat.extend(inner),
            (_, other) => flat.push(other),
        }
    }
    let mut keyed: Vec<(String, ScalarExpr)> = flat
        .into_iter()
        .map(|c| (c.canonical_string(), c))
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.dedup_by(|a, b| a.0 == b.0);
    let mut flat: Vec<ScalarExpr> = keyed.into_iter().map(|(_, c)| c).collect();
    if flat.len() == 1 {
        return flat.pop().unwrap();
    }
    if is_and {
        ScalarExpr::And(flat)
    } else {
        ScalarExpr::Or(flat)
    }
}

/// Parses the output of [`ScalarExpr::canonical_string`] back to a tree.
/// Used by the plan JSON deserializer.
pub fn parse_canonical_expr(text: &str) -> Result<ScalarExpr> {
    let mut parser = ExprTextParser {
        chars: text.char_indices().collect(),
        pos: 0,
        text,
    };
    let expr = parser.parse_expr()?;
    parser.skip_ws();
    if parser.pos < parser.chars.len() {
        return Err(parser.err("trailing input"));
    }
    Ok(expr)
}

struct ExprTextParser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    text: &'a str,
}

impl<'a> ExprTextParser<'a> {
    fn err(&self, message: &str) -> Error {
        Error::SchemaMismatch(format!(
            "bad canonical expression `{}` at offset {}: {message}",
            self.text,
            self.chars.get(self.pos).map(|(i, _)| *i).unwrap_or(0)
        ))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|(_, c)| *c)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while self.peek() == Some(' ') {
            self.pos += 1;
        }
    }

    fn parse_expr(&mut self) -> Result<ScalarExpr> {
        self.skip_ws();
        match self.peek() {
            Some('(') => self.parse_compound(),
            Some(_) => self.parse_atom(),
            None => Err(self.err("unexpected end")),
        }
    }

    fn parse_compound(&mut self) -> Result<ScalarExpr> {
        self.bump(); // '('
        let head = self.take_until(|c| c == ' ' || c == ')');
        let mut args = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(')') => {
                    self.bump();
                    break;
                }
                Some(_) => args.push(self.parse_expr()?),
                None => return Err(self.err("unclosed `(`")),
            }
        }
        match head.as_str() {
            "and" | "or" => {
                if args.len() < 2 {
                    return Err(self.err("and/or need at least two children"));
                }
                if head == "and" {
                    Ok(ScalarExpr::And(args))
                } else {
                    Ok(ScalarExpr::Or(args))
                }
            }
            "not" => {
                if args.len() != 1 {
                    return Err(self.err("not takes one child"));
                }
                Ok(ScalarExpr::Not(Box::new(args.pop().unwrap())))
            }
            op => {
                let op = match op {
                    "=" => CompareOp::Eq,
                    "!=" => CompareOp::Ne,
                    "<" => CompareOp::Lt,
                    "<=" => CompareOp::Le,
                    ">" => CompareOp::Gt,
                    ">=" => CompareOp::Ge,
                    _ => return Err(self.err("unknown operator")),
                };
                if args.len() != 2 {
                    return Err(self.err("comparison takes two operands"));
                }
                let rhs = args.pop().unwrap();
                let lhs = args.pop().unwrap();
                Ok(ScalarExpr::compare(op, lhs, rhs))
            }
        }
    }

    fn take_until(&mut self, stop: impl Fn(char) -> bool) -> String {
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if stop(c) {
                break;
            }
            out.push(c);
            self.pos += 1;
        }
        out
    }

    fn parse_atom(&mut self) -> Result<ScalarExpr> {
        let word = self.take_until(|c| c == ' ' || c == ')');
        if let Some(name) = word.strip_prefix("col:") {
            return Ok(ScalarExpr::col(name));
        }
        if let Some(v) = word.strip_prefix("i:") {
            let v: i64 = v
                .parse()
                .map_err(|_| self.err("bad integer literal"))?;
            return Ok(ScalarExpr::int(v));
        }
        if let Some(v) = word.strip_prefix("f:") {
            let v: f64 = v.parse().map_err(|_| self.err("bad float literal"))?;
            return Ok(ScalarExpr::float(v));
        }
        if word.starts_with("s:\"") {
            // The quoted payload may contain spaces; re-lex from the raw tail.
            let mut payload = String::new();
            // rewind to just after `s:"`
            self.pos -= word.len();
            self.pos += 3;
            loop {
                match self.bump() {
                    Some('\\') => match self.bump() {
                        Some(c) => payload.push(c),
                        None => return Err(self.err("unterminated escape")),
                    },
                    Some('"') => break,
                    Some(c) => payload.push(c),
                    None => return Err(self.err("unterminated string literal")),
                }
            }
            return Ok(ScalarExpr::string(payload));
        }
        Err(self.err("unknown atom"))
    }
}

// ---------------------------------------------------------------------------
// Plan nodes
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JoinKind {
    Inner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AggFunc {
    Sum,
    Count,
    Min,
    Max,
}

impl fmt::Display for AggFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AggFunc::Sum => "sum",
            AggFunc::Count => "count",
            AggFunc::Min => "min",
            AggFunc::Max => "max",
        };
        f.write_str(s)
    }
}

/// One aggregate in an Aggregate node. `filter` holds the lowered form of
/// `SUM(CASE WHEN p THEN col ELSE NULL END)`: only rows passing `p`
/// contribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggSpec {
    pub func: AggFunc,
    /// None encodes `COUNT(*)`.
    pub column: Option<String>,
    pub filter: Option<ScalarExpr>,
    pub output: String,
}

impl AggSpec {
    pub fn canonical_string(&self) -> String {
        let col = self.column.as_deref().unwrap_or("*");
        let mut s = format!("{}({col})", self.func);
        if let Some(f) = &self.filter {
            s.push_str(" where ");
            s.push_str(&canonicalize(f).canonical_string());
        }
        s.push_str(" as ");
        s.push_str(&self.output);
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortKey {
    pub column: String,
    pub descending: bool,
}

/// Relational operator tree. Arity is fixed per variant: Scan/CacheRead are
/// leaves, Join/CartesianProduct/Union are binary, everything else is unary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PlanNode {
    Scan {
        table: String,
    },
    Filter {
        predicate: ScalarExpr,
        input: Box<PlanNode>,
    },
    Project {
        columns: Vec<String>,
        input: Box<PlanNode>,
    },
    Join {
        kind: JoinKind,
        condition: ScalarExpr,
        left: Box<PlanNode>,
        right: Box<PlanNode>,
    },
    CartesianProduct {
        left: Box<PlanNode>,
        right: Box<PlanNode>,
    },
    Union {
        left: Box<PlanNode>,
        right: Box<PlanNode>,
    },
    Aggregate {
        group_by: Vec<String>,
        aggregates: Vec<AggSpec>,
        input: Box<PlanNode>,
    },
    Sort {
        keys: Vec<SortKey>,
        input: Box<PlanNode>,
    },
    Limit {
        n: u64,
        input: Box<PlanNode>,
    },
    CacheRead {
        cache_id: String,
    },
    CacheWrite {
        cache_id: String,
        input: Box<PlanNode>,
    },
}

impl PlanNode {
    pub fn scan(table: impl Into<String>) -> Self {
        PlanNode::Scan {
            table: table.into(),
        }
    }

    pub fn filter(predicate: ScalarExpr, input: PlanNode) -> Self {
        PlanNode::Filter {
            predicate,
            input: Box::new(input),
        }
    }

    pub fn project<S: Into<String>>(columns: Vec<S>, input: PlanNode) -> Self {
        PlanNode::Project {
            columns: columns.into_iter().map(Into::into).collect(),
            input: Box::new(input),
        }
    }

    pub fn join(condition: ScalarExpr, left: PlanNode, right: PlanNode) -> Self {
        PlanNode::Join {
            kind: JoinKind::Inner,
            condition,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            PlanNode::Scan { .. } => "Scan",
            PlanNode::Filter { .. } => "Filter",
            PlanNode::Project { .. } => "Project",
            PlanNode::Join { .. } => "Join",
            PlanNode::CartesianProduct { .. } => "CartesianProduct",
            PlanNode::Union { .. } => "Union",
            PlanNode::Aggregate { .. } => "Aggregate",
            PlanNode::Sort { .. } => "Sort",
            PlanNode::Limit { .. } => "Limit",
            PlanNode::CacheRead { .. } => "CacheRead",
            PlanNode::CacheWrite { .. } => "CacheWrite",
        }
    }

    pub fn children(&self) -> Vec<&PlanNode> {
        match self {
            PlanNode::Scan { .. } | PlanNode::CacheRead { .. } => vec![],
            PlanNode::Filter { input, .. }
            | PlanNode::Project { input, .. }
            | PlanNode::Aggregate { input, .. }
            | PlanNode::Sort { input, .. }
            | PlanNode::Limit { input, .. }
            | PlanNode::CacheWrite { input, .. } => vec![input],
            PlanNode::Join { left, right, .. }
            | PlanNode::CartesianProduct { left, right }
            | PlanNode::Union { left, right } => vec![left, right],
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut PlanNode> {
        match self {
            PlanNode::Scan { .. } | PlanNode::CacheRead { .. } => vec![],
            PlanNode::Filter { input, .. }
            | PlanNode::Project { input, .. }
            | PlanNode::Aggregate { input, .. }
            | PlanNode::Sort { input, .. }
            | PlanNode::Limit { input, .. }
            | PlanNode::CacheWrite { input, .. } => vec![input],
            PlanNode::Join { left, right, .. }
            | PlanNode::CartesianProduct { left, right }
            | PlanNode::Union { left, right } => vec![left, right],
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }

    /// Pre-order visit of every sub-tree with its path from `self`.
    pub fn visit<'a>(&'a self, mut f: impl FnMut(&NodePath, &'a PlanNode)) {
        fn go<'a>(
            node: &'a PlanNode,
            path: &mut Vec<usize>,
            f: &mut impl FnMut(&NodePath, &'a PlanNode),
        ) {
            let p = NodePath(path.clone());
            f(&p, node);
            for (i, child) in node.children().into_iter().enumerate() {
                path.push(i);
                go(child, path, f);
                path.pop();
            }
        }
        go(self, &mut Vec::new(), &mut f);
    }
}

/// Address of a sub-tree: child indices from the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct NodePath(pub Vec<usize>);

impl NodePath {
    pub fn root() -> Self {
        NodePath(Vec::new())
    }

    pub fn child(&self, idx: usize) -> Self {
        let mut steps = self.0.clone();
        steps.push(idx);
        NodePath(steps)
    }

    pub fn is_prefix_of(&self, other: &NodePath) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    pub fn is_proper_prefix_of(&self, other: &NodePath) -> bool {
        other.0.len() > self.0.len() && self.is_prefix_of(other)
    }

    /// `other` relative to `self`; `self` must be a prefix.
    pub fn relative(&self, other: &NodePath) -> Option<NodePath> {
        if self.is_prefix_of(other) {
            Some(NodePath(other.0[self.0.len()..].to_vec()))
        } else {
            None
        }
    }

    pub fn join(&self, rel: &NodePath) -> NodePath {
        let mut steps = self.0.clone();
        steps.extend_from_slice(&rel.0);
        NodePath(steps)
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}]",
            self.0
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(".")
        )
    }
}

/// Returns the sub-tree rooted at `path`.
pub fn subtree_at<'a>(root: &'a PlanNode, path: &NodePath) -> Result<&'a PlanNode> {
    let mut node = root;
    for &step in &path.0 {
        let children = node.children();
        node = children
            .get(step)
            .copied()
            .ok_or_else(|| Error::InvalidPath(path.0.clone()))?;
    }
    Ok(node)
}

/// Rebuilds `root` with the sub-tree at `path` replaced.
pub fn replace_subtree(root: &PlanNode, path: &NodePath, replacement: PlanNode) -> Result<PlanNode> {
    if path.0.is_empty() {
        return Ok(replacement);
    }
    let mut new_root = root.clone();
    {
        let mut node = &mut new_root;
        for &step in &path.0[..path.0.len() - 1] {
            node = node
                .children_mut()
                .into_iter()
                .nth(step)
                .ok_or_else(|| Error::InvalidPath(path.0.clone()))?;
        }
        let last = *path.0.last().unwrap();
        let mut children = node.children_mut();
        let slot = children
            .get_mut(last)
            .ok_or_else(|| Error::InvalidPath(path.0.clone()))?;
        **slot = replacement;
    }
    Ok(new_root)
}

/// A complete query plan with its batch identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalPlan {
    pub query_id: String,
    pub root: PlanNode,
}

impl LogicalPlan {
    pub fn new(query_id: impl Into<String>, root: PlanNode) -> Self {
        LogicalPlan {
            query_id: query_id.into(),
            root,
        }
    }
}

// ---------------------------------------------------------------------------
// Catalog and schema inference
// ---------------------------------------------------------------------------

/// Name resolution source for schema inference: base tables plus any cache
/// entries introduced by rewriting.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    pub tables: BTreeMap<String, Schema>,
    pub cache_entries: BTreeMap<String, Schema>,
}

impl Catalog {
    pub fn new(tables: BTreeMap<String, Schema>) -> Self {
        Catalog {
            tables,
            cache_entries: BTreeMap::new(),
        }
    }

    pub fn with_table(mut self, name: impl Into<String>, schema: Schema) -> Self {
        self.tables.insert(name.into(), schema);
        self
    }

    pub fn table(&self, name: &str) -> Result<&Schema> {
        self.tables
            .get(name)
            .ok_or_else(|| Error::UnknownTable(name.to_string()))
    }

    pub fn cache_entry(&self, id: &str) -> Result<&Schema> {
        self.cache_entries
            .get(id)
            .ok_or_else(|| Error::MissingCacheEntry(id.to_string()))
    }
}

/// Checks a predicate against a schema: every column resolves and every
/// comparison is type-compatible. Numeric types compare freely; strings only
/// against strings.
pub fn check_predicate(expr: &ScalarExpr, schema: &Schema) -> Result<()> {
    fn value_type(expr: &ScalarExpr, schema: &Schema) -> Result<DataType> {
        match expr {
            ScalarExpr::Column(name) => schema
                .field(name)
                .map(|(_, t)| t)
                .ok_or_else(|| Error::UnknownColumn(name.clone())),
            ScalarExpr::Literal(v) => Ok(v.dtype()),
            _ => Err(Error::TypeMismatch(
                "nested boolean expression used as a value".into(),
            )),
        }
    }
    match expr {
        ScalarExpr::Compare { op, lhs, rhs } => {
            let lt = value_type(lhs, schema)?;
            let rt = value_type(rhs, schema)?;
            let compatible = (lt.is_numeric() && rt.is_numeric()) || lt == rt;
            if !compatible {
                return Err(Error::TypeMismatch(format!(
                    "cannot compare {lt} {} {rt}",
                    op.symbol()
                )));
            }
            Ok(())
        }
        ScalarExpr::And(children) | ScalarExpr::Or(children) => {
            for c in children {
                check_predicate(c, schema)?;
            }
            Ok(())
        }
        ScalarExpr::Not(child) => check_predicate(child, schema),
        ScalarExpr::Column(_) | ScalarExpr::Literal(_) => Err(Error::TypeMismatch(
            "predicate must be a boolean expression".into(),
        )),
    }
}

/// Output schema of a single node, inferring children recursively.
pub fn output_schema(node: &PlanNode, catalog: &Catalog) -> Result<Schema> {
    match node {
        PlanNode::Scan { table } => catalog.table(table).cloned(),
        PlanNode::CacheRead { cache_id } => catalog.cache_entry(cache_id).cloned(),
        PlanNode::Filter { predicate, input } => {
            let schema = output_schema(input, catalog)?;
            check_predicate(predicate, &schema)?;
            Ok(schema)
        }
        PlanNode::Project { columns, input } => {
            let schema = output_schema(input, catalog)?;
            let mut out = Vec::with_capacity(columns.len());
            for name in columns {
                let (_, dtype) = schema
                    .field(name)
                    .ok_or_else(|| Error::UnknownColumn(name.clone()))?;
                out.push((name.clone(), dtype));
            }
            Schema::new(out)
        }
        PlanNode::Join {
            condition,
            left,
            right,
            ..
        } => {
            let ls = output_schema(left, catalog)?;
            let rs = output_schema(right, catalog)?;
            let merged = merge_schemas(&ls, &rs)?;
            let (lc, rc) = join_key_columns(condition)?;
            let lhs_in_left = ls.contains(&lc);
            let lhs_in_right = rs.contains(&lc);
            let rhs_in_left = ls.contains(&rc);
            let rhs_in_right = rs.contains(&rc);
            let spans = (lhs_in_left && rhs_in_right) || (lhs_in_right && rhs_in_left);
            if !spans {
                return Err(Error::TypeMismatch(format!(
                    "join condition `{}` must reference both sides",
                    condition.canonical_string()
                )));
            }
            check_predicate(condition, &merged)?;
            Ok(merged)
        }
        PlanNode::CartesianProduct { left, right } => {
            let ls = output_schema(left, catalog)?;
            let rs = output_schema(right, catalog)?;
            merge_schemas(&ls, &rs)
        }
        PlanNode::Union { left, right } => {
            let ls = output_schema(left, catalog)?;
            let rs = output_schema(right, catalog)?;
            if ls != rs {
                return Err(Error::UnionSchemaMismatch(ls.describe(), rs.describe()));
            }
            Ok(ls)
        }
        PlanNode::Aggregate {
            group_by,
            aggregates,
            input,
        } => {
            let schema = output_schema(input, catalog)?;
            let mut out = Vec::new();
            for g in group_by {
                let (_, dtype) = schema
                    .field(g)
                    .ok_or_else(|| Error::UnknownColumn(g.clone()))?;
                out.push((g.clone(), dtype));
            }
            for spec in aggregates {
                if let Some(f) = &spec.filter {
                    check_predicate(f, &schema)?;
                }
                let dtype = match (&spec.func, &spec.column) {
                    (AggFunc::Count, _) => DataType::Int64,
                    (_, None) => {
                        return Err(Error::TypeMismatch(format!(
                            "{} requires a column",
                            spec.func
                        )))
                    }
                    (func, Some(col)) => {
                        let (_, t) = schema
                            .field(col)
                            .ok_or_else(|| Error::UnknownColumn(col.clone()))?;
                        if *func == AggFunc::Sum && !t.is_numeric() {
                            return Err(Error::TypeMismatch(format!(
                                "sum over non-numeric column `{col}`"
                            )));
                        }
                        t
                    }
                };
                out.push((spec.output.clone(), dtype));
            }
            Schema::new(out)
        }
        PlanNode::Sort { keys, input } => {
            let schema = output_schema(input, catalog)?;
            for k in keys {
                if !schema.contains(&k.column) {
                    return Err(Error::UnknownColumn(k.column.clone()));
                }
            }
            Ok(schema)
        }
        PlanNode::Limit { input, .. } => output_schema(input, catalog),
        PlanNode::CacheWrite { input, .. } => output_schema(input, catalog),
    }
}

fn merge_schemas(left: &Schema, right: &Schema) -> Result<Schema> {
    let mut cols = left.columns.clone();
    for (name, dtype) in &right.columns {
        if left.contains(name) {
            return Err(Error::SchemaMismatch(format!(
                "column `{name}` appears on both join sides"
            )));
        }
        cols.push((name.clone(), *dtype));
    }
    Schema::new(cols)
}

/// Extracts the two column names of an equality join condition.
pub fn join_key_columns(condition: &ScalarExpr) -> Result<(String, String)> {
    if let ScalarExpr::Compare {
        op: CompareOp::Eq,
        lhs,
        rhs,
    } = condition
    {
        if let (ScalarExpr::Column(l), ScalarExpr::Column(r)) = (lhs.as_ref(), rhs.as_ref()) {
            return Ok((l.clone(), r.clone()));
        }
    }
    Err(Error::TypeMismatch(format!(
        "join condition must be a column equality, got `{}`",
        condition.canonical_string()
    )))
}

/// Annotates every node with its output schema, keyed by path. Succeeding is
/// the plan validity check: arity is structural, so this covers column
/// resolution, type compatibility and union shape.
pub fn infer_schema(plan: &LogicalPlan, catalog: &Catalog) -> Result<BTreeMap<NodePath, Schema>> {
    let mut out = BTreeMap::new();
    fn go(
        node: &PlanNode,
        path: &mut Vec<usize>,
        catalog: &Catalog,
        out: &mut BTreeMap<NodePath, Schema>,
    ) -> Result<()> {
        for (i, child) in node.children().into_iter().enumerate() {
            path.push(i);
            go(child, path, catalog, out)?;
            path.pop();
        }
        let schema = output_schema(node, catalog)?;
        out.insert(NodePath(path.clone()), schema);
        Ok(())
    }
    go(&plan.root, &mut Vec::new(), catalog, &mut out)?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Deterministic JSON plan format
// ---------------------------------------------------------------------------

/// Serializes a plan node as `{"op", "attrs", "children"}` JSON. Attribute
/// maps are emitted in a fixed key order so renderings are byte-stable.
pub fn plan_to_json(node: &PlanNode) -> serde_json::Value {
    use serde_json::{json, Map, Value as J};
    let mut attrs = Map::new();
    match node {
        PlanNode::Scan { table } => {
            attrs.insert("table".into(), json!(table));
        }
        PlanNode::Filter { predicate, .. } => {
            attrs.insert("predicate".into(), json!(predicate.canonical_string()));
        }
        PlanNode::Project { columns, .. } => {
            attrs.insert("columns".into(), json!(columns));
        }
        PlanNode::Join { condition, .. } => {
            attrs.insert("kind".into(), json!("Inner"));
            attrs.insert("condition".into(), json!(condition.canonical_string()));
        }
        PlanNode::CartesianProduct { .. } | PlanNode::Union { .. } => {}
        PlanNode::Aggregate {
            group_by,
            aggregates,
            ..
        } => {
            attrs.insert("group_by".into(), json!(group_by));
            let aggs: Vec<J> = aggregates
                .iter()
                .map(|a| {
                    let mut m = Map::new();
                    m.insert("func".into(), json!(a.func.to_string()));
                    m.insert("column".into(), json!(a.column));
                    m.insert(
                        "filter".into(),
                        json!(a.filter.as_ref().map(|f| f.canonical_string())),
                    );
                    m.insert("output".into(), json!(a.output));
                    J::Object(m)
                })
                .collect();
            attrs.insert("aggregates".into(), J::Array(aggs));
        }
        PlanNode::Sort { keys, .. } => {
            let keys: Vec<J> = keys
                .iter()
                .map(|k| json!({"column": k.column, "descending": k.descending}))
                .collect();
            attrs.insert("keys".into(), J::Array(keys));
        }
        PlanNode::Limit { n, .. } => {
            attrs.insert("n".into(), json!(n));
        }
        PlanNode::CacheRead { cache_id } | PlanNode::CacheWrite { cache_id, .. } => {
            attrs.insert("cache_id".into(), json!(cache_id));
        }
    }
    let children: Vec<J> = node.children().into_iter().map(plan_to_json).collect();
    let mut obj = Map::new();
    obj.insert("op".into(), json!(node.label()));
    obj.insert("attrs".into(), J::Object(attrs));
    obj.insert("children".into(), J::Array(children));
    J::Object(obj)
}

pub fn plan_from_json(value: &serde_json::Value) -> Result<PlanNode> {
    let bad = |msg: &str| Error::SchemaMismatch(format!("bad plan JSON: {msg}"));
    let obj = value.as_object().ok_or_else(|| bad("expected object"))?;
    let op = obj
        .get("op")
        .and_then(|v| v.as_str())
        .ok_or_else(|| bad("missing op"))?;
    let attrs = obj
        .get("attrs")
        .and_then(|v| v.as_object())
        .ok_or_else(|| bad("missing attrs"))?;
    let children_json = obj
        .get("children")
        .and_then(|v| v.as_array())
        .ok_or_else(|| bad("missing children"))?;
    let mut children = children_json
        .iter()
        .map(plan_from_json)
        .collect::<Result<Vec<_>>>()?;
    let mut next_child = || -> Result<Box<PlanNode>> {
        if children.is_empty() {
            Err(bad("missing child"))
        } else {
            Ok(Box::new(children.remove(0)))
        }
    };
    let attr_str = |key: &str| -> Result<String> {
        attrs
            .get(key)
            .and_then(|v| v.as_str())
            .map(str::to_string)
            .ok_or_else(|| bad(&format!("missing attr `{key}`")))
    };
    let node = match op {
        "Scan" => PlanNode::Scan {
            table: attr_str("table")?,
        },
        "Filter" => PlanNode::Filter {
            predicate: parse_canonical_expr(&attr_str("predicate")?)?,
            input: next_child()?,
        },
        "Project" => {
            let columns = attrs
                .get("columns")
                .and_then(|v| v.as_array())
                .ok_or_else(|| bad("missing columns"))?
                .iter()
                .map(|v| v.as_str().map(str::to_string).ok_or_else(|| bad("bad column")))
                .collect::<Result<Vec<_>>>()?;
            PlanNode::Project {
                columns,
                input: next_child()?,
            }
        }
        "Join" => PlanNode::Join {
            kind: JoinKind::Inner,
            condition: parse_canonical_expr(&attr_str("condition")?)?,
            left: next_child()?,
            right: next_child()?,
        },
        "CartesianProduct" => PlanNode::CartesianProduct {
            left: next_child()?,
            right: next_child()?,
        },
        "Union" => PlanNode::Union {
            left: next_child()?,
            right: next_child()?,
        },
        "Aggregate" => {
            let group_by = attrs
                .get("group_by")
                .and_then(|v| v.as_array())
                .ok_or_else(|| bad("missing group_by"))?
                .iter()
                .map(|v| v.as_str().map(str::to_string).ok_or_else(|| bad("bad group col")))
                .collect::<Result<Vec<_>>>()?;
            let aggregates = attrs
                .get("aggregates")
                .and_then(|v| v.as_array())
                .ok_or_else(|| bad("missing aggregates"))?
                .iter()
                .map(|v| {
                    let m = v.as_object().ok_or_else(|| bad("bad aggregate"))?;
                    let func = match m.get("func").and_then(|v| v.as_str()) {
                        Some("sum") => AggFunc::Sum,
                        Some("count") => AggFunc::Count,
                        Some("min") => AggFunc::Min,
                        Some("max") => AggFunc::Max,
                        _ => return Err(bad("bad aggregate func")),
                    };
                    let column = match m.get("column") {
                        Some(serde_json::Value::String(s)) => Some(s.clone()),
                        Some(serde_json::Value::Null) | None => None,
                        _ => return Err(bad("bad aggregate column")),
                    };
                    let filter = match m.get("filter") {
                        Some(serde_json::Value::String(s)) => Some(parse_canonical_expr(s)?),
                        Some(serde_json::Value::Null) | None => None,
                        _ => return Err(bad("bad aggregate filter")),
                    };
                    let output = m
                        .get("output")
                        .and_then(|v| v.as_str())
                        .ok_or_else(|| bad("missing aggregate output"))?
                        .to_string();
                    Ok(AggSpec {
                        func,
                        column,
                        filter,
                        output,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            PlanNode::Aggregate {
                group_by,
                aggregates,
                input: next_child()?,
            }
        }
        "Sort" => {
            let keys = attrs
                .get("keys")
                .and_then(|v| v.as_array())
                .ok_or_else(|| bad("missing keys"))?
                .iter()
                .map(|v| {
                    let m = v.as_object().ok_or_else(|| bad("bad sort key"))?;
                    Ok(SortKey {
                        column: m
                            .get("column")
                            .and_then(|v| v.as_str())
                            .ok_or_else(|| bad("bad sort column"))?
                            .to_string(),
                        descending: m
                            .get("descending")
                            .and_then(|v| v.as_bool())
                            .unwrap_or(false),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            PlanNode::Sort {
                keys,
                input: next_child()?,
            }
        }
        "Limit" => PlanNode::Limit {
            n: attrs
                .get("n")
                .and_then(|v| v.as_u64())
                .ok_or_else(|| bad("missing n"))?,
            input: next_child()?,
        },
        "CacheRead" => PlanNode::CacheRead {
            cache_id: attr_str("cache_id")?,
        },
        "CacheWrite" => PlanNode::CacheWrite {
            cache_id: attr_str("cache_id")?,
            input: next_child()?,
        },
        other => return Err(bad(&format!("unknown op `{other}`"))),
    };
    if !children.is_empty() {
        return Err(bad("too many children"));
    }
    Ok(node)
}

pub fn logical_plan_to_json(plan: &LogicalPlan) -> serde_json::Value {
    let mut obj = serde_json::Map::new();
    obj.insert("query_id".into(), serde_json::json!(plan.query_id));
    obj.insert("root".into(), plan_to_json(&plan.root));
    serde_json::Value::Object(obj)
}

pub fn logical_plan_from_json(value: &serde_json::Value) -> Result<LogicalPlan> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::SchemaMismatch("bad plan JSON: expected object".into()))?;
    let query_id = obj
        .get("query_id")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::SchemaMismatch("bad plan JSON: missing query_id".into()))?;
    let root = plan_from_json(
        obj.get("root")
            .ok_or_else(|| Error::SchemaMismatch("bad plan JSON: missing root".into()))?,
    )?;
    Ok(LogicalPlan::new(query_id, root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn people_catalog() -> Catalog {
        Catalog::default().with_table(
            "people",
            Schema::new(vec![
                ("name".into(), DataType::Utf8),
                ("age".into(), DataType::Int64),
            ])
            .unwrap(),
        )
    }

    #[test]
    fn project_narrows_schema() {
        let catalog = people_catalog();
        let plan = PlanNode::project(vec!["name"], PlanNode::scan("people"));
        let schema = output_schema(&plan, &catalog).unwrap();
        assert_eq!(schema.columns, vec![("name".into(), DataType::Utf8)]);
    }

    #[test]
    fn filter_preserves_schema() {
        let catalog = people_catalog();
        let plan = PlanNode::filter(
            ScalarExpr::compare(CompareOp::Gt, ScalarExpr::col("age"), ScalarExpr::int(30)),
            PlanNode::scan("people"),
        );
        let schema = output_schema(&plan, &catalog).unwrap();
        assert_eq!(schema, *catalog.table("people").unwrap());
    }

    #[test]
    fn unknown_column_rejected() {
        let catalog = people_catalog();
        let plan = PlanNode::project(vec!["salary"], PlanNode::scan("people"));
        match output_schema(&plan, &catalog) {
            Err(Error::UnknownColumn(c)) => assert_eq!(c, "salary"),
            other => panic!("expected UnknownColumn, got {other:?}"),
        }
    }

    #[test]
    fn unknown_table_rejected() {
        let catalog = people_catalog();
        let plan = PlanNode::scan("nope");
        assert!(matches!(
            output_schema(&plan, &catalog),
            Err(Error::UnknownTable(_))
        ));
    }

    #[test]
    fn union_schema_mismatch_rejected() {
        let catalog = people_catalog()
            .with_table(
                "other",
                Schema::new(vec![("x".into(), DataType::Int64)]).unwrap(),
            );
        let plan = PlanNode::Union {
            left: Box::new(PlanNode::scan("people")),
            right: Box::new(PlanNode::scan("other")),
        };
        assert!(matches!(
            output_schema(&plan, &catalog),
            Err(Error::UnionSchemaMismatch(..))
        ));
    }

    #[test]
    fn subtree_at_examples() {
        let plan = PlanNode::filter(ScalarExpr::literal_true(), PlanNode::scan("people"));
        assert_eq!(subtree_at(&plan, &NodePath::root()).unwrap(), &plan);
        assert_eq!(
            subtree_at(&plan, &NodePath(vec![0])).unwrap().label(),
            "Scan"
        );
        assert!(matches!(
            subtree_at(&plan, &NodePath(vec![0, 1])),
            Err(Error::InvalidPath(_))
        ));
    }

    #[test]
    fn replace_subtree_swaps_node() {
        let plan = PlanNode::filter(ScalarExpr::literal_true(), PlanNode::scan("people"));
        let replaced =
            replace_subtree(&plan, &NodePath(vec![0]), PlanNode::scan("other")).unwrap();
        assert_eq!(
            subtree_at(&replaced, &NodePath(vec![0])).unwrap(),
            &PlanNode::scan("other")
        );
    }

    #[test]
    fn canonicalize_flattens_and_dedupes() {
        let a = ScalarExpr::eq(ScalarExpr::col("a"), ScalarExpr::int(1));
        let b = ScalarExpr::eq(ScalarExpr::col("b"), ScalarExpr::int(2));
        let nested = ScalarExpr::Or(vec![a.clone(), ScalarExpr::Or(vec![b.clone(), a.clone()])]);
        let canon = canonicalize(&nested);
        match &canon {
            ScalarExpr::Or(children) => assert_eq!(children.len(), 2),
            other => panic!("expected Or, got {other:?}"),
        }
        assert_eq!(canonicalize(&canon), canon);
    }

    #[test]
    fn canonicalize_collapses_single_child() {
        let x = ScalarExpr::compare(CompareOp::Gt, ScalarExpr::col("x"), ScalarExpr::int(3));
        let wrapped = ScalarExpr::And(vec![x.clone()]);
        assert_eq!(canonicalize(&wrapped), x);
    }

    #[test]
    fn canonicalize_is_order_insensitive() {
        let a = ScalarExpr::eq(ScalarExpr::col("a"), ScalarExpr::int(1));
        let b = ScalarExpr::eq(ScalarExpr::col("b"), ScalarExpr::int(2));
        let ab = canonicalize(&ScalarExpr::Or(vec![a.clone(), b.clone()]));
        let ba = canonicalize(&ScalarExpr::Or(vec![b, a]));
        assert_eq!(ab, ba);
        assert_eq!(ab.canonical_string(), ba.canonical_string());
    }

    #[test]
    fn canonical_string_round_trips() {
        let expr = ScalarExpr::And(vec![
            ScalarExpr::eq(ScalarExpr::col("gender"), ScalarExpr::string("F")),
            ScalarExpr::compare(CompareOp::Gt, ScalarExpr::col("age"), ScalarExpr::int(30)),
            ScalarExpr::Not(Box::new(ScalarExpr::compare(
                CompareOp::Le,
                ScalarExpr::col("d"),
                ScalarExpr::float(0.5),
            ))),
        ]);
        let canon = canonicalize(&expr);
        let text = canon.canonical_string();
        let parsed = parse_canonical_expr(&text).unwrap();
        assert_eq!(parsed, canon);
    }

    #[test]
    fn string_literal_escaping_round_trips() {
        let expr = ScalarExpr::eq(
            ScalarExpr::col("s"),
            ScalarExpr::string("a\"b\\c with spaces"),
        );
        let text = expr.canonical_string();
        assert_eq!(parse_canonical_expr(&text).unwrap(), expr);
    }

    #[test]
    fn plan_json_round_trips() {
        let plan = PlanNode::Limit {
            n: 10,
            input: Box::new(PlanNode::Sort {
                keys: vec![SortKey {
                    column: "age".into(),
                    descending: true,
                }],
                input: Box::new(PlanNode::project(
                    vec!["name", "age"],
                    PlanNode::filter(
                        ScalarExpr::compare(
                            CompareOp::Gt,
                            ScalarExpr::col("age"),
                            ScalarExpr::int(30),
                        ),
                        PlanNode::scan("people"),
                    ),
                )),
            }),
        };
        let json = plan_to_json(&plan);
        let back = plan_from_json(&json).unwrap();
        assert_eq!(back, plan);
    }

    #[test]
    fn aggregate_plan_json_round_trips() {
        let plan = PlanNode::Aggregate {
            group_by: vec!["d_year".into()],
            aggregates: vec![AggSpec {
                func: AggFunc::Sum,
                column: Some("price".into()),
                filter: Some(ScalarExpr::eq(
                    ScalarExpr::col("day"),
                    ScalarExpr::string("Sunday"),
                )),
                output: "sun_sales".into(),
            }],
            input: Box::new(PlanNode::scan("sales")),
        };
        let json = plan_to_json(&plan);
        assert_eq!(plan_from_json(&json).unwrap(), plan);
    }

    prop_compose! {
        fn arb_leaf()(kind in 0..4, v in -50i64..50, f in -2.0f64..2.0) -> ScalarExpr {
            match kind {
                0 => ScalarExpr::col(format!("c{}", v.rem_euclid(5))),
                1 => ScalarExpr::int(v),
                2 => ScalarExpr::float(f),
                _ => ScalarExpr::string(format!("s{}", v.rem_euclid(4))),
            }
        }
    }

    fn arb_expr() -> impl Strategy<Value = ScalarExpr> {
        let leaf = (arb_leaf(), arb_leaf(), 0..6usize).prop_map(|(l, r, op)| {
            let op = [
                CompareOp::Eq,
                CompareOp::Ne,
                CompareOp::Lt,
                CompareOp::Le,
                CompareOp::Gt,
                CompareOp::Ge,
            ][op];
            ScalarExpr::compare(op, l, r)
        });
        leaf.prop_recursive(4, 32, 4, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 2..4).prop_map(ScalarExpr::And),
                prop::collection::vec(inner.clone(), 2..4).prop_map(ScalarExpr::Or),
                inner.prop_map(|e| ScalarExpr::Not(Box::new(e))),
            ]
        })
    }

    proptest! {
        #[test]
        fn canonicalize_idempotent(expr in arb_expr()) {
            let once = canonicalize(&expr);
            let twice = canonicalize(&once);
            prop_assert_eq!(&once, &twice);
        }

        #[test]
        fn canonicalize_ignores_child_order(mut children in prop::collection::vec(arb_expr(), 2..5)) {
            let forward = canonicalize(&ScalarExpr::And(children.clone()));
            children.reverse();
            let backward = canonicalize(&ScalarExpr::And(children));
            prop_assert_eq!(forward.canonical_string(), backward.canonical_string());
        }

        #[test]
        fn canonical_string_parse_round_trip(expr in arb_expr()) {
            let canon = canonicalize(&expr);
            let parsed = parse_canonical_expr(&canon.canonical_string()).unwrap();
            prop_assert_eq!(parsed, canon);
        }
    }
}
