//! SQL frontend: parses the supported subset into logical plans and applies
//! the single-query rewrites (filter pushdown, projection pruning, operator
//! collapsing) that the multi-query optimizer assumes have already run.

mod optimize;
mod parser;

pub use optimize::optimize_single;
pub use parser::parse_statement;

use std::path::Path;

use crate::error::{Error, Result};
use crate::plan::{Catalog, LogicalPlan};

/// Ordered batch of parsed queries: the input set of the multi-query
/// optimizer. Plans are individually optimized before entering MQO.
#[derive(Debug, Clone)]
pub struct QueryEntry {
    pub query_id: String,
    pub sql: String,
    pub plan: LogicalPlan,
}

#[derive(Debug, Clone, Default)]
pub struct QueryBatch {
    pub queries: Vec<QueryEntry>,
}

impl QueryBatch {
    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn get(&self, query_id: &str) -> Option<&QueryEntry> {
        self.queries.iter().find(|q| q.query_id == query_id)
    }

    /// Parses and individually optimizes a list of `(query_id, sql)` pairs.
    pub fn from_sql(sources: &[(String, String)], catalog: &Catalog) -> Result<Self> {
        let mut queries = Vec::with_capacity(sources.len());
        for (id, sql) in sources {
            if queries.iter().any(|q: &QueryEntry| &q.query_id == id) {
                return Err(Error::InvalidConfig(format!("duplicate query id `{id}`")));
            }
            let plan = parse(sql, catalog)?;
            let plan = optimize_single(&LogicalPlan::new(id.clone(), plan.root), catalog)?;
            queries.push(QueryEntry {
                query_id: id.clone(),
                sql: sql.clone(),
                plan,
            });
        }
        Ok(QueryBatch { queries })
    }

    /// Wraps already-built plans, optimizing each one.
    pub fn from_plans(plans: Vec<LogicalPlan>, catalog: &Catalog) -> Result<Self> {
        let mut queries = Vec::with_capacity(plans.len());
        for plan in plans {
            let optimized = optimize_single(&plan, catalog)?;
            queries.push(QueryEntry {
                query_id: optimized.query_id.clone(),
                sql: String::new(),
                plan: optimized,
            });
        }
        Ok(QueryBatch { queries })
    }

    /// Loads every `.sql` file under `dir` (sorted by file name). Each file
    /// may hold one statement or several separated by `;`; statement order
    /// defines batch order. Query ids are the file stem, suffixed `.N` when
    /// a file holds more than one statement.
    pub fn from_dir(dir: &Path, catalog: &Catalog) -> Result<Self> {
        let mut files: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().map(|e| e == "sql").unwrap_or(false))
            .collect();
        files.sort();
        let mut sources = Vec::new();
        for file in files {
            let text = std::fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
            let stem = file
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "query".into());
            let statements = split_statements(&text);
            let many = statements.len() > 1;
            for (i, stmt) in statements.into_iter().enumerate() {
                let id = if many {
                    format!("{stem}.{}", i + 1)
                } else {
                    stem.clone()
                };
                sources.push((id, stmt));
            }
        }
        QueryBatch::from_sql(&sources, catalog)
    }
}

/// Parses one statement into an unoptimized plan.
pub fn parse(sql: &str, catalog: &Catalog) -> Result<LogicalPlan> {
    parse_statement(sql, catalog).map(|root| LogicalPlan::new("q", root))
}

/// Splits on `;` outside single-quoted strings, dropping empty statements.
pub fn split_statements(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut in_string = false;
    for c in text.chars() {
        match c {
            '\'' => {
                in_string = !in_string;
                current.push(c);
            }
            ';' if !in_string => {
                if !current.trim().is_empty() {
                    out.push(current.trim().to_string());
                }
                current.clear();
            }
            _ => current.push(c),
        }
    }
    if !current.trim().is_empty() {
        out.push(current.trim().to_string());
    }
    out
}
