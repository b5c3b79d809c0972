//! Single-query optimization: the fixpoint of three rules,
//!
//!   (a) split conjunctive filters and push each conjunct to the lowest
//!       node whose schema satisfies it,
//!   (b) prune projections to the columns needed above, inserting Project
//!       nodes above scans and filter chains and below join inputs,
//!   (c) collapse adjacent Filters (AND) and adjacent Projects,
//!
//! applied in the fixed order a -> b -> c per pass until the tree stops
//! changing. Rule (b) narrows at every operator boundary, which produces
//! the `Project(Filter(Scan))`- and `Project(Join(..))`-shaped regions the
//! sharing detector looks for.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::plan::{
    canonicalize, output_schema, Catalog, LogicalPlan, PlanNode, ScalarExpr, Schema,
};

/// Applies the rewrite rules until fixpoint. Idempotent; a valid plan in
/// yields a valid, semantically equal plan out.
pub fn optimize_single(plan: &LogicalPlan, catalog: &Catalog) -> Result<LogicalPlan> {
    let mut root = plan.root.clone();
    let max_passes = root.node_count() + 8;
    for _ in 0..max_passes {
        let pushed = pushdown(root.clone(), catalog)?;
        let required: BTreeSet<String> = output_schema(&pushed, catalog)?
            .names()
            .map(str::to_string)
            .collect();
        let pruned = prune(&pushed, &required, catalog)?;
        let collapsed = collapse(pruned);
        if collapsed == root {
            break;
        }
        root = collapsed;
    }
    Ok(LogicalPlan::new(plan.query_id.clone(), root))
}

fn map_children(
    mut node: PlanNode,
    f: &mut impl FnMut(PlanNode) -> Result<PlanNode>,
) -> Result<PlanNode> {
    for child in node.children_mut() {
        let owned = std::mem::replace(child, PlanNode::scan("__placeholder"));
        *child = f(owned)?;
    }
    Ok(node)
}

// -- rule (a): filter pushdown ----------------------------------------------

fn pushdown(node: PlanNode, catalog: &Catalog) -> Result<PlanNode> {
    let node = map_children(node, &mut |c| pushdown(c, catalog))?;
    if let PlanNode::Filter { predicate, input } = node {
        let canon = canonicalize(&predicate);
        let conjuncts = match canon {
            ScalarExpr::And(cs) => cs,
            other => vec![other],
        };
        let mut acc = *input;
        for conjunct in conjuncts {
            acc = push_into(acc, conjunct, catalog)?;
        }
        Ok(acc)
    } else {
        Ok(node)
    }
}

fn covers(schema: &Schema, cols: &[String]) -> bool {
    cols.iter().all(|c| schema.contains(c))
}

/// Sinks one conjunct as deep as its column references allow.
fn push_into(node: PlanNode, pred: ScalarExpr, catalog: &Catalog) -> Result<PlanNode> {
    let stop = |node: PlanNode, pred: ScalarExpr| PlanNode::filter(pred, node);
    match node {
        PlanNode::Filter { predicate, input } => Ok(PlanNode::Filter {
            predicate,
            input: Box::new(push_into(*input, pred, catalog)?),
        }),
        PlanNode::Project { columns, input } => Ok(PlanNode::Project {
            columns,
            input: Box::new(push_into(*input, pred, catalog)?),
        }),
        PlanNode::Sort { keys, input } => Ok(PlanNode::Sort {
            keys,
            input: Box::new(push_into(*input, pred, catalog)?),
        }),
        PlanNode::Join {
            kind,
            condition,
            left,
            right,
        } => {
            let cols = pred.columns();
            if covers(&output_schema(&left, catalog)?, &cols) {
                Ok(PlanNode::Join {
                    kind,
                    condition,
                    left: Box::new(push_into(*left, pred, catalog)?),
                    right,
                })
            } else if covers(&output_schema(&right, catalog)?, &cols) {
                Ok(PlanNode::Join {
                    kind,
                    condition,
                    left,
                    right: Box::new(push_into(*right, pred, catalog)?),
                })
            } else {
                Ok(stop(
                    PlanNode::Join {
                        kind,
                        condition,
                        left,
                        right,
                    },
                    pred,
                ))
            }
        }
        PlanNode::CartesianProduct { left, right } => {
            let cols = pred.columns();
            if covers(&output_schema(&left, catalog)?, &cols) {
                Ok(PlanNode::CartesianProduct {
                    left: Box::new(push_into(*left, pred, catalog)?),
                    right,
                })
            } else if covers(&output_schema(&right, catalog)?, &cols) {
                Ok(PlanNode::CartesianProduct {
                    left,
                    right: Box::new(push_into(*right, pred, catalog)?),
                })
            } else {
                Ok(stop(PlanNode::CartesianProduct { left, right }, pred))
            }
        }
        PlanNode::Union { left, right } => Ok(PlanNode::Union {
            left: Box::new(push_into(*left, pred.clone(), catalog)?),
            right: Box::new(push_into(*right, pred, catalog)?),
        }),
        PlanNode::Aggregate {
            group_by,
            aggregates,
            input,
        } => {
            let cols = pred.columns();
            if cols.iter().all(|c| group_by.contains(c)) {
                Ok(PlanNode::Aggregate {
                    group_by,
                    aggregates,
                    input: Box::new(push_into(*input, pred, catalog)?),
                })
            } else {
                Ok(stop(
                    PlanNode::Aggregate {
                        group_by,
                        aggregates,
                        input,
                    },
                    pred,
                ))
            }
        }
        // Filters never move below row-count-sensitive or leaf operators.
        other @ (PlanNode::Scan { .. }
        | PlanNode::CacheRead { .. }
        | PlanNode::Limit { .. }
        | PlanNode::CacheWrite { .. }) => Ok(stop(other, pred)),
    }
}

// -- rule (b): projection pruning --------------------------------------------

fn schema_set(schema: &Schema) -> BTreeSet<String> {
    schema.names().map(str::to_string).collect()
}

/// Columns of `schema` restricted to `wanted`, in schema order.
fn ordered_columns(schema: &Schema, wanted: &BTreeSet<String>) -> Vec<String> {
    schema
        .names()
        .filter(|n| wanted.contains(*n))
        .map(str::to_string)
        .collect()
}

fn wrap_if_narrower(
    node: PlanNode,
    wanted: &BTreeSet<String>,
    catalog: &Catalog,
) -> Result<PlanNode> {
    let schema = output_schema(&node, catalog)?;
    let have = schema_set(&schema);
    if wanted.is_subset(&have) && wanted.len() < have.len() && !wanted.is_empty() {
        Ok(PlanNode::Project {
            columns: ordered_columns(&schema, wanted),
            input: Box::new(node),
        })
    } else {
        Ok(node)
    }
}

fn non_empty(mut req: BTreeSet<String>, schema: &Schema) -> BTreeSet<String> {
    if req.is_empty() {
        if let Some(first) = schema.names().next() {
            req.insert(first.to_string());
        }
    }
    req
}

fn prune(node: &PlanNode, required: &BTreeSet<String>, catalog: &Catalog) -> Result<PlanNode> {
    match node {
        PlanNode::Scan { .. } | PlanNode::CacheRead { .. } => Ok(node.clone()),
        PlanNode::Project { columns, input } => {
            let mut kept: Vec<String> = columns
                .iter()
                .filter(|c| required.contains(*c))
                .cloned()
                .collect();
            if kept.is_empty() {
                kept.push(columns[0].clone());
            }
            let child_req: BTreeSet<String> = kept.iter().cloned().collect();
            Ok(PlanNode::Project {
                columns: kept,
                input: Box::new(prune(input, &child_req, catalog)?),
            })
        }
        PlanNode::Filter { predicate, input } => {
            let mut child_req = required.clone();
            child_req.extend(predicate.columns());
            let body = PlanNode::Filter {
                predicate: predicate.clone(),
                input: Box::new(prune(input, &child_req, catalog)?),
            };
            wrap_if_narrower(body, required, catalog)
        }
        PlanNode::Join {
            kind,
            condition,
            left,
            right,
        } => {
            let ls = output_schema(left, catalog)?;
            let rs = output_schema(right, catalog)?;
            let mut wanted = required.clone();
            wanted.extend(condition.columns());
            let req_l = non_empty(
                wanted
                    .iter()
                    .filter(|c| ls.contains(c))
                    .cloned()
                    .collect(),
                &ls,
            );
            let req_r = non_empty(
                wanted
                    .iter()
                    .filter(|c| rs.contains(c))
                    .cloned()
                    .collect(),
                &rs,
            );
            let nl = wrap_if_narrower(prune(left, &req_l, catalog)?, &req_l, catalog)?;
            let nr = wrap_if_narrower(prune(right, &req_r, catalog)?, &req_r, catalog)?;
            Ok(PlanNode::Join {
                kind: *kind,
                condition: condition.clone(),
                left: Box::new(nl),
                right: Box::new(nr),
            })
        }
        PlanNode::CartesianProduct { left, right } => {
            let ls = output_schema(left, catalog)?;
            let rs = output_schema(right, catalog)?;
            let req_l = non_empty(
                required.iter().filter(|c| ls.contains(c)).cloned().collect(),
                &ls,
            );
            let req_r = non_empty(
                required.iter().filter(|c| rs.contains(c)).cloned().collect(),
                &rs,
            );
            let nl = wrap_if_narrower(prune(left, &req_l, catalog)?, &req_l, catalog)?;
            let nr = wrap_if_narrower(prune(right, &req_r, catalog)?, &req_r, catalog)?;
            Ok(PlanNode::CartesianProduct {
                left: Box::new(nl),
                right: Box::new(nr),
            })
        }
        PlanNode::Union { left, right } => {
            let nl = wrap_if_narrower(prune(left, required, catalog)?, required, catalog)?;
            let nr = wrap_if_narrower(prune(right, required, catalog)?, required, catalog)?;
            Ok(PlanNode::Union {
                left: Box::new(nl),
                right: Box::new(nr),
            })
        }
        PlanNode::Aggregate {
            group_by,
            aggregates,
            input,
        } => {
            let child_schema = output_schema(input, catalog)?;
            let mut child_req: BTreeSet<String> = group_by.iter().cloned().collect();
            for spec in aggregates {
                if let Some(c) = &spec.column {
                    child_req.insert(c.clone());
                }
                if let Some(f) = &spec.filter {
                    child_req.extend(f.columns());
                }
            }
            let child_req = non_empty(child_req, &child_schema);
            let nc = wrap_if_narrower(prune(input, &child_req, catalog)?, &child_req, catalog)?;
            Ok(PlanNode::Aggregate {
                group_by: group_by.clone(),
                aggregates: aggregates.clone(),
                input: Box::new(nc),
            })
        }
        PlanNode::Sort { keys, input } => {
            let mut child_req = required.clone();
            child_req.extend(keys.iter().map(|k| k.column.clone()));
            Ok(PlanNode::Sort {
                keys: keys.clone(),
                input: Box::new(prune(input, &child_req, catalog)?),
            })
        }
        PlanNode::Limit { n, input } => Ok(PlanNode::Limit {
            n: *n,
            input: Box::new(prune(input, required, catalog)?),
        }),
        PlanNode::CacheWrite { cache_id, input } => Ok(PlanNode::CacheWrite {
            cache_id: cache_id.clone(),
            input: Box::new(prune(input, required, catalog)?),
        }),
    }
}

// -- rule (c): collapse adjacent filters and projects -------------------------

fn collapse(node: PlanNode) -> PlanNode {
    let node = map_children(node, &mut |c| Ok(collapse(c)))
        .expect("collapse is infallible");
    match node {
        PlanNode::Project { columns, input } => match *input {
            PlanNode::Project { input: inner, .. } => PlanNode::Project {
                columns,
                input: inner,
            },
            other => PlanNode::Project {
                columns,
                input: Box::new(other),
            },
        },
        PlanNode::Filter { predicate, input } => match *input {
            PlanNode::Filter {
                predicate: inner_pred,
                input: inner,
            } => PlanNode::Filter {
                predicate: canonicalize(&ScalarExpr::And(vec![predicate, inner_pred])),
                input: inner,
            },
            other => PlanNode::Filter {
                predicate: canonicalize(&predicate),
                input: Box::new(other),
            },
        },
        PlanNode::Join {
            kind,
            condition,
            left,
            right,
        } => PlanNode::Join {
            kind,
            condition: canonicalize(&condition),
            left,
            right,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{CompareOp, DataType, Schema};
    use crate::sql::parse;

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
                "departments",
                Schema::new(vec![
                    ("dept_id".into(), DataType::Int64),
                    ("dept_name".into(), DataType::Utf8),
                    ("location".into(), DataType::Utf8),
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
    }

    fn optimize_sql(sql: &str, catalog: &Catalog) -> PlanNode {
        let plan = parse(sql, catalog).unwrap();
        optimize_single(&plan, catalog).unwrap().root
    }

    /// Collects, for each scan, the chain of operators up to the nearest
    /// Join/Aggregate/root.
    fn chain_above_scans(root: &PlanNode) -> Vec<Vec<&'static str>> {
        let mut chains = Vec::new();
        root.visit(|_, node| {
            if node.label() == "Scan" {
                chains.push(Vec::new());
            }
        });
        // re-walk tracking the path of labels
        fn go<'a>(node: &'a PlanNode, stack: &mut Vec<&'static str>, out: &mut Vec<Vec<&'static str>>) {
            if node.label() == "Scan" {
                let mut chain = Vec::new();
                for label in stack.iter().rev() {
                    if *label == "Join" || *label == "Aggregate" || *label == "CartesianProduct" {
                        break;
                    }
                    chain.push(*label);
                }
                out.push(chain);
            }
            stack.push(node.label());
            for c in node.children() {
                go(c, stack, out);
            }
            stack.pop();
        }
        let mut out = Vec::new();
        go(root, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn filters_push_to_their_tables() {
        let catalog = hr_catalog();
        let root = optimize_sql(
            "SELECT name, dept_name, salary FROM employees, departments, salaries \
             WHERE dep = dept_id AND id = emp_id AND gender = 'F' AND location = 'us' \
             AND salary > 20000 ORDER BY salary DESC",
            &catalog,
        );
        // gender lands on the employees branch, location on departments.
        let mut gender_over_scan = false;
        let mut location_over_scan = false;
        root.visit(|_, node| {
            if let PlanNode::Filter { predicate, input } = node {
                if let PlanNode::Scan { table } = input.as_ref() {
                    let s = predicate.canonical_string();
                    if table == "employees" && s.contains("col:gender") {
                        gender_over_scan = true;
                    }
                    if table == "departments" && s.contains("col:location") {
                        location_over_scan = true;
                    }
                }
            }
        });
        assert!(gender_over_scan, "gender filter not pushed to employees scan");
        assert!(location_over_scan, "location filter not pushed to departments scan");
    }

    #[test]
    fn normal_form_one_filter_one_project_per_scan() {
        let catalog = hr_catalog();
        let root = optimize_sql(
            "SELECT name, dept_name, salary FROM employees, departments, salaries \
             WHERE dep = dept_id AND id = emp_id AND gender = 'F' AND location = 'us' \
             AND salary > 20000 ORDER BY salary DESC",
            &catalog,
        );
        for chain in chain_above_scans(&root) {
            let filters = chain.iter().filter(|l| **l == "Filter").count();
            let projects = chain.iter().filter(|l| **l == "Project").count();
            assert!(filters <= 1, "chain {chain:?} has {filters} filters");
            assert!(projects <= 1, "chain {chain:?} has {projects} projects");
        }
    }

    #[test]
    fn projects_inserted_above_joins() {
        let catalog = hr_catalog();
        let root = optimize_sql(
            "SELECT name, dept_name, salary FROM employees, departments, salaries \
             WHERE dep = dept_id AND id = emp_id AND gender = 'F' AND location = 'us' \
             AND salary > 20000 ORDER BY salary DESC",
            &catalog,
        );
        // The employees><departments join must sit under a Project that
        // narrows to {id, name, dept_name} for the outer join.
        let mut found = false;
        root.visit(|_, node| {
            if let PlanNode::Project { columns, input } = node {
                if matches!(input.as_ref(), PlanNode::Join { .. }) {
                    let mut cols = columns.clone();
                    cols.sort();
                    if cols == ["dept_name", "id", "name"] {
                        found = true;
                    }
                }
            }
        });
        assert!(found, "no pruning Project above the inner join:\n{root:#?}");
    }

    #[test]
    fn adjacent_projects_collapse() {
        let catalog = hr_catalog();
        let plan = PlanNode::project(
            vec!["name"],
            PlanNode::project(vec!["name", "age"], PlanNode::scan("employees")),
        );
        let out = optimize_single(&LogicalPlan::new("q", plan), &catalog)
            .unwrap()
            .root;
        assert_eq!(
            out,
            PlanNode::project(vec!["name"], PlanNode::scan("employees"))
        );
    }

    #[test]
    fn optimize_single_is_idempotent() {
        let catalog = hr_catalog();
        let sqls = [
            "SELECT name, dept_name, salary FROM employees, departments, salaries \
             WHERE dep = dept_id AND id = emp_id AND gender = 'F' AND location = 'us' \
             AND salary > 20000 ORDER BY salary DESC",
            "SELECT id, name, salary, from_date FROM employees, salaries \
             WHERE id = emp_id AND age > 30 AND salary > 30000",
            "SELECT name FROM employees",
        ];
        for sql in sqls {
            let once = optimize_single(&parse(sql, &catalog).unwrap(), &catalog).unwrap();
            let twice = optimize_single(&once, &catalog).unwrap();
            assert_eq!(once.root, twice.root, "not idempotent for {sql}");
        }
    }

    #[test]
    fn fixpoint_plan_unchanged() {
        let catalog = hr_catalog();
        let plan = PlanNode::project(
            vec!["name"],
            PlanNode::filter(
                ScalarExpr::compare(
                    CompareOp::Gt,
                    ScalarExpr::col("age"),
                    ScalarExpr::int(30),
                ),
                PlanNode::scan("employees"),
            ),
        );
        let out = optimize_single(&LogicalPlan::new("q", plan.clone()), &catalog)
            .unwrap()
            .root;
        assert_eq!(out, plan);
    }
}
