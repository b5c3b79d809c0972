//! Structural plan fingerprints.
//!
//! Each sub-tree gets a 128-bit Merkle-style digest built from operator
//! identifiers. Filter, Project and Scan use a *loose* identifier (no
//! attributes, so predicate/column variations hash equal; a scan keeps its
//! table name inside the label so distinct base relations stay distinct);
//! every other operator is *strict* and carries its full canonical
//! attributes. Children of commutative binary operators are digest-sorted
//! before hashing so isomorphic trees collide on purpose.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::plan::{canonicalize, NodePath, PlanNode};

/// Operator identifier: the unit the fingerprint hash consumes per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorId {
    pub label: String,
    pub attrs: Option<String>,
}

/// 128-bit digest of a sub-tree's structure. Rendered as 32 lowercase hex
/// characters in reports and dumps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fingerprint(pub u128);

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:032x}", self.0)
    }
}

/// Loose id for Filter/Project/Scan, strict (label + canonical attrs) for
/// everything else.
pub fn operator_id(node: &PlanNode) -> OperatorId {
    let strict = |label: &str, attrs: String| OperatorId {
        label: label.to_string(),
        attrs: Some(attrs),
    };
    match node {
        PlanNode::Scan { table } => OperatorId {
            label: format!("Scan:{table}"),
            attrs: None,
        },
        PlanNode::Filter { .. } => OperatorId {
            label: "Filter".into(),
            attrs: None,
        },
        PlanNode::Project { .. } => OperatorId {
            label: "Project".into(),
            attrs: None,
        },
        PlanNode::Join { condition, .. } => strict(
            "Join",
            canonicalize(condition).canonical_string(),
        ),
        PlanNode::CartesianProduct { .. } => strict("CartesianProduct", String::new()),
        PlanNode::Union { .. } => strict("Union", String::new()),
        PlanNode::Aggregate {
            group_by,
            aggregates,
            ..
        } => {
            let aggs: Vec<String> = aggregates.iter().map(|a| a.canonical_string()).collect();
            strict(
                "Aggregate",
                format!("group:[{}] agg:[{}]", group_by.join(","), aggs.join(",")),
            )
        }
        PlanNode::Sort { keys, .. } => {
            let keys: Vec<String> = keys
                .iter()
                .map(|k| {
                    format!(
                        "{}:{}",
                        k.column,
                        if k.descending { "desc" } else { "asc" }
                    )
                })
                .collect();
            strict("Sort", keys.join(","))
        }
        PlanNode::Limit { n, .. } => strict("Limit", n.to_string()),
        PlanNode::CacheRead { cache_id } => strict("CacheRead", cache_id.clone()),
        PlanNode::CacheWrite { cache_id, .. } => strict("CacheWrite", cache_id.clone()),
    }
}

/// True for operators whose children may be swapped without changing
/// semantics. Join conditions reference columns by name with no side
/// binding, and equality operands are sorted during canonicalization, so an
/// inner equi-join condition reads the same from either child order.
fn commutative(node: &PlanNode) -> bool {
    matches!(
        node,
        PlanNode::Join { .. } | PlanNode::CartesianProduct { .. } | PlanNode::Union { .. }
    )
}

fn hash_node(id: &OperatorId, child_digests: &[u128]) -> u128 {
    let mut hasher = Sha256::new();
    hasher.update([child_digests.len() as u8]);
    hasher.update(id.label.as_bytes());
    hasher.update([0u8]);
    match &id.attrs {
        Some(attrs) => {
            hasher.update([1u8]);
            hasher.update(attrs.as_bytes());
        }
        None => hasher.update([0u8]),
    }
    hasher.update([0u8]);
    for d in child_digests {
        hasher.update(d.to_be_bytes());
    }
    let digest = hasher.finalize();
    u128::from_be_bytes(digest[..16].try_into().unwrap())
}

/// Recursive fingerprint of a sub-tree.
pub fn fingerprint(node: &PlanNode) -> Fingerprint {
    let id = operator_id(node);
    let mut digests: Vec<u128> = node
        .children()
        .into_iter()
        .map(|c| fingerprint(c).0)
        .collect();
    if commutative(node) {
        digests.sort_unstable();
    }
    Fingerprint(hash_node(&id, &digests))
}

/// Fingerprints for every sub-tree of `root` in one bottom-up pass,
/// together with node counts. Keyed by path.
pub fn fingerprint_map(root: &PlanNode) -> HashMap<NodePath, (Fingerprint, usize)> {
    let mut out = HashMap::new();
    fn go(
        node: &PlanNode,
        path: &mut Vec<usize>,
        out: &mut HashMap<NodePath, (Fingerprint, usize)>,
    ) -> (u128, usize) {
        let mut digests = Vec::new();
        let mut count = 1usize;
        for (i, child) in node.children().into_iter().enumerate() {
            path.push(i);
            let (d, c) = go(child, path, out);
            path.pop();
            digests.push(d);
            count += c;
        }
        if commutative(node) {
            digests.sort_unstable();
        }
        let digest = hash_node(&operator_id(node), &digests);
        out.insert(NodePath(path.clone()), (Fingerprint(digest), count));
        (digest, count)
    }
    go(root, &mut Vec::new(), &mut out);
    out
}

/// The canonical string the digest stands for: operator ids in an
/// s-expression, children listed in the digest-sorted order the hash uses.
/// Two sub-trees have equal fingerprints iff these strings are equal
/// (absent a hash collision, which the test suites check for explicitly).
pub fn fingerprint_string(node: &PlanNode) -> String {
    let id = operator_id(node);
    let rendered_id = match &id.attrs {
        Some(attrs) if !attrs.is_empty() => format!("{}[{}]", id.label, attrs),
        Some(_) => id.label.clone(),
        None => id.label.clone(),
    };
    let mut children: Vec<(u128, String)> = node
        .children()
        .into_iter()
        .map(|c| (fingerprint(c).0, fingerprint_string(c)))
        .collect();
    if commutative(node) {
        children.sort_by_key(|(d, _)| *d);
    }
    if children.is_empty() {
        format!("({rendered_id})")
    } else {
        let inner: Vec<String> = children.into_iter().map(|(_, s)| s).collect();
        format!("({rendered_id} {})", inner.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{CompareOp, ScalarExpr};

    fn pfs(table: &str, pred: ScalarExpr, cols: Vec<&str>) -> PlanNode {
        PlanNode::project(cols, PlanNode::filter(pred, PlanNode::scan(table)))
    }

    #[test]
    fn loose_ids_for_filter_project_scan() {
        let filter = PlanNode::filter(
            ScalarExpr::compare(CompareOp::Gt, ScalarExpr::col("age"), ScalarExpr::int(30)),
            PlanNode::scan("employees"),
        );
        let id = operator_id(&filter);
        assert_eq!(id.label, "Filter");
        assert_eq!(id.attrs, None);

        let scan = PlanNode::scan("employees");
        let id = operator_id(&scan);
        assert_eq!(id.label, "Scan:employees");
        assert_eq!(id.attrs, None);
    }

    #[test]
    fn strict_id_for_join_carries_condition() {
        let join = PlanNode::join(
            ScalarExpr::eq(ScalarExpr::col("dep"), ScalarExpr::col("dept_id")),
            PlanNode::scan("employees"),
            PlanNode::scan("departments"),
        );
        let id = operator_id(&join);
        assert_eq!(id.label, "Join");
        assert_eq!(id.attrs.as_deref(), Some("(= col:dep col:dept_id)"));
    }

    #[test]
    fn identical_plans_hash_equal() {
        let a = pfs(
            "employees",
            ScalarExpr::eq(ScalarExpr::col("gender"), ScalarExpr::string("F")),
            vec!["id", "name"],
        );
        assert_eq!(fingerprint(&a), fingerprint(&a.clone()));
    }

    #[test]
    fn loose_operators_ignore_attributes() {
        let a = pfs(
            "employees",
            ScalarExpr::eq(ScalarExpr::col("gender"), ScalarExpr::string("F")),
            vec!["id", "name", "dep"],
        );
        let b = pfs(
            "employees",
            ScalarExpr::compare(CompareOp::Gt, ScalarExpr::col("age"), ScalarExpr::int(30)),
            vec!["id", "name"],
        );
        assert_eq!(fingerprint(&a), fingerprint(&b));
    }

    #[test]
    fn join_child_order_is_isomorphic() {
        let cond = ScalarExpr::eq(ScalarExpr::col("a_id"), ScalarExpr::col("b_id"));
        let ab = PlanNode::join(cond.clone(), PlanNode::scan("table_a"), PlanNode::scan("table_b"));
        let ba = PlanNode::join(cond, PlanNode::scan("table_b"), PlanNode::scan("table_a"));
        assert_eq!(fingerprint(&ab), fingerprint(&ba));
        assert_eq!(fingerprint_string(&ab), fingerprint_string(&ba));
    }

    #[test]
    fn join_condition_is_strict() {
        let left = PlanNode::scan("employees");
        let right = PlanNode::scan("salaries");
        let j1 = PlanNode::join(
            ScalarExpr::eq(ScalarExpr::col("dep"), ScalarExpr::col("dept_id")),
            left.clone(),
            right.clone(),
        );
        let j2 = PlanNode::join(
            ScalarExpr::eq(ScalarExpr::col("id"), ScalarExpr::col("emp_id")),
            left,
            right,
        );
        assert_ne!(fingerprint(&j1), fingerprint(&j2));
    }

    #[test]
    fn scan_table_is_strict_in_practice() {
        assert_ne!(
            fingerprint(&PlanNode::scan("employees")),
            fingerprint(&PlanNode::scan("departments"))
        );
    }

    #[test]
    fn fingerprint_map_matches_direct_computation() {
        let plan = PlanNode::join(
            ScalarExpr::eq(ScalarExpr::col("id"), ScalarExpr::col("emp_id")),
            pfs(
                "employees",
                ScalarExpr::compare(CompareOp::Gt, ScalarExpr::col("age"), ScalarExpr::int(30)),
                vec!["id", "name"],
            ),
            PlanNode::scan("salaries"),
        );
        let map = fingerprint_map(&plan);
        plan.visit(|path, node| {
            let (fp, count) = map[path];
            assert_eq!(fp, fingerprint(node));
            assert_eq!(count, node.node_count());
        });
    }
}
