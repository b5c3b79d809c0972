//! Batch multi-query optimizer built around an in-memory cache.
//!
//! Given a batch of SQL queries, the optimizer detects structurally similar
//! subexpressions across their logical plans, builds covering expressions
//! that subsume the shared work, selects which covering outputs to
//! materialize under a memory budget (a multiple-choice knapsack), and
//! rewrites the consumer queries to read the cached relations. An embedded
//! columnar engine executes both the original and the rewritten batch so
//! that equivalence and savings can be measured.
//!
//! Pipeline, end to end:
//!
//! ```text
//! .sql files -> sql::parse -> sql::optimize_single      (per-query plans)
//!            -> sharing::identify_ses                   (similar subexpressions)
//!            -> covering::build_ce + generate_kp_items  (candidate sharing plans)
//!            -> cost::CostModel                         (value/weight per candidate)
//!            -> mckp::solve                             (budgeted selection)
//!            -> rewrite                                 (cache plans + rewritten queries)
//!            -> engine::run_batch                       (execute, verify, measure)
//! ```

pub mod config;
pub mod cost;
pub mod covering;
pub mod engine;
pub mod error;
pub mod fingerprint;
pub mod mckp;
pub mod pipeline;
pub mod plan;
pub mod report;
pub mod rewrite;
pub mod sharing;
pub mod sql;
pub mod workbench;

#[doc(hidden)]
pub mod testkit;

pub use error::{Error, Result};
