//! Numerical checks of the evolution equations, identities and inequalities
//! along computed flows.

pub mod inequality;
pub mod order;
pub mod reaction;
pub mod report;
pub mod residual;
pub mod suite;

pub use inequality::{evaluate_snapshot, inequality_suite, SnapshotInequalities};
pub use order::{convergence_order, OrderStudy};
pub use reaction::ReactionTerms;
pub use report::{CheckRow, VerificationReport, REPORT_HEADER};
