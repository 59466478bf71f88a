//! Triangular Nash charts, their jets and C^α norm estimates.

pub mod chart;
pub mod eval;
pub mod expr;
pub mod multiindex;
pub mod norm;
pub mod rescale;
pub mod resolution;

pub use chart::{compose, jet_eval, JetTable, TriangularChart};
pub use eval::{eval_f64, eval_jets, eval_many_f64, jets_at, EvalScalar, Evaluator};
pub use expr::{exprs_from_json, exprs_to_json, BranchNode, ChartExpr, Node, Num};
pub use multiindex::{mi_cmp, mi_leq, mi_succ, MultiIndex};
pub use norm::{norm_estimate, sup_on_points, NormPolicy, NormReport};
pub use rescale::{pieces_for, relevant_axes, rescale_to_unit, unit_pieces, Rescaled};
pub use resolution::{alpha_for, ChartRecord, Domain, EstimateRecord, InverseRecord, Resolution};
