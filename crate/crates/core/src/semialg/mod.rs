//! Semi-algebraic sets in the unit interval and square: presentations,
//! cylindrical decompositions, slices and Nash branches.

pub mod branch;
pub mod cad;
pub mod presentation;

pub use branch::{branch_eval, BranchJet};
pub use cad::{
    cad_line, cad_plane, decompose, max_dimension, slices_of, BaseCell1D, Bound, Column,
    Decomposition, FiberPart, NashBranch, RowTest, Slice,
};
pub use presentation::{box_interval, presentation_degree, Presentation, Rel, SignCondition};
