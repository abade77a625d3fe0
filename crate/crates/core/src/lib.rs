//! Evidence fusion over hyper-power sets.
//!
//! The crate builds the lattice of all intersections and unions of a frame
//! of atoms, restricts it by integrity constraints, combines basic belief
//! assignments with Dempster's rule and the classic and hybrid DSm rules,
//! and projects the result onto a probability distribution through the
//! generalized pignistic transformation.

pub mod bba;
pub mod error;
pub mod expr;
pub mod fusion;
pub mod lattice;
pub mod model;
pub mod pignistic;

pub use bba::{BbaFile, LoadOptions, MassFunction};
pub use error::{Error, Result};
pub use expr::Expr;
pub use fusion::{conflict_degree, dempster_combine, dsm_classic_combine, dsm_hybrid_combine};
pub use fusion::{FusionReport, MassBreakdown};
pub use lattice::{Element, FreeLattice, PartMask, ThetaSet, ELEMENT_COUNTS, MAX_FRAME};
pub use model::{
    classify_constraint, ConstraintKind, Model, ModelFile, ModelKind, ModelRef, ModelSpec, Survivor,
};
pub use pignistic::{
    classical_pt, decide, gpt, gpt_coefficients, pt_coefficients, singleton_candidates,
    verify_axioms, AxiomCheck, AxiomReport, CoefficientRow, CoefficientTable, Decision,
    PignisticDist,
};
