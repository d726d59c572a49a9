//! Finite projective planes and dominating sets of their incidence graphs.
//!
//! [`gf`] supplies the field arithmetic, [`plane`] builds and validates
//! planes, [`sets`] evaluates predicates on candidate sets, [`constructions`]
//! builds the standard families, [`solver`] runs exact searches and
//! [`feasibility`] scans the integer counting conditions.

pub mod bits;
pub mod cli;
pub mod constructions;
pub mod feasibility;
pub mod gf;
pub mod plane;
pub mod sets;
pub mod solver;
