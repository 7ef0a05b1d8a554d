//! Graded differential-operator algebra for supersymmetric quantum mechanics.

pub mod clifford;
pub mod diffop;
pub mod error;
pub mod expr;
pub mod field;
pub mod geometry;
pub mod jet;
pub mod parse;
pub mod sample;
pub mod verify;
pub mod zoo;

pub use clifford::FermionRep;
pub use diffop::{DiffOp, Space};
pub use error::{Error, EvalError, ParseError, Result};
pub use expr::Expr;
pub use field::Field;
pub use jet::{CMat, MultiIndex, C64};
pub use sample::{Execution, Residual, SampleSpec};
pub use verify::{CheckReport, Checker, Expect, Verdict};
pub use zoo::{Algebra, Model};
