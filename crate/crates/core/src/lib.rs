//! Exact computations around ordinal ε-areas, Bourgain–Delbaen spaces and their Szlenk indices.

pub mod bdspace;
pub mod dualtree;
pub mod error;
pub mod matrix;
pub mod ordinal;
pub mod ordmeasure;
pub mod par;
pub mod rational;
pub mod stepfn;
pub mod trace;
pub mod verify;

pub use bdspace::{BDParams, BDSpace, PhiTuple};
pub use dualtree::{TreeNode, TreeValuation, WValue, XWindow};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use ordinal::Ordinal;
pub use ordmeasure::{OrdinalMeasure, OrdinalSpace, SignedMeasure};
pub use par::Mode;
pub use rational::Rational;
pub use stepfn::{c_area, c_area_oracle, CompressionTrace, StepFunction};
