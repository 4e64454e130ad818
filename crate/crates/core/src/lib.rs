// `!(x > tol)` comparisons are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contact;
pub mod error;
pub mod expr;
pub mod flows;
pub mod integrability;
pub mod linalg;
pub mod region;
pub mod symplectic;
pub mod tensor;

pub use contact::{ContactChart, ContactSystem};
pub use error::{Error, Result};
pub use expr::{Expr, ExprError, Jet1, Jet2};
pub use flows::{IntegratorConfig, Trajectory, TrajectoryStatus, VectorField};
pub use nalgebra::DMatrix;
pub use region::Region;
pub use symplectic::{SympChart, SympPoint, SympSystem};
pub use tensor::{Covector, Vector};
