//! Orlicz spaces over finite probability spaces, scalar and module valued.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convexity;
pub mod duality;
mod error;
pub mod module;
pub mod optim;
pub mod orlicz;
pub mod orlicz_module;
pub mod prob;
pub mod young;

pub use error::{Error, Result};
pub use module::{LpExponent, ModuleElement, RandomFunctional, RnModule};
pub use orlicz::{NormFlavor, OrliczContext};
pub use orlicz_module::ModuleOrliczContext;
pub use prob::{pointwise_sup, sgn, EventClass, ProbSpace, RandomVariable};
pub use young::{Delta2, PiecewiseLinear, Tabulated, Tail, YoungFunction};
