//! Exterior calculus, symplectic linear algebra and numerical checks for
//! coisotropic submanifolds, flat bundles and contact germs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bundle;
pub mod coiso;
pub mod error;
pub mod fields;
pub mod forms;
pub mod germ;
pub mod grid;
pub mod linalg;
pub mod par;
pub mod scenario;
pub mod symplin;

pub use error::{Error, Result};
