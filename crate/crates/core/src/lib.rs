// Negated float comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod eval;
pub mod fileio;
pub mod geom;
pub mod model;
mod par;
pub mod props;
pub mod proxy;
pub mod roundrobin;
pub mod session;
pub mod template;
pub mod units;

pub use error::{Error, Result};
pub use geom::{Aabb, Vec3};
