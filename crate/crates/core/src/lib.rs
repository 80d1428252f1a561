//! Secure distributed matrix multiplication over prime fields.
//!
//! Two coded-computation protocols are implemented end to end:
//!
//! * [`ssmm`]: one product `AB` over `N` servers, private against any
//!   `X_A` (resp. `X_B`) colluding servers and tolerant of `N - K`
//!   stragglers.
//! * [`smbmm`]: a batch of `M = G * L` products; servers additionally share
//!   common randomness so that the user learns nothing beyond the products.
//!
//! [`harness`] runs both protocols in process with simulated stragglers,
//! [`audit`] turns the security statements into exact finite checks and
//! [`analysis`] evaluates closed-form thresholds of this and competing
//! schemes.

pub mod analysis;
pub mod audit;
pub mod config;
pub mod cost;
pub mod error;
pub mod field;
pub mod harness;
pub mod linalg;
pub mod matpoly;
pub mod matrix;
pub mod poly;
pub mod rng;
pub mod smbmm;
pub mod ssmm;

pub use error::{Error, Result};
pub use field::{Fe, Field};
pub use matrix::{matmul_oracle, Matrix, PartitionSpec};
