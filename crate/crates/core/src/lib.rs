//! Cauchy–Szegő kernel on the quaternionic Siegel upper half-space and the
//! quaternionic Heisenberg group `ℋ^{n-1}` that parametrizes its boundary.

pub mod error;
pub mod heisenberg;
pub mod io;
pub mod kernel;
pub mod lattice;
pub mod projection;
pub mod quaternion;
pub mod reduce;
pub mod sampling;
pub mod scalar;
pub mod verification;

pub use error::{Error, Result};
pub use heisenberg::{GroupPoint, SiegelPoint};
pub use kernel::KernelConfig;
pub use quaternion::{HVector, ImQuaternion, Quaternion};
