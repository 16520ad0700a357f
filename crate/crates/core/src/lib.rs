//! Monte Carlo toolkit for strictly alpha-stable Levy processes with a
//! bounded spherical density, killed on leaving a scale-invariant cone.
//!
//! The crate is `no_std` and only needs `alloc`. Threads, files and the
//! command line live in the `anisotable` crate.

#![no_std]
// some float methods are inherent in `core`, which makes rustc misreport `Float` as unused
#![allow(unused_imports)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cone;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod model;
pub mod point;
pub mod sampler;
pub mod seed;
pub mod sphere;
pub mod stats;

pub use cone::ConeDomain;
pub use error::{Error, Result};
pub use exec::{BatchExecutor, Runner, Serial};
pub use model::{ModelParams, SphericalDensity, StableModel};
pub use point::Point;
pub use sampler::{PathSampler, SchemeParams, SchemePolicy, SmallJumpMode};
