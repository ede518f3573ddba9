//! Compiler and design-space exploration toolkit for surface-code memory
//! experiments on trapped-ion QCCD hardware.
//!
//! The pipeline runs code generation ([`codes`]), native-gate lowering
//! ([`translate`]), qubit placement ([`place`]), ion routing ([`route`]),
//! scheduling ([`schedule`]), noise annotation ([`noise`]) and emission
//! ([`emit`]). [`pipeline::compile`] chains them for one configuration and
//! [`sweep`] runs many configurations in parallel.

pub mod codes;
pub mod device;
pub mod emit;
pub mod error;
pub mod noise;
pub mod par;
pub mod pipeline;
pub mod place;
pub mod resources;
pub mod route;
pub mod schedule;
pub mod sweep;
pub mod translate;
pub mod verify;

pub use error::{Error, Result};
pub use pipeline::{compile, CompileConfig, Compiled, ConfigTuple};
