//! Robust time-optimal quantum control under bang-bang gate errors.
//!
//! Controls drive a register through channels that can switch from an
//! intended Hamiltonian to an erroneous one at random times. The crate
//! propagates these switched dynamics exactly, measures paths with
//! right-invariant complexity metrics, optimizes schedules against sampled
//! error scenarios, and checks the error bounds that turn a Hamiltonian path
//! into a gate sequence.
//!
//! ```
//! use qrobust::dynamics::{propagate, ControlSchedule, HamiltonianSet};
//! use qrobust::gates;
//! use qrobust::linalg::sup_distance;
//! use qrobust::noise::NoiseRealization;
//!
//! let set = HamiltonianSet::figure2();
//! let schedule = ControlSchedule::constant(0.1, 10, &[0.0, 1.0], 1.0)?;
//! let clean = propagate(&schedule, None, &set)?;
//! let broken = propagate(&schedule, Some(&NoiseRealization::all_error(2, 1.0)?), &set)?;
//! assert!(sup_distance(clean.final_unitary(), broken.final_unitary(), true)? > 0.1);
//! # Ok::<(), qrobust::Error>(())
//! ```
//!
//! The guide in `book/` walks through each module; its snippets run as
//! doctests.

pub mod bounds;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod gates;
pub mod linalg;
pub mod metrics;
pub mod noise;
pub mod pauli;
pub mod robust;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/linalg.md")]
    mod linalg {}
    #[doc = include_str!("../../../book/src/pauli.md")]
    mod pauli {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/noise.md")]
    mod noise {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/robust.md")]
    mod robust {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
