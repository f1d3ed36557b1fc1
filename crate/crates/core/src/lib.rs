//! Exact arithmetic for (C,F)-constructions of rank-one nonsingular group actions.
//!
//! The crate is organised bottom-up:
//!
//! * [`groups`]: concrete countable groups, cofinite subgroups, coset spaces.
//! * [`measures`]: finitely supported measures with exact rational weights.
//! * [`cf`]: (C,F)-parameters, validation, telescoping, reduction, the partial
//!   action and the Radon–Nikodym cocycle.
//! * [`factors`]: finite factors, compatibility sums and window scans.
//! * [`odometers`]: chains of cofinite subgroups and the odometer machinery.
//! * [`zstack`]: cutting-and-stacking geometry for actions of the integers.
//! * [`catalog`]: named parameter sets and scenarios.
//!
//! Limit conditions are never decided outright. They come back as a
//! [`verdict::Verdict`] holding the exact terms that were probed.

pub mod catalog;
pub mod cf;
pub mod error;
pub mod factors;
pub mod groups;
pub mod json;
pub mod measures;
pub mod odometers;
pub mod rational;
pub mod svg;
pub mod verdict;
pub mod zstack;

pub use error::{Error, Result};
pub use groups::{CofiniteSubgroup, CosetSpace, GroupCtx, GroupElement};
pub use measures::FinMeasure;
pub use rational::Q;
