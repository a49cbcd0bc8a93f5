//! Combs, nested interval-partitions of (0, 1), and the exchangeable
//! coalescents they encode.
//!
//! The main entry points:
//!
//! * [`interval`]: interval-partitions, mass-partitions, Hausdorff distance.
//! * [`comb`]: combs, comb functions, comb metrics, Kingman combs.
//! * [`paintbox`]: sampling partitions and ordered trajectories from a comb.
//! * [`partition`]: partitions, compositions and their trajectories.
//! * [`lambda`]: Λ-coalescent rates and the partition / composition chains.
//! * [`bridge`]: exchangeable bridges, their composition and inverses.
//! * [`evolve`]: the comb-valued Markov process driven by Kingman combs.
//! * [`backbone`]: ultrametric measure spaces and their backbone.
//! * [`verify`]: the statistical verification suites.

// `!(x > 0.0)` style guards are meant to reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backbone;
pub mod bridge;
pub mod comb;
pub mod error;
pub mod evolve;
pub mod interval;
pub mod lambda;
pub mod paintbox;
pub mod partition;
pub mod replicate;
pub mod stats;
pub mod verify;

pub use comb::{Comb, CombView, Height, Tooth, ToothComb};
pub use error::{Error, Result};
pub use interval::{Interval, IntervalPartition, MassPartition};
pub use replicate::{replicate, replicate_sequential, SimRng};

use rand::Rng;

/// A uniform draw from the open interval (0, 1).
pub(crate) fn uniform_open<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}
