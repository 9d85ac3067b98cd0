//! Achievable rates for the two-relay channel with a decode-and-forward relay
//! and a quantizing relay that splits its quantization index by superposition
//! coding.
//!
//! The crate evaluates the rate bounds of the split scheme (joint and
//! successive decoding at the decode-and-forward relay) on discrete joint
//! distributions and on the Gaussian channel, compares them with the
//! unsplit mixed scheme, all-DF, noisy network coding and the cut-set bound,
//! and re-derives the split scheme's bounds from its raw error-event
//! constraints by exact Fourier-Motzkin elimination.
//!
//! Modules:
//!
//! - [`channel`]: gains and geometry of the Gaussian two-relay channel.
//! - [`info`]: entropy and mutual information for dense pmfs and Gaussian systems.
//! - [`schemes`]: rate bounds of every scheme.
//! - [`optimizer`]: grid + golden-section parameter search and sweeps.
//! - [`regions`]: rational inequality systems, elimination and equivalence checks.
//! - [`selftest`]: the acceptance checks, runnable from tests or the CLI.

pub mod channel;
mod error;
pub mod info;
pub mod optimizer;
pub mod regions;
pub mod schemes;
pub mod selftest;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/channel.md")]
    mod channel {}
    #[doc = include_str!("../../../book/src/information.md")]
    mod information {}
    #[doc = include_str!("../../../book/src/schemes.md")]
    mod schemes {}
    #[doc = include_str!("../../../book/src/optimization.md")]
    mod optimization {}
    #[doc = include_str!("../../../book/src/elimination.md")]
    mod elimination {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
