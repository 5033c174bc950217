//! Photon statistics and conditioned homodyne correlations for a two-level
//! atom trapped in the intracavity optical lattice of a weakly driven cavity.
//!
//! The pipeline runs from the vibrational ladders ([`mathieu`],
//! [`dressed_lattice`]) through Franck–Condon overlaps ([`overlaps`]) to the
//! weak-field amplitude hierarchy ([`dynamics`]). From there come the g² and hθ
//! traces ([`correlations`]) and their classical-inequality flags
//! ([`classifier`]). [`oracle`] solves the full master equation as an
//! independent check. [`config`] and [`cli`] drive batch runs.
//!
//! ```
//! use cavity_lattice::correlations::{g2, uniform_grid, Channel};
//! use cavity_lattice::dressed_lattice::LatticeSystem;
//!
//! let trace = g2(Channel::FF, &LatticeSystem::canonical(), &uniform_grid(20.0, 41))?;
//! assert!(trace.values[0].abs() < 1e-12);
//! # Ok::<(), cavity_lattice::Error>(())
//! ```
//!
//! The guide in [`book`] explains each stage with runnable examples.

pub mod error;
pub mod mathieu;
pub mod quadrature;
pub mod units;

pub use error::{Error, Result};
pub mod dressed_lattice;
pub mod overlaps;
pub mod dynamics;
pub mod correlations;
pub mod classifier;
pub mod oracle;
pub mod config;
pub mod plot;
pub mod cli;

/// The guide, one module per chapter, so its examples run as doctests.
pub mod book {
    #[doc = include_str!("../../../README.md")]
    pub mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/mathieu.md")]
    pub mod mathieu {}
    #[doc = include_str!("../../../book/src/overlaps.md")]
    pub mod overlaps {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    pub mod dynamics {}
    #[doc = include_str!("../../../book/src/correlations.md")]
    pub mod correlations {}
    #[doc = include_str!("../../../book/src/classifier.md")]
    pub mod classifier {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    pub mod oracle {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
