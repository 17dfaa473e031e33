//! Numerical laboratory for self-similar shrinkers of curvature flows.
//!
//! * [`symfun`]: symmetric speed functions, their derivatives and
//!   structural inequalities; [`battery`] samples them all at once.
//! * [`matrixfun`]: the same functions on symmetric matrices.
//! * [`hypersurface`]: discrete axisymmetric bodies and radial graphs.
//! * [`solver`]: shrinker residual, Newton solver and normalized flow.
//! * [`quantities`]: pointwise maximum-principle quantities.
//!
//! The guide in `book/` walks through each module; its snippets run as
//! doc-tests of this crate.

pub mod battery;
pub mod error;
pub mod hypersurface;
pub mod matrixfun;
pub mod quantities;
pub mod solver;
pub mod symfun;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/speed-functions.md")]
    mod speed_functions {}
    #[doc = include_str!("../../../book/src/matrix-functions.md")]
    mod matrix_functions {}
    #[doc = include_str!("../../../book/src/hypersurfaces.md")]
    mod hypersurfaces {}
    #[doc = include_str!("../../../book/src/shrinkers.md")]
    mod shrinkers {}
    #[doc = include_str!("../../../book/src/flow.md")]
    mod flow {}
    #[doc = include_str!("../../../book/src/quantities.md")]
    mod quantities {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}
