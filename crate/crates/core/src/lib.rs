//! Parabolicity type of symmetric infinite hyperbolic surfaces.
//!
//! The crate works from Fenchel-Nielsen data of tight flutes (cuff lengths
//! `l_n`, twists in `{0, 1/2}`), of basic end surfaces with bounded borders, and
//! of finite trees of such ends. It computes the shear coordinates of the
//! zig-zag geodesic chain on the front of the surface, evaluates the series
//! criteria for parabolicity, develops the chain in the upper half-plane to
//! watch its endpoints accumulate, and synthesizes length sequences that are
//! certified parabolic while dominating (or being dominated by) a prescribed
//! sequence.
//!
//! All reals are MPFR floats at a caller-chosen precision (256 bits by
//! default).

pub mod cli;
pub mod criterion;
pub mod ends;
pub mod error;
pub mod hyp;
pub mod polygon;
pub mod real;
pub mod shear;
pub mod surface;
pub mod synth;

pub use error::{Error, Result, Violation};
