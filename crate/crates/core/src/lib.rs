//! Uniform estimation of event probabilities on finite product domains.

pub mod domain;
pub mod error;
pub mod family;

pub use domain::{build_grid, trace_of, AxisLine, Bits, Caps, Grid, Point, ProductDomain, Trace};
pub use error::{Error, Result};
pub use family::{restrict_to_line, symdiff_family, Member, SetFamily};
pub mod distributions;
pub mod info;
pub mod rng;
pub mod combinatorics;
pub mod estimators;
pub mod experiments;
