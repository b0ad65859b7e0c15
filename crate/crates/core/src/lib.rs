//! Half-duplex relay scheduling by maximizing the i.i.d.-input cut-set bound.

pub mod baselines;
pub mod cutgraph;
pub mod error;
pub mod gauss;
pub mod grouping;
pub mod io;
pub mod lindet;
pub mod lp;
pub mod net;
pub mod opt;
pub mod schedule;
pub mod sfm;

pub use error::{Error, Result};
