//! Second-order catalytic conversion toolkit.
//!
//! Classical spectra, majorization orders, second-order rate expansions, and
//! an exact classical simulation of the correlated-catalytic protocol built
//! from `n` copies of the source state.
//!
//! ```
//! use catalysis::spectra::{GibbsSpec, ProbVec};
//! use catalysis::second_order::{rates, TheoryKind};
//!
//! let p = ProbVec::new(vec![0.84, 0.10, 0.06]).unwrap();
//! let q = ProbVec::new(vec![0.79, 0.19, 0.02]).unwrap();
//! let theory = TheoryKind::Athermality(GibbsSpec::uniform(3).unwrap());
//! let r = rates(&theory, &p, &q, 0.03).unwrap();
//! assert!((r.rate - 1.0665).abs() < 2e-3);
//! ```

pub mod catalyst;
pub mod error;
pub mod io;
pub mod lp;
pub mod majorization;
pub mod normal;
pub mod qstates;
pub mod second_order;
pub mod spectra;

mod jacobi;

pub use error::{Error, Result};
pub use spectra::{GibbsSpec, ProbVec, ProductProbVec};
