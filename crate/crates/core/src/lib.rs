//! Fundamental quantities of finite Markov systems through the generalized
//! fundamental matrix `Z_r = (I - P + e r)⁻¹`.
//!
//! For an irreducible chain with transition matrix `P` and any row vector `r`
//! with `r·e ≠ 0`, one factorization of `I - P + e r` gives both the
//! stationary distribution and the performance potentials, with no need to
//! know `π` in advance:
//!
//! ```
//! use fundmat::{gfm, ReferenceVector, RewardVector, StochasticMatrix, Tolerances};
//!
//! let tol = Tolerances::default();
//! let p = StochasticMatrix::from_rows(&[[0.9, 0.1], [0.2, 0.8]], tol.row_tol)?;
//! let f = RewardVector::new(vec![1.0, 0.0])?;
//! let r = ReferenceVector::unit(2, 0)?;
//!
//! let pi = gfm::stationary(&p, &r, &tol)?;
//! assert!((pi.pi[0] - 2.0 / 3.0).abs() < 1e-12);
//!
//! let sol = gfm::potentials(&p, &f, &r, &tol)?;
//! assert!((sol.eta - 2.0 / 3.0).abs() < 1e-12);
//! assert!((r.dot(&sol.g) - sol.eta).abs() < 1e-12);
//! # Ok::<(), fundmat::Error>(())
//! ```
//!
//! The same construction covers continuous-time processes ([`ctmc`]) and
//! Q-factors of a randomized policy ([`qfactors`]); [`estimator`] learns the
//! potentials from a simulated sample path.

// negated comparisons are how NaN inputs are made to fail validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod ctmc;
pub mod error;
pub mod estimator;
pub mod fmt;
pub mod gfm;
pub mod linalg;
pub mod model;
pub mod qfactors;
pub mod report;
pub mod rng;
pub mod spectrum;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use gfm::{Normalization, PotentialSolution, StationaryDistribution};
pub use model::{
    diagnose_chain, min_uniformization_rate, uniformize, validate_generator, validate_stochastic,
    ChainDiagnostics, GeneratorMatrix, MdpModel, ReferenceVector, RewardVector, StochasticMatrix,
};
pub use report::{Check, CheckStatus, Report};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/fundamental-matrix.md")]
    mod fundamental_matrix {}
    #[doc = include_str!("../../../book/src/potentials.md")]
    mod potentials {}
    #[doc = include_str!("../../../book/src/series.md")]
    mod series {}
    #[doc = include_str!("../../../book/src/continuous-time.md")]
    mod continuous_time {}
    #[doc = include_str!("../../../book/src/q-factors.md")]
    mod q_factors {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
