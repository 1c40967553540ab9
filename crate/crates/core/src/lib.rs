//! Weighted Chernoff information and context-weighted hypothesis testing.
//!
//! The central object is the weighted affinity
//! `ρ^w_α(p, q) = ∫ φ p^α q^{1−α} dμ` for a positive context weight `φ`.
//! Everything else is built on its logarithm `F(α) = ln ρ^w_α`, which is
//! convex in `α`:
//!
//! * [`affinity`]: the curve `F`, the weighted Bhattacharyya distance and the
//!   weighted Chernoff information `D_C^w = max_α −F(α)`.
//! * [`expfam`]: weighted Kullback–Leibler divergence and weighted Bregman
//!   divergence for one-parameter exponential families.
//! * [`testing`]: optimal weighted Bayes loss, its exponent, M-ary problems and
//!   concentration of the tilted log-likelihood.
//!
//! ```
//! use wchernoff::{affinity, Model, Weight};
//!
//! let p = Model::poisson(2.0)?;
//! let q = Model::poisson(1.0)?;
//! let c = affinity::chernoff(&p, &q, &Weight::Const)?;
//! assert!((c.alpha_star - 0.528_766_372_9).abs() < 1e-8);
//! # Ok::<(), wchernoff::Error>(())
//! ```

pub mod affinity;
pub mod error;
pub mod expfam;
pub mod models;
pub mod quad;
pub mod rng;
pub mod special;
pub mod testing;

pub use affinity::{chernoff, rho_w, weighted_bhattacharyya, AffinityCurve, Boundary, ChernoffResult};
pub use error::{Error, Result};
pub use models::{Family, Model, Point, SampleSpace, TiltedDensity, Weight};
