//! Bayesian feature detectors for gray-level images.
//!
//! A detector here returns likelihoods `P(O | F)` of an observed window under a
//! set of mutually exclusive feature propositions; [`bayes`] turns those into
//! posteriors. The noise process is an explicit table `P(observed | actual)`
//! ([`noise::NoiseMatrix`]), and every detector can be checked against a
//! brute-force enumeration of a tiny world ([`oracle`]).
//!
//! Modules:
//!
//! - [`noise`]: noise matrices for additive Gaussian, replacement and mixture noise.
//! - [`prior`]: gray-level distributions, histograms and histogram deconvolution.
//! - [`detector`]: interior, exterior and boundary window likelihoods, pruning, image scans.
//! - [`bayes`]: posteriors, the disjoint-domain combination rule, probability maps.
//! - [`gradient`]: the two-pixel boundary detector and gradient monotonicity analysis.
//! - [`oracle`]: circumstance enumeration, synthetic rectangle scenes, map scoring.
//! - [`image`] and [`pgm`]: gray-level images, windows, masks and PGM I/O.

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bayes;
pub mod cost;
pub mod detector;
pub mod error;
pub mod gradient;
pub mod image;
pub mod noise;
pub mod oracle;
pub mod pgm;
pub mod prior;

pub use error::{Error, Result};
