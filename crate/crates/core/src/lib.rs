//! Estimators of Gamma distribution parameters: method of moments, two
//! maximum-likelihood iterations and two conjugate-prior Bayesian
//! estimators whose shape expectation is taken at the Laplace mode.
//!
//! ```
//! use gamma_bayes::{fit, sample, FitOptions, GammaParams, Method};
//!
//! let truth = GammaParams::new(10.0, 25.0).unwrap();
//! let s = sample(&truth, 1000, 1).unwrap();
//! let r = fit(&s, Method::Bl1, &FitOptions::default()).unwrap();
//! assert!(r.converged);
//! assert!((r.params.shape() - 10.0).abs() < 1.5);
//! ```

pub mod analysis;
pub mod curves;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod io;
pub mod model;
pub mod rng;
pub mod specfun;

pub use error::{Error, Result};
pub use estimators::{
    fit, fit_traced, ConvergenceConfig, FitOptions, FitResult, Method, Posterior, RatePrior,
    ShapePriorBl1, ShapePriorBl2,
};
pub use model::{
    kl_divergence, log_likelihood, log_pdf, moments, profile_log_likelihood, sample, GammaParams,
    Sample,
};
