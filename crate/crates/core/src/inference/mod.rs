//! Likelihood evaluation, analytic gradients and constrained multi-start MLE.

mod fit;
mod likelihood;
pub mod optim;

pub use fit::{
    fit_mle, FitConfig, FitFamily, FitResult, FittedParams, StartTrace, SUBCRITICAL_MARGIN,
};
pub use likelihood::{
    gradient_exponential, gradient_marked_exponential, gradient_marked_powerlaw,
    likelihood_terms, log_likelihood, log_likelihood_exponential_recursive,
    log_likelihood_marked_exponential, log_likelihood_marked_powerlaw, Evaluation,
    ExponentialHawkesParams, LikelihoodTerms, LOG_FLOOR,
};
