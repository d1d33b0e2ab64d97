//! White-box uncertainty scores: information-, density-, ensemble- and
//! prompt-based. Every score is oriented higher = more uncertain.

mod density;
mod ensemble;
mod information;

pub use density::{fit_density, mahalanobis, subsample_training, DensityModel, DEFAULT_VARIANCE_KEPT, MAX_TRAINING_SAMPLES};
pub use ensemble::{
    mixture, mixture_entropy, mean_reverse_kl, seq_rmi, seq_total_uncertainty, token_rmi, token_total_uncertainty,
};
pub use information::{categorical_entropy, mcse, msp, mte};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// P(True) uncertainty: `1 - p_true`.
pub fn p_true_uncertainty<T: Scalar>(p_true: T) -> Result<T> {
    if !(p_true >= T::zero() && p_true <= T::one()) {
        return Err(Error::OutOfRange(format!("P(True) must lie in [0, 1], got {p_true}")));
    }
    Ok(T::one() - p_true)
}
