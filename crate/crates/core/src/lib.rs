//! Uncertainty-estimation evaluation for summarization outputs.
//!
//! Generation records are scored by white-box and black-box uncertainty
//! methods and by NLG quality metrics; each (method, metric) pair is then
//! evaluated with the Prediction Rejection Ratio.
//!
//! Numeric kernels are generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below fix the usual double-precision instantiation.

pub mod analysis;
pub mod blackbox;
pub mod error;
pub mod linalg;
pub mod nlg;
pub mod numeric;
pub mod pipeline;
pub mod prr;
pub mod record;
pub mod scalar;
pub mod score;
pub mod whitebox;

pub use error::{Error, Result};
pub use numeric::{minmax_normalize, rank_ascending};
pub use prr::{prr, PrrResult, RandomBaseline};
pub use record::{parse_record_file, validate_record, EnsembleBlock, GenerationRecord, SampledGeneration};
pub use scalar::Scalar;
pub use score::{ScoreKind, ScoreVector};

pub type ScoreVector64 = score::ScoreVector<f64>;
pub type ScoreVector32 = score::ScoreVector<f32>;
pub type PrrResult64 = prr::PrrResult<f64>;
pub type PrrTable64 = analysis::PrrTable<f64>;
pub type CorrelationMatrix64 = analysis::CorrelationMatrix<f64>;
pub type DensityModel64 = whitebox::DensityModel<f64>;
pub type SimilarityGraph64 = blackbox::SimilarityGraph<f64>;
pub type Matrix64 = linalg::Matrix<f64>;
