//! Surprisal uniformity measures, MT metrics with MBR utilities,
//! genetic-algorithm decoding over translation candidates, and InfoNCE
//! numerics.
//!
//! The numeric modules ([`measures`], [`stats`], [`infonce`]) are generic
//! over the scalar type through [`Real`]; the aliases below fix it to `f64`
//! or `f32`. Metrics and GA fitness work in `f64`.

pub mod ga;
pub mod infonce;
pub mod measures;
pub mod metrics;
pub mod scalar;
pub mod scoring;
pub mod stats;

pub use scalar::Real;

pub type SurprisalSequence = measures::SurprisalSequence<f64>;
pub type SurprisalSequenceF32 = measures::SurprisalSequence<f32>;
pub type UnigramModel = measures::UnigramModel<f64>;
pub type UnigramModelF32 = measures::UnigramModel<f32>;
pub type CorpusStats = measures::CorpusStats<f64>;
pub type UniformityReport = measures::UniformityReport<f64>;
pub type PairedSeries = stats::PairedSeries<f64>;
pub type PairedSeriesF32 = stats::PairedSeries<f32>;
pub type ThresholdCurve = stats::ThresholdCurve<f64>;
pub type QualityItem = stats::QualityItem<f64>;
pub type EmbeddingBatch = infonce::EmbeddingBatch<f64>;
pub type EmbeddingBatchF32 = infonce::EmbeddingBatch<f32>;
pub type BilinearParams = infonce::BilinearParams<f64>;
pub type BilinearParamsF32 = infonce::BilinearParams<f32>;
