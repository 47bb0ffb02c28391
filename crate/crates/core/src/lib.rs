//! Radiomics feature extraction on masked 3D volumes and test-retest
//! repeatability analysis of the resulting features.
//!
//! The extraction side covers shape descriptors, first-order intensity
//! statistics and three texture matrices (GLCM, NGTDM, GLZSM) computed after
//! either fixed-bin-count or fixed-bin-width quantization. The analysis side
//! provides Bland-Altman limits, reliability categories, Spearman rank
//! correlation and ICC(2,1).

pub mod error;
pub mod features;
pub mod first_order;
pub mod phantom;
pub mod quantization;
pub mod repeatability;
pub mod shape;
pub mod texture;
pub mod volume_io;

pub use error::{Error, Result};
pub use features::{extract_features, FeatureSet, FeatureVector};
pub use quantization::{QuantizationSpec, QuantizedRoi};
pub use volume_io::{Mask, RoiSample, Unit, Volume};
