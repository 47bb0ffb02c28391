//! Named feature collections and the per-lesion extraction pipeline.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::first_order::first_order_features;
use crate::quantization::{quantize, QuantizationSpec};
use crate::shape::shape_features;
use crate::texture::{build_glcm, build_glzsm, build_ngtdm, glcm_features, glzsm_features, ngtdm_features};
use crate::volume_io::{extract_roi, Mask, Volume};

/// An ordered list of `(name, value)` pairs produced by one feature family,
/// plus the names whose value fell back to a convention because the input
/// was degenerate (zero variance, a single grey level, ...).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureSet {
    entries: Vec<(&'static str, f64)>,
    degenerate: Vec<&'static str>,
}

impl FeatureSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: &'static str, value: f64) {
        self.entries.push((name, value));
    }

    pub fn flag(&mut self, name: &'static str) {
        if !self.degenerate.contains(&name) {
            self.degenerate.push(name);
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }

    pub fn is_degenerate(&self, name: &str) -> bool {
        self.degenerate.contains(&name)
    }

    pub fn degenerate(&self) -> &[&'static str] {
        &self.degenerate
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// All features of one lesion, keyed by stable dot-namespaced ids such as
/// `shape.volume_ml`, `fo.mean` or `glcm.entropy@bins64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub lesion_id: String,
    pub values: Vec<(String, f64)>,
    /// Features whose value is a degenerate-input convention.
    #[serde(default)]
    pub degenerate: Vec<String>,
    pub quantizations: Vec<QuantizationSpec>,
}

impl FeatureVector {
    pub fn get(&self, id: &str) -> Option<f64> {
        self.values.iter().find(|(n, _)| n == id).map(|(_, v)| *v)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.values.iter().map(|(n, _)| n.as_str())
    }

    fn append(&mut self, family: &str, suffix: Option<&str>, set: &FeatureSet) {
        let id = |name: &str| match suffix {
            Some(tag) => format!("{family}.{name}@{tag}"),
            None => format!("{family}.{name}"),
        };
        for (name, value) in set.iter() {
            self.values.push((id(name), value));
        }
        for name in set.degenerate() {
            self.degenerate.push(id(name));
        }
    }
}

/// Computes shape, first-order and, for every quantization in `quants`,
/// GLCM/NGTDM/GLZSM features. Column order is fixed: shape, first-order,
/// then each quantization's textures in the order given.
pub fn extract_features(
    lesion_id: &str,
    volume: &Volume,
    mask: &Mask,
    quants: &[QuantizationSpec],
) -> Result<FeatureVector> {
    let roi = extract_roi(volume, mask)?;
    let mut fv = FeatureVector {
        lesion_id: lesion_id.to_string(),
        values: Vec::new(),
        degenerate: Vec::new(),
        quantizations: quants.to_vec(),
    };
    fv.append("shape", None, &shape_features(mask, volume.spacing())?.to_feature_set());
    fv.append("fo", None, &first_order_features(&roi)?.to_feature_set());
    for spec in quants {
        let q = quantize(&roi, *spec)?;
        let tag = spec.tag();
        fv.append("glcm", Some(&tag), &glcm_features(&build_glcm(&q)?));
        fv.append("ngtdm", Some(&tag), &ngtdm_features(&build_ngtdm(&q)?));
        fv.append("glzsm", Some(&tag), &glzsm_features(&build_glzsm(&q)?));
    }
    Ok(fv)
}
