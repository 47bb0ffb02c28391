//! 3D shape descriptors of a binary mask.

mod mesh;
mod tables;

pub use mesh::{
    marching_cubes, smooth, surface_mesh, SurfaceMesh, SMOOTHING_CLAMP, SMOOTHING_ITERATIONS, SMOOTHING_LAMBDA,
    SMOOTHING_MU,
};

use nalgebra::{Matrix3, SymmetricEigen};

use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::volume_io::Mask;

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeResult {
    /// Voxel count times voxel volume, in cm³.
    pub volume_ml: f64,
    pub surface_mm2: f64,
    pub sphericity: f64,
    /// Asphericity, `1 / sphericity - 1`.
    pub irregularity: f64,
    pub major_axis_mm: f64,
    /// Surface over enclosed mesh volume, 1/mm.
    pub surface_volume_ratio: f64,
}

impl ShapeResult {
    pub fn to_feature_set(&self) -> FeatureSet {
        let mut f = FeatureSet::new();
        f.push("volume_ml", self.volume_ml);
        f.push("surface_mm2", self.surface_mm2);
        f.push("sphericity", self.sphericity);
        f.push("irregularity", self.irregularity);
        f.push("major_axis_mm", self.major_axis_mm);
        f
    }
}

fn voxel_volume_mm3(spacing: [f64; 3]) -> f64 {
    spacing[0] * spacing[1] * spacing[2]
}

pub fn mask_volume(mask: &Mask, spacing: [f64; 3]) -> Result<f64> {
    if mask.voxel_count() == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(mask.voxel_count() as f64 * voxel_volume_mm3(spacing) / 1000.0)
}

pub fn mesh_surface_area(mask: &Mask, spacing: [f64; 3]) -> Result<f64> {
    if mask.voxel_count() == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(surface_mesh(mask, spacing).area())
}

fn check_positive(volume_ml: f64, surface_mm2: f64) -> Result<()> {
    if !(volume_ml > 0.0 && surface_mm2 > 0.0) || !volume_ml.is_finite() || !surface_mm2.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "volume and surface must be positive, got {volume_ml} ml and {surface_mm2} mm²"
        )));
    }
    Ok(())
}

/// `π^(1/3) (6 V)^(2/3) / A`, with `V` converted to mm³.
pub fn sphericity(volume_ml: f64, surface_mm2: f64) -> Result<f64> {
    check_positive(volume_ml, surface_mm2)?;
    let v = volume_ml * 1000.0;
    Ok(std::f64::consts::PI.cbrt() * (6.0 * v).powf(2.0 / 3.0) / surface_mm2)
}

/// Asphericity `(A³ / (36 π V²))^(1/3) - 1`; zero for a sphere.
pub fn irregularity(volume_ml: f64, surface_mm2: f64) -> Result<f64> {
    check_positive(volume_ml, surface_mm2)?;
    let v = volume_ml * 1000.0;
    Ok((surface_mm2.powi(3) / (36.0 * std::f64::consts::PI * v * v)).cbrt() - 1.0)
}

/// `4 sqrt(λ_max)` of the covariance of the physical voxel centres.
pub fn major_axis(mask: &Mask, spacing: [f64; 3]) -> Result<f64> {
    if mask.voxel_count() == 0 {
        return Err(Error::EmptyMask);
    }
    let points: Vec<[f64; 3]> = mask
        .coords()
        .into_iter()
        .map(|c| [c[0] as f64 * spacing[0], c[1] as f64 * spacing[1], c[2] as f64 * spacing[2]])
        .collect();
    let n = points.len() as f64;
    let mut mean = [0.0; 3];
    for p in &points {
        for a in 0..3 {
            mean[a] += p[a] / n;
        }
    }
    let mut cov = Matrix3::<f64>::zeros();
    for p in &points {
        let d = [p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]];
        for r in 0..3 {
            for c in 0..3 {
                cov[(r, c)] += d[r] * d[c] / n;
            }
        }
    }
    let largest = SymmetricEigen::new(cov).eigenvalues.max().max(0.0);
    Ok(4.0 * largest.sqrt())
}

/// All shape descriptors of a mask.
///
/// The size-free ratios (sphericity, irregularity, surface/volume) pair the
/// mesh area with the volume enclosed by that same mesh, which keeps them
/// bounded by the isoperimetric inequality even for masks of a few voxels.
/// `volume_ml` is the voxel-count volume.
pub fn shape_features(mask: &Mask, spacing: [f64; 3]) -> Result<ShapeResult> {
    let volume_ml = mask_volume(mask, spacing)?;
    let mesh = surface_mesh(mask, spacing);
    let surface_mm2 = mesh.area();
    let mesh_ml = mesh.enclosed_volume() / 1000.0;
    Ok(ShapeResult {
        volume_ml,
        surface_mm2,
        sphericity: sphericity(mesh_ml, surface_mm2)?,
        irregularity: irregularity(mesh_ml, surface_mm2)?,
        major_axis_mm: major_axis(mask, spacing)?,
        surface_volume_ratio: surface_mm2 / (mesh_ml * 1000.0),
    })
}
