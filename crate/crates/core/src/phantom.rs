//! Synthetic test-retest lesions.
//!
//! A phantom is a shared texture field (Gaussian-smoothed white noise) inside
//! a ball, ellipsoid or blob, observed twice with independent additive noise.
//! Randomness comes from ChaCha8 seeded with `seed` via
//! `SeedableRng::seed_from_u64`, split into fixed streams:
//!
//! | stream | use            |
//! |--------|----------------|
//! | 0      | texture field  |
//! | 1      | test noise     |
//! | 2      | retest noise   |
//! | 3      | blob lobes     |
//!
//! Voxels are filled in x-fastest order, one standard-normal draw each.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume_io::{Mask, Unit, Volume};

const STREAM_TEXTURE: u64 = 0;
const STREAM_TEST_NOISE: u64 = 1;
const STREAM_RETEST_NOISE: u64 = 2;
const STREAM_SHAPE: u64 = 3;

/// Background level outside the lesion, relative to `base_intensity`.
pub const BACKGROUND_FRACTION: f64 = 0.2;
/// Default texture amplitude, relative to `base_intensity`.
pub const DEFAULT_TEXTURE_FRACTION: f64 = 0.25;
/// Semi-axes of the ellipsoid relative to `radius_vox`.
pub const ELLIPSOID_AXES: [f64; 3] = [1.0, 0.75, 0.5];
const BLOB_LOBES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhantomShape {
    Ball,
    Ellipsoid,
    Blob,
}

impl std::str::FromStr for PhantomShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ball" => Ok(PhantomShape::Ball),
            "ellipsoid" => Ok(PhantomShape::Ellipsoid),
            "blob" => Ok(PhantomShape::Blob),
            other => Err(Error::InvalidParameter(format!("unknown phantom shape {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub shape: PhantomShape,
    pub radius_vox: f64,
    pub base_intensity: f64,
    /// Gaussian smoothing sigma of the texture, in voxels. 0 leaves it white.
    pub texture_scale: f64,
    /// SD of the texture field; defaults to a quarter of `base_intensity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub texture_sd: Option<f64>,
    pub noise_sd: f64,
    pub seed: u64,
    #[serde(default = "default_unit")]
    pub unit: Unit,
}

fn default_unit() -> Unit {
    Unit::Suv
}

impl Default for PhantomSpec {
    fn default() -> Self {
        PhantomSpec {
            dims: [48, 48, 48],
            spacing: [1.0, 1.0, 1.0],
            shape: PhantomShape::Ball,
            radius_vox: 15.0,
            base_intensity: 10.0,
            texture_scale: 1.5,
            texture_sd: None,
            noise_sd: 0.0,
            seed: 7,
            unit: Unit::Suv,
        }
    }
}

impl PhantomSpec {
    pub fn texture_amplitude(&self) -> f64 {
        self.texture_sd
            .unwrap_or(DEFAULT_TEXTURE_FRACTION * self.base_intensity.abs())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.dims.contains(&0) {
            return bad(format!("dims must be positive, got {:?}", self.dims));
        }
        if self.spacing.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return bad(format!("spacing must be positive, got {:?}", self.spacing));
        }
        if !(self.radius_vox.is_finite() && self.radius_vox > 0.0) {
            return bad(format!("radius must be positive, got {}", self.radius_vox));
        }
        let room = self.dims.iter().map(|&d| (d as f64 - 1.0) / 2.0).fold(f64::INFINITY, f64::min);
        if self.radius_vox > room {
            return bad(format!(
                "radius {} does not fit inside dims {:?}",
                self.radius_vox, self.dims
            ));
        }
        if !self.base_intensity.is_finite() {
            return bad("base intensity must be finite".into());
        }
        if !(self.texture_scale.is_finite() && self.texture_scale >= 0.0) {
            return bad(format!("texture scale must be non-negative, got {}", self.texture_scale));
        }
        let amp = self.texture_amplitude();
        if !(amp.is_finite() && amp >= 0.0) {
            return bad(format!("texture sd must be non-negative, got {amp}"));
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return bad(format!("noise sd must be non-negative, got {}", self.noise_sd));
        }
        Ok(())
    }
}

/// Test and retest observations of one phantom; both share `mask`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomPair {
    pub test: Volume,
    pub retest: Volume,
    pub mask: Mask,
}

impl PhantomPair {
    pub fn into_pairs(self) -> ((Volume, Mask), (Volume, Mask)) {
        ((self.test, self.mask.clone()), (self.retest, self.mask))
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn white_noise(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let half = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-half..=half)
        .map(|i| (-(i as f64).powi(2) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Separable convolution with edge replication.
fn smooth(field: &mut [f64], dims: [usize; 3], sigma: f64) {
    if sigma <= 0.0 {
        return;
    }
    let kernel = gaussian_kernel(sigma);
    let half = (kernel.len() / 2) as isize;
    let strides = [1, dims[0], dims[0] * dims[1]];
    let mut line = Vec::new();
    for axis in 0..3 {
        let len = dims[axis];
        let stride = strides[axis];
        let others: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
        for j in 0..dims[others[1]] {
            for i in 0..dims[others[0]] {
                let start = i * strides[others[0]] + j * strides[others[1]];
                line.clear();
                line.extend((0..len).map(|t| field[start + t * stride]));
                for t in 0..len {
                    let mut acc = 0.0;
                    for (k, w) in kernel.iter().enumerate() {
                        let src = (t as isize + k as isize - half).clamp(0, len as isize - 1);
                        acc += w * line[src as usize];
                    }
                    field[start + t * stride] = acc;
                }
            }
        }
    }
}

fn shape_mask(spec: &PhantomSpec) -> Result<Mask> {
    let c = spec.dims.map(|d| (d as f64 - 1.0) / 2.0);
    let r = spec.radius_vox;
    let inside: Box<dyn Fn([f64; 3]) -> bool> = match spec.shape {
        PhantomShape::Ball => Box::new(move |p| p.iter().map(|v| v * v).sum::<f64>() <= r * r),
        PhantomShape::Ellipsoid => Box::new(move |p| {
            p.iter()
                .zip(ELLIPSOID_AXES)
                .map(|(v, a)| (v / (a * r)).powi(2))
                .sum::<f64>()
                <= 1.0
        }),
        PhantomShape::Blob => {
            // central ball plus lobes centred at 0.6 r in random directions
            let mut g = rng(spec.seed, STREAM_SHAPE);
            let lobes: Vec<[f64; 3]> = (0..BLOB_LOBES)
                .map(|_| {
                    let z: f64 = g.random_range(-1.0..1.0);
                    let phi: f64 = g.random_range(0.0..std::f64::consts::TAU);
                    let s = (1.0 - z * z).sqrt();
                    [0.6 * r * s * phi.cos(), 0.6 * r * s * phi.sin(), 0.6 * r * z]
                })
                .collect();
            Box::new(move |p| {
                let d2 = |q: [f64; 3]| (0..3).map(|a| (p[a] - q[a]).powi(2)).sum::<f64>();
                d2([0.0; 3]) <= (0.7 * r).powi(2) || lobes.iter().any(|&q| d2(q) <= (0.3 * r).powi(2))
            })
        }
    };
    Mask::from_fn(spec.dims, |x, y, z| {
        inside([x as f64 - c[0], y as f64 - c[1], z as f64 - c[2]])
    })
    .map_err(|_| Error::Degenerate(format!("phantom mask is empty for radius {}", spec.radius_vox)))
}

/// Generates the test/retest pair described by `spec`. Identical specs give
/// bit-identical outputs; `noise_sd = 0` gives identical test and retest.
pub fn generate_pair(spec: &PhantomSpec) -> Result<PhantomPair> {
    spec.validate()?;
    let mask = shape_mask(spec)?;
    let n = spec.dims.iter().product::<usize>();

    let mut texture = white_noise(n, &mut rng(spec.seed, STREAM_TEXTURE));
    smooth(&mut texture, spec.dims, spec.texture_scale);
    let mean = texture.iter().sum::<f64>() / n as f64;
    let sd = (texture.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    let scale = if sd > 0.0 { spec.texture_amplitude() / sd } else { 0.0 };

    let clean: Vec<f64> = texture
        .iter()
        .zip(mask.voxels())
        .map(|(t, &inside)| {
            let level = if inside {
                spec.base_intensity
            } else {
                BACKGROUND_FRACTION * spec.base_intensity
            };
            level + (t - mean) * scale
        })
        .collect();

    let observe = |stream: u64| -> Result<Volume> {
        let mut v = clean.clone();
        if spec.noise_sd > 0.0 {
            let noise = white_noise(n, &mut rng(spec.seed, stream));
            v.iter_mut().zip(noise).for_each(|(x, e)| *x += spec.noise_sd * e);
        }
        Volume::new(spec.dims, spec.spacing, v, spec.unit)
    };
    Ok(PhantomPair {
        test: observe(STREAM_TEST_NOISE)?,
        retest: observe(STREAM_RETEST_NOISE)?,
        mask,
    })
}
