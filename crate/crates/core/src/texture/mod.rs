//! Texture matrices built on a quantized roi.
//!
//! All three matrices consider the full 3D neighbourhood at once: the GLCM
//! merges the 13 unique Chebyshev-distance-1 directions into one symmetric
//! matrix, the NGTDM averages over the 26-neighbourhood and GLZSM zones are
//! 26-connected. Voxels outside the roi never contribute.

mod glcm;
mod glzsm;
mod ngtdm;

pub use glcm::{build_glcm, glcm_features, Glcm, GLCM_FEATURES};
pub use glzsm::{build_glzsm, glzsm_features, Glzsm, GLZSM_FEATURES};
pub use ngtdm::{build_ngtdm, ngtdm_features, Ngtdm, COARSENESS_CAP, NGTDM_EPS, NGTDM_FEATURES};

use crate::quantization::QuantizedRoi;

/// The 13 direction offsets whose negations complete the 26-neighbourhood.
pub const DIRECTIONS: [[i64; 3]; 13] = [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 1, 0],
    [1, -1, 0],
    [1, 0, 1],
    [1, 0, -1],
    [0, 1, 1],
    [0, 1, -1],
    [1, 1, 1],
    [1, 1, -1],
    [1, -1, 1],
    [1, -1, -1],
];

pub(crate) fn neighbourhood_26() -> impl Iterator<Item = [i64; 3]> {
    DIRECTIONS.iter().flat_map(|d| [*d, [-d[0], -d[1], -d[2]]])
}

/// Dense level lookup over the roi bounding box, padded by one voxel on
/// every side so neighbour probes never leave the allocation. Level 0 marks
/// voxels outside the roi.
pub(crate) struct LevelGrid {
    dims: [usize; 3],
    origin: [usize; 3],
    levels: Vec<u32>,
}

impl LevelGrid {
    pub(crate) fn new(q: &QuantizedRoi) -> Self {
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        for c in &q.coords {
            for a in 0..3 {
                lo[a] = lo[a].min(c[a]);
                hi[a] = hi[a].max(c[a]);
            }
        }
        let dims = [hi[0] - lo[0] + 3, hi[1] - lo[1] + 3, hi[2] - lo[2] + 3];
        let mut grid = LevelGrid {
            dims,
            origin: lo,
            levels: vec![0; dims[0] * dims[1] * dims[2]],
        };
        for (c, &l) in q.coords.iter().zip(&q.levels) {
            let i = grid.index_of(*c);
            grid.levels[i] = l;
        }
        grid
    }

    /// Grid index of an roi coordinate.
    pub(crate) fn index_of(&self, c: [usize; 3]) -> usize {
        let x = c[0] - self.origin[0] + 1;
        let y = c[1] - self.origin[1] + 1;
        let z = c[2] - self.origin[2] + 1;
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    /// Index offset corresponding to a direction vector.
    pub(crate) fn stride(&self, d: [i64; 3]) -> isize {
        (d[0] + self.dims[0] as i64 * (d[1] + self.dims[1] as i64 * d[2])) as isize
    }

    pub(crate) fn level_at(&self, index: usize) -> u32 {
        self.levels[index]
    }

    pub(crate) fn len(&self) -> usize {
        self.levels.len()
    }
}

/// `x log2 x` with the `0 log 0 = 0` convention.
pub(crate) fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}
