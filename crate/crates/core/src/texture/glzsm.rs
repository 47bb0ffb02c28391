use super::{neighbourhood_26, LevelGrid};
use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::quantization::QuantizedRoi;

pub const GLZSM_FEATURES: [&str; 11] = [
    "szse", "lzse", "zsnu", "glnu", "zsp", "lglze", "hglze", "szlge", "szhge", "lzlge", "lzhge",
];

/// Grey-level zone size matrix: `count(level, size)` of maximal 26-connected
/// equal-level zones.
#[derive(Debug, Clone, PartialEq)]
pub struct Glzsm {
    n_levels: usize,
    max_size: usize,
    counts: Vec<u64>,
    pub n_zones: u64,
    pub n_voxels: u64,
}

impl Glzsm {
    /// Builds a matrix from a list of `(level, size)` zones.
    pub fn from_zones(n_levels: usize, zones: &[(u32, usize)]) -> Result<Self> {
        if zones.is_empty() {
            return Err(Error::EmptyMatrix("GLZSM"));
        }
        let max_size = zones.iter().map(|z| z.1).max().unwrap();
        let mut counts = vec![0u64; n_levels * max_size];
        let mut n_voxels = 0u64;
        for &(level, size) in zones {
            if level == 0 || level as usize > n_levels || size == 0 {
                return Err(Error::InvalidParameter(format!("invalid zone (level {level}, size {size})")));
            }
            counts[(level as usize - 1) * max_size + (size - 1)] += 1;
            n_voxels += size as u64;
        }
        Ok(Glzsm {
            n_levels,
            max_size,
            counts,
            n_zones: zones.len() as u64,
            n_voxels,
        })
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    /// Number of zones with grey level `level` and `size` voxels (1-based).
    pub fn count(&self, level: usize, size: usize) -> u64 {
        if size == 0 || size > self.max_size || level == 0 || level > self.n_levels {
            return 0;
        }
        self.counts[(level - 1) * self.max_size + (size - 1)]
    }

    /// Non-zero entries as `(level, size, count)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(k, &c)| {
            (k / self.max_size + 1, k % self.max_size + 1, c)
        })
    }
}

/// Flood-fills each unvisited roi voxel (in stored order) over its
/// same-level 26-neighbours.
pub fn build_glzsm(q: &QuantizedRoi) -> Result<Glzsm> {
    if q.is_empty() {
        return Err(Error::EmptyRoi);
    }
    let grid = LevelGrid::new(q);
    let strides: Vec<isize> = neighbourhood_26().map(|d| grid.stride(d)).collect();
    let mut visited = vec![false; grid.len()];
    let mut zones = Vec::new();
    let mut stack = Vec::new();
    for c in &q.coords {
        let seed = grid.index_of(*c);
        if visited[seed] {
            continue;
        }
        let level = grid.level_at(seed);
        visited[seed] = true;
        stack.push(seed);
        let mut size = 0usize;
        while let Some(at) = stack.pop() {
            size += 1;
            for &st in &strides {
                let next = (at as isize + st) as usize;
                if !visited[next] && grid.level_at(next) == level {
                    visited[next] = true;
                    stack.push(next);
                }
            }
        }
        zones.push((level, size));
    }
    Glzsm::from_zones(q.n_levels as usize, &zones)
}

/// Zone-size emphasis and non-uniformity features, normalised by the zone
/// count; `zsp` is zones per roi voxel.
pub fn glzsm_features(z: &Glzsm) -> FeatureSet {
    let nz = z.n_zones as f64;
    let mut szse = 0.0;
    let mut lzse = 0.0;
    let mut lglze = 0.0;
    let mut hglze = 0.0;
    let mut szlge = 0.0;
    let mut szhge = 0.0;
    let mut lzlge = 0.0;
    let mut lzhge = 0.0;
    let mut per_level = vec![0.0; z.n_levels()];
    let mut per_size = vec![0.0; z.max_size()];
    for (level, size, count) in z.entries() {
        let c = count as f64;
        let i2 = (level * level) as f64;
        let j2 = (size * size) as f64;
        szse += c / j2;
        lzse += c * j2;
        lglze += c / i2;
        hglze += c * i2;
        szlge += c / (i2 * j2);
        szhge += c * i2 / j2;
        lzlge += c * j2 / i2;
        lzhge += c * i2 * j2;
        per_level[level - 1] += c;
        per_size[size - 1] += c;
    }
    let glnu: f64 = per_level.iter().map(|v| v * v).sum();
    let zsnu: f64 = per_size.iter().map(|v| v * v).sum();

    let mut out = FeatureSet::new();
    out.push("szse", szse / nz);
    out.push("lzse", lzse / nz);
    out.push("zsnu", zsnu / nz);
    out.push("glnu", glnu / nz);
    out.push("zsp", nz / z.n_voxels as f64);
    out.push("lglze", lglze / nz);
    out.push("hglze", hglze / nz);
    out.push("szlge", szlge / nz);
    out.push("szhge", szhge / nz);
    out.push("lzlge", lzlge / nz);
    out.push("lzhge", lzhge / nz);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(f: &FeatureSet, name: &str, want: f64) {
        let got = f.get(name).unwrap();
        assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{name}: {got} vs {want}");
    }

    #[test]
    fn constant_connected_roi_is_one_zone() {
        let coords: Vec<_> = (0..3).flat_map(|x| (0..2).map(move |y| [x, y, 0])).collect();
        let n = coords.len();
        let q = QuantizedRoi::from_levels(coords, vec![4; n]).unwrap();
        let z = build_glzsm(&q).unwrap();
        assert_eq!(z.n_zones, 1);
        assert_eq!(z.count(4, n), 1);
        let f = glzsm_features(&z);
        let n = n as f64;
        close(&f, "szse", 1.0 / (n * n));
        close(&f, "lzse", n * n);
        close(&f, "zsp", 1.0 / n);
        close(&f, "glnu", 1.0);
        close(&f, "zsnu", 1.0);
    }

    #[test]
    fn distinct_levels_are_singleton_zones() {
        let coords: Vec<_> = (0..5).map(|x| [x, 0, 0]).collect();
        let q = QuantizedRoi::from_levels(coords, vec![1, 2, 3, 4, 5]).unwrap();
        let z = build_glzsm(&q).unwrap();
        assert_eq!(z.n_zones, 5);
        let f = glzsm_features(&z);
        close(&f, "szse", 1.0);
        close(&f, "zsp", 1.0);
        close(&f, "glnu", 1.0);
        close(&f, "zsnu", 5.0);
    }

    #[test]
    fn diagonal_touch_is_connected() {
        let q = QuantizedRoi::from_levels(vec![[0, 0, 0], [1, 1, 1]], vec![2, 2]).unwrap();
        let z = build_glzsm(&q).unwrap();
        assert_eq!(z.n_zones, 1);
        assert_eq!(z.count(2, 2), 1);
    }

    #[test]
    fn two_zone_emphasis() {
        let z = Glzsm::from_zones(2, &[(1, 1), (2, 3)]).unwrap();
        let f = glzsm_features(&z);
        close(&f, "szse", 5.0 / 9.0);
        close(&f, "lzse", 5.0);
        close(&f, "zsp", 0.5);
        close(&f, "lglze", (1.0 + 0.25) / 2.0);
        close(&f, "hglze", 2.5);
        close(&f, "szlge", (1.0 + 1.0 / 36.0) / 2.0);
        close(&f, "szhge", (1.0 + 4.0 / 9.0) / 2.0);
        close(&f, "lzlge", (1.0 + 9.0 / 4.0) / 2.0);
        close(&f, "lzhge", (1.0 + 36.0) / 2.0);
    }

    #[test]
    fn mass_identities_hold() {
        let coords: Vec<_> = (0..4)
            .flat_map(|x| (0..3).flat_map(move |y| (0..2).map(move |z| [x, y, z])))
            .collect();
        let levels: Vec<u32> = (0..coords.len() as u32).map(|i| i * 7 % 3 + 1).collect();
        let q = QuantizedRoi::from_levels(coords, levels).unwrap();
        let z = build_glzsm(&q).unwrap();
        let zones: u64 = z.entries().map(|e| e.2).sum();
        let voxels: u64 = z.entries().map(|(_, s, c)| s as u64 * c).sum();
        assert_eq!(zones, z.n_zones);
        assert_eq!(voxels, q.len() as u64);
    }
}
