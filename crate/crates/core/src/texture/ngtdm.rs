use super::{neighbourhood_26, LevelGrid};
use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::quantization::QuantizedRoi;

pub const NGTDM_FEATURES: [&str; 5] = ["coarseness", "contrast", "busyness", "complexity", "strength"];

/// Denominator guard for coarseness, busyness and strength.
pub const NGTDM_EPS: f64 = 1e-6;
/// Coarseness reported for a roi without any grey-tone variation.
pub const COARSENESS_CAP: f64 = 1e6;

/// Neighbourhood grey-tone difference matrix.
///
/// Only voxels with at least one in-roi neighbour are counted; isolated
/// voxels contribute to neither `s` nor `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ngtdm {
    /// Summed absolute deviation per level, index `level - 1`.
    pub s: Vec<f64>,
    /// Counted voxels per level.
    pub n: Vec<u64>,
    pub n_valid: u64,
}

impl Ngtdm {
    pub fn n_levels(&self) -> usize {
        self.s.len()
    }

    pub fn p(&self, level: usize) -> f64 {
        self.n[level - 1] as f64 / self.n_valid as f64
    }
}

/// Walks the roi in its stored order; for each voxel with in-roi neighbours
/// adds `|level - mean(neighbour levels)|` to `s[level]`.
pub fn build_ngtdm(q: &QuantizedRoi) -> Result<Ngtdm> {
    if q.is_empty() {
        return Err(Error::EmptyRoi);
    }
    let g = q.n_levels as usize;
    let grid = LevelGrid::new(q);
    let strides: Vec<isize> = neighbourhood_26().map(|d| grid.stride(d)).collect();
    let mut s = vec![0.0; g];
    let mut n = vec![0u64; g];
    for c in &q.coords {
        let here = grid.index_of(*c);
        let level = grid.level_at(here);
        let mut sum = 0u64;
        let mut count = 0u64;
        for &st in &strides {
            let l = grid.level_at((here as isize + st) as usize);
            if l != 0 {
                sum += l as u64;
                count += 1;
            }
        }
        if count > 0 {
            let mean = sum as f64 / count as f64;
            s[level as usize - 1] += (level as f64 - mean).abs();
            n[level as usize - 1] += 1;
        }
    }
    let n_valid = n.iter().sum();
    if n_valid == 0 {
        return Err(Error::EmptyMatrix("NGTDM"));
    }
    Ok(Ngtdm { s, n, n_valid })
}

/// Amadasun-King coarseness, contrast, busyness, complexity and strength.
pub fn ngtdm_features(t: &Ngtdm) -> FeatureSet {
    let total = t.n_valid as f64;
    // (level value, probability, s) for occupied levels only
    let occupied: Vec<(f64, f64, f64)> = (0..t.n_levels())
        .filter(|&i| t.n[i] > 0)
        .map(|i| ((i + 1) as f64, t.n[i] as f64 / total, t.s[i]))
        .collect();
    let ng = occupied.len() as f64;
    let s_total: f64 = occupied.iter().map(|&(_, _, s)| s).sum();
    let weighted: f64 = occupied.iter().map(|&(_, p, s)| p * s).sum();

    let mut out = FeatureSet::new();

    let coarseness = if weighted < NGTDM_EPS {
        out.flag("coarseness");
        COARSENESS_CAP
    } else {
        (1.0 / weighted).min(COARSENESS_CAP)
    };

    let mut spread = 0.0;
    let mut busy_denom = 0.0;
    let mut complexity = 0.0;
    let mut strength_num = 0.0;
    for &(i, pi, si) in &occupied {
        for &(j, pj, sj) in &occupied {
            spread += pi * pj * (i - j).powi(2);
            busy_denom += (i * pi - j * pj).abs();
            complexity += (i - j).abs() * (pi * si + pj * sj) / (pi + pj);
            strength_num += (pi + pj) * (i - j).powi(2);
        }
    }

    let contrast = if ng > 1.0 {
        spread / (ng * (ng - 1.0)) * s_total / total
    } else {
        out.flag("contrast");
        0.0
    };
    let busyness = if busy_denom < NGTDM_EPS {
        out.flag("busyness");
        0.0
    } else {
        weighted / busy_denom
    };
    let complexity = complexity / total;
    let strength = if s_total < NGTDM_EPS {
        out.flag("strength");
        0.0
    } else {
        strength_num / s_total
    };

    out.push("coarseness", coarseness);
    out.push("contrast", contrast);
    out.push("busyness", busyness);
    out.push("complexity", complexity);
    out.push("strength", strength);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_voxel_pair() {
        let q = QuantizedRoi::from_levels(vec![[0, 0, 0], [1, 0, 0]], vec![1, 2]).unwrap();
        let t = build_ngtdm(&q).unwrap();
        assert_eq!(t.s, vec![1.0, 1.0]);
        assert_eq!(t.n, vec![1, 1]);
        assert_eq!(t.p(1), 0.5);
        assert_eq!(t.p(2), 0.5);

        // Direct evaluation of the five formulas on s = (1, 1), p = (.5, .5).
        let f = ngtdm_features(&t);
        let close = |name: &str, want: f64| {
            let got = f.get(name).unwrap();
            assert!((got - want).abs() < 1e-12, "{name}: {got} vs {want}");
        };
        close("coarseness", 1.0);
        // (1/(2*1)) * (2 * .25 * 1) * (2 / 2)
        close("contrast", 0.25);
        // sum p s = 1 ; sum |i p_i - j p_j| = 2 * |0.5 - 1| = 1
        close("busyness", 1.0);
        // 2 * 1 * (0.5 + 0.5) / 1 / 2
        close("complexity", 1.0);
        // 2 * 1 * 1 / 2
        close("strength", 1.0);
    }

    #[test]
    fn constant_roi() {
        let coords = vec![[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 1]];
        let q = QuantizedRoi::from_levels(coords, vec![3; 4]).unwrap();
        let t = build_ngtdm(&q).unwrap();
        assert!(t.s.iter().all(|&s| s == 0.0));
        let f = ngtdm_features(&t);
        assert_eq!(f.get("contrast"), Some(0.0));
        assert_eq!(f.get("coarseness"), Some(COARSENESS_CAP));
        assert!(f.is_degenerate("coarseness"));
        assert!(f.is_degenerate("contrast"));
    }

    #[test]
    fn single_active_level_has_zero_contrast() {
        let t = Ngtdm {
            s: vec![0.0, 0.7, 0.0],
            n: vec![0, 4, 0],
            n_valid: 4,
        };
        assert_eq!(ngtdm_features(&t).get("contrast"), Some(0.0));
    }

    #[test]
    fn isolated_voxels() {
        let q = QuantizedRoi::from_levels(vec![[0, 0, 0]], vec![1]).unwrap();
        assert!(matches!(build_ngtdm(&q), Err(Error::EmptyMatrix("NGTDM"))));
        let q = QuantizedRoi::from_levels(vec![[0, 0, 0], [2, 2, 2]], vec![1, 2]).unwrap();
        assert!(build_ngtdm(&q).is_err());
        // An isolated voxel next to a connected pair is skipped.
        let q = QuantizedRoi::from_levels(vec![[0, 0, 0], [1, 0, 0], [5, 0, 0]], vec![1, 1, 2]).unwrap();
        let t = build_ngtdm(&q).unwrap();
        assert_eq!(t.n, vec![2, 0]);
        assert_eq!(t.n_valid, 2);
    }
}
