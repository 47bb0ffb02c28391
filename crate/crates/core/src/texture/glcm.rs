use super::{xlog2x, LevelGrid, DIRECTIONS};
use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::quantization::QuantizedRoi;

pub const GLCM_FEATURES: [&str; 15] = [
    "asm",
    "contrast",
    "correlation",
    "dissimilarity",
    "entropy",
    "idm",
    "id",
    "sosv",
    "save",
    "svar",
    "sent",
    "dvar",
    "dent",
    "ic",
    "cp",
];

/// Symmetric grey-level co-occurrence matrix merged over all 13 directions.
#[derive(Debug, Clone, PartialEq)]
pub struct Glcm {
    n_levels: usize,
    counts: Vec<u64>,
    total: u64,
}

impl Glcm {
    /// Builds a matrix from raw symmetric counts (row-major, `n_levels²`).
    pub fn from_counts(n_levels: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != n_levels * n_levels {
            return Err(Error::InvalidParameter("GLCM counts must be G x G".into()));
        }
        let total = counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptyMatrix("GLCM"));
        }
        Ok(Glcm {
            n_levels,
            counts,
            total,
        })
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    /// Co-occurrence count of levels `i` and `j` (1-based).
    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[(i - 1) * self.n_levels + (j - 1)]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Joint probability of levels `i` and `j` (1-based).
    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.count(i, j) as f64 / self.total as f64
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }
}

/// Counts every in-roi pair `(v, v + d)` over the 13 directions into both
/// `(level(v), level(v + d))` and its transpose.
pub fn build_glcm(q: &QuantizedRoi) -> Result<Glcm> {
    if q.is_empty() {
        return Err(Error::EmptyRoi);
    }
    let g = q.n_levels as usize;
    let grid = LevelGrid::new(q);
    let strides: Vec<isize> = DIRECTIONS.iter().map(|&d| grid.stride(d)).collect();
    let mut counts = vec![0u64; g * g];
    for c in &q.coords {
        let here = grid.index_of(*c);
        let a = grid.level_at(here) as usize;
        for &s in &strides {
            let b = grid.level_at((here as isize + s) as usize) as usize;
            if b != 0 {
                counts[(a - 1) * g + (b - 1)] += 1;
                counts[(b - 1) * g + (a - 1)] += 1;
            }
        }
    }
    Glcm::from_counts(g, counts)
}

/// Haralick-family features of a merged GLCM. Logarithms are base 2.
///
/// `correlation` and `ic` are 0 and flagged degenerate when the marginal has
/// zero variance (a single grey level).
pub fn glcm_features(glcm: &Glcm) -> FeatureSet {
    let g = glcm.n_levels();
    let p = glcm.probabilities();
    let at = |i: usize, j: usize| p[i * g + j];

    // The matrix is symmetric, so row and column marginals coincide.
    let mut px = vec![0.0; g];
    let mut p_sum = vec![0.0; 2 * g + 1];
    let mut p_diff = vec![0.0; g];
    for i in 0..g {
        for j in 0..g {
            let v = at(i, j);
            px[i] += v;
            p_sum[i + j + 2] += v;
            p_diff[i.abs_diff(j)] += v;
        }
    }
    let level = |i: usize| (i + 1) as f64;
    let mu: f64 = (0..g).map(|i| level(i) * px[i]).sum();
    let var: f64 = (0..g).map(|i| (level(i) - mu).powi(2) * px[i]).sum();
    let hx: f64 = -px.iter().map(|&v| xlog2x(v)).sum::<f64>();

    let mut asm = 0.0;
    let mut contrast = 0.0;
    let mut dissimilarity = 0.0;
    let mut entropy = 0.0;
    let mut idm = 0.0;
    let mut id = 0.0;
    let mut cross = 0.0;
    let mut hxy1 = 0.0;
    let mut cp = 0.0;
    for i in 0..g {
        for j in 0..g {
            let v = at(i, j);
            if v == 0.0 {
                continue;
            }
            let d = level(i) - level(j);
            asm += v * v;
            contrast += d * d * v;
            dissimilarity += d.abs() * v;
            entropy -= xlog2x(v);
            idm += v / (1.0 + d * d);
            id += v / (1.0 + d.abs());
            cross += (level(i) - mu) * (level(j) - mu) * v;
            hxy1 -= v * (px[i] * px[j]).log2();
            cp += (level(i) + level(j) - 2.0 * mu).powi(4) * v;
        }
    }

    let save: f64 = p_sum.iter().enumerate().map(|(k, &v)| k as f64 * v).sum();
    let svar: f64 = p_sum
        .iter()
        .enumerate()
        .map(|(k, &v)| (k as f64 - save).powi(2) * v)
        .sum();
    let sent: f64 = -p_sum.iter().map(|&v| xlog2x(v)).sum::<f64>();
    let dmean: f64 = p_diff.iter().enumerate().map(|(k, &v)| k as f64 * v).sum();
    let dvar: f64 = p_diff
        .iter()
        .enumerate()
        .map(|(k, &v)| (k as f64 - dmean).powi(2) * v)
        .sum();
    let dent: f64 = -p_diff.iter().map(|&v| xlog2x(v)).sum::<f64>();

    let mut out = FeatureSet::new();
    let degenerate = var <= 1e-12;
    let correlation = if degenerate { 0.0 } else { cross / var };
    let ic = if hx <= 1e-12 { 0.0 } else { (entropy - hxy1) / hx };

    out.push("asm", asm);
    out.push("contrast", contrast);
    out.push("correlation", correlation);
    out.push("dissimilarity", dissimilarity);
    out.push("entropy", entropy);
    out.push("idm", idm);
    out.push("id", id);
    out.push("sosv", var);
    out.push("save", save);
    out.push("svar", svar);
    out.push("sent", sent);
    out.push("dvar", dvar);
    out.push("dent", dent);
    out.push("ic", ic);
    out.push("cp", cp);
    if degenerate {
        out.flag("correlation");
    }
    if hx <= 1e-12 {
        out.flag("ic");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(levels: &[u32]) -> QuantizedRoi {
        let coords = (0..levels.len()).map(|x| [x, 0, 0]).collect();
        QuantizedRoi::from_levels(coords, levels.to_vec()).unwrap()
    }

    #[test]
    fn two_voxel_pair() {
        let m = build_glcm(&line(&[1, 2])).unwrap();
        assert_eq!(m.p(1, 2), 0.5);
        assert_eq!(m.p(2, 1), 0.5);
        assert_eq!(m.p(1, 1), 0.0);
        let f = glcm_features(&m);
        assert_eq!(f.get("dissimilarity"), Some(1.0));
        assert_eq!(f.get("contrast"), Some(1.0));
    }

    #[test]
    fn three_voxel_line() {
        let m = build_glcm(&line(&[1, 2, 3])).unwrap();
        for (i, j) in [(1, 2), (2, 1), (2, 3), (3, 2)] {
            assert_eq!(m.p(i, j), 0.25);
        }
        assert_eq!(m.p(1, 3), 0.0);
        assert_eq!(m.p(2, 2), 0.0);
    }

    #[test]
    fn constant_connected_roi() {
        let coords = vec![[0, 0, 0], [1, 0, 0], [1, 1, 0], [1, 1, 1]];
        let q = QuantizedRoi {
            n_levels: 3,
            ..QuantizedRoi::from_levels(coords, vec![2; 4]).unwrap()
        };
        let m = build_glcm(&q).unwrap();
        assert_eq!(m.p(2, 2), 1.0);
        let f = glcm_features(&m);
        assert_eq!(f.get("entropy"), Some(0.0));
        assert_eq!(f.get("asm"), Some(1.0));
        assert_eq!(f.get("contrast"), Some(0.0));
        assert_eq!(f.get("dissimilarity"), Some(0.0));
        assert_eq!(f.get("correlation"), Some(0.0));
        assert!(f.is_degenerate("correlation"));
    }

    #[test]
    fn single_voxel_is_empty() {
        assert!(matches!(build_glcm(&line(&[1])), Err(Error::EmptyMatrix("GLCM"))));
        // Two voxels two apart never pair either.
        let q = QuantizedRoi::from_levels(vec![[0, 0, 0], [2, 0, 0]], vec![1, 1]).unwrap();
        assert!(build_glcm(&q).is_err());
    }

    #[test]
    fn uniform_two_by_two() {
        let m = Glcm::from_counts(2, vec![1, 1, 1, 1]).unwrap();
        let f = glcm_features(&m);
        assert_eq!(f.get("entropy"), Some(2.0));
        assert_eq!(f.get("asm"), Some(0.25));
        // independent marginals: no information shared
        assert!(f.get("ic").unwrap().abs() < 1e-15);
        assert!(f.get("correlation").unwrap().abs() < 1e-15);
    }

    #[test]
    fn feature_roster() {
        let f = glcm_features(&Glcm::from_counts(2, vec![2, 1, 1, 0]).unwrap());
        let names: Vec<_> = f.iter().map(|(n, _)| n).collect();
        assert_eq!(names, GLCM_FEATURES);
    }

    #[test]
    fn hand_evaluated_two_level_matrix() {
        // counts [[2,1],[1,0]] -> p = [[.5,.25],[.25,0]], px = [.75,.25]
        let f = glcm_features(&Glcm::from_counts(2, vec![2, 1, 1, 0]).unwrap());
        let close = |name: &str, want: f64| {
            let got = f.get(name).unwrap();
            assert!((got - want).abs() < 1e-12, "{name}: {got} vs {want}");
        };
        close("asm", 0.25 + 0.0625 * 2.0);
        close("contrast", 0.5);
        close("dissimilarity", 0.5);
        close("entropy", 1.5);
        close("idm", 0.5 + 0.25);
        close("id", 0.5 + 0.25);
        // mu = 1.25, var = 0.1875
        close("sosv", 0.1875);
        // sum distribution: k=2: .5, k=3: .5
        close("save", 2.5);
        close("svar", 0.25);
        close("sent", 1.0);
        // diff distribution: k=0: .5, k=1: .5
        close("dvar", 0.25);
        close("dent", 1.0);
        // cross = .5(.0625) + 2(.25)(-.25)(.75) = .03125 - .09375
        close("correlation", (0.03125 - 0.09375) / 0.1875);
        let hx = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
        let hxy1 = -(0.5 * (0.5625f64).log2() + 0.5 * (0.1875f64).log2());
        close("ic", (1.5 - hxy1) / hx);
        close("cp", 0.5 * 0.5f64.powi(4) + 0.5 * 0.5f64.powi(4));
    }
}
