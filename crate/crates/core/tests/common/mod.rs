//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use radiomics::QuantizedRoi;

/// Random roi inside a box of at most 6³ voxels with up to 8 grey levels.
pub fn random_roi(seed: u64) -> QuantizedRoi {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = [
        rng.random_range(1..=6usize),
        rng.random_range(1..=6usize),
        rng.random_range(1..=6usize),
    ];
    let fill: f64 = rng.random_range(0.1..1.0);
    let g: u32 = rng.random_range(1..=8);
    let mut coords = Vec::new();
    let mut levels = Vec::new();
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                if rng.random_bool(fill) {
                    coords.push([x + 2, y + 1, z]);
                    levels.push(rng.random_range(1..=g));
                }
            }
        }
    }
    if coords.is_empty() {
        coords.push([0, 0, 0]);
        levels.push(1);
    }
    QuantizedRoi::from_levels(coords, levels).unwrap()
}

fn adjacent(a: [usize; 3], b: [usize; 3]) -> bool {
    a != b && (0..3).all(|k| a[k].abs_diff(b[k]) <= 1)
}

/// Symmetric co-occurrence counts over every ordered pair of distinct
/// 26-adjacent voxels. `None` when the roi has no such pair.
pub fn brute_glcm(q: &QuantizedRoi) -> Option<Vec<u64>> {
    let g = q.n_levels as usize;
    let mut counts = vec![0u64; g * g];
    let mut any = false;
    for (i, &a) in q.coords.iter().enumerate() {
        for (j, &b) in q.coords.iter().enumerate() {
            if i != j && adjacent(a, b) {
                counts[(q.levels[i] as usize - 1) * g + (q.levels[j] as usize - 1)] += 1;
                any = true;
            }
        }
    }
    any.then_some(counts)
}

/// Per-level NGTDM sums from a full scan for neighbours. Voxels are visited
/// in roi order so the floating-point accumulation matches the builder.
pub fn brute_ngtdm(q: &QuantizedRoi) -> Option<(Vec<f64>, Vec<u64>)> {
    let g = q.n_levels as usize;
    let mut s = vec![0.0; g];
    let mut n = vec![0u64; g];
    for (i, &a) in q.coords.iter().enumerate() {
        let mut sum = 0u64;
        let mut count = 0u64;
        for (j, &b) in q.coords.iter().enumerate() {
            if i != j && adjacent(a, b) {
                sum += q.levels[j] as u64;
                count += 1;
            }
        }
        if count > 0 {
            let level = q.levels[i] as usize;
            s[level - 1] += (level as f64 - sum as f64 / count as f64).abs();
            n[level - 1] += 1;
        }
    }
    (n.iter().sum::<u64>() > 0).then_some((s, n))
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// `(level, size)` of each zone, from union-find over equal-level adjacent
/// pairs.
pub fn brute_glzsm_zones(q: &QuantizedRoi) -> Vec<(u32, usize)> {
    let n = q.coords.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if q.levels[i] == q.levels[j] && adjacent(q.coords[i], q.coords[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut size = vec![0usize; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        size[r] += 1;
    }
    (0..n)
        .filter(|&i| find(&mut parent, i) == i)
        .map(|i| (q.levels[i], size[i]))
        .collect()
}

/// Brute-force Spearman: Pearson correlation of average ranks computed by
/// counting, without sorting.
pub fn brute_spearman(x: &[f64], y: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|a| {
                let below = v.iter().filter(|b| *b < a).count() as f64;
                let equal = v.iter().filter(|b| *b == a).count() as f64;
                below + (equal + 1.0) / 2.0
            })
            .collect()
    };
    let (rx, ry) = (rank(x), rank(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// ICC(2,1) from the textbook mean squares of an n × k table, with the
/// error sum of squares obtained by subtraction.
pub fn brute_icc(table: &[Vec<f64>]) -> f64 {
    let n = table.len();
    let k = table[0].len();
    let all: Vec<f64> = table.iter().flatten().copied().collect();
    let grand = all.iter().sum::<f64>() / (n * k) as f64;
    let sst: f64 = all.iter().map(|v| (v - grand).powi(2)).sum();
    let ssr: f64 = table
        .iter()
        .map(|row| k as f64 * (row.iter().sum::<f64>() / k as f64 - grand).powi(2))
        .sum();
    let ssc: f64 = (0..k)
        .map(|j| {
            let col = table.iter().map(|row| row[j]).sum::<f64>() / n as f64;
            n as f64 * (col - grand).powi(2)
        })
        .sum();
    let sse = sst - ssr - ssc;
    let msr = ssr / (n - 1) as f64;
    let msc = ssc / (k - 1) as f64;
    let mse = sse / ((n - 1) * (k - 1)) as f64;
    (msr - mse) / (msr + (k as f64 - 1.0) * mse + k as f64 * (msc - mse) / n as f64)
}
