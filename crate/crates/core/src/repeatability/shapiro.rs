//! Shapiro-Wilk W test, following Royston's AS R94 approximation for the
//! coefficients and the p-value (valid for 3 <= n <= 5000).

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub const MIN_N: usize = 3;
pub const MAX_N: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapiroWilk {
    pub w: f64,
    pub p_value: f64,
}

/// `c[0] + c[1] x + c[2] x² + ...`
fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

fn coefficients(n: usize, normal: &Normal) -> Vec<f64> {
    let half = n / 2;
    if n == 3 {
        return vec![std::f64::consts::FRAC_1_SQRT_2];
    }
    const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
    const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];

    let an25 = n as f64 + 0.25;
    let m: Vec<f64> = (1..=half)
        .map(|i| normal.inverse_cdf((i as f64 - 0.375) / an25))
        .collect();
    let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / (n as f64).sqrt();
    let a1 = poly(&C1, rsn) - m[0] / ssumm2;

    let mut a = vec![0.0; half];
    a[0] = a1;
    let (first, fac) = if n > 5 {
        let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
        a[1] = a2;
        let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1])
            / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
            .sqrt();
        (2, fac)
    } else {
        let fac = ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt();
        (1, fac)
    };
    for i in first..half {
        a[i] = -m[i] / fac;
    }
    a
}

/// Shapiro-Wilk statistic and p-value. A constant sample returns `W = 1`,
/// `p = 0` by convention.
pub fn shapiro_wilk(sample: &[f64]) -> Result<ShapiroWilk> {
    let n = sample.len();
    if n < MIN_N {
        return Err(Error::InsufficientData {
            required: MIN_N,
            actual: n,
        });
    }
    if n > MAX_N {
        return Err(Error::InvalidParameter(format!(
            "Shapiro-Wilk supports at most {MAX_N} observations, got {n}"
        )));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("sample contains non-finite values".into()));
    }
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if !(range > 0.0) {
        return Ok(ShapiroWilk { w: 1.0, p_value: 0.0 });
    }

    let normal = Normal::standard();
    let a = coefficients(n, &normal);
    let mean = x.iter().sum::<f64>() / n as f64;
    // scale by the range to keep the sums well conditioned
    let ss: f64 = x.iter().map(|v| ((v - mean) / range).powi(2)).sum();
    let b: f64 = a
        .iter()
        .enumerate()
        .map(|(i, ai)| ai * (x[n - 1 - i] - x[i]) / range)
        .sum();
    let w = (b * b / ss).min(1.0);

    let p_value = if n == 3 {
        const PI6: f64 = 6.0 / std::f64::consts::PI;
        const STQR: f64 = std::f64::consts::FRAC_PI_3;
        (PI6 * (w.sqrt().asin() - STQR)).clamp(0.0, 1.0)
    } else {
        let w1 = (1.0 - w).ln();
        let nf = n as f64;
        let (y, m, s) = if n <= 11 {
            let gamma = poly(&[-2.273, 0.459], nf);
            if w1 >= gamma {
                return Ok(ShapiroWilk { w, p_value: 1e-99 });
            }
            let y = -(gamma - w1).ln();
            let m = poly(&[0.544, -0.39978, 0.025054, -6.714e-4], nf);
            let s = poly(&[1.3822, -0.77857, 0.062767, -0.0020322], nf).exp();
            (y, m, s)
        } else {
            let xx = nf.ln();
            let m = poly(&[-1.5861, -0.31082, -0.083751, 0.0038915], xx);
            let s = poly(&[-0.4803, -0.082676, 0.0030302], xx).exp();
            (w1, m, s)
        };
        1.0 - normal.cdf((y - m) / s)
    };
    Ok(ShapiroWilk { w, p_value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, LogNormal, StandardNormal};

    #[test]
    fn matches_reference_values() {
        // W and p from scipy.stats.shapiro (same AS R94 algorithm)
        let cases: [(&[f64], f64, f64); 3] = [
            (&[2.0, 4.0, 5.0, 7.0, 8.0, 9.0, 12.0, 15.0, 18.0, 21.0], 0.9493486659555918, 0.6608000976942465),
            (
                &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0, 30.0, 50.0],
                0.6833601333603886,
                0.00024978376529565194,
            ),
            (&[1.0, 2.5, 2.7, 3.9, 10.0], 0.8159285180435109, 0.10857452384511695),
        ];
        for (x, w, p) in cases {
            let r = shapiro_wilk(x).unwrap();
            assert!((r.w - w).abs() < 1e-6, "w = {} vs {w}", r.w);
            assert!((r.p_value - p).abs() < 1e-5 * p.max(1e-3), "p = {} vs {p}", r.p_value);
        }
    }

    #[test]
    fn three_points() {
        let r = shapiro_wilk(&[-1.0, 0.0, 1.0]).unwrap();
        assert!((r.w - 1.0).abs() < 1e-12);
        assert!((r.p_value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_and_range_errors() {
        assert_eq!(shapiro_wilk(&[2.0; 8]).unwrap().p_value, 0.0);
        assert!(shapiro_wilk(&[1.0, 2.0]).is_err());
        assert!(shapiro_wilk(&vec![0.0; 5001]).is_err());
    }

    #[test]
    fn normal_samples_mostly_pass() {
        let mut passes = 0;
        for seed in 0..100 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..100).map(|_| StandardNormal.sample(&mut rng)).collect();
            if shapiro_wilk(&x).unwrap().p_value >= 0.05 {
                passes += 1;
            }
        }
        assert!(passes >= 90, "{passes}/100 normal samples passed");
    }

    #[test]
    fn lognormal_samples_mostly_fail() {
        let dist = LogNormal::new(0.0, 1.0).unwrap();
        let mut rejections = 0;
        for seed in 0..100 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1000 + seed);
            let x: Vec<f64> = (0..100).map(|_| dist.sample(&mut rng)).collect();
            if shapiro_wilk(&x).unwrap().p_value < 0.05 {
                rejections += 1;
            }
        }
        assert!(rejections >= 95, "{rejections}/100 lognormal samples rejected");
    }
}
