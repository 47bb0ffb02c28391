use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::PairedSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub rs: f64,
    /// Two-sided p-value from the t approximation with `n - 2` degrees of
    /// freedom.
    pub p_value: f64,
    pub n: usize,
}

/// 1-based ranks, ties sharing the average of their positions.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Spearman rank correlation: Pearson correlation of the average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 4 {
        return Err(Error::InsufficientData { required: 4, actual: n });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("series contains non-finite values".into()));
    }
    let constant = |v: &[f64]| v.iter().all(|a| *a == v[0]);
    if constant(x) || constant(y) {
        return Err(Error::Degenerate("constant series has no rank correlation".into()));
    }
    let rs = pearson(&ranks(x), &ranks(y)).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p_value = if rs.abs() >= 1.0 {
        0.0
    } else {
        let t = rs * (df / (1.0 - rs * rs)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
        (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
    };
    Ok(CorrelationResult { rs, p_value, n })
}

/// ICC(2,1): two-way random effects, absolute agreement, single measurement,
/// from the ANOVA of the n × 2 table of test/retest values.
pub fn icc(s: &PairedSeries) -> Result<f64> {
    let n = s.len();
    if n < 3 {
        return Err(Error::InsufficientData { required: 3, actual: n });
    }
    let k = 2.0;
    let nf = n as f64;
    let grand = (s.test.iter().sum::<f64>() + s.retest.iter().sum::<f64>()) / (k * nf);
    let col = [
        s.test.iter().sum::<f64>() / nf,
        s.retest.iter().sum::<f64>() / nf,
    ];
    let mut ss_rows = 0.0;
    let mut ss_err = 0.0;
    let mut ss_total = 0.0;
    for (&t, &r) in s.test.iter().zip(&s.retest) {
        let row = 0.5 * (t + r);
        ss_rows += k * (row - grand).powi(2);
        for (j, v) in [t, r].into_iter().enumerate() {
            ss_err += (v - row - col[j] + grand).powi(2);
            ss_total += (v - grand).powi(2);
        }
    }
    if ss_total == 0.0 {
        return Ok(1.0);
    }
    let ss_cols: f64 = col.iter().map(|c| nf * (c - grand).powi(2)).sum();
    let msr = ss_rows / (nf - 1.0);
    let msc = ss_cols / (k - 1.0);
    let mse = ss_err / ((nf - 1.0) * (k - 1.0));
    Ok((msr - mse) / (msr + (k - 1.0) * mse + k * (msc - mse) / nf))
}
