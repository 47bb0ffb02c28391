//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use radiomics::quantization::QuantizationSpec;
use radiomics::repeatability::{
    bland_altman, icc, reliability_category, spearman, PairedSeries, Reliability, ReliabilityThresholds,
};
use radiomics::shape::{irregularity, shape_features, sphericity};
use radiomics::texture::{build_glcm, build_glzsm, build_ngtdm, Glzsm};
use radiomics::{extract_features, FeatureVector, Mask, Unit, Volume};
use radiomics_cli::report_io::{parse_rows_csv, ReportFile};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// Reliability cuts and the reference category assignments.
fn threshold_arithmetic() -> Outcome {
    let t = ReliabilityThresholds::from_voi_sd(11.1).map_err(|e| e.to_string())?;
    check(
        close(t.cut_very, 5.55, 1e-12) && close(t.cut_reliable, 16.65, 1e-12) && close(t.cut_moderate, 22.2, 1e-12),
        || format!("cuts for 11.1: {t:?}"),
    )?;
    let ct = ReliabilityThresholds::from_voi_sd(10.5).map_err(|e| e.to_string())?;
    check(
        close(ct.cut_very, 5.25, 1e-12) && close(ct.cut_reliable, 15.75, 1e-12) && close(ct.cut_moderate, 21.0, 1e-12),
        || format!("cuts for 10.5: {ct:?}"),
    )?;
    // rounded to one decimal as reported
    let r1 = |x: f64| (x * 10.0).round() / 10.0;
    check(
        [r1(t.cut_very), r1(t.cut_reliable), r1(t.cut_moderate)] == [5.6, 16.7, 22.2]
            && [r1(ct.cut_very), r1(ct.cut_reliable), r1(ct.cut_moderate)] == [5.3, 15.8, 21.0],
        || "rounded cuts differ from 5.6/16.7/22.2 and 5.3/15.8/21.0".into(),
    )?;
    check(reliability_category(3.6, &t) == Reliability::VeryReliable, || "CH_AUC 3.6".into())?;
    check(reliability_category(23.8, &t) == Reliability::PoorlyReliable, || "energy 23.8".into())?;
    // SUV mean and max limits are asymmetric, i.e. back-transformed log
    // limits 100 (exp(m ± 1.96 s) - 1); recover s from each pair
    let mut suv = Vec::new();
    for (lo, hi) in [(-30.4, 36.3), (-34.3, 41.3)] {
        let s = 100.0 * ((1.0 + hi / 100.0_f64).ln() - (1.0 + lo / 100.0_f64).ln()) / (2.0 * 1.96);
        check(reliability_category(s, &t) == Reliability::ModeratelyReliable, || format!("SUV sd {s}"))?;
        suv.push(s);
    }
    Ok(format!(
        "cuts 5.55/16.65/22.2 and 5.25/15.75/21.0; SUV mean/max sd {:.2}/{:.2} moderately reliable",
        suv[0], suv[1]
    ))
}

/// Percent differences with exactly the given sample mean and SD, from a
/// seeded normal sample standardised in place.
fn pairs_with_stats(n: usize, mean: f64, sd: f64, seed: u64) -> PairedSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let m = z.iter().sum::<f64>() / n as f64;
    let s = (z.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
    let d: Vec<f64> = z.iter().map(|v| mean + sd * (v - m) / s).collect();
    // pair mean 100, so the percent difference equals d
    let test = d.iter().map(|d| 100.0 - d / 2.0).collect();
    let retest = d.iter().map(|d| 100.0 + d / 2.0).collect();
    PairedSeries::new("shape.volume_ml", test, retest).unwrap()
}

fn limit_arithmetic() -> Outcome {
    let s = pairs_with_stats(74, -1.4, 11.1, 2);
    let r = bland_altman(&s).map_err(|e| e.to_string())?;
    check(!r.log_transformed, || format!("log path taken (p = {})", r.normality_p))?;
    check(close(r.mean_pct, -1.4, 1e-9) && close(r.sd_pct, 11.1, 1e-9), || {
        format!("mean {} sd {}", r.mean_pct, r.sd_pct)
    })?;
    check(close(r.upper_limit_pct, 20.3, 0.1) && close(r.lower_limit_pct, -23.2, 0.1), || {
        format!("limits {} / {}", r.upper_limit_pct, r.lower_limit_pct)
    })?;
    Ok(format!(
        "-1.4 ± 11.1 -> +{:.3} / {:.3} (expected +20.3 / -23.2)",
        r.upper_limit_pct, r.lower_limit_pct
    ))
}

fn texture_oracles() -> Outcome {
    let mut nonempty = [0usize; 3];
    for seed in 0..1000 {
        let q = common::random_roi(10_000 + seed);
        match (build_glcm(&q), common::brute_glcm(&q)) {
            (Ok(g), Some(c)) => {
                check(g.counts() == &c[..], || format!("GLCM differs for seed {seed}"))?;
                nonempty[0] += 1;
            }
            (Err(_), None) => {}
            _ => return Err(format!("GLCM emptiness differs for seed {seed}")),
        }
        match (build_ngtdm(&q), common::brute_ngtdm(&q)) {
            (Ok(t), Some((s, n))) => {
                check(t.s == s && t.n == n, || format!("NGTDM differs for seed {seed}"))?;
                nonempty[1] += 1;
            }
            (Err(_), None) => {}
            _ => return Err(format!("NGTDM emptiness differs for seed {seed}")),
        }
        let fast = build_glzsm(&q).map_err(|e| e.to_string())?;
        let slow = Glzsm::from_zones(q.n_levels as usize, &common::brute_glzsm_zones(&q)).map_err(|e| e.to_string())?;
        check(fast == slow, || format!("GLZSM differs for seed {seed}"))?;
        nonempty[2] += 1;
    }
    Ok(format!(
        "1000 rois: GLCM {} / NGTDM {} / GLZSM {} non-empty matrices identical",
        nonempty[0], nonempty[1], nonempty[2]
    ))
}

fn random_lesion(rng: &mut ChaCha8Rng) -> (Volume, Mask) {
    let dims = [rng.random_range(3..=8), rng.random_range(3..=8), rng.random_range(3..=8)];
    let n = dims[0] * dims[1] * dims[2];
    let values: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
    let mut bits: Vec<bool> = (0..n).map(|_| rng.random_bool(0.7)).collect();
    bits[0] = true;
    bits[n - 1] = true;
    (
        Volume::new(dims, [1.0, 1.2, 2.0], values, Unit::Arbitrary).unwrap(),
        Mask::new(dims, bits).unwrap(),
    )
}

fn texture_bits(fv: &FeatureVector) -> Vec<(String, u64)> {
    fv.values
        .iter()
        .filter(|(id, _)| id.contains('@'))
        .map(|(id, v)| (id.clone(), v.to_bits()))
        .collect()
}

fn mapped(v: &Volume, f: impl Fn(f64) -> f64) -> Volume {
    Volume::new(v.dims(), v.spacing(), v.voxels().iter().map(|&x| f(x)).collect(), v.unit()).unwrap()
}

fn quantization_invariances() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let (mut affine, mut ties, mut shifts) = (0, 0, 0);
    while affine + ties < 200 {
        let (vol, mask) = random_lesion(&mut rng);
        let bins: u32 = rng.random_range(8..=128);
        let a: f64 = rng.random_range(0.01..100.0);
        let b: f64 = rng.random_range(-1000.0..1000.0);
        let roi: Vec<f64> = vol.voxels().iter().zip(mask.voxels()).filter(|(_, &m)| m).map(|(v, _)| *v).collect();
        let (lo, hi) = roi.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        let tie = roi.iter().any(|&v| {
            let t = bins as f64 * (v - lo) / (hi - lo);
            let k = t.round();
            k > 0.0 && k < bins as f64 && (t - k).abs() < 1e-9 * bins as f64
        });
        if tie {
            ties += 1;
            continue;
        }
        let q = [QuantizationSpec::fixed_bins(bins).unwrap()];
        let base = extract_features("x", &vol, &mask, &q).map_err(|e| e.to_string())?;
        let moved = extract_features("x", &mapped(&vol, |x| a * x + b), &mask, &q).map_err(|e| e.to_string())?;
        for ((id, x), (_, y)) in base.values.iter().zip(&moved.values).filter(|((id, _), _)| id.contains('@')) {
            check(close(*x, *y, 1e-9 * x.abs().max(1.0)), || format!("{id}: {x} vs {y} (bins {bins}, a {a}, b {b})"))?;
        }
        affine += 1;
    }
    while shifts < 200 {
        let (vol, mask) = random_lesion(&mut rng);
        let w = [0.25, 0.5, 1.0, 2.5, 10.0][rng.random_range(0..5)];
        let k: i32 = rng.random_range(-40..=40);
        let q = [QuantizationSpec::fixed_width(w).unwrap()];
        let base = extract_features("x", &vol, &mask, &q).map_err(|e| e.to_string())?;
        let moved = extract_features("x", &mapped(&vol, |x| x + k as f64 * w), &mask, &q).map_err(|e| e.to_string())?;
        check(texture_bits(&base) == texture_bits(&moved), || format!("width {w}, shift {k}: features differ"))?;
        shifts += 1;
    }
    Ok(format!(
        "{affine} affine cases within 1e-9 ({ties} bin-edge ties skipped); {shifts} width shifts bit-identical"
    ))
}

fn shape_analytics() -> Outcome {
    let r = 15.0;
    let n = 35;
    let c = 17.0;
    let ball = Mask::from_fn([n, n, n], |x, y, z| {
        let d = [x as f64 - c, y as f64 - c, z as f64 - c];
        d.iter().map(|v| v * v).sum::<f64>() <= r * r
    })
    .unwrap();
    let s = shape_features(&ball, [1.0; 3]).map_err(|e| e.to_string())?;
    check(close(s.sphericity, 1.0, 0.03), || format!("ball sphericity {}", s.sphericity))?;
    check(close(s.irregularity, 0.0, 0.05), || format!("ball irregularity {}", s.irregularity))?;
    let side: f64 = 10.0;
    let (v, a) = (side.powi(3) / 1000.0, 6.0 * side * side);
    let cs = sphericity(v, a).map_err(|e| e.to_string())?;
    let ci = irregularity(v, a).map_err(|e| e.to_string())?;
    let pi = std::f64::consts::PI;
    check(close(cs, (pi / 6.0).cbrt(), 1e-3), || format!("cube sphericity {cs}"))?;
    check(close(ci, (6.0 / pi).cbrt() - 1.0, 1e-3), || format!("cube irregularity {ci}"))?;
    Ok(format!(
        "ball r=15: sphericity {:.4}, irregularity {:.4}, area/4πr² {:.4}; cube {:.4} / {:.4}",
        s.sphericity,
        s.irregularity,
        s.surface_mm2 / (4.0 * pi * r * r),
        cs,
        ci
    ))
}

fn bland_altman_coverage() -> Outcome {
    let n = 100_000;
    let s = pairs_with_stats(n, 0.7, 6.0, 6);
    let r = bland_altman(&s).map_err(|e| e.to_string())?;
    let inside = s.test.iter().zip(&s.retest).filter(|(t, u)| r.contains(**t, **u)).count();
    let frac = inside as f64 / n as f64;
    check(close(frac, 0.95, 0.005), || format!("coverage {frac}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let mut checked = 0;
    for _ in 0..200 {
        let len = rng.random_range(5..60);
        let test: Vec<f64> = (0..len).map(|_| rng.random_range(1.0..100.0)).collect();
        let retest: Vec<f64> = test
            .iter()
            .map(|t| {
                let e: f64 = StandardNormal.sample(&mut rng);
                t * (1.0 + 0.05 * e).abs()
            })
            .collect();
        let s = PairedSeries::new("x", test, retest).unwrap();
        let (a, b) = (bland_altman(&s), bland_altman(&s.swapped()));
        let (Ok(a), Ok(b)) = (a, b) else { return Err("bland_altman failed".into()) };
        if a.log_transformed || b.log_transformed {
            continue;
        }
        check(a.mean_pct == -b.mean_pct && a.sd_pct == b.sd_pct, || {
            format!("swap: {} / {} vs {} / {}", a.mean_pct, a.sd_pct, b.mean_pct, b.sd_pct)
        })?;
        checked += 1;
    }
    check(checked >= 100, || format!("only {checked} series on the untransformed path"))?;
    Ok(format!(
        "coverage {:.4} over 1e5 pairs ({}); swap antisymmetry exact on {checked} series",
        frac,
        if r.log_transformed { "log path" } else { "untransformed" }
    ))
}

fn statistical_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut worst_rs, mut worst_icc) = (0.0f64, 0.0f64);
    let mut rounds = 0;
    while rounds < 100 {
        let n = rng.random_range(4..=20);
        let coarse = rng.random_bool(0.5);
        let draw = |rng: &mut ChaCha8Rng| {
            let v: f64 = rng.random_range(-10.0..10.0);
            if coarse { v.round() } else { v }
        };
        let x: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        let y: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        let constant = |v: &[f64]| v.iter().all(|a| *a == v[0]);
        if constant(&x) || constant(&y) {
            continue;
        }
        let rs = spearman(&x, &y).map_err(|e| e.to_string())?.rs;
        worst_rs = worst_rs.max((rs - common::brute_spearman(&x, &y)).abs());
        let s = PairedSeries::new("x", x.clone(), y.clone()).unwrap();
        let table: Vec<Vec<f64>> = x.iter().zip(&y).map(|(a, b)| vec![*a, *b]).collect();
        let v = icc(&s).map_err(|e| e.to_string())?;
        worst_icc = worst_icc.max((v - common::brute_icc(&table)).abs());
        rounds += 1;
    }
    check(worst_rs <= 1e-9 && worst_icc <= 1e-9, || format!("max deviation rs {worst_rs:e}, icc {worst_icc:e}"))?;
    Ok(format!("100 series: max |Δrs| {worst_rs:.1e}, max |ΔICC| {worst_icc:.1e}"))
}

fn radiomics(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_radiomics"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("radiomics {args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

/// phantom -> extract (both schemes) -> compare in `dir`; returns the bytes
/// of every report and table file produced.
fn pipeline(dir: &Path, noise_sd: f64) -> Result<Vec<(String, Vec<u8>)>, String> {
    let d = |p: &str| dir.join(p).to_string_lossy().into_owned();
    let seeds = 7..12;
    radiomics(&[
        "phantom", "--seed", "7", "--count", "5", "--radius", "7", "--shape", "blob",
        "--noise-sd", &noise_sd.to_string(), "--out-dir", &d("phantoms"),
    ])?;
    for session in ["test", "retest"] {
        let mut args: Vec<String> = vec!["extract".into()];
        for s in seeds.clone() {
            args.extend([
                "--image".into(), d(&format!("phantoms/phantom{s}_{session}_volume.nrrd")),
                "--mask".into(), d(&format!("phantoms/phantom{s}_{session}_mask.nrrd")),
                "--id".into(), format!("lesion{s}"),
            ]);
        }
        args.extend(["--quant", "bins:64", "--quant", "width:0.5", "--out"].map(String::from));
        args.push(d(session));
        radiomics(&args.iter().map(String::as_str).collect::<Vec<_>>())?;
    }
    radiomics(&[
        "compare", "--test", &d("test.csv"), "--retest", &d("retest.csv"),
        "--plot", "fo.mean", "--plot", "glcm.entropy@bins64", "--out", &d("report"),
    ])?;
    let mut files = Vec::new();
    for name in [
        "test.csv", "test.json", "retest.csv", "retest.json", "report.csv", "report.json",
        "report.fo.mean.svg", "report.glcm.entropy@bins64.svg",
    ] {
        files.push((name.to_string(), std::fs::read(dir.join(name)).map_err(|e| format!("{name}: {e}"))?));
    }
    Ok(files)
}

fn end_to_end_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = pipeline(&tmp.path().join("a"), 0.5)?;
    let b = pipeline(&tmp.path().join("b"), 0.5)?;
    for ((name, x), (_, y)) in a.iter().zip(&b) {
        check(x == y, || format!("{name} differs between runs"))?;
    }
    let report: ReportFile = serde_json::from_slice(&a[5].1).map_err(|e| e.to_string())?;
    let csv_rows = parse_rows_csv(std::str::from_utf8(&a[4].1).unwrap())?;
    check(csv_rows == report.report.rows, || "report CSV and JSON rows differ".into())?;

    let zero = pipeline(&tmp.path().join("zero"), 0.0)?;
    let report: ReportFile = serde_json::from_slice(&zero[5].1).map_err(|e| e.to_string())?;
    for row in &report.report.rows {
        check(
            row.mean_pct == 0.0 && row.sd_pct == 0.0 && row.category == Reliability::VeryReliable,
            || format!("noise 0: {} has mean {} sd {} {:?}", row.feature_id, row.mean_pct, row.sd_pct, row.category),
        )?;
    }
    check(report.report.points.iter().all(|p| p.diff_pct.iter().all(|d| *d == 0.0)), || {
        "noise 0: nonzero difference".into()
    })?;
    Ok(format!(
        "{} files byte-identical across runs; noise 0 -> {} features all zero and very reliable",
        a.len(),
        report.report.rows.len()
    ))
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("threshold arithmetic", Duration::from_secs(1), threshold_arithmetic),
        ("limit arithmetic", Duration::from_secs(1), limit_arithmetic),
        ("texture oracle equivalence", Duration::from_secs(60), texture_oracles),
        ("quantization invariances", Duration::from_secs(60), quantization_invariances),
        ("shape analytics", Duration::from_secs(30), shape_analytics),
        ("Bland-Altman coverage", Duration::from_secs(30), bland_altman_coverage),
        ("statistical oracles", Duration::from_secs(30), statistical_oracles),
        ("end-to-end determinism", Duration::from_secs(120), end_to_end_determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > budget => Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
