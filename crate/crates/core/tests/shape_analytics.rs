use std::f64::consts::PI;

use radiomics::shape::{shape_features, sphericity, irregularity};
use radiomics::Mask;

fn ball(r: f64) -> Mask {
    let n = (2.0 * r).ceil() as usize + 3;
    let c = (n as f64 - 1.0) / 2.0;
    Mask::from_fn([n, n, n], |x, y, z| {
        let d = [x as f64 - c, y as f64 - c, z as f64 - c];
        d.iter().map(|v| v * v).sum::<f64>() <= r * r
    })
    .unwrap()
}

#[test]
fn digitised_ball_is_nearly_spherical() {
    for r in [8.0, 15.0] {
        let s = shape_features(&ball(r), [1.0; 3]).unwrap();
        let area = 4.0 * PI * r * r;
        assert!((s.surface_mm2 / area - 1.0).abs() < 0.03, "r {r}: area ratio {}", s.surface_mm2 / area);
        assert!((s.sphericity - 1.0).abs() < 0.03, "r {r}: sphericity {}", s.sphericity);
        assert!(s.irregularity.abs() < 0.05, "r {r}: irregularity {}", s.irregularity);
        // 4 sqrt of the axial second moment r²/5 of a solid ball
        assert!((s.major_axis_mm / (4.0 * (r * r / 5.0).sqrt()) - 1.0).abs() < 0.02);
    }
}

#[test]
fn anisotropic_spacing_matches_physical_ball() {
    // ball of radius 12 mm sampled at 1 x 1 x 2 mm
    let r = 12.0;
    let dims = [29, 29, 15];
    let c = [14.0, 14.0, 7.0];
    let spacing = [1.0, 1.0, 2.0];
    let mask = Mask::from_fn(dims, |x, y, z| {
        let p = [x as f64, y as f64, z as f64];
        (0..3).map(|a| ((p[a] - c[a]) * spacing[a]).powi(2)).sum::<f64>() <= r * r
    })
    .unwrap();
    let s = shape_features(&mask, spacing).unwrap();
    let v = 4.0 / 3.0 * PI * r.powi(3) / 1000.0;
    assert!((s.volume_ml / v - 1.0).abs() < 0.03, "volume {}", s.volume_ml);
    assert!((s.sphericity - 1.0).abs() < 0.05, "sphericity {}", s.sphericity);
}

#[test]
fn cube_fixtures() {
    for n in [2.0, 5.0, 11.0] {
        let (v, a) = (f64::powi(n, 3) / 1000.0, 6.0 * n * n);
        assert!((sphericity(v, a).unwrap() - (PI / 6.0).cbrt()).abs() < 1e-12);
        assert!((irregularity(v, a).unwrap() - ((6.0 / PI).cbrt() - 1.0)).abs() < 1e-12);
    }
}

#[test]
fn elongated_shapes_are_less_spherical() {
    let rod = Mask::from_fn([30, 5, 5], |_, y, z| (1..4).contains(&y) && (1..4).contains(&z)).unwrap();
    let s_rod = shape_features(&rod, [1.0; 3]).unwrap();
    let s_ball = shape_features(&ball(6.0), [1.0; 3]).unwrap();
    assert!(s_rod.sphericity < s_ball.sphericity - 0.2);
    assert!(s_rod.major_axis_mm > 25.0);
}
