//! Texture matrix builders against brute-force enumeration over all voxel
//! pairs of small random rois.

mod common;

use radiomics::texture::{build_glcm, build_glzsm, build_ngtdm, Glzsm};
use radiomics::QuantizedRoi;

use common::{brute_glcm, brute_glzsm_zones, brute_ngtdm, random_roi};

#[test]
fn glcm_matches_pair_enumeration() {
    for seed in 0..300 {
        let q = random_roi(seed);
        let fast = build_glcm(&q);
        let slow = brute_glcm(&q);
        match (fast, slow) {
            (Ok(g), Some(counts)) => assert_eq!(g.counts(), &counts[..], "seed {seed}"),
            (Err(_), None) => {}
            (f, s) => panic!("seed {seed}: builder {f:?} vs oracle {s:?}"),
        }
    }
}

#[test]
fn ngtdm_matches_neighbour_scan() {
    for seed in 0..300 {
        let q = random_roi(seed);
        match (build_ngtdm(&q), brute_ngtdm(&q)) {
            (Ok(t), Some((s, n))) => {
                assert_eq!(t.s, s, "seed {seed}");
                assert_eq!(t.n, n, "seed {seed}");
            }
            (Err(_), None) => {}
            (f, s) => panic!("seed {seed}: builder {f:?} vs oracle {s:?}"),
        }
    }
}

#[test]
fn glzsm_matches_union_find() {
    for seed in 0..300 {
        let q: QuantizedRoi = random_roi(seed);
        let fast = build_glzsm(&q).unwrap();
        let slow = Glzsm::from_zones(q.n_levels as usize, &brute_glzsm_zones(&q)).unwrap();
        assert_eq!(fast, slow, "seed {seed}");
    }
}
