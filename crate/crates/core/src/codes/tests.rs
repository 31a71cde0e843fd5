use super::library::{pg273, random_ldpc};
use super::*;

fn small_base() -> BinMatrix {
    random_ldpc(96, 48, 3, 11).unwrap()
}

#[test]
fn re_without_extra_rows_is_identity() {
    let h1 = small_base();
    let pair = extend_re(&h1, &ReParams::new(0, 1)).unwrap();
    assert_eq!(pair.h2, h1);
    assert_eq!(pair.ha.n_rows(), 0);
    assert_eq!(pair.r1(), pair.r2());
}

#[test]
fn re_stays_four_cycle_free_and_nested() {
    let h1 = small_base();
    assert!(!h1.has_four_cycle());
    for seed in 0..5 {
        let pair = extend_re(&h1, &ReParams::new(12, seed)).unwrap();
        assert!(!pair.h2.has_four_cycle(), "seed {seed}");
        assert_eq!(pair.hc, pair.h1);
        assert_eq!(pair.h2.n_rows(), h1.n_rows() + 12);
        assert!(pair.rows_partition_h2());
        assert!(verify_nested(&pair, 200, seed).all_hold());
    }
}

#[test]
fn re_rate_arithmetic_with_full_rank() {
    let h1 = small_base();
    let pair = extend_re(&h1, &ReParams::new(10, 3)).unwrap();
    if pair.h2.rank() == pair.h2.n_rows() && h1.rank() == h1.n_rows() {
        let expected = pair.r1() - 10.0 / 96.0;
        assert!((pair.r2() - expected).abs() < 1e-12);
    }
    assert!(pair.r1() >= pair.r2());
}

#[test]
fn re_balanced_placement_covers_columns() {
    let h1 = random_ldpc(120, 60, 3, 2).unwrap();
    assert!(!h1.has_four_cycle());
    let mut p = ReParams::new(40, 9);
    p.placement = Placement::Balanced;
    p.cycle_policy = CyclePolicy::AppendedOnly;
    let pair = extend_re(&h1, &p).unwrap();
    let w = pair.ha.column_weights();
    assert!(w.iter().all(|&x| x == 1), "{w:?}");

    p.cycle_policy = CyclePolicy::Global;
    p.extra_rows = 60;
    let pair = extend_re(&h1, &p).unwrap();
    let w = pair.ha.column_weights();
    assert!(w.iter().all(|&x| x >= 1), "{w:?}");
    assert!(!pair.h2.has_four_cycle());
}

#[test]
fn re_rejects_bad_weight() {
    let h1 = small_base();
    let mut p = ReParams::new(3, 0);
    p.row_weight = 1;
    assert!(matches!(extend_re(&h1, &p), Err(Error::Parameter(_))));
}

#[test]
fn pg273_cannot_be_extended_without_four_cycles() {
    // every pair of points of a projective plane lies on a common line
    let mut p = ReParams::new(1, 0);
    p.max_attempts = 200;
    assert!(matches!(extend_re(&pg273(), &p), Err(Error::Construction(_))));
}

#[test]
fn pg273_extension_reaches_rate_point_four() {
    let mut p = ReParams::new(80, 273);
    p.cycle_policy = CyclePolicy::AppendedOnly;
    let pair = extend_re(&pg273(), &p).unwrap();
    assert_eq!(pair.k1(), 191);
    assert!((pair.r1() - 0.7).abs() < 0.01);
    assert!((pair.r2() - 0.4).abs() < 0.01, "R2 = {}", pair.r2());
    assert!(!pair.ha.has_four_cycle());
    assert!(verify_nested(&pair, 100, 1).all_hold());
}

#[test]
fn rc_disjoint_rows_combine() {
    let h2 = BinMatrix::new(6, vec![vec![0, 1], vec![2, 3], vec![4, 5], vec![0, 5]]).unwrap();
    let pair = combine_rc(&h2, &RcParams { group_size: 2, groups: vec![vec![0, 1]] }).unwrap();
    assert_eq!(pair.h1.n_rows(), 3);
    assert_eq!(pair.h1.row(2), &[0, 1, 2, 3]);
    assert_eq!(pair.hc.rows(), &[vec![4, 5], vec![0, 5]]);
    assert_eq!(pair.ha.rows(), &[vec![0, 1], vec![2, 3]]);
    assert!(pair.rows_partition_h2());
}

#[test]
fn rc_overlap_names_column() {
    let h2 = BinMatrix::new(4, vec![vec![0, 1], vec![1, 2]]).unwrap();
    let err = combine_rc(&h2, &RcParams { group_size: 2, groups: vec![vec![0, 1]] }).unwrap_err();
    assert!(matches!(err, Error::RowOverlap { group: 0, column: 1 }));
}

#[test]
fn rc_rejects_reused_rows_and_bad_groups() {
    let h2 = BinMatrix::new(8, vec![vec![0], vec![1], vec![2], vec![3]]).unwrap();
    let reuse = RcParams { group_size: 2, groups: vec![vec![0, 1], vec![1, 2]] };
    assert!(matches!(combine_rc(&h2, &reuse), Err(Error::Parameter(_))));
    let short = RcParams { group_size: 2, groups: vec![vec![0]] };
    assert!(combine_rc(&h2, &short).is_err());
    let lambda_one = RcParams { group_size: 1, groups: vec![vec![0]] };
    assert!(combine_rc(&h2, &lambda_one).is_err());
}

#[test]
fn rc_preserves_column_weights() {
    let h2 = random_ldpc(200, 120, 3, 5).unwrap();
    let eligible: Vec<usize> = (60..120).collect();
    let groups = propose_rc_groups(&h2, &eligible, 2, 20, 1).unwrap();
    let pair = combine_rc(&h2, &RcParams { group_size: 2, groups: groups.clone() }).unwrap();
    assert_eq!(pair.h1.n_rows(), 100);
    assert_eq!(pair.h1.column_weights(), h2.column_weights());
    // dense recomputation of the combined rows
    let dense = h2.to_dense();
    for (g, group) in groups.iter().enumerate() {
        let mut sum = vec![0u8; 200];
        for &r in group {
            for (s, b) in sum.iter_mut().zip(&dense[r]) {
                *s ^= b;
            }
        }
        let row = &pair.h1.to_dense()[pair.hc.n_rows() + g];
        assert_eq!(row, &sum);
    }
    assert!(verify_nested(&pair, 300, 4).all_hold());
    assert!(pair.r1() > pair.r2());
}

#[test]
fn corrupted_residual_is_caught() {
    let h1 = small_base();
    let mut pair = extend_re(&h1, &ReParams::new(8, 2)).unwrap();
    let mut rows = pair.ha.rows().to_vec();
    let victim = rows[0][0];
    let replacement = (0..96).find(|c| !rows[0].contains(c)).unwrap();
    rows[0].retain(|&c| c != victim);
    rows[0].push(replacement);
    pair.ha = BinMatrix::new(96, rows).unwrap();
    let report = verify_nested(&pair, 500, 0);
    assert!(report.common.holds);
    assert!(report.xor_closure.holds);
    assert!(!report.residual.holds);
    let (_, failing_rows) = report.residual.witness.clone().unwrap();
    assert_eq!(failing_rows, vec![0]);
    assert!(!report.all_hold());
}

#[test]
fn exhaustive_nesting_on_tiny_code() {
    let h1 = BinMatrix::new(10, vec![vec![0, 1, 2, 3], vec![3, 4, 5, 6], vec![6, 7, 8, 9]]).unwrap();
    let mut p = ReParams::new(2, 5);
    p.cycle_policy = CyclePolicy::Global;
    let pair = extend_re(&h1, &p).unwrap();
    let enc1 = pair.encoder1();
    let enc2 = pair.encoder2();
    let all = |enc: &Encoder| -> Vec<BinVector> {
        (0..1u32 << enc.k())
            .map(|m| {
                let info: Vec<u8> = (0..enc.k()).map(|b| ((m >> b) & 1) as u8).collect();
                enc.encode(&info).unwrap()
            })
            .collect()
    };
    let c1s = all(enc1);
    let c2s = all(enc2);
    for c2 in &c2s {
        assert!(pair.hc.syndrome(c2).unwrap().is_zero());
        assert!(pair.ha.syndrome(c2).unwrap().is_zero());
    }
    for c1 in &c1s {
        for c2 in &c2s {
            assert!(pair.hc.syndrome(&c1.xor(c2).unwrap()).unwrap().is_zero());
        }
    }
}

#[test]
fn save_and_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let pair = extend_re(&small_base(), &ReParams::new(6, 42)).unwrap();
    pair.save(dir.path()).unwrap();
    let back = CodePair::load(dir.path()).unwrap();
    assert_eq!(back.h1, pair.h1);
    assert_eq!(back.h2, pair.h2);
    assert_eq!(back.hc, pair.hc);
    assert_eq!(back.ha, pair.ha);
    assert_eq!(back.seed, Some(42));
    assert_eq!(back.construction, Construction::RowExtend);
    assert_eq!(back.manifest(), pair.manifest());
    let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("construction = re"));
}
