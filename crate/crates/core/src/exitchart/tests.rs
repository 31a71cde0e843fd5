use super::*;
use crate::binmat::BinMatrix;
use crate::codes::library::random_ldpc;
use crate::codes::{extend_re, Placement, ReParams};
use crate::infotheory::adaptive_simpson;

/// `(0.85, 0.45)`-style pair at a small length.
fn pair(l: usize, r1: f64, r2: f64, seed: u64) -> CodePair {
    let h1 = random_ldpc(l, ((1.0 - r1) * l as f64).round() as usize, 3, seed).unwrap();
    let mut p = ReParams::new(((r1 - r2) * l as f64).round() as usize, seed + 1);
    p.placement = Placement::Balanced;
    extend_re(&h1, &p).unwrap()
}

/// Independent evaluation of J on the real line.
fn j_simpson(sigma: f64) -> f64 {
    let m = 0.5 * sigma * sigma;
    let s2 = sigma * sigma;
    let f = |x: f64| {
        let pdf = (-(x - m) * (x - m) / (2.0 * s2)).exp() / (2.0 * std::f64::consts::PI * s2).sqrt();
        pdf * (1.0 + (-x).exp()).log2()
    };
    1.0 - adaptive_simpson(&f, m - 14.0 * sigma, m + 14.0 * sigma, 1e-13).unwrap()
}

#[test]
fn j_limits_and_independent_integration() {
    assert_eq!(j_function(0.0), 0.0);
    assert!(j_function(60.0) > 1.0 - 1e-9);
    for s in [0.1, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0] {
        assert!((j_function(s) - j_simpson(s)).abs() < 1e-9, "sigma {s}");
    }
}

#[test]
fn j_is_increasing_and_inverts() {
    let mut prev = 0.0;
    for k in 1..=100 {
        let s = 0.05 * k as f64;
        let j = j_function(s);
        assert!(j > prev);
        prev = j;
        assert!((j_inverse(j).unwrap() - s).abs() < 1e-6, "sigma {s}");
    }
    for s in [0.1, 1.0, 3.0] {
        assert!((j_inverse(j_function(s)).unwrap() - s).abs() < 1e-6);
    }
    assert_eq!(j_inverse(0.0).unwrap(), 0.0);
    assert!(j_inverse(1.0).is_err());
    assert!(j_inverse(-0.1).is_err());
}

fn alternating_bits(n: usize) -> BinVector {
    BinVector::from_bits((0..n).map(|i| ((i * 7 + i / 3) % 2) as u8).collect::<Vec<_>>())
}

#[test]
fn apriori_matches_target_information() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let bits = alternating_bits(100_000);
    assert!(gen_apriori(&bits, 0.0, &mut rng).unwrap().iter().all(|&l| l == 0.0));
    for i_a in [0.2, 0.5, 0.8, 0.95] {
        let llr = gen_apriori(&bits, i_a, &mut rng).unwrap();
        let mi = measure_mi(&llr, bits.bits()).unwrap();
        assert!((mi - i_a).abs() < 0.01, "{mi} vs {i_a}");
        let sigma = j_inverse(i_a).unwrap();
        let zeros: Vec<f64> = llr.iter().zip(bits.bits()).filter(|(_, &b)| b == 0).map(|(l, _)| *l).collect();
        let mean = zeros.iter().sum::<f64>() / zeros.len() as f64;
        let se = sigma / (zeros.len() as f64).sqrt();
        assert!((mean - 0.5 * sigma * sigma).abs() < 4.0 * se);
    }
}

#[test]
fn estimator_edge_cases_and_gaussian_reference() {
    let bits = alternating_bits(1000);
    assert!(measure_mi(&vec![0.0; 1000], bits.bits()).unwrap().abs() < 1e-12);
    let perfect: Vec<f64> = bits.bits().iter().map(|&b| 50.0 * sign(b)).collect();
    assert!(measure_mi(&perfect, bits.bits()).unwrap() > 1.0 - 1e-12);
    assert!(measure_mi(&[], &[]).is_err());

    let n = 100_000;
    let bits = alternating_bits(n);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let llr: Vec<f64> = bits.bits().iter().map(|&b| apriori_llr(b, 1.5, rng.sample(StandardNormal))).collect();
    let mi = measure_mi(&llr, bits.bits()).unwrap();
    let j = j_function(1.5);
    assert!((mi - j).abs() < 2.0 / (n as f64).sqrt(), "{mi} vs {j}");
    let hist = measure_mi_histogram(&llr, bits.bits(), 200).unwrap();
    assert!((hist - j).abs() < 0.01, "{hist} vs {j}");
}

#[test]
fn rud_curve_limits() {
    let p = pair(600, 0.8, 0.4, 3);
    let cfg = ExitConfig { trials: 10, inner_iters: 30, seed: 1 };
    let grid = [0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 0.999];
    let c = transfer_rud(&p, &grid, &cfg).unwrap();
    assert!(c.points[0].i_e.abs() < 1e-12);
    for w in c.points.windows(2) {
        assert!(w[1].i_e >= w[0].i_e - 0.01, "{w:?}");
    }
    assert!(c.points.last().unwrap().i_e > 0.99);

    let empty = CodePair::equal_rate(p.h1.clone()).unwrap();
    assert_eq!(empty.ha, BinMatrix::empty(600));
    let flat = transfer_rud(&empty, &grid, &cfg).unwrap();
    assert!(flat.points.iter().all(|pt| pt.i_e.abs() < 1e-12));
}

#[test]
fn jud_curves_start_higher_for_strong_user_and_rise() {
    let p = pair(600, 0.85, 0.45, 4);
    let params = ChannelParams::from_snr_db(1.5, 0.9, 2.5).unwrap();
    let cfg = ExitConfig { trials: 8, inner_iters: 30, seed: 2 };
    let grid = [0.0, 0.25, 0.5, 0.75, 0.95];
    let [u1, u2] = transfer_jud(&p, &params, &grid, &cfg).unwrap();
    assert!(u1.points[0].i_e > u2.points[0].i_e);
    for w in u2.points.windows(2) {
        assert!(w[1].i_e >= w[0].i_e - 0.01, "{w:?}");
    }
    assert!(u1.points.iter().chain(&u2.points).all(|p| p.i_e <= 1.0));
    // rerun gives identical curves
    let again = transfer_jud(&p, &params, &grid, &cfg).unwrap();
    assert_eq!(again[1], u2);
}

#[test]
fn identical_curves_close_the_tunnel() {
    let pts: Vec<ExitPoint> = [0.0, 0.3, 0.6, 0.9].iter().map(|&x| ExitPoint { i_a: x, i_e: 0.2 + 0.7 * x, user: 2 }).collect();
    let jud = ExitCurve { decoder: ExitDecoder::Jud, snr_db: Some(1.0), points: pts.clone() };
    // the same line drawn on swapped axes
    let mut swapped: Vec<ExitPoint> = pts.iter().map(|p| ExitPoint { i_a: p.i_e, i_e: p.i_a, user: 2 }).collect();
    swapped.insert(0, ExitPoint { i_a: 0.0, i_e: 0.0, user: 2 });
    let rud = ExitCurve { decoder: ExitDecoder::Rud, snr_db: None, points: swapped };
    let t = tunnel_open(&jud, &rud).unwrap();
    assert!(!t.open);
    assert!(t.min_gap.abs() < 1e-12, "{t:?}");

    // a generous RUD opens it
    let strong = ExitCurve {
        decoder: ExitDecoder::Rud,
        snr_db: None,
        points: vec![ExitPoint { i_a: 0.0, i_e: 0.0, user: 2 }, ExitPoint { i_a: 0.1, i_e: 1.0, user: 2 }],
    };
    assert!(tunnel_open(&jud, &strong).unwrap().open);
}

#[test]
fn invalid_grids_are_rejected() {
    let p = pair(120, 0.7, 0.5, 9);
    let cfg = ExitConfig::default();
    assert!(transfer_rud(&p, &[0.5, 0.2], &cfg).is_err());
    assert!(transfer_rud(&p, &[0.5, 1.0], &cfg).is_err());
}

#[test]
fn csv_rows_follow_header() {
    let curve = ExitCurve { decoder: ExitDecoder::Jud, snr_db: Some(2.5), points: vec![ExitPoint { i_a: 0.5, i_e: 0.7, user: 2 }] };
    let ctx = CurveContext { h1: 1.5, h2: 0.9, r1: 0.85, r2: 0.45 };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exit.csv");
    write_csv(&path, &[(ctx, &curve)]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    assert_eq!(text.lines().nth(1), Some("JUD,2,2.5,1.5,0.9,0.85,0.45,0.5,0.700000000"));
}

#[test]
fn tunnel_scan_stops_at_saturation_and_skips_unreachable_points() {
    let point = |i_a: f64, i_e: f64| ExitPoint { i_a, i_e, user: 2 };
    let jud = ExitCurve {
        decoder: ExitDecoder::Jud,
        snr_db: Some(2.5),
        points: vec![point(0.0, 0.5), point(0.4, 0.9), point(0.8, 1.0), point(0.9, 1.0)],
    };
    // saturating RUD: would close the tunnel at x = 0.9 if the scan went on
    let rud =
        ExitCurve { decoder: ExitDecoder::Rud, snr_db: None, points: vec![point(0.0, 0.0), point(0.5, 0.4), point(1.0 - 1e-9, 0.95)] };
    let t = tunnel_open(&jud, &rud).unwrap();
    // gaps: 0.5, 0.9 - 0.5, 1.0 - (0.5 + 0.5 * 0.4 / 0.55)
    let want = 1.0 - (0.5 + 0.5 * (0.8 - 0.4) / 0.55);
    assert!((t.min_gap - want).abs() < 1e-6, "{t:?}");
    assert!(t.open);
}
