use super::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn q() -> Quadrature {
    Quadrature::default()
}

fn p(h1: f64, h2: f64, sigma2: f64) -> ChannelParams {
    ChannelParams::new(h1, h2, sigma2).unwrap()
}

/// `I(class; y)` by a plain trapezoid rule on a fine grid; classes are
/// `(prior, means)` with equiprobable means.
fn trapz_mi(classes: &[(f64, Vec<f64>)], sigma2: f64) -> f64 {
    let sigma = sigma2.sqrt();
    let all: Vec<f64> = classes.iter().flat_map(|c| c.1.iter().copied()).collect();
    let lo = all.iter().copied().fold(f64::INFINITY, f64::min) - 12.0 * sigma;
    let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 12.0 * sigma;
    let n = 200_000;
    let dy = (hi - lo) / n as f64;
    let phi = |y: f64, m: f64| (-(y - m) * (y - m) / (2.0 * sigma2)).exp() / (2.0 * std::f64::consts::PI * sigma2).sqrt();
    let mut total = 0.0;
    for i in 0..=n {
        let y = lo + i as f64 * dy;
        let fk: Vec<f64> = classes.iter().map(|(_, ms)| ms.iter().map(|&m| phi(y, m)).sum::<f64>() / ms.len() as f64).collect();
        let f: f64 = classes.iter().zip(&fk).map(|((pk, _), f)| pk * f).sum();
        let mut v = 0.0;
        for ((pk, _), &fk) in classes.iter().zip(&fk) {
            if fk > 0.0 {
                v += pk * fk * (fk / f).log2();
            }
        }
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        total += w * v * dy;
    }
    total
}

fn bpsk_oracle(gain: f64, sigma2: f64) -> f64 {
    trapz_mi(&[(0.5, vec![gain]), (0.5, vec![-gain])], sigma2)
}

#[test]
fn pure_noise_limit() {
    let params = p(1.0, 0.5, 1e6);
    assert!(mi_joint(&params, &q()).unwrap() < 1e-5);
    assert!(mi_nc(&params, &q()).unwrap() < 1e-5);
}

#[test]
fn degenerate_second_user_is_point_to_point() {
    for &s2 in &[0.1, 0.5, 2.0] {
        let params = p(1.0, 0.0, s2);
        let oracle = bpsk_oracle(1.0, s2);
        assert!((mi_joint(&params, &q()).unwrap() - oracle).abs() < 1e-7);
        assert!((mi_conditional(&params, 1, &q()).unwrap() - oracle).abs() < 1e-7);
        assert!(mi_conditional(&params, 2, &q()).unwrap().abs() < 1e-12);
        // no interference: single equals conditional
        let s = mi_single(&params, 1, &q()).unwrap();
        assert!((s - oracle).abs() < 1e-7);
    }
}

#[test]
fn low_noise_discrete_limits() {
    let params = p(1.3, 0.7, 1e-4);
    assert!((mi_joint(&params, &q()).unwrap() - 2.0).abs() < 1e-3);
    assert!((mi_nc(&params, &q()).unwrap() - 1.0).abs() < 1e-3);
}

#[test]
fn conditional_ignores_other_gain() {
    let a = mi_conditional(&p(1.2, 0.3, 0.4), 1, &q()).unwrap();
    let b = mi_conditional(&p(1.2, 1.1, 0.4), 1, &q()).unwrap();
    assert!((a - b).abs() < 1e-10);
    assert!((a - bpsk_oracle(1.2, 0.4)).abs() < 1e-7);
    let c = mi_conditional(&p(1.2, 0.9, 0.4), 2, &q()).unwrap();
    assert!((c - bpsk_oracle(0.9, 0.4)).abs() < 1e-7);
}

#[test]
fn mixture_terms_match_trapezoid_oracle() {
    let params = p(1.4, 0.8, 0.3);
    let (h1, h2) = (1.4, 0.8);
    let x = |b1: f64, b2: f64| h1 * b1 + h2 * b2;
    let single1 = trapz_mi(&[(0.5, vec![x(1., 1.), x(1., -1.)]), (0.5, vec![x(-1., 1.), x(-1., -1.)])], 0.3);
    let nc = trapz_mi(&[(0.5, vec![x(1., 1.), x(-1., -1.)]), (0.5, vec![x(1., -1.), x(-1., 1.)])], 0.3);
    let joint = trapz_mi(&[(0.25, vec![x(1., 1.)]), (0.25, vec![x(1., -1.)]), (0.25, vec![x(-1., 1.)]), (0.25, vec![x(-1., -1.)])], 0.3);
    assert!((mi_single(&params, 1, &q()).unwrap() - single1).abs() < 1e-7);
    assert!((mi_nc(&params, &q()).unwrap() - nc).abs() < 1e-7);
    assert!((mi_joint(&params, &q()).unwrap() - joint).abs() < 1e-7);
}

#[test]
fn equal_gains_collapse_to_three_points() {
    let (h, s2) = (0.9, 0.25);
    let oracle = trapz_mi(&[(0.5, vec![2.0 * h, -2.0 * h]), (0.5, vec![0.0])], s2);
    let v = mi_nc(&p(h, h, s2), &q()).unwrap();
    assert!((v - oracle).abs() < 1e-7, "{v} vs {oracle}");
}

#[test]
fn chain_rule_ties_the_pentagon_together() {
    for &(h1, h2, snr) in &[(1.2, 0.9, 0.0), (1.5, 0.9, 3.0), (2.5, 0.8, -2.0), (1.0, 1.0, 5.0)] {
        let params = ChannelParams::from_snr_db(h1, h2, snr).unwrap();
        let v = capacity_region(&params, &q()).unwrap();
        let joint = mi_joint(&params, &q()).unwrap();
        assert!((v[2].r1 + v[2].r2 - joint).abs() < 1e-9);
        assert!((v[3].r1 + v[3].r2 - joint).abs() < 1e-9);
        assert!(v[3].r1 <= v[1].r1 + 1e-12 && v[2].r2 <= v[4].r2 + 1e-12);
    }
}

#[test]
fn symmetric_gains_give_symmetric_pentagon() {
    let v = capacity_region(&p(1.0, 1.0, 0.4), &q()).unwrap();
    assert!((v[1].r1 - v[4].r2).abs() < 1e-12);
    assert!((v[2].r2 - v[3].r1).abs() < 1e-12);
}

#[test]
fn within_class_entropy_matches_chain_rule() {
    for &(h1, h2, s2) in &[(1.2, 0.9, 0.5), (1.5, 0.9, 0.1), (2.0, 0.5, 1.0), (1.0, 1.0, 0.3)] {
        let params = p(h1, h2, s2);
        let fine = Quadrature::new(QuadratureSpec { method: QuadMethod::AdaptiveSimpson { tol: 1e-13 }, cross_check: false }).unwrap();
        for (quad, tol) in [(q(), 1e-7), (fine, 1e-10)] {
            let direct = joint_entropy_given_nc(&params, &quad).unwrap();
            let chain = (2.0 - mi_joint(&params, &quad).unwrap()) - (1.0 - mi_nc(&params, &quad).unwrap());
            assert!((direct - chain).abs() < tol, "{direct} vs {chain}");
        }
    }
}

#[test]
fn theorem1_boxes_use_nc_entropy_and_fit_the_pentagon() {
    for &snr in &[-5.0, 0.0, 3.0, 8.0] {
        let params = ChannelParams::from_snr_db(1.5, 0.9, snr).unwrap();
        let nc = mi_nc(&params, &q()).unwrap();
        let t = theorem1_terms(&params, NcMapping::default(), &q()).unwrap();
        assert!((0.0..=1.0).contains(&t.h_c_given_y));
        let boxes = theorem1_region(&params, NcMapping::default(), &q()).unwrap();
        assert!((boxes[0].r2 - nc).abs() < 1e-15);
        assert!((boxes[1].r1 - nc).abs() < 1e-15);
        let pent = capacity_region(&params, &q()).unwrap();
        for b in boxes {
            assert!(pentagon_contains(&pent, b, 1e-9), "{b:?} outside {pent:?}");
        }
    }
    let bad = NcMapping { a1: 1, a2: 2 };
    assert!(matches!(theorem1_terms(&p(1.0, 1.0, 1.0), bad, &q()), Err(Error::Parameter(_))));
}

#[test]
fn monte_carlo_agrees_within_three_standard_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let params = p(1.4, 0.8, 0.35);
    for quantity in
        [Quantity::Joint, Quantity::Conditional(1), Quantity::Conditional(2), Quantity::Single(1), Quantity::Single(2), Quantity::Nc]
    {
        let exact = mutual_information(&params, quantity, &q()).unwrap();
        let (mc, se) = mi_monte_carlo(&params, quantity, 1_000_000, &mut rng).unwrap();
        assert!((mc - exact).abs() < 3.0 * se, "{quantity:?}: {mc} +- {se} vs {exact}");
    }
}

#[test]
fn far_apart_strong_gains_give_close_nc_curves() {
    let mut gap: f64 = 0.0;
    for snr in (-10..=20).step_by(2) {
        let a = mi_nc(&ChannelParams::from_snr_db(1.4, 0.8, snr as f64).unwrap(), &q()).unwrap();
        let b = mi_nc(&ChannelParams::from_snr_db(2.5, 0.8, snr as f64).unwrap(), &q()).unwrap();
        gap = gap.max((a - b).abs());
    }
    assert!(gap < 0.15, "gap {gap}");
}

#[test]
fn simpson_primary_agrees() {
    let spec = QuadratureSpec { method: QuadMethod::AdaptiveSimpson { tol: 1e-11 }, cross_check: true };
    let qs = Quadrature::new(spec).unwrap();
    let params = p(1.7, 0.6, 0.2);
    assert!((mi_joint(&params, &qs).unwrap() - mi_joint(&params, &q()).unwrap()).abs() < 1e-8);
}

#[test]
fn invalid_user_and_quadrature_are_rejected() {
    assert!(mi_single(&p(1.0, 1.0, 1.0), 3, &q()).is_err());
    let spec = QuadratureSpec { method: QuadMethod::GaussHermite { nodes: 0 }, cross_check: false };
    assert!(Quadrature::new(spec).is_err());
}

#[test]
fn csv_has_header_and_rows() {
    let rows = sweep(&[(1.2, 0.9)], &[0.0, 2.0], &q()).unwrap();
    assert_eq!(rows.len(), 2 * 13);
    assert!(rows[..13].iter().all(|r| r.snr_db == 0.0));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mi.csv");
    write_csv(&path, &rows).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), rows.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn values_are_bounded_and_bottleneck_holds(h1 in 0.2f64..3.0, ratio in 0.0f64..=1.0, snr in -10.0f64..15.0) {
        let params = ChannelParams::from_snr_db(h1, h1 * ratio, snr).unwrap();
        let quad = q();
        let joint = mi_joint(&params, &quad).unwrap();
        let c1 = mi_conditional(&params, 1, &quad).unwrap();
        let c2 = mi_conditional(&params, 2, &quad).unwrap();
        let s1 = mi_single(&params, 1, &quad).unwrap();
        let s2 = mi_single(&params, 2, &quad).unwrap();
        let nc = mi_nc(&params, &quad).unwrap();
        prop_assert!((0.0..=2.0 + 1e-9).contains(&joint));
        for v in [c1, c2, s1, s2, nc] {
            prop_assert!((0.0..=1.0 + 1e-9).contains(&v));
        }
        prop_assert!(s1 <= c1 + 1e-9 && s2 <= c2 + 1e-9);
        prop_assert!(nc <= c1.min(c2) + CROSS_CHECK_TOL);
    }
}
