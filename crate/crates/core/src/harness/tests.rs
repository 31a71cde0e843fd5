use super::*;
use crate::codes::library::random_ldpc;
use crate::codes::{extend_re, Placement, ReParams};

fn re_pair(l: usize, r1: f64, r2: f64, seed: u64) -> Arc<CodePair> {
    let h1 = random_ldpc(l, ((1.0 - r1) * l as f64).round() as usize, 3, seed).unwrap();
    let mut p = ReParams::new(((r1 - r2) * l as f64).round() as usize, seed + 1);
    p.placement = Placement::Balanced;
    Arc::new(extend_re(&h1, &p).unwrap())
}

fn exp(scheme: Scheme, snrs: Vec<f64>) -> Experiment {
    let mut e = Experiment::new(scheme, re_pair(240, 0.7, 0.4, 3), 1.5, 0.9, snrs, 42);
    e.max_blocks = 40;
    e.min_error_events = 10;
    e
}

/// `10 log10(1 / (2 * 1e-8))`
const NOISE_FREE_DB: f64 = 76.98970004336019;

#[test]
fn noise_free_points_are_error_free_for_every_scheme() {
    for scheme in [Scheme::Rdjd, Scheme::RdjdNoniter, Scheme::XorCd, Scheme::Sic] {
        let e = exp(scheme, vec![NOISE_FREE_DB]);
        let p = run_ber(&e, 1, None).unwrap();
        assert_eq!((p[0].errs1, p[0].errs2, p[0].blocks), (0, 0, 40), "{scheme:?}");
    }
    let mut e = exp(Scheme::SingleUserRef, vec![NOISE_FREE_DB]);
    e.h2 = 0.0;
    let p = run_ber(&e, 1, None).unwrap();
    assert_eq!(p[0].ber_avg, 0.0);
    assert!((crate::channel::sigma2_from_snr_db(NOISE_FREE_DB) - 1e-8).abs() < 1e-20);
}

#[test]
fn accounting_is_exact_and_stopping_rule_is_blockwise() {
    let mut e = exp(Scheme::Rdjd, vec![-4.0]);
    e.min_error_events = 7;
    let p = &run_ber(&e, 2, None).unwrap()[0];
    assert_eq!(p.block_errors, 7);
    assert_eq!(p.blocks, 7, "every block fails at -4 dB");
    let (k1, k2) = e.info_bits();
    assert_eq!(p.ber1, p.errs1 as f64 / (p.blocks * k1) as f64);
    assert_eq!(p.ber2, p.errs2 as f64 / (p.blocks * k2) as f64);
    assert_eq!(p.ber_avg, (p.errs1 + p.errs2) as f64 / (p.blocks * (k1 + k2)) as f64);
    assert!(p.ber1 <= 0.5 + 0.1 && p.ber2 <= 0.5 + 0.1);
    assert!(p.avg_outer_iters >= 1.0 && p.avg_outer_iters <= 5.0);
}

fn csv_of(e: &Experiment, workers: usize, dir: &Path, name: &str) -> String {
    let path = dir.join(name);
    let mut sink = CsvSink::open(&path).unwrap();
    run_ber(e, workers, Some(&mut sink)).unwrap();
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn output_is_identical_across_reruns_and_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let e = exp(Scheme::Rdjd, vec![0.0, 1.0, 2.0]);
    let a = csv_of(&e, 1, dir.path(), "a.csv");
    let b = csv_of(&e, 1, dir.path(), "b.csv");
    let c = csv_of(&e, 3, dir.path(), "c.csv");
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(a.lines().count(), 4);
}

#[test]
fn split_runs_concatenate_to_the_full_run() {
    let dir = tempfile::tempdir().unwrap();
    let full = csv_of(&exp(Scheme::XorCd, vec![0.0, 1.5]), 2, dir.path(), "full.csv");
    let path = dir.path().join("parts.csv");
    for snrs in [vec![0.0], vec![1.5]] {
        let mut sink = CsvSink::open(&path).unwrap();
        run_ber(&exp(Scheme::XorCd, snrs), 1, Some(&mut sink)).unwrap();
    }
    assert_eq!(std::fs::read_to_string(path).unwrap(), full);
}

#[test]
fn csv_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let e = exp(Scheme::Sic, vec![1.0, 3.0]);
    let points = run_ber(&e, 1, None).unwrap();
    let path = dir.path().join("r.csv");
    write_results(&e, &points, &path).unwrap();
    let rows = parse_results(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    for (r, p) in rows.iter().zip(&points) {
        assert_eq!(r.scheme, "sic");
        assert_eq!(r.construction, "re");
        assert_eq!(r.l, 240);
        assert_eq!((r.r1, r.r2), (e.pair.r1(), e.pair.r2()));
        assert_eq!((r.snr_db, r.blocks, r.errs1, r.errs2), (p.snr_db, p.blocks, p.errs1, p.errs2));
        assert_eq!((r.ber1, r.ber2, r.ber_avg, r.avg_outer_iters), (p.ber1, p.ber2, p.ber_avg, p.avg_outer_iters));
        assert_eq!(r.seed, 42);
    }
    write_results(&e, &[], &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), format!("{CSV_HEADER}\n"));
    assert!(parse_results("bad,header\n").is_err());
}

#[test]
fn rate_test_extremes() {
    let e = exp(Scheme::Rdjd, vec![0.0]);
    assert!(rate_achieved(&e, NOISE_FREE_DB, 1).unwrap());
    assert!(!rate_achieved(&e, -30.0, 1).unwrap());
}

#[test]
fn configuration_errors() {
    let mut e = exp(Scheme::Rdjd, vec![1.0, 0.5]);
    assert!(matches!(run_ber(&e, 1, None), Err(Error::Config { .. })));
    e.snr_db = vec![1.0];
    e.h2 = 2.0;
    assert!(matches!(e.validate(), Err(Error::Config { .. })));

    let l = 120;
    let h = random_ldpc(l, 60, 3, 1).unwrap();
    let no_common =
        CodePair::new(h.clone(), h.clone(), crate::binmat::BinMatrix::empty(l), h, crate::codes::Construction::RowExtend, None).unwrap();
    let e = Experiment::new(Scheme::XorCd, Arc::new(no_common), 1.0, 0.5, vec![0.0], 1);
    assert!(matches!(e.validate(), Err(Error::Config { .. })));
}

#[test]
fn experiments_load_from_key_value_files() {
    let dir = tempfile::tempdir().unwrap();
    re_pair(240, 0.7, 0.4, 3).save(dir.path().join("pair")).unwrap();
    let text = "scheme = rdjd\npair = pair\nh1 = 1.5\nh2 = 0.9\nsnr_db = 0, 1\nmaster_seed = 5\nouter_iters = 3\n";
    let kv = KeyValues::parse(text).unwrap();
    let e = Experiment::from_config(&kv, dir.path()).unwrap();
    assert_eq!(e.scheme, Scheme::Rdjd);
    assert_eq!(e.snr_db, vec![0.0, 1.0]);
    assert_eq!(e.rdjd.outer_iters, 3);
    assert_eq!(e.pair.len(), 240);

    let kv = KeyValues::parse(&format!("{text}typo = 1\n")).unwrap();
    assert!(matches!(Experiment::from_config(&kv, dir.path()), Err(Error::Config { line: 8, .. })));
    let kv = KeyValues::parse(&text.replace("rdjd", "turbo")).unwrap();
    assert!(matches!(Experiment::from_config(&kv, dir.path()), Err(Error::Config { line: 1, .. })));
}

#[test]
fn lower_rate_single_user_code_decodes_earlier() {
    let mk = |rate: f64| {
        let h = random_ldpc(600, ((1.0 - rate) * 600.0) as usize, 3, 8).unwrap();
        let mut e = Experiment::new(Scheme::SingleUserRef, Arc::new(CodePair::equal_rate(h).unwrap()), 1.0, 0.0, vec![1.0], 3);
        e.max_blocks = 60;
        e.min_error_events = 60;
        run_ber(&e, 1, None).unwrap()[0].ber_avg
    };
    let (low, high) = (mk(0.3), mk(0.7));
    assert!(low < high, "{low} vs {high}");
}

#[test]
fn bisection_brackets_the_waterfall() {
    let mut e = exp(Scheme::Rdjd, vec![0.0]);
    e.max_blocks = 20;
    let (snr, trace) = bisect_waterfall(&e, -4.0, 8.0, 1e-2, 0.5, 1).unwrap();
    assert!(snr > -4.0 && snr <= 8.0);
    assert!(trace.len() >= 2 + 4);
    let at = ber_at(&e, snr, 1).unwrap();
    assert!(at.ber_avg <= 1e-2);
    assert!(bisect_waterfall(&e, 40.0, 50.0, 1e-2, 0.5, 1).is_err());
}

#[test]
fn wilson_interval_reference_values() {
    let (lo, hi) = wilson_interval(10, 100);
    assert!((lo - 0.055_229_4).abs() < 1e-6 && (hi - 0.174_366_6).abs() < 1e-6, "{lo} {hi}");
    let (lo, hi) = wilson_interval(0, 1000);
    assert_eq!(lo, 0.0);
    assert!((hi - 0.003_826_1).abs() < 1e-6, "{hi}");
}
