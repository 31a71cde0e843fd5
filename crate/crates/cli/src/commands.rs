//! Subcommand bodies. Each reads a resolved [`KeyValues`] recipe.

use std::fs;
use std::path::{Path, PathBuf};

use rdgmac::binmat::{parse_alist, BinMatrix};
use rdgmac::channel::ChannelParams;
use rdgmac::codes::library::{pg273, random_ldpc};
use rdgmac::codes::{combine_rc, extend_re, propose_rc_groups, verify_nested, CodePair, CyclePolicy, Placement, RcParams, ReParams};
use rdgmac::config::{Entry, KeyValues};
use rdgmac::exitchart::{self, CurveContext, ExitConfig, ExitCurve};
use rdgmac::harness::{self, CsvSink, Experiment, Scheme};
use rdgmac::infotheory::{self, QuadMethod, Quadrature, QuadratureSpec};
use rdgmac::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(Error::Tolerance(_)) => 3,
            CliError::Lib(Error::Construction(_) | Error::RowOverlap { .. } | Error::InvalidMatrix(_) | Error::Dimension { .. }) => 2,
            CliError::Lib(_) => 1,
            CliError::Verification(_) => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn config_error(line: usize, message: impl Into<String>) -> CliError {
    CliError::Lib(Error::Config { line, message: message.into() })
}

/// A resolved command line.
pub struct Invocation {
    pub kv: KeyValues,
    /// Directory against which recipe paths resolve.
    pub base_dir: PathBuf,
    pub out: Option<PathBuf>,
    pub workers: usize,
    pub dry_run: bool,
}

impl Invocation {
    pub fn load(
        config: Option<PathBuf>,
        out: Option<PathBuf>,
        seed: Option<(&str, u64)>,
        workers: Option<usize>,
        overrides: &[String],
        dry_run: bool,
    ) -> Result<Self> {
        let (mut kv, base_dir) = match config {
            Some(path) => {
                let text = fs::read_to_string(&path).map_err(|e| config_error(0, format!("{}: {e}", path.display())))?;
                let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (KeyValues::parse(&text)?, dir)
            }
            None => (KeyValues::default(), PathBuf::new()),
        };
        kv.apply_overrides(overrides)?;
        if let Some((key, s)) = seed {
            kv.set(key, &s.to_string());
        }
        let workers = workers.unwrap_or_else(harness::default_workers);
        if workers == 0 {
            return Err(config_error(0, "--workers must be at least 1"));
        }
        Ok(Invocation { kv, base_dir, out, workers, dry_run })
    }

    /// Sets a path-valued key given relative to the current directory.
    pub fn set_path(&mut self, key: &str, path: PathBuf) {
        let abs = std::path::absolute(&path).unwrap_or(path);
        self.kv.set(key, &abs.to_string_lossy());
    }

    fn out(&self) -> Result<&Path> {
        self.out.as_deref().ok_or_else(|| config_error(0, "--out is required"))
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| CliError::Lib(Error::Parameter(format!("cannot start worker pool: {e}"))))
    }
}

fn load_pair(kv: &KeyValues, base_dir: &Path) -> Result<CodePair> {
    let entry = kv.required("pair")?;
    CodePair::load(base_dir.join(&entry.value)).map_err(|e| config_error(entry.line, format!("cannot load code pair: {e}")))
}

// ---------------------------------------------------------------- construct

const CONSTRUCT_KEYS: [&str; 14] = [
    "method",
    "base",
    "base_cols",
    "base_rows",
    "base_col_weight",
    "seed",
    "extra_rows",
    "row_weight",
    "cycle_policy",
    "placement",
    "max_attempts",
    "group_size",
    "n_groups",
    "groups",
];

fn seed(kv: &KeyValues, why: &str) -> Result<u64> {
    match kv.get("seed") {
        Some(e) => Ok(e.parse()?),
        None => Err(config_error(0, format!("an explicit seed is required for {why}"))),
    }
}

fn base_matrix(kv: &KeyValues, base_dir: &Path) -> Result<BinMatrix> {
    let entry = kv.required("base")?;
    match entry.value.as_str() {
        "pg273" => Ok(pg273()),
        "random" => Ok(random_ldpc(
            kv.required("base_cols")?.parse()?,
            kv.required("base_rows")?.parse()?,
            kv.value_or("base_col_weight", 3)?,
            seed(kv, "a random base")?,
        )?),
        file => {
            let path = base_dir.join(file);
            let text = fs::read_to_string(&path).map_err(|e| config_error(entry.line, format!("{}: {e}", path.display())))?;
            Ok(parse_alist(&text)?)
        }
    }
}

/// `"0 5 | 1 7"`: rows separated by spaces, groups by `|`.
fn parse_groups(e: &Entry) -> Result<Vec<Vec<usize>>> {
    e.value
        .split('|')
        .map(|g| {
            g.split_whitespace().map(|r| r.parse().map_err(|_| config_error(e.line, format!("bad row index {r:?} in groups")))).collect()
        })
        .collect()
}

fn build_pair(kv: &KeyValues, base_dir: &Path) -> Result<CodePair> {
    let method = kv.required("method")?;
    let base = base_matrix(kv, base_dir)?;
    // the extension seed is offset so that a random base and its extension
    // do not share a stream
    match method.value.as_str() {
        "equal" => Ok(CodePair::equal_rate(base)?),
        "re" => {
            let mut p = ReParams::new(kv.required("extra_rows")?.parse()?, seed(kv, "row extension")?.wrapping_add(1));
            p.row_weight = kv.value_or("row_weight", p.row_weight)?;
            p.max_attempts = kv.value_or("max_attempts", p.max_attempts)?;
            if let Some(e) = kv.get("cycle_policy") {
                p.cycle_policy = match e.value.as_str() {
                    "global" => CyclePolicy::Global,
                    "appended-only" => CyclePolicy::AppendedOnly,
                    "unchecked" => CyclePolicy::Unchecked,
                    v => return Err(config_error(e.line, format!("unknown cycle_policy {v:?}"))),
                };
            }
            if let Some(e) = kv.get("placement") {
                p.placement = match e.value.as_str() {
                    "uniform" => Placement::Uniform,
                    "balanced" => Placement::Balanced,
                    v => return Err(config_error(e.line, format!("unknown placement {v:?}"))),
                };
            }
            Ok(extend_re(&base, &p)?)
        }
        "rc" => {
            let group_size = kv.value_or("group_size", 2)?;
            let groups = match kv.get("groups") {
                Some(e) => parse_groups(e)?,
                None => {
                    let all: Vec<usize> = (0..base.n_rows()).collect();
                    let n = kv.required("n_groups")?.parse()?;
                    propose_rc_groups(&base, &all, group_size, n, seed(kv, "row grouping")?.wrapping_add(1))?
                }
            };
            Ok(combine_rc(&base, &RcParams { group_size, groups })?)
        }
        v => Err(config_error(method.line, format!("unknown method {v:?} (re, rc or equal)"))),
    }
}

pub fn construct(inv: &Invocation) -> Result<()> {
    inv.kv.reject_unknown(&CONSTRUCT_KEYS)?;
    if inv.dry_run {
        for e in inv.kv.entries() {
            println!("{} = {}", e.key, e.value);
        }
        return Ok(());
    }
    let out = inv.out()?;
    let pair = build_pair(&inv.kv, &inv.base_dir)?;
    pair.save(out)?;
    print!("{}", pair.manifest());
    if pair.h1.rank() < pair.h1.n_rows() || pair.h2.rank() < pair.h2.n_rows() {
        println!("note: rank deficiency makes the effective rates exceed the nominal ones");
    }
    Ok(())
}

// ---------------------------------------------------------------- ber

/// Splits a recipe into one experiment per scheme in its `scheme` list.
/// A key `<scheme>.<key>` applies to that scheme only.
pub fn experiments(kv: &KeyValues, base_dir: &Path) -> Result<Vec<Experiment>> {
    let schemes = kv.required("scheme")?;
    let tags: Vec<String> = schemes.parse_list()?;
    if tags.is_empty() {
        return Err(config_error(schemes.line, "empty scheme list"));
    }
    for e in kv.entries() {
        if let Some((prefix, _)) = e.key.split_once('.') {
            if !tags.iter().any(|t| t == prefix) {
                return Err(config_error(e.line, format!("key {:?} names no listed scheme", e.key)));
            }
        }
    }
    let mut out = Vec::with_capacity(tags.len());
    for tag in &tags {
        if Scheme::from_tag(tag).is_none() {
            return Err(config_error(schemes.line, format!("unknown scheme {tag:?}")));
        }
        let mut sub = KeyValues::default();
        for e in kv.entries().iter().filter(|e| !e.key.contains('.')) {
            sub.insert(e.clone());
        }
        for e in kv.entries() {
            if let Some(rest) = e.key.strip_prefix(tag.as_str()).and_then(|r| r.strip_prefix('.')) {
                sub.insert(Entry { key: rest.to_string(), ..e.clone() });
            }
        }
        sub.set("scheme", tag);
        out.push(Experiment::from_config(&sub, base_dir)?);
    }
    Ok(out)
}

pub fn ber(inv: &Invocation) -> Result<()> {
    let exps = experiments(&inv.kv, &inv.base_dir)?;
    if inv.dry_run {
        let mut total = 0;
        for e in &exps {
            for &snr in &e.snr_db {
                println!(
                    "{} snr_db={snr} max_blocks={} min_error_events={} L={}",
                    e.scheme.tag(),
                    e.max_blocks,
                    e.min_error_events,
                    e.pair.len()
                );
                total += e.max_blocks;
            }
        }
        println!("at most {total} blocks");
        return Ok(());
    }
    let out = inv.out()?;
    match fs::remove_file(out) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
        Err(e) => return Err(config_error(0, format!("{}: {e}", out.display()))),
    }
    let mut sink = CsvSink::open(out)?;
    for e in &exps {
        for &snr in &e.snr_db {
            let mut one = e.clone();
            one.snr_db = vec![snr];
            let p = harness::run_ber(&one, inv.workers, Some(&mut sink))?.remove(0);
            eprintln!(
                "{} {snr} dB: {} blocks, {} block errors, ber1 {:.3e}, ber2 {:.3e}",
                e.scheme.tag(),
                p.blocks,
                p.block_errors,
                p.ber1,
                p.ber2
            );
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- exit

const EXIT_KEYS: [&str; 8] = ["pair", "h1", "h2", "snr_db", "grid", "trials", "inner_iters", "seed"];

pub const DEFAULT_GRID: [f64; 12] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99];

pub fn exit(inv: &Invocation) -> Result<()> {
    let kv = &inv.kv;
    kv.reject_unknown(&EXIT_KEYS)?;
    let h1: f64 = kv.required("h1")?.parse()?;
    let h2: f64 = kv.required("h2")?.parse()?;
    let snrs: Vec<f64> = kv.required("snr_db")?.parse_list()?;
    let grid = match kv.get("grid") {
        Some(e) => e.parse_list()?,
        None => DEFAULT_GRID.to_vec(),
    };
    let d = ExitConfig::default();
    let cfg = ExitConfig {
        trials: kv.value_or("trials", d.trials)?,
        inner_iters: kv.value_or("inner_iters", d.inner_iters)?,
        seed: seed(kv, "EXIT trials")?,
    };
    let params: Vec<ChannelParams> = snrs.iter().map(|&s| ChannelParams::from_snr_db(h1, h2, s)).collect::<rdgmac::Result<_>>()?;
    let pair = load_pair(kv, &inv.base_dir)?;
    if inv.dry_run {
        println!("{} SNR points x {} grid points x {} trials of length {}", snrs.len(), grid.len(), cfg.trials, pair.len());
        return Ok(());
    }
    let out = inv.out()?;
    let pool = inv.pool()?;
    let (jud, rud) = pool.install(|| -> rdgmac::Result<_> {
        let jud = params.iter().map(|p| exitchart::transfer_jud(&pair, p, &grid, &cfg)).collect::<rdgmac::Result<Vec<_>>>()?;
        Ok((jud, exitchart::transfer_rud(&pair, &grid, &cfg)?))
    })?;
    let ctx = CurveContext { h1, h2, r1: pair.r1(), r2: pair.r2() };
    let mut curves: Vec<(CurveContext, &ExitCurve)> = Vec::new();
    for [u1, u2] in &jud {
        curves.push((ctx, u1));
        curves.push((ctx, u2));
    }
    curves.push((ctx, &rud));
    exitchart::write_csv(out, &curves)?;
    for (snr, [_, u2]) in snrs.iter().zip(&jud) {
        let t = exitchart::tunnel_open(u2, &rud)?;
        println!("snr_db={snr} tunnel_open={} min_gap={:.6}", t.open, t.min_gap);
    }
    Ok(())
}

// ---------------------------------------------------------------- capacity

const CAPACITY_KEYS: [&str; 6] = ["gains", "snr_db", "quadrature", "nodes", "tol", "cross_check"];

/// `"1.2:0.9, 1.4:0.8"`.
fn parse_gains(e: &Entry) -> Result<Vec<(f64, f64)>> {
    e.value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|g| {
            let bad = || config_error(e.line, format!("gain pair {g:?} is not h1:h2"));
            let (a, b) = g.split_once(':').ok_or_else(bad)?;
            Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

/// A comma list, or `start:stop:step` with `stop` included.
fn parse_snrs(e: &Entry) -> Result<Vec<f64>> {
    if !e.value.contains(':') {
        return Ok(e.parse_list()?);
    }
    let parts: Vec<f64> = e
        .value
        .split(':')
        .map(|s| s.trim().parse().map_err(|_| config_error(e.line, format!("bad range {:?}", e.value))))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(config_error(e.line, "range must be start:stop:step"));
    };
    if step.is_nan() || step <= 0.0 || stop < start {
        return Err(config_error(e.line, "range needs step > 0 and stop >= start"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

pub fn capacity(inv: &Invocation) -> Result<()> {
    let kv = &inv.kv;
    kv.reject_unknown(&CAPACITY_KEYS)?;
    let gains = parse_gains(kv.required("gains")?)?;
    let snrs = parse_snrs(kv.required("snr_db")?)?;
    let method = match kv.get("quadrature").map(|e| (e.value.as_str(), e.line)) {
        None | Some(("gh", _)) => QuadMethod::GaussHermite { nodes: kv.value_or("nodes", 200)? },
        Some(("simpson", _)) => QuadMethod::AdaptiveSimpson { tol: kv.value_or("tol", 1e-11)? },
        Some((v, line)) => return Err(config_error(line, format!("unknown quadrature {v:?} (gh or simpson)"))),
    };
    let q = Quadrature::new(QuadratureSpec { method, cross_check: kv.value_or("cross_check", true)? })?;
    if inv.dry_run {
        println!("{} gain pairs x {} SNR points", gains.len(), snrs.len());
        return Ok(());
    }
    let out = inv.out()?;
    let rows = inv.pool()?.install(|| infotheory::sweep(&gains, &snrs, &q))?;
    infotheory::write_csv(out, &rows)?;
    Ok(())
}

// ---------------------------------------------------------------- verify

const VERIFY_KEYS: [&str; 3] = ["pair", "samples", "seed"];

pub fn verify(inv: &Invocation) -> Result<()> {
    let kv = &inv.kv;
    kv.reject_unknown(&VERIFY_KEYS)?;
    let samples: usize = kv.value_or("samples", 1000)?;
    let s = seed(kv, "codeword sampling")?;
    let pair = load_pair(kv, &inv.base_dir)?;
    if inv.dry_run {
        println!("{samples} codeword pairs of length {}", pair.len());
        return Ok(());
    }
    let report = verify_nested(&pair, samples, s);
    let mut failed = Vec::new();
    for (name, check) in [("common", &report.common), ("xor_closure", &report.xor_closure), ("residual", &report.residual)] {
        match &check.witness {
            None => println!("{name}: pass ({} samples)", check.samples),
            Some((sample, rows)) => {
                println!("{name}: FAIL at sample {sample}, violated rows {rows:?}");
                failed.push(name);
            }
        }
    }
    println!("partition: {}", if report.partition { "pass" } else { "FAIL" });
    if !report.partition {
        failed.push("partition");
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}
