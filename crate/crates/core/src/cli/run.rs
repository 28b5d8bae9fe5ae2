//! Experiment orchestration and on-disk artifacts.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use super::config::{Experiment, RunConfig};
use crate::budget;
use crate::coarsegrain::{
    g1_ks_distance, lemma_tail_estimates, regenerative_property_pvalue, sample_regenerative_cg,
    verify_cg_identity,
};
use crate::continuum_psi::{psi_hat_pair, uconv_check, QuadSpec};
use crate::disorder::{sample_disorder, DisorderLaw};
use crate::error::{PinError, Result};
use crate::freenergy::{
    critical_point, probes_needed, scan_summary, smoothing_check, CriticalPoint,
};
use crate::partition::{potentials, PinParams};
use crate::renewal::{build_renewal, RenewalLaw};
use crate::rng::{Purpose, SeedRecord};
use crate::slowvar::SlowlyVarying;
use crate::weakcoupling::{common_h_sweep, pathwise_check, scaling_check, Batch, Point};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_DIAGNOSTIC: i32 = 4;

/// Version tag written into every CSV schema line.
pub const SCHEMA_VERSION: u32 = 1;

/// One CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&'static str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = format!(
            "# schema: pinning/{} v{SCHEMA_VERSION}; columns: {}\n",
            self.name,
            self.columns.join(",")
        );
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

fn c<T: Display>(x: T) -> String {
    x.to_string()
}

/// Work tracker shared by the points of one run.
struct Meter {
    remaining: u128,
}

impl Meter {
    fn take(&mut self, units: u128) -> Result<()> {
        budget::check(units, self.remaining)?;
        self.remaining -= units;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub code: i32,
    pub status: &'static str,
    pub message: String,
    pub files: Vec<PathBuf>,
}

fn law_for(cfg: &RunConfig, needed: usize) -> Result<RenewalLaw> {
    let n_max = cfg.law.n_max.unwrap_or(needed).max(needed).max(2);
    match cfg.law.family.as_str() {
        "two-point" => RenewalLaw::two_point(n_max),
        "deterministic" => RenewalLaw::deterministic(n_max),
        _ => build_renewal(
            cfg.law.alpha,
            SlowlyVarying::from_key(&cfg.law.l, cfg.law.l_param)?,
            n_max,
        ),
    }
}

fn disorder_for(cfg: &RunConfig) -> Result<DisorderLaw> {
    DisorderLaw::from_key(&cfg.disorder, cfg.disorder_gamma)
}

fn batch(cfg: &RunConfig, meter: &Meter) -> Batch {
    Batch {
        replicas: cfg.replicas,
        seed: cfg.seed,
        budget: meter.remaining,
    }
}

fn horizon(n: usize, t: f64) -> Result<usize> {
    Point {
        beta_hat: 0.0,
        h_hat: 0.0,
        t,
        n,
    }
    .horizon()
}

fn run_sim(cfg: &RunConfig, meter: &mut Meter, out: &mut Vec<Table>) -> Result<()> {
    let g = &cfg.grids;
    let nt = horizon(g.sim_n, g.sim_t)?;
    let nct = match g.sim_c {
        Some(cc) => horizon(g.sim_n, cc * g.sim_t)?,
        None => 0,
    };
    let law = law_for(cfg, nt.max(nct))?;
    let dlaw = disorder_for(cfg)?;
    out.push(Table::new(
        "sim_replicas",
        &[
            "beta_hat",
            "h_hat",
            "t",
            "n",
            "replica",
            "log_z_free",
            "log_z_constrained",
        ],
    ));
    out.push(Table::new(
        "sim_summary",
        &[
            "beta_hat",
            "h_hat",
            "t",
            "n",
            "replicas",
            "beta_n",
            "h_n",
            "mean_log_z",
            "se_log_z",
            "mean_log_zc",
            "se_log_zc",
            "q05_log_zc",
            "q25_log_zc",
            "q50_log_zc",
            "q75_log_zc",
            "q95_log_zc",
            "mean_zc",
            "se_zc",
        ],
    ));
    out.push(Table::new(
        "sim_pathwise",
        &["beta_hat", "min_increment", "min_slope_change"],
    ));
    if g.sim_c.is_some() {
        out.push(Table::new(
            "sim_scaling",
            &[
                "beta_hat",
                "h_hat",
                "t",
                "c",
                "n",
                "ks",
                "ks_pvalue",
                "var_stretched",
                "var_rescaled",
            ],
        ));
    }
    for &bh in &g.beta_hat {
        let point = Point {
            beta_hat: bh,
            h_hat: g.h_hat[0],
            t: g.sim_t,
            n: g.sim_n,
        };
        meter.take(budget::dp_units(nt, cfg.replicas) * g.h_hat.len() as u128)?;
        let sweep = common_h_sweep(&law, &dlaw, point, &g.h_hat, &batch(cfg, meter))?;
        for e in &sweep {
            let p = e.point;
            for (r, (lf, lc)) in e.log_free.iter().zip(&e.log_constrained).enumerate() {
                out[0].push(vec![
                    c(p.beta_hat),
                    c(p.h_hat),
                    c(p.t),
                    c(p.n),
                    c(r),
                    c(lf),
                    c(lc),
                ]);
            }
            let q: Vec<String> = e.constrained.quantiles.iter().map(|x| c(x.1)).collect();
            let mut row = vec![
                c(p.beta_hat),
                c(p.h_hat),
                c(p.t),
                c(p.n),
                c(e.replicas),
                c(e.beta_n),
                c(e.h_n),
                c(e.free.mean),
                c(e.free.stderr),
                c(e.constrained.mean),
                c(e.constrained.stderr),
            ];
            row.extend(q);
            row.push(c(e.zc_mean));
            row.push(c(e.zc_stderr));
            out[1].push(row);
        }
        if g.h_hat.windows(2).all(|w| w[0] < w[1]) && g.h_hat.len() > 1 {
            let pw = pathwise_check(&sweep)?;
            out[2].push(vec![c(bh), c(pw.min_increment), c(pw.min_slope_change)]);
        }
        if let Some(cc) = g.sim_c {
            for &hh in &g.h_hat {
                meter.take(
                    budget::dp_units(nct, cfg.replicas) + budget::dp_units(nt, cfg.replicas),
                )?;
                let pt = Point { h_hat: hh, ..point };
                let r = scaling_check(&law, &dlaw, pt, cc, &batch(cfg, meter))?;
                out[3].push(vec![
                    c(bh),
                    c(hh),
                    c(g.sim_t),
                    c(cc),
                    c(g.sim_n),
                    c(r.ks),
                    c(r.ks_pvalue),
                    c(r.var_stretched),
                    c(r.var_rescaled),
                ]);
            }
        }
    }
    Ok(())
}

fn run_psi(cfg: &RunConfig, out: &mut Vec<Table>) -> Result<()> {
    let g = &cfg.grids;
    out.push(Table::new(
        "psi",
        &[
            "nu",
            "delta_hat",
            "t",
            "psi",
            "psi_c",
            "terms",
            "bound_free",
            "bound_c",
            "quad_error",
        ],
    ));
    let quad = QuadSpec {
        panels: g.psi_panels,
        ..QuadSpec::default()
    };
    for &dh in &g.psi_delta_hat {
        for &t in &g.psi_t {
            let (f, k) = psi_hat_pair(g.psi_nu, dh, t, g.psi_tol, g.psi_k_max, quad)?;
            out[0].push(vec![
                c(g.psi_nu),
                c(dh),
                c(t),
                c(f.value()),
                c(k.value()),
                c(f.terms.len().max(k.terms.len())),
                c(f.truncation_bound),
                c(k.truncation_bound),
                c(f.quad_error.max(k.quad_error)),
            ]);
        }
    }
    Ok(())
}

fn run_uconv(cfg: &RunConfig, meter: &mut Meter, out: &mut Vec<Table>) -> Result<()> {
    let g = &cfg.grids;
    let n_top = g.uconv_n_list.iter().copied().max().unwrap_or(0);
    meter.take(g.uconv_n_list.iter().map(|&n| budget::dp_units(n, 1)).sum())?;
    let law = law_for(cfg, n_top)?;
    let m = g.uconv_t_points.max(1);
    let ts: Vec<f64> = (0..=m).map(|k| k as f64 / m as f64).collect();
    let rep = uconv_check(&law, g.uconv_delta_hat, &ts, &g.uconv_n_list)?;
    out.push(Table::new(
        "uconv",
        &[
            "nu",
            "delta_hat",
            "n",
            "delta_n",
            "sup_dev_free",
            "sup_dev_c",
        ],
    ));
    for r in &rep.rows {
        out[0].push(vec![
            c(rep.nu),
            c(rep.delta_hat),
            c(r.n),
            c(r.delta_n),
            c(r.sup_dev_free),
            c(r.sup_dev_constrained),
        ]);
    }
    Ok(())
}

fn run_cg(cfg: &RunConfig, out: &mut Vec<Table>) -> Result<()> {
    let g = &cfg.grids;
    let nt = g.cg_n * g.cg_t;
    let law = law_for(cfg, nt.max(2))?;
    let dlaw = disorder_for(cfg)?;
    let om = sample_disorder(
        &dlaw,
        nt,
        SeedRecord::for_replica(cfg.seed, Purpose::Disorder, 0),
    );
    let x = potentials(&om, &PinParams::new(&dlaw, g.cg_beta, g.cg_h)?, nt)?;
    let r = verify_cg_identity(&law, &x, g.cg_n, g.cg_t)?;
    out.push(Table::new(
        "cg_identity",
        &[
            "n",
            "t",
            "beta",
            "h",
            "z_free",
            "z_cg",
            "rel_dev",
            "z_cg_bare",
            "signatures",
        ],
    ));
    out[0].push(vec![
        c(g.cg_n),
        c(g.cg_t),
        c(g.cg_beta),
        c(g.cg_h),
        c(r.z_free),
        c(r.z_cg),
        c(r.rel_dev),
        c(r.z_cg_bare),
        c(r.signatures),
    ]);
    Ok(())
}

fn run_rege(cfg: &RunConfig, out: &mut Vec<Table>) -> Result<()> {
    let g = &cfg.grids;
    out.push(Table::new(
        "rege_samples",
        &["alpha", "path", "k", "j", "s", "t"],
    ));
    out.push(Table::new(
        "rege_tails",
        &["alpha", "gamma", "event", "p_hat", "ci"],
    ));
    out.push(Table::new(
        "rege_summary",
        &["alpha", "g1_ks", "slope_last", "slope_span", "regen_pvalue"],
    ));
    for &a in &g.rege_alpha {
        for path in 0..g.rege_paths {
            let mut rng =
                SeedRecord::for_replica(cfg.seed, Purpose::Regenerative, 10_000 + path as u64)
                    .rng();
            let s = sample_regenerative_cg(a, g.rege_t_max, &mut rng)?;
            for k in 0..s.cg.len() {
                out[0].push(vec![
                    c(a),
                    c(path),
                    c(k + 1),
                    c(s.cg.j[k]),
                    c(s.cg.s[k]),
                    c(s.cg.t[k]),
                ]);
            }
        }
        let te = lemma_tail_estimates(a, &g.rege_gammas, g.rege_samples, cfg.seed)?;
        for (i, &gm) in te.gammas.iter().enumerate() {
            out[1].push(vec![
                c(a),
                c(gm),
                c("last"),
                c(te.p_last[i].0),
                c(te.p_last[i].1),
            ]);
            out[1].push(vec![
                c(a),
                c(gm),
                c("span"),
                c(te.p_span[i].0),
                c(te.p_span[i].1),
            ]);
        }
        let ks = g1_ks_distance(a, g.rege_samples, cfg.seed)?;
        let pv = regenerative_property_pvalue(a, 0.7, 0.4, g.rege_samples, cfg.seed)?;
        out[2].push(vec![c(a), c(ks), c(te.slope_last), c(te.slope_span), c(pv)]);
    }
    Ok(())
}

fn cp_row(p: &CriticalPoint) -> Vec<String> {
    vec![
        c(p.beta),
        c(p.h_c),
        c(p.ci.0),
        c(p.ci.1),
        c(p.n),
        c(p.replicas),
        c(&p.rule),
        c(p.trace.len()),
    ]
}

const CP_COLUMNS: [&str; 8] = [
    "beta", "h_c", "ci_lo", "ci_hi", "n", "replicas", "rule", "probes",
];

fn trace_rows(t: &mut Table, p: &CriticalPoint) {
    for (i, pr) in p.trace.iter().enumerate() {
        t.push(vec![
            c(p.beta),
            c(i),
            c(pr.h),
            c(pr.f_n),
            c(pr.stderr),
            c(pr.rule),
        ]);
    }
}

fn critical_points(
    cfg: &RunConfig,
    law: &RenewalLaw,
    dlaw: &DisorderLaw,
    betas: &[f64],
    n: usize,
    meter: &mut Meter,
    out: &mut Vec<Table>,
    name: &str,
) -> Result<Vec<CriticalPoint>> {
    out.push(Table::new(name, &CP_COLUMNS));
    out.push(Table::new(
        &format!("{name}_trace"),
        &["beta", "step", "h", "f_n", "stderr", "rule"],
    ));
    let k = out.len();
    let mut pts = Vec::new();
    for &b in betas {
        meter.take(budget::dp_units(n, cfg.replicas) * probes_needed(&cfg.solver) as u128)?;
        let p = critical_point(law, dlaw, b, &cfg.solver, n, &batch(cfg, meter))?;
        out[k - 2].push(cp_row(&p));
        trace_rows(&mut out[k - 1], &p);
        pts.push(p);
    }
    Ok(pts)
}

fn run_hc(cfg: &RunConfig, meter: &mut Meter, out: &mut Vec<Table>) -> Result<()> {
    let n = cfg.grids.hc_n;
    let law = law_for(cfg, n)?;
    let dlaw = disorder_for(cfg)?;
    critical_points(cfg, &law, &dlaw, &cfg.grids.hc_beta, n, meter, out, "hc")?;
    Ok(())
}

fn run_scan(cfg: &RunConfig, meter: &mut Meter, out: &mut Vec<Table>) -> Result<()> {
    let g = &cfg.grids;
    let betas = &g.scan_beta;
    if betas.len() < 2 || betas.windows(2).any(|w| w[0] >= w[1]) || betas[0] <= 0.0 {
        return Err(PinError::InvalidArgument(
            "scan.beta_grid must be positive and increasing".into(),
        ));
    }
    if betas.last().unwrap() / betas[0] < 10f64.sqrt() {
        return Err(PinError::InvalidArgument(
            "scan.beta_grid spans less than half a decade".into(),
        ));
    }
    let law = law_for(cfg, g.scan_n)?;
    let dlaw = disorder_for(cfg)?;
    let planned = budget::dp_units(g.scan_n, cfg.replicas)
        * (probes_needed(&cfg.solver) * betas.len()) as u128;
    let pts = critical_points(cfg, &law, &dlaw, betas, g.scan_n, meter, out, "scan")?;
    let r = scan_summary(&law, pts, planned)?;
    let mut t = Table::new("scan_ratio", &["beta", "ratio", "ratio_half_width"]);
    for (b, q) in r.betas.iter().zip(&r.ratios) {
        t.push(vec![c(b), c(q.0), c(q.1)]);
    }
    out.push(t);
    let mut s = Table::new(
        "scan_summary",
        &[
            "alpha",
            "exponent",
            "exponent_se",
            "target_exponent",
            "plateau",
            "plateau_half_width",
            "plateau_consistent",
            "work_units",
        ],
    );
    s.push(vec![
        c(r.alpha),
        c(r.exponent),
        c(r.exponent_se),
        c(r.target_exponent),
        c(r.plateau.0),
        c(r.plateau.1),
        c(r.plateau_consistent),
        c(r.work_units),
    ]);
    out.push(s);
    Ok(())
}

fn run_smoothing(cfg: &RunConfig, meter: &mut Meter, out: &mut Vec<Table>) -> Result<()> {
    let g = &cfg.grids;
    let law = law_for(cfg, g.smoothing_n)?;
    let dlaw = disorder_for(cfg)?;
    let pts = critical_points(
        cfg,
        &law,
        &dlaw,
        &[g.smoothing_beta],
        g.smoothing_n,
        meter,
        out,
        "smoothing_hc",
    )?;
    let h_c = pts[0].h_c;
    let hs: Vec<f64> = g.smoothing_offsets.iter().map(|d| h_c + d).collect();
    meter.take(budget::dp_units(g.smoothing_n, cfg.replicas) * hs.len() as u128)?;
    let r = smoothing_check(
        &law,
        &dlaw,
        g.smoothing_beta,
        h_c,
        &hs,
        g.smoothing_n,
        &batch(cfg, meter),
    )?;
    let mut t = Table::new("smoothing", &["beta", "h", "h_c", "f_n", "stderr", "bound"]);
    for (h, f, se, b) in &r.rows {
        t.push(vec![c(r.beta), c(h), c(h_c), c(f), c(se), c(b)]);
    }
    out.push(t);
    let mut s = Table::new(
        "smoothing_summary",
        &["beta", "h_c", "violations", "negative"],
    );
    s.push(vec![c(r.beta), c(h_c), c(r.violations), c(r.negative)]);
    out.push(s);
    Ok(())
}

fn run_alpha_gt1(cfg: &RunConfig, meter: &mut Meter, out: &mut Vec<Table>) -> Result<()> {
    let g = &cfg.grids;
    if !(cfg.law.alpha > 1.0) || cfg.law.family != "power" {
        return Err(PinError::Domain {
            what: "law.alpha",
            value: cfg.law.alpha,
            domain: "(1, ∞) with the power family".into(),
        });
    }
    if g.agt1_beta.iter().any(|&b| !(b > 0.0)) {
        return Err(PinError::InvalidArgument(
            "agt1.beta_grid must exclude β = 0".into(),
        ));
    }
    let law = law_for(cfg, g.agt1_n)?;
    let dlaw = disorder_for(cfg)?;
    let mean_return = law.mean_return_time();
    let target = cfg.law.alpha / (1.0 + cfg.law.alpha) / (2.0 * mean_return);
    let mut t = Table::new(
        "alpha_gt1",
        &[
            "beta",
            "h_c",
            "ratio",
            "ratio_half_width",
            "target",
            "mean_return",
        ],
    );
    // rows are appended as critical points finish, so a budget stop keeps them
    let mut done = Vec::new();
    let res = (|| -> Result<()> {
        let pts = critical_points(
            cfg,
            &law,
            &dlaw,
            &g.agt1_beta,
            g.agt1_n,
            meter,
            out,
            "alpha_gt1_hc",
        )?;
        done = pts;
        Ok(())
    })();
    for p in &done {
        let b2 = p.beta * p.beta;
        t.push(vec![
            c(p.beta),
            c(p.h_c),
            c(p.h_c / b2),
            c(p.half_width() / b2),
            c(target),
            c(mean_return),
        ]);
    }
    out.push(t);
    res
}

fn classify(e: &PinError) -> (i32, &'static str) {
    match e {
        PinError::Budget { .. } => (EXIT_BUDGET, "partial"),
        PinError::NoConvergence { .. }
        | PinError::SeriesTruncation { .. }
        | PinError::Diagnostic(_)
        | PinError::Bracket { .. } => (EXIT_DIAGNOSTIC, "diagnostic"),
        PinError::Io(_) => (EXIT_IO, "io-error"),
        _ => (EXIT_CONFIG, "invalid"),
    }
}

fn sha256_hex(text: &str) -> String {
    let d = Sha256::digest(text.as_bytes());
    d.iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs `cfg` and writes CSVs, a copy of the configuration and a manifest
/// under `cfg.out`. Data files depend only on the configuration and seed.
pub fn run(cfg: &RunConfig, config_text: &str) -> RunOutcome {
    let start = Instant::now();
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let mut tables = Vec::new();
    let mut meter = Meter {
        remaining: cfg.budget,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build();
    let res = match pool {
        Ok(pool) => pool.install(|| match cfg.experiment {
            Experiment::Sim => run_sim(cfg, &mut meter, &mut tables),
            Experiment::Psi => run_psi(cfg, &mut tables),
            Experiment::Uconv => run_uconv(cfg, &mut meter, &mut tables),
            Experiment::CgCheck => run_cg(cfg, &mut tables),
            Experiment::Rege => run_rege(cfg, &mut tables),
            Experiment::Hc => run_hc(cfg, &mut meter, &mut tables),
            Experiment::Scan => run_scan(cfg, &mut meter, &mut tables),
            Experiment::Smoothing => run_smoothing(cfg, &mut meter, &mut tables),
            Experiment::AlphaGt1 => run_alpha_gt1(cfg, &mut meter, &mut tables),
        }),
        Err(e) => Err(PinError::InvalidArgument(format!("worker pool: {e}"))),
    };
    let (code, status, message) = match &res {
        Ok(()) => (EXIT_OK, "complete", String::new()),
        Err(e) => {
            let (code, status) = classify(e);
            (code, status, e.to_string())
        }
    };
    match write_artifacts(cfg, config_text, &tables, status, &message, started, start) {
        Ok(files) => RunOutcome {
            code,
            status,
            message,
            files,
        },
        Err(e) => RunOutcome {
            code: EXIT_IO,
            status: "io-error",
            message: e.to_string(),
            files: Vec::new(),
        },
    }
}

fn write_artifacts(
    cfg: &RunConfig,
    config_text: &str,
    tables: &[Table],
    status: &str,
    message: &str,
    started: u64,
    start: Instant,
) -> Result<Vec<PathBuf>> {
    let dir: &Path = &cfg.out;
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for t in tables {
        let p = dir.join(format!("{}.csv", t.name));
        fs::write(&p, t.render())?;
        files.push(p);
    }
    let cfg_path = dir.join("config.txt");
    fs::write(&cfg_path, config_text)?;
    files.push(cfg_path);
    let outputs: Vec<String> = tables.iter().map(|t| format!("{}.csv", t.name)).collect();
    let manifest = [
        ("experiment", cfg.experiment.name().to_string()),
        ("status", status.to_string()),
        ("message", message.replace('\n', " ")),
        ("config_sha256", sha256_hex(config_text)),
        ("config_copy", "config.txt".to_string()),
        ("seed", cfg.seed.to_string()),
        ("workers", cfg.workers.to_string()),
        ("replicas", cfg.replicas.to_string()),
        ("budget", cfg.budget.to_string()),
        ("crate", env!("CARGO_PKG_NAME").to_string()),
        ("crate_version", env!("CARGO_PKG_VERSION").to_string()),
        ("schema_version", SCHEMA_VERSION.to_string()),
        ("outputs", outputs.join(",")),
        ("started_unix", started.to_string()),
        (
            "wall_time_s",
            format!("{:.3}", start.elapsed().as_secs_f64()),
        ),
    ];
    let text: String = manifest.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
    let mp = dir.join("manifest.txt");
    fs::write(&mp, text)?;
    files.push(mp);
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::super::config::parse_config;
    use super::*;

    fn cfg(text: &str, e: Experiment, out: &Path) -> RunConfig {
        let mut c = parse_config(text, e).unwrap();
        c.out = out.to_path_buf();
        c
    }

    fn body(p: &Path) -> String {
        fs::read_to_string(p).unwrap()
    }

    #[test]
    fn psi_with_zero_delta_is_one() {
        let d = tempfile::tempdir().unwrap();
        let c = cfg(
            "run.seed = 1\npsi.delta_hat = 0\n",
            Experiment::Psi,
            d.path(),
        );
        let o = run(&c, "");
        assert_eq!(o.code, EXIT_OK, "{o:?}");
        let text = body(&d.path().join("psi.csv"));
        let rows: Vec<&str> = text.lines().skip(2).collect();
        assert_eq!(rows.len(), 4);
        for r in rows {
            let f: Vec<&str> = r.split(',').collect();
            assert_eq!(f[3], "1");
            assert_eq!(f[4], "1");
        }
        assert!(body(&d.path().join("manifest.txt")).contains("status=complete"));
    }

    #[test]
    fn sim_is_byte_identical_across_workers() {
        let text = "run.seed = 5\nrun.replicas = 6\nsim.n = 64\nsim.h_hat = 0, 0.5\nsim.beta_hat = 0.5, 1\n";
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let mut ca = cfg(text, Experiment::Sim, a.path());
        let mut cb = cfg(text, Experiment::Sim, b.path());
        ca.workers = 1;
        cb.workers = 3;
        let o = run(&ca, text);
        assert_eq!(o.code, EXIT_OK, "{o:?}");
        assert_eq!(run(&cb, text).code, EXIT_OK);
        for name in ["sim_replicas.csv", "sim_summary.csv", "sim_pathwise.csv"] {
            assert_eq!(body(&a.path().join(name)), body(&b.path().join(name)));
        }
    }

    #[test]
    fn budget_stop_flushes_partial_results() {
        let text = "run.seed = 5\nrun.replicas = 4\nsim.n = 64\nsim.beta_hat = 0.5, 1, 1.5\nrun.budget = 20000\n";
        let d = tempfile::tempdir().unwrap();
        let c = cfg(text, Experiment::Sim, d.path());
        let o = run(&c, text);
        assert_eq!(o.code, EXIT_BUDGET);
        let rows = body(&d.path().join("sim_summary.csv")).lines().count() - 2;
        assert!((1..3).contains(&rows), "{rows}");
        assert!(body(&d.path().join("manifest.txt")).contains("status=partial"));
    }

    #[test]
    fn hc_without_disorder() {
        let text = "run.seed = 2\nrun.replicas = 2\nhc.n = 1024\nsolver.tol = 1e-3\n";
        let d = tempfile::tempdir().unwrap();
        let c = cfg(text, Experiment::Hc, d.path());
        assert_eq!(run(&c, text).code, EXIT_OK);
        let t = body(&d.path().join("hc.csv"));
        let row: Vec<&str> = t.lines().nth(2).unwrap().split(',').collect();
        let hc: f64 = row[1].parse().unwrap();
        assert!(hc.abs() < 0.02, "{hc}");
    }

    #[test]
    fn diagnostic_exit_code() {
        let text = "run.seed = 2\npsi.nu = 0.3\npsi.delta_hat = 5\npsi.t = 1\npsi.k_max = 10\n";
        let d = tempfile::tempdir().unwrap();
        let c = cfg(text, Experiment::Psi, d.path());
        assert_eq!(run(&c, text).code, EXIT_DIAGNOSTIC);
    }
}
