//! Free energy, contact fraction and critical-point estimation.
//!
//! `F_N(β,h) = E[log Z^c(0,N)]/N` is estimated over replicas whose disorder
//! depends only on `(seed, replica)`, so every `h` probe reuses the same
//! charges and `h ↦ F_N` is increasing and convex on each sample.

use rayon::prelude::*;

use crate::budget;
use crate::disorder::{sample_disorder, DisorderLaw};
use crate::error::{PinError, Result};
use crate::partition::{log_psi_c, z_free_with_contacts, PartitionTable, PinParams};
use crate::renewal::RenewalLaw;
use crate::rng::{Purpose, SeedRecord};
use crate::slowvar::UniversalScale;
use crate::stats::{fit_line, summarize};
use crate::weakcoupling::Batch;

#[derive(Debug, Clone, PartialEq)]
pub struct FreeEnergyEstimate {
    pub beta: f64,
    pub h: f64,
    pub ns: Vec<usize>,
    /// `(F_N, stderr)` per `N`.
    pub f_n: Vec<(f64, f64)>,
    /// Largest-`N` value clamped at zero.
    pub f: f64,
    pub stderr: f64,
    /// Successive differences of `F_N` shrink in magnitude.
    pub trend_shrinks: bool,
    pub replicas: usize,
    pub seed: u64,
}

impl FreeEnergyEstimate {
    /// `(F_N, stderr)` at the largest `N`.
    pub fn last(&self) -> (f64, f64) {
        *self.f_n.last().expect("nonempty N list")
    }
}

fn check_ns(ns: &[usize]) -> Result<usize> {
    if ns.is_empty() {
        return Err(PinError::Empty("N list"));
    }
    if ns[0] == 0 || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PinError::InvalidArgument(
            "N list must be positive and increasing".into(),
        ));
    }
    Ok(*ns.last().unwrap())
}

/// `log Z^c(0, N)/N` per replica (rows) and `N` (columns).
fn f_samples(
    law: &RenewalLaw,
    dlaw: &DisorderLaw,
    beta: f64,
    h: f64,
    ns: &[usize],
    batch: &Batch,
) -> Result<Vec<Vec<f64>>> {
    let n_max = check_ns(ns)?;
    let p = PinParams::new(dlaw, beta, h)?;
    (0..batch.replicas)
        .into_par_iter()
        .map(|r| {
            let om = sample_disorder(
                dlaw,
                n_max,
                SeedRecord::for_replica(batch.seed, Purpose::Disorder, r as u64),
            );
            let tab = PartitionTable::build(law, &om, &p, n_max)?;
            Ok(ns
                .iter()
                .map(|&n| tab.log_constrained(law, n) / n as f64)
                .collect())
        })
        .collect()
}

fn estimate(
    beta: f64,
    h: f64,
    ns: &[usize],
    batch: &Batch,
    rows: &[Vec<f64>],
) -> FreeEnergyEstimate {
    let f_n: Vec<(f64, f64)> = (0..ns.len())
        .map(|j| {
            let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            let s = summarize(&col);
            (s.mean, s.stderr)
        })
        .collect();
    let diffs: Vec<f64> = f_n.windows(2).map(|w| (w[1].0 - w[0].0).abs()).collect();
    let trend_shrinks = diffs.windows(2).all(|w| w[1] <= w[0]);
    let (last, se) = *f_n.last().unwrap();
    FreeEnergyEstimate {
        beta,
        h,
        ns: ns.to_vec(),
        f_n,
        f: last.max(0.0),
        stderr: se,
        trend_shrinks,
        replicas: batch.replicas,
        seed: batch.seed,
    }
}

pub fn free_energy(
    law: &RenewalLaw,
    dlaw: &DisorderLaw,
    beta: f64,
    h: f64,
    ns: &[usize],
    batch: &Batch,
) -> Result<FreeEnergyEstimate> {
    if batch.replicas < 8 {
        return Err(PinError::InvalidArgument(
            "free energy needs at least 8 replicas".into(),
        ));
    }
    let n_max = check_ns(ns)?;
    budget::check(budget::dp_units(n_max, batch.replicas), batch.budget)?;
    let rows = f_samples(law, dlaw, beta, h, ns, batch)?;
    Ok(estimate(beta, h, ns, batch, &rows))
}

/// Free energy at every `h` of a grid, with common disorder.
pub fn free_energy_h_grid(
    law: &RenewalLaw,
    dlaw: &DisorderLaw,
    beta: f64,
    hs: &[f64],
    ns: &[usize],
    batch: &Batch,
) -> Result<Vec<FreeEnergyEstimate>> {
    let n_max = check_ns(ns)?;
    budget::check(
        budget::dp_units(n_max, batch.replicas) * hs.len() as u128,
        batch.budget,
    )?;
    hs.iter()
        .map(|&h| free_energy(law, dlaw, beta, h, ns, batch))
        .collect()
}

/// Homogeneous free energy: the root `F` of `Σ_n K(n) e^{−Fn} = e^{−h}` for
/// `h > 0`, zero otherwise. Mass beyond the table is placed at `n_max + 1`.
pub fn homogeneous_free_energy(law: &RenewalLaw, h: f64) -> Result<f64> {
    if h <= 0.0 {
        return Ok(0.0);
    }
    let n_max = law.n_max();
    let lump = law.tail[n_max];
    let g = |f: f64| -> f64 {
        let mut s = lump * (-f * (n_max + 1) as f64).exp();
        for n in (1..=n_max).rev() {
            s += law.k[n] * (-f * n as f64).exp();
        }
        s - (-h).exp()
    };
    let (mut lo, mut hi) = (0.0, h);
    if g(hi) > 0.0 {
        return Err(PinError::Bracket {
            lo,
            hi,
            f_lo: g(lo),
            f_hi: g(hi),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi.max(1e-300) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `F` recovered from the homogeneous DP at `N` and `2N`: the prefactor of
/// `Ψ^c_h(N) u(N) ~ c e^{FN}` cancels in the difference.
pub fn homogeneous_free_energy_dp(law: &RenewalLaw, h: f64, n: usize) -> Result<f64> {
    let a = log_psi_c(law, h, n)? + law.u[n].ln();
    let b = log_psi_c(law, h, 2 * n)? + law.u[2 * n].ln();
    Ok((b - a) / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactFraction {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Mean of `ℓ_N/N` under the free pinning measure, per sample by the exact
/// `h`-derivative of the DP.
pub fn contact_fraction(
    law: &RenewalLaw,
    dlaw: &DisorderLaw,
    beta: f64,
    h: f64,
    n: usize,
    batch: &Batch,
) -> Result<ContactFraction> {
    if batch.replicas < 2 {
        return Err(PinError::InvalidArgument(
            "at least two replicas needed".into(),
        ));
    }
    budget::check(budget::dp_units(n, batch.replicas) * 2, batch.budget)?;
    let p = PinParams::new(dlaw, beta, h)?;
    let vals: Vec<f64> = (0..batch.replicas)
        .into_par_iter()
        .map(|r| {
            let om = sample_disorder(
                dlaw,
                n,
                SeedRecord::for_replica(batch.seed, Purpose::Disorder, r as u64),
            );
            z_free_with_contacts(law, &om, &p, n).map(|(_, c)| c)
        })
        .collect::<Result<_>>()?;
    let s = summarize(&vals);
    Ok(ContactFraction {
        mean: s.mean,
        stderr: s.stderr,
        n,
    })
}

/// Finite-size threshold `F_N(h) − (κ·stderr + c₀/N)` and bisection controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solver {
    pub kappa: f64,
    pub c0: f64,
    pub bracket: (f64, f64),
    pub tol: f64,
}

impl Default for Solver {
    fn default() -> Self {
        Solver {
            kappa: 3.0,
            c0: 2.0,
            bracket: (-0.5, 0.5),
            tol: 1e-4,
        }
    }
}

impl Solver {
    pub fn rule_id(&self) -> String {
        format!("F_N-({}*se+{}/N)", self.kappa, self.c0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub h: f64,
    pub f_n: f64,
    pub stderr: f64,
    pub rule: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub beta: f64,
    pub h_c: f64,
    pub ci: (f64, f64),
    /// Every evaluated probe, in order.
    pub trace: Vec<Probe>,
    /// Final bracket.
    pub bracket: (f64, f64),
    pub n: usize,
    pub replicas: usize,
    pub rule: String,
}

impl CriticalPoint {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci.1 - self.ci.0)
    }
}

/// Number of rule evaluations a bisection needs.
pub fn probes_needed(solver: &Solver) -> usize {
    let w = solver.bracket.1 - solver.bracket.0;
    2 + (w / solver.tol).log2().ceil().max(0.0) as usize
}

/// Bisection of the threshold rule on `h`.
pub fn critical_point(
    law: &RenewalLaw,
    dlaw: &DisorderLaw,
    beta: f64,
    solver: &Solver,
    n: usize,
    batch: &Batch,
) -> Result<CriticalPoint> {
    if batch.replicas < 2 {
        return Err(PinError::InvalidArgument(
            "at least two replicas needed".into(),
        ));
    }
    if !(solver.tol > 0.0) || !(solver.bracket.0 < solver.bracket.1) {
        return Err(PinError::InvalidArgument(
            "bisection needs tol > 0 and lo < hi".into(),
        ));
    }
    budget::check(
        budget::dp_units(n, batch.replicas) * probes_needed(solver) as u128,
        batch.budget,
    )?;
    let probe = |h: f64| -> Result<Probe> {
        let rows = f_samples(law, dlaw, beta, h, &[n], batch)?;
        let col: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let s = summarize(&col);
        Ok(Probe {
            h,
            f_n: s.mean,
            stderr: s.stderr,
            rule: s.mean - (solver.kappa * s.stderr + solver.c0 / n as f64),
        })
    };
    let mut trace = Vec::new();
    let (mut lo, mut hi) = solver.bracket;
    let mut p_lo = probe(lo)?;
    let mut p_hi = probe(hi)?;
    trace.push(p_lo);
    trace.push(p_hi);
    if !(p_lo.rule <= 0.0 && p_hi.rule > 0.0) {
        return Err(PinError::Bracket {
            lo,
            hi,
            f_lo: p_lo.rule,
            f_hi: p_hi.rule,
        });
    }
    while hi - lo > solver.tol {
        let mid = 0.5 * (lo + hi);
        let p = probe(mid)?;
        trace.push(p);
        if p.rule <= 0.0 {
            lo = mid;
            p_lo = p;
        } else {
            hi = mid;
            p_hi = p;
        }
    }
    let h_c = 0.5 * (lo + hi);
    // statistical part: one stderr of F_N moves the root by se / slope
    let slope = (p_hi.f_n - p_lo.f_n) / (hi - lo);
    let se = 0.5 * (p_lo.stderr + p_hi.stderr);
    let stat = if slope > 0.0 {
        1.96 * se / slope
    } else {
        f64::INFINITY
    };
    let half = 0.5 * (hi - lo) + stat;
    Ok(CriticalPoint {
        beta,
        h_c,
        ci: (h_c - half, h_c + half),
        trace,
        bracket: (lo, hi),
        n,
        replicas: batch.replicas,
        rule: solver.rule_id(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub alpha: f64,
    pub betas: Vec<f64>,
    pub points: Vec<CriticalPoint>,
    /// Fitted slope of `log h_c` against `log β`, with its standard error.
    pub exponent: f64,
    pub exponent_se: f64,
    pub target_exponent: f64,
    /// `h_c / (L̃_α(1/β) β^{2α/(2α−1)})` with half-widths.
    pub ratios: Vec<(f64, f64)>,
    /// Mean of the last two ratios and its half-width.
    pub plateau: (f64, f64),
    /// Last two ratios agree within their joint half-width.
    pub plateau_consistent: bool,
    /// Total DP work reserved before the scan started.
    pub work_units: u128,
}

/// `h_c(β)` on a grid of small `β` with the exponent fit and the normalized
/// ratio.
pub fn universality_scan(
    law: &RenewalLaw,
    dlaw: &DisorderLaw,
    betas: &[f64],
    solver: &Solver,
    n: usize,
    batch: &Batch,
) -> Result<ScanResult> {
    match (law.alpha, law.l) {
        (Some(a), Some(l)) => UniversalScale::new(a, l)?,
        _ => {
            return Err(PinError::InvalidArgument(
                "scan needs a power-law renewal".into(),
            ))
        }
    };
    if betas.len() < 2 || betas.windows(2).any(|w| w[0] >= w[1]) || betas[0] <= 0.0 {
        return Err(PinError::InvalidArgument(
            "β grid must be positive, sorted, with two points".into(),
        ));
    }
    if betas.last().unwrap() / betas[0] < 10f64.sqrt() {
        return Err(PinError::InvalidArgument(
            "β grid spans less than half a decade".into(),
        ));
    }
    let work = budget::dp_units(n, batch.replicas) * (probes_needed(solver) * betas.len()) as u128;
    budget::check(work, batch.budget)?;
    let points: Vec<CriticalPoint> = betas
        .iter()
        .map(|&b| critical_point(law, dlaw, b, solver, n, batch))
        .collect::<Result<_>>()?;
    scan_summary(law, points, work)
}

/// Exponent fit, normalized ratios and plateau test for critical points
/// sorted by `β`.
pub fn scan_summary(
    law: &RenewalLaw,
    points: Vec<CriticalPoint>,
    work_units: u128,
) -> Result<ScanResult> {
    let (alpha, l) = match (law.alpha, law.l) {
        (Some(a), Some(l)) => (a, l),
        _ => {
            return Err(PinError::InvalidArgument(
                "scan needs a power-law renewal".into(),
            ))
        }
    };
    let us = UniversalScale::new(alpha, l)?;
    if points.len() < 2 {
        return Err(PinError::InvalidArgument(
            "scan needs at least two critical points".into(),
        ));
    }
    let target = 2.0 * alpha / (2.0 * alpha - 1.0);
    let (lx, ly): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| p.h_c > 0.0)
        .map(|p| (p.beta.ln(), p.h_c.ln()))
        .unzip();
    let fit = fit_line(&lx, &ly, None);
    let ratios: Vec<(f64, f64)> = points
        .iter()
        .map(|p| {
            let norm = us.tilde_l(1.0 / p.beta, 1e-12)? * p.beta.powf(target);
            Ok((p.h_c / norm, p.half_width() / norm))
        })
        .collect::<Result<_>>()?;
    let k = ratios.len();
    let (a, b) = (ratios[k - 2], ratios[k - 1]);
    let joint = (a.1 * a.1 + b.1 * b.1).sqrt();
    Ok(ScanResult {
        alpha,
        betas: points.iter().map(|p| p.beta).collect(),
        exponent: fit.map_or(f64::NAN, |f| f.slope),
        exponent_se: fit.map_or(f64::NAN, |f| f.slope_se),
        target_exponent: target,
        plateau: (0.5 * (a.0 + b.0), 0.5 * joint),
        plateau_consistent: (a.0 - b.0).abs() <= joint,
        ratios,
        points,
        work_units,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaGt1Report {
    pub alpha: f64,
    pub mean_return: f64,
    /// `α / (2 (1+α) E[τ₁])`.
    pub target: f64,
    pub points: Vec<CriticalPoint>,
    /// `h_c/β²` with half-widths.
    pub ratios: Vec<(f64, f64)>,
}

/// `h_c(β)/β²` against its small-`β` limit for a positive recurrent law.
pub fn alpha_gt1_check(
    law: &RenewalLaw,
    dlaw: &DisorderLaw,
    betas: &[f64],
    solver: &Solver,
    n: usize,
    batch: &Batch,
) -> Result<AlphaGt1Report> {
    let alpha = law.alpha.unwrap_or(f64::NAN);
    if !(alpha > 1.0) {
        return Err(PinError::Domain {
            what: "alpha",
            value: alpha,
            domain: "(1, ∞)".into(),
        });
    }
    if betas.is_empty() || betas.iter().any(|&b| !(b > 0.0)) {
        return Err(PinError::InvalidArgument(
            "β grid must be nonempty and exclude 0".into(),
        ));
    }
    budget::check(
        budget::dp_units(n, batch.replicas) * (probes_needed(solver) * betas.len()) as u128,
        batch.budget,
    )?;
    let mean_return = law.mean_return_time();
    let target = alpha / (1.0 + alpha) / (2.0 * mean_return);
    let points: Vec<CriticalPoint> = betas
        .iter()
        .map(|&b| critical_point(law, dlaw, b, solver, n, batch))
        .collect::<Result<_>>()?;
    let ratios = points
        .iter()
        .map(|p| {
            (
                p.h_c / (p.beta * p.beta),
                p.half_width() / (p.beta * p.beta),
            )
        })
        .collect();
    Ok(AlphaGt1Report {
        alpha,
        mean_return,
        target,
        points,
        ratios,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingReport {
    pub beta: f64,
    pub h_c: f64,
    /// `(h, F_N, stderr, bound)`.
    pub rows: Vec<(f64, f64, f64, f64)>,
    /// Points with `F_N` above the bound by more than three standard errors.
    pub violations: usize,
    /// Points with `F_N` below zero by more than three standard errors.
    pub negative: usize,
}

/// `0 ≤ F(β,h) ≤ (1+α)/(2β²)·(h − h_c)²` on a grid above `h_c`.
pub fn smoothing_check(
    law: &RenewalLaw,
    dlaw: &DisorderLaw,
    beta: f64,
    h_c: f64,
    hs: &[f64],
    n: usize,
    batch: &Batch,
) -> Result<SmoothingReport> {
    let alpha = law.alpha.ok_or_else(|| {
        PinError::InvalidArgument("smoothing bound needs a power-law renewal".into())
    })?;
    if !(beta > 0.0) {
        return Err(PinError::Domain {
            what: "beta",
            value: beta,
            domain: "(0, ∞)".into(),
        });
    }
    if hs.iter().any(|&h| h < h_c) {
        return Err(PinError::InvalidArgument(
            "smoothing grid must lie above h_c".into(),
        ));
    }
    let fs = free_energy_h_grid(law, dlaw, beta, hs, &[n], batch)?;
    let mut rows = Vec::with_capacity(hs.len());
    let (mut violations, mut negative) = (0, 0);
    for e in &fs {
        let (f, se) = e.last();
        let bound = (1.0 + alpha) / (2.0 * beta * beta) * (e.h - h_c).powi(2);
        if f > bound + 3.0 * se {
            violations += 1;
        }
        if f < -3.0 * se {
            negative += 1;
        }
        rows.push((e.h, f, se, bound));
    }
    Ok(SmoothingReport {
        beta,
        h_c,
        rows,
        violations,
        negative,
    })
}

/// Local exponent of `F` in `h − h_c`: slope of `log F_N` against
/// `log(h − h_c)` on the given offsets, with its standard error.
pub fn critical_exponent_fit(
    law: &RenewalLaw,
    dlaw: &DisorderLaw,
    beta: f64,
    h_c: f64,
    offsets: &[f64],
    n: usize,
    batch: &Batch,
) -> Result<(f64, f64)> {
    let hs: Vec<f64> = offsets.iter().map(|d| h_c + d).collect();
    let fs = free_energy_h_grid(law, dlaw, beta, &hs, &[n], batch)?;
    let (x, y): (Vec<f64>, Vec<f64>) = offsets
        .iter()
        .zip(&fs)
        .filter(|(_, e)| e.last().0 > 0.0)
        .map(|(d, e)| (d.ln(), e.last().0.ln()))
        .unzip();
    let f = fit_line(&x, &y, None)
        .ok_or_else(|| PinError::Diagnostic("too few positive F_N values for a fit".into()))?;
    Ok((f.slope, f.slope_se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renewal::build_renewal;
    use crate::slowvar::SlowlyVarying;

    fn law(alpha: f64, n: usize) -> RenewalLaw {
        build_renewal(alpha, SlowlyVarying::one(), n).unwrap()
    }

    #[test]
    fn zero_coupling_zero_field() {
        let l = law(0.75, 1024);
        let e = free_energy(
            &l,
            &DisorderLaw::gaussian(),
            0.0,
            0.0,
            &[256, 512, 1024],
            &Batch::new(8, 1),
        )
        .unwrap();
        assert!(e.f_n.iter().all(|&(f, s)| f.abs() < 1e-14 && s == 0.0));
        assert_eq!(e.f, 0.0);
    }

    #[test]
    fn homogeneous_matches_implicit_equation() {
        let l = law(0.75, 1 << 13);
        for h in [0.3, 0.8] {
            let oracle = homogeneous_free_energy(&l, h).unwrap();
            let dp = homogeneous_free_energy_dp(&l, h, 2048).unwrap();
            assert!(
                (dp - oracle).abs() < 1e-6 * oracle,
                "h={h}: {dp} vs {oracle}"
            );
            let e = free_energy(
                &l,
                &DisorderLaw::gaussian(),
                0.0,
                h,
                &[1024, 4096],
                &Batch::new(8, 0),
            )
            .unwrap();
            let d1 = (e.f_n[0].0 - oracle).abs();
            let d2 = (e.f_n[1].0 - oracle).abs();
            assert!(d2 < d1 && d2 < 2e-3, "{d1} {d2}");
        }
        assert_eq!(homogeneous_free_energy(&l, -0.2).unwrap(), 0.0);
    }

    #[test]
    fn delocalized_at_negative_h() {
        let l = law(0.75, 2048);
        let e = free_energy(
            &l,
            &DisorderLaw::gaussian(),
            0.5,
            -2.0,
            &[512, 2048],
            &Batch::new(32, 4),
        )
        .unwrap();
        assert_eq!(e.f, 0.0);
        let (f, se) = e.last();
        assert!(f <= 0.0 && f.abs() < 0.01, "{f} ± {se}");
    }

    #[test]
    fn contact_fraction_examples() {
        let det = RenewalLaw::deterministic(64).unwrap();
        let c = contact_fraction(
            &det,
            &DisorderLaw::gaussian(),
            0.0,
            0.3,
            50,
            &Batch::new(4, 0),
        )
        .unwrap();
        assert!((c.mean - 1.0).abs() < 1e-12);
        let l = law(0.75, 4096);
        let a = contact_fraction(
            &l,
            &DisorderLaw::gaussian(),
            0.0,
            0.0,
            256,
            &Batch::new(2, 0),
        )
        .unwrap();
        let b = contact_fraction(
            &l,
            &DisorderLaw::gaussian(),
            0.0,
            0.0,
            4096,
            &Batch::new(2, 0),
        )
        .unwrap();
        assert!(b.mean < a.mean);
        let exact: f64 = l.u[1..=256].iter().sum::<f64>() / 256.0;
        assert!((a.mean - exact).abs() < 1e-10);
    }

    #[test]
    fn critical_point_no_disorder() {
        let l = law(0.75, 4096);
        let s = Solver {
            tol: 1e-3,
            ..Solver::default()
        };
        let cp = critical_point(
            &l,
            &DisorderLaw::gaussian(),
            0.0,
            &s,
            2048,
            &Batch::new(4, 0),
        )
        .unwrap();
        assert!(cp.h_c.abs() < 0.02, "{cp:?}");
        assert!(cp.bracket.1 - cp.bracket.0 <= s.tol);
        let bad = Solver {
            bracket: (0.3, 0.5),
            ..s
        };
        assert!(matches!(
            critical_point(
                &l,
                &DisorderLaw::gaussian(),
                0.0,
                &bad,
                512,
                &Batch::new(4, 0)
            ),
            Err(PinError::Bracket { .. })
        ));
    }

    #[test]
    fn alpha_gt1_rejects_small_alpha() {
        let l = law(0.75, 256);
        let r = alpha_gt1_check(
            &l,
            &DisorderLaw::gaussian(),
            &[0.1],
            &Solver::default(),
            128,
            &Batch::new(4, 0),
        );
        assert!(matches!(r, Err(PinError::Domain { .. })));
        let l2 = law(2.0, 256);
        let r = alpha_gt1_check(
            &l2,
            &DisorderLaw::gaussian(),
            &[0.0],
            &Solver::default(),
            128,
            &Batch::new(4, 0),
        );
        assert!(r.is_err());
    }

    #[test]
    fn scan_rejects_narrow_grid() {
        let l = law(0.75, 256);
        let r = universality_scan(
            &l,
            &DisorderLaw::gaussian(),
            &[0.2, 0.3],
            &Solver::default(),
            128,
            &Batch::new(4, 0),
        );
        assert!(matches!(r, Err(PinError::InvalidArgument(_))));
    }
}
