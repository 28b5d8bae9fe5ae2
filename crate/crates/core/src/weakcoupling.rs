//! Ensembles of partition functions under weak-coupling scaling.
//!
//! Replica `r` always draws its disorder from `(seed, r)`, independent of the
//! parameter point, so different `ĥ`, `t` or `c` share the same charges.

use rayon::prelude::*;

use crate::budget;
use crate::disorder::{sample_disorder, DisorderLaw};
use crate::error::{PinError, Result};
use crate::partition::{PartitionTable, PinParams, WeakCouplingScale};
use crate::renewal::RenewalLaw;
use crate::rng::{Purpose, SeedRecord};
use crate::stats::{ks_two_sample, ks_two_sample_pvalue, quantile_sorted, sorted, summarize};

/// Quantile levels reported for `log Z`.
pub const QUANTILES: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

/// A weak-coupling parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub beta_hat: f64,
    pub h_hat: f64,
    pub t: f64,
    pub n: usize,
}

impl Point {
    /// Lattice horizon `N·t`.
    pub fn horizon(&self) -> Result<usize> {
        let nt = self.n as f64 * self.t;
        if !(self.t > 0.0) || (nt - nt.round()).abs() > 1e-9 {
            return Err(PinError::InvalidArgument(format!(
                "N·t = {nt} is not a positive integer"
            )));
        }
        Ok(nt.round() as usize)
    }
}

/// Replica count, base seed and work cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Batch {
    pub replicas: usize,
    pub seed: u64,
    pub budget: u128,
}

impl Batch {
    pub fn new(replicas: usize, seed: u64) -> Self {
        Batch {
            replicas,
            seed,
            budget: budget::DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogStats {
    pub mean: f64,
    pub stderr: f64,
    /// `(level, value)`, nondecreasing in both.
    pub quantiles: Vec<(f64, f64)>,
}

fn log_stats(xs: &[f64]) -> LogStats {
    let s = summarize(xs);
    let srt = sorted(xs);
    LogStats {
        mean: s.mean,
        stderr: s.stderr,
        quantiles: QUANTILES
            .iter()
            .map(|&q| (q, quantile_sorted(&srt, q)))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleEstimate {
    pub alpha: f64,
    pub point: Point,
    pub replicas: usize,
    pub seed: u64,
    pub beta_n: f64,
    pub h_n: f64,
    /// Per replica, in replica order.
    pub log_free: Vec<f64>,
    pub log_constrained: Vec<f64>,
    pub free: LogStats,
    pub constrained: LogStats,
    /// Mean and standard error of `Z^c` itself.
    pub zc_mean: f64,
    pub zc_stderr: f64,
}

fn check_batch(point: &Point, batch: &Batch) -> Result<usize> {
    if batch.replicas < 2 {
        return Err(PinError::InvalidArgument(
            "at least two replicas needed".into(),
        ));
    }
    let nt = point.horizon()?;
    budget::check(budget::dp_units(nt, batch.replicas), batch.budget)?;
    Ok(nt)
}

fn params_for(law: &RenewalLaw, dlaw: &DisorderLaw, point: &Point) -> Result<(f64, PinParams)> {
    let scale = WeakCouplingScale::for_law(law, point.n, point.beta_hat, point.h_hat)?;
    Ok((scale.alpha, scale.params(dlaw)?))
}

fn assemble(
    alpha: f64,
    point: Point,
    batch: &Batch,
    p: PinParams,
    pairs: Vec<(f64, f64)>,
) -> EnsembleEstimate {
    let (log_free, log_constrained): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let zc: Vec<f64> = log_constrained.iter().map(|l| l.exp()).collect();
    let zs = summarize(&zc);
    EnsembleEstimate {
        alpha,
        point,
        replicas: batch.replicas,
        seed: batch.seed,
        beta_n: p.beta,
        h_n: p.h,
        free: log_stats(&log_free),
        constrained: log_stats(&log_constrained),
        log_free,
        log_constrained,
        zc_mean: zs.mean,
        zc_stderr: zs.stderr,
    }
}

/// Free and constrained `log Z_{β_N,h_N}(Nt)` over independent replicas.
pub fn ensemble(
    law: &RenewalLaw,
    dlaw: &DisorderLaw,
    point: Point,
    batch: &Batch,
) -> Result<EnsembleEstimate> {
    let nt = check_batch(&point, batch)?;
    let (alpha, p) = params_for(law, dlaw, &point)?;
    let pairs: Vec<(f64, f64)> = (0..batch.replicas)
        .into_par_iter()
        .map(|r| {
            let om = sample_disorder(
                dlaw,
                nt,
                SeedRecord::for_replica(batch.seed, Purpose::Disorder, r as u64),
            );
            let tab = PartitionTable::build(law, &om, &p, nt)?;
            Ok((tab.log_free(law, nt), tab.log_constrained(law, nt)))
        })
        .collect::<Result<_>>()?;
    Ok(assemble(alpha, point, batch, p, pairs))
}

/// One ensemble per `ĥ`, every replica evaluated on a single disorder draw.
pub fn common_h_sweep(
    law: &RenewalLaw,
    dlaw: &DisorderLaw,
    point: Point,
    h_hats: &[f64],
    batch: &Batch,
) -> Result<Vec<EnsembleEstimate>> {
    if h_hats.is_empty() {
        return Err(PinError::Empty("h_hat list"));
    }
    let nt = point.horizon()?;
    if batch.replicas < 2 {
        return Err(PinError::InvalidArgument(
            "at least two replicas needed".into(),
        ));
    }
    budget::check(
        budget::dp_units(nt, batch.replicas) * h_hats.len() as u128,
        batch.budget,
    )?;
    let pts: Vec<Point> = h_hats
        .iter()
        .map(|&h_hat| Point { h_hat, ..point })
        .collect();
    let params: Vec<(f64, PinParams)> = pts
        .iter()
        .map(|q| params_for(law, dlaw, q))
        .collect::<Result<_>>()?;
    let per_rep: Vec<Vec<(f64, f64)>> = (0..batch.replicas)
        .into_par_iter()
        .map(|r| {
            let om = sample_disorder(
                dlaw,
                nt,
                SeedRecord::for_replica(batch.seed, Purpose::Disorder, r as u64),
            );
            params
                .iter()
                .map(|(_, p)| {
                    let tab = PartitionTable::build(law, &om, p, nt)?;
                    Ok((tab.log_free(law, nt), tab.log_constrained(law, nt)))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(pts
        .iter()
        .zip(&params)
        .enumerate()
        .map(|(i, (q, (alpha, p)))| {
            let pairs = per_rep.iter().map(|row| row[i]).collect();
            assemble(*alpha, *q, batch, *p, pairs)
        })
        .collect())
}

/// Pathwise shape of `ĥ ↦ log Z^c` across a common-disorder sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathwiseReport {
    /// Smallest increment of `log Z^c` between consecutive `ĥ` (should be ≥ 0).
    pub min_increment: f64,
    /// Smallest change of slope between consecutive intervals (should be ≥ 0).
    pub min_slope_change: f64,
}

/// Scans every replica of a sweep; the estimates must be sorted by `ĥ`.
pub fn pathwise_check(sweep: &[EnsembleEstimate]) -> Result<PathwiseReport> {
    if sweep
        .windows(2)
        .any(|w| !(w[0].point.h_hat < w[1].point.h_hat))
    {
        return Err(PinError::InvalidArgument(
            "sweep must be strictly increasing in ĥ".into(),
        ));
    }
    let mut min_inc = f64::INFINITY;
    let mut min_curv = f64::INFINITY;
    let reps = sweep.first().map_or(0, |e| e.replicas);
    for r in 0..reps {
        let ys: Vec<f64> = sweep.iter().map(|e| e.log_constrained[r]).collect();
        let hs: Vec<f64> = sweep.iter().map(|e| e.point.h_hat).collect();
        let slopes: Vec<f64> = (1..ys.len())
            .map(|i| {
                min_inc = min_inc.min(ys[i] - ys[i - 1]);
                (ys[i] - ys[i - 1]) / (hs[i] - hs[i - 1])
            })
            .collect();
        for w in slopes.windows(2) {
            min_curv = min_curv.min(w[1] - w[0]);
        }
    }
    Ok(PathwiseReport {
        min_increment: min_inc,
        min_slope_change: min_curv,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub c: f64,
    /// `(β̂, ĥ, c·t)` on `N`.
    pub stretched: EnsembleEstimate,
    /// `(c^{α−1/2} β̂, c^α ĥ, t)` on `N`.
    pub rescaled: EnsembleEstimate,
    /// Two-sample KS distance between the `log Z^c` samples.
    pub ks: f64,
    pub ks_pvalue: f64,
    /// Variances of `Z^c` in the two ensembles.
    pub var_stretched: f64,
    pub var_rescaled: f64,
}

/// Compares `Z^c` at `(β̂, ĥ, ct)` against `(c^{α−1/2}β̂, c^α ĥ, t)`, both
/// on the same `N` and with the same per-replica seeds.
pub fn scaling_check(
    law: &RenewalLaw,
    dlaw: &DisorderLaw,
    point: Point,
    c: f64,
    batch: &Batch,
) -> Result<ScalingReport> {
    if !(c > 0.0) {
        return Err(PinError::Domain {
            what: "c",
            value: c,
            domain: "(0, ∞)".into(),
        });
    }
    let alpha = law.alpha.ok_or_else(|| {
        PinError::InvalidArgument("scaling check needs a power-law renewal".into())
    })?;
    let a = Point {
        t: c * point.t,
        ..point
    };
    let b = Point {
        beta_hat: c.powf(alpha - 0.5) * point.beta_hat,
        h_hat: c.powf(alpha) * point.h_hat,
        ..point
    };
    let stretched = ensemble(law, dlaw, a, batch)?;
    let rescaled = if c == 1.0 {
        stretched.clone()
    } else {
        ensemble(law, dlaw, b, batch)?
    };
    let ks = ks_two_sample(&stretched.log_constrained, &rescaled.log_constrained);
    let var = |e: &EnsembleEstimate| e.zc_stderr * e.zc_stderr * e.replicas as f64;
    Ok(ScalingReport {
        c,
        ks,
        ks_pvalue: ks_two_sample_pvalue(ks, batch.replicas, batch.replicas),
        var_stretched: var(&stretched),
        var_rescaled: var(&rescaled),
        stretched,
        rescaled,
    })
}

/// `log Z^c` samples centred at their median, ready for a left-tail fit.
pub fn centred_log_constrained(e: &EnsembleEstimate) -> Vec<f64> {
    let med = quantile_sorted(&sorted(&e.log_constrained), 0.5);
    e.log_constrained.iter().map(|x| x - med).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::psi;
    use crate::renewal::build_renewal;
    use crate::slowvar::SlowlyVarying;

    fn law() -> RenewalLaw {
        build_renewal(0.75, SlowlyVarying::one(), 4096).unwrap()
    }

    #[test]
    fn no_disorder_is_deterministic() {
        let law = law();
        let pt = Point {
            beta_hat: 0.0,
            h_hat: 0.7,
            t: 1.0,
            n: 256,
        };
        let e = ensemble(&law, &DisorderLaw::gaussian(), pt, &Batch::new(8, 1)).unwrap();
        assert_eq!(e.free.stderr, 0.0);
        assert_eq!(e.constrained.stderr, 0.0);
        let want = psi(&law, e.h_n, 256).unwrap();
        assert!((e.free.mean.exp() - want).abs() < 1e-12 * want);
    }

    #[test]
    fn constrained_mean_is_one_at_zero_h() {
        let law = law();
        let pt = Point {
            beta_hat: 1.0,
            h_hat: 0.0,
            t: 1.0,
            n: 256,
        };
        let e = ensemble(&law, &DisorderLaw::gaussian(), pt, &Batch::new(2000, 7)).unwrap();
        assert!(
            (e.zc_mean - 1.0).abs() < 4.0 * e.zc_stderr,
            "{} ± {}",
            e.zc_mean,
            e.zc_stderr
        );
        for w in e.constrained.quantiles.windows(2) {
            assert!(w[0].1 <= w[1].1);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let law = law();
        let pt = Point {
            beta_hat: 1.0,
            h_hat: 0.3,
            t: 0.5,
            n: 128,
        };
        let a = ensemble(&law, &DisorderLaw::rademacher(), pt, &Batch::new(16, 3)).unwrap();
        let b = ensemble(&law, &DisorderLaw::rademacher(), pt, &Batch::new(16, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_is_monotone_and_log_convex() {
        let law = law();
        let pt = Point {
            beta_hat: 1.0,
            h_hat: 0.0,
            t: 1.0,
            n: 128,
        };
        let hs = [-1.0, -0.5, 0.0, 0.5, 1.0, 1.5];
        let sw =
            common_h_sweep(&law, &DisorderLaw::gaussian(), pt, &hs, &Batch::new(32, 5)).unwrap();
        let r = pathwise_check(&sw).unwrap();
        assert!(
            r.min_increment >= 0.0 && r.min_slope_change >= -1e-9,
            "{r:?}"
        );
        let single = common_h_sweep(
            &law,
            &DisorderLaw::gaussian(),
            pt,
            &[0.0],
            &Batch::new(32, 5),
        )
        .unwrap();
        assert_eq!(
            single[0],
            ensemble(&law, &DisorderLaw::gaussian(), pt, &Batch::new(32, 5)).unwrap()
        );
    }

    #[test]
    fn scaling_identity_at_c_one() {
        let law = law();
        let pt = Point {
            beta_hat: 1.0,
            h_hat: 0.5,
            t: 1.0,
            n: 64,
        };
        let r = scaling_check(&law, &DisorderLaw::gaussian(), pt, 1.0, &Batch::new(50, 2)).unwrap();
        assert_eq!(r.ks, 0.0);
    }

    #[test]
    fn homogeneous_scaling_converges() {
        let law = build_renewal(0.75, SlowlyVarying::one(), 1 << 14).unwrap();
        let mut gaps = vec![];
        for n in [256usize, 1024, 4096] {
            let pt = Point {
                beta_hat: 0.0,
                h_hat: 0.5,
                t: 1.0,
                n,
            };
            let r =
                scaling_check(&law, &DisorderLaw::gaussian(), pt, 2.0, &Batch::new(2, 0)).unwrap();
            gaps.push((r.stretched.constrained.mean - r.rescaled.constrained.mean).abs());
        }
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    }

    #[test]
    fn budget_is_enforced() {
        let law = law();
        let pt = Point {
            beta_hat: 1.0,
            h_hat: 0.0,
            t: 1.0,
            n: 1024,
        };
        let b = Batch {
            budget: 1000,
            ..Batch::new(4, 0)
        };
        assert!(matches!(
            ensemble(&law, &DisorderLaw::gaussian(), pt, &b),
            Err(PinError::Budget { .. })
        ));
        let bad = Point {
            t: 0.35,
            n: 10,
            ..pt
        };
        assert!(ensemble(&law, &DisorderLaw::gaussian(), bad, &Batch::new(4, 0)).is_err());
    }
}
