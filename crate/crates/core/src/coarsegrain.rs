//! Coarse-grained decompositions of point sets and the α-stable
//! regenerative set sampled block by block.
//!
//! Blocks are `B_k = [k−1, k)`. For a set `X`, `J_k` is the index of the
//! `k`-th visited block and `s_k`, `t_k` are the first and last points of `X`
//! in it.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{PinError, Result};
use crate::partition::{log_constrained_from_potentials, log_free_from_potentials};
use crate::quad;
use crate::renewal::{PointSet, RenewalLaw};
use crate::rng::{Purpose, SeedRecord};
use crate::stats::{fit_line, ks_distance, ks_two_sample, ks_two_sample_pvalue};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoarseGrain {
    pub j: Vec<usize>,
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    /// Number of visited blocks with `J_k ≤ horizon`.
    pub m_t: usize,
}

impl CoarseGrain {
    pub fn len(&self) -> usize {
        self.j.len()
    }

    pub fn is_empty(&self) -> bool {
        self.j.is_empty()
    }

    /// `{s_k} ∪ {t_k}` as a sorted point set.
    pub fn skeleton(&self) -> PointSet {
        let mut pts = Vec::with_capacity(2 * self.len());
        for (s, t) in self.s.iter().zip(&self.t) {
            pts.push(*s);
            if t != s {
                pts.push(*t);
            }
        }
        PointSet {
            points: pts,
            scale: None,
        }
    }
}

#[inline]
fn block_of(x: f64) -> usize {
    x.floor() as usize + 1
}

/// Coarse-grained decomposition of the points in `[0, horizon)`.
pub fn decompose(points: &PointSet, horizon: usize) -> CoarseGrain {
    let mut cg = CoarseGrain::default();
    for &x in &points.points {
        if !(x >= 0.0) || x >= horizon as f64 {
            continue;
        }
        let b = block_of(x);
        if cg.j.last() == Some(&b) {
            let last = cg.t.last_mut().expect("block has a point");
            if x > *last {
                *last = x;
            }
        } else {
            cg.j.push(b);
            cg.s.push(x);
            cg.t.push(x);
        }
    }
    cg.m_t = cg.j.len();
    cg
}

/// `H = Σ_{k ≤ m_t} log Z^c(s_k, t_k)` for a log-valued evaluator.
pub fn cg_hamiltonian<F: Fn(f64, f64) -> f64>(cg: &CoarseGrain, log_zc: F) -> f64 {
    let mut h = 0.0;
    for k in 0..cg.m_t {
        h += log_zc(cg.s[k], cg.t[k]);
    }
    h
}

/// Beta(a, b) draw for `a, b < 1` by Jöhnk's method, in log space.
pub fn beta_johnk<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    loop {
        let u: f64 = 1.0 - rng.random::<f64>();
        let v: f64 = 1.0 - rng.random::<f64>();
        let lx = u.ln() / a;
        let ly = v.ln() / b;
        let m = lx.max(ly);
        let ls = m + ((lx - m).exp() + (ly - m).exp()).ln();
        if ls <= 0.0 {
            return (lx - ls).exp();
        }
    }
}

/// Last point before `n` of the regenerative set started at `x < n`.
#[inline]
pub fn draw_g<R: Rng + ?Sized>(alpha: f64, x: f64, n: f64, rng: &mut R) -> f64 {
    x + (n - x) * beta_johnk(alpha, 1.0 - alpha, rng)
}

/// First point after `n` given the last point before `n` is `g`:
/// `P(d > v) = ((n−g)/(v−g))^α`.
#[inline]
pub fn draw_d<R: Rng + ?Sized>(alpha: f64, g: f64, n: f64, rng: &mut R) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    g + (n - g) * u.powf(-1.0 / alpha)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegenSample {
    pub alpha: f64,
    pub t_max: usize,
    pub cg: CoarseGrain,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(PinError::Domain {
            what: "alpha",
            value: alpha,
            domain: "(0, 1)".into(),
        });
    }
    Ok(())
}

/// Coarse-grained skeleton of the α-stable regenerative set started at 0,
/// up to `t_max`.
pub fn sample_regenerative_cg<R: Rng + ?Sized>(
    alpha: f64,
    t_max: usize,
    rng: &mut R,
) -> Result<RegenSample> {
    sample_regenerative_cg_from(alpha, 0.0, t_max, rng)
}

/// As [`sample_regenerative_cg`], started at `x ≥ 0`.
pub fn sample_regenerative_cg_from<R: Rng + ?Sized>(
    alpha: f64,
    x: f64,
    t_max: usize,
    rng: &mut R,
) -> Result<RegenSample> {
    check_alpha(alpha)?;
    if t_max < 1 {
        return Err(PinError::InvalidArgument("t_max must be at least 1".into()));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(PinError::Domain {
            what: "x",
            value: x,
            domain: "[0, ∞)".into(),
        });
    }
    let mut cg = CoarseGrain::default();
    let mut pos = x;
    while pos < t_max as f64 {
        let b = block_of(pos);
        let g = draw_g(alpha, pos, b as f64, rng);
        cg.j.push(b);
        cg.s.push(pos);
        cg.t.push(g);
        pos = draw_d(alpha, g, b as f64, rng);
    }
    cg.m_t = cg.j.len();
    Ok(RegenSample { alpha, t_max, cg })
}

/// CDF of Beta(α, 1−α), by quadrature of its density. Each half is mapped so
/// that the endpoint singularity disappears.
pub fn beta_cdf_quad(alpha: f64, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let c = (alpha * std::f64::consts::PI).sin() / std::f64::consts::PI;
    let a = alpha;
    let b = 1.0 - alpha;
    if u <= 0.5 {
        // s = v^{1/a}: s^{a−1} ds = dv / a
        let (v, _) = quad::integrate(
            |v: f64| {
                let s = v.powf(1.0 / a);
                (1.0 - s).powf(-alpha) / a
            },
            0.0,
            u.powf(a),
            1e-14,
            1e-13,
        );
        c * v
    } else {
        // 1 − s = w^{1/b}: (1−s)^{b−1} ds = −dw / b
        let (v, _) = quad::integrate(
            |w: f64| {
                let s = 1.0 - w.powf(1.0 / b);
                s.powf(alpha - 1.0) / b
            },
            0.0,
            (1.0 - u).powf(b),
            1e-14,
            1e-13,
        );
        1.0 - c * v
    }
}

/// KS distance of `g_1` (start 0) against the Beta(α, 1−α) CDF.
pub fn g1_ks_distance(alpha: f64, samples: usize, seed: u64) -> Result<f64> {
    check_alpha(alpha)?;
    let mut rng = SeedRecord::for_replica(seed, Purpose::Regenerative, 0).rng();
    let g: Vec<f64> = (0..samples)
        .map(|_| draw_g(alpha, 0.0, 1.0, &mut rng))
        .collect();
    Ok(ks_distance(&g, |u| beta_cdf_quad(alpha, u)))
}

/// Conditional tail probabilities for the second visited block.
#[derive(Debug, Clone, PartialEq)]
pub struct TailEstimates {
    pub alpha: f64,
    pub gammas: Vec<f64>,
    /// `sup_y P(t₂ ∈ [J₂−γ, J₂] | t₁ = y)`, per γ, with 95% half-widths.
    pub p_last: Vec<(f64, f64)>,
    /// `sup_y P(t₂ − s₂ ≤ γ | t₁ = y)`, per γ.
    pub p_span: Vec<(f64, f64)>,
    /// Log–log slopes (expected `1−α` and `α`).
    pub slope_last: f64,
    pub slope_span: f64,
}

/// Grid of conditioning values `y = t₁`.
pub const TAIL_Y_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 0.95];

/// Estimates the two events of the second-block lemma. Given `t₁ = y`, the
/// next point is Pareto from `y` and independent of the start `x`, so the
/// supremum over `(x, y)` reduces to one over `y`.
pub fn lemma_tail_estimates(
    alpha: f64,
    gammas: &[f64],
    samples: usize,
    seed: u64,
) -> Result<TailEstimates> {
    check_alpha(alpha)?;
    if gammas.iter().any(|&g| !(g > 0.0 && g <= 0.25)) {
        return Err(PinError::InvalidArgument(
            "gammas must lie in (0, 1/4]".into(),
        ));
    }
    if gammas.len() < 2 {
        return Err(PinError::InvalidArgument(
            "at least two gammas needed for a slope".into(),
        ));
    }
    let per_y: Vec<(Vec<usize>, Vec<usize>)> = TAIL_Y_GRID
        .par_iter()
        .enumerate()
        .map(|(yi, &y)| {
            let mut rng =
                SeedRecord::for_replica(seed, Purpose::Regenerative, 1000 + yi as u64).rng();
            let mut last = vec![0usize; gammas.len()];
            let mut span = vec![0usize; gammas.len()];
            for _ in 0..samples {
                let d = draw_d(alpha, y, 1.0, &mut rng);
                let j2 = block_of(d) as f64;
                let t2 = draw_g(alpha, d, j2, &mut rng);
                for (gi, &g) in gammas.iter().enumerate() {
                    if t2 >= j2 - g {
                        last[gi] += 1;
                    }
                    if t2 - d <= g {
                        span[gi] += 1;
                    }
                }
            }
            (last, span)
        })
        .collect();
    let n = samples as f64;
    let sup = |span: bool| -> Vec<(f64, f64)> {
        (0..gammas.len())
            .map(|gi| {
                let c = per_y
                    .iter()
                    .map(|r| if span { r.1[gi] } else { r.0[gi] })
                    .max()
                    .unwrap_or(0);
                let p = c as f64 / n;
                (p, 1.96 * (p * (1.0 - p) / n).sqrt())
            })
            .collect()
    };
    let p_last = sup(false);
    let p_span = sup(true);
    let slope = |ps: &[(f64, f64)]| -> f64 {
        let (x, y): (Vec<f64>, Vec<f64>) = gammas
            .iter()
            .zip(ps)
            .filter(|(_, p)| p.0 > 0.0)
            .map(|(g, p)| (g.ln(), p.0.ln()))
            .unzip();
        fit_line(&x, &y, None).map(|f| f.slope).unwrap_or(f64::NAN)
    };
    Ok(TailEstimates {
        alpha,
        gammas: gammas.to_vec(),
        slope_last: slope(&p_last),
        slope_span: slope(&p_span),
        p_last,
        p_span,
    })
}

/// Regenerative property: the law of `s₂` given `t₁ ≈ y` must not depend on
/// the start `x`. Two histories (`x = 0` and `x = x_alt`) are binned on
/// `|t₁ − y| < 0.01` and compared with a two-sample KS test; returns the
/// p-value.
pub fn regenerative_property_pvalue(
    alpha: f64,
    y: f64,
    x_alt: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    check_alpha(alpha)?;
    if !(x_alt > 0.0 && x_alt < y && y < 1.0) {
        return Err(PinError::InvalidArgument("need 0 < x_alt < y < 1".into()));
    }
    let collect = |x: f64, stream: u64| -> Vec<f64> {
        let mut rng = SeedRecord::for_replica(seed, Purpose::Regenerative, stream).rng();
        let mut out = Vec::new();
        for _ in 0..samples {
            let t1 = draw_g(alpha, x, 1.0, &mut rng);
            if (t1 - y).abs() < 0.01 {
                out.push(draw_d(alpha, t1, 1.0, &mut rng));
            }
        }
        out
    };
    let a = collect(0.0, 2000);
    let b = collect(x_alt, 2001);
    if a.len() < 50 || b.len() < 50 {
        return Err(PinError::Diagnostic(format!(
            "too few samples in the conditioning bin ({} and {})",
            a.len(),
            b.len()
        )));
    }
    Ok(ks_two_sample_pvalue(
        ks_two_sample(&a, &b),
        a.len(),
        b.len(),
    ))
}

/// Largest lattice size for [`verify_cg_identity`].
pub const CG_ENUM_MAX: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgIdentityReport {
    /// `Z(Nt)` by the free DP.
    pub z_free: f64,
    /// `Σ_sig P(sig) Π_k Z̃^c(Ns_k, Nt_k)` with endpoint weights (exact form).
    pub z_cg: f64,
    /// `|z_cg − z_free| / z_free`.
    pub rel_dev: f64,
    /// Same sum with bare `Z^c` and no endpoint weights.
    pub z_cg_bare: f64,
    pub signatures: usize,
}

/// Checks `Z(Nt) = E[e^{H(τ/N)}]` by enumerating every renewal configuration
/// on `{1..Nt}`, grouped by coarse-grained signature.
///
/// Each visited block contributes `Z^c(Ns_k, Nt_k)` times the Boltzmann
/// weights of its own endpoints (`Ns_k` unless it is 0, and `Nt_k` when it
/// differs from `Ns_k`), since `Z^c` weights only interior sites; a renewal at
/// `Nt` itself contributes its weight separately.
pub fn verify_cg_identity(
    law: &RenewalLaw,
    x: &[f64],
    n: usize,
    t: usize,
) -> Result<CgIdentityReport> {
    let nt = n * t;
    if nt > CG_ENUM_MAX {
        return Err(PinError::SizeCap {
            what: "coarse-grained enumeration N·t",
            size: nt,
            cap: CG_ENUM_MAX,
        });
    }
    if n == 0 || t == 0 {
        return Err(PinError::InvalidArgument("N and t must be positive".into()));
    }
    if x.len() < nt + 1 {
        return Err(PinError::InvalidArgument(format!(
            "potentials cover {} sites, {nt} needed",
            x.len() - 1
        )));
    }
    if law.n_max() < nt {
        return Err(PinError::SizeCap {
            what: "renewal table",
            size: nt,
            cap: law.n_max(),
        });
    }
    // probability of each signature
    let mut groups: HashMap<u32, f64> = HashMap::new();
    for mask in 0u32..(1u32 << nt) {
        // bit i ↔ site i+1
        let mut p = 1.0;
        let mut last = 0usize;
        let mut sig = 0u32;
        let mut block_first: Option<usize> = None;
        let mut cur_block = 1usize;
        let mut block_last = 0usize;
        // site 0 sits in block 1
        block_first.get_or_insert(0);
        let mut m = mask;
        while m != 0 {
            let bit = m.trailing_zeros() as usize;
            m &= m - 1;
            let site = bit + 1;
            p *= law.k[site - last];
            last = site;
            if site == nt {
                sig |= 1 << 31;
                continue;
            }
            let b = site / n + 1;
            if b != cur_block {
                // close the previous block
                if let Some(f) = block_first {
                    sig |= 1 << f;
                    sig |= 1 << block_last;
                }
                cur_block = b;
                block_first = Some(site);
            }
            block_last = site;
        }
        if let Some(f) = block_first {
            sig |= 1 << f;
            sig |= 1 << block_last;
        }
        p *= law.tail[nt - last];
        *groups.entry(sig).or_insert(0.0) += p;
    }
    // constrained values for all pairs a ≤ b < nt
    let mut lzc = vec![vec![0.0; nt]; nt];
    for (a, row) in lzc.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate().skip(a) {
            *v = log_constrained_from_potentials(law, x, a, b)?;
        }
    }
    let mut keys: Vec<u32> = groups.keys().copied().collect();
    keys.sort_unstable();
    let mut z_cg = 0.0;
    let mut z_bare = 0.0;
    for key in keys {
        let p = groups[&key];
        let mut lw = 0.0;
        let mut lb = 0.0;
        let pts: Vec<usize> = (0..nt).filter(|i| key >> i & 1 == 1).collect();
        let mut i = 0;
        while i < pts.len() {
            let a = pts[i];
            let blk = a / n;
            let b = if i + 1 < pts.len() && pts[i + 1] / n == blk {
                i += 1;
                pts[i]
            } else {
                a
            };
            i += 1;
            lb += lzc[a][b];
            lw += lzc[a][b];
            if a > 0 {
                lw += x[a];
            }
            if b != a {
                lw += x[b];
            }
        }
        if key >> 31 & 1 == 1 {
            lw += x[nt];
        }
        z_cg += p * lw.exp();
        z_bare += p * lb.exp();
    }
    let z_free = log_free_from_potentials(law, &x[..=nt])?.exp();
    Ok(CgIdentityReport {
        z_free,
        z_cg,
        rel_dev: (z_cg - z_free).abs() / z_free,
        z_cg_bare: z_bare,
        signatures: groups.len(),
    })
}
