//! Exact free and constrained partition functions by dynamic programming.
//!
//! With site potentials `x_n = βω_n − Λ(β) + h` the pinned value started at
//! `a` solves
//!
//! ```text
//! ζ(a) = 1,    ζ(n) = e^{x_n} Σ_{k=a}^{n−1} ζ(k) K(n−k)
//! ```
//!
//! and the constrained partition function is
//! `Z^c(a,b) = Σ_k ζ(k) K(b−k) / u(b−a)` (site `b` carries no weight).
//! Values are kept in linear scale with a single shared log offset; the whole
//! vector is rescaled whenever an entry passes `1e200`.

use rayon::prelude::*;

use crate::disorder::{sample_disorder, DisorderLaw, DisorderSample};
use crate::error::{PinError, Result};
use crate::renewal::{intersection_law, RenewalLaw};
use crate::rng::{Purpose, SeedRecord};
use crate::slowvar::SlowlyVarying;
use crate::stats::summarize;

const BIG: f64 = 1e200;
const SHRINK: f64 = 1e-200;
const FLUSH: f64 = 1e-290;

/// `(β, h)` together with `Λ(β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinParams {
    pub beta: f64,
    pub h: f64,
    pub lambda: f64,
}

impl PinParams {
    pub fn new(law: &DisorderLaw, beta: f64, h: f64) -> Result<Self> {
        Ok(PinParams {
            beta,
            h,
            lambda: law.lambda(beta)?,
        })
    }

    /// Homogeneous model: every site carries `δ`.
    pub fn homogeneous(delta: f64) -> Self {
        PinParams {
            beta: 0.0,
            h: delta,
            lambda: 0.0,
        }
    }

    #[inline]
    pub fn potential(&self, omega: f64) -> f64 {
        self.beta * omega - self.lambda + self.h
    }
}

/// `x[n]` for `n ∈ 0..=n` (`x[0] = 0`, unused by the recursions).
pub fn potentials(omega: &DisorderSample, p: &PinParams, n: usize) -> Result<Vec<f64>> {
    if omega.len() < n {
        return Err(PinError::InvalidArgument(format!(
            "disorder covers {} sites, {n} needed",
            omega.len()
        )));
    }
    let mut x = Vec::with_capacity(n + 1);
    x.push(0.0);
    x.extend(omega.omega[..n].iter().map(|&w| p.potential(w)));
    Ok(x)
}

fn homogeneous_potentials(delta: f64, n: usize) -> Vec<f64> {
    let mut x = vec![delta; n + 1];
    x[0] = 0.0;
    x
}

fn check_span(law: &RenewalLaw, span: usize) -> Result<()> {
    if span > law.n_max() {
        return Err(PinError::SizeCap {
            what: "partition horizon (renewal table length)",
            size: span,
            cap: law.n_max(),
        });
    }
    Ok(())
}

/// `krev[m] = K(len − m)` so that `Σ_j v[j] K(i−j)` is a forward dot product.
fn reversed_kernel(law: &RenewalLaw, len: usize) -> Vec<f64> {
    (0..len).map(|m| law.k[len - m]).collect()
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

/// Pinned DP from a starting site, offsets `0..=len`.
struct Pinned {
    /// `ζ` (weighted at the arrival site).
    v: Vec<f64>,
    /// `Σ_{j<i} ζ(j) K(i−j)` (unweighted arrival mass).
    s: Vec<f64>,
    /// `∂ζ/∂h` if requested.
    d: Option<Vec<f64>>,
    /// True values are the stored ones times `e^{log_offset}`.
    log_offset: f64,
}

/// `x[i]` is the potential at offset `i` (`x[0]` ignored).
fn pinned(law: &RenewalLaw, x: &[f64], deriv: bool) -> Pinned {
    let len = x.len() - 1;
    let krev = reversed_kernel(law, len);
    let mut v = vec![0.0; len + 1];
    let mut s = vec![0.0; len + 1];
    let mut d = if deriv {
        Some(vec![0.0; len + 1])
    } else {
        None
    };
    v[0] = 1.0;
    let mut log_offset = 0.0;
    for i in 1..=len {
        let kk = &krev[len - i..];
        let si = dot(&v[..i], kk);
        let e = x[i].exp();
        s[i] = si;
        v[i] = e * si;
        if let Some(d) = d.as_mut() {
            d[i] = v[i] + e * dot(&d[..i], kk);
        }
        let top = match d.as_ref() {
            Some(d) => d[i].max(v[i]),
            None => v[i],
        };
        if top > BIG {
            log_offset -= SHRINK.ln();
            let shrink = |w: &mut [f64]| {
                for y in w.iter_mut() {
                    *y *= SHRINK;
                    if *y < FLUSH {
                        *y = 0.0;
                    }
                }
            };
            shrink(&mut v[..=i]);
            shrink(&mut s[..=i]);
            if let Some(d) = d.as_mut() {
                shrink(&mut d[..=i]);
            }
        }
    }
    Pinned {
        v,
        s,
        d,
        log_offset,
    }
}

/// `log Z^c(a, b)` from potentials `x` indexed by absolute site.
pub fn log_constrained_from_potentials(
    law: &RenewalLaw,
    x: &[f64],
    a: usize,
    b: usize,
) -> Result<f64> {
    if a > b {
        return Err(PinError::InvalidArgument(format!(
            "constrained partition needs a ≤ b (a = {a}, b = {b})"
        )));
    }
    if b >= x.len() {
        return Err(PinError::InvalidArgument(format!(
            "potentials cover sites ≤ {}, b = {b}",
            x.len() - 1
        )));
    }
    if b == a {
        return Ok(0.0);
    }
    check_span(law, b - a)?;
    let dp = pinned(law, &x[a..=b], false);
    Ok(dp.s[b - a].ln() + dp.log_offset - law.u[b - a].ln())
}

/// `log Z(n)` for the free model from potentials `x` on `0..=n`.
pub fn log_free_from_potentials(law: &RenewalLaw, x: &[f64]) -> Result<f64> {
    let n = x.len() - 1;
    check_span(law, n)?;
    let dp = pinned(law, x, false);
    Ok(free_from(&dp, law, n).ln() + dp.log_offset)
}

fn free_from(dp: &Pinned, law: &RenewalLaw, n: usize) -> f64 {
    let mut acc = 0.0;
    for k in 0..=n {
        acc += dp.v[k] * law.tail[n - k];
    }
    acc
}

/// `log Z^{ω,c}_{β,h}(a, b)`.
pub fn z_constrained(
    law: &RenewalLaw,
    omega: &DisorderSample,
    p: &PinParams,
    a: usize,
    b: usize,
) -> Result<f64> {
    if a > b {
        return Err(PinError::InvalidArgument(format!(
            "constrained partition needs a ≤ b (a = {a}, b = {b})"
        )));
    }
    let x = potentials(omega, p, b)?;
    log_constrained_from_potentials(law, &x, a, b)
}

/// `log Z^ω_{β,h}(n)`.
pub fn z_free(law: &RenewalLaw, omega: &DisorderSample, p: &PinParams, n: usize) -> Result<f64> {
    let x = potentials(omega, p, n)?;
    log_free_from_potentials(law, &x)
}

/// `log Z(n)` and the contact density `∂_h log Z(n) / n`.
pub fn z_free_with_contacts(
    law: &RenewalLaw,
    omega: &DisorderSample,
    p: &PinParams,
    n: usize,
) -> Result<(f64, f64)> {
    let x = potentials(omega, p, n)?;
    check_span(law, n)?;
    if n == 0 {
        return Ok((0.0, 0.0));
    }
    let dp = pinned(law, &x, true);
    let d = dp.d.as_ref().expect("derivative requested");
    let mut zs = 0.0;
    let mut ds = 0.0;
    for k in 0..=n {
        zs += dp.v[k] * law.tail[n - k];
        ds += d[k] * law.tail[n - k];
    }
    Ok((zs.ln() + dp.log_offset, ds / zs / n as f64))
}

/// Homogeneous free partition function `Ψ_δ(n)`.
pub fn psi(law: &RenewalLaw, delta: f64, n: usize) -> Result<f64> {
    Ok(log_free_from_potentials(law, &homogeneous_potentials(delta, n))?.exp())
}

/// Homogeneous constrained partition function `Ψ^c_δ(n)`.
pub fn psi_c(law: &RenewalLaw, delta: f64, n: usize) -> Result<f64> {
    Ok(log_psi_c(law, delta, n)?.exp())
}

/// `log Ψ^c_δ(n)`.
pub fn log_psi_c(law: &RenewalLaw, delta: f64, n: usize) -> Result<f64> {
    log_constrained_from_potentials(law, &homogeneous_potentials(delta, n), 0, n)
}

/// `(Ψ_δ(m), Ψ^c_δ(m))` for every requested `m` from one DP.
pub fn psi_pair_at(law: &RenewalLaw, delta: f64, ms: &[usize]) -> Result<Vec<(f64, f64)>> {
    let n = ms.iter().copied().max().unwrap_or(0);
    check_span(law, n)?;
    let dp = pinned(law, &homogeneous_potentials(delta, n), false);
    let scale = dp.log_offset.exp();
    Ok(ms
        .iter()
        .map(|&m| {
            if m == 0 {
                return (1.0, 1.0);
            }
            let free = free_from(&dp, law, m) * scale;
            let c = dp.s[m] / law.u[m] * scale;
            (free, c)
        })
        .collect())
}

/// Pinned values `log z(n)`, `n ∈ 0..=N`, for one disorder sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionTable {
    pub n: usize,
    pub params: PinParams,
    /// `log z(n)`, pinned at `n`, site `n` weighted.
    pub log_z: Vec<f64>,
    /// `log Σ_{k<n} z(k) K(n−k)`, site `n` unweighted.
    pub log_arrival: Vec<f64>,
}

impl PartitionTable {
    pub fn build(
        law: &RenewalLaw,
        omega: &DisorderSample,
        p: &PinParams,
        n: usize,
    ) -> Result<Self> {
        let x = potentials(omega, p, n)?;
        check_span(law, n)?;
        let dp = pinned(law, &x, false);
        let log_z = dp.v.iter().map(|v| v.ln() + dp.log_offset).collect();
        let mut log_arrival: Vec<f64> = dp.s.iter().map(|v| v.ln() + dp.log_offset).collect();
        log_arrival[0] = 0.0;
        Ok(PartitionTable {
            n,
            params: *p,
            log_z,
            log_arrival,
        })
    }

    /// `log Z^c(0, m)`.
    pub fn log_constrained(&self, law: &RenewalLaw, m: usize) -> f64 {
        if m == 0 {
            0.0
        } else {
            self.log_arrival[m] - law.u[m].ln()
        }
    }

    /// `log Z(m)`.
    pub fn log_free(&self, law: &RenewalLaw, m: usize) -> f64 {
        let top = self.log_z[..=m]
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut acc = 0.0;
        for k in 0..=m {
            acc += (self.log_z[k] - top).exp() * law.tail[m - k];
        }
        top + acc.ln()
    }
}

/// Span cap for [`brute_force_constrained`].
pub const BRUTE_FORCE_MAX_SPAN: usize = 22;

/// `Z^c(a,b)` by enumerating every renewal configuration in `(a, b)`.
pub fn brute_force_constrained(
    law: &RenewalLaw,
    omega: &DisorderSample,
    p: &PinParams,
    a: usize,
    b: usize,
) -> Result<f64> {
    if a > b {
        return Err(PinError::InvalidArgument(format!("a = {a} > b = {b}")));
    }
    let span = b - a;
    if span > BRUTE_FORCE_MAX_SPAN {
        return Err(PinError::SizeCap {
            what: "brute-force span",
            size: span,
            cap: BRUTE_FORCE_MAX_SPAN,
        });
    }
    if span == 0 {
        return Ok(1.0);
    }
    check_span(law, span)?;
    let x = potentials(omega, p, b)?;
    let inner = span - 1;
    let mut total = 0.0;
    for mask in 0u32..(1u32 << inner) {
        let mut last = a;
        let mut w = 1.0;
        let mut e = 0.0;
        for bit in 0..inner {
            if mask >> bit & 1 == 1 {
                let site = a + 1 + bit;
                w *= law.k[site - last];
                e += x[site];
                last = site;
            }
        }
        w *= law.k[b - last];
        total += w * e.exp();
    }
    Ok(total / law.u[span])
}

/// `β_N = β̂ L(N)/N^{α−1/2}` and `h_N = ĥ L(N)/N^α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakCouplingScale {
    pub alpha: f64,
    pub l: SlowlyVarying,
    pub n: usize,
    pub beta_hat: f64,
    pub h_hat: f64,
}

impl WeakCouplingScale {
    /// Uses the law's exponent and normalized slowly varying factor.
    pub fn for_law(law: &RenewalLaw, n: usize, beta_hat: f64, h_hat: f64) -> Result<Self> {
        match (law.alpha, law.l) {
            (Some(alpha), Some(l)) => Ok(WeakCouplingScale {
                alpha,
                l,
                n,
                beta_hat,
                h_hat,
            }),
            _ => Err(PinError::InvalidArgument(
                "weak-coupling scaling needs a power-law renewal".into(),
            )),
        }
    }

    pub fn beta_n(&self) -> f64 {
        let n = self.n as f64;
        self.beta_hat * self.l.eval(n) / n.powf(self.alpha - 0.5)
    }

    pub fn h_n(&self) -> f64 {
        let n = self.n as f64;
        self.h_hat * self.l.eval(n) / n.powf(self.alpha)
    }

    pub fn params(&self, dlaw: &DisorderLaw) -> Result<PinParams> {
        PinParams::new(dlaw, self.beta_n(), self.h_n())
    }
}

/// Monte Carlo mean against an exact value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub mc_mean: f64,
    pub stderr: f64,
    pub exact: f64,
    pub z_score: f64,
    pub replicas: usize,
}

fn report(samples: &[f64], exact: f64) -> MomentReport {
    let s = summarize(samples);
    let z = if s.stderr > 0.0 {
        (s.mean - exact) / s.stderr
    } else if (s.mean - exact).abs() <= 1e-12 * exact.abs().max(1.0) {
        0.0
    } else {
        f64::INFINITY
    };
    MomentReport {
        mc_mean: s.mean,
        stderr: s.stderr,
        exact,
        z_score: z,
        replicas: s.n,
    }
}

fn horizon(scale: &WeakCouplingScale, t: f64) -> Result<usize> {
    let nt = scale.n as f64 * t;
    if !(nt >= 0.0) || (nt - nt.round()).abs() > 1e-9 {
        return Err(PinError::InvalidArgument(format!(
            "N·t = {nt} is not an integer"
        )));
    }
    Ok(nt.round() as usize)
}

/// `E[Z^{ω,c}_{β_N,h_N}(0,Nt)]` by Monte Carlo against `Ψ^c_{h_N}(Nt)`.
pub fn mean_partition_identity_check(
    law: &RenewalLaw,
    dlaw: &DisorderLaw,
    scale: &WeakCouplingScale,
    t: f64,
    replicas: usize,
    seed: u64,
) -> Result<MomentReport> {
    let nt = horizon(scale, t)?;
    let p = scale.params(dlaw)?;
    let vals: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let om = sample_disorder(
                dlaw,
                nt,
                SeedRecord::for_replica(seed, Purpose::Disorder, r as u64),
            );
            z_constrained(law, &om, &p, 0, nt).map(f64::exp)
        })
        .collect::<Result<_>>()?;
    Ok(report(&vals, psi_c(law, p.h, nt)?))
}

/// `E[(Z^{ω,c}_{β_N,0}(0,Nt))²]` by Monte Carlo against `Ψ^c` of the
/// intersection renewal at `δ = Λ(2β_N) − 2Λ(β_N)`.
pub fn second_moment_check(
    law: &RenewalLaw,
    dlaw: &DisorderLaw,
    scale: &WeakCouplingScale,
    t: f64,
    replicas: usize,
    seed: u64,
) -> Result<MomentReport> {
    if scale.h_hat != 0.0 {
        return Err(PinError::InvalidArgument(
            "second moment identity needs ĥ = 0".into(),
        ));
    }
    let nt = horizon(scale, t)?;
    let p = scale.params(dlaw)?;
    let exact = second_moment_exact(law, dlaw, p.beta, nt)?;
    let vals: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let om = sample_disorder(
                dlaw,
                nt,
                SeedRecord::for_replica(seed, Purpose::Disorder, r as u64),
            );
            z_constrained(law, &om, &p, 0, nt).map(|l| (2.0 * l).exp())
        })
        .collect::<Result<_>>()?;
    Ok(report(&vals, exact))
}

/// Right-hand side of the second moment identity.
pub fn second_moment_exact(
    law: &RenewalLaw,
    dlaw: &DisorderLaw,
    beta: f64,
    n: usize,
) -> Result<f64> {
    check_span(law, n)?;
    let sigma = intersection_law(&law.truncated(n.max(2)))?;
    let delta = dlaw.lambda(2.0 * beta)? - 2.0 * dlaw.lambda(beta)?;
    psi_c(&sigma, delta, n)
}

/// Exact disorder averages of `Z^c(0,n)` and `Z^c(0,n)²` under ±1 charges,
/// by enumerating all `2^{n−1}` interior patterns.
pub fn rademacher_exact_moments(
    law: &RenewalLaw,
    beta: f64,
    h: f64,
    n: usize,
) -> Result<(f64, f64)> {
    if n > 25 {
        return Err(PinError::SizeCap {
            what: "rademacher enumeration horizon",
            size: n,
            cap: 25,
        });
    }
    let dlaw = DisorderLaw::rademacher();
    let p = PinParams::new(&dlaw, beta, h)?;
    if n <= 1 {
        return Ok((1.0, 1.0));
    }
    let inner = n - 1;
    let count = 1u64 << inner;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    let mut x = vec![0.0; n + 1];
    for mask in 0..count {
        for i in 0..inner {
            let w = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
            x[i + 1] = p.potential(w);
        }
        let z = log_constrained_from_potentials(law, &x, 0, n)?.exp();
        m1 += z;
        m2 += z * z;
    }
    Ok((m1 / count as f64, m2 / count as f64))
}

/// `sup_{0 ≤ s ≤ t ≤ 1} E[Z^c(Ns, Nt)^p]` estimated over `replicas`
/// samples, with `s` on a grid of `s_points` values and `t` on every site.
#[allow(clippy::too_many_arguments)]
pub fn moment_sup(
    law: &RenewalLaw,
    dlaw: &DisorderLaw,
    scale: &WeakCouplingScale,
    p_exp: f64,
    s_points: usize,
    replicas: usize,
    seed: u64,
) -> Result<f64> {
    let n = scale.n;
    check_span(law, n)?;
    let pp = scale.params(dlaw)?;
    let starts: Vec<usize> = (0..s_points.max(1))
        .map(|i| i * n / s_points.max(1))
        .collect();
    let per_rep: Vec<Vec<Vec<f64>>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let om = sample_disorder(
                dlaw,
                n,
                SeedRecord::for_replica(seed, Purpose::Disorder, r as u64),
            );
            let x = potentials(&om, &pp, n)?;
            let mut rows = Vec::with_capacity(starts.len());
            for &a in &starts {
                let dp = pinned(law, &x[a..=n], false);
                let row: Vec<f64> = (0..=n - a)
                    .map(|m| {
                        let lz = if m == 0 {
                            0.0
                        } else {
                            dp.s[m].ln() + dp.log_offset - law.u[m].ln()
                        };
                        (p_exp * lz).exp()
                    })
                    .collect();
                rows.push(row);
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let mut sup: f64 = 0.0;
    for (si, &a) in starts.iter().enumerate() {
        for m in 0..=n - a {
            let col: Vec<f64> = per_rep.iter().map(|r| r[si][m]).collect();
            sup = sup.max(crate::stats::pairwise_sum(&col) / replicas as f64);
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renewal::build_renewal;
    use crate::rng::SeedRecord;

    fn two_point() -> RenewalLaw {
        RenewalLaw::two_point(64).unwrap()
    }

    fn fixed_omega(n: usize, seed: u64) -> DisorderSample {
        sample_disorder(&DisorderLaw::gaussian(), n, SeedRecord::new(seed, 0))
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn constrained_trivial_cases() {
        let law = two_point();
        let om = fixed_omega(10, 1);
        let p = PinParams::new(&DisorderLaw::gaussian(), 0.7, 0.3).unwrap();
        assert_eq!(z_constrained(&law, &om, &p, 3, 3).unwrap(), 0.0);
        assert!(z_constrained(&law, &om, &p, 3, 4).unwrap().abs() < 1e-15);
        let zero = PinParams::homogeneous(0.0);
        for (a, b) in [(0, 5), (2, 9), (1, 10)] {
            assert!(z_constrained(&law, &om, &zero, a, b).unwrap().abs() < 1e-14);
        }
        assert!(z_constrained(&law, &om, &p, 4, 3).is_err());
    }

    #[test]
    fn constrained_two_point_by_hand() {
        let law = two_point();
        let om = fixed_omega(4, 2);
        let p = PinParams::new(&DisorderLaw::gaussian(), 0.5, 0.1).unwrap();
        let x = p.potential(om.at(1));
        let expect = (0.5 + 0.25 * x.exp()) / 0.75;
        assert!(
            rel(
                brute_force_constrained(&law, &om, &p, 0, 2).unwrap(),
                expect
            ) < 1e-15
        );
        assert!(rel(z_constrained(&law, &om, &p, 0, 2).unwrap().exp(), expect) < 1e-14);
        let bf = brute_force_constrained(&law, &om, &p, 0, 4).unwrap();
        assert!(rel(z_constrained(&law, &om, &p, 0, 4).unwrap().exp(), bf) < 1e-12);
    }

    #[test]
    fn dp_matches_brute_force_random() {
        let law = build_renewal(0.75, SlowlyVarying::one(), 64).unwrap();
        let dlaw = DisorderLaw::gaussian();
        let mut rng = SeedRecord::new(77, 1).rng();
        use rand::Rng;
        for i in 0..100 {
            let a = rng.random_range(0..5usize);
            let span = rng.random_range(0..=12usize);
            let beta = rng.random_range(0.0..1.5);
            let h = rng.random_range(-1.0..1.0);
            let om = fixed_omega(a + span + 1, 1000 + i);
            let p = PinParams::new(&dlaw, beta, h).unwrap();
            let bf = brute_force_constrained(&law, &om, &p, a, a + span).unwrap();
            let dp = z_constrained(&law, &om, &p, a, a + span).unwrap().exp();
            assert!(rel(dp, bf) < 1e-12, "case {i}: {dp} vs {bf}");
        }
    }

    #[test]
    fn brute_force_caps_span() {
        let law = build_renewal(0.75, SlowlyVarying::one(), 64).unwrap();
        let om = fixed_omega(40, 3);
        assert!(matches!(
            brute_force_constrained(&law, &om, &PinParams::homogeneous(0.0), 0, 23),
            Err(PinError::SizeCap { .. })
        ));
    }

    #[test]
    fn free_examples() {
        let law = build_renewal(0.6, SlowlyVarying::one(), 100).unwrap();
        let om = fixed_omega(50, 4);
        let p = PinParams::new(&DisorderLaw::gaussian(), 0.8, -0.2).unwrap();
        assert_eq!(z_free(&law, &om, &p, 0).unwrap(), 0.0);
        let x1 = p.potential(om.at(1));
        let expect = law.tail[1] + law.k[1] * x1.exp();
        assert!(rel(z_free(&law, &om, &p, 1).unwrap().exp(), expect) < 1e-14);
        let zero = PinParams::homogeneous(0.0);
        for n in [1, 7, 50] {
            assert!(z_free(&law, &om, &zero, n).unwrap().abs() < 1e-13);
        }
    }

    #[test]
    fn psi_deterministic_closed_form() {
        let law = RenewalLaw::deterministic(64).unwrap();
        for n in 1..40 {
            let v = psi_c(&law, 0.3, n).unwrap();
            assert!(rel(v, (0.3 * (n as f64 - 1.0)).exp()) < 1e-13);
            let f = psi(&law, 0.3, n).unwrap();
            assert!(rel(f, (0.3 * n as f64).exp()) < 1e-13);
        }
        assert_eq!(psi(&law, 0.0, 10).unwrap(), 1.0);
    }

    #[test]
    fn psi_two_point_enumeration() {
        let law = two_point();
        let delta: f64 = 0.2;
        let n = 6;
        // enumerate subsets of 1..=5 with gaps in {1,2}, pinned at 6
        let mut total = 0.0;
        for mask in 0u32..32 {
            let mut last = 0;
            let mut w = 1.0;
            let mut cnt = 0;
            for bit in 0..5 {
                if mask >> bit & 1 == 1 {
                    w *= law.k[bit + 1 - last];
                    last = bit + 1;
                    cnt += 1;
                }
            }
            w *= law.k[n - last];
            total += w * (delta * cnt as f64).exp();
        }
        let expect = total / law.u[n];
        assert!(rel(psi_c(&law, delta, n).unwrap(), expect) < 1e-12);
        let pair = psi_pair_at(&law, delta, &[n]).unwrap()[0];
        assert!(rel(pair.1, expect) < 1e-12);
        assert!(rel(pair.0, psi(&law, delta, n).unwrap()) < 1e-12);
    }

    #[test]
    fn rescaling_survives_large_h() {
        let law = RenewalLaw::deterministic(5000).unwrap();
        let lz = psi_c(&law, 2.0, 4000).unwrap().ln();
        assert!(lz.is_infinite());
        let x = homogeneous_potentials(2.0, 4000);
        let l = log_constrained_from_potentials(&law, &x, 0, 4000).unwrap();
        assert!(rel(l, 2.0 * 3999.0) < 1e-13);
        let lf = log_free_from_potentials(&law, &x).unwrap();
        assert!(rel(lf, 8000.0) < 1e-13);
    }

    #[test]
    fn table_agrees_with_direct() {
        let law = build_renewal(0.75, SlowlyVarying::one(), 500).unwrap();
        let om = fixed_omega(300, 5);
        let p = PinParams::new(&DisorderLaw::gaussian(), 0.9, 0.4).unwrap();
        let t = PartitionTable::build(&law, &om, &p, 300).unwrap();
        assert_eq!(t.log_z[0], 0.0);
        for m in [1, 17, 150, 300] {
            let c = z_constrained(&law, &om, &p, 0, m).unwrap();
            assert!((t.log_constrained(&law, m) - c).abs() < 1e-12);
            let f = z_free(&law, &om, &p, m).unwrap();
            assert!((t.log_free(&law, m) - f).abs() < 1e-12);
        }
        // the table satisfies its recursion
        for n in [5, 99, 250] {
            let mut s = 0.0;
            for k in 0..n {
                s += t.log_z[k].exp() * law.k[n - k];
            }
            let x = p.potential(om.at(n));
            assert!(rel(t.log_z[n], (s * x.exp()).ln()) < 1e-12);
        }
    }

    #[test]
    fn contact_density_is_derivative() {
        let law = build_renewal(0.75, SlowlyVarying::one(), 500).unwrap();
        let om = fixed_omega(400, 6);
        let dl = DisorderLaw::gaussian();
        let h = 0.05;
        let eps = 1e-5;
        let p = PinParams::new(&dl, 0.5, h).unwrap();
        let (lz, rho) = z_free_with_contacts(&law, &om, &p, 400).unwrap();
        assert!((lz - z_free(&law, &om, &p, 400).unwrap()).abs() < 1e-12);
        let up = z_free(&law, &om, &PinParams::new(&dl, 0.5, h + eps).unwrap(), 400).unwrap();
        let dn = z_free(&law, &om, &PinParams::new(&dl, 0.5, h - eps).unwrap(), 400).unwrap();
        let fd = (up - dn) / (2.0 * eps) / 400.0;
        assert!((rho - fd).abs() < 1e-7, "{rho} vs {fd}");
    }

    #[test]
    fn rademacher_exact_first_moment() {
        let law = build_renewal(0.75, SlowlyVarying::one(), 64).unwrap();
        let (m1, _) = rademacher_exact_moments(&law, 0.6, 0.2, 8).unwrap();
        assert!(rel(m1, psi_c(&law, 0.2, 8).unwrap()) < 1e-12);
    }

    #[test]
    fn rademacher_exact_second_moment() {
        let law = build_renewal(0.75, SlowlyVarying::one(), 64).unwrap();
        let beta = 0.7;
        let (_, m2) = rademacher_exact_moments(&law, beta, 0.0, 6).unwrap();
        let rhs = second_moment_exact(&law, &DisorderLaw::rademacher(), beta, 6).unwrap();
        assert!(rel(m2, rhs) < 1e-12, "{m2} vs {rhs}");
    }

    #[test]
    fn scale_signs() {
        let law = build_renewal(0.75, SlowlyVarying::one(), 64).unwrap();
        let s = WeakCouplingScale::for_law(&law, 100, 1.0, -0.5).unwrap();
        assert!(s.beta_n() > 0.0 && s.h_n() < 0.0);
        let s0 = WeakCouplingScale::for_law(&law, 100, 0.0, 0.0).unwrap();
        assert_eq!(s0.beta_n(), 0.0);
        assert!(
            WeakCouplingScale::for_law(&RenewalLaw::two_point(8).unwrap(), 4, 1.0, 0.0).is_err()
        );
    }
}
