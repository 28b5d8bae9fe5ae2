//! Heavy-tailed renewal laws and their contact masses.
//!
//! A [`RenewalLaw`] tabulates the return-time law `K(n)` on `1..=n_max`, the
//! tail `K̄(n) = P(τ₁ > n)` and the contact mass `u(n) = P(n ∈ τ)`. Mass
//! beyond `n_max` is kept as a single lump `K̄(n_max)`; sampled increments that
//! land in the lump follow a Pareto continuation with the law's exponent.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng;

use crate::conv::solve_online;
use crate::error::{PinError, Result};
use crate::quad;
use crate::slowvar::SlowlyVarying;
use crate::stats::CompensatedSum;

/// Default table length.
pub const DEFAULT_N_MAX: usize = 200_000;

/// How a law is built. Also the cache key.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LawFamily {
    /// `K(n) ∝ L(n) / n^{1+α}`.
    Power { alpha: f64, l: SlowlyVarying },
    /// `K(1) = 1`; every integer is a renewal. Oracle use only.
    Deterministic,
    /// `K(1) = K(2) = 1/2`. Oracle use only.
    TwoPoint,
    /// `τ ∩ τ'` for two independent copies of the power law `(alpha, l)`.
    Intersection { alpha: f64, l: SlowlyVarying },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawSpec {
    pub family: LawFamily,
    pub n_max: usize,
}

impl LawSpec {
    pub fn power(alpha: f64, l: SlowlyVarying, n_max: usize) -> Self {
        LawSpec {
            family: LawFamily::Power { alpha, l },
            n_max,
        }
    }

    pub fn build(&self) -> Result<RenewalLaw> {
        match self.family {
            LawFamily::Power { alpha, l } => build_renewal(alpha, l, self.n_max),
            LawFamily::Deterministic => RenewalLaw::deterministic(self.n_max),
            LawFamily::TwoPoint => RenewalLaw::two_point(self.n_max),
            LawFamily::Intersection { alpha, l } => {
                intersection_law(&build_renewal(alpha, l, self.n_max)?)
            }
        }
    }

    /// File-name safe key `(family, α, params, n_max)`.
    pub fn cache_key(&self) -> String {
        fn sv(l: &SlowlyVarying) -> String {
            match *l {
                SlowlyVarying::Constant(c) => format!("const{c:e}"),
                SlowlyVarying::LogPower { b, scale } => format!("logpow{b:e}x{scale:e}"),
            }
        }
        let fam = match &self.family {
            LawFamily::Power { alpha, l } => format!("power_a{alpha:e}_{}", sv(l)),
            LawFamily::Deterministic => "deterministic".to_string(),
            LawFamily::TwoPoint => "twopoint".to_string(),
            LawFamily::Intersection { alpha, l } => format!("intersection_a{alpha:e}_{}", sv(l)),
        };
        format!("{fam}_n{}", self.n_max)
    }
}

/// A return-time law with its tables.
#[derive(Debug, Clone, PartialEq)]
pub struct RenewalLaw {
    pub spec: LawSpec,
    /// Tail exponent (α, or ν = 2α − 1 for an intersection law); `None` for
    /// the auxiliary oracle families.
    pub alpha: Option<f64>,
    /// Slowly varying factor of `K(n) ~ L(n)/n^{1+α}`, normalization included.
    pub l: Option<SlowlyVarying>,
    /// Slowly varying `M` of `u(n) ~ 1/(M(n) n^{1−α})`.
    pub contact_factor: Option<SlowlyVarying>,
    /// `K[n]` for `n ∈ 0..=n_max`, `K[0] = 0`.
    pub k: Vec<f64>,
    /// `K̄[n] = P(τ₁ > n)` for `n ∈ 0..=n_max`.
    pub tail: Vec<f64>,
    /// `u[n] = P(n ∈ τ)` for `n ∈ 0..=n_max`.
    pub u: Vec<f64>,
    /// `α sin(απ)/π`.
    pub c_alpha: f64,
}

pub fn c_alpha(alpha: f64) -> f64 {
    alpha * (alpha * PI).sin() / PI
}

/// Power-law family `K(n) = L(n)/n^{1+α}`, normalized so that the table plus
/// the analytic tail lump has mass one.
pub fn build_renewal(alpha: f64, l: SlowlyVarying, n_max: usize) -> Result<RenewalLaw> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(PinError::Domain {
            what: "alpha",
            value: alpha,
            domain: "(0, ∞)".into(),
        });
    }
    if n_max < 2 {
        return Err(PinError::InvalidArgument(format!(
            "n_max = {n_max} too small (need ≥ 2)"
        )));
    }
    let (raw, tail_raw, z) = power_weights(alpha, &l, n_max)?;
    let k: Vec<f64> = raw.iter().map(|r| r / z).collect();
    let tail = tails_from(&k, tail_raw / z);
    let u = contact_mass(&k);
    let l_eff = l.scaled(1.0 / z);
    let ca = c_alpha(alpha);
    let contact_factor = if alpha < 1.0 {
        Some(l_eff.scaled(1.0 / ca))
    } else {
        None
    };
    Ok(RenewalLaw {
        spec: LawSpec::power(alpha, l, n_max),
        alpha: Some(alpha),
        l: Some(l_eff),
        contact_factor,
        k,
        tail,
        u,
        c_alpha: ca,
    })
}

/// `Σ_{n > N} L(n) n^{-1-α}` by Euler–Maclaurin (`∫ − f/2 − f'/12 + f'''/720`).
fn power_tail_sum(alpha: f64, l: &SlowlyVarying, n: usize) -> f64 {
    let x = n as f64;
    let f = |t: f64| l.eval(t) * t.powf(-1.0 - alpha);
    match *l {
        SlowlyVarying::Constant(c) => {
            let a = alpha;
            let int = x.powf(-a) / a;
            let f0 = x.powf(-1.0 - a);
            let f1 = -(1.0 + a) * x.powf(-2.0 - a);
            let f3 = -(1.0 + a) * (2.0 + a) * (3.0 + a) * x.powf(-4.0 - a);
            c * (int - f0 / 2.0 - f1 / 12.0 + f3 / 720.0)
        }
        SlowlyVarying::LogPower { b, .. } => {
            let (int, _) = quad::integrate_to_inf(f, x, 0.0, 1e-13);
            let fx = f(x);
            let lg = (std::f64::consts::E + x).ln();
            let dlog = b / ((std::f64::consts::E + x) * lg) - (1.0 + alpha) / x;
            int - fx / 2.0 - fx * dlog / 12.0
        }
    }
}

/// Unnormalized weights `L(n) n^{-1-α}`, the analytic tail beyond `n_max`, and
/// the total mass `Z`.
fn power_weights(alpha: f64, l: &SlowlyVarying, n_max: usize) -> Result<(Vec<f64>, f64, f64)> {
    let f = |x: f64| l.eval(x) * x.powf(-1.0 - alpha);
    let mut raw = vec![0.0; n_max + 1];
    for (n, r) in raw.iter_mut().enumerate().skip(1) {
        *r = f(n as f64);
    }
    let tail_raw = power_tail_sum(alpha, l, n_max);
    // sum small terms first
    let mut cs = CompensatedSum::new();
    cs.add(tail_raw);
    for &r in raw.iter().rev() {
        cs.add(r);
    }
    let z = cs.value();
    if !(z.is_finite() && z > 0.0) {
        return Err(PinError::Diagnostic(format!(
            "normalization failed (Z = {z})"
        )));
    }
    Ok((raw, tail_raw, z))
}

type Metadata = (
    Option<f64>,
    Option<SlowlyVarying>,
    Option<SlowlyVarying>,
    f64,
);

/// Exponent, effective `L`, contact factor and `C` for a spec, without
/// building the tables.
fn law_metadata(spec: &LawSpec) -> Result<Metadata> {
    Ok(match spec.family {
        LawFamily::Power { alpha, l } => {
            let (_, _, z) = power_weights(alpha, &l, spec.n_max)?;
            let l_eff = l.scaled(1.0 / z);
            let ca = c_alpha(alpha);
            let cf = (alpha < 1.0).then(|| l_eff.scaled(1.0 / ca));
            (Some(alpha), Some(l_eff), cf, ca)
        }
        LawFamily::Intersection { alpha, l } => {
            let (_, _, z) = power_weights(alpha, &l, spec.n_max)?;
            let l_eff = l.scaled(1.0 / z);
            let ca = c_alpha(alpha);
            let nu = 2.0 * alpha - 1.0;
            (
                Some(nu),
                None,
                Some(square(&l_eff).scaled(1.0 / (ca * ca))),
                c_alpha(nu),
            )
        }
        LawFamily::Deterministic | LawFamily::TwoPoint => (None, None, None, f64::NAN),
    })
}

fn tails_from(k: &[f64], lump: f64) -> Vec<f64> {
    let n_max = k.len() - 1;
    let mut tail = vec![0.0; n_max + 1];
    let mut cs = CompensatedSum::new();
    cs.add(lump);
    tail[n_max] = lump;
    for n in (0..n_max).rev() {
        cs.add(k[n + 1]);
        tail[n] = cs.value();
    }
    tail
}

/// `u(0) = 1`, `u(n) = Σ_{k=1}^{n} K(k) u(n−k)`.
pub fn contact_mass(k: &[f64]) -> Vec<f64> {
    let mut f = vec![0.0; k.len()];
    f[0] = 1.0;
    solve_online(&f, k, 1.0)
}

impl RenewalLaw {
    pub fn deterministic(n_max: usize) -> Result<Self> {
        let mut k = vec![0.0; n_max + 1];
        k[1] = 1.0;
        Self::auxiliary(LawFamily::Deterministic, k)
    }

    pub fn two_point(n_max: usize) -> Result<Self> {
        let mut k = vec![0.0; n_max + 1];
        k[1] = 0.5;
        k[2] = 0.5;
        Self::auxiliary(LawFamily::TwoPoint, k)
    }

    fn auxiliary(family: LawFamily, k: Vec<f64>) -> Result<Self> {
        let n_max = k.len() - 1;
        if n_max < 2 {
            return Err(PinError::InvalidArgument(format!(
                "n_max = {n_max} too small (need ≥ 2)"
            )));
        }
        let tail = tails_from(&k, 0.0);
        let u = contact_mass(&k);
        Ok(RenewalLaw {
            spec: LawSpec { family, n_max },
            alpha: None,
            l: None,
            contact_factor: None,
            k,
            tail,
            u,
            c_alpha: f64::NAN,
        })
    }

    pub fn n_max(&self) -> usize {
        self.k.len() - 1
    }

    /// The same law tabulated only up to `n_max`; the lump becomes `K̄(n_max)`.
    pub fn truncated(&self, n_max: usize) -> RenewalLaw {
        let n = n_max.min(self.n_max());
        RenewalLaw {
            spec: LawSpec {
                n_max: n,
                ..self.spec
            },
            k: self.k[..=n].to_vec(),
            tail: self.tail[..=n].to_vec(),
            u: self.u[..=n].to_vec(),
            ..*self
        }
    }

    /// Tail exponent used for increments beyond the table.
    fn lump_exponent(&self) -> f64 {
        self.alpha.unwrap_or(1.0)
    }

    /// `E[τ₁]` from the table plus the analytic tail; infinite for α ≤ 1.
    pub fn mean_return_time(&self) -> f64 {
        let n_max = self.n_max();
        let mut cs = CompensatedSum::new();
        for n in 1..=n_max {
            cs.add(n as f64 * self.k[n]);
        }
        match (self.spec.family, self.l) {
            (LawFamily::Power { alpha, .. }, Some(l)) => {
                if alpha <= 1.0 {
                    return f64::INFINITY;
                }
                // Σ_{n>N} n·K(n) with K(n) = L(n) n^{-1-α}
                let x = n_max as f64;
                let g = |t: f64| l.eval(t) * t.powf(-alpha);
                let tail = match l {
                    SlowlyVarying::Constant(c) => {
                        let a = alpha;
                        let int = x.powf(1.0 - a) / (a - 1.0);
                        let g1 = -a * x.powf(-1.0 - a);
                        let g3 = -a * (a + 1.0) * (a + 2.0) * x.powf(-3.0 - a);
                        c * (int - x.powf(-a) / 2.0 - g1 / 12.0 + g3 / 720.0)
                    }
                    SlowlyVarying::LogPower { .. } => {
                        let (int, _) = quad::integrate_to_inf(g, x, 0.0, 1e-13);
                        int - g(x) / 2.0
                    }
                };
                cs.add(tail);
                cs.value()
            }
            _ => {
                if self.tail[n_max] > 0.0 {
                    f64::INFINITY
                } else {
                    cs.value()
                }
            }
        }
    }

    /// Largest entrywise residual `|u(n) − Σ_{k=1}^n K(k) u(n−k)|` for
    /// `n ∈ 1..=n_upto`, evaluated by direct summation.
    pub fn renewal_residual(&self, n_upto: usize) -> f64 {
        let n_upto = n_upto.min(self.n_max());
        let support: Vec<usize> = (1..=n_upto).filter(|&k| self.k[k] != 0.0).collect();
        if support.len() * 64 < n_upto {
            let mut worst: f64 = 0.0;
            for n in 1..=n_upto {
                let s: f64 = support
                    .iter()
                    .take_while(|&&k| k <= n)
                    .map(|&k| self.k[k] * self.u[n - k])
                    .sum();
                worst = worst.max((self.u[n] - s).abs());
            }
            return worst;
        }
        // u reversed so every convolution row is a forward dot product
        let rev: Vec<f64> = self.u[..n_upto].iter().rev().copied().collect();
        let mut worst: f64 = 0.0;
        for n in 1..=n_upto {
            let s = dot(&self.k[1..=n], &rev[n_upto - n..]);
            worst = worst.max((self.u[n] - s).abs());
        }
        worst
    }

    /// Write the table as CSV (`n,K,Kbar,u`) with a versioned header.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "# pinning-law v1")?;
        writeln!(w, "# key={}", self.spec.cache_key())?;
        writeln!(w, "n,K,Kbar,u")?;
        let mut line = String::new();
        for n in 0..=self.n_max() {
            line.clear();
            let _ = write!(
                line,
                "{},{:e},{:e},{:e}",
                n, self.k[n], self.tail[n], self.u[n]
            );
            writeln!(w, "{line}")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read a table written by [`write_csv`](Self::write_csv). The caller
    /// supplies the spec the file was keyed by.
    pub fn read_csv(path: &Path, spec: LawSpec) -> Result<Self> {
        let r = BufReader::new(std::fs::File::open(path)?);
        let mut lines = r.lines();
        let magic = lines.next().transpose()?.unwrap_or_default();
        if magic.trim() != "# pinning-law v1" {
            return Err(PinError::Parse(format!(
                "{}: not a v1 law table",
                path.display()
            )));
        }
        let key = lines.next().transpose()?.unwrap_or_default();
        if key.trim() != format!("# key={}", spec.cache_key()) {
            return Err(PinError::Parse(format!(
                "{}: key mismatch ({key})",
                path.display()
            )));
        }
        let _header = lines.next();
        let (mut k, mut tail, mut u) = (Vec::new(), Vec::new(), Vec::new());
        for (i, line) in lines.enumerate() {
            let line = line?;
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(PinError::Parse(format!("row {i}: expected 4 columns")));
            }
            let p = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| PinError::Parse(format!("row {i}: {e}")))
            };
            k.push(p(cols[1])?);
            tail.push(p(cols[2])?);
            u.push(p(cols[3])?);
        }
        if k.len() != spec.n_max + 1 {
            return Err(PinError::Parse(format!(
                "expected {} rows, got {}",
                spec.n_max + 1,
                k.len()
            )));
        }
        let (alpha, l, contact_factor, c) = law_metadata(&spec)?;
        Ok(RenewalLaw {
            spec,
            alpha,
            l,
            contact_factor,
            k,
            tail,
            u,
            c_alpha: c,
        })
    }
}

/// `Σ a[i]·b[i]` with eight independent accumulators so the loop vectorizes.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for j in 0..8 {
            acc[j] += x[j] * y[j];
        }
    }
    acc.iter().sum::<f64>() + tail
}

fn square(l: &SlowlyVarying) -> SlowlyVarying {
    match *l {
        SlowlyVarying::Constant(c) => SlowlyVarying::Constant(c * c),
        SlowlyVarying::LogPower { b, scale } => SlowlyVarying::LogPower {
            b: 2.0 * b,
            scale: scale * scale,
        },
    }
}

/// Intersection renewal `σ = τ ∩ τ'`: contact mass `w = u²`, exponent
/// `ν = 2α − 1`, contact factor `M = L²/C_α²`; `K_σ` recovered from `w` by
/// inverting the renewal equation.
pub fn intersection_law(law: &RenewalLaw) -> Result<RenewalLaw> {
    let (alpha, l_user) = match law.spec.family {
        LawFamily::Power { alpha, l } => (alpha, l),
        _ => {
            return Err(PinError::InvalidArgument(
                "intersection law needs a power-law base".into(),
            ))
        }
    };
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(PinError::Domain {
            what: "alpha",
            value: alpha,
            domain: "(1/2, 1) for an intersection renewal".into(),
        });
    }
    let w: Vec<f64> = law.u.iter().map(|x| x * x).collect();
    let mut f = w.clone();
    f[0] = 0.0;
    let mut k = solve_online(&f, &w, -1.0);
    k[0] = 0.0;
    for v in k.iter_mut() {
        // cancellation can leave −ε on a positive quantity
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let mut cs = CompensatedSum::new();
    for &v in k.iter().rev() {
        cs.add(v);
    }
    let lump = (1.0 - cs.value()).max(0.0);
    let tail = tails_from(&k, lump);
    let nu = 2.0 * alpha - 1.0;
    let ca = law.c_alpha;
    let lb = law.l.expect("power law has L");
    Ok(RenewalLaw {
        spec: LawSpec {
            family: LawFamily::Intersection { alpha, l: l_user },
            n_max: law.n_max(),
        },
        alpha: Some(nu),
        l: None,
        contact_factor: Some(square(&lb).scaled(1.0 / (ca * ca))),
        k,
        tail,
        u: w,
        c_alpha: c_alpha(nu),
    })
}

/// Result of comparing `u` with its local-renewal asymptotics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticsReport {
    pub max_rel_dev: f64,
    pub at: usize,
}

/// `max_{n ∈ window} |u(n)·M(n)·n^{1−α} − 1|`, with `M = L/C_α` for a
/// power law (and `L²/C_α²`, `ν` for an intersection law).
pub fn contact_asymptotics_check(
    law: &RenewalLaw,
    window: std::ops::RangeInclusive<usize>,
) -> Result<AsymptoticsReport> {
    let (alpha, m) = match (law.alpha, law.contact_factor) {
        (Some(a), Some(m)) if a < 1.0 => (a, m),
        _ => {
            return Err(PinError::Diagnostic(
                "contact asymptotics undefined for this law (no tail exponent in (0,1))".into(),
            ))
        }
    };
    let lo = (*window.start()).max(1);
    let hi = (*window.end()).min(law.n_max());
    if lo > hi {
        return Err(PinError::Empty("asymptotics window"));
    }
    let mut rep = AsymptoticsReport {
        max_rel_dev: 0.0,
        at: lo,
    };
    for n in lo..=hi {
        let x = n as f64;
        let dev = (law.u[n] * m.eval(x) * x.powf(1.0 - alpha) - 1.0).abs();
        if dev > rep.max_rel_dev {
            rep = AsymptoticsReport {
                max_rel_dev: dev,
                at: n,
            };
        }
    }
    Ok(rep)
}

/// Renewal epochs in `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    /// Strictly increasing; starts at 0 for a renewal started at 0.
    pub points: Vec<f64>,
    /// Lattice scale `N`, or `None` for a continuum sample.
    pub scale: Option<usize>,
}

impl PointSet {
    /// Integer epochs rescaled by `N`.
    pub fn from_epochs(epochs: &[usize], n: usize) -> Self {
        PointSet {
            points: epochs.iter().map(|&e| e as f64 / n as f64).collect(),
            scale: Some(n),
        }
    }
}

impl RenewalLaw {
    /// One i.i.d. increment with law `K`.
    pub fn sample_increment<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        // V uniform on (0, 1]; T = min{n : K̄(n) < V}
        let v: f64 = 1.0 - rng.random::<f64>();
        let n_max = self.n_max();
        let lump = self.tail[n_max];
        if v <= lump {
            let r = v / lump;
            let x = n_max as f64 * r.powf(-1.0 / self.lump_exponent());
            let inc = x.ceil();
            return if inc > n_max as f64 {
                if inc < usize::MAX as f64 / 4.0 {
                    inc as usize
                } else {
                    usize::MAX / 4
                }
            } else {
                n_max + 1
            };
        }
        // tail is non-increasing; find first index with tail < v
        self.tail.partition_point(|&t| t >= v)
    }

    /// Renewal epochs `0 = τ₀ < τ₁ < …` up to `horizon`, as integers.
    pub fn sample_epochs<R: Rng + ?Sized>(&self, horizon: usize, rng: &mut R) -> Vec<usize> {
        let mut out = vec![0usize];
        let mut pos = 0usize;
        loop {
            let inc = self.sample_increment(rng);
            pos = pos.saturating_add(inc);
            if pos > horizon {
                break;
            }
            out.push(pos);
        }
        out
    }
}

/// Sampled renewal trajectory as a point set `τ/N` truncated at `horizon`.
pub fn sample_renewal<R: Rng + ?Sized>(law: &RenewalLaw, horizon: usize, rng: &mut R) -> PointSet {
    let epochs = law.sample_epochs(horizon, rng);
    PointSet {
        points: epochs.iter().map(|&e| e as f64).collect(),
        scale: Some(1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityReport {
    pub worst_c: f64,
    pub at_n: usize,
    pub at_l: usize,
}

/// Smallest `C` with `|u(n+ℓ)/u(n) − 1| ≤ C (ℓ/n)^δ` for `n` in the grid and
/// `0 < ℓ ≤ εn` (within the table).
pub fn regularity_check(
    law: &RenewalLaw,
    eps: f64,
    delta: f64,
    n_grid: &[usize],
) -> Result<RegularityReport> {
    if !(eps > 0.0 && delta > 0.0 && delta <= 1.0) {
        return Err(PinError::InvalidArgument(format!(
            "regularity check needs eps > 0 and 0 < delta ≤ 1 (eps = {eps}, delta = {delta})"
        )));
    }
    let mut rep = RegularityReport {
        worst_c: 0.0,
        at_n: 0,
        at_l: 0,
    };
    for &n in n_grid {
        if n == 0 || n > law.n_max() {
            continue;
        }
        let lmax = ((eps * n as f64).floor() as usize).min(law.n_max() - n);
        let un = law.u[n];
        for l in 1..=lmax {
            let c = (law.u[n + l] / un - 1.0).abs() / (l as f64 / n as f64).powf(delta);
            if c > rep.worst_c {
                rep = RegularityReport {
                    worst_c: c,
                    at_n: n,
                    at_l: l,
                };
            }
        }
    }
    Ok(rep)
}

/// Directory cache of law tables keyed by [`LawSpec::cache_key`].
#[derive(Debug, Clone)]
pub struct LawCache {
    dir: PathBuf,
}

impl LawCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        LawCache { dir: dir.into() }
    }

    pub fn path_for(&self, spec: &LawSpec) -> PathBuf {
        self.dir.join(format!("{}.csv", spec.cache_key()))
    }

    pub fn load_or_build(&self, spec: &LawSpec) -> Result<RenewalLaw> {
        let p = self.path_for(spec);
        if p.exists() {
            if let Ok(law) = RenewalLaw::read_csv(&p, *spec) {
                return Ok(law);
            }
        }
        let law = spec.build()?;
        std::fs::create_dir_all(&self.dir)?;
        law.write_csv(&p)?;
        Ok(law)
    }
}
