//! Continuum homogeneous series
//!
//! ```text
//! Ψ̂^ν_δ̂(t)     = 1 + Σ_k δ̂^k ∫_{0<t₁<…<t_k<t} Π_i (t_i − t_{i−1})^{ν−1} dt
//! Ψ̂^{ν,c}_δ̂(t) = 1 + Σ_k δ̂^k t^{1−ν} ∫ Π_i (t_i − t_{i−1})^{ν−1} (t − t_k)^{ν−1} dt
//! ```
//!
//! The iterated integrals are built by the recursion
//! `P_0 ≡ 1`, `P_k(r) = r^{1−ν} ∫_0^r P_{k−1}(s) s^{ν−1} (r−s)^{ν−1} ds`, so that
//! the constrained `k`-th integral is `P_k(t)` and the free one is
//! `∫_0^t P_{k−1}(s) s^{ν−1} ds`. In the variable `ρ = s^ν` (a mesh graded with
//! exponent `1/ν` in `s`) the `s^{ν−1}` singularity disappears and the
//! remaining `(r−s)^{ν−1}` endpoint singularity is integrated exactly against
//! piecewise-linear interpolants (product trapezoid rule). Two mesh levels are
//! combined by Richardson extrapolation.

use crate::error::{PinError, Result};
use crate::partition::psi_pair_at;
use crate::renewal::RenewalLaw;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_K_MAX: usize = 60;
pub const DEFAULT_PANELS: usize = 512;

/// Number of leading terms used to fit the factorial decay bound.
const FIT_TERMS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    /// Panels of the coarsest mesh.
    pub panels: usize,
    pub richardson: bool,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            panels: DEFAULT_PANELS,
            richardson: true,
        }
    }
}

/// Factorial decay model `|term_k| ≤ c₁ Ĉ^k k^{−c₂ k}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub c1: f64,
    pub c_hat: f64,
    pub c2: f64,
}

impl DecayFit {
    pub fn log_bound(&self, k: usize) -> f64 {
        let kf = k as f64;
        self.c1.ln() + kf * self.c_hat.ln() - self.c2 * kf * kf.ln()
    }

    /// `Σ_{k > from} c₁ Ĉ^k k^{−c₂ k}`.
    pub fn tail_sum(&self, from: usize) -> f64 {
        if !(self.c2 > 0.0) {
            return f64::INFINITY;
        }
        let mut s = 0.0;
        let mut k = from + 1;
        loop {
            let t = self.log_bound(k).exp();
            s += t;
            // terms decrease super-geometrically once k^{c₂} > e·Ĉ
            let decreasing = (k as f64).powf(self.c2) > std::f64::consts::E * self.c_hat;
            if (decreasing && t <= 1e-18 * s.max(1e-300)) || k > from + 100_000 || !s.is_finite() {
                break;
            }
            k += 1;
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsiSeries {
    pub nu: f64,
    pub delta_hat: f64,
    pub t: f64,
    pub constrained: bool,
    /// `δ̂^k I_k` for `k = 1..=k_max`.
    pub terms: Vec<f64>,
    pub k_max: usize,
    /// Bound on the omitted tail `|Σ_{k>k_max} term_k|`.
    pub truncation_bound: f64,
    /// Estimated quadrature error of the summed terms.
    pub quad_error: f64,
    pub fit: Option<DecayFit>,
    /// Grading exponent of the mesh in `s` (`1/ν`).
    pub grading: f64,
    pub quad: QuadSpec,
}

impl PsiSeries {
    pub fn value(&self) -> f64 {
        1.0 + crate::stats::pairwise_sum(&self.terms)
    }
}

/// `P_k` on the mesh `ρ_j = j h`, `k = 0..=k_max`.
struct Mesh {
    n: usize,
    h: f64,
    nu: f64,
    /// Row-major `(n+1)²` (lower triangle used).
    m: Vec<f64>,
}

impl Mesh {
    fn new(nu: f64, t: f64, n: usize) -> Self {
        let big_t = t.powf(nu);
        let h = big_t / n as f64;
        let inv = 1.0 / nu;
        let (gx, gw) = gauss_legendre_unit();
        let rules = [
            (NEAR, gauss_rule(&GL8_X, &GL8_W)),
            (MID, gauss_rule(&GL4_X, &GL4_W)),
            (usize::MAX, gauss_rule(&GL3_X, &GL3_W)),
        ];
        // r at every quadrature node of every panel, per rule
        let node_r: Vec<Vec<f64>> = rules
            .iter()
            .map(|(_, (x, _))| {
                let mut v = Vec::with_capacity(n * x.len());
                for a in 0..n {
                    for xi in x {
                        v.push(((a as f64 + xi) * h).powf(inv));
                    }
                }
                v
            })
            .collect();
        let mut mat = vec![0.0; (n + 1) * (n + 1)];
        for i in 1..=n {
            let rho_i = i as f64 * h;
            let r_i = rho_i.powf(inv);
            // r_i − r(ρ_i − hσ), without cancellation
            let diff = |sigma: f64| -> f64 { -r_i * (inv * (-sigma / i as f64).ln_1p()).exp_m1() };
            let pre = r_i.powf(1.0 - nu) / nu;
            let row = &mut mat[i * (n + 1)..(i + 1) * (n + 1)];
            // panels at distance ≥ 1: kernel smooth on the panel
            for a in 0..i - 1 {
                let d = i - a;
                let ri = rules.iter().position(|(lim, _)| d <= *lim).unwrap_or(2);
                let (x, w) = &rules[ri].1;
                let nodes = &node_r[ri][a * x.len()..(a + 1) * x.len()];
                let (mut wl, mut wr) = (0.0, 0.0);
                for g in 0..x.len() {
                    let dr = if d <= EXACT_DIFF {
                        diff(d as f64 - x[g])
                    } else {
                        r_i - nodes[g]
                    };
                    let k = dr.powf(nu - 1.0);
                    wl += w[g] * k * (1.0 - x[g]);
                    wr += w[g] * k * x[g];
                }
                row[a] += h * wl;
                row[a + 1] += h * wr;
            }
            // last panel: σ = v^{1/ν} absorbs σ^{ν−1}
            let (mut wl, mut wr) = (0.0, 0.0);
            for (v, w) in gx.iter().zip(&gw) {
                let sigma = v.powf(inv);
                let g = (diff(sigma) / sigma).powf(nu - 1.0) / nu;
                wl += w * g * sigma;
                wr += w * g * (1.0 - sigma);
            }
            row[i - 1] += h * wl;
            row[i] += h * wr;
            for v in row[..=i].iter_mut() {
                *v *= pre;
            }
        }
        Mesh { n, h, nu, m: mat }
    }

    fn step(&self, prev: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n + 1];
        for i in 1..=n {
            let row = &self.m[i * (n + 1)..i * (n + 1) + i + 1];
            let mut s = 0.0;
            for (a, b) in row.iter().zip(&prev[..=i]) {
                s += a * b;
            }
            out[i] = s;
        }
        out
    }

    /// `(1/ν) ∫_0^{T} P dρ` by the trapezoid rule.
    fn free_integral(&self, p: &[f64]) -> f64 {
        let n = self.n;
        let mut s = 0.5 * (p[0] + p[n]);
        for v in &p[1..n] {
            s += v;
        }
        s * self.h / self.nu
    }
}

/// Panels within this distance of the singular end use 8 nodes.
const NEAR: usize = 6;
/// Then 4 nodes up to this distance, 3 beyond.
const MID: usize = 40;
/// Below this distance `r_i − r` is formed without cancellation.
const EXACT_DIFF: usize = 3;

const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];
const GL4_X: [f64; 2] = [0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
const GL4_W: [f64; 2] = [0.652_145_154_862_546_1, 0.347_854_845_137_453_9];
const GL3_X: [f64; 2] = [0.0, 0.774_596_669_241_483_4];
const GL3_W: [f64; 2] = [8.0 / 9.0, 5.0 / 9.0];

/// Symmetric Gauss–Legendre rule from its non-negative nodes, mapped to `[0, 1]`.
fn gauss_rule(xp: &[f64], wp: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::new();
    let mut w = Vec::new();
    for (&xi, &wi) in xp.iter().zip(wp) {
        if xi == 0.0 {
            x.push(0.5);
            w.push(0.5 * wi);
        } else {
            x.push(0.5 * (1.0 - xi));
            w.push(0.5 * wi);
            x.push(0.5 * (1.0 + xi));
            w.push(0.5 * wi);
        }
    }
    (x, w)
}

fn gauss_legendre_unit() -> (Vec<f64>, Vec<f64>) {
    gauss_rule(&GL8_X, &GL8_W)
}

/// Raw iterated integrals `(free I_k, constrained I_k)` for `k = 1..=k_max`.
fn raw_terms(nu: f64, t: f64, n: usize, k_max: usize) -> (Vec<f64>, Vec<f64>) {
    let mesh = Mesh::new(nu, t, n);
    let mut p = vec![1.0; n + 1];
    let mut free = Vec::with_capacity(k_max);
    let mut cons = Vec::with_capacity(k_max);
    for _ in 1..=k_max {
        free.push(mesh.free_integral(&p));
        p = mesh.step(&p);
        cons.push(p[n]);
    }
    (free, cons)
}

fn validate(nu: f64, t: f64, tol: f64) -> Result<()> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(PinError::Domain {
            what: "nu",
            value: nu,
            domain: "(0, 1)".into(),
        });
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(PinError::Domain {
            what: "t",
            value: t,
            domain: "(0, ∞)".into(),
        });
    }
    if !(tol > 0.0) {
        return Err(PinError::Domain {
            what: "tol",
            value: tol,
            domain: "(0, ∞)".into(),
        });
    }
    Ok(())
}

/// Conservative fit of `log|term_k| ≈ log c₁ + k log Ĉ − c₂ k log k` on the
/// leading terms: least squares, then `c₁` raised to dominate every fitted
/// point and doubled.
pub fn fit_decay(terms: &[f64]) -> Option<DecayFit> {
    let pts: Vec<(f64, f64)> = terms
        .iter()
        .take(FIT_TERMS)
        .enumerate()
        .filter(|(_, v)| v.abs() > 0.0)
        .map(|(i, v)| ((i + 1) as f64, v.abs().ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    // two-regressor least squares: y − log c₁ = k log Ĉ − c₂ k log k
    let n = pts.len() as f64;
    let (mut s1, mut s2, mut sy) = (0.0, 0.0, 0.0);
    for &(k, y) in &pts {
        s1 += k;
        s2 += k * k.ln();
        sy += y;
    }
    let (m1, m2, my) = (s1 / n, s2 / n, sy / n);
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(k, y) in &pts {
        let x1 = k - m1;
        let x2 = k * k.ln() - m2;
        let yy = y - my;
        a11 += x1 * x1;
        a12 += x1 * x2;
        a22 += x2 * x2;
        b1 += x1 * yy;
        b2 += x2 * yy;
    }
    let det = a11 * a22 - a12 * a12;
    if det.abs() < 1e-300 {
        return None;
    }
    let log_c = (a22 * b1 - a12 * b2) / det;
    let neg_c2 = (a11 * b2 - a12 * b1) / det;
    let mut log_c1 = my - log_c * m1 - neg_c2 * m2;
    let worst = pts
        .iter()
        .map(|&(k, y)| y - (log_c1 + log_c * k + neg_c2 * k * k.ln()))
        .fold(0.0f64, f64::max);
    log_c1 += worst + std::f64::consts::LN_2;
    Some(DecayFit {
        c1: log_c1.exp(),
        c_hat: log_c.exp(),
        c2: -neg_c2,
    })
}

/// Terms for both series with quadrature error estimates. With Richardson
/// enabled, meshes `n, 2n, 4n` are combined to cancel the `h²` and `h^{2+ν}`
/// error terms.
fn both_terms(
    nu: f64,
    t: f64,
    k_max: usize,
    quad: QuadSpec,
) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let (f1, c1) = raw_terms(nu, t, quad.panels, k_max);
    if !quad.richardson {
        let z = vec![0.0; k_max];
        return (f1, c1, z.clone(), z);
    }
    let (f2, c2) = raw_terms(nu, t, 2 * quad.panels, k_max);
    let (f4, c4) = raw_terms(nu, t, 4 * quad.panels, k_max);
    let q = 2f64.powf(2.0 + nu);
    let extrap = |a: &[f64], b: &[f64], c: &[f64]| -> (Vec<f64>, Vec<f64>) {
        (0..a.len())
            .map(|i| {
                let r1 = (4.0 * b[i] - a[i]) / 3.0;
                let r2 = (4.0 * c[i] - b[i]) / 3.0;
                let rr = (q * r2 - r1) / (q - 1.0);
                (rr, (rr - r2).abs())
            })
            .unzip()
    };
    let (fv, fe) = extrap(&f1, &f2, &f4);
    let (cv, ce) = extrap(&c1, &c2, &c4);
    (fv, cv, fe, ce)
}

fn assemble(
    nu: f64,
    delta_hat: f64,
    t: f64,
    tol: f64,
    k_max: usize,
    constrained: bool,
    raw: &[f64],
    err: &[f64],
    quad: QuadSpec,
) -> Result<PsiSeries> {
    let mut series = PsiSeries {
        nu,
        delta_hat,
        t,
        constrained,
        terms: vec![],
        k_max: 0,
        truncation_bound: 0.0,
        quad_error: 0.0,
        fit: None,
        grading: 1.0 / nu,
        quad,
    };
    if delta_hat == 0.0 {
        return Ok(series);
    }
    let scaled: Vec<f64> = raw
        .iter()
        .enumerate()
        .map(|(i, v)| delta_hat.powi(i as i32 + 1) * v)
        .collect();
    let fit = fit_decay(&scaled);
    series.fit = fit;
    for k in FIT_TERMS.min(k_max)..=k_max {
        let bound = fit.map(|f| f.tail_sum(k)).unwrap_or(f64::INFINITY);
        let last = scaled[k - 1].abs();
        if last + bound < tol {
            series.terms = scaled[..k].to_vec();
            series.k_max = k;
            series.truncation_bound = bound;
            series.quad_error = err[..k]
                .iter()
                .enumerate()
                .map(|(i, e)| delta_hat.abs().powi(i as i32 + 1) * e)
                .sum();
            return Ok(series);
        }
    }
    let bound = fit.map(|f| f.tail_sum(k_max)).unwrap_or(f64::INFINITY);
    Err(PinError::SeriesTruncation {
        tol,
        k_max,
        partial: 1.0 + scaled.iter().sum::<f64>(),
        bound,
    })
}

/// `Ψ̂^ν_δ̂(t)`.
pub fn psi_hat(nu: f64, delta_hat: f64, t: f64, tol: f64) -> Result<PsiSeries> {
    Ok(psi_hat_pair(nu, delta_hat, t, tol, DEFAULT_K_MAX, QuadSpec::default())?.0)
}

/// `Ψ̂^{ν,c}_δ̂(t)`.
pub fn psi_hat_c(nu: f64, delta_hat: f64, t: f64, tol: f64) -> Result<PsiSeries> {
    Ok(psi_hat_pair(nu, delta_hat, t, tol, DEFAULT_K_MAX, QuadSpec::default())?.1)
}

/// Free and constrained series from one mesh computation.
pub fn psi_hat_pair(
    nu: f64,
    delta_hat: f64,
    t: f64,
    tol: f64,
    k_max: usize,
    quad: QuadSpec,
) -> Result<(PsiSeries, PsiSeries)> {
    validate(nu, t, tol)?;
    if k_max < FIT_TERMS {
        return Err(PinError::InvalidArgument(format!(
            "k_max must be at least {FIT_TERMS}"
        )));
    }
    if quad.panels < 8 {
        return Err(PinError::InvalidArgument("at least 8 panels needed".into()));
    }
    if delta_hat == 0.0 {
        let free = assemble(nu, 0.0, t, tol, k_max, false, &[], &[], quad)?;
        let cons = assemble(nu, 0.0, t, tol, k_max, true, &[], &[], quad)?;
        return Ok((free, cons));
    }
    let (fv, cv, fe, ce) = both_terms(nu, t, k_max, quad);
    Ok((
        assemble(nu, delta_hat, t, tol, k_max, false, &fv, &fe, quad)?,
        assemble(nu, delta_hat, t, tol, k_max, true, &cv, &ce, quad)?,
    ))
}

/// Largest deviations between discrete and continuum Ψ at one `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UConvRow {
    pub n: usize,
    pub delta_n: f64,
    pub sup_dev_free: f64,
    pub sup_dev_constrained: f64,
}

impl UConvRow {
    pub fn sup_dev(&self) -> f64 {
        self.sup_dev_free.max(self.sup_dev_constrained)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UConvReport {
    pub nu: f64,
    pub delta_hat: f64,
    pub rows: Vec<UConvRow>,
}

impl UConvReport {
    pub fn decreasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].sup_dev() <= w[0].sup_dev())
    }
}

/// Discrete `Ψ_{δ_N}(Nt)`, `Ψ^c_{δ_N}(Nt)` against the continuum series on a
/// grid of `t`, with `δ_N = δ̂ M(N)/N^ν`.
pub fn uconv_check(
    law: &RenewalLaw,
    delta_hat: f64,
    t_grid: &[f64],
    n_list: &[usize],
) -> Result<UConvReport> {
    let (nu, m) = match (law.alpha, law.contact_factor) {
        (Some(a), Some(m)) if a > 0.0 && a < 1.0 => (a, m),
        _ => {
            return Err(PinError::InvalidArgument(
                "uniform convergence check needs a law with contact exponent in (0,1)".into(),
            ))
        }
    };
    let mut continuum = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if t == 0.0 {
            continuum.push((1.0, 1.0));
        } else {
            let (f, c) = psi_hat_pair(
                nu,
                delta_hat,
                t,
                DEFAULT_TOL,
                DEFAULT_K_MAX,
                QuadSpec::default(),
            )?;
            continuum.push((f.value(), c.value()));
        }
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let nf = n as f64;
        let delta_n = delta_hat * m.eval(nf) / nf.powf(nu);
        let ms: Vec<usize> = t_grid.iter().map(|t| (t * nf).round() as usize).collect();
        let disc = psi_pair_at(law, delta_n, &ms)?;
        let mut row = UConvRow {
            n,
            delta_n,
            sup_dev_free: 0.0,
            sup_dev_constrained: 0.0,
        };
        for (d, c) in disc.iter().zip(&continuum) {
            row.sup_dev_free = row.sup_dev_free.max((d.0 - c.0).abs());
            row.sup_dev_constrained = row.sup_dev_constrained.max((d.1 - c.1).abs());
        }
        rows.push(row);
    }
    Ok(UConvReport {
        nu,
        delta_hat,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::{gamma, ln_gamma};

    /// Mittag-Leffler type closed forms of the iterated integrals.
    fn closed_free(nu: f64, d: f64, t: f64) -> f64 {
        let mut s = 1.0;
        for k in 1..200 {
            let kf = k as f64;
            let lt = kf * (d.abs() * gamma(nu)).ln() + kf * nu * t.ln() - ln_gamma(kf * nu + 1.0);
            s += d.signum().powi(k) * lt.exp();
        }
        s
    }

    fn closed_cons(nu: f64, d: f64, t: f64) -> f64 {
        let mut s = 1.0;
        for k in 1..200 {
            let kf = k as f64;
            let lt = kf * d.abs().ln() + (kf + 1.0) * gamma(nu).ln() + kf * nu * t.ln()
                - ln_gamma((kf + 1.0) * nu);
            s += d.signum().powi(k) * lt.exp();
        }
        s
    }

    #[test]
    fn zero_delta_is_one() {
        let s = psi_hat(0.5, 0.0, 1.0, 1e-8).unwrap();
        assert_eq!(s.value(), 1.0);
        assert!(s.terms.is_empty());
        assert_eq!(psi_hat_c(0.3, 0.0, 2.0, 1e-8).unwrap().value(), 1.0);
    }

    #[test]
    fn first_terms() {
        let f = psi_hat(0.5, 1.0, 1.0, 1e-8).unwrap();
        assert!((f.terms[0] - 2.0).abs() < 1e-9, "{}", f.terms[0]);
        let c = psi_hat_c(0.5, 1.0, 1.0, 1e-8).unwrap();
        assert!(
            (c.terms[0] - std::f64::consts::PI).abs() < 1e-8,
            "{}",
            c.terms[0]
        );
    }

    #[test]
    fn matches_closed_form() {
        for &(nu, d, t) in &[
            (0.5, 1.0, 1.0),
            (0.75, 1.0, 0.5),
            (0.6, -0.8, 1.3),
            (0.3, 0.3, 1.0),
        ] {
            let (f, c) = psi_hat_pair(nu, d, t, 1e-8, DEFAULT_K_MAX, QuadSpec::default()).unwrap();
            let ef = closed_free(nu, d, t);
            let ec = closed_cons(nu, d, t);
            assert!(
                (f.value() - ef).abs() < 1e-7,
                "free {nu} {d} {t}: {} vs {ef}",
                f.value()
            );
            assert!(
                (c.value() - ec).abs() < 1e-7,
                "cons {nu} {d} {t}: {} vs {ec}",
                c.value()
            );
        }
    }

    #[test]
    fn terms_positive_and_bounded() {
        let s = psi_hat_c(0.6, 1.5, 1.0, 1e-8).unwrap();
        assert!(s.terms.iter().all(|&x| x > 0.0));
        let fit = s.fit.unwrap();
        for (i, v) in s.terms.iter().enumerate() {
            assert!(v.ln() <= fit.log_bound(i + 1) + 1e-12);
        }
        assert!(s.truncation_bound < 1e-8);
    }

    #[test]
    fn unreachable_tolerance_is_reported() {
        let r = psi_hat_pair(0.5, 50.0, 1.0, 1e-8, 10, QuadSpec::default());
        assert!(matches!(r, Err(PinError::SeriesTruncation { .. })));
    }

    #[test]
    fn domain_errors() {
        assert!(psi_hat(1.0, 1.0, 1.0, 1e-8).is_err());
        assert!(psi_hat(0.5, 1.0, 0.0, 1e-8).is_err());
        assert!(psi_hat(0.5, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn scaling_in_t() {
        let nu: f64 = 0.6;
        let c: f64 = 2.0;
        let a = psi_hat_c(nu, 1.0, c * 0.7, 1e-8).unwrap().value();
        let b = psi_hat_c(nu, c.powf(nu), 0.7, 1e-8).unwrap().value();
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn increasing_in_delta() {
        let mut last = 1.0;
        for d in [0.25, 0.5, 1.0, 1.5] {
            let v = psi_hat(0.75, d, 1.0, 1e-8).unwrap().value();
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn continuous_in_t() {
        let base = psi_hat_c(0.5, 1.0, 1.0, 1e-8).unwrap().value();
        let mut prev = f64::INFINITY;
        for eps in [1e-1, 1e-2, 1e-3] {
            let d = (psi_hat_c(0.5, 1.0, 1.0 + eps, 1e-8).unwrap().value() - base).abs();
            assert!(d < prev);
            prev = d;
        }
        assert!(prev < 1e-2 * base);
    }

    #[test]
    fn mesh_refinement_stable() {
        let tol = 1e-8;
        let coarse = QuadSpec {
            panels: DEFAULT_PANELS,
            richardson: true,
        };
        let fine = QuadSpec {
            panels: 2 * DEFAULT_PANELS,
            richardson: true,
        };
        let a = psi_hat_pair(0.6, 1.0, 1.0, tol, DEFAULT_K_MAX, coarse).unwrap();
        let b = psi_hat_pair(0.6, 1.0, 1.0, tol, DEFAULT_K_MAX, fine).unwrap();
        assert!((a.0.value() - b.0.value()).abs() < tol);
        assert!((a.1.value() - b.1.value()).abs() < tol);
    }

    #[test]
    fn second_term_by_nested_quadrature() {
        // ∫_0^1 ∫_0^{t₂} t₁^{ν−1}(t₂−t₁)^{ν−1}(1−t₂)^{ν−1} dt₁ dt₂, inner in closed
        // form avoided: both levels adaptive after t = u^{1/ν}-type substitutions
        let nu: f64 = 0.5;
        let inner = |t2: f64| {
            // t₁ = t2·v², removes both endpoint singularities at ν = 1/2
            crate::quad::integrate(
                |v: f64| {
                    let t1 = t2 * v * v;
                    let w = 1.0 - v * v;
                    if w <= 0.0 {
                        return 0.0;
                    }
                    2.0 * t2 * v * t1.powf(nu - 1.0) * (t2 * w).powf(nu - 1.0)
                },
                0.0,
                1.0,
                1e-13,
                1e-13,
            )
            .0
        };
        // t₂ = 1 − y²
        let (val, _) = crate::quad::integrate(
            |y: f64| {
                let t2 = 1.0 - y * y;
                if y <= 0.0 {
                    return 0.0;
                }
                2.0 * y * inner(t2) * (y * y).powf(nu - 1.0)
            },
            0.0,
            1.0,
            1e-12,
            1e-12,
        );
        let s = psi_hat_c(nu, 1.0, 1.0, 1e-8).unwrap();
        assert!((s.terms[1] - val).abs() < 1e-6, "{} vs {val}", s.terms[1]);
    }
}
