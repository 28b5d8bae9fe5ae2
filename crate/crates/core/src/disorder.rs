//! Charge distributions, their log-moment generating function and sampling.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{PinError, Result};
use crate::quad;
use crate::rng::SeedRecord;
use crate::stats::{fit_line, sorted};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DisorderKind {
    Gaussian,
    /// Uniform on `[−√3, √3]`.
    BoundedUniform,
    Rademacher,
    /// Density proportional to `e^{−|x|^γ}`, `γ ∈ (1, 2)`, then standardized.
    GammaExp(f64),
}

/// A standardized charge law (mean 0, variance 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisorderLaw {
    pub kind: DisorderKind,
    /// `ω = (X − shift) / scale` for the raw variable `X`.
    pub shift: f64,
    pub scale: f64,
    /// Concentration exponent.
    pub gamma: f64,
    /// Radius of finiteness of Λ.
    pub beta0: f64,
}

impl DisorderLaw {
    pub fn new(kind: DisorderKind) -> Result<Self> {
        match kind {
            DisorderKind::Gaussian | DisorderKind::Rademacher | DisorderKind::BoundedUniform => {
                Ok(DisorderLaw {
                    kind,
                    shift: 0.0,
                    scale: 1.0,
                    gamma: 2.0,
                    beta0: f64::INFINITY,
                })
            }
            DisorderKind::GammaExp(g) => {
                if !(g > 1.0 && g < 2.0) {
                    return Err(PinError::Domain {
                        what: "gamma",
                        value: g,
                        domain: "(1, 2)".into(),
                    });
                }
                let dens = |x: f64| (-x.abs().powf(g)).exp();
                let (z, _) = quad::integrate_real_line(dens, 1e-14, 1e-14);
                let (m2, _) = quad::integrate_real_line(|x| x * x * dens(x), 1e-14, 1e-14);
                Ok(DisorderLaw {
                    kind,
                    // symmetric density
                    shift: 0.0,
                    scale: (m2 / z).sqrt(),
                    gamma: g,
                    beta0: f64::INFINITY,
                })
            }
        }
    }

    pub fn gaussian() -> Self {
        Self::new(DisorderKind::Gaussian).expect("gaussian")
    }

    pub fn rademacher() -> Self {
        Self::new(DisorderKind::Rademacher).expect("rademacher")
    }

    /// Parse a config name: `gaussian`, `uniform`, `rademacher`, `gamma-exp`.
    pub fn from_key(kind: &str, gamma: Option<f64>) -> Result<Self> {
        let k = match kind {
            "gaussian" => DisorderKind::Gaussian,
            "uniform" | "bounded-uniform" => DisorderKind::BoundedUniform,
            "rademacher" => DisorderKind::Rademacher,
            "gamma-exp" => DisorderKind::GammaExp(gamma.ok_or_else(|| {
                PinError::InvalidArgument("gamma-exp disorder needs disorder.gamma".into())
            })?),
            other => {
                return Err(PinError::InvalidArgument(format!(
                    "unknown disorder kind '{other}'"
                )))
            }
        };
        Self::new(k)
    }

    pub fn key(&self) -> String {
        match self.kind {
            DisorderKind::Gaussian => "gaussian".into(),
            DisorderKind::BoundedUniform => "uniform".into(),
            DisorderKind::Rademacher => "rademacher".into(),
            DisorderKind::GammaExp(g) => format!("gamma-exp({g})"),
        }
    }

    /// `Λ(β) = log E[e^{βω}]`.
    pub fn lambda(&self, beta: f64) -> Result<f64> {
        if !(beta.abs() < self.beta0) || beta.is_nan() {
            return Err(PinError::Domain {
                what: "beta",
                value: beta,
                domain: format!("(−{0}, {0})", self.beta0),
            });
        }
        Ok(match self.kind {
            DisorderKind::Gaussian => 0.5 * beta * beta,
            DisorderKind::Rademacher => log_cosh(beta),
            DisorderKind::BoundedUniform => {
                // log(sinh(y)/y), y = √3 β
                let y = (3.0f64).sqrt() * beta.abs();
                if y < 1e-4 {
                    y * y / 6.0 - y.powi(4) / 180.0
                } else {
                    y + (-(-2.0 * y).exp_m1()).ln() - (2.0 * y).ln()
                }
            }
            DisorderKind::GammaExp(g) => {
                if beta == 0.0 {
                    return Ok(0.0);
                }
                let b = beta / self.scale;
                // shift the exponent by its maximum to keep the integrand O(1)
                let xs = (b.abs() / g).powf(1.0 / (g - 1.0)) * b.signum();
                let peak = b * xs - xs.abs().powf(g);
                let f = |x: f64| (b * x - x.abs().powf(g) - peak).exp();
                let (num, _) = quad::integrate_real_line(|y| f(y + xs), 1e-15, 1e-14);
                let (den, _) =
                    quad::integrate_real_line(|x| (-x.abs().powf(g)).exp(), 1e-15, 1e-14);
                peak + num.ln() - den.ln()
            }
        })
    }

    /// One standardized draw.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            DisorderKind::Gaussian => StandardNormal.sample(rng),
            DisorderKind::BoundedUniform => (3.0f64).sqrt() * (2.0 * rng.random::<f64>() - 1.0),
            DisorderKind::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            DisorderKind::GammaExp(g) => (draw_gamma_exp(g, rng) - self.shift) / self.scale,
        }
    }
}

fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Accept–reject from the Laplace proposal `e^{−|x|}/2`.
fn draw_gamma_exp<R: Rng + ?Sized>(g: f64, rng: &mut R) -> f64 {
    // sup_x (x − x^g) is attained at x* = g^{−1/(g−1)}
    let xs = g.powf(-1.0 / (g - 1.0));
    let m = xs - xs.powf(g);
    loop {
        let e: f64 = Exp1.sample(rng);
        let log_acc = e - e.powf(g) - m;
        let u: f64 = rng.random();
        if u.ln() <= log_acc {
            return if rng.random::<bool>() { e } else { -e };
        }
    }
}

/// Charges `ω_1..ω_N` and the stream they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderSample {
    pub omega: Vec<f64>,
    pub seed: SeedRecord,
}

impl DisorderSample {
    /// `ω_n`, 1-based.
    #[inline]
    pub fn at(&self, n: usize) -> f64 {
        self.omega[n - 1]
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }
}

pub fn sample_disorder(law: &DisorderLaw, n: usize, seed: SeedRecord) -> DisorderSample {
    let mut rng = seed.rng();
    let omega = (0..n).map(|_| law.draw(&mut rng)).collect();
    DisorderSample { omega, seed }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    pub gamma_hat: f64,
    /// 95% interval for `gamma_hat`.
    pub gamma_ci: (f64, f64),
    pub a_hat: f64,
    pub b_hat: f64,
    /// Range of `x` used.
    pub x_range: (f64, f64),
    pub points: usize,
}

/// Fit `P(X ≤ −x) ≈ A e^{−x^γ/B}` on the deepest decade of the empirical
/// left tail.
pub fn left_tail_fit(samples: &[f64]) -> Result<TailFit> {
    const MIN: usize = 10_000;
    if samples.len() < MIN {
        return Err(PinError::Diagnostic(format!(
            "left tail fit needs at least {MIN} samples, got {}",
            samples.len()
        )));
    }
    let s = sorted(samples);
    if s[0] == s[s.len() - 1] {
        return Err(PinError::Diagnostic(
            "degenerate samples (all equal)".into(),
        ));
    }
    let n = s.len() as f64;
    let x_hi = -s[9];
    if !(x_hi > 0.0) {
        return Err(PinError::Diagnostic(format!(
            "left tail does not reach below zero (10th smallest sample {})",
            s[9]
        )));
    }
    let x_lo = x_hi / 10.0;
    const GRID: usize = 25;
    let (mut lx, mut ly, mut w, mut xg, mut nl) = (vec![], vec![], vec![], vec![], vec![]);
    for i in 0..GRID {
        let x = x_lo * (10.0f64).powf(i as f64 / (GRID - 1) as f64);
        let count = s.partition_point(|&v| v <= -x);
        let t = count as f64 / n;
        if count == 0 || t >= 1.0 {
            continue;
        }
        let nlt = -t.ln();
        let var = (1.0 - t) / (n * t * nlt * nlt);
        lx.push(x.ln());
        ly.push(nlt.ln());
        w.push(1.0 / var);
        xg.push(x);
        nl.push(nlt);
    }
    if lx.len() < 3 {
        return Err(PinError::Diagnostic("too few tail points for a fit".into()));
    }
    let fit = fit_line(&lx, &ly, Some(&w))
        .ok_or_else(|| PinError::Diagnostic("degenerate tail regression".into()))?;
    let g = fit.slope;
    let xg_pow: Vec<f64> = xg.iter().map(|x| x.powf(g)).collect();
    // −log T = x^γ / B − log A
    let (b_hat, a_hat) = match fit_line(&xg_pow, &nl, Some(&w)) {
        Some(f2) if f2.slope > 0.0 => (1.0 / f2.slope, (-f2.intercept).exp()),
        _ => (f64::NAN, f64::NAN),
    };
    Ok(TailFit {
        gamma_hat: g,
        gamma_ci: (g - 1.96 * fit.slope_se, g + 1.96 * fit.slope_se),
        a_hat,
        b_hat,
        x_range: (x_lo, x_hi),
        points: lx.len(),
    })
}
