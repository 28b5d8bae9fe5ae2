//! Slowly varying functions, Potter-bound scans and the de Bruijn conjugate.

use std::f64::consts::E;

use crate::error::{PinError, Result};

/// A slowly varying function. Arguments are shifted by `e` so every family
/// is finite and positive at `n = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlowlyVarying {
    /// `L(n) = c`.
    Constant(f64),
    /// `L(n) = scale · (log(e + n))^b`.
    LogPower { b: f64, scale: f64 },
}

impl SlowlyVarying {
    pub fn one() -> Self {
        SlowlyVarying::Constant(1.0)
    }

    pub fn log_power(b: f64) -> Self {
        SlowlyVarying::LogPower { b, scale: 1.0 }
    }

    /// Parse a family from its config key (`const`, `logpow`) and parameter.
    pub fn from_key(key: &str, param: f64) -> Result<Self> {
        match key {
            "const" => {
                if param > 0.0 {
                    Ok(SlowlyVarying::Constant(param))
                } else {
                    Err(PinError::InvalidArgument(format!(
                        "constant slowly varying function needs c > 0, got {param}"
                    )))
                }
            }
            "logpow" => Ok(SlowlyVarying::log_power(param)),
            other => Err(PinError::InvalidArgument(format!(
                "unknown slowly varying family {other:?} (expected const or logpow)"
            ))),
        }
    }

    pub fn key(&self) -> &'static str {
        match self {
            SlowlyVarying::Constant(_) => "const",
            SlowlyVarying::LogPower { .. } => "logpow",
        }
    }

    #[inline]
    pub fn eval(&self, n: f64) -> f64 {
        debug_assert!(n >= 0.0);
        match *self {
            SlowlyVarying::Constant(c) => c,
            SlowlyVarying::LogPower { b, scale } => scale * (E + n).ln().powf(b),
        }
    }

    #[inline]
    pub fn ln_eval(&self, n: f64) -> f64 {
        match *self {
            SlowlyVarying::Constant(c) => c.ln(),
            SlowlyVarying::LogPower { b, scale } => scale.ln() + b * (E + n).ln().ln(),
        }
    }

    /// The same family multiplied by a positive constant.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            SlowlyVarying::Constant(c) => SlowlyVarying::Constant(c * factor),
            SlowlyVarying::LogPower { b, scale } => SlowlyVarying::LogPower {
                b,
                scale: scale * factor,
            },
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, SlowlyVarying::Constant(_))
            || matches!(self, SlowlyVarying::LogPower { b, .. } if *b == 0.0)
    }
}

/// Fitted Potter constant over a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotterReport {
    /// Constant used for the violation count.
    pub c_delta: f64,
    /// Number of ordered pairs `(m, l)` with `L(m)/L(l) > c_delta · r^δ`.
    pub violations: u64,
}

/// Smallest `C` with `L(m)/L(l) ≤ C · max{(m+1)/(l+1), (l+1)/(m+1)}^δ` over
/// all pairs of the grid, and the number of violating pairs for that constant
/// (or for `forced_c` when given).
///
/// Runs in `O(n log n)`: in log space each half of the pair set is a
/// difference `g(m) - g(l)` of a single function, so the maximum is a running
/// extremum and the violation count a rank query.
pub fn potter_report(
    l: &SlowlyVarying,
    delta: f64,
    grid: &[f64],
    forced_c: Option<f64>,
) -> Result<PotterReport> {
    if grid.is_empty() {
        return Err(PinError::Empty("potter grid"));
    }
    if !(delta > 0.0) && forced_c.is_none() {
        return Err(PinError::Domain {
            what: "delta",
            value: delta,
            domain: "(0, ∞)".into(),
        });
    }
    let mut pts: Vec<f64> = grid.to_vec();
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    // m > l: g_up(m) - g_up(l); m < l: g_dn(m) - g_dn(l)
    let g_up: Vec<f64> = pts
        .iter()
        .map(|&x| l.ln_eval(x) - delta * (x + 1.0).ln())
        .collect();
    let g_dn: Vec<f64> = pts
        .iter()
        .map(|&x| l.ln_eval(x) + delta * (x + 1.0).ln())
        .collect();

    let mut log_c: f64 = 0.0;
    let mut run_min = f64::INFINITY;
    for &g in &g_up {
        if run_min.is_finite() {
            log_c = log_c.max(g - run_min);
        }
        run_min = run_min.min(g);
    }
    let mut run_max = f64::NEG_INFINITY;
    for &g in &g_dn {
        if run_max.is_finite() {
            log_c = log_c.max(run_max - g);
        }
        run_max = run_max.max(g);
    }
    let c_delta = forced_c.unwrap_or(log_c.exp());
    let thr = c_delta.ln() + 1e-12;
    let violations = count_pairs_exceeding(&g_up, thr) + count_pairs_exceeding_rev(&g_dn, thr);
    Ok(PotterReport {
        c_delta,
        violations,
    })
}

/// #{(i, j): j < i, g[i] - g[j] > thr}
fn count_pairs_exceeding(g: &[f64], thr: f64) -> u64 {
    let ranks = Ranks::new(g);
    let mut fen = Fenwick::new(ranks.len());
    let mut count = 0u64;
    for &v in g {
        // earlier values strictly below v - thr
        let k = ranks.count_below(v - thr);
        count += fen.prefix(k);
        fen.add(ranks.index_of(v));
    }
    count
}

/// #{(i, j): i < j, g[i] - g[j] > thr}
fn count_pairs_exceeding_rev(g: &[f64], thr: f64) -> u64 {
    // reversing the order turns (earlier - later) into (later - earlier)
    let rev: Vec<f64> = g.iter().rev().copied().collect();
    count_pairs_exceeding(&rev, thr)
}

struct Ranks {
    sorted: Vec<f64>,
}

impl Ranks {
    fn new(v: &[f64]) -> Self {
        let mut sorted = v.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        sorted.dedup();
        Ranks { sorted }
    }
    fn len(&self) -> usize {
        self.sorted.len()
    }
    fn index_of(&self, v: f64) -> usize {
        self.sorted.partition_point(|x| *x < v)
    }
    fn count_below(&self, v: f64) -> usize {
        self.sorted.partition_point(|x| *x < v)
    }
}

struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick {
            tree: vec![0; n + 1],
        }
    }
    fn add(&mut self, idx: usize) {
        let mut i = idx + 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }
    /// Number of inserted ranks `< k`.
    fn prefix(&self, k: usize) -> u64 {
        let mut i = k;
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

const DE_BRUIJN_DAMPING: f64 = 0.5;
const DE_BRUIJN_MAX_ITER: usize = 10_000;

/// de Bruijn conjugate `M#(x)`: the fixed point `y = 1 / M(x·y)` reached by
/// damped iteration. On return `|y·M(x·y) − 1| < 10·tol`.
pub fn de_bruijn_conjugate<M: Fn(f64) -> f64>(m: M, x: f64, tol: f64) -> Result<f64> {
    if !(x > 0.0) || !(tol > 0.0) {
        return Err(PinError::InvalidArgument(format!(
            "de Bruijn conjugate needs x > 0 and tol > 0 (x = {x}, tol = {tol})"
        )));
    }
    let mut y = 1.0 / m(x);
    for _ in 0..DE_BRUIJN_MAX_ITER {
        let target = 1.0 / m(x * y);
        let next = y + DE_BRUIJN_DAMPING * (target - y);
        if !next.is_finite() || next <= 0.0 {
            return Err(PinError::NoConvergence {
                iterations: 0,
                last: y,
            });
        }
        let rel = ((next - y) / y).abs();
        y = next;
        if rel < tol {
            let resid = (y * m(x * y) - 1.0).abs();
            if resid < 10.0 * tol {
                return Ok(y);
            }
        }
    }
    Err(PinError::NoConvergence {
        iterations: DE_BRUIJN_MAX_ITER,
        last: y,
    })
}

/// The universal scale `L̃_α` built from `α` and the slowly varying factor of
/// the return-time law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniversalScale {
    pub alpha: f64,
    pub l: SlowlyVarying,
}

impl UniversalScale {
    pub fn new(alpha: f64, l: SlowlyVarying) -> Result<Self> {
        if !(alpha > 0.5 && alpha < 1.0) {
            return Err(PinError::Domain {
                what: "alpha",
                value: alpha,
                domain: "(1/2, 1)".into(),
            });
        }
        Ok(UniversalScale { alpha, l })
    }

    /// `M(x) = 1 / L(x^{2/(2α−1)})`.
    pub fn m(&self, x: f64) -> f64 {
        let p = 2.0 / (2.0 * self.alpha - 1.0);
        1.0 / self.l.eval(x.powf(p))
    }

    /// `L̃_α(x) = M#(x)^{−1/(2α−1)}`.
    pub fn tilde_l(&self, x: f64, tol: f64) -> Result<f64> {
        if self.l.is_constant() {
            // M ≡ 1/c, M# ≡ c
            let c = self.l.eval(0.0);
            return Ok(c.powf(-1.0 / (2.0 * self.alpha - 1.0)));
        }
        let y = de_bruijn_conjugate(|s| self.m(s), x, tol)?;
        Ok(y.powf(-1.0 / (2.0 * self.alpha - 1.0)))
    }
}
