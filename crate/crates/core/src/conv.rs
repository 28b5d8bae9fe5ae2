//! Online solver for renewal-type convolution equations
//!
//! ```text
//! x(n) = f(n) + s · Σ_{j=1}^{n} a(j) x(n-j),     x(0) = f(0)
//! ```
//!
//! solved by divide and conquer: the left half is finished first, its
//! contribution to the right half is pushed by one convolution (FFT for long
//! blocks, compensated direct sums for short ones), then the right half is
//! solved. Cost is `O(N log² N)`.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::stats::CompensatedSum;

const BASE: usize = 64;
const DIRECT_CROSS: usize = 2048;

struct Solver<'a> {
    f: &'a [f64],
    a: &'a [f64],
    sign: f64,
    x: Vec<f64>,
    acc: Vec<CompensatedSum>,
    planner: FftPlanner<f64>,
}

/// Solve the convolution equation above for `n < f.len()`.
/// `a[0]` is ignored; `a` must be at least as long as `f`.
pub fn solve_online(f: &[f64], a: &[f64], sign: f64) -> Vec<f64> {
    assert!(a.len() >= f.len());
    let n = f.len();
    let mut s = Solver {
        f,
        a,
        sign,
        x: vec![0.0; n],
        acc: vec![CompensatedSum::new(); n],
        planner: FftPlanner::new(),
    };
    if n > 0 {
        s.solve(0, n);
    }
    s.x
}

impl<'a> Solver<'a> {
    fn solve(&mut self, l: usize, r: usize) {
        if r - l <= BASE {
            for n in l..r {
                let mut cs = self.acc[n];
                for k in l..n {
                    cs.add(self.a[n - k] * self.x[k]);
                }
                self.x[n] = if n == 0 {
                    self.f[0]
                } else {
                    self.f[n] + self.sign * cs.value()
                };
            }
            return;
        }
        let m = (l + r) / 2;
        self.solve(l, m);
        self.push(l, m, r);
        self.solve(m, r);
    }

    /// Add Σ_{k∈[l,m)} x(k) a(n-k) to acc(n) for n ∈ [m, r).
    fn push(&mut self, l: usize, m: usize, r: usize) {
        if r - l <= DIRECT_CROSS {
            for n in m..r {
                let mut cs = self.acc[n];
                for k in l..m {
                    cs.add(self.a[n - k] * self.x[k]);
                }
                self.acc[n] = cs;
            }
            return;
        }
        let len_x = m - l;
        let len_a = r - l;
        let size = (len_x + len_a - 1).next_power_of_two();
        let fwd: Arc<dyn Fft<f64>> = self.planner.plan_fft_forward(size);
        let inv: Arc<dyn Fft<f64>> = self.planner.plan_fft_inverse(size);
        let mut bx = vec![Complex::new(0.0, 0.0); size];
        let mut ba = vec![Complex::new(0.0, 0.0); size];
        for (i, v) in self.x[l..m].iter().enumerate() {
            bx[i].re = *v;
        }
        for i in 1..len_a {
            ba[i].re = self.a[i];
        }
        fwd.process(&mut bx);
        fwd.process(&mut ba);
        for (p, q) in bx.iter_mut().zip(&ba) {
            *p *= *q;
        }
        inv.process(&mut bx);
        let scale = 1.0 / size as f64;
        for n in m..r {
            self.acc[n].add(bx[n - l].re * scale);
        }
    }
}

/// Direct `O(N²)` reference used by tests and for short tables.
pub fn solve_direct(f: &[f64], a: &[f64], sign: f64) -> Vec<f64> {
    let n = f.len();
    let mut x = vec![0.0; n];
    for i in 0..n {
        if i == 0 {
            x[0] = f[0];
            continue;
        }
        let mut cs = CompensatedSum::new();
        for j in 1..=i {
            cs.add(a[j] * x[i - j]);
        }
        x[i] = f[i] + sign * cs.value();
    }
    x
}
