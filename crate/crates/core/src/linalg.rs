//! Small dense helpers shared by the solvers.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{self, TAU};

/// Orthonormal real Fourier basis of the periodic grid with `n` points.
///
/// Column `m` of `q` is an eigenvector of the periodic second difference with
/// eigenvalue `-(2 - 2 cos(2π k/n)) / h²`, `k` the frequency of that column.
#[derive(Debug, Clone)]
pub(crate) struct RealFourierBasis {
    /// Row-major `n × n`, `q[p * n + m]` = value of basis vector `m` at point `p`.
    pub q: Vec<f64>,
    /// Transposed copy of `q`.
    pub qt: Vec<f64>,
    /// `(2 - 2 cos(2πk/n))` for each column (unscaled by `h²`).
    pub symbol: Vec<f64>,
}

impl RealFourierBasis {
    pub fn new(n: usize) -> Self {
        let nf = n as f64;
        let mut q = vec![0.0; n * n];
        let mut symbol = vec![0.0; n];
        let mut col = 0;
        let mut push = |q: &mut Vec<f64>, symbol: &mut Vec<f64>, k: usize, f: &dyn Fn(f64) -> f64, scale: f64| {
            for p in 0..n {
                q[p * n + col] = scale * f(TAU * (k * p) as f64 / nf);
            }
            symbol[col] = 2.0 - 2.0 * math::cos(TAU * k as f64 / nf);
            col += 1;
        };
        let s0 = 1.0 / math::sqrt(nf);
        let s1 = math::sqrt(2.0 / nf);
        push(&mut q, &mut symbol, 0, &|_| 1.0, s0);
        for k in 1..n.div_ceil(2) {
            push(&mut q, &mut symbol, k, &math::cos, s1);
            push(&mut q, &mut symbol, k, &math::sin, s1);
        }
        if n.is_multiple_of(2) && n > 0 {
            push(&mut q, &mut symbol, n / 2, &math::cos, s0);
        }
        let mut qt = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                qt[c * n + r] = q[r * n + c];
            }
        }
        Self { q, qt, symbol }
    }
}

/// `out = a · b` for row-major `a` (`rows × inner`) and `b` (`inner × cols`).
pub(crate) fn matmul(a: &[f64], b: &[f64], rows: usize, inner: usize, cols: usize, out: &mut [f64]) {
    debug_assert_eq!(a.len(), rows * inner);
    debug_assert_eq!(b.len(), inner * cols);
    debug_assert_eq!(out.len(), rows * cols);
    out.fill(0.0);
    for r in 0..rows {
        let o = &mut out[r * cols..(r + 1) * cols];
        for k in 0..inner {
            let s = a[r * inner + k];
            let brow = &b[k * cols..(k + 1) * cols];
            for (x, &y) in o.iter_mut().zip(brow) {
                *x += s * y;
            }
        }
    }
}

/// Banded LU with partial pivoting, `kl` sub- and `ku` superdiagonals.
///
/// Row `r` stores columns `r - kl ..= r + ku + kl`; the extra `kl` columns hold
/// fill from row swaps.
#[derive(Debug, Clone)]
pub(crate) struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    w: usize,
    ab: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let w = 2 * kl + ku + 1;
        Self { n, kl, ku, w, ab: vec![0.0; n * w], piv: Vec::new() }
    }

    #[inline]
    fn slot(&self, r: usize, c: usize) -> usize {
        debug_assert!(c + self.kl >= r && c <= r + self.ku + self.kl);
        r * self.w + (c + self.kl - r)
    }

    /// Adds `v` to entry `(r, c)`, which must lie inside the band.
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(c + self.kl >= r && c <= r + self.ku, "({r}, {c}) outside band");
        let s = self.slot(r, c);
        self.ab[s] += v;
    }

    /// Replaces row `r` by the unit row `e_r`.
    pub fn set_unit_row(&mut self, r: usize) {
        let lo = r.saturating_sub(self.kl);
        let hi = (r + self.ku).min(self.n - 1);
        for c in lo..=hi {
            let s = self.slot(r, c);
            self.ab[s] = if c == r { 1.0 } else { 0.0 };
        }
    }

    /// In-place factorization. `Err` if a pivot column is exactly zero.
    pub fn factor(&mut self) -> Result<(), ()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        self.piv = vec![0; n];
        for j in 0..n {
            let last = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = self.ab[self.slot(j, j)].abs();
            for r in j + 1..=last {
                let v = self.ab[self.slot(r, j)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 {
                return Err(());
            }
            self.piv[j] = p;
            let cmax = (j + kl + ku).min(n - 1);
            if p != j {
                for c in j..=cmax {
                    let (a, b) = (self.slot(j, c), self.slot(p, c));
                    self.ab.swap(a, b);
                }
            }
            let d = self.ab[self.slot(j, j)];
            for r in j + 1..=last {
                let s = self.slot(r, j);
                let l = self.ab[s] / d;
                self.ab[s] = l;
                if l == 0.0 {
                    continue;
                }
                for c in j + 1..=cmax {
                    let u = self.ab[self.slot(j, c)];
                    let t = self.slot(r, c);
                    self.ab[t] -= l * u;
                }
            }
        }
        Ok(())
    }

    /// Solves in place after [`factor`](Self::factor).
    pub fn solve(&self, b: &mut [f64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        debug_assert_eq!(b.len(), n);
        for j in 0..n {
            let p = self.piv[j];
            b.swap(j, p);
            for r in j + 1..=(j + kl).min(n - 1) {
                b[r] -= self.ab[self.slot(r, j)] * b[j];
            }
        }
        for j in (0..n).rev() {
            let mut s = b[j];
            for c in j + 1..=(j + kl + ku).min(n - 1) {
                s -= self.ab[self.slot(j, c)] * b[c];
            }
            b[j] = s / self.ab[self.slot(j, j)];
        }
    }
}
