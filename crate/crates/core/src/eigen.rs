//! Dense non-symmetric complex eigensolver: Householder reduction to upper
//! Hessenberg form, single-shift QR to complex Schur form, eigenvectors by
//! back substitution on the triangular factor.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::math;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[&[C64]]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::ShapeMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
            m.data[i * n..(i + 1) * n].copy_from_slice(r);
        }
        Ok(m)
    }

    pub fn diagonal(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        math::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(v)
                    .fold(ZERO, |a, (m, x)| a + m * x)
            })
            .collect()
    }

    /// `M + cI`.
    pub fn shifted(&self, c: C64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m[(i, i)] += c;
        }
        m
    }
}

impl core::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

/// Complex Schur decomposition `A = Z T Z^H`.
#[derive(Debug, Clone)]
pub struct Schur {
    pub t: CMatrix,
    pub z: CMatrix,
}

impl Schur {
    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.t.n).map(|i| self.t[(i, i)]).collect()
    }

    /// Unit-norm eigenvector for the `p`-th diagonal entry of `T`.
    pub fn eigenvector(&self, p: usize) -> Vec<C64> {
        let t = &self.t;
        let n = t.n;
        let lam = t[(p, p)];
        let small = f64::EPSILON * t.norm().max(f64::MIN_POSITIVE);
        let mut x = vec![ZERO; n];
        x[p] = ONE;
        for i in (0..p).rev() {
            let s = ((i + 1)..=p).fold(ZERO, |a, j| a + t[(i, j)] * x[j]);
            let mut d = t[(i, i)] - lam;
            if d.norm() < small {
                d = C64::new(small, 0.0);
            }
            x[i] = -s / d;
        }
        let mut v = self.z.mul_vec(&x);
        let nv = math::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
        v.iter_mut().for_each(|z| *z /= nv);
        v
    }
}

/// Reduces `a` to upper Hessenberg form, returning `(H, Q)` with `A = Q H Q^H`.
fn hessenberg(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.n;
    let mut h = a.clone();
    let mut q = CMatrix::identity(n);
    let mut v = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let xnorm = math::sqrt(((k + 1)..n).map(|i| h[(i, k)].norm_sqr()).sum());
        if xnorm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * xnorm;
        v.iter_mut().for_each(|z| *z = ZERO);
        for i in (k + 1)..n {
            v[i] = h[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm = math::sqrt(((k + 1)..n).map(|i| v[i].norm_sqr()).sum());
        if vnorm == 0.0 {
            continue;
        }
        for z in &mut v[(k + 1)..n] {
            *z /= vnorm;
        }
        // H <- (I - 2vv^H) H
        for j in 0..n {
            let s = ((k + 1)..n).fold(ZERO, |a, i| a + v[i].conj() * h[(i, j)]);
            for i in (k + 1)..n {
                h[(i, j)] -= v[i] * s * 2.0;
            }
        }
        // H <- H (I - 2vv^H), Q <- Q (I - 2vv^H)
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let s = ((k + 1)..n).fold(ZERO, |a, j| a + m[(i, j)] * v[j]);
                for j in (k + 1)..n {
                    m[(i, j)] -= s * v[j].conj() * 2.0;
                }
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

/// `G = [[c, s], [-s̄, c]]` with `G [f; g] = [r; 0]`.
fn givens(f: C64, g: C64) -> (f64, C64) {
    let nf = f.norm();
    let ng = g.norm();
    if ng == 0.0 {
        return (1.0, ZERO);
    }
    if nf == 0.0 {
        return (0.0, ONE);
    }
    let nu = math::hypot(nf, ng);
    (nf / nu, (f / nf) * g.conj() / nu)
}

/// Complex Schur decomposition by shifted QR on the Hessenberg form.
pub fn schur(a: &CMatrix, max_iter_per_eig: usize) -> Result<Schur> {
    let n = a.n;
    let (mut h, mut z) = hessenberg(a);
    if n <= 1 {
        return Ok(Schur { t: h, z });
    }
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let mut rot = vec![(0.0, ZERO); n];
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let scale = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let scale = if scale == 0.0 { h.norm() } else { scale };
            if h[(l, l - 1)].norm() <= f64::EPSILON * scale {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if iter > max_iter_per_eig {
            return Err(Error::EigenNoConvergence {
                iterations: total,
                residual: h[(hi, hi - 1)].norm(),
            });
        }

        // Wilkinson shift from the trailing 2×2 block, with an occasional
        // exceptional shift to break cycles.
        let (p, q, r, s) = (h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
        let mu = if iter % 11 == 10 {
            s + C64::new(0.75 * r.norm(), 0.0)
        } else {
            let half = (p - s) * 0.5;
            let disc = (half * half + q * r).sqrt();
            let m1 = (p + s) * 0.5 + disc;
            let m2 = (p + s) * 0.5 - disc;
            if (m1 - s).norm() < (m2 - s).norm() {
                m1
            } else {
                m2
            }
        };

        for i in l..=hi {
            h[(i, i)] -= mu;
        }
        for k in l..hi {
            let (c, sn) = givens(h[(k, k)], h[(k + 1, k)]);
            rot[k] = (c, sn);
            for j in k..n {
                let (x, y) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = x * c + sn * y;
                h[(k + 1, j)] = -sn.conj() * x + y * c;
            }
            h[(k + 1, k)] = ZERO;
        }
        for k in l..hi {
            let (c, sn) = rot[k];
            for i in 0..=(k + 1).min(hi) {
                let (x, y) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = x * c + y * sn.conj();
                h[(i, k + 1)] = -x * sn + y * c;
            }
            for i in 0..n {
                let (x, y) = (z[(i, k)], z[(i, k + 1)]);
                z[(i, k)] = x * c + y * sn.conj();
                z[(i, k + 1)] = -x * sn + y * c;
            }
        }
        for i in l..=hi {
            h[(i, i)] += mu;
        }
    }
    // clean the strictly lower part
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok(Schur { t: h, z })
}

/// Index of the eigenvalue with maximal real part; near-ties in the real part
/// go to the larger imaginary part, then to the lower index.
pub fn leading_index(eigs: &[C64], tie: f64) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, z) in eigs.iter().enumerate() {
        best = match best {
            None => Some(i),
            Some(b) => {
                let w = eigs[b];
                if z.re > w.re + tie || ((z.re - w.re).abs() <= tie && z.im > w.im + tie) {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}
