//! Linear stability of the homogeneous state.
//!
//! Perturbations `e^{σt + iωx} Σ_k A_k cos(kθ)` reduce the linearised operator
//! (first order in λ) to a banded recurrence for the `A_k`. Truncating at
//! `A_n = 0` gives the `n × n` matrix `M_n`; its eigenvalue of largest real
//! part approximates the growth rate of the most unstable mode.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::eigen::{leading_index, schur, CMatrix};
use crate::error::{Error, Result};
use crate::math::{self, PI, TAU};
use crate::params::ScaledParams;

/// Iteration cap per eigenvalue in the shifted QR.
const QR_ITERATIONS: usize = 200;

/// Inputs for one truncated dispersion problem.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DispersionParams {
    pub omega: f64,
    pub d_t: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub pe: f64,
    pub n: usize,
}

impl DispersionParams {
    /// Lowest non-trivial wavenumber `ω = 2π` on the unit box.
    pub fn new(p: ScaledParams, n: usize) -> Self {
        Self {
            omega: TAU,
            d_t: p.d_t,
            alpha: p.alpha,
            lambda: p.lambda,
            gamma: p.gamma,
            pe: p.pe,
            n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Invalid("truncation order n must be at least 2"));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::NonPositive("omega"));
        }
        let fields = [
            (self.d_t, "D_T"),
            (self.alpha, "alpha"),
            (self.lambda, "lambda"),
            (self.gamma, "gamma"),
            (self.pe, "Pe"),
        ];
        for (v, name) in fields {
            if !v.is_finite() {
                return Err(Error::NotFinite(name));
            }
        }
        if self.alpha + self.omega * self.omega <= 0.0 {
            return Err(Error::NonPositive("omega^2 + alpha"));
        }
        Ok(())
    }

    pub fn with_gamma_pe(mut self, gamma: f64, pe: f64) -> Self {
        self.gamma = gamma;
        self.pe = pe;
        self
    }

    fn coefficients(&self) -> (C64, C64, f64) {
        let w = self.omega;
        let a = C64::new(-w * w * self.d_t, 0.0);
        let b = C64::new(0.0, -0.5 * w * self.pe);
        let c1 = self.gamma * w / (w * w + self.alpha);
        (a, b, c1)
    }
}

/// The truncated banded matrix `M_n`.
pub fn build_truncated_matrix(dp: &DispersionParams) -> Result<CMatrix> {
    dp.validate()?;
    let n = dp.n;
    let (a, b, c1) = dp.coefficients();
    let mut m = CMatrix::zeros(n);
    for k in 0..n {
        m[(k, k)] = a - (k * k) as f64;
        if k + 1 < n {
            m[(k, k + 1)] = b;
        }
        if k >= 1 {
            m[(k, k - 1)] = b;
        }
    }
    m[(1, 0)] = C64::new(0.0, c1) + b * 2.0;
    if n > 2 {
        m[(2, 0)] = C64::new(-dp.lambda * dp.omega * c1, 0.0);
    }
    Ok(m)
}

/// Truncated matrix of the adiabatic closure: `a` only in the first diagonal
/// entry, `-k²` elsewhere, no look-ahead term.
pub fn build_adiabatic_matrix(dp: &DispersionParams) -> Result<CMatrix> {
    dp.validate()?;
    let n = dp.n;
    let (a, b, c1) = dp.coefficients();
    let mut m = CMatrix::zeros(n);
    for k in 0..n {
        m[(k, k)] = C64::new(-((k * k) as f64), 0.0);
        if k + 1 < n {
            m[(k, k + 1)] = b;
        }
        if k >= 1 {
            m[(k, k - 1)] = b;
        }
    }
    m[(0, 0)] = a;
    m[(1, 0)] = C64::new(0.0, c1) + b * 2.0;
    Ok(m)
}

/// Leading eigenvalue and its eigenvector.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DispersionResult {
    pub sigma_max: C64,
    /// `A_0..A_{n-1}`, unit 2-norm, phase fixed so that `A_0` is real and
    /// non-negative (or the first non-negligible entry is, if `A_0 ≈ 0`).
    pub coefficients: Vec<C64>,
    pub converged: bool,
    /// `‖Mv − σv‖₂ / ‖M‖_F`.
    pub residual: f64,
}

/// Eigenvalue of maximal real part.
pub fn leading_eigenvalue(m: &CMatrix) -> Result<C64> {
    Ok(leading_eigenpair(m)?.sigma_max)
}

/// Eigenvalue of maximal real part with its normalized eigenvector.
pub fn leading_eigenpair(m: &CMatrix) -> Result<DispersionResult> {
    if m.n() == 0 || m.n() > 256 {
        return Err(Error::Invalid("matrix order must be in 1..=256"));
    }
    let norm = m.norm();
    let s = schur(m, QR_ITERATIONS)?;
    let eigs = s.eigenvalues();
    let tie = 1e-12 * norm.max(1.0);
    let p = leading_index(&eigs, tie).ok_or(Error::Invalid("empty spectrum"))?;
    let sigma = eigs[p];
    let mut v = s.eigenvector(p);

    let mv = m.mul_vec(&v);
    let r = math::sqrt(mv.iter().zip(&v).map(|(x, y)| (x - sigma * y).norm_sqr()).sum());
    let residual = if norm > 0.0 { r / norm } else { r };
    if !(residual <= 1e-10) {
        return Err(Error::EigenNoConvergence {
            iterations: QR_ITERATIONS,
            residual,
        });
    }

    let pivot = v
        .iter()
        .position(|z| z.norm() > 1e-8)
        .unwrap_or(0);
    let z = v[pivot];
    if z.norm() > 0.0 {
        let phase = z.conj() / z.norm();
        v.iter_mut().for_each(|x| *x *= phase);
        v[pivot].im = 0.0;
    }
    Ok(DispersionResult {
        sigma_max: sigma,
        coefficients: v,
        converged: true,
        residual,
    })
}

/// Leading eigenpair of `M_n` for `dp`.
pub fn dispersion(dp: &DispersionParams) -> Result<DispersionResult> {
    leading_eigenpair(&build_truncated_matrix(dp)?)
}

/// `Re σ_max` at `(γ, Pe)` with all other entries from `base`.
pub fn growth_rate(gamma: f64, pe: f64, base: &DispersionParams) -> Result<f64> {
    Ok(leading_eigenvalue(&build_truncated_matrix(&base.with_gamma_pe(gamma, pe))?)?.re)
}

/// Same for the adiabatic closure matrix.
pub fn adiabatic_growth_rate(gamma: f64, pe: f64, base: &DispersionParams) -> Result<f64> {
    Ok(leading_eigenvalue(&build_adiabatic_matrix(&base.with_gamma_pe(gamma, pe))?)?.re)
}

/// Default γ bracket and tolerance for the threshold search.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
}

impl Default for Bracket {
    fn default() -> Self {
        Self {
            lo: 1.0,
            hi: 2000.0,
            tol: 1e-9,
        }
    }
}

/// Bisection for a sign change of `f` on the bracket.
pub fn bisect(mut f: impl FnMut(f64) -> Result<f64>, bracket: Bracket) -> Result<f64> {
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    if !(lo < hi) || !(bracket.tol > 0.0) {
        return Err(Error::Invalid("bracket needs lo < hi and tol > 0"));
    }
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if (f_lo > 0.0) == (f_hi > 0.0) {
        return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
    }
    let lo_positive = f_lo > 0.0;
    while hi - lo > bracket.tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `γ*(Pe)`: the γ at which `Re σ_max` of `M_n` changes sign.
pub fn instability_threshold_gamma(pe: f64, base: &DispersionParams, bracket: Bracket) -> Result<f64> {
    bisect(|g| growth_rate(g, pe, base), bracket)
}

/// Closed-form threshold of the `n = 2` truncation,
/// `γ* = (2/Pe)(ω² + α)(Pe²/2 + (1 + ω²D_T) D_T)`.
pub fn n2_threshold(pe: f64, base: &DispersionParams) -> Result<f64> {
    if !(pe > 0.0) {
        return Err(Error::NonPositive("Pe"));
    }
    let w2 = base.omega * base.omega;
    Ok(2.0 / pe * (w2 + base.alpha) * (0.5 * pe * pe + (1.0 + w2 * base.d_t) * base.d_t))
}

/// Threshold of the adiabatic closure, `γ = (2/Pe)(ω² + α)(Pe²/2 + D_T)`.
pub fn adiabatic_threshold(pe: f64, base: &DispersionParams) -> Result<f64> {
    if !(pe > 0.0) {
        return Err(Error::NonPositive("Pe"));
    }
    let w2 = base.omega * base.omega;
    Ok(2.0 / pe * (w2 + base.alpha) * (0.5 * pe * pe + base.d_t))
}

/// One point of an instability line.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinePoint {
    pub pe: f64,
    /// `None` if no sign change was found in the bracket.
    pub gamma_star: Option<f64>,
    pub n: usize,
}

/// `γ*` over a list of Péclet numbers.
pub fn trace_instability_line(pes: &[f64], base: &DispersionParams, bracket: Bracket) -> Result<Vec<LinePoint>> {
    let mut out = Vec::with_capacity(pes.len());
    for &pe in pes {
        let gamma_star = match instability_threshold_gamma(pe, base, bracket) {
            Ok(g) => Some(g),
            Err(Error::NoSignChange { .. }) => None,
            Err(e) => return Err(e),
        };
        out.push(LinePoint {
            pe,
            gamma_star,
            n: base.n,
        });
    }
    Ok(out)
}

/// `Re[Σ_k A_k cos(kθ) e^{iωx}]`.
pub fn eigenfunction_value(coefficients: &[C64], omega: f64, x: f64, theta: f64) -> f64 {
    let wave = C64::new(math::cos(omega * x), math::sin(omega * x));
    let amp = coefficients
        .iter()
        .enumerate()
        .fold(C64::new(0.0, 0.0), |acc, (k, a)| acc + a * math::cos(k as f64 * theta));
    (amp * wave).re
}

/// Eigenfunction sampled on `x_i = -1/2 + i/n_x`, `θ_k = -π + 2πk/n_θ`
/// (`i` fastest), scaled to `max|f̃| = 1`.
pub fn reconstruct_eigenfunction(dr: &DispersionResult, dp: &DispersionParams, nx: usize, nth: usize) -> Vec<f64> {
    let mut out = vec![0.0; nx * nth];
    for k in 0..nth {
        let th = -PI + TAU * k as f64 / nth as f64;
        for i in 0..nx {
            let x = -0.5 + i as f64 / nx as f64;
            out[i + nx * k] = eigenfunction_value(&dr.coefficients, dp.omega, x, th);
        }
    }
    let m = out.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if m > 0.0 {
        out.iter_mut().for_each(|v| *v /= m);
    }
    out
}
