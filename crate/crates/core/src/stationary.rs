//! y-independent stationary states `f(x, θ)`, `c(x)` by alternating solves.
//!
//! ```text
//! 0 = ∂_x[D_T ∂_x f − Pe cos θ f] + ∂_θ[∂_θ f + γ sin θ c'(x + λ cos θ) f]
//! 0 = c'' − α c + ρ,      ρ = ∫ f dθ,      ∫∫ f dx dθ = 1
//! ```
//!
//! Finite volumes on the periodic `N_x × N_θ` grid (`x_i = iΔx`, `θ_k = kΔθ`)
//! with Scharfetter–Gummel fluxes, so the discrete operator is an M-matrix
//! generator and its null vector is positive. The singular f-system is closed
//! by pinning the largest entry of the previous iterate and renormalizing.
//! Unknowns are ordered by folding both periodic axes (`0, N−1, 1, N−2, …`),
//! which keeps the wrap-around couplings inside a band of half-width `2N_θ`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fv::F_STAR;
use crate::linalg::{matmul, BandLu, RealFourierBasis};
use crate::math::{self, TAU};
use crate::params::ScaledParams;

/// Default grid size along each axis.
pub const DEFAULT_N: usize = 64;

/// Grid sizes and iteration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StationaryConfig {
    pub nx: usize,
    pub nth: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for StationaryConfig {
    fn default() -> Self {
        Self { nx: DEFAULT_N, nth: DEFAULT_N, tol: 1e-9, max_iter: 500 }
    }
}

impl StationaryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nx < 3 || self.nth < 3 {
            return Err(Error::Invalid("stationary grid needs at least 3 cells per axis"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::NonPositive("tol"));
        }
        if self.max_iter == 0 {
            return Err(Error::NonPositive("max_iter"));
        }
        Ok(())
    }
}

/// `f[i + nx·k]` at `(x_i, θ_k)`, `c[i]` at `x_i`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StationaryState {
    pub nx: usize,
    pub nth: usize,
    pub f: Vec<f64>,
    pub c: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Residual after each outer iteration.
    pub history: Vec<f64>,
}

impl StationaryState {
    #[inline]
    pub fn dx(&self) -> f64 {
        1.0 / self.nx as f64
    }

    #[inline]
    pub fn dth(&self) -> f64 {
        TAU / self.nth as f64
    }

    #[inline]
    pub fn theta(&self, k: usize) -> f64 {
        k as f64 * self.dth()
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn mass(&self) -> f64 {
        self.f.iter().sum::<f64>() * self.dx() * self.dth()
    }

    /// `ρ_i = Σ_k f_{ik} Δθ`.
    pub fn density(&self) -> Vec<f64> {
        density(&self.f, self.nx, self.nth)
    }

    /// `g_k = Σ_i f_{ik} Δx`.
    pub fn angular_marginal(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.nth)
            .map(|k| self.f[k * self.nx..(k + 1) * self.nx].iter().sum::<f64>() * dx)
            .collect()
    }

    /// Homogeneous state on the given grid.
    pub fn homogeneous(nx: usize, nth: usize, alpha: f64) -> Self {
        Self {
            nx,
            nth,
            f: vec![F_STAR; nx * nth],
            c: vec![1.0 / alpha; nx],
            residual: 0.0,
            iterations: 0,
            converged: false,
            history: Vec::new(),
        }
    }
}

fn density(f: &[f64], nx: usize, nth: usize) -> Vec<f64> {
    let dth = TAU / nth as f64;
    let mut rho = vec![0.0; nx];
    for k in 0..nth {
        for (r, v) in rho.iter_mut().zip(&f[k * nx..(k + 1) * nx]) {
            *r += v * dth;
        }
    }
    rho
}

/// `z / (e^z − 1)`.
#[inline]
pub fn bernoulli(z: f64) -> f64 {
    if z.abs() < 1e-10 {
        1.0 - 0.5 * z
    } else {
        z / libm::expm1(z)
    }
}

/// Flux from `P` to `Q` across a face, `J = a f_P − b f_Q`, for drift `u`,
/// diffusion `d > 0` and spacing `h`.
#[inline]
pub fn sg_coefficients(u: f64, d: f64, h: f64) -> (f64, f64) {
    let z = u * h / d;
    let s = d / h;
    (s * bernoulli(-z), s * bernoulli(z))
}

/// `c'` sampled at an arbitrary `x` by linear interpolation of face differences.
fn derivative_at(c: &[f64], x: f64) -> f64 {
    let n = c.len();
    let h = 1.0 / n as f64;
    let g = |m: usize| (c[(m + 1) % n] - c[m]) / h;
    // face m sits at (m + ½)h
    let s = math::wrap(x / h - 0.5, n as f64);
    let m = math::floor(s) as usize % n;
    let w = s - math::floor(s);
    (1.0 - w) * g(m) + w * g((m + 1) % n)
}

/// Visits every face once as `(P, Q, a, b, h)` with `P`, `Q` flat indices
/// `i + nx·k`.
fn for_each_face(c: &[f64], nth: usize, p: &ScaledParams, mut visit: impl FnMut(usize, usize, f64, f64, f64)) {
    let nx = c.len();
    let dx = 1.0 / nx as f64;
    let dth = TAU / nth as f64;
    for k in 0..nth {
        let (a, b) = sg_coefficients(p.pe * math::cos(k as f64 * dth), p.d_t, dx);
        for i in 0..nx {
            visit(i + nx * k, (i + 1) % nx + nx * k, a, b, dx);
        }
    }
    for k in 0..nth {
        let th = (k as f64 + 0.5) * dth;
        let (s, co) = (math::sin(th), math::cos(th));
        for i in 0..nx {
            let u = if p.gamma == 0.0 {
                0.0
            } else {
                -p.gamma * s * derivative_at(c, i as f64 * dx + p.lambda * co)
            };
            let (a, b) = sg_coefficients(u, 1.0, dth);
            visit(i + nx * k, i + nx * ((k + 1) % nth), a, b, dth);
        }
    }
}

/// `0, n−1, 1, n−2, …`: position of each index in the folded order.
fn fold(n: usize) -> Vec<usize> {
    let mut pos = vec![0; n];
    for (m, slot) in (0..n).map(|m| if m % 2 == 0 { m / 2 } else { n - 1 - m / 2 }).enumerate() {
        pos[slot] = m;
    }
    pos
}

/// Solves the stationary Fokker–Planck problem for fixed `c`, pinning the
/// unknown at flat index `pin`. Result has unit mass.
pub fn solve_f(c: &[f64], nth: usize, p: &ScaledParams, pin: usize) -> Result<Vec<f64>> {
    let nx = c.len();
    let n = nx * nth;
    if pin >= n {
        return Err(Error::Invalid("pinned index outside grid"));
    }
    let (px, pk) = (fold(nx), fold(nth));
    let order = |idx: usize| pk[idx / nx] + nth * px[idx % nx];
    let bw = 2 * nth;
    let mut lu = BandLu::zeros(n, bw, bw);
    for_each_face(c, nth, p, |from, to, a, b, h| {
        let (u, v) = (order(from), order(to));
        lu.add(u, u, -a / h);
        lu.add(u, v, b / h);
        lu.add(v, u, a / h);
        lu.add(v, v, -b / h);
    });
    let r = order(pin);
    lu.set_unit_row(r);
    lu.factor().map_err(|_| Error::Singular)?;
    let mut rhs = vec![0.0; n];
    rhs[r] = 1.0;
    lu.solve(&mut rhs);
    let mut f: Vec<f64> = (0..n).map(|idx| rhs[order(idx)]).collect();
    let mass = f.iter().sum::<f64>() * (TAU / n as f64);
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::Singular);
    }
    for v in &mut f {
        *v /= mass;
    }
    Ok(f)
}

/// Periodic 1D screened Poisson `(α − D_h) c = ρ`, `D_h` the three-point Laplacian.
#[derive(Debug, Clone)]
pub struct ScreenedPoisson1d {
    basis: RealFourierBasis,
    inv: Vec<f64>,
}

impl ScreenedPoisson1d {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::NonPositive("alpha"));
        }
        let basis = RealFourierBasis::new(n);
        let h2 = 1.0 / (n * n) as f64;
        let inv = basis.symbol.iter().map(|s| 1.0 / (alpha + s / h2)).collect();
        Ok(Self { basis, inv })
    }

    pub fn solve(&self, rho: &[f64]) -> Vec<f64> {
        let n = rho.len();
        let mut hat = vec![0.0; n];
        matmul(&self.basis.qt, rho, n, n, 1, &mut hat);
        for (h, s) in hat.iter_mut().zip(&self.inv) {
            *h *= s;
        }
        let mut c = vec![0.0; n];
        matmul(&self.basis.q, &hat, n, n, 1, &mut c);
        c
    }
}

/// Residuals of the f-equation, the c-equation and the mass constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub f: f64,
    pub c: f64,
    pub mass: f64,
}

impl Residuals {
    pub fn total(&self) -> f64 {
        self.f.max(self.c).max(self.mass)
    }
}

/// ∞-norms of both discrete equations and the mass defect.
pub fn residuals(f: &[f64], c: &[f64], nth: usize, p: &ScaledParams) -> Residuals {
    let nx = c.len();
    let mut div = vec![0.0; f.len()];
    for_each_face(c, nth, p, |from, to, a, b, h| {
        let j = (a * f[from] - b * f[to]) / h;
        div[from] -= j;
        div[to] += j;
    });
    let rf = div.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rho = density(f, nx, nth);
    let h2 = (nx * nx) as f64;
    let rc = (0..nx).fold(0.0f64, |m, i| {
        let lap = (c[(i + 1) % nx] - 2.0 * c[i] + c[(i + nx - 1) % nx]) * h2;
        m.max((p.alpha * c[i] - lap - rho[i]).abs())
    });
    let mass = f.iter().sum::<f64>() * TAU / f.len() as f64;
    Residuals { f: rf, c: rc, mass: (mass - 1.0).abs() }
}

/// Total residual of a state.
pub fn stationary_residual(s: &StationaryState, p: &ScaledParams) -> f64 {
    residuals(&s.f, &s.c, s.nth, p).total()
}

/// `c₀(x) = 1 − cos(2πx)/(2π)`.
pub fn initial_chemical(nx: usize) -> Vec<f64> {
    (0..nx)
        .map(|i| 1.0 - math::cos(TAU * i as f64 / nx as f64) / TAU)
        .collect()
}

/// Alternating fixed-point iteration on the default grid from `c₀`.
pub fn solve_stationary(p: &ScaledParams, tol: f64, max_iter: usize) -> Result<StationaryState> {
    let cfg = StationaryConfig { tol, max_iter, ..StationaryConfig::default() };
    solve_stationary_from(p, &cfg, initial_chemical(cfg.nx))
}

/// Alternating fixed-point iteration from a given `c`. When `max_iter` runs out
/// the iterate with the smallest residual is returned with `converged = false`.
pub fn solve_stationary_from(p: &ScaledParams, cfg: &StationaryConfig, c0: Vec<f64>) -> Result<StationaryState> {
    let p = p.validate()?;
    cfg.validate()?;
    if c0.len() != cfg.nx {
        return Err(Error::ShapeMismatch { expected: cfg.nx, found: c0.len() });
    }
    let poisson = ScreenedPoisson1d::new(cfg.nx, p.alpha)?;
    let mut c = c0;
    let mut pin = 0;
    let mut history = Vec::new();
    let mut best: Option<StationaryState> = None;
    for it in 1..=cfg.max_iter {
        let f = solve_f(&c, cfg.nth, &p, pin)?;
        c = poisson.solve(&density(&f, cfg.nx, cfg.nth));
        let res = residuals(&f, &c, cfg.nth, &p).total();
        if !res.is_finite() {
            return Err(Error::NonFinite { step: it as u64, time: 0.0 });
        }
        history.push(res);
        pin = argmax(&f);
        if best.as_ref().is_none_or(|b| res <= b.residual) {
            best = Some(StationaryState {
                nx: cfg.nx,
                nth: cfg.nth,
                f,
                c: c.clone(),
                residual: res,
                iterations: it,
                converged: res <= cfg.tol,
                history: Vec::new(),
            });
        }
        if res <= cfg.tol {
            break;
        }
    }
    let mut out = best.expect("max_iter >= 1");
    out.iterations = history.len();
    out.history = history;
    Ok(out)
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(i, _)| i)
}

/// Indices of periodic local maxima of a 1D profile, largest first.
pub fn periodic_peaks(v: &[f64]) -> Vec<usize> {
    let n = v.len();
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&k| v[k] > v[(k + n - 1) % n] && v[k] >= v[(k + 1) % n])
        .collect();
    peaks.sort_by(|&a, &b| v[b].total_cmp(&v[a]));
    peaks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::PI;

    fn params(gamma: f64, pe: f64, lambda: f64) -> ScaledParams {
        ScaledParams { d_t: 0.1, pe, gamma, lambda, alpha: 1.0 }
    }

    fn small(nx: usize, nth: usize) -> StationaryConfig {
        StationaryConfig { nx, nth, tol: 1e-9, max_iter: 300 }
    }

    #[test]
    fn bernoulli_function() {
        assert_eq!(bernoulli(0.0), 1.0);
        for z in [-30.0, -1.0, -1e-6, 1e-6, 0.3, 5.0, 800.0] {
            // B(−z) − B(z) = z
            assert!((bernoulli(-z) - bernoulli(z) - z).abs() < 1e-12 * (1.0 + z.abs()));
        }
        assert_eq!(bernoulli(1000.0), 0.0);
    }

    #[test]
    fn fold_order_keeps_ring_neighbours_close() {
        for n in [3usize, 4, 7, 64] {
            let pos = fold(n);
            let mut seen = pos.clone();
            seen.sort();
            assert_eq!(seen, (0..n).collect::<Vec<_>>());
            for i in 0..n {
                assert!(pos[i].abs_diff(pos[(i + 1) % n]) <= 2);
            }
        }
    }

    #[test]
    fn homogeneous_state_has_zero_residual() {
        for p in [params(0.0, 5.0, 0.0), params(50.0, 5.0, 0.1)] {
            let s = StationaryState::homogeneous(16, 12, p.alpha);
            assert!(stationary_residual(&s, &p) <= 1e-12);
        }
    }

    #[test]
    fn residual_is_linear_in_small_perturbations() {
        let p = params(50.0, 5.0, 0.1);
        let base = StationaryState::homogeneous(16, 12, p.alpha);
        let r = |eps: f64| {
            let mut s = base.clone();
            for (idx, v) in s.f.iter_mut().enumerate() {
                let (i, k) = (idx % 16, idx / 16);
                *v += eps * math::cos(TAU * i as f64 / 16.0) * math::sin(TAU * k as f64 / 12.0);
            }
            stationary_residual(&s, &p)
        };
        let (a, b) = (r(1e-6), r(2e-6));
        assert!(a > 0.0);
        assert!((b / a - 2.0).abs() < 1e-3, "ratio {}", b / a);
    }

    #[test]
    fn zero_sensitivity_converges_in_one_iteration() {
        let p = params(0.0, 5.0, 0.0);
        let s = solve_stationary_from(&p, &small(24, 16), initial_chemical(24)).unwrap();
        assert!(s.converged);
        assert_eq!(s.iterations, 1);
        assert!(s.f.iter().all(|v| (v - F_STAR).abs() < 1e-12));
        assert!(s.c.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn small_sensitivity_returns_homogeneous_from_any_start() {
        let p = params(2.0, 1.0, 0.1);
        let c0: Vec<f64> = (0..20).map(|i| 1.0 + 0.3 * math::sin(2.0 * TAU * i as f64 / 20.0)).collect();
        let s = solve_stationary_from(&p, &small(20, 16), c0).unwrap();
        assert!(s.converged);
        assert!(s.f.iter().all(|v| (v - F_STAR).abs() < 1e-8));
    }

    #[test]
    fn f_solve_is_a_positive_null_vector() {
        let p = params(50.0, 5.0, 0.1);
        let c = initial_chemical(16);
        let f = solve_f(&c, 12, &p, 5).unwrap();
        assert!(f.iter().all(|&v| v > 0.0));
        let r = residuals(&f, &c, 12, &p);
        assert!(r.f < 1e-9 && r.mass < 1e-13, "{r:?}");
        // the pinned index does not change the normalized answer
        let g = solve_f(&c, 12, &p, 100).unwrap();
        assert!(f.iter().zip(&g).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn one_dimensional_poisson_matches_cosine_symbol() {
        let n = 32;
        let alpha = 2.0;
        let rho: Vec<f64> = (0..n).map(|i| 1.0 + math::cos(TAU * i as f64 / n as f64)).collect();
        let c = ScreenedPoisson1d::new(n, alpha).unwrap().solve(&rho);
        let sym = (2.0 - 2.0 * math::cos(TAU / n as f64)) * (n * n) as f64;
        for i in 0..n {
            let expect = 0.5 + math::cos(TAU * i as f64 / n as f64) / (alpha + sym);
            assert!((c[i] - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn peaks_on_a_ring() {
        let v = [0.0, 1.0, 0.0, 0.5, 3.0, 0.5];
        assert_eq!(periodic_peaks(&v), vec![4, 1]);
    }

    #[test]
    fn converged_state_is_a_fixed_point() {
        let p = params(315.0, 5.0, 0.0);
        let cfg = small(24, 24);
        let s = solve_stationary_from(&p, &cfg, initial_chemical(24)).unwrap();
        assert!(s.converged, "residual {}", s.residual);
        let again = solve_stationary_from(&p, &cfg, s.c.clone()).unwrap();
        assert!(again.iterations <= 2);
        assert!(s.f.iter().zip(&again.f).all(|(a, b)| (a - b).abs() < 1e-8));
        assert!((s.mass() - 1.0).abs() < 1e-12);
        let g = s.angular_marginal();
        let peaks = periodic_peaks(&g);
        let near = |k: usize, t: f64| (math::wrap_angle(s.theta(k) - t + PI) - PI).abs() < 1e-9;
        assert!(near(peaks[0], 0.0) || near(peaks[0], PI));
    }
    fn peak_thetas(s: &StationaryState) -> Vec<f64> {
        periodic_peaks(&s.angular_marginal()).into_iter().take(2).map(|k| s.theta(k)).collect()
    }

    #[test]
    fn below_threshold_relaxes_to_homogeneous() {
        // γ = 50 is below the linear threshold at D_T = 0.1, Pe = 5
        let p = params(50.0, 5.0, 0.1);
        let s = solve_stationary_from(&p, &small(24, 24), initial_chemical(24)).unwrap();
        assert!(s.converged);
        assert!(s.f.iter().all(|v| (v - F_STAR).abs() < 1e-7));
    }

    #[test]
    fn above_threshold_spot_and_lane() {
        let cfg = small(32, 32);
        let spot = solve_stationary_from(&params(315.0, 5.0, 0.0), &cfg, initial_chemical(32)).unwrap();
        assert!(spot.converged, "residual {}", spot.residual);
        assert!(spot.f.iter().all(|&v| v >= 0.0));
        let mut t = peak_thetas(&spot);
        t.sort_by(f64::total_cmp);
        assert!(t[0].abs() < 1e-12 && (t[1] - PI).abs() < 1e-12, "{t:?}");

        let lane = solve_stationary_from(&params(315.0, 5.0, 0.1), &cfg, initial_chemical(32)).unwrap();
        assert!(lane.converged, "residual {}", lane.residual);
        let mut t = peak_thetas(&lane);
        t.sort_by(f64::total_cmp);
        assert!((t[0] - PI / 2.0).abs() <= PI / 8.0 && (t[1] - 1.5 * PI).abs() <= PI / 8.0, "{t:?}");
    }
}
