//! Quasi-static pheromone field on the periodic spatial grid.
//!
//! Nodes sit at `x_i = i Δx`, `y_j = j Δy` and values are stored row-major with
//! `i` fastest (`index = i + nx * j`). The density `ρ_{i,j}` and `c_{i,j}` share
//! these points.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{matmul, RealFourierBasis};
use crate::math;
use crate::vec2::Vec2;

/// Periodic spatial lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grid2 {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl Grid2 {
    /// `nx × ny` lattice on the unit square.
    pub fn unit(nx: usize, ny: usize) -> Self {
        Self {
            nx,
            ny,
            lx: 1.0,
            ly: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 3 || self.ny < 3 {
            return Err(Error::Invalid("grid needs at least 3 points per axis"));
        }
        if !(self.lx > 0.0 && self.ly > 0.0) {
            return Err(Error::NonPositive("box length"));
        }
        Ok(())
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    #[inline]
    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.nx * j
    }

    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(i as f64 * self.dx(), j as f64 * self.dy())
    }

    fn check(&self, values: &[f64]) -> Result<()> {
        if values.len() == self.len() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: self.len(),
                found: values.len(),
            })
        }
    }
}

/// Nodal pheromone concentration.
#[derive(Debug, Clone, PartialEq)]
pub struct ChemicalField {
    pub grid: Grid2,
    pub values: Vec<f64>,
}

impl ChemicalField {
    pub fn new(grid: Grid2, values: Vec<f64>) -> Result<Self> {
        grid.check(&values)?;
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid2, f: impl Fn(Vec2) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(grid.node(i, j)));
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Bilinear interpolation at an arbitrary point, wrapped periodically.
    pub fn interpolate(&self, p: Vec2) -> f64 {
        let g = &self.grid;
        let u = math::wrap(p.x, g.lx) / g.dx();
        let v = math::wrap(p.y, g.ly) / g.dy();
        let (i0, j0) = (math::floor(u), math::floor(v));
        let (fx, fy) = (u - i0, v - j0);
        let i0 = (i0 as usize) % g.nx;
        let j0 = (j0 as usize) % g.ny;
        let i1 = (i0 + 1) % g.nx;
        let j1 = (j0 + 1) % g.ny;
        (1.0 - fy) * ((1.0 - fx) * self.at(i0, j0) + fx * self.at(i1, j0))
            + fy * ((1.0 - fx) * self.at(i0, j1) + fx * self.at(i1, j1))
    }

    /// Discrete 5-point Laplacian with periodic wrap.
    pub fn laplacian(&self) -> Vec<f64> {
        let g = &self.grid;
        let (ax, ay) = (1.0 / (g.dx() * g.dx()), 1.0 / (g.dy() * g.dy()));
        let mut out = vec![0.0; g.len()];
        for j in 0..g.ny {
            let (jm, jp) = ((j + g.ny - 1) % g.ny, (j + 1) % g.ny);
            for i in 0..g.nx {
                let (im, ip) = ((i + g.nx - 1) % g.nx, (i + 1) % g.nx);
                let c = self.at(i, j);
                out[g.index(i, j)] = ax * (self.at(ip, j) - 2.0 * c + self.at(im, j))
                    + ay * (self.at(i, jp) - 2.0 * c + self.at(i, jm));
            }
        }
        out
    }
}

/// Exact solver for `(α I - Δ_h) c = ρ`, `Δ_h` the periodic 5-point stencil.
///
/// The stencil is diagonal in the real Fourier basis of the lattice, so the
/// solve is two basis changes per axis and a pointwise division by
/// `α + (2 - 2cos(2πk_xΔx))/Δx² + (2 - 2cos(2πk_yΔy))/Δy²`.
#[derive(Debug, Clone)]
pub struct ScreenedPoisson {
    grid: Grid2,
    alpha: f64,
    bx: RealFourierBasis,
    by: RealFourierBasis,
    /// `1 / symbol`, laid out `[ky][kx]`.
    inverse: Vec<f64>,
    t1: Vec<f64>,
    t2: Vec<f64>,
}

impl ScreenedPoisson {
    pub fn new(grid: Grid2, alpha: f64) -> Result<Self> {
        grid.validate()?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::NonPositive("alpha"));
        }
        let bx = RealFourierBasis::new(grid.nx);
        let by = RealFourierBasis::new(grid.ny);
        let (ax, ay) = (1.0 / (grid.dx() * grid.dx()), 1.0 / (grid.dy() * grid.dy()));
        let mut inverse = vec![0.0; grid.len()];
        for ly in 0..grid.ny {
            for lx in 0..grid.nx {
                inverse[lx + grid.nx * ly] = 1.0 / (alpha + ax * bx.symbol[lx] + ay * by.symbol[ly]);
            }
        }
        Ok(Self {
            grid,
            alpha,
            bx,
            by,
            inverse,
            t1: vec![0.0; grid.len()],
            t2: vec![0.0; grid.len()],
        })
    }

    pub fn grid(&self) -> Grid2 {
        self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Solves into `out`; both slices have the grid's length.
    pub fn solve_into(&mut self, rho: &[f64], out: &mut [f64]) -> Result<()> {
        self.grid.check(rho)?;
        self.grid.check(out)?;
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        // values are [j][i]: rows over y, columns over x
        matmul(rho, &self.bx.q, ny, nx, nx, &mut self.t1);
        matmul(&self.by.qt, &self.t1, ny, ny, nx, &mut self.t2);
        for (v, s) in self.t2.iter_mut().zip(&self.inverse) {
            *v *= s;
        }
        matmul(&self.by.q, &self.t2, ny, ny, nx, &mut self.t1);
        matmul(&self.t1, &self.bx.qt, ny, nx, nx, out);
        Ok(())
    }

    pub fn solve(&mut self, rho: &[f64]) -> Result<ChemicalField> {
        let mut values = vec![0.0; self.grid.len()];
        self.solve_into(rho, &mut values)?;
        Ok(ChemicalField {
            grid: self.grid,
            values,
        })
    }
}

/// One-shot solve of `(α I - Δ_h) c = ρ`.
pub fn solve_chemical(rho: &[f64], grid: Grid2, alpha: f64) -> Result<ChemicalField> {
    ScreenedPoisson::new(grid, alpha)?.solve(rho)
}

/// Centred differences `((c_{i+1,j} - c_{i-1,j})/(2Δx), (c_{i,j+1} - c_{i,j-1})/(2Δy))`.
pub fn gradient_centered(c: &ChemicalField) -> (Vec<f64>, Vec<f64>) {
    let g = c.grid;
    let mut gx = vec![0.0; g.len()];
    let mut gy = vec![0.0; g.len()];
    gradient_centered_into(&c.values, g, &mut gx, &mut gy);
    (gx, gy)
}

pub(crate) fn gradient_centered_into(c: &[f64], g: Grid2, gx: &mut [f64], gy: &mut [f64]) {
    let (sx, sy) = (0.5 / g.dx(), 0.5 / g.dy());
    for j in 0..g.ny {
        let (jm, jp) = ((j + g.ny - 1) % g.ny, (j + 1) % g.ny);
        for i in 0..g.nx {
            let (im, ip) = ((i + g.nx - 1) % g.nx, (i + 1) % g.nx);
            let k = g.index(i, j);
            gx[k] = sx * (c[g.index(ip, j)] - c[g.index(im, j)]);
            gy[k] = sy * (c[g.index(i, jp)] - c[g.index(i, jm)]);
        }
    }
}

/// `c(x + λ e(θ))` by bilinear interpolation of the nodal values.
pub fn eval_shifted(c: &ChemicalField, x: Vec2, lambda: f64, theta: f64) -> f64 {
    c.interpolate(x + Vec2::unit(theta) * lambda)
}

/// Bilinear interpolation of a whole field at nodes shifted by a fixed vector.
///
/// For a constant shift the interpolation weights are the same at every node,
/// so the shifted field is a four-point stencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftStencil {
    di: usize,
    dj: usize,
    fx: f64,
    fy: f64,
}

impl ShiftStencil {
    pub fn new(grid: Grid2, shift: Vec2) -> Self {
        let u = math::wrap(shift.x, grid.lx) / grid.dx();
        let v = math::wrap(shift.y, grid.ly) / grid.dy();
        let (i0, j0) = (math::floor(u), math::floor(v));
        Self {
            di: (i0 as usize) % grid.nx,
            dj: (j0 as usize) % grid.ny,
            fx: u - i0,
            fy: v - j0,
        }
    }

    /// `out[i,j] = c(x_{i,j} + shift)`.
    pub fn apply(&self, grid: Grid2, c: &[f64], out: &mut [f64]) {
        let (nx, ny) = (grid.nx, grid.ny);
        let w00 = (1.0 - self.fx) * (1.0 - self.fy);
        let w10 = self.fx * (1.0 - self.fy);
        let w01 = (1.0 - self.fx) * self.fy;
        let w11 = self.fx * self.fy;
        for j in 0..ny {
            let r0 = nx * ((j + self.dj) % ny);
            let r1 = nx * ((j + self.dj + 1) % ny);
            for i in 0..nx {
                let i0 = (i + self.di) % nx;
                let i1 = (i0 + 1) % nx;
                out[i + nx * j] =
                    w00 * c[r0 + i0] + w10 * c[r0 + i1] + w01 * c[r1 + i0] + w11 * c[r1 + i1];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{PI, TAU};
    use proptest::prelude::*;

    fn field(g: Grid2, f: impl Fn(Vec2) -> f64) -> Vec<f64> {
        ChemicalField::from_fn(g, f).values
    }

    fn residual(c: &ChemicalField, rho: &[f64], alpha: f64) -> f64 {
        let lap = c.laplacian();
        c.values
            .iter()
            .zip(&lap)
            .zip(rho)
            .map(|((c, l), r)| (alpha * c - l - r).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn constant_density() {
        let g = Grid2::unit(16, 12);
        let c = solve_chemical(&vec![3.0; g.len()], g, 2.0).unwrap();
        for v in &c.values {
            assert!((v - 1.5).abs() < 1e-13);
        }
        let z = solve_chemical(&vec![0.0; g.len()], g, 2.0).unwrap();
        assert!(z.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn cosine_mode_amplitude() {
        let g = Grid2::unit(64, 64);
        let rho = field(g, |p| math::cos(TAU * p.x));
        let c = solve_chemical(&rho, g, 1.0).unwrap();
        let dx = g.dx();
        let amp = 1.0 / (1.0 + (2.0 - 2.0 * math::cos(TAU * dx)) / (dx * dx));
        for j in 0..g.ny {
            for i in 0..g.nx {
                let expect = amp * math::cos(TAU * g.node(i, j).x);
                assert!((c.at(i, j) - expect).abs() < 1e-13);
            }
        }
        let continuum = 1.0 / (1.0 + 4.0 * PI * PI);
        assert!((amp - continuum).abs() < 5e-5);
        assert!((continuum - 0.02471).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_alpha_and_shapes() {
        let g = Grid2::unit(8, 8);
        assert!(matches!(
            solve_chemical(&vec![0.0; 64], g, 0.0),
            Err(Error::NonPositive("alpha"))
        ));
        assert!(matches!(
            solve_chemical(&[0.0; 10], g, 1.0),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn second_order_convergence() {
        // c = sin(2πx) cos(4πy) solves αc - Δc = (α + 20π²) c.
        let alpha = 1.5;
        let exact = |p: Vec2| math::sin(TAU * p.x) * math::cos(2.0 * TAU * p.y);
        let mut errs = Vec::new();
        for n in [16, 32, 64] {
            let g = Grid2::unit(n, n);
            let rho = field(g, |p| (alpha + 20.0 * PI * PI) * exact(p));
            let c = solve_chemical(&rho, g, alpha).unwrap();
            let e = c
                .values
                .iter()
                .zip(field(g, exact))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            errs.push(e);
        }
        for w in errs.windows(2) {
            let rate = math::ln(w[0] / w[1]) / math::ln(2.0);
            assert!((rate - 2.0).abs() < 0.1, "rate {rate}");
        }
    }

    #[test]
    fn gradients() {
        let g = Grid2::unit(20, 10);
        let (gx, gy) = gradient_centered(&ChemicalField::from_fn(g, |_| 4.0));
        assert!(gx.iter().chain(&gy).all(|v| *v == 0.0));

        let (gx, _) = gradient_centered(&ChemicalField::from_fn(g, |p| p.x));
        for j in 0..g.ny {
            for i in 1..g.nx - 1 {
                assert!((gx[g.index(i, j)] - 1.0).abs() < 1e-12);
            }
        }

        let c = ChemicalField::from_fn(g, |p| math::sin(TAU * p.x));
        let (gx, _) = gradient_centered(&c);
        let dx = g.dx();
        for i in 0..g.nx {
            let x = g.node(i, 0).x;
            let expect = math::sin(TAU * dx) / dx * math::cos(TAU * x);
            assert!((gx[i] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn shifted_evaluation() {
        let g = Grid2::unit(8, 8);
        let c = ChemicalField::from_fn(g, |p| math::cos(TAU * p.x) + 2.0 * p.y);
        assert_eq!(eval_shifted(&c, g.node(3, 5), 0.0, 1.0), c.at(3, 5));

        let centre = g.node(2, 2) + Vec2::new(0.5 * g.dx(), 0.5 * g.dy());
        let mean = 0.25 * (c.at(2, 2) + c.at(3, 2) + c.at(2, 3) + c.at(3, 3));
        assert!((c.interpolate(centre) - mean).abs() < 1e-14);

        // shift across the boundary equals evaluating at the wrapped point
        let x = g.node(7, 7);
        let (lambda, theta) = (0.3, 0.7);
        let raw = x + Vec2::unit(theta) * lambda;
        let wrapped = Vec2::new(raw.x - 1.0, raw.y - 1.0);
        let manual = {
            let u = wrapped.x / g.dx();
            let v = wrapped.y / g.dy();
            let (i0, j0) = (u.floor() as usize, v.floor() as usize);
            let (fx, fy) = (u - i0 as f64, v - j0 as f64);
            (1.0 - fy) * ((1.0 - fx) * c.at(i0, j0) + fx * c.at(i0 + 1, j0))
                + fy * ((1.0 - fx) * c.at(i0, j0 + 1) + fx * c.at(i0 + 1, j0 + 1))
        };
        assert!((eval_shifted(&c, x, lambda, theta) - manual).abs() < 1e-14);
    }

    #[test]
    fn interpolation_is_continuous_across_cells() {
        let g = Grid2::unit(10, 10);
        let c = ChemicalField::from_fn(g, |p| math::sin(TAU * p.x) * math::cos(TAU * p.y));
        let eps = 1e-12;
        for i in 0..g.nx {
            let b = g.node(i, 0).x + 0.37 * g.dy();
            let p = Vec2::new(b, 0.33);
            let left = c.interpolate(Vec2::new(b - eps, 0.33));
            let right = c.interpolate(Vec2::new(b + eps, 0.33));
            assert!((left - right).abs() < 1e-9);
            let _ = p;
        }
        for i in 0..g.nx {
            let b = g.node(i, 0).x;
            let left = c.interpolate(Vec2::new(b - eps, 0.33));
            let right = c.interpolate(Vec2::new(b + eps, 0.33));
            assert!((left - right).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn stencil_residual_and_mean(seed in 0u64..1000) {
            let g = Grid2::unit(13, 9);
            let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            let rho: Vec<f64> = (0..g.len()).map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (s >> 11) as f64 / (1u64 << 53) as f64
            }).collect();
            let alpha = 0.7;
            let c = solve_chemical(&rho, g, alpha).unwrap();
            let norm = rho.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(residual(&c, &rho, alpha) <= 1e-10 * norm);
            let mc: f64 = c.values.iter().sum::<f64>() / g.len() as f64;
            let mr: f64 = rho.iter().sum::<f64>() / g.len() as f64;
            prop_assert!((alpha * mc - mr).abs() < 1e-13);
        }

        #[test]
        fn stencil_matches_pointwise_shift(lambda in 0.0..0.4f64, theta in 0.0..std::f64::consts::TAU) {
            let g = Grid2::unit(11, 7);
            let c = ChemicalField::from_fn(g, |p| math::sin(TAU * p.x) + math::cos(TAU * p.y) * p.x);
            let st = ShiftStencil::new(g, Vec2::unit(theta) * lambda);
            let mut out = vec![0.0; g.len()];
            st.apply(g, &c.values, &mut out);
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let direct = eval_shifted(&c, g.node(i, j), lambda, theta);
                    prop_assert!((out[g.index(i, j)] - direct).abs() < 1e-10);
                }
            }
        }
    }
}
