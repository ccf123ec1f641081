//! Doubly periodic grids, real 2D fields, and Fourier spectral operators.
//!
//! Everything downstream (conserved integrals, the pseudo-spectral solver,
//! topological charges) works on uniform samples of `u(x, y)` over the box
//! `[0, Lx) × [0, Ly)` with periodic continuation. Spectral differentiation
//! multiplies Fourier coefficients by `(i k)^n` with the standard signed
//! wavenumbers `k = 2πn/L`; the antiderivative `∂ₓ⁻¹` divides by `i kₓ` and
//! fixes the gauge by zeroing the `kₓ = 0` column (zero-mean antiderivative
//! per `y`-row). This periodic gauge is distinct from the half-line gauge
//! used in the closed-form travelling-wave analysis (`∂ₓ⁻¹u_y = μU` there);
//! the two are never mixed.
//!
//! Quadrature on a uniform periodic grid is the rectangle rule, which is
//! spectrally accurate for smooth periodic integrands.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::{Error, Result};

pub type C64 = Complex<f64>;

/// Uniform doubly periodic grid on `[0, Lx) × [0, Ly)`.
///
/// `nx`, `ny` must be powers of two (radix-2 transforms, clean dealias
/// cutoffs) and at least 8; production solver runs use ≥ 32 per axis.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if !nx.is_power_of_two() || !ny.is_power_of_two() || nx < 8 || ny < 8 {
            return Err(Error::InvalidParams(format!(
                "grid sizes must be powers of two >= 8, got {nx} x {ny}"
            )));
        }
        if !(lx > 0.0) || !(ly > 0.0) {
            return Err(Error::InvalidParams(format!(
                "box lengths must be positive, got {lx} x {ly}"
            )));
        }
        Ok(Grid2D { nx, ny, lx, ly })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.dx() * i as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        self.dy() * j as f64
    }

    /// Signed wavenumber for column index `i` (x-direction).
    pub fn kx(&self, i: usize) -> f64 {
        let n = self.nx as i64;
        let s = if (i as i64) <= n / 2 { i as i64 } else { i as i64 - n };
        std::f64::consts::TAU / self.lx * s as f64
    }

    /// Signed wavenumber for row index `j` (y-direction).
    pub fn ky(&self, j: usize) -> f64 {
        let n = self.ny as i64;
        let s = if (j as i64) <= n / 2 { j as i64 } else { j as i64 - n };
        std::f64::consts::TAU / self.ly * s as f64
    }

    /// Largest |kₓ| on the grid (at the Nyquist index).
    pub fn kx_max(&self) -> f64 {
        std::f64::consts::TAU / self.lx * (self.nx / 2) as f64
    }
}

/// Real scalar field sampled on a [`Grid2D`]; `data[j * nx + i]` holds the
/// value at `(x_i, y_j)` (x fastest).
#[derive(Debug, Clone)]
pub struct Field2D {
    pub grid: Grid2D,
    pub data: Vec<f64>,
}

impl Field2D {
    pub fn zeros(grid: Grid2D) -> Self {
        Field2D {
            grid,
            data: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            let y = grid.y(j);
            for i in 0..grid.nx {
                data.push(f(grid.x(i), y));
            }
        }
        Field2D { grid, data }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.grid.nx + i]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[j * self.grid.nx + i]
    }

    /// ∫∫ f dx dy by the rectangle rule (spectrally accurate, periodic).
    pub fn integral(&self) -> f64 {
        self.data.iter().sum::<f64>() * self.grid.dx() * self.grid.dy()
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.grid.len() as f64
    }

    /// L² norm, `sqrt(∫∫ f² dx dy)`.
    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() * self.grid.dx() * self.grid.dy()).sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest |x-mean| over the y-rows; the nonlocal operators require
    /// this to vanish.
    pub fn max_row_mean(&self) -> f64 {
        let nx = self.grid.nx;
        let mut worst = 0.0f64;
        for j in 0..self.grid.ny {
            let row = &self.data[j * nx..(j + 1) * nx];
            let m = row.iter().sum::<f64>() / nx as f64;
            worst = worst.max(m.abs());
        }
        worst
    }

    /// Subtract the x-mean of every y-row (projection onto the zero-mean
    /// subspace required by `∂ₓ⁻¹`); returns the largest |mean| removed.
    pub fn project_zero_row_mean(&mut self) -> f64 {
        let nx = self.grid.nx;
        let mut worst = 0.0f64;
        for j in 0..self.grid.ny {
            let row = &mut self.data[j * nx..(j + 1) * nx];
            let m = row.iter().sum::<f64>() / nx as f64;
            worst = worst.max(m.abs());
            for v in row.iter_mut() {
                *v -= m;
            }
        }
        worst
    }

    /// Pointwise map.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field2D {
        Field2D {
            grid: self.grid,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// x-reflection `f(x, y) → f(-x, y)` on the periodic grid (index 0 is a
    /// fixed point); used by the time-reversal symmetry check.
    pub fn reflect_x(&self) -> Field2D {
        let nx = self.grid.nx;
        let mut out = Field2D::zeros(self.grid);
        for j in 0..self.grid.ny {
            for i in 0..nx {
                let ir = (nx - i) % nx;
                out.data[j * nx + ir] = self.data[j * nx + i];
            }
        }
        out
    }
}

/// Cached FFT plans plus the spectral operators for one grid.
pub struct Spectral {
    pub grid: Grid2D,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl Spectral {
    pub fn new(grid: Grid2D) -> Self {
        let mut planner = FftPlanner::new();
        Spectral {
            grid,
            fwd_x: planner.plan_fft_forward(grid.nx),
            inv_x: planner.plan_fft_inverse(grid.nx),
            fwd_y: planner.plan_fft_forward(grid.ny),
            inv_y: planner.plan_fft_inverse(grid.ny),
        }
    }

    fn fft_rows(&self, buf: &mut [C64], inverse: bool) {
        let plan = if inverse { &self.inv_x } else { &self.fwd_x };
        for row in buf.chunks_exact_mut(self.grid.nx) {
            plan.process(row);
        }
    }

    fn fft_cols(&self, buf: &mut [C64], inverse: bool) {
        let plan = if inverse { &self.inv_y } else { &self.fwd_y };
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut col = vec![C64::new(0.0, 0.0); ny];
        for i in 0..nx {
            for j in 0..ny {
                col[j] = buf[j * nx + i];
            }
            plan.process(&mut col);
            for j in 0..ny {
                buf[j * nx + i] = col[j];
            }
        }
    }

    /// Forward 2D transform (unnormalized).
    pub fn forward(&self, field: &Field2D) -> Vec<C64> {
        assert_eq!(field.grid, self.grid, "grid mismatch");
        let mut buf: Vec<C64> = field.data.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.fft_rows(&mut buf, false);
        self.fft_cols(&mut buf, false);
        buf
    }

    /// Inverse 2D transform with 1/(nx·ny) normalization; returns the real
    /// part (the imaginary part of a Hermitian spectrum is round-off).
    pub fn inverse(&self, spec: &[C64]) -> Field2D {
        let mut buf = spec.to_vec();
        self.fft_rows(&mut buf, true);
        self.fft_cols(&mut buf, true);
        let norm = 1.0 / self.grid.len() as f64;
        Field2D {
            grid: self.grid,
            data: buf.iter().map(|c| c.re * norm).collect(),
        }
    }

    /// Multiply in place by `(i kₓ)^order`. Odd orders zero the Nyquist
    /// column (its sign is ambiguous for real data).
    pub fn deriv_x(&self, spec: &mut [C64], order: u32) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        for j in 0..ny {
            for i in 0..nx {
                let factor = if order % 2 == 1 && i == nx / 2 {
                    C64::new(0.0, 0.0)
                } else {
                    C64::new(0.0, self.grid.kx(i)).powu(order)
                };
                spec[j * nx + i] *= factor;
            }
        }
    }

    /// Multiply in place by `(i k_y)^order`; odd orders zero the Nyquist row.
    pub fn deriv_y(&self, spec: &mut [C64], order: u32) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        for j in 0..ny {
            let factor = if order % 2 == 1 && j == ny / 2 {
                C64::new(0.0, 0.0)
            } else {
                C64::new(0.0, self.grid.ky(j)).powu(order)
            };
            for i in 0..nx {
                spec[j * nx + i] *= factor;
            }
        }
    }

    /// Zero-mean antiderivative `∂ₓ⁻¹`: divide by `i kₓ`, zeroing the
    /// `kₓ = 0` column (the gauge choice) and the Nyquist column.
    pub fn inv_deriv_x(&self, spec: &mut [C64]) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        for j in 0..ny {
            for i in 0..nx {
                let e = &mut spec[j * nx + i];
                if i == 0 || i == nx / 2 {
                    *e = C64::new(0.0, 0.0);
                } else {
                    *e /= C64::new(0.0, self.grid.kx(i));
                }
            }
        }
    }

    /// Zero every mode with `|n_x| > fraction·(nx/2)` or
    /// `|n_y| > fraction·(ny/2)` (sharp truncation dealiasing).
    pub fn dealias(&self, spec: &mut [C64], fraction: f64) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let cut_x = (fraction * (nx / 2) as f64).floor() as i64;
        let cut_y = (fraction * (ny / 2) as f64).floor() as i64;
        for j in 0..ny {
            let sj = if (j as i64) <= ny as i64 / 2 {
                j as i64
            } else {
                j as i64 - ny as i64
            };
            for i in 0..nx {
                let si = if (i as i64) <= nx as i64 / 2 {
                    i as i64
                } else {
                    i as i64 - nx as i64
                };
                if si.abs() > cut_x || sj.abs() > cut_y {
                    spec[j * nx + i] = C64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Convenience: n-th x-derivative in physical space.
    pub fn dx_field(&self, field: &Field2D, order: u32) -> Field2D {
        let mut spec = self.forward(field);
        self.deriv_x(&mut spec, order);
        self.inverse(&spec)
    }

    /// Convenience: n-th y-derivative in physical space.
    pub fn dy_field(&self, field: &Field2D, order: u32) -> Field2D {
        let mut spec = self.forward(field);
        self.deriv_y(&mut spec, order);
        self.inverse(&spec)
    }

    /// Convenience: zero-mean antiderivative in physical space. Errors if
    /// the input has a nonzero x-mean on some row (the operator would
    /// silently discard it).
    pub fn inv_dx_field(&self, field: &Field2D) -> Result<Field2D> {
        let worst = field.max_row_mean();
        if worst > 1e-10 * (1.0 + field.linf_norm()) {
            return Err(Error::InvalidParams(format!(
                "nonlocal operator fed a field with nonzero x-mean (max row mean {worst:.3e})"
            )));
        }
        let mut spec = self.forward(field);
        self.inv_deriv_x(&mut spec);
        Ok(self.inverse(&spec))
    }

    /// `∂ₓ⁻¹ ∂_y` in physical space (the KP nonlocal term).
    pub fn inv_dx_dy_field(&self, field: &Field2D) -> Result<Field2D> {
        let worst = field.max_row_mean();
        if worst > 1e-10 * (1.0 + field.linf_norm()) {
            return Err(Error::InvalidParams(format!(
                "nonlocal operator fed a field with nonzero x-mean (max row mean {worst:.3e})"
            )));
        }
        let mut spec = self.forward(field);
        self.deriv_y(&mut spec, 1);
        self.inv_deriv_x(&mut spec);
        Ok(self.inverse(&spec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn grid() -> Grid2D {
        Grid2D::new(64, 32, 2.0 * std::f64::consts::PI, 4.0).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid2D::new(48, 32, 1.0, 1.0).is_err()); // not a power of two
        assert!(Grid2D::new(4, 32, 1.0, 1.0).is_err()); // too small
        assert!(Grid2D::new(32, 32, -1.0, 1.0).is_err());
        assert!(Grid2D::new(32, 32, 1.0, 1.0).is_ok());
    }

    #[test]
    fn round_trip_is_identity() {
        let g = grid();
        let sp = Spectral::new(g);
        let f = Field2D::from_fn(g, |x, y| (x.sin() + (TAU * y / g.ly).cos()).exp() * 0.3);
        let back = sp.inverse(&sp.forward(&f));
        for (a, b) in f.data.iter().zip(back.data.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_derivatives_are_exact_on_modes() {
        let g = grid();
        let sp = Spectral::new(g);
        let ky = TAU / g.ly;
        let f = Field2D::from_fn(g, |x, y| (3.0 * x).sin() * (2.0 * ky * y).cos());
        let fx = sp.dx_field(&f, 1);
        let fy = sp.dy_field(&f, 1);
        let fxxx = sp.dx_field(&f, 3);
        for j in 0..g.ny {
            for i in 0..g.nx {
                let (x, y) = (g.x(i), g.y(j));
                let ex = 3.0 * (3.0 * x).cos() * (2.0 * ky * y).cos();
                let ey = -2.0 * ky * (3.0 * x).sin() * (2.0 * ky * y).sin();
                let exxx = -27.0 * (3.0 * x).cos() * (2.0 * ky * y).cos();
                assert!((fx.at(i, j) - ex).abs() < 1e-10);
                assert!((fy.at(i, j) - ey).abs() < 1e-10);
                assert!((fxxx.at(i, j) - exxx).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn antiderivative_is_zero_mean_inverse() {
        let g = grid();
        let sp = Spectral::new(g);
        let f = Field2D::from_fn(g, |x, _| (2.0 * x).sin() + 0.5 * (3.0 * x).cos());
        let w = sp.inv_dx_field(&f).unwrap();
        // d/dx of the antiderivative recovers f
        let back = sp.dx_field(&w, 1);
        for (a, b) in f.data.iter().zip(back.data.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
        // and the antiderivative has zero row means (the gauge)
        assert!(w.max_row_mean() < 1e-12);
    }

    #[test]
    fn nonlocal_rejects_nonzero_row_mean() {
        let g = grid();
        let sp = Spectral::new(g);
        let f = Field2D::from_fn(g, |x, _| 1.0 + x.sin());
        assert!(sp.inv_dx_field(&f).is_err());
    }

    #[test]
    fn dealias_zeroes_top_modes_only() {
        let g = grid();
        let sp = Spectral::new(g);
        // one low mode and one mode above the 2/3 cutoff (|n| = 28 > 21)
        let f = Field2D::from_fn(g, |x, _| (2.0 * x).sin() + (28.0 * x).sin());
        let mut spec = sp.forward(&f);
        sp.dealias(&mut spec, 2.0 / 3.0);
        let filtered = sp.inverse(&spec);
        for j in 0..g.ny {
            for i in 0..g.nx {
                let expect = (2.0 * g.x(i)).sin();
                assert!((filtered.at(i, j) - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn quadrature_values() {
        let g = Grid2D::new(64, 64, 1.0, 1.0).unwrap();
        let u = Field2D::from_fn(g, |x, _| (TAU * x).sin());
        // ½∫ sin² over the unit box = 1/4
        let p = 0.5 * u.map(|v| v * v).integral();
        assert!((p - 0.25).abs() < 1e-14);
        assert!(u.integral().abs() < 1e-13);
    }

    #[test]
    fn quadrature_is_spectrally_accurate() {
        // smooth periodic integrand: error should collapse to round-off
        // already at modest resolution (ratio >> 10 per doubling until then)
        let exact = {
            // ∫₀^1 exp(sin 2πx) dx = I₀(1) (modified Bessel); compute by a
            // very fine reference grid instead of a special function.
            let g = Grid2D::new(4096, 8, 1.0, 1.0).unwrap();
            Field2D::from_fn(g, |x, _| (TAU * x).sin().exp()).integral()
        };
        let mut errs = Vec::new();
        for n in [8usize, 16, 32] {
            let g = Grid2D::new(n, 8, 1.0, 1.0).unwrap();
            let v = Field2D::from_fn(g, |x, _| (TAU * x).sin().exp()).integral();
            errs.push((v - exact).abs());
        }
        assert!(errs[1] < errs[0] / 10.0 || errs[1] < 1e-13);
        assert!(errs[2] < 1e-13);
    }

    #[test]
    fn reflection_is_an_involution() {
        let g = grid();
        let f = Field2D::from_fn(g, |x, y| (x + 0.3).sin() * (TAU * y / g.ly).cos());
        let twice = f.reflect_x().reflect_x();
        for (a, b) in f.data.iter().zip(twice.data.iter()) {
            assert_eq!(a, b);
        }
    }
}
