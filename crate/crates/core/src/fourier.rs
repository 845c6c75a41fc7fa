//! Quadrature Fourier sums between a spectral grid and its dual time lattice,
//! and circulant matrices diagonalized by them.
//!
//! For a grid of `n` points with step `dnu` and time step `eps = 1 / (n dnu)`,
//! frequency index `q` and time index `j` both run over `-m..=m`, `m = (n-1)/2`,
//! and `nu_q t_j = q j / n`. Every kernel below is periodic in `j` with period
//! `n`, which is what makes the circulant closure exact.

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::spectra::SpectralGrid;

/// Twiddles `exp(-2 pi i p / n)` for `p = 0..n`, with entries `p` and `n - p`
/// exact complex conjugates of each other.
#[derive(Debug, Clone)]
pub struct PhaseTable {
    table: Vec<Complex64>,
}

impl PhaseTable {
    pub fn new(n: usize) -> Self {
        let mut table = vec![Complex64::new(1.0, 0.0); n];
        for p in 1..=n / 2 {
            let w = Complex64::from_polar(1.0, -TAU * p as f64 / n as f64);
            table[p] = w;
            table[n - p] = w.conj();
        }
        Self { table }
    }

    /// `exp(-2 pi i q j / n)`.
    pub fn neg(&self, q: i64, j: i64) -> Complex64 {
        let n = self.table.len() as i64;
        self.table[(q * j).rem_euclid(n) as usize]
    }

    /// `exp(+2 pi i q j / n)`.
    pub fn pos(&self, q: i64, j: i64) -> Complex64 {
        self.neg(-q, j)
    }
}

/// Maps a signed index to its slot in a length-`n` ring.
pub(crate) fn ring(j: i64, n: usize) -> usize {
    j.rem_euclid(n as i64) as usize
}

/// Samples of a function on the time lattice `t_j = eps * j`, `j = -m..=m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeKernel {
    eps: f64,
    values: Vec<Complex64>,
}

impl TimeKernel {
    pub fn new(eps: f64, values: Vec<Complex64>) -> Self {
        debug_assert!(values.len() % 2 == 1);
        Self { eps, values }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn half_width(&self) -> i64 {
        (self.values.len() / 2) as i64
    }

    /// Values in order `j = -m..=m`.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `(j, t_j)` pairs in storage order.
    pub fn times(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let m = self.half_width();
        (-m..=m).map(move |j| (j, self.eps * j as f64))
    }

    /// Value at time index `j`, taken periodically.
    pub fn at(&self, j: i64) -> Complex64 {
        let n = self.values.len() as i64;
        let m = self.half_width();
        self.values[((j + m).rem_euclid(n)) as usize]
    }

    /// `j -> -j`.
    pub fn reflected(&self) -> Self {
        Self::new(self.eps, self.values.iter().rev().cloned().collect())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.eps, self.values.iter().map(|v| v.conj()).collect())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.eps, self.values.iter().map(|v| v * s).collect())
    }

    /// Cyclic convolution `(a * b)_d = sum_j a_{d-j} b_j`, without quadrature weight.
    pub fn cyclic_convolution(&self, other: &TimeKernel) -> TimeKernel {
        let m = self.half_width();
        let values = (-m..=m)
            .map(|d| (-m..=m).map(|j| self.at(d - j) * other.at(j)).sum())
            .collect();
        TimeKernel::new(self.eps, values)
    }

    /// Time-domain convolution integral, `eps * sum_j a(t_d - t_j) b(t_j)`.
    pub fn convolve(&self, other: &TimeKernel) -> TimeKernel {
        self.cyclic_convolution(other).scaled(self.eps)
    }

    pub fn max_abs_diff(&self, other: &TimeKernel) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }
}

/// FFT-backed transforms between per-point spectra on a grid and time kernels.
pub struct Transformer {
    n: usize,
    step: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Transformer {
    pub fn new(grid: &SpectralGrid) -> Self {
        let n = grid.len();
        let mut planner = FftPlanner::new();
        Self {
            n,
            step: grid.step(),
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    fn half(&self) -> i64 {
        (self.n / 2) as i64
    }

    /// `sum_q g_q exp(+2 pi i q j / n)` for `j = -m..=m`, with `g` in grid order.
    pub fn synthesize(&self, g: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(g.len(), self.n);
        let m = self.half();
        let mut buf = vec![Complex64::default(); self.n];
        for (k, v) in g.iter().enumerate() {
            buf[ring(k as i64 - m, self.n)] = *v;
        }
        self.inverse.process(&mut buf);
        (-m..=m).map(|j| buf[ring(j, self.n)]).collect()
    }

    /// `sum_j phi_j exp(-2 pi i q j / n)` in grid order, with `phi` indexed `j = -m..=m`.
    pub fn analyze(&self, phi: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(phi.len(), self.n);
        let m = self.half();
        let mut buf = vec![Complex64::default(); self.n];
        for (i, v) in phi.iter().enumerate() {
            buf[ring(i as i64 - m, self.n)] = *v;
        }
        self.forward.process(&mut buf);
        (-m..=m).map(|q| buf[ring(q, self.n)]).collect()
    }

    /// Continuous-time kernel `F[g](t_j) = dnu * sum_k g(nu_k) exp(2 pi i nu_k t_j)`.
    pub fn kernel(&self, g: &[Complex64], eps: f64) -> TimeKernel {
        let values = self
            .synthesize(g)
            .into_iter()
            .map(|v| v * self.step)
            .collect();
        TimeKernel::new(eps, values)
    }

    pub fn kernel_real(&self, g: &[f64], eps: f64) -> TimeKernel {
        let g: Vec<Complex64> = g.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.kernel(&g, eps)
    }

    /// Quadrature inverse of [`Transformer::kernel`]:
    /// `D[phi](nu_k) = eps * sum_j phi(t_j) exp(-2 pi i nu_k t_j)`.
    pub fn spectrum(&self, phi: &TimeKernel) -> Vec<Complex64> {
        let eps = phi.eps();
        self.analyze(phi.values())
            .into_iter()
            .map(|v| v * eps)
            .collect()
    }
}

/// Circulant matrix `C_ij = c_{(i - j) mod n}`, stored by its first column and
/// its eigenvalues. The eigenvector for frequency index `q` is
/// `v_i = n^(-1/2) exp(2 pi i q i / n)` with eigenvalue `sum_d c_d exp(-2 pi i q d / n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Circulant {
    column: Vec<Complex64>,
    eigenvalues: Vec<Complex64>,
}

impl Circulant {
    /// From the first column, `column[d] = C_{d0}`, `d = 0..n`.
    pub fn from_column(column: Vec<Complex64>) -> Self {
        let n = column.len();
        let mut buf = column.clone();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let eigenvalues = Self::by_frequency(&buf);
        Self {
            column,
            eigenvalues,
        }
    }

    /// From eigenvalues listed in grid order (`q = -m..=m`).
    pub fn from_eigenvalues(eigenvalues: Vec<Complex64>) -> Self {
        let n = eigenvalues.len();
        let m = (n / 2) as i64;
        let mut buf = vec![Complex64::default(); n];
        for (k, v) in eigenvalues.iter().enumerate() {
            buf[ring(k as i64 - m, n)] = *v;
        }
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        let column = buf.into_iter().map(|v| v * scale).collect();
        Self {
            column,
            eigenvalues,
        }
    }

    pub fn from_real_eigenvalues(eigenvalues: &[f64]) -> Self {
        Self::from_eigenvalues(
            eigenvalues
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect(),
        )
    }

    fn by_frequency(fft_out: &[Complex64]) -> Vec<Complex64> {
        let n = fft_out.len();
        let m = (n / 2) as i64;
        (-m..=m).map(|q| fft_out[ring(q, n)]).collect()
    }

    pub fn dim(&self) -> usize {
        self.column.len()
    }

    /// `C_{d0}` for `d = 0..n`.
    pub fn column(&self) -> &[Complex64] {
        &self.column
    }

    /// Eigenvalues in grid order.
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.column[ring(i as i64 - j as i64, self.dim())]
    }

    /// The first column as a kernel indexed by `j = -m..=m`.
    pub fn kernel(&self, eps: f64) -> TimeKernel {
        let n = self.dim() as i64;
        let m = n / 2;
        TimeKernel::new(
            eps,
            (-m..=m).map(|j| self.column[ring(j, self.dim())]).collect(),
        )
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.entry(i, j))
    }

    /// Entrywise conjugate, itself circulant with eigenvalues reflected in `q`.
    pub fn conj(&self) -> Self {
        Self {
            column: self.column.iter().map(|v| v.conj()).collect(),
            eigenvalues: self.eigenvalues.iter().rev().map(|v| v.conj()).collect(),
        }
    }

    /// Applies `f` to the eigenvalues.
    pub fn map_spectrum(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_eigenvalues(self.eigenvalues.iter().map(|&v| f(v)).collect())
    }
}
