//! Finite canonical realization of a stationary noise and its time reversal.
//!
//! The covariance of the sampled process `x_j = eps^(1/2) x(t_j)` is the
//! circulant matrix `K_ij = eps * k(t_{i-j})`, indices taken modulo `n`. With
//! the grid/time duality `n * dnu * eps = 1` the eigenvalues of `K` are exactly
//! the sampled densities `kappa(nu_k)`, and `K`, `conj(K)` share the Fourier
//! eigenbasis. Every derived matrix (`X = K^(1/2)`, `G = (K conj(K))^(1/2)`,
//! `L = conj(K) K^(-1)` and its square roots) is a circulant with a mapped
//! spectrum.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fourier::{Circulant, PhaseTable, TimeKernel, Transformer};
use crate::spectra::{SpectralDensityPair, SpectralGrid, ZERO_SNAP};

/// Relative eigenvalue floor below which `K` is not positive semidefinite.
pub const PSD_FLOOR: f64 = 1e-10;
/// Relative eigenvalue floor below which `K` is treated as singular.
pub const INVERTIBILITY_FLOOR: f64 = 1e-10;
/// Relative tolerance of the Hermitian symmetry check on correlation sequences.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Sampled correlation kernels of a noise, its reversal and their cross
/// correlation, on `t_j = eps * j`, `j = -m..=m`.
#[derive(Debug, Clone)]
pub struct CorrelationSequence {
    grid: SpectralGrid,
    eps: f64,
    values: TimeKernel,
    reversed: TimeKernel,
    cross: TimeKernel,
}

impl CorrelationSequence {
    /// `k(t_j) = dnu * sum_k kappa(nu_k) exp(2 pi i nu_k t_j)`, likewise for the
    /// cross correlation `r` with `gamma`; `k_rev(t) = k(-t)`.
    pub fn from_pair(pair: &SpectralDensityPair, eps: f64) -> Result<Self> {
        let grid = pair.grid();
        grid.check_eps(eps)?;
        let t = Transformer::new(grid);
        let values = t.kernel_real(pair.kappa(), eps);
        let cross = t.kernel_real(pair.gamma(), eps);
        let reversed = values.reflected();
        Ok(Self {
            grid: grid.clone(),
            eps,
            values,
            reversed,
            cross,
        })
    }

    /// Wraps a user-supplied kernel `k_j`, `j = -m..=m`, checking Hermitian symmetry.
    pub fn from_values(grid: &SpectralGrid, eps: f64, values: Vec<Complex64>) -> Result<Self> {
        grid.check_eps(eps)?;
        if values.len() != grid.len() {
            return invalid(format!(
                "expected {} correlation samples, got {}",
                grid.len(),
                values.len()
            ));
        }
        let values = TimeKernel::new(eps, values);
        let scale = values.max_abs().max(f64::MIN_POSITIVE);
        let asym = values.max_abs_diff(&values.reflected().conj());
        if asym > HERMITIAN_TOL * scale {
            return invalid(format!(
                "correlation sequence is not Hermitian: max |k(-j) - conj k(j)| = {asym:e}"
            ));
        }
        // The cross correlation needs the spectrum; recover it from the kernel.
        let t = Transformer::new(grid);
        let kappa: Vec<f64> = t.spectrum(&values).iter().map(|v| v.re.max(0.0)).collect();
        let gamma: Vec<f64> = (0..grid.len())
            .map(|k| (kappa[k] * kappa[grid.flip(k)]).sqrt())
            .collect();
        let cross = t.kernel_real(&gamma, eps);
        let reversed = values.reflected();
        Ok(Self {
            grid: grid.clone(),
            eps,
            values,
            reversed,
            cross,
        })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `k(t_j)`.
    pub fn values(&self) -> &TimeKernel {
        &self.values
    }

    /// `k_rev(t_j) = k(-t_j)`.
    pub fn reversed(&self) -> &TimeKernel {
        &self.reversed
    }

    /// `r(t_j)`.
    pub fn cross(&self) -> &TimeKernel {
        &self.cross
    }

    /// `max_j |k(-t_j) - conj k(t_j)|`.
    pub fn hermitian_residual(&self) -> f64 {
        self.values.max_abs_diff(&self.values.reflected().conj())
    }

    /// `max_j max(|r(-t_j) - r(t_j)|, |Im r(t_j)|)`.
    pub fn cross_symmetry_residual(&self) -> f64 {
        self.cross
            .max_abs_diff(&self.cross.reflected())
            .max(self.cross.max_imag())
    }
}

/// The modular matrix `L = conj(K) K^(-1)` and its square roots.
#[derive(Debug, Clone)]
pub struct ModularMatrix {
    eps: f64,
    l: Circulant,
    half: Circulant,
    inv_half: Circulant,
}

impl ModularMatrix {
    pub fn l(&self) -> &Circulant {
        &self.l
    }

    pub fn half(&self) -> &Circulant {
        &self.half
    }

    pub fn inv_half(&self) -> &Circulant {
        &self.inv_half
    }

    /// Eigenvalues of `L` in grid order; these are `lambda(nu_k)`.
    pub fn spectrum(&self) -> Vec<f64> {
        self.l.eigenvalues().iter().map(|v| v.re).collect()
    }

    /// Kernel `l^(1/2)_j = (L^(1/2))_{j0}`.
    pub fn half_kernel(&self) -> TimeKernel {
        self.half.kernel(self.eps)
    }

    /// Kernel `l^(-1/2)_j = (L^(-1/2))_{j0}`.
    pub fn inv_half_kernel(&self) -> TimeKernel {
        self.inv_half.kernel(self.eps)
    }

    /// `z^sharp = L^(-1/2) conj(z)`, the conjugation of the input space.
    pub fn sharp(&self, z: &DVector<Complex64>) -> DVector<Complex64> {
        self.inv_half.to_dense() * z.map(|v| v.conj())
    }

    /// `z^flat = L^(1/2) conj(z)`, the conjugation of the output space.
    pub fn flat(&self, z: &DVector<Complex64>) -> DVector<Complex64> {
        self.half.to_dense() * z.map(|v| v.conj())
    }
}

/// Circulant realization of a stationary noise.
#[derive(Debug, Clone)]
pub struct StationaryModel {
    grid: SpectralGrid,
    eps: f64,
    /// Eigenvalues of `K` in grid order, after clamping.
    spectrum: Vec<f64>,
    k: Circulant,
    x: Circulant,
    g: Circulant,
    modular: Option<ModularMatrix>,
}

impl StationaryModel {
    /// Assembles `K_ij = eps * k_{i-j}` and derives the square-root realization,
    /// the geometric mean and, when `K` is invertible, the modular matrix.
    pub fn build(seq: &CorrelationSequence) -> Result<Self> {
        let grid = seq.grid().clone();
        let eps = seq.eps();
        let n = grid.len();
        let column: Vec<Complex64> = (0..n as i64).map(|d| seq.values().at(d) * eps).collect();
        let k = Circulant::from_column(column);

        let raw: Vec<f64> = k.eigenvalues().iter().map(|v| v.re).collect();
        let max = raw.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let floor = -PSD_FLOOR * max;
        if let Some(&bad) = raw.iter().find(|&&v| v < floor) {
            return Err(Error::NotPositiveDefinite {
                eigenvalue: bad,
                floor,
            });
        }
        // Eigenvalues at rounding level are vacuum components, not small densities.
        let snap = ZERO_SNAP * max;
        let spectrum: Vec<f64> = raw
            .iter()
            .map(|&v| if v < snap { 0.0 } else { v })
            .collect();

        let x = Circulant::from_real_eigenvalues(
            &spectrum.iter().map(|v| v.sqrt()).collect::<Vec<_>>(),
        );
        let gamma: Vec<f64> = (0..n)
            .map(|i| (spectrum[i] * spectrum[grid.flip(i)]).sqrt())
            .collect();
        let g = Circulant::from_real_eigenvalues(&gamma);

        let min = spectrum.iter().cloned().fold(f64::INFINITY, f64::min);
        let modular = (max > 0.0 && min > INVERTIBILITY_FLOOR * max).then(|| {
            let lambda: Vec<f64> = (0..n)
                .map(|i| spectrum[grid.flip(i)] / spectrum[i])
                .collect();
            let half: Vec<f64> = lambda.iter().map(|l| l.sqrt()).collect();
            let inv_half: Vec<f64> = half.iter().map(|l| 1.0 / l).collect();
            ModularMatrix {
                eps,
                l: Circulant::from_real_eigenvalues(&lambda),
                half: Circulant::from_real_eigenvalues(&half),
                inv_half: Circulant::from_real_eigenvalues(&inv_half),
            }
        });

        Ok(Self {
            grid,
            eps,
            spectrum,
            k,
            x,
            g,
            modular,
        })
    }

    /// Convenience: `correlation_sequence` followed by [`StationaryModel::build`].
    pub fn from_pair(pair: &SpectralDensityPair, eps: f64) -> Result<Self> {
        Self::build(&CorrelationSequence::from_pair(pair, eps)?)
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    /// Clamped eigenvalues of `K` in grid order.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    /// Largest eigenvalue of `K`, i.e. its operator norm.
    pub fn norm(&self) -> f64 {
        self.spectrum.iter().cloned().fold(0.0, f64::max)
    }

    pub fn k(&self) -> &Circulant {
        &self.k
    }

    pub fn x(&self) -> &Circulant {
        &self.x
    }

    pub fn g(&self) -> &Circulant {
        &self.g
    }

    pub fn k_dense(&self) -> DMatrix<Complex64> {
        self.k.to_dense()
    }

    /// `K_rev = conj(K)`.
    pub fn k_rev_dense(&self) -> DMatrix<Complex64> {
        self.k.conj().to_dense()
    }

    pub fn x_dense(&self) -> DMatrix<Complex64> {
        self.x.to_dense()
    }

    /// `X_rev = conj(X)`.
    pub fn x_rev_dense(&self) -> DMatrix<Complex64> {
        self.x.conj().to_dense()
    }

    pub fn g_dense(&self) -> DMatrix<Complex64> {
        self.g.to_dense()
    }

    /// The modular matrix, or [`Error::NotInvertible`] when `K` has vacuum components.
    pub fn modular(&self) -> Result<&ModularMatrix> {
        self.modular.as_ref().ok_or_else(|| {
            let max = self.norm();
            Error::NotInvertible {
                min: self.spectrum.iter().cloned().fold(f64::INFINITY, f64::min),
                floor: INVERTIBILITY_FLOOR * max,
            }
        })
    }

    /// Columns `x_j` of `X` and `x_rev_j` of `conj(X)`.
    pub fn realization(&self) -> Realization {
        let x = self.x_dense();
        let x_rev = x.map(|v| v.conj());
        Realization { x, x_rev }
    }

    /// `||zeta||^2 = zeta^* (K + K_rev) zeta`.
    pub fn test_norm_sq(&self, zeta: &[Complex64]) -> Result<f64> {
        if zeta.len() != self.dim() {
            return invalid(format!(
                "expected {} coefficients, got {}",
                self.dim(),
                zeta.len()
            ));
        }
        let z = DVector::from_column_slice(zeta);
        let form = self.k_dense() + self.k_rev_dense();
        Ok((z.adjoint() * form * &z)[(0, 0)].re)
    }

    /// Spectral amplitudes of the realization, one row per time index.
    pub fn spectral_amplitudes(&self) -> SpectralAmplitudes {
        let n = self.dim();
        let m = self.grid.half_width() as i64;
        let table = PhaseTable::new(n);
        let root_eps = self.eps.sqrt();
        let sigma: Vec<f64> = self.spectrum.iter().map(|v| v.sqrt()).collect();
        // u_j(nu_q) = eps^(1/2) exp(-2 pi i q j / n)
        let u = |j: usize, k: usize| table.neg(k as i64 - m, j as i64) * root_eps;
        let check = DMatrix::from_fn(n, n, |j, k| u(j, k) * sigma[k]);
        let hat = DMatrix::from_fn(n, n, |j, k| u(j, k) * sigma[self.grid.flip(k)]);
        SpectralAmplitudes {
            grid: self.grid.clone(),
            check,
            hat,
        }
    }
}

/// Largest entry modulus of a complex matrix.
pub trait MaxAbs {
    fn max_abs(&self) -> f64;
}

impl MaxAbs for DMatrix<Complex64> {
    fn max_abs(&self) -> f64 {
        self.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Columns of the square-root realization.
#[derive(Debug, Clone)]
pub struct Realization {
    /// Column `j` is the vector `x_j`.
    pub x: DMatrix<Complex64>,
    /// Column `j` is `x_rev_j = conj(x_j)`.
    pub x_rev: DMatrix<Complex64>,
}

impl Realization {
    pub fn column(&self, j: usize) -> DVector<Complex64> {
        self.x.column(j).into_owned()
    }

    pub fn column_rev(&self, j: usize) -> DVector<Complex64> {
        self.x_rev.column(j).into_owned()
    }

    /// `[x_i^dag x_j]`.
    pub fn gram(&self) -> DMatrix<Complex64> {
        self.x.adjoint() * &self.x
    }

    /// `[x_rev_i^dag x_rev_j]`.
    pub fn gram_rev(&self) -> DMatrix<Complex64> {
        self.x_rev.adjoint() * &self.x_rev
    }

    /// `[x_i^dag x_rev_j]`.
    pub fn gram_cross(&self) -> DMatrix<Complex64> {
        self.x.adjoint() * &self.x_rev
    }
}

/// Frequency-domain amplitudes `check[(j, k)] = x_check_j(nu_k)` and
/// `hat[(j, k)] = x_hat_j(nu_k)`; rows are samples, columns grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralAmplitudes {
    pub grid: SpectralGrid,
    pub check: DMatrix<Complex64>,
    pub hat: DMatrix<Complex64>,
}

impl SpectralAmplitudes {
    /// Time-zero amplitudes of the continuous process: `kappa^(1/2)` and
    /// `kappa_rev^(1/2)` as a single row.
    pub fn from_pair(pair: &SpectralDensityPair) -> Self {
        let n = pair.grid().len();
        let s = pair.sigma();
        let sr = pair.sigma_rev();
        Self {
            grid: pair.grid().clone(),
            check: DMatrix::from_fn(1, n, |_, k| Complex64::new(s[k], 0.0)),
            hat: DMatrix::from_fn(1, n, |_, k| Complex64::new(sr[k], 0.0)),
        }
    }

    pub fn rows(&self) -> usize {
        self.check.nrows()
    }

    /// `[sum_k conj(a_i(nu_k)) b_j(nu_k) dnu]`.
    pub fn inner(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, dnu: f64) -> DMatrix<Complex64> {
        (a.conjugate() * b.transpose()) * Complex64::new(dnu, 0.0)
    }

    /// `z^star(nu) = conj(z(-nu))`, row by row.
    pub fn star(&self, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let n = self.grid.len();
        DMatrix::from_fn(m.nrows(), n, |j, k| m[(j, self.grid.flip(k))].conj())
    }
}
