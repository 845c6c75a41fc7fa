//! Orthogonal splitting of a noise into vacuum and thermal parts and the
//! modular filters that estimate the output amplitude from the input one.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{TimeKernel, Transformer};
use crate::model::{MaxAbs, SpectralAmplitudes, StationaryModel};
use crate::spectra::{Mask, SpectralDensityPair};

/// Amplitudes split by support. `p_plus_perp` is `N+`, `p_minus_perp` is `N-`.
#[derive(Debug, Clone)]
pub struct ComponentSplit {
    pub amplitudes: SpectralAmplitudes,
    /// `lambda_Theta^(1/2)`, zero off `Theta`.
    pub lambda_half: Vec<f64>,
    pub p_plus_perp: Mask,
    pub p_minus_perp: Mask,
    pub p_theta: Mask,
    /// `x_check` restricted to `N-`.
    pub check_vacuum: DMatrix<Complex64>,
    /// `x_hat` restricted to `N+`.
    pub hat_vacuum: DMatrix<Complex64>,
    pub check_thermal: DMatrix<Complex64>,
    pub hat_thermal: DMatrix<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Estimate `x_hat` from `x_check`.
    InputToOutput,
    /// Estimate `x_check` from `x_hat`.
    OutputToInput,
}

/// Linear estimate of one amplitude from the other and what it misses.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub direction: Direction,
    pub estimate: DMatrix<Complex64>,
    pub residual: DMatrix<Complex64>,
    dnu: f64,
    /// Largest modulus of the estimated amplitude.
    scale: f64,
}

fn restrict(m: &DMatrix<Complex64>, mask: &Mask) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |j, k| {
        if mask.contains(k) {
            m[(j, k)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn scale_columns(m: &DMatrix<Complex64>, s: &[f64]) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |j, k| m[(j, k)] * s[k])
}

impl ComponentSplit {
    /// Splits precomputed amplitudes using the masks of `pair`.
    pub fn new(amplitudes: SpectralAmplitudes, pair: &SpectralDensityPair) -> Result<Self> {
        if amplitudes.grid != *pair.grid() {
            return Err(Error::GridMismatch(
                "amplitudes and density pair use different grids".into(),
            ));
        }
        let masks = pair.masks();
        let check_vacuum = restrict(&amplitudes.check, &masks.n_minus);
        let hat_vacuum = restrict(&amplitudes.hat, &masks.n_plus);
        let check_thermal = restrict(&amplitudes.check, &masks.theta);
        let hat_thermal = restrict(&amplitudes.hat, &masks.theta);
        Ok(Self {
            lambda_half: pair.lambda_theta_pow(0.5),
            p_plus_perp: masks.n_plus.clone(),
            p_minus_perp: masks.n_minus.clone(),
            p_theta: masks.theta.clone(),
            amplitudes,
            check_vacuum,
            hat_vacuum,
            check_thermal,
            hat_thermal,
        })
    }

    /// `P+ = 1 - P+perp` on retained points.
    pub fn p_plus(&self) -> Mask {
        self.p_minus_perp.or(&self.p_theta)
    }

    /// `P- = 1 - P-perp` on retained points.
    pub fn p_minus(&self) -> Mask {
        self.p_plus_perp.or(&self.p_theta)
    }

    /// Maximal entrywise gap in `x = x_vacuum + x_thermal` for both amplitudes.
    pub fn reconstruction_residual(&self) -> f64 {
        let a = (&self.check_vacuum + &self.check_thermal - &self.amplitudes.check).max_abs();
        let b = (&self.hat_vacuum + &self.hat_thermal - &self.amplitudes.hat).max_abs();
        a.max(b)
    }

    /// `[sum_k conj(x_vacuum_i) x_thermal_j dnu]` for the input amplitude.
    pub fn vacuum_thermal_overlap(&self) -> DMatrix<Complex64> {
        SpectralAmplitudes::inner(
            &self.check_vacuum,
            &self.check_thermal,
            self.amplitudes.grid.step(),
        )
    }

    pub fn best_estimate(&self, direction: Direction) -> Estimate {
        let (source, target, gain) = match direction {
            Direction::InputToOutput => (
                &self.amplitudes.check,
                &self.amplitudes.hat,
                self.lambda_half.clone(),
            ),
            Direction::OutputToInput => (
                &self.amplitudes.hat,
                &self.amplitudes.check,
                self.lambda_half
                    .iter()
                    .map(|&l| if l > 0.0 { 1.0 / l } else { 0.0 })
                    .collect(),
            ),
        };
        let estimate = scale_columns(source, &gain);
        let residual = target - &estimate;
        Estimate {
            direction,
            estimate,
            residual,
            dnu: self.amplitudes.grid.step(),
            scale: target.max_abs(),
        }
    }
}

/// Splits the spectral amplitudes of `model` by the masks of `pair`.
pub fn split(model: &StationaryModel, pair: &SpectralDensityPair) -> Result<ComponentSplit> {
    ComponentSplit::new(model.spectral_amplitudes(), pair)
}

impl Estimate {
    /// `sum_k |residual_j(nu_k)|^2 dnu` for each row `j`.
    pub fn residual_norm_sq(&self) -> Vec<f64> {
        self.residual
            .row_iter()
            .map(|r| r.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dnu)
            .collect()
    }

    /// Grid points where some row of the residual exceeds `tol` times the
    /// largest estimated amplitude. Entries on `Theta` cancel only to rounding.
    pub fn residual_support(&self, tol: f64) -> Mask {
        let floor = tol * self.scale;
        Mask::from_fn(self.residual.ncols(), |k| {
            self.residual.column(k).iter().any(|v| v.norm() > floor)
        })
    }
}

/// Time kernels of `lambda_Theta^(1/2)` and `lambda_Theta^(-1/2)`, normalized
/// so that a kernel of the constant 1 is `delta_{j0}`.
#[derive(Debug, Clone)]
pub struct ModularKernels {
    pub half: TimeKernel,
    pub inv_half: TimeKernel,
    /// Kernel of the indicator of `Theta`.
    pub theta: TimeKernel,
}

impl ModularKernels {
    /// `max_t max(|l(-t) - conj l(t)|, |conj l(t) - l^-1(t)|)`.
    pub fn modular_residual(&self) -> f64 {
        let a = self.half.reflected().max_abs_diff(&self.half.conj());
        let b = self.half.conj().max_abs_diff(&self.inv_half);
        a.max(b)
    }

    /// `max_t |(l^(1/2) * l^(-1/2))(t) - 1_Theta(t)|` under cyclic convolution.
    pub fn convolution_residual(&self) -> f64 {
        self.half
            .cyclic_convolution(&self.inv_half)
            .max_abs_diff(&self.theta)
    }
}

pub fn modular_kernels_theta(pair: &SpectralDensityPair, eps: f64) -> Result<ModularKernels> {
    let grid = pair.grid();
    grid.check_eps(eps)?;
    let theta = &pair.masks().theta;
    if theta.count() == 0 {
        return Err(Error::EmptySupport);
    }
    let t = Transformer::new(grid);
    let build = |g: Vec<f64>| t.kernel_real(&g, eps).scaled(eps);
    let indicator: Vec<f64> = (0..grid.len())
        .map(|k| if theta.contains(k) { 1.0 } else { 0.0 })
        .collect();
    Ok(ModularKernels {
        half: build(pair.lambda_theta_pow(0.5)),
        inv_half: build(pair.lambda_theta_pow(-0.5)),
        theta: build(indicator),
    })
}
