//! Any density pair as a symmetric real filter of a standard noise pair.
//!
//! The standard pair carries only the modular ratio of the target:
//! `kappa_std = 1_- + lambda_Theta^(-1/2)`, `kappa_std_rev = 1_+ + lambda_Theta^(1/2)`.
//! The transmission `f` restores the magnitude, `f^2 kappa_std = kappa_target`.

use crate::error::{Error, Result};
use crate::fourier::{TimeKernel, Transformer};
use crate::spectra::{SpectralDensityPair, SpectralGrid};

/// Standard pair built from a target, with its amplitudes.
#[derive(Debug, Clone)]
pub struct StandardPair {
    pub pair: SpectralDensityPair,
    /// `x_check_std = 1_- + lambda_Theta^(-1/4)`.
    pub check: Vec<f64>,
    /// `x_hat_std = 1_+ + lambda_Theta^(1/4)`.
    pub hat: Vec<f64>,
}

impl StandardPair {
    /// `max_{Theta} |kappa kappa_rev - 1|` and `max_{Theta^perp} |kappa + kappa_rev - 1|`
    /// over retained points.
    pub fn law_residuals(&self) -> (f64, f64) {
        let p = &self.pair;
        let masks = p.masks();
        let mut on_theta: f64 = 0.0;
        let mut off_theta: f64 = 0.0;
        for k in masks.retained.indices() {
            let (a, b) = (p.kappa()[k], p.kappa_rev()[k]);
            if masks.theta.contains(k) {
                on_theta = on_theta.max((a * b - 1.0).abs());
            } else {
                off_theta = off_theta.max((a + b - 1.0).abs());
            }
        }
        (on_theta, off_theta)
    }
}

pub fn build_standard_pair(target: &SpectralDensityPair) -> StandardPair {
    let grid = target.grid();
    let masks = target.masks();
    let quarter = target.lambda_theta_pow(-0.25);
    let check: Vec<f64> = (0..grid.len())
        .map(|k| {
            if masks.n_minus.contains(k) {
                1.0
            } else {
                quarter[k]
            }
        })
        .collect();
    let hat = grid.flipped(&check);
    let kappa: Vec<f64> = check.iter().map(|x| x * x).collect();
    let pair = SpectralDensityPair::tabulated(&kappa, grid)
        .expect("squared amplitudes are finite and nonnegative");
    StandardPair { pair, check, hat }
}

/// Symmetric real transmission taking the standard pair to a target.
#[derive(Debug, Clone)]
pub struct TransmissionFilter {
    pub grid: SpectralGrid,
    /// `f = (sigma sigma_rev)^(1/2)` on `Theta`, `max(sigma, sigma_rev)` elsewhere.
    pub f: Vec<f64>,
    pub target_sigma: Vec<f64>,
    pub target_sigma_rev: Vec<f64>,
    pub standard: StandardPair,
}

pub fn transmission_function(target: &SpectralDensityPair) -> TransmissionFilter {
    let grid = target.grid().clone();
    let sigma = target.sigma();
    let sigma_rev = target.sigma_rev();
    let theta = &target.masks().theta;
    let f = (0..grid.len())
        .map(|k| {
            if theta.contains(k) {
                (sigma[k] * sigma_rev[k]).sqrt()
            } else {
                sigma[k].max(sigma_rev[k])
            }
        })
        .collect();
    TransmissionFilter {
        grid,
        f,
        target_sigma: sigma,
        target_sigma_rev: sigma_rev,
        standard: build_standard_pair(target),
    }
}

/// Filtered amplitudes `y_check = f x_check_std`, `y_hat = f x_hat_std`.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub check: Vec<f64>,
    pub hat: Vec<f64>,
    /// `|y_check|^2`.
    pub kappa: Vec<f64>,
    /// `|y_hat|^2`.
    pub kappa_rev: Vec<f64>,
}

impl Synthesis {
    /// Largest relative spectrum error against `target` over points where it is positive.
    pub fn relative_error(&self, target: &SpectralDensityPair) -> f64 {
        let rel = |got: &[f64], want: &[f64]| {
            got.iter()
                .zip(want)
                .filter(|(_, w)| **w > 0.0)
                .map(|(g, w)| (g - w).abs() / w)
                .fold(0.0, f64::max)
        };
        let abs_off = self
            .kappa
            .iter()
            .zip(target.kappa())
            .filter(|(_, w)| **w == 0.0)
            .map(|(g, _)| g.abs())
            .fold(0.0, f64::max);
        rel(&self.kappa, target.kappa())
            .max(rel(&self.kappa_rev, target.kappa_rev()))
            .max(abs_off)
    }

    /// `max_k |y_check y_hat - gamma_target| / max gamma_target`.
    pub fn cross_error(&self, target: &SpectralDensityPair) -> f64 {
        let scale = target
            .gamma()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        (0..self.check.len())
            .map(|k| (self.check[k] * self.hat[k] - target.gamma()[k]).abs())
            .fold(0.0, f64::max)
            / scale
    }
}

pub fn synthesize(filter: &TransmissionFilter, standard: &StandardPair) -> Result<Synthesis> {
    if standard.pair.grid() != &filter.grid {
        return Err(Error::InvalidArgument(
            "filter and standard pair use different grids".into(),
        ));
    }
    let check: Vec<f64> = filter
        .f
        .iter()
        .zip(&standard.check)
        .map(|(f, x)| f * x)
        .collect();
    let hat: Vec<f64> = filter
        .f
        .iter()
        .zip(&standard.hat)
        .map(|(f, x)| f * x)
        .collect();
    let kappa = check.iter().map(|y| y * y).collect();
    let kappa_rev = hat.iter().map(|y| y * y).collect();
    Ok(Synthesis {
        check,
        hat,
        kappa,
        kappa_rev,
    })
}

/// Time kernels of the filter, the standard output amplitude and the target amplitudes.
#[derive(Debug, Clone)]
pub struct FilterKernels {
    /// `phi = F[f]`.
    pub phi: TimeKernel,
    /// `chi_std = F[x_hat_std]`.
    pub chi_std: TimeKernel,
    /// `psi = F[sigma_rev_target]`, the output amplitude kernel.
    pub psi: TimeKernel,
    /// `psi_rev = F[sigma_target]`, the input amplitude kernel.
    pub psi_rev: TimeKernel,
}

impl FilterKernels {
    /// `phi * chi_std` under the `eps`-weighted cyclic convolution.
    pub fn apply(&self) -> TimeKernel {
        self.phi.convolve(&self.chi_std)
    }

    /// `max_t |(phi * chi_std)(t) - psi(t)|`.
    pub fn convolution_residual(&self) -> f64 {
        self.apply().max_abs_diff(&self.psi)
    }

    /// `max_t |psi(-t) - psi_rev(t)|`.
    pub fn reversal_residual(&self) -> f64 {
        self.psi.reflected().max_abs_diff(&self.psi_rev)
    }
}

pub fn time_domain_filter(filter: &TransmissionFilter, eps: f64) -> Result<FilterKernels> {
    filter.grid.check_eps(eps)?;
    let t = Transformer::new(&filter.grid);
    Ok(FilterKernels {
        phi: t.kernel_real(&filter.f, eps),
        chi_std: t.kernel_real(&filter.standard.hat, eps),
        psi: t.kernel_real(&filter.target_sigma_rev, eps),
        psi_rev: t.kernel_real(&filter.target_sigma, eps),
    })
}

/// `F[|y_check|^2]`, the correlation kernel reproduced by the synthesis.
pub fn reproduced_correlation(
    synth: &Synthesis,
    grid: &SpectralGrid,
    eps: f64,
) -> Result<TimeKernel> {
    grid.check_eps(eps)?;
    Ok(Transformer::new(grid).kernel_real(&synth.kappa, eps))
}

/// Pointwise ratio `(kappa_target / kappa_std)^(1/2)` where `kappa_std > 0`.
pub fn implied_transmission(
    target: &SpectralDensityPair,
    standard: &StandardPair,
) -> Vec<Option<f64>> {
    target
        .kappa()
        .iter()
        .zip(standard.pair.kappa())
        .map(|(t, s)| (*s > 0.0).then(|| (t / s).sqrt()))
        .collect()
}
