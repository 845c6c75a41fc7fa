use std::path::Path;

use num_complex::Complex64;
use qnoise_core::decomposition::{modular_kernels_theta, ComponentSplit, Direction};
use qnoise_core::mode::ModeReport;
use qnoise_core::qsi::{integrator_table, CanonicalMoments, CanonicalPair, GramEntries};
use qnoise_core::synthesis::{synthesize, time_domain_filter, transmission_function};
use qnoise_core::{CorrelationSequence, Mask, SpectralAmplitudes, StationaryModel, TimeKernel};
use serde::Serialize;

use crate::{num, write_csv, write_json, InputError, Setup};

fn core_err(e: qnoise_core::Error) -> InputError {
    InputError(e.to_string())
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn kernel_rows(kernels: &[&TimeKernel]) -> Vec<Vec<String>> {
    let first = kernels[0];
    first
        .times()
        .enumerate()
        .map(|(i, (j, t))| {
            let mut row = vec![j.to_string(), num(t)];
            for k in kernels {
                let v = k.values()[i];
                row.push(num(v.re));
                row.push(num(v.im));
            }
            row
        })
        .collect()
}

/// `spectrum.csv`: one row per retained grid point.
pub fn spectrum(setup: &Setup, out: &Path) -> Result<(), InputError> {
    let pair = &setup.pair;
    let rows: Vec<Vec<String>> = pair
        .masks()
        .retained
        .indices()
        .map(|k| {
            vec![
                num(setup.grid.nu(k)),
                num(pair.kappa()[k]),
                num(pair.kappa_rev()[k]),
                opt(pair.lambda()[k]),
                num(pair.gamma()[k]),
                pair.support(k).to_string(),
            ]
        })
        .collect();
    write_csv(
        &out.join("spectrum.csv"),
        &["nu", "kappa", "kappa_rev", "lambda", "gamma", "support"],
        &rows,
    )
}

/// `correlation.csv` with `k`, `k_rev`, `r`, and `model_spectrum.csv` with the
/// eigenvalues of `K` and, when it exists, of the modular matrix.
pub fn corr(setup: &Setup, out: &Path) -> Result<(), InputError> {
    let seq = CorrelationSequence::from_pair(&setup.pair, setup.eps).map_err(core_err)?;
    write_csv(
        &out.join("correlation.csv"),
        &[
            "j", "t", "k_re", "k_im", "k_rev_re", "k_rev_im", "r_re", "r_im",
        ],
        &kernel_rows(&[seq.values(), seq.reversed(), seq.cross()]),
    )?;
    let model = StationaryModel::build(&seq).map_err(core_err)?;
    let modular = model.modular().ok().map(|m| m.spectrum());
    let rows: Vec<Vec<String>> = (0..model.dim())
        .map(|k| {
            vec![
                num(setup.grid.nu(k)),
                num(model.spectrum()[k]),
                opt(modular.as_ref().map(|m| m[k])),
            ]
        })
        .collect();
    write_csv(
        &out.join("model_spectrum.csv"),
        &["nu", "eigenvalue_k", "eigenvalue_l"],
        &rows,
    )
}

#[derive(Serialize)]
struct PointReport {
    nu: f64,
    support: String,
    lambda: Option<f64>,
}

#[derive(Serialize)]
struct DecompositionReport {
    points: Vec<PointReport>,
    input_to_output_residual_norm_sq: f64,
    output_to_input_residual_norm_sq: f64,
    n_plus_measure_of_kappa_rev: f64,
    n_minus_measure_of_kappa: f64,
}

/// `decomposition.csv` (time-zero amplitudes and estimates), `decomposition.json`
/// and, when `Theta` is nonempty, `modular_kernels.csv`.
pub fn decompose(setup: &Setup, out: &Path) -> Result<(), InputError> {
    let pair = &setup.pair;
    let split = ComponentSplit::new(SpectralAmplitudes::from_pair(pair), pair).map_err(core_err)?;
    let fwd = split.best_estimate(Direction::InputToOutput);
    let back = split.best_estimate(Direction::OutputToInput);
    let rows: Vec<Vec<String>> = (0..setup.grid.len())
        .map(|k| {
            vec![
                num(setup.grid.nu(k)),
                pair.support(k).to_string(),
                num(split.lambda_half[k]),
                num(split.amplitudes.check[(0, k)].re),
                num(split.amplitudes.hat[(0, k)].re),
                num(split.check_vacuum[(0, k)].re),
                num(split.hat_vacuum[(0, k)].re),
                num(split.check_thermal[(0, k)].re),
                num(split.hat_thermal[(0, k)].re),
                num(fwd.estimate[(0, k)].re),
                num(fwd.residual[(0, k)].re),
            ]
        })
        .collect();
    write_csv(
        &out.join("decomposition.csv"),
        &[
            "nu",
            "support",
            "lambda_half",
            "x_check",
            "x_hat",
            "x_check_vacuum",
            "x_hat_vacuum",
            "x_check_thermal",
            "x_hat_thermal",
            "estimate",
            "residual",
        ],
        &rows,
    )?;
    let dnu = setup.grid.step();
    let masks = pair.masks();
    let report = DecompositionReport {
        points: (0..setup.grid.len())
            .map(|k| PointReport {
                nu: setup.grid.nu(k),
                support: pair.support(k).to_string(),
                lambda: pair.lambda()[k],
            })
            .collect(),
        input_to_output_residual_norm_sq: fwd.residual_norm_sq()[0],
        output_to_input_residual_norm_sq: back.residual_norm_sq()[0],
        n_plus_measure_of_kappa_rev: masks
            .n_plus
            .indices()
            .map(|k| pair.kappa_rev()[k])
            .sum::<f64>()
            * dnu,
        n_minus_measure_of_kappa: masks
            .n_minus
            .indices()
            .map(|k| pair.kappa()[k])
            .sum::<f64>()
            * dnu,
    };
    write_json(&out.join("decomposition.json"), &report)?;
    if masks.theta.count() > 0 {
        let k = modular_kernels_theta(pair, setup.eps).map_err(core_err)?;
        write_csv(
            &out.join("modular_kernels.csv"),
            &["j", "t", "half_re", "half_im", "inv_half_re", "inv_half_im"],
            &kernel_rows(&[&k.half, &k.inv_half]),
        )?;
    }
    Ok(())
}

/// `synthesis.csv` and `filter_kernels.csv`; returns the largest relative
/// spectrum error over supported points.
pub fn synth(setup: &Setup, out: &Path) -> Result<f64, InputError> {
    let pair = &setup.pair;
    let filter = transmission_function(pair);
    let s = synthesize(&filter, &filter.standard).map_err(core_err)?;
    let std = &filter.standard.pair;
    let rows: Vec<Vec<String>> = (0..setup.grid.len())
        .map(|k| {
            let target = pair.kappa()[k];
            let rel = if target > 0.0 {
                num((s.kappa[k] - target).abs() / target)
            } else {
                String::new()
            };
            vec![
                num(setup.grid.nu(k)),
                num(filter.f[k]),
                num(std.kappa()[k]),
                num(std.kappa_rev()[k]),
                num(s.kappa[k]),
                num(target),
                rel,
            ]
        })
        .collect();
    write_csv(
        &out.join("synthesis.csv"),
        &[
            "nu",
            "f",
            "kappa_std",
            "kappa_std_rev",
            "kappa_reproduced",
            "kappa_target",
            "relative_error",
        ],
        &rows,
    )?;
    let kernels = time_domain_filter(&filter, setup.eps).map_err(core_err)?;
    let applied = kernels.apply();
    write_csv(
        &out.join("filter_kernels.csv"),
        &[
            "j",
            "t",
            "phi_re",
            "phi_im",
            "chi_std_re",
            "chi_std_im",
            "psi_re",
            "psi_im",
            "applied_re",
            "applied_im",
        ],
        &kernel_rows(&[&kernels.phi, &kernels.chi_std, &kernels.psi, &applied]),
    )?;
    Ok(s.relative_error(pair))
}

#[derive(Serialize)]
struct IntervalTable {
    first: [f64; 2],
    second: [f64; 2],
    integrators: GramEntries,
    canonical: CanonicalMoments,
}

/// `qsi.json`: integrator and canonical multiplication tables for each pair of
/// configured bands.
pub fn qsi(setup: &Setup, out: &Path) -> Result<(), InputError> {
    let table = integrator_table(&setup.pair);
    let canonical = CanonicalPair::standard(&setup.grid, setup.pair.masks().retained.clone());
    let bands = setup.config.intervals();
    let mut tables = Vec::new();
    for a in &bands {
        for b in &bands {
            let (da, db) = (
                Mask::band(&setup.grid, a[0], a[1]),
                Mask::band(&setup.grid, b[0], b[1]),
            );
            tables.push(IntervalTable {
                first: *a,
                second: *b,
                integrators: table.entries(&da, &db),
                canonical: canonical.moments(&da, &db),
            });
        }
    }
    write_json(&out.join("qsi.json"), &tables)
}

/// `mode.json`; returns the same JSON text.
pub fn mode(n: f64, out: &Path) -> Result<String, InputError> {
    let report = ModeReport::new(n).map_err(core_err)?;
    write_json(&out.join("mode.json"), &report)?;
    Ok(serde_json::to_string_pretty(&report)?)
}

/// Deterministic test functions for isometry checks: constants, a band
/// indicator and a smooth complex profile.
pub fn test_functions(setup: &Setup) -> Vec<(Vec<Complex64>, Vec<Complex64>)> {
    let pts = setup.grid.points();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let band = Mask::band(&setup.grid, -1.0, 0.5);
    vec![
        (vec![one; pts.len()], vec![one; pts.len()]),
        (
            (0..pts.len())
                .map(|k| if band.contains(k) { one } else { zero })
                .collect(),
            vec![zero; pts.len()],
        ),
        (
            pts.iter()
                .map(|&nu| Complex64::new((0.7 * nu).cos(), 0.2 * nu))
                .collect(),
            pts.iter()
                .map(|&nu| Complex64::new(0.4, (-nu * nu / 8.0).exp()))
                .collect(),
        ),
    ]
}
