//! Invariant suites run by `qnoise verify`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use qnoise_core::decomposition::{modular_kernels_theta, ComponentSplit, Direction};
use qnoise_core::mode::{invert_pair, thermal_pair, ModeOperator, ModeReport};
use qnoise_core::model::MaxAbs;
use qnoise_core::qsi::{
    build_y, canonical_from_vacuum, integrator_table, isometry_check, isometry_gram,
    recover_canonical, reflection_symmetry_check, time_domain_representation, CanonicalPair, Side,
};
use qnoise_core::synthesis::{
    implied_transmission, reproduced_correlation, synthesize, time_domain_filter,
    transmission_function,
};
use qnoise_core::{CorrelationSequence, Error, Mask, SpectralAmplitudes, StationaryModel};
use serde::Serialize;

use crate::commands::test_functions;
use crate::{InputError, ModelName, Setup};

/// Occupations checked by the mode suite.
pub const MODE_OCCUPATIONS: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 10.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub suite: String,
    pub check: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Collected check results. `tolerance` replaces every default when set.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub entries: Vec<CheckEntry>,
    tolerance: Option<f64>,
}

impl Report {
    pub fn new(tolerance: Option<f64>) -> Self {
        Self {
            entries: Vec::new(),
            tolerance,
        }
    }

    pub fn check(&mut self, suite: &str, check: &str, residual: f64, default_tol: f64) {
        let tolerance = self.tolerance.unwrap_or(default_tol);
        self.entries.push(CheckEntry {
            suite: suite.into(),
            check: check.into(),
            residual,
            tolerance,
            pass: residual.is_finite() && residual <= tolerance,
        });
    }

    /// A yes/no property recorded as residual 0 or 1 against tolerance 0.
    pub fn flag(&mut self, suite: &str, check: &str, ok: bool) {
        let residual = if ok { 0.0 } else { 1.0 };
        self.entries.push(CheckEntry {
            suite: suite.into(),
            check: check.into(),
            residual,
            tolerance: 0.0,
            pass: ok,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }
}

fn max_over(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn run(setup: &Setup, tolerance: Option<f64>) -> Result<Report, InputError> {
    let mut r = Report::new(tolerance);
    let core = |e: Error| InputError(e.to_string());
    spectra(setup, &mut r);
    let model = StationaryModel::from_pair(&setup.pair, setup.eps).map_err(core)?;
    stationary_model(setup, &model, &mut r).map_err(core)?;
    decomposition(setup, &model, &mut r).map_err(core)?;
    synthesis(setup, &mut r).map_err(core)?;
    qsi(setup, &model, &mut r).map_err(core)?;
    mode(&mut r).map_err(core)?;
    Ok(r)
}

fn spectra(setup: &Setup, r: &mut Report) {
    const S: &str = "spectra";
    let (grid, pair) = (&setup.grid, &setup.pair);
    let n = grid.len();
    let flip_gap =
        max_over((0..n).map(|k| (pair.kappa_rev()[k] - pair.kappa()[grid.flip(k)]).abs()));
    r.check(S, "kappa_rev_is_flip", flip_gap, 0.0);
    let m = pair.masks();
    r.flag(
        S,
        "support_partition",
        m.n_plus.is_disjoint(&m.n_minus)
            && m.n_plus.is_disjoint(&m.theta)
            && m.n_minus.is_disjoint(&m.theta)
            && m.n_plus.or(&m.n_minus).or(&m.theta) == m.retained
            && m.n_plus.flip() == m.n_minus,
    );
    let recip = max_over(m.theta.indices().map(|k| {
        (pair.lambda()[k].unwrap_or(f64::NAN) * pair.lambda()[grid.flip(k)].unwrap_or(f64::NAN)
            - 1.0)
            .abs()
    }));
    r.check(S, "lambda_reciprocity", recip, 1e-12);
    let scale = pair.max_kappa().max(f64::MIN_POSITIVE);
    let gm = max_over(
        (0..n).map(|k| (pair.gamma()[k].powi(2) - pair.kappa()[k] * pair.kappa_rev()[k]).abs()),
    );
    r.check(S, "gamma_geometric_mean", gm / (scale * scale), 1e-12);
    if setup.config.model == ModelName::Planck {
        let (beta, h) = (
            setup.config.beta.unwrap_or(1.0),
            setup.config.h.unwrap_or(1.0),
        );
        let balance = max_over(
            (0..n).map(|k| (pair.kappa_rev()[k] - pair.kappa()[k] - h * grid.nu(k)).abs()),
        );
        r.check(S, "planck_detailed_balance", balance / scale, 1e-12);
        let boltz = max_over((0..n).map(|k| {
            let want = (beta * h * grid.nu(k)).exp();
            (pair.lambda()[k].unwrap_or(f64::NAN) - want).abs() / want
        }));
        r.check(S, "planck_lambda_boltzmann", boltz, 1e-12);
    }
}

fn stationary_model(setup: &Setup, model: &StationaryModel, r: &mut Report) -> Result<(), Error> {
    const S: &str = "model";
    let pair = &setup.pair;
    let seq = CorrelationSequence::from_pair(pair, setup.eps)?;
    let kscale = seq.values().max_abs().max(f64::MIN_POSITIVE);
    r.check(
        S,
        "correlation_hermitian",
        seq.hermitian_residual() / kscale,
        1e-12,
    );
    r.check(
        S,
        "cross_correlation_symmetric",
        seq.cross_symmetry_residual() / kscale,
        1e-12,
    );
    let norm = model.norm().max(f64::MIN_POSITIVE);
    let spec = max_over(
        model
            .spectrum()
            .iter()
            .zip(pair.kappa())
            .map(|(a, b)| (a - b).abs()),
    );
    r.check(S, "spectrum_matches_density", spec / norm, 1e-10);

    let (k, kr, g) = (model.k_dense(), model.k_rev_dense(), model.g_dense());
    let real = model.realization();
    r.check(S, "gram_x", (real.gram() - &k).max_abs() / norm, 1e-10);
    r.check(
        S,
        "gram_x_rev",
        (real.gram_rev() - &kr).max_abs() / norm,
        1e-10,
    );
    r.check(
        S,
        "gram_cross",
        (real.gram_cross() - &g).max_abs() / norm,
        1e-10,
    );
    r.check(
        S,
        "x_times_x_rev",
        (&real.x * &real.x_rev - &g).max_abs() / norm,
        1e-10,
    );
    let g_sym = max_over(g.iter().map(|v| v.im.abs())).max((&g - g.transpose()).max_abs());
    r.check(S, "g_real_symmetric", g_sym / norm, 1e-10);
    let g_re = g.map(|v| v.re);
    let g_min = g_re.symmetric_eigen().eigenvalues.min();
    r.check(
        S,
        "g_positive_semidefinite",
        (-g_min).max(0.0) / norm,
        1e-10,
    );
    r.check(
        S,
        "g_squared",
        frobenius(&(&g * &g - &k * &kr)) / (norm * norm),
        1e-9,
    );
    r.check(
        S,
        "commutator_dense",
        frobenius(&(&k * &kr - &kr * &k)) / (norm * norm),
        1e-12,
    );

    let amps = model.spectral_amplitudes();
    let dnu = setup.grid.step();
    let inner = SpectralAmplitudes::inner;
    let amp = (inner(&amps.check, &amps.check, dnu) - &k)
        .max_abs()
        .max((inner(&amps.hat, &amps.hat, dnu) - &kr).max_abs())
        .max((inner(&amps.check, &amps.hat, dnu) - &g).max_abs());
    r.check(S, "amplitude_grams", amp / norm, 1e-10);
    r.flag(
        S,
        "amplitude_star_involution",
        amps.star(&amps.check) == amps.hat,
    );

    let probes: Vec<Vec<Complex64>> = vec![
        (0..model.dim())
            .map(|i| Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0))
            .collect(),
        (0..model.dim())
            .map(|i| Complex64::new((i as f64).cos(), 0.5))
            .collect(),
    ];
    let worst = probes
        .iter()
        .map(|z| model.test_norm_sq(z))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    r.check(S, "test_norm_nonnegative", (-worst).max(0.0) / norm, 1e-12);

    if let Ok(modular) = model.modular() {
        let lam = modular.spectrum();
        let rel = max_over((0..lam.len()).map(|i| {
            let want = pair.lambda()[i].unwrap_or(f64::NAN);
            (lam[i] - want).abs() / want
        }));
        r.check(S, "modular_spectrum", rel, 1e-10);
        let half = modular.half().to_dense();
        let map = (&half * &real.x - &real.x_rev).max_abs() / norm.sqrt();
        r.check(S, "modular_half_maps_x_to_x_rev", map, 1e-10);
        let lk = modular.half_kernel();
        let lki = modular.inv_half_kernel();
        let scale = lk.max_abs().max(1.0);
        let prop = lk
            .reflected()
            .max_abs_diff(&lk.conj())
            .max(lk.conj().max_abs_diff(&lki));
        r.check(S, "modular_kernel_property", prop / scale, 1e-10);
        let conv = lk.cyclic_convolution(&lki);
        let unit = max_over(conv.times().map(|(j, _)| {
            let want = if j == 0 { 1.0 } else { 0.0 };
            (conv.at(j) - Complex64::new(want, 0.0)).norm()
        }));
        r.check(S, "modular_unit_convolution", unit, 1e-9);
        let x = real.column(0);
        let sharp = (modular.sharp(&x) - &x).norm() / x.norm().max(f64::MIN_POSITIVE);
        r.check(S, "sharp_fixes_realization", sharp, 1e-10);
    }
    Ok(())
}

fn decomposition(setup: &Setup, model: &StationaryModel, r: &mut Report) -> Result<(), Error> {
    const S: &str = "decomposition";
    let (grid, pair) = (&setup.grid, &setup.pair);
    let masks = pair.masks();
    let dnu = grid.step();
    let n_plus_oracle: f64 = masks
        .n_plus
        .indices()
        .map(|k| pair.kappa_rev()[k])
        .sum::<f64>()
        * dnu;

    let split = ComponentSplit::new(SpectralAmplitudes::from_pair(pair), pair)?;
    r.flag(
        S,
        "component_supports_disjoint",
        split.p_plus_perp.is_disjoint(&split.p_minus_perp)
            && split.p_plus_perp.is_disjoint(&split.p_theta)
            && split.p_minus_perp.is_disjoint(&split.p_theta)
            && split.p_plus().and(&split.p_minus()) == split.p_theta,
    );
    r.check(S, "reconstruction", split.reconstruction_residual(), 0.0);
    r.check(
        S,
        "vacuum_thermal_orthogonal",
        split.vacuum_thermal_overlap().max_abs(),
        0.0,
    );
    let fwd = split.best_estimate(Direction::InputToOutput);
    r.flag(
        S,
        "residual_support_is_n_plus",
        fwd.residual_support(1e-12) == masks.n_plus,
    );
    let exact = max_over(
        masks
            .n_plus
            .indices()
            .map(|k| (fwd.residual[(0, k)] - split.hat_vacuum[(0, k)]).norm()),
    )
    .max(max_over(
        masks.n_minus.indices().map(|k| fwd.residual[(0, k)].norm()),
    ));
    r.check(S, "residual_exact_off_theta", exact, 0.0);
    r.check(
        S,
        "residual_norm_sq",
        (fwd.residual_norm_sq()[0] - n_plus_oracle).abs(),
        1e-12,
    );
    let back = split.best_estimate(Direction::OutputToInput);
    r.flag(
        S,
        "reverse_residual_support_is_n_minus",
        back.residual_support(1e-12) == masks.n_minus,
    );

    let sampled = ComponentSplit::new(model.spectral_amplitudes(), pair)?;
    let est = sampled.best_estimate(Direction::InputToOutput);
    let rows = max_over(
        est.residual_norm_sq()
            .iter()
            .map(|v| (v - setup.eps * n_plus_oracle).abs()),
    );
    r.check(S, "sampled_residual_norm_sq", rows, 1e-12);
    r.flag(
        S,
        "sampled_residual_support_is_n_plus",
        est.residual_support(1e-12) == masks.n_plus,
    );

    let rev = pair.reversed();
    let flipped = ComponentSplit::new(SpectralAmplitudes::from_pair(&rev), &rev)?;
    r.flag(
        S,
        "flip_exchanges_split",
        flipped.check_vacuum == split.amplitudes.star(&split.check_vacuum)
            && flipped.p_plus_perp == split.p_minus_perp,
    );

    if masks.theta.count() > 0 {
        let k = modular_kernels_theta(pair, setup.eps)?;
        let scale = k.half.max_abs().max(1.0);
        r.check(
            S,
            "theta_kernel_modular_property",
            k.modular_residual() / scale,
            1e-10,
        );
        r.check(
            S,
            "theta_kernel_unit_convolution",
            k.convolution_residual(),
            1e-9,
        );
    }
    Ok(())
}

fn synthesis(setup: &Setup, r: &mut Report) -> Result<(), Error> {
    const S: &str = "synthesis";
    let (grid, pair) = (&setup.grid, &setup.pair);
    let filter = transmission_function(pair);
    let (on, off) = filter.standard.law_residuals();
    r.check(S, "standard_law_theta", on, 1e-12);
    r.check(S, "standard_law_off_theta", off, 1e-12);
    r.flag(
        S,
        "transmission_symmetric",
        grid.flipped(&filter.f) == filter.f,
    );
    let s = synthesize(&filter, &filter.standard)?;
    r.check(S, "spectrum_reproduction", s.relative_error(pair), 1e-10);
    r.check(S, "cross_spectrum_reproduction", s.cross_error(pair), 1e-10);
    let seq = CorrelationSequence::from_pair(pair, setup.eps)?;
    let got = reproduced_correlation(&s, grid, setup.eps)?;
    r.check(
        S,
        "correlation_reproduction",
        got.max_abs_diff(seq.values()),
        1e-9,
    );
    let kernels = time_domain_filter(&filter, setup.eps)?;
    r.check(
        S,
        "time_domain_convolution",
        kernels.convolution_residual(),
        1e-9,
    );
    r.check(S, "time_reversal", kernels.reversal_residual(), 1e-12);
    r.check(S, "filter_kernel_real", kernels.phi.max_imag(), 1e-12);
    let unique = max_over(
        filter
            .f
            .iter()
            .zip(implied_transmission(pair, &filter.standard))
            .filter_map(|(f, i)| i.map(|i| (f - i).abs() / i.max(1.0))),
    );
    r.check(S, "transmission_uniqueness", unique, 1e-12);
    if setup.config.model == ModelName::Planck {
        let (beta, h) = (
            setup.config.beta.unwrap_or(1.0),
            setup.config.h.unwrap_or(1.0),
        );
        let closed = max_over((0..grid.len()).map(|k| {
            let x = h * grid.nu(k);
            let want = if x == 0.0 {
                1.0 / beta
            } else {
                x / (2.0 * (beta * x / 2.0).sinh())
            };
            (filter.f[k] - want.sqrt()).abs()
        }));
        r.check(S, "planck_transmission_closed_form", closed, 1e-12);
    }
    Ok(())
}

fn qsi(setup: &Setup, model: &StationaryModel, r: &mut Report) -> Result<(), Error> {
    const S: &str = "qsi";
    let (grid, pair) = (&setup.grid, &setup.pair);
    let masks = pair.masks();
    let bands: Vec<Mask> = setup
        .config
        .intervals()
        .iter()
        .map(|[lo, hi]| Mask::band(grid, *lo, *hi))
        .collect();
    let mut pairs = Vec::new();
    for a in &bands {
        for b in &bands {
            pairs.push((a.clone(), b.clone()));
        }
    }
    pairs.push((Mask::full(grid.len()), Mask::full(grid.len())));

    let canonical = CanonicalPair::standard(grid, masks.retained.clone());
    r.check(
        S,
        "canonical_table_exact",
        canonical.table_residual(&pairs),
        0.0,
    );

    let table = integrator_table(pair);
    let dens = table.densities();
    let scale = pair.max_kappa().max(f64::MIN_POSITIVE);
    let dens_gap = max_over((0..grid.len()).map(|k| {
        (dens.kappa[k] - pair.kappa()[k])
            .abs()
            .max((dens.kappa_rev[k] - pair.kappa_rev()[k]).abs())
            .max((dens.gamma[k] - pair.gamma()[k]).abs())
    }));
    r.check(S, "integrator_densities", dens_gap / scale, 1e-12);

    let filter = transmission_function(pair);
    let synth = synthesize(&filter, &filter.standard)?;
    let y = build_y(&canonical, &synth.check, &synth.hat)?;
    let yd = y.densities();
    let y_gap = max_over((0..grid.len()).map(|k| {
        (yd.kappa[k] - synth.kappa[k])
            .abs()
            .max((yd.kappa_rev[k] - synth.kappa_rev[k]).abs())
    }));
    r.check(S, "y_table_matches_synthesis", y_gap / scale, 1e-12);

    let (a, b) = (
        Mask::band(grid, f64::NEG_INFINITY, 0.0),
        Mask::band(grid, 0.0, f64::INFINITY),
    );
    let b = b.and(&a.not());
    let whole = a.or(&b);
    let mut additivity: f64 = 0.0;
    for (_, d2) in &pairs {
        for s1 in [Side::Check, Side::Hat] {
            for s2 in [Side::Check, Side::Hat] {
                let parts = table.gram(s1, &a, s2, d2) + table.gram(s1, &b, s2, d2);
                additivity = additivity.max((table.gram(s1, &whole, s2, d2) - parts).norm());
            }
        }
    }
    r.check(S, "sigma_additivity", additivity / scale, 1e-12);

    let (s, sr) = (pair.sigma(), pair.sigma_rev());
    let nonclassical = Mask::from_fn(grid.len(), |k| masks.retained.contains(k) && s[k] != sr[k]);
    let restricted = CanonicalPair::standard(grid, nonclassical);
    let yr = build_y(&restricted, &s, &sr)?;
    let back = recover_canonical(&yr)?;
    r.flag(
        S,
        "recovery_round_trip_exact",
        back == restricted && build_y(&back, &s, &sr)? == yr,
    );
    if masks.retained.indices().any(|k| s[k] == sr[k]) {
        let full = build_y(&canonical, &s, &sr)?;
        r.flag(
            S,
            "recovery_degenerate_rejected",
            matches!(
                recover_canonical(&full),
                Err(Error::DegenerateRecovery { .. })
            ),
        );
    }
    match canonical_from_vacuum(pair) {
        Ok(c) => r.check(
            S,
            "vacuum_assembly_canonical",
            c.table_residual(&pairs),
            0.0,
        ),
        Err(Error::NotVacuum(_)) => r.flag(S, "thermal_assembly_rejected", masks.theta.count() > 0),
        Err(_) => r.flag(S, "nonstandard_vacuum_rejected", masks.theta.count() == 0),
    }

    let mut iso: f64 = 0.0;
    for (a, c) in test_functions(setup) {
        let direct = isometry_check(&a, &c, pair)?;
        let gram = isometry_gram(model, &a, &c)?;
        iso = iso
            .max((direct.0 - gram.0).abs() / direct.0.max(1.0))
            .max((direct.1 - gram.1).abs() / direct.1.max(1.0));
    }
    r.check(S, "isometry_matches_gram", iso, 1e-9);
    r.check(
        S,
        "reflection_symmetry",
        reflection_symmetry_check(model),
        1e-10,
    );

    let ones = vec![Complex64::new(1.0, 0.0); grid.len()];
    let zeros = vec![Complex64::new(0.0, 0.0); grid.len()];
    let rep = time_domain_representation(grid, &s, &ones, &zeros, setup.eps)?;
    r.check(S, "parseval_coefficients", rep.parseval_residual(), 1e-10);
    r.check(
        S,
        "symmetric_test_function_swap",
        rep.swap_residual(),
        1e-12,
    );
    let (a, c) = test_functions(setup).remove(2);
    let rep = time_domain_representation(grid, &s, &a, &c, setup.eps)?;
    r.check(
        S,
        "parseval_coefficients_general",
        rep.parseval_residual(),
        1e-10,
    );
    Ok(())
}

fn mode(r: &mut Report) -> Result<(), Error> {
    const S: &str = "mode";
    for n in MODE_OCCUPATIONS {
        r.check(
            S,
            &format!("thermal_table_n={n}"),
            ModeReport::new(n)?.residual(),
            1e-12,
        );
        let (b, br) = thermal_pair(n)?;
        let (a, c) = invert_pair(&b, &br, n)?;
        let gap = a
            .max_abs_diff(&ModeOperator::A)
            .max(c.max_abs_diff(&ModeOperator::C));
        r.check(S, &format!("inversion_n={n}"), gap, 1e-14);
    }
    Ok(())
}
