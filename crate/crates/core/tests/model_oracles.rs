use nalgebra::DMatrix;
use num_complex::Complex64;
use qnoise_core::model::MaxAbs;
use qnoise_core::{SpectralDensityPair, SpectralGrid, StationaryModel};
use std::f64::consts::TAU;

fn grid(n: usize) -> SpectralGrid {
    SpectralGrid::new(n, 8.0 / n as f64).unwrap()
}

fn mixed(grid: &SpectralGrid) -> SpectralDensityPair {
    let vals: Vec<f64> = grid
        .points()
        .iter()
        .map(|&nu| {
            if nu < -2.0 {
                0.75
            } else if nu <= 1.5 {
                (1.0 + nu / 4.0) * (1.0 + 0.3 * (3.0 * nu).cos())
            } else {
                0.0
            }
        })
        .collect();
    SpectralDensityPair::tabulated(&vals, grid).unwrap()
}

fn pairs(n: usize) -> Vec<(&'static str, SpectralDensityPair)> {
    let g = grid(n);
    vec![
        ("planck", SpectralDensityPair::planck(1.0, 1.0, &g).unwrap()),
        ("flat", SpectralDensityPair::flat(1.7, &g).unwrap()),
        ("mixed", mixed(&g)),
    ]
}

/// `(A)^(1/2)` of a Hermitian positive semidefinite matrix by eigendecomposition.
fn hermitian_sqrt(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = a.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(
        &eig.eigenvalues
            .map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0)),
    );
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

#[test]
fn first_row_dft_matches_density() {
    for n in [17, 33, 65] {
        for (name, pair) in pairs(n) {
            let model = StationaryModel::from_pair(&pair, pair.grid().dual_eps()).unwrap();
            let k = model.k_dense();
            let m = (n / 2) as i64;
            // K e_q = mu_q e_q with (e_q)_i = exp(2 pi i q i / n)
            for (idx, q) in (-m..=m).enumerate() {
                let mut mu = Complex64::new(0.0, 0.0);
                for d in 0..n {
                    mu += k[(d, 0)]
                        * Complex64::from_polar(1.0, -TAU * (q * d as i64) as f64 / n as f64);
                }
                let want = pair.kappa()[idx];
                assert!(
                    (mu.re - want).abs() < 1e-10 * model.norm()
                        && mu.im.abs() < 1e-10 * model.norm(),
                    "{name} n={n} q={q}: {mu} vs {want}"
                );
            }
        }
    }
}

#[test]
fn realization_grams_and_geometric_mean() {
    for n in [17, 33, 65] {
        for (name, pair) in pairs(n) {
            let model = StationaryModel::from_pair(&pair, pair.grid().dual_eps()).unwrap();
            let norm = model.norm();
            let (k, kr, g) = (model.k_dense(), model.k_rev_dense(), model.g_dense());
            let r = model.realization();
            assert!((r.gram() - &k).max_abs() < 1e-10 * norm, "{name} {n}");
            assert!((r.gram_rev() - &kr).max_abs() < 1e-10 * norm, "{name} {n}");
            assert!((r.gram_cross() - &g).max_abs() < 1e-10 * norm, "{name} {n}");
            assert!(
                (&r.x * &r.x_rev - &g).max_abs() < 1e-10 * norm,
                "{name} {n}"
            );
            assert!(
                (&g * &g - &k * &kr).norm() < 1e-9 * norm * norm,
                "{name} {n}"
            );
            assert!(
                (&k * &kr - &kr * &k).norm() < 1e-12 * norm * norm,
                "{name} {n}"
            );
            // eigensolver route to (K K_rev)^(1/2)
            let oracle = hermitian_sqrt(&(&k * &kr));
            assert!((oracle - &g).max_abs() < 1e-7 * norm, "{name} {n}");
            let x_oracle = hermitian_sqrt(&k);
            assert!(
                (x_oracle - model.x_dense()).max_abs() < 1e-7 * norm.sqrt(),
                "{name} {n}"
            );
        }
    }
}

#[test]
fn amplitude_grams_reproduce_model() {
    for (name, pair) in pairs(33) {
        let model = StationaryModel::from_pair(&pair, pair.grid().dual_eps()).unwrap();
        let amps = model.spectral_amplitudes();
        let dnu = pair.grid().step();
        let inner = qnoise_core::SpectralAmplitudes::inner;
        let norm = model.norm();
        assert!(
            (inner(&amps.check, &amps.check, dnu) - model.k_dense()).max_abs() < 1e-10 * norm,
            "{name}"
        );
        assert!(
            (inner(&amps.hat, &amps.hat, dnu) - model.k_rev_dense()).max_abs() < 1e-10 * norm,
            "{name}"
        );
        assert!(
            (inner(&amps.check, &amps.hat, dnu) - model.g_dense()).max_abs() < 1e-10 * norm,
            "{name}"
        );
    }
}

#[test]
fn modular_spectrum_is_boltzmann_factor() {
    for n in [17, 33, 65] {
        let g = grid(n);
        let pair = SpectralDensityPair::planck(1.0, 1.0, &g).unwrap();
        let model = StationaryModel::from_pair(&pair, g.dual_eps()).unwrap();
        let spec = model.modular().unwrap().spectrum();
        for (l, nu) in spec.iter().zip(g.points()) {
            let want = nu.exp();
            assert!((l - want).abs() < 1e-10 * want, "n={n} nu={nu}");
        }
        let l = model.modular().unwrap().l().to_dense();
        let kinv = model.k_dense().try_inverse().unwrap();
        assert!(
            (model.k_rev_dense() * kinv - l).max_abs()
                < 1e-8 * spec.iter().cloned().fold(0.0, f64::max)
        );
    }
}
