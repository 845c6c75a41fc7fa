//! Discrete flip-symmetric spectra.
//!
//! A [`SpectralGrid`] is an odd-sized arithmetic grid centred on `nu = 0`, so the
//! reflection `nu -> -nu` is the index map `k -> n - 1 - k` and is exact in
//! floating point. A [`SpectralDensityPair`] carries the density `kappa` of the
//! noise together with the density of its time reversal, `kappa_rev(nu) =
//! kappa(-nu)`, and everything derived pointwise from the two: the modular
//! function `lambda = kappa_rev / kappa`, the cross density `gamma = (kappa
//! kappa_rev)^(1/2)` and the support partition into `N+` (`kappa = 0`), `N-`
//! (`kappa_rev = 0`) and `Theta` (both positive).

use std::fmt;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Relative floor under which tabulated densities are snapped to zero.
pub const ZERO_SNAP: f64 = 1e-14;

/// Tolerance used by [`SpectralDensityPair::classify`].
pub const CLASSIFY_TOL: f64 = 1e-12;

/// Odd-sized symmetric frequency grid `nu_k = step * (k - (n - 1) / 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    step: f64,
    points: Vec<f64>,
}

impl SpectralGrid {
    pub fn new(n_points: usize, step: f64) -> Result<Self> {
        if n_points < 3 || n_points.is_multiple_of(2) {
            return invalid(format!(
                "grid needs an odd point count >= 3, got {n_points}"
            ));
        }
        if !(step > 0.0 && step.is_finite()) {
            return invalid(format!("grid step must be positive and finite, got {step}"));
        }
        let half = (n_points / 2) as i64;
        let points = (0..n_points as i64)
            .map(|k| step * (k - half) as f64)
            .collect();
        Ok(Self { step, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(n - 1) / 2`, the largest frequency index.
    pub fn half_width(&self) -> usize {
        self.points.len() / 2
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn nu(&self, k: usize) -> f64 {
        self.points[k]
    }

    /// Signed frequency index `k - (n - 1) / 2`.
    pub fn freq_index(&self, k: usize) -> i64 {
        k as i64 - self.half_width() as i64
    }

    /// Grid index of `-nu_k`.
    pub fn flip(&self, k: usize) -> usize {
        self.points.len() - 1 - k
    }

    /// Index of `nu = 0`.
    pub fn zero_index(&self) -> usize {
        self.half_width()
    }

    /// Time step dual to this grid, `1 / (n * step)`.
    pub fn dual_eps(&self) -> f64 {
        1.0 / (self.points.len() as f64 * self.step)
    }

    /// Checks `n * step * eps = 1` within `1e-9`.
    pub fn check_eps(&self, eps: f64) -> Result<()> {
        let product = self.points.len() as f64 * self.step * eps;
        if !(eps > 0.0) || (product - 1.0).abs() > 1e-9 {
            return Err(Error::GridMismatch(format!(
                "n * step * eps = {product} (n = {}, step = {}, eps = {eps}); expected 1",
                self.points.len(),
                self.step
            )));
        }
        Ok(())
    }

    /// Reverses a per-point vector along the flip.
    pub fn flipped<T: Clone>(&self, values: &[T]) -> Vec<T> {
        values.iter().rev().cloned().collect()
    }
}

/// A subset of grid cells.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mask(Vec<bool>);

impl Mask {
    pub fn empty(n: usize) -> Self {
        Mask(vec![false; n])
    }

    pub fn full(n: usize) -> Self {
        Mask(vec![true; n])
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> bool) -> Self {
        Mask((0..n).map(f).collect())
    }

    pub fn from_indices(n: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut m = Self::empty(n);
        for i in indices {
            m.0[i] = true;
        }
        m
    }

    /// All cells with `lo <= nu <= hi`.
    pub fn band(grid: &SpectralGrid, lo: f64, hi: f64) -> Self {
        Self::from_fn(grid.len(), |k| {
            let nu = grid.nu(k);
            nu >= lo && nu <= hi
        })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        !self.0.iter().any(|&b| b)
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.0[k]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(k, _)| k)
    }

    pub fn and(&self, other: &Mask) -> Mask {
        Mask(self.0.iter().zip(&other.0).map(|(a, b)| *a && *b).collect())
    }

    pub fn or(&self, other: &Mask) -> Mask {
        Mask(self.0.iter().zip(&other.0).map(|(a, b)| *a || *b).collect())
    }

    pub fn not(&self) -> Mask {
        Mask(self.0.iter().map(|b| !b).collect())
    }

    pub fn is_disjoint(&self, other: &Mask) -> bool {
        self.and(other).is_empty()
    }

    /// Image under `nu -> -nu`.
    pub fn flip(&self) -> Mask {
        Mask(self.0.iter().rev().copied().collect())
    }

    /// Quadrature measure `count * step`.
    pub fn measure(&self, grid: &SpectralGrid) -> f64 {
        self.count() as f64 * grid.step()
    }
}

/// The support partition of a density pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportMasks {
    /// `N+`: `kappa = 0 < kappa_rev`.
    pub n_plus: Mask,
    /// `N-`: `kappa_rev = 0 < kappa`.
    pub n_minus: Mask,
    /// `Theta`: both positive.
    pub theta: Mask,
    /// `Omega = N+ u N- u Theta`; the null points `kappa = kappa_rev = 0` are dropped.
    pub retained: Mask,
}

/// Membership label of a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Support {
    NPlus,
    NMinus,
    Theta,
    Null,
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Support::NPlus => "N+",
            Support::NMinus => "N-",
            Support::Theta => "Theta",
            Support::Null => "N0",
        })
    }
}

/// Noise class labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseClass {
    StandardVacuum,
    Vacuum,
    StandardThermal,
    Thermal,
    White,
    Mixed,
}

impl fmt::Display for NoiseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseClass::StandardVacuum => "standard-vacuum",
            NoiseClass::Vacuum => "vacuum",
            NoiseClass::StandardThermal => "standard-thermal",
            NoiseClass::Thermal => "thermal",
            NoiseClass::White => "white",
            NoiseClass::Mixed => "mixed",
        })
    }
}

/// Result of [`SpectralDensityPair::classify`]. A pair can carry several labels
/// at once (flat unit noise is white and standard thermal).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    labels: Vec<NoiseClass>,
}

impl Classification {
    pub fn labels(&self) -> &[NoiseClass] {
        &self.labels
    }

    pub fn is(&self, class: NoiseClass) -> bool {
        self.labels.contains(&class)
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.labels.iter().map(ToString::to_string).collect();
        f.write_str(&names.join(","))
    }
}

/// Sampled density of a noise and of its time reversal.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensityPair {
    grid: SpectralGrid,
    kappa: Vec<f64>,
    kappa_rev: Vec<f64>,
    lambda: Vec<Option<f64>>,
    gamma: Vec<f64>,
    masks: SupportMasks,
}

impl SpectralDensityPair {
    /// Builds a pair from already-validated nonnegative densities. `kappa_rev` is
    /// always taken as the flipped `kappa`.
    fn from_kappa(grid: SpectralGrid, kappa: Vec<f64>) -> Self {
        let n = grid.len();
        let kappa_rev = grid.flipped(&kappa);
        let n_plus = Mask::from_fn(n, |k| kappa[k] == 0.0 && kappa_rev[k] > 0.0);
        let n_minus = Mask::from_fn(n, |k| kappa_rev[k] == 0.0 && kappa[k] > 0.0);
        let theta = Mask::from_fn(n, |k| kappa[k] > 0.0 && kappa_rev[k] > 0.0);
        let retained = Mask::from_fn(n, |k| kappa[k] + kappa_rev[k] > 0.0);
        let lambda = (0..n)
            .map(|k| theta.contains(k).then(|| kappa_rev[k] / kappa[k]))
            .collect();
        let gamma = (0..n).map(|k| (kappa[k] * kappa_rev[k]).sqrt()).collect();
        Self {
            grid,
            kappa,
            kappa_rev,
            lambda,
            gamma,
            masks: SupportMasks {
                n_plus,
                n_minus,
                theta,
                retained,
            },
        }
    }

    /// Equilibrium (Planck) density `kappa(nu) = h nu / (exp(beta h nu) - 1)`.
    ///
    /// The removable singularity at `nu = 0` is filled with `1 / beta`. `beta = 0`
    /// is the classical white limit, where `kappa` diverges; use
    /// [`SpectralDensityPair::flat`] for it.
    pub fn planck(beta: f64, h: f64, grid: &SpectralGrid) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return invalid(format!("beta must be finite and nonnegative, got {beta}"));
        }
        if beta == 0.0 {
            return invalid(
                "beta = 0 is the infinite-temperature white limit (kappa = 1/beta diverges); \
                 use the flat density instead",
            );
        }
        if !(h > 0.0) || !h.is_finite() {
            return invalid(format!("h must be positive and finite, got {h}"));
        }
        let kappa = grid
            .points()
            .iter()
            .map(|&nu| {
                let x = beta * h * nu;
                if x == 0.0 {
                    1.0 / beta
                } else {
                    h * nu / x.exp_m1()
                }
            })
            .collect();
        Ok(Self::from_kappa(grid.clone(), kappa))
    }

    /// Flat (white) density `kappa = kappa_rev = sigma2`.
    pub fn flat(sigma2: f64, grid: &SpectralGrid) -> Result<Self> {
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return invalid(format!(
                "sigma2 must be finite and nonnegative, got {sigma2}"
            ));
        }
        Ok(Self::from_kappa(grid.clone(), vec![sigma2; grid.len()]))
    }

    /// Density given pointwise on the grid. Values below `1e-14 * max(kappa)` are
    /// snapped to zero so the support partition is crisp.
    pub fn tabulated(values: &[f64], grid: &SpectralGrid) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!(
                "expected {} density values, got {}",
                grid.len(),
                values.len()
            ));
        }
        if let Some((k, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
        {
            return invalid(format!(
                "density value {v} at index {k} is negative or not finite"
            ));
        }
        let max = values.iter().cloned().fold(0.0, f64::max);
        let floor = ZERO_SNAP * max;
        let kappa = values
            .iter()
            .map(|&v| if v < floor { 0.0 } else { v })
            .collect();
        Ok(Self::from_kappa(grid.clone(), kappa))
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn kappa_rev(&self) -> &[f64] {
        &self.kappa_rev
    }

    /// `lambda = kappa_rev / kappa` on `Theta`, `None` elsewhere.
    pub fn lambda(&self) -> &[Option<f64>] {
        &self.lambda
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn masks(&self) -> &SupportMasks {
        &self.masks
    }

    /// `sigma = kappa^(1/2)`.
    pub fn sigma(&self) -> Vec<f64> {
        self.kappa.iter().map(|v| v.sqrt()).collect()
    }

    /// `sigma_rev = kappa_rev^(1/2)`.
    pub fn sigma_rev(&self) -> Vec<f64> {
        self.kappa_rev.iter().map(|v| v.sqrt()).collect()
    }

    /// `lambda_Theta^p` with the convention that it vanishes off `Theta`.
    pub fn lambda_theta_pow(&self, p: f64) -> Vec<f64> {
        self.lambda
            .iter()
            .map(|l| l.map_or(0.0, |l| l.powf(p)))
            .collect()
    }

    pub fn support(&self, k: usize) -> Support {
        let m = &self.masks;
        if m.theta.contains(k) {
            Support::Theta
        } else if m.n_plus.contains(k) {
            Support::NPlus
        } else if m.n_minus.contains(k) {
            Support::NMinus
        } else {
            Support::Null
        }
    }

    pub fn max_kappa(&self) -> f64 {
        self.kappa.iter().cloned().fold(0.0, f64::max)
    }

    /// The pair of the reversed process: `kappa` and `kappa_rev` exchanged.
    pub fn reversed(&self) -> Self {
        Self::from_kappa(self.grid.clone(), self.kappa_rev.clone())
    }

    pub fn classify(&self) -> Classification {
        self.classify_with_tolerance(CLASSIFY_TOL)
    }

    /// Vacuum iff `Theta` is empty; thermal iff `N+` and `N-` are empty (and the
    /// retained set is not); the standard variants additionally require
    /// `kappa + kappa_rev = 1`, respectively `kappa kappa_rev = 1`, at every
    /// retained point; white iff `kappa = kappa_rev = const`.
    pub fn classify_with_tolerance(&self, tol: f64) -> Classification {
        let m = &self.masks;
        let retained: Vec<usize> = m.retained.indices().collect();
        let mut labels = Vec::new();

        let vacuum = m.theta.is_empty();
        let thermal = !retained.is_empty() && m.n_plus.is_empty() && m.n_minus.is_empty();
        if vacuum {
            let standard = !retained.is_empty()
                && retained
                    .iter()
                    .all(|&k| (self.kappa[k] + self.kappa_rev[k] - 1.0).abs() <= tol);
            if standard {
                labels.push(NoiseClass::StandardVacuum);
            }
            labels.push(NoiseClass::Vacuum);
        }
        if thermal {
            let standard = retained
                .iter()
                .all(|&k| (self.kappa[k] * self.kappa_rev[k] - 1.0).abs() <= tol);
            if standard {
                labels.push(NoiseClass::StandardThermal);
            }
            labels.push(NoiseClass::Thermal);
            let level = self.kappa[retained[0]];
            let scale = level.abs().max(f64::MIN_POSITIVE);
            let white = m.retained.count() == self.grid.len()
                && self.kappa.iter().all(|&v| (v - level).abs() <= tol * scale);
            if white {
                labels.push(NoiseClass::White);
            }
        }
        if !vacuum && !thermal {
            labels.push(NoiseClass::Mixed);
        }
        Classification { labels }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid3() -> SpectralGrid {
        SpectralGrid::new(3, 1.0).unwrap()
    }

    #[test]
    fn grid_points() {
        assert_eq!(grid3().points(), &[-1.0, 0.0, 1.0]);
        let g = SpectralGrid::new(5, 0.5).unwrap();
        assert_eq!(g.points(), &[-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(matches!(
            SpectralGrid::new(4, 1.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(SpectralGrid::new(1, 1.0).is_err());
        assert!(SpectralGrid::new(5, 0.0).is_err());
        assert!(SpectralGrid::new(5, -1.0).is_err());
        assert!(SpectralGrid::new(5, f64::NAN).is_err());
    }

    #[test]
    fn grid_flip_is_exact_involution() {
        let g = SpectralGrid::new(129, 0.037).unwrap();
        for k in 0..g.len() {
            assert_eq!(g.flip(g.flip(k)), k);
            assert_eq!(g.nu(g.flip(k)), -g.nu(k));
        }
        assert_eq!(g.nu(g.zero_index()), 0.0);
    }

    #[test]
    fn eps_duality() {
        let g = SpectralGrid::new(65, 0.25).unwrap();
        g.check_eps(1.0 / 16.25).unwrap();
        assert!(matches!(g.check_eps(0.1), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn planck_at_unit_frequency() {
        let p = SpectralDensityPair::planck(1.0, 1.0, &grid3()).unwrap();
        // 1 / (e - 1) and e / (e - 1)
        let e = std::f64::consts::E;
        assert_relative_eq!(p.kappa()[2], 1.0 / (e - 1.0), max_relative = 1e-14);
        assert_relative_eq!(p.kappa()[2], 0.5819767068693265, max_relative = 1e-14);
        assert_relative_eq!(p.kappa_rev()[2], 1.5819767068693265, max_relative = 1e-14);
        assert_relative_eq!(p.kappa_rev()[2] - p.kappa()[2], 1.0, max_relative = 1e-12);
        assert_relative_eq!(p.kappa()[0], 1.5819767068693265, max_relative = 1e-14);
        assert_eq!(p.kappa()[1], 1.0);
        assert_eq!(p.lambda()[1], Some(1.0));
    }

    #[test]
    fn planck_zero_frequency_matches_limit() {
        // Two-level Richardson extrapolation of h nu / (exp(beta h nu) - 1) towards nu = 0.
        let f = |nu: f64| nu / nu.exp_m1();
        let r1 = |h: f64| 2.0 * f(h / 2.0) - f(h);
        let h = 1e-2;
        let limit = (4.0 * r1(h / 2.0) - r1(h)) / 3.0;
        assert!((limit - 1.0).abs() < 1e-9);
        let p = SpectralDensityPair::planck(1.0, 1.0, &grid3()).unwrap();
        assert!((p.kappa()[1] - limit).abs() < 1e-9);
        assert_eq!(p.kappa()[1], p.kappa_rev()[1]);
    }

    #[test]
    fn planck_rejects_bad_parameters() {
        let g = grid3();
        assert!(SpectralDensityPair::planck(-1.0, 1.0, &g).is_err());
        assert!(SpectralDensityPair::planck(0.0, 1.0, &g).is_err());
        assert!(SpectralDensityPair::planck(1.0, 0.0, &g).is_err());
    }

    #[test]
    fn planck_identities_on_grid() {
        let g = SpectralGrid::new(65, 0.25).unwrap();
        let (beta, h) = (1.3, 0.7);
        let p = SpectralDensityPair::planck(beta, h, &g).unwrap();
        assert!(p.masks().theta.count() == g.len());
        for k in 0..g.len() {
            let nu = g.nu(k);
            let diff = p.kappa_rev()[k] - p.kappa()[k];
            assert!((diff - h * nu).abs() <= 1e-12 * (h * nu).abs().max(1e-300));
            let lam = p.lambda()[k].unwrap();
            assert_relative_eq!(lam, (beta * h * nu).exp(), max_relative = 1e-12);
        }
    }

    #[test]
    fn flat_densities() {
        let g = SpectralGrid::new(9, 0.3).unwrap();
        let p = SpectralDensityPair::flat(1.0, &g).unwrap();
        assert!(p.kappa().iter().all(|&v| v == 1.0));
        assert!(p.lambda().iter().all(|&l| l == Some(1.0)));

        let p = SpectralDensityPair::flat(2.5, &g).unwrap();
        assert!(p.gamma().iter().all(|&v| v == 2.5));

        let p = SpectralDensityPair::flat(0.0, &g).unwrap();
        assert!(p.masks().retained.is_empty());

        assert!(SpectralDensityPair::flat(-1.0, &g).is_err());
    }

    #[test]
    fn tabulated_vacuum_masks() {
        let p = SpectralDensityPair::tabulated(&[0.0, 0.0, 1.0], &grid3()).unwrap();
        assert_eq!(p.kappa_rev(), &[1.0, 0.0, 0.0]);
        let m = p.masks();
        assert_eq!(m.n_plus, Mask::from_indices(3, [0]));
        assert_eq!(m.n_minus, Mask::from_indices(3, [2]));
        assert!(m.theta.is_empty());
        assert_eq!(m.retained, Mask::from_indices(3, [0, 2]));
        assert_eq!(p.support(1), Support::Null);
    }

    #[test]
    fn tabulated_lambda() {
        let p = SpectralDensityPair::tabulated(&[2.0, 1.0, 0.5], &grid3()).unwrap();
        assert_eq!(p.lambda()[2], Some(4.0));
        assert_eq!(p.lambda()[0], Some(0.25));
        assert_eq!(p.lambda()[1], Some(1.0));
        let p = SpectralDensityPair::tabulated(&[1.0, 1.0, 1.0], &grid3()).unwrap();
        assert_eq!(p.masks().theta.count(), 3);
    }

    #[test]
    fn tabulated_rejects_bad_input() {
        let g = grid3();
        assert!(SpectralDensityPair::tabulated(&[1.0, 1.0], &g).is_err());
        assert!(SpectralDensityPair::tabulated(&[1.0, -1.0, 1.0], &g).is_err());
        assert!(SpectralDensityPair::tabulated(&[1.0, f64::NAN, 1.0], &g).is_err());
    }

    #[test]
    fn tabulated_snaps_tiny_values() {
        let p = SpectralDensityPair::tabulated(&[1e-20, 1.0, 2.0], &grid3()).unwrap();
        assert_eq!(p.kappa()[0], 0.0);
        assert!(p.masks().n_plus.contains(0));
    }

    #[test]
    fn classification() {
        let g = SpectralGrid::new(9, 0.5).unwrap();
        let white = SpectralDensityPair::flat(1.0, &g).unwrap().classify();
        assert!(white.is(NoiseClass::White));
        assert!(white.is(NoiseClass::StandardThermal));

        let white2 = SpectralDensityPair::flat(2.0, &g).unwrap().classify();
        assert!(white2.is(NoiseClass::White));
        assert!(!white2.is(NoiseClass::StandardThermal));

        let vac = SpectralDensityPair::tabulated(&[0.0, 0.0, 1.0], &grid3())
            .unwrap()
            .classify();
        assert!(vac.is(NoiseClass::StandardVacuum));
        assert!(vac.is(NoiseClass::Vacuum));

        let planck = SpectralDensityPair::planck(1.0, 1.0, &g)
            .unwrap()
            .classify();
        assert!(planck.is(NoiseClass::Thermal));
        assert!(!planck.is(NoiseClass::StandardThermal));
        assert!(!planck.is(NoiseClass::White));

        let mixed = SpectralDensityPair::tabulated(
            &[0.0, 1.0, 1.0, 1.0, 2.0],
            &SpectralGrid::new(5, 1.0).unwrap(),
        )
        .unwrap()
        .classify();
        assert_eq!(mixed.labels(), &[NoiseClass::Mixed]);
    }
}
