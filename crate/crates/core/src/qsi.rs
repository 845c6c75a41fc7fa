//! Second-order quantum stochastic integration on a frequency grid.
//!
//! Every operator-valued measure is stored through its density against the
//! canonical pair, `M(dnu) = alpha(nu) A_-(dnu) + beta(nu) A+(dnu)`, restricted
//! to a support mask. In the vacuum of the canonical pair the only nonzero
//! ordered product is `A_-(-D) A+(D')`, so every second moment is a finite sum
//! of coefficient products:
//!
//! `m(M1(D1) M2(D2)) = sum_{mu in (-D1) n D2} alpha1(-mu) beta2(mu) dnu`.
//!
//! The adjoint of `M(D)` is a measure on `-D` with
//! `alpha'(mu) = conj(beta(-mu))`, `beta'(mu) = conj(alpha(-mu))`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fourier::{PhaseTable, TimeKernel, Transformer};
use crate::model::{MaxAbs, StationaryModel};
use crate::spectra::{Mask, SpectralDensityPair, SpectralGrid};

/// Relative tolerance of the flip relation `sigma_rev(nu) = sigma(-nu)`.
pub const FLIP_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn real(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// A measure `alpha A_- + beta A+` supported on `support`. Coefficients off
/// the support carry no meaning and are ignored by equality.
#[derive(Debug, Clone)]
pub struct Measure {
    pub alpha: Vec<Complex64>,
    pub beta: Vec<Complex64>,
    pub support: Mask,
}

impl Measure {
    pub fn new(alpha: Vec<Complex64>, beta: Vec<Complex64>, support: Mask) -> Self {
        assert_eq!(alpha.len(), beta.len());
        assert_eq!(alpha.len(), support.len());
        Self {
            alpha,
            beta,
            support,
        }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// `M(.)^dag`, carried on the reflected support.
    pub fn adjoint(&self) -> Self {
        let n = self.len();
        let flip = |k: usize| n - 1 - k;
        Self {
            alpha: (0..n).map(|k| self.beta[flip(k)].conj()).collect(),
            beta: (0..n).map(|k| self.alpha[flip(k)].conj()).collect(),
            support: self.support.flip(),
        }
    }

    /// Pointwise combination `p * self + q * other` on the union of supports.
    pub fn combine(&self, p: &[Complex64], other: &Measure, q: &[Complex64]) -> Self {
        let n = self.len();
        Self {
            alpha: (0..n)
                .map(|k| p[k] * self.alpha[k] + q[k] * other.alpha[k])
                .collect(),
            beta: (0..n)
                .map(|k| p[k] * self.beta[k] + q[k] * other.beta[k])
                .collect(),
            support: self.support.or(&other.support),
        }
    }

    pub fn restrict(&self, mask: &Mask) -> Self {
        Self {
            alpha: self.alpha.clone(),
            beta: self.beta.clone(),
            support: self.support.and(mask),
        }
    }
}

impl PartialEq for Measure {
    fn eq(&self, other: &Self) -> bool {
        self.support == other.support
            && self
                .support
                .indices()
                .all(|k| self.alpha[k] == other.alpha[k] && self.beta[k] == other.beta[k])
    }
}

/// `m(M1(D1) M2(D2))` in the canonical vacuum.
pub fn ordered_moment(
    grid: &SpectralGrid,
    m1: &Measure,
    d1: &Mask,
    m2: &Measure,
    d2: &Mask,
) -> Complex64 {
    let mut acc = ZERO;
    for mu in 0..grid.len() {
        let neg = grid.flip(mu);
        if d2.contains(mu)
            && m2.support.contains(mu)
            && d1.contains(neg)
            && m1.support.contains(neg)
        {
            acc += m1.alpha[neg] * m2.beta[mu];
        }
    }
    acc * grid.step()
}

/// `m(M1(D) M2(D')^dag)`.
pub fn gram(grid: &SpectralGrid, m1: &Measure, d: &Mask, m2: &Measure, d2: &Mask) -> Complex64 {
    ordered_moment(grid, m1, d, &m2.adjoint(), &d2.flip())
}

/// The creation/annihilation pair `A_- = (1, 0)`, `A+ = (0, 1)` on a support.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalPair {
    pub grid: SpectralGrid,
    pub a_minus: Measure,
    pub a_plus: Measure,
}

/// Ordered products of the canonical pair over `(-D, D')` or `(D, D')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalMoments {
    /// `m(A_-(-D) A+(D'))`.
    pub minus_plus: f64,
    /// `m(A+(-D) A_-(D'))`.
    pub plus_minus: f64,
    /// `m(A+(D) A+(D'))`.
    pub plus_plus: f64,
    /// `m(A_-(D) A_-(D'))`.
    pub minus_minus: f64,
    /// Largest imaginary part among the four.
    pub imag: f64,
}

impl CanonicalPair {
    pub fn standard(grid: &SpectralGrid, support: Mask) -> Self {
        let n = grid.len();
        Self {
            grid: grid.clone(),
            a_minus: Measure::new(vec![ONE; n], vec![ZERO; n], support.clone()),
            a_plus: Measure::new(vec![ZERO; n], vec![ONE; n], support),
        }
    }

    pub fn support(&self) -> Mask {
        self.a_minus.support.or(&self.a_plus.support)
    }

    pub fn moments(&self, d: &Mask, d2: &Mask) -> CanonicalMoments {
        let g = &self.grid;
        let (am, ap) = (&self.a_minus, &self.a_plus);
        let vals = [
            ordered_moment(g, am, &d.flip(), ap, d2),
            ordered_moment(g, ap, &d.flip(), am, d2),
            ordered_moment(g, ap, d, ap, d2),
            ordered_moment(g, am, d, am, d2),
        ];
        CanonicalMoments {
            minus_plus: vals[0].re,
            plus_minus: vals[1].re,
            plus_plus: vals[2].re,
            minus_minus: vals[3].re,
            imag: vals.iter().map(|v| v.im.abs()).fold(0.0, f64::max),
        }
    }

    /// Largest deviation from the canonical table over the given interval pairs:
    /// `|m(A_-(-D)A+(D')) - |D n D' n Omega||` and the absolute values of the
    /// three vanishing products.
    pub fn table_residual(&self, intervals: &[(Mask, Mask)]) -> f64 {
        let omega = self.support();
        intervals
            .iter()
            .map(|(d, d2)| {
                let m = self.moments(d, d2);
                let want = d.and(d2).and(&omega).measure(&self.grid);
                (m.minus_plus - want)
                    .abs()
                    .max(m.plus_minus.abs())
                    .max(m.plus_plus.abs())
                    .max(m.minus_minus.abs())
                    .max(m.imag)
            })
            .fold(0.0, f64::max)
    }
}

/// Per-point densities of a pair of measures against their adjoints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PanelDensities {
    /// `m(check check^dag)` density.
    pub kappa: Vec<f64>,
    /// `m(hat hat^dag)` density.
    pub kappa_rev: Vec<f64>,
    /// `m(check hat^dag)` density.
    pub gamma: Vec<f64>,
}

/// A pair of measures `(check, hat)` and their second-moment table.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasureTable {
    pub grid: SpectralGrid,
    pub check: Measure,
    pub hat: Measure,
    /// Amplitude densities used to build the pair.
    pub sigma: Vec<f64>,
    pub sigma_rev: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Check,
    Hat,
}

/// Four entries `m(M1(D) M2(D')^dag)` of a table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GramEntries {
    pub check_check: f64,
    pub hat_check: f64,
    pub check_hat: f64,
    pub hat_hat: f64,
}

impl SpectralMeasureTable {
    fn side(&self, s: Side) -> &Measure {
        match s {
            Side::Check => &self.check,
            Side::Hat => &self.hat,
        }
    }

    pub fn gram(&self, s1: Side, d: &Mask, s2: Side, d2: &Mask) -> Complex64 {
        gram(&self.grid, self.side(s1), d, self.side(s2), d2)
    }

    pub fn entries(&self, d: &Mask, d2: &Mask) -> GramEntries {
        let e = |a, b| self.gram(a, d, b, d2).re;
        GramEntries {
            check_check: e(Side::Check, Side::Check),
            hat_check: e(Side::Hat, Side::Check),
            check_hat: e(Side::Check, Side::Hat),
            hat_hat: e(Side::Hat, Side::Hat),
        }
    }

    /// Densities read off single-cell moments, divided by the cell width.
    pub fn densities(&self) -> PanelDensities {
        let n = self.grid.len();
        let cell = |k: usize| Mask::from_indices(n, [k]);
        let dnu = self.grid.step();
        let at = |a, b, k| self.gram(a, &cell(k), b, &cell(k)).re / dnu;
        PanelDensities {
            kappa: (0..n).map(|k| at(Side::Check, Side::Check, k)).collect(),
            kappa_rev: (0..n).map(|k| at(Side::Hat, Side::Hat, k)).collect(),
            gamma: (0..n).map(|k| at(Side::Check, Side::Hat, k)).collect(),
        }
    }
}

fn check_flip(grid: &SpectralGrid, sigma: &[f64], sigma_rev: &[f64]) -> Result<()> {
    let n = grid.len();
    if sigma.len() != n || sigma_rev.len() != n {
        return invalid(format!("expected {n} amplitude samples"));
    }
    if sigma
        .iter()
        .chain(sigma_rev)
        .any(|&s| !(s >= 0.0) || !s.is_finite())
    {
        return invalid("amplitudes must be finite and nonnegative");
    }
    let scale = sigma.iter().cloned().fold(0.0, f64::max);
    for k in 0..n {
        let gap = (sigma_rev[k] - sigma[grid.flip(k)]).abs();
        if gap > FLIP_TOL * scale {
            return invalid(format!(
                "sigma_rev({}) differs from sigma({}) by {gap:e}",
                grid.nu(k),
                grid.nu(grid.flip(k))
            ));
        }
    }
    Ok(())
}

/// `Y_check = sigma A_- + sigma_rev A+`, `Y_hat = sigma_rev A_- + sigma A+`.
pub fn build_y(
    canonical: &CanonicalPair,
    sigma: &[f64],
    sigma_rev: &[f64],
) -> Result<SpectralMeasureTable> {
    let grid = &canonical.grid;
    check_flip(grid, sigma, sigma_rev)?;
    let s = real(sigma);
    let sr = real(sigma_rev);
    Ok(SpectralMeasureTable {
        grid: grid.clone(),
        check: canonical.a_minus.combine(&s, &canonical.a_plus, &sr),
        hat: canonical.a_minus.combine(&sr, &canonical.a_plus, &s),
        sigma: sigma.to_vec(),
        sigma_rev: sigma_rev.to_vec(),
    })
}

/// The integrators `X_check`, `X_hat` of a density pair, with `sigma = kappa^(1/2)`.
pub fn integrator_table(pair: &SpectralDensityPair) -> SpectralMeasureTable {
    let canonical = CanonicalPair::standard(pair.grid(), pair.masks().retained.clone());
    build_y(&canonical, &pair.sigma(), &pair.sigma_rev())
        .expect("amplitudes of a density pair satisfy the flip relation")
}

/// Inverts `build_y`: `(sigma_rev^2 - sigma^2) A+ = sigma_rev Y_check - sigma Y_hat`
/// and `(sigma_rev^2 - sigma^2) A_- = sigma_rev Y_hat - sigma Y_check`.
pub fn recover_canonical(table: &SpectralMeasureTable) -> Result<CanonicalPair> {
    let grid = &table.grid;
    let (s, sr) = (&table.sigma, &table.sigma_rev);
    let support = table.check.support.or(&table.hat.support);
    for k in support.indices() {
        if s[k] == sr[k] {
            return Err(Error::DegenerateRecovery { nu: grid.nu(k) });
        }
    }
    let n = grid.len();
    let det: Vec<f64> = (0..n).map(|k| sr[k] * sr[k] - s[k] * s[k]).collect();
    let neg_s: Vec<f64> = s.iter().map(|x| -x).collect();
    let divide = |m: Measure| {
        let div = |v: &[Complex64]| -> Vec<Complex64> {
            (0..n)
                .map(|k| if det[k] == 0.0 { ZERO } else { v[k] / det[k] })
                .collect()
        };
        Measure {
            alpha: div(&m.alpha),
            beta: div(&m.beta),
            support: support.clone(),
        }
    };
    let plus = table.check.combine(&real(sr), &table.hat, &real(&neg_s));
    let minus = table.hat.combine(&real(sr), &table.check, &real(&neg_s));
    Ok(CanonicalPair {
        grid: grid.clone(),
        a_minus: divide(minus),
        a_plus: divide(plus),
    })
}

/// Assembles the canonical pair from the integrators of a standard vacuum pair:
/// `A+ = X_hat` on `N-`, `X_check` on `N+`; `A_- = X_check` on `N-`, `X_hat` on `N+`.
pub fn canonical_from_vacuum(pair: &SpectralDensityPair) -> Result<CanonicalPair> {
    let masks = pair.masks();
    if masks.theta.count() > 0 {
        return Err(Error::NotVacuum(masks.theta.count()));
    }
    for k in masks.retained.indices() {
        if pair.kappa()[k] + pair.kappa_rev()[k] != 1.0 {
            return invalid(format!(
                "not a standard vacuum: kappa + kappa_rev = {} at nu = {}",
                pair.kappa()[k] + pair.kappa_rev()[k],
                pair.grid().nu(k)
            ));
        }
    }
    let x = integrator_table(pair);
    let on = |m: &Mask| -> Vec<Complex64> {
        (0..m.len())
            .map(|k| if m.contains(k) { ONE } else { ZERO })
            .collect()
    };
    let (minus, plus) = (on(&masks.n_minus), on(&masks.n_plus));
    let a_plus =
        x.hat
            .restrict(&masks.n_minus)
            .combine(&minus, &x.check.restrict(&masks.n_plus), &plus);
    let a_minus =
        x.check
            .restrict(&masks.n_minus)
            .combine(&minus, &x.hat.restrict(&masks.n_plus), &plus);
    Ok(CanonicalPair {
        grid: pair.grid().clone(),
        a_minus,
        a_plus,
    })
}

/// `z^star(nu) = conj(z(-nu))`.
pub fn star(z: &[Complex64]) -> Vec<Complex64> {
    z.iter().rev().map(|v| v.conj()).collect()
}

/// `(<y^dag y>, <y y^dag>)` for `y = int a dX_check + c dX_hat`:
/// the norms of `b = a kappa^(1/2) + c kappa_rev^(1/2)` and of `b^star`-built analogue.
pub fn isometry_check(
    a: &[Complex64],
    c: &[Complex64],
    pair: &SpectralDensityPair,
) -> Result<(f64, f64)> {
    let n = pair.grid().len();
    if a.len() != n || c.len() != n {
        return invalid(format!(
            "expected {n} coefficients, got {} and {}",
            a.len(),
            c.len()
        ));
    }
    let s = pair.sigma();
    let sr = pair.sigma_rev();
    let norm = |a: &[Complex64], c: &[Complex64]| -> f64 {
        (0..n)
            .map(|k| (a[k] * s[k] + c[k] * sr[k]).norm_sqr())
            .sum::<f64>()
            * pair.grid().step()
    };
    Ok((norm(a, c), norm(&star(a), &star(c))))
}

/// The same pair of moments computed from the Gram matrices of the realization:
/// `zeta^dag K zeta + 2 Re zeta^dag G xi + xi^dag K_rev xi` with
/// `zeta_j = dnu sum_k a(nu_k) conj(u_j(nu_k))`.
pub fn isometry_gram(
    model: &StationaryModel,
    a: &[Complex64],
    c: &[Complex64],
) -> Result<(f64, f64)> {
    use nalgebra::DVector;
    let n = model.dim();
    if a.len() != n || c.len() != n {
        return invalid(format!(
            "expected {n} coefficients, got {} and {}",
            a.len(),
            c.len()
        ));
    }
    let grid = model.grid();
    let table = PhaseTable::new(n);
    let root_eps = model.eps().sqrt();
    // u_j(nu_k) = eps^(1/2) exp(-2 pi i q_k j / n)
    let u = |j: usize, k: usize| table.neg(grid.freq_index(k), j as i64) * root_eps;
    let coeffs = |f: &[Complex64]| -> DVector<Complex64> {
        DVector::from_fn(n, |j, _| {
            (0..n).map(|k| f[k] * u(j, k).conj()).sum::<Complex64>() * grid.step()
        })
    };
    let (zeta, xi) = (coeffs(a), coeffs(c));
    let k = model.k_dense();
    let kr = model.k_rev_dense();
    let g = model.g_dense();
    let form = |z: &DVector<Complex64>, x: &DVector<Complex64>| -> f64 {
        let zz = (z.adjoint() * &k * z)[(0, 0)].re;
        let zx = (z.adjoint() * &g * x)[(0, 0)].re;
        let xx = (x.adjoint() * &kr * x)[(0, 0)].re;
        zz + 2.0 * zx + xx
    };
    Ok((form(&zeta, &xi), form(&zeta.conjugate(), &xi.conjugate())))
}

/// `max_j |G_{j0} - G_{0j}|`: both orderings of `x(0)`, `x_rev(t)` give `r(t)`.
pub fn reflection_symmetry_check(model: &StationaryModel) -> f64 {
    let g = model.g_dense();
    let asym = g.clone() - g.transpose();
    let first = (0..g.nrows())
        .map(|j| (g[(j, 0)] - g[(0, j)]).norm())
        .fold(0.0, f64::max);
    first.max(asym.max_abs())
}

/// Time-domain filters of `y` and `y_rev` for a test function `(a, c)`.
#[derive(Debug, Clone)]
pub struct TimeDomainRepresentation {
    /// `F[sigma]`.
    pub sigma_check: TimeKernel,
    /// `sigma_check(-t)`.
    pub sigma_hat: TimeKernel,
    /// `F[a]`.
    pub xi: TimeKernel,
    /// `F[c]`.
    pub eta: TimeKernel,
    /// `sigma_check * xi + sigma_hat * eta`.
    pub phi_plus: TimeKernel,
    /// `sigma_hat * xi + sigma_check * eta`.
    pub phi_minus: TimeKernel,
    /// `a sigma + c sigma_rev`.
    pub f_plus: Vec<Complex64>,
    /// `a sigma_rev + c sigma`.
    pub f_minus: Vec<Complex64>,
    grid: SpectralGrid,
}

impl TimeDomainRepresentation {
    /// `max_k max(|D[phi_plus] - f_plus|, |D[phi_minus] - f_minus|)`.
    pub fn parseval_residual(&self) -> f64 {
        let t = Transformer::new(&self.grid);
        let gap = |phi: &TimeKernel, f: &[Complex64]| {
            t.spectrum(phi)
                .iter()
                .zip(f)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
        };
        gap(&self.phi_plus, &self.f_plus).max(gap(&self.phi_minus, &self.f_minus))
    }

    /// `max_t |phi_minus(t) - phi_plus(-t)|`.
    pub fn swap_residual(&self) -> f64 {
        self.phi_minus.max_abs_diff(&self.phi_plus.reflected())
    }
}

pub fn time_domain_representation(
    grid: &SpectralGrid,
    sigma: &[f64],
    a: &[Complex64],
    c: &[Complex64],
    eps: f64,
) -> Result<TimeDomainRepresentation> {
    grid.check_eps(eps)?;
    let n = grid.len();
    if sigma.len() != n || a.len() != n || c.len() != n {
        return invalid(format!("expected {n} samples per input"));
    }
    let t = Transformer::new(grid);
    let sigma_check = t.kernel_real(sigma, eps);
    let sigma_hat = sigma_check.reflected();
    let xi = t.kernel(a, eps);
    let eta = t.kernel(c, eps);
    let add = |x: TimeKernel, y: TimeKernel| {
        TimeKernel::new(
            eps,
            x.values()
                .iter()
                .zip(y.values())
                .map(|(p, q)| p + q)
                .collect(),
        )
    };
    let phi_plus = add(sigma_check.convolve(&xi), sigma_hat.convolve(&eta));
    let phi_minus = add(sigma_hat.convolve(&xi), sigma_check.convolve(&eta));
    let sigma_rev = grid.flipped(sigma);
    let f_plus = (0..n)
        .map(|k| a[k] * sigma[k] + c[k] * sigma_rev[k])
        .collect();
    let f_minus = (0..n)
        .map(|k| a[k] * sigma_rev[k] + c[k] * sigma[k])
        .collect();
    Ok(TimeDomainRepresentation {
        sigma_check,
        sigma_hat,
        xi,
        eta,
        phi_plus,
        phi_minus,
        f_plus,
        f_minus,
        grid: grid.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planck(n: usize) -> SpectralDensityPair {
        let grid = SpectralGrid::new(n, 0.25).unwrap();
        SpectralDensityPair::planck(1.0, 1.0, &grid).unwrap()
    }

    fn standard_vacuum(grid: &SpectralGrid) -> SpectralDensityPair {
        let vals: Vec<f64> = grid
            .points()
            .iter()
            .map(|&nu| if nu < 0.0 { 1.0 } else { 0.0 })
            .collect();
        SpectralDensityPair::tabulated(&vals, grid).unwrap()
    }

    fn intervals(grid: &SpectralGrid) -> Vec<(Mask, Mask)> {
        let b = |lo, hi| Mask::band(grid, lo, hi);
        vec![
            (b(-1.0, 1.0), b(-1.0, 1.0)),
            (b(-2.0, 0.5), b(0.0, 2.0)),
            (b(0.25, 1.0), b(-1.0, -0.25)),
            (Mask::full(grid.len()), b(-0.5, 0.75)),
        ]
    }

    #[test]
    fn adjoint_is_an_involution() {
        let pair = planck(9);
        let x = integrator_table(&pair);
        assert_eq!(x.check.adjoint().adjoint(), x.check);
        // X_check^dag is X_check carried on the reflected set
        let adj = x.check.adjoint();
        for k in 0..9 {
            assert_eq!(adj.alpha[k], x.check.alpha[k]);
        }
    }

    #[test]
    fn standard_canonical_table_is_exact() {
        let grid = SpectralGrid::new(17, 0.25).unwrap();
        let mut omega = Mask::full(17);
        omega = omega.and(&Mask::band(&grid, -1.5, 1.75));
        let c = CanonicalPair::standard(&grid, omega.clone());
        assert_eq!(c.table_residual(&intervals(&grid)), 0.0);
        let d = Mask::band(&grid, -0.5, 1.0);
        let m = c.moments(&d, &d);
        assert_eq!(m.minus_plus, d.and(&omega).measure(&grid));
        assert_eq!((m.plus_minus, m.plus_plus, m.minus_minus), (0.0, 0.0, 0.0));
    }

    #[test]
    fn disjoint_intervals_give_zero_moments() {
        let pair = planck(17);
        let x = integrator_table(&pair);
        let e = x.entries(
            &Mask::band(pair.grid(), -2.0, -0.1),
            &Mask::band(pair.grid(), 0.0, 2.0),
        );
        assert_eq!(
            (e.check_check, e.hat_check, e.check_hat, e.hat_hat),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn integrator_moment_is_riemann_sum() {
        let pair = planck(65);
        let grid = pair.grid();
        let d = Mask::band(grid, 0.0, 0.5);
        let x = integrator_table(&pair);
        let oracle: f64 = grid
            .points()
            .iter()
            .filter(|&&nu| (0.0..=0.5).contains(&nu))
            .map(|&nu| if nu == 0.0 { 1.0 } else { nu / nu.exp_m1() })
            .sum::<f64>()
            * grid.step();
        assert!((x.entries(&d, &d).check_check - oracle).abs() < 1e-14);
    }

    #[test]
    fn integrator_densities_match_pair() {
        let pair = planck(33);
        let dens = integrator_table(&pair).densities();
        for k in 0..33 {
            assert!((dens.kappa[k] - pair.kappa()[k]).abs() < 1e-12);
            assert!((dens.kappa_rev[k] - pair.kappa_rev()[k]).abs() < 1e-12);
            assert!((dens.gamma[k] - pair.gamma()[k]).abs() < 1e-12);
            let lambda = pair.lambda()[k].unwrap();
            assert!((dens.kappa_rev[k] - lambda * dens.kappa[k]).abs() < 1e-12 * dens.kappa_rev[k]);
        }
    }

    #[test]
    fn standard_pair_cross_moment_is_theta_measure() {
        let grid = SpectralGrid::new(13, 0.25).unwrap();
        let vals: Vec<f64> = grid
            .points()
            .iter()
            .map(|&nu| {
                if nu < -1.0 {
                    1.0
                } else if nu <= 1.0 {
                    (-nu / 2.0).exp()
                } else {
                    0.0
                }
            })
            .collect();
        let pair = SpectralDensityPair::tabulated(&vals, &grid).unwrap();
        let x = integrator_table(&pair);
        let d = Mask::full(13);
        let want = pair.masks().theta.measure(&grid);
        assert!((x.entries(&d, &d).check_hat - want).abs() < 1e-14);
    }

    #[test]
    fn sigma_additivity() {
        let pair = planck(33);
        let grid = pair.grid();
        let x = integrator_table(&pair);
        let (a, b) = (Mask::band(grid, -2.0, -0.3), Mask::band(grid, -0.25, 1.5));
        let whole = a.or(&b);
        let d2 = Mask::band(grid, -1.0, 2.0);
        for (s1, s2) in [
            (Side::Check, Side::Check),
            (Side::Hat, Side::Check),
            (Side::Check, Side::Hat),
        ] {
            let sum = x.gram(s1, &a, s2, &d2) + x.gram(s1, &b, s2, &d2);
            assert!((x.gram(s1, &whole, s2, &d2) - sum).norm() < 1e-14);
        }
    }

    #[test]
    fn vacuum_assembly_is_canonical() {
        let grid = SpectralGrid::new(17, 0.25).unwrap();
        let pair = standard_vacuum(&grid);
        let c = canonical_from_vacuum(&pair).unwrap();
        assert_eq!(c.table_residual(&intervals(&grid)), 0.0);
        let d = Mask::band(&grid, -1.0, 1.0);
        let omega = pair.masks().retained.clone();
        assert_eq!(c.moments(&d, &d).minus_plus, d.and(&omega).measure(&grid));
    }

    #[test]
    fn thermal_pair_is_not_vacuum() {
        assert!(matches!(
            canonical_from_vacuum(&planck(9)),
            Err(Error::NotVacuum(9))
        ));
        let grid = SpectralGrid::new(9, 0.5).unwrap();
        let vals: Vec<f64> = grid
            .points()
            .iter()
            .map(|&nu| if nu < 0.0 { 2.0 } else { 0.0 })
            .collect();
        let pair = SpectralDensityPair::tabulated(&vals, &grid).unwrap();
        assert!(matches!(
            canonical_from_vacuum(&pair),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn white_y_table() {
        let grid = SpectralGrid::new(9, 0.5).unwrap();
        let c = CanonicalPair::standard(&grid, Mask::full(9));
        let y = build_y(&c, &[1.0; 9], &[1.0; 9]).unwrap();
        let dens = y.densities();
        assert!(dens
            .kappa
            .iter()
            .chain(&dens.kappa_rev)
            .chain(&dens.gamma)
            .all(|&v| v == 1.0));
        assert!(matches!(
            recover_canonical(&y),
            Err(Error::DegenerateRecovery { .. })
        ));
    }

    #[test]
    fn flip_violation_is_rejected() {
        let grid = SpectralGrid::new(5, 0.5).unwrap();
        let c = CanonicalPair::standard(&grid, Mask::full(5));
        assert!(build_y(&c, &[1.0, 2.0, 3.0, 4.0, 5.0], &[1.0, 2.0, 3.0, 4.0, 5.0]).is_err());
    }

    #[test]
    fn planck_round_trip_is_exact() {
        let pair = planck(33);
        let grid = pair.grid();
        let omega = Mask::full(33).and(&Mask::from_indices(33, [grid.zero_index()]).not());
        let c = CanonicalPair::standard(grid, omega.clone());
        let y = build_y(&c, &pair.sigma(), &pair.sigma_rev()).unwrap();
        let back = recover_canonical(&y).unwrap();
        assert_eq!(back, c);
        assert_eq!(build_y(&back, &pair.sigma(), &pair.sigma_rev()).unwrap(), y);
        // without excluding nu = 0 the inversion is singular
        let full = build_y(
            &CanonicalPair::standard(grid, Mask::full(33)),
            &pair.sigma(),
            &pair.sigma_rev(),
        )
        .unwrap();
        assert_eq!(
            recover_canonical(&full),
            Err(Error::DegenerateRecovery { nu: 0.0 })
        );
    }

    #[test]
    fn vacuum_round_trip_is_mask_selection() {
        let grid = SpectralGrid::new(17, 0.25).unwrap();
        let vals: Vec<f64> = grid
            .points()
            .iter()
            .map(|&nu| if nu > 0.0 { 3.0 * nu } else { 0.0 })
            .collect();
        let pair = SpectralDensityPair::tabulated(&vals, &grid).unwrap();
        let c = CanonicalPair::standard(&grid, pair.masks().retained.clone());
        let y = build_y(&c, &pair.sigma(), &pair.sigma_rev()).unwrap();
        assert_eq!(recover_canonical(&y).unwrap(), c);
    }

    #[test]
    fn isometry_trivial_cases() {
        let grid = SpectralGrid::new(9, 0.5).unwrap();
        let zero = vec![ZERO; 9];
        let pair = SpectralDensityPair::flat(1.0, &grid).unwrap();
        assert_eq!(isometry_check(&zero, &zero, &pair).unwrap(), (0.0, 0.0));
        let d = Mask::band(&grid, -1.0, 0.5);
        let a: Vec<Complex64> = (0..9)
            .map(|k| if d.contains(k) { ONE } else { ZERO })
            .collect();
        let (yy, _) = isometry_check(&a, &zero, &pair).unwrap();
        assert!((yy - d.measure(&grid)).abs() < 1e-15);
        assert!(isometry_check(&a[..3], &zero, &pair).is_err());
    }

    #[test]
    fn isometry_agrees_with_gram() {
        let pair = planck(33);
        let model = StationaryModel::from_pair(&pair, pair.grid().dual_eps()).unwrap();
        let ones = vec![ONE; 33];
        let a: Vec<Complex64> = pair
            .grid()
            .points()
            .iter()
            .map(|&nu| Complex64::new(nu.cos(), 0.3 * nu))
            .collect();
        let c: Vec<Complex64> = pair
            .grid()
            .points()
            .iter()
            .map(|&nu| Complex64::new(0.5, nu.sin()))
            .collect();
        for (a, c) in [(&ones, &ones), (&a, &c)] {
            let direct = isometry_check(a, c, &pair).unwrap();
            let via = isometry_gram(&model, a, c).unwrap();
            assert!((direct.0 - via.0).abs() < 1e-9 * direct.0.max(1.0));
            assert!((direct.1 - via.1).abs() < 1e-9 * direct.1.max(1.0));
            assert!(direct.0 >= 0.0 && direct.1 >= 0.0);
        }
    }

    #[test]
    fn reflection_symmetry() {
        let pair = planck(33);
        let model = StationaryModel::from_pair(&pair, pair.grid().dual_eps()).unwrap();
        assert!(reflection_symmetry_check(&model) < 1e-10);
        let grid = SpectralGrid::new(9, 0.5).unwrap();
        let vac = StationaryModel::from_pair(&standard_vacuum(&grid), grid.dual_eps()).unwrap();
        assert_eq!(reflection_symmetry_check(&vac), 0.0);
    }

    #[test]
    fn flat_sigma_filter_is_identity() {
        let grid = SpectralGrid::new(17, 0.25).unwrap();
        let eps = grid.dual_eps();
        let a: Vec<Complex64> = grid
            .points()
            .iter()
            .map(|&nu| Complex64::new((-nu * nu).exp(), 0.0))
            .collect();
        let zero = vec![ZERO; 17];
        let rep = time_domain_representation(&grid, &[1.0; 17], &a, &zero, eps).unwrap();
        assert!(rep.phi_plus.max_abs_diff(&rep.xi) < 1e-12);
        assert!(rep.parseval_residual() < 1e-12);
    }

    #[test]
    fn planck_parseval_and_swap() {
        let pair = planck(65);
        let grid = pair.grid();
        let eps = grid.dual_eps();
        let ones = vec![ONE; 65];
        let zero = vec![ZERO; 65];
        let rep = time_domain_representation(grid, &pair.sigma(), &ones, &zero, eps).unwrap();
        assert!(rep.parseval_residual() < 1e-10);
        assert!(rep.swap_residual() < 1e-12);
        let c: Vec<Complex64> = grid
            .points()
            .iter()
            .map(|&nu| Complex64::new(0.2, nu))
            .collect();
        let rep = time_domain_representation(grid, &pair.sigma(), &ones, &c, eps).unwrap();
        assert!(rep.parseval_residual() < 1e-10);
    }
}
