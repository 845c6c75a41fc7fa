//! A single thermal mode built from two vacuum modes.
//!
//! Operators are linear combinations over the ordered basis `(a, a^dag, c, c^dag)`.
//! In the joint vacuum `<a a^dag> = 1` and `<c^dag c> = 1`; every other ordered
//! product of basis elements has zero mean. `c` is the conjugate mode, so its
//! canonical relation reads `[c^dag, c] = 1`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `<e_i e_j>` for the basis `(a, a^dag, c, c^dag)`.
const VACUUM: [[f64; 4]; 4] = [
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
];

/// `[e_i, e_j]` for the basis `(a, a^dag, c, c^dag)`.
const COMMUTATOR: [[f64; 4]; 4] = [
    [0.0, 1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, -1.0],
    [0.0, 0.0, 1.0, 0.0],
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeOperator {
    pub coeffs: [Complex64; 4],
}

impl ModeOperator {
    pub const A: Self = Self::basis(0);
    pub const A_DAG: Self = Self::basis(1);
    pub const C: Self = Self::basis(2);
    pub const C_DAG: Self = Self::basis(3);

    const fn basis(i: usize) -> Self {
        let mut coeffs = [ZERO; 4];
        coeffs[i] = ONE;
        Self { coeffs }
    }

    pub fn new(coeffs: [Complex64; 4]) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: [ZERO; 4] }
    }

    pub fn dagger(&self) -> Self {
        let [a, ad, c, cd] = self.coeffs;
        Self {
            coeffs: [ad.conj(), a.conj(), cd.conj(), c.conj()],
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (0..4)
            .map(|i| (self.coeffs[i] - other.coeffs[i]).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for ModeOperator {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            coeffs: std::array::from_fn(|i| self.coeffs[i] + rhs.coeffs[i]),
        }
    }
}

impl Sub for ModeOperator {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            coeffs: std::array::from_fn(|i| self.coeffs[i] - rhs.coeffs[i]),
        }
    }
}

impl Neg for ModeOperator {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            coeffs: self.coeffs.map(|v| -v),
        }
    }
}

impl Mul<ModeOperator> for f64 {
    type Output = ModeOperator;
    fn mul(self, rhs: ModeOperator) -> ModeOperator {
        ModeOperator {
            coeffs: rhs.coeffs.map(|v| v * self),
        }
    }
}

impl Mul<ModeOperator> for Complex64 {
    type Output = ModeOperator;
    fn mul(self, rhs: ModeOperator) -> ModeOperator {
        ModeOperator {
            coeffs: rhs.coeffs.map(|v| v * self),
        }
    }
}

fn contract(table: &[[f64; 4]; 4], z1: &ModeOperator, z2: &ModeOperator) -> Complex64 {
    let mut acc = ZERO;
    for (i, row) in table.iter().enumerate() {
        for (j, &t) in row.iter().enumerate() {
            if t != 0.0 {
                acc += z1.coeffs[i] * z2.coeffs[j] * t;
            }
        }
    }
    acc
}

/// `<z1 z2>` in the joint vacuum.
pub fn expectation(z1: &ModeOperator, z2: &ModeOperator) -> Complex64 {
    contract(&VACUUM, z1, z2)
}

/// `[z1, z2]`, a scalar.
pub fn commutator(z1: &ModeOperator, z2: &ModeOperator) -> Complex64 {
    contract(&COMMUTATOR, z1, z2)
}

fn check_occupation(n: f64) -> Result<()> {
    if !(n >= 0.0) || !n.is_finite() {
        return invalid(format!(
            "occupation must be finite and nonnegative, got {n}"
        ));
    }
    Ok(())
}

/// `b = (n+1)^(1/2) a + n^(1/2) c`, `b_rev = n^(1/2) a + (n+1)^(1/2) c`.
pub fn thermal_pair(n: f64) -> Result<(ModeOperator, ModeOperator)> {
    check_occupation(n)?;
    let (p, q) = ((n + 1.0).sqrt(), n.sqrt());
    let b = p * ModeOperator::A + q * ModeOperator::C;
    let b_rev = q * ModeOperator::A + p * ModeOperator::C;
    Ok((b, b_rev))
}

/// `a = (n+1)^(1/2) b - n^(1/2) b_rev`, `c = (n+1)^(1/2) b_rev - n^(1/2) b`.
pub fn invert_pair(
    b: &ModeOperator,
    b_rev: &ModeOperator,
    n: f64,
) -> Result<(ModeOperator, ModeOperator)> {
    check_occupation(n)?;
    let (p, q) = ((n + 1.0).sqrt(), n.sqrt());
    Ok((p * *b - q * *b_rev, p * *b_rev - q * *b))
}

/// Second moments and commutators of a thermal pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeReport {
    pub n: f64,
    /// `<b^dag b>`.
    pub b_dag_b: f64,
    /// `<b b^dag>`.
    pub b_b_dag: f64,
    /// `<b_rev^dag b_rev>`.
    pub brev_dag_brev: f64,
    /// `<b_rev b_rev^dag>`.
    pub brev_brev_dag: f64,
    /// `<b_rev b^dag>`.
    pub brev_b_dag: f64,
    /// `[b, b^dag]`.
    pub comm_b_bdag: f64,
    /// `[b_rev^dag, b_rev]`.
    pub comm_brevdag_brev: f64,
    /// `[b_rev, b]`.
    pub comm_brev_b: f64,
    /// `[b_rev, b^dag]`.
    pub comm_brev_bdag: f64,
}

impl ModeReport {
    pub fn new(n: f64) -> Result<Self> {
        let (b, br) = thermal_pair(n)?;
        let e = |x: &ModeOperator, y: &ModeOperator| expectation(x, y).re;
        let c = |x: &ModeOperator, y: &ModeOperator| commutator(x, y).re;
        Ok(Self {
            n,
            b_dag_b: e(&b.dagger(), &b),
            b_b_dag: e(&b, &b.dagger()),
            brev_dag_brev: e(&br.dagger(), &br),
            brev_brev_dag: e(&br, &br.dagger()),
            brev_b_dag: e(&br, &b.dagger()),
            comm_b_bdag: c(&b, &b.dagger()),
            comm_brevdag_brev: c(&br.dagger(), &br),
            comm_brev_b: c(&br, &b),
            comm_brev_bdag: c(&br, &b.dagger()),
        })
    }

    /// Largest deviation from the closed-form thermal table.
    pub fn residual(&self) -> f64 {
        let n = self.n;
        [
            self.b_dag_b - n,
            self.b_b_dag - (n + 1.0),
            self.brev_dag_brev - (n + 1.0),
            self.brev_brev_dag - n,
            self.brev_b_dag - (n * (n + 1.0)).sqrt(),
            self.comm_b_bdag - 1.0,
            self.comm_brevdag_brev - 1.0,
            self.comm_brev_b,
            self.comm_brev_bdag,
        ]
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
    }
}
