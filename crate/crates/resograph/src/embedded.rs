//! Rank criteria for eigenvalues protected by rationally related edge
//! lengths.
//!
//! When the first `n` edges of a flower graph have lengths that are integer
//! multiples of a common `l0`, the compact secular condition factorises at
//! the momenta `k0 = 2m pi / l0` (even branch) and `k0 = (2m+1) pi / l0`
//! (odd branch): every entry of the sine (resp. cosine) part of the
//! condition matrix vanishes there, so a rank deficiency of a constant
//! `2N x 2n` matrix built from the first `2n` columns of the coupling
//! decides whether eigenvalues sit at those momenta, and by how much the
//! deficiency exceeds zero, their multiplicity.
//!
//! Detuning the protected lengths, `l_j = l0 (n_j + eps_j)`, moves most of
//! these eigenvalues off the real axis. The surviving multiplicity at `k0`
//! is again a rank statement, now about the same matrix with closed-form
//! complex corrections inserted into the perturbed edge blocks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::linalg;

/// Relative singular-value cutoff for numerical rank decisions.
pub const TAU_RANK: f64 = 1e-10;

/// Which branch of protected momenta a criterion addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    /// `k0 l0` an even multiple of pi.
    Even,
    /// `k0 l0` an odd multiple of pi.
    Odd,
}

impl Parity {
    /// Fundamental protected momentum for unit `l0` (branch `m = 1` for the
    /// even case, `m = 0` for the odd one).
    pub fn fundamental_k(&self, l0: f64) -> f64 {
        match self {
            Parity::Even => 2.0 * std::f64::consts::PI / l0,
            Parity::Odd => std::f64::consts::PI / l0,
        }
    }
}

#[derive(Debug, Error)]
pub enum EmbeddedError {
    #[error("rational length data invalid: {0}")]
    BadSpec(String),
    #[error("length-correction divisor vanishes at k0 = {k0}, edge {edge}")]
    DivisorVanishes { k0: f64, edge: usize },
}

/// Rational part of the edge lengths: the first `multipliers.len()` edges
/// have lengths `l0 * (n_j + eps_j)`. Remaining edges are unconstrained.
#[derive(Debug, Clone)]
pub struct RationalLengthSpec {
    pub l0: f64,
    pub multipliers: Vec<u32>,
    pub epsilons: Vec<f64>,
}

impl RationalLengthSpec {
    pub fn unperturbed(l0: f64, multipliers: Vec<u32>) -> Self {
        let n = multipliers.len();
        Self {
            l0,
            multipliers,
            epsilons: vec![0.0; n],
        }
    }

    pub fn n_rational(&self) -> usize {
        self.multipliers.len()
    }

    /// Edge lengths `l0 * (n_j + eps_j)` implied by the multipliers and
    /// detunings.
    pub fn lengths(&self) -> Vec<f64> {
        self.multipliers
            .iter()
            .zip(&self.epsilons)
            .map(|(&n, &e)| self.l0 * (n as f64 + e))
            .collect()
    }

    fn check(&self) -> Result<(), EmbeddedError> {
        if !(self.l0 > 0.0) || !self.l0.is_finite() {
            return Err(EmbeddedError::BadSpec(format!("l0 = {} not positive", self.l0)));
        }
        if self.multipliers.is_empty() {
            return Err(EmbeddedError::BadSpec("need at least one rational edge".into()));
        }
        if self.multipliers.iter().any(|&n| n == 0) {
            return Err(EmbeddedError::BadSpec("multipliers must be >= 1".into()));
        }
        if self.epsilons.len() != self.multipliers.len() {
            return Err(EmbeddedError::BadSpec(format!(
                "{} multipliers but {} detunings",
                self.multipliers.len(),
                self.epsilons.len()
            )));
        }
        Ok(())
    }
}

/// Outcome of a rank criterion.
#[derive(Debug, Clone, Serialize)]
pub struct MultiplicityReport {
    /// Protected momentum the criterion addresses, for the spec's `l0`
    /// (fundamental branch).
    pub k0: f64,
    pub parity: Parity,
    /// Numerical rank of the criterion matrix.
    pub rank: usize,
    /// Guaranteed eigenvalue multiplicity at `k0`: `2n - rank`.
    pub multiplicity_bound: usize,
    /// Whether length detunings were folded in.
    pub perturbed: bool,
}

fn criterion_matrix(u: &DMatrix<Complex64>, n: usize, sign: f64) -> DMatrix<Complex64> {
    assert!(u.is_square(), "coupling matrix must be square");
    let rows = u.nrows();
    assert!(
        2 * n <= rows && 2 * n <= u.ncols(),
        "need 2n <= matrix size (n = {n}, size = {rows})"
    );
    let mut m = u.view((0, 0), (rows, 2 * n)).into_owned();
    for j in 0..n {
        m[(2 * j, 2 * j + 1)] += Complex64::new(sign, 0.0);
        m[(2 * j + 1, 2 * j)] += Complex64::new(sign, 0.0);
    }
    m
}

/// Criterion matrix for the even branch: first `2n` columns of `u` with
/// `-1` added on the anti-diagonal of each edge block.
pub fn m_even(u: &DMatrix<Complex64>, n: usize) -> DMatrix<Complex64> {
    criterion_matrix(u, n, -1.0)
}

/// Criterion matrix for the odd branch (`+1` insertions).
pub fn m_odd(u: &DMatrix<Complex64>, n: usize) -> DMatrix<Complex64> {
    criterion_matrix(u, n, 1.0)
}

/// Unperturbed multiplicity bound at the protected momentum.
pub fn embedded_multiplicity(u: &DMatrix<Complex64>, n: usize, parity: Parity) -> MultiplicityReport {
    let m = match parity {
        Parity::Even => m_even(u, n),
        Parity::Odd => m_odd(u, n),
    };
    let rank = linalg::rank_with_tol(&m, TAU_RANK);
    MultiplicityReport {
        k0: parity.fundamental_k(1.0),
        parity,
        rank,
        multiplicity_bound: 2 * n - rank,
        perturbed: false,
    }
}

/// Length-detuning corrections entering the perturbed criterion matrix.
/// Both vanish with `eps`; the shared divisor is nonzero for every real
/// `k0 != 0`.
pub fn eps_corrections(k0: f64, l0: f64, eps: f64) -> Result<(Complex64, Complex64), EmbeddedError> {
    let theta = k0 * l0 * eps;
    let (s, co) = (theta.sin(), theta.cos());
    let two_ik0 = Complex64::new(0.0, 2.0 * k0);
    let den = two_ik0 * co - Complex64::new((1.0 + k0 * k0) * s, 0.0);
    if den.norm() <= 1e-14 * (1.0 + k0 * k0) {
        return Err(EmbeddedError::DivisorVanishes { k0, edge: 0 });
    }
    let a = Complex64::new((1.0 - k0 * k0) * s, 0.0) / den;
    let b = (two_ik0 * (co - 1.0) - Complex64::new((1.0 + k0 * k0) * s, 0.0)) / den;
    Ok((a, b))
}

/// Perturbed criterion matrix and the multiplicity bound it certifies.
///
/// `k0` must be the exact protected momentum of the requested parity
/// (`2m pi / l0` or `(2m+1) pi / l0`); the corrections are evaluated there,
/// not at the detuned root.
pub fn perturbed_m(
    u: &DMatrix<Complex64>,
    spec: &RationalLengthSpec,
    k0: f64,
    parity: Parity,
) -> Result<(DMatrix<Complex64>, MultiplicityReport), EmbeddedError> {
    spec.check()?;
    let n = spec.n_rational();
    let sign = match parity {
        Parity::Even => -1.0,
        Parity::Odd => 1.0,
    };
    let mut m = criterion_matrix(u, n, sign);
    for j in 0..n {
        let (a, b) = eps_corrections(k0, spec.l0, spec.epsilons[j])
            .map_err(|_| EmbeddedError::DivisorVanishes { k0, edge: j })?;
        m[(2 * j, 2 * j)] += a;
        m[(2 * j + 1, 2 * j + 1)] += a;
        // Even branch: anti-diagonal carries -1 + b; odd branch: +1 - b.
        let off = Complex64::new(-sign, 0.0) * b;
        m[(2 * j, 2 * j + 1)] += off;
        m[(2 * j + 1, 2 * j)] += off;
    }
    let rank = linalg::rank_with_tol(&m, TAU_RANK);
    let report = MultiplicityReport {
        k0,
        parity,
        rank,
        multiplicity_bound: 2 * n - rank,
        perturbed: spec.epsilons.iter().any(|&e| e != 0.0),
    };
    Ok((m, report))
}
