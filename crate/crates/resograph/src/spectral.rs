//! Secular determinants and scattering matrices of flower graphs.
//!
//! Resonances (resolvent poles) of the graph Hamiltonian are the zeros of
//! the secular determinant
//!
//! ```text
//! F(k) = det[ (U - I) C1(k) + ik (U + I) C2(k) ]
//! ```
//!
//! where `C1`, `C2` collect boundary values and outward derivatives of the
//! `sin`/`cos` solution basis on the internal edges and of outgoing plane
//! waves `e^{ikx}` on the leads. Three equivalent encodings are provided:
//!
//! * the full determinant above (`secular_det`),
//! * a compact `2N x 2N` determinant `det[U D1(k) + D2(k)]` built from a
//!   half-shifted solution basis on the internal edges
//!   (`compact_secular_det`), valid for lead-free coupling matrices,
//! * the same compact form with the energy-dependent effective coupling
//!   `U_eff(k)` obtained by eliminating the lead channels
//!   (`effective_coupling`), so graphs with leads reduce to the compact
//!   determinant as well.
//!
//! `smatrix` solves the same linear system for incoming/outgoing lead
//! amplitudes; its inverse is singular exactly at the secular zeros, which
//! is the resonance notion the rest of the crate relies on.
//!
//! `k = 0` is excluded everywhere: the solution bases degenerate there.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::graph::FlowerGraph;
use crate::linalg;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative threshold below which the lead-elimination block counts as
/// singular.
pub const TAU_SING: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("lead elimination block is singular at k = {k} (smallest/largest singular value {ratio:.3e})")]
    SingularBlock { k: Complex64, ratio: f64 },
    #[error("scattering system is singular at k = {k}")]
    SingularSystem { k: Complex64 },
}

/// Boundary-value matrix: per-edge blocks `[[0, 1], [sin kl, cos kl]]`,
/// identity on the lead block.
pub fn c1_matrix(k: Complex64, g: &FlowerGraph) -> DMatrix<Complex64> {
    let dim = g.dim();
    let n = g.n_edges();
    let mut m = DMatrix::from_element(dim, dim, c(0.0, 0.0));
    for (j, &l) in g.lengths.iter().enumerate() {
        let kl = k * c(l, 0.0);
        m[(2 * j, 2 * j + 1)] = ONE;
        m[(2 * j + 1, 2 * j)] = kl.sin();
        m[(2 * j + 1, 2 * j + 1)] = kl.cos();
    }
    for s in 2 * n..dim {
        m[(s, s)] = ONE;
    }
    m
}

/// Outward-derivative matrix over `k`: per-edge blocks
/// `[[1, 0], [-cos kl, sin kl]]`, `i` times identity on the lead block.
pub fn c2_matrix(k: Complex64, g: &FlowerGraph) -> DMatrix<Complex64> {
    let dim = g.dim();
    let n = g.n_edges();
    let mut m = DMatrix::from_element(dim, dim, c(0.0, 0.0));
    for (j, &l) in g.lengths.iter().enumerate() {
        let kl = k * c(l, 0.0);
        m[(2 * j, 2 * j)] = ONE;
        m[(2 * j + 1, 2 * j)] = -kl.cos();
        m[(2 * j + 1, 2 * j + 1)] = kl.sin();
    }
    for s in 2 * n..dim {
        m[(s, s)] = I;
    }
    m
}

/// `(U - I) C1(k)` and `ik (U + I) C2(k)`; almost every routine here wants
/// both.
fn condition_parts(k: Complex64, g: &FlowerGraph) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let dim = g.dim();
    let u = &g.coupling;
    let eye = DMatrix::from_diagonal_element(dim, dim, ONE);
    let b1 = (u - &eye) * c1_matrix(k, g);
    let b2 = (u + &eye) * c2_matrix(k, g) * (I * k);
    (b1, b2)
}

/// Secular determinant whose zeros are the resonances of the graph
/// (resolvent poles on the analytic continuation for `Im k < 0`, embedded
/// eigenvalues on the real axis).
pub fn secular_det(k: Complex64, g: &FlowerGraph) -> Complex64 {
    let (b1, b2) = condition_parts(k, g);
    linalg::determinant(&(b1 + b2))
}

/// Energy-dependent coupling on the internal slots after eliminating the
/// lead channels:
/// `U_eff(k) = U1 - (1-k) U2 [(1-k) U4 - (1+k) I]^{-1} U3`.
///
/// Never singular for real `k > 0`; for complex `k` the inner block can
/// degenerate, reported as `SingularBlock`.
pub fn effective_coupling(
    k: Complex64,
    g: &FlowerGraph,
) -> Result<DMatrix<Complex64>, SpectralError> {
    let n2 = 2 * g.n_edges();
    let m = g.m_leads();
    let u = &g.coupling;
    if m == 0 {
        return Ok(u.clone());
    }
    let u1 = u.view((0, 0), (n2, n2)).into_owned();
    let u2 = u.view((0, n2), (n2, m)).into_owned();
    let u3 = u.view((n2, 0), (m, n2)).into_owned();
    let u4 = u.view((n2, n2), (m, m)).into_owned();

    let eye = DMatrix::from_diagonal_element(m, m, ONE);
    let block = u4.map(|z| (ONE - k) * z) - eye.map(|z| (ONE + k) * z);
    let sv = linalg::singular_values(&block);
    let (smax, smin) = (sv[0], sv[sv.len() - 1]);
    if smin <= TAU_SING * smax {
        return Err(SpectralError::SingularBlock {
            k,
            ratio: if smax > 0.0 { smin / smax } else { 0.0 },
        });
    }
    let solved = linalg::solve(&block, &u3).ok_or(SpectralError::SingularBlock { k, ratio: 0.0 })?;
    Ok(u1 - u2.map(|z| (ONE - k) * z) * solved)
}

fn half_shift_blocks(k: Complex64, l: f64) -> ([[Complex64; 2]; 2], [[Complex64; 2]; 2]) {
    let half = k * c(l / 2.0, 0.0);
    let (s, co) = (half.sin(), half.cos());
    let ik = I * k;
    let d1 = [[-s + ik * co, co + ik * s], [s - ik * co, co + ik * s]];
    let d2 = [[s + ik * co, -co + ik * s], [-s - ik * co, -co + ik * s]];
    (d1, d2)
}

/// Condition matrix `U D1(k) + D2(k)` of the half-shifted solution basis.
/// `u` must be `2n x 2n` where `n = lengths.len()`.
pub fn compact_condition_matrix(
    k: Complex64,
    u: &DMatrix<Complex64>,
    lengths: &[f64],
) -> DMatrix<Complex64> {
    let n = lengths.len();
    assert_eq!(u.nrows(), 2 * n, "coupling size must be twice the edge count");
    assert_eq!(u.ncols(), 2 * n);
    let mut d1 = DMatrix::from_element(2 * n, 2 * n, c(0.0, 0.0));
    let mut d2 = DMatrix::from_element(2 * n, 2 * n, c(0.0, 0.0));
    for (j, &l) in lengths.iter().enumerate() {
        let (b1, b2) = half_shift_blocks(k, l);
        for r in 0..2 {
            for s in 0..2 {
                d1[(2 * j + r, 2 * j + s)] = b1[r][s];
                d2[(2 * j + r, 2 * j + s)] = b2[r][s];
            }
        }
    }
    u * d1 + d2
}

/// Compact secular determinant `det[U D1(k) + D2(k)]`. With a constant
/// unitary `u` this covers lead-free graphs; feeding `effective_coupling`
/// output extends it to graphs with leads.
pub fn compact_secular_det(k: Complex64, u: &DMatrix<Complex64>, lengths: &[f64]) -> Complex64 {
    linalg::determinant(&compact_condition_matrix(k, u, lengths))
}

/// Lead columns of the two condition matrices: `plus` is the coefficient of
/// outgoing amplitudes, `minus` of incoming ones.
fn lead_column_parts(
    k: Complex64,
    g: &FlowerGraph,
) -> (DMatrix<Complex64>, DMatrix<Complex64>, DMatrix<Complex64>) {
    let (b1, b2) = condition_parts(k, g);
    let full = &b1 + &b2;
    let n2 = 2 * g.n_edges();
    let m = g.m_leads();
    let dim = g.dim();
    let plus = full.view((0, n2), (dim, m)).into_owned();
    let minus = (b1 - b2).view((0, n2), (dim, m)).into_owned();
    (full, plus, minus)
}

/// Scattering matrix mapping incoming lead amplitudes to outgoing ones.
pub fn smatrix(k: Complex64, g: &FlowerGraph) -> Result<DMatrix<Complex64>, SpectralError> {
    let m = g.m_leads();
    assert!(m > 0, "scattering requires at least one lead");
    let (full, _plus, minus) = lead_column_parts(k, g);
    let rhs = -minus;
    let sol = linalg::solve(&full, &rhs).ok_or(SpectralError::SingularSystem { k })?;
    Ok(sol.view((2 * g.n_edges(), 0), (m, m)).into_owned())
}

/// Inverse scattering matrix, computed by its own linear solve (outgoing
/// amplitudes prescribed, incoming solved for). Singular exactly at the
/// secular zeros, which makes it an independent witness for resonances.
pub fn smatrix_inverse(k: Complex64, g: &FlowerGraph) -> Result<DMatrix<Complex64>, SpectralError> {
    let m = g.m_leads();
    assert!(m > 0, "scattering requires at least one lead");
    let n2 = 2 * g.n_edges();
    let (full, plus, minus) = lead_column_parts(k, g);
    let mut system = full;
    system.view_mut((0, n2), (g.dim(), m)).copy_from(&minus);
    let rhs = -plus;
    let sol = linalg::solve(&system, &rhs).ok_or(SpectralError::SingularSystem { k })?;
    Ok(sol.view((n2, 0), (m, m)).into_owned())
}

/// Determinant of the system matrix whose zeros are the singularities of
/// the inverse scattering matrix. Shares no linear solve with
/// `secular_det`, so agreement of the two zero sets is a real check.
pub fn smatrix_inverse_det(k: Complex64, g: &FlowerGraph) -> Complex64 {
    match smatrix_inverse(k, g) {
        Ok(sinv) => linalg::determinant(&sinv),
        Err(_) => c(f64::NAN, f64::NAN),
    }
}

/// Determinant of the boundary system with the lead columns carrying
/// incoming instead of outgoing waves — the system whose degeneracies are
/// where the inverse scattering solve breaks down.
///
/// Together with `secular_det` it factorizes the scattering determinant:
/// `det S(k) * secular_det(k) / incoming_system_det(k)` is a constant of
/// modulus one. Since `smatrix` is built from linear solves and the two
/// determinants are direct, checking that relation numerically ties the
/// scattering matrix's zero and pole structure to the two entire
/// determinants, which a contour census can count without ever integrating
/// through a pole. On a lead-free graph this coincides with `secular_det`.
pub fn incoming_system_det(k: Complex64, g: &FlowerGraph) -> Complex64 {
    let n2 = 2 * g.n_edges();
    let m = g.m_leads();
    let (full, _plus, minus) = lead_column_parts(k, g);
    let mut system = full;
    system.view_mut((0, n2), (g.dim(), m)).copy_from(&minus);
    linalg::determinant(&system)
}

// ---------------------------------------------------------------------------
// Secular families
// ---------------------------------------------------------------------------

/// Which condition a family encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// Full-size determinant of a flower graph; the parameter scales all
    /// internal lengths by `1 + lambda`.
    FullResolvent,
    /// Compact determinant with a constant coupling; parameter scales the
    /// lengths by `1 + lambda`.
    CompactHalfShift,
    /// Compact determinant with the energy-dependent effective coupling.
    EffectiveCompact,
    /// Closed-form condition of the loop-with-two-leads model; the
    /// parameter is the length asymmetry.
    LoopExample,
    /// Closed-form condition of the cross-shaped model.
    CrossExample,
}

type EvalFn = dyn Fn(Complex64, f64) -> Complex64 + Send + Sync;
type StepFn = dyn Fn(Complex64, f64, f64) -> Option<Complex64> + Send + Sync;

/// A parametrised secular function `F(k; lambda)` plus the metadata the
/// numerics layer needs: which condition it encodes, where it is singular,
/// and (for the closed-form models) a first-order predictor for the motion
/// of a zero under a parameter step.
#[derive(Clone)]
pub struct SecularFamily {
    kind: FamilyKind,
    eval: Arc<EvalFn>,
    singular_points: Vec<Complex64>,
    perturbative: Option<Arc<StepFn>>,
}

impl std::fmt::Debug for SecularFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SecularFamily")
            .field("kind", &self.kind)
            .field("singular_points", &self.singular_points)
            .field("has_perturbative", &self.perturbative.is_some())
            .finish()
    }
}

impl SecularFamily {
    pub fn from_parts(
        kind: FamilyKind,
        eval: Arc<EvalFn>,
        singular_points: Vec<Complex64>,
        perturbative: Option<Arc<StepFn>>,
    ) -> Self {
        Self {
            kind,
            eval,
            singular_points,
            perturbative,
        }
    }

    /// Full secular determinant; `lambda` scales every internal length by
    /// `1 + lambda`.
    pub fn resolvent(g: FlowerGraph) -> Self {
        Self::from_parts(
            FamilyKind::FullResolvent,
            Arc::new(move |k, lambda| secular_det(k, &g.scaled_lengths(lambda))),
            vec![],
            None,
        )
    }

    /// Compact determinant with constant coupling; `lambda` scales lengths.
    pub fn compact(u: DMatrix<Complex64>, lengths: Vec<f64>) -> Self {
        Self::from_parts(
            FamilyKind::CompactHalfShift,
            Arc::new(move |k, lambda| {
                let scaled: Vec<f64> = lengths.iter().map(|l| l * (1.0 + lambda)).collect();
                compact_secular_det(k, &u, &scaled)
            }),
            vec![],
            None,
        )
    }

    /// Compact determinant with the effective coupling of a graph with
    /// leads; `lambda` scales the internal lengths. Evaluations at a
    /// singular lead-elimination block yield NaN, which downstream
    /// quadrature and root finding surface as failures instead of silently
    /// absorbing.
    pub fn effective(g: FlowerGraph) -> Self {
        Self::from_parts(
            FamilyKind::EffectiveCompact,
            Arc::new(move |k, lambda| {
                let scaled = g.scaled_lengths(lambda);
                match effective_coupling(k, &scaled) {
                    Ok(ueff) => compact_secular_det(k, &ueff, &scaled.lengths),
                    Err(_) => c(f64::NAN, f64::NAN),
                }
            }),
            vec![],
            None,
        )
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn eval(&self, k: Complex64, lambda: f64) -> Complex64 {
        (self.eval)(k, lambda)
    }

    /// Closure over `k` at fixed parameter value.
    pub fn at(&self, lambda: f64) -> impl Fn(Complex64) -> Complex64 + '_ {
        move |k| (self.eval)(k, lambda)
    }

    /// Points (for any parameter value) where the family is singular;
    /// search regions must exclude them.
    pub fn singular_points(&self) -> &[Complex64] {
        &self.singular_points
    }

    /// First-order displacement of a zero at `(k0, lambda)` under a
    /// parameter step `eps`, when the family ships one.
    pub fn perturbative_step(&self, k0: Complex64, lambda: f64, eps: f64) -> Option<Complex64> {
        self.perturbative.as_ref().and_then(|f| f(k0, lambda, eps))
    }
}
