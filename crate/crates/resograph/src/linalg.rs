//! Small dense complex linear algebra helpers shared by the rest of the
//! crate. Matrices here are at most a few dozen rows, so pivoted LU and
//! full SVD are always affordable.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

/// Largest entry magnitude, used as the scale for relative tolerances.
pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Determinant through LU with partial pivoting.
pub fn determinant(m: &DMatrix<Complex64>) -> Complex64 {
    assert!(m.is_square(), "determinant of a non-square matrix");
    m.clone().lu().determinant()
}

/// Solve `m x = b` for each column of `b`. Returns `None` when the LU solve
/// fails, i.e. the matrix is singular to working precision.
pub fn solve(m: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Option<DMatrix<Complex64>> {
    m.clone().lu().solve(b)
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Numerical rank: number of singular values above `rel_tol * sigma_max`.
pub fn rank_with_tol(m: &DMatrix<Complex64>, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let cutoff = rel_tol * sv.first().copied().unwrap_or(0.0);
    sv.iter().filter(|s| **s > cutoff).count()
}

/// Max-norm departure from unitarity, `max |(U^H U - I)_{ij}|`.
pub fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let n = u.nrows();
    let gram = u.adjoint() * u;
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            defect = defect.max((gram[(i, j)] - target).norm());
        }
    }
    defect
}

pub fn is_unitary(u: &DMatrix<Complex64>, tol: f64) -> bool {
    u.is_square() && unitarity_defect(u) <= tol
}

/// Haar-ish random unitary from the QR factorisation of a complex Ginibre
/// sample, with the R diagonal phases absorbed so the result is unique.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}
