//! Dense complex linear algebra shared by the engine, the Fock oracle and the
//! Liouville propagator.
//!
//! The matrix exponential uses scaling-and-squaring around a degree-13 Padé
//! approximant. Propagation of large truncated spaces never forms the full
//! exponential; [`expm_multiply`] applies a truncated Taylor series to a vector
//! instead.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use thiserror::Error;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("singular Padé denominator")]
    Singular,
}

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

// 1-norm bound below which Padé(13) is accurate to unit roundoff.
const THETA13: f64 = 5.371_920_351_148_152;

pub fn one_norm(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring.
pub fn matrix_exp(a: &CMatrix) -> Result<CMatrix, LinalgError> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(LinalgError::NotSquare { rows: n, cols: a.ncols() });
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    if n == 1 {
        return Ok(CMatrix::from_element(1, 1, a[(0, 0)].exp()));
    }
    let norm = one_norm(a);
    if norm == 0.0 {
        return Ok(CMatrix::identity(n, n));
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.scale(0.5f64.powi(squarings));
    let mut x = pade13(&scaled)?;
    for _ in 0..squarings {
        x = &x * &x;
    }
    Ok(x)
}

fn pade13(a: &CMatrix) -> Result<CMatrix, LinalgError> {
    let n = a.nrows();
    let b = |k: usize| C64::new(PADE13[k], 0.0);
    let ident = CMatrix::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let inner_u = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9));
    let u = a * (inner_u + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &ident * b(1));
    let inner_v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8));
    let v = inner_v + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &ident * b(0);

    let numer = &v + &u;
    let denom = &v - &u;
    denom.lu().solve(&numer).ok_or(LinalgError::Singular)
}

/// `exp(scale * a) * v` by a substepped Taylor series.
///
/// The number of substeps keeps `|scale| * ||a||_1` per substep at most one, and
/// each substep sums terms until they fall below machine precision relative to
/// the running vector.
pub fn expm_multiply(a: &CMatrix, v: &CVector, scale: C64) -> CVector {
    let norm = one_norm(a) * scale.norm();
    let substeps = norm.ceil().max(1.0) as usize;
    let h = scale / substeps as f64;
    let mut out = v.clone();
    for _ in 0..substeps {
        let mut term = out.clone();
        let mut acc = out.clone();
        for k in 1..64 {
            term = (a * &term) * (h / k as f64);
            acc += &term;
            if term.norm() <= f64::EPSILON * acc.norm() {
                break;
            }
        }
        out = acc;
    }
    out
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn dagger(a: &CMatrix) -> CMatrix {
    a.adjoint()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn taylor_exp(a: &CMatrix, terms: usize) -> CMatrix {
        let n = a.nrows();
        let mut acc = CMatrix::identity(n, n);
        let mut term = CMatrix::identity(n, n);
        for k in 1..terms {
            term = &term * a / c(k as f64, 0.0);
            acc += &term;
        }
        acc
    }

    #[test]
    fn zero_matrix_gives_identity() {
        let z = CMatrix::zeros(4, 4);
        assert_eq!(matrix_exp(&z).unwrap(), CMatrix::identity(4, 4));
    }

    #[test]
    fn diagonal_phases() {
        let theta = 0.7;
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.0, theta), c(0.0, -theta)]));
        let e = matrix_exp(&a).unwrap();
        assert!((e[(0, 0)] - c(0.0, theta).exp()).norm() < 1e-15);
        assert!((e[(1, 1)] - c(0.0, -theta).exp()).norm() < 1e-15);
        assert!(e[(0, 1)].norm() < 1e-16 && e[(1, 0)].norm() < 1e-16);
    }

    #[test]
    fn nilpotent_series_terminates() {
        // strictly upper triangular with N^2 = 0
        let mut n = CMatrix::zeros(3, 3);
        n[(0, 2)] = c(40.0, -3.0);
        n[(1, 2)] = c(0.25, 7.0);
        let e = matrix_exp(&n).unwrap();
        let expected = CMatrix::identity(3, 3) + &n;
        assert!(max_abs(&(e - expected)) < 1e-13);
    }

    #[test]
    fn matches_taylor_on_moderate_matrix() {
        let a = CMatrix::from_fn(5, 5, |i, j| c((i as f64 - j as f64) * 0.3, 0.1 * (i * j) as f64));
        let e = matrix_exp(&a).unwrap();
        let t = taylor_exp(&a, 80);
        assert!(max_abs(&(&e - &t)) / max_abs(&t) < 1e-13);
    }

    #[test]
    fn scaling_path_keeps_unitarity() {
        let h = CMatrix::from_fn(6, 6, |i, j| {
            let x = (i + 2 * j) as f64;
            let y = (j + 2 * i) as f64;
            c(x + y, if i == j { 0.0 } else { (i as f64) - (j as f64) })
        });
        let u = matrix_exp(&(h * c(0.0, -3.0))).unwrap();
        let err = max_abs(&(u.adjoint() * &u - CMatrix::identity(6, 6)));
        assert!(err < 1e-11, "{err}");
    }

    #[test]
    fn rejects_non_finite() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 1)] = c(f64::NAN, 0.0);
        assert_eq!(matrix_exp(&a), Err(LinalgError::NonFinite));
    }

    #[test]
    fn expm_multiply_matches_dense() {
        let a = CMatrix::from_fn(7, 7, |i, j| c(((i * 3 + j) % 5) as f64 - 2.0, 0.5 * (i as f64 - j as f64)));
        let v = CVector::from_fn(7, |i, _| c(1.0 / (i + 1) as f64, 0.2));
        let s = c(0.3, -1.1);
        let dense = matrix_exp(&(&a * s)).unwrap() * &v;
        let krylov = expm_multiply(&a, &v, s);
        assert!((dense - krylov).norm() < 1e-12);
    }

    #[test]
    fn kron_shapes_and_entries() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        let b = CMatrix::identity(2, 2);
        let k = kron(&a, &b);
        assert_eq!(k.shape(), (4, 4));
        assert_eq!(k[(0, 2)], c(2.0, 0.0));
        assert_eq!(k[(3, 1)], c(3.0, 0.0));
        assert_eq!(k[(1, 2)], c(0.0, 0.0));
    }
}
