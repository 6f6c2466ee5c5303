//! Lie closure of ladder polynomials, structure constants and the adjoint
//! representation.

use std::collections::BTreeSet;

use nalgebra::linalg::ColPivQR;
use num_complex::Complex64 as C64;

use super::polynomial::{commutator, LadderPolynomial, Signature};
use super::AlgebraError;
use crate::linalg::{CMatrix, CVector};

// Relative threshold on the pivoted-QR diagonal that separates independent
// columns from numerical noise.
const RANK_TOL: f64 = 1e-10;

// Relative residual above which a commutator is treated as leaving the span.
const SPAN_TOL: f64 = 1e-10;

fn signature_matrix(elems: &[&LadderPolynomial]) -> (Vec<Signature>, CMatrix) {
    let sigs: BTreeSet<Signature> = elems.iter().flat_map(|p| p.terms().map(|(s, _)| s.clone())).collect();
    let sigs: Vec<Signature> = sigs.into_iter().collect();
    let m = CMatrix::from_fn(sigs.len(), elems.len(), |r, c| elems[c].coefficient(&sigs[r]));
    (sigs, m)
}

/// Numerical rank of a set of polynomials viewed as coefficient vectors over
/// monomial signatures. Each polynomial is normalized first so that scale does
/// not affect the decision.
pub fn rank(elems: &[&LadderPolynomial]) -> usize {
    let normed: Vec<LadderPolynomial> = elems.iter().filter(|p| !p.is_zero()).map(|p| p.normalized()).collect();
    if normed.is_empty() {
        return 0;
    }
    let refs: Vec<&LadderPolynomial> = normed.iter().collect();
    let (_, m) = signature_matrix(&refs);
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let r = ColPivQR::new(m).r();
    let k = r.nrows().min(r.ncols());
    (0..k).filter(|&i| r[(i, i)].norm() > RANK_TOL * scale).count()
}

/// Ordered basis of a finite-dimensional Lie algebra of ladder polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct LieBasis {
    modes: usize,
    elements: Vec<LadderPolynomial>,
    central: Vec<bool>,
}

impl LieBasis {
    /// Wraps already-closed elements. Independence is checked; closure is
    /// checked later by [`structure_constants`].
    pub fn new(elements: Vec<LadderPolynomial>) -> Result<Self, AlgebraError> {
        let modes = match elements.first() {
            Some(p) => p.modes(),
            None => return Err(AlgebraError::NoGenerators),
        };
        for p in &elements {
            if p.modes() != modes {
                return Err(AlgebraError::ModeMismatch { left: modes, right: p.modes() });
            }
        }
        for i in 0..elements.len() {
            let refs: Vec<&LadderPolynomial> = elements[..=i].iter().collect();
            if rank(&refs) != i + 1 {
                return Err(AlgebraError::DependentGenerator { index: i });
            }
        }
        let central = central_flags(&elements)?;
        Ok(LieBasis { modes, elements, central })
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn elements(&self) -> &[LadderPolynomial] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &LadderPolynomial {
        &self.elements[i]
    }

    pub fn is_central(&self, i: usize) -> bool {
        self.central[i]
    }

    pub fn central_flags(&self) -> &[bool] {
        &self.central
    }

    pub fn index_of(&self, p: &LadderPolynomial, tol: f64) -> Option<usize> {
        self.elements.iter().position(|e| e.approx_eq(p, tol))
    }

    /// Coordinates of `p` in this basis, with the absolute residual of the
    /// re-expansion.
    pub fn coordinates(&self, p: &LadderPolynomial) -> Result<(Vec<C64>, f64), AlgebraError> {
        if p.modes() != self.modes {
            return Err(AlgebraError::ModeMismatch { left: self.modes, right: p.modes() });
        }
        let mut refs: Vec<&LadderPolynomial> = self.elements.iter().collect();
        refs.push(p);
        let (_, m) = signature_matrix(&refs);
        let n = self.dim();
        let b = m.columns(0, n).into_owned();
        let v: CVector = m.column(n).into_owned();
        // Normal equations keep small integer systems exact; bases here are
        // tiny and well conditioned.
        let gram = b.adjoint() * &b;
        let rhs = b.adjoint() * &v;
        let x = gram.lu().solve(&rhs).ok_or(AlgebraError::NotInSpan { residual: f64::INFINITY })?;
        let residual = (&b * &x - &v).iter().map(|z| z.norm()).fold(0.0, f64::max);
        Ok((x.iter().copied().collect(), residual))
    }

    /// Coordinates that must reproduce `p` to within the span tolerance.
    pub fn expand(&self, p: &LadderPolynomial) -> Result<Vec<C64>, AlgebraError> {
        let (x, residual) = self.coordinates(p)?;
        if residual > SPAN_TOL * p.max_coeff().max(1.0) {
            return Err(AlgebraError::NotInSpan { residual });
        }
        Ok(x)
    }

    /// `Σ_j x_j H_j`.
    pub fn combine(&self, x: &[C64]) -> LadderPolynomial {
        self.elements
            .iter()
            .zip(x)
            .fold(LadderPolynomial::zero(self.modes), |acc, (e, &c)| &acc + &e.scale(c))
    }
}

fn central_flags(elements: &[LadderPolynomial]) -> Result<Vec<bool>, AlgebraError> {
    let mut flags = vec![true; elements.len()];
    for i in 0..elements.len() {
        for j in (i + 1)..elements.len() {
            let c = commutator(&elements[i], &elements[j])?;
            let scale = elements[i].max_coeff() * elements[j].max_coeff();
            if c.max_coeff() > RANK_TOL * scale {
                flags[i] = false;
                flags[j] = false;
            }
        }
    }
    Ok(flags)
}

/// Smallest basis containing `generators` and closed under commutation.
///
/// Generators keep their given form and order. New elements are commutators
/// normalized to unit leading coefficient, added in breadth-first discovery
/// order: for each generation, pairs (old, new) first and then (new, new).
pub fn close_algebra(generators: &[LadderPolynomial], max_dim: usize) -> Result<LieBasis, AlgebraError> {
    if generators.is_empty() {
        return Err(AlgebraError::NoGenerators);
    }
    if generators.len() > max_dim {
        return Err(AlgebraError::ClosureOverflow { max_dim });
    }
    let mut basis = LieBasis::new(generators.to_vec())?.elements;
    let mut checked = 0;
    let mut generation = 0;
    while checked < basis.len() {
        let frontier = basis.len();
        for j in checked..frontier {
            for i in 0..j {
                let c = commutator(&basis[i], &basis[j])?;
                if c.is_zero() {
                    continue;
                }
                let mut refs: Vec<&LadderPolynomial> = basis.iter().collect();
                refs.push(&c);
                if rank(&refs) > basis.len() {
                    if basis.len() == max_dim {
                        return Err(AlgebraError::ClosureOverflow { max_dim });
                    }
                    log::debug!("closure generation {generation}: new element {}", c.normalized());
                    basis.push(c.normalized());
                }
            }
        }
        checked = frontier;
        generation += 1;
    }
    LieBasis::new(basis)
}

/// `c[j][k][l]` with `[H_j, H_k] = Σ_l c[j][k][l] H_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    n: usize,
    table: Vec<C64>,
    residual: f64,
}

impl StructureConstants {
    /// Builds a table directly from `c[j][k][l]` values.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize) -> C64) -> Self {
        let mut table = vec![C64::new(0.0, 0.0); n * n * n];
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    table[(j * n + k) * n + l] = f(j, k, l);
                }
            }
        }
        StructureConstants { n, table, residual: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, j: usize, k: usize, l: usize) -> C64 {
        self.table[(j * self.n + k) * self.n + l]
    }

    /// Largest re-expansion residual met while building the table.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.n;
        let mut r: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    r = r.max((self.get(j, k, l) + self.get(k, j, l)).norm());
                }
            }
        }
        r
    }

    /// Largest entry of `[[H_j,H_k],H_l] + [[H_k,H_l],H_j] + [[H_l,H_j],H_k]`
    /// expanded through the table.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    for out in 0..n {
                        let mut s = C64::new(0.0, 0.0);
                        for m in 0..n {
                            s += self.get(j, k, m) * self.get(m, l, out)
                                + self.get(k, l, m) * self.get(m, j, out)
                                + self.get(l, j, m) * self.get(m, k, out);
                        }
                        worst = worst.max(s.norm());
                    }
                }
            }
        }
        worst
    }

    /// Non-zero entries in `(j, k, l)` order.
    pub fn nonzero(&self) -> Vec<(usize, usize, usize, C64)> {
        let n = self.n;
        let mut out = Vec::new();
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let c = self.get(j, k, l);
                    if c != C64::new(0.0, 0.0) {
                        out.push((j, k, l, c));
                    }
                }
            }
        }
        out
    }
}

pub fn structure_constants(basis: &LieBasis) -> Result<StructureConstants, AlgebraError> {
    let n = basis.dim();
    let mut table = vec![C64::new(0.0, 0.0); n * n * n];
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for k in (j + 1)..n {
            let c = commutator(basis.element(j), basis.element(k))?;
            if c.is_zero() {
                continue;
            }
            let (x, residual) = basis.coordinates(&c)?;
            let scale = c.max_coeff().max(1.0);
            if residual > SPAN_TOL * scale {
                return Err(AlgebraError::NotClosed { j, k, residual });
            }
            worst = worst.max(residual / scale);
            for (l, v) in x.into_iter().enumerate() {
                // snap cancellation residue
                let v = if v.norm() <= 1e-14 * scale { C64::new(0.0, 0.0) } else { v };
                table[(j * n + k) * n + l] = v;
                table[(k * n + j) * n + l] = -v;
            }
        }
    }
    Ok(StructureConstants { n, table, residual: worst })
}

/// `M_j` with `(M_j)_{l,k} = c[j][k][l]`: the action of `ad H_j` on coordinates.
pub fn adjoint_matrices(sc: &StructureConstants) -> Vec<CMatrix> {
    let n = sc.dim();
    (0..n).map(|j| CMatrix::from_fn(n, n, |l, k| sc.get(j, k, l))).collect()
}
