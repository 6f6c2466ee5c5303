//! Open-system dynamics in Liouville space.
//!
//! Density matrices are stacked column by column, so that
//! `vec(A B C) = (Cᵀ ⊗ A) vec(B)`. The Lindblad generator for
//! `ρ̇ = −i[H, ρ] + Σ h_nm (L_n ρ L_m† − ½{L_m† L_n, ρ})` then reads
//!
//! `−i(𝟙 ⊗ H − Hᵀ ⊗ 𝟙) + Σ h_nm [L̄_m ⊗ L_n − ½ 𝟙 ⊗ L_m†L_n − ½ (L_m†L_n)ᵀ ⊗ 𝟙]`.
//!
//! The generator is sparse for ladder-operator inputs; propagation works on a
//! compressed copy with a truncated Taylor series per short step.

use nalgebra::SymmetricEigen;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::algebra::{close_algebra, AlgebraError, LadderMonomial, LadderPolynomial, LieBasis, Signature};
use crate::fock::FockOperator;
use crate::linalg::{kron, max_abs, CMatrix, CVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LiouvilleError {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("vector of length {0} is not a stacked square matrix")]
    NotStacked(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("trace drifted by {drift:e}")]
    TraceDrift { drift: f64 },
    #[error("invalid step: {0}")]
    BadStep(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

const TRACE_TOL: f64 = 1e-9;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Column-stacked `vec(M)`.
pub fn vectorize(m: &CMatrix) -> Result<CVector, LiouvilleError> {
    if m.nrows() != m.ncols() {
        return Err(LiouvilleError::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    // nalgebra storage is column-major
    Ok(CVector::from_column_slice(m.as_slice()))
}

pub fn devectorize(v: &CVector) -> Result<CMatrix, LiouvilleError> {
    let n = (v.len() as f64).sqrt().round() as usize;
    if n * n != v.len() {
        return Err(LiouvilleError::NotStacked(v.len()));
    }
    Ok(CMatrix::from_column_slice(n, n, v.as_slice()))
}

/// `max |vec(ABC) − (Cᵀ ⊗ A) vec(B)|`.
pub fn kron_identity_check(a: &CMatrix, b: &CMatrix, c: &CMatrix) -> Result<f64, LiouvilleError> {
    if a.ncols() != b.nrows() || b.ncols() != c.nrows() || a.nrows() != c.ncols() {
        return Err(LiouvilleError::Shape(format!(
            "{}x{} · {}x{} · {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols(),
            c.nrows(),
            c.ncols()
        )));
    }
    let left = vectorize(&(a * b * c))?;
    let right = kron(&c.transpose(), a) * CVector::from_column_slice(b.as_slice());
    Ok((left - right).iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Compressed sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<C64>,
    one_norm: f64,
}

impl SparseMatrix {
    pub fn from_dense(m: &CMatrix) -> Self {
        let n = m.nrows();
        let mut row_start = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_start.push(0);
        for i in 0..n {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                if z != zero() {
                    cols.push(j);
                    values.push(z);
                }
            }
            row_start.push(cols.len());
        }
        SparseMatrix { n, row_start, cols, values, one_norm: crate::linalg::one_norm(m) }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn mul_vec(&self, v: &CVector) -> CVector {
        CVector::from_fn(self.n, |i, _| {
            let mut acc = zero();
            for k in self.row_start[i]..self.row_start[i + 1] {
                acc += self.values[k] * v[self.cols[k]];
            }
            acc
        })
    }

    /// `exp(τ A) v` by Taylor series on substeps with `‖τA‖₁ ≤ 1`.
    pub fn expm_multiply(&self, v: &CVector, tau: f64) -> CVector {
        let norm = self.one_norm * tau.abs();
        let substeps = norm.ceil().max(1.0) as usize;
        let h = tau / substeps as f64;
        let mut out = v.clone();
        for _ in 0..substeps {
            let mut term = out.clone();
            let mut acc = out.clone();
            let scale = out.norm().max(f64::MIN_POSITIVE);
            for k in 1..=60 {
                term = self.mul_vec(&term) * C64::new(h / k as f64, 0.0);
                acc += &term;
                if term.norm() <= 1e-17 * scale {
                    break;
                }
            }
            out = acc;
        }
        out
    }
}

/// Vectorized Lindblad generator.
#[derive(Debug, Clone)]
pub struct Lindbladian {
    pub matrix: CMatrix,
    /// Side of the density matrix.
    pub dim: usize,
    pub operators: Vec<CMatrix>,
    pub rates: CMatrix,
    /// False when the rate matrix has a negative eigenvalue below −1e-12.
    pub rates_psd: bool,
}

impl Lindbladian {
    /// `max_j |Σ_i ℒ_{(i,i), j}|`: how far `tr` is from a left null vector.
    pub fn trace_residual(&self) -> f64 {
        let n = self.dim;
        (0..n * n)
            .map(|j| (0..n).map(|i| self.matrix[(i + i * n, j)]).sum::<C64>().norm())
            .fold(0.0, f64::max)
    }

    pub fn sparse(&self) -> SparseMatrix {
        SparseMatrix::from_dense(&self.matrix)
    }
}

/// Assembles the generator for Hamiltonian `h`, jump operators `ls` and rate
/// matrix `rates` (`h_nm`, Hermitian positive semidefinite). A single jump
/// operator with rate `κ` uses `rates = [[κ]]`.
pub fn build_lindbladian(h: &FockOperator, ls: &[FockOperator], rates: &CMatrix) -> Result<Lindbladian, LiouvilleError> {
    let n = h.dim();
    if h.matrix.ncols() != n {
        return Err(LiouvilleError::NotSquare { rows: n, cols: h.matrix.ncols() });
    }
    if rates.nrows() != ls.len() || rates.ncols() != ls.len() {
        return Err(LiouvilleError::Shape(format!("{} operators, rate matrix {}x{}", ls.len(), rates.nrows(), rates.ncols())));
    }
    if let Some(l) = ls.iter().find(|l| l.dim() != n) {
        return Err(LiouvilleError::Shape(format!("jump operator of dimension {} vs {n}", l.dim())));
    }
    let rates_psd = rates_are_psd(rates);
    if !rates_psd {
        log::warn!("rate matrix is not positive semidefinite; the generator is not completely positive");
    }
    let id = CMatrix::identity(n, n);
    let mut gen = (kron(&id, &h.matrix) - kron(&h.matrix.transpose(), &id)) * C64::new(0.0, -1.0);
    for (a, ln) in ls.iter().enumerate() {
        for (b, lm) in ls.iter().enumerate() {
            let r = rates[(a, b)];
            if r == zero() {
                continue;
            }
            let lm_dag_ln = lm.matrix.adjoint() * &ln.matrix;
            let jump = kron(&lm.matrix.map(|z| z.conj()), &ln.matrix);
            let anti = kron(&id, &lm_dag_ln) + kron(&lm_dag_ln.transpose(), &id);
            gen += (jump - anti * C64::new(0.5, 0.0)) * r;
        }
    }
    Ok(Lindbladian { matrix: gen, dim: n, operators: ls.iter().map(|l| l.matrix.clone()).collect(), rates: rates.clone(), rates_psd })
}

fn rates_are_psd(rates: &CMatrix) -> bool {
    if rates.nrows() == 0 {
        return true;
    }
    if max_abs(&(rates - rates.adjoint())) > 1e-12 {
        return false;
    }
    let herm = (rates + rates.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(herm).eigenvalues.iter().all(|&e| e >= -1e-12)
}

/// Density matrices on an output grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<CMatrix>,
    /// Largest `|tr ρ − tr ρ₀|` seen at an output.
    pub trace_drift: f64,
    /// Largest anti-Hermitian part removed by symmetrization.
    pub hermiticity_drift: f64,
}

impl DensityTrajectory {
    pub fn expectation(&self, op: &CMatrix) -> Vec<C64> {
        self.states.iter().map(|rho| (op * rho).trace()).collect()
    }
}

fn check_density(rho: &CMatrix, dim: usize) -> Result<(), LiouvilleError> {
    if rho.nrows() != rho.ncols() {
        return Err(LiouvilleError::NotSquare { rows: rho.nrows(), cols: rho.ncols() });
    }
    if rho.nrows() != dim {
        return Err(LiouvilleError::Shape(format!("density of side {} vs generator side {dim}", rho.nrows())));
    }
    Ok(())
}

fn check_steps(grid: &[f64], dt: f64) -> Result<(), LiouvilleError> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(LiouvilleError::BadStep("output grid must be strictly increasing".into()));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(LiouvilleError::BadStep(format!("dt = {dt}")));
    }
    Ok(())
}

struct Stepper {
    trace0: C64,
    trace_drift: f64,
    hermiticity_drift: f64,
}

impl Stepper {
    fn symmetrize(&mut self, v: &CVector) -> Result<CVector, LiouvilleError> {
        let rho = devectorize(v)?;
        let anti = &rho - rho.adjoint();
        self.hermiticity_drift = self.hermiticity_drift.max(0.5 * max_abs(&anti));
        let herm = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
        vectorize(&herm)
    }

    fn record(&mut self, rho: &CMatrix) -> Result<(), LiouvilleError> {
        let drift = (rho.trace() - self.trace0).norm();
        self.trace_drift = self.trace_drift.max(drift);
        if drift > TRACE_TOL {
            return Err(LiouvilleError::TraceDrift { drift });
        }
        Ok(())
    }
}

/// Propagates `ρ₀` under a time-independent generator with steps of at most `dt`.
pub fn propagate_density(
    l: &Lindbladian,
    rho0: &CMatrix,
    grid: &[f64],
    dt: f64,
) -> Result<DensityTrajectory, LiouvilleError> {
    let sparse = l.sparse();
    propagate_with(|_| sparse.clone(), l.dim, rho0, grid, dt, false)
}

/// Propagates under a time-dependent generator, using the generator at each
/// step midpoint (second order in `dt`).
pub fn propagate_density_with<B: Fn(f64) -> Lindbladian>(
    builder: B,
    rho0: &CMatrix,
    grid: &[f64],
    dt: f64,
) -> Result<DensityTrajectory, LiouvilleError> {
    let dim = builder(grid.first().copied().unwrap_or(0.0)).dim;
    propagate_with(|t| builder(t).sparse(), dim, rho0, grid, dt, true)
}

fn propagate_with<S: Fn(f64) -> SparseMatrix>(
    generator: S,
    dim: usize,
    rho0: &CMatrix,
    grid: &[f64],
    dt: f64,
    time_dependent: bool,
) -> Result<DensityTrajectory, LiouvilleError> {
    check_steps(grid, dt)?;
    check_density(rho0, dim)?;
    let mut stepper = Stepper { trace0: rho0.trace(), trace_drift: 0.0, hermiticity_drift: 0.0 };
    let mut v = vectorize(rho0)?;
    let mut states = vec![rho0.clone()];
    let fixed = if time_dependent { None } else { Some(generator(grid[0])) };
    for w in grid.windows(2) {
        let steps = ((w[1] - w[0]) / dt - 1e-9).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / steps as f64;
        for k in 0..steps {
            v = match &fixed {
                Some(g) => g.expm_multiply(&v, h),
                None => generator(w[0] + (k as f64 + 0.5) * h).expm_multiply(&v, h),
            };
            v = stepper.symmetrize(&v)?;
        }
        let rho = devectorize(&v)?;
        stepper.record(&rho)?;
        states.push(rho);
    }
    log::debug!("density propagation: trace drift {:e}, hermiticity drift {:e}", stepper.trace_drift, stepper.hermiticity_drift);
    Ok(DensityTrajectory {
        times: grid.to_vec(),
        states,
        trace_drift: stepper.trace_drift,
        hermiticity_drift: stepper.hermiticity_drift,
    })
}

/// Smallest eigenvalue of the Hermitian part of `ρ`.
pub fn min_eigenvalue(rho: &CMatrix) -> f64 {
    let herm = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(herm).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `|ψ⟩⟨ψ|`.
pub fn pure_density(psi: &CVector) -> CMatrix {
    psi * psi.adjoint()
}

/// Places a single-mode polynomial on `mode` of a two-mode space, transposing
/// it (`a†^p a^q → a†^q a^p`, coefficients unchanged) if requested.
fn lift(p: &LadderPolynomial, mode: usize, transpose: bool) -> LadderPolynomial {
    LadderPolynomial::from_monomials(
        2,
        p.monomials().map(|m| {
            let (cre, ann) = m.signature.powers()[0];
            let pair = if transpose { (ann, cre) } else { (cre, ann) };
            let mut sig = vec![(0, 0); 2];
            sig[mode] = pair;
            LadderMonomial { signature: Signature::new(sig), coeff: m.coeff }
        }),
    )
}

/// Closure of the superoperator generators in a two-mode picture: left
/// multiplication by `A` acts on mode `a` as `A`, right multiplication by `B`
/// acts on mode `b` as `Bᵀ`. The generators are `H_k·`, `·H_k`, `L_n · L_m†`,
/// `L_m†L_n ·` and `· L_m†L_n` for every Hamiltonian term and jump pair.
pub fn superalgebra_closure(h_terms: &[LadderPolynomial], ls: &[LadderPolynomial]) -> Result<LieBasis, LiouvilleError> {
    if let Some(p) = h_terms.iter().chain(ls).find(|p| p.modes() != 1) {
        return Err(LiouvilleError::Shape(format!("expected single-mode polynomials, got {} modes", p.modes())));
    }
    let mut gens = Vec::new();
    for h in h_terms {
        gens.push(lift(h, 0, false));
        gens.push(lift(h, 1, true));
    }
    for ln in ls {
        for lm in ls {
            let lm_dag = lm.dagger();
            let jump = lift(ln, 0, false).try_mul(&lift(&lm_dag, 1, true))?;
            gens.push(jump);
            let product = lm_dag.try_mul(ln)?;
            gens.push(lift(&product, 0, false));
            gens.push(lift(&product, 1, true));
        }
    }
    let mut unique: Vec<LadderPolynomial> = Vec::new();
    for g in gens {
        if g.is_zero() {
            continue;
        }
        let refs: Vec<&LadderPolynomial> = unique.iter().chain(std::iter::once(&g)).collect();
        if crate::algebra::rank(&refs) == refs.len() {
            unique.push(g);
        }
    }
    Ok(close_algebra(&unique, 64)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_polynomial;
    use crate::fock::{coherent_state, ladder_matrix, to_matrix, FockState};
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn p(s: &str) -> LadderPolynomial {
        parse_polynomial(s).unwrap()
    }

    fn random_matrix(rng: &mut impl Rng, n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn column_stacking() {
        let v = vectorize(&CMatrix::identity(2, 2)).unwrap();
        assert_eq!(v.as_slice(), &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        let v = vectorize(&m).unwrap();
        assert_eq!(v[2], c(1.0, 0.0));
        assert_eq!(v.iter().filter(|z| **z != zero()).count(), 1);
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let r = random_matrix(&mut rng, 3);
        assert_eq!(devectorize(&vectorize(&r).unwrap()).unwrap(), r);
        assert!(vectorize(&CMatrix::zeros(2, 3)).is_err());
        assert!(devectorize(&CVector::zeros(3)).is_err());
    }

    #[test]
    fn kron_identity() {
        let id = CMatrix::identity(3, 3);
        assert_eq!(kron_identity_check(&id, &id, &id).unwrap(), 0.0);
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..100 {
            let (a, b, cc) = (random_matrix(&mut rng, 3), random_matrix(&mut rng, 3), random_matrix(&mut rng, 3));
            assert!(kron_identity_check(&a, &b, &cc).unwrap() <= 1e-13);
        }
        let a = ladder_matrix(5).matrix;
        let b = random_matrix(&mut rng, 6);
        assert!(kron_identity_check(&a, &b, &a.adjoint()).unwrap() <= 1e-13);
        assert!(kron_identity_check(&CMatrix::zeros(2, 3), &id, &id).is_err());
    }

    fn damped(cut: usize, kappa: f64) -> Lindbladian {
        let h = to_matrix(&p("ad*a"), cut).unwrap();
        build_lindbladian(&h, &[ladder_matrix(cut)], &CMatrix::from_element(1, 1, c(kappa, 0.0))).unwrap()
    }

    #[test]
    fn generator_preserves_trace() {
        assert!(damped(10, 0.5).trace_residual() <= 1e-10);
        let h = to_matrix(&p("ad*a + 0.2*ad^2 + 0.2*a^2"), 8).unwrap();
        let ls = [ladder_matrix(8), to_matrix(&p("ad*a"), 8).unwrap()];
        let rates = CMatrix::from_row_slice(2, 2, &[c(0.3, 0.0), c(0.1, 0.05), c(0.1, -0.05), c(0.2, 0.0)]);
        let l = build_lindbladian(&h, &ls, &rates).unwrap();
        assert!(l.rates_psd);
        assert!(l.trace_residual() <= 1e-10);
        let bad = CMatrix::from_row_slice(2, 2, &[c(0.1, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.1, 0.0)]);
        assert!(!build_lindbladian(&h, &ls, &bad).unwrap().rates_psd);
    }

    #[test]
    fn damped_coherent_state() {
        let (cut, kappa, alpha) = (30, 0.5, c(1.0, 0.0));
        let l = damped(cut, kappa);
        let rho0 = pure_density(&coherent_state(alpha, cut).unwrap().vector);
        let grid: Vec<f64> = (0..=10).map(|k| 0.5 * k as f64).collect();
        let traj = propagate_density(&l, &rho0, &grid, 0.05).unwrap();
        let reference = propagate_density(&l, &rho0, &grid, 0.05 / 16.0).unwrap();
        let a = ladder_matrix(cut).matrix;
        let got = traj.expectation(&a);
        let want = reference.expectation(&a);
        assert!(traj.trace_drift <= 1e-9);
        for (k, &t) in grid.iter().enumerate() {
            assert!((got[k] - want[k]).norm() <= 1e-6);
            let analytic = alpha * C64::new(-kappa / 2.0, -1.0).scale(t).exp();
            assert!((got[k] - analytic).norm() <= 1e-6, "t {t}");
            assert!(min_eigenvalue(&traj.states[k]) >= -1e-8);
        }
    }

    #[test]
    fn damping_relaxes_to_vacuum() {
        let (cut, kappa) = (20, 0.5);
        let l = damped(cut, kappa);
        let rho0 = pure_density(&coherent_state(c(1.0, 0.0), cut).unwrap().vector);
        let traj = propagate_density(&l, &rho0, &[0.0, 5.0 / kappa], 0.05).unwrap();
        let n = to_matrix(&p("ad*a"), cut).unwrap().matrix;
        assert!(traj.expectation(&n)[1].re <= 1e-2);
    }

    #[test]
    fn closed_system_matches_unitary() {
        let cut = 20;
        let h = to_matrix(&p("ad*a + 0.1*ad^2 + 0.1*a^2"), cut).unwrap();
        let l = build_lindbladian(&h, &[], &CMatrix::zeros(0, 0)).unwrap();
        let psi0 = coherent_state(c(0.5, 0.3), cut).unwrap();
        let t = 2.0;
        let traj = propagate_density(&l, &pure_density(&psi0.vector), &[0.0, t], 0.02).unwrap();
        let u = crate::linalg::matrix_exp(&(&h.matrix * c(0.0, -t))).unwrap();
        let psi = FockState { vector: &u * &psi0.vector, cutoffs: psi0.cutoffs.clone() };
        let fidelity = psi.vector.dotc(&(&traj.states[1] * &psi.vector)).re;
        assert!(fidelity >= 1.0 - 1e-9, "{fidelity}");
    }

    #[test]
    fn dephasing_keeps_populations() {
        let cut = 16;
        let h = to_matrix(&p("ad*a"), cut).unwrap();
        let l = build_lindbladian(&h, &[h.clone()], &CMatrix::from_element(1, 1, c(0.3, 0.0))).unwrap();
        let rho0 = pure_density(&coherent_state(c(1.0, 0.0), cut).unwrap().vector);
        let traj = propagate_density(&l, &rho0, &[0.0, 2.5, 5.0], 0.05).unwrap();
        for rho in &traj.states {
            for n in 0..=cut {
                assert!((rho[(n, n)] - rho0[(n, n)]).norm() <= 1e-9);
            }
        }
        // coherences decay as e^{−κ(n−m)²t/2}
        let decay = (-0.3 * 0.5 * 5.0f64).exp();
        assert!((traj.states[2][(0, 1)].norm() - rho0[(0, 1)].norm() * decay).abs() < 1e-9);
    }

    #[test]
    fn time_dependent_builder_matches_constant() {
        let cut = 12;
        let l = damped(cut, 0.4);
        let rho0 = pure_density(&coherent_state(c(0.5, 0.0), cut).unwrap().vector);
        let a = propagate_density(&l, &rho0, &[0.0, 1.0], 0.1).unwrap();
        let b = propagate_density_with(|_| l.clone(), &rho0, &[0.0, 1.0], 0.1).unwrap();
        assert!(max_abs(&(&a.states[1] - &b.states[1])) < 1e-13);
    }

    #[test]
    fn closure_free_damped() {
        let basis = superalgebra_closure(&[p("ad*a")], &[p("a")]).unwrap();
        assert!(basis.dim() <= 10, "{}", basis.dim());
        assert_eq!(basis.dim(), 3);
    }

    #[test]
    fn closure_quadratic_damped_is_finite() {
        let basis = superalgebra_closure(&[p("ad*a"), p("ad^2"), p("a^2")], &[p("a")]).unwrap();
        assert!(basis.dim() <= 64);
    }

    #[test]
    fn closure_without_jumps_is_two_copies() {
        let terms = [p("ad*a"), p("ad^2"), p("a^2")];
        let single = close_algebra(&terms, 16).unwrap();
        let has_identity = single.coordinates(&LadderPolynomial::identity(1)).unwrap().1 < 1e-10;
        let doubled = superalgebra_closure(&terms, &[]).unwrap();
        assert_eq!(doubled.dim(), 2 * single.dim() - usize::from(has_identity), "{} {}", single.dim(), doubled.dim());
    }

    #[test]
    fn sparse_exponential_matches_dense() {
        let l = damped(6, 0.3);
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let v = CVector::from_fn(49, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let dense = crate::linalg::matrix_exp(&(&l.matrix * c(0.7, 0.0))).unwrap() * &v;
        let sparse = l.sparse().expm_multiply(&v, 0.7);
        assert!((dense - sparse).norm() < 1e-12);
        assert!(l.sparse().nnz() < 49 * 49 / 4);
    }
}
