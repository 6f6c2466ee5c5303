//! Truncated Fock-space images and brute-force time-ordered propagation.
//!
//! Images of normal-ordered monomials are exact truncations of the infinite
//! matrices: `a†^p a^q` only passes through levels between the input and output
//! level. Truncation effects therefore only enter through products and
//! exponentials, and they stay confined to the top levels as long as the state
//! population there is small.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::algebra::{LadderPolynomial, LieBasis};
use crate::engine::CoefficientTrajectory;
use crate::linalg::{expm_multiply, kron, matrix_exp, max_abs, CMatrix, CVector, LinalgError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("cutoff {cutoff} is smaller than the polynomial degree {degree}")]
    CutoffTooSmall { degree: u32, cutoff: usize },
    #[error("expected {expected} mode cutoffs, got {got}")]
    ModeCount { expected: usize, got: usize },
    #[error("population {leakage:e} in the top two levels exceeds 1e-10")]
    LeakageTooLarge { leakage: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("operator is not Hermitian (max |A - A†| = {0:e})")]
    NotHermitian(f64),
    #[error("propagation did not converge: drift {drift:e} after {halvings} halvings")]
    NonConvergent { drift: f64, halvings: usize },
    #[error("invalid step: {0}")]
    BadStep(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

const LEAKAGE_TOL: f64 = 1e-10;

/// Dense matrix image of an operator in a truncated (tensor) Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    pub matrix: CMatrix,
    /// Per-mode cutoff; mode `m` keeps levels `0..=cutoffs[m]`.
    pub cutoffs: Vec<usize>,
    /// Degree of the generating polynomial, for truncation bookkeeping.
    pub degree: u32,
}

impl FockOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cutoff(&self) -> usize {
        self.cutoffs[0]
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn check_hermitian(&self) -> Result<(), FockError> {
        let e = self.hermiticity_error();
        if e > 1e-12 {
            return Err(FockError::NotHermitian(e));
        }
        Ok(())
    }

    pub fn apply(&self, psi: &FockState) -> Result<FockState, FockError> {
        if psi.dim() != self.dim() {
            return Err(FockError::DimensionMismatch { left: self.dim(), right: psi.dim() });
        }
        Ok(FockState { vector: &self.matrix * &psi.vector, cutoffs: psi.cutoffs.clone() })
    }

    pub fn dagger(&self) -> Self {
        FockOperator { matrix: self.matrix.adjoint(), cutoffs: self.cutoffs.clone(), degree: self.degree }
    }
}

/// State vector in a truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    pub vector: CVector,
    pub cutoffs: Vec<usize>,
}

impl FockState {
    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn cutoff(&self) -> usize {
        self.cutoffs[0]
    }

    pub fn norm(&self) -> f64 {
        self.vector.norm()
    }

    /// Single-mode population in the top two levels.
    pub fn leakage(&self) -> f64 {
        let n = self.vector.len();
        self.vector.iter().skip(n.saturating_sub(2)).map(|z| z.norm_sqr()).sum()
    }

    /// `|n⟩`.
    pub fn number(n: usize, cutoff: usize) -> Self {
        let mut v = CVector::zeros(cutoff + 1);
        v[n] = C64::new(1.0, 0.0);
        FockState { vector: v, cutoffs: vec![cutoff] }
    }

    pub fn vacuum(cutoff: usize) -> Self {
        Self::number(0, cutoff)
    }
}

/// Single-mode annihilation operator, `a|n⟩ = √n |n−1⟩`.
pub fn ladder_matrix(cutoff: usize) -> FockOperator {
    let mut m = CMatrix::zeros(cutoff + 1, cutoff + 1);
    for n in 1..=cutoff {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    FockOperator { matrix: m, cutoffs: vec![cutoff], degree: 1 }
}

fn mode_monomial(cutoff: usize, cre: u32, ann: u32) -> CMatrix {
    // ⟨n−q+p| a†^p a^q |n⟩ = √(n!/(n−q)!) √((n−q+p)!/(n−q)!)
    let d = cutoff + 1;
    let mut m = CMatrix::zeros(d, d);
    let (p, q) = (cre as usize, ann as usize);
    for n in q..d {
        let mid = n - q;
        let out = mid + p;
        if out >= d {
            continue;
        }
        let mut v = 1.0;
        for k in (mid + 1)..=n {
            v *= k as f64;
        }
        for k in (mid + 1)..=out {
            v *= k as f64;
        }
        m[(out, n)] = C64::new(v.sqrt(), 0.0);
    }
    m
}

/// Image of a polynomial with the same cutoff on every mode.
pub fn to_matrix(poly: &LadderPolynomial, cutoff: usize) -> Result<FockOperator, FockError> {
    to_matrix_modes(poly, &vec![cutoff; poly.modes()])
}

/// Image in the tensor basis with row-major index `n_a·(c_b+1) + n_b`.
pub fn to_matrix_modes(poly: &LadderPolynomial, cutoffs: &[usize]) -> Result<FockOperator, FockError> {
    if cutoffs.len() != poly.modes() {
        return Err(FockError::ModeCount { expected: poly.modes(), got: cutoffs.len() });
    }
    let degree = poly.degree();
    for (m, &c) in cutoffs.iter().enumerate() {
        let mode_degree = poly.terms().map(|(s, _)| s.powers()[m].0.max(s.powers()[m].1)).max().unwrap_or(0);
        if mode_degree as usize > c {
            return Err(FockError::CutoffTooSmall { degree, cutoff: c });
        }
    }
    let dim: usize = cutoffs.iter().map(|c| c + 1).product();
    let mut out = CMatrix::zeros(dim, dim);
    for (sig, coeff) in poly.terms() {
        let mut block = CMatrix::from_element(1, 1, *coeff);
        for (m, &(cre, ann)) in sig.powers().iter().enumerate() {
            block = kron(&block, &mode_monomial(cutoffs[m], cre, ann));
        }
        out += block;
    }
    Ok(FockOperator { matrix: out, cutoffs: cutoffs.to_vec(), degree })
}

/// Position quadrature `(a† + a)/√2`.
pub fn quadrature_x(cutoff: usize) -> FockOperator {
    let a = ladder_matrix(cutoff).matrix;
    let m = (a.adjoint() + &a) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    FockOperator { matrix: m, cutoffs: vec![cutoff], degree: 1 }
}

/// Momentum quadrature `i(a† − a)/√2`.
pub fn quadrature_p(cutoff: usize) -> FockOperator {
    let a = ladder_matrix(cutoff).matrix;
    let m = (a.adjoint() - &a) * C64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
    FockOperator { matrix: m, cutoffs: vec![cutoff], degree: 1 }
}

/// Normalized truncated coherent state `e^{−|α|²/2} Σ αⁿ/√(n!) |n⟩`.
pub fn coherent_state(alpha: C64, cutoff: usize) -> Result<FockState, FockError> {
    let mut v = CVector::zeros(cutoff + 1);
    let mut amp = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    v[0] = amp;
    for n in 1..=cutoff {
        amp = amp * alpha / (n as f64).sqrt();
        v[n] = amp;
    }
    let raw = FockState { vector: v, cutoffs: vec![cutoff] };
    let leakage = raw.leakage();
    if leakage > LEAKAGE_TOL {
        return Err(FockError::LeakageTooLarge { leakage });
    }
    let norm = raw.norm();
    Ok(FockState { vector: raw.vector / C64::new(norm, 0.0), cutoffs: raw.cutoffs })
}

/// Smallest cutoff (at least `min`) for which a coherent state of amplitude
/// `radius` leaks at most 1e-10 and has mean occupation at most `cutoff/2`.
pub fn choose_cutoff(radius: f64, min: usize) -> usize {
    let mut c = min.max(4);
    loop {
        let occupation_ok = radius * radius <= c as f64 / 2.0;
        if occupation_ok && coherent_state(C64::new(radius, 0.0), c).is_ok() {
            return c;
        }
        c += 1;
    }
}

/// `|⟨ψ|φ⟩|²`.
pub fn fidelity(psi: &FockState, phi: &FockState) -> Result<f64, FockError> {
    if psi.dim() != phi.dim() {
        return Err(FockError::DimensionMismatch { left: psi.dim(), right: phi.dim() });
    }
    Ok(psi.vector.dotc(&phi.vector).norm_sqr())
}

/// `⟨ψ|A|ψ⟩`.
pub fn expectation(op: &FockOperator, psi: &FockState) -> Result<C64, FockError> {
    if psi.dim() != op.dim() {
        return Err(FockError::DimensionMismatch { left: op.dim(), right: psi.dim() });
    }
    Ok(psi.vector.dotc(&(&op.matrix * &psi.vector)))
}

/// `⟨A²⟩ − ⟨A⟩²`.
pub fn variance(op: &FockOperator, psi: &FockState) -> Result<C64, FockError> {
    let mean = expectation(op, psi)?;
    let av = &op.matrix * &psi.vector;
    let second = av.dotc(&av);
    // for Hermitian A, ⟨A²⟩ = ‖Aψ‖²
    Ok(second - mean * mean)
}

/// Step control for the midpoint propagators.
#[derive(Debug, Clone, Copy)]
pub struct MidpointOptions {
    /// Initial step; halved until the extrapolated result settles.
    pub dt: f64,
    /// Largest change between successive extrapolated results.
    pub tol: f64,
    pub max_halvings: usize,
}

impl MidpointOptions {
    pub fn new(dt: f64) -> Self {
        MidpointOptions { dt, tol: 1e-9, max_halvings: 8 }
    }
}

fn steps_for(interval: f64, dt: f64) -> usize {
    ((interval / dt) - 1e-9).ceil().max(1.0) as usize
}

/// Second-order midpoint product `Π exp(−i H(t_k + h/2) h)` with `steps` steps.
pub fn midpoint_propagator<H: Fn(f64) -> CMatrix>(h: &H, t0: f64, t1: f64, steps: usize) -> Result<CMatrix, FockError> {
    let n = h(t0).nrows();
    let dt = (t1 - t0) / steps as f64;
    let mut u = CMatrix::identity(n, n);
    for k in 0..steps {
        let tm = t0 + (k as f64 + 0.5) * dt;
        let step = matrix_exp(&(h(tm) * C64::new(0.0, -dt)))?;
        u = step * u;
    }
    Ok(u)
}

/// Time-ordered propagator over `[0, span]`.
///
/// Midpoint products at step `dt` and `dt/2` are combined by Richardson
/// extrapolation (the midpoint error expands in even powers of the step); the
/// step is halved until two successive extrapolations agree to `tol`.
pub fn propagate<H: Fn(f64) -> CMatrix>(h: H, span: f64, opts: &MidpointOptions) -> Result<CMatrix, FockError> {
    if !(opts.dt > 0.0) || opts.dt > span / 100.0 * (1.0 + 1e-12) {
        return Err(FockError::BadStep(format!("dt = {} must lie in (0, span/100]", opts.dt)));
    }
    let mut steps = steps_for(span, opts.dt);
    let mut coarse = midpoint_propagator(&h, 0.0, span, steps)?;
    let mut previous: Option<CMatrix> = None;
    let mut drift = f64::INFINITY;
    for halving in 0..=opts.max_halvings {
        steps *= 2;
        let fine = midpoint_propagator(&h, 0.0, span, steps)?;
        let extrapolated = (&fine * C64::new(4.0, 0.0) - &coarse) / C64::new(3.0, 0.0);
        if let Some(prev) = &previous {
            drift = max_abs(&(&extrapolated - prev));
            if drift <= opts.tol {
                log::debug!("propagate: converged after {halving} halvings, drift {drift:e}");
                return Ok(extrapolated);
            }
        } else if max_abs(&(&fine - &coarse)) <= opts.tol * 1e-3 {
            // exact per-step exponentials (e.g. constant H)
            return Ok(fine);
        }
        previous = Some(extrapolated);
        coarse = fine;
    }
    Err(FockError::NonConvergent { drift, halvings: opts.max_halvings })
}

fn midpoint_states<H: Fn(f64) -> CMatrix>(h: &H, psi0: &CVector, grid: &[f64], dt: f64) -> Vec<CVector> {
    let mut out = Vec::with_capacity(grid.len());
    let mut psi = psi0.clone();
    out.push(psi.clone());
    for w in grid.windows(2) {
        let steps = steps_for(w[1] - w[0], dt);
        let hstep = (w[1] - w[0]) / steps as f64;
        for k in 0..steps {
            let tm = w[0] + (k as f64 + 0.5) * hstep;
            psi = expm_multiply(&h(tm), &psi, C64::new(0.0, -hstep));
        }
        out.push(psi.clone());
    }
    out
}

/// States on every point of `grid` (which starts at the initial time), using
/// the same midpoint/Richardson scheme as [`propagate`] applied to vectors.
pub fn propagate_state<H: Fn(f64) -> CMatrix>(
    h: H,
    psi0: &FockState,
    grid: &[f64],
    opts: &MidpointOptions,
) -> Result<Vec<FockState>, FockError> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(FockError::BadStep("output grid must be strictly increasing".into()));
    }
    if !(opts.dt > 0.0) {
        return Err(FockError::BadStep(format!("dt = {} must be positive", opts.dt)));
    }
    let mut dt = opts.dt;
    let mut coarse = midpoint_states(&h, &psi0.vector, grid, dt);
    let mut previous: Option<Vec<CVector>> = None;
    let mut drift = f64::INFINITY;
    let wrap = |vs: Vec<CVector>| vs.into_iter().map(|v| FockState { vector: v, cutoffs: psi0.cutoffs.clone() }).collect();
    for _ in 0..=opts.max_halvings {
        dt *= 0.5;
        let fine = midpoint_states(&h, &psi0.vector, grid, dt);
        let extrapolated: Vec<CVector> = fine
            .iter()
            .zip(&coarse)
            .map(|(f, c)| (f * C64::new(4.0, 0.0) - c) / C64::new(3.0, 0.0))
            .collect();
        if let Some(prev) = &previous {
            drift = extrapolated.iter().zip(prev).map(|(a, b)| (a - b).camax()).fold(0.0, f64::max);
            if drift <= opts.tol {
                return Ok(wrap(extrapolated));
            }
        } else {
            let d = fine.iter().zip(&coarse).map(|(a, b)| (a - b).camax()).fold(0.0, f64::max);
            if d <= opts.tol * 1e-3 {
                return Ok(wrap(fine));
            }
        }
        previous = Some(extrapolated);
        coarse = fine;
    }
    Err(FockError::NonConvergent { drift, halvings: opts.max_halvings })
}

/// Time-dependent Hamiltonian `Σ_j s_j(t) A_j` over fixed matrix images.
#[derive(Debug, Clone)]
pub struct FockHamiltonian {
    terms: Vec<(CMatrix, crate::engine::DrivingSignal)>,
    dim: usize,
}

impl FockHamiltonian {
    pub fn new(dim: usize) -> Self {
        FockHamiltonian { terms: Vec::new(), dim }
    }

    pub fn term(mut self, image: &FockOperator, signal: crate::engine::DrivingSignal) -> Self {
        assert_eq!(image.dim(), self.dim, "term dimension");
        self.terms.push((image.matrix.clone(), signal));
        self
    }

    pub fn at(&self, t: f64) -> CMatrix {
        let mut h = CMatrix::zeros(self.dim, self.dim);
        for (m, s) in &self.terms {
            let c = s.eval(t);
            if c != C64::new(0.0, 0.0) {
                h += m * c;
            }
        }
        h
    }
}

fn is_diagonal(m: &CMatrix) -> bool {
    m.iter().enumerate().all(|(k, z)| *z == C64::new(0.0, 0.0) || k % (m.nrows() + 1) == 0)
}

fn exp_apply(image: &CMatrix, f: C64, v: &CVector) -> CVector {
    let scale = C64::new(0.0, -1.0) * f;
    if is_diagonal(image) {
        CVector::from_fn(v.len(), |i, _| (image[(i, i)] * scale).exp() * v[i])
    } else {
        expm_multiply(image, v, scale)
    }
}

/// Ordered product `Π_k exp(−i F_k image_k)` as a dense matrix.
pub fn ansatz_operator(factors: &[(C64, &FockOperator)]) -> Result<FockOperator, FockError> {
    let first = factors.first().ok_or_else(|| FockError::BadStep("no factors".into()))?.1;
    let n = first.dim();
    let mut u = CMatrix::identity(n, n);
    for (f, op) in factors {
        if *f == C64::new(0.0, 0.0) {
            continue;
        }
        u *= matrix_exp(&(&op.matrix * (C64::new(0.0, -1.0) * f)))?;
    }
    Ok(FockOperator { matrix: u, cutoffs: first.cutoffs.clone(), degree: first.degree })
}

/// `Π_k exp(−i F_k image_k) |ψ⟩`, applying the rightmost factor first.
pub fn ansatz_state(factors: &[(C64, &FockOperator)], psi: &FockState) -> FockState {
    let mut v = psi.vector.clone();
    for (f, op) in factors.iter().rev() {
        if *f != C64::new(0.0, 0.0) {
            v = exp_apply(&op.matrix, *f, &v);
        }
    }
    FockState { vector: v, cutoffs: psi.cutoffs.clone() }
}

/// Images of every basis element at a single-mode cutoff.
pub fn basis_images(basis: &LieBasis, cutoff: usize) -> Result<Vec<FockOperator>, FockError> {
    basis.elements().iter().map(|e| to_matrix(e, cutoff)).collect()
}

/// Ansatz propagator from output `index` of a trajectory.
pub fn apply_ansatz(
    trajectory: &CoefficientTrajectory,
    index: usize,
    basis: &LieBasis,
    cutoff: usize,
) -> Result<FockOperator, FockError> {
    let images = basis_images(basis, cutoff)?;
    let factors: Vec<(C64, &FockOperator)> =
        trajectory.factors(index).into_iter().map(|(elem, f)| (f, &images[elem])).collect();
    ansatz_operator(&factors)
}

/// Ansatz applied to a state at every output of a trajectory.
pub fn ansatz_states(
    trajectory: &CoefficientTrajectory,
    images: &[FockOperator],
    psi: &FockState,
) -> Vec<FockState> {
    (0..trajectory.len())
        .map(|i| {
            let factors: Vec<(C64, &FockOperator)> =
                trajectory.factors(i).into_iter().map(|(elem, f)| (f, &images[elem])).collect();
            ansatz_state(&factors, psi)
        })
        .collect()
}

/// Decoupled states set against brute-force propagation on a common grid.
#[derive(Debug, Clone)]
pub struct OracleComparison {
    pub times: Vec<f64>,
    pub oracle: Vec<FockState>,
    pub ansatz: Vec<FockState>,
    /// `|⟨oracle|ansatz⟩|²` per output.
    pub fidelities: Vec<f64>,
    /// Largest top-two-level population of the oracle states.
    pub leakage: f64,
}

impl OracleComparison {
    pub fn min_fidelity(&self) -> f64 {
        self.fidelities.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Propagates `psi0` under `h` with the oracle and, independently, applies the
/// ordered factors `(basis element, F)` returned by `factors(k)` for output `k`.
pub fn compare_with_oracle<F: Fn(usize) -> Vec<(usize, C64)>>(
    h: &FockHamiltonian,
    images: &[FockOperator],
    factors: F,
    psi0: &FockState,
    grid: &[f64],
    opts: &MidpointOptions,
) -> Result<OracleComparison, FockError> {
    let oracle = propagate_state(|t| h.at(t), psi0, grid, opts)?;
    let ansatz: Vec<FockState> = (0..grid.len())
        .map(|k| {
            let pairs: Vec<(C64, &FockOperator)> = factors(k).into_iter().map(|(e, f)| (f, &images[e])).collect();
            ansatz_state(&pairs, psi0)
        })
        .collect();
    let fidelities = oracle.iter().zip(&ansatz).map(|(o, a)| fidelity(o, a)).collect::<Result<Vec<_>, _>>()?;
    let leakage = oracle.iter().map(FockState::leakage).fold(0.0, f64::max);
    Ok(OracleComparison { times: grid.to_vec(), oracle, ansatz, fidelities, leakage })
}

/// Largest entry of `A − B` on the block of levels `0..keep`.
pub fn low_block_distance(a: &CMatrix, b: &CMatrix, keep: usize) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..keep {
        for j in 0..keep {
            d = d.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    d
}
