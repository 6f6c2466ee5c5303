//! Generic Wei–Norman decoupling for a finite closed algebra.
//!
//! The propagator is written as `U = Π_j exp(−i F_j H_j)` in a chosen factor
//! order. Differentiating and conjugating gives `G(t) = Ξ(F) Ḟ`, where column
//! `j` of `Ξ` holds the coordinates of `H_j` conjugated by all factors to its
//! left. The adjoint matrices turn each conjugation into a small matrix
//! exponential, so `Ξ` is cheap for any algebra we can close.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::algebra::{adjoint_matrices, structure_constants, AlgebraError, LieBasis, StructureConstants};
use crate::linalg::{matrix_exp, CMatrix, CVector};
use crate::ode::{dopri5, OdeError, OdeOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("Ξ(F) is singular at t = {t} (|det| = {det:e}); the factorization breaks down here")]
    XiSingular { t: f64, det: f64 },
    #[error("step size {h:e} fell below 1e-12 of the span at t = {t}")]
    StepUnderflow { t: f64, h: f64 },
    #[error("expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ordering is not a permutation of 0..{0}")]
    BadOrdering(usize),
    #[error("invalid sampled signal: {0}")]
    BadSignal(String),
    #[error("span must be positive and finite, got {0}")]
    BadSpan(f64),
    #[error("output grid must be increasing and lie in [0, T]")]
    BadGrid,
    #[error("tolerances must be positive")]
    BadTolerance,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A scalar time-dependent coefficient.
#[derive(Clone)]
pub enum DrivingSignal {
    Constant(C64),
    /// `amplitude · cos(omega·t + phase)`.
    Sinusoid { amplitude: C64, omega: f64, phase: f64 },
    /// Linear interpolation between samples; held constant outside the grid.
    Sampled { times: Vec<f64>, values: Vec<C64> },
    Custom(Arc<dyn Fn(f64) -> C64 + Send + Sync>),
}

impl fmt::Debug for DrivingSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DrivingSignal::Constant(c) => write!(f, "Constant({c})"),
            DrivingSignal::Sinusoid { amplitude, omega, phase } => {
                write!(f, "Sinusoid({amplitude}·cos({omega}t + {phase}))")
            }
            DrivingSignal::Sampled { times, .. } => write!(f, "Sampled({} points)", times.len()),
            DrivingSignal::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl DrivingSignal {
    pub fn zero() -> Self {
        DrivingSignal::Constant(C64::new(0.0, 0.0))
    }

    pub fn constant(c: impl Into<C64>) -> Self {
        DrivingSignal::Constant(c.into())
    }

    pub fn cosine(amplitude: impl Into<C64>, omega: f64, phase: f64) -> Self {
        DrivingSignal::Sinusoid { amplitude: amplitude.into(), omega, phase }
    }

    pub fn sampled(times: Vec<f64>, values: Vec<C64>) -> Result<Self, EngineError> {
        if times.len() != values.len() {
            return Err(EngineError::BadSignal(format!("{} times but {} values", times.len(), values.len())));
        }
        if times.is_empty() {
            return Err(EngineError::BadSignal("no samples".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(EngineError::BadSignal("sample times must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(EngineError::BadSignal("non-finite sample".into()));
        }
        Ok(DrivingSignal::Sampled { times, values })
    }

    pub fn custom(f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        DrivingSignal::Custom(Arc::new(f))
    }

    pub fn eval(&self, t: f64) -> C64 {
        match self {
            DrivingSignal::Constant(c) => *c,
            DrivingSignal::Sinusoid { amplitude, omega, phase } => amplitude * (omega * t + phase).cos(),
            DrivingSignal::Sampled { times, values } => {
                if t <= times[0] {
                    return values[0];
                }
                let last = times.len() - 1;
                if t >= times[last] {
                    return values[last];
                }
                let i = times.partition_point(|&s| s <= t) - 1;
                let w = (t - times[i]) / (times[i + 1] - times[i]);
                values[i] * (1.0 - w) + values[i + 1] * w
            }
            DrivingSignal::Custom(f) => f(t),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            DrivingSignal::Constant(c) => *c == C64::new(0.0, 0.0),
            DrivingSignal::Sinusoid { amplitude, .. } => *amplitude == C64::new(0.0, 0.0),
            DrivingSignal::Sampled { values, .. } => values.iter().all(|v| *v == C64::new(0.0, 0.0)),
            DrivingSignal::Custom(_) => false,
        }
    }

    /// The same signal multiplied by `c`.
    pub fn scaled(&self, c: C64) -> Self {
        match self {
            DrivingSignal::Constant(v) => DrivingSignal::Constant(v * c),
            DrivingSignal::Sinusoid { amplitude, omega, phase } => {
                DrivingSignal::Sinusoid { amplitude: amplitude * c, omega: *omega, phase: *phase }
            }
            DrivingSignal::Sampled { times, values } => DrivingSignal::Sampled {
                times: times.clone(),
                values: values.iter().map(|v| v * c).collect(),
            },
            DrivingSignal::Custom(f) => {
                let f = Arc::clone(f);
                DrivingSignal::Custom(Arc::new(move |t| f(t) * c))
            }
        }
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> Self {
        match self {
            DrivingSignal::Constant(v) => DrivingSignal::Constant(v.conj()),
            DrivingSignal::Sinusoid { amplitude, omega, phase } => {
                DrivingSignal::Sinusoid { amplitude: amplitude.conj(), omega: *omega, phase: *phase }
            }
            DrivingSignal::Sampled { times, values } => DrivingSignal::Sampled {
                times: times.clone(),
                values: values.iter().map(|v| v.conj()).collect(),
            },
            DrivingSignal::Custom(f) => {
                let f = Arc::clone(f);
                DrivingSignal::Custom(Arc::new(move |t| f(t).conj()))
            }
        }
    }

    /// `∫_0^t s(t') e^{i k t'} dt'` in closed form, when the signal has one.
    pub fn phase_integral(&self, k: f64, t: f64) -> Option<C64> {
        // ∫_0^t e^{i q s} ds
        let unit = |q: f64| {
            if q == 0.0 {
                C64::new(t, 0.0)
            } else {
                (C64::new(0.0, q * t).exp() - 1.0) / C64::new(0.0, q)
            }
        };
        match self {
            DrivingSignal::Constant(c) => Some(c * unit(k)),
            DrivingSignal::Sinusoid { amplitude, omega, phase } => {
                let up = C64::new(0.0, *phase).exp() * unit(k + omega);
                let down = C64::new(0.0, -*phase).exp() * unit(k - omega);
                Some(amplitude * 0.5 * (up + down))
            }
            _ => None,
        }
    }
}

impl From<C64> for DrivingSignal {
    fn from(c: C64) -> Self {
        DrivingSignal::Constant(c)
    }
}

impl From<f64> for DrivingSignal {
    fn from(x: f64) -> Self {
        DrivingSignal::Constant(C64::new(x, 0.0))
    }
}

/// `Ξ(F)`: column `j` is `(Π_{k<j} exp(−i F_k M_{o_k})) e_{o_j}` in basis
/// coordinates, where `o` is the factor ordering and `F_k` belongs to factor `k`.
pub fn xi_matrix(adjoint: &[CMatrix], ordering: &[usize], f: &[C64]) -> Result<CMatrix, EngineError> {
    let n = adjoint.len();
    if f.len() != n {
        return Err(EngineError::DimensionMismatch { expected: n, got: f.len() });
    }
    if ordering.len() != n {
        return Err(EngineError::DimensionMismatch { expected: n, got: ordering.len() });
    }
    let mut xi = CMatrix::zeros(n, n);
    let mut conj = CMatrix::identity(n, n);
    for (slot, &elem) in ordering.iter().enumerate() {
        xi.set_column(slot, &conj.column(elem));
        if slot + 1 < n && f[slot] != C64::new(0.0, 0.0) {
            let step = matrix_exp(&(&adjoint[elem] * C64::new(0.0, -1.0) * f[slot])).map_err(|_| {
                EngineError::XiSingular { t: f64::NAN, det: f64::NAN }
            })?;
            conj = conj * step;
        }
    }
    Ok(xi)
}

/// `|det Ξ|` divided by the product of column norms (Hadamard bound), so that
/// the measure is scale free and lies in `[0, 1]`.
pub fn relative_det(xi: &CMatrix) -> (f64, f64) {
    let det = xi.clone().lu().determinant().norm();
    let bound: f64 = xi.column_iter().map(|c| c.norm()).product();
    let rel = if bound > 0.0 { det / bound } else { 0.0 };
    (det, rel)
}

// Relative determinant below which Ξ counts as singular.
const DET_TOL: f64 = 1e-12;

/// Decoupling problem on a closed algebra with `F(0) = 0`.
#[derive(Debug, Clone)]
pub struct DecouplingProblem {
    basis: LieBasis,
    constants: StructureConstants,
    adjoint: Vec<CMatrix>,
    ordering: Vec<usize>,
    drive: Vec<DrivingSignal>,
    span: f64,
}

impl DecouplingProblem {
    /// Factor order equal to the basis order.
    pub fn new(basis: LieBasis, drive: Vec<DrivingSignal>, span: f64) -> Result<Self, EngineError> {
        let n = basis.dim();
        Self::with_ordering(basis, (0..n).collect(), drive, span)
    }

    /// `ordering[k]` is the basis element carried by the `k`-th factor from the left.
    pub fn with_ordering(
        basis: LieBasis,
        ordering: Vec<usize>,
        drive: Vec<DrivingSignal>,
        span: f64,
    ) -> Result<Self, EngineError> {
        let n = basis.dim();
        if drive.len() != n {
            return Err(EngineError::DimensionMismatch { expected: n, got: drive.len() });
        }
        let mut seen = vec![false; n];
        for &o in &ordering {
            if o >= n || seen[o] {
                return Err(EngineError::BadOrdering(n));
            }
            seen[o] = true;
        }
        if ordering.len() != n {
            return Err(EngineError::BadOrdering(n));
        }
        if !(span > 0.0 && span.is_finite()) {
            return Err(EngineError::BadSpan(span));
        }
        let constants = structure_constants(&basis)?;
        let adjoint = adjoint_matrices(&constants);
        Ok(DecouplingProblem { basis, constants, adjoint, ordering, drive, span })
    }

    pub fn basis(&self) -> &LieBasis {
        &self.basis
    }

    pub fn constants(&self) -> &StructureConstants {
        &self.constants
    }

    pub fn adjoint(&self) -> &[CMatrix] {
        &self.adjoint
    }

    pub fn ordering(&self) -> &[usize] {
        &self.ordering
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn drive(&self) -> &[DrivingSignal] {
        &self.drive
    }

    /// `G(t)` in basis coordinates.
    pub fn g(&self, t: f64) -> CVector {
        CVector::from_iterator(self.dim(), self.drive.iter().map(|s| s.eval(t)))
    }

    pub fn xi(&self, f: &[C64]) -> Result<CMatrix, EngineError> {
        xi_matrix(&self.adjoint, &self.ordering, f)
    }

    /// `Ḟ` from `Ξ(F) Ḟ = G(t)`; `F` and `Ḟ` are indexed by factor slot.
    pub fn rhs(&self, t: f64, f: &[C64]) -> Result<Vec<C64>, EngineError> {
        let xi = self.xi(f).map_err(|e| match e {
            EngineError::XiSingular { .. } => EngineError::XiSingular { t, det: f64::NAN },
            other => other,
        })?;
        let (det, rel) = relative_det(&xi);
        if !(rel >= DET_TOL) {
            return Err(EngineError::XiSingular { t, det });
        }
        let g = self.g(t);
        let x = xi.lu().solve(&g).ok_or(EngineError::XiSingular { t, det })?;
        Ok(x.iter().copied().collect())
    }

    /// Integrates from `F(0) = 0` and reports values on `grid`, which must start
    /// at 0 and end at or before the span.
    pub fn integrate_on(&self, grid: &[f64], rtol: f64, atol: f64) -> Result<CoefficientTrajectory, EngineError> {
        if !(rtol > 0.0 && atol > 0.0) {
            return Err(EngineError::BadTolerance);
        }
        if grid.first() != Some(&0.0)
            || grid.windows(2).any(|w| !(w[1] > w[0]))
            || *grid.last().unwrap() > self.span * (1.0 + 1e-12)
        {
            return Err(EngineError::BadGrid);
        }
        let n = self.dim();
        let mut opts = OdeOptions::new(rtol, atol);
        // step controls are fractions of the integrated span; express them in T
        let integrated = *grid.last().unwrap();
        if integrated > 0.0 {
            let ratio = self.span / integrated;
            opts.initial_step *= ratio;
            opts.max_step *= ratio;
            opts.min_step *= ratio;
        }
        let y0 = vec![C64::new(0.0, 0.0); n];
        let sol = dopri5(
            |t, y, out| {
                let d = self.rhs(t, y)?;
                out.copy_from_slice(&d);
                Ok::<(), EngineError>(())
            },
            &y0,
            grid,
            &opts,
        )
        .map_err(|e| match e {
            OdeError::Rhs { source, .. } => source,
            OdeError::StepUnderflow { t, h } => EngineError::StepUnderflow { t, h },
            OdeError::BadGrid => EngineError::BadGrid,
        })?;
        let mut det_xi = Vec::with_capacity(sol.times.len());
        for y in &sol.states {
            det_xi.push(relative_det(&self.xi(y)?).0);
        }
        Ok(CoefficientTrajectory {
            times: sol.times,
            values: sol.states,
            det_xi,
            ordering: self.ordering.clone(),
            accepted: sol.accepted,
            rejected: sol.rejected,
        })
    }

    /// Integrates over the full span with `points` evenly spaced outputs.
    pub fn integrate(&self, points: usize, rtol: f64, atol: f64) -> Result<CoefficientTrajectory, EngineError> {
        let points = points.max(2);
        let grid: Vec<f64> = (0..points).map(|i| self.span * i as f64 / (points - 1) as f64).collect();
        self.integrate_on(&grid, rtol, atol)
    }
}

/// Convenience wrapper: integrate `problem` on `points` evenly spaced outputs.
pub fn integrate(problem: &DecouplingProblem, points: usize, rtol: f64, atol: f64) -> Result<CoefficientTrajectory, EngineError> {
    problem.integrate(points, rtol, atol)
}

/// Decoupling functions sampled on an output grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTrajectory {
    pub times: Vec<f64>,
    /// `values[i][k]` is `F` of factor slot `k` at `times[i]`.
    pub values: Vec<Vec<C64>>,
    pub det_xi: Vec<f64>,
    /// Basis element carried by each factor slot.
    pub ordering: Vec<usize>,
    pub accepted: usize,
    pub rejected: usize,
}

impl CoefficientTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &[C64] {
        self.values.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Time series of one factor slot.
    pub fn component(&self, slot: usize) -> Vec<C64> {
        self.values.iter().map(|v| v[slot]).collect()
    }

    /// `F` of the factor carrying basis element `elem`.
    pub fn for_element(&self, i: usize, elem: usize) -> C64 {
        let slot = self.ordering.iter().position(|&o| o == elem).expect("element not in ordering");
        self.values[i][slot]
    }

    /// `(basis element, F)` pairs at output `i`, in factor order.
    pub fn factors(&self, i: usize) -> Vec<(usize, C64)> {
        self.ordering.iter().copied().zip(self.values[i].iter().copied()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_polynomial;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn linear_basis() -> LieBasis {
        LieBasis::new(["ad*a", "ad", "a", "I"].iter().map(|s| parse_polynomial(s).unwrap()).collect()).unwrap()
    }

    fn su11_basis() -> LieBasis {
        LieBasis::new(["0.5*ad^2", "0.5*ad*a + 0.25*I", "0.5*a^2"].iter().map(|s| parse_polynomial(s).unwrap()).collect())
            .unwrap()
    }

    #[test]
    fn xi_is_identity_at_zero() {
        for basis in [linear_basis(), su11_basis()] {
            let n = basis.dim();
            let sc = structure_constants(&basis).unwrap();
            let xi = xi_matrix(&adjoint_matrices(&sc), &(0..n).collect::<Vec<_>>(), &vec![c(0.0, 0.0); n]).unwrap();
            assert_eq!(xi, CMatrix::identity(n, n));
        }
    }

    #[test]
    fn abelian_xi_is_identity() {
        let basis = LieBasis::new(vec![parse_polynomial("I").unwrap(), parse_polynomial("ad*a").unwrap()]).unwrap();
        let sc = structure_constants(&basis).unwrap();
        let xi = xi_matrix(&adjoint_matrices(&sc), &[0, 1], &[c(0.3, 1.0), c(-2.0, 0.5)]).unwrap();
        assert_eq!(xi, CMatrix::identity(2, 2));
    }

    #[test]
    fn linear_xi_column_of_a() {
        let basis = linear_basis();
        let sc = structure_constants(&basis).unwrap();
        let (f0, fp) = (c(0.4, 0.0), c(0.1, -0.3));
        let xi = xi_matrix(&adjoint_matrices(&sc), &[0, 1, 2, 3], &[f0, fp, c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let col = xi.column(2);
        assert!((col[2] - (c(0.0, 1.0) * f0).exp()).norm() < 1e-15);
        assert!((col[3] - c(0.0, 1.0) * fp).norm() < 1e-15);
        assert!(col[0].norm() + col[1].norm() < 1e-15);
    }

    #[test]
    fn linear_rhs_matches_hand_derivation() {
        let gp = c(0.3, 0.1);
        let gm = c(-0.2, 0.4);
        let drive = vec![1.0.into(), gp.into(), gm.into(), DrivingSignal::zero()];
        let p = DecouplingProblem::new(linear_basis(), drive, 1.0).unwrap();
        let f = [c(0.7, 0.0), c(0.1, 0.2), c(-0.3, 0.05), c(0.0, 0.0)];
        let d = p.rhs(0.0, &f).unwrap();
        assert!((d[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((d[1] - gp * (c(0.0, 1.0) * f[0]).exp()).norm() < 1e-14);
        assert!((d[2] - gm * (c(0.0, -1.0) * f[0]).exp()).norm() < 1e-14);
        // central phase: G_I = Ḟ_I + i F₊ Ḟ₋ = 0
        assert!((d[3] + c(0.0, 1.0) * f[1] * d[2]).norm() < 1e-14);
    }

    #[test]
    fn rhs_at_origin_is_drive() {
        let drive = vec![c(0.2, 0.0).into(), c(1.0, 0.0).into(), c(0.0, -0.3).into()];
        let p = DecouplingProblem::new(su11_basis(), drive, 1.0).unwrap();
        let d = p.rhs(0.0, &[c(0.0, 0.0); 3]).unwrap();
        assert_eq!(d, vec![c(0.2, 0.0), c(1.0, 0.0), c(0.0, -0.3)]);
    }

    #[test]
    fn free_term_only() {
        let drive = vec![1.0.into(), DrivingSignal::zero(), DrivingSignal::zero(), DrivingSignal::zero()];
        let p = DecouplingProblem::new(linear_basis(), drive, 3.0).unwrap();
        let tr = p.integrate(31, 1e-12, 1e-12).unwrap();
        for (t, v) in tr.times.iter().zip(&tr.values) {
            assert!((v[0] - c(*t, 0.0)).norm() < 1e-12);
            assert!(v[1].norm() + v[2].norm() + v[3].norm() == 0.0);
        }
    }

    #[test]
    fn constant_linear_drive_closed_form() {
        let g0 = 0.5;
        let drive = vec![1.0.into(), g0.into(), g0.into(), DrivingSignal::zero()];
        let span = 4.0 * std::f64::consts::PI;
        let p = DecouplingProblem::new(linear_basis(), drive, span).unwrap();
        let tr = p.integrate(201, 1e-12, 1e-13).unwrap();
        for (t, v) in tr.times.iter().zip(&tr.values) {
            let exact = c(t.sin(), 1.0 - t.cos()) * g0;
            assert!((v[1] - exact).norm() < 1e-8, "t={t}");
            assert!((v[2] - v[1].conj()).norm() < 1e-9);
        }
        assert!(tr.det_xi.iter().all(|d| (d - 1.0).abs() < 1e-12));
    }

    #[test]
    fn resonant_drive_endpoint() {
        let g0 = 0.2;
        let s = DrivingSignal::cosine(g0, 1.0, 0.0);
        let p = DecouplingProblem::new(linear_basis(), vec![1.0.into(), s.clone(), s, DrivingSignal::zero()], std::f64::consts::PI)
            .unwrap();
        let tr = p.integrate(2, 1e-12, 1e-13).unwrap();
        assert!((tr.last()[2] - c(g0 * std::f64::consts::PI / 2.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn ordering_permutes_slots() {
        let drive = vec![1.0.into(), 0.3.into(), 0.3.into(), DrivingSignal::zero()];
        let p = DecouplingProblem::with_ordering(linear_basis(), vec![1, 2, 0, 3], drive, 1.0).unwrap();
        let tr = p.integrate(3, 1e-10, 1e-12).unwrap();
        assert_eq!(tr.ordering, vec![1, 2, 0, 3]);
        assert!((tr.for_element(2, 0) - c(1.0, 0.0)).norm() < 1e-10);
        assert!(DecouplingProblem::with_ordering(linear_basis(), vec![0, 0, 1, 2], vec![DrivingSignal::zero(); 4], 1.0).is_err());
    }

    #[test]
    fn sampled_signal_interpolates() {
        let s = DrivingSignal::sampled(vec![0.0, 1.0, 3.0], vec![c(0.0, 0.0), c(2.0, 0.0), c(2.0, 4.0)]).unwrap();
        assert_eq!(s.eval(0.5), c(1.0, 0.0));
        assert_eq!(s.eval(2.0), c(2.0, 2.0));
        assert_eq!(s.eval(9.0), c(2.0, 4.0));
        assert!(DrivingSignal::sampled(vec![0.0, 0.0], vec![c(0.0, 0.0); 2]).is_err());
    }

    #[test]
    fn phase_integrals_match_quadrature() {
        let sigs = [DrivingSignal::constant(c(0.3, -0.1)), DrivingSignal::cosine(c(0.2, 0.1), 1.0, 0.4), DrivingSignal::cosine(0.5, 2.5, -1.0)];
        for s in &sigs {
            for k in [-1.0, 0.0, 1.0] {
                let exact = s.phase_integral(k, 2.7).unwrap();
                let num = crate::quad::integrate(|t| s.eval(t) * C64::new(0.0, k * t).exp(), 0.0, 2.7, 1e-13).unwrap();
                assert!((exact - num).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(
            DecouplingProblem::new(linear_basis(), vec![DrivingSignal::zero(); 3], 1.0),
            Err(EngineError::DimensionMismatch { expected: 4, got: 3 })
        ));
        assert!(matches!(
            DecouplingProblem::new(linear_basis(), vec![DrivingSignal::zero(); 4], -1.0),
            Err(EngineError::BadSpan(_))
        ));
        let p = DecouplingProblem::new(linear_basis(), vec![DrivingSignal::zero(); 4], 1.0).unwrap();
        assert_eq!(p.integrate_on(&[0.0, 2.0], 1e-8, 1e-8), Err(EngineError::BadGrid));
        assert_eq!(p.integrate_on(&[0.0, 1.0], 0.0, 1e-8), Err(EngineError::BadTolerance));
    }

    #[test]
    fn singular_xi_reported() {
        // H = K₊ − K₋ gives ξ₊ = tan t, which leaves the chart at t = π/2.
        let drive = vec![DrivingSignal::constant(1.0), DrivingSignal::zero(), DrivingSignal::constant(-1.0)];
        let p = DecouplingProblem::new(su11_basis(), drive, 2.0).unwrap();
        let r = p.integrate(11, 1e-10, 1e-12);
        assert!(matches!(r, Err(EngineError::XiSingular { .. }) | Err(EngineError::StepUnderflow { .. })), "{r:?}");
    }
}
