//! Linear, quadratic and combined Gaussian drives of a single oscillator
//! (`ω = 1`):
//!
//! * linear: `H = a†a + g₊(t) a† + g₋(t) a`
//! * quadratic: `H = a†a + λ₊(t) a†² + λ₋(t) a²`
//! * combined: the sum of both.
//!
//! The generic engine is the reference for every coefficient; the closed forms
//! here are accelerators and cross-checks.
//!
//! With `K₊ = a†²/2`, `K₀ = (2a†a + 1)/4`, `K₋ = a²/2` the quadratic Hamiltonian
//! is `2λ₊K₊ + 2K₀ + 2λ₋K₋ − ½`, so its K-basis coordinates are `(2λ₊, 2, 2λ₋)`.
//! The constant-coefficient closed forms are stated for `λ₊K₊ + K₀ + λ₋K₋`; at
//! physical time `t` they are evaluated at `2t` (the `−½` only adds a phase).

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::algebra::{parse_polynomial, LadderPolynomial, LieBasis};
use crate::engine::{CoefficientTrajectory, DecouplingProblem, DrivingSignal, EngineError};
use crate::ode::{dopri5, OdeError, OdeOptions};
use crate::quad::{self, QuadError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaussianError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("output grid must start at 0 and increase")]
    BadGrid,
}

const QUAD_TOL: f64 = 1e-10;

fn i() -> C64 {
    C64::new(0.0, 1.0)
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn check_grid(grid: &[f64]) -> Result<(), GaussianError> {
    if grid.first() != Some(&0.0) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(GaussianError::BadGrid);
    }
    Ok(())
}

fn basis_of(elements: &[&str]) -> LieBasis {
    LieBasis::new(elements.iter().map(|s| parse_polynomial(s).expect("literal")).collect()).expect("independent")
}

pub fn k_plus() -> LadderPolynomial {
    parse_polynomial("0.5*ad^2").expect("literal")
}

pub fn k_zero() -> LadderPolynomial {
    parse_polynomial("0.5*ad*a + 0.25*I").expect("literal")
}

pub fn k_minus() -> LadderPolynomial {
    parse_polynomial("0.5*a^2").expect("literal")
}

/// `(a†a, a†, a, 𝟙)`.
pub fn linear_basis() -> LieBasis {
    basis_of(&["ad*a", "ad", "a", "I"])
}

/// `(K₊, K₀, K₋)`.
pub fn su11_basis() -> LieBasis {
    LieBasis::new(vec![k_plus(), k_zero(), k_minus()]).expect("independent")
}

/// `(K₊, K₀, K₋, a†, a, 𝟙)`.
pub fn combined_basis() -> LieBasis {
    let mut e = vec![k_plus(), k_zero(), k_minus()];
    e.extend(["ad", "a", "I"].iter().map(|s| parse_polynomial(s).expect("literal")));
    LieBasis::new(e).expect("independent")
}

// ---------------------------------------------------------------------------
// linear drive

/// `U = e^{−iF₀a†a} e^{−iF₊a†} e^{−iF₋a} e^{−iF_I}` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCoefficients {
    pub times: Vec<f64>,
    pub f_plus: Vec<C64>,
    pub f_minus: Vec<C64>,
    /// Coefficient of the identity; its imaginary part normalizes the ansatz.
    pub f_central: Vec<C64>,
}

impl LinearCoefficients {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn f0(&self, k: usize) -> f64 {
        self.times[k]
    }

    /// Factors in [`linear_basis`] order.
    pub fn factors(&self, k: usize) -> Vec<(usize, C64)> {
        vec![
            (0, C64::new(self.times[k], 0.0)),
            (1, self.f_plus[k]),
            (2, self.f_minus[k]),
            (3, self.f_central[k]),
        ]
    }

    pub fn quadratures(&self, alpha: C64) -> Vec<(C64, C64)> {
        (0..self.len())
            .map(|k| quadrature_expectation(alpha, self.times[k], self.f_plus[k], self.f_minus[k]))
            .collect()
    }
}

/// `∫_0^t s(t') e^{ikt'} dt'`, exact for constant and sinusoidal signals.
fn phase_integral(s: &DrivingSignal, k: f64, t: f64) -> Result<C64, QuadError> {
    match s.phase_integral(k, t) {
        Some(v) => Ok(v),
        None => quad::integrate(|u| s.eval(u) * C64::new(0.0, k * u).exp(), 0.0, t, QUAD_TOL),
    }
}

/// `F₊ = ∫ g₊ e^{it'}`, `F₋ = ∫ g₋ e^{−it'}`, `F_I = −i ∫ F₊ Ḟ₋`, with `F₀ = t`.
pub fn linear_coefficients(
    g_plus: &DrivingSignal,
    g_minus: &DrivingSignal,
    grid: &[f64],
) -> Result<LinearCoefficients, GaussianError> {
    check_grid(grid)?;
    let f_plus = grid.iter().map(|&t| phase_integral(g_plus, 1.0, t)).collect::<Result<Vec<_>, _>>()?;
    let f_minus = grid.iter().map(|&t| phase_integral(g_minus, -1.0, t)).collect::<Result<Vec<_>, _>>()?;
    let f_central = if g_plus.is_zero() || g_minus.is_zero() {
        vec![zero(); grid.len()]
    } else {
        let integrand = |u: f64| {
            let fp = phase_integral(g_plus, 1.0, u).unwrap_or(C64::new(f64::NAN, 0.0));
            -i() * fp * g_minus.eval(u) * C64::new(0.0, -u).exp()
        };
        quad::cumulative(integrand, grid, QUAD_TOL)?
    };
    Ok(LinearCoefficients { times: grid.to_vec(), f_plus, f_minus, f_central })
}

/// Closed form for `g± ≡ g₀`: `F₊ = g₀(i − i cos t + sin t)`, `F₋ = g₀(−i + i cos t + sin t)`.
pub fn linear_constant(g0: f64, t: f64) -> (C64, C64) {
    let (s, c) = t.sin_cos();
    (C64::new(g0 * s, g0 * (1.0 - c)), C64::new(g0 * s, g0 * (c - 1.0)))
}

/// Closed form for `g± = g₀ cos(t + φ)`.
///
/// `F₋` carries `e^{iφ}` on its secular term; this only matters for `φ ≠ 0`.
pub fn linear_resonant(g0: f64, phi: f64, t: f64) -> (C64, C64) {
    let e = |x: f64| C64::new(0.0, x).exp();
    let fp = 0.5 * g0 * (t * e(-phi) + e(phi) * e(t) * t.sin());
    let fm = 0.25 * g0 * (i() * e(-(2.0 * t + phi)) - i() * e(-phi) + 2.0 * t * e(phi));
    (fp, fm)
}

/// `(⟨X⟩, ⟨P⟩)` for an initial coherent state `|α⟩` under the linear ansatz.
///
/// Real for Hermitian drives (`g₋ = g₊*`); complex output otherwise.
pub fn quadrature_expectation(alpha: C64, f0: f64, f_plus: C64, f_minus: C64) -> (C64, C64) {
    let up = C64::new(0.0, f0).exp() * (alpha.conj() + i() * f_minus);
    let down = C64::new(0.0, -f0).exp() * (alpha - i() * f_plus);
    let x = (up + down) * FRAC_1_SQRT_2;
    let p = i() * (up - down) * FRAC_1_SQRT_2;
    if x.im.abs() > 1e-10 || p.im.abs() > 1e-10 {
        log::warn!("quadrature expectations are complex; the drive is not Hermitian");
    }
    (x, p)
}

/// Linear drive as an engine problem on [`linear_basis`].
pub fn linear_problem(g_plus: DrivingSignal, g_minus: DrivingSignal, span: f64) -> Result<DecouplingProblem, EngineError> {
    DecouplingProblem::new(linear_basis(), vec![DrivingSignal::constant(1.0), g_plus, g_minus, DrivingSignal::zero()], span)
}

// ---------------------------------------------------------------------------
// quadratic drive

/// `U = e^{−iξ₊K₊} e^{−iξ₀K₀} e^{−iξ₋K₋}` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticCoefficients {
    pub times: Vec<f64>,
    /// `[ξ₊, ξ₀, ξ₋]` per output.
    pub xi: Vec<[C64; 3]>,
    /// Relative `det Ξ` per output; empty for closed forms.
    pub det_xi: Vec<f64>,
}

impl QuadraticCoefficients {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn xi_plus(&self) -> Vec<C64> {
        self.xi.iter().map(|x| x[0]).collect()
    }

    pub fn xi_zero(&self) -> Vec<C64> {
        self.xi.iter().map(|x| x[1]).collect()
    }

    pub fn xi_minus(&self) -> Vec<C64> {
        self.xi.iter().map(|x| x[2]).collect()
    }

    /// Factors in [`su11_basis`] order.
    pub fn factors(&self, k: usize) -> Vec<(usize, C64)> {
        self.xi[k].iter().copied().enumerate().collect()
    }

    /// Reads `[ξ₊, ξ₀, ξ₋]` out of an engine trajectory on [`su11_basis`].
    pub fn from_trajectory(traj: CoefficientTrajectory) -> Self {
        let xi = (0..traj.len())
            .map(|k| [traj.for_element(k, 0), traj.for_element(k, 1), traj.for_element(k, 2)])
            .collect();
        QuadraticCoefficients { times: traj.times, xi, det_xi: traj.det_xi }
    }
}

/// Quadratic drive as an engine problem on [`su11_basis`] with coordinates
/// `(2λ₊, 2, 2λ₋)`.
pub fn quadratic_problem(
    lambda_plus: &DrivingSignal,
    lambda_minus: &DrivingSignal,
    span: f64,
) -> Result<DecouplingProblem, EngineError> {
    let two = C64::new(2.0, 0.0);
    DecouplingProblem::new(
        su11_basis(),
        vec![lambda_plus.scaled(two), DrivingSignal::constant(2.0), lambda_minus.scaled(two)],
        span,
    )
}

/// Engine-generated `ξ` on a grid starting at 0.
pub fn quadratic_coefficients(
    lambda_plus: &DrivingSignal,
    lambda_minus: &DrivingSignal,
    grid: &[f64],
    rtol: f64,
) -> Result<QuadraticCoefficients, GaussianError> {
    check_grid(grid)?;
    let span = grid.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let problem = quadratic_problem(lambda_plus, lambda_minus, span)?;
    let traj = problem.integrate_on(grid, rtol, rtol * 1e-2)?;
    Ok(QuadraticCoefficients::from_trajectory(traj))
}

/// Constant-coefficient closed form together with `Γ² = λ₊λ₋ − ¼`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticConstant {
    pub xi_plus: C64,
    pub xi_zero: C64,
    pub xi_minus: C64,
    /// Principal square root of `Γ²`.
    pub gamma: C64,
}

fn cosh_sinhc(x2: C64) -> (C64, C64) {
    // cosh x and sinh x / x as functions of x², so the branch of x never matters
    if x2.norm() < 1e-8 {
        return (1.0 + x2 / 2.0 + x2 * x2 / 24.0, 1.0 + x2 / 6.0 + x2 * x2 / 120.0);
    }
    let x = x2.sqrt();
    (x.cosh(), x.sinh() / x)
}

fn denominator(lambda_plus: C64, lambda_minus: C64, t: f64) -> (C64, C64, C64) {
    let gamma2 = lambda_plus * lambda_minus - 0.25;
    let (ch, shc) = cosh_sinhc(gamma2 * t * t);
    // cosh(tΓ) + (i/2Γ) sinh(tΓ) = cosh(tΓ) + (it/2) sinhc(tΓ)
    let d = ch + i() * 0.5 * t * shc;
    (d, t * shc, gamma2)
}

/// `exp(−it(λ₊K₊ + K₀ + λ₋K₋)) = e^{−iξ₊K₊} e^{−iξ₀K₀} e^{−iξ₋K₋}` with
/// `ξ± = (λ±/Γ) sinh(tΓ) / [cosh(tΓ) + (i/2Γ) sinh(tΓ)]` and
/// `ξ₀ = −2i ln[cosh(tΓ) + (i/2Γ) sinh(tΓ)]` (principal logarithm).
pub fn quadratic_constant(lambda_plus: C64, lambda_minus: C64, t: f64) -> QuadraticConstant {
    let (d, sinh_over_gamma, gamma2) = denominator(lambda_plus, lambda_minus, t);
    QuadraticConstant {
        xi_plus: lambda_plus * sinh_over_gamma / d,
        xi_zero: -2.0 * i() * d.ln(),
        xi_minus: lambda_minus * sinh_over_gamma / d,
        gamma: gamma2.sqrt(),
    }
}

/// Closed form for `a†a + λ₊a†² + λ₋a²` at physical time `t`.
pub fn quadratic_constant_physical(lambda_plus: C64, lambda_minus: C64, t: f64) -> QuadraticConstant {
    quadratic_constant(lambda_plus, lambda_minus, 2.0 * t)
}

/// Physical closed form on a grid, with `ξ₀` continued along `t` instead of
/// taking the principal logarithm at each point.
pub fn quadratic_constant_trajectory(lambda_plus: C64, lambda_minus: C64, grid: &[f64]) -> QuadraticCoefficients {
    let mut xi = Vec::with_capacity(grid.len());
    let mut previous_arg: Option<f64> = None;
    let mut winding = 0.0;
    for &t in grid {
        let q = quadratic_constant_physical(lambda_plus, lambda_minus, t);
        let (d, _, _) = denominator(lambda_plus, lambda_minus, 2.0 * t);
        let arg = d.arg();
        if let Some(prev) = previous_arg {
            let jump = arg - prev;
            if jump > std::f64::consts::PI {
                winding -= 2.0 * std::f64::consts::PI;
            } else if jump < -std::f64::consts::PI {
                winding += 2.0 * std::f64::consts::PI;
            }
        }
        previous_arg = Some(arg);
        let log = C64::new(d.norm().ln(), arg + winding);
        xi.push([q.xi_plus, -2.0 * i() * log, q.xi_minus]);
    }
    QuadraticCoefficients { times: grid.to_vec(), xi, det_xi: Vec::new() }
}

/// Two hand-written forms of the `ξ` equations for the quadratic Hamiltonian
/// (`ω = 1`) that disagree with the engine-generated system. Neither is used
/// for solving; they are kept as regression material.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrintedVariant {
    /// `ξ̇₊ = λ₊ + ξ₊ + λ₋ξ₊²`, `ξ̇₀ = 1 + 2λ₋ξ₊`, `ξ̇₋ = λ₋ e^{iξ₀}`.
    MissingI,
    /// `ξ̇₊ = λ₊ − iξ₊ − λ₋ξ₊²`, `ξ̇₀ = 2iλ₋ξ₊ − 1`, `ξ̇₋ = λ₋ e^{−iξ₀}`.
    FlippedXi0,
}

pub fn printed_rhs(variant: PrintedVariant, lambda_plus: C64, lambda_minus: C64, xi: &[C64; 3]) -> [C64; 3] {
    let [xp, x0, _] = *xi;
    match variant {
        PrintedVariant::MissingI => [
            lambda_plus + xp + lambda_minus * xp * xp,
            1.0 + 2.0 * lambda_minus * xp,
            lambda_minus * (i() * x0).exp(),
        ],
        PrintedVariant::FlippedXi0 => [
            lambda_plus - i() * xp - lambda_minus * xp * xp,
            2.0 * i() * lambda_minus * xp - 1.0,
            lambda_minus * (-i() * x0).exp(),
        ],
    }
}

/// Engine right-hand side for the quadratic problem at `(t, ξ)`.
pub fn engine_rhs(
    lambda_plus: &DrivingSignal,
    lambda_minus: &DrivingSignal,
    t: f64,
    xi: &[C64; 3],
) -> Result<[C64; 3], EngineError> {
    let problem = quadratic_problem(lambda_plus, lambda_minus, t.max(1.0))?;
    let d = problem.rhs(t, xi)?;
    Ok([d[0], d[1], d[2]])
}

/// Integrates one of the hand-written variants; used only to show it disagrees with the oracle.
pub fn integrate_printed(
    variant: PrintedVariant,
    lambda_plus: &DrivingSignal,
    lambda_minus: &DrivingSignal,
    grid: &[f64],
    rtol: f64,
) -> Result<QuadraticCoefficients, GaussianError> {
    check_grid(grid)?;
    let sol = dopri5(
        |t, y, out| {
            let d = printed_rhs(variant, lambda_plus.eval(t), lambda_minus.eval(t), &[y[0], y[1], y[2]]);
            out.copy_from_slice(&d);
            Ok::<(), EngineError>(())
        },
        &[zero(); 3],
        grid,
        &OdeOptions::new(rtol, rtol * 1e-2),
    )
    .map_err(ode_error)?;
    Ok(QuadraticCoefficients {
        times: sol.times,
        xi: sol.states.iter().map(|y| [y[0], y[1], y[2]]).collect(),
        det_xi: Vec::new(),
    })
}

fn ode_error(e: OdeError<EngineError>) -> GaussianError {
    match e {
        OdeError::Rhs { source, .. } => source.into(),
        OdeError::StepUnderflow { t, h } => EngineError::StepUnderflow { t, h }.into(),
        OdeError::BadGrid => GaussianError::BadGrid,
    }
}

// ---------------------------------------------------------------------------
// combined drive

/// `U = e^{−iξ₊K₊} e^{−iξ₀K₀} e^{−iξ₋K₋} e^{−iF₊a†} e^{−iF₋a} e^{−iF_I}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianCoefficients {
    pub quadratic: QuadraticCoefficients,
    pub f_plus: Vec<C64>,
    pub f_minus: Vec<C64>,
    /// Identity coefficient, including the `−½` zero-point shift of `a†a`.
    pub f_central: Vec<C64>,
    /// Coefficient of `a†` in `U_Q⁻¹ H_L U_Q`.
    pub mu: Vec<C64>,
    /// Coefficient of `a` in `U_Q⁻¹ H_L U_Q`.
    pub nu: Vec<C64>,
}

impl GaussianCoefficients {
    pub fn len(&self) -> usize {
        self.quadratic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quadratic.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.quadratic.times
    }

    /// Factors in [`combined_basis`] order.
    pub fn factors(&self, k: usize) -> Vec<(usize, C64)> {
        let [xp, x0, xm] = self.quadratic.xi[k];
        vec![(0, xp), (1, x0), (2, xm), (3, self.f_plus[k]), (4, self.f_minus[k]), (5, self.f_central[k])]
    }
}

/// `(μ, ν)` from the quadratic coefficients and the linear drive.
pub fn mu_nu(g_plus: C64, g_minus: C64, xi: &[C64; 3]) -> (C64, C64) {
    let [xp, x0, xm] = *xi;
    let half = (0.5 * i() * x0).exp();
    let mu = g_plus * half - i() * g_minus * xp * half;
    let nu = i() * g_plus * xm * half + g_minus * ((-0.5 * i() * x0).exp() + xp * xm * half);
    (mu, nu)
}

/// Quadratic subproblem from the engine, then the rotating-frame linear
/// problem `Ḟ₊ = μ`, `Ḟ₋ = ν`, `Ḟ_I = −½ − iF₊ν`, integrated together.
pub fn gaussian_combined(
    g_plus: &DrivingSignal,
    g_minus: &DrivingSignal,
    lambda_plus: &DrivingSignal,
    lambda_minus: &DrivingSignal,
    grid: &[f64],
    rtol: f64,
) -> Result<GaussianCoefficients, GaussianError> {
    check_grid(grid)?;
    let span = grid.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let quadratic = quadratic_problem(lambda_plus, lambda_minus, span)?;
    let mut opts = OdeOptions::new(rtol, rtol * 1e-2);
    if grid.len() < 2 {
        opts.max_step = 1.0;
    }
    let sol = dopri5(
        |t, y, out| {
            let xi = [y[0], y[1], y[2]];
            let d = quadratic.rhs(t, &xi)?;
            let (mu, nu) = mu_nu(g_plus.eval(t), g_minus.eval(t), &xi);
            out[..3].copy_from_slice(&d);
            out[3] = mu;
            out[4] = nu;
            out[5] = -0.5 - i() * y[3] * nu;
            Ok::<(), EngineError>(())
        },
        &[zero(); 6],
        grid,
        &opts,
    )
    .map_err(ode_error)?;
    let mut det_xi = Vec::with_capacity(grid.len());
    let mut mu = Vec::with_capacity(grid.len());
    let mut nu = Vec::with_capacity(grid.len());
    for (t, y) in sol.times.iter().zip(&sol.states) {
        let xi = [y[0], y[1], y[2]];
        det_xi.push(crate::engine::relative_det(&quadratic.xi(&xi)?).0);
        let (m, n) = mu_nu(g_plus.eval(*t), g_minus.eval(*t), &xi);
        mu.push(m);
        nu.push(n);
    }
    Ok(GaussianCoefficients {
        quadratic: QuadraticCoefficients {
            times: sol.times.clone(),
            xi: sol.states.iter().map(|y| [y[0], y[1], y[2]]).collect(),
            det_xi,
        },
        f_plus: sol.states.iter().map(|y| y[3]).collect(),
        f_minus: sol.states.iter().map(|y| y[4]).collect(),
        f_central: sol.states.iter().map(|y| y[5]).collect(),
        mu,
        nu,
    })
}

/// Combined drive as a single six-element engine problem on [`combined_basis`].
pub fn combined_problem(
    g_plus: &DrivingSignal,
    g_minus: &DrivingSignal,
    lambda_plus: &DrivingSignal,
    lambda_minus: &DrivingSignal,
    span: f64,
) -> Result<DecouplingProblem, EngineError> {
    let two = C64::new(2.0, 0.0);
    DecouplingProblem::new(
        combined_basis(),
        vec![
            lambda_plus.scaled(two),
            DrivingSignal::constant(2.0),
            lambda_minus.scaled(two),
            g_plus.clone(),
            g_minus.clone(),
            DrivingSignal::constant(-0.5),
        ],
        span,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn grid(span: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| span * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn constant_linear_reference_values() {
        let g0 = 0.3;
        let (fp, _) = linear_constant(g0, std::f64::consts::PI);
        assert!((fp - c(0.0, 2.0 * g0)).norm() < 1e-15);
        let (fp, fm) = linear_constant(g0, 2.0 * std::f64::consts::PI);
        assert!(fp.norm() < 1e-15 && fm.norm() < 1e-15);
    }

    #[test]
    fn resonant_linear_reference_values() {
        let g0 = 0.2;
        let (fp, fm) = linear_resonant(g0, 0.0, std::f64::consts::PI);
        assert!((fp - c(g0 * std::f64::consts::PI / 2.0, 0.0)).norm() < 1e-15);
        assert!((fm - c(g0 * std::f64::consts::PI / 2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn linear_coefficients_match_closed_forms_and_quadrature() {
        let g = grid(7.0, 15);
        let lc = linear_coefficients(&0.5.into(), &0.5.into(), &g).unwrap();
        for (k, &t) in g.iter().enumerate() {
            let (fp, fm) = linear_constant(0.5, t);
            assert!((lc.f_plus[k] - fp).norm() < 1e-13);
            assert!((lc.f_minus[k] - fm).norm() < 1e-13);
            assert!((lc.f_minus[k] - lc.f_plus[k].conj()).norm() < 1e-14);
        }
        for phi in [0.0, 0.4] {
            let s = DrivingSignal::cosine(0.2, 1.0, phi);
            let custom = DrivingSignal::custom(move |t| C64::new(0.2 * (t + phi).cos(), 0.0));
            let exact = linear_coefficients(&s, &s, &g).unwrap();
            let numeric = linear_coefficients(&custom, &custom, &g).unwrap();
            for (k, &t) in g.iter().enumerate() {
                let (fp, fm) = linear_resonant(0.2, phi, t);
                assert!((exact.f_plus[k] - fp).norm() < 1e-13);
                assert!((exact.f_minus[k] - fm).norm() < 1e-13, "phi {phi} t {t}");
                assert!((numeric.f_plus[k] - fp).norm() < 1e-10);
                assert!((numeric.f_central[k] - exact.f_central[k]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn linear_central_matches_engine() {
        let g = grid(5.0, 11);
        let s = DrivingSignal::cosine(c(0.3, 0.1), 1.3, 0.2);
        let lc = linear_coefficients(&s, &s.conj(), &g).unwrap();
        let traj = linear_problem(s.clone(), s.conj(), 5.0).unwrap().integrate_on(&g, 1e-12, 1e-14).unwrap();
        for k in 0..g.len() {
            for (elem, f) in lc.factors(k) {
                assert!((traj.for_element(k, elem) - f).norm() < 1e-8, "elem {elem} t {}", g[k]);
            }
        }
    }

    #[test]
    fn free_quadratures_rotate() {
        for t in [0.0, 0.7, 2.0] {
            let (x, p) = quadrature_expectation(c(1.0, 0.0), t, c(0.0, 0.0), c(0.0, 0.0));
            assert!((x - c(2f64.sqrt() * t.cos(), 0.0)).norm() < 1e-15);
            assert!((p - c(-(2f64.sqrt()) * t.sin(), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn constant_drive_orbit_closes() {
        let (fp, fm) = linear_constant(0.5, 2.0 * std::f64::consts::PI);
        let (x, p) = quadrature_expectation(c(0.0, 0.0), 2.0 * std::f64::consts::PI, fp, fm);
        assert!(x.norm() < 1e-14 && p.norm() < 1e-14);
    }

    #[test]
    fn su11_engine_matches_hand_derivation() {
        // physical-time equations from the congruence relations of K₀, K±
        let (lp, lm) = (c(0.2, 0.1), c(0.3, -0.2));
        let xi = [c(0.1, 0.2), c(0.4, -0.1), c(-0.3, 0.05)];
        let d = engine_rhs(&lp.into(), &lm.into(), 0.5, &xi).unwrap();
        let [xp, x0, _] = xi;
        let expected = [
            2.0 * lp - 2.0 * i() * xp - 2.0 * lm * xp * xp,
            2.0 - 4.0 * i() * lm * xp,
            2.0 * lm * (-i() * x0).exp(),
        ];
        for k in 0..3 {
            assert!((d[k] - expected[k]).norm() < 1e-13, "component {k}");
        }
    }

    #[test]
    fn printed_variants_differ_from_engine() {
        let (lp, lm) = (c(0.2, 0.0), c(0.2, 0.0));
        let xi = [c(0.1, 0.2), c(0.4, -0.1), c(-0.3, 0.05)];
        let d = engine_rhs(&lp.into(), &lm.into(), 1.0, &xi).unwrap();
        for v in [PrintedVariant::MissingI, PrintedVariant::FlippedXi0] {
            let p = printed_rhs(v, lp, lm, &xi);
            assert!((0..3).any(|k| (p[k] - d[k]).norm() > 1e-3));
        }
    }

    #[test]
    fn closed_form_matches_engine() {
        let g = grid(2.0, 21);
        let lam = c(0.2, 0.0);
        let ode = quadratic_coefficients(&lam.into(), &lam.into(), &g, 1e-12).unwrap();
        let closed = quadratic_constant_trajectory(lam, lam, &g);
        for k in 0..g.len() {
            for j in 0..3 {
                assert!((ode.xi[k][j] - closed.xi[k][j]).norm() < 1e-8, "t {} xi {j}", g[k]);
            }
        }
    }

    #[test]
    fn closed_form_complex_lambda_matches_engine() {
        let g = grid(3.0, 13);
        let (lp, lm) = (c(0.15, 0.1), c(0.15, -0.1));
        let ode = quadratic_coefficients(&lp.into(), &lm.into(), &g, 1e-12).unwrap();
        let closed = quadratic_constant_trajectory(lp, lm, &g);
        for k in 0..g.len() {
            for j in 0..3 {
                assert!((ode.xi[k][j] - closed.xi[k][j]).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn closed_form_free_and_degenerate() {
        let q = quadratic_constant(c(0.0, 0.0), c(0.0, 0.0), 1.7);
        assert!((q.gamma - c(0.0, 0.5)).norm() < 1e-15);
        assert_eq!(q.xi_plus, c(0.0, 0.0));
        assert!((q.xi_zero - c(1.7, 0.0)).norm() < 1e-14);
        let t = 1.3;
        let q = quadratic_constant(c(0.5, 0.0), c(0.5, 0.0), t);
        assert_eq!(q.gamma, c(0.0, 0.0));
        assert!((q.xi_plus - 0.5 * t / (1.0 + i() * t / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn degenerate_closed_form_matches_engine() {
        // K-convention t ↔ physical t/2
        let g = grid(1.5, 7);
        let ode = quadratic_coefficients(&0.5.into(), &0.5.into(), &g, 1e-12).unwrap();
        for (k, &t) in g.iter().enumerate() {
            let tk = 2.0 * t;
            assert!((ode.xi[k][0] - 0.5 * tk / (1.0 + i() * tk / 2.0)).norm() < 1e-8);
        }
    }

    #[test]
    fn closed_form_near_degenerate_is_continuous() {
        let t = 2.0;
        let a = quadratic_constant(c(0.5, 0.0), c(0.5, 0.0), t);
        let b = quadratic_constant(c(0.5 + 1e-9, 0.0), c(0.5, 0.0), t);
        assert!((a.xi_plus - b.xi_plus).norm() < 1e-8);
        assert!((a.xi_zero - b.xi_zero).norm() < 1e-8);
    }

    #[test]
    fn xi_zero_closed_form_satisfies_ode() {
        // K-convention: ξ̇₀ = 1 − 2iλ₋ξ₊
        let (lp, lm) = (c(0.3, 0.1), c(0.2, -0.05));
        for t in [0.3, 1.1, 2.5] {
            let h = 1e-5;
            let d = (quadratic_constant(lp, lm, t + h).xi_zero - quadratic_constant(lp, lm, t - h).xi_zero) / (2.0 * h);
            let q = quadratic_constant(lp, lm, t);
            assert!((d - (1.0 - 2.0 * i() * lm * q.xi_plus)).norm() < 1e-9);
        }
    }

    #[test]
    fn free_quadratic_is_rotation() {
        let g = grid(3.0, 4);
        let q = quadratic_coefficients(&DrivingSignal::zero(), &DrivingSignal::zero(), &g, 1e-12).unwrap();
        for (k, &t) in g.iter().enumerate() {
            assert!(q.xi[k][0].norm() < 1e-14 && q.xi[k][2].norm() < 1e-14);
            assert!((q.xi[k][1] - c(2.0 * t, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn combined_reduces_to_linear() {
        let g = grid(4.0, 9);
        let s = DrivingSignal::constant(0.3);
        let comb = gaussian_combined(&s, &s, &DrivingSignal::zero(), &DrivingSignal::zero(), &g, 1e-12).unwrap();
        let lin = linear_coefficients(&s, &s, &g).unwrap();
        for k in 0..g.len() {
            assert!((comb.f_plus[k] - lin.f_plus[k]).norm() < 1e-9);
            assert!((comb.f_minus[k] - lin.f_minus[k]).norm() < 1e-9);
            assert!((comb.mu[k] - 0.3 * C64::new(0.0, g[k]).exp()).norm() < 1e-9);
        }
    }

    #[test]
    fn combined_reduces_to_quadratic() {
        let g = grid(2.0, 9);
        let lam = DrivingSignal::constant(0.2);
        let comb = gaussian_combined(&DrivingSignal::zero(), &DrivingSignal::zero(), &lam, &lam, &g, 1e-12).unwrap();
        let quad = quadratic_coefficients(&lam, &lam, &g, 1e-12).unwrap();
        for k in 0..g.len() {
            assert!(comb.f_plus[k].norm() < 1e-15 && comb.f_minus[k].norm() < 1e-15);
            for j in 0..3 {
                assert!((comb.quadratic.xi[k][j] - quad.xi[k][j]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn combined_matches_six_element_engine() {
        let g = grid(3.0, 7);
        let (gp, lp) = (DrivingSignal::constant(c(0.1, 0.05)), DrivingSignal::cosine(0.1, 2.0, 0.3));
        let (gm, lm) = (gp.conj(), lp.conj());
        let comb = gaussian_combined(&gp, &gm, &lp, &lm, &g, 1e-12).unwrap();
        let traj = combined_problem(&gp, &gm, &lp, &lm, 3.0).unwrap().integrate_on(&g, 1e-12, 1e-14).unwrap();
        for k in 0..g.len() {
            for (elem, f) in comb.factors(k) {
                assert!((traj.for_element(k, elem) - f).norm() < 1e-8, "elem {elem} t {}", g[k]);
            }
        }
    }

    #[test]
    fn mu_nu_at_origin() {
        let (m, n) = mu_nu(c(0.3, 0.1), c(0.3, -0.1), &[c(0.0, 0.0); 3]);
        assert_eq!(m, c(0.3, 0.1));
        assert_eq!(n, c(0.3, -0.1));
    }

    #[test]
    fn bad_grid() {
        assert_eq!(linear_coefficients(&0.1.into(), &0.1.into(), &[0.5, 1.0]), Err(GaussianError::BadGrid));
    }
}
