//! Phase-space propagation of `X̂ = (a, a†)ᵀ` for quadratic Hamiltonians.
//!
//! Writing `Ĥ = ½ X̂ᵀ H X̂ + c` with symmetric `H`, the Heisenberg evolution is
//! `U† X̂ U = S X̂` with `Ṡ = M S`, `M = −iJH` and `J = [[0, 1], [−1, 0]]` the
//! commutator matrix `[X̂_j, X̂_k]`. A factor `e^{−iFĤ}` maps to `e^{F M}`, so an
//! ordered product of factors maps to the same-ordered product of 2×2 images.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::algebra::LadderPolynomial;
use crate::engine::DrivingSignal;
use crate::linalg::{matrix_exp, CMatrix};
use crate::ode::{dopri5, OdeError, OdeOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymplecticError {
    #[error("polynomial is not a single-mode quadratic form (term {0})")]
    NotQuadratic(String),
    #[error("step size {h:e} fell below the floor at t = {t}")]
    StepUnderflow { t: f64, h: f64 },
    #[error("output grid must start at 0 and increase")]
    BadGrid,
}

/// `Ĥ = ½ X̂ᵀ H X̂ + central`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    pub h: CMatrix,
    /// Constant left over after symmetrizing `a†a = (a†a + aa†)/2 − ½`.
    pub central: C64,
}

impl HamiltonianMatrix {
    /// `M = −iJH`.
    pub fn generator(&self) -> CMatrix {
        let j = CMatrix::from_row_slice(2, 2, &[zero(), one(), -one(), zero()]);
        j * &self.h * C64::new(0.0, -1.0)
    }

    /// The quadratic operator `½ X̂ᵀ H X̂ + central`, normal ordered.
    pub fn to_polynomial(&self) -> LadderPolynomial {
        let h = &self.h;
        let mono = |cre, ann, c| LadderPolynomial::monomial(1, 0, cre, ann, c);
        // ½(H₀₀ a² + H₀₁ a a† + H₁₀ a† a + H₁₁ a†²), with a a† = a†a + 1
        let terms = [
            mono(0, 2, 0.5 * h[(0, 0)]),
            mono(1, 1, 0.5 * (h[(0, 1)] + h[(1, 0)])),
            mono(2, 0, 0.5 * h[(1, 1)]),
            LadderPolynomial::constant(1, 0.5 * h[(0, 1)] + self.central),
        ];
        terms.iter().fold(LadderPolynomial::zero(1), |acc, t| &acc + t)
    }
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Matrix of `a†a + λ₊a†² + λ₋a²`.
pub fn hamiltonian_matrix(lambda_plus: C64, lambda_minus: C64) -> HamiltonianMatrix {
    HamiltonianMatrix {
        h: CMatrix::from_row_slice(2, 2, &[2.0 * lambda_minus, one(), one(), 2.0 * lambda_plus]),
        central: C64::new(-0.5, 0.0),
    }
}

/// Matrix of any single-mode polynomial spanned by `a², a†a, a†², 𝟙`.
pub fn quadratic_form(poly: &LadderPolynomial) -> Result<HamiltonianMatrix, SymplecticError> {
    if poly.modes() != 1 {
        return Err(SymplecticError::NotQuadratic(format!("{} modes", poly.modes())));
    }
    let mut h = CMatrix::zeros(2, 2);
    let mut central = zero();
    for (sig, &c) in poly.terms() {
        match sig.powers()[0] {
            (0, 2) => h[(0, 0)] = 2.0 * c,
            (2, 0) => h[(1, 1)] = 2.0 * c,
            (1, 1) => {
                h[(0, 1)] = c;
                h[(1, 0)] = c;
                central -= 0.5 * c;
            }
            (0, 0) => central += c,
            (cre, ann) => return Err(SymplecticError::NotQuadratic(format!("ad^{cre} a^{ann}"))),
        }
    }
    Ok(HamiltonianMatrix { h, central })
}

/// `S` at time `t`, acting as `U† X̂ U = S X̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticState {
    pub t: f64,
    pub s: CMatrix,
}

impl SymplecticState {
    pub fn identity(t: f64) -> Self {
        SymplecticState { t, s: CMatrix::identity(2, 2) }
    }

    /// `U† a U = u a + v a†`.
    pub fn u(&self) -> C64 {
        self.s[(0, 0)]
    }

    pub fn v(&self) -> C64 {
        self.s[(0, 1)]
    }

    /// `||u|² − |v|² − 1|`.
    pub fn bogoliubov_residual(&self) -> f64 {
        (self.u().norm_sqr() - self.v().norm_sqr() - 1.0).abs()
    }

    /// Distance of the second row from the conjugate-swapped first row.
    pub fn conjugation_residual(&self) -> f64 {
        let d1 = (self.s[(1, 0)] - self.s[(0, 1)].conj()).norm();
        let d2 = (self.s[(1, 1)] - self.s[(0, 0)].conj()).norm();
        d1.max(d2)
    }
}

/// Integrates `Ṡ = M(t) S` from `S(0) = I` for `a†a + λ₊(t)a†² + λ₋(t)a²`.
pub fn propagate_symplectic(
    lambda_plus: &DrivingSignal,
    lambda_minus: &DrivingSignal,
    grid: &[f64],
    rtol: f64,
) -> Result<Vec<SymplecticState>, SymplecticError> {
    if grid.first() != Some(&0.0) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(SymplecticError::BadGrid);
    }
    let y0 = [one(), zero(), zero(), one()];
    let sol = dopri5(
        |t, y, out| {
            let m = hamiltonian_matrix(lambda_plus.eval(t), lambda_minus.eval(t)).generator();
            let s = CMatrix::from_row_slice(2, 2, y);
            let d = m * s;
            out.copy_from_slice(&[d[(0, 0)], d[(0, 1)], d[(1, 0)], d[(1, 1)]]);
            Ok::<(), std::convert::Infallible>(())
        },
        &y0,
        grid,
        &OdeOptions::new(rtol, rtol * 1e-2),
    )
    .map_err(|e| match e {
        OdeError::StepUnderflow { t, h } => SymplecticError::StepUnderflow { t, h },
        OdeError::BadGrid => SymplecticError::BadGrid,
        OdeError::Rhs { source, .. } => match source {},
    })?;
    Ok(sol
        .times
        .iter()
        .zip(&sol.states)
        .map(|(&t, y)| SymplecticState { t, s: CMatrix::from_row_slice(2, 2, y) })
        .collect())
}

/// Image `e^{F M}` of the factor `e^{−iFĤ}`.
pub fn factor_image(h: &HamiltonianMatrix, f: C64) -> CMatrix {
    matrix_exp(&(h.generator() * f)).expect("finite 2×2 exponent")
}

/// Image of `Π_k e^{−iF_kĤ_k}`: the product of factor images in the same order.
pub fn ansatz_image(factors: &[(C64, &HamiltonianMatrix)]) -> CMatrix {
    factors.iter().fold(CMatrix::identity(2, 2), |acc, (f, h)| acc * factor_image(h, *f))
}

/// `(⟨a⟩, ⟨a†⟩)` for an initial coherent state `|α⟩`.
pub fn first_moments(state: &SymplecticState, alpha: C64) -> (C64, C64) {
    let s = &state.s;
    (s[(0, 0)] * alpha + s[(0, 1)] * alpha.conj(), s[(1, 0)] * alpha + s[(1, 1)] * alpha.conj())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_polynomial;
    use crate::fock;
    use crate::gaussian;
    use crate::linalg::max_abs;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn grid(span: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| span * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn free_matrix_reconstructs_number_operator() {
        let h = HamiltonianMatrix { central: zero(), ..hamiltonian_matrix(zero(), zero()) };
        assert_eq!(h.h[(0, 1)], one());
        let rebuilt = fock::to_matrix(&h.to_polynomial(), 20).unwrap();
        let expected = fock::to_matrix(&parse_polynomial("ad*a + 0.5*I").unwrap(), 20).unwrap();
        assert!(max_abs(&(rebuilt.matrix - expected.matrix)) < 1e-10);
    }

    #[test]
    fn quadratic_form_round_trip() {
        for (lp, lm) in [(c(0.2, 0.0), c(0.2, 0.0)), (c(0.1, 0.3), c(-0.4, 0.2)), (zero(), zero())] {
            let h = hamiltonian_matrix(lp, lm);
            let poly = h.to_polynomial();
            let direct = &(&parse_polynomial("ad*a").unwrap() + &(&parse_polynomial("ad^2").unwrap() * lp))
                + &(&parse_polynomial("a^2").unwrap() * lm);
            assert!(poly.approx_eq(&direct, 1e-14), "{poly} vs {direct}");
            assert_eq!(quadratic_form(&direct).unwrap(), h);
        }
        let h = hamiltonian_matrix(c(0.3, 0.0), zero());
        assert_eq!(h.h[(1, 1)], c(0.6, 0.0));
        assert!(matches!(quadratic_form(&parse_polynomial("ad").unwrap()), Err(SymplecticError::NotQuadratic(_))));
        let z = quadratic_form(&LadderPolynomial::zero(1)).unwrap();
        assert_eq!(z.h, CMatrix::zeros(2, 2));
    }

    #[test]
    fn free_evolution_rotates() {
        let g = grid(3.0, 7);
        let states = propagate_symplectic(&DrivingSignal::zero(), &DrivingSignal::zero(), &g, 1e-12).unwrap();
        for st in &states {
            assert!((st.u() - c(0.0, -st.t).exp()).norm() < 1e-10);
            assert!(st.v().norm() < 1e-14);
            assert!((st.s[(1, 1)] - c(0.0, st.t).exp()).norm() < 1e-10);
        }
    }

    #[test]
    fn free_evolution_matches_heisenberg_oracle() {
        let cut = 40;
        let t = 0.9;
        let n = fock::to_matrix(&parse_polynomial("ad*a").unwrap(), cut).unwrap();
        let u = crate::linalg::matrix_exp(&(&n.matrix * c(0.0, -t))).unwrap();
        let a = fock::ladder_matrix(cut).matrix;
        let heis = u.adjoint() * &a * &u;
        let s = &propagate_symplectic(&DrivingSignal::zero(), &DrivingSignal::zero(), &[0.0, t], 1e-12).unwrap()[1];
        let predicted = &a * s.u() + a.adjoint() * s.v();
        assert!(max_abs(&(heis - predicted)) < 1e-10);
    }

    #[test]
    fn quarter_period_first_moment() {
        let s = &propagate_symplectic(&DrivingSignal::zero(), &DrivingSignal::zero(), &[0.0, std::f64::consts::FRAC_PI_2], 1e-12)
            .unwrap()[1];
        let (m, md) = first_moments(s, one());
        assert!((m - c(0.0, -1.0)).norm() < 1e-10);
        assert!((md - c(0.0, 1.0)).norm() < 1e-10);
        assert_eq!(first_moments(&SymplecticState::identity(0.0), c(0.3, 0.4)), (c(0.3, 0.4), c(0.3, -0.4)));
    }

    #[test]
    fn constant_squeezing_matches_ansatz_image() {
        let g = grid(2.0, 21);
        let lam = DrivingSignal::constant(0.2);
        let states = propagate_symplectic(&lam, &lam, &g, 1e-12).unwrap();
        let xi = gaussian::quadratic_coefficients(&lam, &lam, &g, 1e-12).unwrap();
        let ks: Vec<HamiltonianMatrix> =
            [gaussian::k_plus(), gaussian::k_zero(), gaussian::k_minus()].iter().map(|k| quadratic_form(k).unwrap()).collect();
        for (k, st) in states.iter().enumerate() {
            let [xp, x0, xm] = xi.xi[k];
            let image = ansatz_image(&[(xp, &ks[0]), (x0, &ks[1]), (xm, &ks[2])]);
            assert!(max_abs(&(&image - &st.s)) < 1e-7, "t {}", st.t);
            assert!(st.bogoliubov_residual() < 1e-8);
            assert!(st.conjugation_residual() < 1e-9);
            let from_ansatz = SymplecticState { t: st.t, s: image };
            assert!(from_ansatz.bogoliubov_residual() < 1e-8);
        }
    }

    #[test]
    fn parametric_drive_is_bogoliubov() {
        let g = grid(6.0, 31);
        let lam = DrivingSignal::cosine(c(0.1, 0.05), 2.0, 0.0);
        let states = propagate_symplectic(&lam, &lam.conj(), &g, 1e-12).unwrap();
        for st in &states {
            assert!(st.bogoliubov_residual() < 1e-8);
            assert!(st.conjugation_residual() < 1e-9);
        }
    }

    #[test]
    fn squeezed_first_moment_matches_oracle() {
        let cut = 60;
        let t = 2.0;
        let lam = 0.2;
        let h = fock::to_matrix(&parse_polynomial(&format!("ad*a + {lam}*ad^2 + {lam}*a^2")).unwrap(), cut).unwrap();
        let u = crate::linalg::matrix_exp(&(&h.matrix * c(0.0, -t))).unwrap();
        let alpha = c(0.7, -0.3);
        let psi = fock::coherent_state(alpha, cut).unwrap();
        let evolved = fock::FockState { vector: &u * &psi.vector, cutoffs: psi.cutoffs.clone() };
        let oracle = fock::expectation(&fock::ladder_matrix(cut), &evolved).unwrap();
        let s = &propagate_symplectic(&lam.into(), &lam.into(), &[0.0, t], 1e-12).unwrap()[1];
        assert!((first_moments(s, alpha).0 - oracle).norm() < 1e-6);
    }
}
