//! Scenario execution: decoupled coefficients, oracle fidelities and CSV rows.

use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use thiserror::Error;
use wnd_core::algebra::parse_polynomial;
use wnd_core::engine::{relative_det, DrivingSignal, EngineError};
use wnd_core::fock::{
    self, basis_images, choose_cutoff, coherent_state, compare_with_oracle, FockError, FockHamiltonian, FockState,
    MidpointOptions, OracleComparison,
};
use wnd_core::gaussian::{self, GaussianError, QuadraticCoefficients};
use wnd_core::liouville::{self, LiouvilleError};
use wnd_core::symplectic::{self, SymplecticError};

use crate::config::{ScenarioConfig, ScenarioKind};

const LEAKAGE_TOL: f64 = 1e-10;
const MAX_CUTOFF: usize = 400;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Symplectic(#[from] SymplecticError),
    #[error(transparent)]
    Liouville(#[from] LiouvilleError),
}

impl ScenarioError {
    /// Time at which the solver gave up, when known.
    pub fn failure_time(&self) -> Option<f64> {
        let engine = match self {
            ScenarioError::Engine(e) | ScenarioError::Gaussian(GaussianError::Engine(e)) => e,
            ScenarioError::Symplectic(SymplecticError::StepUnderflow { t, .. }) => return Some(*t),
            _ => return None,
        };
        match engine {
            EngineError::XiSingular { t, .. } | EngineError::StepUnderflow { t, .. } => Some(*t),
            _ => None,
        }
    }
}

/// Table of one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub kind: ScenarioKind,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    pub min_fidelity: f64,
    pub cutoff: usize,
    /// Largest top-two-level population seen in the reference propagation.
    pub leakage: f64,
}

impl ScenarioOutput {
    /// Comma separated, 17 significant digits, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{:.16e}", v + 0.0);
            }
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: {} rows, cutoff {}, min fidelity {:.16e} (1 - F = {:.3e}), leakage {:.3e}",
            self.kind,
            self.rows.len(),
            self.cutoff,
            self.min_fidelity,
            1.0 - self.min_fidelity,
            self.leakage
        )
    }
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutput, ScenarioError> {
    match cfg.kind {
        ScenarioKind::LinearConstant => {
            let g = DrivingSignal::constant(cfg.g0);
            linear(cfg, g.clone(), g)
        }
        ScenarioKind::LinearResonant => {
            let g = DrivingSignal::cosine(cfg.g0, 1.0, cfg.phi);
            linear(cfg, g.clone(), g)
        }
        ScenarioKind::QuadraticConstant => {
            quadratic(cfg, DrivingSignal::constant(cfg.lambda_plus), DrivingSignal::constant(cfg.lambda_minus))
        }
        ScenarioKind::QuadraticParametric => quadratic(
            cfg,
            DrivingSignal::cosine(cfg.lambda_plus, cfg.omega, 0.0),
            DrivingSignal::cosine(cfg.lambda_minus, cfg.omega, 0.0),
        ),
        ScenarioKind::GaussianCombined => combined(cfg),
        ScenarioKind::OpenDamped => open_damped(cfg),
    }
}

fn default_min_cutoff(kind: ScenarioKind) -> usize {
    match kind {
        ScenarioKind::LinearConstant | ScenarioKind::LinearResonant => 40,
        ScenarioKind::QuadraticConstant => 80,
        ScenarioKind::QuadraticParametric | ScenarioKind::GaussianCombined => 60,
        ScenarioKind::OpenDamped => 30,
    }
}

fn image(s: &str, cut: usize) -> Result<fock::FockOperator, FockError> {
    fock::to_matrix(&parse_polynomial(s).expect("literal"), cut)
}

fn midpoint(cfg: &ScenarioConfig) -> MidpointOptions {
    MidpointOptions::new(cfg.span / 2000.0)
}

/// Runs the oracle comparison, raising an automatic cutoff until the
/// reference states stay clear of the truncation edge.
fn oracle_run<B, F>(
    cfg: &ScenarioConfig,
    radius: f64,
    build: B,
    basis: &wnd_core::algebra::LieBasis,
    factors: F,
) -> Result<(usize, OracleComparison), ScenarioError>
where
    B: Fn(usize) -> Result<FockHamiltonian, FockError>,
    F: Fn(usize) -> Vec<(usize, C64)>,
{
    let grid = cfg.grid();
    let mut cut = cfg.cutoff.unwrap_or_else(|| choose_cutoff(radius, default_min_cutoff(cfg.kind)));
    loop {
        let h = build(cut)?;
        let images = basis_images(basis, cut)?;
        let psi0 = coherent_state(cfg.alpha, cut)?;
        let cmp = compare_with_oracle(&h, &images, &factors, &psi0, &grid, &midpoint(cfg))?;
        if cmp.leakage <= LEAKAGE_TOL || cfg.cutoff.is_some() || cut >= MAX_CUTOFF {
            if cmp.leakage > LEAKAGE_TOL {
                log::warn!("reference leakage {:e} at cutoff {cut}; fidelities may be truncation limited", cmp.leakage);
            }
            return Ok((cut, cmp));
        }
        cut = (cut * 3 / 2).min(MAX_CUTOFF);
    }
}

fn moments(cut: usize, state: &FockState) -> Result<(f64, f64, f64), FockError> {
    let x = fock::quadrature_x(cut);
    let p = fock::quadrature_p(cut);
    Ok((fock::expectation(&x, state)?.re, fock::expectation(&p, state)?.re, fock::variance(&x, state)?.re))
}

fn linear(cfg: &ScenarioConfig, g_plus: DrivingSignal, g_minus: DrivingSignal) -> Result<ScenarioOutput, ScenarioError> {
    let grid = cfg.grid();
    let coeffs = gaussian::linear_coefficients(&g_plus, &g_minus, &grid)?;
    let problem = gaussian::linear_problem(g_plus.clone(), g_minus.clone(), cfg.span)?;
    let radius = cfg.alpha.norm() + coeffs.f_plus.iter().map(|f| f.norm()).fold(0.0, f64::max);
    let build = |cut: usize| -> Result<FockHamiltonian, FockError> {
        Ok(FockHamiltonian::new(cut + 1)
            .term(&image("ad*a", cut)?, DrivingSignal::constant(1.0))
            .term(&image("ad", cut)?, g_plus.clone())
            .term(&image("a", cut)?, g_minus.clone()))
    };
    let (cutoff, cmp) = oracle_run(cfg, radius, build, problem.basis(), |k| coeffs.factors(k))?;
    let quadratures = coeffs.quadratures(cfg.alpha);
    let mut rows = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let by_element = coeffs.factors(k);
        let f: Vec<C64> = problem.ordering().iter().map(|&e| by_element[e].1).collect();
        let det = relative_det(&problem.xi(&f)?).0;
        let (x, p) = quadratures[k];
        rows.push(vec![
            grid[k],
            coeffs.f0(k),
            coeffs.f_plus[k].re,
            coeffs.f_plus[k].im,
            coeffs.f_minus[k].re,
            coeffs.f_minus[k].im,
            x.re,
            p.re,
            cmp.fidelities[k],
            det,
        ]);
    }
    Ok(ScenarioOutput {
        kind: cfg.kind,
        header: vec!["t", "ReF0", "ReF+", "ImF+", "ReF-", "ImF-", "X", "P", "fidelity", "detXi"],
        rows,
        min_fidelity: cmp.min_fidelity(),
        cutoff,
        leakage: cmp.leakage,
    })
}

/// Phase-space radius reached by `|α⟩` under the quadratic part, padded by the
/// squeezing width.
fn squeezed_radius(
    cfg: &ScenarioConfig,
    lambda_plus: &DrivingSignal,
    lambda_minus: &DrivingSignal,
    displacement: f64,
) -> Result<f64, ScenarioError> {
    let states = symplectic::propagate_symplectic(lambda_plus, lambda_minus, &cfg.grid(), cfg.rtol.max(1e-12))?;
    Ok(states
        .iter()
        .map(|s| (cfg.alpha.norm() + displacement) * (s.u().norm() + s.v().norm()) + 3.0 * s.v().norm())
        .fold(0.0, f64::max))
}

const XI_HEADER: [&str; 6] = ["Rexi+", "Imxi+", "Rexi0", "Imxi0", "Rexi-", "Imxi-"];

fn xi_columns(q: &QuadraticCoefficients, k: usize) -> [f64; 6] {
    let [p, z, m] = q.xi[k];
    [p.re, p.im, z.re, z.im, m.re, m.im]
}

fn quadratic(
    cfg: &ScenarioConfig,
    lambda_plus: DrivingSignal,
    lambda_minus: DrivingSignal,
) -> Result<ScenarioOutput, ScenarioError> {
    let grid = cfg.grid();
    let problem = gaussian::quadratic_problem(&lambda_plus, &lambda_minus, cfg.span)?;
    let q = QuadraticCoefficients::from_trajectory(problem.integrate_on(&grid, cfg.rtol, cfg.atol)?);
    let radius = squeezed_radius(cfg, &lambda_plus, &lambda_minus, 0.0)?;
    let build = |cut: usize| -> Result<FockHamiltonian, FockError> {
        Ok(FockHamiltonian::new(cut + 1)
            .term(&image("ad*a", cut)?, DrivingSignal::constant(1.0))
            .term(&image("ad^2", cut)?, lambda_plus.clone())
            .term(&image("a^2", cut)?, lambda_minus.clone()))
    };
    let (cutoff, cmp) = oracle_run(cfg, radius, build, problem.basis(), |k| q.factors(k))?;
    let mut rows = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let (x, p, var) = moments(cutoff, &cmp.ansatz[k])?;
        let mut row = vec![grid[k]];
        row.extend(xi_columns(&q, k));
        row.extend([x, p, var, cmp.fidelities[k], q.det_xi[k]]);
        rows.push(row);
    }
    let mut header = vec!["t"];
    header.extend(XI_HEADER);
    header.extend(["X", "P", "VarX", "fidelity", "detXi"]);
    Ok(ScenarioOutput {
        kind: cfg.kind,
        header,
        rows,
        min_fidelity: cmp.min_fidelity(),
        cutoff,
        leakage: cmp.leakage,
    })
}

fn combined(cfg: &ScenarioConfig) -> Result<ScenarioOutput, ScenarioError> {
    let grid = cfg.grid();
    let g = DrivingSignal::constant(cfg.g0);
    let lambda_plus = DrivingSignal::constant(cfg.lambda_plus);
    let lambda_minus = DrivingSignal::constant(cfg.lambda_minus);
    let rtol = cfg.rtol.min(cfg.atol * 1e2);
    let coeffs = gaussian::gaussian_combined(&g, &g, &lambda_plus, &lambda_minus, &grid, rtol)?;
    let displacement = coeffs.f_plus.iter().chain(&coeffs.f_minus).map(|f| f.norm()).fold(0.0, f64::max);
    let radius = squeezed_radius(cfg, &lambda_plus, &lambda_minus, displacement)?;
    let build = |cut: usize| -> Result<FockHamiltonian, FockError> {
        Ok(FockHamiltonian::new(cut + 1)
            .term(&image("ad*a", cut)?, DrivingSignal::constant(1.0))
            .term(&image("ad^2", cut)?, lambda_plus.clone())
            .term(&image("a^2", cut)?, lambda_minus.clone())
            .term(&image("ad", cut)?, g.clone())
            .term(&image("a", cut)?, g.clone()))
    };
    let basis = gaussian::combined_basis();
    let (cutoff, cmp) = oracle_run(cfg, radius, build, &basis, |k| coeffs.factors(k))?;
    let mut rows = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let (x, p, var) = moments(cutoff, &cmp.ansatz[k])?;
        let mut row = vec![grid[k]];
        row.extend(xi_columns(&coeffs.quadratic, k));
        row.extend([coeffs.f_plus[k].re, coeffs.f_plus[k].im, coeffs.f_minus[k].re, coeffs.f_minus[k].im]);
        row.extend([x, p, var, cmp.fidelities[k], coeffs.quadratic.det_xi[k]]);
        rows.push(row);
    }
    let mut header = vec!["t"];
    header.extend(XI_HEADER);
    header.extend(["ReF+", "ImF+", "ReF-", "ImF-", "X", "P", "VarX", "fidelity", "detXi"]);
    Ok(ScenarioOutput {
        kind: cfg.kind,
        header,
        rows,
        min_fidelity: cmp.min_fidelity(),
        cutoff,
        leakage: cmp.leakage,
    })
}

/// `a†a` with `L = a` at rate `κ`; the reference is the exact coherent state
/// `|α e^{−(i + κ/2)t}⟩`.
fn open_damped(cfg: &ScenarioConfig) -> Result<ScenarioOutput, ScenarioError> {
    let grid = cfg.grid();
    let cut = cfg.cutoff.unwrap_or_else(|| choose_cutoff(cfg.alpha.norm(), default_min_cutoff(cfg.kind)));
    let h = image("ad*a", cut)?;
    let a = fock::ladder_matrix(cut);
    let rates = wnd_core::linalg::CMatrix::from_element(1, 1, C64::new(cfg.kappa, 0.0));
    let l = liouville::build_lindbladian(&h, std::slice::from_ref(&a), &rates)?;
    let psi0 = coherent_state(cfg.alpha, cut)?;
    let rho0 = liouville::pure_density(&psi0.vector);
    let spacing = cfg.span / (grid.len() - 1) as f64;
    let traj = liouville::propagate_density(&l, &rho0, &grid, spacing.min(0.05))?;
    let n_op = h.matrix.clone();
    let a_mean = traj.expectation(&a.matrix);
    let n_mean = traj.expectation(&n_op);
    let mut rows = Vec::with_capacity(grid.len());
    let mut min_fidelity = f64::INFINITY;
    let mut leakage: f64 = 0.0;
    for (k, rho) in traj.states.iter().enumerate() {
        let t = grid[k];
        let beta = cfg.alpha * C64::new(-0.5 * cfg.kappa * t, -t).exp();
        let reference = coherent_state(beta, cut)?;
        let fid = reference.vector.dotc(&(rho * &reference.vector)).re;
        min_fidelity = min_fidelity.min(fid);
        leakage = leakage.max((cut - 1..=cut).map(|n| rho[(n, n)].re).sum::<f64>());
        rows.push(vec![
            t,
            a_mean[k].re,
            a_mean[k].im,
            beta.re,
            beta.im,
            n_mean[k].re,
            beta.norm_sqr(),
            rho.trace().re,
            fid,
        ]);
    }
    Ok(ScenarioOutput {
        kind: cfg.kind,
        header: vec!["t", "Rea", "Ima", "Rea_exact", "Ima_exact", "n", "n_exact", "trace", "fidelity"],
        rows,
        min_fidelity,
        cutoff: cut,
        leakage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Assignments;

    fn cfg(kind: &str, args: &[&str]) -> ScenarioConfig {
        let mut a = Assignments::new();
        for s in args {
            a.parse_arg(s).unwrap();
        }
        a.resolve(Some(kind)).unwrap()
    }

    #[test]
    fn linear_constant_orbit_closes() {
        let out = run_scenario(&cfg("linear-constant", &["points=41"])).unwrap();
        assert!(out.min_fidelity >= 1.0 - 1e-8);
        let x = out.column("X").unwrap();
        assert!((x[0] - x[x.len() - 1]).abs() <= 1e-6);
    }

    #[test]
    fn csv_shape() {
        let out = run_scenario(&cfg("quadratic-constant", &["points=5", "T=0.5"])).unwrap();
        let csv = out.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines.iter().all(|l| l.split(',').count() == out.header.len()));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn open_damped_tracks_exact_amplitude() {
        let out = run_scenario(&cfg("open-damped", &["points=11", "T=2"])).unwrap();
        for row in &out.rows {
            assert!((row[1] - row[3]).abs() <= 1e-6 && (row[2] - row[4]).abs() <= 1e-6);
            assert!((row[7] - 1.0).abs() <= 1e-9);
        }
        assert!(out.min_fidelity >= 1.0 - 1e-6);
    }
}
