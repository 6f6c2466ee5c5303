//! Adaptive Dormand–Prince 5(4) integration of complex ODE systems with
//! continuous (dense) output onto a caller-supplied grid.

use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError<E> {
    #[error("right-hand side failed at t = {t}: {source}")]
    Rhs { t: f64, source: E },
    #[error("step size {h:e} fell below the floor at t = {t}")]
    StepUnderflow { t: f64, h: f64 },
    #[error("output grid must be non-decreasing and start at t0")]
    BadGrid,
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Fractions of the total span.
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub safety: f64,
}

impl OdeOptions {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            initial_step: 1e-3,
            max_step: 0.1,
            min_step: 1e-12,
            safety: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<C64>>,
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn combine(y: &[C64], h: f64, terms: &[(f64, &[C64])], out: &mut [C64]) {
    for i in 0..y.len() {
        let mut acc = C64::new(0.0, 0.0);
        for (w, k) in terms {
            if *w != 0.0 {
                acc += k[i] * *w;
            }
        }
        out[i] = y[i] + acc * h;
    }
}

/// Integrates `y' = f(t, y)` from `t_out[0]` to the last grid point, returning
/// the solution on every grid point. The first grid point carries `y0` exactly.
pub fn dopri5<F, E>(
    mut rhs: F,
    y0: &[C64],
    t_out: &[f64],
    opts: &OdeOptions,
) -> Result<OdeSolution, OdeError<E>>
where
    F: FnMut(f64, &[C64], &mut [C64]) -> Result<(), E>,
{
    if t_out.is_empty() || t_out.windows(2).any(|w| w[1] < w[0]) {
        return Err(OdeError::BadGrid);
    }
    let t0 = t_out[0];
    let t_end = *t_out.last().unwrap();
    let span = t_end - t0;
    let n = y0.len();

    let mut sol = OdeSolution {
        times: Vec::with_capacity(t_out.len()),
        states: Vec::with_capacity(t_out.len()),
        accepted: 0,
        rejected: 0,
    };
    let mut next_out = 0;
    while next_out < t_out.len() && t_out[next_out] == t0 {
        sol.times.push(t0);
        sol.states.push(y0.to_vec());
        next_out += 1;
    }
    if span == 0.0 {
        return Ok(sol);
    }

    let h_max = opts.max_step * span;
    let h_min = opts.min_step * span;
    let mut h = (opts.initial_step * span).min(h_max);
    let mut t = t0;
    let mut y = y0.to_vec();

    let zero = C64::new(0.0, 0.0);
    let mut k = vec![vec![zero; n]; 7];
    let mut ytmp = vec![zero; n];
    let mut ynew = vec![zero; n];

    let mut eval = |t: f64, y: &[C64], out: &mut [C64]| rhs(t, y, out).map_err(|source| OdeError::Rhs { t, source });
    eval(t, &y, &mut k[0])?;

    while t < t_end {
        if h < h_min {
            return Err(OdeError::StepUnderflow { t, h });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        combine(&y, h, &[(A21, &k[0])], &mut ytmp);
        let (k_head, k_tail) = k.split_at_mut(1);
        eval(t + C2 * h, &ytmp, &mut k_tail[0])?;
        combine(&y, h, &[(A31, &k_head[0]), (A32, &k_tail[0])], &mut ytmp);
        eval(t + C3 * h, &ytmp, &mut k_tail[1])?;
        combine(&y, h, &[(A41, &k_head[0]), (A42, &k_tail[0]), (A43, &k_tail[1])], &mut ytmp);
        eval(t + C4 * h, &ytmp, &mut k_tail[2])?;
        combine(
            &y,
            h,
            &[(A51, &k_head[0]), (A52, &k_tail[0]), (A53, &k_tail[1]), (A54, &k_tail[2])],
            &mut ytmp,
        );
        eval(t + C5 * h, &ytmp, &mut k_tail[3])?;
        combine(
            &y,
            h,
            &[
                (A61, &k_head[0]),
                (A62, &k_tail[0]),
                (A63, &k_tail[1]),
                (A64, &k_tail[2]),
                (A65, &k_tail[3]),
            ],
            &mut ytmp,
        );
        eval(t + h, &ytmp, &mut k_tail[4])?;
        combine(
            &y,
            h,
            &[
                (A71, &k_head[0]),
                (A73, &k_tail[1]),
                (A74, &k_tail[2]),
                (A75, &k_tail[3]),
                (A76, &k_tail[4]),
            ],
            &mut ynew,
        );
        eval(t + h, &ynew, &mut k_tail[5])?;

        let mut err_sq = 0.0;
        for i in 0..n {
            let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * h;
            let sc = opts.atol + opts.rtol * y[i].norm().max(ynew[i].norm());
            err_sq += (e.norm() / sc).powi(2);
        }
        let err = if n == 0 { 0.0 } else { (err_sq / n as f64).sqrt() };

        if err <= 1.0 {
            sol.accepted += 1;
            let t_new = if last { t_end } else { t + h };
            while next_out < t_out.len() && t_out[next_out] <= t_new {
                let theta = ((t_out[next_out] - t) / h).clamp(0.0, 1.0);
                let state = if t_out[next_out] == t_new {
                    ynew.clone()
                } else {
                    dense_point(&y, &ynew, &k, h, theta)
                };
                sol.times.push(t_out[next_out]);
                sol.states.push(state);
                next_out += 1;
            }
            t = t_new;
            std::mem::swap(&mut y, &mut ynew);
            k.swap(0, 6);
            let fac = if err == 0.0 { 10.0 } else { (opts.safety * err.powf(-0.2)).clamp(0.2, 10.0) };
            h = (h * fac).min(h_max);
        } else {
            sol.rejected += 1;
            let fac = (opts.safety * err.powf(-0.2)).clamp(0.2, 1.0);
            h *= fac;
        }
    }
    Ok(sol)
}

fn dense_point(y: &[C64], ynew: &[C64], k: &[Vec<C64>], h: f64, theta: f64) -> Vec<C64> {
    let theta1 = 1.0 - theta;
    (0..y.len())
        .map(|i| {
            let r1 = y[i];
            let r2 = ynew[i] - y[i];
            let r3 = k[0][i] * h - r2;
            let r4 = r2 - k[6][i] * h - r3;
            let r5 = (k[0][i] * D1 + k[2][i] * D3 + k[3][i] * D4 + k[4][i] * D5 + k[5][i] * D6 + k[6][i] * D7) * h;
            r1 + (r2 + (r3 + (r4 + r5 * theta1) * theta) * theta1) * theta
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn grid(t_end: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| t_end * i as f64 / n as f64).collect()
    }

    #[test]
    fn complex_rotation_exact_on_grid() {
        // y' = i*w*y, y(0) = 1
        let w = 1.3;
        let t = grid(10.0, 37);
        let sol = dopri5(
            |_, y: &[C64], dy: &mut [C64]| {
                dy[0] = C64::new(0.0, w) * y[0];
                Ok::<(), Infallible>(())
            },
            &[C64::new(1.0, 0.0)],
            &t,
            &OdeOptions::new(1e-12, 1e-12),
        )
        .unwrap();
        assert_eq!(sol.times, t);
        for (ti, yi) in sol.times.iter().zip(&sol.states) {
            let exact = C64::new(0.0, w * ti).exp();
            assert!((yi[0] - exact).norm() < 1e-9, "t={ti} err={}", (yi[0] - exact).norm());
        }
    }

    #[test]
    fn dense_output_between_steps() {
        // loose tolerance gives long steps, so almost all grid points are interpolated
        let t = grid(3.0, 300);
        let sol = dopri5(
            |t, _y: &[C64], dy: &mut [C64]| {
                dy[0] = C64::new(t.cos(), 2.0 * t);
                Ok::<(), Infallible>(())
            },
            &[C64::new(0.0, 0.0)],
            &t,
            &OdeOptions::new(1e-6, 1e-6),
        )
        .unwrap();
        assert!(sol.accepted < 100);
        for (ti, yi) in sol.times.iter().zip(&sol.states) {
            let exact = C64::new(ti.sin(), ti * ti);
            assert!((yi[0] - exact).norm() < 1e-5);
        }
    }

    #[test]
    fn initial_point_is_exact() {
        let y0 = [C64::new(0.0, 0.0), C64::new(0.25, -1.0)];
        let sol = dopri5(
            |_, y: &[C64], dy: &mut [C64]| {
                dy[0] = y[1];
                dy[1] = -y[0];
                Ok::<(), Infallible>(())
            },
            &y0,
            &[0.0, 1.0],
            &OdeOptions::new(1e-10, 1e-10),
        )
        .unwrap();
        assert_eq!(sol.states[0], y0.to_vec());
    }

    #[test]
    fn underflow_is_reported() {
        // blows up at t = 1
        let res = dopri5(
            |_, y: &[C64], dy: &mut [C64]| {
                dy[0] = y[0] * y[0];
                Ok::<(), Infallible>(())
            },
            &[C64::new(1.0, 0.0)],
            &[0.0, 2.0],
            &OdeOptions::new(1e-10, 1e-10),
        );
        assert!(matches!(res, Err(OdeError::StepUnderflow { t, .. }) if t < 1.0 + 1e-6));
    }

    #[test]
    fn rhs_errors_propagate() {
        let res = dopri5(
            |t, _: &[C64], _: &mut [C64]| if t > 0.5 { Err("boom") } else { Ok(()) },
            &[C64::new(1.0, 0.0)],
            &[0.0, 1.0],
            &OdeOptions::new(1e-8, 1e-8),
        );
        assert!(matches!(res, Err(OdeError::Rhs { source: "boom", .. })));
    }
}
