//! Explicit Runge-Kutta integration of kinetic systems.

use std::fmt::Write as _;

use crate::error::{CrnError, Result};
use crate::kinetics::KineticSystem;

/// Coordinates below this are treated as having left the positive orthant.
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Stand-in for non-positive coordinates within tolerance when evaluating rates.
const CLAMP_VALUE: f64 = 1e-30;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    /// Classical fourth-order Runge-Kutta with a fixed maximum step.
    Rk4 { step: f64 },
    /// Runge-Kutta-Fehlberg 4(5) with relative local error control.
    Rkf45 { tolerance: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrateOptions {
    pub method: Method,
    /// Uniformly spaced output times, both ends included.
    pub report_points: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            method: Method::Rkf45 { tolerance: 1e-8 },
            report_points: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub species: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().map_or(&[], Vec::as_slice)
    }

    /// `t,<species...>` header and one row per report time.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for s in &self.species {
            out.push(',');
            out.push_str(s);
        }
        out.push('\n');
        for (t, x) in self.times.iter().zip(&self.states) {
            let _ = write!(out, "{t}");
            for v in x {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

struct Rhs<'a> {
    sys: &'a KineticSystem,
    scratch: Vec<f64>,
}

impl Rhs<'_> {
    /// Vector field at `x`, or `None` when `x` is outside the positive orthant.
    fn eval(&mut self, x: &[f64]) -> Option<Vec<f64>> {
        for (s, &v) in self.scratch.iter_mut().zip(x) {
            if v.is_nan() || v < -POSITIVITY_TOL {
                return None;
            }
            *s = if v <= 0.0 { CLAMP_VALUE } else { v };
        }
        let f = self.sys.formation_rate_at(&self.scratch);
        f.iter().all(|v| v.is_finite()).then_some(f)
    }
}

fn axpy(x: &[f64], terms: &[(f64, &[f64])], h: f64) -> Vec<f64> {
    let mut out = x.to_vec();
    for &(a, k) in terms {
        if a != 0.0 {
            for (o, v) in out.iter_mut().zip(k) {
                *o += h * a * v;
            }
        }
    }
    out
}

fn left_orthant(time: f64) -> CrnError {
    CrnError::Integration {
        time,
        msg: "state left the positive orthant".into(),
    }
}

fn rk4_step(rhs: &mut Rhs, t: f64, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let fail = || left_orthant(t);
    let k1 = rhs.eval(x).ok_or_else(fail)?;
    let k2 = rhs.eval(&axpy(x, &[(0.5, &k1)], h)).ok_or_else(fail)?;
    let k3 = rhs.eval(&axpy(x, &[(0.5, &k2)], h)).ok_or_else(fail)?;
    let k4 = rhs.eval(&axpy(x, &[(1.0, &k3)], h)).ok_or_else(fail)?;
    let next = axpy(x, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)], h);
    if next.iter().any(|v| v.is_nan() || *v < -POSITIVITY_TOL) {
        return Err(left_orthant(t + h));
    }
    Ok(next)
}

/// Fehlberg stage coefficients.
const A: [[f64; 5]; 6] = [
    [0.0; 5],
    [1.0 / 4.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
];
const B5: [f64; 6] = [16.0 / 135.0, 0.0, 6656.0 / 12825.0, 28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0];
const B4: [f64; 6] = [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -1.0 / 5.0, 0.0];

/// One embedded step: the fifth-order solution and the scaled error norm, or `None` when
/// a stage leaves the positive orthant.
fn rkf45_trial(rhs: &mut Rhs, x: &[f64], h: f64, tol: f64) -> Option<(Vec<f64>, f64)> {
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(6);
    for s in 0..6 {
        let terms: Vec<(f64, &[f64])> = (0..s).map(|i| (A[s][i], k[i].as_slice())).collect();
        k.push(rhs.eval(&axpy(x, &terms, h))?);
    }
    let hi: Vec<(f64, &[f64])> = (0..6).map(|i| (B5[i], k[i].as_slice())).collect();
    let lo: Vec<(f64, &[f64])> = (0..6).map(|i| (B4[i], k[i].as_slice())).collect();
    let x5 = axpy(x, &hi, h);
    let x4 = axpy(x, &lo, h);
    if x5.iter().any(|v| v.is_nan() || *v < -POSITIVITY_TOL) {
        return None;
    }
    let err = x5
        .iter()
        .zip(&x4)
        .zip(x)
        .map(|((a, b), x0)| (a - b).abs() / (tol * (a.abs().max(x0.abs()) + 1e-6)))
        .fold(0.0_f64, f64::max);
    Some((x5, err))
}

/// Integrates `dx/dt = f(x)` from `x0` over `[0, t_end]`.
pub fn integrate(sys: &KineticSystem, x0: &[f64], t_end: f64, opts: &IntegrateOptions) -> Result<Trajectory> {
    let m = sys.network.num_species();
    if x0.len() != m {
        return Err(CrnError::Dimension(format!("initial state has {} entries, expected {m}", x0.len())));
    }
    if let Some(index) = x0.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(CrnError::NonPositiveState {
            index,
            value: x0[index],
        });
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(CrnError::Config(format!("end time must be positive, got {t_end}")));
    }
    if opts.report_points < 2 {
        return Err(CrnError::Config("at least two report points are needed".into()));
    }
    match opts.method {
        Method::Rk4 { step } if !(step > 0.0) => {
            return Err(CrnError::Config(format!("step must be positive, got {step}")))
        }
        Method::Rkf45 { tolerance } if !(tolerance > 0.0) => {
            return Err(CrnError::Config(format!("tolerance must be positive, got {tolerance}")))
        }
        _ => {}
    }

    let mut rhs = Rhs {
        sys,
        scratch: vec![0.0; m],
    };
    let intervals = opts.report_points - 1;
    let times: Vec<f64> = (0..=intervals)
        .map(|k| t_end * k as f64 / intervals as f64)
        .collect();
    let mut states = vec![x0.to_vec()];
    let mut x = x0.to_vec();
    let mut t = 0.0;
    let mut h_adaptive = t_end / intervals as f64;

    for &target in &times[1..] {
        match opts.method {
            Method::Rk4 { step } => {
                let span = target - t;
                let n = (span / step).ceil().max(1.0) as usize;
                let h = span / n as f64;
                for _ in 0..n {
                    x = rk4_step(&mut rhs, t, &x, h)?;
                    t += h;
                }
                t = target;
            }
            Method::Rkf45 { tolerance } => {
                while t < target {
                    let remaining = target - t;
                    let last = h_adaptive >= remaining * (1.0 - 1e-9);
                    let h = if last { remaining } else { h_adaptive };
                    if h_adaptive < 1e-13 * t_end.max(1.0) {
                        return Err(CrnError::Integration {
                            time: t,
                            msg: "step size underflow".into(),
                        });
                    }
                    match rkf45_trial(&mut rhs, &x, h, tolerance) {
                        Some((next, err)) if err <= 1.0 => {
                            x = next;
                            t = if last { target } else { t + h };
                            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).min(5.0) };
                            // A step shortened to land on a report time says nothing about
                            // the step the dynamics allow.
                            if !last || grow < 1.0 {
                                h_adaptive = h * grow.max(0.2);
                            }
                        }
                        Some((_, err)) => h_adaptive = h * (0.9 * err.powf(-0.2)).clamp(0.1, 0.5),
                        None => h_adaptive = h * 0.25,
                    }
                }
            }
        }
        for v in &mut x {
            if *v <= 0.0 {
                // Within tolerance of the boundary (larger excursions were rejected above).
                return Err(left_orthant(t));
            }
        }
        states.push(x.clone());
    }
    Ok(Trajectory {
        species: sys.species().to_vec(),
        times,
        states,
    })
}

/// `max_t || x_a(t) - diag(c) x_b(t) ||_inf` over a shared time grid.
pub fn compare_trajectories(a: &Trajectory, b: &Trajectory, c: &[f64]) -> Result<f64> {
    if a.times.len() != b.times.len()
        || a.times.iter().zip(&b.times).any(|(p, q)| (p - q).abs() > 1e-12 * p.abs().max(1.0))
    {
        return Err(CrnError::Dimension("trajectories use different time grids".into()));
    }
    let m = c.len();
    let mut worst = 0.0_f64;
    for (xa, xb) in a.states.iter().zip(&b.states) {
        if xa.len() != m || xb.len() != m {
            return Err(CrnError::Dimension("state length differs from scaling vector".into()));
        }
        for i in 0..m {
            worst = worst.max((xa[i] - c[i] * xb[i]).abs());
        }
    }
    Ok(worst)
}
