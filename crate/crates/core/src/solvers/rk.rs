//! Dormand–Prince 5(4) with FSAL, PI step-size control and the classical
//! 4th-order dense output (Hairer, Nørsett & Wanner, *Solving ODEs I*).

use crate::{Error, Result};

use super::{fixed_step_count, time_at, StepControl, Trajectory, TrajectoryMeta};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// 5th-order minus embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const MIN_STEP: f64 = 1e-12;

fn check_finite(v: &[f64], t: f64, step: usize) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericAbort {
            step,
            time: t,
            reason: format!("non-finite right-hand side {v:?}"),
        })
    }
}

struct Step {
    y_new: Vec<f64>,
    k: [Vec<f64>; 7],
}

/// One DOPRI5 step from `(t, y)` with `k1 = f(t, y)` already known.
fn dopri_step<F>(f: &F, t: f64, y: &[f64], k1: &[f64], h: f64, step: usize) -> Result<Step>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    let n = y.len();
    let mut k: [Vec<f64>; 7] = Default::default();
    k[0] = k1.to_vec();
    let mut tmp = vec![0.0; n];
    for s in 1..7 {
        for i in 0..n {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(s) {
                acc += A[s][j] * kj[i];
            }
            tmp[i] = y[i] + h * acc;
        }
        let ts = t + C[s] * h;
        k[s] = f(ts, &tmp)?;
        check_finite(&k[s], ts, step)?;
        if s == 6 {
            // stage 7 is evaluated at the 5th-order solution (FSAL)
            return Ok(Step { y_new: tmp, k });
        }
    }
    unreachable!()
}

struct Dense {
    t: f64,
    h: f64,
    coef: [Vec<f64>; 5],
}

impl Dense {
    fn new(t: f64, h: f64, y: &[f64], st: &Step) -> Self {
        let n = y.len();
        let mut coef: [Vec<f64>; 5] = Default::default();
        coef[0] = y.to_vec();
        coef[1] = (0..n).map(|i| st.y_new[i] - y[i]).collect();
        coef[2] = (0..n).map(|i| h * st.k[0][i] - coef[1][i]).collect();
        coef[3] = (0..n)
            .map(|i| coef[1][i] - h * st.k[6][i] - coef[2][i])
            .collect();
        coef[4] = (0..n)
            .map(|i| h * D.iter().zip(&st.k).map(|(d, k)| d * k[i]).sum::<f64>())
            .collect();
        Self { t, h, coef }
    }

    fn eval(&self, t: f64) -> Vec<f64> {
        let s = (t - self.t) / self.h;
        let s1 = 1.0 - s;
        let c = &self.coef;
        (0..c[0].len())
            .map(|i| c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i]))))
            .collect()
    }
}

fn ode_meta(step: StepControl) -> TrajectoryMeta {
    TrajectoryMeta {
        solver: "dopri5".into(),
        seed: 0,
        sample: 0,
        step,
    }
}

/// Fixed-step DOPRI5 on the grid `t0 + k dt`.
pub fn rk_fixed<F>(f: F, z0: &[f64], t0: f64, t1: f64, dt: f64) -> Result<Trajectory>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    let n = fixed_step_count(t0, t1, dt)?;
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    times.push(t0);
    states.push(z0.to_vec());
    let mut y = z0.to_vec();
    let mut k1 = f(t0, &y)?;
    check_finite(&k1, t0, 0)?;
    for k in 0..n {
        let t = time_at(t0, t1, dt, k, n);
        let t_next = time_at(t0, t1, dt, k + 1, n);
        let st = dopri_step(&f, t, &y, &k1, t_next - t, k)?;
        y = st.y_new;
        k1 = st.k[6].clone();
        times.push(t_next);
        states.push(y.clone());
    }
    Ok(Trajectory {
        times,
        states,
        in_k: None,
        meta: ode_meta(StepControl::Fixed { dt }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Uniform output spacing via dense output; `None` stores accepted steps.
    pub output_dt: Option<f64>,
    pub max_steps: usize,
}

impl AdaptiveOptions {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            output_dt: None,
            max_steps: 1_000_000,
        }
    }
}

fn error_norm(err: &[f64], y: &[f64], y_new: &[f64], rtol: f64, atol: f64) -> f64 {
    let n = err.len().max(1) as f64;
    let sum: f64 = err
        .iter()
        .zip(y)
        .zip(y_new)
        .map(|((e, a), b)| {
            let sc = atol + rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

fn initial_step<F>(f: &F, t0: f64, y0: &[f64], f0: &[f64], span: f64, rtol: f64, atol: f64) -> Result<f64>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    let scale: Vec<f64> = y0.iter().map(|y| atol + rtol * y.abs()).collect();
    let rms = |v: &[f64]| {
        (v.iter().zip(&scale).map(|(x, s)| (x / s).powi(2)).sum::<f64>() / v.len().max(1) as f64).sqrt()
    };
    let d0 = rms(y0);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, k)| y + h0 * k).collect();
    let f1 = f(t0 + h0, &y1)?;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(span))
}

/// Adaptive DOPRI5 with the local error controlled against
/// `rtol · |z| + atol`.
pub fn rk_adaptive<F>(f: F, z0: &[f64], t0: f64, t1: f64, opts: AdaptiveOptions) -> Result<Trajectory>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    let AdaptiveOptions {
        rtol,
        atol,
        output_dt,
        max_steps,
    } = opts;
    if !(rtol > 0.0 && atol > 0.0) {
        return Err(Error::Config(format!("tolerances must be positive (rtol {rtol}, atol {atol})")));
    }
    if !(t1 > t0) {
        return Err(Error::Config(format!("horizon must satisfy T > t0, got [{t0}, {t1}]")));
    }
    let grid = match output_dt {
        Some(dt) => {
            let n = fixed_step_count(t0, t1, dt)?;
            Some((dt, n))
        }
        None => None,
    };
    const SAFETY: f64 = 0.9;
    const BETA: f64 = 0.04;
    let expo1 = 0.2 - BETA * 0.75;

    let mut times = vec![t0];
    let mut states = vec![z0.to_vec()];
    let mut next_out = 1usize;

    let mut t = t0;
    let mut y = z0.to_vec();
    let mut k1 = f(t, &y)?;
    check_finite(&k1, t, 0)?;
    let mut h = initial_step(&f, t0, &y, &k1, t1 - t0, rtol, atol)?;
    let mut facold: f64 = 1e-4;
    let mut rejected_last = false;
    let mut n_steps = 0usize;

    while t < t1 {
        if n_steps >= max_steps {
            return Err(Error::NumericAbort {
                step: n_steps,
                time: t,
                reason: "maximum number of steps exceeded".into(),
            });
        }
        if h < MIN_STEP {
            return Err(Error::StepSizeUnderflow { time: t, step: h });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        let st = dopri_step(&f, t, &y, &k1, h, n_steps)?;
        let err: Vec<f64> = (0..y.len())
            .map(|i| h * E.iter().zip(&st.k).map(|(e, k)| e * k[i]).sum::<f64>())
            .collect();
        let en = error_norm(&err, &y, &st.y_new, rtol, atol);
        let fac11 = en.powf(expo1);
        if en <= 1.0 {
            let t_new = if last { t1 } else { t + h };
            match grid {
                Some((dt, n)) => {
                    let dense = Dense::new(t, h, &y, &st);
                    while next_out <= n {
                        let tg = time_at(t0, t1, dt, next_out, n);
                        if tg > t_new + 1e-12 * dt {
                            break;
                        }
                        times.push(tg);
                        states.push(if next_out == n { st.y_new.clone() } else { dense.eval(tg) });
                        next_out += 1;
                    }
                }
                None => {
                    times.push(t_new);
                    states.push(st.y_new.clone());
                }
            }
            let fac = (fac11 / facold.powf(BETA) / SAFETY).clamp(0.1, 5.0);
            facold = en.max(1e-4);
            let mut h_new = h / fac;
            if rejected_last {
                h_new = h_new.min(h);
            }
            rejected_last = false;
            t = t_new;
            y = st.y_new;
            k1 = st.k[6].clone();
            h = h_new;
        } else {
            h /= (fac11 / SAFETY).min(5.0);
            rejected_last = true;
        }
        n_steps += 1;
    }
    Ok(Trajectory {
        times,
        states,
        in_k: None,
        meta: ode_meta(StepControl::Adaptive { rtol, atol }),
    })
}
