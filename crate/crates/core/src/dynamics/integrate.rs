//! Fixed-step RK4 and adaptive Runge-Kutta-Fehlberg 4(5).

use crate::error::{Error, Result};

pub const DEFAULT_RKF45_TOL: f64 = 1e-9;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.1;
const MAX_FACTOR: f64 = 4.0;
const MAX_STEPS: usize = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Rk4 { dt: f64 },
    /// `dt` is the initial step; `tol` is the combined absolute and relative
    /// tolerance.
    Rkf45 { dt: f64, tol: f64 },
}

impl Method {
    pub fn dt(&self) -> f64 {
        match *self {
            Method::Rk4 { dt } | Method::Rkf45 { dt, .. } => dt,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Error estimate of the step ending at each sample (0 for the initial
    /// sample and for RK4).
    pub step_errors: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &[f64])> {
        Some((*self.times.last()?, self.states.last()?.as_slice()))
    }

    fn push(&mut self, t: f64, y: Vec<f64>, err: f64) {
        self.times.push(t);
        self.states.push(y);
        self.step_errors.push(err);
    }
}

/// Integrates `ẏ = f(t, y)` from `t0` to `t_end`. Domain errors raised by `f`
/// become [`Error::ChartExit`] at the time of the failing evaluation.
pub fn integrate(
    mut f: impl FnMut(f64, &[f64]) -> Result<Vec<f64>>,
    y0: &[f64],
    t0: f64,
    t_end: f64,
    method: Method,
) -> Result<Trajectory> {
    let dt = method.dt();
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {dt}")));
    }
    if !(t_end >= t0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!("bad time span [{t0}, {t_end}]")));
    }
    if y0.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("initial state"));
    }
    let mut eval = |t: f64, y: &[f64]| -> Result<Vec<f64>> {
        let r = f(t, y).map_err(|e| match e {
            Error::Domain(reason) => Error::ChartExit { time: t, reason },
            other => other,
        })?;
        if r.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("right-hand side"));
        }
        Ok(r)
    };
    match method {
        Method::Rk4 { dt } => rk4(&mut eval, y0, t0, t_end, dt),
        Method::Rkf45 { dt, tol } => rkf45(&mut eval, y0, t0, t_end, dt, tol),
    }
}

fn axpy(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for &(c, k) in terms {
        for (o, ki) in out.iter_mut().zip(k) {
            *o += h * c * ki;
        }
    }
    out
}

fn rk4_step(
    f: &mut impl FnMut(f64, &[f64]) -> Result<Vec<f64>>,
    t: f64,
    y: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &[(1.0, &k1)]))?;
    let k3 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &[(1.0, &k2)]))?;
    let k4 = f(t + h, &axpy(y, h, &[(1.0, &k3)]))?;
    Ok(axpy(
        y,
        h / 6.0,
        &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)],
    ))
}

fn rk4(
    f: &mut impl FnMut(f64, &[f64]) -> Result<Vec<f64>>,
    y0: &[f64],
    t0: f64,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    let span = t_end - t0;
    let full = ((span / dt) * (1.0 + 1e-12)).floor() as usize;
    let mut traj = Trajectory::default();
    traj.push(t0, y0.to_vec(), 0.0);
    let mut y = y0.to_vec();
    for k in 0..full {
        let t = t0 + k as f64 * dt;
        y = rk4_step(f, t, &y, dt)?;
        traj.push(t0 + (k + 1) as f64 * dt, y.clone(), 0.0);
    }
    let done = t0 + full as f64 * dt;
    let rest = t_end - done;
    if rest > 1e-9 * dt {
        y = rk4_step(f, done, &y, rest)?;
        traj.push(t_end, y, 0.0);
    }
    Ok(traj)
}

// Fehlberg tableau.
const C: [f64; 6] = [0.0, 0.25, 3.0 / 8.0, 12.0 / 13.0, 1.0, 0.5];
const A: [&[f64]; 6] = [
    &[],
    &[0.25],
    &[3.0 / 32.0, 9.0 / 32.0],
    &[1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0],
    &[439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0],
    &[-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
];
const B4: [f64; 6] = [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -0.2, 0.0];
const B5: [f64; 6] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];

fn rkf45(
    f: &mut impl FnMut(f64, &[f64]) -> Result<Vec<f64>>,
    y0: &[f64],
    t0: f64,
    t_end: f64,
    dt: f64,
    tol: f64,
) -> Result<Trajectory> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut traj = Trajectory::default();
    traj.push(t0, y0.to_vec(), 0.0);
    let (mut t, mut y, mut h) = (t0, y0.to_vec(), dt.min(t_end - t0));
    let mut steps = 0;
    while t_end - t > 1e-12 * (1.0 + t_end.abs()) {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::NoConvergence {
                what: "rkf45",
                iterations: MAX_STEPS,
                residual: t_end - t,
            });
        }
        h = h.min(t_end - t);
        if h < 1e-14 * (1.0 + t.abs()) {
            return Err(Error::StepUnderflow { time: t });
        }
        let mut k: Vec<Vec<f64>> = Vec::with_capacity(6);
        for s in 0..6 {
            let terms: Vec<(f64, &[f64])> =
                A[s].iter().zip(&k).map(|(&a, ki)| (a, ki.as_slice())).collect();
            k.push(f(t + C[s] * h, &axpy(&y, h, &terms))?);
        }
        let y4 = axpy(&y, h, &B4.iter().zip(&k).map(|(&b, ki)| (b, ki.as_slice())).collect::<Vec<_>>());
        let y5 = axpy(&y, h, &B5.iter().zip(&k).map(|(&b, ki)| (b, ki.as_slice())).collect::<Vec<_>>());
        let err = y4
            .iter()
            .zip(&y5)
            .zip(&y)
            .map(|((a, b), y)| (a - b).abs() / (tol * (1.0 + y.abs())))
            .fold(0.0, f64::max);
        let factor = if err == 0.0 {
            MAX_FACTOR
        } else {
            (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
        };
        if err <= 1.0 {
            t += h;
            y = y5;
            traj.push(t, y.clone(), err * tol);
        }
        h *= factor;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rhs_gives_constant_trajectory() {
        for method in [Method::Rk4 { dt: 0.1 }, Method::Rkf45 { dt: 0.1, tol: 1e-9 }] {
            let tr = integrate(|_, y| Ok(vec![0.0; y.len()]), &[1.0, 2.0], 0.0, 1.0, method).unwrap();
            assert!(tr.states.iter().all(|s| s == &[1.0, 2.0]));
            assert_eq!(*tr.times.last().unwrap(), 1.0);
            assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn rk4_grid_and_partial_step() {
        let tr = integrate(|_, _| Ok(vec![1.0]), &[0.0], 0.0, 1.05, Method::Rk4 { dt: 0.1 }).unwrap();
        assert_eq!(tr.len(), 12);
        assert_eq!(tr.times[3], 0.30000000000000004);
        assert!((tr.states[11][0] - 1.05).abs() < 1e-14);
    }

    #[test]
    fn exponential_decay() {
        let exact = (-2.0f64).exp();
        let tr = integrate(|_, y| Ok(vec![-y[0]]), &[1.0], 0.0, 2.0, Method::Rk4 { dt: 1e-2 }).unwrap();
        assert!((tr.states.last().unwrap()[0] - exact).abs() < 1e-9);
        let tr = integrate(|_, y| Ok(vec![-y[0]]), &[1.0], 0.0, 2.0, Method::Rkf45 { dt: 0.1, tol: 1e-10 })
            .unwrap();
        assert!((tr.states.last().unwrap()[0] - exact).abs() < 1e-8);
        assert!(tr.step_errors.iter().all(|&e| e <= 1e-10 * 2.0));
    }

    #[test]
    fn domain_error_becomes_chart_exit() {
        let r = integrate(
            |_, y| {
                if y[0] > 1.0 {
                    Err(Error::Domain("left".into()))
                } else {
                    Ok(vec![1.0])
                }
            },
            &[0.0],
            0.0,
            3.0,
            Method::Rk4 { dt: 0.01 },
        );
        match r {
            Err(Error::ChartExit { time, .. }) => assert!((time - 1.0).abs() < 0.02),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn stiff_blowup_underflows() {
        let r = integrate(
            |_, y| Ok(vec![y[0] * y[0]]),
            &[1.0],
            0.0,
            2.0,
            Method::Rkf45 { dt: 0.1, tol: 1e-9 },
        );
        assert!(matches!(r, Err(Error::StepUnderflow { .. }) | Err(Error::NonFinite(_))), "{r:?}");
    }

    #[test]
    fn rejects_bad_step() {
        assert!(integrate(|_, _| Ok(vec![0.0]), &[0.0], 0.0, 1.0, Method::Rk4 { dt: 0.0 }).is_err());
    }
}
