//! Explicit Runge-Kutta integrators, generic over [`Scalar`].
//!
//! Step-size control looks only at real parts, so the accepted mesh is a
//! piecewise-constant function of any dual perturbation and derivatives of
//! the result are derivatives of the discrete flow.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub initial_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-12, atol: 1e-12, max_steps: 200_000, initial_step: 1e-3 }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights (equal to the last row of `A`).
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn combine<S: Scalar>(y: &[S], h: f64, ks: &[Vec<S>], w: &[f64]) -> Vec<S> {
    let mut out = y.to_vec();
    for (k, &c) in ks.iter().zip(w) {
        if c != 0.0 {
            for (o, &kv) in out.iter_mut().zip(k) {
                *o += kv * (h * c);
            }
        }
    }
    out
}

fn finite<S: Scalar>(y: &[S]) -> bool {
    y.iter().all(|v| v.re().is_finite())
}

/// Dormand-Prince 5(4) from `t0` to `t1`. `inside` is checked on the real
/// parts of every accepted state; a failure raises [`Error::LeftChart`].
/// A trial step whose later stages fail to evaluate or overflow is rejected
/// and retried with a smaller step, so finite-time blowup ends in
/// [`Error::IntegratorDivergence`].
pub fn dopri5<S, F, G>(f: F, y0: &[S], t0: f64, t1: f64, opts: &OdeOptions, inside: G) -> Result<Vec<S>>
where
    S: Scalar,
    F: Fn(f64, &[S]) -> Result<Vec<S>>,
    G: Fn(&[f64]) -> bool,
{
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0.to_vec());
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = opts.initial_step.min(span.abs());
    let mut steps = 0;
    while dir * (t1 - t) > 1e-15 * span.abs().max(1.0) {
        if steps >= opts.max_steps {
            return Err(Error::IntegratorDivergence(format!("step budget exhausted at t = {t}")));
        }
        steps += 1;
        h = h.min(dir * (t1 - t));
        let mut ks: Vec<Vec<S>> = Vec::with_capacity(7);
        let mut stage_error = None;
        for i in 0..7 {
            let yi = combine(&y, dir * h, &ks, &A[i][..i]);
            match f(t + dir * h * C[i], &yi) {
                Ok(k) => ks.push(k),
                // stage 0 sits on the accepted state: a genuine failure
                Err(e) if i == 0 => return Err(e),
                Err(e) => {
                    stage_error = Some(e);
                    break;
                }
            }
        }
        let trial = if stage_error.is_none() {
            let y5 = combine(&y, dir * h, &ks, &B5);
            let y4 = combine(&y, dir * h, &ks, &B4);
            if finite(&y5) && finite(&y4) {
                Some((y5, y4))
            } else {
                None
            }
        } else {
            None
        };
        let Some((y5, y4)) = trial else {
            h *= 0.2;
            if h < 1e-14 * span.abs() {
                let why = stage_error.map_or_else(|| "non-finite state".to_string(), |e| e.to_string());
                return Err(Error::IntegratorDivergence(format!("step size underflow at t = {t} ({why})")));
            }
            continue;
        };
        let mut err: f64 = 0.0;
        for ((a, b), c) in y5.iter().zip(&y4).zip(&y) {
            let sc = opts.atol + opts.rtol * a.re().abs().max(c.re().abs());
            err = err.max((a.re() - b.re()).abs() / sc);
        }
        if err <= 1.0 {
            t += dir * h;
            y = y5;
            let re: Vec<f64> = y.iter().map(|v| v.re()).collect();
            if !inside(&re) {
                return Err(Error::LeftChart(t));
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 * span.abs() {
            return Err(Error::IntegratorDivergence(format!("step size underflow at t = {t}")));
        }
    }
    Ok(y)
}

/// Classical fixed-step RK4.
pub fn rk4<S, F>(f: F, y0: &[S], t0: f64, t1: f64, steps: usize) -> Result<Vec<S>>
where
    S: Scalar,
    F: Fn(f64, &[S]) -> Result<Vec<S>>,
{
    let h = (t1 - t0) / steps.max(1) as f64;
    let mut y = y0.to_vec();
    let mut t = t0;
    for _ in 0..steps.max(1) {
        let k1 = f(t, &y)?;
        let k2 = f(t + 0.5 * h, &combine(&y, 0.5 * h, &[k1.clone()], &[1.0]))?;
        let k3 = f(t + 0.5 * h, &combine(&y, 0.5 * h, &[k2.clone()], &[1.0]))?;
        let k4 = f(t + h, &combine(&y, h, &[k3.clone()], &[1.0]))?;
        y = combine(&y, h, &[k1, k2, k3, k4], &[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0]);
        t += h;
        if !finite(&y) {
            return Err(Error::IntegratorDivergence(format!("non-finite state at t = {t}")));
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Dual;

    #[test]
    fn exponential_growth_and_its_derivative() {
        // y' = a y, y(1) = e^a; derivative wrt a is e^a.
        let a = Dual::variable(0.7_f64);
        let y = dopri5(|_, y: &[Dual<f64>]| Ok(vec![y[0] * a]), &[Dual::constant(1.0)], 0.0, 1.0, &OdeOptions::default(), |_| true)
            .unwrap();
        assert!((y[0].re - 0.7_f64.exp()).abs() < 1e-11);
        assert!((y[0].eps - 0.7_f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn backward_and_rk4() {
        let f = |_: f64, y: &[f64]| Ok(vec![y[1], -y[0]]);
        let y = dopri5(f, &[0.0, 1.0], 0.0, -2.0, &OdeOptions::default(), |_| true).unwrap();
        assert!((y[0] - (-2.0_f64).sin()).abs() < 1e-11);
        let z = rk4(f, &[0.0, 1.0], 0.0, 1.0, 200).unwrap();
        assert!((z[0] - 1.0_f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn leaving_the_chart_and_blowup() {
        let f = |_: f64, y: &[f64]| Ok(vec![1.0 + y[0] * 0.0]);
        let e = dopri5(f, &[0.0], 0.0, 2.0, &OdeOptions::default(), |y| y[0] < 1.0).unwrap_err();
        assert!(matches!(e, Error::LeftChart(_)));
        let g = |_: f64, y: &[f64]| Ok(vec![y[0] * y[0]]);
        let e = dopri5(g, &[1.0], 0.0, 2.0, &OdeOptions::default(), |_| true).unwrap_err();
        assert!(matches!(e, Error::IntegratorDivergence(_)), "{e:?}");
    }

    #[test]
    fn failing_trial_stages_shrink_the_step() {
        // y' = 1/√(1 − y) is undefined past y = 1 but the solution
        // 1 − (1 − 3t/2)^{2/3} stays below it for t < 2/3
        let f = |_: f64, y: &[f64]| {
            if y[0] >= 1.0 {
                Err(Error::OutOfDomain(y.to_vec()))
            } else {
                Ok(vec![1.0 / (1.0 - y[0]).sqrt()])
            }
        };
        let opts = OdeOptions { initial_step: 0.5, ..OdeOptions::default() };
        let y = dopri5(f, &[0.0], 0.0, 0.6, &opts, |_| true).unwrap();
        assert!((y[0] - (1.0 - 0.1_f64.powf(2.0 / 3.0))).abs() < 1e-8, "{}", y[0]);
        let e = dopri5(f, &[1.0], 0.0, 0.6, &opts, |_| true).unwrap_err();
        assert!(matches!(e, Error::OutOfDomain(_)));
        let e = dopri5(f, &[0.0], 0.0, 1.0, &opts, |_| true).unwrap_err();
        assert!(matches!(e, Error::IntegratorDivergence(_)), "{e:?}");
    }
}
