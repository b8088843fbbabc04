//! Adaptive Dormand–Prince 4(5) integration.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    /// Mixed tolerance: a step is accepted when each component's error is at
    /// most `tol * (1 + |y|)`.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeOutcome {
    pub y: Vec<f64>,
    /// Parameter reached; less than the end point only on escape.
    pub t: f64,
    pub steps: usize,
    pub rejected: usize,
    /// Largest normalized error estimate among accepted steps.
    pub max_error: f64,
    pub escaped: bool,
}

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
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1`, stopping early if
/// `escape(y)` becomes true after an accepted step.
pub fn integrate<F, E>(
    f: F,
    t0: f64,
    t1: f64,
    y0: &[f64],
    opts: OdeOptions,
    escape: E,
) -> Result<OdeOutcome>
where
    F: Fn(f64, &[f64], &mut [f64]),
    E: Fn(&[f64]) -> bool,
{
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "ODE tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let dim = y0.len();
    let span = t1 - t0;
    let dir = span.signum();
    let mut out = OdeOutcome {
        y: y0.to_vec(),
        t: t0,
        steps: 0,
        rejected: 0,
        max_error: 0.0,
        escaped: false,
    };
    if span == 0.0 || dim == 0 {
        return Ok(out);
    }
    let mut k = vec![vec![0.0; dim]; 7];
    let mut stage = vec![0.0; dim];
    let mut y5 = vec![0.0; dim];
    let mut h = dir * (span.abs() * 0.01).min(0.1);
    let h_min = 1e-14 * span.abs().max(1.0);
    f(out.t, &out.y, &mut k[0]);
    while (t1 - out.t) * dir > 0.0 {
        if out.steps >= opts.max_steps {
            return Err(Error::StepUnderflow(out.t));
        }
        if (out.t + h - t1) * dir > 0.0 {
            h = t1 - out.t;
        }
        for s in 1..7 {
            for i in 0..dim {
                stage[i] = out.y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
            }
            f(out.t + C[s] * h, &stage, &mut k[s]);
        }
        let mut err: f64 = 0.0;
        for i in 0..dim {
            y5[i] = out.y[i] + h * (0..7).map(|j| B5[j] * k[j][i]).sum::<f64>();
            let y4 = out.y[i] + h * (0..7).map(|j| B4[j] * k[j][i]).sum::<f64>();
            let scale = opts.tol * (1.0 + out.y[i].abs().max(y5[i].abs()));
            err = err.max((y5[i] - y4).abs() / scale);
        }
        if !err.is_finite() {
            return Err(Error::NonFinite(format!(
                "ODE right-hand side at t = {}",
                out.t
            )));
        }
        if err <= 1.0 {
            out.t += h;
            out.y.copy_from_slice(&y5);
            out.steps += 1;
            out.max_error = out.max_error.max(err * opts.tol);
            // First-same-as-last: the final stage is f at the new point.
            let last = k[6].clone();
            k[0].copy_from_slice(&last);
            if escape(&out.y) {
                out.escaped = true;
                return Ok(out);
            }
        } else {
            out.rejected += 1;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h.abs() < h_min && (t1 - out.t) * dir > h_min {
            return Err(Error::StepUnderflow(out.t));
        }
    }
    out.t = t1;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let out = integrate(
            |_, y, dy| dy[0] = -y[0],
            0.0,
            2.0,
            &[1.0],
            OdeOptions::default(),
            |_| false,
        )
        .unwrap();
        assert!((out.y[0] - (-2.0f64).exp()).abs() < 1e-8);
        assert!(!out.escaped);
    }

    #[test]
    fn rotation_matches_closed_form() {
        let w = std::f64::consts::FRAC_PI_2;
        let out = integrate(
            |_, y, dy| {
                dy[0] = -w * y[1];
                dy[1] = w * y[0];
            },
            0.0,
            1.0,
            &[0.5, 0.0],
            OdeOptions::default(),
            |_| false,
        )
        .unwrap();
        assert!(out.y[0].abs() < 1e-8 && (out.y[1] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn backwards_and_escape() {
        let back = integrate(
            |_, _, dy| dy[0] = 1.0,
            1.0,
            0.0,
            &[1.0],
            OdeOptions::default(),
            |_| false,
        )
        .unwrap();
        assert!(back.y[0].abs() < 1e-12);
        let esc = integrate(
            |_, _, dy| dy[0] = 1.0,
            0.0,
            5.0,
            &[0.0],
            OdeOptions::default(),
            |y| y[0] > 1.0,
        )
        .unwrap();
        assert!(esc.escaped && esc.t < 5.0);
    }

    #[test]
    fn blow_up_is_reported() {
        let r = integrate(
            |_, y, dy| dy[0] = y[0] * y[0],
            0.0,
            2.0,
            &[1.0],
            OdeOptions::default(),
            |_| false,
        );
        assert!(matches!(
            r,
            Err(Error::StepUnderflow(_)) | Err(Error::NonFinite(_))
        ));
    }
}
