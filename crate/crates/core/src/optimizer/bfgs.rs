use super::{fd_gradient, Objective, OptimControl, OptimResult, Termination};
use crate::linalg::{dot, norm, Matrix};

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

/// Extra knobs for [`quasi_newton_maximize`].
#[derive(Debug, Clone, Default)]
pub struct QuasiNewtonOptions {
    /// Starting approximation of the inverse negative Hessian. When absent
    /// the identity is used and rescaled after the first step.
    pub initial_inverse_hessian: Option<Matrix>,
}

fn evaluate<O: Objective + ?Sized>(obj: &O, x: &[f64], h: f64, grad: &mut [f64]) -> f64 {
    match obj.value_and_gradient(x, grad) {
        Some(f) => f,
        None => {
            let f = obj.value(x);
            if f.is_finite() {
                fd_gradient(obj, x, f, h, grad);
            }
            f
        }
    }
}

/// BFGS ascent with a backtracking Armijo line search.
///
/// Points where the objective is not finite are treated as outside the
/// domain: the line search backs off until it lands inside again. Accepted
/// steps never decrease the objective by more than rounding noise.
pub fn quasi_newton_maximize<O: Objective + ?Sized>(
    obj: &O,
    start: &[f64],
    ctl: &OptimControl,
    opts: &QuasiNewtonOptions,
) -> OptimResult {
    let dim = start.len();
    let mut x = start.to_vec();
    let mut g = vec![0.0; dim];
    let mut f = evaluate(obj, &x, ctl.fd_step, &mut g);
    if !f.is_finite() {
        return OptimResult {
            argmax: x,
            value: f,
            iterations: 0,
            converged: false,
            gradient_norm: f64::NAN,
            termination: Termination::NonFiniteStart,
            trace: vec![f],
        };
    }
    let scale_after_first = opts.initial_inverse_hessian.is_none();
    let mut h = opts.initial_inverse_hessian.clone().unwrap_or_else(|| Matrix::identity(dim));
    let mut trace = vec![f];
    let mut gnorm = norm(&g);

    let mut xn = vec![0.0; dim];
    let mut gn = vec![0.0; dim];
    let mut hy = vec![0.0; dim];
    for iter in 0..ctl.max_iterations {
        if gnorm <= ctl.gradient_tolerance {
            return finish(x, f, iter, true, gnorm, Termination::GradientTolerance, trace);
        }
        let mut d = h.mul_vec(&g);
        let mut slope = dot(&g, &d);
        if !(slope > 0.0) {
            h = Matrix::identity(dim);
            d = g.clone();
            slope = dot(&g, &g);
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            for i in 0..dim {
                xn[i] = x[i] + alpha * d[i];
            }
            let fnew = evaluate(obj, &xn, ctl.fd_step, &mut gn);
            if fnew.is_finite() {
                let sufficient = fnew >= f + ARMIJO * alpha * slope;
                // Near the optimum the expected gain drops below rounding
                // noise; accept steps that keep f flat and shrink the gradient.
                let noise = 16.0 * f64::EPSILON * f.abs().max(1.0);
                let flat_progress = fnew >= f - noise && norm(&gn) < gnorm;
                if sufficient || flat_progress {
                    accepted = Some(fnew);
                    break;
                }
                // safeguarded quadratic interpolation on the ascent direction
                let decrease = f + alpha * slope - fnew;
                let trial = if decrease > 0.0 { 0.5 * slope * alpha * alpha / decrease } else { 0.5 * alpha };
                alpha = trial.clamp(0.1 * alpha, 0.5 * alpha);
            } else {
                alpha *= 0.25;
            }
        }
        let Some(fnew) = accepted else {
            return finish(x, f, iter, false, gnorm, Termination::LineSearchFailed, trace);
        };

        // curvature pair for the minimization of −f
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g.iter().zip(&gn).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if iter == 0 && scale_after_first && sy > 0.0 {
            let scale = sy / dot(&y, &y);
            h = Matrix::identity(dim);
            for i in 0..dim {
                h[(i, i)] = scale;
            }
        }
        if sy > 1e-12 * norm(&s) * norm(&y) {
            for i in 0..dim {
                hy[i] = dot(h.row(i), &y);
            }
            let yhy = dot(&y, &hy);
            let c = (sy + yhy) / (sy * sy);
            for i in 0..dim {
                for j in 0..dim {
                    h[(i, j)] += c * s[i] * s[j] - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
        x.copy_from_slice(&xn);
        g.copy_from_slice(&gn);
        f = fnew;
        gnorm = norm(&g);
        trace.push(f);
    }
    let converged = gnorm <= ctl.gradient_tolerance;
    let termination = if converged { Termination::GradientTolerance } else { Termination::MaxIterations };
    finish(x, f, ctl.max_iterations, converged, gnorm, termination, trace)
}

fn finish(
    argmax: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
    gradient_norm: f64,
    termination: Termination,
    trace: Vec<f64>,
) -> OptimResult {
    OptimResult { argmax, value, iterations, converged, gradient_norm, termination, trace }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::FnObjective;

    struct Bowl;
    impl Objective for Bowl {
        fn value(&self, x: &[f64]) -> f64 {
            -((x[0] - 1.0).powi(2) + (x[1] - 2.0).powi(2) + (x[2] - 3.0).powi(2))
        }
        fn value_and_gradient(&self, x: &[f64], g: &mut [f64]) -> Option<f64> {
            for (i, t) in [1.0, 2.0, 3.0].iter().enumerate() {
                g[i] = -2.0 * (x[i] - t);
            }
            Some(self.value(x))
        }
    }

    #[test]
    fn quadratic_bowl() {
        let res = quasi_newton_maximize(&Bowl, &[0.0, 0.0, 0.0], &OptimControl::default(), &Default::default());
        assert!(res.converged);
        for (a, b) in res.argmax.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    struct Rosenbrock;
    impl Objective for Rosenbrock {
        fn value(&self, x: &[f64]) -> f64 {
            -(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2))
        }
        fn value_and_gradient(&self, x: &[f64], g: &mut [f64]) -> Option<f64> {
            g[0] = -(-400.0 * x[0] * (x[1] - x[0] * x[0]) - 2.0 * (1.0 - x[0]));
            g[1] = -(200.0 * (x[1] - x[0] * x[0]));
            Some(self.value(x))
        }
    }

    #[test]
    fn rosenbrock() {
        let ctl = OptimControl { gradient_tolerance: 1e-9, max_iterations: 500, ..Default::default() };
        let res = quasi_newton_maximize(&Rosenbrock, &[-1.2, 1.0], &ctl, &Default::default());
        assert!(res.converged, "{res:?}");
        assert!((res.argmax[0] - 1.0).abs() < 1e-6 && (res.argmax[1] - 1.0).abs() < 1e-6);
        assert!(res.trace.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn barrier_keeps_iterates_in_domain() {
        // log x − x/3 on x > 0, maximized at x = 3; −∞ elsewhere
        let obj = FnObjective(|x: &[f64]| if x[0] > 0.0 { x[0].ln() - x[0] / 3.0 } else { f64::NEG_INFINITY });
        let res = quasi_newton_maximize(&obj, &[0.05], &OptimControl::default(), &Default::default());
        assert!(res.converged, "{res:?}");
        assert!((res.argmax[0] - 3.0).abs() < 1e-5);
    }

    #[test]
    fn non_finite_start_is_reported() {
        let obj = FnObjective(|_: &[f64]| f64::NEG_INFINITY);
        let res = quasi_newton_maximize(&obj, &[1.0], &OptimControl::default(), &Default::default());
        assert!(!res.converged);
        assert_eq!(res.termination, Termination::NonFiniteStart);
    }

    #[test]
    fn iteration_limit_is_not_silent() {
        let ctl = OptimControl { max_iterations: 3, ..Default::default() };
        let res = quasi_newton_maximize(&Rosenbrock, &[-1.2, 1.0], &ctl, &Default::default());
        assert!(!res.converged);
        assert_eq!(res.termination, Termination::MaxIterations);
    }
}
