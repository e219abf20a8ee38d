//! Accelerated projected gradient for the least-squares mode.

use crate::linalg::CMat;

use super::{project_density, SolverOptions, WhitenedProblem};

fn objective(w: &WhitenedProblem, x: &CMat) -> f64 {
    0.5 * w.residual(x).norm_squared()
}

/// FISTA with function-value restart over unit-trace PSD matrices.
pub(super) fn fista(w: &WhitenedProblem, start: &CMat, options: &SolverOptions) -> (CMat, usize) {
    let lipschitz = w.operator_norm_squared(start).max(f64::MIN_POSITIVE) * 1.05;
    let step = 1.0 / lipschitz;
    let mut x = project_density(start);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut f_prev = objective(w, &x);
    let stop = options.feas_tol * 1e-2;
    let mut restarted = false;
    for it in 1..=options.max_iter {
        let grad = w.adjoint(&w.residual(&y));
        let next = project_density(&(&y - grad.scale(step)));
        let f_next = objective(w, &next);
        let moved = (&next - &x).norm();
        if f_next > f_prev {
            if restarted {
                // a plain gradient step no longer descends
                return (x, it);
            }
            restarted = true;
            t = 1.0;
            y = x.clone();
            continue;
        }
        restarted = false;
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = &next + (&next - &x).scale((t - 1.0) / t_next);
        x = next;
        t = t_next;
        f_prev = f_next;
        if moved <= stop {
            return (x, it);
        }
    }
    (x, options.max_iter)
}
