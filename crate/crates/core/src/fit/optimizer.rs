//! Small dense least-squares optimizers: Levenberg-Marquardt with a
//! Nelder-Mead restart when the damped steps stop making progress.

/// A least-squares problem `min sum r_i(x)^2`. Returning `None` marks a
/// parameter vector outside the problem's domain.
pub trait LeastSquaresProblem {
    fn residuals(&self, x: &[f64]) -> Option<Vec<f64>>;

    /// Row-major Jacobian, one row per residual.
    fn jacobian(&self, x: &[f64]) -> Option<Vec<Vec<f64>>>;

    fn objective(&self, x: &[f64]) -> f64 {
        match self.residuals(x) {
            Some(r) if r.iter().all(|v| v.is_finite()) => r.iter().map(|v| v * v).sum(),
            _ => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// Convergence on relative objective change between accepted steps.
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerOutcome {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every accepted step, starting with the initial point.
    pub history: Vec<f64>,
}

const MU_INIT: f64 = 1e-3;
const MU_MAX: f64 = 1e14;

enum LmStop {
    Converged,
    Stagnated,
    Exhausted,
}

fn levenberg_marquardt<P: LeastSquaresProblem>(
    problem: &P,
    x: &mut Vec<f64>,
    objective: &mut f64,
    budget: &mut usize,
    iterations: &mut usize,
    history: &mut Vec<f64>,
    tolerance: f64,
) -> LmStop {
    let n = x.len();
    let mut mu = MU_INIT;
    loop {
        if *budget == 0 {
            return LmStop::Exhausted;
        }
        let (Some(r), Some(jac)) = (problem.residuals(x), problem.jacobian(x)) else {
            return LmStop::Stagnated;
        };
        let mut jtj = vec![vec![0.0; n]; n];
        let mut jtr = vec![0.0; n];
        for (row, ri) in jac.iter().zip(&r) {
            for a in 0..n {
                jtr[a] += row[a] * ri;
                for b in 0..n {
                    jtj[a][b] += row[a] * row[b];
                }
            }
        }
        let diag_floor = 1e-12
            * (0..n)
                .map(|a| jtj[a][a])
                .fold(0.0, f64::max)
                .max(f64::MIN_POSITIVE);

        // inner loop: raise the damping until a step reduces the objective
        loop {
            if *budget == 0 {
                return LmStop::Exhausted;
            }
            *budget -= 1;
            *iterations += 1;
            let mut lhs = jtj.clone();
            for a in 0..n {
                lhs[a][a] += mu * jtj[a][a].max(diag_floor);
            }
            let rhs: Vec<f64> = jtr.iter().map(|g| -g).collect();
            let Some(step) = solve(lhs, rhs) else {
                mu *= 4.0;
                if mu > MU_MAX {
                    return LmStop::Stagnated;
                }
                continue;
            };
            let candidate: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a + d).collect();
            let value = problem.objective(&candidate);
            if value < *objective {
                let change = (*objective - value) / objective.max(f64::MIN_POSITIVE);
                *x = candidate;
                *objective = value;
                history.push(value);
                mu = (mu / 3.0).max(1e-12);
                if change <= tolerance {
                    return LmStop::Converged;
                }
                break;
            }
            let step_norm = step
                .iter()
                .zip(x.iter())
                .map(|(d, a)| (d / a.abs().max(1e-300)).abs())
                .fold(0.0, f64::max);
            if step_norm < 1e-15 {
                // no representable improvement left
                return LmStop::Converged;
            }
            mu *= 4.0;
            if mu > MU_MAX {
                return LmStop::Stagnated;
            }
        }
    }
}

/// Minimizes with LM; on stagnation restarts from the best point with a
/// Nelder-Mead simplex, then polishes with LM again.
pub fn minimize<P: LeastSquaresProblem>(
    problem: &P,
    x0: &[f64],
    config: &OptimizerConfig,
) -> OptimizerOutcome {
    let mut x = x0.to_vec();
    let mut objective = problem.objective(&x);
    let mut history = vec![objective];
    let mut budget = config.max_iterations;
    let mut iterations = 0;

    let mut converged = false;
    let mut restarted = false;
    let mut simplex_converged = false;
    loop {
        match levenberg_marquardt(
            problem,
            &mut x,
            &mut objective,
            &mut budget,
            &mut iterations,
            &mut history,
            config.tolerance,
        ) {
            LmStop::Converged => {
                converged = true;
                break;
            }
            LmStop::Exhausted => break,
            LmStop::Stagnated if restarted => {
                // stagnating twice at the same point: accept if the simplex agreed
                converged = simplex_converged;
                break;
            }
            LmStop::Stagnated => {
                restarted = true;
                let (best, value, used, done) = nelder_mead(
                    |p| problem.objective(p),
                    &x,
                    budget,
                    config.tolerance,
                    &mut history,
                );
                simplex_converged = done;
                budget -= used;
                iterations += used;
                if value < objective {
                    x = best;
                    objective = value;
                }
            }
        }
    }
    OptimizerOutcome {
        x,
        objective,
        iterations,
        converged,
        history,
    }
}

/// Derivative-free simplex search. Returns the best vertex, its value, the
/// iterations used and whether the simplex collapsed within `tolerance`.
/// Appends the best value after each improving iteration.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    start: &[f64],
    max_iterations: usize,
    tolerance: f64,
    history: &mut Vec<f64>,
) -> (Vec<f64>, f64, usize, bool) {
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for k in 0..n {
        let mut v = start.to_vec();
        v[k] = if v[k] != 0.0 { v[k] * 1.05 } else { 2.5e-4 };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut best_seen = values.iter().cloned().fold(f64::INFINITY, f64::min);

    let mut used = 0;
    let mut collapsed = false;
    while used < max_iterations {
        used += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = (values[n] - values[0]).abs();
        if spread <= tolerance * values[0].abs().max(f64::MIN_POSITIVE) {
            collapsed = true;
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let reflected = along(-1.0);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let contracted = if fr < values[n] {
                along(-0.5)
            } else {
                along(0.5)
            };
            let fc = f(&contracted);
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                for k in 1..=n {
                    simplex[k] = simplex[0]
                        .iter()
                        .zip(&simplex[k])
                        .map(|(b, v)| b + 0.5 * (v - b))
                        .collect();
                    values[k] = f(&simplex[k]);
                }
            }
        }
        let current = values.iter().cloned().fold(f64::INFINITY, f64::min);
        if current < best_seen {
            best_seen = current;
            history.push(current);
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    (simplex[best].clone(), values[best], used, collapsed)
}

/// Gaussian elimination with partial pivoting.
pub(crate) fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 || !a[pivot][col].is_finite() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Inverse of a small dense matrix.
pub(crate) fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut columns = Vec::with_capacity(n);
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        columns.push(solve(a.to_vec(), e)?);
    }
    Some(
        (0..n)
            .map(|i| (0..n).map(|j| columns[j][i]).collect())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rosenbrock as a residual problem.
    struct Rosenbrock;

    impl LeastSquaresProblem for Rosenbrock {
        fn residuals(&self, x: &[f64]) -> Option<Vec<f64>> {
            Some(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]])
        }

        fn jacobian(&self, x: &[f64]) -> Option<Vec<Vec<f64>>> {
            Some(vec![vec![-20.0 * x[0], 10.0], vec![-1.0, 0.0]])
        }
    }

    #[test]
    fn lm_solves_rosenbrock() {
        let cfg = OptimizerConfig {
            max_iterations: 500,
            tolerance: 1e-14,
        };
        let out = minimize(&Rosenbrock, &[-1.2, 1.0], &cfg);
        assert!(out.converged);
        assert!(
            (out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6,
            "{:?}",
            out.x
        );
        assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn simplex_finds_quadratic_minimum() {
        let mut history = Vec::new();
        let (x, value, _, done) = nelder_mead(
            |p| (p[0] - 3.0).powi(2) + 2.0 * (p[1] + 1.0).powi(2) + 0.5,
            &[0.0, 0.0],
            2000,
            1e-14,
            &mut history,
        );
        assert!((x[0] - 3.0).abs() < 1e-5 && (x[1] + 1.0).abs() < 1e-5);
        assert!((value - 0.5).abs() < 1e-9);
        assert!(done);
        assert!(history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn linear_algebra() {
        let a = vec![vec![4.0, 1.0], vec![2.0, 3.0]];
        let x = solve(a.clone(), vec![1.0, 2.0]).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!((2.0 * x[0] + 3.0 * x[1] - 2.0).abs() < 1e-14);
        let inv = invert(&a).unwrap();
        assert!((inv[0][0] - 0.3).abs() < 1e-14 && (inv[0][1] + 0.1).abs() < 1e-14);
        assert!(solve(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 1.0]).is_none());
    }
}
