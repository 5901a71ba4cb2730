use rand::Rng;

use crate::distributions::seeded_rng;

/// Stopping rules for [`nelder_mead`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub max_evaluations: usize,
    /// Spread of objective values across the simplex, absolute part.
    pub f_abs_tol: f64,
    /// Spread of objective values across the simplex, relative part.
    pub f_rel_tol: f64,
    /// Largest coordinate distance of any vertex from the best one.
    pub x_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { max_evaluations: 4000, f_abs_tol: 1e-10, f_rel_tol: 1e-10, x_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
}

/// Nelder-Mead downhill simplex. Infeasible points should evaluate to
/// `+inf`; they are never accepted as improvements.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    steps: &[f64],
    options: &SimplexOptions,
) -> Minimum {
    let dim = start.len();
    assert_eq!(dim, steps.len(), "one initial step per coordinate");
    let mut evaluations = 0;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(start.to_vec());
    for i in 0..dim {
        let mut vertex = start.to_vec();
        vertex[i] += steps[i];
        simplex.push(vertex);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evaluations)).collect();
    let mut order: Vec<usize> = (0..=dim).collect();
    let mut iterations = 0;
    let mut converged = false;
    let mut centroid = vec![0.0; dim];
    let mut trial = vec![0.0; dim];
    let mut trial2 = vec![0.0; dim];

    loop {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let (best, worst, second) = (order[0], order[dim], order[dim - 1]);
        let f_best = values[best];
        let f_spread = values[worst] - f_best;
        let x_spread = simplex
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if f_best.is_finite()
            && f_spread <= options.f_abs_tol + options.f_rel_tol * f_best.abs()
            && x_spread <= options.x_tol
        {
            converged = true;
            break;
        }
        if evaluations >= options.max_evaluations {
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..dim] {
            for (c, x) in centroid.iter_mut().zip(&simplex[i]) {
                *c += x / dim as f64;
            }
        }
        let along = |t: f64, out: &mut Vec<f64>, simplex: &Vec<Vec<f64>>| {
            for ((o, c), w) in out.iter_mut().zip(&centroid).zip(&simplex[worst]) {
                *o = c + t * (w - c);
            }
        };

        along(-1.0, &mut trial, &simplex);
        let f_reflect = eval(&trial, &mut evaluations);
        if f_reflect < f_best {
            along(-2.0, &mut trial2, &simplex);
            let f_expand = eval(&trial2, &mut evaluations);
            if f_expand < f_reflect {
                simplex[worst].copy_from_slice(&trial2);
                values[worst] = f_expand;
            } else {
                simplex[worst].copy_from_slice(&trial);
                values[worst] = f_reflect;
            }
            continue;
        }
        if f_reflect < values[second] {
            simplex[worst].copy_from_slice(&trial);
            values[worst] = f_reflect;
            continue;
        }
        let (t, bar) = if f_reflect < values[worst] { (-0.5, f_reflect) } else { (0.5, values[worst]) };
        along(t, &mut trial2, &simplex);
        let f_contract = eval(&trial2, &mut evaluations);
        if f_contract < bar {
            simplex[worst].copy_from_slice(&trial2);
            values[worst] = f_contract;
            continue;
        }
        let anchor = simplex[best].clone();
        for &i in &order[1..] {
            for (x, a) in simplex[i].iter_mut().zip(&anchor) {
                *x = a + 0.5 * (*x - a);
            }
            values[i] = eval(&simplex[i], &mut evaluations);
        }
    }

    let best = order[0];
    Minimum { x: simplex[best].clone(), value: values[best], converged, iterations, evaluations }
}

/// One simplex run from `start`, then `restarts` further runs from the best
/// point found so far displaced by a uniform jitter of up to one step per
/// coordinate. Jitter draws come from a generator seeded with `seed`.
pub fn nelder_mead_restarts<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    steps: &[f64],
    restarts: usize,
    seed: u64,
    options: &SimplexOptions,
) -> Minimum {
    let mut rng = seeded_rng(seed);
    let mut best = nelder_mead(&mut f, start, steps, options);
    let (mut iterations, mut evaluations) = (best.iterations, best.evaluations);
    for _ in 0..restarts {
        let mut from = best.x.clone();
        let mut scale = 1.0;
        for _ in 0..8 {
            from = best.x.iter().zip(steps).map(|(x, s)| x + scale * s * rng.random_range(-1.0..1.0)).collect();
            evaluations += 1;
            if f(&from).is_finite() {
                break;
            }
            scale *= 0.5;
        }
        let run = nelder_mead(&mut f, &from, steps, options);
        iterations += run.iterations;
        evaluations += run.evaluations;
        if run.value < best.value || (run.value == best.value && run.converged && !best.converged) {
            best = run;
        }
    }
    Minimum { iterations, evaluations, ..best }
}

/// Newton refinement of a smooth minimum with central-difference gradient
/// and Hessian of step `h`. Near a well-curved optimum the fixed point is
/// set by the gradient, which is far less sensitive to rounding in `f`
/// than comparisons of `f` itself. Steps must not raise `f` by more than
/// `slack`; the loop stops on a non-positive-definite Hessian, a step
/// larger than `max_step`, or after `iterations` steps. Returns the refined
/// point and value, or `None` if no step was taken.
pub fn newton_refine<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x: &[f64],
    h: f64,
    slack: f64,
    max_step: f64,
    iterations: usize,
) -> Option<(Vec<f64>, f64)> {
    let dim = x.len();
    let mut x = x.to_vec();
    let mut fx = f(&x);
    let mut moved = false;
    for _ in 0..iterations {
        let mut at = |dx: &[(usize, f64)]| {
            let mut y = x.clone();
            for &(i, d) in dx {
                y[i] += d;
            }
            f(&y)
        };
        let mut grad = vec![0.0; dim];
        let mut hess = vec![vec![0.0; dim]; dim];
        for i in 0..dim {
            let (up, down) = (at(&[(i, h)]), at(&[(i, -h)]));
            grad[i] = (up - down) / (2.0 * h);
            hess[i][i] = (up - 2.0 * fx + down) / (h * h);
            for j in 0..i {
                let v = (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)]) + at(&[(i, -h), (j, -h)]))
                    / (4.0 * h * h);
                hess[i][j] = v;
                hess[j][i] = v;
            }
        }
        if !grad.iter().chain(hess.iter().flatten()).all(|v| v.is_finite()) {
            break;
        }
        let Some(step) = cholesky_solve(&hess, &grad) else { break };
        let size = step.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        if size > max_step {
            break;
        }
        let next: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a - s).collect();
        let f_next = f(&next);
        if !(f_next <= fx + slack) {
            break;
        }
        x = next;
        fx = f_next;
        moved = true;
        if size < 1e-13 {
            break;
        }
    }
    moved.then_some((x, fx))
}

/// Solves `a x = b` for symmetric positive-definite `a`.
fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (y[i] - (i + 1..n).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn minimizes_rosenbrock() {
        let m = nelder_mead(rosenbrock, &[-1.2, 1.0], &[0.5, 0.5], &SimplexOptions::default());
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn newton_lands_on_a_quadratic_minimum() {
        let f = |x: &[f64]| 3.0 * (x[0] - 1.0).powi(2) + (x[0] - 1.0) * (x[1] + 2.0) + 2.0 * (x[1] + 2.0).powi(2) + 7.0;
        let (x, v) = newton_refine(f, &[0.9, -1.7], 1e-3, 0.0, 1.0, 5).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] + 2.0).abs() < 1e-9);
        assert!((v - 7.0).abs() < 1e-12);
        assert!(newton_refine(|x: &[f64]| -(x[0] * x[0]), &[0.5], 1e-3, 0.0, 1.0, 5).is_none());
    }

    #[test]
    fn quadratic_in_four_dimensions() {
        let centre = [0.3, -2.0, 5.0, 1e-3];
        let f = |x: &[f64]| x.iter().zip(&centre).enumerate().map(|(i, (a, c))| (i + 1) as f64 * (a - c).powi(2)).sum();
        let m = nelder_mead_restarts(f, &[0.0; 4], &[1.0; 4], 5, 1, &SimplexOptions::default());
        assert!(m.converged);
        for (a, c) in m.x.iter().zip(&centre) {
            assert!((a - c).abs() < 1e-6);
        }
    }

    #[test]
    fn respects_infeasible_region() {
        let f = |x: &[f64]| if x[0] < 0.5 { f64::INFINITY } else { (x[0] - 0.2).powi(2) + x[1] * x[1] };
        let m = nelder_mead(f, &[2.0, 1.0], &[0.3, 0.3], &SimplexOptions::default());
        assert!(m.x[0] >= 0.5 && (m.x[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn stops_at_evaluation_budget() {
        let options = SimplexOptions { max_evaluations: 20, ..Default::default() };
        let m = nelder_mead(rosenbrock, &[-1.2, 1.0], &[0.5, 0.5], &options);
        assert!(!m.converged);
        assert!(m.evaluations <= 20 + 3);
    }

    #[test]
    fn restarts_are_deterministic() {
        let run = |seed| nelder_mead_restarts(rosenbrock, &[-1.2, 1.0], &[0.5, 0.5], 5, seed, &SimplexOptions::default());
        assert_eq!(run(4), run(4));
    }
}
