//! Multi-start derivative-free minimization over point configurations.
//!
//! The objective landscapes here are smooth away from coincidence sets but
//! multimodal, and the quadrature objectives have no cheap gradients, so
//! each restart runs a plain Nelder-Mead simplex over the flattened chart
//! coordinates. Restarts are independent, seeded per index, and merged by
//! a single reducer in index order, so results are reproducible bit for bit
//! regardless of the worker count.

use num_complex::Complex;
use rayon::prelude::*;

use crate::scalar::{Real, C};

/// Knobs for the multi-start optimizer.
#[derive(Debug, Clone)]
pub struct OptimSpec {
    /// Number of independent restarts (>= 1).
    pub restarts: usize,
    /// Iteration cap per restart.
    pub max_iters: usize,
    /// Stop once the best value improves by less than this relative amount
    /// over a 50-iteration window.
    pub rel_improvement_floor: f64,
    /// Seed for all restart-local randomness; echoed into outputs.
    pub seed: u64,
}

impl OptimSpec {
    pub fn new(restarts: usize, max_iters: usize, seed: u64) -> Self {
        assert!(restarts >= 1);
        Self { restarts, max_iters, rel_improvement_floor: 1e-10, seed }
    }
}

/// Default restart budget `8 + 2 ceil(sqrt N)`: the landscape grows more
/// local minima with the configuration size.
pub fn default_restarts(n: usize) -> usize {
    8 + 2 * (n as f64).sqrt().ceil() as usize
}

/// Result of one multi-start minimization over configurations.
#[derive(Debug, Clone)]
pub struct MinimizeOutcome<T: Real> {
    pub best: Vec<C<T>>,
    pub value: T,
    /// Iterations spent by the winning restart.
    pub iterations: usize,
    pub converged: bool,
    /// Final value of every restart, in restart order.
    pub restart_values: Vec<T>,
}

struct RestartResult<T: Real> {
    coords: Vec<T>,
    value: T,
    iterations: usize,
    converged: bool,
}

const WINDOW: usize = 50;

fn nelder_mead<T, F>(
    f: &F,
    x0: &[T],
    step: T,
    max_iters: usize,
    floor: T,
) -> RestartResult<T>
where
    T: Real,
    F: Fn(&[T]) -> T,
{
    let dim = x0.len();
    let mut simplex: Vec<Vec<T>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<T> = simplex.iter().map(|v| f(v)).collect();

    let (alpha, gamma, rho, sigma) = (T::one(), T::lit(2.0), T::lit(0.5), T::lit(0.5));
    let mut window_best = values.iter().cloned().fold(T::infinity(), T::min);
    let mut window_start = window_best;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..max_iters {
        iterations = iter + 1;
        // order the simplex by value
        let mut order: Vec<usize> = (0..simplex.len()).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        // centroid of all but the worst
        let mut centroid = vec![T::zero(); dim];
        for &idx in order.iter().take(dim) {
            for (c, x) in centroid.iter_mut().zip(&simplex[idx]) {
                *c += *x;
            }
        }
        let inv = T::one() / T::from_usize(dim).unwrap();
        for c in centroid.iter_mut() {
            *c *= inv;
        }

        let blend = |a: &[T], b: &[T], t: T| -> Vec<T> {
            a.iter().zip(b).map(|(x, y)| *x + t * (*y - *x)).collect()
        };

        // reflection
        let reflected = blend(&centroid, &simplex[worst], -alpha);
        let fr = f(&reflected);
        if fr < values[best] {
            // expansion
            let expanded = blend(&centroid, &simplex[worst], -gamma);
            let fe = f(&expanded);
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            // contraction (outside when the reflection helped a little)
            let pivot = if fr < values[worst] { &reflected } else { &simplex[worst] };
            let contracted = blend(&centroid, pivot, rho);
            let fc = f(&contracted);
            if fc < values[worst].min(fr) {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                // shrink toward the best vertex
                let anchor = simplex[best].clone();
                for idx in 0..simplex.len() {
                    if idx == best {
                        continue;
                    }
                    simplex[idx] = blend(&anchor, &simplex[idx], sigma);
                    values[idx] = f(&simplex[idx]);
                }
            }
        }

        let current_best = values.iter().cloned().fold(T::infinity(), T::min);
        debug_assert!(current_best <= window_best + window_best.abs() * T::eps() * T::lit(4.0));
        window_best = window_best.min(current_best);
        if (iter + 1) % WINDOW == 0 {
            let scale = window_start.abs().max(T::lit(1e-300));
            if (window_start - window_best) / scale < floor {
                converged = true;
                break;
            }
            window_start = window_best;
        }
    }

    let mut best_idx = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best_idx] {
            best_idx = i;
        }
    }
    RestartResult {
        coords: simplex[best_idx].clone(),
        value: values[best_idx],
        iterations,
        converged,
    }
}

fn flatten<T: Real>(points: &[C<T>]) -> Vec<T> {
    let mut out = Vec::with_capacity(points.len() * 2);
    for p in points {
        out.push(p.re);
        out.push(p.im);
    }
    out
}

fn unflatten<T: Real>(coords: &[T]) -> Vec<C<T>> {
    coords
        .chunks_exact(2)
        .map(|c| Complex::new(c[0], c[1]))
        .collect()
}

/// Minimize a configuration objective from the given starts (one start per
/// restart; the list length is the restart count). Deterministic for a
/// fixed spec: restarts run independently (possibly in parallel) and the
/// best value wins, ties resolved by restart index.
pub fn minimize_configuration<T, F>(
    objective: F,
    starts: &[Vec<C<T>>],
    spec: &OptimSpec,
) -> MinimizeOutcome<T>
where
    T: Real,
    F: Fn(&[C<T>]) -> T + Sync + Send,
{
    assert!(!starts.is_empty());
    let floor = T::lit(spec.rel_improvement_floor);
    let step = T::lit(0.35);
    let wrapped = |coords: &[T]| objective(&unflatten(coords));
    let results: Vec<RestartResult<T>> = starts
        .par_iter()
        .map(|start| nelder_mead(&wrapped, &flatten(start), step, spec.max_iters, floor))
        .collect();

    let mut best_idx = 0;
    for (i, r) in results.iter().enumerate() {
        if r.value < results[best_idx].value {
            best_idx = i;
        }
    }
    let restart_values = results.iter().map(|r| r.value).collect();
    let winner = &results[best_idx];
    MinimizeOutcome {
        best: unflatten(&winner.coords),
        value: winner.value,
        iterations: winner.iterations,
        converged: winner.converged,
        restart_values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_finds_a_quadratic_minimum() {
        let f = |x: &[f64]| (x[0] - 1.5).powi(2) + 2.0 * (x[1] + 0.5).powi(2) + 3.0;
        let r = nelder_mead(&f, &[0.0, 0.0], 0.4, 2000, 1e-12);
        assert!(r.converged);
        assert!((r.value - 3.0).abs() < 1e-9);
        assert!((r.coords[0] - 1.5).abs() < 1e-5);
        assert!((r.coords[1] + 0.5).abs() < 1e-5);
    }

    #[test]
    fn restarts_are_deterministic_and_ordered() {
        let objective = |pts: &[Complex<f64>]| {
            pts.iter().map(|p| (p - Complex::new(0.3, -0.2)).norm_sqr()).sum::<f64>()
        };
        let starts = vec![
            vec![Complex::new(0.0, 0.0), Complex::new(1.0, 1.0)],
            vec![Complex::new(-1.0, 0.5), Complex::new(0.5, -1.0)],
            vec![Complex::new(2.0, 2.0), Complex::new(-2.0, -2.0)],
        ];
        let spec = OptimSpec::new(3, 800, 42);
        let a = minimize_configuration(objective, &starts, &spec);
        let b = minimize_configuration(objective, &starts, &spec);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.restart_values.len(), 3);
        for (x, y) in a.best.iter().zip(b.best.iter()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
        assert!(a.value < 1e-8);
    }

    #[test]
    fn default_restart_budget_grows_with_n() {
        assert_eq!(default_restarts(1), 10);
        assert_eq!(default_restarts(4), 12);
        assert_eq!(default_restarts(32), 20);
    }
}
