//! Packing integrals and packing numbers on the sphere: evaluation,
//! multi-start optimization over configurations, the zero-packing
//! functional, and the spiral heuristic configurations.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::optim::{minimize_configuration, OptimSpec};
use crate::scalar::{Real, C};
use crate::sphere::{
    mobius_to_origin, sphere_distance, stereo_project, ComplexPoint, SphereGrid, SpherePoint,
};
use crate::weyl::RootConfiguration;

/// Chart guard: configurations with a point this close (chordally) to the
/// chart pole are rotated before quadrature; the integral is invariant.
const POLE_MARGIN: f64 = 0.1;

/// Result of a packing-number estimation run.
#[derive(Debug, Clone)]
pub struct PackingResult<T: Real> {
    pub value: T,
    pub configuration: RootConfiguration<T>,
    pub beta: T,
    pub iterations: usize,
    pub converged: bool,
    /// Final objective of every restart, in restart order.
    pub restart_values: Vec<T>,
}

fn distance_to_pole<T: Real>(p: &ComplexPoint<T>) -> T {
    sphere_distance(p, &ComplexPoint::Infinity)
}

/// Rotate the configuration so no point sits within the pole margin; exact
/// for the packing integrals by rotation invariance. Returns the points in
/// finite chart coordinates.
fn rechart<T: Real>(cfg: &RootConfiguration<T>) -> Vec<C<T>> {
    let margin = T::lit(POLE_MARGIN);
    let clear = |c: &C<T>| {
        // the rotation z -> (z - c)/(1 + conj(c) z) sends -1/conj(c) to
        // the pole; every point must stay away from that spot
        cfg.roots.iter().all(|r| {
            let pole_preimage =
                ComplexPoint::Finite(-Complex::new(T::one(), T::zero()) / c.conj());
            sphere_distance(r, &pole_preimage) >= margin
        })
    };
    let fine = cfg.roots.iter().all(|r| distance_to_pole(r) >= margin);
    if fine {
        return cfg.roots.iter().map(|r| r.finite().unwrap()).collect();
    }
    // deterministic candidate rotations; for the configuration sizes used
    // here one of the coarse directions always clears the margin
    let mut candidates = Vec::with_capacity(26);
    for k in 0..13 {
        let angle = T::lit(0.5641895) * T::from_usize(k).unwrap();
        for radius in [T::lit(0.45), T::lit(1.7)] {
            candidates.push(Complex::from_polar(radius, angle));
        }
    }
    let mut best = candidates[0];
    let mut best_clearance = T::neg_infinity();
    for c in candidates {
        let pole_preimage = ComplexPoint::Finite(-Complex::new(T::one(), T::zero()) / c.conj());
        let clearance = cfg
            .roots
            .iter()
            .map(|r| sphere_distance(r, &pole_preimage))
            .fold(T::infinity(), T::min);
        if clearance > best_clearance {
            best_clearance = clearance;
            best = c;
        }
        if clear(&c) {
            best = c;
            break;
        }
    }
    cfg.roots
        .iter()
        .map(|r| match r {
            ComplexPoint::Infinity => Complex::new(T::one(), T::zero()) / best.conj(),
            ComplexPoint::Finite(z) => mobius_to_origin(*z, best),
        })
        .collect()
}

/// Packing integral `(1/pi) int exp(beta sum_j U(z, w_j)) dA_S(z)`.
///
/// Continuous in every `w_j` including at infinity (the configuration is
/// re-charted away from the pole when needed). A single-point
/// configuration routes through the rotation-adapted moment quadrature,
/// which is exact for the radial family.
pub fn packing_integral<T: Real>(
    cfg: &RootConfiguration<T>,
    beta: T,
    grid: &SphereGrid<T>,
) -> Result<T> {
    let n = T::from_usize(cfg.len()).unwrap();
    if beta * n <= T::lit(-2.0) {
        return Err(Error::DivergentIntegral {
            exponent: (beta * n).to_f64().unwrap_or(f64::NAN),
            threshold: -2.0,
        });
    }
    if cfg.len() == 1 {
        return Ok(grid.moment_quadrature(beta, &cfg.roots[0]));
    }
    let points = rechart(cfg);
    let half = T::lit(0.5);
    Ok(grid.integrate(|z| {
        let mut acc = T::zero();
        for w in &points {
            acc += half + crate::sphere::dist_finite(z, *w).ln();
        }
        (beta * acc).exp()
    }) / T::PI())
}

/// Zero-packing functional for one configuration: with
/// `f(z) = prod |z-w_j|^beta / ((1+|z|^2)^{N beta/2} prod (1+|w_j|^2)^{beta/2})`,
/// the minimum over real `a` of `(1/pi) int (a f - 1)^2 dA_S` is
/// `1 - m1^2 / m2` at `a = m1 / m2`, where `m1, m2` are the first two
/// moments of `f`.
#[derive(Debug, Clone)]
pub struct RhoResult<T> {
    pub rho: T,
    pub optimal_scale: T,
    pub m1: T,
    pub m2: T,
}

pub fn rho_zero_packing<T: Real>(
    cfg: &RootConfiguration<T>,
    beta: T,
    grid: &SphereGrid<T>,
) -> RhoResult<T> {
    let n = T::from_usize(cfg.len()).unwrap();
    let points = rechart(cfg);
    let half = T::lit(0.5);
    // f = exp(beta (sum_j U(., w_j) - N/2))
    let log_f = |z: C<T>| {
        let mut acc = -n * half;
        for w in &points {
            acc += half + crate::sphere::dist_finite(z, *w).ln();
        }
        beta * acc
    };
    let m1 = grid.integrate(|z| log_f(z).exp()) / T::PI();
    let m2 = grid.integrate(|z| (log_f(z) * T::lit(2.0)).exp()) / T::PI();
    RhoResult { rho: T::one() - m1 * m1 / m2, optimal_scale: m1 / m2, m1, m2 }
}

/// Generalized-spiral points on the half-radius sphere, projected to chart
/// coordinates. Deterministic in `N`; `N = 2` gives an antipodal pair and
/// the covering radius scales like `1 / sqrt(N)`.
pub fn spiral_configuration<T: Real>(n: usize) -> RootConfiguration<T> {
    assert!(n >= 1);
    if n == 1 {
        return RootConfiguration::new(vec![ComplexPoint::new(T::zero(), T::zero())]);
    }
    let mut points = Vec::with_capacity(n);
    let mut theta = T::zero();
    for k in 0..n {
        // height on the unit sphere from -1 to 1
        let h = T::lit(-1.0) + T::lit(2.0) * T::from_usize(k).unwrap() / T::from_usize(n - 1).unwrap();
        let polar_gap = T::one() - h * h;
        if k > 0 && k + 1 < n {
            theta = theta + T::lit(3.6) / (T::from_usize(n).unwrap().sqrt() * polar_gap.sqrt());
            theta = theta.rem(T::TAU());
        }
        let sin_phi = polar_gap.max(T::zero()).sqrt();
        // map the unit sphere onto the radius-1/2 sphere centered at
        // (0, 0, 1/2)
        let p = SpherePoint::new(
            sin_phi * theta.cos() * T::lit(0.5),
            sin_phi * theta.sin() * T::lit(0.5),
            (h + T::one()) * T::lit(0.5),
        );
        points.push(stereo_project(&p));
    }
    RootConfiguration::new(points)
}

/// Largest chordal distance from any sphere point to the configuration,
/// measured on a dense scan grid.
pub fn covering_radius<T: Real>(cfg: &RootConfiguration<T>, scan_per_side: usize) -> T {
    let mut worst = T::zero();
    for i in 0..scan_per_side {
        for j in 0..2 * scan_per_side {
            let u = T::lit(-1.0)
                + T::lit(2.0) * (T::from_usize(i).unwrap() + T::lit(0.5))
                    / T::from_usize(scan_per_side).unwrap();
            let theta = T::TAU() * (T::from_usize(j).unwrap() + T::lit(0.5))
                / T::from_usize(2 * scan_per_side).unwrap();
            let sin_phi = (T::one() - u * u).max(T::zero()).sqrt();
            let q = SpherePoint::new(
                sin_phi * theta.cos() * T::lit(0.5),
                sin_phi * theta.sin() * T::lit(0.5),
                (u + T::one()) * T::lit(0.5),
            );
            let zq = stereo_project(&q);
            let nearest = cfg
                .roots
                .iter()
                .map(|r| sphere_distance(&zq, r))
                .fold(T::infinity(), T::min);
            worst = worst.max(nearest);
        }
    }
    worst
}

/// Options for [`estimate_theta`].
#[derive(Debug, Clone)]
pub struct ThetaOptions {
    pub optim: OptimSpec,
    /// Grid resolution used inside the optimization loop.
    pub optimize_resolution: usize,
    /// Grid resolution for the reported value (escalated to twice this
    /// when two points come within chordal distance 0.02).
    pub report_resolution: usize,
}

impl ThetaOptions {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            optim: OptimSpec::new(crate::optim::default_restarts(n), 400, seed),
            optimize_resolution: 96,
            report_resolution: 256,
        }
    }

    /// Cheaper budget for sweeps where only an upper bound is needed.
    pub fn quick(n: usize, seed: u64) -> Self {
        let mut opts = Self::new(n, seed);
        opts.optim.restarts = 3.min(crate::optim::default_restarts(n));
        opts.optim.max_iters = 200;
        opts
    }
}

/// Estimate the packing number for `N` points at charge `beta > 0` by
/// multi-start simplex descent. The reported value is an upper bound for
/// the infimum, re-evaluated on the report grid at the best configuration
/// found; the universal lower bound 1 still applies.
pub fn estimate_theta<T: Real>(n: usize, beta: T, options: &ThetaOptions) -> Result<PackingResult<T>> {
    assert!(n >= 1);
    if beta <= T::zero() {
        return Err(Error::InvalidArgument("estimate_theta needs beta > 0".into()));
    }
    let obj_grid = SphereGrid::<T>::new(options.optimize_resolution);
    let objective = |pts: &[C<T>]| {
        let cfg = RootConfiguration::from_finite(pts);
        packing_integral(&cfg, beta, &obj_grid).unwrap_or_else(|_| T::infinity())
    };

    let starts = build_starts::<T>(n, options.optim.restarts, options.optim.seed);
    let outcome = minimize_configuration(objective, &starts, &options.optim);

    let best_cfg = RootConfiguration::from_finite(&outcome.best);
    let resolution = if best_cfg.min_separation() < T::lit(0.02) {
        options.report_resolution * 2
    } else {
        options.report_resolution
    };
    let report_grid = SphereGrid::<T>::new(resolution);
    let value = packing_integral(&best_cfg, beta, &report_grid)?;
    Ok(PackingResult {
        value,
        configuration: best_cfg,
        beta,
        iterations: outcome.iterations,
        converged: outcome.converged,
        restart_values: outcome.restart_values,
    })
}

/// Restart seeds: the spiral, jittered spirals, chart projections of a
/// square-lattice patch, and uniform random points on the sphere.
fn build_starts<T: Real>(n: usize, restarts: usize, seed: u64) -> Vec<Vec<C<T>>> {
    use rand::{Rng, SeedableRng};
    let spiral = rechart(&spiral_configuration::<T>(n));
    let mut starts = Vec::with_capacity(restarts);
    starts.push(spiral.clone());
    for r in 1..restarts {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
            seed ^ (r as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
        );
        let start = match r % 3 {
            1 => spiral
                .iter()
                .map(|p| {
                    p + Complex::new(
                        T::lit(rng.gen_range(-0.2..0.2)),
                        T::lit(rng.gen_range(-0.2..0.2)),
                    )
                })
                .collect(),
            2 => {
                // rough square patch in the chart, jittered
                let side = (n as f64).sqrt().ceil() as usize;
                (0..n)
                    .map(|k| {
                        let x = (k % side) as f64 - (side as f64 - 1.0) / 2.0;
                        let y = (k / side) as f64 - (side as f64 - 1.0) / 2.0;
                        Complex::new(
                            T::lit(0.9 * x + rng.gen_range(-0.05..0.05)),
                            T::lit(0.9 * y + rng.gen_range(-0.05..0.05)),
                        )
                    })
                    .collect()
            }
            _ => (0..n)
                .map(|_| {
                    // uniform on the sphere: chordal radius s = sqrt(U)
                    let s: f64 = rng.gen_range(0.0f64..1.0).sqrt();
                    let radius = s / (1.0 - s * s).max(1e-12).sqrt();
                    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
                    Complex::from_polar(T::lit(radius.min(9.0)), T::lit(angle))
                })
                .collect(),
        };
        starts.push(start);
    }
    starts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rel_diff;
    use crate::sphere::sphere_moment;
    use crate::weyl::theta2_condition_form;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn coalesced_points_attain_the_moment_bound() {
        let grid = SphereGrid::<f64>::new(128);
        let w = c(0.4, -0.7);
        let cfg = RootConfiguration::from_finite(&[w, w, w]);
        let v = packing_integral(&cfg, 2.0, &grid).unwrap();
        let truth = sphere_moment(6.0).unwrap();
        assert!(rel_diff(v, truth, 1e-12) < 1e-7, "{v} vs {truth}");
    }

    #[test]
    fn beta_zero_is_unit_and_divergence_is_refused() {
        let grid = SphereGrid::<f64>::new(64);
        let cfg = RootConfiguration::from_finite(&[c(0.3, 0.1), c(-0.5, 0.9)]);
        assert!((packing_integral(&cfg, 0.0, &grid).unwrap() - 1.0).abs() < 1e-12);
        assert!(packing_integral(&cfg, -1.0, &grid).is_err());
    }

    #[test]
    fn antipodal_pair_value_and_monte_carlo() {
        // N = 2, {0, inf}, beta = 2: the integrand is e^2 s^2 (1 - s^2) in
        // the radial variable, giving e^2 / 6 exactly.
        let grid = SphereGrid::<f64>::new(128);
        let cfg = RootConfiguration::new(vec![
            ComplexPoint::new(0.0, 0.0),
            ComplexPoint::Infinity,
        ]);
        let v = packing_integral(&cfg, 2.0, &grid).unwrap();
        let exact = std::f64::consts::E.powi(2) / 6.0;
        assert!(rel_diff(v, exact, 1e-12) < 1e-7, "{v} vs {exact}");

        // Monte Carlo oracle with 10^7 uniform samples
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let samples = 10_000_000usize;
        let mut acc = 0.0f64;
        let mut acc2 = 0.0f64;
        for _ in 0..samples {
            let s2: f64 = rng.gen_range(0.0..1.0);
            let val = std::f64::consts::E.powi(2) * s2 * (1.0 - s2);
            acc += val;
            acc2 += val * val;
        }
        let mean = acc / samples as f64;
        let std_err = ((acc2 / samples as f64 - mean * mean) / samples as f64).sqrt();
        assert!(
            (v - mean).abs() < 3.0 * std_err + 1e-7,
            "MC disagreement: {v} vs {mean} +- {std_err}"
        );
    }

    #[test]
    fn jensen_and_coalescence_bounds_hold() {
        let grid = SphereGrid::<f64>::new(128);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [2usize, 4, 7] {
            let pts: Vec<Complex<f64>> = (0..n)
                .map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                .collect();
            let cfg = RootConfiguration::from_finite(&pts);
            for beta in [0.5, 1.0, 2.0, 4.0] {
                let v = packing_integral(&cfg, beta, &grid).unwrap();
                assert!(v >= 1.0 - 1e-9, "Jensen violated: {v}");
                let cap = sphere_moment(beta * n as f64).unwrap();
                assert!(v <= cap + 1e-9, "coalescence cap violated: {v} vs {cap}");
            }
        }
    }

    #[test]
    fn packing_is_mobius_invariant() {
        let grid = SphereGrid::<f64>::new(160);
        let pts = [c(0.5, 0.2), c(-0.8, 0.4), c(0.1, -1.1)];
        let cfg = RootConfiguration::from_finite(&pts);
        let rotation = c(0.35, -0.2);
        let moved: Vec<Complex<f64>> =
            pts.iter().map(|&z| mobius_to_origin(z, rotation)).collect();
        let cfg2 = RootConfiguration::from_finite(&moved);
        for beta in [2.0, 4.0] {
            let a = packing_integral(&cfg, beta, &grid).unwrap();
            let b = packing_integral(&cfg2, beta, &grid).unwrap();
            assert!(rel_diff(a, b, 1e-12) < 1e-7, "beta {beta}: {a} vs {b}");
        }
    }

    #[test]
    fn beta2_matches_the_condition_number_form() {
        let grid = SphereGrid::<f64>::new(160);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2usize, 5, 9] {
            let pts: Vec<Complex<f64>> = (0..n)
                .map(|_| c(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
                .collect();
            let cfg = RootConfiguration::from_finite(&pts);
            let quad = packing_integral(&cfg, 2.0, &grid).unwrap();
            let form = theta2_condition_form(&cfg).unwrap();
            assert!(rel_diff(quad, form, 1e-12) < 1e-6, "n={n}: {quad} vs {form}");
        }
    }

    #[test]
    fn rho_closed_form_and_improved_holder() {
        let grid = SphereGrid::<f64>::new(128);
        // single point, beta = 2: m1 = 1/2, m2 = 1/3, rho = 1/4, a = 3/2
        let single = RootConfiguration::from_finite(&[c(0.3, -0.4)]);
        let r = rho_zero_packing(&single, 2.0, &grid);
        assert!(rel_diff(r.m1, 0.5, 1e-12) < 1e-8);
        assert!(rel_diff(r.m2, 1.0 / 3.0, 1e-12) < 1e-8);
        assert!(rel_diff(r.rho, 0.25, 1e-12) < 1e-7);
        assert!(rel_diff(r.optimal_scale, 1.5, 1e-12) < 1e-7);

        // positivity and the improved Hoelder step on random configurations
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for n in [2usize, 4] {
            let pts: Vec<Complex<f64>> = (0..n)
                .map(|_| c(rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2)))
                .collect();
            let cfg = RootConfiguration::from_finite(&pts);
            for beta in [1.0, 2.0] {
                let rho = rho_zero_packing(&cfg, beta, &grid).rho;
                assert!(rho > 0.0 && rho < 1.0, "rho out of range: {rho}");
                let t1 = packing_integral(&cfg, beta, &grid).unwrap();
                let t2 = packing_integral(&cfg, 2.0 * beta, &grid).unwrap();
                assert!(
                    t1 * t1 <= (1.0 - rho) * t2 + 1e-9,
                    "improved Hoelder violated: {} vs {}",
                    t1 * t1,
                    (1.0 - rho) * t2
                );
            }
        }
    }

    #[test]
    fn holder_monotonicity_along_beta() {
        let grid = SphereGrid::<f64>::new(128);
        let cfg = spiral_configuration::<f64>(5);
        let betas = [0.5, 1.0, 2.0, 4.0];
        let mut previous = 0.0;
        for (k, &beta) in betas.iter().enumerate() {
            let v = packing_integral(&cfg, beta, &grid).unwrap().powf(1.0 / beta);
            if k > 0 {
                assert!(v >= previous - 1e-9, "monotonicity broke at beta {beta}");
            }
            previous = v;
        }
    }

    #[test]
    fn spiral_shapes() {
        let single = spiral_configuration::<f64>(1);
        assert_eq!(single.len(), 1);

        let pair = spiral_configuration::<f64>(2);
        let d = sphere_distance(&pair.roots[0], &pair.roots[1]);
        assert!((d - 1.0).abs() < 1e-6, "spiral pair distance {d}");

        let hundred = spiral_configuration::<f64>(100);
        let covering = covering_radius(&hundred, 120);
        assert!(covering <= 0.3, "covering radius {covering} exceeds 3/sqrt(100)");
    }

    #[test]
    fn estimate_theta_single_point_is_the_moment() {
        let mut opts = ThetaOptions::new(1, 11);
        opts.optim.restarts = 4;
        opts.optim.max_iters = 60;
        let result = estimate_theta::<f64>(1, 2.0, &opts).unwrap();
        let truth = sphere_moment(2.0).unwrap();
        assert!(rel_diff(result.value, truth, 1e-12) < 1e-9);
        for v in &result.restart_values {
            assert!(rel_diff(*v, truth, 1e-12) < 1e-9, "restart value {v}");
        }
    }

    #[test]
    fn estimate_theta_two_points_find_antipodes() {
        let mut opts = ThetaOptions::new(2, 3);
        opts.optim.max_iters = 300;
        let result = estimate_theta::<f64>(2, 2.0, &opts).unwrap();
        let d = sphere_distance(&result.configuration.roots[0], &result.configuration.roots[1]);
        assert!((d - 1.0).abs() < 1e-4, "optimal pair distance {d}");
        let exact = std::f64::consts::E.powi(2) / 6.0;
        assert!(rel_diff(result.value, exact, 1e-12) < 1e-5, "{}", result.value);
        assert!(result.value >= 1.0 - 1e-9);

        // 1-D oracle: scan the relative distance; no scanned configuration
        // beats the antipodal value
        let grid = SphereGrid::<f64>::new(96);
        for k in 1..20 {
            let t = k as f64 / 2.0;
            let cfg = RootConfiguration::from_finite(&[c(0.0, 0.0), c(t, 0.0)]);
            let v = packing_integral(&cfg, 2.0, &grid).unwrap();
            assert!(v >= exact - 1e-6, "scan point below the antipodal value: {v}");
        }
    }

    #[test]
    fn rechart_moves_infinity_inside() {
        let cfg = RootConfiguration::new(vec![
            ComplexPoint::Infinity,
            ComplexPoint::new(12.0, 0.0),
            ComplexPoint::new(0.0, 0.0),
        ]);
        let pts = rechart(&cfg);
        assert_eq!(pts.len(), 3);
        for p in &pts {
            assert!(
                1.0 / (1.0f64.hypot(p.norm())) >= POLE_MARGIN - 1e-12,
                "recharted point too close to the pole: {p:?}"
            );
        }
        // the integral value is preserved across the rechart
        let grid = SphereGrid::<f64>::new(128);
        let v1 = packing_integral(&cfg, 2.0, &grid).unwrap();
        let finite_cfg = RootConfiguration::from_finite(&pts);
        let v2 = packing_integral(&finite_cfg, 2.0, &grid).unwrap();
        assert!(rel_diff(v1, v2, 1e-12) < 1e-7);
    }
}
