//! The acceptance-criteria suite as a library: each criterion runs as a
//! self-contained check with pinned tolerances and reports pass/fail with
//! details, so the CLI `report` command and the acceptance test target
//! share one implementation.

use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::elliptic::Lattice;
use crate::packing::{packing_integral, spiral_configuration};
use crate::pseudo::{
    fiber_phase, fiber_residuals, pi_alpha, pseudo_lbeta_norm, pseudo_lbeta_via_green,
    Pseudopolynomial,
};
use crate::scalar::rel_diff;
use crate::sphere::{sphere_moment, ComplexPoint, SphereGrid};
use crate::torus::{
    compute_a_lambda, refine_lattice, refinement_parameters, torus_packing_integral,
    torus_theta_at_lattice, verify_superposition, TorusGreen, TorusGrid,
};
use crate::weyl::{
    bombieri_bounds, condition_number, poly_from_roots, theta2_condition_form, weyl_norm_sq,
    weyl_norm_sq_integral, RootConfiguration, WeylPolynomial,
};
use crate::xprec::{horner_dd, monic_from_roots_dd, CDd};

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
    pub elapsed_secs: f64,
}

impl CriterionReport {
    /// The one-line pass/fail form used by the test target and the CLI.
    pub fn line(&self) -> String {
        format!(
            "criterion {:2} [{}] {:<28} {} ({:.2}s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.details,
            self.elapsed_secs
        )
    }
}

/// Run a single criterion (1-11).
pub fn run_criterion(id: usize, seed: u64) -> CriterionReport {
    let start = Instant::now();
    let (name, passed, details) = match id {
        1 => criterion_moments(seed),
        2 => criterion_weyl_norms(seed),
        3 => criterion_bombieri(seed),
        4 => criterion_jensen(seed),
        5 => criterion_coalescence(seed),
        6 => criterion_beta2_identity(seed),
        7 => criterion_lattice_machinery(seed),
        8 => criterion_refinement(seed),
        9 => criterion_torus_uniformity(seed),
        10 => criterion_pseudopolynomials(seed),
        11 => criterion_oracle_honesty(seed),
        _ => ("unknown", false, format!("no criterion {id}")),
    };
    let elapsed = start.elapsed().as_secs_f64();
    // runtime budgets are part of the stated criteria
    let (passed, details) = match id {
        1 if elapsed >= 10.0 => (false, format!("{details}; runtime {elapsed:.1}s >= 10s")),
        2 if elapsed >= 30.0 => (false, format!("{details}; runtime {elapsed:.1}s >= 30s")),
        8 if elapsed >= 120.0 => (false, format!("{details}; runtime {elapsed:.1}s >= 120s")),
        _ => (passed, details),
    };
    CriterionReport { id, name, passed, details, elapsed_secs: elapsed }
}

/// Run the full suite.
pub fn run_all(seed: u64) -> Vec<CriterionReport> {
    (1..=11).map(|id| run_criterion(id, seed)).collect()
}

fn criterion_moments(seed: u64) -> (&'static str, bool, String) {
    let grid = SphereGrid::<f64>::new(128);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for &alpha in &[-1.5, -1.0, 0.0, 1.0, 2.0, 5.0, 10.0] {
        let truth = sphere_moment(alpha).unwrap();
        for _ in 0..20 {
            let w = ComplexPoint::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
            let q = grid.moment_quadrature(alpha, &w);
            worst = worst.max(rel_diff(q, truth, 1e-30));
        }
    }
    ("closed-form moments", worst < 1e-7, format!("max rel dev {worst:.2e} (tol 1e-7)"))
}

fn criterion_weyl_norms(seed: u64) -> (&'static str, bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x11);
    let mut worst_exact = 0.0f64;
    for n in 1..=30usize {
        let a = Complex::new(rng.gen_range(-1.5..1.5f64), rng.gen_range(-1.5..1.5));
        let q = WeylPolynomial::power_of_linear(a, n);
        let truth = (1.0 + a.norm_sqr()).powi(n as i32);
        worst_exact = worst_exact.max(rel_diff(weyl_norm_sq(&q), truth, 1e-30));
    }
    let grid = SphereGrid::<f64>::new(160);
    let mut worst_int = 0.0f64;
    for _ in 0..100 {
        let degree = rng.gen_range(1..=20usize);
        let coeffs = (0..=degree)
            .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let q = WeylPolynomial::from_coeffs(coeffs);
        let a = weyl_norm_sq(&q);
        let b = weyl_norm_sq_integral(&q, &grid).unwrap();
        worst_int = worst_int.max(rel_diff(a, b, 1e-30));
    }
    (
        "weyl norm identities",
        worst_exact < 1e-10 && worst_int < 1e-7,
        format!("power-norm dev {worst_exact:.2e} (1e-10), integral dev {worst_int:.2e} (1e-7)"),
    )
}

fn criterion_bombieri(seed: u64) -> (&'static str, bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x22);
    let mut sandwich_ok = true;
    for _ in 0..200 {
        let d1 = rng.gen_range(1..=6usize);
        let d2 = rng.gen_range(1..=6usize);
        let mk = |rng: &mut ChaCha8Rng, d: usize| {
            WeylPolynomial::from_coeffs(
                (0..=d)
                    .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect(),
            )
        };
        let q1 = mk(&mut rng, d1);
        let q2 = mk(&mut rng, d2);
        let b = bombieri_bounds(&q1, &q2);
        sandwich_ok &= b.lower_margin > -1e-12 && b.upper_margin > -1e-12;
    }
    // equality at (z^{N1}, 1), exact
    let mut coeffs = vec![Complex::new(0.0, 0.0); 5];
    coeffs[4] = Complex::new(1.0, 0.0);
    let q1 = WeylPolynomial::new(4, coeffs).unwrap();
    let monomial = bombieri_bounds(&q1, &WeylPolynomial::<f64>::one());
    let exact_ok = monomial.lower_margin.abs() < 1e-15;
    // equality at antipodal concentrated pairs, conj(a) b = -1
    let mut antipodal_dev = 0.0f64;
    for (a, n1, n2) in [
        (Complex::<f64>::new(1.0, 0.0), 2usize, 2usize),
        (Complex::new(0.5, 0.5), 3, 2),
        (Complex::new(-0.3, 1.1), 4, 1),
    ] {
        let b_point = -Complex::new(1.0, 0.0) / a.conj();
        let bb = bombieri_bounds(
            &WeylPolynomial::power_of_linear(a, n1),
            &WeylPolynomial::power_of_linear(b_point, n2),
        );
        antipodal_dev = antipodal_dev.max((bb.ratio - bb.lower_bound).abs());
    }
    (
        "bombieri sandwich/sharpness",
        sandwich_ok && exact_ok && antipodal_dev < 1e-10,
        format!("sandwich {sandwich_ok}, monomial exact {exact_ok}, antipodal dev {antipodal_dev:.2e}"),
    )
}

/// The shared sphere/torus sweep for the two bound criteria: every value
/// is checked against the Jensen floor and the coalescence cap.
fn bounds_sweep(seed: u64) -> (f64, f64, usize) {
    let grid = SphereGrid::<f64>::new(128);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x33);
    let mut min_floor_margin = f64::INFINITY; // value - 1
    let mut min_cap_margin = f64::INFINITY; // cap - value
    let mut count = 0usize;
    for n in [1usize, 2, 4, 8, 16] {
        for &beta in &[0.5, 1.0, 2.0, 4.0] {
            // random, spiral, and near-coalesced configurations
            let random: Vec<Complex<f64>> = (0..n)
                .map(|_| Complex::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                .collect();
            let anchor = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let clustered: Vec<Complex<f64>> = (0..n)
                .map(|_| anchor + Complex::new(rng.gen_range(-0.05..0.05), rng.gen_range(-0.05..0.05)))
                .collect();
            for cfg in [
                RootConfiguration::from_finite(&random),
                spiral_configuration::<f64>(n),
                RootConfiguration::from_finite(&clustered),
            ] {
                let v = packing_integral(&cfg, beta, &grid).unwrap();
                let cap = sphere_moment(beta * n as f64).unwrap();
                min_floor_margin = min_floor_margin.min(v - 1.0);
                min_cap_margin = min_cap_margin.min(cap - v);
                count += 1;
            }
        }
    }
    // torus side
    let green = TorusGreen::new(Lattice::<f64>::square());
    for n in [1usize, 3, 6] {
        for &beta in &[0.5, 1.0, 2.0] {
            let pts: Vec<Complex<f64>> = (0..n)
                .map(|_| Complex::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)))
                .collect();
            let tg = TorusGrid::with_kinks(green.lattice(), &pts, 192);
            let v = torus_packing_integral(&green, &pts, beta, &tg).unwrap();
            let cap = green.moment(beta * n as f64).unwrap();
            min_floor_margin = min_floor_margin.min(v - 1.0);
            min_cap_margin = min_cap_margin.min(cap - v);
            count += 1;
        }
    }
    (min_floor_margin, min_cap_margin, count)
}

fn criterion_jensen(seed: u64) -> (&'static str, bool, String) {
    let (floor_margin, _, count) = bounds_sweep(seed);
    (
        "jensen lower bound",
        floor_margin >= -1e-9,
        format!("min(value - 1) = {floor_margin:.3e} over {count} integrals (floor -1e-9)"),
    )
}

fn criterion_coalescence(seed: u64) -> (&'static str, bool, String) {
    let (_, cap_margin, count) = bounds_sweep(seed);
    (
        "coalescence upper bound",
        cap_margin >= -1e-9,
        format!("min(cap - value) = {cap_margin:.3e} over {count} integrals (floor -1e-9)"),
    )
}

fn criterion_beta2_identity(seed: u64) -> (&'static str, bool, String) {
    let grid = SphereGrid::<f64>::new(160);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x44);
    let mut worst = 0.0f64;
    for _ in 0..30 {
        let n = rng.gen_range(2..=12usize);
        let pts: Vec<Complex<f64>> = (0..n)
            .map(|_| Complex::new(rng.gen_range(-1.8..1.8), rng.gen_range(-1.8..1.8)))
            .collect();
        let cfg = RootConfiguration::from_finite(&pts);
        let quad = packing_integral(&cfg, 2.0, &grid).unwrap();
        let form = theta2_condition_form(&cfg).unwrap();
        worst = worst.max(rel_diff(quad, form, 1e-30));
    }
    (
        "beta=2 condition identity",
        worst < 1e-6,
        format!("max rel dev {worst:.2e} over 30 configurations (tol 1e-6)"),
    )
}

fn test_lattices(seed: u64) -> Vec<Lattice<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x55);
    let mut lattices = vec![Lattice::square(), Lattice::hexagonal()];
    while lattices.len() < 5 {
        let w1 = Complex::new(rng.gen_range(0.4..2.0), rng.gen_range(-1.0..1.0));
        let w2 = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0));
        if let Ok(l) = Lattice::normalize(w1, w2) {
            lattices.push(l);
        }
    }
    lattices
}

fn criterion_lattice_machinery(seed: u64) -> (&'static str, bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x56);
    let mut worst_legendre = 0.0f64;
    let mut worst_b = 0.0f64;
    let mut worst_periodic = 0.0f64;
    for lat in test_lattices(seed) {
        worst_legendre = worst_legendre.max(lat.legendre_residual());
        worst_b = worst_b.max((lat.b() - lat.b_alt()).norm());
        let (w1, w2) = lat.generators();
        for _ in 0..20 {
            let z = Complex::new(rng.gen_range(-0.5..0.5f64), rng.gen_range(-0.5..0.5));
            let f0 = (-z.norm_sqr()).exp() * lat.sigma_star(z).norm();
            for w in [w1, w2] {
                let zs = z + w;
                let f1 = (-zs.norm_sqr()).exp() * lat.sigma_star(zs).norm();
                worst_periodic = worst_periodic.max((f0 - f1).abs() / f0.max(1e-12));
            }
        }
    }
    (
        "lattice machinery",
        worst_legendre < 1e-10 && worst_b < 1e-10 && worst_periodic < 1e-10,
        format!(
            "legendre {worst_legendre:.2e}, b-split {worst_b:.2e}, gauged periodicity {worst_periodic:.2e} (all 1e-10)"
        ),
    )
}

fn criterion_refinement(_seed: u64) -> (&'static str, bool, String) {
    // integer identity up to 10^6
    let mut identity_ok = true;
    for n in 1..=1_000_000usize {
        let (a, b) = refinement_parameters(n);
        if a * a + b != n as i64 {
            identity_ok = false;
            break;
        }
    }
    // coset counts: integer-exact enumeration for every N <= 10^4
    let mut count_ok = true;
    'outer: for n in 1..=10_000usize {
        let (a, _) = refinement_parameters(n);
        let mut seen = std::collections::HashSet::with_capacity(n);
        for k in 0..n as i64 {
            if !seen.insert(((k * a).rem_euclid(n as i64), k.rem_euclid(n as i64))) {
                count_ok = false;
                break 'outer;
            }
        }
        if seen.len() != n {
            count_ok = false;
            break;
        }
    }
    // full floating construction for a sample of sizes
    let square = Lattice::<f64>::square();
    for n in [1usize, 7, 64, 257, 1000, 4096, 10_000] {
        count_ok &= refine_lattice(&square, n).cosets.len() == n;
    }
    // superposition identity on two lattices
    let mut worst_super = 0.0f64;
    for lat in [Lattice::<f64>::square(), Lattice::<f64>::hexagonal()] {
        let green = TorusGreen::new(lat);
        for n in 1..=16usize {
            let r = refine_lattice(green.lattice(), n);
            worst_super = worst_super.max(verify_superposition(&green, &r, 64));
        }
    }
    (
        "sublattice refinement",
        identity_ok && count_ok && worst_super < 1e-7,
        format!(
            "a^2+b=N {identity_ok} (N<=1e6), coset counts {count_ok} (N<=1e4), superposition max {worst_super:.2e} (1e-7)"
        ),
    )
}

fn criterion_torus_uniformity(_seed: u64) -> (&'static str, bool, String) {
    use rayon::prelude::*;
    let betas = [0.5, 1.0, 2.0, 4.0];
    let mut worst_agreement = 0.0f64;
    let mut details = String::new();
    let mut ok = true;
    for lat in [Lattice::<f64>::square(), Lattice::<f64>::hexagonal()] {
        let green = TorusGreen::new(lat);
        // per-N rows: (max over beta of value^{1/beta}, max Green, two-route dev)
        let rows: Vec<(f64, f64, f64)> = (1..=64usize)
            .into_par_iter()
            .map(|n| {
                let eval = crate::torus::LatticeThetaEvaluator::new(&green, n);
                let mut sup_root = 0.0f64;
                let mut agreement = 0.0f64;
                for &beta in &betas {
                    let via = eval.via_renormalized(beta);
                    sup_root = sup_root.max(via.powf(1.0 / beta));
                    if [2usize, 3, 5, 8].contains(&n) {
                        agreement = agreement.max(rel_diff(eval.direct(beta), via, 1e-30));
                    }
                }
                (sup_root, eval.max_green(64), agreement)
            })
            .collect();
        let sup_root = rows.iter().map(|r| r.0).fold(0.0, f64::max);
        let sup_green = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
        worst_agreement = rows.iter().map(|r| r.2).fold(worst_agreement, f64::max);
        // the per-lattice constant of the uniform bound: e^{max Green}
        let constant = sup_green.exp();
        ok &= sup_root <= constant + 1e-6;
        details.push_str(&format!(
            "sup theta^(1/beta) {sup_root:.4} vs e^M {constant:.4}; "
        ));
    }
    ok &= worst_agreement < 1e-6;
    details.push_str(&format!("two-route dev {worst_agreement:.2e} (1e-6)"));
    ("torus uniformity", ok, details)
}

fn criterion_pseudopolynomials(seed: u64) -> (&'static str, bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x66);
    let green = TorusGreen::new(Lattice::<f64>::square());
    let lat = green.lattice().clone();
    let (w1, w2) = lat.generators();

    // pointwise modulus identity
    let mut worst_identity = 0.0f64;
    for _ in 0..50 {
        let alpha = Complex::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6));
        let z = Complex::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6));
        if lat.reduce_point(z - alpha).norm() < 1e-2 {
            continue;
        }
        let beta = rng.gen_range(0.5..4.0);
        let lhs = pi_alpha(&lat, alpha, z).norm().powf(beta);
        let rhs = (beta * green.a_lambda()).exp() * (beta * green.green(z, alpha)).exp();
        worst_identity = worst_identity.max(rel_diff(lhs, rhs, 1e-30));
    }

    // both periodicity laws for degrees up to 8
    let mut worst_law = 0.0f64;
    for n in [1usize, 3, 8] {
        let roots: Vec<Complex<f64>> = (0..n)
            .map(|_| Complex::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
            .collect();
        let p = Pseudopolynomial::monic(lat.clone(), roots.clone());
        let gamma = p.root_sum();
        for _ in 0..8 {
            let z = Complex::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            let base = p.eval(z);
            let scale = base.norm().max(1e-12);
            for (gen, w) in [(0usize, w1), (1usize, w2)] {
                let dev = (p.eval(z + w) - fiber_phase(&lat, gen, n, gamma, z) * base).norm();
                worst_law = worst_law.max(dev / scale);
            }
            // root shift of the first root by w1 + w2
            let mut shifted = roots.clone();
            shifted[0] += w1 + w2;
            let q = Pseudopolynomial::monic(lat.clone(), shifted);
            let sign = crate::pseudo::root_shift_sign(1, 1) as f64;
            let phase = Complex::from_polar(1.0, 2.0 * (roots[0] * (w1 + w2).conj()).im);
            let dev = (q.eval(z) - base * sign * phase).norm();
            worst_law = worst_law.max(dev / scale);
        }
    }

    // mt:3 sandwich with coalesced attainment
    let mut sandwich_ok = true;
    let mut worst_attain = 0.0f64;
    for n in [2usize, 5, 8] {
        let roots: Vec<Complex<f64>> = (0..n)
            .map(|_| Complex::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
            .collect();
        let p = Pseudopolynomial::monic(lat.clone(), roots.clone());
        for beta in [0.5, 2.0] {
            let grid = TorusGrid::with_kinks(&lat, &roots, 192);
            let norm = pseudo_lbeta_norm(&p, beta, &grid);
            let via = pseudo_lbeta_via_green(&p, beta, &green, &grid);
            sandwich_ok &= rel_diff(norm, via, 1e-30) < 1e-8;
            let scale = std::f64::consts::FRAC_PI_2 * ((n as f64) * beta * green.a_lambda()).exp();
            sandwich_ok &= norm >= scale * (1.0 - 1e-9);
            sandwich_ok &= norm <= scale * green.moment(beta * n as f64).unwrap() * (1.0 + 1e-9);
        }
        let alpha = Complex::new(0.3, -0.2);
        let coal = Pseudopolynomial::monic(lat.clone(), vec![alpha; n]);
        let grid = TorusGrid::with_kinks(&lat, &vec![alpha; n], 192);
        let norm = pseudo_lbeta_norm(&coal, 1.0, &grid);
        let cap = std::f64::consts::FRAC_PI_2
            * ((n as f64) * green.a_lambda()).exp()
            * green.moment(n as f64).unwrap();
        worst_attain = worst_attain.max(rel_diff(norm, cap, 1e-30));
    }

    // fiber PDE residual decays at order h^2
    let roots = vec![
        Complex::new(0.3, 0.1),
        Complex::new(-0.2, 0.4),
        Complex::new(0.05, -0.35),
    ];
    let p = Pseudopolynomial::monic(lat.clone(), roots);
    let gamma = p.root_sum();
    let mut decays = true;
    let mut prev = f64::INFINITY;
    for &h in &[1e-3, 5e-4, 2.5e-4] {
        let r = fiber_residuals(&p, gamma, 5, h);
        if prev.is_finite() {
            decays &= r.pde < prev / 3.0;
        }
        prev = r.pde;
    }

    let ok = worst_identity < 1e-9 && worst_law < 1e-10 && sandwich_ok && worst_attain < 1e-6 && decays;
    (
        "pseudopolynomials",
        ok,
        format!(
            "modulus id {worst_identity:.2e} (1e-9), laws {worst_law:.2e} (1e-10), sandwich {sandwich_ok}, attainment {worst_attain:.2e} (1e-6), h^2 decay {decays}"
        ),
    )
}

fn criterion_oracle_honesty(seed: u64) -> (&'static str, bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x77);
    let mut failures: Vec<&str> = Vec::new();

    // 1. Monte Carlo oracle for the antipodal sphere packing value
    {
        let grid = SphereGrid::<f64>::new(128);
        let cfg = RootConfiguration::new(vec![ComplexPoint::new(0.0, 0.0), ComplexPoint::Infinity]);
        let v = packing_integral(&cfg, 2.0, &grid).unwrap();
        let samples = 10_000_000usize;
        let (mut acc, mut acc2) = (0.0f64, 0.0f64);
        for _ in 0..samples {
            // uniform on the sphere: s^2 ~ U(0,1); integrand e^2 s^2 (1-s^2)
            let s2: f64 = rng.gen_range(0.0..1.0);
            let val = std::f64::consts::E.powi(2) * s2 * (1.0 - s2);
            acc += val;
            acc2 += val * val;
        }
        let mean = acc / samples as f64;
        let se = ((acc2 / samples as f64 - mean * mean) / samples as f64).sqrt();
        if (v - mean).abs() >= 3.0 * se + 1e-7 {
            failures.push("sphere packing MC");
        }
    }

    // 2. Monte Carlo oracle for A_Lambda and E(2, Lambda) on the square torus
    {
        let green = TorusGreen::new(Lattice::<f64>::square());
        let (g1, g2) = green.lattice().generators();
        let samples = 10_000_000usize;
        let (mut a_acc, mut a_acc2) = (0.0f64, 0.0f64);
        let (mut e_acc, mut e_acc2) = (0.0f64, 0.0f64);
        for _ in 0..samples {
            let z = g1 * (rng.gen_range(0.0..1.0) - 0.5) + g2 * (rng.gen_range(0.0..1.0) - 0.5);
            let u = green.lattice().log_sigma_star_gauged(z).log_mag;
            a_acc += u;
            a_acc2 += u * u;
            let e = (2.0 * (u - green.a_lambda())).exp();
            e_acc += e;
            e_acc2 += e * e;
        }
        let a_mean = a_acc / samples as f64;
        let a_se = ((a_acc2 / samples as f64 - a_mean * a_mean) / samples as f64).sqrt();
        let a_quad = compute_a_lambda(green.lattice(), 64, Complex::new(0.0, 0.0));
        if (a_quad - a_mean).abs() >= 3.0 * a_se {
            failures.push("A_Lambda MC");
        }
        let e_mean = e_acc / samples as f64;
        let e_se = ((e_acc2 / samples as f64 - e_mean * e_mean) / samples as f64).sqrt();
        let e_quad = green.moment(2.0).unwrap();
        if (e_quad - e_mean).abs() >= 3.0 * e_se {
            failures.push("E(2) MC");
        }
    }

    // 3. extended-precision convolution oracle
    {
        let roots: Vec<Complex<f64>> = (0..8)
            .map(|_| Complex::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
            .collect();
        let p = poly_from_roots(&RootConfiguration::from_finite(&roots)).unwrap();
        let dd = monic_from_roots_dd(&roots.iter().map(|r| (r.re, r.im)).collect::<Vec<_>>());
        let scale: f64 = p.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (a, b) in p.coeffs().iter().zip(dd.iter()) {
            let (bre, bim) = b.value();
            if (a - Complex::new(bre, bim)).norm() >= 1e-10 * scale {
                failures.push("convolution oracle");
                break;
            }
        }
    }

    // 4. extended-precision condition number at a root of z^4 - 1
    {
        let p4 = WeylPolynomial::new(
            4,
            vec![
                Complex::new(-1.0, 0.0),
                Complex::new(0.0, 0.0),
                Complex::new(0.0, 0.0),
                Complex::new(0.0, 0.0),
                Complex::new(1.0, 0.0),
            ],
        )
        .unwrap();
        let mu = condition_number(&p4, Complex::new(0.0, 1.0)).unwrap();
        let deriv = vec![
            CDd::ZERO,
            CDd::ZERO,
            CDd::ZERO,
            CDd::from(4.0, 0.0),
        ];
        let dp = horner_dd(&deriv, CDd::from(0.0, 1.0)).abs();
        let oracle = 2.0 * 2.0f64.sqrt() * 2.0 / dp;
        if rel_diff(mu, oracle, 1e-30) >= 1e-12 {
            failures.push("condition-number oracle");
        }
    }

    // 5. brute-force coset reduction at N = 7
    {
        let lat = Lattice::<f64>::square();
        let r = refine_lattice(&lat, 7);
        let tol = 1e-9 * lat.min_generator_len();
        let mut brute: Vec<Complex<f64>> = Vec::new();
        for i in 0..7i64 {
            for j in 0..7i64 {
                let p = lat.reduce_point(r.omega1n * i as f64 + r.omega2n * j as f64);
                if !brute.iter().any(|&q| lat.reduce_point(p - q).norm() < tol) {
                    brute.push(p);
                }
            }
        }
        if brute.len() != 7
            || !r
                .cosets
                .iter()
                .all(|c| brute.iter().any(|&q| lat.reduce_point(*c - q).norm() < tol))
        {
            failures.push("coset brute force");
        }
    }

    // 6. 1-D grid search oracle for the two-point optimum
    {
        let grid = SphereGrid::<f64>::new(96);
        let antipodal = std::f64::consts::E.powi(2) / 6.0;
        for k in 1..=24 {
            let t = 0.4 * k as f64;
            let cfg = RootConfiguration::from_finite(&[
                Complex::new(0.0, 0.0),
                Complex::new(t, 0.0),
            ]);
            if packing_integral(&cfg, 2.0, &grid).unwrap() < antipodal - 1e-6 {
                failures.push("two-point grid search");
                break;
            }
        }
    }

    // 7. covering-radius scan of the spiral
    {
        let cfg = spiral_configuration::<f64>(100);
        if crate::packing::covering_radius(&cfg, 120) > 0.3 {
            failures.push("spiral covering scan");
        }
    }

    // 8. theta series vs truncated lattice product for sigma
    {
        use rayon::prelude::*;
        let lat = Lattice::<f64>::square();
        let (r1, r2) = {
            let (g1, g2) = lat.generators();
            (g1, g2)
        };
        let radius = 1200.0;
        let max_m = (radius / lat.min_generator_len()).ceil() as i64 + 2;
        let samples: Vec<Complex<f64>> = (0..40)
            .map(|_| {
                Complex::from_polar(rng.gen_range(0.05..0.15), rng.gen_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        let bad = samples
            .par_iter()
            .map(|&z| {
                let mut log_acc = z.ln();
                for m in -max_m..=max_m {
                    for n in 0..=max_m {
                        if n == 0 && m <= 0 {
                            continue;
                        }
                        let w = r1 * m as f64 + r2 * n as f64;
                        if w.norm() > radius {
                            continue;
                        }
                        let u = z / w;
                        let v = u * u;
                        let v2 = v * v;
                        let series = v2
                            * (Complex::new(0.25, 0.0)
                                + v * (1.0 / 6.0)
                                + v2 * 0.125
                                + v2 * v * 0.1);
                        log_acc -= series * 2.0;
                    }
                }
                let product = log_acc.exp();
                let series = lat.sigma(z);
                (product - series).norm() >= 1e-9 * series.norm()
            })
            .any(|x| x);
        if bad {
            failures.push("sigma product oracle");
        }
    }

    let ok = failures.is_empty();
    let details = if ok {
        "all derived-value oracles reproduced their frozen targets".to_string()
    } else {
        format!("failing oracles: {failures:?}")
    };
    ("oracle honesty", ok, details)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_criterion_fails_cleanly() {
        let r = run_criterion(99, 1);
        assert!(!r.passed);
    }

    #[test]
    fn report_line_formats() {
        let r = CriterionReport {
            id: 3,
            name: "demo",
            passed: true,
            details: "ok".into(),
            elapsed_secs: 0.25,
        };
        assert!(r.line().contains("PASS"));
        assert!(r.line().contains("demo"));
    }
}
