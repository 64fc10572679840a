//! Toroidal pseudopolynomials: first-degree factors, products with their
//! phase-factor periodicity laws, L^beta norms, and the fiber
//! characterization residuals.
//!
//! A first-degree factor has modulus `e^{A} exp(U(z, alpha))`, so products
//! are evaluated in (log-magnitude, phase) form throughout: magnitudes sum
//! in log space and phases accumulate modulo 2 pi, which keeps degree-N
//! products stable for any N.

use num_complex::Complex;

use crate::elliptic::Lattice;
use crate::scalar::{Real, C};
use crate::torus::{TorusGreen, TorusGrid};

/// Complex value in log form.
#[derive(Debug, Clone, Copy)]
pub struct LogComplex<T> {
    pub log_mag: T,
    pub phase: T,
}

impl<T: Real> LogComplex<T> {
    pub fn value(self) -> C<T> {
        if self.log_mag == T::neg_infinity() {
            return Complex::new(T::zero(), T::zero());
        }
        Complex::from_polar(self.log_mag.exp(), self.phase)
    }
}

/// Monic first-degree toroidal pseudopolynomial
/// `pi_alpha(z) = e^{2i Im(conj(alpha) z)} e^{-|z - alpha|^2} sigma*(z - alpha)`,
/// in log form.
pub fn log_pi_alpha<T: Real>(lattice: &Lattice<T>, alpha: C<T>, z: C<T>) -> LogComplex<T> {
    let gauged = lattice.log_sigma_star_gauged(z - alpha);
    let twist = T::lit(2.0) * (alpha.conj() * z).im;
    LogComplex { log_mag: gauged.log_mag, phase: (gauged.phase + twist).rem(T::TAU()) }
}

/// The factor as a complex number.
pub fn pi_alpha<T: Real>(lattice: &Lattice<T>, alpha: C<T>, z: C<T>) -> C<T> {
    log_pi_alpha(lattice, alpha, z).value()
}

/// Pseudopolynomial `lambda * prod_j pi_{alpha_j}`.
#[derive(Debug, Clone)]
pub struct Pseudopolynomial<T: Real> {
    lattice: Lattice<T>,
    roots: Vec<C<T>>,
    leading: C<T>,
}

impl<T: Real> Pseudopolynomial<T> {
    pub fn monic(lattice: Lattice<T>, roots: Vec<C<T>>) -> Self {
        assert!(!roots.is_empty(), "degree must be at least one");
        Self { lattice, roots, leading: Complex::new(T::one(), T::zero()) }
    }

    pub fn with_leading(lattice: Lattice<T>, roots: Vec<C<T>>, leading: C<T>) -> Self {
        assert!(!roots.is_empty(), "degree must be at least one");
        Self { lattice, roots, leading }
    }

    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    pub fn roots(&self) -> &[C<T>] {
        &self.roots
    }

    pub fn leading(&self) -> C<T> {
        self.leading
    }

    pub fn lattice(&self) -> &Lattice<T> {
        &self.lattice
    }

    /// Sum of the roots; the fiber parameter modulo the lattice.
    pub fn root_sum(&self) -> C<T> {
        self.roots
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    /// Evaluation in log form: log-magnitudes of the factors add, phases
    /// accumulate mod 2 pi. Underflow-free at any degree.
    pub fn eval_log(&self, z: C<T>) -> LogComplex<T> {
        let mut log_mag = self.leading.norm().ln();
        let mut phase = if self.leading.norm() == T::zero() {
            T::zero()
        } else {
            self.leading.arg()
        };
        for &alpha in &self.roots {
            let f = log_pi_alpha(&self.lattice, alpha, z);
            log_mag += f.log_mag;
            phase = (phase + f.phase).rem(T::TAU());
        }
        LogComplex { log_mag, phase }
    }

    /// Plain complex evaluation (may flush to zero for extreme degrees;
    /// the identities are all testable in log form).
    pub fn eval(&self, z: C<T>) -> C<T> {
        self.eval_log(z).value()
    }
}

/// Quasi-period sign of a lattice translate `k1 w1 + k2 w2` acting on the
/// root of a factor: `(-1)^{k1 + k2 + k1 k2}`, the theta-characteristic
/// cocycle (+1 exactly when the translate lies in the doubled lattice).
pub fn root_shift_sign(k1: i64, k2: i64) -> i64 {
    if (k1 + k2 + k1 * k2).rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// The z-shift phase factor of a degree-N pseudopolynomial with root sum
/// `gamma`: `chi_j = (-1)^N e^{2i Im[conj(w_j)(N z - 2 gamma)]}`.
pub fn fiber_phase<T: Real>(
    lattice: &Lattice<T>,
    generator: usize,
    n: usize,
    gamma: C<T>,
    z: C<T>,
) -> C<T> {
    let (w1, w2) = lattice.generators();
    let w = if generator == 0 { w1 } else { w2 };
    let nf = T::from_usize(n).unwrap();
    let arg = (w.conj() * (z * nf - gamma * T::lit(2.0))).im * T::lit(2.0);
    let sign = if n % 2 == 0 { T::one() } else { -T::one() };
    Complex::from_polar(T::one(), arg) * sign
}

/// L^beta norm of the pseudopolynomial, reported as the beta-th power
/// integral `int |P|^beta dA` over the fundamental cell.
pub fn pseudo_lbeta_norm<T: Real>(p: &Pseudopolynomial<T>, beta: T, grid: &TorusGrid<T>) -> T {
    assert!(beta > T::zero(), "L^beta norms need beta > 0");
    grid.integrate(|z| (beta * p.eval_log(z).log_mag).exp())
}

/// The same norm through the Green-function identity
/// `|P|^beta = |lambda|^beta e^{N beta A} exp(beta sum_j U(z, alpha_j))`;
/// the two routes must agree, which pins the normalization bookkeeping.
pub fn pseudo_lbeta_via_green<T: Real>(
    p: &Pseudopolynomial<T>,
    beta: T,
    green: &TorusGreen<T>,
    grid: &TorusGrid<T>,
) -> T {
    let n = T::from_usize(p.degree()).unwrap();
    let prefactor = p.leading().norm().powf(beta) * (n * beta * green.a_lambda()).exp();
    prefactor
        * grid.integrate(|z| {
            let mut acc = T::zero();
            for &alpha in p.roots() {
                acc += green.green(z, alpha);
            }
            (beta * acc).exp()
        })
}

/// Residuals of the fiber characterization at the parameter `gamma`.
#[derive(Debug, Clone)]
pub struct FiberResiduals<T> {
    /// Max over the test grid of `|dbar F + N z F|` (centered differences
    /// with step `h`, truncation O(h^2)).
    pub pde: T,
    /// Max over the grid and both generators of
    /// `|F(z + w_j) - chi_j(gamma) F(z)|`.
    pub periodicity: T,
}

/// Evaluate both residuals on an `m x m` grid over the fundamental cell.
pub fn fiber_residuals<T: Real>(
    p: &Pseudopolynomial<T>,
    gamma: C<T>,
    grid_per_side: usize,
    h: T,
) -> FiberResiduals<T> {
    let (w1, w2) = p.lattice().generators();
    let n = p.degree();
    let nf = T::from_usize(n).unwrap();
    let f = |z: C<T>| p.eval(z);
    let mut pde = T::zero();
    let mut periodicity = T::zero();
    for i in 0..grid_per_side {
        for j in 0..grid_per_side {
            let s = (T::from_usize(i).unwrap() + T::lit(0.31)) / T::from_usize(grid_per_side).unwrap()
                - T::lit(0.5);
            let t = (T::from_usize(j).unwrap() + T::lit(0.57)) / T::from_usize(grid_per_side).unwrap()
                - T::lit(0.5);
            let z = w1 * s + w2 * t;
            // dbar = (d/dx + i d/dy) / 2 by centered differences
            let fx = (f(z + Complex::new(h, T::zero())) - f(z - Complex::new(h, T::zero())))
                / (h * T::lit(2.0));
            let fy = (f(z + Complex::new(T::zero(), h)) - f(z - Complex::new(T::zero(), h)))
                / (h * T::lit(2.0));
            let dbar = (fx + Complex::new(T::zero(), T::one()) * fy) * T::lit(0.5);
            let residual = (dbar + z * f(z) * nf).norm();
            pde = pde.max(residual);
            for (gen, w) in [(0usize, w1), (1usize, w2)] {
                let lhs = f(z + w);
                let rhs = fiber_phase(p.lattice(), gen, n, gamma, z) * f(z);
                periodicity = periodicity.max((lhs - rhs).norm());
            }
        }
    }
    FiberResiduals { pde, periodicity }
}
