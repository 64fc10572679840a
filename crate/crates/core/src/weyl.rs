//! Weyl (Bombieri) norms of polynomials in coefficient and integral form,
//! the Bombieri product inequality, Shub-Smale condition numbers,
//! logarithmic energy of spherical point sets, and the beta = 2 packing
//! identity that ties them together.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{czero, Real, C};
use crate::sphere::{sphere_distance, ComplexPoint, SphereGrid};

/// Polynomial in the ambient Bombieri space of degree `N`: exactly `N + 1`
/// coefficients (ascending powers, trailing zeros permitted).
#[derive(Debug, Clone)]
pub struct WeylPolynomial<T: Real> {
    degree: usize,
    coeffs: Vec<C<T>>,
}

impl<T: Real> WeylPolynomial<T> {
    pub fn new(degree: usize, coeffs: Vec<C<T>>) -> Result<Self> {
        if coeffs.len() != degree + 1 {
            return Err(Error::InvalidArgument(format!(
                "ambient degree {} needs {} coefficients, got {}",
                degree,
                degree + 1,
                coeffs.len()
            )));
        }
        Ok(Self { degree, coeffs })
    }

    /// Infer the ambient degree from the coefficient count.
    pub fn from_coeffs(coeffs: Vec<C<T>>) -> Self {
        assert!(!coeffs.is_empty());
        Self { degree: coeffs.len() - 1, coeffs }
    }

    /// Constant `1` in ambient degree zero.
    pub fn one() -> Self {
        Self { degree: 0, coeffs: vec![Complex::new(T::one(), T::zero())] }
    }

    /// `(z - a)^n` expanded exactly.
    pub fn power_of_linear(a: C<T>, n: usize) -> Self {
        let roots = vec![a; n];
        poly_from_finite_roots(&roots)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[C<T>] {
        &self.coeffs
    }

    /// Plain Horner evaluation.
    pub fn eval(&self, z: C<T>) -> C<T> {
        let mut acc = czero::<T>();
        for c in self.coeffs.iter().rev() {
            acc = acc * z + *c;
        }
        acc
    }

    /// Derivative coefficients.
    pub fn derivative(&self) -> WeylPolynomial<T> {
        if self.degree == 0 {
            return WeylPolynomial::one();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| *c * T::from_usize(k).unwrap())
            .collect();
        WeylPolynomial { degree: self.degree - 1, coeffs }
    }

    /// Product polynomial in ambient degree `N1 + N2`.
    pub fn product(&self, other: &WeylPolynomial<T>) -> WeylPolynomial<T> {
        let mut coeffs = vec![czero::<T>(); self.degree + other.degree + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j] + *a * *b;
            }
        }
        WeylPolynomial { degree: self.degree + other.degree, coeffs }
    }

    /// `|Q(z)|^2 / (1 + |z|^2)^N`, evaluated through the reversed
    /// polynomial for `|z| > 1` so that nothing overflows on the grid's
    /// near-pole nodes.
    pub fn weighted_modulus_sq(&self, z: C<T>) -> T {
        let n = self.degree as i32;
        if z.norm_sqr() <= T::one() {
            let v = self.eval(z);
            v.norm_sqr() / (T::one() + z.norm_sqr()).powi(n)
        } else {
            // reversed polynomial: Horner in 1/z gives z^{-N} Q(z)
            let inv = Complex::new(T::one(), T::zero()) / z;
            let mut acc = czero::<T>();
            for c in self.coeffs.iter() {
                acc = acc * inv + *c;
            }
            acc.norm_sqr() / (T::one() + inv.norm_sqr()).powi(n)
        }
    }
}

/// Ordered configuration of points on the sphere in chart coordinates; the
/// argument of the packing functionals and the zero set of the monic
/// polynomials.
#[derive(Debug, Clone)]
pub struct RootConfiguration<T: Real> {
    pub roots: Vec<ComplexPoint<T>>,
}

impl<T: Real> RootConfiguration<T> {
    pub fn new(roots: Vec<ComplexPoint<T>>) -> Self {
        assert!(!roots.is_empty(), "a configuration holds at least one point");
        Self { roots }
    }

    pub fn from_finite(roots: &[C<T>]) -> Self {
        Self::new(roots.iter().map(|&z| ComplexPoint::Finite(z)).collect())
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All roots as finite chart values; rejects the point at infinity.
    pub fn finite_roots(&self) -> Result<Vec<C<T>>> {
        self.roots
            .iter()
            .map(|r| r.finite().ok_or(Error::UnsupportedRoot))
            .collect()
    }

    /// Smallest pairwise chordal distance.
    pub fn min_separation(&self) -> T {
        let mut best = T::infinity();
        for (i, a) in self.roots.iter().enumerate() {
            for b in self.roots.iter().skip(i + 1) {
                best = best.min(sphere_distance(a, b));
            }
        }
        best
    }
}

/// Inverse binomial weight `1 / C(n, j)`, exact in integer arithmetic up to
/// n = 50 and through log-factorials beyond (the binomials overflow the
/// 53-bit mantissa above that anyway).
fn inv_binomial<T: Real>(n: usize, j: usize) -> T {
    if n <= 50 {
        let mut value: u128 = 1;
        let jj = j.min(n - j);
        for k in 0..jj {
            // exact at every step: the running product is C(n, k+1)
            value = value * (n - k) as u128 / (k + 1) as u128;
        }
        T::one() / T::from_u128(value).unwrap()
    } else {
        (ln_factorial::<T>(j) + ln_factorial::<T>(n - j) - ln_factorial::<T>(n)).exp()
    }
}

fn ln_factorial<T: Real>(k: usize) -> T {
    let mut acc = T::zero();
    for i in 2..=k {
        acc += T::from_usize(i).unwrap().ln();
    }
    acc
}

/// Squared Weyl norm from the coefficients:
/// `sum_j C(N, j)^{-1} |a_j|^2`.
pub fn weyl_norm_sq<T: Real>(q: &WeylPolynomial<T>) -> T {
    let n = q.degree();
    q.coeffs()
        .iter()
        .enumerate()
        .map(|(j, a)| inv_binomial::<T>(n, j) * a.norm_sqr())
        .fold(T::zero(), |acc, x| acc + x)
}

/// Squared Weyl norm as the spherical integral
/// `(N+1)/pi * int |Q(z)|^2 / (1+|z|^2)^N dA_S(z)`.
///
/// The grid needs at least `2N + 1` angular nodes so the polynomial
/// frequencies do not alias.
pub fn weyl_norm_sq_integral<T: Real>(q: &WeylPolynomial<T>, grid: &SphereGrid<T>) -> Result<T> {
    let needed = 2 * q.degree() + 1;
    if grid.n_angular() < needed {
        return Err(Error::UnderResolvedGrid { needed, actual: grid.n_angular() });
    }
    let n1 = T::from_usize(q.degree() + 1).unwrap();
    Ok(grid.integrate(|z| q.weighted_modulus_sq(z)) * n1 / T::PI())
}

fn poly_from_finite_roots<T: Real>(roots: &[C<T>]) -> WeylPolynomial<T> {
    let mut coeffs = vec![Complex::new(T::one(), T::zero())];
    for &w in roots {
        let mut next = vec![czero::<T>(); coeffs.len() + 1];
        for (k, &c) in coeffs.iter().enumerate() {
            next[k + 1] = next[k + 1] + c;
            next[k] = next[k] - c * w;
        }
        coeffs = next;
    }
    WeylPolynomial { degree: roots.len(), coeffs }
}

/// Monic polynomial with the configuration as its zero set; the point at
/// infinity is rejected (the packing integrals extend there instead).
pub fn poly_from_roots<T: Real>(cfg: &RootConfiguration<T>) -> Result<WeylPolynomial<T>> {
    let roots = cfg.finite_roots()?;
    Ok(poly_from_finite_roots(&roots))
}

/// Outcome of the Bombieri two-sided bound for one factor pair.
#[derive(Debug, Clone)]
pub struct BombieriBounds<T> {
    /// `|Q1 Q2|^2 / (|Q1|^2 |Q2|^2)` in Weyl norms.
    pub ratio: T,
    /// `N1! N2! / N!`.
    pub lower_bound: T,
    /// `ratio - lower_bound` (nonnegative when the inequality holds).
    pub lower_margin: T,
    /// `1 - ratio` (nonnegative by submultiplicativity).
    pub upper_margin: T,
}

/// Evaluate the Bombieri ratio and both bound margins for a factor pair.
pub fn bombieri_bounds<T: Real>(
    q1: &WeylPolynomial<T>,
    q2: &WeylPolynomial<T>,
) -> BombieriBounds<T> {
    let product = q1.product(q2);
    let ratio = weyl_norm_sq(&product) / (weyl_norm_sq(q1) * weyl_norm_sq(q2));
    // N1! N2! / N! = prod_{k=1..N2} k / (N1 + k), stable for any sizes
    let mut lower = T::one();
    for k in 1..=q2.degree() {
        lower = lower * T::from_usize(k).unwrap() / T::from_usize(q1.degree() + k).unwrap();
    }
    BombieriBounds {
        ratio,
        lower_bound: lower,
        lower_margin: ratio - lower,
        upper_margin: T::one() - ratio,
    }
}

/// Tolerance gate for "zeta is a root of P": `|P(zeta)|` against the
/// largest coefficient magnitude. Loose on purpose; condition numbers blow
/// up smoothly near multiple roots, so a documented threshold beats silent
/// misuse.
const ROOT_GATE: f64 = 1e-8;

/// Shub-Smale condition number of `p` at its root `zeta`:
/// `sqrt(N) |p| (1 + |zeta|^2)^{(N-2)/2} / |p'(zeta)|`; infinite at a
/// multiple root.
pub fn condition_number<T: Real>(p: &WeylPolynomial<T>, zeta: C<T>) -> Result<T> {
    let coeff_scale = p
        .coeffs()
        .iter()
        .map(|c| c.norm())
        .fold(T::zero(), |a, b| a.max(b));
    let residual = p.eval(zeta).norm();
    let gate = T::lit(ROOT_GATE) * coeff_scale;
    if residual > gate {
        return Err(Error::NotARoot {
            residual: residual.to_f64().unwrap_or(f64::NAN),
            gate: gate.to_f64().unwrap_or(f64::NAN),
        });
    }
    let n = p.degree();
    let deriv = p.derivative().eval(zeta).norm();
    if deriv == T::zero() {
        return Ok(T::infinity());
    }
    let nf = T::from_usize(n).unwrap();
    let half_exponent = (T::from_usize(n).unwrap() - T::lit(2.0)) * T::lit(0.5);
    let value = nf.sqrt() * weyl_norm_sq(p).sqrt() * (T::one() + zeta.norm_sqr()).powf(half_exponent)
        / deriv;
    Ok(value)
}

/// Logarithmic energy `sum_{j != k} log(1 / |x_j - x_k|)` of the lifted
/// point set; `+inf` as soon as a point repeats.
pub fn log_energy<T: Real>(cfg: &RootConfiguration<T>) -> T {
    let mut acc = T::zero();
    for (i, a) in cfg.roots.iter().enumerate() {
        for b in cfg.roots.iter().skip(i + 1) {
            acc -= sphere_distance(a, b).ln();
        }
    }
    acc * T::lit(2.0)
}

/// The same energy through the chart form
/// `1/2 sum_{j != k} log((1+|w_j|^2)(1+|w_k|^2) / |w_j - w_k|^2)`;
/// finite points only, used as a cross-check of the lifted form.
pub fn log_energy_chart<T: Real>(roots: &[C<T>]) -> T {
    let mut acc = T::zero();
    for (i, a) in roots.iter().enumerate() {
        for b in roots.iter().skip(i + 1) {
            let num = (T::one() + a.norm_sqr()) * (T::one() + b.norm_sqr());
            acc += (num / (a - b).norm_sqr()).ln();
        }
    }
    acc
}

/// The beta = 2 packing integrand expressed through condition numbers and
/// logarithmic energy:
/// `e^N / (N (N+1)) * exp(-(2/N) E_log) * prod_j mu(P, w_j)^{2/N}`.
///
/// Equals the beta = 2 packing integral of the same configuration; the
/// definition-level exponential factor `e^N` is restored here (the
/// condition-number infimum form omits it).
pub fn theta2_condition_form<T: Real>(cfg: &RootConfiguration<T>) -> Result<T> {
    let n = cfg.len();
    let nf = T::from_usize(n).unwrap();
    if cfg.min_separation() < T::lit(1e-15) {
        return Ok(T::infinity());
    }
    let p = poly_from_roots(cfg)?;
    let roots = cfg.finite_roots()?;
    let energy = log_energy(cfg);
    let mut log_mu_sum = T::zero();
    for &w in &roots {
        let mu = condition_number(&p, w)?;
        if mu.is_infinite() {
            return Ok(T::infinity());
        }
        log_mu_sum += mu.ln();
    }
    let two_over_n = T::lit(2.0) / nf;
    let log_value = nf - two_over_n * energy + two_over_n * log_mu_sum
        - (nf * (nf + T::one())).ln();
    Ok(log_value.exp())
}

/// Both sides of the identity
/// `exp(-(2/N) E_log) prod mu^{2/N} = N |P|^2 prod (1+|w_j|^2)^{-1}`,
/// for the cross-check suite.
pub fn condition_energy_identity<T: Real>(cfg: &RootConfiguration<T>) -> Result<(T, T)> {
    let n = cfg.len();
    let nf = T::from_usize(n).unwrap();
    let p = poly_from_roots(cfg)?;
    let roots = cfg.finite_roots()?;
    let energy = log_energy(cfg);
    let mut log_mu_sum = T::zero();
    for &w in &roots {
        log_mu_sum += condition_number(&p, w)?.ln();
    }
    let two_over_n = T::lit(2.0) / nf;
    let lhs = (two_over_n * (log_mu_sum - energy)).exp();
    let mut rhs = nf * weyl_norm_sq(&p);
    for &w in &roots {
        rhs = rhs / (T::one() + w.norm_sqr());
    }
    Ok((lhs, rhs))
}
