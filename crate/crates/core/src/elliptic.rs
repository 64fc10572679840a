//! Lattices normalized to covolume pi/2, the Weierstrass sigma function,
//! half-period zeta values, the modified sigma-star function, and Weyl
//! translates.
//!
//! Sigma is evaluated through a rapidly convergent theta series in the nome
//! of an internally Gauss-reduced basis; the direct lattice product (with
//! the classical convergence factors) survives only as a validation oracle
//! in the tests. Large arguments are never fed to the raw series: callers
//! needing sigma-star away from the fundamental cell go through
//! [`Lattice::log_sigma_star_gauged`], which reduces the argument and
//! accumulates the exact quasi-periodicity factors, so the Gaussian-gauged
//! magnitude `log|sigma*(z)| - |z|^2` comes out bounded.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cone, czero, Real, C};

/// Hard cap on theta-series terms; the reduced nome keeps actual use far
/// below this.
const THETA_TERM_CAP: usize = 64;

/// Lattice with generators normalized so the first one is a positive real,
/// the second has positive imaginary part, and the covolume is pi/2.
#[derive(Debug, Clone)]
pub struct Lattice<T: Real> {
    omega1: T,
    omega2: C<T>,
    lambda1: C<T>,
    lambda2: C<T>,
    b: C<T>,
    theta_truncation: usize,
    // Gauss-reduced basis used for series evaluation, with the normalized
    // generators expressed in it: omega_j = m_j r1 + n_j r2.
    red1: C<T>,
    red2: C<T>,
    tau: C<T>,
    q: C<T>,
    lambda_red1: C<T>,
    theta1_prime0: C<T>,
}

/// Complex logarithm of sigma-star in the Gaussian gauge:
/// `log_mag = log|sigma*(z)| - |z|^2` (doubly periodic and bounded above),
/// `phase = arg sigma*(z)` reduced modulo 2 pi.
#[derive(Debug, Clone, Copy)]
pub struct GaugedLog<T> {
    pub log_mag: T,
    pub phase: T,
}

impl<T: Real> Lattice<T> {
    /// Normalize two independent generators: rotate the plane so the first
    /// generator is a positive real, orient the second upward, and scale
    /// both by a common positive factor to covolume pi/2.
    pub fn normalize(w1: C<T>, w2: C<T>) -> Result<Self> {
        Ok(Self::normalize_with_factor(w1, w2)?.0)
    }

    /// Like [`Lattice::normalize`] but also returns the complex factor `c`
    /// with `Lambda_out = c * Lambda_in`, so callers can map points of the
    /// input plane into the normalized chart.
    pub fn normalize_with_factor(w1: C<T>, w2: C<T>) -> Result<(Self, C<T>)> {
        let cross = (w1.conj() * w2).im;
        if cross.abs() <= T::lit(1e-12) * w1.norm() * w2.norm() || w1.norm() == T::zero() {
            return Err(Error::DegenerateLattice);
        }
        let mut g1 = w1;
        let mut g2 = if cross < T::zero() { -w2 } else { w2 };
        // rotate g1 onto the positive real axis
        let rot = Complex::from_polar(T::one(), -g1.arg());
        g1 = g1 * rot;
        g2 = g2 * rot;
        // scale to covolume pi/2
        let scale = (T::FRAC_PI_2() / (g1.re * g2.im)).sqrt();
        let factor = rot * scale;
        let omega1 = g1.re * scale;
        let omega2 = g2 * scale;

        let (red1, red2, coords) = gauss_reduce(Complex::new(omega1, T::zero()), omega2);
        let tau = red2 / red1;
        let i_pi_tau = Complex::new(-T::PI() * tau.im, T::PI() * tau.re);
        let q = i_pi_tau.exp();

        let (theta1_prime0, theta1_triple0) = theta_scalars(q);
        // lambda of the reduced first generator via the theta derivative
        // ratio at the origin.
        let pi2 = T::PI() * T::PI();
        let lambda_red1 =
            -(theta1_triple0 / theta1_prime0) * Complex::new(pi2 / T::lit(3.0), T::zero()) / red1;
        // lambda of the reduced second generator from zeta at its half
        // period (not from the Legendre relation, which stays available as
        // an independent cross-check).
        let u_half = tau * T::FRAC_PI_2();
        let (theta_u, theta_du) = theta1_and_derivative(q, u_half);
        let lambda_red2 = lambda_red1 / red1 * red2 + (theta_du / theta_u) * T::TAU() / red1;

        let lam = |m: i64, n: i64| {
            lambda_red1 * T::from_i64(m).unwrap() + lambda_red2 * T::from_i64(n).unwrap()
        };
        let lambda1 = lam(coords[0][0], coords[0][1]);
        let lambda2 = lam(coords[1][0], coords[1][1]);
        let b = cone::<T>() - lambda1 / (Complex::new(omega1, T::zero()) * T::lit(2.0));

        Ok((
            Self {
                omega1,
                omega2,
                lambda1,
                lambda2,
                b,
                theta_truncation: THETA_TERM_CAP,
                red1,
                red2,

                tau,
                q,
                lambda_red1,
                theta1_prime0,
            },
            factor,
        ))
    }

    /// Square lattice of covolume pi/2.
    pub fn square() -> Self {
        Self::normalize(cone::<T>(), Complex::new(T::zero(), T::one())).unwrap()
    }

    /// Hexagonal lattice of covolume pi/2.
    pub fn hexagonal() -> Self {
        let third = Complex::from_polar(T::one(), T::PI() / T::lit(3.0));
        Self::normalize(cone::<T>(), third).unwrap()
    }

    pub fn omega1(&self) -> T {
        self.omega1
    }

    pub fn omega2(&self) -> C<T> {
        self.omega2
    }

    /// Both normalized generators as complex numbers.
    pub fn generators(&self) -> (C<T>, C<T>) {
        (Complex::new(self.omega1, T::zero()), self.omega2)
    }

    /// Half-period zeta values `lambda_j = 2 zeta(omega_j / 2)`.
    pub fn half_period_zeta(&self) -> (C<T>, C<T>) {
        (self.lambda1, self.lambda2)
    }

    /// Quadratic gauge coefficient `b = 1 - lambda_1 / (2 omega_1)`.
    pub fn b(&self) -> C<T> {
        self.b
    }

    /// The alternative expression `conj(omega2)/omega2 - lambda2/(2 omega2)`
    /// for the gauge coefficient; agrees with [`Lattice::b`] exactly when
    /// the Legendre relation and the area normalization hold.
    pub fn b_alt(&self) -> C<T> {
        self.omega2.conj() / self.omega2 - self.lambda2 / (self.omega2 * T::lit(2.0))
    }

    /// Residual of the Legendre relation `lambda1 w2 - lambda2 w1 - 2 pi i`.
    pub fn legendre_residual(&self) -> T {
        let (w1, w2) = self.generators();
        (self.lambda1 * w2 - self.lambda2 * w1 - Complex::new(T::zero(), T::TAU())).norm()
    }

    pub fn theta_truncation(&self) -> usize {
        self.theta_truncation
    }

    /// Length of the shortest reduced generator (the lattice minimum).
    pub fn min_generator_len(&self) -> T {
        self.red1.norm().min(self.red2.norm())
    }

    /// Half-period ratio of the internally reduced basis.
    pub fn reduced_tau(&self) -> C<T> {
        self.tau
    }

    /// Decompose `z = zred + m red1 + n red2` with `zred` in the centered
    /// fundamental cell of the reduced basis.
    pub fn reduce(&self, z: C<T>) -> (C<T>, i64, i64) {
        let w = z / self.red1;
        let y = w.im / self.tau.im;
        let x = w.re - y * self.tau.re;
        let m = x.round().to_i64().unwrap_or(0);
        let n = y.round().to_i64().unwrap_or(0);
        let zred = z - self.red1 * T::from_i64(m).unwrap() - self.red2 * T::from_i64(n).unwrap();
        (zred, m, n)
    }

    /// Reduce `z` to the centered fundamental cell.
    pub fn reduce_point(&self, z: C<T>) -> C<T> {
        self.reduce(z).0
    }

    /// Weierstrass sigma via the theta series. Entire, odd, with simple
    /// zeros exactly on the lattice; grows like `exp(|z|^2)`, so keep the
    /// argument within a few cells (production paths reduce first).
    pub fn sigma(&self, z: C<T>) -> C<T> {
        let u = z * T::PI() / self.red1;
        let theta = theta1(self.q, u);
        let quad = self.lambda_red1 * z * z / (self.red1 * T::lit(2.0));
        self.red1 * quad.exp() * theta / (self.theta1_prime0 * T::PI())
    }

    /// Modified sigma: `sigma*(z) = exp(b z^2) sigma(z)`.
    pub fn sigma_star(&self, z: C<T>) -> C<T> {
        (self.b * z * z).exp() * self.sigma(z)
    }

    /// Complex log of sigma-star at a reduced argument (finite cell only).
    fn log_sigma_star_cell(&self, zred: C<T>) -> C<T> {
        let u = zred * T::PI() / self.red1;
        let theta = theta1(self.q, u);
        let quad = (self.lambda_red1 / (self.red1 * T::lit(2.0)) + self.b) * zred * zred;
        quad + theta.ln() + self.red1.ln() - (self.theta1_prime0 * T::PI()).ln()
    }

    /// Gaussian-gauged logarithm of sigma-star, stable for any argument.
    ///
    /// Reduction to the fundamental cell and the quasi-periodicity factors
    /// cancel algebraically against `|z|^2`, so no large exponentials are
    /// ever formed. Returns `log_mag = -inf` on the lattice itself.
    pub fn log_sigma_star_gauged(&self, z: C<T>) -> GaugedLog<T> {
        let (zred, m, n) = self.reduce(z);
        let cell = self.log_sigma_star_cell(zred);
        let omega = self.red1 * T::from_i64(m).unwrap() + self.red2 * T::from_i64(n).unwrap();
        let cross = (omega.conj() * zred).im * T::lit(2.0);
        let parity = ((m + n + m * n).rem_euclid(2)) as i32;
        let phase = cell.im + cross + T::PI() * T::from_i32(parity).unwrap();
        let phase = phase.rem(T::TAU());
        GaugedLog { log_mag: cell.re - zred.norm_sqr(), phase }
    }
}

/// Lagrange-Gauss reduction of a positively oriented basis. Returns the
/// reduced pair (shortest first, positively oriented) and the integer
/// coordinates of the *input* generators in the reduced basis.
fn gauss_reduce<T: Real>(g1: C<T>, g2: C<T>) -> (C<T>, C<T>, [[i64; 2]; 2]) {
    let mut r1 = g1;
    let mut r2 = g2;
    // rows express r1, r2 in the input basis
    let mut rows = [[1i64, 0i64], [0i64, 1i64]];
    for _ in 0..64 {
        if r1.norm_sqr() > r2.norm_sqr() {
            std::mem::swap(&mut r1, &mut r2);
            rows.swap(0, 1);
        }
        let k = ((r2.re * r1.re + r2.im * r1.im) / r1.norm_sqr()).round();
        let ki = k.to_i64().unwrap_or(0);
        if ki == 0 {
            break;
        }
        r2 = r2 - r1 * k;
        rows[1][0] -= ki * rows[0][0];
        rows[1][1] -= ki * rows[0][1];
    }
    if (r1.conj() * r2).im < T::zero() {
        r2 = -r2;
        rows[1][0] = -rows[1][0];
        rows[1][1] = -rows[1][1];
    }
    // invert the unimodular row matrix to express the input generators in
    // the reduced basis
    let det = rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0];
    debug_assert_eq!(det.abs(), 1);
    let inv = [
        [rows[1][1] * det, -rows[0][1] * det],
        [-rows[1][0] * det, rows[0][0] * det],
    ];
    (r1, r2, inv)
}

/// theta_1(u | q) by the alternating sine series.
fn theta1<T: Real>(q: C<T>, u: C<T>) -> C<T> {
    let (value, _) = theta1_and_derivative(q, u);
    value
}

/// theta_1 and its u-derivative in a single pass.
fn theta1_and_derivative<T: Real>(q: C<T>, u: C<T>) -> (C<T>, C<T>) {
    let iu = Complex::new(-u.im, u.re);
    let e = iu.exp();
    let e2 = e * e;
    let inv_e = cone::<T>() / e;
    let inv_e2 = inv_e * inv_e;
    // q^{1/4} ... q^{(n+1/2)^2} iterated through q^{2(n+1)} steps
    let q4 = (q.ln() * T::lit(0.25)).exp();
    let q2 = q * q;

    let mut coeff = q4;
    let mut qstep = q2;
    let mut s_pos = e;
    let mut s_neg = inv_e;
    let mut sign = T::one();
    let mut value = czero::<T>();
    let mut deriv = czero::<T>();
    let two_i = Complex::new(T::zero(), T::lit(2.0));
    let mut small_runs = 0;
    for n in 0..THETA_TERM_CAP {
        let sin_term = (s_pos - s_neg) / two_i;
        let cos_term = (s_pos + s_neg) * T::lit(0.5);
        let kf = T::from_usize(2 * n + 1).unwrap();
        value = value + coeff * sin_term * sign;
        deriv = deriv + coeff * cos_term * (sign * kf);
        let tail = coeff.norm() * (s_pos.norm() + s_neg.norm());
        if tail < T::eps() * value.norm().max(T::eps()) {
            small_runs += 1;
            if small_runs >= 2 {
                break;
            }
        } else {
            small_runs = 0;
        }
        coeff = coeff * qstep;
        qstep = qstep * q2;
        s_pos = s_pos * e2;
        s_neg = s_neg * inv_e2;
        sign = -sign;
    }
    (value * T::lit(2.0), deriv * T::lit(2.0))
}

/// theta_1'(0) and theta_1'''(0).
fn theta_scalars<T: Real>(q: C<T>) -> (C<T>, C<T>) {
    let q4 = (q.ln() * T::lit(0.25)).exp();
    let q2 = q * q;
    let mut coeff = q4;
    let mut qstep = q2;
    let mut sign = T::one();
    let mut d1 = czero::<T>();
    let mut d3 = czero::<T>();
    for n in 0..THETA_TERM_CAP {
        let k = T::from_usize(2 * n + 1).unwrap();
        d1 = d1 + coeff * (sign * k);
        d3 = d3 + coeff * (sign * k * k * k);
        if coeff.norm() * k * k * k < T::eps() * d1.norm() {
            break;
        }
        coeff = coeff * qstep;
        qstep = qstep * q2;
        sign = -sign;
    }
    (d1 * T::lit(2.0), d3 * -T::lit(2.0))
}

/// Weyl translate: `(T_alpha f)(z) = exp(-2 conj(alpha) z - |alpha|^2) f(z + alpha)`.
pub fn weyl_translate<T, F>(alpha: C<T>, f: F, z: C<T>) -> C<T>
where
    T: Real,
    F: Fn(C<T>) -> C<T>,
{
    let exponent = -alpha.conj() * z * T::lit(2.0) - Complex::new(alpha.norm_sqr(), T::zero());
    exponent.exp() * f(z + alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rel_diff;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_lattices() -> Vec<Lattice<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut out = vec![Lattice::square(), Lattice::hexagonal()];
        for _ in 0..3 {
            let w1 = Complex::new(rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0));
            let w2 = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.6..2.0));
            if let Ok(l) = Lattice::normalize(w1, w2) {
                out.push(l);
            }
        }
        out
    }

    #[test]
    fn normalization_examples() {
        let sq = Lattice::<f64>::square();
        let target = (std::f64::consts::PI / 2.0).sqrt();
        assert!((sq.omega1() - target).abs() < 1e-14);
        assert!((sq.omega2() - Complex::new(0.0, target)).norm() < 1e-14);

        // (i, -1) is the same square lattice after rotation and orientation
        let rot = Lattice::<f64>::normalize(Complex::new(0.0, 1.0), Complex::new(-1.0, 0.0))
            .unwrap();
        assert!((rot.omega1() - target).abs() < 1e-12);
        assert!((rot.omega2() - Complex::new(0.0, target)).norm() < 1e-12);

        let hex = Lattice::<f64>::hexagonal();
        assert!((hex.omega1() * hex.omega2().im - std::f64::consts::FRAC_PI_2).abs() < 1e-12);

        assert!(Lattice::<f64>::normalize(
            Complex::new(1.0, 1.0),
            Complex::new(-2.0, -2.0)
        )
        .is_err());
    }

    #[test]
    fn lattice_invariants_hold_for_all_test_lattices() {
        for (k, lat) in random_lattices().iter().enumerate() {
            assert!(lat.omega1() > 0.0, "lattice {k}");
            assert!(lat.omega2().im > 0.0, "lattice {k}");
            let area = lat.omega1() * lat.omega2().im;
            assert!(
                (area - std::f64::consts::FRAC_PI_2).abs() < 1e-12,
                "lattice {k}: area {area}"
            );
            assert!(lat.legendre_residual() < 1e-10, "lattice {k}: {}", lat.legendre_residual());
            assert!(
                (lat.b() - lat.b_alt()).norm() < 1e-10,
                "lattice {k}: b mismatch {:?} vs {:?}",
                lat.b(),
                lat.b_alt()
            );
        }
    }

    #[test]
    fn square_lattice_symmetries() {
        let sq = Lattice::<f64>::square();
        let (l1, l2) = sq.half_period_zeta();
        assert!(l1.im.abs() < 1e-12, "lambda1 should be real on the square lattice");
        // four-fold symmetry: zeta(iz) = -i zeta(z)
        assert!((l2 - Complex::new(0.0, -1.0) * l1).norm() < 1e-10);
        assert!(sq.b().norm() < 1e-12, "square-lattice gauge coefficient vanishes");
    }

    #[test]
    fn sigma_is_odd_and_normalized_at_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for lat in random_lattices() {
            let z = Complex::new(1e-6, 0.0);
            let ratio = lat.sigma(z) / z;
            assert!((ratio - Complex::new(1.0, 0.0)).norm() < 1e-9);
            for _ in 0..20 {
                let z = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                assert!((lat.sigma(-z) + lat.sigma(z)).norm() <= 1e-12 * lat.sigma(z).norm().max(1e-30));
            }
        }
    }

    #[test]
    fn sigma_quasi_periodicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for lat in random_lattices() {
            let (w1, w2) = lat.generators();
            let (l1, l2) = lat.half_period_zeta();
            for _ in 0..10 {
                let z = Complex::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6));
                for (w, l) in [(w1, l1), (w2, l2)] {
                    let lhs = lat.sigma(z + w);
                    let rhs = -lat.sigma(z) * (l * (z + w * 0.5)).exp();
                    assert!(
                        (lhs - rhs).norm() < 1e-10 * lhs.norm().max(1e-12),
                        "sigma period law failed: {lhs:?} vs {rhs:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn sigma_vanishes_on_the_lattice_block() {
        // |sigma| at a lattice point p evaluated from the rounded f64
        // argument cannot drop below eps * |z - p| * scale(p), where
        // scale(p) = e^{Re(lambda(p) p / 2)} is the intrinsic growth of
        // sigma. The flat 1e-8 gate applies wherever the scale allows it;
        // the far corners get the conditioning-aware gate instead.
        for lat in [Lattice::<f64>::square(), Lattice::<f64>::hexagonal()] {
            let (w1, w2) = lat.generators();
            let (l1, l2) = lat.half_period_zeta();
            for m in -2..=2i32 {
                for n in -2..=2i32 {
                    let p = w1 * m as f64 + w2 * n as f64;
                    if m == 0 && n == 0 {
                        assert_eq!(lat.sigma(p).norm(), 0.0);
                        continue;
                    }
                    let lam = l1 * m as f64 + l2 * n as f64;
                    let scale = (lam * p * 0.5).re.exp();
                    let gate = 1e-8f64.max(1e-12 * scale);
                    assert!(
                        lat.sigma(p).norm() < gate,
                        "sigma({m},{n}) = {:?}, gate {gate:.3e}",
                        lat.sigma(p)
                    );
                    // bounded below at the cell midpoints between zeros
                    let mid = p + (w1 + w2) * 0.5;
                    assert!(lat.sigma(mid).norm() > 1e-3);
                }
            }
        }
    }

    #[test]
    fn sigma_star_normalization_and_periodicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for lat in random_lattices() {
            // sigma*(0) = 0, sigma*'(0) = 1
            assert_eq!(lat.sigma_star(Complex::new(0.0, 0.0)).norm(), 0.0);
            let h = 1e-6;
            let d = (lat.sigma_star(Complex::new(h, 0.0)) - lat.sigma_star(Complex::new(-h, 0.0)))
                / (2.0 * h);
            assert!((d - Complex::new(1.0, 0.0)).norm() < 1e-9);

            let (w1, w2) = lat.generators();
            for _ in 0..10 {
                let z = Complex::new(rng.gen_range(-0.5..0.5f64), rng.gen_range(-0.5..0.5));
                for w in [w1, w2] {
                    // e^{-|z|^2} |sigma*| is lattice-periodic
                    let f0 = (-z.norm_sqr()).exp() * lat.sigma_star(z).norm();
                    let f1 = (-(z + w).norm_sqr()).exp() * lat.sigma_star(z + w).norm();
                    assert!(
                        (f0 - f1).abs() < 1e-10 * f0.max(1e-12),
                        "gauged modulus not periodic: {f0} vs {f1}"
                    );
                    // sigma*(z) = -exp(-2 conj(w) z - |w|^2) sigma*(z + w)
                    let lhs = lat.sigma_star(z);
                    let rhs = -((w.conj() * z * -2.0
                        - Complex::new(w.norm_sqr(), 0.0))
                    .exp())
                        * lat.sigma_star(z + w);
                    assert!(
                        (lhs - rhs).norm() < 1e-10 * lhs.norm().max(1e-12),
                        "sigma* period law failed"
                    );
                }
            }
        }
    }

    #[test]
    fn gauged_log_matches_direct_evaluation_far_out() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for lat in random_lattices() {
            let (w1, w2) = lat.generators();
            for _ in 0..20 {
                let z = Complex::new(rng.gen_range(-0.45..0.45), rng.gen_range(-0.45..0.45));
                let direct = lat.sigma_star(z).norm().ln() - z.norm_sqr();
                let gauged = lat.log_sigma_star_gauged(z).log_mag;
                assert!((direct - gauged).abs() < 1e-10);
                // shifted by a couple of cells the gauged value is unchanged
                let far = z + w1 * 2.0 - w2 * 3.0;
                let shifted = lat.log_sigma_star_gauged(far).log_mag;
                assert!((shifted - gauged).abs() < 1e-9, "{shifted} vs {gauged}");
            }
        }
    }

    #[test]
    fn gauged_phase_matches_direct_sigma_star() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for lat in random_lattices() {
            let (w1, w2) = lat.generators();
            for _ in 0..10 {
                let z = Complex::new(rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4));
                let shift = w1 * rng.gen_range(-2i64..=2) as f64 + w2 * rng.gen_range(-2i64..=2) as f64;
                let g = lat.log_sigma_star_gauged(z + shift);
                let direct = lat.sigma_star(z + shift);
                let reconstructed = Complex::from_polar((g.log_mag + (z + shift).norm_sqr()).exp(), g.phase);
                assert!(
                    (reconstructed - direct).norm() < 1e-8 * direct.norm().max(1e-12),
                    "phase reconstruction failed: {reconstructed:?} vs {direct:?}"
                );
            }
        }
    }

    #[test]
    fn weyl_translate_identity_and_commutation() {
        let lat = Lattice::<f64>::square();
        let f = |z: Complex<f64>| (z * Complex::new(0.3, 0.1)).exp() + z * z;
        let z = Complex::new(0.4, -0.2);
        // T_0 f = f
        let t0 = weyl_translate(Complex::new(0.0, 0.0), f, z);
        assert!((t0 - f(z)).norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..10 {
            let a = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let ap = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            // T_{a'} T_a f = exp(-2i Im(conj(a) a')) T_{a + a'} f
            let lhs = weyl_translate(ap, |v| weyl_translate(a, f, v), z);
            let phase = Complex::new(0.0, -2.0 * (a.conj() * ap).im).exp();
            let rhs = phase * weyl_translate(a + ap, f, z);
            assert!((lhs - rhs).norm() < 1e-10 * rhs.norm().max(1e-12));
        }
        let _ = lat;
    }

    #[test]
    fn weyl_translate_is_unitary_on_the_gaussian_pairing() {
        // quadrature of |T_a f|^2 e^{-2|z|^2} over a large disc, for f = 1
        // and f = z; compare against the untranslated integral.
        let (xs, ws) = crate::quad::gauss_legendre_01::<f64>(160);
        let radius = 7.0;
        let n_theta = 256;
        let dtheta = std::f64::consts::TAU / n_theta as f64;
        let alpha = Complex::new(0.6, -0.35);
        for flavor in 0..2 {
            let f = |z: Complex<f64>| if flavor == 0 { Complex::new(1.0, 0.0) } else { z };
            let mut plain = 0.0;
            let mut translated = 0.0;
            for (x, w) in xs.iter().zip(ws.iter()) {
                let r = radius * x;
                for k in 0..n_theta {
                    let theta = dtheta * (k as f64 + 0.5);
                    let z = Complex::from_polar(r, theta);
                    let weight = w * radius * r * dtheta * (-2.0 * z.norm_sqr()).exp();
                    plain += f(z).norm_sqr() * weight;
                    translated += weyl_translate(alpha, f, z).norm_sqr() * weight;
                }
            }
            assert!(
                rel_diff(plain, translated, 1e-12) < 1e-6,
                "unitarity violated: {plain} vs {translated}"
            );
        }
    }

    #[test]
    fn theta_series_agrees_with_truncated_lattice_product() {
        // The classical product with convergence factors, summed in log form
        // over the symmetric pairs so odd-order terms cancel exactly; the
        // remaining quartic tail at radius R bounds the error by
        // |z|^4 * pi / (covol R^2), well under 1e-9 for |z| <= 0.2, R = 2000.
        use rayon::prelude::*;
        let lat = Lattice::<f64>::square();
        let (r1, r2) = (lat.red1, lat.red2);
        let radius = 2000.0;
        let max_m = (radius / lat.min_generator_len()).ceil() as i64 + 2;
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let samples: Vec<Complex<f64>> = (0..100)
            .map(|_| Complex::from_polar(rng.gen_range(0.05..0.2), rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        let checks: Vec<(Complex<f64>, Complex<f64>)> = samples
            .par_iter()
            .map(|&z| {
                let mut log_acc = z.ln();
                for m in -max_m..=max_m {
                    for n in 0..=max_m {
                        if n == 0 && m <= 0 {
                            continue; // half lattice; pairs handled together
                        }
                        let w = r1 * m as f64 + r2 * n as f64;
                        if w.norm() > radius {
                            continue;
                        }
                        let u = z / w;
                        // log[(1-u)e^{u+u^2/2}] + log[(1+u)e^{-u+u^2/2}]
                        // = -2(u^4/4 + u^6/6 + u^8/8 + ...)
                        let v = u * u;
                        let v2 = v * v;
                        let series = v2
                            * (Complex::new(0.25, 0.0)
                                + v * (1.0 / 6.0)
                                + v2 * 0.125
                                + v2 * v * 0.1
                                + v2 * v2 * (1.0 / 12.0));
                        log_acc -= series * 2.0;
                    }
                }
                (log_acc.exp(), lat.sigma(z))
            })
            .collect();
        for (product, series) in checks {
            assert!(
                (product - series).norm() < 1e-9 * series.norm(),
                "sigma product vs series: {product:?} vs {series:?}"
            );
        }
    }
}
