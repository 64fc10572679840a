//! Toroidal unipolar Green function, its normalization constant, exponential
//! moments, packing integrals on the torus, and the index-N sublattice
//! refinement with its renormalized form.
//!
//! The Green function of a covolume-pi/2 lattice is
//! `U(z, w) = log|sigma*(z - w)| - |z - w|^2 - A`, where the constant `A`
//! makes the torus average vanish. Everything is evaluated through the
//! gauged sigma-star logarithm, so arguments anywhere in the plane are fine.

use num_complex::Complex;

use crate::elliptic::Lattice;
use crate::error::{Error, Result};
use crate::quad::{
    apply_rule, chunk_sum, gauss_legendre_01, polar_parallelogram_nodes, polar_quad_nodes,
    tensor_parallelogram_nodes, Node,
};
use crate::scalar::{Real, C};

/// Exponent of the polynomial bump `(1 - rho^2)^BUMP_POWER` used to blend
/// singular discs into the tensor background. The disc side is polynomial
/// and integrated exactly; the tensor side sees a C^{BUMP_POWER-1} seam at
/// the disc boundary, so the order sets how fast the seam error vanishes.
const BUMP_POWER: i32 = 12;

/// Radial nodes of a bump disc; 40 Gauss points integrate the graded bump
/// polynomial (degree 6 * BUMP_POWER + 5) exactly.
const DISC_RADIAL: usize = 40;
const DISC_ANGULAR: usize = 32;

/// Green function of a torus, with the mean-zero constant precomputed.
#[derive(Debug, Clone)]
pub struct TorusGreen<T: Real> {
    lattice: Lattice<T>,
    a_lambda: T,
    resolution: usize,
}

impl<T: Real> TorusGreen<T> {
    /// Build with the default quadrature resolution.
    pub fn new(lattice: Lattice<T>) -> Self {
        Self::with_resolution(lattice, 48)
    }

    /// Build with `resolution` nodes per polar direction for the internal
    /// normalization and moment quadratures.
    pub fn with_resolution(lattice: Lattice<T>, resolution: usize) -> Self {
        let a_lambda = compute_a_lambda(&lattice, resolution, Complex::new(T::zero(), T::zero()));
        Self { lattice, a_lambda, resolution }
    }

    pub fn lattice(&self) -> &Lattice<T> {
        &self.lattice
    }

    pub fn a_lambda(&self) -> T {
        self.a_lambda
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Test-support constructor with a prescribed normalization constant.
    pub fn with_a_lambda(lattice: Lattice<T>, a_lambda: T) -> Self {
        Self { lattice, a_lambda, resolution: 48 }
    }

    /// Unipolar Green function `U(z, w)`; `-inf` when `z = w` mod the
    /// lattice, and lattice-periodic in both arguments.
    pub fn green(&self, z: C<T>, w: C<T>) -> T {
        self.lattice.log_sigma_star_gauged(z - w).log_mag - self.a_lambda
    }

    /// Bipolar Green function `L(z, w, w') = U(z, w) - U(z, w')`.
    ///
    /// The normalization constant cancels algebraically, so the result does
    /// not depend on `a_lambda` at all.
    pub fn bipolar(&self, z: C<T>, w: C<T>, wprime: C<T>) -> Result<T> {
        let sep = self.lattice.reduce_point(w - wprime).norm();
        if sep < T::lit(1e-12) * self.lattice.min_generator_len() {
            return Err(Error::DegeneratePolePair);
        }
        Ok(self.lattice.log_sigma_star_gauged(z - w).log_mag
            - self.lattice.log_sigma_star_gauged(z - wprime).log_mag)
    }

    /// Exponential moment `E(beta) = (2/pi) int exp(beta U(z, 0)) dA(z)`.
    pub fn moment(&self, beta: T) -> Result<T> {
        self.moment_at(beta, Complex::new(T::zero(), T::zero()))
    }

    /// Moment with the pole placed at `w`; equals [`TorusGreen::moment`]
    /// for every `w` by translation invariance (validated in tests, not
    /// assumed).
    pub fn moment_at(&self, beta: T, w: C<T>) -> Result<T> {
        if beta <= T::lit(-2.0) {
            return Err(Error::DivergentIntegral {
                exponent: beta.to_f64().unwrap_or(f64::NAN),
                threshold: -2.0,
            });
        }
        let (g1, g2) = self.lattice.generators();
        let nodes = polar_parallelogram_nodes(w, g1, g2, self.resolution, self.resolution, 3);
        let value = apply_rule(&nodes, |z| (beta * self.green(z, w)).exp());
        Ok(value / T::FRAC_PI_2())
    }

    /// Torus average of `U(., w)` on a freshly built rule of the given
    /// resolution; should vanish by the choice of the constant.
    pub fn mean_green_residual(&self, resolution: usize) -> T {
        let (g1, g2) = self.lattice.generators();
        let w = Complex::new(T::lit(0.1), T::lit(0.05));
        let nodes = polar_parallelogram_nodes(w, g1, g2, resolution, resolution, 3);
        apply_rule(&nodes, |z| self.green(z, w)) / T::FRAC_PI_2()
    }
}

/// Mean of `log|sigma*| - |z|^2` over a fundamental cell centered at
/// `center` (any center gives the same value by periodicity). The cell is
/// integrated by the polar rule around the unique lattice point inside, so
/// the logarithmic singularity is absorbed by the radial grading.
pub fn compute_a_lambda<T: Real>(lattice: &Lattice<T>, resolution: usize, center: C<T>) -> T {
    let (g1, g2) = lattice.generators();
    let apex = center - lattice.reduce_point(center);
    let half = T::lit(0.5);
    let corners = [
        center + (g1 + g2) * half - apex,
        center + (g1 - g2) * half - apex,
        center + (-g1 - g2) * half - apex,
        center + (-g1 + g2) * half - apex,
    ];
    let nodes = polar_quad_nodes(apex, &corners, resolution, resolution, 3);
    apply_rule(&nodes, |z| lattice.log_sigma_star_gauged(z).log_mag) / T::FRAC_PI_2()
}

/// Quadrature grid on a fundamental cell, as a flat node/weight list with
/// the singular-cell annotations that produced it.
#[derive(Debug, Clone)]
pub struct TorusGrid<T: Real> {
    nodes: Vec<C<T>>,
    weights: Vec<T>,
    singular_cells: Vec<SingularCell<T>>,
}

/// Annotation of one treated singular point.
#[derive(Debug, Clone)]
pub struct SingularCell<T: Real> {
    pub center: C<T>,
    pub radius: T,
}

impl<T: Real> TorusGrid<T> {
    /// Plain tensor rule over the centered cell; for smooth integrands.
    pub fn plain(lattice: &Lattice<T>, resolution: usize) -> Self {
        let (g1, g2) = lattice.generators();
        let raw = tensor_parallelogram_nodes(Complex::new(T::zero(), T::zero()), g1, g2, resolution);
        Self::from_raw(raw, Vec::new())
    }

    /// Polar rule with the whole cell recentered on a single announced
    /// point; exact mass and spectral accuracy for `r^beta`-type factors.
    pub fn single_pole(lattice: &Lattice<T>, pole: C<T>, resolution: usize) -> Self {
        let (g1, g2) = lattice.generators();
        let n = resolution.max(16);
        let raw = polar_parallelogram_nodes(pole, g1, g2, n / 2, n / 2, 3);
        let radius = lattice.min_generator_len() * T::lit(0.5);
        Self::from_raw(raw, vec![SingularCell { center: pole, radius }])
    }

    /// Tensor background with polynomial-bump polar discs at every
    /// announced kink. Exactly coincident kinks are merged; the disc radii
    /// shrink with the pairwise separation.
    pub fn with_kinks(lattice: &Lattice<T>, kinks: &[C<T>], resolution: usize) -> Self {
        let merged = merge_coincident(lattice, kinks);
        match merged.len() {
            0 => return Self::plain(lattice, resolution),
            1 => return Self::single_pole(lattice, merged[0], resolution),
            _ => {}
        }
        let (g1, g2) = lattice.generators();
        let min_gen = lattice.min_generator_len();
        let mut radii = Vec::with_capacity(merged.len());
        for (i, &p) in merged.iter().enumerate() {
            let mut nearest = min_gen;
            for (j, &qpt) in merged.iter().enumerate() {
                if i != j {
                    nearest = nearest.min(lattice.reduce_point(p - qpt).norm());
                }
            }
            radii.push(nearest * T::lit(0.35));
        }

        let cells: Vec<SingularCell<T>> = merged
            .iter()
            .zip(&radii)
            .map(|(&center, &radius)| SingularCell { center, radius })
            .collect();

        // Background tensor nodes, deflated by the bumps (torus metric).
        let tensor = tensor_parallelogram_nodes(Complex::new(T::zero(), T::zero()), g1, g2, resolution);
        let mut raw: Vec<Node<T>> = Vec::with_capacity(tensor.len() + cells.len() * DISC_ANGULAR * DISC_RADIAL);
        for (z, w) in tensor {
            let mut deflate = T::one();
            for cell in &cells {
                let d = lattice.reduce_point(z - cell.center).norm();
                if d < cell.radius {
                    let rho2 = (d / cell.radius) * (d / cell.radius);
                    deflate *= T::one() - (T::one() - rho2).powi(BUMP_POWER);
                }
            }
            if deflate > T::zero() {
                raw.push((z, w * deflate));
            }
        }

        // Polar discs carrying the bump weight.
        let (xs, ws) = gauss_legendre_01::<T>(DISC_RADIAL);
        let n_theta = DISC_ANGULAR;
        let dtheta = T::TAU() / T::from_usize(n_theta).unwrap();
        let grading = T::lit(3.0);
        for cell in &cells {
            for k in 0..n_theta {
                let theta = dtheta * (T::from_usize(k).unwrap() + T::lit(0.5));
                let dir = Complex::new(theta.cos(), theta.sin());
                for (x, wx) in xs.iter().zip(ws.iter()) {
                    let r = cell.radius * x.powi(3);
                    let jac = grading * cell.radius * x.powi(2) * r;
                    let rho2 = (r / cell.radius) * (r / cell.radius);
                    let bump = (T::one() - rho2).powi(BUMP_POWER);
                    raw.push((cell.center + dir * r, *wx * dtheta * jac * bump));
                }
            }
        }
        Self::from_raw(raw, cells)
    }

    fn from_raw(raw: Vec<Node<T>>, singular_cells: Vec<SingularCell<T>>) -> Self {
        let mut nodes = Vec::with_capacity(raw.len());
        let mut weights = Vec::with_capacity(raw.len());
        for (z, w) in raw {
            nodes.push(z);
            weights.push(w);
        }
        Self { nodes, weights, singular_cells }
    }

    pub fn nodes(&self) -> &[C<T>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn singular_cells(&self) -> &[SingularCell<T>] {
        &self.singular_cells
    }

    /// Total mass; equals the cell area pi/2 up to rounding.
    pub fn mass(&self) -> T {
        let idx: Vec<usize> = (0..self.weights.len()).collect();
        chunk_sum(&idx, |&i| self.weights[i])
    }

    /// Quadrature of `f` against the flat measure on the cell.
    pub fn integrate<F>(&self, f: F) -> T
    where
        F: Fn(C<T>) -> T + Sync + Send,
    {
        let idx: Vec<usize> = (0..self.nodes.len()).collect();
        chunk_sum(&idx, |&i| f(self.nodes[i]) * self.weights[i])
    }
}

fn merge_coincident<T: Real>(lattice: &Lattice<T>, kinks: &[C<T>]) -> Vec<C<T>> {
    let tol = lattice.min_generator_len() * T::lit(1e-9);
    let mut merged: Vec<C<T>> = Vec::with_capacity(kinks.len());
    for &p in kinks {
        if !merged
            .iter()
            .any(|&q| lattice.reduce_point(p - q).norm() < tol)
        {
            merged.push(p);
        }
    }
    merged
}

/// Packing integral `(2/pi) int exp(beta sum_j U(z, w_j)) dA(z)` on the
/// fundamental cell, using a grid built for the configuration's kinks.
pub fn torus_packing_integral<T: Real>(
    green: &TorusGreen<T>,
    cfg: &[C<T>],
    beta: T,
    grid: &TorusGrid<T>,
) -> Result<T> {
    let n = T::from_usize(cfg.len()).unwrap();
    if beta * n <= T::lit(-2.0) {
        return Err(Error::DivergentIntegral {
            exponent: (beta * n).to_f64().unwrap_or(f64::NAN),
            threshold: -2.0,
        });
    }
    let shift = n * green.a_lambda();
    let value = grid.integrate(|z| {
        let mut acc = T::zero();
        for w in cfg {
            acc += green.lattice().log_sigma_star_gauged(z - w).log_mag;
        }
        (beta * (acc - shift)).exp()
    });
    Ok(value / T::FRAC_PI_2())
}

/// Index-N refinement of the lattice: `a = floor(sqrt N)`, `b = N - a^2`,
/// fine generators from the integer matrix relation, and the N coset
/// representatives of the quotient.
#[derive(Debug, Clone)]
pub struct LatticeRefinement<T: Real> {
    pub n: usize,
    pub a: i64,
    pub b: i64,
    pub omega1n: C<T>,
    pub omega2n: C<T>,
    /// Coset representatives reduced to the centered fundamental cell.
    pub cosets: Vec<C<T>>,
}

/// Integer square root by adjustment (exact for the full usize range used
/// here).
pub fn refinement_parameters(n: usize) -> (i64, i64) {
    let mut a = (n as f64).sqrt().floor() as i64;
    while (a + 1) * (a + 1) <= n as i64 {
        a += 1;
    }
    while a * a > n as i64 {
        a -= 1;
    }
    (a, n as i64 - a * a)
}

/// Build the refinement. The quotient is cyclic and generated by the first
/// fine generator, whose coset coordinates are exact integers, so the
/// enumeration and the distinctness count are integer-exact.
pub fn refine_lattice<T: Real>(lattice: &Lattice<T>, n: usize) -> LatticeRefinement<T> {
    assert!(n >= 1);
    let (a, b) = refinement_parameters(n);
    let (w1, w2) = lattice.generators();
    let nf = T::from_usize(n).unwrap();
    let af = T::from_i64(a).unwrap();
    let bf = T::from_i64(b).unwrap();
    let omega1n = (w1 * af + w2) / nf;
    let omega2n = (w1 * -bf + w2 * af) / nf;

    // k * omega1n = ((k a mod N) w1 + (k mod N) w2) / N  modulo the lattice
    let mut seen = std::collections::HashSet::with_capacity(n);
    let mut cosets = Vec::with_capacity(n);
    let n_i = n as i64;
    for k in 0..n_i {
        let p = ((k * a).rem_euclid(n_i), k.rem_euclid(n_i));
        assert!(seen.insert(p), "coset collision at k = {k}");
        let rep = (w1 * T::from_i64(p.0).unwrap() + w2 * T::from_i64(p.1).unwrap()) / nf;
        cosets.push(lattice.reduce_point(rep));
    }
    assert_eq!(cosets.len(), n);
    LatticeRefinement { n, a, b, omega1n, omega2n, cosets }
}

/// The refinement rescaled back to covolume pi/2, together with the chart
/// factor `c` such that `U_fine(z, 0) = U_renormalized(c z, 0)`.
#[derive(Debug, Clone)]
pub struct RenormalizedLattice<T: Real> {
    pub lattice: Lattice<T>,
    /// Map from the base chart into the renormalized chart (modulus
    /// sqrt(N), argument from re-orientation).
    pub chart_factor: C<T>,
}

/// Rescale the fine lattice by sqrt(N) and re-normalize its orientation.
pub fn renormalized_lattice<T: Real>(refinement: &LatticeRefinement<T>) -> RenormalizedLattice<T> {
    let sqrt_n = T::from_usize(refinement.n).unwrap().sqrt();
    let raw1 = refinement.omega1n * sqrt_n;
    let raw2 = refinement.omega2n * sqrt_n;
    let (lattice, factor) =
        Lattice::normalize_with_factor(raw1, raw2).expect("refined generators stay independent");
    RenormalizedLattice { lattice, chart_factor: factor * sqrt_n }
}

/// Maximum over a test grid of the superposition defect
/// `|sum_j U(z, coset_j) - U_fine(z, 0)|`, with the right-hand side
/// evaluated through the renormalized lattice and the scale identity.
/// Test points closer than `1e-3` to a coset are skipped.
pub fn verify_superposition<T: Real>(
    green: &TorusGreen<T>,
    refinement: &LatticeRefinement<T>,
    grid_per_side: usize,
) -> T {
    let renorm = renormalized_lattice(refinement);
    let fine_green = TorusGreen::with_resolution(renorm.lattice.clone(), green.resolution());
    let (w1, w2) = green.lattice().generators();
    let guard = T::lit(1e-3);
    let mut worst = T::zero();
    for i in 0..grid_per_side {
        for j in 0..grid_per_side {
            let s = (T::from_usize(i).unwrap() + T::lit(0.21)) / T::from_usize(grid_per_side).unwrap()
                - T::lit(0.5);
            let t = (T::from_usize(j).unwrap() + T::lit(0.37)) / T::from_usize(grid_per_side).unwrap()
                - T::lit(0.5);
            let z = w1 * s + w2 * t;
            let near_coset = refinement
                .cosets
                .iter()
                .any(|&c| green.lattice().reduce_point(z - c).norm() < guard);
            if near_coset {
                continue;
            }
            let mut lhs = T::zero();
            for &c in &refinement.cosets {
                lhs += green.green(z, c);
            }
            let rhs = fine_green.green(renorm.chart_factor * z, Complex::new(T::zero(), T::zero()));
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

/// Packing value of the coset configuration, evaluated both directly (sum
/// of Green terms over a sub-cell tiling) and through the renormalized
/// lattice; the two must agree, and their size is controlled by the maximum
/// of the renormalized Green function.
#[derive(Debug, Clone)]
pub struct LatticeThetaResult<T: Real> {
    pub n: usize,
    pub beta: T,
    /// Direct quadrature of `exp(beta sum_j U(z, coset_j))`.
    pub direct: T,
    /// `E(beta, renormalized lattice)` through the scale identity.
    pub via_renormalized: T,
    /// Measured maximum of the renormalized Green function (bounds the
    /// packing value by `exp(beta * max)`).
    pub max_green: T,
}

/// Cached machinery for evaluating the lattice-configuration packing value
/// at one `N`: the refinement, the renormalized Green function, and the
/// sub-cell tiling are built once and reused across charge parameters.
pub struct LatticeThetaEvaluator<T: Real> {
    base: TorusGreen<T>,
    refinement: LatticeRefinement<T>,
    fine_green: TorusGreen<T>,
}

impl<T: Real> LatticeThetaEvaluator<T> {
    pub fn new(green: &TorusGreen<T>, n: usize) -> Self {
        let refinement = refine_lattice(green.lattice(), n);
        let renorm = renormalized_lattice(&refinement);
        let fine_green = TorusGreen::with_resolution(renorm.lattice, green.resolution());
        Self { base: green.clone(), refinement, fine_green }
    }

    pub fn refinement(&self) -> &LatticeRefinement<T> {
        &self.refinement
    }

    /// `E(beta, Lambda'_N)`: the packing value through the scale identity.
    pub fn via_renormalized(&self, beta: T) -> T {
        self.fine_green.moment(beta).expect("beta > -2 moment converges")
    }

    /// Direct quadrature of `exp(beta sum_j U(z, coset_j))` over the cell,
    /// tiled by the N fine sub-cells so every kink sits at a sub-cell
    /// center.
    pub fn direct(&self, beta: T) -> T {
        let n = self.refinement.n;
        let shift = T::from_usize(n).unwrap() * self.base.a_lambda();
        let per_arc = 20usize;
        let lattice = self.base.lattice();
        let mut direct = T::zero();
        for &c in &self.refinement.cosets {
            let cell = polar_parallelogram_nodes(
                c,
                self.refinement.omega1n,
                self.refinement.omega2n,
                per_arc,
                per_arc,
                3,
            );
            direct += apply_rule(&cell, |z| {
                let mut acc = T::zero();
                for w in &self.refinement.cosets {
                    acc += lattice.log_sigma_star_gauged(z - w).log_mag;
                }
                (beta * (acc - shift)).exp()
            });
        }
        direct / T::FRAC_PI_2()
    }

    /// Dense-grid maximum of the renormalized Green function; bounds every
    /// packing value by `exp(beta * max)`.
    pub fn max_green(&self, scan_per_side: usize) -> T {
        let (g1, g2) = self.fine_green.lattice().generators();
        let m = scan_per_side;
        let mut max_green = T::neg_infinity();
        for i in 0..m {
            for j in 0..m {
                let s = (T::from_usize(i).unwrap() + T::lit(0.5)) / T::from_usize(m).unwrap()
                    - T::lit(0.5);
                let t = (T::from_usize(j).unwrap() + T::lit(0.5)) / T::from_usize(m).unwrap()
                    - T::lit(0.5);
                let z = g1 * s + g2 * t;
                max_green = max_green.max(self.fine_green.green(z, Complex::new(T::zero(), T::zero())));
            }
        }
        max_green
    }
}

/// Evaluate the packing integral at the lattice configuration of
/// [`refine_lattice`] by both routes.
pub fn torus_theta_at_lattice<T: Real>(
    green: &TorusGreen<T>,
    n: usize,
    beta: T,
) -> LatticeThetaResult<T> {
    let eval = LatticeThetaEvaluator::new(green, n);
    LatticeThetaResult {
        n,
        beta,
        direct: eval.direct(beta),
        via_renormalized: eval.via_renormalized(beta),
        max_green: eval.max_green(64),
    }
}
