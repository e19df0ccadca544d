//! Potential functions over the regret state and the numerical certificate
//! behind the regret bound.
//!
//! A potential is a smooth `phi: R^N -> R` that (a) dominates the coordinate
//! maximum, (b) is nondecreasing in each coordinate, and (c) has its Hessian
//! quadratic form over the unit box bounded by a constant `c`. Those three
//! facts are exactly what the per-round telescoping argument needs to keep
//! the final regret under `(c + phi(0)) * sqrt(n)`; `certify_supersolution`
//! checks them pointwise over a sample set and reports the worst deficits.
//!
//! The workhorse is the soft maximum `phi(x) = ln(sum_i e^{eta x_i}) / eta`,
//! whose gradient is the softmax of `eta x` (itself a simplex point) and
//! whose box Hessian constant is `c = eta / 2`. A composite class
//! `phi(x) = psi(sum_i f(x_i))` with one-dimensional descriptors `psi`, `f`
//! is also supported; its quadratic form is evaluated through the
//! `psi' * sum f'' h^2` upper bound, which is sound but can be conservative.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regret::RegretVector;
use crate::rng::SeedStream;
use crate::scalar::{coordinate_max, Real};
use crate::simplex::WeightVector;

/// One-dimensional C^2 function descriptor for composite potentials.
pub trait Curve<F>: Send + Sync {
    fn value(&self, x: F) -> F;
    fn first(&self, x: F) -> F;
    fn second(&self, x: F) -> F;
}

/// `f(x) = e^{eta x}` — convex leg of the soft-max composite.
#[derive(Debug, Clone, Copy)]
pub struct ExpCurve<F> {
    pub eta: F,
}

impl<F: Real> Curve<F> for ExpCurve<F> {
    fn value(&self, x: F) -> F {
        (self.eta * x).exp()
    }
    fn first(&self, x: F) -> F {
        self.eta * (self.eta * x).exp()
    }
    fn second(&self, x: F) -> F {
        self.eta * self.eta * (self.eta * x).exp()
    }
}

/// `psi(y) = ln(y) / eta` — concave leg of the soft-max composite.
#[derive(Debug, Clone, Copy)]
pub struct ScaledLogCurve<F> {
    pub eta: F,
}

impl<F: Real> Curve<F> for ScaledLogCurve<F> {
    fn value(&self, y: F) -> F {
        y.ln() / self.eta
    }
    fn first(&self, y: F) -> F {
        (self.eta * y).recip()
    }
    fn second(&self, y: F) -> F {
        -(self.eta * y * y).recip()
    }
}

enum PotentialKind<F> {
    Exponential {
        eta: F,
    },
    Composite {
        psi: Arc<dyn Curve<F>>,
        phi: Arc<dyn Curve<F>>,
    },
}

impl<F> Clone for PotentialKind<F>
where
    F: Clone,
{
    fn clone(&self) -> Self {
        match self {
            Self::Exponential { eta } => Self::Exponential { eta: eta.clone() },
            Self::Composite { psi, phi } => Self::Composite {
                psi: Arc::clone(psi),
                phi: Arc::clone(phi),
            },
        }
    }
}

/// A potential together with its certified Hessian quadratic-form constant.
#[derive(Clone)]
pub struct Potential<F> {
    kind: PotentialKind<F>,
    hessian_constant: F,
}

impl<F: fmt::Debug> fmt::Debug for Potential<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PotentialKind::Exponential { eta } => f
                .debug_struct("Potential")
                .field("kind", &"exponential")
                .field("eta", eta)
                .field("c", &self.hessian_constant)
                .finish(),
            PotentialKind::Composite { .. } => f
                .debug_struct("Potential")
                .field("kind", &"composite")
                .field("c", &self.hessian_constant)
                .finish(),
        }
    }
}

/// The learning rate minimizing `eta/2 + ln(N)/eta`.
///
/// For a single expert any positive rate gives the degenerate bound `eta/2`;
/// we return 1.
pub fn optimal_eta<F: Real>(n_experts: usize) -> F {
    if n_experts <= 1 {
        F::one()
    } else {
        (F::two() * F::from_usize(n_experts).unwrap().ln()).sqrt()
    }
}

impl<F: Real> Potential<F> {
    /// Soft maximum with rate `eta > 0` and its closed-form constant
    /// `c = eta/2`.
    pub fn exponential(eta: F) -> Result<Self> {
        Self::exponential_with_constant(eta, eta * F::half())
    }

    /// Soft maximum with a caller-supplied constant; `certify_supersolution`
    /// will flag constants that are too small.
    pub fn exponential_with_constant(eta: F, c: F) -> Result<Self> {
        if !(eta.is_finite() && eta > F::zero()) {
            return Err(Error::Rejected("eta must be positive and finite".into()));
        }
        if !(c.is_finite() && c >= F::zero()) {
            return Err(Error::Rejected(
                "hessian constant must be nonnegative".into(),
            ));
        }
        Ok(Self {
            kind: PotentialKind::Exponential { eta },
            hessian_constant: c,
        })
    }

    /// Soft maximum at the rate `optimal_eta(n_experts)`.
    pub fn exponential_optimal(n_experts: usize) -> Self {
        Self::exponential(optimal_eta(n_experts)).expect("optimal eta is positive")
    }

    /// Composite `phi(x) = psi(sum_i f(x_i))` with a claimed constant `c`.
    pub fn composite(psi: Arc<dyn Curve<F>>, phi: Arc<dyn Curve<F>>, c: F) -> Result<Self> {
        if !(c.is_finite() && c >= F::zero()) {
            return Err(Error::Rejected(
                "hessian constant must be nonnegative".into(),
            ));
        }
        Ok(Self {
            kind: PotentialKind::Composite { psi, phi },
            hessian_constant: c,
        })
    }

    /// The soft-max composite `psi = ln/eta`, `f = e^{eta .}`: same function
    /// as [`Potential::exponential`] through the generic code path.
    pub fn composite_exponential(eta: F) -> Result<Self> {
        if !(eta.is_finite() && eta > F::zero()) {
            return Err(Error::Rejected("eta must be positive and finite".into()));
        }
        Self::composite(
            Arc::new(ScaledLogCurve { eta }),
            Arc::new(ExpCurve { eta }),
            eta * F::half(),
        )
    }

    /// The certified quadratic-form constant `c`.
    pub fn hessian_constant(&self) -> F {
        self.hessian_constant
    }

    /// Learning rate for the exponential kind.
    pub fn eta(&self) -> Option<F> {
        match &self.kind {
            PotentialKind::Exponential { eta } => Some(*eta),
            PotentialKind::Composite { .. } => None,
        }
    }

    /// Additive regret-bound constant `c + phi(0)` for `n_experts` experts.
    pub fn bound_constant(&self, n_experts: usize) -> F {
        self.hessian_constant + self.value(&vec![F::zero(); n_experts])
    }

    /// `phi(x)`. The exponential kind shifts by the coordinate maximum, so
    /// it never overflows and dominates `max_i x_i` exactly.
    pub fn value(&self, x: &[F]) -> F {
        assert!(!x.is_empty());
        match &self.kind {
            PotentialKind::Exponential { eta } => {
                let m = coordinate_max(x);
                let sum: F = x.iter().map(|&xi| ((xi - m) * *eta).exp()).sum();
                m + sum.ln() / *eta
            }
            PotentialKind::Composite { psi, phi } => {
                psi.value(x.iter().map(|&xi| phi.value(xi)).sum())
            }
        }
    }

    /// Gradient of `phi`. For the exponential kind this is the softmax of
    /// `eta x` — already a simplex point.
    pub fn gradient(&self, x: &[F]) -> Vec<F> {
        assert!(!x.is_empty());
        match &self.kind {
            PotentialKind::Exponential { eta } => softmax_scaled(x, *eta),
            PotentialKind::Composite { psi, phi } => {
                let s = psi.first(x.iter().map(|&xi| phi.value(xi)).sum());
                x.iter().map(|&xi| s * phi.first(xi)).collect()
            }
        }
    }

    /// Normalized gradient as a simplex point. Errors with
    /// [`Error::DegenerateGradient`] when the gradient sum is numerically
    /// zero; see [`Potential::weights_or_uniform`].
    pub fn weights(&self, x: &[F]) -> Result<WeightVector<F>> {
        WeightVector::normalized(&self.gradient(x))
    }

    /// Normalized gradient, falling back to uniform weights on a degenerate
    /// gradient. Any simplex point satisfies the Blackwell condition there,
    /// and uniform keeps replays deterministic. Unreachable for the
    /// exponential kind, whose gradient sums to one.
    pub fn weights_or_uniform(&self, x: &[F]) -> Result<WeightVector<F>> {
        match self.weights(x) {
            Err(Error::DegenerateGradient) => Ok(WeightVector::uniform(x.len())),
            other => other,
        }
    }

    /// Quadratic form `<H(x) h, h>` of the Hessian (not halved). Closed form
    /// for the exponential kind: `eta * (sum q h^2 - (sum q h)^2)` with
    /// `q = softmax(eta x)`. The composite kind returns the
    /// `psi' * sum f'' h^2` upper bound.
    pub fn hessian_quadratic_form(&self, x: &[F], h: &[F]) -> F {
        assert_eq!(x.len(), h.len(), "direction dimension mismatch");
        match &self.kind {
            PotentialKind::Exponential { eta } => {
                let q = softmax_scaled(x, *eta);
                let mean_sq: F = q.iter().zip(h).map(|(&qi, &hi)| qi * hi * hi).sum();
                let mean: F = q.iter().zip(h).map(|(&qi, &hi)| qi * hi).sum();
                *eta * (mean_sq - mean * mean)
            }
            PotentialKind::Composite { psi, phi } => {
                let s = psi.first(x.iter().map(|&xi| phi.value(xi)).sum());
                s * x
                    .iter()
                    .zip(h)
                    .map(|(&xi, &hi)| phi.second(xi) * hi * hi)
                    .sum()
            }
        }
    }

    /// Full Hessian matrix. Exponential: `eta (diag q - q q^T)`; composite:
    /// the exact `psi'' f' f'^T + psi' diag(f'')`.
    pub fn hessian_matrix(&self, x: &[F]) -> Vec<Vec<F>> {
        let n = x.len();
        match &self.kind {
            PotentialKind::Exponential { eta } => {
                let q = softmax_scaled(x, *eta);
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| {
                                let diag = if i == j { q[i] } else { F::zero() };
                                *eta * (diag - q[i] * q[j])
                            })
                            .collect()
                    })
                    .collect()
            }
            PotentialKind::Composite { psi, phi } => {
                let s: F = x.iter().map(|&xi| phi.value(xi)).sum();
                let p1 = psi.first(s);
                let p2 = psi.second(s);
                let d1: Vec<F> = x.iter().map(|&xi| phi.first(xi)).collect();
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| {
                                let diag = if i == j {
                                    p1 * phi.second(x[i])
                                } else {
                                    F::zero()
                                };
                                p2 * d1[i] * d1[j] + diag
                            })
                            .collect()
                    })
                    .collect()
            }
        }
    }
}

/// Numerically stable softmax of `scale * x`.
pub fn softmax_scaled<F: Real>(x: &[F], scale: F) -> Vec<F> {
    let m = coordinate_max(x);
    let exps: Vec<F> = x.iter().map(|&xi| ((xi - m) * scale).exp()).collect();
    let sum: F = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// How `certify_supersolution` searches the unit box for the worst Hessian
/// direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HessianScan {
    /// All sign vertices `h` of the box. The form is convex in `h` whenever
    /// the Hessian bound is positive semidefinite, so the box maximum sits
    /// at a vertex. Refused above 20 dimensions.
    Vertices,
    /// `directions` uniform draws from the box — the fallback for large `N`.
    Sampled { directions: usize, seed: u64 },
}

/// Maximum dimension for the exhaustive vertex scan.
pub const VERTEX_SCAN_MAX_DIM: usize = 20;

const GRID_POINT_BUDGET: u64 = 1_000_000;

/// Outcome of a pointwise supersolution check.
#[derive(Debug, Clone, PartialEq)]
pub struct SupersolutionReport<F> {
    /// Sample points evaluated (user points plus the axis grid).
    pub points_checked: usize,
    /// Worst `max_i x_i - phi(x)`; positive means domination failed.
    pub max_domination_violation: F,
    /// Worst `(1/2) <H h, h> - c` over scanned directions.
    pub max_hessian_excess: F,
    /// Smallest gradient entry seen (monotonicity wants `>= -tol`).
    pub min_gradient_entry: F,
    /// Worst disagreement between the analytic gradient and central finite
    /// differences, relative to the gradient's largest component.
    pub gradient_check_max_relerror: F,
    pub passed: bool,
}

impl<F: Real> Potential<F> {
    /// Check the supersolution conditions pointwise: domination of the
    /// coordinate maximum, gradient sign, and the halved Hessian quadratic
    /// form against `c`, plus a finite-difference audit of the gradient.
    ///
    /// Points are the user samples plus an axis-aligned grid of
    /// `grid_per_axis` points per axis spanning `[-3,3]^N` (0 disables the
    /// grid). `passed` is true iff the domination and Hessian deficits stay
    /// within `tol_strict`; this is a sampled certificate, not a proof.
    pub fn certify_supersolution(
        &self,
        sample_points: &[RegretVector<F>],
        grid_per_axis: usize,
        scan: HessianScan,
    ) -> Result<SupersolutionReport<F>> {
        if sample_points.is_empty() {
            return Err(Error::Rejected("need at least one sample point".into()));
        }
        let dim = sample_points[0].len();
        if sample_points.iter().any(|p| p.len() != dim) {
            return Err(Error::Rejected("sample points of mixed dimension".into()));
        }
        if matches!(scan, HessianScan::Vertices) && dim > VERTEX_SCAN_MAX_DIM {
            return Err(Error::BudgetExceeded {
                needed: 1u64 << dim.min(63),
                budget: 1u64 << VERTEX_SCAN_MAX_DIM,
            });
        }
        if grid_per_axis > 0 {
            let grid_total = (grid_per_axis as u64)
                .checked_pow(dim as u32)
                .unwrap_or(u64::MAX);
            if grid_total > GRID_POINT_BUDGET {
                return Err(Error::BudgetExceeded {
                    needed: grid_total,
                    budget: GRID_POINT_BUDGET,
                });
            }
        }

        let mut report = SupersolutionReport {
            points_checked: 0,
            max_domination_violation: F::neg_infinity(),
            max_hessian_excess: F::neg_infinity(),
            min_gradient_entry: F::infinity(),
            gradient_check_max_relerror: F::zero(),
            passed: false,
        };
        for point in sample_points {
            self.check_point(point.as_slice(), scan, &mut report);
        }
        let mut grid_point = vec![0usize; dim];
        if grid_per_axis > 0 {
            loop {
                let coords: Vec<F> = grid_point
                    .iter()
                    .map(|&k| grid_coordinate(k, grid_per_axis))
                    .collect();
                self.check_point(&coords, scan, &mut report);
                // mixed-radix increment
                let mut axis = 0;
                loop {
                    if axis == dim {
                        break;
                    }
                    grid_point[axis] += 1;
                    if grid_point[axis] < grid_per_axis {
                        break;
                    }
                    grid_point[axis] = 0;
                    axis += 1;
                }
                if axis == dim {
                    break;
                }
            }
        }

        report.passed = report.max_domination_violation <= F::tol_strict()
            && report.max_hessian_excess <= F::tol_strict();
        Ok(report)
    }

    fn check_point(&self, x: &[F], scan: HessianScan, report: &mut SupersolutionReport<F>) {
        report.points_checked += 1;

        let deficit = coordinate_max(x) - self.value(x);
        report.max_domination_violation = report.max_domination_violation.max(deficit);

        let grad = self.gradient(x);
        for &g in &grad {
            report.min_gradient_entry = report.min_gradient_entry.min(g);
        }

        // central finite differences, error relative to the gradient scale
        let step = F::real(1e-6).max(F::epsilon().sqrt());
        let scale = grad
            .iter()
            .fold(F::zero(), |m, g| m.max(g.abs()))
            .max(F::real(1e-6));
        let mut probe = x.to_vec();
        for i in 0..x.len() {
            probe[i] = x[i] + step;
            let up = self.value(&probe);
            probe[i] = x[i] - step;
            let down = self.value(&probe);
            probe[i] = x[i];
            let fd = (up - down) / (F::two() * step);
            let rel = (grad[i] - fd).abs() / scale;
            report.gradient_check_max_relerror = report.gradient_check_max_relerror.max(rel);
        }

        let worst_form = match scan {
            HessianScan::Vertices => self.worst_vertex_form(x),
            HessianScan::Sampled { directions, seed } => {
                self.worst_sampled_form(x, directions, seed)
            }
        };
        report.max_hessian_excess = report
            .max_hessian_excess
            .max(worst_form * F::half() - self.hessian_constant);
    }

    fn worst_vertex_form(&self, x: &[F]) -> F {
        let n = x.len();
        let mut h = vec![F::one(); n];
        let mut worst = F::neg_infinity();
        // h and -h give the same form, so pin the last sign
        for mask in 0..(1u64 << (n - 1)) {
            for (i, hi) in h.iter_mut().enumerate().take(n - 1) {
                *hi = if mask >> i & 1 == 1 {
                    -F::one()
                } else {
                    F::one()
                };
            }
            worst = worst.max(self.hessian_quadratic_form(x, &h));
        }
        worst
    }

    fn worst_sampled_form(&self, x: &[F], directions: usize, seed: u64) -> F {
        let mut rng = SeedStream::new(seed).split(0x6865_7373);
        let mut worst = F::neg_infinity();
        let mut h = vec![F::zero(); x.len()];
        for _ in 0..directions.max(1) {
            for hi in h.iter_mut() {
                *hi = rng.next_in(-F::one(), F::one());
            }
            worst = worst.max(self.hessian_quadratic_form(x, &h));
        }
        worst
    }
}

fn grid_coordinate<F: Real>(k: usize, per_axis: usize) -> F {
    let three = F::real(3.0);
    if per_axis == 1 {
        return F::zero();
    }
    let t = F::from_usize(k).unwrap() / F::from_usize(per_axis - 1).unwrap();
    -three + F::real(6.0) * t
}

/// Serializable potential descriptor used by game configs and the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec<F> {
    /// Soft maximum; `eta` defaults to `optimal_eta(N)`, `c` to `eta/2`.
    Exponential { eta: Option<F>, c: Option<F> },
    /// Soft maximum through the composite code path (same function).
    CompositeExponential { eta: Option<F> },
}

impl<F: Real> PotentialSpec<F> {
    pub fn default_exponential() -> Self {
        PotentialSpec::Exponential { eta: None, c: None }
    }

    pub fn build(&self, n_experts: usize) -> Result<Potential<F>> {
        match self {
            PotentialSpec::Exponential { eta, c } => {
                let eta = eta.unwrap_or_else(|| optimal_eta(n_experts));
                match c {
                    Some(c) => Potential::exponential_with_constant(eta, *c),
                    None => Potential::exponential(eta),
                }
            }
            PotentialSpec::CompositeExponential { eta } => {
                Potential::composite_exponential(eta.unwrap_or_else(|| optimal_eta(n_experts)))
            }
        }
    }
}
