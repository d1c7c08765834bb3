//! Search-based checks of strict and uniform convexity.
//!
//! Searching is asymmetric: a counterexample found is a certificate that
//! re-validates on its own, while a search that finds nothing only
//! corroborates convexity up to its budget. Every verdict records the budget
//! and seed that produced it.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::module::{lp_norm, BoundedAwayField, LpExponent, ModuleElement, RnModule};
use crate::orlicz::{NormFlavor, OrliczContext};
use crate::orlicz_module::ModuleOrliczContext;
use crate::prob::RandomVariable;

/// Unit-norm tolerance of a counterexample.
pub const UNIT_TOL: f64 = 1e-9;
/// A counterexample's midpoint must reach `1 − MIDPOINT_TOL`.
pub const MIDPOINT_TOL: f64 = 1e-9;
/// A counterexample's points must be further apart than this.
pub const DISTINCT_TOL: f64 = 1e-6;
/// Random pairs closer than this are skipped: in a strictly convex space the
/// midpoint deficit shrinks quadratically with the distance and would drown
/// in the midpoint tolerance.
pub const MIN_SEPARATION: f64 = 0.05;
/// Modulus estimates at or below this count as vanishing.
pub const VANISHING_MODULUS: f64 = 1e-6;

fn flavor_name(flavor: NormFlavor) -> &'static str {
    match flavor {
        NormFlavor::Luxemburg => "Luxemburg",
        NormFlavor::Orlicz => "Orlicz",
    }
}

/// A finite-dimensional normed space on flat coordinate vectors.
pub trait NormedSpace {
    fn dim(&self) -> usize;
    fn norm(&self, v: &[f64]) -> f64;
    /// Coordinate groups that belong together (the fibers of one atom).
    fn blocks(&self) -> Vec<Range<usize>>;
    /// `(rows, cols)` of a flat vector when reported.
    fn shape(&self) -> (usize, usize);
    fn label(&self) -> String;
}

/// `L^Φ` on the atoms of a probability space.
#[derive(Debug, Clone)]
pub struct ScalarSpace {
    pub ctx: OrliczContext,
    pub flavor: NormFlavor,
}

/// `L^Φ(E)` flattened atom by atom.
#[derive(Debug, Clone)]
pub struct ModuleSpace {
    pub mctx: ModuleOrliczContext,
    pub flavor: NormFlavor,
}

/// One fiber `(ℝⁿ, ℓ_p)`.
#[derive(Debug, Clone, Copy)]
pub struct FiberSpace {
    pub p: LpExponent,
    pub n: usize,
}

impl NormedSpace for ScalarSpace {
    fn dim(&self) -> usize {
        self.ctx.space().atom_count()
    }

    fn norm(&self, v: &[f64]) -> f64 {
        let abs: Vec<f64> = v.iter().map(|x| x.abs()).collect();
        self.ctx.norm_abs(&abs, self.flavor).unwrap_or(f64::NAN)
    }

    fn blocks(&self) -> Vec<Range<usize>> {
        (0..self.dim()).map(|i| i..i + 1).collect()
    }

    fn shape(&self) -> (usize, usize) {
        (self.dim(), 1)
    }

    fn label(&self) -> String {
        format!("scalar L^Φ, {} norm", flavor_name(self.flavor))
    }
}

impl ModuleSpace {
    pub fn element(&self, v: &[f64]) -> ModuleElement {
        ModuleElement::new(v.chunks(self.mctx.module().fiber_dim()).map(<[f64]>::to_vec).collect())
    }

    pub fn flatten(x: &ModuleElement) -> Vec<f64> {
        x.vectors().iter().flatten().copied().collect()
    }
}

impl NormedSpace for ModuleSpace {
    fn dim(&self) -> usize {
        self.mctx.module().atom_count() * self.mctx.module().fiber_dim()
    }

    fn norm(&self, v: &[f64]) -> f64 {
        let module = self.mctx.module();
        let norms: Vec<f64> = v
            .chunks(module.fiber_dim())
            .zip(module.fiber_p())
            .map(|(fiber, p)| p.norm(fiber))
            .collect();
        self.mctx.ctx().norm_abs(&norms, self.flavor).unwrap_or(f64::NAN)
    }

    fn blocks(&self) -> Vec<Range<usize>> {
        let n = self.mctx.module().fiber_dim();
        (0..self.mctx.module().atom_count())
            .map(|i| i * n..(i + 1) * n)
            .collect()
    }

    fn shape(&self) -> (usize, usize) {
        (self.mctx.module().atom_count(), self.mctx.module().fiber_dim())
    }

    fn label(&self) -> String {
        format!("module L^Φ(E), {} norm", flavor_name(self.flavor))
    }
}

impl NormedSpace for FiberSpace {
    fn dim(&self) -> usize {
        self.n
    }

    fn norm(&self, v: &[f64]) -> f64 {
        lp_norm(v, self.p.value())
    }

    fn blocks(&self) -> Vec<Range<usize>> {
        std::iter::once(0..self.n).collect()
    }

    fn shape(&self) -> (usize, usize) {
        (1, self.n)
    }

    fn label(&self) -> String {
        format!("fiber l_{} (n = {})", self.p, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexityStatus {
    VerifiedBySearch,
    Falsified,
}

/// Two unit vectors whose midpoint stays on the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub shape: (usize, usize),
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub norm_x: f64,
    pub norm_y: f64,
    pub midpoint_norm: f64,
    pub distance: f64,
}

impl Counterexample {
    fn measure(space: &dyn NormedSpace, x: Vec<f64>, y: Vec<f64>) -> Self {
        let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
        let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        Self {
            shape: space.shape(),
            norm_x: space.norm(&x),
            norm_y: space.norm(&y),
            midpoint_norm: space.norm(&mid),
            distance: space.norm(&diff),
            x,
            y,
        }
    }

    fn holds(&self) -> bool {
        (self.norm_x - 1.0).abs() <= UNIT_TOL
            && (self.norm_y - 1.0).abs() <= UNIT_TOL
            && self.distance > DISTINCT_TOL
            && self.midpoint_norm >= 1.0 - MIDPOINT_TOL
    }

    /// Recomputes every norm in `space` and checks the counterexample conditions.
    pub fn revalidate(&self, space: &dyn NormedSpace) -> bool {
        self.x.len() == space.dim()
            && self.y.len() == space.dim()
            && Self::measure(space, self.x.clone(), self.y.clone()).holds()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityVerdict {
    pub space: String,
    pub status: ConvexityStatus,
    pub counterexample: Option<Counterexample>,
    pub structured_candidates: usize,
    /// Random pairs drawn before stopping.
    pub search_budget: usize,
    pub seed: u64,
}

impl ConvexityVerdict {
    pub fn is_falsified(&self) -> bool {
        self.status == ConvexityStatus::Falsified
    }
}

fn normalized(space: &dyn NormedSpace, v: Vec<f64>) -> Option<Vec<f64>> {
    let n = space.norm(&v);
    (n > 0.0 && n.is_finite()).then(|| v.into_iter().map(|x| x / n).collect())
}

fn unit(dim: usize, a: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[a] = 1.0;
    e
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

fn axpy(x: &[f64], a: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(u, v)| u + a * v).collect()
}

/// Disjoint coordinate pairs, sign flips and face-sharing sums.
fn structured_pairs(dim: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut pairs = Vec::new();
    for a in 0..dim {
        for b in (a + 1)..dim {
            let (ea, eb) = (unit(dim, a), unit(dim, b));
            let sum = axpy(&ea, 1.0, &eb);
            let diff = axpy(&ea, -1.0, &eb);
            pairs.push((ea.clone(), eb.clone()));
            pairs.push((sum.clone(), diff));
            pairs.push((ea, sum.clone()));
            pairs.push((sum, eb));
        }
    }
    pairs
}

/// Searches for distinct unit `x`, `y` with `‖(x+y)/2‖ ≥ 1 − 1e-9`.
pub fn strict_convexity_falsifier(space: &dyn NormedSpace, budget: usize, seed: u64) -> ConvexityVerdict {
    let dim = space.dim();
    let structured = structured_pairs(dim);
    let verdict = |counterexample: Option<Counterexample>, used: usize| ConvexityVerdict {
        space: space.label(),
        status: if counterexample.is_some() {
            ConvexityStatus::Falsified
        } else {
            ConvexityStatus::VerifiedBySearch
        },
        counterexample,
        structured_candidates: structured.len(),
        search_budget: used,
        seed,
    };
    let check = |x: Vec<f64>, y: Vec<f64>| -> Option<Counterexample> {
        let x = normalized(space, x)?;
        let y = normalized(space, y)?;
        let c = Counterexample::measure(space, x, y);
        (c.distance >= MIN_SEPARATION && c.holds()).then_some(c)
    };

    for (x, y) in structured.iter().cloned() {
        if let Some(c) = check(x, y) {
            return verdict(Some(c), 0);
        }
    }
    let blocks = space.blocks();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..budget {
        let (x, y) = match k % 6 {
            0 => (gaussian(&mut rng, dim), gaussian(&mut rng, dim)),
            1 => {
                let x = gaussian(&mut rng, dim).iter().map(|v| v.abs()).collect();
                let y = gaussian(&mut rng, dim).iter().map(|v| v.abs()).collect();
                (x, y)
            }
            2 => {
                let mut sparse = || -> Vec<f64> {
                    gaussian(&mut rng, dim)
                        .into_iter()
                        .map(|v| if rng.random_bool(0.5) { v } else { 0.0 })
                        .collect()
                };
                (sparse(), sparse())
            }
            3 | 4 => {
                let x = gaussian(&mut rng, dim);
                let sigma = if k % 6 == 3 { 0.5 } else { 0.2 };
                let g = gaussian(&mut rng, dim);
                let x = normalized(space, x).unwrap_or_else(|| unit(dim, 0));
                let y = axpy(&x, sigma, &g);
                (x, y)
            }
            _ => {
                let x = gaussian(&mut rng, dim);
                let block = &blocks[rng.random_range(0..blocks.len())];
                let mut y = x.clone();
                for v in &mut y[block.clone()] {
                    *v = rng.sample(StandardNormal);
                }
                (x, y)
            }
        };
        if let Some(c) = check(x, y) {
            return verdict(Some(c), k + 1);
        }
    }
    verdict(None, budget)
}

/// Verdict for one atom's fiber, with the analytic answer alongside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomVerdict {
    pub atom: usize,
    pub p: LpExponent,
    /// `ℓ_p` on `ℝⁿ` is strictly convex iff `1 < p < ∞` or `n = 1`.
    pub analytic_strict: bool,
    pub verdict: ConvexityVerdict,
}

/// Random strict convexity on finitely many atoms: strict convexity of each
/// fiber, since every event of positive probability contains an atom.
pub fn random_strict_convexity_check(module: &RnModule, budget: usize, seed: u64) -> Vec<AtomVerdict> {
    let n = module.fiber_dim();
    module
        .fiber_p()
        .iter()
        .enumerate()
        .map(|(atom, p)| AtomVerdict {
            atom,
            p: *p,
            analytic_strict: n == 1 || (p.value() > 1.0 && !p.is_infinite()),
            verdict: strict_convexity_falsifier(&FiberSpace { p: *p, n }, budget, seed.wrapping_add(atom as u64)),
        })
        .collect()
}

/// Smallest `1 − ‖(x+y)/2‖` found over unit pairs with `‖x − y‖ ≥ ε`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusEstimate {
    pub space: String,
    pub epsilon: f64,
    pub estimate: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub distance: f64,
    pub budget: usize,
    pub seed: u64,
}

/// Moves from unit `x` along `d` and returns the unit `y` on that ray with
/// `‖x − y‖` just above `ε`, if the ray gets that far.
fn point_at_distance(space: &dyn NormedSpace, x: &[f64], d: &[f64], epsilon: f64) -> Option<Vec<f64>> {
    let at = |t: f64| -> Option<(Vec<f64>, f64)> {
        let y = normalized(space, axpy(x, t, d))?;
        let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        Some((y.clone(), space.norm(&diff)))
    };
    let mut hi = 1.0;
    let mut found = None;
    for _ in 0..60 {
        if let Some((y, dist)) = at(hi) {
            if dist >= epsilon {
                found = Some((y, dist));
                break;
            }
        }
        hi *= 2.0;
    }
    let (mut best, _) = found?;
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        match at(mid) {
            Some((y, dist)) if dist >= epsilon => {
                hi = mid;
                best = y;
            }
            _ => lo = mid,
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Some(best)
}

/// Upper estimate of the modulus of convexity at `ε`.
///
/// Candidates come from one deterministic stream (antipodal and coordinate
/// pairs first, then random rays, with every fourth draw perturbing the best
/// pair so far), so a larger budget only ever lowers the estimate.
pub fn modulus_of_convexity(
    space: &dyn NormedSpace,
    epsilon: f64,
    budget: usize,
    seed: u64,
) -> Result<ModulusEstimate> {
    if !(epsilon > 0.0 && epsilon <= 2.0) {
        return Err(Error::Argument(format!("ε must lie in (0, 2], got {epsilon}")));
    }
    let dim = space.dim();
    let mut best: Option<(f64, Vec<f64>, Vec<f64>, f64)> = None;
    // `slack` absorbs rounding in `‖x − (−x)‖ = 2‖x‖` for antipodal pairs.
    let consider = |x: Vec<f64>, y: Vec<f64>, slack: f64, best: &mut Option<(f64, Vec<f64>, Vec<f64>, f64)>| {
        let c = Counterexample::measure(space, x, y);
        if c.distance < epsilon - slack || (c.norm_x - 1.0).abs() > UNIT_TOL || (c.norm_y - 1.0).abs() > UNIT_TOL {
            return;
        }
        let deficit = (1.0 - c.midpoint_norm).max(0.0);
        if best.as_ref().is_none_or(|b| deficit < b.0) {
            *best = Some((deficit, c.x, c.y, c.distance));
        }
    };

    for a in 0..dim {
        if let Some(x) = normalized(space, unit(dim, a)) {
            let y: Vec<f64> = x.iter().map(|v| -v).collect();
            consider(x, y, UNIT_TOL, &mut best);
        }
    }
    for (x, y) in structured_pairs(dim) {
        if let (Some(x), Some(y)) = (normalized(space, x), normalized(space, y)) {
            let d: Vec<f64> = y.iter().zip(&x).map(|(b, a)| b - a).collect();
            if let Some(y) = point_at_distance(space, &x, &d, epsilon) {
                consider(x, y, 0.0, &mut best);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..budget {
        let (x, d) = match &best {
            Some((_, bx, by, _)) if k % 4 == 3 => {
                let sigma = 0.1 * 0.5f64.powi((k / 4 % 12) as i32);
                let x = axpy(bx, sigma, &gaussian(&mut rng, dim));
                let d: Vec<f64> = by.iter().zip(bx).map(|(b, a)| b - a).collect();
                let d = axpy(&d, sigma, &gaussian(&mut rng, dim));
                (x, d)
            }
            _ => (gaussian(&mut rng, dim), gaussian(&mut rng, dim)),
        };
        let Some(x) = normalized(space, x) else { continue };
        if let Some(y) = point_at_distance(space, &x, &d, epsilon) {
            consider(x, y, 0.0, &mut best);
        }
    }

    let (estimate, x, y, distance) =
        best.ok_or_else(|| Error::Undefined(format!("no unit pair at distance {epsilon} found")))?;
    Ok(ModulusEstimate {
        space: space.label(),
        epsilon,
        estimate,
        x,
        y,
        distance,
        budget,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomModulusReport {
    pub estimates: Vec<ModulusEstimate>,
    pub infimum: f64,
    /// The infimum over atoms stays above [`VANISHING_MODULUS`].
    pub uniformly_convex_by_estimate: bool,
    /// Candidate `δ`, bounded away from zero and capped at one.
    pub delta: Option<BoundedAwayField>,
}

/// Per-atom fiber moduli at the per-atom `ε`. On finitely many atoms a
/// uniform positive lower bound across atoms is exactly boundedness away
/// from zero.
pub fn random_modulus(
    module: &RnModule,
    epsilon: &BoundedAwayField,
    budget: usize,
    seed: u64,
) -> Result<RandomModulusReport> {
    if epsilon.cap() > 2.0 || epsilon.values().len() != module.atom_count() {
        return Err(Error::Argument(
            "ε must be a field on the module's atoms with values in (0, 2]".into(),
        ));
    }
    let n = module.fiber_dim();
    let mut estimates = Vec::with_capacity(module.atom_count());
    for (atom, p) in module.fiber_p().iter().enumerate() {
        let eps = epsilon.values().values()[atom];
        estimates.push(modulus_of_convexity(
            &FiberSpace { p: *p, n },
            eps,
            budget,
            seed.wrapping_add(atom as u64),
        )?);
    }
    let infimum = estimates.iter().map(|e| e.estimate).fold(f64::INFINITY, f64::min);
    let uniformly_convex_by_estimate = infimum > VANISHING_MODULUS;
    let delta = if uniformly_convex_by_estimate {
        let values = RandomVariable::new(estimates.iter().map(|e| e.estimate.min(1.0)).collect());
        Some(BoundedAwayField::from_values(values, 1.0)?)
    } else {
        None
    };
    Ok(RandomModulusReport {
        estimates,
        infimum,
        uniformly_convex_by_estimate,
        delta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub flavor: NormFlavor,
    pub samples: usize,
    pub seed: u64,
    /// Smallest `|ξ| − |η|` seen.
    pub min_margin: f64,
    /// Pairs `(ξ, η)` whose margin did not exceed `1e-12`.
    pub failures: Vec<(Vec<f64>, Vec<f64>)>,
    pub strict: bool,
}

/// Samples `0 ≤ η ≤ ξ`, `η ≠ ξ`, and records `|ξ| − |η|`.
pub fn monotonicity_check(
    ctx: &OrliczContext,
    flavor: NormFlavor,
    samples: usize,
    seed: u64,
) -> Result<MonotonicityReport> {
    let m = ctx.space().atom_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_margin = f64::INFINITY;
    let mut failures = Vec::new();
    for _ in 0..samples {
        let xi: Vec<f64> = (0..m)
            .map(|_| rng.sample::<f64, _>(StandardNormal).abs() + 0.01)
            .collect();
        let changed = rng.random_range(0..m);
        let eta: Vec<f64> = xi
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let u: f64 = if i == changed {
                    rng.random_range(0.0..0.9)
                } else {
                    rng.random_range(0.0..=1.0)
                };
                v * u
            })
            .collect();
        let a = ctx.norm(&RandomVariable::new(xi.clone()), flavor)?;
        let b = ctx.norm(&RandomVariable::new(eta.clone()), flavor)?;
        let margin = a - b;
        min_margin = min_margin.min(margin);
        if !(margin > 1e-12) && failures.len() < 8 {
            failures.push((xi, eta));
        }
    }
    Ok(MonotonicityReport {
        flavor,
        samples,
        seed,
        min_margin,
        strict: failures.is_empty(),
        failures,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftRoute {
    /// `(ξx₀, ηx₀)` from a scalar pair, `‖x₀‖ ≡ 1`.
    Scalar,
    /// `(I_D u/λ, I_D v/λ)` from a fiber pair at one atom, `λ = |I_D|_Φ`.
    Fiber,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftedCounterexample {
    pub route: LiftRoute,
    pub atom: Option<usize>,
    pub counterexample: Counterexample,
    pub revalidated: bool,
}

/// Lifts a scalar pair to the module through `x₀ = e₁`.
pub fn lift_scalar_pair(space: &ModuleSpace, xi: &[f64], eta: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let (_, x0) = space.mctx.module().full_support_indicator();
    let x = x0.scale_by(&RandomVariable::new(xi.to_vec()))?;
    let y = x0.scale_by(&RandomVariable::new(eta.to_vec()))?;
    Ok((ModuleSpace::flatten(&x), ModuleSpace::flatten(&y)))
}

/// Places a fiber pair on one atom and rescales by the norm of that atom's indicator.
pub fn lift_fiber_pair(space: &ModuleSpace, atom: usize, u: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let module = space.mctx.module();
    let (m, n) = (module.atom_count(), module.fiber_dim());
    let indicator = crate::prob::EventClass::singleton(atom).indicator(m);
    let lambda = space.mctx.ctx().norm(&indicator, space.flavor)?;
    let place = |w: &[f64]| {
        let mut flat = vec![0.0; m * n];
        for (j, value) in w.iter().enumerate() {
            flat[atom * n + j] = value / lambda;
        }
        flat
    };
    Ok((place(u), place(v)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrictConvexityHarness {
    pub flavor: NormFlavor,
    pub scalar: ConvexityVerdict,
    pub fibers: Vec<AtomVerdict>,
    pub composite: ConvexityVerdict,
    pub lifts: Vec<LiftedCounterexample>,
    pub scalar_strict: bool,
    pub fibers_strict: bool,
    pub composite_strict: bool,
    /// The composite is strictly convex exactly when both components are.
    pub consistent: bool,
}

/// Runs the scalar, fiber and composite searches and lifts every component
/// counterexample into the composite space.
pub fn strict_convexity_harness(
    mctx: &ModuleOrliczContext,
    flavor: NormFlavor,
    budget: usize,
    seed: u64,
) -> Result<StrictConvexityHarness> {
    let scalar_space = ScalarSpace {
        ctx: mctx.ctx().clone(),
        flavor,
    };
    let module_space = ModuleSpace {
        mctx: mctx.clone(),
        flavor,
    };
    let scalar = strict_convexity_falsifier(&scalar_space, budget, seed);
    let fibers = random_strict_convexity_check(mctx.module(), budget, seed.wrapping_add(1000));
    let composite = strict_convexity_falsifier(&module_space, budget, seed.wrapping_add(2000));

    let mut lifts = Vec::new();
    if let Some(c) = &scalar.counterexample {
        let (x, y) = lift_scalar_pair(&module_space, &c.x, &c.y)?;
        let lifted = Counterexample::measure(&module_space, x, y);
        lifts.push(LiftedCounterexample {
            route: LiftRoute::Scalar,
            atom: None,
            revalidated: lifted.revalidate(&module_space),
            counterexample: lifted,
        });
    }
    for atom in &fibers {
        if let Some(c) = &atom.verdict.counterexample {
            let (x, y) = lift_fiber_pair(&module_space, atom.atom, &c.x, &c.y)?;
            let lifted = Counterexample::measure(&module_space, x, y);
            lifts.push(LiftedCounterexample {
                route: LiftRoute::Fiber,
                atom: Some(atom.atom),
                revalidated: lifted.revalidate(&module_space),
                counterexample: lifted,
            });
        }
    }

    let scalar_strict = !scalar.is_falsified();
    let fibers_strict = fibers.iter().all(|a| !a.verdict.is_falsified());
    let composite_strict = !composite.is_falsified() && !lifts.iter().any(|l| l.revalidated);
    Ok(StrictConvexityHarness {
        flavor,
        consistent: composite_strict == (scalar_strict && fibers_strict),
        scalar,
        fibers,
        composite,
        lifts,
        scalar_strict,
        fibers_strict,
        composite_strict,
    })
}

/// The grid of `ε` used by the uniform-convexity harness.
pub const HARNESS_EPSILONS: [f64; 5] = [0.25, 0.5, 1.0, 1.5, 2.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusRow {
    pub epsilon: f64,
    pub scalar: f64,
    pub fibers: Vec<f64>,
    pub composite_direct: f64,
    /// Smallest deficit among lifted component pairs (they keep their distance).
    pub composite_lifted: Option<f64>,
    pub composite: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformConvexityHarness {
    pub flavor: NormFlavor,
    pub rows: Vec<ModulusRow>,
    /// Rows where the composite modulus stays positive while a component's vanishes.
    pub contradictions: Vec<String>,
}

/// Modulus estimates of the scalar space, each fiber and the composite on
/// the harness grid.
pub fn uniform_convexity_harness(
    mctx: &ModuleOrliczContext,
    flavor: NormFlavor,
    budget: usize,
    seed: u64,
) -> Result<UniformConvexityHarness> {
    let scalar_space = ScalarSpace {
        ctx: mctx.ctx().clone(),
        flavor,
    };
    let module_space = ModuleSpace {
        mctx: mctx.clone(),
        flavor,
    };
    let module = mctx.module();
    let mut rows = Vec::new();
    let mut contradictions = Vec::new();
    for &epsilon in &HARNESS_EPSILONS {
        let scalar = modulus_of_convexity(&scalar_space, epsilon, budget, seed)?;
        let mut fibers = Vec::new();
        let mut lifted: Vec<f64> = Vec::new();
        let (x, y) = lift_scalar_pair(&module_space, &scalar.x, &scalar.y)?;
        lifted.extend(lifted_deficit(&module_space, x, y, epsilon));
        for (atom, p) in module.fiber_p().iter().enumerate() {
            let fiber = FiberSpace {
                p: *p,
                n: module.fiber_dim(),
            };
            let est = modulus_of_convexity(&fiber, epsilon, budget, seed.wrapping_add(1 + atom as u64))?;
            let (x, y) = lift_fiber_pair(&module_space, atom, &est.x, &est.y)?;
            lifted.extend(lifted_deficit(&module_space, x, y, epsilon));
            fibers.push(est.estimate);
        }
        let direct = modulus_of_convexity(&module_space, epsilon, budget, seed.wrapping_add(500))?;
        let composite_lifted = lifted.into_iter().reduce(f64::min);
        let composite = composite_lifted.map_or(direct.estimate, |l| l.min(direct.estimate));
        let component_vanishes = scalar.estimate <= VANISHING_MODULUS || fibers.iter().any(|f| *f <= VANISHING_MODULUS);
        if composite > VANISHING_MODULUS && component_vanishes {
            contradictions.push(format!(
                "ε = {epsilon}: composite modulus {composite} while a component modulus vanishes"
            ));
        }
        rows.push(ModulusRow {
            epsilon,
            scalar: scalar.estimate,
            fibers,
            composite_direct: direct.estimate,
            composite_lifted,
            composite,
        });
    }
    Ok(UniformConvexityHarness {
        flavor,
        rows,
        contradictions,
    })
}

fn lifted_deficit(space: &ModuleSpace, x: Vec<f64>, y: Vec<f64>, epsilon: f64) -> Option<f64> {
    let c = Counterexample::measure(space, x, y);
    let unit = (c.norm_x - 1.0).abs() <= UNIT_TOL && (c.norm_y - 1.0).abs() <= UNIT_TOL;
    (unit && c.distance >= epsilon * (1.0 - 1e-12)).then(|| (1.0 - c.midpoint_norm).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::ProbSpace;
    use crate::young::YoungFunction;

    fn scalar(p: f64, m: usize) -> ScalarSpace {
        ScalarSpace {
            ctx: OrliczContext::new(YoungFunction::power(p).unwrap(), ProbSpace::uniform(m).unwrap()).unwrap(),
            flavor: NormFlavor::Luxemburg,
        }
    }

    fn module_ctx(phi: f64, fiber: LpExponent, m: usize, n: usize) -> ModuleOrliczContext {
        let space = ProbSpace::uniform(m).unwrap();
        let ctx = OrliczContext::new(YoungFunction::power(phi).unwrap(), space.clone()).unwrap();
        ModuleOrliczContext::new(ctx, RnModule::uniform(space, n, fiber).unwrap()).unwrap()
    }

    #[test]
    fn l1_is_falsified_by_disjoint_pair() {
        let space = scalar(1.0, 2);
        let v = strict_convexity_falsifier(&space, 0, 1);
        assert!(v.is_falsified());
        let c = v.counterexample.unwrap();
        assert_eq!((c.x.clone(), c.y.clone()), (vec![2.0, 0.0], vec![0.0, 2.0]));
        assert!(c.revalidate(&space));
    }

    #[test]
    fn l2_survives_search() {
        let v = strict_convexity_falsifier(&scalar(2.0, 3), 20_000, 5);
        assert_eq!(v.status, ConvexityStatus::VerifiedBySearch);
        assert_eq!(v.search_budget, 20_000);
    }

    #[test]
    fn l1_fibers_falsify_the_module() {
        let space = ModuleSpace {
            mctx: module_ctx(2.0, LpExponent::ONE, 2, 2),
            flavor: NormFlavor::Luxemburg,
        };
        let v = strict_convexity_falsifier(&space, 0, 1);
        assert!(v.is_falsified());
        assert!(v.counterexample.unwrap().revalidate(&space));
    }

    #[test]
    fn per_atom_fiber_verdicts() {
        let space = ProbSpace::uniform(2).unwrap();
        let module = RnModule::new(space, 2, vec![LpExponent::ONE, LpExponent::TWO]).unwrap();
        let verdicts = random_strict_convexity_check(&module, 2000, 3);
        assert!(verdicts[0].verdict.is_falsified() && !verdicts[0].analytic_strict);
        assert!(!verdicts[1].verdict.is_falsified() && verdicts[1].analytic_strict);
        let line = RnModule::uniform(ProbSpace::uniform(1).unwrap(), 1, LpExponent::ONE).unwrap();
        assert!(!random_strict_convexity_check(&line, 2000, 3)[0].verdict.is_falsified());
    }

    #[test]
    fn l2_modulus_matches_parallelogram_law() {
        let fiber = FiberSpace {
            p: LpExponent::TWO,
            n: 2,
        };
        for eps in [0.2, 1.0, 2.0] {
            let est = modulus_of_convexity(&fiber, eps, 2000, 11).unwrap();
            let exact = 1.0 - (1.0 - eps * eps / 4.0).sqrt();
            assert!(
                est.estimate >= exact - 1e-12 && est.estimate - exact < 1e-6,
                "{eps}: {}",
                est.estimate
            );
        }
        assert!(modulus_of_convexity(&fiber, 0.0, 10, 1).is_err());
        assert!(modulus_of_convexity(&fiber, 2.5, 10, 1).is_err());
    }

    #[test]
    fn l1_modulus_vanishes() {
        let fiber = FiberSpace {
            p: LpExponent::ONE,
            n: 2,
        };
        assert!(modulus_of_convexity(&fiber, 0.5, 100, 2).unwrap().estimate <= 1e-12);
    }

    #[test]
    fn modulus_is_antitone_in_budget() {
        let space = scalar(3.0, 3);
        let small = modulus_of_convexity(&space, 0.7, 50, 4).unwrap().estimate;
        let large = modulus_of_convexity(&space, 0.7, 400, 4).unwrap().estimate;
        assert!(large <= small);
    }

    #[test]
    fn random_modulus_of_l2_module() {
        let module = RnModule::uniform(ProbSpace::uniform(2).unwrap(), 2, LpExponent::TWO).unwrap();
        let eps = BoundedAwayField::new(RandomVariable::constant(2, 1.0), 1.0, 2.0).unwrap();
        let report = random_modulus(&module, &eps, 500, 1).unwrap();
        assert!((report.infimum - (1.0 - 3f64.sqrt() / 2.0)).abs() < 1e-6);
        assert!(report.uniformly_convex_by_estimate && report.delta.is_some());
    }

    #[test]
    fn monotonicity_margins() {
        let ctx = OrliczContext::new(YoungFunction::power(2.0).unwrap(), ProbSpace::uniform(2).unwrap()).unwrap();
        let report = monotonicity_check(&ctx, NormFlavor::Luxemburg, 500, 1).unwrap();
        assert!(report.strict && report.min_margin > 0.0);
    }

    #[test]
    fn harness_quadrants() {
        let h =
            strict_convexity_harness(&module_ctx(2.0, LpExponent::TWO, 2, 2), NormFlavor::Luxemburg, 2000, 1).unwrap();
        assert!(h.consistent && h.composite_strict);
        let h =
            strict_convexity_harness(&module_ctx(2.0, LpExponent::ONE, 2, 2), NormFlavor::Luxemburg, 2000, 1).unwrap();
        assert!(h.consistent && !h.composite_strict);
        assert!(h.lifts.iter().any(|l| l.route == LiftRoute::Fiber && l.revalidated));
        let h =
            strict_convexity_harness(&module_ctx(1.0, LpExponent::TWO, 2, 2), NormFlavor::Luxemburg, 2000, 1).unwrap();
        assert!(h.consistent && !h.composite_strict);
        assert!(h.lifts.iter().any(|l| l.route == LiftRoute::Scalar && l.revalidated));
    }
}
