//! Random functionals acting on Orlicz hearts through `x ↦ E[⟨x, f⟩]`, and
//! the reverse construction of `f` from a black-box linear functional.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::module::{ModuleElement, RandomFunctional};
use crate::orlicz::NormFlavor;
use crate::orlicz_module::ModuleOrliczContext;
use crate::prob::{pointwise_sup, sgn, RandomVariable};

/// Multi-start ascent budget for [`EmbeddedFunctional::operator_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AscentBudget {
    pub starts: usize,
    pub steps: usize,
}

impl Default for AscentBudget {
    fn default() -> Self {
        Self { starts: 16, steps: 500 }
    }
}

/// Best point found by the ascent; `start` is the index of the winning start.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorNorm {
    pub value: f64,
    pub start: usize,
    pub maximizer: ModuleElement,
}

/// `x ↦ E[⟨x, f⟩]` on a module Orlicz space.
#[derive(Debug, Clone)]
pub struct EmbeddedFunctional<'a> {
    f: RandomFunctional,
    mctx: &'a ModuleOrliczContext,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsometryReport {
    pub lhs: f64,
    pub rhs: f64,
    pub flavor: NormFlavor,
    pub pass: bool,
    pub witness_gap: f64,
}

/// Output of [`represent`]: the recovered functional and the intermediate
/// objects of its construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Representation {
    pub functional: RandomFunctional,
    /// `ξ_{e_j}(ω) = F(I_ω e_j)/p_ω`, indexed `[j][ω]`.
    pub basis_densities: Vec<RandomVariable>,
    /// `∨{|g(x)| : ‖x‖ ≤ 1}` evaluated through `F` on a directed family of unit fields.
    pub x_g: RandomVariable,
    pub dual_norm: RandomVariable,
    pub linearity_defect: f64,
    pub reproduction_error: f64,
}

/// Embeds `f`. Fails when the target space is trivial (a jump in `Φ`) or `f`
/// has non-finite entries.
pub fn embed<'a>(f: &RandomFunctional, mctx: &'a ModuleOrliczContext) -> Result<EmbeddedFunctional<'a>> {
    mctx.module().check_shape(f.vectors())?;
    if f.vectors().iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Membership("functional has non-finite entries".into()));
    }
    if !mctx.ctx().phi().is_finite_valued() {
        return Err(Error::Membership(
            "Φ jumps to +∞, so the Orlicz heart is trivial and carries no isometric dual".into(),
        ));
    }
    Ok(EmbeddedFunctional { f: f.clone(), mctx })
}

impl EmbeddedFunctional<'_> {
    pub fn functional(&self) -> &RandomFunctional {
        &self.f
    }

    pub fn evaluate(&self, x: &ModuleElement) -> Result<f64> {
        let pairing = self.mctx.module().apply_functional(&self.f, x)?;
        self.mctx.ctx().space().expectation(&pairing)
    }

    /// Best `E[⟨x, f⟩]` over the unit ball of the chosen module norm.
    ///
    /// Each start is rescaled onto the unit sphere and climbs the ratio
    /// `E[⟨x, f⟩]/N(x)`. The gradient of `N` comes from the chain rule through
    /// the random norm: for the Luxemburg norm by implicit differentiation of
    /// `E[Φ(‖x‖/λ)] = 1`, for the Orlicz norm from the envelope of the Amemiya
    /// formula at its minimizer. After every step each fiber is turned toward
    /// the norming direction of `f`, which keeps `‖x‖` and can only raise the
    /// pairing. The step doubles on success and halves on failure.
    pub fn operator_norm(&self, flavor: NormFlavor, budget: AscentBudget, seed: u64) -> Result<OperatorNorm> {
        let module = self.mctx.module();
        let (m, n) = (module.atom_count(), module.fiber_dim());
        if self.f.is_zero() {
            return Ok(OperatorNorm {
                value: 0.0,
                start: 0,
                maximizer: ModuleElement::zeros(m, n),
            });
        }
        let norming = module.norming_field(&self.f)?;
        let mut best: Option<OperatorNorm> = None;
        for start in 0..budget.starts.max(1) {
            let x0 = if start == 0 {
                ModuleElement::new(self.f.vectors().to_vec())
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(start as u64));
                ModuleElement::new(
                    (0..m)
                        .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
                        .collect(),
                )
            };
            let Some((value, x)) = self.climb(x0, &norming, flavor, budget.steps)? else {
                continue;
            };
            if best.as_ref().is_none_or(|b| value > b.value) {
                best = Some(OperatorNorm {
                    value,
                    start,
                    maximizer: x,
                });
            }
        }
        Ok(best.unwrap_or(OperatorNorm {
            value: 0.0,
            start: 0,
            maximizer: ModuleElement::zeros(m, n),
        }))
    }

    fn align(&self, x: &ModuleElement, norming: &ModuleElement) -> Result<ModuleElement> {
        let r = self.mctx.module().random_norm(x)?;
        norming.scale_by(&r)
    }

    /// Returns `x/N(x)` and its pairing, or `None` for `x = 0`.
    fn on_sphere(&self, x: &ModuleElement, flavor: NormFlavor) -> Result<Option<(f64, ModuleElement)>> {
        let norm = self.mctx.module_norm(x, flavor)?;
        if !(norm > 0.0 && norm.is_finite()) {
            return Ok(None);
        }
        let x = x.scale(1.0 / norm);
        Ok(Some((self.evaluate(&x)?, x)))
    }

    fn climb(
        &self,
        x0: ModuleElement,
        norming: &ModuleElement,
        flavor: NormFlavor,
        steps: usize,
    ) -> Result<Option<(f64, ModuleElement)>> {
        let Some((mut value, mut x)) = self.on_sphere(&self.align(&x0, norming)?, flavor)? else {
            return Ok(None);
        };
        let mut eta = 0.1;
        for _ in 0..steps {
            let Some(grad) = self.ratio_gradient(&x, value, flavor)? else {
                break;
            };
            let (gn, xn) = (frobenius(&grad), frobenius(&x));
            if gn == 0.0 {
                break;
            }
            let trial = x.lin_comb(1.0, &grad, eta * xn / gn)?;
            match self.on_sphere(&self.align(&trial, norming)?, flavor)? {
                Some((v, y)) if v > value => {
                    let gain = (v - value) / value.abs().max(f64::MIN_POSITIVE);
                    value = v;
                    x = y;
                    eta = (eta * 2.0).min(1.0);
                    if gain < 1e-10 {
                        break;
                    }
                }
                _ => {
                    eta /= 2.0;
                    if eta < 1e-14 {
                        break;
                    }
                }
            }
        }
        Ok(Some((value, x)))
    }

    /// Gradient of `E[⟨x, f⟩]/N(x)` at a point with `N(x) = 1` and pairing `value`.
    fn ratio_gradient(&self, x: &ModuleElement, value: f64, flavor: NormFlavor) -> Result<Option<ModuleElement>> {
        let module = self.mctx.module();
        let ctx = self.mctx.ctx();
        let weights = ctx.space().weights();
        let r = module.random_norm(x)?;
        let phi = ctx.phi();
        let outer: Vec<f64> = match flavor {
            NormFlavor::Luxemburg => {
                let lambda = ctx.luxemburg_norm(&r)?;
                let d: Vec<f64> = r
                    .values()
                    .iter()
                    .map(|v| phi.right_derivative(v / lambda).unwrap_or(f64::INFINITY))
                    .collect();
                let denom: f64 = weights
                    .iter()
                    .zip(&d)
                    .zip(r.values())
                    .map(|((w, d), v)| w * d * v)
                    .sum();
                weights.iter().zip(&d).map(|(w, d)| w * d * lambda / denom).collect()
            }
            NormFlavor::Orlicz => {
                let k = ctx.amemiya(&r)?.k;
                r.values()
                    .iter()
                    .zip(weights)
                    .map(|(v, w)| w * phi.right_derivative(k * v).unwrap_or(f64::INFINITY))
                    .collect()
            }
        };
        if outer.iter().any(|v| !v.is_finite()) {
            return Ok(None);
        }
        let mut grad = Vec::with_capacity(x.atom_count());
        for (i, xi) in x.vectors().iter().enumerate() {
            let inner = lp_subgradient(xi, module.fiber_p()[i].value());
            grad.push(
                inner
                    .iter()
                    .zip(self.f.atom(i))
                    .map(|(g, f)| weights[i] * f - value * outer[i] * g)
                    .collect(),
            );
        }
        Ok(Some(ModuleElement::new(grad)))
    }
}

fn frobenius(x: &ModuleElement) -> f64 {
    x.vectors().iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

/// A subgradient of the `ℓ_p` norm at `v`.
fn lp_subgradient(v: &[f64], p: f64) -> Vec<f64> {
    let norm = crate::module::lp_norm(v, p);
    if norm == 0.0 {
        return vec![0.0; v.len()];
    }
    if p == 1.0 {
        return v.iter().map(|x| sgn(*x)).collect();
    }
    if p == f64::INFINITY {
        let j = v.iter().position(|x| x.abs() == norm).expect("attained");
        let mut g = vec![0.0; v.len()];
        g[j] = sgn(v[j]);
        return g;
    }
    v.iter().map(|x| sgn(*x) * (x.abs() / norm).powf(p - 1.0)).collect()
}

/// The scalar norm of `‖f‖*` that the operator norm should equal: the
/// conjugate-Orlicz norm for a Luxemburg module norm and the
/// conjugate-Luxemburg norm for an Orlicz module norm.
pub fn dual_side_norm(f: &RandomFunctional, mctx: &ModuleOrliczContext, flavor: NormFlavor) -> Result<f64> {
    let dual = mctx.module().dual_random_norm(f)?;
    mctx.ctx().swapped().norm(&dual, flavor.dual())
}

/// `x* = ξ*·u` with `u` the norming field of `f` and `ξ*` the scalar extremal
/// for `‖f‖*`; returns `x*`, its module norm and `E[⟨x*, f⟩]`.
fn witness_parts(
    f: &RandomFunctional,
    mctx: &ModuleOrliczContext,
    flavor: NormFlavor,
) -> Result<(ModuleElement, f64, f64)> {
    if f.is_zero() {
        return Err(Error::Argument("the zero functional has no witness".into()));
    }
    let embedded = embed(f, mctx)?;
    let module = mctx.module();
    let dual = module.dual_random_norm(f)?;
    let swapped = mctx.ctx().swapped();
    let xi = match flavor {
        NormFlavor::Luxemburg => swapped.pairing_witness(&dual)?,
        NormFlavor::Orlicz => swapped.luxemburg_norming(&dual)?,
    };
    let x = module.norming_field(f)?.scale_by(&xi)?;
    let norm = mctx.module_norm(&x, flavor)?;
    let pairing = embedded.evaluate(&x)?;
    Ok((x, norm, pairing))
}

/// Element of the unit ball (up to `tol`) whose pairing with `f` reaches the
/// dual-side norm (up to `tol`).
pub fn witness_element(
    f: &RandomFunctional,
    mctx: &ModuleOrliczContext,
    flavor: NormFlavor,
    tol: f64,
) -> Result<ModuleElement> {
    let (x, norm, pairing) = witness_parts(f, mctx, flavor)?;
    let target = dual_side_norm(f, mctx, flavor)?;
    if norm > 1.0 + tol {
        return Err(Error::Tolerance(format!("witness has norm {norm} > 1 + {tol}")));
    }
    if pairing < target - tol {
        return Err(Error::Tolerance(format!(
            "witness pairs to {pairing}, short of {target} by more than {tol}"
        )));
    }
    Ok(x)
}

/// Compares the operator norm of the embedded `f` (best of ascent and
/// witness) with the dual-side norm of `‖f‖*`; passes within `1e-4·max(rhs, 1)`.
pub fn isometry_check(
    f: &RandomFunctional,
    mctx: &ModuleOrliczContext,
    flavor: NormFlavor,
    budget: AscentBudget,
    seed: u64,
) -> Result<IsometryReport> {
    let embedded = embed(f, mctx)?;
    let rhs = dual_side_norm(f, mctx, flavor)?;
    if f.is_zero() {
        return Ok(IsometryReport {
            lhs: 0.0,
            rhs,
            flavor,
            pass: rhs == 0.0,
            witness_gap: 0.0,
        });
    }
    let ascent = embedded.operator_norm(flavor, budget, seed)?.value;
    let (_, norm, pairing) = witness_parts(f, mctx, flavor)?;
    // rescaled into the unit ball the witness is a certified lower bound
    let witness = pairing / norm.max(1.0);
    let lhs = ascent.max(witness);
    Ok(IsometryReport {
        lhs,
        rhs,
        flavor,
        pass: (lhs - rhs).abs() <= 1e-4 * rhs.max(1.0),
        witness_gap: rhs - witness,
    })
}

/// Recovers the random functional behind a black-box linear `F`.
///
/// On finitely many atoms the density of `A ↦ F(I_A x)` is
/// `ξ_x(ω) = F(I_ω x)/p_ω`; applied to the coordinate fields it gives
/// `f(ω)_j`. Linearity of `F` is sampled first.
pub fn represent(
    functional: &dyn Fn(&ModuleElement) -> f64,
    mctx: &ModuleOrliczContext,
    seed: u64,
) -> Result<Representation> {
    let module = mctx.module();
    let weights = mctx.ctx().space().weights();
    let (m, n) = (module.atom_count(), module.fiber_dim());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_element = |rng: &mut ChaCha8Rng| {
        ModuleElement::new(
            (0..m)
                .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
                .collect(),
        )
    };

    let mut linearity_defect = 0.0f64;
    for _ in 0..16 {
        let x = random_element(&mut rng);
        let y = random_element(&mut rng);
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        let (fx, fy) = (functional(&x), functional(&y));
        let combined = functional(&x.lin_comb(a, &y, b)?);
        let defect = (combined - a * fx - b * fy).abs();
        let scale = 1.0 + (a * fx).abs() + (b * fy).abs();
        if !(defect <= 1e-10 * scale) {
            return Err(Error::Precondition(format!(
                "functional is not linear: F(ax + by) − aF(x) − bF(y) = {defect} for a = {a}, b = {b}, x = {:?}, y = {:?}",
                x.vectors(),
                y.vectors()
            )));
        }
        linearity_defect = linearity_defect.max(defect / scale);
    }

    let coordinate = |atom: usize, j: usize| {
        let mut v = vec![vec![0.0; n]; m];
        v[atom][j] = 1.0;
        ModuleElement::new(v)
    };
    let mut vectors = vec![vec![0.0; n]; m];
    for (atom, row) in vectors.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = functional(&coordinate(atom, j)) / weights[atom];
        }
    }
    let f = RandomFunctional::new(vectors);
    let basis_densities = (0..n)
        .map(|j| RandomVariable::new((0..m).map(|atom| f.atom(atom)[j]).collect()))
        .collect();

    // g(x)(ω) = F(I_ω x)/p_ω, maximized over unit fields
    let g = |x: &ModuleElement| -> RandomVariable {
        RandomVariable::new(
            (0..m)
                .map(|atom| {
                    let single = crate::prob::EventClass::singleton(atom);
                    functional(&x.restrict(&single)).abs() / weights[atom]
                })
                .collect(),
        )
    };
    let mut family = vec![g(&module.norming_field(&f)?)];
    for j in 0..n {
        let mut e = vec![vec![0.0; n]; m];
        for row in e.iter_mut() {
            row[j] = 1.0;
        }
        family.push(g(&ModuleElement::new(e)));
    }
    let x_g = pointwise_sup(&family)?;

    let embedded = EmbeddedFunctional { f: f.clone(), mctx };
    let mut reproduction_error = 0.0f64;
    let mut spanning: Vec<ModuleElement> = (0..m)
        .flat_map(|atom| (0..n).map(move |j| (atom, j)))
        .map(|(atom, j)| coordinate(atom, j))
        .collect();
    spanning.extend((0..8).map(|_| random_element(&mut rng)));
    for x in &spanning {
        reproduction_error = reproduction_error.max((embedded.evaluate(x)? - functional(x)).abs());
    }

    Ok(Representation {
        dual_norm: module.dual_random_norm(&f)?,
        functional: f,
        basis_densities,
        x_g,
        linearity_defect,
        reproduction_error,
    })
}
