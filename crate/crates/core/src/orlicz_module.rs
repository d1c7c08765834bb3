//! Orlicz spaces `L^Φ(E)` and hearts `M^Φ(E)` built from a random normed module.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::module::{ModuleElement, RnModule};
use crate::orlicz::{Membership, NormFlavor, OrliczContext};
use crate::prob::RandomVariable;

/// An Orlicz context and a module over the same probability space.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleOrliczContext {
    ctx: OrliczContext,
    module: RnModule,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    /// Smallest truncation level whose distance to `x` is below the tolerance.
    pub n_within_tol: u64,
    pub distance_within_tol: f64,
    /// Smallest truncation level reproducing `x` exactly.
    pub n_exact: u64,
    pub exact_distance: f64,
    /// `(n, ‖x − xₙ‖_{Φ,L})` at every level where the truncation changes.
    pub levels: Vec<(u64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyReport {
    /// Largest `‖x_j − x_k‖_{Φ,L}` over the second half of the sequence.
    pub tail_diameter: f64,
    /// `‖x_k − x‖_{Φ,L}` for each term.
    pub norm_distances: Vec<f64>,
    /// `E[‖x_k − x‖ / (1 + ‖x_k − x‖)]` for each term.
    pub prob_distances: Vec<f64>,
    /// `Φ⁻¹(1)`: by Jensen, each probability distance is at most this times the norm distance.
    pub jensen_constant: f64,
    pub converges: bool,
    pub prob_bound_holds: bool,
    pub passed: bool,
}

impl ModuleOrliczContext {
    pub fn new(ctx: OrliczContext, module: RnModule) -> Result<Self> {
        if ctx.space() != module.space() {
            return Err(Error::Argument(
                "Orlicz context and module live on different spaces".into(),
            ));
        }
        Ok(Self { ctx, module })
    }

    pub fn ctx(&self) -> &OrliczContext {
        &self.ctx
    }

    pub fn module(&self) -> &RnModule {
        &self.module
    }

    pub fn module_membership(&self, x: &ModuleElement) -> Result<Membership> {
        self.ctx.membership(&self.module.random_norm(x)?)
    }

    /// Scalar norm of the random norm `‖x‖`.
    pub fn module_norm(&self, x: &ModuleElement, flavor: NormFlavor) -> Result<f64> {
        self.ctx.norm(&self.module.random_norm(x)?, flavor)
    }

    /// `x` restricted to `{‖x‖ ≤ n}`.
    pub fn truncation(&self, x: &ModuleElement, n: u64) -> Result<ModuleElement> {
        let norms = self.module.random_norm(x)?;
        let level = n as f64;
        let keep = RandomVariable::new(
            norms
                .values()
                .iter()
                .map(|v| if *v <= level { 1.0 } else { 0.0 })
                .collect(),
        );
        Ok(x.restrict(&keep.support()?))
    }

    /// Distance from `x` to its bounded truncations. Only the levels
    /// `⌈‖x‖(ω)⌉` change the truncation, so those are the ones evaluated.
    pub fn density_check(&self, x: &ModuleElement, tol: f64) -> Result<DensityReport> {
        if !(tol > 0.0) {
            return Err(Error::Argument(format!("tolerance must be > 0, got {tol}")));
        }
        if !self.module_membership(x)?.in_m_phi {
            return Err(Error::Precondition(
                "element lies outside the Orlicz heart; bounded truncations cannot approach it".into(),
            ));
        }
        let norms = self.module.random_norm(x)?;
        let mut levels: Vec<u64> = norms.values().iter().map(|v| (v.ceil() as u64).max(1)).collect();
        levels.push(1);
        levels.sort_unstable();
        levels.dedup();
        let mut table = Vec::with_capacity(levels.len());
        for n in levels {
            let gap = x.sub(&self.truncation(x, n)?)?;
            table.push((n, self.module_norm(&gap, NormFlavor::Luxemburg)?));
        }
        let (n_within_tol, distance_within_tol) = *table
            .iter()
            .find(|(_, d)| *d < tol)
            .expect("the top level reproduces x");
        let (n_exact, exact_distance) = *table
            .iter()
            .find(|(_, d)| *d == 0.0)
            .expect("the top level reproduces x");
        Ok(DensityReport {
            n_within_tol,
            distance_within_tol,
            n_exact,
            exact_distance,
            levels: table,
        })
    }

    /// Checks that a sequence Cauchy in `‖·‖_{Φ,L}` converges to `limit`
    /// (its last term when omitted), and that its random norms converge in
    /// probability alongside.
    pub fn cauchy_limit_check(
        &self,
        sequence: &[ModuleElement],
        limit: Option<&ModuleElement>,
        tol: f64,
    ) -> Result<CauchyReport> {
        if !(tol > 0.0) {
            return Err(Error::Argument(format!("tolerance must be > 0, got {tol}")));
        }
        let last = sequence
            .last()
            .ok_or_else(|| Error::Argument("empty sequence".into()))?;
        let dist = |a: &ModuleElement, b: &ModuleElement| -> Result<f64> {
            self.module_norm(&a.sub(b)?, NormFlavor::Luxemburg)
        };

        let start = sequence.len() / 2;
        let mut tail_diameter = 0.0f64;
        for j in start..sequence.len() {
            for k in (j + 1)..sequence.len() {
                let d = dist(&sequence[j], &sequence[k])?;
                if d > tol {
                    return Err(Error::Precondition(format!(
                        "not Cauchy: terms {j} and {k} are {d} apart (tolerance {tol})"
                    )));
                }
                tail_diameter = tail_diameter.max(d);
            }
        }

        let limit = limit.unwrap_or(last);
        let jensen_constant = self.ctx.phi().inverse(1.0)?;
        let zero = RandomVariable::zeros(self.module.atom_count());
        let mut norm_distances = Vec::with_capacity(sequence.len());
        let mut prob_distances = Vec::with_capacity(sequence.len());
        let mut prob_bound_holds = true;
        for x in sequence {
            let gap = x.sub(limit)?;
            let d = self.module_norm(&gap, NormFlavor::Luxemburg)?;
            let r = self.ctx.space().prob_metric(&self.module.random_norm(&gap)?, &zero)?;
            if r > jensen_constant * d * (1.0 + 1e-12) + 1e-15 {
                prob_bound_holds = false;
            }
            norm_distances.push(d);
            prob_distances.push(r);
        }
        let converges = *norm_distances.last().expect("nonempty") <= tol;
        Ok(CauchyReport {
            tail_diameter,
            norm_distances,
            prob_distances,
            jensen_constant,
            converges,
            prob_bound_holds,
            passed: converges && prob_bound_holds,
        })
    }
}
