//! Luxemburg and Orlicz norms of random variables on a finite space.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::optim::{bisect_predicate, golden_section_max, golden_section_min};
use crate::prob::{sgn, ProbSpace, RandomVariable};
use crate::young::YoungFunction;

/// Largest atom count accepted by [`OrliczContext::orlicz_norm_oracle`].
pub const ORACLE_MAX_ATOMS: usize = 4;

/// Search window for `ln k` in the Amemiya formula.
const LOG_K_RANGE: f64 = 35.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormFlavor {
    Luxemburg,
    Orlicz,
}

impl NormFlavor {
    /// The flavor measuring dual densities: Luxemburg pairs with Orlicz and back.
    pub fn dual(self) -> Self {
        match self {
            Self::Luxemburg => Self::Orlicz,
            Self::Orlicz => Self::Luxemburg,
        }
    }
}

/// Minimizer of the Amemiya formula `inf_k (1 + E[Φ(k|ξ|)]) / k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amemiya {
    pub value: f64,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleValue {
    pub value: f64,
    pub assumption: &'static str,
}

/// Which Orlicz spaces a variable belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Membership {
    pub in_l_phi: bool,
    pub in_m_phi: bool,
}

/// A Young function, its conjugate and the space they act on.
#[derive(Debug, Clone, PartialEq)]
pub struct OrliczContext {
    phi: YoungFunction,
    psi: YoungFunction,
    space: ProbSpace,
}

impl OrliczContext {
    pub fn new(phi: YoungFunction, space: ProbSpace) -> Result<Self> {
        let psi = phi.conjugate()?;
        Ok(Self { phi, psi, space })
    }

    pub fn phi(&self) -> &YoungFunction {
        &self.phi
    }

    pub fn psi(&self) -> &YoungFunction {
        &self.psi
    }

    pub fn space(&self) -> &ProbSpace {
        &self.space
    }

    /// The same space with `Φ` and `Ψ` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            phi: self.psi.clone(),
            psi: self.phi.clone(),
            space: self.space.clone(),
        }
    }

    fn check(&self, xi: &RandomVariable) -> Result<()> {
        check_len(self.space.atom_count(), xi.len())?;
        if xi.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("random variables must be finite".into()));
        }
        Ok(())
    }

    fn modular_abs(&self, abs: &[f64], scale: f64) -> f64 {
        let mut total = 0.0;
        for (w, v) in self.space.weights().iter().zip(abs) {
            let phi = self.phi.value(v * scale);
            if phi == f64::INFINITY {
                return f64::INFINITY;
            }
            total += w * phi;
        }
        total
    }

    /// `E[Φ(|ξ|/λ)]`.
    pub fn modular(&self, xi: &RandomVariable, lambda: f64) -> Result<f64> {
        self.check(xi)?;
        if !(lambda > 0.0) {
            return Err(Error::Argument(format!("modular needs λ > 0, got {lambda}")));
        }
        let abs: Vec<f64> = xi.values().iter().map(|v| v.abs()).collect();
        Ok(self.modular_abs(&abs, 1.0 / lambda))
    }

    pub fn membership(&self, xi: &RandomVariable) -> Result<Membership> {
        self.check(xi)?;
        // every finite variable on a finite space is bounded, so only a jump can exclude it
        let in_m_phi = self.phi.is_finite_valued() || xi.is_zero();
        Ok(Membership {
            in_l_phi: true,
            in_m_phi,
        })
    }

    /// `inf{λ > 0 : E[Φ(|ξ|/λ)] ≤ 1}` by bisection on `λ`.
    pub fn luxemburg_norm(&self, xi: &RandomVariable) -> Result<f64> {
        self.check(xi)?;
        let abs: Vec<f64> = xi.values().iter().map(|v| v.abs()).collect();
        self.luxemburg_abs(&abs)
    }

    pub(crate) fn luxemburg_abs(&self, abs: &[f64]) -> Result<f64> {
        let top = abs.iter().copied().fold(0.0, f64::max);
        if top == 0.0 {
            return Ok(0.0);
        }
        let fits = |lambda: f64| self.modular_abs(abs, 1.0 / lambda) <= 1.0;
        // at λ = max|ξ|/Φ⁻¹(1) every atom sits at or below Φ⁻¹(1)
        let mut hi = top / self.phi.inverse(1.0)?;
        while !fits(hi) {
            hi *= 2.0;
        }
        let mut lo = hi / 2.0;
        while fits(lo) {
            hi = lo;
            lo /= 2.0;
            if lo == 0.0 {
                return Ok(hi);
            }
        }
        let (_, hi) = bisect_predicate(fits, lo, hi, 200, 1e-15);
        Ok(hi)
    }

    /// Amemiya formula, minimized over `ln k` by golden-section search.
    ///
    /// `k·M'(k) − M(k)` is nondecreasing for the convex `M(k) = E[Φ(k|ξ|)]`,
    /// so `(1 + M(k))/k` falls and then rises: it is unimodal in `k`.
    pub fn amemiya(&self, xi: &RandomVariable) -> Result<Amemiya> {
        self.check(xi)?;
        let abs: Vec<f64> = xi.values().iter().map(|v| v.abs()).collect();
        Ok(self.amemiya_abs(&abs))
    }

    pub(crate) fn amemiya_abs(&self, abs: &[f64]) -> Amemiya {
        let top = abs.iter().copied().fold(0.0, f64::max);
        if top == 0.0 {
            return Amemiya {
                value: 0.0,
                k: f64::INFINITY,
            };
        }
        let unit: Vec<f64> = abs.iter().map(|v| v / top).collect();
        let objective = |u: f64| {
            let k = u.exp();
            (1.0 + self.modular_abs(&unit, k)) / k
        };
        // with max|ξ| = 1 the objective is finite exactly for k up to the jump point
        let upper = self.phi.finite_domain_end().map_or(LOG_K_RANGE, f64::ln);
        let (u, value) = golden_section_min(objective, -LOG_K_RANGE, upper, 300, 1e-16);
        Amemiya {
            value: top * value,
            k: u.exp() / top,
        }
    }

    pub fn orlicz_norm(&self, xi: &RandomVariable) -> Result<f64> {
        Ok(self.amemiya(xi)?.value)
    }

    pub fn norm(&self, xi: &RandomVariable, flavor: NormFlavor) -> Result<f64> {
        match flavor {
            NormFlavor::Luxemburg => self.luxemburg_norm(xi),
            NormFlavor::Orlicz => self.orlicz_norm(xi),
        }
    }

    pub(crate) fn norm_abs(&self, abs: &[f64], flavor: NormFlavor) -> Result<f64> {
        match flavor {
            NormFlavor::Luxemburg => self.luxemburg_abs(abs),
            NormFlavor::Orlicz => Ok(self.amemiya_abs(abs).value),
        }
    }

    /// Orlicz norm straight from its definition as a supremum of pairings.
    ///
    /// Writing `bᵢ = pᵢ·Ψ(ηᵢ)` for the share of the modular budget spent on
    /// atom `i`, the best `ηᵢ` is `Ψ⁻¹(bᵢ/pᵢ)` and the objective
    /// `Σ pᵢ|ξᵢ|Ψ⁻¹(bᵢ/pᵢ)` is separable and concave on the simplex. A grid
    /// start followed by pairwise transfers reaches its maximum.
    pub fn orlicz_norm_oracle(&self, xi: &RandomVariable) -> Result<OracleValue> {
        self.check(xi)?;
        let m = self.space.atom_count();
        if m > ORACLE_MAX_ATOMS {
            return Err(Error::Scale {
                what: "atoms",
                limit: ORACLE_MAX_ATOMS,
                found: m,
            });
        }
        let (value, _) = self.budget_ascent(xi, 20)?;
        Ok(OracleValue {
            value,
            assumption: "unit ball of the dual pairing is the conjugate modular ball E[Ψ(|η|)] ≤ 1",
        })
    }

    /// Maximizes `E[|ξ|η]` over `E[Ψ(η)] ≤ 1`, `η ≥ 0`; returns the value and `η`.
    fn budget_ascent(&self, xi: &RandomVariable, grid: usize) -> Result<(f64, Vec<f64>)> {
        let weights = self.space.weights();
        let m = weights.len();
        let abs: Vec<f64> = xi.values().iter().map(|v| v.abs()).collect();
        let share = |i: usize, b: f64| -> f64 {
            if abs[i] == 0.0 {
                return 0.0;
            }
            let eta = self.psi.inverse(b.max(0.0) / weights[i]).unwrap_or(f64::INFINITY);
            weights[i] * abs[i] * eta
        };
        let total = |b: &[f64]| (0..m).map(|i| share(i, b[i])).sum::<f64>();

        let mut best = vec![0.0; m];
        best[0] = 1.0;
        let mut best_value = total(&best);
        let mut b = vec![0usize; m];
        simplex_points(&mut b, 0, grid, &mut |point: &[usize]| {
            let candidate: Vec<f64> = point.iter().map(|c| *c as f64 / grid as f64).collect();
            let v = total(&candidate);
            if v > best_value {
                best_value = v;
                best = candidate;
            }
        });

        for _ in 0..500 {
            let before = best_value;
            for i in 0..m {
                for j in 0..m {
                    if i == j {
                        continue;
                    }
                    let (bi, bj) = (best[i], best[j]);
                    let pair = |d: f64| share(i, bi + d) + share(j, bj - d);
                    let (d, v) = golden_section_max(pair, -bi, bj, 200, 1e-16);
                    if v > pair(0.0) {
                        best[i] = bi + d;
                        best[j] = bj - d;
                    }
                }
            }
            best_value = total(&best);
            if best_value <= before * (1.0 + 1e-15) {
                break;
            }
        }
        if !best_value.is_finite() {
            return Err(Error::Undefined("conjugate inverse is unbounded".into()));
        }
        let eta: Vec<f64> = (0..m)
            .map(|i| {
                let e = self.psi.inverse(best[i].max(0.0) / weights[i]).unwrap_or(0.0);
                e * sgn(xi.values()[i])
            })
            .collect();
        Ok((best_value, eta))
    }

    /// `η` with `|η|_{Ψ,L} ≤ 1` whose pairing `E[ξη]` attains `‖ξ‖_{Φ,O}`.
    pub fn pairing_witness(&self, xi: &RandomVariable) -> Result<RandomVariable> {
        self.check(xi)?;
        if xi.is_zero() {
            return Err(Error::Argument("the zero variable has no norming partner".into()));
        }
        let dual = self.swapped();
        let amemiya = self.amemiya(xi)?;
        let scaled = xi.abs().scale(amemiya.k);
        let mut best = self.best_candidate(xi, &scaled, |eta| dual.luxemburg_norm(eta))?;
        if best.1 < amemiya.value * (1.0 - 1e-12) {
            let (_, eta) = self.budget_ascent(xi, 8)?;
            let eta = RandomVariable::new(eta);
            let scale = dual.luxemburg_norm(&eta)?.max(1.0);
            let eta = eta.scale(1.0 / scale);
            let value = self.space.expectation(&xi.mul(&eta)?)?;
            if value > best.1 {
                best = (eta, value);
            }
        }
        Ok(best.0)
    }

    /// `η` with `‖η‖_{Ψ,O} ≤ 1` whose pairing `E[ξη]` attains `|ξ|_{Φ,L}`.
    pub fn luxemburg_norming(&self, xi: &RandomVariable) -> Result<RandomVariable> {
        self.check(xi)?;
        if xi.is_zero() {
            return Err(Error::Argument("the zero variable has no norming partner".into()));
        }
        let dual = self.swapped();
        let lambda = self.luxemburg_norm(xi)?;
        let scaled = xi.abs().scale(1.0 / lambda);
        Ok(self.best_candidate(xi, &scaled, |eta| dual.orlicz_norm(eta))?.0)
    }

    /// Candidates `Φ'₊(s)` at the optimal scaling `s` (and just below it, which
    /// matters at a jump), plus variables concentrated on one atom; each is
    /// normalized by `dual_norm` and the best pairing wins.
    fn best_candidate(
        &self,
        xi: &RandomVariable,
        scaled: &RandomVariable,
        dual_norm: impl Fn(&RandomVariable) -> Result<f64>,
    ) -> Result<(RandomVariable, f64)> {
        let m = xi.len();
        let mut candidates = Vec::new();
        for shrink in [1.0, 1.0 - 1e-9, 1.0 - 1e-6, 1.0 - 1e-3] {
            let zeta: Option<Vec<f64>> = scaled
                .values()
                .iter()
                .map(|s| self.phi.right_derivative(s * shrink).ok())
                .collect();
            if let Some(zeta) = zeta {
                candidates.push(zeta);
            }
        }
        for i in 0..m {
            if xi.values()[i] != 0.0 {
                let mut e = vec![0.0; m];
                e[i] = 1.0;
                candidates.push(e);
            }
        }
        let mut best: Option<(RandomVariable, f64)> = None;
        for zeta in candidates {
            if zeta.iter().any(|z| !z.is_finite()) {
                continue;
            }
            let eta = RandomVariable::new(zeta.iter().zip(xi.values()).map(|(z, x)| z * sgn(*x)).collect());
            let n = dual_norm(&eta)?;
            if !(n > 0.0 && n.is_finite()) {
                continue;
            }
            let eta = eta.scale(1.0 / n);
            let value = self.space.expectation(&xi.mul(&eta)?)?;
            if best.as_ref().is_none_or(|(_, v)| value > *v) {
                best = Some((eta, value));
            }
        }
        best.ok_or_else(|| Error::Undefined("no norming candidate".into()))
    }
}

/// Visits every composition of `total` into `b.len()` nonnegative parts.
fn simplex_points(b: &mut [usize], index: usize, remaining: usize, visit: &mut impl FnMut(&[usize])) {
    if index + 1 == b.len() {
        b[index] = remaining;
        visit(b);
        return;
    }
    for c in 0..=remaining {
        b[index] = c;
        simplex_points(b, index + 1, remaining - c, visit);
    }
}
