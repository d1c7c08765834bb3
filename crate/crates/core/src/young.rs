//! Young functions and their conjugates.
//!
//! A Young function is convex, left-continuous, vanishes at the origin and
//! tends to `+∞`. It is either finite everywhere or finite on a closed
//! interval `[0, t₀]` and `+∞` beyond; storing the finite domain as a closed
//! interval makes left-continuity at the jump structural.
//!
//! The power, scaled-power and jump families are closed under conjugation and
//! are conjugated in closed form. Piecewise-linear functions are also closed
//! under conjugation: slopes and breakpoints trade places. A tabulated function
//! is linear between its grid points, so it is conjugated the same way.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points sampled by [`YoungFunction::validate`].
const VALIDATION_GRID_POINTS: usize = 201;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum YoungFunction {
    /// `t ↦ t^p`, `p ≥ 1`.
    Power {
        p: f64,
    },
    /// `t ↦ c·t^p`, `c > 0`, `p ≥ 1`.
    ScaledPower {
        c: f64,
        p: f64,
    },
    /// `0` on `[0, t₀]`, `+∞` after. This is also the conjugate of `t ↦ t₀·t`.
    LinearJump {
        t0: f64,
    },
    Piecewise(PiecewiseLinear),
    Tabulated(Tabulated),
}

/// Piecewise-linear Young function given by its slopes.
///
/// Without a jump, `slopes[i]` holds on `[breaks[i-1], breaks[i]]` (with
/// `breaks[-1] = 0`) and the last slope continues forever, so
/// `slopes.len() == breaks.len() + 1`. With `jump`, the function is `+∞` after
/// the last breakpoint and `slopes.len() == breaks.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPiecewise")]
pub struct PiecewiseLinear {
    breaks: Vec<f64>,
    slopes: Vec<f64>,
    jump: bool,
}

#[derive(Deserialize)]
struct RawPiecewise {
    breaks: Vec<f64>,
    slopes: Vec<f64>,
    #[serde(default)]
    jump: bool,
}

impl TryFrom<RawPiecewise> for PiecewiseLinear {
    type Error = Error;

    fn try_from(raw: RawPiecewise) -> Result<Self> {
        PiecewiseLinear::new(raw.breaks, raw.slopes, raw.jump)
    }
}

impl PiecewiseLinear {
    pub fn new(breaks: Vec<f64>, slopes: Vec<f64>, jump: bool) -> Result<Self> {
        let expected = if jump { breaks.len() } else { breaks.len() + 1 };
        if slopes.len() != expected || slopes.is_empty() {
            return Err(Error::Validation(format!(
                "piecewise function with {} breaks needs {expected} slopes (jump = {jump}), got {}",
                breaks.len(),
                slopes.len()
            )));
        }
        if breaks.iter().chain(&slopes).any(|v| !v.is_finite()) {
            return Err(Error::Validation("piecewise data must be finite".into()));
        }
        let mut prev = 0.0;
        for b in &breaks {
            if *b <= prev {
                return Err(Error::Validation(
                    "breakpoints must be positive and strictly increasing".into(),
                ));
            }
            prev = *b;
        }
        Ok(Self { breaks, slopes, jump })
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn jump(&self) -> bool {
        self.jump
    }

    fn knots(&self) -> Knots {
        let mut t = Vec::with_capacity(self.breaks.len() + 1);
        let mut y = Vec::with_capacity(self.breaks.len() + 1);
        t.push(0.0);
        y.push(0.0);
        let mut acc = 0.0;
        let mut start = 0.0;
        for (b, s) in self.breaks.iter().zip(&self.slopes) {
            acc += s * (b - start);
            start = *b;
            t.push(*b);
            y.push(acc);
        }
        let tail = if self.jump { None } else { self.slopes.last().copied() };
        Knots { t, y, tail }
    }

    fn eval(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        let mut start = 0.0;
        for (i, slope) in self.slopes.iter().enumerate() {
            match self.breaks.get(i) {
                Some(end) if t > *end => {
                    acc += slope * (end - start);
                    start = *end;
                }
                _ => return acc + slope * (t - start),
            }
        }
        f64::INFINITY
    }
}

/// What a tabulated function does past its last grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// Continue with the slope of the last segment.
    #[default]
    Linear,
    /// Jump to `+∞`.
    Infinite,
}

/// A Young function sampled on a grid starting at `t = 0` and interpolated
/// linearly between grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTabulated")]
pub struct Tabulated {
    t: Vec<f64>,
    y: Vec<f64>,
    tail: Tail,
}

#[derive(Deserialize)]
struct RawTabulated {
    t: Vec<f64>,
    y: Vec<f64>,
    #[serde(default)]
    tail: Tail,
}

impl TryFrom<RawTabulated> for Tabulated {
    type Error = Error;

    fn try_from(raw: RawTabulated) -> Result<Self> {
        Tabulated::new(raw.t, raw.y, raw.tail)
    }
}

impl Tabulated {
    pub fn new(t: Vec<f64>, y: Vec<f64>, tail: Tail) -> Result<Self> {
        if t.len() != y.len() || t.len() < 2 {
            return Err(Error::Validation(
                "a table needs matching t and y columns with at least two rows".into(),
            ));
        }
        if t[0] != 0.0 {
            return Err(Error::Validation("a table must start at t = 0".into()));
        }
        if t.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::Validation("table entries must be finite".into()));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation("table abscissae must increase strictly".into()));
        }
        Ok(Self { t, y, tail })
    }

    /// Samples `f` at the given grid.
    pub fn sample(grid: &[f64], f: impl Fn(f64) -> f64, tail: Tail) -> Result<Self> {
        Self::new(grid.to_vec(), grid.iter().map(|t| f(*t)).collect(), tail)
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    fn knots(&self) -> Knots {
        let tail = match self.tail {
            Tail::Infinite => None,
            Tail::Linear => {
                let k = self.t.len() - 1;
                Some((self.y[k] - self.y[k - 1]) / (self.t[k] - self.t[k - 1]))
            }
        };
        Knots {
            t: self.t.clone(),
            y: self.y.clone(),
            tail,
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let k = self.t.len() - 1;
        if t > self.t[k] {
            return match self.tail {
                Tail::Infinite => f64::INFINITY,
                Tail::Linear => {
                    let slope = (self.y[k] - self.y[k - 1]) / (self.t[k] - self.t[k - 1]);
                    self.y[k] + slope * (t - self.t[k])
                }
            };
        }
        let i = self.t.partition_point(|x| *x < t);
        if self.t[i] == t {
            return self.y[i];
        }
        let (t0, t1, y0, y1) = (self.t[i - 1], self.t[i], self.y[i - 1], self.y[i]);
        y0 + (y1 - y0) * (t - t0) / (t1 - t0)
    }
}

/// Knot view shared by the piecewise-linear forms. `tail` is the slope past
/// the last knot, `None` for a jump to `+∞` there.
#[derive(Debug, Clone)]
struct Knots {
    t: Vec<f64>,
    y: Vec<f64>,
    tail: Option<f64>,
}

impl Knots {
    fn last(&self) -> (f64, f64) {
        let k = self.t.len() - 1;
        (self.t[k], self.y[k])
    }

    fn segment_slopes(&self) -> Vec<f64> {
        self.t
            .windows(2)
            .zip(self.y.windows(2))
            .map(|(t, y)| (y[1] - y[0]) / (t[1] - t[0]))
            .collect()
    }

    fn inverse(&self, level: f64) -> Result<f64> {
        let (t_last, y_last) = self.last();
        if level >= y_last {
            return match self.tail {
                None => Ok(t_last),
                Some(s) if s > 0.0 => Ok(t_last + (level - y_last) / s),
                Some(_) => Err(Error::Undefined("generalized inverse of a bounded function".into())),
            };
        }
        let i = self.y.partition_point(|v| *v <= level);
        let (t0, t1, y0, y1) = (self.t[i - 1], self.t[i], self.y[i - 1], self.y[i]);
        Ok(t0 + (level - y0) * (t1 - t0) / (y1 - y0))
    }

    fn right_derivative(&self, t: f64) -> Result<f64> {
        let (t_last, _) = self.last();
        if t < t_last {
            let i = self.t.partition_point(|x| *x <= t);
            return Ok((self.y[i] - self.y[i - 1]) / (self.t[i] - self.t[i - 1]));
        }
        match self.tail {
            Some(s) => Ok(s),
            None if t == t_last => Ok(f64::INFINITY),
            None => Err(Error::Domain { t, end: t_last }),
        }
    }

    /// Exact conjugate of a convex piecewise-linear function.
    ///
    /// On `[σᵢ, σᵢ₊₁]` the supremum of `ts − Φ(t)` sits at knot `tᵢ`, so the
    /// conjugate has breakpoints at the slopes of `Φ` and slopes equal to its
    /// knots. A finite tail slope turns into a jump and vice versa.
    fn exact_conjugate(&self) -> Result<PiecewiseLinear> {
        let mut sigma = self.segment_slopes();
        // round-off can leave a slope a hair below its predecessor
        for i in 1..sigma.len() {
            sigma[i] = sigma[i].max(sigma[i - 1]);
        }
        // (start, end, slope) of each conjugate segment; end = None is unbounded
        let mut segments: Vec<(f64, Option<f64>, f64)> = Vec::new();
        let mut start = 0.0;
        for (i, s) in sigma.iter().enumerate() {
            segments.push((start, Some(*s), self.t[i]));
            start = *s;
        }
        let (t_last, _) = self.last();
        let jump = match self.tail {
            None => {
                segments.push((start, None, t_last));
                false
            }
            Some(tail) => {
                segments.push((start, Some(tail), t_last));
                true
            }
        };
        segments.retain(|(a, b, _)| b.is_none_or(|b| b > *a));
        let mut merged: Vec<(f64, Option<f64>, f64)> = Vec::new();
        for seg in segments {
            match merged.last_mut() {
                Some(last) if last.2 == seg.2 => last.1 = seg.1,
                _ => merged.push(seg),
            }
        }
        if merged.is_empty() {
            return Err(Error::Validation("conjugate of the zero function".into()));
        }
        let breaks: Vec<f64> = merged.iter().filter_map(|(_, b, _)| *b).collect();
        let slopes: Vec<f64> = merged.iter().map(|(_, _, s)| *s).collect();
        PiecewiseLinear::new(breaks, slopes, jump)
    }
}

/// Outcome of [`YoungFunction::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YoungReport {
    pub valid: bool,
    pub violations: Vec<AxiomViolation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YoungAxiom {
    Parameters,
    Origin,
    Monotonicity,
    Convexity,
    LeftContinuity,
    Divergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomViolation {
    pub axiom: YoungAxiom,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delta2 {
    Yes,
    No,
    Unknown,
}

/// Δ₂ verdict in its for-large-`t` reading: `Φ(2t) ≤ K·Φ(t)` for all large `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Delta2Report {
    pub verdict: Delta2,
    pub variant: &'static str,
    pub method: &'static str,
    /// A point `t` with `Φ(t) < ∞ = Φ(2t)` when the verdict is `No`.
    pub witness_t: Option<f64>,
    pub sampled_max_ratio: Option<f64>,
}

impl YoungFunction {
    pub fn power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::Validation(format!("power exponent must be >= 1, got {p}")));
        }
        Ok(Self::Power { p })
    }

    pub fn scaled_power(c: f64, p: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Validation(format!("coefficient must be > 0, got {c}")));
        }
        Self::power(p)?;
        Ok(Self::ScaledPower { c, p })
    }

    pub fn linear_jump(t0: f64) -> Result<Self> {
        if !(t0.is_finite() && t0 > 0.0) {
            return Err(Error::Validation(format!("jump point must be > 0, got {t0}")));
        }
        Ok(Self::LinearJump { t0 })
    }

    pub fn piecewise(breaks: Vec<f64>, slopes: Vec<f64>, jump: bool) -> Result<Self> {
        Ok(Self::Piecewise(PiecewiseLinear::new(breaks, slopes, jump)?))
    }

    pub fn tabulated(t: Vec<f64>, y: Vec<f64>, tail: Tail) -> Result<Self> {
        Ok(Self::Tabulated(Tabulated::new(t, y, tail)?))
    }

    /// Conjugate exponent `q` of a power family member, `1/p + 1/q = 1`.
    pub fn conjugate_exponent(&self) -> Option<f64> {
        match self {
            Self::Power { p } | Self::ScaledPower { p, .. } => Some(conjugate_exponent(*p)),
            _ => None,
        }
    }

    fn knots(&self) -> Option<Knots> {
        match self {
            Self::Piecewise(pl) => Some(pl.knots()),
            Self::Tabulated(tab) => Some(tab.knots()),
            _ => None,
        }
    }

    /// `Φ(t)` without the sign check; `t` must be nonnegative.
    pub(crate) fn value(&self, t: f64) -> f64 {
        if t == 0.0 {
            return match self {
                Self::Tabulated(tab) => tab.y[0],
                _ => 0.0,
            };
        }
        match self {
            Self::Power { p } => t.powf(*p),
            Self::ScaledPower { c, p } => c * t.powf(*p),
            Self::LinearJump { t0 } => {
                if t <= *t0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Self::Piecewise(pl) => pl.eval(t),
            Self::Tabulated(tab) => tab.eval(t),
        }
    }

    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::Argument(format!("Young functions live on [0, ∞), got t = {t}")));
        }
        Ok(self.value(t))
    }

    /// Right end of the finite domain, when the function jumps to `+∞`.
    pub fn finite_domain_end(&self) -> Option<f64> {
        match self {
            Self::LinearJump { t0 } => Some(*t0),
            Self::Piecewise(pl) if pl.jump => pl.breaks.last().copied(),
            Self::Tabulated(tab) if tab.tail == Tail::Infinite => tab.t.last().copied(),
            _ => None,
        }
    }

    /// `true` when the function is real valued everywhere (equivalently continuous).
    pub fn is_finite_valued(&self) -> bool {
        self.finite_domain_end().is_none()
    }

    /// Generalized inverse `sup{t ≥ 0 : Φ(t) ≤ y}`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if y.is_nan() || y < 0.0 {
            return Err(Error::Argument(format!("inverse needs y >= 0, got {y}")));
        }
        if y == f64::INFINITY {
            return Ok(self.finite_domain_end().unwrap_or(f64::INFINITY));
        }
        match self {
            Self::Power { p } => Ok(y.powf(1.0 / p)),
            Self::ScaledPower { c, p } => Ok((y / c).powf(1.0 / p)),
            Self::LinearJump { t0 } => Ok(*t0),
            _ => self.knots().expect("knot form").inverse(y),
        }
    }

    /// Right derivative `Φ'₊(t)`; `+∞` exactly at a jump point.
    pub fn right_derivative(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::Argument(format!("derivative needs t >= 0, got {t}")));
        }
        match self {
            Self::Power { p } => Ok(power_derivative(1.0, *p, t)),
            Self::ScaledPower { c, p } => Ok(power_derivative(*c, *p, t)),
            Self::LinearJump { t0 } => {
                if t < *t0 {
                    Ok(0.0)
                } else if t == *t0 {
                    Ok(f64::INFINITY)
                } else {
                    Err(Error::Domain { t, end: *t0 })
                }
            }
            _ => self.knots().expect("knot form").right_derivative(t),
        }
    }

    /// Conjugate `Ψ(s) = sup_{t≥0} {ts − Φ(t)}`.
    pub fn conjugate(&self) -> Result<YoungFunction> {
        let report = self.validate();
        if !report.valid {
            let details: Vec<String> = report.violations.iter().map(|v| v.detail.clone()).collect();
            return Err(Error::Validation(details.join("; ")));
        }
        match self {
            Self::Power { p } => conjugate_scaled_power(1.0, *p),
            Self::ScaledPower { c, p } => conjugate_scaled_power(*c, *p),
            Self::LinearJump { t0 } => Self::scaled_power(*t0, 1.0),
            Self::Piecewise(pl) => Ok(Self::Piecewise(pl.knots().exact_conjugate()?)),
            Self::Tabulated(tab) => Ok(Self::Tabulated(Tabulated::from_piecewise(
                &tab.knots().exact_conjugate()?,
            )?)),
        }
    }

    /// Scale on which the interesting part of the function lives.
    fn characteristic_scale(&self) -> f64 {
        match self {
            Self::Power { .. } => 1.0,
            Self::ScaledPower { c, p } => c.powf(-1.0 / p),
            Self::LinearJump { t0 } => *t0,
            Self::Piecewise(pl) => pl.breaks.last().copied().unwrap_or(1.0),
            Self::Tabulated(tab) => *tab.t.last().expect("nonempty"),
        }
    }

    /// Checks the Young-function axioms on a grid and structurally.
    pub fn validate(&self) -> YoungReport {
        let mut violations = Vec::new();
        let flag = |violations: &mut Vec<AxiomViolation>, axiom, detail: String| {
            violations.push(AxiomViolation { axiom, detail })
        };

        match self {
            Self::Power { p } | Self::ScaledPower { p, .. } if !(p.is_finite() && *p >= 1.0) => {
                flag(&mut violations, YoungAxiom::Parameters, format!("exponent {p} < 1"));
            }
            _ => {}
        }
        match self {
            Self::ScaledPower { c, .. } if !(c.is_finite() && *c > 0.0) => {
                flag(&mut violations, YoungAxiom::Parameters, format!("coefficient {c} <= 0"));
            }
            Self::LinearJump { t0 } if !(t0.is_finite() && *t0 > 0.0) => {
                flag(&mut violations, YoungAxiom::Parameters, format!("jump point {t0} <= 0"));
            }
            Self::Piecewise(pl) if pl.slopes.iter().any(|s| *s < 0.0) => {
                flag(&mut violations, YoungAxiom::Monotonicity, "negative slope".into());
            }
            _ => {}
        }
        if !violations.is_empty() {
            return YoungReport {
                valid: false,
                violations,
            };
        }

        let origin = self.value(0.0);
        if origin.abs() > 1e-15 {
            flag(&mut violations, YoungAxiom::Origin, format!("Φ(0) = {origin}"));
        }

        if let Some(knots) = self.knots() {
            let slopes = knots.segment_slopes();
            if let Some(i) = slopes.windows(2).position(|w| w[1] < w[0] - 1e-12 * (1.0 + w[0].abs())) {
                flag(
                    &mut violations,
                    YoungAxiom::Convexity,
                    format!("slope decreases at knot t = {}", knots.t[i + 1]),
                );
            }
            if let Some(tail) = knots.tail {
                if slopes.last().is_some_and(|s| tail < *s - 1e-12 * (1.0 + s.abs())) {
                    flag(
                        &mut violations,
                        YoungAxiom::Convexity,
                        "tail slope below last segment".into(),
                    );
                }
            }
        }

        let end = self.finite_domain_end();
        let span = 2.0 * self.characteristic_scale();
        let hi = end.unwrap_or(span);
        let n = VALIDATION_GRID_POINTS;
        let grid: Vec<f64> = (0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect();
        let values: Vec<f64> = grid.iter().map(|t| self.value(*t)).collect();
        let tol = |v: f64| 1e-12 * (1.0 + v.abs());

        if let Some(i) = (1..n).find(|&i| values[i] < values[i - 1] - tol(values[i - 1])) {
            flag(
                &mut violations,
                YoungAxiom::Monotonicity,
                format!("Φ({}) < Φ({})", grid[i], grid[i - 1]),
            );
        }
        'outer: for i in 0..n {
            for j in ((i + 2)..n).step_by(2) {
                let (a, b) = (values[i], values[j]);
                if !(a.is_finite() && b.is_finite()) {
                    continue;
                }
                let mid = values[(i + j) / 2];
                let chord = 0.5 * (a + b);
                if mid > chord + tol(chord) {
                    flag(
                        &mut violations,
                        YoungAxiom::Convexity,
                        format!("midpoint test fails between t = {} and t = {}", grid[i], grid[j]),
                    );
                    break 'outer;
                }
            }
        }

        if let Some(e) = end {
            let at = self.value(e);
            let before = self.value(e * (1.0 - 1e-9));
            if !at.is_finite() || (at - before).abs() > 1e-6 * (1.0 + at.abs()) {
                flag(
                    &mut violations,
                    YoungAxiom::LeftContinuity,
                    format!("not left-continuous at the jump point {e}"),
                );
            }
        } else {
            let diverges = match self.knots() {
                Some(knots) => knots.tail.is_some_and(|s| s > 0.0),
                None => true,
            };
            if !diverges {
                flag(&mut violations, YoungAxiom::Divergence, "Φ stays bounded".into());
            }
        }

        YoungReport {
            valid: violations.is_empty(),
            violations,
        }
    }

    /// Δ₂ check: analytic per family, sampled for tables.
    pub fn is_delta2(&self) -> Delta2Report {
        let analytic = |verdict, witness_t| Delta2Report {
            verdict,
            variant: "large_t",
            method: "analytic",
            witness_t,
            sampled_max_ratio: None,
        };
        if let Some(end) = self.finite_domain_end() {
            // Φ(end) < ∞ = Φ(2·end)
            return analytic(Delta2::No, Some(end));
        }
        match self {
            Self::Power { .. } | Self::ScaledPower { .. } => analytic(Delta2::Yes, None),
            // asymptotically linear, so Φ(2t)/Φ(t) → 2
            Self::Piecewise(_) => analytic(Delta2::Yes, None),
            Self::LinearJump { .. } => unreachable!("jump forms handled above"),
            Self::Tabulated(tab) => sampled_delta2(self, tab),
        }
    }
}

fn sampled_delta2(phi: &YoungFunction, tab: &Tabulated) -> Delta2Report {
    let t_max = *tab.t.last().expect("nonempty") / 2.0;
    let t_min = tab
        .t
        .iter()
        .zip(&tab.y)
        .find(|(_, y)| **y > 0.0)
        .map(|(t, _)| *t)
        .unwrap_or(t_max);
    let n = 256;
    let ratios: Vec<f64> = if t_min < t_max {
        log_grid(t_min, t_max, n)
            .into_iter()
            .map(|t| phi.value(2.0 * t) / phi.value(t))
            .collect()
    } else {
        Vec::new()
    };
    let max_ratio = ratios.iter().copied().fold(f64::NAN, f64::max);
    let split = 3 * ratios.len() / 4;
    let verdict = if ratios.len() < 8 {
        Delta2::Unknown
    } else {
        let head = ratios[..split].iter().copied().fold(0.0, f64::max);
        let tail = ratios[split..].iter().copied().fold(0.0, f64::max);
        if tail <= head * (1.0 + 1e-9) {
            Delta2::Yes
        } else {
            Delta2::Unknown
        }
    };
    Delta2Report {
        verdict,
        variant: "large_t",
        method: "sampled",
        witness_t: None,
        sampled_max_ratio: max_ratio.is_finite().then_some(max_ratio),
    }
}

pub(crate) fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

fn power_derivative(c: f64, p: f64, t: f64) -> f64 {
    if p == 1.0 {
        c
    } else {
        c * p * t.powf(p - 1.0)
    }
}

/// `sup_t {ts − c·t^p}`: a jump at `c` for `p = 1`, otherwise
/// `c(p−1)(cp)^{−q}·s^q`, which is `p^{1−q}q^{−1}s^q` when `c = 1`.
fn conjugate_scaled_power(c: f64, p: f64) -> Result<YoungFunction> {
    if p == 1.0 {
        return YoungFunction::linear_jump(c);
    }
    let q = conjugate_exponent(p);
    let coeff = c * (p - 1.0) * (c * p).powf(-q);
    YoungFunction::scaled_power(coeff, q)
}

pub(crate) fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

impl Tabulated {
    /// Tabulated view of a piecewise-linear function.
    fn from_piecewise(pl: &PiecewiseLinear) -> Result<Self> {
        let Knots { mut t, mut y, tail } = pl.knots();
        let tail = match tail {
            None => Tail::Infinite,
            Some(slope) => {
                // the linear tail continues the last segment, so add one with the tail slope
                let (t_last, y_last) = (*t.last().expect("origin"), *y.last().expect("origin"));
                let step = t_last.max(1.0);
                t.push(t_last + step);
                y.push(y_last + slope * step);
                Tail::Linear
            }
        };
        Tabulated::new(t, y, tail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn evaluate_examples() {
        let sq = YoungFunction::power(2.0).unwrap();
        assert_eq!(sq.evaluate(3.0).unwrap(), 9.0);
        assert_eq!(sq.evaluate(0.0).unwrap(), 0.0);
        assert_eq!(YoungFunction::linear_jump(1.0).unwrap().evaluate(0.0).unwrap(), 0.0);
        assert_eq!(
            YoungFunction::linear_jump(1.0).unwrap().evaluate(2.0).unwrap(),
            f64::INFINITY
        );
        assert_eq!(YoungFunction::linear_jump(1.0).unwrap().evaluate(1.0).unwrap(), 0.0);
        assert!(sq.evaluate(-1.0).is_err());
    }

    #[test]
    fn piecewise_evaluation() {
        let pl = YoungFunction::piecewise(vec![2.0], vec![1.0, 3.0], false).unwrap();
        assert_eq!(pl.evaluate(1.0).unwrap(), 1.0);
        assert_eq!(pl.evaluate(2.0).unwrap(), 2.0);
        assert_eq!(pl.evaluate(3.0).unwrap(), 5.0);
        let capped = YoungFunction::piecewise(vec![1.0, 2.0], vec![1.0, 2.0], true).unwrap();
        assert_eq!(capped.evaluate(2.0).unwrap(), 3.0);
        assert_eq!(capped.evaluate(2.5).unwrap(), f64::INFINITY);
        assert!(YoungFunction::piecewise(vec![2.0], vec![1.0], false).is_err());
    }

    #[test]
    fn power_one_conjugates_to_jump() {
        let psi = YoungFunction::power(1.0).unwrap().conjugate().unwrap();
        assert_eq!(psi, YoungFunction::LinearJump { t0: 1.0 });
    }

    #[test]
    fn square_conjugates_to_quarter_square() {
        let psi = YoungFunction::power(2.0).unwrap().conjugate().unwrap();
        for s in [0.0, 0.5, 1.0, 3.0, 10.0] {
            assert!(close(psi.value(s), s * s / 4.0, 1e-14));
        }
    }

    #[test]
    fn piecewise_conjugate_is_exact() {
        // Φ: slope 1 on [0,2], slope 3 after. Ψ: 0 on [0,1], slope 2 on [1,3], then ∞.
        let phi = YoungFunction::piecewise(vec![2.0], vec![1.0, 3.0], false).unwrap();
        let psi = phi.conjugate().unwrap();
        assert_eq!(
            psi,
            YoungFunction::piecewise(vec![1.0, 3.0], vec![0.0, 2.0], true).unwrap()
        );
        assert_eq!(psi.conjugate().unwrap(), phi);
    }

    #[test]
    fn piecewise_conjugate_drops_degenerate_segments() {
        // zero first slope: Ψ has no flat start
        let phi = YoungFunction::piecewise(vec![1.0], vec![0.0, 2.0], false).unwrap();
        let psi = phi.conjugate().unwrap();
        assert_eq!(psi, YoungFunction::piecewise(vec![2.0], vec![1.0], true).unwrap());
        assert_eq!(psi.conjugate().unwrap(), phi);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(YoungFunction::power(2.0).unwrap().inverse(4.0).unwrap(), 2.0);
        assert_eq!(YoungFunction::linear_jump(1.0).unwrap().inverse(0.5).unwrap(), 1.0);
        for p in [1.0, 1.5, 2.0, 7.0] {
            assert_eq!(YoungFunction::power(p).unwrap().inverse(1.0).unwrap(), 1.0);
        }
        let pl = YoungFunction::piecewise(vec![1.0], vec![0.0, 2.0], false).unwrap();
        assert_eq!(pl.inverse(0.0).unwrap(), 1.0);
        assert_eq!(pl.inverse(2.0).unwrap(), 2.0);
        let flat = YoungFunction::piecewise(vec![], vec![0.0], false).unwrap();
        assert!(matches!(flat.inverse(1.0), Err(Error::Undefined(_))));
    }

    #[test]
    fn right_derivative_examples() {
        assert_eq!(YoungFunction::power(2.0).unwrap().right_derivative(3.0).unwrap(), 6.0);
        let lin = YoungFunction::power(1.0).unwrap();
        for t in [0.0, 0.3, 9.0] {
            assert_eq!(lin.right_derivative(t).unwrap(), 1.0);
        }
        let pl = YoungFunction::piecewise(vec![2.0], vec![1.0, 3.0], false).unwrap();
        assert_eq!(pl.right_derivative(2.0).unwrap(), 3.0);
        assert_eq!(pl.right_derivative(1.9).unwrap(), 1.0);
        let jump = YoungFunction::linear_jump(1.0).unwrap();
        assert_eq!(jump.right_derivative(1.0).unwrap(), f64::INFINITY);
        assert!(matches!(jump.right_derivative(1.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn validation_examples() {
        assert!(YoungFunction::power(2.0).unwrap().validate().valid);
        let kink = YoungFunction::tabulated(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 2.0, 3.0, 4.0], Tail::Linear)
            .unwrap()
            .validate();
        assert!(!kink.valid);
        assert!(kink.violations.iter().any(|v| v.axiom == YoungAxiom::Convexity));
        let shifted = YoungFunction::tabulated(vec![0.0, 1.0, 2.0], vec![0.5, 1.0, 2.0], Tail::Linear)
            .unwrap()
            .validate();
        assert!(shifted.violations.iter().any(|v| v.axiom == YoungAxiom::Origin));
        let bounded = YoungFunction::piecewise(vec![1.0], vec![1.0, 0.0], false)
            .unwrap()
            .validate();
        assert!(!bounded.valid);
        let p_half = YoungFunction::Power { p: 0.5 }.validate();
        assert!(p_half.violations.iter().any(|v| v.axiom == YoungAxiom::Parameters));
        assert!(YoungFunction::Power { p: 0.5 }.conjugate().is_err());
    }

    #[test]
    fn delta2_examples() {
        assert_eq!(YoungFunction::power(3.0).unwrap().is_delta2().verdict, Delta2::Yes);
        let jump = YoungFunction::linear_jump(1.0).unwrap().is_delta2();
        assert_eq!(jump.verdict, Delta2::No);
        assert_eq!(jump.witness_t, Some(1.0));
        let grid: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
        let exp = YoungFunction::Tabulated(Tabulated::sample(&grid, |t| t.exp_m1(), Tail::Linear).unwrap());
        assert_ne!(exp.is_delta2().verdict, Delta2::Yes);
        let sq = YoungFunction::Tabulated(Tabulated::sample(&grid, |t| t * t, Tail::Linear).unwrap());
        assert_eq!(sq.is_delta2().verdict, Delta2::Yes);
    }

    #[test]
    fn tabulated_biconjugate() {
        let grid: Vec<f64> = (0..=200).map(|i| i as f64 * 0.025).collect();
        let phi = YoungFunction::Tabulated(Tabulated::sample(&grid, |t| t.exp_m1() - t, Tail::Linear).unwrap());
        let psi = phi.conjugate().unwrap();
        assert!(psi.validate().valid, "{:?}", psi.validate());
        let back = psi.conjugate().unwrap();
        for i in 0..100 {
            let t = 5.0 * i as f64 / 99.0;
            assert!(close(back.value(t), phi.value(t), 1e-9), "t = {t}");
        }
    }

    #[test]
    fn json_forms() {
        let cases = [
            r#"{"form":"power","p":2.0}"#,
            r#"{"form":"linear_jump","t0":1.0}"#,
            r#"{"form":"piecewise","breaks":[2.0],"slopes":[1.0,3.0],"jump":false}"#,
            r#"{"form":"tabulated","t":[0.0,1.0],"y":[0.0,1.0],"tail":"linear"}"#,
        ];
        for json in cases {
            let phi: YoungFunction = serde_json::from_str(json).unwrap();
            assert_eq!(serde_json::to_string(&phi).unwrap(), json);
        }
        let short: YoungFunction =
            serde_json::from_str(r#"{"form":"piecewise","breaks":[2.0],"slopes":[1.0,3.0]}"#).unwrap();
        assert!(matches!(short, YoungFunction::Piecewise(_)));
        assert!(
            serde_json::from_str::<YoungFunction>(r#"{"form":"piecewise","breaks":[2.0],"slopes":[1.0]}"#).is_err()
        );
    }
}
