//! Random normed modules `L⁰(ℝⁿ)` over a finite space, with an `ℓ_p` norm on
//! each atom's fiber.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_len, Error, Result};
use crate::prob::{sgn, EventClass, ProbSpace, RandomVariable};

/// Largest fiber dimension accepted by [`RnModule::dual_norm_oracle`].
pub const ORACLE_MAX_FIBER_DIM: usize = 4;

/// Exponent of an `ℓ_p` fiber norm; `+∞` serializes as `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LpExponent(f64);

impl LpExponent {
    pub const ONE: Self = Self(1.0);
    pub const TWO: Self = Self(2.0);
    pub const INFINITY: Self = Self(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::Argument(format!("fiber exponent must be >= 1, got {p}")));
        }
        Ok(Self(p))
    }

    /// Accepts any positive exponent, including ones that break the triangle
    /// inequality; meant for exercising the axiom checks.
    pub fn new_unchecked(p: f64) -> Self {
        Self(p)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0 == f64::INFINITY
    }

    /// Hölder conjugate: `1/p + 1/q = 1`.
    pub fn conjugate(self) -> Self {
        if self.0 == 1.0 {
            Self::INFINITY
        } else if self.is_infinite() {
            Self::ONE
        } else {
            Self(self.0 / (self.0 - 1.0))
        }
    }

    pub fn norm(self, v: &[f64]) -> f64 {
        lp_norm(v, self.0)
    }
}

impl fmt::Display for LpExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for LpExponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for LpExponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        let p = match Raw::deserialize(deserializer)? {
            Raw::Number(p) => p,
            Raw::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "∞") => f64::INFINITY,
            Raw::Text(s) => return Err(serde::de::Error::custom(format!("bad exponent {s:?}"))),
        };
        LpExponent::new(p).map_err(serde::de::Error::custom)
    }
}

/// `(Σ|vᵢ|^p)^{1/p}`, the maximum for `p = ∞`.
pub fn lp_norm(v: &[f64], p: f64) -> f64 {
    let top = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if top == 0.0 || p == f64::INFINITY {
        return top;
    }
    if p == 1.0 {
        return v.iter().map(|x| x.abs()).sum();
    }
    if p == 2.0 {
        return top * v.iter().map(|x| (x / top).powi(2)).sum::<f64>().sqrt();
    }
    top * v.iter().map(|x| (x.abs() / top).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// A matrix-valued field: one fiber vector per atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleElement {
    vectors: Vec<Vec<f64>>,
}

/// A random linear functional, stored as its dual vector on each atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomFunctional {
    vectors: Vec<Vec<f64>>,
}

macro_rules! fiber_field {
    ($ty:ident) => {
        impl $ty {
            pub fn new(vectors: Vec<Vec<f64>>) -> Self {
                Self { vectors }
            }

            pub fn zeros(atoms: usize, fiber_dim: usize) -> Self {
                Self::new(vec![vec![0.0; fiber_dim]; atoms])
            }

            pub fn vectors(&self) -> &[Vec<f64>] {
                &self.vectors
            }

            pub fn atom(&self, i: usize) -> &[f64] {
                &self.vectors[i]
            }

            pub fn atom_count(&self) -> usize {
                self.vectors.len()
            }

            pub fn is_zero(&self) -> bool {
                self.vectors.iter().flatten().all(|v| *v == 0.0)
            }

            pub fn scale(&self, c: f64) -> Self {
                self.map_atoms(|_, v| v.iter().map(|x| c * x).collect())
            }

            /// Multiplies the fiber on atom `i` by `ξᵢ`.
            pub fn scale_by(&self, xi: &RandomVariable) -> Result<Self> {
                check_len(self.atom_count(), xi.len())?;
                Ok(self.map_atoms(|i, v| v.iter().map(|x| xi.values()[i] * x).collect()))
            }

            /// `I_A·x`.
            pub fn restrict(&self, event: &EventClass) -> Self {
                self.map_atoms(|i, v| {
                    if event.contains(i) {
                        v.to_vec()
                    } else {
                        vec![0.0; v.len()]
                    }
                })
            }

            pub fn add(&self, other: &Self) -> Result<Self> {
                self.combine(other, |a, b| a + b)
            }

            pub fn sub(&self, other: &Self) -> Result<Self> {
                self.combine(other, |a, b| a - b)
            }

            /// `a·self + b·other`.
            pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
                self.combine(other, |x, y| a * x + b * y)
            }

            fn map_atoms(&self, f: impl Fn(usize, &[f64]) -> Vec<f64>) -> Self {
                Self::new(self.vectors.iter().enumerate().map(|(i, v)| f(i, v)).collect())
            }

            fn combine(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
                check_len(self.atom_count(), other.atom_count())?;
                let mut out = Vec::with_capacity(self.atom_count());
                for (u, v) in self.vectors.iter().zip(&other.vectors) {
                    check_len(u.len(), v.len())?;
                    out.push(u.iter().zip(v).map(|(a, b)| f(*a, *b)).collect());
                }
                Ok(Self::new(out))
            }
        }
    };
}

fiber_field!(ModuleElement);
fiber_field!(RandomFunctional);

/// Per-atom values `λ ≤ vᵢ ≤ cap` with `λ > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedAwayField {
    values: RandomVariable,
    lower_bound: f64,
    cap: f64,
}

impl BoundedAwayField {
    pub fn new(values: RandomVariable, lower_bound: f64, cap: f64) -> Result<Self> {
        if !(lower_bound > 0.0) {
            return Err(Error::Argument(format!("lower bound must be > 0, got {lower_bound}")));
        }
        if let Some(v) = values.values().iter().find(|v| !(lower_bound <= **v && **v <= cap)) {
            return Err(Error::Argument(format!("value {v} outside [{lower_bound}, {cap}]")));
        }
        Ok(Self {
            values,
            lower_bound,
            cap,
        })
    }

    /// Uses the smallest value as the lower bound.
    pub fn from_values(values: RandomVariable, cap: f64) -> Result<Self> {
        let lower = values.values().iter().copied().fold(f64::INFINITY, f64::min);
        Self::new(values, lower, cap)
    }

    pub fn values(&self) -> &RandomVariable {
        &self.values
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RnAxiom {
    Definiteness,
    Homogeneity,
    Triangle,
}

/// Fiber vectors (and the scalar `ξ`) at the atom where an axiom failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RnViolation {
    pub axiom: RnAxiom,
    pub atom: usize,
    pub defect: f64,
    pub xi: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RnAxiomReport {
    pub passed: bool,
    pub samples: usize,
    pub seed: u64,
    pub violations: Vec<RnViolation>,
}

/// `L⁰(ℝⁿ)` over `space` with the `ℓ_{pᵢ}` norm on atom `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModule", into = "RawModule")]
pub struct RnModule {
    space: ProbSpace,
    fiber_dim: usize,
    fiber_p: Vec<LpExponent>,
}

#[derive(Serialize, Deserialize)]
struct RawModule {
    weights: Vec<f64>,
    fiber_dim: usize,
    fiber_p: Vec<LpExponent>,
}

impl TryFrom<RawModule> for RnModule {
    type Error = Error;

    fn try_from(raw: RawModule) -> Result<Self> {
        RnModule::new(ProbSpace::new(raw.weights)?, raw.fiber_dim, raw.fiber_p)
    }
}

impl From<RnModule> for RawModule {
    fn from(module: RnModule) -> Self {
        RawModule {
            weights: module.space.weights().to_vec(),
            fiber_dim: module.fiber_dim,
            fiber_p: module.fiber_p,
        }
    }
}

impl RnModule {
    pub fn new(space: ProbSpace, fiber_dim: usize, fiber_p: Vec<LpExponent>) -> Result<Self> {
        if fiber_p.iter().any(|p| p.value() < 1.0) {
            return Err(Error::Argument("fiber exponents must be >= 1".into()));
        }
        Self::with_unchecked_exponents(space, fiber_dim, fiber_p)
    }

    /// Skips the `p ≥ 1` check so broken norms can be fed to the axiom checks.
    pub fn with_unchecked_exponents(space: ProbSpace, fiber_dim: usize, fiber_p: Vec<LpExponent>) -> Result<Self> {
        if fiber_dim == 0 {
            return Err(Error::Argument("fiber dimension must be positive".into()));
        }
        check_len(space.atom_count(), fiber_p.len())?;
        Ok(Self {
            space,
            fiber_dim,
            fiber_p,
        })
    }

    /// Same exponent on every atom.
    pub fn uniform(space: ProbSpace, fiber_dim: usize, p: LpExponent) -> Result<Self> {
        let m = space.atom_count();
        Self::new(space, fiber_dim, vec![p; m])
    }

    pub fn space(&self) -> &ProbSpace {
        &self.space
    }

    pub fn atom_count(&self) -> usize {
        self.space.atom_count()
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn fiber_p(&self) -> &[LpExponent] {
        &self.fiber_p
    }

    pub fn check_shape(&self, vectors: &[Vec<f64>]) -> Result<()> {
        check_len(self.atom_count(), vectors.len())?;
        for v in vectors {
            check_len(self.fiber_dim, v.len())?;
        }
        Ok(())
    }

    pub fn random_norm(&self, x: &ModuleElement) -> Result<RandomVariable> {
        self.check_shape(x.vectors())?;
        Ok(self.norms_of(x.vectors(), |p| p))
    }

    pub fn dual_random_norm(&self, f: &RandomFunctional) -> Result<RandomVariable> {
        self.check_shape(f.vectors())?;
        Ok(self.norms_of(f.vectors(), LpExponent::conjugate))
    }

    fn norms_of(&self, vectors: &[Vec<f64>], exponent: impl Fn(LpExponent) -> LpExponent) -> RandomVariable {
        RandomVariable::new(
            vectors
                .iter()
                .zip(&self.fiber_p)
                .map(|(v, p)| exponent(*p).norm(v))
                .collect(),
        )
    }

    /// Per-atom pairing `⟨x(ω), f(ω)⟩`.
    pub fn apply_functional(&self, f: &RandomFunctional, x: &ModuleElement) -> Result<RandomVariable> {
        self.check_shape(f.vectors())?;
        self.check_shape(x.vectors())?;
        Ok(RandomVariable::new(
            f.vectors()
                .iter()
                .zip(x.vectors())
                .map(|(a, b)| a.iter().zip(b).map(|(s, t)| s * t).sum())
                .collect(),
        ))
    }

    /// Atoms where `‖x‖`, `‖y‖` and `‖x−y‖` are all positive.
    pub fn b_set(&self, x: &ModuleElement, y: &ModuleElement) -> Result<EventClass> {
        let a_x = self.random_norm(x)?.support()?;
        let a_y = self.random_norm(y)?.support()?;
        let a_xy = self.random_norm(&x.sub(y)?)?.support()?;
        Ok(a_x.intersection(&a_y).intersection(&a_xy))
    }

    /// `x/‖x‖` on the support of `‖x‖`, zero elsewhere.
    pub fn normalize_to_sphere(&self, x: &ModuleElement) -> Result<ModuleElement> {
        let norms = self.random_norm(x)?;
        if norms.is_zero() {
            return Err(Error::Argument("cannot normalize the zero element".into()));
        }
        let inverse = norms.map(|n| if n > 0.0 { 1.0 / n } else { 0.0 });
        x.scale_by(&inverse)
    }

    /// Hölder extremizer on each atom: `‖u‖ ≤ 1` and `⟨u, f⟩ = ‖f‖*`.
    ///
    /// For `ℓ₁` fibers the mass goes to the first coordinate of largest
    /// modulus; for `ℓ_∞` fibers `u` is the sign vector with `sgn 0 = 0`.
    pub fn norming_field(&self, f: &RandomFunctional) -> Result<ModuleElement> {
        self.check_shape(f.vectors())?;
        let vectors = f
            .vectors()
            .iter()
            .zip(&self.fiber_p)
            .map(|(v, p)| norming_vector(v, *p))
            .collect();
        Ok(ModuleElement::new(vectors))
    }

    /// Lower estimate of `‖f‖*` from vertices, sign patterns and random
    /// points on each fiber's unit sphere.
    pub fn dual_norm_oracle(&self, f: &RandomFunctional, samples: usize, seed: u64) -> Result<RandomVariable> {
        self.check_shape(f.vectors())?;
        let n = self.fiber_dim;
        if n > ORACLE_MAX_FIBER_DIM {
            return Err(Error::Scale {
                what: "fiber_dim",
                limit: ORACLE_MAX_FIBER_DIM,
                found: n,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut probes: Vec<Vec<f64>> = Vec::new();
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            probes.push(e);
        }
        for mask in 0..(1u32 << n) {
            probes.push((0..n).map(|j| if mask >> j & 1 == 1 { -1.0 } else { 1.0 }).collect());
        }
        for _ in 0..samples {
            probes.push((0..n).map(|_| rng.sample(StandardNormal)).collect());
        }
        let values = f
            .vectors()
            .iter()
            .zip(&self.fiber_p)
            .map(|(v, p)| {
                probes
                    .iter()
                    .filter_map(|u| {
                        let norm = p.norm(u);
                        (norm > 0.0).then(|| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>().abs() / norm)
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        Ok(RandomVariable::new(values))
    }

    /// All atoms (every `ℓ_p` fiber norm is genuine) together with the field
    /// `x₀ = e₁` on every atom, whose random norm is identically one.
    pub fn full_support_indicator(&self) -> (EventClass, ModuleElement) {
        let m = self.atom_count();
        let mut e1 = vec![0.0; self.fiber_dim];
        e1[0] = 1.0;
        let support = EventClass::from_indices((0..m).filter(|&i| {
            (0..self.fiber_dim).any(|j| {
                let mut e = vec![0.0; self.fiber_dim];
                e[j] = 1.0;
                self.fiber_p[i].norm(&e) > 0.0
            })
        }));
        let x0 = ModuleElement::new(vec![e1; m]).restrict(&support);
        (support, x0)
    }

    /// Samples `(ξ, x, y)` and checks the random-norm axioms atom by atom.
    /// Coordinate vectors go first so that a broken triangle inequality is
    /// caught even with few samples.
    pub fn validate_rn_axioms(&self, samples: usize, seed: u64) -> RnAxiomReport {
        let (m, n) = (self.atom_count(), self.fiber_dim);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut violations = Vec::new();
        let tol = |scale: f64| 1e-10 * (1.0 + scale);

        for i in 0..m {
            let p = self.fiber_p[i];
            if p.norm(&vec![0.0; n]) != 0.0 {
                violations.push(RnViolation {
                    axiom: RnAxiom::Definiteness,
                    atom: i,
                    defect: p.norm(&vec![0.0; n]),
                    xi: 0.0,
                    x: vec![0.0; n],
                    y: vec![0.0; n],
                });
            }
            let mut structured = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    let mut x = vec![0.0; n];
                    let mut y = vec![0.0; n];
                    x[a] = 1.0;
                    y[b] = 1.0;
                    structured.push((2.0, x, y));
                }
            }
            let random = (0..samples).map(|_| {
                let xi: f64 = rng.sample(StandardNormal);
                let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let y: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                (xi, x, y)
            });
            let all: Vec<_> = structured.into_iter().chain(random).collect();
            for (xi, x, y) in all {
                let mut flag = |axiom, defect| {
                    violations.push(RnViolation {
                        axiom,
                        atom: i,
                        defect,
                        xi,
                        x: x.clone(),
                        y: y.clone(),
                    })
                };
                let nx = p.norm(&x);
                if x.iter().any(|v| *v != 0.0) && !(nx > 0.0) {
                    flag(RnAxiom::Definiteness, nx);
                }
                let scaled: Vec<f64> = x.iter().map(|v| xi * v).collect();
                let homogeneity = (p.norm(&scaled) - xi.abs() * nx).abs();
                if homogeneity > tol(xi.abs() * nx) {
                    flag(RnAxiom::Homogeneity, homogeneity);
                }
                let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
                let bound = nx + p.norm(&y);
                let excess = p.norm(&sum) - bound;
                if excess > tol(bound) {
                    flag(RnAxiom::Triangle, excess);
                }
            }
        }
        RnAxiomReport {
            passed: violations.is_empty(),
            samples,
            seed,
            violations,
        }
    }
}

fn norming_vector(f: &[f64], p: LpExponent) -> Vec<f64> {
    let n = f.len();
    let q = p.conjugate();
    let dual = q.norm(f);
    if dual == 0.0 {
        return vec![0.0; n];
    }
    if p.value() == 1.0 {
        // ties go to the lowest index
        let top = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let j = f.iter().position(|v| v.abs() == top).expect("nonzero vector");
        let mut u = vec![0.0; n];
        u[j] = f[j].signum();
        return u;
    }
    if p.is_infinite() {
        return f.iter().map(|v| sgn(*v)).collect();
    }
    // u = sgn(f)|f|^{q−1} / ‖f‖_q^{q−1}
    let q = q.value();
    f.iter().map(|v| sgn(*v) * (v.abs() / dual).powf(q - 1.0)).collect()
}
