//! Scenario files: one probability space, one Young function, an optional
//! module and named objects living on them.

use std::collections::BTreeMap;
use std::path::Path;

use orlicz_core::duality::AscentBudget;
use orlicz_core::{
    LpExponent, ModuleElement, ModuleOrliczContext, OrliczContext, ProbSpace, RandomFunctional, RandomVariable,
    RnModule, YoungFunction,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    /// Random pairs per strict-convexity search.
    pub falsify: usize,
    /// Random rays per modulus estimate.
    pub modulus: usize,
    pub ascent_starts: usize,
    pub ascent_steps: usize,
    /// Samples for oracles, axiom and monotonicity checks.
    pub samples: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            falsify: 20_000,
            modulus: 5_000,
            ascent_starts: 16,
            ascent_steps: 500,
            samples: 2_000,
        }
    }
}

impl Budgets {
    pub fn ascent(&self) -> AscentBudget {
        AscentBudget {
            starts: self.ascent_starts,
            steps: self.ascent_steps,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Exponents {
    Uniform(LpExponent),
    PerAtom(Vec<LpExponent>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModuleSpec {
    fiber_dim: usize,
    fiber_p: Exponents,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    space: ProbSpace,
    phi: YoungFunction,
    #[serde(default)]
    module: Option<ModuleSpec>,
    #[serde(default)]
    variables: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    elements: BTreeMap<String, Vec<Vec<f64>>>,
    #[serde(default)]
    functionals: BTreeMap<String, Vec<Vec<f64>>>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    budgets: Budgets,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub ctx: OrliczContext,
    pub mctx: Option<ModuleOrliczContext>,
    pub variables: BTreeMap<String, RandomVariable>,
    pub elements: BTreeMap<String, ModuleElement>,
    pub functionals: BTreeMap<String, RandomFunctional>,
    pub seed: u64,
    pub budgets: Budgets,
    pub sha256: String,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses scenario JSON; `origin` prefixes diagnostics.
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let raw: RawScenario = serde_json::from_str(text).map_err(|e| CliError::Scenario {
            origin: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: {
                let full = e.to_string();
                full.rsplit_once(" at line ")
                    .map_or(full.clone(), |(m, _)| m.to_string())
            },
        })?;
        let invalid = |what: String| CliError::Input(format!("{origin}: {what}"));
        let m = raw.space.atom_count();
        let ctx = OrliczContext::new(raw.phi, raw.space.clone()).map_err(|e| invalid(format!("phi: {e}")))?;

        let mctx = match raw.module {
            Some(module) => {
                let p = match module.fiber_p {
                    Exponents::Uniform(p) => vec![p; m],
                    Exponents::PerAtom(p) => p,
                };
                let module = RnModule::new(raw.space.clone(), module.fiber_dim, p)
                    .map_err(|e| invalid(format!("module: {e}")))?;
                Some(ModuleOrliczContext::new(ctx.clone(), module).map_err(|e| invalid(format!("module: {e}")))?)
            }
            None => None,
        };

        let mut variables = BTreeMap::new();
        for (name, values) in raw.variables {
            if values.len() != m {
                return Err(invalid(format!(
                    "variable `{name}` has {} values for {m} atoms",
                    values.len()
                )));
            }
            variables.insert(name, RandomVariable::new(values));
        }
        let fields =
            |kind: &str, map: BTreeMap<String, Vec<Vec<f64>>>| -> Result<BTreeMap<String, Vec<Vec<f64>>>, CliError> {
                if map.is_empty() {
                    return Ok(map);
                }
                let module = mctx
                    .as_ref()
                    .ok_or_else(|| invalid(format!("{kind} need a `module` entry")))?
                    .module();
                for (name, vectors) in &map {
                    module
                        .check_shape(vectors)
                        .map_err(|e| invalid(format!("{kind} `{name}`: {e}")))?;
                }
                Ok(map)
            };
        let elements = fields("elements", raw.elements)?
            .into_iter()
            .map(|(k, v)| (k, ModuleElement::new(v)))
            .collect();
        let functionals = fields("functionals", raw.functionals)?
            .into_iter()
            .map(|(k, v)| (k, RandomFunctional::new(v)))
            .collect();

        Ok(Self {
            ctx,
            mctx,
            variables,
            elements,
            functionals,
            seed: raw.seed,
            budgets: raw.budgets,
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
        })
    }

    pub fn module_ctx(&self) -> Result<&ModuleOrliczContext, CliError> {
        self.mctx
            .as_ref()
            .ok_or_else(|| CliError::Input("this command needs a scenario with a `module` entry".into()))
    }
}
