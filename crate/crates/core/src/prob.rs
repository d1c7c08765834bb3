//! Finite probability spaces and the random variables living on them.
//!
//! Every atom carries strictly positive mass, so an equivalence class of
//! measurable functions is just its vector of atom values and an event class
//! is a set of atom indices. Almost-sure statements become per-atom ones.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A probability space made of finitely many atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct ProbSpace {
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSpace {
    weights: Vec<f64>,
}

impl TryFrom<RawSpace> for ProbSpace {
    type Error = Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        ProbSpace::new(raw.weights)
    }
}

impl ProbSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Argument("a probability space needs at least one atom".into()));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Argument(format!("atom {i} has non-positive weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Argument(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(atoms: usize) -> Result<Self> {
        if atoms == 0 {
            return Err(Error::Argument("a probability space needs at least one atom".into()));
        }
        Ok(Self {
            weights: vec![1.0 / atoms as f64; atoms],
        })
    }

    /// Builds a space from positive masses that need not sum to one.
    pub fn normalized(masses: &[f64]) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Argument("masses must have a positive finite sum".into()));
        }
        let mut weights: Vec<f64> = masses.iter().map(|m| m / total).collect();
        // push the rounding residue onto the heaviest atom
        let residue = 1.0 - weights.iter().sum::<f64>();
        if let Some(w) = weights.iter_mut().max_by(|a, b| a.total_cmp(b)) {
            *w += residue;
        }
        Self::new(weights)
    }

    pub fn atom_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> f64 {
        self.weights[atom]
    }

    /// `E[ξ]`; an atom valued `+∞` makes the whole expectation `+∞`.
    pub fn expectation(&self, xi: &RandomVariable) -> Result<f64> {
        check_len(self.atom_count(), xi.len())?;
        Ok(self.expect_slice(&xi.values))
    }

    pub(crate) fn expect_slice(&self, values: &[f64]) -> f64 {
        let mut total = 0.0;
        for (w, v) in self.weights.iter().zip(values) {
            if *v == f64::INFINITY {
                return f64::INFINITY;
            }
            total += w * v;
        }
        total
    }

    pub fn probability(&self, event: &EventClass) -> f64 {
        event
            .members()
            .filter(|&i| i < self.atom_count())
            .map(|i| self.weights[i])
            .sum()
    }

    /// `E[|ξ−η| / (1+|ξ−η|)]`, a metric for convergence in probability.
    pub fn prob_metric(&self, xi: &RandomVariable, eta: &RandomVariable) -> Result<f64> {
        check_len(self.atom_count(), xi.len())?;
        check_len(self.atom_count(), eta.len())?;
        Ok(self
            .weights
            .iter()
            .zip(xi.values.iter().zip(&eta.values))
            .map(|(w, (a, b))| {
                let d = (a - b).abs();
                if d == f64::INFINITY {
                    *w
                } else {
                    w * d / (1.0 + d)
                }
            })
            .sum())
    }

    pub fn all_atoms(&self) -> EventClass {
        EventClass::all(self.atom_count())
    }
}

/// An element of `L⁰` on a finite atom space: one value per atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomVariable {
    values: Vec<f64>,
}

impl RandomVariable {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(atoms: usize) -> Self {
        Self::constant(atoms, 0.0)
    }

    pub fn constant(atoms: usize, c: f64) -> Self {
        Self { values: vec![c; atoms] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// The event `{ξ > 0}` of a nonnegative variable.
    pub fn support(&self) -> Result<EventClass> {
        if let Some((i, v)) = self.values.iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(Error::Argument(format!(
                "support needs a nonnegative variable, atom {i} has {v}"
            )));
        }
        Ok(EventClass::from_indices(
            self.values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v > 0.0)
                .map(|(i, _)| i),
        ))
    }

    /// `Ĩ_A · ξ`.
    pub fn restrict(&self, event: &EventClass) -> Self {
        Self {
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| if event.contains(i) { *v } else { 0.0 })
                .collect(),
        }
    }

    /// Atomwise `self ≤ other`.
    pub fn le(&self, other: &Self) -> bool {
        self.len() == other.len() && self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }
}

/// Pointwise maximum of a nonempty family; the lattice supremum on atoms.
/// Real sign with `sgn 0 = 0`.
pub fn sgn(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum()
    }
}

pub fn pointwise_sup(family: &[RandomVariable]) -> Result<RandomVariable> {
    let (first, rest) = family
        .split_first()
        .ok_or_else(|| Error::Argument("supremum of an empty family".into()))?;
    rest.iter()
        .try_fold(first.clone(), |acc, xi| acc.zip_with(xi, f64::max))
}

/// An event class, i.e. a set of atom indices.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EventClass {
    members: BTreeSet<usize>,
}

impl EventClass {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn all(atoms: usize) -> Self {
        Self::from_indices(0..atoms)
    }

    pub fn singleton(atom: usize) -> Self {
        Self::from_indices([atom])
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        Self {
            members: indices.into_iter().collect(),
        }
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.members.contains(&atom)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn complement(&self, atoms: usize) -> Self {
        Self::from_indices((0..atoms).filter(|i| !self.contains(*i)))
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self {
            members: self.members.intersection(&other.members).copied().collect(),
        }
    }

    pub fn indicator(&self, atoms: usize) -> RandomVariable {
        RandomVariable::new((0..atoms).map(|i| if self.contains(i) { 1.0 } else { 0.0 }).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(v: &[f64]) -> RandomVariable {
        RandomVariable::new(v.to_vec())
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(ProbSpace::new(vec![]).is_err());
        assert!(ProbSpace::new(vec![0.5, 0.0, 0.5]).is_err());
        assert!(ProbSpace::new(vec![0.5, 0.6]).is_err());
        assert!(ProbSpace::new(vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn expectation_examples() {
        let space = ProbSpace::uniform(2).unwrap();
        assert_eq!(space.expectation(&rv(&[2.0, 0.0])).unwrap(), 1.0);
        assert_eq!(space.expectation(&RandomVariable::zeros(2)).unwrap(), 0.0);
        assert_eq!(space.expectation(&rv(&[f64::INFINITY, 1.0])).unwrap(), f64::INFINITY);
        assert!(matches!(space.expectation(&rv(&[1.0])), Err(Error::Dimension { .. })));
    }

    #[test]
    fn sup_examples() {
        assert_eq!(
            pointwise_sup(&[rv(&[1.0, 0.0]), rv(&[0.0, 1.0])]).unwrap(),
            rv(&[1.0, 1.0])
        );
        assert_eq!(pointwise_sup(&[rv(&[4.0, -1.0])]).unwrap(), rv(&[4.0, -1.0]));
        assert_eq!(
            pointwise_sup(&[rv(&[1.0, 2.0]), rv(&[3.0, 0.0]), rv(&[2.0, 2.0])]).unwrap(),
            rv(&[3.0, 2.0])
        );
        assert!(pointwise_sup(&[]).is_err());
    }

    #[test]
    fn support_examples() {
        assert_eq!(rv(&[0.0, 3.0, 0.0]).support().unwrap(), EventClass::singleton(1));
        assert!(RandomVariable::zeros(3).support().unwrap().is_empty());
        assert_eq!(rv(&[1.0, 1.0]).support().unwrap(), EventClass::all(2));
        assert!(rv(&[1.0, -1.0]).support().is_err());
    }

    #[test]
    fn restrict_examples() {
        let xi = rv(&[5.0, 7.0]);
        assert_eq!(xi.restrict(&EventClass::singleton(0)), rv(&[5.0, 0.0]));
        assert_eq!(xi.restrict(&EventClass::all(2)), xi);
        assert_eq!(xi.restrict(&EventClass::empty()), rv(&[0.0, 0.0]));
    }

    #[test]
    fn metric_examples() {
        let space = ProbSpace::uniform(2).unwrap();
        let xi = rv(&[1.0, 0.0]);
        assert_eq!(space.prob_metric(&xi, &xi).unwrap(), 0.0);
        assert_eq!(space.prob_metric(&xi, &rv(&[0.0, 0.0])).unwrap(), 0.25);
    }

    #[test]
    fn json_shapes() {
        let space: ProbSpace = serde_json::from_str(r#"{"weights":[0.25,0.75]}"#).unwrap();
        assert_eq!(space.atom_count(), 2);
        assert!(serde_json::from_str::<ProbSpace>(r#"{"weights":[0.2,0.7]}"#).is_err());
        let xi: RandomVariable = serde_json::from_str(r#"{"values":[1.0,2.5]}"#).unwrap();
        assert_eq!(serde_json::to_string(&xi).unwrap(), r#"{"values":[1.0,2.5]}"#);
    }
}
