//! Local greedy pursuits seeded with an initial support-set.
//!
//! Every solver implements [`Pursuit`] and is looked up by name through a
//! [`PursuitRegistry`]; the distributed schemes only ever see the trait.

mod frogs;
mod omp;
mod sp;

use std::fmt;

pub use frogs::{forward_add, frogs, frogs_traced, reverse_fetch, Frogs, FrogsTrace, LadderWrite};
pub use omp::{mod_omp, Omp};
pub use sp::{mod_sp, mod_sp_traced, SubspacePursuit, SP_ITERATION_CAP};

use crate::error::{Error, Result};
use crate::linalg::{fit_support, scatter, DenseMatrix};
use crate::support::SupportSet;

/// Output of one local pursuit run.
#[derive(Debug, Clone, PartialEq)]
pub struct PursuitResult {
    pub support: SupportSet,
    /// Length-N estimate, zero outside `support`.
    pub estimate: Vec<f64>,
    /// `‖y − A x̂‖₂`.
    pub residual_norm: f64,
    /// Inner iterations executed; see each solver for what counts as one.
    pub iterations: usize,
}

impl PursuitResult {
    pub(crate) fn from_support(
        a: &DenseMatrix,
        y: &[f64],
        support: SupportSet,
        iterations: usize,
    ) -> Result<Self> {
        let fit = fit_support(a, y, &support)?;
        Ok(Self {
            estimate: scatter(a.cols(), &support, &fit.coefficients),
            residual_norm: fit.residual_norm,
            support,
            iterations,
        })
    }
}

/// A local solver `(A, K_max, y, T_ini) -> (T̂, x̂, η)`.
pub trait Pursuit: Send + Sync + fmt::Debug {
    /// Registry key, e.g. `"omp"`.
    fn name(&self) -> &'static str;

    fn solve(
        &self,
        a: &DenseMatrix,
        k_max: usize,
        y: &[f64],
        initial: &SupportSet,
    ) -> Result<PursuitResult>;
}

/// Name-indexed collection of local solvers.
#[derive(Debug)]
pub struct PursuitRegistry {
    entries: Vec<Box<dyn Pursuit>>,
}

impl Default for PursuitRegistry {
    fn default() -> Self {
        let mut registry = Self::empty();
        registry.register(Box::new(Omp));
        registry.register(Box::new(SubspacePursuit::default()));
        registry.register(Box::new(Frogs::default()));
        registry
    }
}

impl PursuitRegistry {
    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    /// Adds a solver, replacing any existing entry with the same name.
    pub fn register(&mut self, pursuit: Box<dyn Pursuit>) {
        self.entries.retain(|p| p.name() != pursuit.name());
        self.entries.push(pursuit);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Pursuit> {
        self.entries
            .iter()
            .find(|p| p.name() == name)
            .map(|p| p.as_ref())
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown pursuit '{name}' (known: {})",
                    self.names().join(", ")
                ))
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|p| p.name()).collect()
    }
}

/// Shared argument checks for `(A, K_max, y, T_ini)`.
pub(crate) fn validate(a: &DenseMatrix, k_max: usize, y: &[f64], initial: &SupportSet) -> Result<()> {
    if y.len() != a.rows() {
        return Err(Error::invalid(format!(
            "measurement length {} does not match {} matrix rows",
            y.len(),
            a.rows()
        )));
    }
    if k_max > a.rows() {
        return Err(Error::invalid(format!(
            "K_max = {k_max} exceeds the {} available measurements",
            a.rows()
        )));
    }
    if initial.len() > k_max {
        return Err(Error::invalid(format!(
            "initial support of size {} exceeds K_max = {k_max}",
            initial.len()
        )));
    }
    a.check_support(initial)
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lookup() {
        let reg = PursuitRegistry::default();
        assert_eq!(reg.names(), vec!["omp", "sp", "frogs"]);
        assert_eq!(reg.get("sp").unwrap().name(), "sp");
        let err = reg.get("cosamp").unwrap_err().to_string();
        assert!(err.contains("unknown pursuit 'cosamp'"), "{err}");
    }

    #[test]
    fn registry_replaces_same_name() {
        let mut reg = PursuitRegistry::default();
        reg.register(Box::new(SubspacePursuit { max_iterations: 3 }));
        assert_eq!(reg.names().len(), 3);
        assert_eq!(reg.names().last(), Some(&"sp"));
    }
}
