use crate::error::Result;
use crate::linalg::{fit_support, scatter, DenseMatrix};
use crate::support::{max_indices, max_indices_within, SupportSet};

use super::{validate, Pursuit, PursuitResult};

/// Hard limit on expand/prune iterations, guarding against limit cycles.
pub const SP_ITERATION_CAP: usize = 100;

/// Subspace pursuit with an initial support merged into its first estimate.
///
/// Each iteration expands the current support with the `k_max` strongest
/// matched-filter indices, refits, and prunes back to the `k_max` largest
/// coefficients. The loop stops as soon as the residual norm fails to
/// decrease strictly and the previous iterate is returned. `iterations`
/// counts executed expand/prune steps, including the rejected last one.
pub fn mod_sp(a: &DenseMatrix, k_max: usize, y: &[f64], initial: &SupportSet) -> Result<PursuitResult> {
    mod_sp_capped(a, k_max, y, initial, SP_ITERATION_CAP).map(|(result, _)| result)
}

/// [`mod_sp`] that also returns the residual norm of every iterate, starting
/// with the initial estimate and ending with the rejected one (when the loop
/// ended by rejection rather than by the iteration cap).
pub fn mod_sp_traced(
    a: &DenseMatrix,
    k_max: usize,
    y: &[f64],
    initial: &SupportSet,
) -> Result<(PursuitResult, Vec<f64>)> {
    mod_sp_capped(a, k_max, y, initial, SP_ITERATION_CAP)
}

fn mod_sp_capped(
    a: &DenseMatrix,
    k_max: usize,
    y: &[f64],
    initial: &SupportSet,
    cap: usize,
) -> Result<(PursuitResult, Vec<f64>)> {
    validate(a, k_max, y, initial)?;
    let m = a.rows();

    let expand_prune = |correlations: &[f64], base: &SupportSet| -> Result<SupportSet> {
        let mut merged = max_indices(correlations, k_max)?.union(base);
        if merged.len() > m {
            merged = max_indices_within(correlations, &merged, m)?;
        }
        let fit = fit_support(a, y, &merged)?;
        let estimate = scatter(a.cols(), &merged, &fit.coefficients);
        max_indices_within(&estimate, &merged, k_max)
    };

    let mut support = expand_prune(&a.matched_filter(y), initial)?;
    let mut fit = fit_support(a, y, &support)?;
    let mut history = vec![fit.residual_norm];
    let mut iterations = 0;
    while iterations < cap {
        iterations += 1;
        let candidate = expand_prune(&a.matched_filter(&fit.residual), &support)?;
        let candidate_fit = fit_support(a, y, &candidate)?;
        history.push(candidate_fit.residual_norm);
        if candidate_fit.residual_norm >= fit.residual_norm {
            break;
        }
        support = candidate;
        fit = candidate_fit;
    }

    let result = PursuitResult {
        estimate: scatter(a.cols(), &support, &fit.coefficients),
        residual_norm: fit.residual_norm,
        support,
        iterations,
    };
    Ok((result, history))
}

#[derive(Debug, Clone, Copy)]
pub struct SubspacePursuit {
    pub max_iterations: usize,
}

impl Default for SubspacePursuit {
    fn default() -> Self {
        Self {
            max_iterations: SP_ITERATION_CAP,
        }
    }
}

impl Pursuit for SubspacePursuit {
    fn name(&self) -> &'static str {
        "sp"
    }

    fn solve(&self, a: &DenseMatrix, k_max: usize, y: &[f64], initial: &SupportSet) -> Result<PursuitResult> {
        mod_sp_capped(a, k_max, y, initial, self.max_iterations).map(|(result, _)| result)
    }
}
