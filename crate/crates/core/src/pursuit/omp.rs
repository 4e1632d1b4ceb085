use crate::error::{Error, Result};
use crate::linalg::{fit_support, DenseMatrix};
use crate::support::{argmax_excluding, SupportSet};

use super::{validate, Pursuit, PursuitResult};

/// Orthogonal matching pursuit continuing from a partial support.
///
/// Grows `initial` one matched-filter maximum at a time until it holds
/// `k_max` indices. Exactly `k_max − |initial|` iterations run; with an empty
/// seed this is plain OMP. Indices already in the support are never
/// re-selected.
pub fn mod_omp(a: &DenseMatrix, k_max: usize, y: &[f64], initial: &SupportSet) -> Result<PursuitResult> {
    validate(a, k_max, y, initial)?;
    let mut support = initial.clone();
    let mut residual = fit_support(a, y, &support)?.residual;
    let mut iterations = 0;
    while support.len() < k_max {
        let correlations = a.matched_filter(&residual);
        let pick = argmax_excluding(&correlations, &support)
            .ok_or_else(|| Error::invalid("no unselected column left to add"))?;
        support.insert(pick);
        residual = fit_support(a, y, &support)?.residual;
        iterations += 1;
    }
    PursuitResult::from_support(a, y, support, iterations)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Omp;

impl Pursuit for Omp {
    fn name(&self) -> &'static str {
        "omp"
    }

    fn solve(&self, a: &DenseMatrix, k_max: usize, y: &[f64], initial: &SupportSet) -> Result<PursuitResult> {
        mod_omp(a, k_max, y, initial)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::least_squares_on_support;
    use crate::pursuit::testutil::instance;

    #[test]
    fn noiseless_recovery_in_easy_regime() {
        let mut hits = 0;
        for seed in 0..100 {
            let inst = instance(40, 80, 3, 0.0, seed);
            let out = mod_omp(&inst.a, 3, &inst.y, &SupportSet::empty()).unwrap();
            if out.support == inst.support {
                hits += 1;
                for (e, x) in out.estimate.iter().zip(&inst.x) {
                    assert!((e - x).abs() < 1e-9);
                }
            }
        }
        assert!(hits >= 90, "{hits}/100 recovered");
    }

    #[test]
    fn full_seed_skips_iterations() {
        let inst = instance(10, 16, 3, 0.0, 1);
        let out = mod_omp(&inst.a, 3, &inst.y, &inst.support).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.support, inst.support);
        let ls = least_squares_on_support(&inst.a, &inst.y, &inst.support).unwrap();
        assert_eq!(out.estimate, ls);
        assert!(out.residual_norm < 1e-9);
    }

    #[test]
    fn iteration_count_and_seed_containment() {
        for seed in 0..30 {
            let inst = instance(20, 40, 6, 0.05, seed);
            let seed_support = SupportSet::new(inst.support.iter().take((seed % 4) as usize), 40).unwrap();
            let out = mod_omp(&inst.a, 8, &inst.y, &seed_support).unwrap();
            assert_eq!(out.support.len(), 8);
            assert_eq!(out.iterations, 8 - seed_support.len());
            assert!(seed_support.is_subset(&out.support));
            for (i, v) in out.estimate.iter().enumerate() {
                if !out.support.contains(i) {
                    assert_eq!(*v, 0.0);
                }
            }
        }
    }

    #[test]
    fn argument_errors() {
        let inst = instance(5, 10, 2, 0.0, 2);
        assert!(mod_omp(&inst.a, 6, &inst.y, &SupportSet::empty()).is_err());
        let seed = SupportSet::new([0, 1, 2], 10).unwrap();
        assert!(mod_omp(&inst.a, 2, &inst.y, &seed).is_err());
        assert!(mod_omp(&inst.a, 2, &inst.y[..4], &SupportSet::empty()).is_err());
    }

    #[test]
    fn zero_measurement_still_fills_support() {
        let inst = instance(8, 12, 2, 0.0, 3);
        let y = vec![0.0; 8];
        let out = mod_omp(&inst.a, 4, &y, &SupportSet::empty()).unwrap();
        assert_eq!(out.support.len(), 4);
        assert_eq!(out.residual_norm, 0.0);
    }

    #[test]
    fn deterministic() {
        let inst = instance(15, 30, 4, 0.1, 4);
        let a = mod_omp(&inst.a, 6, &inst.y, &SupportSet::empty()).unwrap();
        let b = mod_omp(&inst.a, 6, &inst.y, &SupportSet::empty()).unwrap();
        assert_eq!(a, b);
    }
}
