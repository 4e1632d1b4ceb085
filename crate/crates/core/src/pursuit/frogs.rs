//! Forward-reverse orthogonal greedy search.
//!
//! FROGS keeps a ladder of `(T_k, r_k)` pairs indexed by cardinality. A
//! forward step grows the current support by one matched-filter pick; reverse
//! steps then try to swap the last `k + 1` indices for the best `k` of them and
//! walk down the ladder while that strictly shrinks the stored residual.
//!
//! A forward step overwrites its rung unconditionally, so the value stored at
//! cardinality `K_max` can rise after it has fallen. The returned support is
//! the lowest-residual one that rung ever held (latest wins on ties), which
//! keeps the output no worse than the modOMP start.

use crate::error::{Error, Result};
use crate::linalg::{fit_support, norm, scatter, DenseMatrix};
use crate::support::{argmax_excluding, max_indices_within, SupportSet};

use super::{mod_omp, validate, Pursuit, PursuitResult};

/// Grows `support` by the strongest unselected column of `Aᵀ residual` and
/// returns the new residual of `y`.
pub fn forward_add(
    a: &DenseMatrix,
    y: &[f64],
    residual: &[f64],
    support: &SupportSet,
) -> Result<(Vec<f64>, SupportSet)> {
    if support.len() >= a.rows() {
        return Err(Error::invalid(format!(
            "support already holds {} indices, the measurement count",
            support.len()
        )));
    }
    if residual.len() != a.rows() {
        return Err(Error::invalid("residual length does not match matrix rows"));
    }
    let pick = argmax_excluding(&a.matched_filter(residual), support)
        .ok_or_else(|| Error::invalid("no unselected column left to add"))?;
    let mut grown = support.clone();
    grown.insert(pick);
    let fit = fit_support(a, y, &grown)?;
    Ok((fit.residual, grown))
}

/// Keeps the `k` members of `support` with the largest least-squares
/// coefficients and returns the residual of `y` on them.
pub fn reverse_fetch(a: &DenseMatrix, y: &[f64], support: &SupportSet, k: usize) -> Result<(Vec<f64>, SupportSet)> {
    if support.len() != k + 1 {
        return Err(Error::invalid(format!(
            "reverse fetch to {k} indices needs a support of size {}, got {}",
            k + 1,
            support.len()
        )));
    }
    let fit = fit_support(a, y, support)?;
    let estimate = scatter(a.cols(), support, &fit.coefficients);
    let kept = max_indices_within(&estimate, support, k)?;
    let residual = fit_support(a, y, &kept)?.residual;
    Ok((residual, kept))
}

/// One write into the residual ladder, recorded by [`frogs_traced`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LadderWrite {
    /// Initial ordering pass.
    Initial { cardinality: usize, norm: f64 },
    /// Unconditional write of a forward step.
    Forward { cardinality: usize, norm: f64 },
    /// Accepted reverse step (strictly smaller than the value it replaced).
    Reverse { cardinality: usize, norm: f64 },
}

#[derive(Debug, Clone, Default)]
pub struct FrogsTrace {
    pub writes: Vec<LadderWrite>,
    pub forward_steps: usize,
    pub accepted_reverse_steps: usize,
    /// Residual norm of the modOMP initialization.
    pub initial_residual_norm: f64,
    /// Set when the forward-step cap stopped the search early.
    pub capped: bool,
}

/// FROGS seeded with `initial`. `iterations` counts forward steps.
pub fn frogs(a: &DenseMatrix, k_max: usize, y: &[f64], initial: &SupportSet) -> Result<PursuitResult> {
    run(a, k_max, y, initial, Frogs::default().max_forward_steps(k_max), None)
}

/// [`frogs`] that also records every ladder write.
pub fn frogs_traced(
    a: &DenseMatrix,
    k_max: usize,
    y: &[f64],
    initial: &SupportSet,
) -> Result<(PursuitResult, FrogsTrace)> {
    let mut trace = FrogsTrace::default();
    let cap = Frogs::default().max_forward_steps(k_max);
    let result = run(a, k_max, y, initial, cap, Some(&mut trace))?;
    Ok((result, trace))
}

struct Rung {
    support: SupportSet,
    residual: Vec<f64>,
    norm: f64,
}

fn run(
    a: &DenseMatrix,
    k_max: usize,
    y: &[f64],
    initial: &SupportSet,
    forward_cap: usize,
    mut trace: Option<&mut FrogsTrace>,
) -> Result<PursuitResult> {
    validate(a, k_max, y, initial)?;
    if k_max >= a.rows() {
        return Err(Error::invalid(format!(
            "FROGS needs K_max < M (forward steps add one index past K_max), got K_max = {k_max}, M = {}",
            a.rows()
        )));
    }
    let mut record = |w: LadderWrite| {
        if let Some(t) = trace.as_deref_mut() {
            t.writes.push(w);
        }
    };
    let mut best: Option<(f64, SupportSet)> = None;
    let mut offer = |cardinality: usize, norm: f64, support: &SupportSet| {
        if cardinality == k_max && best.as_ref().is_none_or(|(b, _)| norm <= *b) {
            best = Some((norm, support.clone()));
        }
    };

    let start = mod_omp(a, k_max, y, initial)?;

    // Slots 0..=k_max+1; slot 0 is the empty support.
    let mut ladder: Vec<Rung> = Vec::with_capacity(k_max + 2);
    ladder.push(Rung {
        support: SupportSet::empty(),
        residual: y.to_vec(),
        norm: norm(y),
    });
    for l in 1..=k_max {
        let support = max_indices_within(&start.estimate, &start.support, l)?;
        let fit = fit_support(a, y, &support)?;
        record(LadderWrite::Initial {
            cardinality: l,
            norm: fit.residual_norm,
        });
        offer(l, fit.residual_norm, &support);
        ladder.push(Rung {
            support,
            norm: fit.residual_norm,
            residual: fit.residual,
        });
    }
    ladder.push(Rung {
        support: SupportSet::empty(),
        residual: Vec::new(),
        norm: f64::INFINITY,
    });

    let mut k = k_max;
    let mut forward_steps = 0;
    let mut accepted = 0;
    let mut capped = false;
    while k != k_max + 1 {
        if forward_steps == forward_cap {
            capped = true;
            break;
        }
        let (residual, support) = forward_add(a, y, &ladder[k].residual, &ladder[k].support)?;
        forward_steps += 1;
        let n = norm(&residual);
        record(LadderWrite::Forward {
            cardinality: k + 1,
            norm: n,
        });
        offer(k + 1, n, &support);
        ladder[k + 1] = Rung {
            support,
            residual,
            norm: n,
        };

        while k > 0 {
            let (residual, support) = reverse_fetch(a, y, &ladder[k + 1].support, k)?;
            let n = norm(&residual);
            if n < ladder[k].norm {
                record(LadderWrite::Reverse { cardinality: k, norm: n });
                offer(k, n, &support);
                ladder[k] = Rung {
                    support,
                    residual,
                    norm: n,
                };
                accepted += 1;
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
    }

    if let Some(t) = trace {
        t.forward_steps = forward_steps;
        t.accepted_reverse_steps = accepted;
        t.initial_residual_norm = start.residual_norm;
        t.capped = capped;
    }
    let support = match best {
        Some((_, support)) => support,
        None => SupportSet::empty(),
    };
    PursuitResult::from_support(a, y, support, forward_steps)
}

#[derive(Debug, Clone, Copy)]
pub struct Frogs {
    /// Forward steps allowed per `K_max + 1`; the search has no proven bound.
    pub forward_steps_per_index: usize,
}

impl Default for Frogs {
    fn default() -> Self {
        Self {
            forward_steps_per_index: 50,
        }
    }
}

impl Frogs {
    fn max_forward_steps(&self, k_max: usize) -> usize {
        self.forward_steps_per_index * (k_max + 1)
    }
}

impl Pursuit for Frogs {
    fn name(&self) -> &'static str {
        "frogs"
    }

    fn solve(&self, a: &DenseMatrix, k_max: usize, y: &[f64], initial: &SupportSet) -> Result<PursuitResult> {
        run(a, k_max, y, initial, self.max_forward_steps(k_max), None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::resid;
    use crate::pursuit::testutil::instance;

    #[test]
    fn forward_add_from_empty_is_first_omp_pick() {
        let inst = instance(10, 20, 3, 0.0, 11);
        let (r, t) = forward_add(&inst.a, &inst.y, &inst.y, &SupportSet::empty()).unwrap();
        let omp = mod_omp(&inst.a, 1, &inst.y, &SupportSet::empty()).unwrap();
        assert_eq!(t, omp.support);
        assert!((norm(&r) - omp.residual_norm).abs() < 1e-12);
    }

    #[test]
    fn forward_add_properties() {
        for seed in 0..1000 {
            let inst = instance(12, 30, 4, 0.05, seed);
            let k = (seed % 6) as usize;
            let t = SupportSet::new((0..k).map(|i| (i * 7 + seed as usize) % 30), 30).unwrap();
            let fit = fit_support(&inst.a, &inst.y, &t).unwrap();
            let (r, grown) = forward_add(&inst.a, &inst.y, &fit.residual, &t).unwrap();
            assert_eq!(grown.len(), t.len() + 1);
            assert!(t.is_subset(&grown));
            assert!(norm(&r) <= fit.residual_norm + 1e-12);
        }
    }

    #[test]
    fn forward_add_rejects_full_support() {
        let inst = instance(3, 10, 1, 0.0, 1);
        let t = SupportSet::new([0, 1, 2], 10).unwrap();
        assert!(forward_add(&inst.a, &inst.y, &inst.y, &t).is_err());
    }

    #[test]
    fn reverse_fetch_examples() {
        let inst = instance(10, 20, 3, 0.0, 12);
        let one = SupportSet::new([4], 20).unwrap();
        let (r, t) = reverse_fetch(&inst.a, &inst.y, &one, 0).unwrap();
        assert!(t.is_empty());
        assert_eq!(r, inst.y);
        assert!(reverse_fetch(&inst.a, &inst.y, &one, 1).is_err());
    }

    #[test]
    fn reverse_fetch_drops_the_idle_index() {
        // y lies in the span of the true columns, so the extra column gets a
        // zero coefficient and is the one removed.
        for seed in 0..50 {
            let inst = instance(15, 30, 3, 0.0, seed);
            let extra = (0..30).find(|i| !inst.support.contains(*i)).unwrap();
            let mut padded = inst.support.clone();
            padded.insert(extra);
            let (r, kept) = reverse_fetch(&inst.a, &inst.y, &padded, 3).unwrap();
            assert_eq!(kept, inst.support);
            assert!(norm(&r) < 1e-9);
            assert!(kept.is_subset(&padded));
        }
    }

    #[test]
    fn exact_omp_start_is_kept() {
        let mut checked = 0;
        for seed in 0..100 {
            let inst = instance(20, 40, 3, 0.0, seed);
            let omp = mod_omp(&inst.a, 3, &inst.y, &SupportSet::empty()).unwrap();
            if omp.residual_norm > 1e-9 {
                continue;
            }
            let (out, trace) = frogs_traced(&inst.a, 3, &inst.y, &SupportSet::empty()).unwrap();
            assert_eq!(out.support, omp.support);
            assert_eq!(trace.accepted_reverse_steps, 0);
            checked += 1;
        }
        assert!(checked > 50);
    }

    #[test]
    fn residual_norm_matches_estimate() {
        for seed in 0..50 {
            let inst = instance(25, 60, 6, 0.05, seed);
            let out = frogs(&inst.a, 6, &inst.y, &SupportSet::empty()).unwrap();
            assert_eq!(out.support.len(), 6);
            let sub = inst.a.select_columns(&out.support).unwrap();
            let r = resid(&inst.y, Some(&sub)).unwrap();
            assert!((norm(&r) - out.residual_norm).abs() <= 1e-9 * out.residual_norm.max(1.0));
        }
    }

    #[test]
    fn rejects_k_max_equal_to_rows() {
        let inst = instance(5, 10, 2, 0.0, 2);
        assert!(frogs(&inst.a, 5, &inst.y, &SupportSet::empty()).is_err());
    }

    #[test]
    fn zero_sparsity() {
        let inst = instance(5, 10, 2, 0.0, 2);
        let out = frogs(&inst.a, 0, &inst.y, &SupportSet::empty()).unwrap();
        assert!(out.support.is_empty());
        assert!((out.residual_norm - norm(&inst.y)).abs() < 1e-12);
    }

    fn slot_of(w: &LadderWrite) -> (usize, f64) {
        match *w {
            LadderWrite::Initial { cardinality, norm }
            | LadderWrite::Forward { cardinality, norm }
            | LadderWrite::Reverse { cardinality, norm } => (cardinality, norm),
        }
    }

    #[test]
    fn never_worse_than_omp_start() {
        // SMNR 20 dB on a K = 10, M = 30 problem.
        let sigma = (10.0 / (100.0 * 30.0f64)).sqrt();
        for seed in 0..1000 {
            let inst = instance(30, 100, 10, sigma, seed);
            let (out, trace) = frogs_traced(&inst.a, 10, &inst.y, &SupportSet::empty()).unwrap();
            let omp = mod_omp(&inst.a, 10, &inst.y, &SupportSet::empty()).unwrap();
            assert_eq!(trace.initial_residual_norm, omp.residual_norm);
            assert!(out.residual_norm <= omp.residual_norm, "seed {seed}");
            assert!(!trace.capped);
        }
    }

    #[test]
    fn reverse_writes_strictly_shrink_their_rung() {
        let sigma = (10.0 / (100.0 * 30.0f64)).sqrt();
        let mut reverse_writes = 0;
        for seed in 0..300 {
            let inst = instance(30, 100, 10, sigma, seed);
            let (out, trace) = frogs_traced(&inst.a, 10, &inst.y, &SupportSet::empty()).unwrap();
            let mut stored = vec![f64::INFINITY; 12];
            let mut slot_k = Vec::new();
            for w in &trace.writes {
                let (c, n) = slot_of(w);
                if let LadderWrite::Reverse { .. } = w {
                    assert!(n < stored[c]);
                    reverse_writes += 1;
                }
                stored[c] = n;
                if c == 10 {
                    slot_k.push(n);
                }
            }
            let lowest = slot_k.iter().copied().fold(f64::INFINITY, f64::min);
            assert!((out.residual_norm - lowest).abs() <= 1e-12 * lowest.max(1.0));
            assert_eq!(trace.accepted_reverse_steps, trace.writes.iter().filter(|w| matches!(w, LadderWrite::Reverse { .. })).count());
        }
        assert!(reverse_writes > 0);
    }

    #[test]
    fn forward_write_can_raise_a_rung() {
        // The literal forward step overwrites its rung unconditionally; this
        // documents that the stored value is not monotone in general.
        let sigma = (10.0 / (100.0 * 30.0f64)).sqrt();
        let raised = (0..300).any(|seed| {
            let inst = instance(30, 100, 10, sigma, seed);
            let (_, trace) = frogs_traced(&inst.a, 10, &inst.y, &SupportSet::empty()).unwrap();
            let mut stored = vec![f64::INFINITY; 12];
            trace.writes.iter().any(|w| {
                let (c, n) = slot_of(w);
                let up = n > stored[c];
                stored[c] = n;
                up
            })
        });
        assert!(raised);
    }
}
