//! Recovery quality measures and the modSP iteration-bound diagnostic.

use crate::error::{Error, Result};
use crate::linalg::{norm, DenseMatrix};
use crate::support::{max_indices, SupportSet};

/// Support-set distortion `1 − |T ∩ T̂| / |T|`.
pub fn support_distortion(truth: &SupportSet, estimate: &SupportSet) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::invalid("support distortion needs a nonempty true support"));
    }
    Ok(1.0 - truth.intersection_len(estimate) as f64 / truth.len() as f64)
}

/// Average support-set cardinality error over `(T, T̂)` pairs.
pub fn asce<'a>(pairs: impl IntoIterator<Item = (&'a SupportSet, &'a SupportSet)>) -> Result<f64> {
    let (mut sum, mut count) = (0.0, 0usize);
    for (t, t_hat) in pairs {
        sum += support_distortion(t, t_hat)?;
        count += 1;
    }
    if count == 0 {
        return Err(Error::invalid("ASCE of zero pairs"));
    }
    Ok(sum / count as f64)
}

/// Pooled energies and distortions over (node, realization) pairs.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MetricsAccumulator {
    pub sum_signal_energy: f64,
    pub sum_error_energy: f64,
    pub sum_distortion: f64,
    pub count: u64,
}

impl MetricsAccumulator {
    pub fn add(&mut self, x: &[f64], x_hat: &[f64], truth: &SupportSet, estimate: &SupportSet) -> Result<()> {
        if x.len() != x_hat.len() {
            return Err(Error::invalid(format!(
                "signal length {} differs from estimate length {}",
                x.len(),
                x_hat.len()
            )));
        }
        let distortion = support_distortion(truth, estimate)?;
        self.sum_signal_energy += x.iter().map(|v| v * v).sum::<f64>();
        self.sum_error_energy += x.iter().zip(x_hat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        self.sum_distortion += distortion;
        self.count += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &MetricsAccumulator) {
        self.sum_signal_energy += other.sum_signal_energy;
        self.sum_error_energy += other.sum_error_energy;
        self.sum_distortion += other.sum_distortion;
        self.count += other.count;
    }

    /// `Σ‖x‖² / Σ‖x − x̂‖²`; `+∞` on exact recovery.
    pub fn srer(&self) -> Result<f64> {
        if self.count == 0 {
            return Err(Error::invalid("SRER of an empty accumulator"));
        }
        if self.sum_error_energy == 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(self.sum_signal_energy / self.sum_error_energy)
    }

    pub fn srer_db(&self) -> Result<f64> {
        self.srer().map(|s| 10.0 * s.log10())
    }

    pub fn asce(&self) -> Result<f64> {
        if self.count == 0 {
            return Err(Error::invalid("ASCE of an empty accumulator"));
        }
        Ok(self.sum_distortion / self.count as f64)
    }
}

/// Count, sum and sum of squares, for mean and standard deviation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn add(&mut self, v: f64) {
        self.count += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    pub fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        self.sum / self.count as f64
    }

    /// Population standard deviation.
    pub fn std(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        let mean = self.mean();
        (self.sum_sq / self.count as f64 - mean * mean).max(0.0).sqrt()
    }
}

/// Iteration bound `k*` for modSP, `None` when the noise is zero.
///
/// `k* = ceil(log2(‖x_{T̄_ini}‖ / ‖A_{T_w}ᵀ w‖))`, clamped at zero, where
/// `T_w` is the `K`-subset maximizing `‖A_Tᵀ w‖`. Since that norm is a sum of
/// per-index squares, the maximizer is the `K` largest `|A_iᵀ w|`. The bound
/// presumes a restricted isometry constant that is never checked, so it is
/// only a diagnostic.
pub fn modsp_iteration_bound(
    x: &[f64],
    initial: &SupportSet,
    a: &DenseMatrix,
    w: &[f64],
    k: usize,
) -> Result<Option<u32>> {
    if x.len() != a.cols() || w.len() != a.rows() {
        return Err(Error::invalid("dimension mismatch in iteration bound"));
    }
    a.check_support(initial)?;
    let correlations = a.matched_filter(w);
    let t_w = max_indices(&correlations, k)?;
    let denominator = norm(&t_w.iter().map(|i| correlations[i]).collect::<Vec<_>>());
    if denominator == 0.0 {
        return Ok(None);
    }
    let numerator = norm(
        &x.iter()
            .enumerate()
            .filter(|(i, _)| !initial.contains(*i))
            .map(|(_, v)| *v)
            .collect::<Vec<_>>(),
    );
    if numerator == 0.0 {
        return Ok(Some(0));
    }
    Ok(Some((numerator / denominator).log2().ceil().max(0.0) as u32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamSeed;
    use crate::signal::{draw_support, generate_sensing_matrix};
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};
    use rand_distr::{Distribution, StandardNormal};

    fn s(ix: &[usize]) -> SupportSet {
        SupportSet::new(ix.iter().copied(), 40).unwrap()
    }

    #[test]
    fn srer_examples() {
        let t = s(&[0]);
        let mut exact = MetricsAccumulator::default();
        exact.add(&[1.0, 0.0], &[1.0, 0.0], &t, &t).unwrap();
        assert_eq!(exact.srer_db().unwrap(), f64::INFINITY);

        let mut zero = MetricsAccumulator::default();
        zero.add(&[1.0, 2.0], &[0.0, 0.0], &t, &SupportSet::empty()).unwrap();
        zero.add(&[3.0, 0.0], &[0.0, 0.0], &t, &SupportSet::empty()).unwrap();
        assert_eq!(zero.srer().unwrap(), 1.0);
        assert_eq!(zero.srer_db().unwrap(), 0.0);

        let mut single = MetricsAccumulator::default();
        single.add(&[2.0, 0.0], &[1.0, 0.0], &t, &t).unwrap();
        assert_eq!(single.srer().unwrap(), 4.0);

        assert!(MetricsAccumulator::default().srer().is_err());
        assert!(single.add(&[1.0], &[1.0, 2.0], &t, &t).is_err());
    }

    #[test]
    fn asce_examples() {
        let t = s(&[1, 2, 3]);
        assert_eq!(asce([(&t, &t)]).unwrap(), 0.0);
        assert_eq!(asce([(&t, &s(&[4, 5, 6]))]).unwrap(), 1.0);
        let truth = s(&(0..20).collect::<Vec<_>>());
        let est = s(&(5..25).collect::<Vec<_>>());
        assert_eq!(asce([(&truth, &est)]).unwrap(), 0.25);
        assert!(asce([(&SupportSet::empty(), &t)]).is_err());
        assert!(asce(std::iter::empty()).is_err());
    }

    #[test]
    fn moments() {
        let mut m = Moments::default();
        for v in [1.0, 2.0, 3.0, 4.0] {
            m.add(v);
        }
        assert_eq!(m.mean(), 2.5);
        assert!((m.std() - 1.25f64.sqrt()).abs() < 1e-15);
        assert!(Moments::default().mean().is_nan());
    }

    /// `T_w` by brute force over every `K`-subset.
    fn exhaustive_tw_norm(a: &DenseMatrix, w: &[f64], k: usize) -> f64 {
        fn walk(start: usize, n: usize, k: usize, chosen: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
            if chosen.len() == k {
                f(chosen);
                return;
            }
            for i in start..n {
                chosen.push(i);
                walk(i + 1, n, k, chosen, f);
                chosen.pop();
            }
        }
        let mut best = 0.0f64;
        walk(0, a.cols(), k, &mut Vec::new(), &mut |t| {
            let v: f64 = t
                .iter()
                .map(|&i| a.column(i).iter().zip(w).map(|(x, y)| x * y).sum::<f64>().powi(2))
                .sum();
            best = best.max(v.sqrt());
        });
        best
    }

    #[test]
    fn iteration_bound_matches_exhaustive_oracle() {
        for seed in 0..20 {
            let root = StreamSeed::new(seed);
            let mut rng = root.rng();
            let a = generate_sensing_matrix(8, 12, &mut rng).unwrap();
            let support = draw_support(12, 2, &mut rng).unwrap();
            let mut x = vec![0.0; 12];
            for i in support.iter() {
                x[i] = StandardNormal.sample(&mut rng);
            }
            let w: Vec<f64> = (0..8).map(|_| 0.05 * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
            let oracle_den = exhaustive_tw_norm(&a, &w, 2);
            let expect_sp = (norm(&x) / oracle_den).log2().ceil().max(0.0) as u32;
            let sp = modsp_iteration_bound(&x, &SupportSet::empty(), &a, &w, 2).unwrap().unwrap();
            assert_eq!(sp, expect_sp);

            let partial = SupportSet::new(support.iter().take(1), 12).unwrap();
            let modsp = modsp_iteration_bound(&x, &partial, &a, &w, 2).unwrap().unwrap();
            assert!(modsp <= sp);

            assert_eq!(modsp_iteration_bound(&x, &support, &a, &w, 2).unwrap(), Some(0));
            assert_eq!(modsp_iteration_bound(&x, &partial, &a, &[0.0; 8], 2).unwrap(), None);
        }
    }

    proptest! {
        #[test]
        fn asce_in_unit_interval(pairs in proptest::collection::vec(
            (proptest::collection::btree_set(0usize..30, 1..8), proptest::collection::btree_set(0usize..30, 0..8)),
            1..10,
        )) {
            let sets: Vec<(SupportSet, SupportSet)> = pairs
                .iter()
                .map(|(t, h)| (SupportSet::new(t.iter().copied(), 30).unwrap(), SupportSet::new(h.iter().copied(), 30).unwrap()))
                .collect();
            let v = asce(sets.iter().map(|(t, h)| (t, h))).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            let all_covered = sets.iter().all(|(t, h)| t.is_subset(h));
            prop_assert_eq!(v == 0.0, all_covered);
        }

        #[test]
        fn srer_is_scale_invariant(
            xs in proptest::collection::vec(-5.0f64..5.0, 4),
            hs in proptest::collection::vec(-5.0f64..5.0, 4),
            c in 0.1f64..10.0,
        ) {
            let t = SupportSet::new([0], 4).unwrap();
            let mut a = MetricsAccumulator::default();
            a.add(&xs, &hs, &t, &t).unwrap();
            let scaled = |v: &[f64]| v.iter().map(|x| -c * x).collect::<Vec<_>>();
            let mut b = MetricsAccumulator::default();
            b.add(&scaled(&xs), &scaled(&hs), &t, &t).unwrap();
            let (sa, sb) = (a.srer().unwrap(), b.srer().unwrap());
            prop_assert!(sa == sb || (sa - sb).abs() <= 1e-9 * sa.abs());
        }

        #[test]
        fn merge_is_order_independent(vals in proptest::collection::vec((0.0f64..4.0, 0.0f64..4.0), 1..12)) {
            let t = SupportSet::new([0, 1], 2).unwrap();
            let parts: Vec<MetricsAccumulator> = vals
                .iter()
                .map(|&(x, e)| {
                    let mut m = MetricsAccumulator::default();
                    m.add(&[x, 0.0], &[x - e, 0.0], &t, &t).unwrap();
                    m
                })
                .collect();
            let mut fwd = MetricsAccumulator::default();
            parts.iter().for_each(|p| fwd.merge(p));
            let mut rev = MetricsAccumulator::default();
            parts.iter().rev().for_each(|p| rev.merge(p));
            prop_assert_eq!(fwd.count, rev.count);
            prop_assert!((fwd.sum_error_energy - rev.sum_error_energy).abs() <= 1e-12 * fwd.sum_error_energy.max(1.0));
        }
    }
}
