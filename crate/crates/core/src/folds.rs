//! Nested random bipartitions driving cross-fitting.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng;

/// Smallest sample size for which every quarter is nonempty.
pub const MIN_SAMPLE: usize = 8;

/// Random halves `I_1, I_2` of `[n]` and their quarters `I_{j,k}`.
///
/// Halves and quarters are addressed with zero-based `j, k ∈ {0, 1}`.
/// `|I_1| = ⌊n/2⌋`; when a set has odd size the extra index goes to the
/// later part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    n: usize,
    seed: u64,
    halves: [Vec<usize>; 2],
    quarters: [[Vec<usize>; 2]; 2],
}

/// Draws a fold plan uniformly over admissible partitions.
pub fn make_fold_plan(n: usize, seed: u64) -> Result<FoldPlan> {
    if n < MIN_SAMPLE {
        return Err(Error::InsufficientSample(n));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng::stream(seed, "fold-plan", n as u64));

    let (first, second) = perm.split_at(n / 2);
    let split = |part: &[usize]| -> [Vec<usize>; 2] {
        let (a, b) = part.split_at(part.len() / 2);
        [sorted(a), sorted(b)]
    };
    Ok(FoldPlan {
        n,
        seed,
        quarters: [split(first), split(second)],
        halves: [sorted(first), sorted(second)],
    })
}

fn sorted(s: &[usize]) -> Vec<usize> {
    let mut v = s.to_vec();
    v.sort_unstable();
    v
}

impl FoldPlan {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn half(&self, j: usize) -> &[usize] {
        &self.halves[j]
    }

    pub fn quarter(&self, j: usize, k: usize) -> &[usize] {
        &self.quarters[j][k]
    }

    /// `I_{j,k}^c`: the three quarters other than `(j, k)`, sorted.
    pub fn quarter_complement(&self, j: usize, k: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n - self.quarters[j][k].len());
        out.extend_from_slice(&self.halves[1 - j]);
        out.extend_from_slice(&self.quarters[j][1 - k]);
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check_partition(plan: &FoldPlan) {
        let n = plan.n();
        let mut seen = vec![0u8; n];
        for j in 0..2 {
            let mut half = plan.quarter(j, 0).to_vec();
            half.extend_from_slice(plan.quarter(j, 1));
            half.sort_unstable();
            assert_eq!(half, plan.half(j));
            for &i in plan.half(j) {
                seen[i] += 1;
            }
            for k in 0..2 {
                let q = plan.quarter(j, k).len() as f64;
                assert!((q - n as f64 / 4.0).abs() <= 1.0);
                assert!(q >= 1.0);
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
        assert_eq!(plan.half(0).len(), n / 2);
    }

    #[test]
    fn n8_sizes() {
        let plan = make_fold_plan(8, 3).unwrap();
        assert_eq!(plan.half(0).len(), 4);
        for j in 0..2 {
            for k in 0..2 {
                assert_eq!(plan.quarter(j, k).len(), 2);
            }
        }
    }

    #[test]
    fn n9_sizes() {
        let plan = make_fold_plan(9, 11).unwrap();
        assert_eq!(plan.half(0).len(), 4);
        assert_eq!(plan.half(1).len(), 5);
        let sizes: Vec<usize> = [(0, 0), (0, 1), (1, 0), (1, 1)]
            .iter()
            .map(|&(j, k)| plan.quarter(j, k).len())
            .collect();
        assert_eq!(sizes, vec![2, 2, 2, 3]);
    }

    #[test]
    fn deterministic() {
        assert_eq!(make_fold_plan(1000, 7).unwrap(), make_fold_plan(1000, 7).unwrap());
        assert_ne!(make_fold_plan(1000, 7).unwrap(), make_fold_plan(1000, 8).unwrap());
    }

    #[test]
    fn too_small() {
        let err = make_fold_plan(7, 0).unwrap_err();
        assert!(err.to_string().contains("insufficient sample for nested bipartition"));
    }

    #[test]
    fn quarter_complement_has_three_quarters() {
        let plan = make_fold_plan(21, 5).unwrap();
        let c = plan.quarter_complement(1, 0);
        assert_eq!(c.len(), 21 - plan.quarter(1, 0).len());
        assert!(plan.quarter(1, 0).iter().all(|i| !c.contains(i)));
    }

    #[test]
    fn membership_is_exchangeable() {
        // Each index lands in I_1 with frequency ⌊n/2⌋/n.
        let n = 13;
        let seeds = 10_000;
        let mut hits = vec![0usize; n];
        for s in 0..seeds {
            for &i in make_fold_plan(n, s).unwrap().half(0) {
                hits[i] += 1;
            }
        }
        let p = (n / 2) as f64 / n as f64;
        let se = (p * (1.0 - p) / seeds as f64).sqrt();
        for h in hits {
            assert!((h as f64 / seeds as f64 - p).abs() < 3.5 * se, "frequency {h}");
        }
    }

    proptest! {
        #[test]
        fn partition_invariants(n in 8usize..600, seed in any::<u64>()) {
            check_partition(&make_fold_plan(n, seed).unwrap());
        }
    }
}
