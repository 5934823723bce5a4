//! Dilworth truncation of the dual set function and the equivalent convex game.
//!
//! `f̂_α^#(X) = min_{P ∈ Π(X)} Σ_{C ∈ P} f_α^#(C)` is computed for every
//! `X ⊆ V` in a single subset DP. When `α ≥ R_CO` it is submodular with
//! `f̂_α^#(V) = α`, and `f̂_α(X) = f̂_α^#(V) − f̂_α^#(V∖X)` is supermodular.

use itertools::Itertools;
use thiserror::Error;

use crate::combinatorics::{min_partition_sums, Partition, SetFunction, Subset};
use crate::game::{upper_bound_membership, GameError, GameSpec, Membership, RateVector};
use crate::rational::Rational;
use crate::sumrate::min_sum_rate_asymptotic;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DilworthError {
    #[error("the core is empty for α = {alpha}; the minimum sum-rate is {r_co}")]
    Inapplicable { alpha: Rational, r_co: Rational },
    #[error(transparent)]
    Game(#[from] GameError),
}

/// The truncated dual `f̂_α^#` over all subsets, with one minimizing
/// partition per subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedDual {
    alpha: Rational,
    values: SetFunction,
    argmin_partitions: Vec<Partition>,
    r_co: Rational,
}

impl TruncatedDual {
    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn num_users(&self) -> usize {
        self.values.num_users()
    }

    pub fn values(&self) -> &SetFunction {
        &self.values
    }

    pub fn get(&self, x: Subset) -> &Rational {
        self.values.get(x)
    }

    pub fn argmin(&self, x: Subset) -> &Partition {
        &self.argmin_partitions[x.index()]
    }

    /// Asymptotic minimum sum-rate of the underlying model.
    pub fn min_sum_rate(&self) -> &Rational {
        &self.r_co
    }

    /// `f̂_α^#(V) = α`, which holds exactly when `α ≥ R_CO`.
    pub fn core_nonempty(&self) -> bool {
        *self.values.get(self.values.ground()) == self.alpha
    }

    /// Errors with the minimum sum-rate when the core is empty.
    pub fn require_nonempty(&self) -> Result<(), DilworthError> {
        if self.core_nonempty() {
            Ok(())
        } else {
            Err(DilworthError::Inapplicable {
                alpha: self.alpha.clone(),
                r_co: self.r_co.clone(),
            })
        }
    }

    /// Membership in `B(f̂_α^#, ≤)`.
    pub fn membership(&self, r: &RateVector) -> Result<Membership, GameError> {
        upper_bound_membership(self.num_users(), |x| self.values.get(x).clone(), r)
    }
}

/// Truncates an arbitrary set function (used for idempotence checks).
pub fn truncate_set_function(g: &SetFunction) -> (SetFunction, Vec<Partition>) {
    let n = g.num_users();
    let table = min_partition_sums(Subset::full(n), |x| g.get(x).clone());
    let (values, partitions): (Vec<_>, Vec<_>) = table
        .into_iter()
        .map(|entry| {
            let entry = entry.expect("all subsets of the full ground set are solved");
            (entry.value, entry.argmin)
        })
        .unzip();
    (SetFunction::from_values(n, values), partitions)
}

pub fn dilworth_truncate(game: &GameSpec<'_>) -> TruncatedDual {
    let (values, argmin_partitions) = truncate_set_function(&game.dual_function());
    TruncatedDual {
        alpha: game.alpha().clone(),
        values,
        argmin_partitions,
        r_co: min_sum_rate_asymptotic(game.model()).r_co,
    }
}

/// `f̂_α(X) = f̂_α^#(V) − f̂_α^#(V∖X)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexCharacteristic {
    values: SetFunction,
}

impl ConvexCharacteristic {
    pub fn values(&self) -> &SetFunction {
        &self.values
    }

    pub fn get(&self, x: Subset) -> &Rational {
        self.values.get(x)
    }
}

pub fn convex_characteristic(trunc: &TruncatedDual) -> ConvexCharacteristic {
    let ground = trunc.values.ground();
    let top = trunc.get(ground);
    ConvexCharacteristic {
        values: SetFunction::from_fn(trunc.num_users(), |x| top - trunc.get(ground.difference(x))),
    }
}

/// Edmonds' greedy point of `B(g, ≤)` for the join order `order`:
/// `r_{π(k)} = g({π(1..k)}) − g({π(1..k−1)})`.
pub fn greedy_point(g: &SetFunction, order: &[usize]) -> Vec<Rational> {
    let mut rates = vec![Rational::default(); g.num_users()];
    let mut prefix = Subset::EMPTY;
    for &user in order {
        let next = prefix.with(user);
        rates[user] = g.get(next) - g.get(prefix);
        prefix = next;
    }
    rates
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoresEqualReport {
    pub samples_checked: usize,
    /// Samples on which the two memberships disagree.
    pub disagreements: Vec<RateVector>,
    /// Greedy vertices of the truncation that were checked (only for `|V| ≤ 4`).
    pub vertices_checked: usize,
    /// Vertices of `B(f̂_α^#, ≤)` that fail the original core test.
    pub vertices_outside: Vec<RateVector>,
}

impl CoresEqualReport {
    pub fn equal(&self) -> bool {
        self.disagreements.is_empty() && self.vertices_outside.is_empty()
    }
}

/// Compares `B(f_α^#, ≤)` and `B(f̂_α^#, ≤)` on the given samples, and for
/// `|V| ≤ 4` also checks every greedy vertex of the truncation against the
/// original core.
pub fn cores_equal(
    game: &GameSpec<'_>,
    trunc: &TruncatedDual,
    samples: &[RateVector],
) -> Result<CoresEqualReport, DilworthError> {
    trunc.require_nonempty()?;
    let mut disagreements = Vec::new();
    for r in samples {
        let original = game.dual_membership_equivalent(r)?.is_member();
        let truncated = trunc.membership(r)?.is_member();
        if original != truncated {
            disagreements.push(r.clone());
        }
    }
    let n = game.num_users();
    let mut vertices_checked = 0;
    let mut vertices_outside = Vec::new();
    if n <= 4 {
        for order in (0..n).permutations(n) {
            let vertex = RateVector::new(greedy_point(trunc.values(), &order))?;
            vertices_checked += 1;
            if !game.in_core(&vertex, false)?.is_member() {
                vertices_outside.push(vertex);
            }
        }
    }
    Ok(CoresEqualReport {
        samples_checked: samples.len(),
        disagreements,
        vertices_checked,
        vertices_outside,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::fixtures::three_users;
    use crate::rational::{int, ratio};

    fn s(ids: &[usize]) -> Subset {
        Subset::from_indices(ids.iter().map(|i| i - 1))
    }

    fn rv(v: &[i64]) -> RateVector {
        RateVector::new(v.iter().map(|&x| int(x)).collect()).unwrap()
    }

    #[test]
    fn truncation_three_users_alpha_four() {
        let m = three_users();
        let trunc = dilworth_truncate(&GameSpec::new(&m, int(4)).unwrap());
        let expected = [
            (s(&[]), 0),
            (s(&[1]), 3),
            (s(&[2]), 1),
            (s(&[3]), 1),
            (s(&[1, 2]), 4),
            (s(&[1, 3]), 4),
            (s(&[2, 3]), 2),
            (s(&[1, 2, 3]), 4),
        ];
        for (x, v) in expected {
            assert_eq!(trunc.get(x), &int(v), "f̂#({x})");
        }
        assert!(trunc.core_nonempty());
        assert_eq!(trunc.min_sum_rate(), &ratio(7, 2));
        // f^#({2,3}) = 3 but {2},{3} costs 1 + 1
        assert_eq!(trunc.argmin(s(&[2, 3])), &Partition::singletons(s(&[2, 3])));
        assert_eq!(trunc.argmin(s(&[1, 2, 3])), &Partition::trivial(s(&[1, 2, 3])));
        assert!(trunc.values().check_submodular().is_ok());
    }

    #[test]
    fn convex_characteristic_three_users() {
        let m = three_users();
        let trunc = dilworth_truncate(&GameSpec::new(&m, int(4)).unwrap());
        let conv = convex_characteristic(&trunc);
        let expected = [
            (s(&[]), 0),
            (s(&[1]), 2),
            (s(&[2]), 0),
            (s(&[3]), 0),
            (s(&[1, 2]), 3),
            (s(&[1, 3]), 3),
            (s(&[2, 3]), 1),
            (s(&[1, 2, 3]), 4),
        ];
        for (x, v) in expected {
            assert_eq!(conv.get(x), &int(v), "f̂({x})");
        }
        assert!(conv.values().check_supermodular().is_ok());
    }

    #[test]
    fn truncation_is_identity_above_total_entropy() {
        let m = three_users();
        let game = GameSpec::new(&m, int(6)).unwrap();
        let trunc = dilworth_truncate(&game);
        assert_eq!(trunc.values(), &game.dual_function());
        assert_eq!(trunc.get(Subset::EMPTY), &int(0));
    }

    #[test]
    fn dual_below_threshold_fails_only_on_disjoint_pairs() {
        let m = three_users();
        let dual = GameSpec::new(&m, ratio(16, 5)).unwrap().dual_function();
        let w = dual.check_submodular().unwrap_err();
        assert!(w.x.is_disjoint(w.y));
        assert!(dual.check_intersecting_submodular().is_ok());
    }

    #[test]
    fn truncation_below_threshold_is_flagged() {
        let m = three_users();
        let trunc = dilworth_truncate(&GameSpec::new(&m, int(3)).unwrap());
        assert!(!trunc.core_nonempty());
        assert!(trunc.get(m.ground()) < &int(3));
        assert_eq!(
            trunc.require_nonempty(),
            Err(DilworthError::Inapplicable {
                alpha: int(3),
                r_co: ratio(7, 2)
            })
        );
    }

    #[test]
    fn truncation_is_idempotent() {
        let m = three_users();
        for alpha in [int(3), ratio(7, 2), int(4), int(7)] {
            let trunc = dilworth_truncate(&GameSpec::new(&m, alpha).unwrap());
            let (again, _) = truncate_set_function(trunc.values());
            assert_eq!(&again, trunc.values());
        }
    }

    #[test]
    fn cores_equal_three_users() {
        let m = three_users();
        let game = GameSpec::new(&m, int(4)).unwrap();
        let trunc = dilworth_truncate(&game);
        let samples = [rv(&[2, 1, 1]), rv(&[3, 1, 0]), rv(&[4, 0, 0])];
        for r in &samples[..2] {
            assert!(game.dual_membership_equivalent(r).unwrap().is_member());
            assert!(trunc.membership(r).unwrap().is_member());
        }
        assert!(!game.dual_membership_equivalent(&samples[2]).unwrap().is_member());
        assert!(!trunc.membership(&samples[2]).unwrap().is_member());
        let report = cores_equal(&game, &trunc, &samples).unwrap();
        assert!(report.equal());
        assert_eq!(report.vertices_checked, 6);

        let low = GameSpec::new(&m, int(3)).unwrap();
        assert!(matches!(
            cores_equal(&low, &dilworth_truncate(&low), &samples),
            Err(DilworthError::Inapplicable { .. })
        ));
    }

    #[test]
    fn greedy_point_prefix_marginals() {
        let m = three_users();
        let trunc = dilworth_truncate(&GameSpec::new(&m, int(4)).unwrap());
        assert_eq!(greedy_point(trunc.values(), &[0, 1, 2]), vec![int(3), int(1), int(0)]);
        assert_eq!(greedy_point(trunc.values(), &[1, 0, 2])[1], trunc.get(s(&[2])).clone());
    }
}
