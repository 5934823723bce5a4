//! The coalitional game `G(V, α, f_α)` of a source model.
//!
//! `f_α(X) = H(Z_X | Z_{V∖X})` for proper coalitions and `f_α(V) = α`. Its
//! dual `f_α^#(X) = α − f_α(V∖X)` describes the same core through upper
//! bounds. All comparisons are exact.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::combinatorics::{enumerate_subsets, SetFunction, Subset};
use crate::entropy::SourceModel;
use crate::rational::{is_integral, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("sum-rate α must be nonnegative, got {0}")]
    NegativeAlpha(Rational),
    #[error("rate of user {index} is negative ({value})")]
    NegativeRate { index: usize, value: Rational },
    #[error("rate vector has {got} entries but the model has {expected} users")]
    Arity { expected: usize, got: usize },
}

/// Per-user nonnegative rates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RateVector(Vec<Rational>);

impl RateVector {
    pub fn new(rates: Vec<Rational>) -> Result<Self, GameError> {
        if let Some((index, value)) = rates.iter().enumerate().find(|(_, r)| r.is_negative()) {
            return Err(GameError::NegativeRate {
                index,
                value: value.clone(),
            });
        }
        Ok(RateVector(rates))
    }

    pub fn rates(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_rates(self) -> Vec<Rational> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `r(X) = Σ_{i ∈ X} r_i`.
    pub fn sum_over(&self, x: Subset) -> Rational {
        x.iter().fold(Rational::zero(), |acc, i| acc + &self.0[i])
    }

    pub fn total(&self) -> Rational {
        self.0.iter().fold(Rational::zero(), |acc, r| acc + r)
    }
}

impl std::ops::Index<usize> for RateVector {
    type Output = Rational;

    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

/// Outcome of a polyhedron membership test, with the first failing constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    Member,
    /// `r(V) ≠ α`.
    SumMismatch { expected: Rational, actual: Rational },
    /// Integer mode only: `r_i` is fractional.
    Fractional { index: usize },
    /// `r(X) < f_α(X)`.
    LowerBound { subset: Subset, bound: Rational, actual: Rational },
    /// `r(X) > g(X)` for an upper-bound form.
    UpperBound { subset: Subset, bound: Rational, actual: Rational },
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member)
    }
}

/// A source model together with a sum-rate `α ≥ 0`.
#[derive(Debug, Clone)]
pub struct GameSpec<'m> {
    model: &'m SourceModel,
    alpha: Rational,
}

impl<'m> GameSpec<'m> {
    pub fn new(model: &'m SourceModel, alpha: Rational) -> Result<Self, GameError> {
        if alpha.is_negative() {
            return Err(GameError::NegativeAlpha(alpha));
        }
        Ok(GameSpec { model, alpha })
    }

    pub fn model(&self) -> &'m SourceModel {
        self.model
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn num_users(&self) -> usize {
        self.model.num_users()
    }

    /// `f_α(X)`: `H(Z_X | Z_{V∖X})` for `X ⊂ V`, `α` for `X = V`.
    pub fn char_value(&self, x: Subset) -> Rational {
        let ground = self.model.ground();
        debug_assert!(x.is_subset_of(ground));
        if x == ground {
            self.alpha.clone()
        } else if x.is_empty() {
            Rational::zero()
        } else {
            self.model.total_entropy() - self.model.h(ground.difference(x))
        }
    }

    /// `f_α^#(X) = α − f_α(V∖X)`.
    pub fn dual_value(&self, x: Subset) -> Rational {
        let ground = self.model.ground();
        &self.alpha - self.char_value(ground.difference(x))
    }

    pub fn char_function(&self) -> SetFunction {
        SetFunction::from_fn(self.num_users(), |x| self.char_value(x))
    }

    pub fn dual_function(&self) -> SetFunction {
        SetFunction::from_fn(self.num_users(), |x| self.dual_value(x))
    }

    fn check_arity(&self, r: &RateVector) -> Result<(), GameError> {
        if r.len() != self.num_users() {
            return Err(GameError::Arity {
                expected: self.num_users(),
                got: r.len(),
            });
        }
        Ok(())
    }

    /// Core membership: `r(X) ≥ f_α(X)` for all `X ⊂ V` and `r(V) = α`.
    ///
    /// Checked in the order sum, integrality (when `integer_mode`), then the
    /// lower bounds in increasing subset order.
    pub fn in_core(&self, r: &RateVector, integer_mode: bool) -> Result<Membership, GameError> {
        self.check_arity(r)?;
        let total = r.total();
        if total != self.alpha {
            return Ok(Membership::SumMismatch {
                expected: self.alpha.clone(),
                actual: total,
            });
        }
        if integer_mode {
            if let Some(index) = r.rates().iter().position(|v| !is_integral(v)) {
                return Ok(Membership::Fractional { index });
            }
        }
        for x in enumerate_subsets(self.model.ground(), true, true) {
            let bound = self.char_value(x);
            let actual = r.sum_over(x);
            if actual < bound {
                return Ok(Membership::LowerBound {
                    subset: x,
                    bound,
                    actual,
                });
            }
        }
        Ok(Membership::Member)
    }

    /// The upper-bound form `r(X) ≤ f_α^#(X)` for all `X ⊆ V`, `r(V) = α`.
    pub fn dual_membership_equivalent(&self, r: &RateVector) -> Result<Membership, GameError> {
        upper_bound_membership(self.num_users(), |x| self.dual_value(x), r)
    }
}

/// Membership in `B(g, ≤) = {r : r(X) ≤ g(X) ∀X, r(V) = g(V)}`.
pub fn upper_bound_membership(
    n: usize,
    g: impl Fn(Subset) -> Rational,
    r: &RateVector,
) -> Result<Membership, GameError> {
    if r.len() != n {
        return Err(GameError::Arity {
            expected: n,
            got: r.len(),
        });
    }
    let ground = Subset::full(n);
    let expected = g(ground);
    let total = r.total();
    if total != expected {
        return Ok(Membership::SumMismatch {
            expected,
            actual: total,
        });
    }
    for x in enumerate_subsets(ground, true, true) {
        let bound = g(x);
        let actual = r.sum_over(x);
        if actual > bound {
            return Ok(Membership::UpperBound {
                subset: x,
                bound,
                actual,
            });
        }
    }
    Ok(Membership::Member)
}

/// Slepian–Wolf constraints `r(X) ≥ H(Z_X | Z_{V∖X})` for all `X ⊂ V`.
/// Returns the first violated coalition, if any.
pub fn satisfies_slepian_wolf(model: &SourceModel, r: &RateVector) -> Result<Option<Subset>, GameError> {
    if r.len() != model.num_users() {
        return Err(GameError::Arity {
            expected: model.num_users(),
            got: r.len(),
        });
    }
    let ground = model.ground();
    Ok(enumerate_subsets(ground, true, true).find(|&x| {
        let need = model.total_entropy() - model.h(ground.difference(x));
        r.sum_over(x) < need
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::fixtures::{three_users, packets};
    use crate::rational::{int, ratio};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn s(ids: &[usize]) -> Subset {
        Subset::from_indices(ids.iter().map(|i| i - 1))
    }

    fn rv(v: &[Rational]) -> RateVector {
        RateVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn char_values_three_users() {
        let m = three_users();
        let g = GameSpec::new(&m, int(4)).unwrap();
        assert_eq!(g.char_value(s(&[2, 3])), int(1));
        assert_eq!(g.char_value(s(&[1, 2, 3])), int(4));
        assert_eq!(g.char_value(s(&[1])), int(1));
        assert_eq!(g.char_value(s(&[1, 2])), int(3));
        assert_eq!(g.char_value(s(&[1, 3])), int(3));
        assert_eq!(g.char_value(s(&[2])), int(0));
        assert_eq!(g.char_value(Subset::EMPTY), int(0));
    }

    #[test]
    fn dual_values_three_users() {
        let m = three_users();
        let alpha = ratio(37, 10);
        let g = GameSpec::new(&m, alpha.clone()).unwrap();
        assert_eq!(g.dual_value(s(&[1])), &alpha - int(1));
        assert_eq!(g.dual_value(s(&[2])), &alpha - int(3));
        assert_eq!(g.dual_value(s(&[3])), &alpha - int(3));
        assert_eq!(g.dual_value(s(&[1, 2])), alpha.clone());
        assert_eq!(g.dual_value(s(&[2, 3])), &alpha - int(1));
        assert_eq!(g.dual_value(Subset::EMPTY), int(0));
        assert_eq!(g.dual_value(s(&[1, 2, 3])), alpha);
    }

    #[test]
    fn negative_inputs_rejected() {
        let m = three_users();
        assert!(matches!(GameSpec::new(&m, int(-1)), Err(GameError::NegativeAlpha(_))));
        assert!(matches!(
            RateVector::new(vec![int(1), int(-1)]),
            Err(GameError::NegativeRate { index: 1, .. })
        ));
    }

    #[test]
    fn slepian_wolf_three_users() {
        let m = three_users();
        let h = ratio(1, 2);
        assert_eq!(satisfies_slepian_wolf(&m, &rv(&[ratio(5, 2), h.clone(), h])).unwrap(), None);
        assert_eq!(
            satisfies_slepian_wolf(&m, &rv(&[int(0), int(0), int(0)])).unwrap(),
            Some(s(&[1]))
        );
        assert_eq!(satisfies_slepian_wolf(&m, &rv(&[int(3), int(1), int(0)])).unwrap(), None);
        assert!(satisfies_slepian_wolf(&m, &rv(&[int(3)])).is_err());
    }

    #[test]
    fn core_membership_three_users() {
        let m = three_users();
        let g35 = GameSpec::new(&m, ratio(7, 2)).unwrap();
        let h = ratio(1, 2);
        assert!(g35.in_core(&rv(&[ratio(5, 2), h.clone(), h.clone()]), false).unwrap().is_member());
        assert!(matches!(
            g35.in_core(&rv(&[ratio(5, 2), h, ratio(2, 5)]), false).unwrap(),
            Membership::SumMismatch { .. }
        ));
        let g4 = GameSpec::new(&m, int(4)).unwrap();
        assert!(g4.in_core(&rv(&[int(2), int(1), int(1)]), true).unwrap().is_member());
        assert_eq!(
            g4.in_core(&rv(&[ratio(5, 2), ratio(1, 2), int(1)]), true).unwrap(),
            Membership::Fractional { index: 0 }
        );
        assert!(matches!(g4.in_core(&rv(&[int(1)]), false), Err(GameError::Arity { .. })));
    }

    #[test]
    fn dual_membership_three_users() {
        let m = three_users();
        let g4 = GameSpec::new(&m, int(4)).unwrap();
        assert!(g4.dual_membership_equivalent(&rv(&[int(3), int(0), int(1)])).unwrap().is_member());
        assert_eq!(
            g4.dual_membership_equivalent(&rv(&[int(4), int(0), int(0)])).unwrap(),
            Membership::UpperBound {
                subset: s(&[1]),
                bound: int(3),
                actual: int(4)
            }
        );
    }

    #[test]
    fn symmetric_two_user_tight_point() {
        // disjoint single packets: f(1) = f(2) = 1, α = 2, r = (1,1) is tight everywhere
        let m = packets(&[&["a"], &["b"]]);
        let g = GameSpec::new(&m, int(2)).unwrap();
        let r = rv(&[int(1), int(1)]);
        for x in enumerate_subsets(m.ground(), false, false) {
            assert_eq!(r.sum_over(x), g.dual_value(x));
        }
        assert!(g.dual_membership_equivalent(&r).unwrap().is_member());
        assert!(g.in_core(&r, true).unwrap().is_member());
    }

    fn random_model(rng: &mut impl Rng) -> SourceModel {
        let n = rng.gen_range(2..=5);
        let holdings: Vec<Vec<String>> = (0..n)
            .map(|_| (0..8).filter(|_| rng.gen_bool(0.45)).map(|p| p.to_string()).collect())
            .collect();
        let refs: Vec<Vec<&str>> = holdings.iter().map(|h| h.iter().map(String::as_str).collect()).collect();
        let slices: Vec<&[&str]> = refs.iter().map(Vec::as_slice).collect();
        packets(&slices)
    }

    #[test]
    fn duality_and_slepian_wolf_on_random_models() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let m = random_model(&mut rng);
            let n = m.num_users();
            let alpha = int(rng.gen_range(0..=9));
            let g = GameSpec::new(&m, alpha.clone()).unwrap();
            for x in enumerate_subsets(m.ground(), false, false) {
                assert_eq!(g.dual_value(x) + g.char_value(m.ground().difference(x)), alpha);
            }
            for _ in 0..40 {
                // random composition of α into n quarter-steps
                let quarters: i64 = (alpha.numer().to_string().parse::<i64>().unwrap()) * 4;
                let mut left = quarters;
                let mut parts = Vec::new();
                for k in 0..n {
                    let take = if k + 1 == n { left } else { rng.gen_range(0..=left) };
                    left -= take;
                    parts.push(ratio(take, 4));
                }
                let r = RateVector::new(parts).unwrap();
                let core = g.in_core(&r, false).unwrap().is_member();
                assert_eq!(core, g.dual_membership_equivalent(&r).unwrap().is_member());
                if core {
                    assert_eq!(satisfies_slepian_wolf(&m, &r).unwrap(), None);
                }
            }
        }
    }

    fn entropy_pair_check(m: &SourceModel) {
        let h_total = m.total_entropy().clone();
        for alpha in [h_total.clone(), &h_total + int(1), &h_total - ratio(1, 3)] {
            if alpha.is_negative() {
                continue;
            }
            let dual = GameSpec::new(m, alpha.clone()).unwrap().dual_function();
            if alpha >= h_total {
                assert!(dual.check_submodular().is_ok());
            } else {
                assert!(dual.check_intersecting_submodular().is_ok());
            }
        }
    }

    proptest! {
        #[test]
        fn dual_function_intersecting_submodularity(
            holdings in (2usize..=5).prop_flat_map(|n| proptest::collection::vec(proptest::collection::btree_set(0u8..8, 0..=8), n))
        ) {
            let strs: Vec<Vec<String>> = holdings.iter().map(|h| h.iter().map(|p| p.to_string()).collect()).collect();
            let refs: Vec<Vec<&str>> = strs.iter().map(|h| h.iter().map(String::as_str).collect()).collect();
            let slices: Vec<&[&str]> = refs.iter().map(Vec::as_slice).collect();
            entropy_pair_check(&packets(&slices));
        }
    }
}
