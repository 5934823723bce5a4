//! Core nonemptiness and the minimum sum-rate for omniscience.
//!
//! The core of `G(V, α, f_α)` is nonempty iff `α` equals the minimum of
//! `Σ_{C ∈ P} f_α^#(C)` over all partitions `P` of `V`. The smallest such `α`
//! is `R_CO = max_{P ∈ Π′(V)} Σ_{C ∈ P} H(Z_{V∖C} | Z_C) / (|P| − 1)`, with a
//! ceiling for the integer-rate model. Partition scans here are exhaustive.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::combinatorics::{
    enumerate_partitions, min_partition_sum, PairWitness, Partition, SetFunction, Subset,
};
use crate::entropy::SourceModel;
use crate::game::GameSpec;
use crate::rational::{ceil, floor, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Asymptotic,
    NonAsymptotic,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Asymptotic => "asymptotic",
            ModelKind::NonAsymptotic => "non-asymptotic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumRateReport {
    pub model_kind: ModelKind,
    pub r_co: Rational,
    /// Maximizer of the partition expression for `R_CO`.
    pub argmax_partition: Partition,
    pub mmi: Rational,
    pub mmi_partition: Partition,
    pub h_total: Rational,
    /// False when the non-asymptotic formula was applied to a model whose
    /// entropies are not all integers.
    pub integral_model: bool,
}

/// Scans `Π′(V)` for the best value of `score`, keeping ties in canonical
/// order (fewer blocks, then lexicographically smallest).
fn scan_proper_partitions(
    ground: Subset,
    better: Ordering,
    mut score: impl FnMut(&Partition) -> Rational,
) -> (Rational, Partition) {
    let mut best: Option<(Rational, Partition)> = None;
    for p in enumerate_partitions(ground, true) {
        let value = score(&p);
        let replace = match &best {
            None => true,
            Some((v, q)) => {
                let c = value.cmp(v);
                c == better || (c == Ordering::Equal && p.tie_break_cmp(q) == Ordering::Less)
            }
        };
        if replace {
            best = Some((value, p));
        }
    }
    best.expect("|V| >= 2 has a proper partition")
}

/// `Σ_{C ∈ P} H(Z_{V∖C} | Z_C) / (|P| − 1)` for a proper partition `P`.
pub fn partition_rate(model: &SourceModel, partition: &Partition) -> Rational {
    let h_total = model.total_entropy();
    let sum = partition
        .blocks()
        .iter()
        .fold(Rational::zero(), |acc, &c| acc + (h_total - model.h(c)));
    sum / Rational::from_integer(BigInt::from(partition.len() - 1))
}

/// `(Σ_{C ∈ P} H(Z_C) − H(Z_V)) / (|P| − 1)`.
pub fn partition_divergence_rate(model: &SourceModel, partition: &Partition) -> Rational {
    let sum = partition
        .blocks()
        .iter()
        .fold(Rational::zero(), |acc, &c| acc + model.h(c));
    (sum - model.total_entropy()) / Rational::from_integer(BigInt::from(partition.len() - 1))
}

/// Multivariate mutual information, minimized over `Π′(V)`, with its minimizer.
pub fn mmi(model: &SourceModel) -> (Rational, Partition) {
    scan_proper_partitions(model.ground(), Ordering::Less, |p| {
        partition_divergence_rate(model, p)
    })
}

fn report(model: &SourceModel, kind: ModelKind) -> SumRateReport {
    let (value, argmax) = scan_proper_partitions(model.ground(), Ordering::Greater, |p| {
        partition_rate(model, p)
    });
    let (mmi, mmi_partition) = mmi(model);
    let r_co = match kind {
        ModelKind::Asymptotic => value,
        ModelKind::NonAsymptotic => ceil(&value),
    };
    SumRateReport {
        model_kind: kind,
        r_co,
        argmax_partition: argmax,
        mmi,
        mmi_partition,
        h_total: model.total_entropy().clone(),
        integral_model: model.is_integral(),
    }
}

pub fn min_sum_rate_asymptotic(model: &SourceModel) -> SumRateReport {
    report(model, ModelKind::Asymptotic)
}

/// Ceiling of the asymptotic expression. For integral models this equals
/// `H(Z_V) − ⌊I(Z_V)⌋`.
pub fn min_sum_rate_non_asymptotic(model: &SourceModel) -> SumRateReport {
    report(model, ModelKind::NonAsymptotic)
}

pub fn min_sum_rate(model: &SourceModel, kind: ModelKind) -> SumRateReport {
    report(model, kind)
}

impl SumRateReport {
    /// `H(Z_V) − I(Z_V)`, or `H(Z_V) − ⌊I(Z_V)⌋` in the non-asymptotic case.
    pub fn mmi_identity_value(&self) -> Rational {
        match self.model_kind {
            ModelKind::Asymptotic => &self.h_total - &self.mmi,
            ModelKind::NonAsymptotic => &self.h_total - floor(&self.mmi),
        }
    }
}

/// Certificate for the partition condition on `g(ground)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonemptinessCertificate {
    pub nonempty: bool,
    pub ground_value: Rational,
    pub partition_min: Rational,
    pub partition: Partition,
}

fn partition_condition(ground: Subset, g: impl Fn(Subset) -> Rational) -> NonemptinessCertificate {
    let ground_value = g(ground);
    let best = min_partition_sum(ground, &g);
    NonemptinessCertificate {
        nonempty: best.value == ground_value,
        ground_value,
        partition_min: best.value,
        partition: best.argmin,
    }
}

/// Core nonemptiness of `G(V, α, f_α)`: `α = min_{P ∈ Π(V)} Σ_{C ∈ P} f_α^#(C)`.
pub fn core_nonempty(game: &GameSpec<'_>) -> NonemptinessCertificate {
    partition_condition(game.model().ground(), |x| game.dual_value(x))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectingDecision {
    pub certificate: NonemptinessCertificate,
    /// Set when `g(∅) ≠ 0`.
    pub not_normalized: bool,
    /// First intersecting pair violating submodularity, if any; the decision is
    /// only meaningful when this is `None`.
    pub intersecting_violation: Option<PairWitness>,
}

impl IntersectingDecision {
    pub fn nonempty(&self) -> bool {
        self.certificate.nonempty
    }
}

/// Nonemptiness of `B(g, ≤)` for an intersecting submodular `g` with
/// `g(∅) = 0`: true iff `g(ground)` equals the partition minimum. The
/// hypotheses are checked by exhaustive scan and reported.
pub fn intersecting_nonempty(g: impl Fn(Subset) -> Rational, ground: Subset) -> IntersectingDecision {
    let certificate = partition_condition(ground, &g);
    let n = ground.iter().count();
    let elements: Vec<usize> = ground.iter().collect();
    // reindex onto 0..n so the dense table covers exactly the ground set
    let lift = |local: Subset| Subset::from_indices(local.iter().map(|k| elements[k]));
    let table = SetFunction::from_fn(n, |local| g(lift(local)));
    let intersecting_violation = table
        .check_intersecting_submodular()
        .err()
        .map(|w| PairWitness {
            x: lift(w.x),
            y: lift(w.y),
        });
    IntersectingDecision {
        certificate,
        not_normalized: !g(Subset::EMPTY).is_zero(),
        intersecting_violation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::fixtures::{three_users, packets};
    use crate::rational::{int, ratio};

    #[test]
    fn three_users_min_sum_rates() {
        let m = three_users();
        let asym = min_sum_rate_asymptotic(&m);
        assert_eq!(asym.r_co, ratio(7, 2));
        assert_eq!(asym.h_total, int(6));
        assert_eq!(asym.argmax_partition, Partition::singletons(m.ground()));
        assert_eq!(min_sum_rate_non_asymptotic(&m).r_co, int(4));
    }

    #[test]
    fn two_user_min_sum_rates() {
        let same = packets(&[&["a"], &["a"]]);
        assert_eq!(min_sum_rate_asymptotic(&same).r_co, int(0));
        let disjoint = packets(&[&["a"], &["b"]]);
        // only proper partition {{1},{2}}: (1 + 1) / 1
        assert_eq!(min_sum_rate_asymptotic(&disjoint).r_co, int(2));
        assert_eq!(min_sum_rate_non_asymptotic(&disjoint).r_co, int(2));
        let three_same = packets(&[&["a"], &["a"], &["a"]]);
        assert_eq!(min_sum_rate_non_asymptotic(&three_same).r_co, int(0));
    }

    #[test]
    fn mmi_values() {
        // brute force over the four proper partitions of the three-user model:
        // {1}{2}{3}: (5+3+3-6)/2 = 5/2; {1}{23}: 5+5-6 = 4; {2}{13}: 3+6-6 = 3; {3}{12}: 3
        let m = three_users();
        let (value, p) = mmi(&m);
        assert_eq!(value, ratio(5, 2));
        assert_eq!(p, Partition::singletons(m.ground()));
        assert_eq!(value, m.total_entropy() - ratio(7, 2));
        assert_eq!(mmi(&packets(&[&["a"], &["b"]])).0, int(0));
        assert_eq!(mmi(&packets(&[&["a"], &["a"]])).0, int(1));
    }

    #[test]
    fn core_nonemptiness_three_users() {
        let m = three_users();
        let at = |a: Rational| core_nonempty(&GameSpec::new(&m, a).unwrap()).nonempty;
        assert!(!at(ratio(16, 5)));
        assert!(at(ratio(7, 2)));
        assert!(at(int(6)));
        assert!(!at(int(3)));
        assert!(at(int(4)));
        let cert = core_nonempty(&GameSpec::new(&m, ratio(16, 5)).unwrap());
        // f^#(i) sums to 3α − 7 < α below 7/2
        assert_eq!(cert.partition, Partition::singletons(m.ground()));
        assert_eq!(cert.partition_min, ratio(48, 5) - int(7));
    }

    #[test]
    fn intersecting_examples() {
        let m = three_users();
        let g35 = GameSpec::new(&m, ratio(7, 2)).unwrap();
        let d = intersecting_nonempty(|x| g35.dual_value(x), m.ground());
        assert!(d.nonempty());
        assert_eq!(d.intersecting_violation, None);
        assert!(!d.not_normalized);
        let g32 = GameSpec::new(&m, ratio(16, 5)).unwrap();
        assert!(!intersecting_nonempty(|x| g32.dual_value(x), m.ground()).nonempty());

        let weights = [ratio(3, 2), int(-2), int(5), int(0)];
        let modular = |x: Subset| x.iter().fold(Rational::zero(), |acc, i| acc + &weights[i]);
        let d = intersecting_nonempty(modular, Subset::full(4));
        assert!(d.nonempty());
        assert_eq!(d.intersecting_violation, None);
    }

    #[test]
    fn intersecting_reports_hypothesis_violations() {
        // |X|^2 is not intersecting submodular on three elements
        let d = intersecting_nonempty(|x| int((x.len() * x.len()) as i64), Subset::full(3));
        assert!(d.intersecting_violation.is_some());
        let shifted = intersecting_nonempty(|x| int(x.len() as i64 + 1), Subset::from_indices([1, 3]));
        assert!(shifted.not_normalized);
    }
}
