//! Rate allocations in the core: the Shapley value, greedy vertices, the
//! integer points of the core, and Jain's fairness index.

use std::cmp::Ordering;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::combinatorics::{enumerate_subsets, Subset};
use crate::dilworth::{dilworth_truncate, greedy_point, DilworthError, TruncatedDual};
use crate::game::{GameError, GameSpec, RateVector};
use crate::rational::{factorial, is_integral, Rational};

/// Largest `|V|` for which every join order is enumerated.
pub const FULL_VERTEX_LIMIT: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AllocationError {
    #[error("the core is empty for α = {alpha}; the minimum sum-rate is {r_co}")]
    CoreEmpty { alpha: Rational, r_co: Rational },
    #[error("integer enumeration needs an integer α, got {0}")]
    FractionalAlpha(Rational),
    #[error("integer enumeration needs an integer-valued dual function; f^#({subset}) = {value}")]
    FractionalDual { subset: String, value: Rational },
    #[error("join order must be a permutation of 0..{0}")]
    BadOrder(usize),
    #[error("Jain's index is undefined for the all-zero vector")]
    AllZero,
    #[error(transparent)]
    Game(#[from] GameError),
}

impl From<DilworthError> for AllocationError {
    fn from(e: DilworthError) -> Self {
        match e {
            DilworthError::Inapplicable { alpha, r_co } => AllocationError::CoreEmpty { alpha, r_co },
            DilworthError::Game(g) => AllocationError::Game(g),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Shapley,
    Greedy,
    Enumerated,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Shapley => "shapley",
            Method::Greedy => "greedy",
            Method::Enumerated => "enumerated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    pub rates: RateVector,
    pub method: Method,
    pub order: Option<Vec<usize>>,
    /// `None` for the all-zero vector.
    pub jain_index: Option<Rational>,
}

impl Allocation {
    pub fn new(rates: RateVector, method: Method, order: Option<Vec<usize>>) -> Self {
        let jain_index = jain_index(&rates).ok();
        Allocation {
            rates,
            method,
            order,
            jain_index,
        }
    }
}

/// Shapley value of the convex game, from the marginals of `f̂_α^#`:
/// `r̂_i = Σ_{X ⊆ V∖{i}} (|V∖X|−1)! |X|! / |V|! · (f̂(X ∪ {i}) − f̂(X))`.
pub fn shapley(trunc: &TruncatedDual) -> Result<Allocation, AllocationError> {
    trunc.require_nonempty()?;
    let n = trunc.num_users();
    let ground = Subset::full(n);
    let total = Rational::from_integer(factorial(n));
    let weights: Vec<Rational> = (0..n)
        .map(|size| Rational::from_integer(factorial(n - size - 1) * factorial(size)) / &total)
        .collect();
    let rates: Vec<Rational> = (0..n)
        .into_par_iter()
        .map(|i| {
            enumerate_subsets(ground.without(i), false, false).fold(Rational::zero(), |acc, x| {
                acc + &weights[x.len()] * (trunc.get(x.with(i)) - trunc.get(x))
            })
        })
        .collect();
    Ok(Allocation::new(RateVector::new(rates)?, Method::Shapley, None))
}

fn check_order(order: &[usize], n: usize) -> Result<(), AllocationError> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(AllocationError::BadOrder(n));
    }
    for &u in order {
        if u >= n || std::mem::replace(&mut seen[u], true) {
            return Err(AllocationError::BadOrder(n));
        }
    }
    Ok(())
}

/// The core vertex produced by Edmonds' greedy algorithm for a join order
/// (zero-based user indices).
pub fn greedy_vertex(trunc: &TruncatedDual, order: &[usize]) -> Result<Allocation, AllocationError> {
    trunc.require_nonempty()?;
    check_order(order, trunc.num_users())?;
    let rates = RateVector::new(greedy_point(trunc.values(), order))?;
    Ok(Allocation::new(rates, Method::Greedy, Some(order.to_vec())))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    /// Distinct vertices, each with the first join order that produced it.
    pub vertices: Vec<Allocation>,
    /// True when only sampled join orders were used.
    pub partial: bool,
    pub orders_tried: usize,
}

/// Greedy vertices over all `|V|!` join orders for `|V| ≤ 8`; beyond that,
/// `samples` random orders drawn from `rng`, flagged as partial.
pub fn greedy_vertices<R: Rng>(
    trunc: &TruncatedDual,
    samples: usize,
    rng: &mut R,
) -> Result<VertexSet, AllocationError> {
    trunc.require_nonempty()?;
    let n = trunc.num_users();
    let (orders, partial): (Vec<Vec<usize>>, bool) = if n <= FULL_VERTEX_LIMIT {
        ((0..n).permutations(n).collect(), false)
    } else {
        let mut base: Vec<usize> = (0..n).collect();
        let orders = (0..samples)
            .map(|_| {
                base.shuffle(rng);
                base.clone()
            })
            .collect();
        (orders, true)
    };
    let points: Vec<Vec<Rational>> = orders
        .par_iter()
        .map(|order| greedy_point(trunc.values(), order))
        .collect();
    let mut vertices: Vec<Allocation> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (order, point) in orders.iter().zip(points) {
        let rates = RateVector::new(point)?;
        if seen.insert(rates.clone()) {
            vertices.push(Allocation::new(rates, Method::Greedy, Some(order.clone())));
        }
    }
    Ok(VertexSet {
        vertices,
        partial,
        orders_tried: orders.len(),
    })
}

/// Integer points of the core for integer `α` and an integer-valued dual:
/// every `r` with `0 ≤ r_i ≤ f̂_α^#({i})`, `r(V) = α` that passes the core test,
/// in lexicographic order.
pub fn enumerate_integer_core(game: &GameSpec<'_>) -> Result<Vec<RateVector>, AllocationError> {
    let alpha = game.alpha();
    if !is_integral(alpha) {
        return Err(AllocationError::FractionalAlpha(alpha.clone()));
    }
    let model = game.model();
    for x in enumerate_subsets(model.ground(), false, false) {
        let value = game.dual_value(x);
        if !is_integral(&value) {
            return Err(AllocationError::FractionalDual {
                subset: model.label(x),
                value,
            });
        }
    }
    let trunc = dilworth_truncate(game);
    let n = game.num_users();
    let to_i64 = |v: &Rational| v.to_integer().to_i64().expect("desk-scale rates fit in i64");
    let upper: Vec<i64> = (0..n)
        .map(|i| to_i64(trunc.get(Subset::singleton(i))).max(-1))
        .collect();
    let target = to_i64(alpha);
    let mut found = Vec::new();
    let mut current = vec![0i64; n];
    enumerate_box(&upper, target, 0, &mut current, &mut |point| {
        let r = RateVector::new(point.iter().map(|&v| Rational::from_integer(BigInt::from(v))).collect())
            .expect("nonnegative by construction");
        if game.in_core(&r, true).map(|m| m.is_member()).unwrap_or(false) {
            found.push(r);
        }
    });
    Ok(found)
}

fn enumerate_box(
    upper: &[i64],
    remaining: i64,
    k: usize,
    current: &mut [i64],
    visit: &mut impl FnMut(&[i64]),
) {
    if k + 1 == upper.len() {
        if (0..=upper[k]).contains(&remaining) {
            current[k] = remaining;
            visit(current);
        }
        return;
    }
    let tail_capacity: i64 = upper[k + 1..].iter().map(|u| u.max(&0)).sum();
    let low = (remaining - tail_capacity).max(0);
    for v in low..=upper[k].min(remaining) {
        current[k] = v;
        enumerate_box(upper, remaining - v, k + 1, current, visit);
    }
}

/// Jain's index `(Σ r_i)² / (|V| · Σ r_i²)`.
pub fn jain_index(r: &RateVector) -> Result<Rational, AllocationError> {
    let sum = r.total();
    let squares = r.rates().iter().fold(Rational::zero(), |acc, v| acc + v * v);
    if squares.is_zero() {
        return Err(AllocationError::AllZero);
    }
    debug_assert!(!squares.is_negative());
    let n = Rational::from_integer(BigInt::from(r.len()));
    Ok(&sum * &sum / (n * squares))
}

/// Candidates sorted by Jain's index (highest first), ties broken by the
/// lexicographic order of the rates; otherwise equal candidates keep their
/// input order.
pub fn fairness_compare(candidates: &[Allocation]) -> Vec<Allocation> {
    let mut ranked = candidates.to_vec();
    ranked.sort_by(|a, b| match (&a.jain_index, &b.jain_index) {
        (Some(x), Some(y)) => y.cmp(x).then_with(|| a.rates.cmp(&b.rates)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.rates.cmp(&b.rates),
    });
    ranked
}
