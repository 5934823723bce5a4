//! Subsets, set partitions and exact minimization over partitions.
//!
//! A [`Subset`] is a bit-mask over user indices `0..n`. Set functions are
//! stored densely as tables indexed by the mask, see [`SetFunction`].

use std::cmp::Ordering;
use std::fmt;

use crate::rational::Rational;

/// Hard upper bound on the ground-set size representable by a [`Subset`].
pub const MAX_USERS: usize = 30;

/// A set of user indices, stored as a bit-mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Subset(u32);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub const fn from_bits(bits: u32) -> Self {
        Subset(bits)
    }

    /// The full ground set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_USERS, "ground set of {n} users exceeds {MAX_USERS}");
        Subset(((1u64 << n) - 1) as u32)
    }

    pub fn singleton(i: usize) -> Self {
        assert!(i < MAX_USERS);
        Subset(1 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        indices
            .into_iter()
            .fold(Subset::EMPTY, |acc, i| acc.with(i))
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        i < 32 && self.0 & (1 << i) != 0
    }

    pub fn with(self, i: usize) -> Self {
        Subset(self.0 | Subset::singleton(i).0)
    }

    pub fn without(self, i: usize) -> Self {
        Subset(self.0 & !Subset::singleton(i).0)
    }

    pub fn union(self, other: Subset) -> Self {
        Subset(self.0 | other.0)
    }

    pub fn intersection(self, other: Subset) -> Self {
        Subset(self.0 & other.0)
    }

    pub fn difference(self, other: Subset) -> Self {
        Subset(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Subset) -> bool {
        self.0 & other.0 == 0
    }

    /// Smallest element, if any.
    pub fn lowest(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let i = rest.trailing_zeros();
            rest &= rest - 1;
            Some(i as usize)
        })
    }

    /// Lexicographic comparison of the sorted element lists.
    pub fn cmp_elements(self, other: Subset) -> Ordering {
        self.iter().cmp(other.iter())
    }

    /// Human-facing form with one-based labels, e.g. `{1,3}`.
    pub fn display_one_based(self) -> String {
        let items: Vec<String> = self.iter().map(|i| (i + 1).to_string()).collect();
        format!("{{{}}}", items.join(","))
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

/// Iterator over the subsets of a ground set, in increasing mask order.
#[derive(Debug, Clone)]
pub struct Subsets {
    ground: u32,
    next: Option<u32>,
    skip_empty: bool,
    skip_full: bool,
}

impl Iterator for Subsets {
    type Item = Subset;

    fn next(&mut self) -> Option<Subset> {
        loop {
            let current = self.next?;
            self.next = if current == self.ground {
                None
            } else {
                Some(current.wrapping_sub(self.ground) & self.ground)
            };
            if (self.skip_empty && current == 0) || (self.skip_full && current == self.ground) {
                continue;
            }
            return Some(Subset(current));
        }
    }
}

/// Subsets of `ground`, optionally excluding `ground` itself and/or the empty set.
pub fn enumerate_subsets(ground: Subset, proper_only: bool, nonempty_only: bool) -> Subsets {
    Subsets {
        ground: ground.0,
        next: Some(0),
        skip_empty: nonempty_only,
        skip_full: proper_only,
    }
}

/// A partition of `ground` into disjoint nonempty blocks.
///
/// Blocks are kept sorted by their smallest element, so two partitions of the
/// same set are equal exactly when their block lists are equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    ground: Subset,
    blocks: Vec<Subset>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PartitionError {
    #[error("block {0} is empty")]
    EmptyBlock(usize),
    #[error("blocks {0} and {1} overlap")]
    Overlap(usize, usize),
}

impl Partition {
    pub fn new(mut blocks: Vec<Subset>) -> Result<Self, PartitionError> {
        let mut ground = Subset::EMPTY;
        for (k, b) in blocks.iter().enumerate() {
            if b.is_empty() {
                return Err(PartitionError::EmptyBlock(k));
            }
            if !ground.is_disjoint(*b) {
                let other = blocks[..k].iter().position(|c| !c.is_disjoint(*b)).unwrap_or(0);
                return Err(PartitionError::Overlap(other, k));
            }
            ground = ground.union(*b);
        }
        blocks.sort_by_key(|b| b.lowest());
        Ok(Partition { ground, blocks })
    }

    /// The one-block partition `{ground}` (no blocks when `ground` is empty).
    pub fn trivial(ground: Subset) -> Self {
        let blocks = if ground.is_empty() { vec![] } else { vec![ground] };
        Partition { ground, blocks }
    }

    /// All singletons of `ground`.
    pub fn singletons(ground: Subset) -> Self {
        Partition {
            ground,
            blocks: ground.iter().map(Subset::singleton).collect(),
        }
    }

    pub fn ground(&self) -> Subset {
        self.ground
    }

    pub fn blocks(&self) -> &[Subset] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Prepends a block whose smallest element is below every element of `self`.
    fn prepend(&self, block: Subset) -> Partition {
        debug_assert!(block.is_disjoint(self.ground));
        let mut blocks = Vec::with_capacity(self.blocks.len() + 1);
        blocks.push(block);
        blocks.extend_from_slice(&self.blocks);
        Partition {
            ground: self.ground.union(block),
            blocks,
        }
    }

    /// Canonical tie-break order: fewer blocks first, then lexicographically
    /// smallest block list.
    pub fn tie_break_cmp(&self, other: &Partition) -> Ordering {
        self.blocks.len().cmp(&other.blocks.len()).then_with(|| {
            for (a, b) in self.blocks.iter().zip(&other.blocks) {
                match a.cmp_elements(*b) {
                    Ordering::Equal => continue,
                    unequal => return unequal,
                }
            }
            Ordering::Equal
        })
    }

    pub fn display_one_based(&self) -> String {
        let blocks: Vec<String> = self.blocks.iter().map(|b| b.display_one_based()).collect();
        format!("{{{}}}", blocks.join(","))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, b) in self.blocks.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str("}")
    }
}

/// Iterator over all set partitions of a ground set, via restricted growth strings.
#[derive(Debug, Clone)]
pub struct Partitions {
    elements: Vec<usize>,
    // labels[k] is the block label of elements[k]; maxes[k] = max(labels[..=k])
    labels: Vec<usize>,
    maxes: Vec<usize>,
    done: bool,
    skip_trivial: bool,
}

impl Partitions {
    fn current(&self) -> Partition {
        let blocks = match self.maxes.last() {
            None => vec![],
            Some(&m) => {
                let mut blocks = vec![Subset::EMPTY; m + 1];
                for (&e, &l) in self.elements.iter().zip(&self.labels) {
                    blocks[l] = blocks[l].with(e);
                }
                blocks
            }
        };
        // restricted growth order already sorts blocks by smallest element
        Partition {
            ground: Subset::from_indices(self.elements.iter().copied()),
            blocks,
        }
    }

    fn advance(&mut self) {
        let n = self.elements.len();
        for k in (1..n).rev() {
            if self.labels[k] <= self.maxes[k - 1] {
                self.labels[k] += 1;
                self.maxes[k] = self.maxes[k - 1].max(self.labels[k]);
                for j in k + 1..n {
                    self.labels[j] = 0;
                    self.maxes[j] = self.maxes[k];
                }
                return;
            }
        }
        self.done = true;
    }
}

impl Iterator for Partitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        loop {
            if self.done {
                return None;
            }
            let p = self.current();
            self.advance();
            if self.skip_trivial && p.len() == 1 {
                continue;
            }
            return Some(p);
        }
    }
}

/// All partitions of `ground`; with `proper_only` the single-block partition
/// `{ground}` is skipped.
pub fn enumerate_partitions(ground: Subset, proper_only: bool) -> Partitions {
    let elements: Vec<usize> = ground.iter().collect();
    let n = elements.len();
    Partitions {
        elements,
        labels: vec![0; n],
        maxes: vec![0; n],
        done: false,
        skip_trivial: proper_only,
    }
}

/// Bell number `B(n)` via the Bell triangle.
pub fn bell_number(n: usize) -> u128 {
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for v in &row {
            let last = *next.last().unwrap();
            next.push(last + v);
        }
        row = next;
    }
    row[0]
}

/// A set function stored as a dense table over all `2^n` subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetFunction {
    n: usize,
    values: Vec<Rational>,
}

/// A pair `(X, Y)` at which a sub/supermodularity inequality fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairWitness {
    pub x: Subset,
    pub y: Subset,
}

impl SetFunction {
    pub fn from_fn(n: usize, f: impl FnMut(Subset) -> Rational) -> Self {
        let values = (0..1u32 << n).map(Subset).map(f).collect();
        SetFunction { n, values }
    }

    pub fn from_values(n: usize, values: Vec<Rational>) -> Self {
        assert_eq!(values.len(), 1 << n, "table must cover all subsets");
        SetFunction { n, values }
    }

    pub fn num_users(&self) -> usize {
        self.n
    }

    pub fn ground(&self) -> Subset {
        Subset::full(self.n)
    }

    pub fn get(&self, x: Subset) -> &Rational {
        &self.values[x.index()]
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn negated(&self) -> SetFunction {
        SetFunction {
            n: self.n,
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    fn scan_pairs(&self, only_intersecting: bool) -> Result<(), PairWitness> {
        let size = self.values.len();
        for x in 0..size {
            for y in x + 1..size {
                let (xs, ys) = (Subset(x as u32), Subset(y as u32));
                let meet = xs.intersection(ys);
                if only_intersecting && meet.is_empty() {
                    continue;
                }
                if xs.is_subset_of(ys) || ys.is_subset_of(xs) {
                    continue;
                }
                let lhs = self.get(xs) + self.get(ys);
                let rhs = self.get(xs.union(ys)) + self.get(meet);
                if lhs < rhs {
                    return Err(PairWitness { x: xs, y: ys });
                }
            }
        }
        Ok(())
    }

    /// `g(X) + g(Y) >= g(X ∪ Y) + g(X ∩ Y)` for every pair, by exhaustive scan.
    pub fn check_submodular(&self) -> Result<(), PairWitness> {
        self.scan_pairs(false)
    }

    /// The submodular inequality restricted to pairs with `X ∩ Y ≠ ∅`.
    pub fn check_intersecting_submodular(&self) -> Result<(), PairWitness> {
        self.scan_pairs(true)
    }

    pub fn check_supermodular(&self) -> Result<(), PairWitness> {
        self.negated().check_submodular()
    }
}

/// Result of minimizing a block-additive cost over the partitions of a set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionMin {
    pub value: Rational,
    pub argmin: Partition,
}

/// Minimum of `Σ_{C ∈ P} cost(C)` over every partition `P` of every subset
/// of `ground`, computed by one subset DP.
///
/// `g(∅) = 0`, `g(X) = min_{S ⊆ X, lowest(X) ∈ S} cost(S) + g(X \ S)`. Ties go
/// to fewer blocks, then the lexicographically smallest block list. The
/// returned vector is indexed by the subset mask; masks outside `ground` hold
/// `None`.
pub fn min_partition_sums(
    ground: Subset,
    mut cost: impl FnMut(Subset) -> Rational,
) -> Vec<Option<PartitionMin>> {
    let size = (ground.0 as usize) + 1;
    let mut costs: Vec<Option<Rational>> = vec![None; size];
    for s in enumerate_subsets(ground, false, true) {
        costs[s.index()] = Some(cost(s));
    }
    let mut table: Vec<Option<PartitionMin>> = vec![None; size];
    table[0] = Some(PartitionMin {
        value: Rational::from_integer(0.into()),
        argmin: Partition::trivial(Subset::EMPTY),
    });
    // every proper subset of X has a smaller mask, so increasing order is a topological order
    for x in enumerate_subsets(ground, false, true) {
        let low = x.lowest().expect("nonempty");
        let rest_of_x = x.without(low);
        let mut best: Option<PartitionMin> = None;
        for extra in enumerate_subsets(rest_of_x, false, false) {
            let block = extra.with(low);
            let remainder = x.difference(block);
            let sub = table[remainder.index()].as_ref().expect("computed earlier");
            let value = costs[block.index()].as_ref().expect("cost cached") + &sub.value;
            let better = match &best {
                None => true,
                Some(b) => match value.cmp(&b.value) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => {
                        sub.argmin.prepend_cmp(block, &b.argmin) == Ordering::Less
                    }
                },
            };
            if better {
                best = Some(PartitionMin {
                    value,
                    argmin: sub.argmin.prepend(block),
                });
            }
        }
        table[x.index()] = best;
    }
    table
}

impl Partition {
    /// Compares `{block} ∪ self` against `other` in tie-break order without
    /// building the combined partition.
    fn prepend_cmp(&self, block: Subset, other: &Partition) -> Ordering {
        (self.blocks.len() + 1).cmp(&other.blocks.len()).then_with(|| {
            std::iter::once(&block)
                .chain(&self.blocks)
                .zip(&other.blocks)
                .map(|(a, b)| a.cmp_elements(*b))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
    }
}

/// Minimum of `Σ_{C ∈ P} cost(C)` over all partitions `P` of `ground`, with
/// one minimizer (see [`min_partition_sums`] for the tie-break).
pub fn min_partition_sum(ground: Subset, cost: impl FnMut(Subset) -> Rational) -> PartitionMin {
    min_partition_sums(ground, cost)
        .swap_remove(ground.index())
        .expect("ground is always solved")
}

/// Evaluates `Σ_{C ∈ P} cost(C)`.
pub fn partition_sum(partition: &Partition, mut cost: impl FnMut(Subset) -> Rational) -> Rational {
    partition
        .blocks()
        .iter()
        .fold(Rational::from_integer(0.into()), |acc, &b| acc + cost(b))
}
