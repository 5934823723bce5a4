//! Source models: the entropy function `H(Z_X)` for every coalition `X`.
//!
//! Two representations are supported. A [`PacketModel`] gives each user a set
//! of opaque packet ids and `H(X)` is the size of the packet union. An
//! [`EntropyTable`] lists `H(X)` directly as exact rationals and must pass
//! [`validate_polymatroid`] before it can back a [`SourceModel`].

use std::collections::{BTreeSet, HashMap};

use num_traits::Zero;
use thiserror::Error;

use crate::combinatorics::{enumerate_subsets, SetFunction, Subset, MAX_USERS};
use crate::rational::{is_integral, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("a source model needs at least two users, got {0}")]
    TooFewUsers(usize),
    #[error("{0} users exceed the supported maximum of {1}")]
    TooManyUsers(usize, usize),
    #[error("duplicate user id {0:?}")]
    DuplicateUser(String),
    #[error("unknown user id {0:?}")]
    UnknownUser(String),
    #[error("subset {0} mentions users outside the ground set")]
    SubsetOutOfRange(Subset),
    #[error("no entropy entry for subset {0}")]
    MissingEntry(String),
    #[error("duplicate entropy entry for subset {0}")]
    DuplicateEntry(String),
    #[error("entropy table is not a polymatroid: {0}")]
    NotPolymatroid(String),
}

/// Users holding sets of packets; entropy counts distinct packets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketModel {
    users: Vec<String>,
    packets: Vec<BTreeSet<String>>,
}

impl PacketModel {
    pub fn new<U, P, S>(holdings: impl IntoIterator<Item = (U, P)>) -> Result<Self, ModelError>
    where
        U: Into<String>,
        P: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut users = Vec::new();
        let mut packets = Vec::new();
        for (user, held) in holdings {
            let user = user.into();
            if users.contains(&user) {
                return Err(ModelError::DuplicateUser(user));
            }
            users.push(user);
            packets.push(held.into_iter().map(Into::into).collect());
        }
        Ok(PacketModel { users, packets })
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn packets(&self, user: usize) -> &BTreeSet<String> {
        &self.packets[user]
    }

    /// `|∪_{i ∈ X} packets(i)|`.
    pub fn union_size(&self, x: Subset) -> usize {
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for i in x.iter() {
            seen.extend(self.packets[i].iter().map(String::as_str));
        }
        seen.len()
    }

    fn table(&self) -> SetFunction {
        SetFunction::from_fn(self.users.len(), |x| {
            Rational::from_integer(self.union_size(x).into())
        })
    }
}

/// Explicit entropy values for all `2^|V|` subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntropyTable {
    users: Vec<String>,
    values: SetFunction,
}

impl EntropyTable {
    /// Builds a table from `(subset, H)` entries. The empty set defaults to 0
    /// when omitted; every other subset must appear exactly once.
    pub fn from_entries<U, I>(
        users: Vec<U>,
        entries: impl IntoIterator<Item = (I, Rational)>,
    ) -> Result<Self, ModelError>
    where
        U: Into<String>,
        I: IntoIterator,
        I::Item: AsRef<str>,
    {
        let users: Vec<String> = users.into_iter().map(Into::into).collect();
        check_user_list(&users)?;
        let index: HashMap<&str, usize> = users
            .iter()
            .enumerate()
            .map(|(k, u)| (u.as_str(), k))
            .collect();
        let n = users.len();
        let mut values: Vec<Option<Rational>> = vec![None; 1 << n];
        for (set, h) in entries {
            let mut subset = Subset::EMPTY;
            for id in set {
                let id = id.as_ref();
                let k = *index
                    .get(id)
                    .ok_or_else(|| ModelError::UnknownUser(id.to_owned()))?;
                subset = subset.with(k);
            }
            let slot = &mut values[subset.index()];
            if slot.is_some() {
                return Err(ModelError::DuplicateEntry(label(&users, subset)));
            }
            *slot = Some(h);
        }
        if values[0].is_none() {
            values[0] = Some(Rational::zero());
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(mask, v)| {
                v.ok_or_else(|| ModelError::MissingEntry(label(&users, Subset::from_bits(mask as u32))))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(EntropyTable {
            users,
            values: SetFunction::from_values(n, values),
        })
    }

    pub fn from_set_function(users: Vec<String>, values: SetFunction) -> Result<Self, ModelError> {
        check_user_list(&users)?;
        assert_eq!(users.len(), values.num_users());
        Ok(EntropyTable { users, values })
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn values(&self) -> &SetFunction {
        &self.values
    }

    pub fn get(&self, x: Subset) -> &Rational {
        self.values.get(x)
    }
}

fn check_user_list(users: &[String]) -> Result<(), ModelError> {
    if users.len() > MAX_USERS {
        return Err(ModelError::TooManyUsers(users.len(), MAX_USERS));
    }
    let mut seen = BTreeSet::new();
    for u in users {
        if !seen.insert(u.as_str()) {
            return Err(ModelError::DuplicateUser(u.clone()));
        }
    }
    Ok(())
}

fn label(users: &[String], x: Subset) -> String {
    let names: Vec<&str> = x.iter().map(|i| users[i].as_str()).collect();
    format!("{{{}}}", names.join(","))
}

/// One failed polymatroid axiom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `H(∅) ≠ 0`.
    Normalization { value: Rational },
    /// `H(smaller) > H(larger)` with `larger = smaller ∪ {i}`.
    Monotonicity { smaller: Subset, larger: Subset },
    /// `H(X) + H(Y) < H(X ∪ Y) + H(X ∩ Y)`.
    Submodularity { x: Subset, y: Subset },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks normalization, monotonicity and submodularity of an entropy table.
///
/// Monotonicity and submodularity are checked on their elementary forms
/// (`X ⊂ X+i`, and the pairs `X+i`, `X+j` over a common `X`), which together
/// are equivalent to the full pairwise axioms; every failing elementary
/// instance is reported.
pub fn validate_polymatroid(table: &EntropyTable) -> ValidationReport {
    validate_set_function(table.values())
}

pub fn validate_set_function(h: &SetFunction) -> ValidationReport {
    let n = h.num_users();
    let ground = h.ground();
    let mut violations = Vec::new();
    if !h.get(Subset::EMPTY).is_zero() {
        violations.push(Violation::Normalization {
            value: h.get(Subset::EMPTY).clone(),
        });
    }
    for x in enumerate_subsets(ground, false, false) {
        for i in (0..n).filter(|&i| !x.contains(i)) {
            if h.get(x) > h.get(x.with(i)) {
                violations.push(Violation::Monotonicity {
                    smaller: x,
                    larger: x.with(i),
                });
            }
        }
    }
    for x in enumerate_subsets(ground, false, false) {
        for i in (0..n).filter(|&i| !x.contains(i)) {
            for j in (i + 1..n).filter(|&j| !x.contains(j)) {
                let (a, b) = (x.with(i), x.with(j));
                if h.get(a) + h.get(b) < h.get(a.union(b)) + h.get(x) {
                    violations.push(Violation::Submodularity { x: a, y: b });
                }
            }
        }
    }
    ValidationReport { violations }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceKind {
    Packets(PacketModel),
    Table(EntropyTable),
}

/// An immutable, validated entropy oracle over `|V| ≥ 2` users.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceModel {
    kind: SourceKind,
    users: Vec<String>,
    entropy: SetFunction,
}

impl SourceModel {
    pub fn from_packets(model: PacketModel) -> Result<Self, ModelError> {
        check_user_list(model.users())?;
        check_arity(model.users().len())?;
        let entropy = model.table();
        Ok(SourceModel {
            users: model.users().to_vec(),
            kind: SourceKind::Packets(model),
            entropy,
        })
    }

    /// Accepts a table only if it passes [`validate_polymatroid`].
    pub fn from_table(table: EntropyTable) -> Result<Self, ModelError> {
        check_arity(table.users().len())?;
        let report = validate_polymatroid(&table);
        if let Some(first) = report.violations.first() {
            let users = table.users();
            let msg = match first {
                Violation::Normalization { value } => format!("H(∅) = {value}, expected 0"),
                Violation::Monotonicity { smaller, larger } => {
                    format!("H({}) > H({})", label(users, *smaller), label(users, *larger))
                }
                Violation::Submodularity { x, y } => format!(
                    "submodularity fails at X = {}, Y = {}",
                    label(users, *x),
                    label(users, *y)
                ),
            };
            return Err(ModelError::NotPolymatroid(format!(
                "{msg} ({} violation(s) in total)",
                report.violations.len()
            )));
        }
        Ok(SourceModel {
            users: table.users().to_vec(),
            entropy: table.values().clone(),
            kind: SourceKind::Table(table),
        })
    }

    pub fn kind(&self) -> &SourceKind {
        &self.kind
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn ground(&self) -> Subset {
        Subset::full(self.users.len())
    }

    /// Maps user ids to a subset.
    pub fn subset_of<S: AsRef<str>>(&self, ids: &[S]) -> Result<Subset, ModelError> {
        ids.iter().try_fold(Subset::EMPTY, |acc, id| {
            let id = id.as_ref();
            self.users
                .iter()
                .position(|u| u == id)
                .map(|k| acc.with(k))
                .ok_or_else(|| ModelError::UnknownUser(id.to_owned()))
        })
    }

    pub fn label(&self, x: Subset) -> String {
        label(&self.users, x)
    }

    /// `H(Z_X)`.
    pub fn entropy(&self, x: Subset) -> Result<&Rational, ModelError> {
        if !x.is_subset_of(self.ground()) {
            return Err(ModelError::SubsetOutOfRange(x));
        }
        Ok(self.entropy.get(x))
    }

    /// `H(Z_X | Z_Y) = H(Z_{X ∪ Y}) − H(Z_Y)`.
    pub fn conditional_entropy(&self, x: Subset, y: Subset) -> Result<Rational, ModelError> {
        Ok(self.entropy(x.union(y))? - self.entropy(y)?)
    }

    /// `H(Z_V)`.
    pub fn total_entropy(&self) -> &Rational {
        self.entropy.get(self.ground())
    }

    /// Full entropy table; index by subset mask.
    pub fn entropy_table(&self) -> &SetFunction {
        &self.entropy
    }

    pub(crate) fn h(&self, x: Subset) -> &Rational {
        self.entropy.get(x)
    }

    /// True when every entropy value is an integer (packet models always are).
    pub fn is_integral(&self) -> bool {
        self.entropy.values().iter().all(is_integral)
    }
}

fn check_arity(n: usize) -> Result<(), ModelError> {
    if n < 2 {
        return Err(ModelError::TooFewUsers(n));
    }
    if n > MAX_USERS {
        return Err(ModelError::TooManyUsers(n, MAX_USERS));
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Three users: 1 holds a..e, 2 holds a,b,f and 3 holds c,d,f.
    pub fn three_users() -> SourceModel {
        SourceModel::from_packets(
            PacketModel::new([
                ("1", vec!["a", "b", "c", "d", "e"]),
                ("2", vec!["a", "b", "f"]),
                ("3", vec!["c", "d", "f"]),
            ])
            .unwrap(),
        )
        .unwrap()
    }

    pub fn packets(holdings: &[&[&str]]) -> SourceModel {
        SourceModel::from_packets(
            PacketModel::new(
                holdings
                    .iter()
                    .enumerate()
                    .map(|(k, p)| ((k + 1).to_string(), p.to_vec())),
            )
            .unwrap(),
        )
        .unwrap()
    }
}
