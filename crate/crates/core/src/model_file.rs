//! JSON model files.
//!
//! ```json
//! {"type":"packets","users":{"1":["a","b","c","d","e"],"2":["a","b","f"],"3":["c","d","f"]}}
//! {"type":"entropy","users":["1","2"],"entries":[{"set":["1"],"H":"1"},{"set":["2"],"H":"1/2"},{"set":["1","2"],"H":"3/2"}]}
//! ```
//!
//! User order in the file fixes the bit index of each user. Entropy values are
//! strings holding `p/q` or a finite decimal; JSON integers are accepted,
//! JSON floats are not.

use std::fmt;
use std::path::Path;

use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::entropy::{EntropyTable, ModelError, PacketModel, SourceKind, SourceModel};
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed model file: {0}")]
    Parse(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl ModelFileError {
    /// True for errors in the model content itself rather than in reading it.
    pub fn is_invalid_model(&self) -> bool {
        matches!(self, ModelFileError::Model(_))
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum RawModel {
    Packets {
        users: OrderedUsers,
        #[serde(default)]
        #[allow(dead_code)]
        unit: Option<String>,
    },
    Entropy {
        users: Vec<String>,
        entries: Vec<RawEntry>,
        #[serde(default)]
        #[allow(dead_code)]
        unit: Option<String>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    set: Vec<String>,
    #[serde(rename = "H")]
    h: Value,
}

/// User → packets in file order, rejecting duplicate keys.
#[derive(Debug)]
struct OrderedUsers(Vec<(String, Vec<String>)>);

impl<'de> Deserialize<'de> for OrderedUsers {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct UsersVisitor;

        impl<'de> Visitor<'de> for UsersVisitor {
            type Value = OrderedUsers;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object mapping user ids to packet id lists")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<OrderedUsers, A::Error> {
                let mut pairs: Vec<(String, Vec<String>)> = Vec::new();
                while let Some((user, packets)) = map.next_entry::<String, Vec<String>>()? {
                    if pairs.iter().any(|(u, _)| *u == user) {
                        return Err(de::Error::custom(format!("duplicate user id {user:?}")));
                    }
                    pairs.push((user, packets));
                }
                Ok(OrderedUsers(pairs))
            }
        }

        deserializer.deserialize_map(UsersVisitor)
    }
}

fn entropy_value(v: &Value) -> Result<Rational, ModelFileError> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|e| ModelFileError::Parse(e.to_string())),
        Value::Number(n) if n.is_i64() || n.is_u64() => {
            parse_rational(&n.to_string()).map_err(|e| ModelFileError::Parse(e.to_string()))
        }
        Value::Number(n) => Err(ModelFileError::Parse(format!(
            "entropy value {n} is a float; write it as a string such as \"7/2\" or \"3.5\""
        ))),
        other => Err(ModelFileError::Parse(format!(
            "entropy value must be a rational string, got {other}"
        ))),
    }
}

/// Parses and validates a model from JSON text.
pub fn parse_model(text: &str) -> Result<SourceModel, ModelFileError> {
    let raw: RawModel = serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        if msg.starts_with("duplicate user id") {
            ModelFileError::Model(ModelError::DuplicateUser(
                msg.split('"').nth(1).unwrap_or_default().to_owned(),
            ))
        } else {
            ModelFileError::Parse(msg)
        }
    })?;
    match raw {
        RawModel::Packets { users, .. } => {
            Ok(SourceModel::from_packets(PacketModel::new(users.0)?)?)
        }
        RawModel::Entropy { users, entries, .. } => {
            let entries = entries
                .into_iter()
                .map(|e| Ok((e.set, entropy_value(&e.h)?)))
                .collect::<Result<Vec<_>, ModelFileError>>()?;
            let table = EntropyTable::from_entries(users, entries)?;
            Ok(SourceModel::from_table(table)?)
        }
    }
}

/// Parses an entropy table without requiring it to be a polymatroid, so the
/// caller can report every violation.
pub fn parse_unvalidated_table(text: &str) -> Result<Option<EntropyTable>, ModelFileError> {
    let raw: RawModel =
        serde_json::from_str(text).map_err(|e| ModelFileError::Parse(e.to_string()))?;
    match raw {
        RawModel::Packets { .. } => Ok(None),
        RawModel::Entropy { users, entries, .. } => {
            let entries = entries
                .into_iter()
                .map(|e| Ok((e.set, entropy_value(&e.h)?)))
                .collect::<Result<Vec<_>, ModelFileError>>()?;
            Ok(Some(EntropyTable::from_entries(users, entries)?))
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, ModelFileError> {
    std::fs::read_to_string(path).map_err(|source| ModelFileError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<SourceModel, ModelFileError> {
    parse_model(&read_text(path)?)
}

/// Canonical JSON form: users in index order, packets sorted, and for tables
/// every subset in mask order with lowest-terms values.
pub fn canonical_json(model: &SourceModel) -> Value {
    match model.kind() {
        SourceKind::Packets(p) => {
            let mut users = serde_json::Map::new();
            for (k, u) in p.users().iter().enumerate() {
                users.insert(u.clone(), json!(p.packets(k).iter().collect::<Vec<_>>()));
            }
            json!({"type": "packets", "users": users})
        }
        SourceKind::Table(t) => {
            let entries: Vec<Value> = (0..t.values().values().len())
                .map(|mask| {
                    let x = crate::combinatorics::Subset::from_bits(mask as u32);
                    let set: Vec<&str> = x.iter().map(|i| t.users()[i].as_str()).collect();
                    json!({"set": set, "H": format_rational(t.get(x))})
                })
                .collect();
            json!({"type": "entropy", "users": t.users(), "entries": entries})
        }
    }
}

/// SHA-256 of the canonical JSON, hex encoded.
pub fn model_digest(model: &SourceModel) -> String {
    let text = canonical_json(model).to_string();
    hex::encode(Sha256::digest(text.as_bytes()))
}
