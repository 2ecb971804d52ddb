//! Relational datasets and their sentence serialization.
//!
//! A tuple `e` with values `v1..vm` for attributes `a1..am` serializes to
//! `[COL] a1 [VAL] v1 ... [COL] am [VAL] vm`. Missing cells drop out together
//! with their attribute name, and a pair of serialized tuples is joined as
//! `[CLS] S(e) [SEP] S(e')`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::text::{collapse_whitespace, is_missing_cell};
use crate::{Error, Result};

pub const COL: &str = "[COL]";
pub const VAL: &str = "[VAL]";
pub const SEP: &str = "[SEP]";
pub const CLS: &str = "[CLS]";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tuple {
    pub id: String,
    pub values: Vec<Option<String>>,
}

impl Tuple {
    pub fn new(id: impl Into<String>, values: Vec<Option<String>>) -> Self {
        Self {
            id: id.into(),
            values,
        }
    }

    /// Builds a tuple from raw cell text, mapping empty cells and the
    /// `NULL`/`null`/`NaN` sentinels to missing.
    pub fn from_cells<S: AsRef<str>>(id: impl Into<String>, cells: &[S]) -> Self {
        let values = cells
            .iter()
            .map(|c| {
                let c = c.as_ref();
                (!is_missing_cell(c)).then(|| String::from(c))
            })
            .collect();
        Self::new(id, values)
    }

    pub fn present_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }
}

/// An immutable relational table: ordered attribute names plus tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    id: String,
    attributes: Vec<String>,
    tuples: Vec<Tuple>,
    index: BTreeMap<String, usize>,
}

impl Dataset {
    pub fn new(id: impl Into<String>, attributes: Vec<String>, tuples: Vec<Tuple>) -> Result<Self> {
        for (i, a) in attributes.iter().enumerate() {
            if attributes[..i].contains(a) {
                return Err(Error::DuplicateAttribute(a.clone()));
            }
        }
        let mut index = BTreeMap::new();
        for (i, t) in tuples.iter().enumerate() {
            if t.values.len() != attributes.len() {
                return Err(Error::Arity {
                    id: t.id.clone(),
                    expected: attributes.len(),
                    found: t.values.len(),
                });
            }
            if index.insert(t.id.clone(), i).is_some() {
                return Err(Error::DuplicateTupleId(t.id.clone()));
            }
        }
        Ok(Self {
            id: id.into(),
            attributes,
            tuples,
            index,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuple(&self, index: usize) -> Result<&Tuple> {
        self.tuples.get(index).ok_or(Error::UnknownTuple {
            index,
            len: self.tuples.len(),
        })
    }

    pub fn position(&self, tuple_id: &str) -> Option<usize> {
        self.index.get(tuple_id).copied()
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a == name)
    }

    pub fn serialize(&self, index: usize) -> Result<SerializedTuple> {
        Ok(serialize_tuple(self, self.tuple(index)?))
    }

    /// Total number of non-missing cells.
    pub fn present_cells(&self) -> usize {
        self.tuples.iter().map(Tuple::present_count).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SerializedTuple(String);

impl SerializedTuple {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of `[COL] .. [VAL] ..` blocks.
    pub fn block_count(&self) -> usize {
        self.0.split(' ').filter(|t| *t == COL).count()
    }
}

impl fmt::Display for SerializedTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SerializedPair(String);

impl SerializedPair {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SerializedPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Attribute names are kept verbatim; values are whitespace-normalized.
pub fn serialize_tuple(dataset: &Dataset, tuple: &Tuple) -> SerializedTuple {
    let mut out = String::new();
    for (name, value) in dataset.attributes.iter().zip(&tuple.values) {
        let Some(value) = value else { continue };
        let value = collapse_whitespace(value);
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(COL);
        out.push(' ');
        out.push_str(name);
        out.push(' ');
        out.push_str(VAL);
        if !value.is_empty() {
            out.push(' ');
            out.push_str(&value);
        }
    }
    SerializedTuple(out)
}

pub fn serialize_pair(left: &SerializedTuple, right: &SerializedTuple) -> SerializedPair {
    let mut out = String::from(CLS);
    for part in [left.as_str(), SEP, right.as_str()] {
        if !part.is_empty() {
            out.push(' ');
            out.push_str(part);
        }
    }
    SerializedPair(out)
}
