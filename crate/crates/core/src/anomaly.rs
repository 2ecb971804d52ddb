//! Flags contradictory attribute values across matched tuple pairs.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::text::{jaccard, normalize_value, token_set};
use crate::{Error, Result};

pub const DEFAULT_JACCARD_THRESHOLD: f64 = 0.9;

/// Attribute index pairs `(left, right)`; each side appears at most once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeMapping {
    pairs: Vec<(usize, usize)>,
}

impl AttributeMapping {
    pub fn from_names<S: AsRef<str>>(left: &Dataset, right: &Dataset, names: &[(S, S)]) -> Result<Self> {
        let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(names.len());
        for (l, r) in names {
            let (l, r) = (l.as_ref(), r.as_ref());
            let li = left.attribute_index(l).ok_or_else(|| Error::UnknownAttribute(l.into()))?;
            let ri = right.attribute_index(r).ok_or_else(|| Error::UnknownAttribute(r.into()))?;
            if pairs.iter().any(|p| p.0 == li) {
                return Err(Error::DuplicateMapping(l.into()));
            }
            if pairs.iter().any(|p| p.1 == ri) {
                return Err(Error::DuplicateMapping(r.into()));
            }
            pairs.push((li, ri));
        }
        Ok(Self { pairs })
    }

    /// Maps attributes whose lowercase names are identical.
    pub fn by_name(left: &Dataset, right: &Dataset) -> Self {
        let mut pairs = Vec::new();
        for (li, l) in left.attributes().iter().enumerate() {
            let l = l.to_lowercase();
            if let Some(ri) = right.attributes().iter().position(|r| r.to_lowercase() == l) {
                if !pairs.iter().any(|p: &(usize, usize)| p.1 == ri) {
                    pairs.push((li, ri));
                }
            }
        }
        Self { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnomalyKind {
    Contradiction,
    OneSideMissing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyRecord {
    pub left_id: String,
    pub right_id: String,
    pub left_attribute: String,
    pub right_attribute: String,
    pub left_value: Option<String>,
    pub right_value: Option<String>,
    pub kind: AnomalyKind,
}

/// For every matched pair and mapped attribute: both values present with
/// token Jaccard below `threshold` is a contradiction, exactly one present is
/// one-side-missing. Values equal after normalization never produce a record.
/// Output is sorted by left id, then left attribute name.
pub fn detect_anomalies(
    left: &Dataset,
    right: &Dataset,
    matches: &[(usize, usize)],
    mapping: &AttributeMapping,
    threshold: f64,
) -> Result<Vec<AnomalyRecord>> {
    for &(la, ra) in &mapping.pairs {
        if la >= left.attributes().len() || ra >= right.attributes().len() {
            return Err(Error::UnknownAttribute(alloc::format!("#{la}/#{ra}")));
        }
    }
    let mut out = Vec::new();
    for &(l, r) in matches {
        let lt = left.tuple(l)?;
        let rt = right.tuple(r)?;
        for &(la, ra) in &mapping.pairs {
            let lv = &lt.values[la];
            let rv = &rt.values[ra];
            let kind = match (lv, rv) {
                (None, None) => continue,
                (Some(a), Some(b)) => {
                    if normalize_value(a) == normalize_value(b)
                        || jaccard(&token_set(a), &token_set(b)) >= threshold
                    {
                        continue;
                    }
                    AnomalyKind::Contradiction
                }
                _ => AnomalyKind::OneSideMissing,
            };
            out.push(AnomalyRecord {
                left_id: lt.id.clone(),
                right_id: rt.id.clone(),
                left_attribute: left.attributes()[la].clone(),
                right_attribute: right.attributes()[ra].clone(),
                left_value: lv.clone(),
                right_value: rv.clone(),
                kind,
            });
        }
    }
    out.sort_by(|a, b| {
        (&a.left_id, &a.left_attribute, &a.right_id).cmp(&(&b.left_id, &b.left_attribute, &b.right_id))
    });
    Ok(out)
}
