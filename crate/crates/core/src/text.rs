//! Text normalization shared by serialization, graph construction and
//! anomaly detection.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

/// Cells holding one of these (after trimming) are treated as missing.
pub const MISSING_SENTINELS: [&str; 3] = ["NULL", "null", "NaN"];

pub fn is_missing_cell(raw: &str) -> bool {
    let t = raw.trim();
    t.is_empty() || MISSING_SENTINELS.contains(&t)
}

/// Collapses runs of whitespace into single spaces and trims both ends.
pub fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Lowercase plus whitespace collapse. Value nodes and anomaly comparison key
/// on this form.
pub fn normalize_value(s: &str) -> String {
    collapse_whitespace(&s.to_lowercase())
}

pub fn token_set(s: &str) -> BTreeSet<String> {
    s.to_lowercase()
        .split_whitespace()
        .map(String::from)
        .collect()
}

/// Token-set Jaccard similarity. Two empty sets are identical (1.0).
pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

pub fn tokens(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}
