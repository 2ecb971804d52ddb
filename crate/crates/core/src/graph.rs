//! Multi-relational graph construction.
//!
//! Every tuple becomes a tuple node and every distinct normalized cell value a
//! value node; each non-missing cell adds one edge `(tuple, attribute, value)`.
//! Equal values share a node even across attributes, so tuples that share a
//! value are two hops apart.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::text::normalize_value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub tuple: usize,
    /// Index into [`MultiRelGraph::relations`].
    pub relation: usize,
    /// Index into [`MultiRelGraph::values`].
    pub value: usize,
}

/// Node ids: tuple nodes are `0..tuple_count`, value node `v` is
/// `tuple_count + v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiRelGraph {
    tuple_count: usize,
    values: Vec<String>,
    relations: Vec<String>,
    edges: Vec<Edge>,
}

impl MultiRelGraph {
    pub fn tuple_count(&self) -> usize {
        self.tuple_count
    }

    pub fn node_count(&self) -> usize {
        self.tuple_count + self.values.len()
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn relations(&self) -> &[String] {
        &self.relations
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn value_node(&self, value: usize) -> usize {
        self.tuple_count + value
    }

    pub fn value_index(&self, normalized: &str) -> Option<usize> {
        self.values.iter().position(|v| v == normalized)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub relations: usize,
}

pub fn mrgc(dataset: &Dataset) -> MultiRelGraph {
    let mut value_ids: BTreeMap<String, usize> = BTreeMap::new();
    let mut values = Vec::new();
    let mut used_relations = BTreeSet::new();
    let mut raw_edges = Vec::new();
    for (t, tuple) in dataset.tuples().iter().enumerate() {
        for (a, cell) in tuple.values.iter().enumerate() {
            let Some(cell) = cell else { continue };
            let key = normalize_value(cell);
            let id = *value_ids.entry(key).or_insert_with_key(|k| {
                values.push(k.clone());
                values.len() - 1
            });
            used_relations.insert(a);
            raw_edges.push((t, a, id));
        }
    }
    // relations keep dataset attribute order
    let relation_of: BTreeMap<usize, usize> = used_relations
        .iter()
        .enumerate()
        .map(|(r, &a)| (a, r))
        .collect();
    let relations = used_relations
        .iter()
        .map(|&a| dataset.attributes()[a].clone())
        .collect();
    let edges = raw_edges
        .into_iter()
        .map(|(tuple, a, value)| Edge {
            tuple,
            relation: relation_of[&a],
            value,
        })
        .collect();
    MultiRelGraph {
        tuple_count: dataset.len(),
        values,
        relations,
        edges,
    }
}

pub fn graph_stats(g: &MultiRelGraph) -> GraphStats {
    GraphStats {
        nodes: g.node_count(),
        edges: g.edges.len(),
        relations: g.relations.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceStyle {
    Embdi,
    Grapher,
}

/// Node/edge counts of a tripartite tuple/attribute/value graph: one node per
/// tuple, attribute and distinct value; a tuple-value edge per non-missing
/// cell and an attribute-value edge per distinct (attribute, value) pair. Both
/// styles share this count model. Reference edges are untyped, so
/// `relations` is 0.
pub fn reference_graph(dataset: &Dataset, style: ReferenceStyle) -> GraphStats {
    let _ = style;
    let mut distinct_values = BTreeSet::new();
    let mut attribute_values = BTreeSet::new();
    let mut cells = 0;
    for tuple in dataset.tuples() {
        for (a, cell) in tuple.values.iter().enumerate() {
            let Some(cell) = cell else { continue };
            let v = normalize_value(cell);
            attribute_values.insert((a, v.clone()));
            distinct_values.insert(v);
            cells += 1;
        }
    }
    GraphStats {
        nodes: dataset.len() + dataset.attributes().len() + distinct_values.len(),
        edges: cells + attribute_values.len(),
        relations: 0,
    }
}
