//! JSON documents for arrangements, partitions, NMTS instances and reductions.
//!
//! Maps keyed by vertex id are written in ascending numeric order so a document
//! read and written again is byte-identical.

use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::arrangement::{validate, Arrangement};
use crate::error::{DaptError, Result};
use crate::gadgets::{NmtsInstance, Reduction, ReductionParams};
use crate::guest::GuestGraph;
use crate::partition::BalancedPartition;
use crate::regular_tree::HostTree;

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents always serialize");
    s.push('\n');
    s
}

fn parse<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| DaptError::Document(e.to_string()))
}

fn numeric_entries(map: &IndexMap<String, u64>, what: &str) -> Result<Vec<(usize, u64)>> {
    map.iter()
        .map(|(k, &v)| {
            k.parse::<usize>()
                .map(|vertex| (vertex, v))
                .map_err(|_| DaptError::Document(format!("{what} key {k:?} is not a vertex id")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrangementDoc {
    pub degree: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guest_height: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub host_height: Option<u32>,
    pub map: IndexMap<String, u64>,
}

impl ArrangementDoc {
    pub fn from_arrangement(arr: &Arrangement) -> Self {
        let guest = arr.guest();
        let host = arr.host();
        let map = arr.leaves().iter().enumerate().map(|(i, &l)| ((i + 1).to_string(), l)).collect();
        let (guest_height, vertices, edges, default_height) = match guest.binary_height() {
            Some(h) => (Some(h), None, None, h + 1),
            None => {
                let edges = guest.edges().iter().map(|&(u, v)| [u, v]).collect();
                let default = HostTree::for_guest_size(guest.vertex_count() as u64, host.degree())
                    .map(|t| t.height())
                    .unwrap_or(0);
                (None, Some(guest.vertex_count()), Some(edges), default)
            }
        };
        let host_height = (host.height() != default_height).then_some(host.height());
        Self { degree: host.degree(), guest_height, vertices, edges, host_height, map }
    }

    pub fn into_arrangement(self) -> Result<Arrangement> {
        let entries = numeric_entries(&self.map, "map")?;
        let guest = match (self.guest_height, &self.edges) {
            (Some(h), None) => GuestGraph::complete_binary(h)?,
            (None, Some(edges)) => {
                let n = self.vertices.unwrap_or_else(|| {
                    let from_edges = edges.iter().flatten().copied().max().unwrap_or(0);
                    let from_map = entries.iter().map(|&(v, _)| v).max().unwrap_or(0);
                    from_edges.max(from_map)
                });
                GuestGraph::new(n, edges.iter().map(|&[u, v]| (u, v)).collect())?
            }
            _ => return Err(DaptError::Document("give exactly one of \"guest_height\" and \"edges\"".into())),
        };
        let host = match self.host_height {
            Some(h) => HostTree::new(self.degree, h)?,
            None => match guest.binary_height() {
                Some(h) => HostTree::new(self.degree, h + 1)?,
                None => HostTree::for_guest_size(guest.vertex_count() as u64, self.degree)?,
            },
        };
        let report = validate(&guest, &host, &entries);
        if !report.is_ok() {
            return Err(DaptError::InvalidArrangement(report));
        }
        let mut leaves = vec![0; guest.vertex_count()];
        for (v, l) in entries {
            leaves[v - 1] = l;
        }
        Arrangement::new(Arc::new(guest), host, leaves)
    }
}

pub fn arrangement_to_json(arr: &Arrangement) -> String {
    to_pretty(&ArrangementDoc::from_arrangement(arr))
}

pub fn arrangement_from_json(text: &str) -> Result<Arrangement> {
    parse::<ArrangementDoc>(text)?.into_arrangement()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionDoc {
    pub height: u32,
    pub k_prime: u32,
    pub block_of: IndexMap<String, u64>,
}

impl PartitionDoc {
    /// Only partitions of complete binary guests into a power-of-two number of blocks have a document form.
    pub fn from_partition(part: &BalancedPartition) -> Result<Self> {
        let height = part
            .guest()
            .binary_height()
            .ok_or_else(|| DaptError::Document("partition guest is not a complete binary tree".into()))?;
        if !part.k().is_power_of_two() {
            return Err(DaptError::Document(format!("k = {} is not a power of two", part.k())));
        }
        let block_of = part
            .assignments()
            .iter()
            .enumerate()
            .map(|(i, &b)| ((i + 1).to_string(), b as u64))
            .collect();
        Ok(Self { height, k_prime: part.k().trailing_zeros(), block_of })
    }

    pub fn into_partition(self) -> Result<BalancedPartition> {
        if self.k_prime == 0 || self.k_prime > 30 {
            return Err(DaptError::Document(format!("k_prime {} out of range", self.k_prime)));
        }
        let guest = GuestGraph::complete_binary(self.height)?;
        let n = guest.vertex_count();
        let mut block_of = vec![0usize; n];
        for (v, b) in numeric_entries(&self.block_of, "block_of")? {
            if v == 0 || v > n {
                return Err(DaptError::InvalidPartition(format!("unknown vertex {v}")));
            }
            if block_of[v - 1] != 0 {
                return Err(DaptError::InvalidPartition(format!("vertex {v} assigned twice")));
            }
            block_of[v - 1] = b as usize;
        }
        if let Some(v) = block_of.iter().position(|&b| b == 0) {
            return Err(DaptError::InvalidPartition(format!("vertex {} has no block", v + 1)));
        }
        BalancedPartition::new(Arc::new(guest), 1 << self.k_prime, block_of)
    }
}

pub fn partition_to_json(part: &BalancedPartition) -> Result<String> {
    Ok(to_pretty(&PartitionDoc::from_partition(part)?))
}

pub fn partition_from_json(text: &str) -> Result<BalancedPartition> {
    parse::<PartitionDoc>(text)?.into_partition()
}

pub fn nmts_to_json(inst: &NmtsInstance) -> String {
    to_pretty(inst)
}

pub fn nmts_from_json(text: &str) -> Result<NmtsInstance> {
    let inst: NmtsInstance = parse(text)?;
    inst.validate()?;
    Ok(inst)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarSizes {
    pub x: Vec<u64>,
    pub y: Vec<u64>,
    pub z: Vec<u64>,
    pub filler: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionMetadata {
    pub nmts: NmtsInstance,
    #[serde(flatten)]
    pub params: ReductionParams,
    pub star_sizes: StarSizes,
    pub target: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionDoc {
    pub degree: u64,
    pub vertices: usize,
    pub root: usize,
    pub edges: Vec<[usize; 2]>,
    pub metadata: ReductionMetadata,
}

impl ReductionDoc {
    pub fn from_reduction(red: &Reduction) -> Self {
        let sizes = |stars: &[crate::gadgets::StarSpan]| stars.iter().map(|s| s.size).collect();
        Self {
            degree: red.degree,
            vertices: red.guest.vertex_count(),
            root: red.hub(),
            edges: red.guest.edges().iter().map(|&(u, v)| [u, v]).collect(),
            metadata: ReductionMetadata {
                nmts: red.instance.clone(),
                params: red.params,
                star_sizes: StarSizes {
                    x: sizes(&red.x_stars),
                    y: sizes(&red.y_stars),
                    z: sizes(&red.z_stars),
                    filler: red.filler_size(),
                },
                target: red.target,
            },
        }
    }

    /// The guest tree described by the document.
    pub fn guest(&self) -> Result<GuestGraph> {
        GuestGraph::tree(self.vertices, self.edges.iter().map(|&[u, v]| (u, v)).collect())?.with_root(self.root)
    }
}

pub fn reduction_to_json(red: &Reduction) -> String {
    to_pretty(&ReductionDoc::from_reduction(red))
}

pub fn reduction_from_json(text: &str) -> Result<ReductionDoc> {
    parse(text)
}
