//! Modularity and Louvain community detection.
//!
//! Modularity of a partition of a symmetric weighted graph with total edge
//! weight `m` and resolution `γ`:
//!
//! ```text
//! Q = Σ_c [ in_c / 2m − γ (tot_c / 2m)² ]
//! ```
//!
//! where `in_c` is twice the weight of edges inside community `c` and
//! `tot_c` the summed degree of its members.
//!
//! The Louvain run is deterministic for a given `(graph, resolution, seed)`.
//! Nodes are first put into ascending node-id order, traversal within a
//! level follows a seeded shuffle of that order, candidate communities are
//! scanned in ascending id and a move needs `ΔQ > 1e-12`.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{AccountIdx, UndirectedGraph};

pub const DEFAULT_RESOLUTION: f64 = 1.0;
pub const DEFAULT_SEED: u64 = 42;

/// Smallest modularity gain accepted for a local move.
pub const MIN_GAIN: f64 = 1e-12;

/// Name of the PRNG driving traversal order, recorded with each partition.
pub const PRNG_NAME: &str = "chacha8";

const MAX_PASSES_PER_LEVEL: usize = 10_000;

#[derive(Debug, Error, PartialEq)]
pub enum CommunityError {
    #[error("graph has no edges; modularity is undefined")]
    EmptyGraph,
    #[error("assignment covers {got} nodes, graph has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("resolution must be positive and finite, got {0}")]
    InvalidResolution(f64),
    #[error("node {0} has no community in the partition")]
    MissingNode(AccountIdx),
}

/// Assignment of accounts to dense community ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityPartition {
    #[serde(default)]
    pub network: String,
    pub seed: u64,
    pub resolution: f64,
    pub modularity: f64,
    /// Aggregation passes in which at least one node moved.
    pub levels: usize,
    /// Modularity of the singleton partition followed by the value after
    /// each level.
    #[serde(default)]
    pub level_modularity: Vec<f64>,
    pub assignment: BTreeMap<AccountIdx, usize>,
}

impl CommunityPartition {
    pub fn community_of(&self, node: AccountIdx) -> Option<usize> {
        self.assignment.get(&node).copied()
    }

    pub fn community_count(&self) -> usize {
        self.assignment.values().max().map_or(0, |&c| c + 1)
    }

    /// Member lists indexed by community id, each in ascending node order.
    pub fn communities(&self) -> Vec<Vec<AccountIdx>> {
        let mut out = vec![Vec::new(); self.community_count()];
        for (&node, &c) in &self.assignment {
            out[c].push(node);
        }
        out
    }

    pub fn members(&self, community: usize) -> Vec<AccountIdx> {
        self.assignment
            .iter()
            .filter(|(_, &c)| c == community)
            .map(|(&n, _)| n)
            .collect()
    }

    /// Community per local position of `graph`.
    pub fn local_assignment(&self, graph: &UndirectedGraph) -> Result<Vec<usize>, CommunityError> {
        graph
            .node_ids()
            .iter()
            .map(|&id| self.community_of(id).ok_or(CommunityError::MissingNode(id)))
            .collect()
    }

    /// Checks that ids are contiguous from 0 and every id is used.
    pub fn is_dense(&self) -> bool {
        let mut used = vec![false; self.community_count()];
        for &c in self.assignment.values() {
            used[c] = true;
        }
        used.into_iter().all(|u| u)
    }
}

fn check_resolution(resolution: f64) -> Result<(), CommunityError> {
    if resolution > 0.0 && resolution.is_finite() {
        Ok(())
    } else {
        Err(CommunityError::InvalidResolution(resolution))
    }
}

/// Modularity of `assignment` (community per local position).
pub fn modularity(
    graph: &UndirectedGraph,
    assignment: &[usize],
    resolution: f64,
) -> Result<f64, CommunityError> {
    check_resolution(resolution)?;
    let n = graph.node_count();
    if assignment.len() != n {
        return Err(CommunityError::LengthMismatch {
            expected: n,
            got: assignment.len(),
        });
    }
    let m = graph.total_weight();
    if m <= 0.0 {
        return Err(CommunityError::EmptyGraph);
    }
    let k = assignment.iter().max().map_or(0, |&c| c + 1);
    let mut inside = vec![0.0; k];
    let mut tot = vec![0.0; k];
    for i in 0..n {
        let c = assignment[i];
        tot[c] += graph.degree(i);
        inside[c] += 2.0 * graph.self_loop(i);
        for &(j, w) in graph.neighbors(i) {
            if assignment[j] == c {
                inside[c] += w;
            }
        }
    }
    let two_m = 2.0 * m;
    Ok(inside
        .iter()
        .zip(&tot)
        .map(|(&inn, &t)| inn / two_m - resolution * (t / two_m) * (t / two_m))
        .sum())
}

/// Modularity change from moving local node `node` into community `target`,
/// computed from community tallies rather than a full recount.
pub fn delta_modularity(
    graph: &UndirectedGraph,
    assignment: &[usize],
    node: usize,
    target: usize,
    resolution: f64,
) -> Result<f64, CommunityError> {
    check_resolution(resolution)?;
    if assignment.len() != graph.node_count() {
        return Err(CommunityError::LengthMismatch {
            expected: graph.node_count(),
            got: assignment.len(),
        });
    }
    let m = graph.total_weight();
    if m <= 0.0 {
        return Err(CommunityError::EmptyGraph);
    }
    let own = assignment[node];
    if own == target {
        return Ok(0.0);
    }
    let mut link_own = 0.0;
    let mut link_target = 0.0;
    for &(j, w) in graph.neighbors(node) {
        if assignment[j] == own {
            link_own += w;
        } else if assignment[j] == target {
            link_target += w;
        }
    }
    let mut tot_own = 0.0;
    let mut tot_target = 0.0;
    for (i, &c) in assignment.iter().enumerate() {
        if c == own && i != node {
            tot_own += graph.degree(i);
        } else if c == target {
            tot_target += graph.degree(i);
        }
    }
    let k = graph.degree(node);
    let gain_target = move_gain(link_target, tot_target, k, m, resolution);
    let gain_own = move_gain(link_own, tot_own, k, m, resolution);
    Ok((gain_target - gain_own) / m)
}

/// `m · ΔQ` of inserting an isolated node with degree `k` into a community
/// it links to with weight `link` and whose degree total is `tot`.
#[inline]
fn move_gain(link: f64, tot: f64, k: f64, m: f64, resolution: f64) -> f64 {
    link - resolution * tot * k / (2.0 * m)
}

/// Louvain modularity maximisation.
pub fn louvain(
    graph: &UndirectedGraph,
    resolution: f64,
    seed: u64,
) -> Result<CommunityPartition, CommunityError> {
    check_resolution(resolution)?;
    if graph.total_weight() <= 0.0 {
        return Err(CommunityError::EmptyGraph);
    }
    let canonical = canonical_order(graph);
    let n = canonical.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut membership: Vec<usize> = (0..n).collect();
    let mut history = vec![modularity(&canonical, &membership, resolution)?];
    let mut current = canonical.clone();
    let mut levels = 0;
    loop {
        let (moved, local) = local_moves(&current, resolution, &mut rng);
        if !moved {
            break;
        }
        let (dense, count) = renumber(&local);
        for c in membership.iter_mut() {
            *c = dense[*c];
        }
        levels += 1;
        history.push(modularity(&canonical, &membership, resolution)?);
        if count == current.node_count() {
            break;
        }
        current = current.aggregate(&dense, count);
    }
    let (membership, _) = renumber(&membership);
    let q = modularity(&canonical, &membership, resolution)?;
    let assignment = canonical
        .node_ids()
        .iter()
        .zip(&membership)
        .map(|(&id, &c)| (id, c))
        .collect();
    Ok(CommunityPartition {
        network: String::new(),
        seed,
        resolution,
        modularity: q,
        levels,
        level_modularity: history,
        assignment,
    })
}

/// Copy of `graph` with local positions in ascending node-id order.
fn canonical_order(graph: &UndirectedGraph) -> UndirectedGraph {
    let n = graph.node_count();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| graph.node_ids()[i]);
    if order.iter().enumerate().all(|(k, &i)| k == i) {
        return graph.clone();
    }
    let mut position = vec![0; n];
    for (k, &i) in order.iter().enumerate() {
        position[i] = k;
    }
    let ids = order.iter().map(|&i| graph.node_ids()[i]).collect();
    let edges: Vec<(usize, usize, f64)> = graph
        .edges()
        .map(|(i, j, w)| (position[i], position[j], w))
        .collect();
    UndirectedGraph::with_ids(ids, &edges)
}

/// Dense relabeling by first appearance. Returns `old -> new` for every
/// position of `labels` and the number of distinct labels.
fn renumber(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut seen: HashMap<usize, usize> = HashMap::new();
    let dense = labels
        .iter()
        .map(|&c| {
            let next = seen.len();
            *seen.entry(c).or_insert(next)
        })
        .collect();
    (dense, seen.len())
}

/// Repeated local-move passes until no node moves. Returns whether any
/// node moved and the community per node.
fn local_moves(graph: &UndirectedGraph, resolution: f64, rng: &mut ChaCha8Rng) -> (bool, Vec<usize>) {
    let n = graph.node_count();
    let m = graph.total_weight();
    let threshold = MIN_GAIN * m;
    let mut community: Vec<usize> = (0..n).collect();
    let mut tot: Vec<f64> = (0..n).map(|i| graph.degree(i)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut link = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut moved_any = false;

    for _ in 0..MAX_PASSES_PER_LEVEL {
        let mut moves = 0usize;
        for &i in &order {
            let k = graph.degree(i);
            if k == 0.0 {
                continue;
            }
            let own = community[i];
            for &(j, w) in graph.neighbors(i) {
                let c = community[j];
                if link[c] == 0.0 {
                    touched.push(c);
                }
                link[c] += w;
            }
            tot[own] -= k;
            let mut best = own;
            let mut best_gain = move_gain(link[own], tot[own], k, m, resolution);
            touched.sort_unstable();
            for &c in &touched {
                if c == own {
                    continue;
                }
                let gain = move_gain(link[c], tot[c], k, m, resolution);
                if gain - best_gain > threshold {
                    best = c;
                    best_gain = gain;
                }
            }
            tot[best] += k;
            if best != own {
                community[i] = best;
                moves += 1;
            }
            for &c in &touched {
                link[c] = 0.0;
            }
            link[own] = 0.0;
            touched.clear();
        }
        if moves == 0 {
            break;
        }
        moved_any = true;
    }
    (moved_any, community)
}

/// Adjusted Rand index between two labelings of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings differ in length");
    let n = a.len();
    if n < 2 {
        return 1.0;
    }
    let mut joint: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_insert(0) += 1;
        *rows.entry(x).or_insert(0) += 1;
        *cols.entry(y).or_insert(0) += 1;
    }
    let pairs = |c: u64| (c as f64) * (c as f64 - 1.0) / 2.0;
    let index: f64 = joint.values().map(|&c| pairs(c)).sum();
    let sum_rows: f64 = rows.values().map(|&c| pairs(c)).sum();
    let sum_cols: f64 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(n as u64);
    let expected = sum_rows * sum_cols / total;
    let max = 0.5 * (sum_rows + sum_cols);
    if (max - expected).abs() < f64::EPSILON {
        return 1.0;
    }
    (index - expected) / (max - expected)
}
