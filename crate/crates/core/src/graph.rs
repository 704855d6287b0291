//! Retweet networks over a shared account registry.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::ingest::TweetRecord;

/// Dense account index, stable across all networks of a run.
pub type AccountIdx = u32;

/// Bidirectional map between account ids and dense indices.
///
/// Indices are contiguous from 0 and assigned in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AccountRegistry {
    names: Vec<String>,
    index: HashMap<String, AccountIdx>,
}

impl AccountRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding every account of `records`, indexed in account-id
    /// order, so indices do not depend on record order.
    pub fn from_records_sorted<'a, I>(records: I) -> Self
    where
        I: IntoIterator<Item = &'a TweetRecord>,
    {
        let mut ids: BTreeSet<&str> = BTreeSet::new();
        for rec in records {
            ids.insert(&rec.author);
            if let Some(rt) = &rec.retweeted_author {
                ids.insert(rt);
            }
        }
        let mut reg = Self::new();
        for id in ids {
            reg.intern(id);
        }
        reg
    }

    pub fn intern(&mut self, id: &str) -> AccountIdx {
        if let Some(&idx) = self.index.get(id) {
            return idx;
        }
        let idx = AccountIdx::try_from(self.names.len()).expect("registry overflow");
        self.names.push(id.to_string());
        self.index.insert(id.to_string(), idx);
        idx
    }

    pub fn get(&self, id: &str) -> Option<AccountIdx> {
        self.index.get(id).copied()
    }

    pub fn name(&self, idx: AccountIdx) -> Option<&str> {
        self.names.get(idx as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Reindexes accounts in id order. Returns the sorted registry and the
    /// map `old index -> new index` to apply to networks built on `self`.
    pub fn canonicalize(&self) -> (AccountRegistry, Vec<AccountIdx>) {
        let mut order: Vec<AccountIdx> = (0..self.names.len() as AccountIdx).collect();
        order.sort_by(|&a, &b| self.names[a as usize].cmp(&self.names[b as usize]));
        let mut remap = vec![0; self.names.len()];
        let mut sorted = AccountRegistry::new();
        for old in order {
            remap[old as usize] = sorted.intern(&self.names[old as usize]);
        }
        (sorted, remap)
    }
}

impl Serialize for AccountRegistry {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.names.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AccountRegistry {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let names = Vec::<String>::deserialize(d)?;
        let mut reg = AccountRegistry::new();
        for name in &names {
            reg.intern(name);
        }
        if reg.len() != names.len() {
            return Err(serde::de::Error::custom("duplicate account id in registry"));
        }
        Ok(reg)
    }
}

/// Directed, weighted retweet network of one hashtag.
///
/// Edge `(u, v)` with weight `w` records that `u` retweeted `v` `w` times.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "NetworkFile", try_from = "NetworkFile")]
pub struct RetweetNetwork {
    pub hashtag: String,
    nodes: BTreeSet<AccountIdx>,
    edges: BTreeMap<(AccountIdx, AccountIdx), u64>,
    made: BTreeMap<AccountIdx, u64>,
    received: BTreeMap<AccountIdx, u64>,
    /// Non-retweet records seen in the stream.
    pub original_tweets: u64,
    /// Records skipped because their tweet id was already seen.
    pub duplicates: u64,
}

impl RetweetNetwork {
    pub fn empty(hashtag: &str) -> Self {
        RetweetNetwork {
            hashtag: hashtag.to_string(),
            nodes: BTreeSet::new(),
            edges: BTreeMap::new(),
            made: BTreeMap::new(),
            received: BTreeMap::new(),
            original_tweets: 0,
            duplicates: 0,
        }
    }

    pub fn add_node(&mut self, node: AccountIdx) {
        self.nodes.insert(node);
    }

    /// Records `weight` retweets of `to` by `from`. Self-loops are ignored.
    pub fn add_retweets(&mut self, from: AccountIdx, to: AccountIdx, weight: u64) {
        if from == to || weight == 0 {
            return;
        }
        self.nodes.insert(from);
        self.nodes.insert(to);
        *self.edges.entry((from, to)).or_insert(0) += weight;
        *self.made.entry(from).or_insert(0) += weight;
        *self.received.entry(to).or_insert(0) += weight;
    }

    pub fn nodes(&self) -> &BTreeSet<AccountIdx> {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains(&self, node: AccountIdx) -> bool {
        self.nodes.contains(&node)
    }

    pub fn edges(&self) -> impl Iterator<Item = (AccountIdx, AccountIdx, u64)> + '_ {
        self.edges.iter().map(|(&(u, v), &w)| (u, v, w))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn weight(&self, from: AccountIdx, to: AccountIdx) -> u64 {
        self.edges.get(&(from, to)).copied().unwrap_or(0)
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().sum()
    }

    pub fn retweets_made(&self, node: AccountIdx) -> u64 {
        self.made.get(&node).copied().unwrap_or(0)
    }

    pub fn retweets_received(&self, node: AccountIdx) -> u64 {
        self.received.get(&node).copied().unwrap_or(0)
    }

    /// Applies an index remap produced by [`AccountRegistry::canonicalize`].
    pub fn remap(&self, remap: &[AccountIdx]) -> RetweetNetwork {
        let mut net = RetweetNetwork::empty(&self.hashtag);
        net.original_tweets = self.original_tweets;
        net.duplicates = self.duplicates;
        for &n in &self.nodes {
            net.add_node(remap[n as usize]);
        }
        for (u, v, w) in self.edges() {
            net.add_retweets(remap[u as usize], remap[v as usize], w);
        }
        net
    }
}

/// Builds the retweet network of one hashtag stream.
///
/// Accounts are interned into `registry`. Original tweets add their author
/// as a node but no edge. Repeated tweet ids are skipped.
pub fn build_network(
    hashtag: &str,
    stream: &[TweetRecord],
    registry: &mut AccountRegistry,
) -> RetweetNetwork {
    let mut net = RetweetNetwork::empty(hashtag);
    let mut seen: HashSet<&str> = HashSet::with_capacity(stream.len());
    for rec in stream {
        if !seen.insert(&rec.tweet_id) {
            net.duplicates += 1;
            continue;
        }
        let author = registry.intern(&rec.author);
        match &rec.retweeted_author {
            Some(rt) => {
                let target = registry.intern(rt);
                net.add_retweets(author, target, 1);
            }
            None => {
                net.original_tweets += 1;
                net.add_node(author);
            }
        }
    }
    net
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    hashtag: String,
    nodes: Vec<AccountIdx>,
    /// `[retweeter, retweeted, weight]`
    edges: Vec<(AccountIdx, AccountIdx, u64)>,
    original_tweets: u64,
    duplicates: u64,
}

impl From<RetweetNetwork> for NetworkFile {
    fn from(net: RetweetNetwork) -> Self {
        NetworkFile {
            nodes: net.nodes.iter().copied().collect(),
            edges: net.edges().collect(),
            hashtag: net.hashtag,
            original_tweets: net.original_tweets,
            duplicates: net.duplicates,
        }
    }
}

impl TryFrom<NetworkFile> for RetweetNetwork {
    type Error = String;

    fn try_from(file: NetworkFile) -> Result<Self, Self::Error> {
        let mut net = RetweetNetwork::empty(&file.hashtag);
        for n in file.nodes {
            net.add_node(n);
        }
        for (u, v, w) in file.edges {
            if u == v {
                return Err(format!("self-loop on node {u}"));
            }
            if !net.contains(u) || !net.contains(v) {
                return Err(format!("edge ({u}, {v}) references unknown node"));
            }
            net.add_retweets(u, v, w);
        }
        net.original_tweets = file.original_tweets;
        net.duplicates = file.duplicates;
        Ok(net)
    }
}

/// Symmetric weighted graph in adjacency-list form.
///
/// Positions `0..n` are local; `node_ids[i]` is the account behind position
/// `i`. Self-loops are kept apart from the adjacency lists, and a self-loop
/// of weight `w` adds `2w` to its node's degree.
#[derive(Debug, Clone, PartialEq)]
pub struct UndirectedGraph {
    node_ids: Vec<AccountIdx>,
    adj: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    degrees: Vec<f64>,
    total_weight: f64,
}

impl UndirectedGraph {
    /// Graph on `n` nodes with ids `0..n` from an undirected edge list.
    /// Parallel edges are merged by summing their weights.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        Self::with_ids((0..n as AccountIdx).collect(), edges)
    }

    pub fn with_ids(node_ids: Vec<AccountIdx>, edges: &[(usize, usize, f64)]) -> Self {
        let n = node_ids.len();
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(u, v, w) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) out of range for {n} nodes");
            let key = if u <= v { (u, v) } else { (v, u) };
            *merged.entry(key).or_insert(0.0) += w;
        }
        let mut adj = vec![Vec::new(); n];
        let mut self_loops = vec![0.0; n];
        for ((u, v), w) in merged {
            if u == v {
                self_loops[u] += w;
            } else {
                adj[u].push((v, w));
                adj[v].push((u, w));
            }
        }
        for list in &mut adj {
            list.sort_by_key(|&(j, _)| j);
        }
        Self::from_parts(node_ids, adj, self_loops)
    }

    fn from_parts(node_ids: Vec<AccountIdx>, adj: Vec<Vec<(usize, f64)>>, self_loops: Vec<f64>) -> Self {
        let degrees: Vec<f64> = adj
            .iter()
            .zip(&self_loops)
            .map(|(list, &sl)| list.iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * sl)
            .collect();
        let total_weight = degrees.iter().sum::<f64>() / 2.0;
        UndirectedGraph {
            node_ids,
            adj,
            self_loops,
            degrees,
            total_weight,
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn node_ids(&self) -> &[AccountIdx] {
        &self.node_ids
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    pub fn self_loop(&self, i: usize) -> f64 {
        self.self_loops[i]
    }

    /// Weighted degree, self-loops counted twice.
    pub fn degree(&self, i: usize) -> f64 {
        self.degrees[i]
    }

    /// Total edge weight `m` (each undirected edge counted once).
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.self_loops[i];
        }
        self.adj[i]
            .binary_search_by_key(&j, |&(k, _)| k)
            .map(|pos| self.adj[i][pos].1)
            .unwrap_or(0.0)
    }

    /// Undirected edges `(i, j, w)` with `i <= j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let loops = self
            .self_loops
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, &w)| (i, i, w));
        let plain = self.adj.iter().enumerate().flat_map(|(i, list)| {
            list.iter()
                .filter(move |&&(j, _)| i < j)
                .map(move |&(j, w)| (i, j, w))
        });
        loops.chain(plain)
    }

    /// Collapses each community into one node. Internal weight becomes a
    /// self-loop. Node ids of the result are community ids.
    pub fn aggregate(&self, community: &[usize], count: usize) -> UndirectedGraph {
        let mut maps: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); count];
        let mut self_loops = vec![0.0; count];
        for i in 0..self.node_count() {
            let ci = community[i];
            self_loops[ci] += self.self_loops[i];
            for &(j, w) in &self.adj[i] {
                let cj = community[j];
                if ci == cj {
                    // each internal edge is visited from both ends
                    self_loops[ci] += w / 2.0;
                } else {
                    *maps[ci].entry(cj).or_insert(0.0) += w;
                }
            }
        }
        let adj = maps.into_iter().map(|m| m.into_iter().collect()).collect();
        Self::from_parts((0..count as AccountIdx).collect(), adj, self_loops)
    }
}

/// Symmetrizes a retweet network: `w'(i, j) = w(i, j) + w(j, i)`.
///
/// Local positions follow ascending account index, and every node of the
/// network (including isolated ones) is kept.
pub fn undirected_projection(net: &RetweetNetwork) -> UndirectedGraph {
    let node_ids: Vec<AccountIdx> = net.nodes().iter().copied().collect();
    let position: HashMap<AccountIdx, usize> =
        node_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let edges: Vec<(usize, usize, f64)> = net
        .edges()
        .map(|(u, v, w)| (position[&u], position[&v], w as f64))
        .collect();
    UndirectedGraph::with_ids(node_ids, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rt(id: &str, from: &str, to: &str) -> TweetRecord {
        TweetRecord {
            tweet_id: id.into(),
            author: from.into(),
            retweeted_author: Some(to.into()),
            hashtags: ["#afd".to_string()].into(),
            timestamp: "2020-05-28T00:00:00Z".parse().unwrap(),
        }
    }

    #[test]
    fn single_retweet() {
        let mut reg = AccountRegistry::new();
        let net = build_network("#afd", &[rt("1", "a", "b")], &mut reg);
        assert_eq!(net.node_count(), 2);
        assert_eq!(net.edge_count(), 1);
        assert_eq!(net.weight(reg.get("a").unwrap(), reg.get("b").unwrap()), 1);
    }

    #[test]
    fn repeated_retweets_accumulate() {
        let mut reg = AccountRegistry::new();
        let stream = [rt("1", "a", "b"), rt("2", "a", "b"), rt("3", "c", "b")];
        let net = build_network("#afd", &stream, &mut reg);
        let [a, b, c] = ["a", "b", "c"].map(|x| reg.get(x).unwrap());
        assert_eq!(net.weight(a, b), 2);
        assert_eq!(net.weight(c, b), 1);
        assert_eq!(net.retweets_received(b), 3);
        assert_eq!(net.retweets_made(a), 2);
        assert_eq!(net.total_weight(), 3);
    }

    #[test]
    fn duplicates_and_originals() {
        let mut reg = AccountRegistry::new();
        let mut original = rt("2", "z", "");
        original.retweeted_author = None;
        let stream = [rt("1", "a", "b"), rt("1", "a", "b"), original];
        let net = build_network("#afd", &stream, &mut reg);
        assert_eq!(net.duplicates, 1);
        assert_eq!(net.original_tweets, 1);
        assert_eq!(net.total_weight(), 1);
        let z = reg.get("z").unwrap();
        assert!(net.contains(z));
        assert_eq!(net.retweets_made(z) + net.retweets_received(z), 0);
    }

    #[test]
    fn empty_stream_gives_empty_network() {
        let mut reg = AccountRegistry::new();
        let net = build_network("#afd", &[], &mut reg);
        assert_eq!(net.node_count(), 0);
        assert_eq!(undirected_projection(&net).node_count(), 0);
    }

    #[test]
    fn projection_sums_both_directions() {
        let mut reg = AccountRegistry::new();
        let stream = [rt("1", "a", "b"), rt("2", "a", "b"), rt("3", "b", "a")];
        let net = build_network("#afd", &stream, &mut reg);
        let g = undirected_projection(&net);
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.weight(0, 1), 3.0);
        assert_eq!(g.weight(1, 0), 3.0);
        assert_eq!(g.total_weight(), 3.0);
    }

    #[test]
    fn edgeless_projection() {
        let mut net = RetweetNetwork::empty("#x");
        net.add_node(4);
        net.add_node(7);
        let g = undirected_projection(&net);
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edges().count(), 0);
        assert_eq!(g.total_weight(), 0.0);
    }

    #[test]
    fn registry_shared_across_networks() {
        let mut reg = AccountRegistry::new();
        let n1 = build_network("#afd", &[rt("1", "x", "y")], &mut reg);
        let n2 = build_network("#spd", &[rt("2", "w", "x")], &mut reg);
        let x = reg.get("x").unwrap();
        assert!(n1.contains(x) && n2.contains(x));
        assert_eq!(reg.len(), 3);
    }

    #[test]
    fn canonicalize_sorts_and_remaps() {
        let mut reg = AccountRegistry::new();
        let net = build_network("#afd", &[rt("1", "zed", "amy")], &mut reg);
        let (sorted, remap) = reg.canonicalize();
        assert_eq!(sorted.names(), ["amy", "zed"]);
        let moved = net.remap(&remap);
        assert_eq!(moved.weight(sorted.get("zed").unwrap(), sorted.get("amy").unwrap()), 1);
    }

    #[test]
    fn network_json_round_trip() {
        let mut reg = AccountRegistry::new();
        let net = build_network("#afd", &[rt("1", "a", "b"), rt("2", "c", "b")], &mut reg);
        let json = serde_json::to_string(&net).unwrap();
        let back: RetweetNetwork = serde_json::from_str(&json).unwrap();
        assert_eq!(back, net);
        let reg_json = serde_json::to_string(&reg).unwrap();
        assert_eq!(serde_json::from_str::<AccountRegistry>(&reg_json).unwrap(), reg);
    }

    #[test]
    fn aggregate_preserves_total_weight() {
        let g = UndirectedGraph::from_edges(4, &[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 3, 0.5)]);
        let agg = g.aggregate(&[0, 0, 1, 1], 2);
        assert_eq!(agg.total_weight(), g.total_weight());
        assert_eq!(agg.self_loop(0), 1.0);
        assert_eq!(agg.self_loop(1), 1.5);
        assert_eq!(agg.weight(0, 1), 2.0);
        assert_eq!(agg.degree(0) + agg.degree(1), 2.0 * g.total_weight());
    }
}
