//! Synthetic multi-hashtag retweet corpora with planted structure.
//!
//! Every party hashtag network has two planted clusters: the party's
//! partisans (pro) and an opposing group (contra). Every public hashtag
//! network has a mainstream cluster and a contra cluster. Partisans take
//! part in public networks; a fixed fraction of those participants (the
//! hijack rate) is planted in the public network's contra cluster, the rest
//! in its mainstream cluster.
//!
//! Activity: each group of accounts gets an event budget. Every account
//! receives `min_events`, and the remainder is split multinomially with
//! Zipf rank weights `r^-s`; counts are then sorted so rank 1 is the most
//! active. An account makes that many retweets in every network it takes
//! part in. A retweet stays in the actor's own cluster with probability
//! `p_in / (p_in + p_out)` and picks an account there in proportion to its
//! activity. Planted hijackers retweet a uniformly chosen member of the
//! contra cluster instead.
//!
//! Participation and hijacking use exact counts (`round(rate · n)`
//! accounts, chosen at random), so realized rates match the configuration
//! up to rounding.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use chrono::{DateTime, Duration, Utc};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::UndirectedGraph;
use crate::hashjack::ContingencyTable2x2;
use crate::ingest::{normalize_hashtag, TweetRecord};
use crate::labeling::{LabelSpec, SeedLists};

/// Recorded in ground truth so consumers know which generator produced it.
pub const GENERATOR_VERSION: &str = "hashjack-synth/1 chacha8";

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("infeasible configuration: {0}")]
    Infeasible(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartyGroup {
    pub name: String,
    pub partisans: usize,
    pub contra: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicGroup {
    pub name: String,
    pub pro: usize,
    pub contra: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityConfig {
    /// Zipf exponent `s > 0` of the rank weights.
    pub zipf_exponent: f64,
    /// Event budget per account of a group (group budget = this × size).
    pub events_per_account: f64,
    /// Events every account gets before the Zipf split.
    #[serde(default = "default_min_events")]
    pub min_events: u32,
}

fn default_min_events() -> u32 {
    1
}

impl Default for ActivityConfig {
    fn default() -> Self {
        ActivityConfig {
            zipf_exponent: 1.3,
            events_per_account: 4.0,
            min_events: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mixing {
    pub p_in: f64,
    pub p_out: f64,
}

impl Mixing {
    fn own_cluster_probability(&self) -> f64 {
        self.p_in / (self.p_in + self.p_out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub parties: Vec<PartyGroup>,
    #[serde(default)]
    pub public_hashtags: Vec<PublicGroup>,
    #[serde(default)]
    pub activity: ActivityConfig,
    pub mixing: Mixing,
    /// party → public hashtag → fraction of participating partisans planted
    /// in the public network's contra cluster. Missing pairs are 0.
    #[serde(default)]
    pub hijack: BTreeMap<String, BTreeMap<String, f64>>,
    /// Fraction of each party's partisans taking part in each public network.
    #[serde(default = "default_participation")]
    pub participation: f64,
    #[serde(default = "default_start")]
    pub start: DateTime<Utc>,
    /// Extra untracked hashtags occasionally attached to events.
    #[serde(default)]
    pub noise_hashtags: Vec<String>,
    #[serde(default)]
    pub noise_rate: f64,
}

fn default_participation() -> f64 {
    1.0
}

fn default_start() -> DateTime<Utc> {
    "2020-05-28T00:00:00Z".parse().expect("valid constant")
}

impl SynthConfig {
    pub fn hijack_rate(&self, party: &str, target: &str) -> f64 {
        self.hijack
            .get(party)
            .and_then(|m| m.get(target))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let invalid = |m: String| Err(SynthError::Invalid(m));
        let prob = |name: &str, p: f64| -> Result<(), SynthError> {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(SynthError::Invalid(format!("{name} = {p} outside [0, 1]")))
            }
        };
        prob("p_in", self.mixing.p_in)?;
        prob("p_out", self.mixing.p_out)?;
        prob("participation", self.participation)?;
        prob("noise_rate", self.noise_rate)?;
        if self.mixing.p_in <= self.mixing.p_out {
            return invalid(format!(
                "p_in ({}) must exceed p_out ({})",
                self.mixing.p_in, self.mixing.p_out
            ));
        }
        if !(self.activity.zipf_exponent > 0.0 && self.activity.zipf_exponent.is_finite()) {
            return invalid(format!("zipf exponent {} must be positive", self.activity.zipf_exponent));
        }
        if !(self.activity.events_per_account >= 0.0 && self.activity.events_per_account.is_finite()) {
            return invalid("events_per_account must be non-negative".into());
        }
        if self.parties.is_empty() {
            return invalid("at least one party is required".into());
        }
        let mut names = HashSet::new();
        let all_names = self
            .parties
            .iter()
            .map(|p| &p.name)
            .chain(self.public_hashtags.iter().map(|p| &p.name))
            .chain(self.noise_hashtags.iter());
        for name in all_names {
            let norm = normalize_hashtag(name).map_err(|e| SynthError::Invalid(e.to_string()))?;
            if &norm != name {
                return invalid(format!("hashtag {name:?} must be given normalized as {norm:?}"));
            }
            if !names.insert(norm) {
                return invalid(format!("hashtag {name} used twice"));
            }
        }
        for (party, targets) in &self.hijack {
            if !self.parties.iter().any(|p| &p.name == party) {
                return invalid(format!("hijack rate for unknown party {party}"));
            }
            for (target, &h) in targets {
                if !self.public_hashtags.iter().any(|p| &p.name == target) {
                    return invalid(format!("hijack rate for unknown public hashtag {target}"));
                }
                prob("hijack rate", h)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Partisan,
    PartyContra,
    PublicPro,
    PublicContra,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthAccount {
    pub id: String,
    /// Hashtag of the group the account was generated for.
    pub group: String,
    pub role: Role,
    /// 1-based activity rank within the group.
    pub rank: usize,
    /// Events made in each network the account takes part in.
    pub events: u32,
    /// Retweets made, summed over networks.
    pub made: u64,
    /// Times retweeted, summed over networks.
    pub received: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkKind {
    Party,
    Public,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkTruth {
    pub hashtag: String,
    pub kind: NetworkKind,
    /// Planted pro (party) or mainstream (public) cluster, accounts that
    /// appear in the emitted network only.
    pub pro: BTreeSet<String>,
    pub contra: BTreeSet<String>,
    pub events: u64,
    /// Retweets made by members of each planted cluster.
    pub pro_volume: u64,
    pub contra_volume: u64,
    /// Public networks: planted hijackers per party.
    #[serde(default)]
    pub hijackers: BTreeMap<String, BTreeSet<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizedTable {
    pub party: String,
    pub target: String,
    pub planted_rate: f64,
    pub table: ContingencyTable2x2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub generator: String,
    pub seed: u64,
    pub accounts: Vec<TruthAccount>,
    pub networks: Vec<NetworkTruth>,
    /// Per (party, public hashtag) table over planted memberships.
    pub tables: Vec<RealizedTable>,
}

impl GroundTruth {
    pub fn network(&self, hashtag: &str) -> Option<&NetworkTruth> {
        self.networks.iter().find(|n| n.hashtag == hashtag)
    }

    pub fn table(&self, party: &str, target: &str) -> Option<&RealizedTable> {
        self.tables
            .iter()
            .find(|t| t.party == party && t.target == target)
    }

    /// Planted partisans of a party (accounts in its network's pro cluster).
    pub fn partisans(&self, party: &str) -> BTreeSet<String> {
        self.network(party).map(|n| n.pro.clone()).unwrap_or_default()
    }

    pub fn account(&self, id: &str) -> Option<&TruthAccount> {
        self.accounts.iter().find(|a| a.id == id)
    }

    /// Label specs seeding each network with the `k` most active accounts
    /// of each planted cluster.
    pub fn label_specs(&self, k: usize) -> Vec<LabelSpec> {
        let events: HashMap<&str, u32> = self.accounts.iter().map(|a| (a.id.as_str(), a.events)).collect();
        let top = |set: &BTreeSet<String>| -> BTreeSet<String> {
            let mut v: Vec<&String> = set.iter().collect();
            v.sort_by(|a, b| {
                events
                    .get(b.as_str())
                    .cmp(&events.get(a.as_str()))
                    .then_with(|| a.cmp(b))
            });
            v.into_iter().take(k).cloned().collect()
        };
        self.networks
            .iter()
            .map(|n| LabelSpec {
                network: n.hashtag.clone(),
                labels: BTreeMap::new(),
                seeds: Some(SeedLists {
                    pro: top(&n.pro),
                    contra: top(&n.contra),
                }),
            })
            .collect()
    }
}

/// Zipf rank weights `r^-s` for ranks `1..=n`.
pub fn zipf_weights(n: usize, s: f64) -> Vec<f64> {
    (1..=n).map(|r| (r as f64).powf(-s)).collect()
}

/// Splits `budget` events over `n` accounts: `min_events` each, the rest
/// multinomially by Zipf weight, sorted descending.
pub fn allocate_activity<R: Rng>(
    n: usize,
    activity: &ActivityConfig,
    rng: &mut R,
) -> Vec<u32> {
    if n == 0 {
        return Vec::new();
    }
    let budget = (activity.events_per_account * n as f64).round() as u64;
    let floor = u64::from(activity.min_events) * n as u64;
    let mut remaining = budget.saturating_sub(floor);
    let weights = zipf_weights(n, activity.zipf_exponent);
    let mut weight_left: f64 = weights.iter().sum();
    let mut counts = vec![activity.min_events; n];
    for (i, w) in weights.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let x = if i + 1 == n {
            remaining
        } else {
            let p = (w / weight_left).clamp(0.0, 1.0);
            Binomial::new(remaining, p)
                .expect("valid binomial parameters")
                .sample(rng)
        };
        counts[i] += u32::try_from(x).expect("event count fits u32");
        remaining -= x;
        weight_left -= w;
    }
    counts.sort_unstable_by(|a, b| b.cmp(a));
    counts
}

/// Expected top-`q` share of activity for an allocation with these
/// parameters (before multinomial noise).
pub fn expected_top_share(n: usize, activity: &ActivityConfig, q: f64) -> f64 {
    let weights = zipf_weights(n, activity.zipf_exponent);
    let total_w: f64 = weights.iter().sum();
    let floor = f64::from(activity.min_events);
    let extra = (activity.events_per_account * n as f64 - floor * n as f64).max(0.0);
    let k = crate::metrics::head_size(q, n);
    let head: f64 = weights[..k].iter().map(|w| floor + extra * w / total_w).sum();
    let all = floor * n as f64 + extra;
    head / all
}

/// Finds `(zipf_exponent, events_per_account)` whose expected activity
/// curve over `n` accounts passes through `(q1, share1)` and `(q2, share2)`
/// with `q1 < q2`, keeping `min_events` fixed.
pub fn calibrate_activity(
    n: usize,
    min_events: u32,
    (q1, share1): (f64, f64),
    (q2, share2): (f64, f64),
) -> Result<ActivityConfig, SynthError> {
    if min_events == 0 {
        return Err(SynthError::Invalid("calibration needs min_events >= 1".into()));
    }
    let floor = f64::from(min_events);
    let k1 = crate::metrics::head_size(q1, n) as f64;
    // For a given exponent, the first target fixes the extra budget:
    // (k1·floor + R·F1) / (n·floor + R) = share1.
    let solve = |s: f64| -> Option<ActivityConfig> {
        let w = zipf_weights(n, s);
        let total: f64 = w.iter().sum();
        let f1: f64 = w[..k1 as usize].iter().sum::<f64>() / total;
        if f1 <= share1 {
            return None;
        }
        let extra = (share1 * n as f64 * floor - k1 * floor) / (f1 - share1);
        if extra < 0.0 {
            return None;
        }
        Some(ActivityConfig {
            zipf_exponent: s,
            events_per_account: floor + extra / n as f64,
            min_events,
        })
    };
    let second = |s: f64| solve(s).map(|a| expected_top_share(n, &a, q2) - share2);
    // the second-point share grows with the exponent; bisect on it
    let (mut lo, mut hi) = (0.05, 6.0);
    while second(lo).is_none() && lo < hi {
        lo += 0.05;
    }
    let (Some(f_lo), Some(f_hi)) = (second(lo), second(hi)) else {
        return Err(SynthError::Infeasible("no exponent reaches the first target".into()));
    };
    if f_lo.signum() == f_hi.signum() {
        return Err(SynthError::Infeasible(format!(
            "targets ({q1}, {share1}) and ({q2}, {share2}) are not reachable"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        match second(mid) {
            Some(f) if f.signum() == f_lo.signum() => lo = mid,
            Some(_) => hi = mid,
            None => lo = mid,
        }
    }
    solve(0.5 * (lo + hi)).ok_or_else(|| SynthError::Infeasible("calibration diverged".into()))
}

struct Account {
    id: String,
    group: String,
    role: Role,
    rank: usize,
    events: u32,
}

/// Two planted clusters of one network, as account indices.
struct NetworkPlan {
    hashtag: String,
    kind: NetworkKind,
    clusters: [Vec<usize>; 2],
    /// Members whose in-cluster retweets go uniformly to the contra cluster.
    hijackers: BTreeMap<String, Vec<usize>>,
}

fn id_stem(hashtag: &str) -> &str {
    hashtag.trim_start_matches('#')
}

fn make_group<R: Rng>(
    accounts: &mut Vec<Account>,
    hashtag: &str,
    suffix: &str,
    role: Role,
    n: usize,
    activity: &ActivityConfig,
    rng: &mut R,
) -> Vec<usize> {
    let counts = allocate_activity(n, activity, rng);
    let start = accounts.len();
    for (i, events) in counts.into_iter().enumerate() {
        accounts.push(Account {
            id: format!("{}_{suffix}_{:06}", id_stem(hashtag), i + 1),
            group: hashtag.to_string(),
            role,
            rank: i + 1,
            events,
        });
    }
    (start..start + n).collect()
}

fn exact_count(rate: f64, n: usize) -> usize {
    ((rate * n as f64).round() as usize).min(n)
}

/// Picks `k` of `pool` at random, returned in pool order.
fn choose_exact<R: Rng>(pool: &[usize], k: usize, rng: &mut R) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    idx.shuffle(rng);
    let mut picked: Vec<usize> = idx[..k].to_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| pool[i]).collect()
}

fn check_feasible(plan: &NetworkPlan, accounts: &[Account], own_p: f64) -> Result<(), SynthError> {
    for (ci, cluster) in plan.clusters.iter().enumerate() {
        let other = &plan.clusters[1 - ci];
        let active = cluster.iter().any(|&a| accounts[a].events > 0);
        if !active {
            continue;
        }
        let own_ok = cluster.len() >= 2;
        let other_ok = !other.is_empty() && own_p < 1.0;
        if !own_ok && !other_ok {
            return Err(SynthError::Infeasible(format!(
                "network {}: cluster {} has a single member and no valid retweet target",
                plan.hashtag,
                if ci == 0 { "pro" } else { "contra" }
            )));
        }
    }
    Ok(())
}

/// Generates a corpus and its ground truth. Deterministic in `config.seed`.
pub fn generate(config: &SynthConfig) -> Result<(Vec<TweetRecord>, GroundTruth), SynthError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let act = &config.activity;

    let mut accounts: Vec<Account> = Vec::new();
    let mut partisans: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut plans: Vec<NetworkPlan> = Vec::new();
    for party in &config.parties {
        let pro = make_group(&mut accounts, &party.name, "p", Role::Partisan, party.partisans, act, &mut rng);
        let contra = make_group(&mut accounts, &party.name, "c", Role::PartyContra, party.contra, act, &mut rng);
        partisans.insert(&party.name, pro.clone());
        plans.push(NetworkPlan {
            hashtag: party.name.clone(),
            kind: NetworkKind::Party,
            clusters: [pro, contra],
            hijackers: BTreeMap::new(),
        });
    }
    for public in &config.public_hashtags {
        let mut main = make_group(&mut accounts, &public.name, "m", Role::PublicPro, public.pro, act, &mut rng);
        let mut contra =
            make_group(&mut accounts, &public.name, "c", Role::PublicContra, public.contra, act, &mut rng);
        let mut hijackers = BTreeMap::new();
        for party in &config.parties {
            let pool = &partisans[party.name.as_str()];
            let joined = choose_exact(pool, exact_count(config.participation, pool.len()), &mut rng);
            let h = config.hijack_rate(&party.name, &public.name);
            let hijack = choose_exact(&joined, exact_count(h, joined.len()), &mut rng);
            let hijack_set: HashSet<usize> = hijack.iter().copied().collect();
            for a in joined {
                if hijack_set.contains(&a) {
                    contra.push(a);
                } else {
                    main.push(a);
                }
            }
            hijackers.insert(party.name.clone(), hijack);
        }
        plans.push(NetworkPlan {
            hashtag: public.name.clone(),
            kind: NetworkKind::Public,
            clusters: [main, contra],
            hijackers,
        });
    }

    let own_p = config.mixing.own_cluster_probability();
    for plan in &plans {
        check_feasible(plan, &accounts, own_p)?;
    }

    let mut records: Vec<TweetRecord> = Vec::new();
    let mut made = vec![0u64; accounts.len()];
    let mut received = vec![0u64; accounts.len()];
    let mut truths = Vec::new();
    for plan in &plans {
        let samplers: Vec<Option<WeightedIndex<u64>>> = plan
            .clusters
            .iter()
            .map(|c| WeightedIndex::new(c.iter().map(|&a| u64::from(accounts[a].events).max(1))).ok())
            .collect();
        let hijackers: HashSet<usize> = plan.hijackers.values().flatten().copied().collect();
        let mut appears: HashSet<usize> = HashSet::new();
        let mut volume = [0u64; 2];
        let mut net_events = 0u64;
        for (ci, cluster) in plan.clusters.iter().enumerate() {
            for &actor in cluster {
                for _ in 0..accounts[actor].events {
                    let own_ok = cluster.len() >= 2;
                    let other_ok = !plan.clusters[1 - ci].is_empty();
                    let stay = if own_ok && other_ok {
                        rng.random_bool(own_p)
                    } else {
                        own_ok
                    };
                    let (tc, target_cluster) = if stay {
                        (ci, cluster)
                    } else {
                        (1 - ci, &plan.clusters[1 - ci])
                    };
                    let uniform = stay && ci == 1 && hijackers.contains(&actor);
                    let target = loop {
                        let pick = if uniform {
                            target_cluster[rng.random_range(0..target_cluster.len())]
                        } else {
                            let sampler = samplers[tc].as_ref().expect("non-empty cluster");
                            target_cluster[sampler.sample(&mut rng)]
                        };
                        if pick != actor {
                            break pick;
                        }
                    };
                    let mut hashtags = BTreeSet::from([plan.hashtag.clone()]);
                    if !config.noise_hashtags.is_empty() && rng.random_bool(config.noise_rate) {
                        let noise = config.noise_hashtags.choose(&mut rng).expect("non-empty");
                        hashtags.insert(noise.clone());
                    }
                    let n = records.len();
                    records.push(TweetRecord {
                        tweet_id: format!("{}", n + 1),
                        author: accounts[actor].id.clone(),
                        retweeted_author: Some(accounts[target].id.clone()),
                        hashtags,
                        timestamp: config.start + Duration::seconds(n as i64),
                    });
                    made[actor] += 1;
                    received[target] += 1;
                    volume[ci] += 1;
                    net_events += 1;
                    appears.insert(actor);
                    appears.insert(target);
                }
            }
        }
        let members = |c: &[usize]| -> BTreeSet<String> {
            c.iter()
                .filter(|a| appears.contains(a))
                .map(|&a| accounts[a].id.clone())
                .collect()
        };
        truths.push(NetworkTruth {
            hashtag: plan.hashtag.clone(),
            kind: plan.kind,
            pro: members(&plan.clusters[0]),
            contra: members(&plan.clusters[1]),
            events: net_events,
            pro_volume: volume[0],
            contra_volume: volume[1],
            hijackers: plan
                .hijackers
                .iter()
                .map(|(p, v)| (p.clone(), v.iter().map(|&a| accounts[a].id.clone()).collect()))
                .collect(),
        });
    }

    let mut tables = Vec::new();
    for party in &config.parties {
        let party_truth = truths.iter().find(|t| t.hashtag == party.name).expect("party network");
        for public in &config.public_hashtags {
            let t = truths.iter().find(|t| t.hashtag == public.name).expect("public network");
            let mut table = ContingencyTable2x2::default();
            for (id, in_contra) in t.pro.iter().map(|id| (id, false)).chain(t.contra.iter().map(|id| (id, true))) {
                match (party_truth.pro.contains(id), in_contra) {
                    (true, true) => table.a += 1,
                    (true, false) => table.b += 1,
                    (false, true) => table.c += 1,
                    (false, false) => table.d += 1,
                }
            }
            tables.push(RealizedTable {
                party: party.name.clone(),
                target: public.name.clone(),
                planted_rate: config.hijack_rate(&party.name, &public.name),
                table,
            });
        }
    }

    let truth_accounts = accounts
        .into_iter()
        .enumerate()
        .map(|(i, a)| TruthAccount {
            id: a.id,
            group: a.group,
            role: a.role,
            rank: a.rank,
            events: a.events,
            made: made[i],
            received: received[i],
        })
        .collect();
    Ok((
        records,
        GroundTruth {
            generator: GENERATOR_VERSION.to_string(),
            seed: config.seed,
            accounts: truth_accounts,
            networks: truths,
            tables,
        },
    ))
}

/// Planted-partition random graph: blocks of the given sizes, each pair
/// inside a block linked with probability `p_in`, across blocks `p_out`.
/// Returns the graph and the block of every node.
pub fn planted_partition_graph(
    block_sizes: &[usize],
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> (UndirectedGraph, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks: Vec<usize> = block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &n)| std::iter::repeat_n(b, n))
        .collect();
    let n = blocks.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if blocks[i] == blocks[j] { p_in } else { p_out };
            if rng.random_bool(p) {
                edges.push((i, j, 1.0));
            }
        }
    }
    (UndirectedGraph::from_edges(n, &edges), blocks)
}
