//! Descriptive statistics: polarisation shares, contra-community
//! composition and activity concentration of partisan groups.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::CommunityPartition;
use crate::graph::{AccountIdx, AccountRegistry, RetweetNetwork};
use crate::labeling::{ClusterLabeling, Label, PartisanAssignment};

/// Default |Δ contra share| above which two profiles count as changed.
pub const DEFAULT_SHIFT_THRESHOLD: f64 = 0.05;

pub const DEFAULT_FRACTIONS: [f64; 5] = [0.01, 0.05, 0.10, 0.25, 0.50];

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("group {0} is empty")]
    EmptyGroup(String),
    #[error("group {0} has no retweet activity")]
    NoActivity(String),
    #[error("fraction {0} outside (0, 1]")]
    BadFraction(f64),
    #[error("top_k must be at least 1")]
    ZeroTopK,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    RetweetVolume,
    AccountCount,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarisationProfile {
    pub network: String,
    pub basis: Basis,
    pub share_pro: f64,
    pub share_contra: f64,
    pub share_other: f64,
    /// Pro and contra shares with `other` left out of the denominator;
    /// `None` when neither has any weight.
    pub pro_of_polarised: Option<f64>,
    pub contra_of_polarised: Option<f64>,
    /// Denominator: retweet events or accounts.
    pub total: u64,
}

/// Shares of a network attributed to its pro, contra and other
/// communities.
///
/// With [`Basis::RetweetVolume`] every retweet event counts toward the
/// label of its retweeter's community; with [`Basis::AccountCount`] each
/// account counts once. A network with nothing to count is all `other`.
pub fn polarisation(
    net: &RetweetNetwork,
    partition: &CommunityPartition,
    labeling: &ClusterLabeling,
    basis: Basis,
) -> PolarisationProfile {
    let label_of = |node: AccountIdx| {
        partition
            .community_of(node)
            .map_or(Label::Other, |c| labeling.label_of(c))
    };
    let mut tally: BTreeMap<Label, u64> = BTreeMap::new();
    match basis {
        Basis::RetweetVolume => {
            for node in net.nodes() {
                let made = net.retweets_made(*node);
                if made > 0 {
                    *tally.entry(label_of(*node)).or_insert(0) += made;
                }
            }
        }
        Basis::AccountCount => {
            for node in net.nodes() {
                *tally.entry(label_of(*node)).or_insert(0) += 1;
            }
        }
    }
    let pro = tally.get(&Label::Pro).copied().unwrap_or(0);
    let contra = tally.get(&Label::Contra).copied().unwrap_or(0);
    let other = tally.get(&Label::Other).copied().unwrap_or(0);
    let total = pro + contra + other;
    let (share_pro, share_contra, share_other) = if total == 0 {
        (0.0, 0.0, 1.0)
    } else {
        let t = total as f64;
        (pro as f64 / t, contra as f64 / t, other as f64 / t)
    };
    let polarised = pro + contra;
    PolarisationProfile {
        network: net.hashtag.clone(),
        basis,
        share_pro,
        share_contra,
        share_other,
        pro_of_polarised: (polarised > 0).then(|| pro as f64 / polarised as f64),
        contra_of_polarised: (polarised > 0).then(|| contra as f64 / polarised as f64),
        total,
    }
}

/// Change between two profiles of the same network (e.g. two collection
/// periods).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileShift {
    pub network: String,
    pub delta_pro: f64,
    pub delta_contra: f64,
    pub threshold: f64,
    /// `|delta_contra| > threshold`.
    pub changed: bool,
}

pub fn compare_profiles(
    before: &PolarisationProfile,
    after: &PolarisationProfile,
    threshold: f64,
) -> ProfileShift {
    let delta_contra = after.share_contra - before.share_contra;
    ProfileShift {
        network: after.network.clone(),
        delta_pro: after.share_pro - before.share_pro,
        delta_contra,
        threshold,
        changed: delta_contra.abs() > threshold,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartyComposition {
    pub party: String,
    pub members: usize,
    pub share: f64,
    /// Partisans among the cluster's `top_k` most active retweeters.
    pub top_k_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Composition {
    pub cluster_size: usize,
    pub top_k: usize,
    /// Accounts actually ranked (`min(top_k, cluster_size)`).
    pub top_k_used: usize,
    pub truncated: bool,
    pub parties: Vec<PartyComposition>,
    /// Share of cluster members in no partisan set.
    pub nonpartisan_share: f64,
    /// `(Σ_p |members_p| − |⋃_p members_p|) / cluster_size`: double counting
    /// from accounts in several partisan sets, so that party shares plus
    /// `nonpartisan_share` minus this equals 1.
    pub overlap_excess: f64,
}

/// Partisan make-up of a cluster.
///
/// `activity` is each member's retweets made within the target network;
/// the top-k ranking is by activity descending, ties by account id.
pub fn cluster_composition(
    cluster: &BTreeSet<AccountIdx>,
    partisan_sets: &[PartisanAssignment],
    activity: impl Fn(AccountIdx) -> u64,
    registry: &AccountRegistry,
    top_k: usize,
) -> Result<Composition, MetricsError> {
    if top_k == 0 {
        return Err(MetricsError::ZeroTopK);
    }
    let size = cluster.len();
    let mut ranked: Vec<(u64, &str, AccountIdx)> = cluster
        .iter()
        .map(|&n| (activity(n), registry.name(n).unwrap_or_default(), n))
        .collect();
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    let used = top_k.min(size);
    let top: Vec<AccountIdx> = ranked[..used].iter().map(|r| r.2).collect();

    let share = |count: usize| if size == 0 { 0.0 } else { count as f64 / size as f64 };
    let mut in_any = 0usize;
    let mut counted = 0usize;
    for node in cluster {
        let k = partisan_sets.iter().filter(|p| p.contains(*node)).count();
        if k > 0 {
            in_any += 1;
        }
        counted += k;
    }
    let parties = partisan_sets
        .iter()
        .map(|p| {
            let members = cluster.iter().filter(|n| p.contains(**n)).count();
            PartyComposition {
                party: p.party.clone(),
                members,
                share: share(members),
                top_k_count: top.iter().filter(|n| p.contains(**n)).count(),
            }
        })
        .collect();
    Ok(Composition {
        cluster_size: size,
        top_k,
        top_k_used: used,
        truncated: used < top_k,
        parties,
        nonpartisan_share: if size == 0 { 0.0 } else { share(size - in_any) },
        overlap_excess: share(counted - in_any),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationPoint {
    pub fraction: f64,
    /// `⌈fraction · group size⌉`
    pub accounts: usize,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationCurve {
    pub group: String,
    pub group_size: usize,
    pub total_activity: u64,
    pub points: Vec<ConcentrationPoint>,
}

impl ConcentrationCurve {
    pub fn share_at(&self, fraction: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|p| (p.fraction - fraction).abs() < 1e-12)
            .map(|p| p.share)
    }
}

/// Retweets made plus received by `node`, summed over `nets`.
pub fn activity(node: AccountIdx, nets: &[&RetweetNetwork]) -> u64 {
    nets.iter()
        .map(|n| n.retweets_made(node) + n.retweets_received(node))
        .sum()
}

/// Share of group activity held by its most active members.
///
/// For each fraction `q`, the `⌈q·|group|⌉` most active members are taken
/// (activity descending, ties by account id). Fractions are sorted and
/// `(1.0, 1.0)` closes the curve.
pub fn concentration(
    group: &PartisanAssignment,
    nets: &[&RetweetNetwork],
    registry: &AccountRegistry,
    fractions: &[f64],
) -> Result<ConcentrationCurve, MetricsError> {
    if group.is_empty() {
        return Err(MetricsError::EmptyGroup(group.party.clone()));
    }
    let mut qs: Vec<f64> = Vec::with_capacity(fractions.len() + 1);
    for &q in fractions {
        if !(q > 0.0 && q <= 1.0) {
            return Err(MetricsError::BadFraction(q));
        }
        qs.push(q);
    }
    qs.push(1.0);
    qs.sort_by(f64::total_cmp);
    qs.dedup();

    let mut acts: Vec<(u64, &str)> = group
        .members
        .iter()
        .map(|&n| (activity(n, nets), registry.name(n).unwrap_or_default()))
        .collect();
    acts.sort_by_key(|&(a, name)| (Reverse(a), name));
    let total: u64 = acts.iter().map(|a| a.0).sum();
    if total == 0 {
        return Err(MetricsError::NoActivity(group.party.clone()));
    }
    let mut prefix = Vec::with_capacity(acts.len() + 1);
    prefix.push(0u64);
    for (a, _) in &acts {
        prefix.push(prefix.last().unwrap() + a);
    }
    let n = acts.len();
    let points = qs
        .into_iter()
        .map(|q| {
            let k = head_size(q, n);
            ConcentrationPoint {
                fraction: q,
                accounts: k,
                share: prefix[k] as f64 / total as f64,
            }
        })
        .collect();
    Ok(ConcentrationCurve {
        group: group.party.clone(),
        group_size: n,
        total_activity: total,
        points,
    })
}

/// `⌈q·n⌉`, computed so that float noise in `q·n` cannot add an account.
pub fn head_size(q: f64, n: usize) -> usize {
    let raw = q * n as f64;
    let rounded = raw.round();
    let k = if (raw - rounded).abs() < 1e-9 {
        rounded
    } else {
        raw.ceil()
    };
    (k as usize).clamp(1, n)
}
