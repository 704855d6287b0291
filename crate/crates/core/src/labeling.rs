//! Pro/contra labeling of communities and derived partisan sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::CommunityPartition;
use crate::graph::{AccountIdx, AccountRegistry, RetweetNetwork};

/// Communities below this many accounts are always labeled `other`.
pub const DEFAULT_MIN_COMMUNITY_SIZE: usize = 5;

/// Length of the top-retweeted evidence lists.
pub const DEFAULT_TOP_K: usize = 50;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LabelError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("account {0:?} is in both the pro and the contra seed list")]
    OverlappingSeeds(String),
    #[error("network {0}: no seed account is present, communities are unlabelable")]
    Unlabelable(String),
    #[error("network {network}: no community holds a strict majority of the {matched} matched {label} seeds")]
    NoMajority {
        network: String,
        label: Label,
        matched: usize,
    },
    #[error("network {network}: community {community} wins both the pro and the contra seeds")]
    Conflict { network: String, community: usize },
    #[error("network {network}: more than one community labeled {label}")]
    DuplicateLabel { network: String, label: Label },
    #[error("network {network}: community {community} does not exist")]
    UnknownCommunity { network: String, community: usize },
    #[error("network {0}: no community is labeled pro")]
    NoPro(String),
    #[error("label file is for network {found}, expected {expected}")]
    NetworkMismatch { expected: String, found: String },
    #[error("unknown label {0:?} (expected pro, contra or other)")]
    UnknownLabel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Pro,
    Contra,
    Other,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Pro => "pro",
            Label::Contra => "contra",
            Label::Other => "other",
        })
    }
}

impl FromStr for Label {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pro" => Ok(Label::Pro),
            "contra" => Ok(Label::Contra),
            "other" => Ok(Label::Other),
            other => Err(LabelError::UnknownLabel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelMethod {
    SeedList,
    Manual,
    Hybrid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedAccount {
    pub account: String,
    pub index: AccountIdx,
    pub retweets_received: u64,
}

/// Most retweeted accounts of one community.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityEvidence {
    pub community: usize,
    pub size: usize,
    pub total_received: u64,
    pub top: Vec<RankedAccount>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterLabeling {
    pub network: String,
    pub labels: BTreeMap<usize, Label>,
    pub method: LabelMethod,
    #[serde(default)]
    pub evidence: Vec<CommunityEvidence>,
}

impl ClusterLabeling {
    pub fn community_with(&self, label: Label) -> Option<usize> {
        self.labels
            .iter()
            .find(|(_, &l)| l == label)
            .map(|(&c, _)| c)
    }

    pub fn pro(&self) -> Option<usize> {
        self.community_with(Label::Pro)
    }

    pub fn contra(&self) -> Option<usize> {
        self.community_with(Label::Contra)
    }

    pub fn label_of(&self, community: usize) -> Label {
        self.labels.get(&community).copied().unwrap_or(Label::Other)
    }

    /// At most one pro and one contra community.
    pub fn validate(&self) -> Result<(), LabelError> {
        for label in [Label::Pro, Label::Contra] {
            if self.labels.values().filter(|&&l| l == label).count() > 1 {
                return Err(LabelError::DuplicateLabel {
                    network: self.network.clone(),
                    label,
                });
            }
        }
        Ok(())
    }

    /// Members of the community carrying `label`, empty if there is none.
    pub fn members_with(&self, partition: &CommunityPartition, label: Label) -> BTreeSet<AccountIdx> {
        match self.community_with(label) {
            Some(c) => partition.members(c).into_iter().collect(),
            None => BTreeSet::new(),
        }
    }
}

/// Per community, its `k` most retweeted members.
///
/// Ranking uses each account's retweets received in `net`, descending, with
/// ties broken by account id.
pub fn top_retweeted(
    net: &RetweetNetwork,
    partition: &CommunityPartition,
    registry: &AccountRegistry,
    k: usize,
) -> Result<Vec<CommunityEvidence>, LabelError> {
    if k == 0 {
        return Err(LabelError::ZeroK);
    }
    let mut report = Vec::new();
    for (community, members) in partition.communities().into_iter().enumerate() {
        let mut rows: Vec<RankedAccount> = members
            .iter()
            .map(|&idx| RankedAccount {
                account: registry.name(idx).unwrap_or_default().to_string(),
                index: idx,
                retweets_received: net.retweets_received(idx),
            })
            .collect();
        rows.sort_by(|a, b| {
            b.retweets_received
                .cmp(&a.retweets_received)
                .then_with(|| a.account.cmp(&b.account))
        });
        let total_received = rows.iter().map(|r| r.retweets_received).sum();
        rows.truncate(k);
        report.push(CommunityEvidence {
            community,
            size: members.len(),
            total_received,
            top: rows,
        });
    }
    Ok(report)
}

/// Community holding a strict majority of `seeds`, among communities of
/// at least `min_size` members. `Ok(None)` when no seed is present.
fn majority_community(
    network: &str,
    partition: &CommunityPartition,
    registry: &AccountRegistry,
    seeds: &BTreeSet<String>,
    label: Label,
    sizes: &[usize],
    min_size: usize,
) -> Result<Option<usize>, LabelError> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    let mut matched = 0;
    for seed in seeds {
        if let Some(c) = registry.get(seed).and_then(|idx| partition.community_of(idx)) {
            matched += 1;
            *counts.entry(c).or_insert(0) += 1;
        }
    }
    if matched == 0 {
        return Ok(None);
    }
    counts
        .into_iter()
        .find(|&(c, n)| 2 * n > matched && sizes[c] >= min_size)
        .map(|(c, _)| Some(c))
        .ok_or(LabelError::NoMajority {
            network: network.to_string(),
            label,
            matched,
        })
}

/// Labels communities from seed account lists.
///
/// The community holding a strict majority of the matched pro seeds is
/// labeled pro, likewise for contra; everything else is `other`.
pub fn label_by_seeds(
    partition: &CommunityPartition,
    registry: &AccountRegistry,
    pro_seeds: &BTreeSet<String>,
    contra_seeds: &BTreeSet<String>,
    min_size: usize,
) -> Result<ClusterLabeling, LabelError> {
    if let Some(both) = pro_seeds.intersection(contra_seeds).next() {
        return Err(LabelError::OverlappingSeeds(both.clone()));
    }
    let network = partition.network.clone();
    let sizes: Vec<usize> = partition.communities().iter().map(Vec::len).collect();
    let pro = majority_community(&network, partition, registry, pro_seeds, Label::Pro, &sizes, min_size)?;
    let contra = majority_community(
        &network,
        partition,
        registry,
        contra_seeds,
        Label::Contra,
        &sizes,
        min_size,
    )?;
    if pro.is_none() && contra.is_none() {
        return Err(LabelError::Unlabelable(network));
    }
    if let (Some(p), Some(c)) = (pro, contra) {
        if p == c {
            return Err(LabelError::Conflict {
                network,
                community: p,
            });
        }
    }
    let mut labels: BTreeMap<usize, Label> = (0..sizes.len()).map(|c| (c, Label::Other)).collect();
    if let Some(p) = pro {
        labels.insert(p, Label::Pro);
    }
    if let Some(c) = contra {
        labels.insert(c, Label::Contra);
    }
    Ok(ClusterLabeling {
        network,
        labels,
        method: LabelMethod::SeedList,
        evidence: Vec::new(),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedLists {
    #[serde(default)]
    pub pro: BTreeSet<String>,
    #[serde(default)]
    pub contra: BTreeSet<String>,
}

/// One entry of a `labels.json` file.
///
/// `labels` keys are community ids; values are `"pro"`, `"contra"` or
/// `"other"`. With seeds present the seed rule runs first and `labels`
/// overrides its result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSpec {
    pub network: String,
    #[serde(default)]
    pub labels: BTreeMap<usize, Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<SeedLists>,
}

/// `labels.json` holds either one spec or a list of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum LabelFile {
    One(LabelSpec),
    Many(Vec<LabelSpec>),
}

// Untagged enums buffer their input, which loses the integer parsing of
// map keys, so dispatch on the JSON shape by hand.
impl<'de> Deserialize<'de> for LabelFile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let value = serde_json::Value::deserialize(d)?;
        if value.is_array() {
            serde_json::from_value(value).map(LabelFile::Many).map_err(D::Error::custom)
        } else {
            serde_json::from_value(value).map(LabelFile::One).map_err(D::Error::custom)
        }
    }
}

impl LabelFile {
    pub fn into_specs(self) -> Vec<LabelSpec> {
        match self {
            LabelFile::One(s) => vec![s],
            LabelFile::Many(v) => v,
        }
    }
}

/// Applies a label spec to a partition: seeds first (if any), then the
/// manual overrides. Communities in neither stay `other`.
pub fn apply_label_spec(
    spec: &LabelSpec,
    partition: &CommunityPartition,
    registry: &AccountRegistry,
    min_size: usize,
) -> Result<ClusterLabeling, LabelError> {
    if spec.network != partition.network {
        return Err(LabelError::NetworkMismatch {
            expected: partition.network.clone(),
            found: spec.network.clone(),
        });
    }
    let count = partition.community_count();
    for label in [Label::Pro, Label::Contra] {
        if spec.labels.values().filter(|&&l| l == label).count() > 1 {
            return Err(LabelError::DuplicateLabel {
                network: spec.network.clone(),
                label,
            });
        }
    }
    let mut labeling = match &spec.seeds {
        Some(seeds) => label_by_seeds(partition, registry, &seeds.pro, &seeds.contra, min_size)?,
        None => ClusterLabeling {
            network: partition.network.clone(),
            labels: (0..count).map(|c| (c, Label::Other)).collect(),
            method: LabelMethod::Manual,
            evidence: Vec::new(),
        },
    };
    if !spec.labels.is_empty() {
        for (&community, &label) in &spec.labels {
            if community >= count {
                return Err(LabelError::UnknownCommunity {
                    network: partition.network.clone(),
                    community,
                });
            }
            if label != Label::Other {
                // an override moves the label, it does not duplicate it
                for l in labeling.labels.values_mut() {
                    if *l == label {
                        *l = Label::Other;
                    }
                }
            }
            labeling.labels.insert(community, label);
        }
        if spec.seeds.is_some() {
            labeling.method = LabelMethod::Hybrid;
        }
    }
    labeling.validate()?;
    Ok(labeling)
}

/// Members of a party network's pro community.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartisanAssignment {
    pub party: String,
    pub members: BTreeSet<AccountIdx>,
}

impl PartisanAssignment {
    pub fn contains(&self, idx: AccountIdx) -> bool {
        self.members.contains(&idx)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub fn partisans(
    labeling: &ClusterLabeling,
    partition: &CommunityPartition,
) -> Result<PartisanAssignment, LabelError> {
    let pro = labeling
        .pro()
        .ok_or_else(|| LabelError::NoPro(labeling.network.clone()))?;
    Ok(PartisanAssignment {
        party: labeling.network.clone(),
        members: partition.members(pro).into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Accounts "a0".."a{n-1}", account i in community `comms[i]`.
    fn setup(comms: &[usize]) -> (CommunityPartition, AccountRegistry) {
        let mut reg = AccountRegistry::new();
        let mut assignment = BTreeMap::new();
        for (i, &c) in comms.iter().enumerate() {
            assignment.insert(reg.intern(&format!("a{i}")), c);
        }
        let partition = CommunityPartition {
            network: "#afd".into(),
            seed: 42,
            resolution: 1.0,
            modularity: 0.0,
            levels: 1,
            level_modularity: vec![],
            assignment,
        };
        (partition, reg)
    }

    fn seeds(ids: &[usize]) -> BTreeSet<String> {
        ids.iter().map(|i| format!("a{i}")).collect()
    }

    #[test]
    fn seeds_in_separate_communities() {
        let (p, reg) = setup(&[0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);
        let l = label_by_seeds(&p, &reg, &seeds(&[0, 1, 2]), &seeds(&[5, 6]), 5).unwrap();
        assert_eq!(l.labels[&0], Label::Pro);
        assert_eq!(l.labels[&1], Label::Contra);
        assert_eq!(l.method, LabelMethod::SeedList);
    }

    #[test]
    fn split_seeds_have_no_majority() {
        let (p, reg) = setup(&[0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);
        let err = label_by_seeds(&p, &reg, &seeds(&[0, 5]), &BTreeSet::new(), 5).unwrap_err();
        assert!(matches!(err, LabelError::NoMajority { matched: 2, .. }));
    }

    #[test]
    fn unmatched_seeds_are_unlabelable() {
        let (p, reg) = setup(&[0, 0, 0, 0, 0]);
        let none: BTreeSet<String> = ["ghost".to_string()].into();
        assert!(matches!(
            label_by_seeds(&p, &reg, &none, &BTreeSet::new(), 5),
            Err(LabelError::Unlabelable(_))
        ));
    }

    #[test]
    fn same_community_wins_both() {
        let (p, reg) = setup(&[0, 0, 0, 0, 0, 1]);
        assert!(matches!(
            label_by_seeds(&p, &reg, &seeds(&[0, 1]), &seeds(&[2, 3]), 5),
            Err(LabelError::Conflict { community: 0, .. })
        ));
    }

    #[test]
    fn overlapping_seed_lists_rejected() {
        let (p, reg) = setup(&[0, 0, 0, 0, 0]);
        assert!(matches!(
            label_by_seeds(&p, &reg, &seeds(&[0]), &seeds(&[0]), 5),
            Err(LabelError::OverlappingSeeds(_))
        ));
    }

    #[test]
    fn small_communities_cannot_win() {
        let (p, reg) = setup(&[0, 0, 0, 0, 0, 1, 1]);
        let err = label_by_seeds(&p, &reg, &seeds(&[0]), &seeds(&[5, 6]), 5).unwrap_err();
        assert!(matches!(err, LabelError::NoMajority { label: Label::Contra, .. }));
        let ok = label_by_seeds(&p, &reg, &seeds(&[0]), &seeds(&[5, 6]), 2).unwrap();
        assert_eq!(ok.contra(), Some(1));
    }

    #[test]
    fn partisans_are_the_pro_community() {
        let (p, reg) = setup(&[1, 1, 1, 0, 0, 0, 0, 0]);
        let l = label_by_seeds(&p, &reg, &seeds(&[0]), &seeds(&[3]), 3).unwrap();
        let set = partisans(&l, &p).unwrap();
        let expected: BTreeSet<_> = ["a0", "a1", "a2"].iter().map(|a| reg.get(a).unwrap()).collect();
        assert_eq!(set.members, expected);
        assert_eq!(set.party, "#afd");
    }

    #[test]
    fn override_moves_pro_label() {
        let (p, reg) = setup(&[0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2]);
        let spec = LabelSpec {
            network: "#afd".into(),
            labels: [(2, Label::Pro)].into(),
            seeds: Some(SeedLists {
                pro: seeds(&[0]),
                contra: seeds(&[5]),
            }),
        };
        let l = apply_label_spec(&spec, &p, &reg, 5).unwrap();
        assert_eq!(l.pro(), Some(2));
        assert_eq!(l.labels[&0], Label::Other);
        assert_eq!(l.contra(), Some(1));
        assert_eq!(l.method, LabelMethod::Hybrid);
        let set = partisans(&l, &p).unwrap();
        assert_eq!(set.len(), 5);
        assert!(set.contains(reg.get("a10").unwrap()));
    }

    #[test]
    fn manual_labels_validated() {
        let (p, reg) = setup(&[0, 1]);
        let spec = LabelSpec {
            network: "#afd".into(),
            labels: [(0, Label::Contra), (1, Label::Contra)].into(),
            seeds: None,
        };
        assert!(matches!(
            apply_label_spec(&spec, &p, &reg, 5),
            Err(LabelError::DuplicateLabel { .. })
        ));
        let bad = LabelSpec {
            network: "#afd".into(),
            labels: [(9, Label::Pro)].into(),
            seeds: None,
        };
        assert!(matches!(
            apply_label_spec(&bad, &p, &reg, 5),
            Err(LabelError::UnknownCommunity { .. })
        ));
    }

    #[test]
    fn no_pro_label_is_error() {
        let (p, reg) = setup(&[0, 0, 0, 0, 0]);
        let l = label_by_seeds(&p, &reg, &BTreeSet::new(), &seeds(&[0]), 5).unwrap();
        assert!(matches!(partisans(&l, &p), Err(LabelError::NoPro(_))));
    }

    #[test]
    fn top_retweeted_ranks_and_truncates() {
        let mut reg = AccountRegistry::new();
        let [a, b, c, d] = ["a", "b", "c", "d"].map(|x| reg.intern(x));
        let mut net = RetweetNetwork::empty("#afd");
        net.add_retweets(a, b, 3);
        net.add_retweets(c, b, 1);
        net.add_retweets(b, c, 1);
        net.add_retweets(b, d, 1);
        let partition = CommunityPartition {
            network: "#afd".into(),
            seed: 1,
            resolution: 1.0,
            modularity: 0.0,
            levels: 1,
            level_modularity: vec![],
            assignment: [(a, 0), (b, 0), (c, 0), (d, 1)].into(),
        };
        let report = top_retweeted(&net, &partition, &reg, 50).unwrap();
        assert_eq!(report[0].top.len(), 3);
        let order: Vec<_> = report[0].top.iter().map(|r| r.account.as_str()).collect();
        assert_eq!(order, ["b", "c", "a"]);
        assert_eq!(report[0].total_received, 5);
        let two = top_retweeted(&net, &partition, &reg, 2).unwrap();
        assert_eq!(two[0].top.len(), 2);
        assert_eq!(top_retweeted(&net, &partition, &reg, 0), Err(LabelError::ZeroK));
    }

    #[test]
    fn label_file_accepts_one_or_many() {
        let one = r##"{"network":"#afd","labels":{"0":"pro","1":"contra"}}"##;
        let specs = serde_json::from_str::<LabelFile>(one).unwrap().into_specs();
        assert_eq!(specs[0].labels[&1], Label::Contra);
        let many = format!("[{one},{one}]");
        assert_eq!(serde_json::from_str::<LabelFile>(&many).unwrap().into_specs().len(), 2);
    }
}
