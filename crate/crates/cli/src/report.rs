use std::collections::BTreeMap;
use std::fmt::Write as _;

use hashjack_core::hashjack::{MatrixCell, OddsRow};
use hashjack_core::labeling::LabelMethod;
use hashjack_core::metrics::{Composition, ConcentrationCurve, PolarisationProfile, ProfileShift};
use hashjack_core::CorpusStats;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::manifest::Stage;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub stats: CorpusStats,
    pub lines_seen: usize,
    pub rejected: usize,
    pub duplicates: usize,
    /// Records routed into each tracked stream.
    pub streams: BTreeMap<String, usize>,
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkProfiles {
    pub network: String,
    pub volume: PolarisationProfile,
    pub accounts: PolarisationProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarisationOutput {
    pub profiles: Vec<NetworkProfiles>,
    pub shifts: Vec<ProfileShift>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationEntry {
    pub party: String,
    pub curve: Option<ConcentrationCurve>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionEntry {
    pub target: String,
    pub contra_community: usize,
    pub composition: Composition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityOutput {
    pub fractions: Vec<f64>,
    pub top_k: usize,
    pub concentration: Vec<ConcentrationEntry>,
    pub composition: Vec<CompositionEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub seed: u64,
    pub resolution: f64,
    pub modularity: f64,
    pub levels: usize,
    pub communities: usize,
    pub largest: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSummary {
    pub method: LabelMethod,
    pub pro: Option<usize>,
    pub contra: Option<usize>,
    pub pro_size: usize,
    pub contra_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSummary {
    pub network: String,
    pub nodes: usize,
    pub edges: usize,
    pub retweets: u64,
    pub original_tweets: u64,
    pub duplicates: u64,
    pub partition: Option<PartitionSummary>,
    pub labels: Option<LabelSummary>,
}

/// Contents of `report.json`. Holds no wall-clock times, so equal inputs
/// and parameters give byte-identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub generator: String,
    pub run_id: Option<String>,
    pub tracked: Vec<String>,
    pub parameters: BTreeMap<Stage, Value>,
    pub corpus: IngestSummary,
    pub networks: Vec<NetworkSummary>,
    pub polarisation: PolarisationOutput,
    pub odds: Vec<OddsRow>,
    pub hashjack: Vec<MatrixCell>,
    pub activity: ActivityOutput,
}

fn num(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn fig1_csv(p: &PolarisationOutput) -> String {
    let mut out = String::from("network,basis,share_pro,share_contra,share_other,total\n");
    for np in &p.profiles {
        for (basis, prof) in [("retweet-volume", &np.volume), ("account-count", &np.accounts)] {
            let _ = writeln!(
                out,
                "{},{basis},{},{},{},{}",
                np.network, prof.share_pro, prof.share_contra, prof.share_other, prof.total
            );
        }
    }
    out
}

pub fn fig3a_csv(rows: &[OddsRow]) -> String {
    let mut out = String::from("party,target,a,b,c,d,or,ci_low,ci_high,beta1,flags\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.party,
            r.target,
            r.a,
            r.b,
            r.c,
            r.d,
            num(r.odds_ratio),
            num(r.ci_low),
            num(r.ci_high),
            num(r.beta1),
            r.flags.join(";")
        );
    }
    out
}

pub fn fig3b_csv(a: &ActivityOutput) -> String {
    let mut out = String::from("group,fraction,accounts,share\n");
    for entry in &a.concentration {
        if let Some(curve) = &entry.curve {
            for p in &curve.points {
                let _ = writeln!(out, "{},{},{},{}", curve.group, p.fraction, p.accounts, p.share);
            }
        }
    }
    out
}
