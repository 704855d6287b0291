use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hashjack_core::community::DEFAULT_RESOLUTION;
use hashjack_core::labeling::{DEFAULT_MIN_COMMUNITY_SIZE, DEFAULT_TOP_K};
use hashjack_core::metrics::DEFAULT_SHIFT_THRESHOLD;
use hashjack_core::Format;

use crate::manifest::Stage;

#[derive(Parser, Debug, Clone)]
#[command(name = "hashjack", version, about = "Polarisation and hashtag hijacking in retweet networks")]
pub struct Cli {
    /// Run directory holding the manifest and all stage artifacts.
    #[arg(long, global = true, default_value = "run")]
    pub run_dir: PathBuf,
    /// Seed for community detection and synthetic corpora.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Fail instead of warning when most input lines are rejected.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Record format for ingest input and synth output.
    #[arg(long, global = true, default_value = "jsonl")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Parse a record file and store it in the run directory.
    Ingest {
        #[command(flatten)]
        params: IngestParams,
        /// Directory that also receives the stored records and stats.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build one retweet network per tracked hashtag.
    Build {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Detect communities in each network.
    Communities {
        #[command(flatten)]
        params: CommunityParams,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inspect communities or apply pro/contra labels.
    Label {
        #[command(subcommand)]
        action: LabelCommand,
    },
    /// Pro/contra shares per labelled network.
    Polarisation {
        #[command(flatten)]
        params: PolarisationParams,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Odds of contra-cluster membership for partisans vs non-partisans.
    Odds {
        #[command(flatten)]
        params: OddsParams,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Activity concentration and contra-cluster composition.
    Activity {
        #[command(flatten)]
        params: ActivityParams,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bundle all results into report.json and figure CSVs.
    Report {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a network as GEXF.
    Export {
        #[arg(long)]
        gexf: PathBuf,
        #[arg(long)]
        network: String,
    },
    /// Generate a synthetic corpus with planted structure.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Also write a labels file seeded from the planted clusters.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Seeds per planted cluster in the labels file.
        #[arg(long, default_value_t = 10)]
        seed_count: usize,
    },
    /// Run several stages in order (all stages when none are given).
    Pipeline {
        #[arg(value_enum)]
        stages: Vec<Stage>,
        #[command(flatten)]
        ingest: IngestParams,
        #[command(flatten)]
        communities: CommunityParams,
        #[command(flatten)]
        label: LabelParams,
        #[command(flatten)]
        polarisation: PolarisationParams,
        #[command(flatten)]
        odds: OddsParams,
        #[command(flatten)]
        activity: ActivityParams,
    },
}

#[derive(Subcommand, Debug, Clone)]
pub enum LabelCommand {
    /// Most retweeted accounts of each community.
    Report {
        #[arg(long)]
        network: Option<String>,
        #[arg(long, default_value_t = DEFAULT_TOP_K)]
        top: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Label communities from a labels.json file.
    Apply {
        #[command(flatten)]
        params: LabelParams,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct IngestParams {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Comma-separated hashtags to route into networks.
    #[arg(long)]
    pub tracked: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct CommunityParams {
    /// Restrict to these networks (repeatable); default all.
    #[arg(long = "network")]
    pub networks: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub resolution: f64,
}

#[derive(Args, Debug, Clone)]
pub struct LabelParams {
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Smallest community that seed majorities may label.
    #[arg(long, default_value_t = DEFAULT_MIN_COMMUNITY_SIZE)]
    pub min_size: usize,
}

#[derive(Args, Debug, Clone)]
pub struct PolarisationParams {
    /// Compare two networks' contra shares, e.g. "#afd2018=#afd2020".
    #[arg(long = "compare", value_name = "BEFORE=AFTER")]
    pub compare: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_SHIFT_THRESHOLD)]
    pub threshold: f64,
}

#[derive(Args, Debug, Clone, Default)]
pub struct OddsParams {
    /// Comma-separated party networks; default all with a pro cluster.
    #[arg(long)]
    pub parties: Option<String>,
    /// Comma-separated target networks; default all with a contra cluster.
    #[arg(long)]
    pub targets: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct ActivityParams {
    /// Comma-separated head fractions in (0, 1].
    #[arg(long)]
    pub fractions: Option<String>,
    /// Most active retweeters ranked in contra-cluster composition.
    #[arg(long, default_value_t = 100)]
    pub top_k: usize,
}
