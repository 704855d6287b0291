use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::{SecondsFormat, Utc};
use hashjack_core::community::DEFAULT_SEED;
use hashjack_core::export::{write_gexf, GexfAnnotations};
use hashjack_core::hashjack::{OddsRow, Target};
use hashjack_core::ingest::{normalize_hashtag, parse_hashtag_list, write_records};
use hashjack_core::labeling::{apply_label_spec, LabelFile, DEFAULT_TOP_K};
use hashjack_core::metrics::{compare_profiles, DEFAULT_FRACTIONS};
use hashjack_core::{
    build_network, cluster_composition, concentration, hashjack_matrix, louvain, parse_records,
    partisans, polarisation, split_streams, top_retweeted, undirected_projection, AccountRegistry,
    Basis, ClusterLabeling, CommunityPartition, CorpusStats, Format, Label, PartisanAssignment,
    RetweetNetwork,
};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{ActivityParams, CommunityParams, IngestParams, LabelParams, OddsParams, PolarisationParams};
use crate::input_err;
use crate::manifest::{sha256_bytes, sha256_file, RunLock, RunManifest, Stage, StageRecord};
use crate::report::{
    fig1_csv, fig3a_csv, fig3b_csv, ActivityOutput, CompositionEntry, ConcentrationEntry, IngestSummary,
    LabelSummary, NetworkProfiles, NetworkSummary, PartitionSummary, PolarisationOutput, Report,
};

const RECORDS: &str = "store/records.jsonl";
const INGEST_SUMMARY: &str = "store/stats.json";
const REGISTRY: &str = "graph/registry.json";
const NETWORKS_DIR: &str = "graph/networks";
const PARTITIONS_DIR: &str = "partitions";
const LABELINGS_DIR: &str = "labelings";
const LABELS_COPY: &str = "labels.json";
const POLARISATION: &str = "metrics/polarisation.json";
const ODDS: &str = "metrics/odds.json";
const MATRIX: &str = "metrics/hashjack.json";
const ACTIVITY: &str = "metrics/activity.json";
const REPORT: &str = "report/report.json";
const FIG1: &str = "report/fig1.csv";
const FIG3A: &str = "report/fig3a.csv";
const FIG3B: &str = "report/fig3b.csv";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Ran { invalidated: Vec<Stage> },
    UpToDate,
}

fn slug(tag: &str) -> &str {
    tag.trim_start_matches('#')
}

fn tag_of(slug: &str) -> String {
    format!("#{slug}")
}

fn normalize(tag: &str) -> Result<String> {
    normalize_hashtag(tag).map_err(|e| input_err(e.to_string()))
}

fn tag_list(list: &str) -> Result<Vec<String>> {
    Ok(parse_hashtag_list(list)
        .map_err(|e| input_err(e.to_string()))?
        .into_iter()
        .collect())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let file = File::create(path).with_context(|| format!("writing {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_reader(BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))
}

/// Copies files into `out`: a single file goes to `out` itself unless `out`
/// is an existing directory or ends in a separator.
pub fn copy_out(run_dir: &Path, rels: &[String], out: &Path) -> Result<()> {
    let as_dir = rels.len() != 1 || out.is_dir() || out.to_string_lossy().ends_with(['/', '\\']);
    if as_dir {
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        for rel in rels {
            let src = run_dir.join(rel);
            let name = src.file_name().context("artifact without file name")?;
            fs::copy(&src, out.join(name)).with_context(|| format!("copying {}", src.display()))?;
        }
    } else {
        if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        let src = run_dir.join(&rels[0]);
        fs::copy(&src, out).with_context(|| format!("copying {}", src.display()))?;
    }
    Ok(())
}

/// An open, locked run directory.
pub struct Run {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub seed: u64,
    pub strict: bool,
    pub format: Format,
    _lock: RunLock,
}

impl Run {
    pub fn open(dir: &Path, seed: Option<u64>, strict: bool, format: Format) -> Result<Self> {
        let lock = RunLock::acquire(dir)?;
        let manifest = RunManifest::load(dir)?;
        Ok(Run {
            dir: dir.to_path_buf(),
            manifest,
            seed: seed.unwrap_or(DEFAULT_SEED),
            strict,
            format,
            _lock: lock,
        })
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.join(rel)
    }

    /// Fails with the name of the first missing or stale prerequisite.
    pub fn require(&self, stage: Stage) -> Result<()> {
        if self.manifest.stages.contains_key(&stage) && self.manifest.verify(&self.dir, stage) {
            Ok(())
        } else {
            Err(input_err(format!(
                "stage `{stage}` has not completed (or its artifacts changed); run `hashjack {}` first",
                stage.command()
            )))
        }
    }

    fn execute<F>(&mut self, stage: Stage, params: Value, body: F) -> Result<Outcome>
    where
        F: FnOnce(&mut Run) -> Result<Vec<String>>,
    {
        let mut upstream = BTreeMap::new();
        for &dep in stage.requires() {
            self.require(dep)
                .with_context(|| format!("`{stage}` needs `{dep}`"))?;
            upstream.insert(dep, self.manifest.stages[&dep].fingerprint.clone());
        }
        if let Some(rec) = self.manifest.stages.get(&stage) {
            if rec.params == params && rec.upstream == upstream && self.manifest.verify(&self.dir, stage) {
                eprintln!("{stage}: up to date");
                return Ok(Outcome::UpToDate);
            }
        }
        let artifacts = body(self)?;
        let mut digests = BTreeMap::new();
        for rel in artifacts {
            let digest = sha256_file(&self.path(&rel)).with_context(|| format!("hashing {rel}"))?;
            digests.insert(rel, digest);
        }
        let fingerprint = sha256_bytes(&serde_json::to_vec(&(stage, &params, &upstream, &digests))?);
        let previous = self.manifest.stages.get(&stage).map(|r| r.fingerprint.clone());
        let invalidated = if previous.as_deref() == Some(fingerprint.as_str()) {
            Vec::new()
        } else {
            self.manifest.invalidate_downstream(stage)
        };
        self.manifest.stages.insert(
            stage,
            StageRecord {
                params,
                upstream,
                artifacts: digests,
                fingerprint,
                completed_at: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
            },
        );
        self.manifest.save(&self.dir)?;
        if !invalidated.is_empty() {
            let names: Vec<&str> = invalidated.iter().map(|s| s.name()).collect();
            eprintln!("{stage}: invalidated {}", names.join(", "));
        }
        Ok(Outcome::Ran { invalidated })
    }

    /// Files `--out` copies for a stage.
    pub fn primary_artifacts(&self, stage: Stage) -> Vec<String> {
        let all: Vec<String> = self
            .manifest
            .stages
            .get(&stage)
            .map(|r| r.artifacts.keys().cloned().collect())
            .unwrap_or_default();
        let only = |name: &str| all.iter().filter(|a| a.as_str() == name).cloned().collect();
        match stage {
            Stage::Odds => only(ODDS),
            Stage::Report => only(REPORT),
            _ => all,
        }
    }

    // ---- loaders -------------------------------------------------------

    pub fn load_records(&self) -> Result<Vec<hashjack_core::TweetRecord>> {
        let path = self.path(RECORDS);
        let file = File::open(&path).with_context(|| format!("reading {}", path.display()))?;
        let outcome = parse_records(BufReader::new(file), Format::Jsonl)?;
        if !outcome.rejects.is_empty() {
            anyhow::bail!("stored records at {} failed to parse", path.display());
        }
        Ok(outcome.records)
    }

    pub fn load_registry(&self) -> Result<AccountRegistry> {
        read_json(&self.path(REGISTRY))
    }

    pub fn built_networks(&self) -> Vec<String> {
        self.manifest
            .artifacts_in(Stage::Build, NETWORKS_DIR)
            .iter()
            .map(|s| tag_of(s))
            .collect()
    }

    pub fn partitioned_networks(&self) -> Vec<String> {
        self.manifest
            .artifacts_in(Stage::Communities, PARTITIONS_DIR)
            .iter()
            .map(|s| tag_of(s))
            .collect()
    }

    pub fn labelled_networks(&self) -> Vec<String> {
        self.manifest
            .artifacts_in(Stage::Label, LABELINGS_DIR)
            .iter()
            .map(|s| tag_of(s))
            .collect()
    }

    pub fn load_network(&self, tag: &str) -> Result<RetweetNetwork> {
        if !self.built_networks().iter().any(|t| t == tag) {
            return Err(input_err(format!("no network for {tag}; is it tracked?")));
        }
        read_json(&self.path(&format!("{NETWORKS_DIR}/{}.json", slug(tag))))
    }

    pub fn load_partition(&self, tag: &str) -> Result<CommunityPartition> {
        if !self.partitioned_networks().iter().any(|t| t == tag) {
            return Err(input_err(format!(
                "no partition for {tag}; run `hashjack communities --network \"{tag}\"`"
            )));
        }
        read_json(&self.path(&format!("{PARTITIONS_DIR}/{}.json", slug(tag))))
    }

    pub fn load_labeling(&self, tag: &str) -> Result<ClusterLabeling> {
        if !self.labelled_networks().iter().any(|t| t == tag) {
            return Err(input_err(format!("no labels for {tag}; add it to labels.json and run `hashjack label apply`")));
        }
        read_json(&self.path(&format!("{LABELINGS_DIR}/{}.json", slug(tag))))
    }

    fn load_labelled(&self) -> Result<Vec<(RetweetNetwork, CommunityPartition, ClusterLabeling)>> {
        self.labelled_networks()
            .iter()
            .map(|t| Ok((self.load_network(t)?, self.load_partition(t)?, self.load_labeling(t)?)))
            .collect()
    }

    // ---- stages --------------------------------------------------------

    pub fn ingest(&mut self, p: &IngestParams) -> Result<Outcome> {
        let input = p
            .input
            .clone()
            .ok_or_else(|| input_err("ingest needs --input <file>"))?;
        let tracked = tag_list(
            p.tracked
                .as_deref()
                .ok_or_else(|| input_err("ingest needs --tracked \"#tag,...\""))?,
        )?;
        let digest = sha256_file(&input)
            .map_err(|e| input_err(format!("cannot read {}: {e}", input.display())))?;
        let params = json!({
            "input_sha256": digest,
            "format": self.format.to_string(),
            "tracked": tracked,
            "strict": self.strict,
        });
        self.execute(Stage::Ingest, params, |run| {
            let file = File::open(&input)
                .map_err(|e| input_err(format!("cannot read {}: {e}", input.display())))?;
            let outcome = parse_records(BufReader::new(file), run.format)?;
            let mut rejects_path = input.clone().into_os_string();
            rejects_path.push(".rejects.jsonl");
            let rejects_path = PathBuf::from(rejects_path);
            if outcome.rejects.is_empty() {
                let _ = fs::remove_file(&rejects_path);
            } else {
                let mut w = BufWriter::new(
                    File::create(&rejects_path)
                        .with_context(|| format!("writing {}", rejects_path.display()))?,
                );
                for r in &outcome.rejects {
                    serde_json::to_writer(&mut w, r)?;
                    w.write_all(b"\n")?;
                }
                w.flush()?;
                eprintln!(
                    "ingest: {} rejected lines written to {}",
                    outcome.rejects.len(),
                    rejects_path.display()
                );
            }
            if outcome.mostly_rejected() {
                eprintln!(
                    "warning: {} of {} lines rejected",
                    outcome.rejects.len(),
                    outcome.lines_seen
                );
            }
            outcome.check_reject_ratio(run.strict)?;

            let tracked_set: BTreeSet<String> = tracked.iter().cloned().collect();
            let split = split_streams(&outcome.records, &tracked_set)?;
            let summary = IngestSummary {
                stats: CorpusStats::compute(&outcome.records),
                lines_seen: outcome.lines_seen,
                rejected: outcome.rejects.len(),
                duplicates: outcome.duplicate_count(),
                streams: split.streams.iter().map(|(t, s)| (t.clone(), s.len())).collect(),
                dropped: split.dropped,
            };
            let records_path = run.path(RECORDS);
            fs::create_dir_all(records_path.parent().expect("nested path"))?;
            let w = BufWriter::new(File::create(&records_path)?);
            write_records(w, &outcome.records, Format::Jsonl)?;
            write_json(&run.path(INGEST_SUMMARY), &summary)?;

            run.manifest.inputs.clear();
            run.manifest.inputs.insert(input.display().to_string(), digest.clone());
            run.manifest.tracked = tracked.clone();
            run.manifest.run_id = Some(sha256_bytes(format!("{digest}|{}", tracked.join(",")).as_bytes())[..16].to_string());
            eprintln!(
                "ingest: {} records, {} rejects, {} dropped (no tracked hashtag)",
                outcome.records.len(),
                outcome.rejects.len(),
                split.dropped
            );
            Ok(vec![RECORDS.to_string(), INGEST_SUMMARY.to_string()])
        })
    }

    pub fn build(&mut self) -> Result<Outcome> {
        self.execute(Stage::Build, json!({}), |run| {
            let records = run.load_records()?;
            let tracked: BTreeSet<String> = run.manifest.tracked.iter().cloned().collect();
            let split = split_streams(&records, &tracked)?;
            drop(records);
            let mut registry = AccountRegistry::from_records_sorted(split.streams.values().flatten());
            let mut artifacts = vec![REGISTRY.to_string()];
            for (tag, stream) in &split.streams {
                let net = build_network(tag, stream, &mut registry);
                let rel = format!("{NETWORKS_DIR}/{}.json", slug(tag));
                write_json(&run.path(&rel), &net)?;
                eprintln!(
                    "build: {tag}: {} accounts, {} edges, {} retweets",
                    net.node_count(),
                    net.edge_count(),
                    net.total_weight()
                );
                artifacts.push(rel);
            }
            write_json(&run.path(REGISTRY), &registry)?;
            Ok(artifacts)
        })
    }

    pub fn communities(&mut self, p: &CommunityParams) -> Result<Outcome> {
        let mut networks: Vec<String> = if p.networks.is_empty() {
            self.built_networks()
        } else {
            p.networks.iter().map(|n| normalize(n)).collect::<Result<_>>()?
        };
        networks.sort();
        networks.dedup();
        if !(p.resolution > 0.0 && p.resolution.is_finite()) {
            return Err(input_err(format!("resolution must be positive, got {}", p.resolution)));
        }
        let seed = self.seed;
        let params = json!({ "networks": networks, "resolution": p.resolution, "seed": seed });
        self.execute(Stage::Communities, params, |run| {
            let mut artifacts = Vec::new();
            for tag in &networks {
                let net = run.load_network(tag)?;
                if net.node_count() == 0 {
                    eprintln!("communities: {tag}: empty network, skipped");
                    continue;
                }
                let graph = undirected_projection(&net);
                let mut partition = louvain(&graph, p.resolution, seed)?;
                partition.network = tag.clone();
                eprintln!(
                    "communities: {tag}: {} communities, Q = {:.4}, {} levels",
                    partition.community_count(),
                    partition.modularity,
                    partition.levels
                );
                let rel = format!("{PARTITIONS_DIR}/{}.json", slug(tag));
                write_json(&run.path(&rel), &partition)?;
                artifacts.push(rel);
            }
            Ok(artifacts)
        })
    }

    pub fn label_report(&self, network: Option<&str>, top: usize) -> Result<Value> {
        self.require(Stage::Communities)?;
        let networks = match network {
            Some(n) => vec![normalize(n)?],
            None => self.partitioned_networks(),
        };
        let registry = self.load_registry()?;
        let mut out = Vec::new();
        for tag in networks {
            let net = self.load_network(&tag)?;
            let partition = self.load_partition(&tag)?;
            let evidence = top_retweeted(&net, &partition, &registry, top)
                .map_err(|e| input_err(e.to_string()))?;
            out.push(json!({ "network": tag, "communities": evidence }));
        }
        Ok(Value::Array(out))
    }

    pub fn label_apply(&mut self, p: &LabelParams) -> Result<Outcome> {
        let path = p
            .labels
            .clone()
            .ok_or_else(|| input_err("label apply needs --labels <labels.json>"))?;
        let bytes = fs::read(&path).map_err(|e| input_err(format!("cannot read {}: {e}", path.display())))?;
        let file: LabelFile = serde_json::from_slice(&bytes)
            .map_err(|e| input_err(format!("invalid labels file {}: {e}", path.display())))?;
        let mut specs = file.into_specs();
        for spec in &mut specs {
            spec.network = normalize(&spec.network)?;
        }
        let params = json!({ "labels_sha256": sha256_bytes(&bytes), "min_size": p.min_size });
        self.execute(Stage::Label, params, |run| {
            let registry = run.load_registry()?;
            write_text(&run.path(LABELS_COPY), &String::from_utf8_lossy(&bytes))?;
            let mut artifacts = vec![LABELS_COPY.to_string()];
            let mut seen = BTreeSet::new();
            for spec in &specs {
                if !seen.insert(spec.network.clone()) {
                    return Err(input_err(format!("labels file lists {} twice", spec.network)));
                }
                let net = run.load_network(&spec.network)?;
                let partition = run.load_partition(&spec.network)?;
                let mut labeling = apply_label_spec(spec, &partition, &registry, p.min_size)?;
                let labelled: BTreeSet<usize> = labeling
                    .labels
                    .iter()
                    .filter(|(_, l)| **l != Label::Other)
                    .map(|(c, _)| *c)
                    .collect();
                labeling.evidence = top_retweeted(&net, &partition, &registry, DEFAULT_TOP_K)?
                    .into_iter()
                    .filter(|e| labelled.contains(&e.community))
                    .collect();
                eprintln!(
                    "label: {}: pro = {:?}, contra = {:?}",
                    spec.network,
                    labeling.pro(),
                    labeling.contra()
                );
                let rel = format!("{LABELINGS_DIR}/{}.json", slug(&spec.network));
                write_json(&run.path(&rel), &labeling)?;
                artifacts.push(rel);
            }
            Ok(artifacts)
        })
    }

    pub fn polarisation(&mut self, p: &PolarisationParams) -> Result<Outcome> {
        let mut pairs = Vec::new();
        for c in &p.compare {
            let (a, b) = c
                .split_once('=')
                .ok_or_else(|| input_err(format!("--compare expects BEFORE=AFTER, got {c:?}")))?;
            pairs.push((normalize(a)?, normalize(b)?));
        }
        let params = json!({ "compare": pairs, "threshold": p.threshold });
        self.execute(Stage::Polarisation, params, |run| {
            let mut profiles = Vec::new();
            for (net, partition, labeling) in run.load_labelled()? {
                profiles.push(NetworkProfiles {
                    network: net.hashtag.clone(),
                    volume: polarisation(&net, &partition, &labeling, Basis::RetweetVolume),
                    accounts: polarisation(&net, &partition, &labeling, Basis::AccountCount),
                });
            }
            let mut shifts = Vec::new();
            for (a, b) in &pairs {
                let find = |t: &str| {
                    profiles
                        .iter()
                        .find(|np| np.network == t)
                        .ok_or_else(|| input_err(format!("{t} is not labelled")))
                };
                shifts.push(compare_profiles(&find(a)?.volume, &find(b)?.volume, p.threshold));
            }
            write_json(&run.path(POLARISATION), &PolarisationOutput { profiles, shifts })?;
            Ok(vec![POLARISATION.to_string()])
        })
    }

    pub fn odds(&mut self, p: &OddsParams) -> Result<Outcome> {
        self.require(Stage::Label)?;
        let labelled = self.load_labelled()?;
        let pick = |list: &Option<String>, label: Label| -> Result<Vec<String>> {
            let with: Vec<String> = labelled
                .iter()
                .filter(|(_, _, l)| l.community_with(label).is_some())
                .map(|(n, _, _)| n.hashtag.clone())
                .collect();
            match list {
                None => Ok(with),
                Some(list) => {
                    let wanted = tag_list(list)?;
                    for w in &wanted {
                        if !with.contains(w) {
                            return Err(input_err(format!("{w} has no {label:?} cluster labelled")));
                        }
                    }
                    Ok(wanted)
                }
            }
        };
        let parties = pick(&p.parties, Label::Pro)?;
        let targets = pick(&p.targets, Label::Contra)?;
        let params = json!({ "parties": parties, "targets": targets });
        self.execute(Stage::Odds, params, |run| {
            let find = |t: &String| labelled.iter().find(|(n, _, _)| &n.hashtag == t).expect("labelled");
            let sets: Vec<PartisanAssignment> = parties
                .iter()
                .map(|t| {
                    let (_, partition, labeling) = find(t);
                    partisans(labeling, partition)
                })
                .collect::<Result<_, _>>()?;
            let target_refs: Vec<Target<'_>> = targets
                .iter()
                .map(|t| {
                    let (network, partition, labeling) = find(t);
                    Target { network, partition, labeling }
                })
                .collect();
            let cells = hashjack_matrix(&sets, &target_refs);
            let rows: Vec<OddsRow> = cells.iter().map(OddsRow::from).collect();
            for r in &rows {
                eprintln!(
                    "odds: {} in contra {}: OR = {} [{}, {}]",
                    r.party,
                    r.target,
                    r.odds_ratio.map_or("-".into(), |v| format!("{v:.3}")),
                    r.ci_low.map_or("-".into(), |v| format!("{v:.3}")),
                    r.ci_high.map_or("-".into(), |v| format!("{v:.3}")),
                );
            }
            write_json(&run.path(ODDS), &rows)?;
            write_json(&run.path(MATRIX), &cells)?;
            Ok(vec![ODDS.to_string(), MATRIX.to_string()])
        })
    }

    pub fn activity(&mut self, p: &ActivityParams) -> Result<Outcome> {
        let fractions: Vec<f64> = match &p.fractions {
            None => DEFAULT_FRACTIONS.to_vec(),
            Some(list) => list
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|q| *q > 0.0 && *q <= 1.0)
                        .ok_or_else(|| input_err(format!("fraction must be in (0, 1], got {s:?}")))
                })
                .collect::<Result<_>>()?,
        };
        if p.top_k == 0 {
            return Err(input_err("--top-k must be positive"));
        }
        let params = json!({ "fractions": fractions, "top_k": p.top_k });
        self.execute(Stage::Activity, params, |run| {
            let registry = run.load_registry()?;
            let nets: Vec<RetweetNetwork> = run
                .built_networks()
                .iter()
                .map(|t| run.load_network(t))
                .collect::<Result<_>>()?;
            let net_refs: Vec<&RetweetNetwork> = nets.iter().collect();
            let labelled = run.load_labelled()?;
            let sets: Vec<PartisanAssignment> = labelled
                .iter()
                .filter(|(_, _, l)| l.pro().is_some())
                .map(|(_, partition, labeling)| partisans(labeling, partition))
                .collect::<Result<_, _>>()?;
            let concentration_entries = sets
                .iter()
                .map(|set| match concentration(set, &net_refs, &registry, &fractions) {
                    Ok(curve) => ConcentrationEntry { party: set.party.clone(), curve: Some(curve), error: None },
                    Err(e) => ConcentrationEntry { party: set.party.clone(), curve: None, error: Some(e.to_string()) },
                })
                .collect();
            let mut composition = Vec::new();
            for (net, partition, labeling) in &labelled {
                let Some(contra) = labeling.contra() else { continue };
                let members = labeling.members_with(partition, Label::Contra);
                let comp = cluster_composition(&members, &sets, |n| net.retweets_made(n), &registry, p.top_k)?;
                composition.push(CompositionEntry {
                    target: net.hashtag.clone(),
                    contra_community: contra,
                    composition: comp,
                });
            }
            let out = ActivityOutput {
                fractions: fractions.clone(),
                top_k: p.top_k,
                concentration: concentration_entries,
                composition,
            };
            write_json(&run.path(ACTIVITY), &out)?;
            Ok(vec![ACTIVITY.to_string()])
        })
    }

    pub fn report(&mut self) -> Result<Outcome> {
        self.execute(Stage::Report, json!({}), |run| {
            let report = run.assemble_report()?;
            write_json(&run.path(REPORT), &report)?;
            write_text(&run.path(FIG1), &fig1_csv(&report.polarisation))?;
            write_text(&run.path(FIG3A), &fig3a_csv(&report.odds))?;
            write_text(&run.path(FIG3B), &fig3b_csv(&report.activity))?;
            Ok([REPORT, FIG1, FIG3A, FIG3B].map(String::from).to_vec())
        })
    }

    fn assemble_report(&self) -> Result<Report> {
        let partitioned = self.partitioned_networks();
        let labelled = self.labelled_networks();
        let mut networks = Vec::new();
        for tag in self.built_networks() {
            let net = self.load_network(&tag)?;
            let partition = if partitioned.contains(&tag) { Some(self.load_partition(&tag)?) } else { None };
            let labels = match (&partition, labelled.contains(&tag)) {
                (Some(part), true) => {
                    let l = self.load_labeling(&tag)?;
                    let size = |c: Option<usize>| c.map_or(0, |c| part.members(c).len());
                    Some(LabelSummary {
                        method: l.method,
                        pro: l.pro(),
                        contra: l.contra(),
                        pro_size: size(l.pro()),
                        contra_size: size(l.contra()),
                    })
                }
                _ => None,
            };
            let partition = partition.map(|p| {
                let mut sizes: Vec<usize> = p.communities().iter().map(Vec::len).collect();
                sizes.sort_unstable_by(|a, b| b.cmp(a));
                sizes.truncate(10);
                PartitionSummary {
                    seed: p.seed,
                    resolution: p.resolution,
                    modularity: p.modularity,
                    levels: p.levels,
                    communities: p.community_count(),
                    largest: sizes,
                }
            });
            networks.push(NetworkSummary {
                network: tag.clone(),
                nodes: net.node_count(),
                edges: net.edge_count(),
                retweets: net.total_weight(),
                original_tweets: net.original_tweets,
                duplicates: net.duplicates,
                partition,
                labels,
            });
        }
        Ok(Report {
            generator: format!("hashjack {}", env!("CARGO_PKG_VERSION")),
            run_id: self.manifest.run_id.clone(),
            tracked: self.manifest.tracked.clone(),
            parameters: self
                .manifest
                .stages
                .iter()
                .filter(|(s, _)| **s != Stage::Report)
                .map(|(s, r)| (*s, r.params.clone()))
                .collect(),
            corpus: read_json(&self.path(INGEST_SUMMARY))?,
            networks,
            polarisation: read_json(&self.path(POLARISATION))?,
            odds: read_json(&self.path(ODDS))?,
            hashjack: read_json(&self.path(MATRIX))?,
            activity: read_json(&self.path(ACTIVITY))?,
        })
    }

    pub fn export(&self, network: &str, gexf: &Path) -> Result<()> {
        self.require(Stage::Build)?;
        let tag = normalize(network)?;
        let net = self.load_network(&tag)?;
        let registry = self.load_registry()?;
        let partition = if self.partitioned_networks().contains(&tag) {
            Some(self.load_partition(&tag)?)
        } else {
            None
        };
        let labeling = if self.labelled_networks().contains(&tag) {
            Some(self.load_labeling(&tag)?)
        } else {
            None
        };
        let mut sets = Vec::new();
        for (_, part, lab) in self.load_labelled()? {
            if lab.pro().is_some() {
                sets.push(partisans(&lab, &part)?);
            }
        }
        let notes = GexfAnnotations {
            partition: partition.as_ref(),
            labeling: labeling.as_ref(),
            partisans: &sets,
        };
        if let Some(parent) = gexf.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        let mut w = BufWriter::new(File::create(gexf).with_context(|| format!("writing {}", gexf.display()))?);
        write_gexf(&mut w, &net, &registry, &notes)?;
        w.flush()?;
        eprintln!("export: {tag} written to {}", gexf.display());
        Ok(())
    }
}
