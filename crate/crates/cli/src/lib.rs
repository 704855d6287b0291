//! Run-directory pipeline behind the `hashjack` binary.
//!
//! Every stage reads its prerequisites from the run directory, writes its
//! artifacts there and records their digests in `manifest.json`. A stage
//! rerun with unchanged parameters and inputs is a no-op; a stage whose
//! output changes drops the records of everything downstream.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};

use anyhow::{Context, Result};
use hashjack_core::ingest::{write_records, IngestError};
use hashjack_core::labeling::{LabelError, LabelFile};
use hashjack_core::synth::{generate, SynthConfig, SynthError};
use hashjack_core::community::CommunityError;

pub mod args;
pub mod manifest;
pub mod report;
pub mod stages;

pub use args::{Cli, Command, LabelCommand};
pub use manifest::{RunManifest, Stage, StageRecord};
pub use report::Report;
pub use stages::{Outcome, Run};

/// Bad input from the user: exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn input_err(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(InputError(msg.into()))
}

/// 2 for input errors, 1 for anything else.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let input = err.chain().any(|e| {
        e.is::<InputError>()
            || e.is::<IngestError>()
            || e.is::<LabelError>()
            || e.is::<SynthError>()
            || matches!(e.downcast_ref::<CommunityError>(), Some(CommunityError::InvalidResolution(_)))
    });
    if input {
        2
    } else {
        1
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn copy_primary(run: &Run, stage: Stage, out: Option<&std::path::Path>) -> Result<()> {
    if let Some(out) = out {
        let files = run.primary_artifacts(stage);
        if !files.is_empty() {
            stages::copy_out(&run.dir, &files, out)?;
        }
    }
    Ok(())
}

fn synth(cli: &Cli, config: &std::path::Path, out: &std::path::Path, truth: &std::path::Path, labels: Option<&std::path::Path>, seed_count: usize) -> Result<()> {
    let text = fs::read_to_string(config)
        .map_err(|e| input_err(format!("cannot read {}: {e}", config.display())))?;
    let mut cfg: SynthConfig = serde_json::from_str(&text)
        .map_err(|e| input_err(format!("invalid synth config {}: {e}", config.display())))?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let (records, ground) = generate(&cfg)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let w = BufWriter::new(File::create(out).with_context(|| format!("writing {}", out.display()))?);
    write_records(w, &records, cli.format)?;
    stages::write_json(truth, &ground)?;
    if let Some(labels) = labels {
        stages::write_json(labels, &LabelFile::Many(ground.label_specs(seed_count)))?;
    }
    eprintln!(
        "synth: {} records over {} accounts (seed {})",
        records.len(),
        ground.accounts.len(),
        ground.seed
    );
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    if let Command::Synth { config, out, truth, labels, seed_count } = &cli.command {
        return synth(&cli, config, out, truth, labels.as_deref(), *seed_count);
    }
    let mut run = Run::open(&cli.run_dir, cli.seed, cli.strict, cli.format)?;
    match &cli.command {
        Command::Ingest { params, out } => {
            run.ingest(params)?;
            copy_primary(&run, Stage::Ingest, out.as_deref())
        }
        Command::Build { out } => {
            run.build()?;
            copy_primary(&run, Stage::Build, out.as_deref())
        }
        Command::Communities { params, out } => {
            run.communities(params)?;
            copy_primary(&run, Stage::Communities, out.as_deref())
        }
        Command::Label { action: LabelCommand::Report { network, top, out } } => {
            let value = run.label_report(network.as_deref(), *top)?;
            match out {
                Some(path) => stages::write_json(path, &value),
                None => print_json(&value),
            }
        }
        Command::Label { action: LabelCommand::Apply { params, out } } => {
            run.label_apply(params)?;
            copy_primary(&run, Stage::Label, out.as_deref())
        }
        Command::Polarisation { params, out } => {
            run.polarisation(params)?;
            copy_primary(&run, Stage::Polarisation, out.as_deref())
        }
        Command::Odds { params, out } => {
            run.odds(params)?;
            copy_primary(&run, Stage::Odds, out.as_deref())
        }
        Command::Activity { params, out } => {
            run.activity(params)?;
            copy_primary(&run, Stage::Activity, out.as_deref())
        }
        Command::Report { out } => {
            run.report()?;
            copy_primary(&run, Stage::Report, out.as_deref())
        }
        Command::Export { gexf, network } => run.export(network, gexf),
        Command::Pipeline { stages, ingest, communities, label, polarisation, odds, activity } => {
            let mut order: Vec<Stage> = if stages.is_empty() { Stage::ALL.to_vec() } else { stages.clone() };
            order.sort();
            order.dedup();
            for stage in order {
                match stage {
                    Stage::Ingest => run.ingest(ingest)?,
                    Stage::Build => run.build()?,
                    Stage::Communities => run.communities(communities)?,
                    Stage::Label => run.label_apply(label)?,
                    Stage::Polarisation => run.polarisation(polarisation)?,
                    Stage::Odds => run.odds(odds)?,
                    Stage::Activity => run.activity(activity)?,
                    Stage::Report => run.report()?,
                };
            }
            Ok(())
        }
        Command::Synth { .. } => unreachable!("handled above"),
    }
}
