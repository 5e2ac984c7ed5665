use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use sotkit::io::{
    self, DecodedRecord, GroupHypRecord, GroupRecord, SotRecord, UtteranceHypRecord,
};
use sotkit::model::sessions_from_utterances;
use sotkit::sot::deserialize_text;
use sotkit::{
    aggregate, build_utterance_groups, concat_refs, group_stats, score_group, score_utterance_eval,
    serialize_fifo, FifoMode, GroupHypothesis, Report, UtteranceGroup,
};

use crate::{Cli, Command, Format, ModeArg, ScoreArgs, ScoreMode, SimulateArgs, SotCommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
}

impl From<sotkit::Error> for CliError {
    fn from(err: sotkit::Error) -> Self {
        if err.is_io() {
            CliError::Io(err.to_string())
        } else {
            CliError::Validation(err.to_string())
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

pub fn run(cli: Cli) -> CliResult {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| CliError::Validation(format!("--jobs: {e}")))?;
    pool.install(|| match cli.command {
        Command::Group { input, out } => group(&input, &out),
        Command::Stats {
            groups,
            utterances,
            format,
        } => stats(&groups, &utterances, format),
        Command::Sot(SotCommand::Encode {
            groups,
            utterances,
            mode,
            out,
        }) => encode(&groups, &utterances, mode, &out),
        Command::Sot(SotCommand::Decode { input, out }) => decode(&input, &out),
        Command::Simulate(args) => simulate(&args),
        Command::Score(args) => score(&args),
    })
}

fn emit<T: Serialize>(out: &Path, records: &[T]) -> CliResult {
    if out.as_os_str() == "-" {
        let stdout = std::io::stdout();
        io::write_jsonl(stdout.lock(), records).map_err(|e| CliError::Io(format!("stdout: {e}")))?;
        Ok(())
    } else {
        Ok(io::write_jsonl_file(out, records)?)
    }
}

fn group(input: &Path, out: &Path) -> CliResult {
    let utterances = io::read_utterances(input)?;
    if utterances.is_empty() {
        return Err(CliError::Validation(format!("{}: no utterances", input.display())));
    }
    let sessions = sessions_from_utterances(utterances);
    let per_session: Vec<Vec<UtteranceGroup>> = sessions
        .par_iter()
        .map(build_utterance_groups)
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::from(e).with_context(input))?;
    let mut records: Vec<GroupRecord> = per_session.iter().flatten().map(GroupRecord::from).collect();
    records.sort_by(|a, b| a.group_id.cmp(&b.group_id));
    log::info!("{} groups from {} sessions", records.len(), sessions.len());
    emit(out, &records)
}

fn load_groups(groups: &Path, utterances: &Path) -> CliResult<Vec<UtteranceGroup>> {
    let utts = io::read_utterances(utterances)?;
    let records: Vec<GroupRecord> = io::read_jsonl(groups)?;
    io::groups_from_records(&records, &utts).map_err(|e| CliError::from(e).with_context(groups))
}

fn stats(groups: &Path, utterances: &Path, format: Format) -> CliResult {
    let stats = group_stats(&load_groups(groups, utterances)?);
    match format {
        Format::Table => print!("{stats}"),
        Format::Json => println!("{}", pretty(&stats.to_json())?),
    }
    Ok(())
}

fn encode(groups: &Path, utterances: &Path, mode: ModeArg, out: &Path) -> CliResult {
    let mode = match mode {
        ModeArg::Speaker => FifoMode::Speaker,
        ModeArg::Utterance => FifoMode::Utterance,
    };
    let groups = load_groups(groups, utterances)?;
    let records = groups
        .par_iter()
        .map(|g| {
            Ok(SotRecord {
                group_id: g.group_id.clone(),
                sot_text: serialize_fifo(g, mode)?.to_text(),
            })
        })
        .collect::<Result<Vec<_>, sotkit::Error>>()?;
    emit(out, &records)
}

fn decode(input: &Path, out: &Path) -> CliResult {
    let hyps: Vec<SotRecord> = io::read_jsonl(input)?;
    let records: Vec<DecodedRecord> = hyps
        .iter()
        .map(|h| {
            let decoded = deserialize_text(&h.sot_text);
            for w in &decoded.warnings {
                log::warn!("{}: group {}: {w}", input.display(), h.group_id);
            }
            DecodedRecord {
                group_id: h.group_id.clone(),
                texts: decoded.channel_texts(),
                num_speakers: decoded.speaker_count,
            }
        })
        .collect();
    emit(out, &records)
}

fn simulate(args: &SimulateArgs) -> CliResult {
    let config = crate::config::sim_config(args)?;
    let (pool, audio) = io::load_pool::<f32>(&args.pool, config.sample_rate_hz)?;
    let mixtures = (0..args.count)
        .into_par_iter()
        .map(|i| io::render_indexed(&pool, &audio, &config, i))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::from(e).with_context(&args.pool))?;
    let manifest = io::write_batch(&args.out_dir, &mixtures)?;
    eprintln!("wrote {} mixtures to {}", mixtures.len(), manifest.display());
    Ok(())
}

fn score(args: &ScoreArgs) -> CliResult {
    let report = match args.mode {
        ScoreMode::Group => score_group_mode(args)?,
        ScoreMode::Utterance => score_utterance_mode(args)?,
    };
    match args.format {
        Format::Json => {
            let value = serde_json::to_value(&report)
                .map_err(|e| CliError::Validation(format!("report: {e}")))?;
            println!("{}", pretty(&value)?);
        }
        Format::Table => print!("{report}"),
    }
    Ok(())
}

fn score_group_mode(args: &ScoreArgs) -> CliResult<Report> {
    let groups_path = args
        .groups
        .as_deref()
        .ok_or_else(|| CliError::Validation("--groups is required in group mode".into()))?;
    let groups = load_groups(groups_path, &args.refs)?;
    let records: Vec<GroupHypRecord> = io::read_jsonl(&args.hyps)?;
    let hyps = io::index_by_id(records, |r| r.group_id.as_str())
        .map_err(|e| CliError::from(e).with_context(&args.hyps))?;

    let known: BTreeSet<&str> = groups.iter().map(|g| g.group_id.as_str()).collect();
    if let Some(id) = hyps.keys().filter(|id| !known.contains(id.as_str())).min() {
        return Err(CliError::from(sotkit::Error::UnknownHypothesis(id.clone())).with_context(&args.hyps));
    }
    let scores = groups
        .par_iter()
        .map(|g| {
            let hyp = hyps
                .get(&g.group_id)
                .ok_or_else(|| sotkit::Error::MissingHypothesis(g.group_id.clone()))?;
            score_group(&concat_refs(g)?, &GroupHypothesis::from_texts(&g.group_id, &hyp.texts))
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::from(e).with_context(&args.hyps))?;
    Ok(aggregate(&scores)?)
}

fn score_utterance_mode(args: &ScoreArgs) -> CliResult<Report> {
    let sessions = sessions_from_utterances(io::read_utterances(&args.refs)?);
    let records: Vec<UtteranceHypRecord> = io::read_jsonl(&args.hyps)?;
    let hyps: HashMap<String, Vec<String>> = io::index_by_id(records, |r| r.utterance_id.as_str())
        .map_err(|e| CliError::from(e).with_context(&args.hyps))?
        .into_iter()
        .map(|(id, r)| (id, r.text.split_whitespace().map(str::to_owned).collect()))
        .collect();
    score_utterance_eval(&sessions, &hyps).map_err(|e| CliError::from(e).with_context(&args.hyps))
}

fn pretty(value: &serde_json::Value) -> CliResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Validation(e.to_string()))
}

impl CliError {
    fn with_context(self, path: &Path) -> Self {
        let prefix = path.display();
        match self {
            CliError::Validation(m) => CliError::Validation(format!("{prefix}: {m}")),
            CliError::Io(m) => CliError::Io(m),
        }
    }
}
