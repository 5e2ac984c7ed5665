//! JSONL manifests and WAV files.
//!
//! Every JSONL file written here starts with a header line
//! `{"_format":"sotkit/1"}`. Readers accept files with or without it but
//! reject any other version. Records are written with sorted keys.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Cursor, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grouping::UtteranceGroup;
use crate::mixsim::{render, sample_indexed, MixtureResult, PoolSource, SimConfig};
use crate::model::{round_to_ms, AudioBuffer, Utterance};
use crate::scalar::Sample;
use crate::FORMAT_VERSION;

const FORMAT_KEY: &str = "_format";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Serializes a record as one JSON line with keys in sorted order.
pub fn to_sorted_line<T: Serialize>(record: &T) -> String {
    let value = serde_json::to_value(record).expect("records serialize to JSON");
    serde_json::to_string(&value).expect("JSON values serialize")
}

pub fn header_line() -> String {
    to_sorted_line(&serde_json::json!({ FORMAT_KEY: FORMAT_VERSION }))
}

/// Writes the header line followed by one line per record.
pub fn write_jsonl<W: Write, T: Serialize>(mut out: W, records: &[T]) -> std::io::Result<()> {
    writeln!(out, "{}", header_line())?;
    for r in records {
        writeln!(out, "{}", to_sorted_line(r))?;
    }
    out.flush()
}

pub fn jsonl_string<T: Serialize>(records: &[T]) -> String {
    let mut buf = Vec::new();
    write_jsonl(&mut buf, records).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn write_jsonl_file<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    write_jsonl(std::io::BufWriter::new(file), records).map_err(io_err(path))
}

/// Parses JSONL from a reader. `path` is used for error messages only.
pub fn parse_jsonl<R: BufRead, T: DeserializeOwned>(reader: R, path: &Path) -> Result<Vec<T>> {
    let mut records = Vec::new();
    let mut first = true;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        if line.trim().is_empty() {
            continue;
        }
        if std::mem::take(&mut first) {
            if let Ok(serde_json::Value::Object(map)) = serde_json::from_str(&line) {
                if let Some(version) = map.get(FORMAT_KEY) {
                    if version.as_str() != Some(FORMAT_VERSION) {
                        return Err(parse_err(format!(
                            "unsupported format {version}, expected {FORMAT_VERSION:?}"
                        )));
                    }
                    continue;
                }
            }
        }
        records.push(serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?);
    }
    Ok(records)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(io_err(path))?;
    parse_jsonl(BufReader::new(file), path)
}

fn split_words(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_owned).collect()
}

/// Utterance line: the transcript is a single space-joined string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceRecord {
    pub session_id: String,
    pub utterance_id: String,
    pub speaker: String,
    pub start_s: f64,
    pub end_s: f64,
    pub text: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub no_transcript: bool,
}

impl From<UtteranceRecord> for Utterance {
    fn from(r: UtteranceRecord) -> Self {
        Utterance {
            session_id: r.session_id,
            utterance_id: r.utterance_id,
            speaker: r.speaker,
            start_s: round_to_ms(r.start_s),
            end_s: round_to_ms(r.end_s),
            text: split_words(&r.text),
            no_transcript: r.no_transcript,
        }
    }
}

impl From<&Utterance> for UtteranceRecord {
    fn from(u: &Utterance) -> Self {
        UtteranceRecord {
            session_id: u.session_id.clone(),
            utterance_id: u.utterance_id.clone(),
            speaker: u.speaker.clone(),
            start_s: u.start_s,
            end_s: u.end_s,
            text: u.text_joined(),
            no_transcript: u.no_transcript,
        }
    }
}

pub fn read_utterances(path: &Path) -> Result<Vec<Utterance>> {
    Ok(read_jsonl::<UtteranceRecord>(path)?
        .into_iter()
        .map(Utterance::from)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRecord {
    pub group_id: String,
    pub session_id: String,
    pub span_start_s: f64,
    pub span_end_s: f64,
    pub num_speakers: usize,
    pub utterance_ids: Vec<String>,
}

impl From<&UtteranceGroup> for GroupRecord {
    fn from(g: &UtteranceGroup) -> Self {
        GroupRecord {
            group_id: g.group_id.clone(),
            session_id: g.session_id.clone(),
            span_start_s: g.span_start_s,
            span_end_s: g.span_end_s,
            num_speakers: g.num_speakers,
            utterance_ids: g.utterance_ids(),
        }
    }
}

/// Rebuilds groups from group records and the utterances they reference.
pub fn groups_from_records(
    records: &[GroupRecord],
    utterances: &[Utterance],
) -> Result<Vec<UtteranceGroup>> {
    let index: HashMap<(&str, &str), &Utterance> = utterances
        .iter()
        .map(|u| ((u.session_id.as_str(), u.utterance_id.as_str()), u))
        .collect();
    records
        .iter()
        .map(|r| {
            let members = r
                .utterance_ids
                .iter()
                .map(|id| {
                    index
                        .get(&(r.session_id.as_str(), id.as_str()))
                        .map(|u| (*u).clone())
                        .ok_or_else(|| {
                            Error::Mismatch(format!(
                                "group {} references unknown utterance {}/{}",
                                r.group_id, r.session_id, id
                            ))
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            let group = UtteranceGroup::from_utterances(r.group_id.clone(), members)
                .ok_or_else(|| Error::Mismatch(format!("group {} is empty", r.group_id)))?;
            if group.num_speakers != r.num_speakers {
                return Err(Error::Mismatch(format!(
                    "group {} declares {} speakers but its utterances have {}",
                    r.group_id, r.num_speakers, group.num_speakers
                )));
            }
            Ok(group)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SotRecord {
    pub group_id: String,
    pub sot_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodedRecord {
    pub group_id: String,
    pub texts: Vec<String>,
    pub num_speakers: usize,
}

/// Group hypothesis line, as produced by `sot decode`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupHypRecord {
    pub group_id: String,
    pub texts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceHypRecord {
    pub utterance_id: String,
    pub text: String,
}

/// Collects hypothesis lines by id, rejecting duplicates.
pub fn index_by_id<T, F>(records: Vec<T>, key: F) -> Result<HashMap<String, T>>
where
    F: Fn(&T) -> &str,
{
    let mut out = HashMap::with_capacity(records.len());
    for r in records {
        let id = key(&r).to_owned();
        if out.insert(id.clone(), r).is_some() {
            return Err(Error::Mismatch(format!("duplicate hypothesis for {id}")));
        }
    }
    Ok(out)
}

/// Single-speaker source line of a simulation pool. `wav` is relative to the pool file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolRecord {
    pub source_id: String,
    pub speaker: String,
    pub transcript: String,
    pub wav: String,
}

/// Pool sources plus their audio keyed by source id.
pub type LoadedPool<T> = (Vec<PoolSource>, BTreeMap<String, AudioBuffer<T>>);

/// Loads a pool file and the audio it references.
pub fn load_pool<T: Sample>(
    path: &Path,
    sample_rate_hz: u32,
) -> Result<LoadedPool<T>> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let records: Vec<PoolRecord> = read_jsonl(path)?;
    let mut sources = Vec::with_capacity(records.len());
    let mut audio = BTreeMap::new();
    for r in records {
        let wav_path = base.join(&r.wav);
        let buffer: AudioBuffer<T> = read_wav(&wav_path)?;
        if buffer.sample_rate_hz != sample_rate_hz {
            return Err(Error::SampleRateMismatch {
                source_id: r.source_id,
                expected: sample_rate_hz,
                actual: buffer.sample_rate_hz,
            });
        }
        if audio.contains_key(&r.source_id) {
            return Err(Error::Mismatch(format!("duplicate pool source {}", r.source_id)));
        }
        sources.push(PoolSource {
            source_id: r.source_id.clone(),
            speaker: r.speaker,
            transcript: split_words(&r.transcript),
            num_samples: buffer.len(),
        });
        audio.insert(r.source_id, buffer);
    }
    Ok((sources, audio))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub source_id: String,
    pub speaker: String,
    pub offset_s: f64,
    pub duration_s: f64,
    pub transcript: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub mixture_id: String,
    pub wav: String,
    pub speed_factor: f64,
    pub num_speakers: usize,
    pub entries: Vec<ManifestEntry>,
    pub sot_text: String,
}

impl ManifestRecord {
    pub fn new<T>(result: &MixtureResult<T>, wav: impl Into<String>) -> Self {
        ManifestRecord {
            mixture_id: result.spec.mixture_id.clone(),
            wav: wav.into(),
            speed_factor: result.spec.speed_factor,
            num_speakers: result.num_speakers,
            entries: result
                .spec
                .entries
                .iter()
                .map(|e| ManifestEntry {
                    source_id: e.source_id.clone(),
                    speaker: e.speaker.clone(),
                    offset_s: e.offset_s,
                    duration_s: e.duration_s,
                    transcript: e.transcript.join(" "),
                })
                .collect(),
            sot_text: result.sot_text.clone(),
        }
    }
}

/// Amplitude to 16-bit PCM: round half away from zero of `x * 32767`.
pub fn quantize_i16<T: Sample>(x: T) -> i16 {
    (x.to_f64_lossy() * 32767.0).round().clamp(-32767.0, 32767.0) as i16
}

/// Encodes mono 16-bit PCM little-endian RIFF/WAVE.
pub fn wav_bytes<T: Sample>(audio: &AudioBuffer<T>) -> Vec<u8> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: audio.sample_rate_hz,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut cursor = Cursor::new(Vec::new());
    {
        let mut writer =
            hound::WavWriter::new(&mut cursor, spec).expect("writing to memory cannot fail");
        let mut samples = writer.get_i16_writer(audio.samples.len() as u32);
        for &s in &audio.samples {
            samples.write_sample(quantize_i16(s));
        }
        samples.flush().expect("writing to memory cannot fail");
        writer.finalize().expect("writing to memory cannot fail");
    }
    cursor.into_inner()
}

pub fn write_wav<T: Sample>(path: &Path, audio: &AudioBuffer<T>) -> Result<()> {
    std::fs::write(path, wav_bytes(audio)).map_err(io_err(path))
}

/// Reads a mono WAV file. Integer PCM is scaled by `2^(bits-1) - 1`, the
/// inverse of the quantizer used for writing.
pub fn read_wav<T: Sample>(path: &Path) -> Result<AudioBuffer<T>> {
    let wav_err = |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    };
    let reader = hound::WavReader::open(path).map_err(wav_err)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::Mismatch(format!(
            "{}: expected mono audio, found {} channels",
            path.display(),
            spec.channels
        )));
    }
    let samples = match spec.sample_format {
        hound::SampleFormat::Int => {
            let scale = ((1i64 << (spec.bits_per_sample - 1)) - 1) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| T::from_f64_lossy(v as f64 / scale)))
                .collect::<std::result::Result<Vec<_>, _>>()
        }
        hound::SampleFormat::Float => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| T::from_f64_lossy(v as f64)))
            .collect(),
    }
    .map_err(wav_err)?;
    Ok(AudioBuffer::new(samples, spec.sample_rate))
}

/// One simulated mixture ready to be written: its manifest line and WAV bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedMixture {
    pub record: ManifestRecord,
    pub wav: Vec<u8>,
}

/// Samples and renders mixture `index` of a batch on its own RNG stream.
pub fn render_indexed<T: Sample>(
    pool: &[PoolSource],
    audio: &BTreeMap<String, AudioBuffer<T>>,
    config: &SimConfig,
    index: usize,
) -> Result<RenderedMixture> {
    let spec = sample_indexed(pool, config, index)?;
    let result = render(&spec, |id| audio.get(id))?;
    Ok(RenderedMixture {
        record: ManifestRecord::new(&result, format!("{}.wav", spec.mixture_id)),
        wav: wav_bytes(&result.audio),
    })
}

/// Writes each mixture's WAV and a `manifest.jsonl` into `out_dir`, in the
/// given order.
pub fn write_batch(out_dir: &Path, mixtures: &[RenderedMixture]) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    for m in mixtures {
        let path = out_dir.join(&m.record.wav);
        std::fs::write(&path, &m.wav).map_err(io_err(&path))?;
    }
    let manifest = out_dir.join("manifest.jsonl");
    let records: Vec<&ManifestRecord> = mixtures.iter().map(|m| &m.record).collect();
    write_jsonl_file(&manifest, &records)?;
    Ok(manifest)
}
