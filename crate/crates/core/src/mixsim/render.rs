use crate::error::{Error, Result};
use crate::model::AudioBuffer;
use crate::scalar::Sample;
use crate::sot::{serialize_channels, FifoMode};

use super::MixtureSpec;

/// Rendered mixture audio with its labels.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureResult<T> {
    pub audio: AudioBuffer<T>,
    pub spec: MixtureSpec,
    /// Utterance-mode FIFO serialization of the entry transcripts.
    pub sot_text: String,
    pub num_speakers: usize,
}

/// Resamples by `factor` with linear interpolation: output sample `i` is the
/// input evaluated at position `i * factor`. Factors above one shorten the
/// audio. A factor of exactly one returns the input unchanged.
pub fn speed_perturb<T: Sample>(audio: &AudioBuffer<T>, factor: f64) -> Result<AudioBuffer<T>> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::NonPositiveSpeed(factor));
    }
    if factor == 1.0 || audio.is_empty() {
        return Ok(audio.clone());
    }
    let input = &audio.samples;
    let last = input.len() - 1;
    let out_len = (input.len() as f64 / factor).round() as usize;
    let samples = (0..out_len)
        .map(|i| {
            let pos = i as f64 * factor;
            let k = pos.floor() as usize;
            if k >= last {
                return input[last];
            }
            let frac = T::from_f64_lossy(pos - k as f64);
            let (a, b) = (input[k], input[k + 1]);
            a + (b - a) * frac
        })
        .collect();
    Ok(AudioBuffer::new(samples, audio.sample_rate_hz))
}

/// Mixes the delayed sources at unit gain, scales the whole mixture down if
/// its peak exceeds full scale, then applies the mixture's speed factor.
pub fn render<'a, T, F>(spec: &MixtureSpec, mut lookup: F) -> Result<MixtureResult<T>>
where
    T: Sample,
    F: FnMut(&str) -> Option<&'a AudioBuffer<T>>,
{
    let mut mixed = vec![T::zero(); spec.mixed_len()];
    for entry in &spec.entries {
        let source = lookup(&entry.source_id)
            .ok_or_else(|| Error::MissingAudio(entry.source_id.clone()))?;
        if source.sample_rate_hz != spec.sample_rate_hz {
            return Err(Error::SampleRateMismatch {
                source_id: entry.source_id.clone(),
                expected: spec.sample_rate_hz,
                actual: source.sample_rate_hz,
            });
        }
        if source.len() != entry.num_samples {
            return Err(Error::InvalidConfig(format!(
                "source {} has {} samples, the mixture spec expects {}",
                entry.source_id,
                source.len(),
                entry.num_samples
            )));
        }
        for (out, &s) in mixed[entry.offset_samples..].iter_mut().zip(&source.samples) {
            *out = *out + s;
        }
    }

    let peak = mixed.iter().fold(T::zero(), |m, s| m.max(s.abs()));
    if peak > T::one() {
        for s in &mut mixed {
            *s = *s / peak;
        }
    }
    let audio = speed_perturb(&AudioBuffer::new(mixed, spec.sample_rate_hz), spec.speed_factor)?;

    let channels: Vec<Vec<&str>> = spec
        .entries
        .iter()
        .map(|e| e.transcript.iter().map(String::as_str).collect())
        .collect();
    let sot_text = serialize_channels(&channels, FifoMode::Utterance).to_text();

    Ok(MixtureResult {
        audio,
        spec: spec.clone(),
        sot_text,
        num_speakers: spec.num_speakers(),
    })
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::mixsim::MixtureEntry;

    fn buffer<T: Sample>(v: Vec<T>) -> AudioBuffer<T> {
        AudioBuffer::new(v, 16_000)
    }

    fn entry(id: &str, offset: usize, len: usize, text: &str) -> MixtureEntry {
        MixtureEntry {
            source_id: id.into(),
            speaker: id.into(),
            transcript: text.split_whitespace().map(str::to_owned).collect(),
            offset_s: offset as f64 / 16_000.0,
            duration_s: len as f64 / 16_000.0,
            offset_samples: offset,
            num_samples: len,
        }
    }

    fn spec(entries: Vec<MixtureEntry>, speed: f64) -> MixtureSpec {
        MixtureSpec {
            mixture_id: "m".into(),
            entries,
            speed_factor: speed,
            sample_rate_hz: 16_000,
            seed_trace: vec![],
        }
    }

    #[test]
    fn unit_factor_is_identity() {
        let a = buffer(vec![0.1_f32, -0.3, 0.7]);
        assert_eq!(speed_perturb(&a, 1.0).unwrap(), a);
    }

    #[test]
    fn constant_stays_constant() {
        let a = buffer(vec![0.25_f64; 1000]);
        for factor in [0.9, 0.95, 1.05, 1.1, 2.5] {
            let out = speed_perturb(&a, factor).unwrap();
            assert!(out.samples.iter().all(|&s| s == 0.25));
        }
    }

    #[test]
    fn ramp_at_double_speed() {
        let out = speed_perturb(&buffer(vec![0.0_f64, 1.0, 2.0, 3.0]), 2.0).unwrap();
        assert_eq!(out.samples, vec![0.0, 2.0]);
        let half = speed_perturb(&buffer(vec![0.0_f64, 1.0]), 0.5).unwrap();
        assert_eq!(half.samples, vec![0.0, 0.5, 1.0, 1.0]);
    }

    #[test]
    fn output_length_rounds() {
        let out = speed_perturb(&buffer(vec![0.0_f32; 16_000]), 1.1).unwrap();
        assert_eq!(out.len(), 14545);
    }

    #[test]
    fn non_positive_factor_is_rejected() {
        let a = buffer(vec![0.0_f32]);
        assert!(speed_perturb(&a, 0.0).is_err());
        assert!(speed_perturb(&a, -1.0).is_err());
        assert!(speed_perturb(&a, f64::NAN).is_err());
    }

    #[test]
    fn single_entry_render_is_the_source() {
        let src = buffer(vec![0.5_f32, -0.25, 0.125, 0.0]);
        let s = spec(vec![entry("a", 0, 4, "hi there")], 1.0);
        let out = render(&s, |_| Some(&src)).unwrap();
        assert_eq!(out.audio, src);
        assert_eq!(out.sot_text, "hi there ⟨eos⟩");
        assert_eq!(out.num_speakers, 1);

        let fast = spec(vec![entry("a", 0, 4, "hi")], 1.1);
        assert_eq!(
            render(&fast, |_| Some(&src)).unwrap().audio,
            speed_perturb(&src, 1.1).unwrap()
        );
    }

    #[test]
    fn overlapping_sum_is_peak_normalised() {
        let a = buffer(vec![0.8_f64; 10]);
        let b = buffer(vec![0.8_f64; 10]);
        let sources: HashMap<&str, &AudioBuffer<f64>> = [("a", &a), ("b", &b)].into();
        let s = spec(vec![entry("a", 0, 10, "x"), entry("b", 5, 10, "y z")], 1.0);
        let out = render(&s, |id| sources.get(id).copied()).unwrap();
        assert_eq!(out.audio.len(), 15);
        let peak = out.audio.samples.iter().fold(0.0_f64, |m, s| m.max(s.abs()));
        assert_eq!(peak, 1.0);
        assert_eq!(out.audio.samples[0], 0.5);
        assert_eq!(out.sot_text, "x ⟨sc⟩ y z ⟨eos⟩");
    }

    #[test]
    fn missing_audio_and_rate_mismatch() {
        let s = spec(vec![entry("a", 0, 2, "x")], 1.0);
        assert!(matches!(
            render::<f32, _>(&s, |_| None),
            Err(Error::MissingAudio(id)) if id == "a"
        ));
        let wrong = AudioBuffer::new(vec![0.0_f32; 2], 8_000);
        assert!(matches!(
            render(&s, |_| Some(&wrong)),
            Err(Error::SampleRateMismatch { .. })
        ));
    }
}
