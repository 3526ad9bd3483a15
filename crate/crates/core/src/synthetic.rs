//! Constructed corpora with a known class rule, used to exercise the
//! pipeline end to end when the real recordings are not at hand.
//!
//! Each record is `a * s(t) + c * u(t) + noise`, where `s` and `u` are fixed
//! waveforms, `a` is a class-bearing amplitude and `c` a nuisance amplitude.
//! The label is a threshold on the record's energy, so the class is a
//! deterministic function of the signal itself.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::dataset::{self, BonnSet, EegRecord, Label, Pair, PairDataset};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub per_class: usize,
    pub len: usize,
    pub seed: u64,
    /// Standard deviation of additive white noise, relative to `s`.
    pub noise: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self { per_class: 100, len: 512, seed: 7, noise: 0.02 }
    }
}

fn template(len: usize, parts: &[(f64, f64, f64)]) -> Vec<f64> {
    (0..len)
        .map(|t| {
            let x = t as f64 / len as f64;
            parts.iter().map(|&(amp, cycles, phase)| amp * (2.0 * PI * cycles * x + phase).sin()).sum()
        })
        .collect()
}

/// Class-bearing waveform: broadband so that every subband sees it.
pub fn signal_template(len: usize) -> Vec<f64> {
    template(len, &[(1.0, 3.0, 0.3), (0.8, 11.0, 1.1), (0.6, 29.0, 0.7), (0.5, 61.0, 2.0), (0.4, 123.0, 0.4)])
}

/// Nuisance waveform, orthogonal in frequency to [`signal_template`].
pub fn nuisance_template(len: usize) -> Vec<f64> {
    template(len, &[(0.5, 5.0, 0.9), (0.4, 17.0, 2.3), (0.3, 41.0, 1.7), (0.3, 97.0, 0.2)])
}

pub fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Energy above which a record is labelled positive.
pub fn energy_threshold(len: usize) -> f64 {
    energy(&signal_template(len)) + 0.35f64.powi(2) * energy(&nuisance_template(len))
}

/// Synthesizes the records. Negative records are assigned to `pair.healthy()`
/// and positive ones to `pair.epileptic()`.
pub fn generate(spec: &SyntheticSpec, pair: Pair) -> PairDataset {
    let s = signal_template(spec.len);
    let u = nuisance_template(spec.len);
    let threshold = energy_threshold(spec.len);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut healthy = Vec::new();
    let mut epileptic = Vec::new();
    while healthy.len() < spec.per_class || epileptic.len() < spec.per_class {
        let high = healthy.len() >= spec.per_class
            || (epileptic.len() < spec.per_class && rng.random_bool(0.5));
        let a = if high { rng.random_range(1.15..1.6) } else { rng.random_range(0.4..0.85) };
        let c = rng.random_range(0.2..0.5);
        let samples: Vec<f64> = s
            .iter()
            .zip(&u)
            .map(|(sv, uv)| a * sv + c * uv + spec.noise * gaussian(&mut rng))
            .collect();
        let (set, bucket) = if energy(&samples) > threshold {
            (pair.epileptic(), &mut epileptic)
        } else {
            (pair.healthy(), &mut healthy)
        };
        if bucket.len() < spec.per_class {
            let file_id = format!("{}{:03}", set.distribution_letter(), bucket.len() + 1);
            bucket.push(EegRecord { samples, set, file_id });
        }
    }
    dataset::make_pair(healthy, epileptic, pair).expect("both classes populated")
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Labels recomputed from the energy rule.
pub fn energy_labels(ds: &PairDataset) -> Vec<Label> {
    let len = ds.records.first().map_or(0, |r| r.samples.len());
    let t = energy_threshold(len);
    ds.records
        .iter()
        .map(|r| if energy(&r.samples) > t { Label::Positive } else { Label::Negative })
        .collect()
}

/// Writes records as one-sample-per-line text files under
/// `root/<set letter>/`.
pub fn write_records(root: &Path, records: &[EegRecord]) -> io::Result<()> {
    for r in records {
        let dir = root.join(r.set.letter().to_string());
        fs::create_dir_all(&dir)?;
        let mut f = io::BufWriter::new(fs::File::create(dir.join(format!("{}.txt", r.file_id)))?);
        for v in &r.samples {
            writeln!(f, "{v}")?;
        }
        f.flush()?;
    }
    Ok(())
}

/// Writes a full five-set corpus: A and B hold low-energy records, C, D and
/// E high-energy ones, so every pair follows the energy rule.
pub fn write_corpus(root: &Path, spec: &SyntheticSpec) -> io::Result<()> {
    for (i, pair) in [Pair::AC, Pair::BD].into_iter().enumerate() {
        let ds = generate(&SyntheticSpec { seed: spec.seed.wrapping_add(i as u64), ..spec.clone() }, pair);
        write_records(root, &ds.records)?;
    }
    let extra = generate(&SyntheticSpec { seed: spec.seed.wrapping_add(2), ..spec.clone() }, Pair::AE);
    let e: Vec<EegRecord> = extra.records.into_iter().filter(|r| r.set == BonnSet::E).collect();
    write_records(root, &e)
}
