//! Bit-string genomes and their inverse-normalization decoding into initial states.
//!
//! A genome is the concatenation of one fixed-width sub-encoding per state
//! dimension, in declared dimension order. Each sub-encoding is read as an
//! unsigned integer, most-significant bit first, normalized into the unit
//! interval and mapped onto the dimension's value range.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Upper bound on bits per dimension; keeps sub-encodings exact as `u64` and `f64`.
pub const MAX_BITS_PER_DIM: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitGenome {
    bits: Vec<bool>,
}

impl BitGenome {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            bits: vec![false; len],
        }
    }

    pub fn ones(len: usize) -> Self {
        Self {
            bits: vec![true; len],
        }
    }

    /// Builds a genome whose sub-encodings hold the given integers (MSB first).
    pub fn from_values(values: &[u64], bits_per_dim: u32) -> Self {
        let mut bits = Vec::with_capacity(values.len() * bits_per_dim as usize);
        for &value in values {
            for shift in (0..bits_per_dim).rev() {
                bits.push((value >> shift) & 1 == 1);
            }
        }
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn hamming_distance(&self, other: &BitGenome) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
            + self.bits.len().abs_diff(other.bits.len())
    }

    /// Integer value of each sub-encoding of width `bits_per_dim`.
    pub fn chunk_values(&self, bits_per_dim: u32) -> Vec<u64> {
        self.bits
            .chunks(bits_per_dim as usize)
            .map(|chunk| chunk.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64))
            .collect()
    }
}

impl fmt::Display for BitGenome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitGenome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::GenomeParse(format!(
                    "unexpected character {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { bits })
    }
}

impl Serialize for BitGenome {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitGenome {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingKind {
    Discrete,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimBounds {
    pub min: f64,
    pub max: f64,
}

impl DimBounds {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    /// Number of integer states in a discrete dimension (`max + 1 - min`).
    fn discrete_span(&self) -> u64 {
        (self.max - self.min) as u64 + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingSpec {
    pub kind: EncodingKind,
    pub bits_per_dim: u32,
    pub bounds: Vec<DimBounds>,
}

impl EncodingSpec {
    pub fn new(kind: EncodingKind, bits_per_dim: u32, bounds: Vec<DimBounds>) -> Result<Self> {
        let spec = Self {
            kind,
            bits_per_dim,
            bounds,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn discrete(bits_per_dim: u32, bounds: &[(i64, i64)]) -> Result<Self> {
        let bounds = bounds
            .iter()
            .map(|&(lo, hi)| DimBounds::new(lo as f64, hi as f64))
            .collect();
        Self::new(EncodingKind::Discrete, bits_per_dim, bounds)
    }

    pub fn continuous(bits_per_dim: u32, bounds: &[(f64, f64)]) -> Result<Self> {
        let bounds = bounds
            .iter()
            .map(|&(lo, hi)| DimBounds::new(lo, hi))
            .collect();
        Self::new(EncodingKind::Continuous, bits_per_dim, bounds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bounds.is_empty() {
            return Err(Error::InvalidEncoding(
                "at least one dimension required".into(),
            ));
        }
        if self.bits_per_dim == 0 || self.bits_per_dim > MAX_BITS_PER_DIM {
            return Err(Error::InvalidEncoding(format!(
                "bits per dimension must be in 1..={MAX_BITS_PER_DIM}, got {}",
                self.bits_per_dim
            )));
        }
        let codes = 1u64 << self.bits_per_dim;
        for (d, b) in self.bounds.iter().enumerate() {
            if !b.min.is_finite() || !b.max.is_finite() {
                return Err(Error::InvalidEncoding(format!(
                    "dimension {d}: non-finite bounds"
                )));
            }
            match self.kind {
                EncodingKind::Discrete => {
                    if b.min.fract() != 0.0 || b.max.fract() != 0.0 || b.min > b.max {
                        return Err(Error::InvalidEncoding(format!(
                            "dimension {d}: discrete bounds must be integers with min <= max"
                        )));
                    }
                    if b.discrete_span() > codes {
                        return Err(Error::InvalidEncoding(format!(
                            "dimension {d}: {} bits cannot represent {} states",
                            self.bits_per_dim,
                            b.discrete_span()
                        )));
                    }
                }
                EncodingKind::Continuous => {
                    if b.max <= b.min {
                        return Err(Error::InvalidEncoding(format!(
                            "dimension {d}: continuous bounds need max > min"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> usize {
        self.bounds.len()
    }

    pub fn genome_len(&self) -> usize {
        self.dims() * self.bits_per_dim as usize
    }

    fn codes(&self) -> u64 {
        1u64 << self.bits_per_dim
    }

    fn bounds_of(&self, dim: usize) -> Result<DimBounds> {
        self.bounds.get(dim).copied().ok_or_else(|| {
            Error::InvalidEncoding(format!("dimension {dim} out of range 0..{}", self.dims()))
        })
    }

    /// Maps a single sub-encoding integer onto dimension `dim`.
    pub fn decode_value(&self, dim: usize, code: u64) -> Result<f64> {
        let b = self.bounds_of(dim)?;
        let codes = self.codes();
        if code >= codes {
            return Err(Error::GenomeParse(format!(
                "code {code} exceeds {} bits",
                self.bits_per_dim
            )));
        }
        Ok(match self.kind {
            // floor(code / 2^m * span + min), evaluated exactly in integers
            EncodingKind::Discrete => {
                let offset = (code as u128 * b.discrete_span() as u128) >> self.bits_per_dim;
                b.min + offset as f64
            }
            EncodingKind::Continuous => {
                let top = codes - 1;
                if code == top {
                    b.max
                } else {
                    let norm = code as f64 / top as f64;
                    (norm * (b.max - b.min) + b.min).clamp(b.min, b.max)
                }
            }
        })
    }

    pub fn decode(&self, genome: &BitGenome) -> Result<Vec<f64>> {
        if genome.len() != self.genome_len() {
            return Err(Error::GenomeLength {
                expected: self.genome_len(),
                actual: genome.len(),
            });
        }
        genome
            .chunk_values(self.bits_per_dim)
            .into_iter()
            .enumerate()
            .map(|(dim, code)| self.decode_value(dim, code))
            .collect()
    }

    pub fn occurrence_stats(&self, dim: usize) -> Result<OccurrenceStats> {
        if self.kind != EncodingKind::Discrete {
            return Err(Error::EncodingKind {
                expected: "discrete",
            });
        }
        let span = self.bounds_of(dim)?.discrete_span();
        let codes = self.codes();
        let lower_count = codes / span;
        let higher_count = codes.div_ceil(span);
        Ok(OccurrenceStats {
            interval_range: span as f64 / codes as f64,
            lower_probability: lower_count as f64 / codes as f64,
            higher_probability: higher_count as f64 / codes as f64,
            lower_count,
            higher_count,
        })
    }

    /// Spacing between adjacent decodable values of a continuous dimension.
    pub fn state_value_distance(&self, dim: usize) -> Result<f64> {
        if self.kind != EncodingKind::Continuous {
            return Err(Error::EncodingKind {
                expected: "continuous",
            });
        }
        let b = self.bounds_of(dim)?;
        Ok((b.max - b.min) / (self.codes() - 1) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OccurrenceStats {
    pub interval_range: f64,
    pub lower_probability: f64,
    pub higher_probability: f64,
    /// Number of codes mapping to the least likely states.
    pub lower_count: u64,
    /// Number of codes mapping to the most likely states.
    pub higher_count: u64,
}

impl OccurrenceStats {
    /// How many times more likely the most frequent state is than the least frequent one.
    pub fn ratio(&self) -> f64 {
        self.higher_count as f64 / self.lower_count as f64
    }
}

pub fn random_genome<R: Rng + ?Sized>(rng: &mut R, spec: &EncodingSpec) -> BitGenome {
    BitGenome::from_bits((0..spec.genome_len()).map(|_| rng.gen::<bool>()).collect())
}

/// Flips exactly one bit at `index`.
pub fn mutate_at(genome: &BitGenome, index: usize) -> Result<BitGenome> {
    if index >= genome.len() {
        return Err(Error::GenomeLength {
            expected: index + 1,
            actual: genome.len(),
        });
    }
    let mut bits = genome.bits.clone();
    bits[index] = !bits[index];
    Ok(BitGenome { bits })
}

pub fn mutate<R: Rng + ?Sized>(genome: &BitGenome, rng: &mut R) -> Result<BitGenome> {
    if genome.is_empty() {
        return Err(Error::EmptyInput("cannot mutate an empty genome"));
    }
    let index = rng.gen_range(0..genome.len());
    mutate_at(genome, index)
}

/// Single-point crossover: `a[..cut] ++ b[cut..]`.
pub fn crossover_at(a: &BitGenome, b: &BitGenome, cut: usize) -> Result<BitGenome> {
    if a.len() != b.len() {
        return Err(Error::GenomeLength {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if cut > a.len() {
        return Err(Error::GenomeLength {
            expected: cut,
            actual: a.len(),
        });
    }
    let mut bits = a.bits[..cut].to_vec();
    bits.extend_from_slice(&b.bits[cut..]);
    Ok(BitGenome { bits })
}

/// Single-point crossover with the cut drawn uniformly from `1..len`.
/// Genomes shorter than two bits have no interior cut and yield a copy of `a`.
pub fn crossover<R: Rng + ?Sized>(a: &BitGenome, b: &BitGenome, rng: &mut R) -> Result<BitGenome> {
    if a.len() != b.len() {
        return Err(Error::GenomeLength {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.len() < 2 {
        return Ok(a.clone());
    }
    let cut = rng.gen_range(1..a.len());
    crossover_at(a, b, cut)
}
