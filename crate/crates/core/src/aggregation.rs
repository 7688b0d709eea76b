//! Payload compression at collectors under spatially correlated sources.
//!
//! Two models give the size of the aggregate of `s` sources, each
//! producing `b0` bits, at inter-node distance `d0`:
//!
//! * entropy model: `b0 + (s-1)·(1 - 1/(d0/c + 1))·b0`
//! * CCABC model:   `b0 + (s-1)·(1 - ln2·exp(-d0/(σ + s)))·b0`
//!
//! Bits are carried as reals; callers round up only when charging a radio.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::energy::EnergyParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AggregationModel {
    #[serde(rename = "entropy")]
    Entropy,
    #[default]
    #[serde(rename = "distance")]
    Ccabc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregationParams {
    /// Bits per source message.
    pub b0: f64,
    /// Spatial-correlation constant, metres.
    pub c: f64,
    /// Minimum cluster size, in nodes.
    pub sigma: f64,
    pub model: AggregationModel,
}

impl Default for AggregationParams {
    fn default() -> Self {
        Self {
            b0: 800.0,
            c: 10.0,
            sigma: 1.0,
            model: AggregationModel::Ccabc,
        }
    }
}

impl AggregationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.b0 > 0.0) {
            return Err(Error::config("aggregation.b0", "b0 > 0"));
        }
        if !(self.c > 0.0) {
            return Err(Error::config("aggregation.c", "c > 0"));
        }
        if !(self.sigma >= 1.0) {
            return Err(Error::config("aggregation.sigma", "sigma ≥ 1"));
        }
        Ok(())
    }
}

fn entropy_bits(s: usize, d0: f64, b0: f64, c: f64) -> f64 {
    let extra = (s.max(1) - 1) as f64;
    b0 + extra * (1.0 - 1.0 / (d0 / c + 1.0)) * b0
}

fn ccabc_bits(s: usize, d0: f64, b0: f64, sigma: f64) -> f64 {
    let extra = (s.max(1) - 1) as f64;
    b0 + extra * (1.0 - LN_2 * (-d0 / (sigma + s as f64)).exp()) * b0
}

/// Entropy-model aggregate size for `s` sources at spacing `d0`.
pub fn compressed_bits_entropy(s: usize, d0: f64, p: &AggregationParams) -> f64 {
    entropy_bits(s, d0, p.b0, p.c)
}

/// CCABC-model aggregate size for `s` sources at spacing `d0`.
pub fn compressed_bits_ccabc(s: usize, d0: f64, p: &AggregationParams) -> f64 {
    ccabc_bits(s, d0, p.b0, p.sigma)
}

/// Aggregate size under the model selected in `p`.
pub fn compressed_bits(s: usize, d0: f64, p: &AggregationParams) -> f64 {
    match p.model {
        AggregationModel::Entropy => compressed_bits_entropy(s, d0, p),
        AggregationModel::Ccabc => compressed_bits_ccabc(s, d0, p),
    }
}

/// Merges the payloads a collector received with its own reading.
///
/// `incoming` holds `(bits, distance to that sender)` pairs. The selected
/// model is applied with `s = incoming.len() + 1`, `d0` = mean sender
/// distance, and a per-source size equal to the mean input size (which is
/// `b0` whenever every input is a raw reading). Returns the outgoing bits
/// and the aggregation energy `ω · Σ incoming bits`.
pub fn aggregate_at_collector(
    incoming: &[(f64, f64)],
    own_bits: f64,
    p: &AggregationParams,
    energy: &EnergyParams,
) -> (f64, f64) {
    let batches: Vec<Batch> = incoming
        .iter()
        .map(|&(bits, distance)| Batch {
            bits,
            distance,
            messages: 1,
        })
        .collect();
    aggregate_batches(&batches, own_bits, 1, p, energy)
}

/// Payload arriving at a collector: `messages` separate messages totalling
/// `bits`, sent from `distance` metres away.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Batch {
    pub bits: f64,
    pub distance: f64,
    pub messages: u32,
}

/// [`aggregate_at_collector`] where each input may bundle several
/// messages; every message counts as one source.
pub fn aggregate_batches(
    incoming: &[Batch],
    own_bits: f64,
    own_messages: u32,
    p: &AggregationParams,
    energy: &EnergyParams,
) -> (f64, f64) {
    if incoming.is_empty() {
        return (own_bits, 0.0);
    }
    let s = incoming.iter().map(|b| b.messages as usize).sum::<usize>() + own_messages as usize;
    let received: f64 = incoming.iter().map(|b| b.bits).sum();
    let d0 = incoming.iter().map(|b| b.distance).sum::<f64>() / incoming.len() as f64;
    let per_source = (received + own_bits) / s as f64;
    let out = match p.model {
        AggregationModel::Entropy => entropy_bits(s, d0, per_source, p.c),
        AggregationModel::Ccabc => ccabc_bits(s, d0, per_source, p.sigma),
    };
    (out, energy.omega * received)
}
