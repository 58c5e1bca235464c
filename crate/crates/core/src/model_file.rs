//! Versioned JSON container for trained pipelines.
//!
//! Every real number is written as decimal text with 17 significant digits
//! (`{:.16e}`), which round-trips an `f64` exactly, so a reloaded model
//! evaluates bit-identically on every platform. Real vectors are stored as
//! one space-separated string to keep the file compact.

use serde::{Deserialize, Serialize};

use crate::dual_stage::DualStageModel;
use crate::error::{Error, Result};
use crate::hmm::MsdHmm;

pub const FORMAT: &str = "msdhmm-pipeline";
pub const VERSION: u32 = 1;

pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_reals(xs: &[f64]) -> String {
    let mut out = String::with_capacity(xs.len() * 24);
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&format_real(*x));
    }
    out
}

pub fn parse_reals(s: &str) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::ModelFile(format!("`{t}` is not a real number")))
        })
        .collect()
}

/// Serde adapter for `Vec<f64>` fields.
pub mod real_list {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_reals(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let text = String::deserialize(d)?;
        super::parse_reals(&text).map_err(D::Error::custom)
    }
}

/// Serde adapter for a single `f64`.
pub mod real {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_real(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HmmRecord {
    pub n_states: usize,
    pub n_streams: usize,
    pub n_symbols: usize,
    pub max_jump: usize,
    #[serde(with = "real_list")]
    pub initial: Vec<f64>,
    /// One string per source state.
    pub transition: Vec<String>,
    /// One string per state, each holding `n_streams * n_symbols` values.
    pub emission: Vec<String>,
    #[serde(with = "real_list")]
    pub weights: Vec<f64>,
}

impl From<&MsdHmm> for HmmRecord {
    fn from(m: &MsdHmm) -> Self {
        let n = m.n_states();
        let per_state = m.n_streams() * m.n_symbols();
        Self {
            n_states: n,
            n_streams: m.n_streams(),
            n_symbols: m.n_symbols(),
            max_jump: m.max_jump(),
            initial: m.initial().to_vec(),
            transition: m.transition().chunks_exact(n).map(format_reals).collect(),
            emission: m.emission().chunks_exact(per_state).map(format_reals).collect(),
            weights: m.weights().to_vec(),
        }
    }
}

impl TryFrom<HmmRecord> for MsdHmm {
    type Error = Error;

    fn try_from(r: HmmRecord) -> Result<Self> {
        let join = |rows: &[String]| -> Result<Vec<f64>> {
            let mut out = Vec::new();
            for row in rows {
                out.extend(parse_reals(row)?);
            }
            Ok(out)
        };
        MsdHmm::new(
            r.n_states,
            r.n_streams,
            r.n_symbols,
            r.max_jump,
            r.initial,
            join(&r.transition)?,
            join(&r.emission)?,
            r.weights,
        )
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
}

impl DualStageModel {
    /// Serialises the pipeline; the output is a pure function of the model.
    pub fn to_text(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(&self.to_record()).map_err(|e| Error::ModelFile(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let header: Header = serde_json::from_str::<serde_json::Value>(text)
            .and_then(serde_json::from_value)
            .map_err(|e| Error::ModelFile(format!("unreadable header: {e}")))?;
        if header.format != FORMAT {
            return Err(Error::ModelFile(format!("unexpected format `{}`", header.format)));
        }
        if header.version != VERSION {
            return Err(Error::ModelFile(format!("unsupported version {}", header.version)));
        }
        let record = serde_json::from_str(text).map_err(|e| Error::ModelFile(e.to_string()))?;
        Self::from_record(record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn reals_round_trip_bit_exactly(xs in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 0..50)) {
            let back = parse_reals(&format_reals(&xs)).unwrap();
            prop_assert_eq!(xs.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                            back.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_real(0.1), "1.0000000000000001e-1");
        assert_eq!(format_real(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn hmm_record_round_trip() {
        let m = MsdHmm::new(
            2,
            2,
            2,
            1,
            vec![1.0, 0.0],
            vec![0.6, 0.4, 0.0, 1.0],
            vec![0.1, 0.9, 0.3, 0.7, 0.5, 0.5, 0.25, 0.75],
            vec![0.5, 1.5],
        )
        .unwrap();
        let json = serde_json::to_string(&HmmRecord::from(&m)).unwrap();
        let back: MsdHmm = serde_json::from_str::<HmmRecord>(&json).unwrap().try_into().unwrap();
        assert_eq!(back, m);
    }
}
