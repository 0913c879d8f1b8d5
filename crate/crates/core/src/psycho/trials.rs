//! Trial logs: CSV with header
//! `subject_id,group,gender,width_level,image_index,repetition,response,rt_ms`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trials faster than this are dropped as accidental key presses.
pub const TOO_FAST_RT_MS: f64 = 100.0;
/// Trials slower than this (two minutes) are dropped as breaks.
pub const BREAK_RT_MS: f64 = 120_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubjectGender {
    Female,
    Male,
    Other,
}

impl SubjectGender {
    pub fn as_str(self) -> &'static str {
        match self {
            SubjectGender::Female => "female",
            SubjectGender::Male => "male",
            SubjectGender::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub subject_id: String,
    pub group: String,
    pub gender: Option<SubjectGender>,
    /// Envelope width of the stimulus.
    pub width_level: f64,
    pub image_index: i64,
    pub repetition: i64,
    /// Reported face count, capped at 9.
    pub response: u8,
    pub rt_ms: f64,
}

impl TrialRecord {
    fn validate(&self) -> std::result::Result<(), String> {
        if self.response > 9 {
            return Err(format!("response {} outside 0..=9", self.response));
        }
        if !(self.rt_ms > 0.0) || !self.rt_ms.is_finite() {
            return Err(format!("response time {} must be positive", self.rt_ms));
        }
        if !(self.width_level > 0.0) || !self.width_level.is_finite() {
            return Err(format!("width level {} must be positive", self.width_level));
        }
        Ok(())
    }
}

pub fn read_trials<R: Read>(input: R, source_name: &str) -> Result<Vec<TrialRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize::<TrialRecord>().enumerate() {
        let ingest = |message: String| Error::Ingest {
            source_name: source_name.to_string(),
            line: i + 2,
            message,
        };
        let rec = rec.map_err(|e| ingest(e.to_string()))?;
        rec.validate().map_err(ingest)?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_trials<W: Write>(out: W, trials: &[TrialRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for t in trials {
        w.serialize(t)?;
    }
    w.flush().map_err(|e| Error::io("<trial writer>", e))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DropReason {
    TooFast,
    Break,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CleanOutcome {
    pub kept: Vec<TrialRecord>,
    pub dropped: Vec<(TrialRecord, DropReason)>,
}

/// Drops trials with `rt_ms < 100` or `rt_ms > 120000`; order is preserved.
pub fn clean_trials(trials: &[TrialRecord]) -> CleanOutcome {
    let mut out = CleanOutcome::default();
    for t in trials {
        if t.rt_ms < TOO_FAST_RT_MS {
            out.dropped.push((t.clone(), DropReason::TooFast));
        } else if t.rt_ms > BREAK_RT_MS {
            out.dropped.push((t.clone(), DropReason::Break));
        } else {
            out.kept.push(t.clone());
        }
    }
    out
}
