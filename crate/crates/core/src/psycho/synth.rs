//! Synthetic trial logs following the counting experiment's design.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::trials::{SubjectGender, TrialRecord};
use crate::error::{Error, Result};
use crate::rng::{child_seed, stream};
use crate::stimuli::DEFAULT_WIDTHS;

/// Generative design for synthetic subjects.
///
/// Subject `s` reports `round(gain_s · profile[w] + ε)` clamped to `0..=9`,
/// with `gain_s ~ N(1, gain_sd²)` and `ε ~ N(0, trial_sd²)`. Response times
/// follow `rt_base + rt_per_face · response + N(0, rt_sd²)`, floored at
/// 150 ms, except for a small fraction of accidental (50 ms) and break
/// (150 s) trials that cleaning should remove.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthDesign {
    pub subjects: usize,
    pub widths: Vec<f64>,
    /// Expected face count per width, aligned with `widths`.
    pub profile: Vec<f64>,
    pub images_per_width: usize,
    pub repetitions: usize,
    pub gain_sd: f64,
    pub trial_sd: f64,
    pub rt_base_ms: f64,
    pub rt_per_face_ms: f64,
    pub rt_sd_ms: f64,
    pub too_fast_rate: f64,
    pub break_rate: f64,
}

impl SynthDesign {
    /// 14 subjects in two groups of 7 (6 female, 8 male), 9 widths, 10
    /// images per width shown 3 times: 270 trials per subject. Counts peak
    /// at width 16.
    pub fn appendix() -> Self {
        Self {
            subjects: 14,
            widths: DEFAULT_WIDTHS.to_vec(),
            profile: vec![0.4, 0.6, 1.0, 1.5, 2.2, 3.1, 4.4, 3.1, 1.8],
            images_per_width: 10,
            repetitions: 3,
            gain_sd: 0.25,
            trial_sd: 1.0,
            rt_base_ms: 1200.0,
            rt_per_face_ms: 450.0,
            rt_sd_ms: 300.0,
            too_fast_rate: 0.005,
            break_rate: 0.002,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.subjects == 0 || self.images_per_width == 0 || self.repetitions == 0 {
            return Err(Error::param("design needs subjects, images and repetitions"));
        }
        if self.widths.is_empty() || self.widths.len() != self.profile.len() {
            return Err(Error::Shape("profile must match widths".into()));
        }
        Ok(())
    }
}

/// Trials for every subject, each subject in its own shuffled order.
///
/// Subject `s` draws from the stream `child_seed(seed, s)`. The first half
/// of the subjects form group "A", the rest "B"; genders alternate starting
/// with female until the female quota (`3/7` of subjects, rounded) is met.
pub fn synthesize_trials(design: &SynthDesign, seed: u64) -> Result<Vec<TrialRecord>> {
    design.validate()?;
    let female_quota = (design.subjects as f64 * 3.0 / 7.0).round() as usize;
    let rt_noise = Normal::new(0.0, design.rt_sd_ms).map_err(|e| Error::param(e.to_string()))?;
    let trial_noise = Normal::new(0.0, design.trial_sd).map_err(|e| Error::param(e.to_string()))?;
    let gain_dist = Normal::new(1.0, design.gain_sd).map_err(|e| Error::param(e.to_string()))?;

    let mut out = Vec::new();
    let mut females = 0;
    for s in 0..design.subjects {
        let mut rng = stream(child_seed(seed, s as u64));
        let group = if s < design.subjects.div_ceil(2) { "A" } else { "B" };
        let gender = if s % 2 == 0 && females < female_quota {
            females += 1;
            SubjectGender::Female
        } else {
            SubjectGender::Male
        };
        let gain: f64 = gain_dist.sample(&mut rng).max(0.0);

        let mut schedule = Vec::new();
        for (wi, &w) in design.widths.iter().enumerate() {
            for img in 0..design.images_per_width {
                for rep in 0..design.repetitions {
                    schedule.push((wi, w, img, rep));
                }
            }
        }
        schedule.shuffle(&mut rng);

        for (wi, w, img, rep) in schedule {
            let latent = gain * design.profile[wi] + trial_noise.sample(&mut rng);
            let response = latent.round().clamp(0.0, 9.0) as u8;
            let u: f64 = rng.random();
            let rt = if u < design.too_fast_rate {
                50.0
            } else if u < design.too_fast_rate + design.break_rate {
                150_000.0
            } else {
                (design.rt_base_ms
                    + design.rt_per_face_ms * response as f64
                    + rt_noise.sample(&mut rng))
                .max(150.0)
            };
            out.push(TrialRecord {
                subject_id: format!("S{:02}", s + 1),
                group: group.to_string(),
                gender: Some(gender),
                width_level: w,
                // Groups see disjoint image sets.
                image_index: (if group == "A" { 0 } else { 1000 }) + (wi * design.images_per_width + img) as i64,
                repetition: rep as i64,
                response,
                rt_ms: rt,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn appendix_design_shape() {
        let trials = synthesize_trials(&SynthDesign::appendix(), 1).unwrap();
        assert_eq!(trials.len(), 14 * 270);
        let females = trials
            .iter()
            .filter(|t| t.gender == Some(SubjectGender::Female))
            .count()
            / 270;
        assert_eq!(females, 6);
        let group_a = trials.iter().filter(|t| t.group == "A").count() / 270;
        assert_eq!(group_a, 7);
        assert!(trials.iter().all(|t| t.response <= 9 && t.rt_ms > 0.0));
    }

    #[test]
    fn deterministic_in_seed() {
        let d = SynthDesign::appendix();
        assert_eq!(synthesize_trials(&d, 4).unwrap(), synthesize_trials(&d, 4).unwrap());
        assert_ne!(synthesize_trials(&d, 4).unwrap(), synthesize_trials(&d, 5).unwrap());
    }
}
