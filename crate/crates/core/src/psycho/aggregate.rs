//! Per-subject and population curves.
//!
//! Responses are averaged within each subject and width first (which also
//! averages over repetitions); the population value at a width is the mean
//! of those subject means, so subjects with more trials carry no extra
//! weight.

use std::collections::BTreeMap;

use serde::Serialize;

use super::trials::TrialRecord;
use crate::curve::{Curve, CurvePoint};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubjectPoint {
    pub width: f64,
    pub mean_response: f64,
    pub mean_rt_ms: f64,
    pub n_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubjectCurve {
    pub subject_id: String,
    pub points: Vec<SubjectPoint>,
}

/// Spread reported around population means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Band {
    /// `1.96 · sd / √n` over subject means.
    Ci95,
    /// One standard deviation of subject means.
    StdDev,
}

impl Band {
    fn half_width(self, values: &[f64]) -> f64 {
        let n = values.len();
        if n < 2 {
            return 0.0;
        }
        let sd = sample_sd(values);
        match self {
            Band::Ci95 => 1.96 * sd / (n as f64).sqrt(),
            Band::StdDev => sd,
        }
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Width keys ordered numerically (all widths are positive).
fn width_key(w: f64) -> u64 {
    w.to_bits()
}

pub fn subject_curves(trials: &[TrialRecord]) -> Vec<SubjectCurve> {
    let mut acc: BTreeMap<&str, BTreeMap<u64, (f64, f64, usize)>> = BTreeMap::new();
    for t in trials {
        let e = acc
            .entry(t.subject_id.as_str())
            .or_default()
            .entry(width_key(t.width_level))
            .or_insert((0.0, 0.0, 0));
        e.0 += t.response as f64;
        e.1 += t.rt_ms;
        e.2 += 1;
    }
    acc.into_iter()
        .map(|(id, widths)| SubjectCurve {
            subject_id: id.to_string(),
            points: widths
                .into_iter()
                .map(|(k, (r, rt, n))| SubjectPoint {
                    width: f64::from_bits(k),
                    mean_response: r / n as f64,
                    mean_rt_ms: rt / n as f64,
                    n_trials: n,
                })
                .collect(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PopulationCurve {
    pub curve: Curve,
    /// Subjects contributing at each width, aligned with the curve.
    pub n_subjects: Vec<usize>,
    pub warnings: Vec<String>,
}

fn population_of(
    trials: &[TrialRecord],
    band: Band,
    metric: fn(&SubjectPoint) -> f64,
) -> Result<PopulationCurve> {
    if trials.is_empty() {
        return Err(Error::param("no trials to aggregate"));
    }
    let subjects = subject_curves(trials);
    let mut by_width: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for s in &subjects {
        for p in &s.points {
            by_width.entry(width_key(p.width)).or_default().push(metric(p));
        }
    }
    let mut warnings = Vec::new();
    for s in &subjects {
        for &k in by_width.keys() {
            if !s.points.iter().any(|p| width_key(p.width) == k) {
                warnings.push(format!(
                    "subject {} has no trials at width {}",
                    s.subject_id,
                    f64::from_bits(k)
                ));
            }
        }
    }
    let mut points = Vec::with_capacity(by_width.len());
    let mut n_subjects = Vec::with_capacity(by_width.len());
    for (k, values) in &by_width {
        points.push(CurvePoint::with_ci(f64::from_bits(*k), mean(values), band.half_width(values)));
        n_subjects.push(values.len());
    }
    Ok(PopulationCurve {
        curve: Curve::new(points)?,
        n_subjects,
        warnings,
    })
}

/// Mean face count per width across subjects.
pub fn population_curve(trials: &[TrialRecord], band: Band) -> Result<PopulationCurve> {
    population_of(trials, band, |p| p.mean_response)
}

/// Mean response time per width across subjects, with a ±1 sd band.
pub fn rt_curve(trials: &[TrialRecord]) -> Result<PopulationCurve> {
    population_of(trials, Band::StdDev, |p| p.mean_rt_ms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GroupFactor {
    Group,
    Gender,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupCurve {
    pub label: String,
    pub n_subjects: usize,
    /// Fewer than two subjects.
    pub flagged: bool,
    pub curve: Curve,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupDifference {
    pub width: f64,
    pub group_a: String,
    pub group_b: String,
    pub abs_difference: f64,
    /// Pooled standard deviation of subject means.
    pub pooled_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupComparison {
    pub curves: Vec<GroupCurve>,
    pub differences: Vec<GroupDifference>,
}

fn factor_label(t: &TrialRecord, factor: GroupFactor) -> String {
    match factor {
        GroupFactor::Group => t.group.clone(),
        GroupFactor::Gender => t.gender.map(|g| g.as_str().to_string()).unwrap_or_else(|| "unknown".into()),
    }
}

/// Population curves per factor level, and per-width differences for every
/// pair of levels. Descriptive only.
pub fn compare_groups(
    trials: &[TrialRecord],
    factor: GroupFactor,
    band: Band,
) -> Result<GroupComparison> {
    let mut parts: BTreeMap<String, Vec<TrialRecord>> = BTreeMap::new();
    for t in trials {
        parts.entry(factor_label(t, factor)).or_default().push(t.clone());
    }
    if parts.is_empty() {
        return Err(Error::param("no trials to compare"));
    }
    let mut curves = Vec::new();
    let mut subject_means: Vec<BTreeMap<u64, Vec<f64>>> = Vec::new();
    for (label, ts) in &parts {
        let subjects = subject_curves(ts);
        let mut means: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
        for s in &subjects {
            for p in &s.points {
                means.entry(width_key(p.width)).or_default().push(p.mean_response);
            }
        }
        curves.push(GroupCurve {
            label: label.clone(),
            n_subjects: subjects.len(),
            flagged: subjects.len() < 2,
            curve: population_curve(ts, band)?.curve,
        });
        subject_means.push(means);
    }

    let mut differences = Vec::new();
    for i in 0..curves.len() {
        for j in (i + 1)..curves.len() {
            for (k, a) in &subject_means[i] {
                let Some(b) = subject_means[j].get(k) else {
                    continue;
                };
                let (na, nb) = (a.len() as f64, b.len() as f64);
                let dof = na + nb - 2.0;
                let pooled = if dof > 0.0 {
                    (((na - 1.0) * sample_sd(a).powi(2) + (nb - 1.0) * sample_sd(b).powi(2)) / dof)
                        .sqrt()
                } else {
                    0.0
                };
                differences.push(GroupDifference {
                    width: f64::from_bits(*k),
                    group_a: curves[i].label.clone(),
                    group_b: curves[j].label.clone(),
                    abs_difference: (mean(a) - mean(b)).abs(),
                    pooled_sd: pooled,
                });
            }
        }
    }
    Ok(GroupComparison {
        curves,
        differences,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psycho::SubjectGender;

    fn t(subject: &str, group: &str, width: f64, response: u8, rt: f64) -> TrialRecord {
        TrialRecord {
            subject_id: subject.into(),
            group: group.into(),
            gender: Some(SubjectGender::Male),
            width_level: width,
            image_index: 0,
            repetition: 0,
            response,
            rt_ms: rt,
        }
    }

    #[test]
    fn one_subject_mean() {
        let c = population_curve(&[t("s", "A", 4.0, 2, 500.0), t("s", "A", 4.0, 4, 700.0)], Band::Ci95)
            .unwrap();
        assert_eq!(c.curve.points()[0].y, 3.0);
        assert_eq!(c.curve.points()[0].ci_half_width, Some(0.0));
    }

    #[test]
    fn all_zero_responses() {
        let trials: Vec<_> = (0..4)
            .flat_map(|s| [1.0, 2.0, 4.0].map(|w| t(&format!("s{s}"), "A", w, 0, 300.0)))
            .collect();
        let c = population_curve(&trials, Band::Ci95).unwrap();
        assert!(c.curve.points().iter().all(|p| p.y == 0.0 && p.ci_half_width == Some(0.0)));
    }

    #[test]
    fn unbalanced_trial_counts_do_not_bias() {
        let mut trials = vec![t("a", "A", 1.0, 2, 300.0), t("b", "A", 1.0, 6, 300.0)];
        let balanced = population_curve(&trials, Band::Ci95).unwrap();
        trials.extend((0..20).map(|_| t("a", "A", 1.0, 2, 300.0)));
        let unbalanced = population_curve(&trials, Band::Ci95).unwrap();
        assert_eq!(balanced.curve, unbalanced.curve);
        assert_eq!(unbalanced.curve.points()[0].y, 4.0);
    }

    #[test]
    fn missing_width_warns() {
        let trials = vec![t("a", "A", 1.0, 2, 300.0), t("a", "A", 2.0, 2, 300.0), t("b", "A", 1.0, 2, 300.0)];
        let c = population_curve(&trials, Band::Ci95).unwrap();
        assert_eq!(c.warnings.len(), 1);
        assert_eq!(c.n_subjects, vec![2, 1]);
    }

    #[test]
    fn rt_band_cases() {
        let single = rt_curve(&[t("a", "A", 1.0, 2, 300.0), t("a", "A", 2.0, 2, 800.0)]).unwrap();
        assert!(single.curve.points().iter().all(|p| p.ci_half_width == Some(0.0)));
        let flat: Vec<_> = (0..3).map(|s| t(&format!("s{s}"), "A", 1.0, s as u8, 640.0)).collect();
        let c = rt_curve(&flat).unwrap();
        assert_eq!(c.curve.points()[0].y, 640.0);
        assert_eq!(c.curve.points()[0].ci_half_width, Some(0.0));
    }

    #[test]
    fn relabeled_copies_compare_equal() {
        let base: Vec<_> = (0..3)
            .flat_map(|s| [1.0, 4.0].map(|w| t(&format!("s{s}"), "A", w, (s + w as u8) % 9, 300.0)))
            .collect();
        let mut trials = base.clone();
        trials.extend(base.iter().map(|r| TrialRecord {
            subject_id: format!("copy-{}", r.subject_id),
            group: "B".into(),
            ..r.clone()
        }));
        let cmp = compare_groups(&trials, GroupFactor::Group, Band::Ci95).unwrap();
        assert_eq!(cmp.curves.len(), 2);
        assert_eq!(cmp.curves[0].curve, cmp.curves[1].curve);
        assert!(cmp.differences.iter().all(|d| d.abs_difference == 0.0));
    }

    #[test]
    fn single_group_has_no_differences() {
        let trials = vec![t("a", "A", 1.0, 2, 300.0)];
        let cmp = compare_groups(&trials, GroupFactor::Group, Band::Ci95).unwrap();
        assert_eq!(cmp.curves.len(), 1);
        assert!(cmp.curves[0].flagged);
        assert!(cmp.differences.is_empty());
    }
}
