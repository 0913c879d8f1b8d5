//! All-points interpolated Average Precision at a single IoU threshold.
//!
//! Detections are visited by descending score (stable for ties). Each one is
//! matched to the still-unmatched ground-truth box of highest IoU in its
//! image, provided that IoU reaches the threshold. The precision-recall walk
//! is summarised as `Σ Δrecall · max(precision at recall ≥ r)`.

use std::collections::HashMap;

use serde::Serialize;

use super::annotations::{AnnotatedBox, AnnotationRecord, DetectionRecord};
use super::bbox::{iou, BBox};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApReport {
    pub ap: f64,
    pub iou_threshold: f64,
    pub num_ground_truth: usize,
    pub num_detections: usize,
    pub true_positives: usize,
    /// Detections matched to ignored ground truth; neither hits nor misses.
    pub ignored_detections: usize,
    /// Set when detections were scored against an empty ground truth.
    pub no_ground_truth: bool,
    /// `(recall, precision)` after each counted detection.
    pub pr_curve: Vec<(f64, f64)>,
}

struct Gt {
    bbox: BBox,
    ignore: bool,
    matched: bool,
}

pub fn average_precision(
    dets: &[DetectionRecord],
    gts: &[AnnotationRecord],
    iou_thresh: f64,
) -> Result<ApReport> {
    average_precision_subset(dets, gts, iou_thresh, |_| true)
}

/// AP over the ground-truth boxes selected by `keep`. Detections that can
/// only match an unselected box are dropped from the ranking instead of
/// counting as false positives.
pub fn average_precision_subset(
    dets: &[DetectionRecord],
    gts: &[AnnotationRecord],
    iou_thresh: f64,
    keep: impl Fn(&AnnotatedBox) -> bool,
) -> Result<ApReport> {
    if !(iou_thresh > 0.0 && iou_thresh < 1.0) {
        return Err(Error::param(format!("IoU threshold must lie in (0, 1), got {iou_thresh}")));
    }
    let mut by_image: HashMap<&str, Vec<Gt>> = HashMap::new();
    let mut num_gt = 0;
    for rec in gts {
        let entry = by_image.entry(rec.image_id.as_str()).or_default();
        for b in &rec.boxes {
            let ignore = !keep(b);
            num_gt += usize::from(!ignore);
            entry.push(Gt {
                bbox: b.bbox,
                ignore,
                matched: false,
            });
        }
    }
    if num_gt == 0 && dets.is_empty() {
        return Err(Error::Undefined(
            "average precision with no ground truth and no detections".into(),
        ));
    }

    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score));

    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut ignored = 0usize;
    let mut pr_curve = Vec::with_capacity(dets.len());
    for &d in &order {
        let det = &dets[d];
        let cands = by_image.get_mut(det.image_id.as_str());
        let hit = cands.and_then(|cands| {
            let best = |want_ignored: bool, cands: &[Gt]| {
                let mut best: Option<(usize, f64)> = None;
                for (g, gt) in cands.iter().enumerate() {
                    if gt.ignore != want_ignored || gt.matched {
                        continue;
                    }
                    let o = iou(&det.bbox, &gt.bbox);
                    if o >= iou_thresh && best.is_none_or(|(_, bo)| o > bo) {
                        best = Some((g, o));
                    }
                }
                best.map(|(g, _)| g)
            };
            if let Some(g) = best(false, cands) {
                cands[g].matched = true;
                Some(true)
            } else if cands.iter().any(|gt| gt.ignore && iou(&det.bbox, &gt.bbox) >= iou_thresh) {
                Some(false)
            } else {
                None
            }
        });
        match hit {
            Some(true) => tp += 1,
            Some(false) => {
                ignored += 1;
                continue;
            }
            None => fp += 1,
        }
        let recall = if num_gt == 0 { 0.0 } else { tp as f64 / num_gt as f64 };
        pr_curve.push((recall, tp as f64 / (tp + fp) as f64));
    }

    let ap = if num_gt == 0 { 0.0 } else { interpolated_area(&pr_curve) };
    Ok(ApReport {
        ap,
        iou_threshold: iou_thresh,
        num_ground_truth: num_gt,
        num_detections: dets.len(),
        true_positives: tp,
        ignored_detections: ignored,
        no_ground_truth: num_gt == 0,
        pr_curve,
    })
}

fn interpolated_area(pr: &[(f64, f64)]) -> f64 {
    // Running maximum of precision from the right.
    let mut envelope: Vec<f64> = pr.iter().map(|&(_, p)| p).collect();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    let mut area = 0.0;
    let mut prev_recall = 0.0;
    for (&(r, _), &p) in pr.iter().zip(&envelope) {
        if r > prev_recall {
            area += (r - prev_recall) * p;
            prev_recall = r;
        }
    }
    area
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gt(id: &str, boxes: &[BBox]) -> AnnotationRecord {
        AnnotationRecord {
            image_id: id.into(),
            boxes: boxes
                .iter()
                .map(|&bbox| AnnotatedBox {
                    bbox,
                    attributes: Default::default(),
                })
                .collect(),
        }
    }

    fn det(id: &str, b: BBox, score: f64) -> DetectionRecord {
        DetectionRecord {
            image_id: id.into(),
            bbox: b,
            score,
        }
    }

    fn sq(x: f64, y: f64) -> BBox {
        BBox::new(x, y, x + 10.0, y + 10.0).unwrap()
    }

    #[test]
    fn perfect_detector() {
        let g = vec![gt("a", &[sq(0.0, 0.0), sq(30.0, 30.0)]), gt("b", &[sq(5.0, 5.0)])];
        let d = vec![
            det("a", sq(0.0, 0.0), 0.3),
            det("a", sq(30.0, 30.0), 0.9),
            det("b", sq(5.0, 5.0), 0.1),
        ];
        assert_eq!(average_precision(&d, &g, 0.5).unwrap().ap, 1.0);
    }

    #[test]
    fn no_overlap_scores_zero() {
        let g = vec![gt("a", &[sq(0.0, 0.0)])];
        let d = vec![det("a", sq(50.0, 50.0), 0.9), det("b", sq(0.0, 0.0), 0.8)];
        assert_eq!(average_precision(&d, &g, 0.5).unwrap().ap, 0.0);
    }

    #[test]
    fn hand_computed_walk() {
        let g = vec![gt("a", &[sq(0.0, 0.0), sq(40.0, 0.0)])];
        let d = vec![
            det("a", sq(0.0, 0.0), 0.9),
            det("a", sq(80.0, 80.0), 0.8),
            det("a", sq(40.0, 0.0), 0.7),
        ];
        let r = average_precision(&d, &g, 0.5).unwrap();
        assert!((r.ap - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(r.pr_curve, vec![(0.5, 1.0), (0.5, 0.5), (1.0, 2.0 / 3.0)]);
    }

    #[test]
    fn duplicate_detection_is_a_false_positive() {
        let g = vec![gt("a", &[sq(0.0, 0.0)])];
        let d = vec![det("a", sq(0.0, 0.0), 0.9), det("a", sq(1.0, 0.0), 0.8)];
        let r = average_precision(&d, &g, 0.5).unwrap();
        assert_eq!(r.true_positives, 1);
        assert_eq!(r.ap, 1.0);
    }

    #[test]
    fn empty_ground_truth_flags() {
        let d = vec![det("a", sq(0.0, 0.0), 0.9)];
        let r = average_precision(&d, &[gt("a", &[])], 0.5).unwrap();
        assert_eq!(r.ap, 0.0);
        assert!(r.no_ground_truth);
        assert!(matches!(average_precision(&[], &[], 0.5), Err(Error::Undefined(_))));
    }

    #[test]
    fn no_detections_scores_zero() {
        let r = average_precision(&[], &[gt("a", &[sq(0.0, 0.0)])], 0.5).unwrap();
        assert_eq!(r.ap, 0.0);
    }

    #[test]
    fn rejects_bad_threshold() {
        let g = vec![gt("a", &[sq(0.0, 0.0)])];
        assert!(average_precision(&[], &g, 0.0).is_err());
        assert!(average_precision(&[], &g, 1.0).is_err());
    }

    #[test]
    fn subset_ignores_matches_to_other_boxes() {
        let g = vec![gt("a", &[sq(0.0, 0.0), sq(40.0, 0.0)])];
        let d = vec![det("a", sq(40.0, 0.0), 0.9), det("a", sq(0.0, 0.0), 0.5)];
        let only_first = |b: &AnnotatedBox| b.bbox.x_min == 0.0;
        let r = average_precision_subset(&d, &g, 0.5, only_first).unwrap();
        assert_eq!(r.num_ground_truth, 1);
        assert_eq!(r.ignored_detections, 1);
        assert_eq!(r.ap, 1.0);
    }
}
