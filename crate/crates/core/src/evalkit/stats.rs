//! Attribute histograms over an annotation set.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::annotations::{AnnotationRecord, FaceAttributes};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueShare {
    pub value: String,
    pub count: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeHistogram {
    pub attribute: String,
    /// Faces carrying a label for this attribute.
    pub labeled_faces: usize,
    /// Share of labeled faces per value; fractions sum to 1.
    pub per_face: Vec<ValueShare>,
    /// Share of images with at least one face of each value. These overlap
    /// and need not sum to 1.
    pub per_image: Vec<ValueShare>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub images: usize,
    pub faces: usize,
    /// Number of images holding exactly `k` boxes, keyed by `k`.
    pub boxes_per_image: BTreeMap<usize, usize>,
    pub attributes: Vec<AttributeHistogram>,
}

impl StatsReport {
    pub fn attribute(&self, name: &str) -> Option<&AttributeHistogram> {
        self.attributes.iter().find(|a| a.attribute == name)
    }

    /// Per-face fraction of `attribute == value`.
    pub fn face_fraction(&self, attribute: &str, value: &str) -> Option<f64> {
        self.attribute(attribute)?
            .per_face
            .iter()
            .find(|v| v.value == value)
            .map(|v| v.fraction)
    }
}

pub fn dataset_stats(annotations: &[AnnotationRecord]) -> Result<StatsReport> {
    if annotations.is_empty() {
        return Err(Error::param("no annotation records"));
    }
    let images = annotations.len();
    let faces: usize = annotations.iter().map(|r| r.boxes.len()).sum();
    let mut boxes_per_image = BTreeMap::new();
    for r in annotations {
        *boxes_per_image.entry(r.boxes.len()).or_insert(0) += 1;
    }

    let share = |value: &str, count: usize, total: usize| ValueShare {
        value: value.to_string(),
        count,
        fraction: if total == 0 { 0.0 } else { count as f64 / total as f64 },
    };
    let attributes = FaceAttributes::FIELDS
        .iter()
        .map(|&field| {
            let values = FaceAttributes::values_of(field).expect("known field");
            let mut face_counts = vec![0usize; values.len()];
            let mut image_counts = vec![0usize; values.len()];
            for r in annotations {
                let mut seen = vec![false; values.len()];
                for b in &r.boxes {
                    if let Some(v) = b.attributes.get(field) {
                        let k = values.iter().position(|&x| x == v).expect("enum value");
                        face_counts[k] += 1;
                        seen[k] = true;
                    }
                }
                for (c, s) in image_counts.iter_mut().zip(seen) {
                    *c += usize::from(s);
                }
            }
            let labeled: usize = face_counts.iter().sum();
            AttributeHistogram {
                attribute: field.to_string(),
                labeled_faces: labeled,
                per_face: values
                    .iter()
                    .zip(&face_counts)
                    .map(|(v, &c)| share(v, c, labeled))
                    .collect(),
                per_image: values
                    .iter()
                    .zip(&image_counts)
                    .map(|(v, &c)| share(v, c, images))
                    .collect(),
            }
        })
        .collect();

    Ok(StatsReport {
        images,
        faces,
        boxes_per_image,
        attributes,
    })
}
