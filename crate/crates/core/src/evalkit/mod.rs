//! Annotation ingestion and evaluation: Average Precision, dataset
//! statistics, average faces and histogram equalization.

mod annotations;
mod ap;
mod avgface;
mod bbox;
mod histeq;
mod stats;

pub use annotations::{
    read_annotations, read_detections, AnnotatedBox, AnnotationRecord, Amusing, Commonness,
    DetectionRecord, Difficulty, Emotion, FaceAttributes, Gender, Origin, Resemblance,
    SubsetFilter,
};
pub use ap::{average_precision, average_precision_subset, ApReport};
pub use avgface::{average_face, resize_crop, AverageFace};
pub use bbox::{iou, BBox};
pub use histeq::hist_equalize;
pub use stats::{dataset_stats, AttributeHistogram, StatsReport, ValueShare};
