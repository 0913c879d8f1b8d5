//! Counting-experiment analysis: trial cleaning, per-subject and population
//! curves, response times, group comparisons, and fitting the Gaussian mode
//! model to a face-count curve.

mod aggregate;
mod fit;
mod synth;
mod trials;

pub use aggregate::{
    compare_groups, population_curve, rt_curve, subject_curves, Band, GroupComparison,
    GroupCurve, GroupDifference, GroupFactor, PopulationCurve, SubjectCurve, SubjectPoint,
};
pub use fit::{fit_gaussian_model, FitResult, GridEntry};
pub use synth::{synthesize_trials, SynthDesign};
pub use trials::{
    clean_trials, read_trials, write_trials, CleanOutcome, DropReason, SubjectGender, TrialRecord,
    BREAK_RT_MS, TOO_FAST_RT_MS,
};
