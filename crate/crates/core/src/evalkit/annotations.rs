//! JSON-lines annotation and detection files.
//!
//! Ground truth, one image per line:
//!
//! ```text
//! {"image_id": "img_001", "boxes": [
//!     {"x_min": 10, "y_min": 12, "x_max": 40, "y_max": 50,
//!      "attributes": {"difficulty": "hard", "emotion": "happy", ...}}]}
//! ```
//!
//! Detections use the same layout with a `score` on each box (default 1.0,
//! so a ground-truth file doubles as a perfect detection file).

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::bbox::BBox;
use crate::error::{Error, Result};

macro_rules! attribute_enum {
    ($(#[$meta:meta])* $name:ident, $field:literal { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const FIELD: &'static str = $field;
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }

            pub fn parse(s: &str) -> Option<Self> {
                match s {
                    $($text => Some($name::$variant),)+
                    _ => None,
                }
            }
        }
    };
}

attribute_enum!(
    /// Is the face difficult to spot?
    Difficulty, "difficulty" { Easy => "easy", Medium => "medium", Hard => "hard" }
);
attribute_enum!(Emotion, "emotion" {
    Neutral => "neutral", Happy => "happy", Sad => "sad", Surprised => "surprised",
    Angry => "angry", Disgusted => "disgusted", Scared => "scared", Other => "other",
});
attribute_enum!(
    /// Accidental face, or one made on purpose.
    Origin, "origin" { Accident => "accident", Design => "design" }
);
attribute_enum!(Resemblance, "resemblance" {
    HumanBaby => "human-baby", HumanChild => "human-child", HumanAdult => "human-adult",
    HumanOlder => "human-older", Alien => "alien", Animal => "animal", Cartoon => "cartoon",
    Robot => "robot", Other => "other",
});
attribute_enum!(Gender, "gender" { Neutral => "neutral", Female => "female", Male => "male" });
attribute_enum!(Amusing, "amusing" { No => "no", Somewhat => "somewhat", Yes => "yes" });
attribute_enum!(Commonness, "commonness" {
    Uncommon => "uncommon", Somewhat => "somewhat", Common => "common",
});

/// Per-face labels; any of them may be missing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceAttributes {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<Difficulty>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emotion: Option<Emotion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Origin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resemblance: Option<Resemblance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<Gender>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amusing: Option<Amusing>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commonness: Option<Commonness>,
}

impl FaceAttributes {
    pub const FIELDS: [&'static str; 7] = [
        Difficulty::FIELD,
        Emotion::FIELD,
        Origin::FIELD,
        Resemblance::FIELD,
        Gender::FIELD,
        Amusing::FIELD,
        Commonness::FIELD,
    ];

    /// Allowed values of attribute `field`, in declaration order.
    pub fn values_of(field: &str) -> Option<Vec<&'static str>> {
        fn names<T: Copy>(all: &[T], f: fn(T) -> &'static str) -> Vec<&'static str> {
            all.iter().map(|&v| f(v)).collect()
        }
        Some(match field {
            "difficulty" => names(Difficulty::ALL, Difficulty::as_str),
            "emotion" => names(Emotion::ALL, Emotion::as_str),
            "origin" => names(Origin::ALL, Origin::as_str),
            "resemblance" => names(Resemblance::ALL, Resemblance::as_str),
            "gender" => names(Gender::ALL, Gender::as_str),
            "amusing" => names(Amusing::ALL, Amusing::as_str),
            "commonness" => names(Commonness::ALL, Commonness::as_str),
            _ => return None,
        })
    }

    pub fn get(&self, field: &str) -> Option<&'static str> {
        match field {
            "difficulty" => self.difficulty.map(Difficulty::as_str),
            "emotion" => self.emotion.map(Emotion::as_str),
            "origin" => self.origin.map(Origin::as_str),
            "resemblance" => self.resemblance.map(Resemblance::as_str),
            "gender" => self.gender.map(Gender::as_str),
            "amusing" => self.amusing.map(Amusing::as_str),
            "commonness" => self.commonness.map(Commonness::as_str),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedBox {
    #[serde(flatten)]
    pub bbox: BBox,
    #[serde(default)]
    pub attributes: FaceAttributes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub image_id: String,
    #[serde(default)]
    pub boxes: Vec<AnnotatedBox>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub image_id: String,
    pub bbox: BBox,
    pub score: f64,
}

#[derive(Deserialize)]
struct DetectionLine {
    image_id: String,
    #[serde(default)]
    boxes: Vec<ScoredBox>,
}

#[derive(Deserialize)]
struct ScoredBox {
    #[serde(flatten)]
    bbox: BBox,
    #[serde(default = "default_score")]
    score: f64,
}

fn default_score() -> f64 {
    1.0
}

/// `attribute=value` restriction on ground-truth boxes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetFilter {
    pub field: String,
    pub value: String,
}

impl SubsetFilter {
    pub fn parse(spec: &str) -> Result<Self> {
        let (field, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::param(format!("subset must be attribute=value, got {spec:?}")))?;
        let allowed = FaceAttributes::values_of(field)
            .ok_or_else(|| Error::param(format!("unknown attribute {field:?}")))?;
        if !allowed.contains(&value) {
            return Err(Error::param(format!(
                "{value:?} is not a value of {field} (expected one of {})",
                allowed.join(", ")
            )));
        }
        Ok(Self {
            field: field.to_string(),
            value: value.to_string(),
        })
    }

    pub fn matches(&self, b: &AnnotatedBox) -> bool {
        b.attributes.get(&self.field) == Some(self.value.as_str())
    }
}

fn parse_lines<R: BufRead, T>(
    input: R,
    source_name: &str,
    mut parse: impl FnMut(serde_json::Value) -> std::result::Result<T, String>,
) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source_name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let ingest = |message: String| Error::Ingest {
            source_name: source_name.to_string(),
            line: i + 1,
            message,
        };
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| ingest(e.to_string()))?;
        let id = value
            .get("image_id")
            .and_then(|v| v.as_str())
            .map(str::to_string);
        out.push(parse(value).map_err(|e| match id {
            Some(id) => ingest(format!("record {id:?}: {e}")),
            None => ingest(e),
        })?);
    }
    Ok(out)
}

pub fn read_annotations<R: BufRead>(input: R, source_name: &str) -> Result<Vec<AnnotationRecord>> {
    parse_lines(input, source_name, |v| {
        serde_json::from_value::<AnnotationRecord>(v).map_err(|e| e.to_string())
    })
}

pub fn read_detections<R: BufRead>(input: R, source_name: &str) -> Result<Vec<DetectionRecord>> {
    let lines = parse_lines(input, source_name, |v| {
        let line = serde_json::from_value::<DetectionLine>(v).map_err(|e| e.to_string())?;
        for b in &line.boxes {
            if !(0.0..=1.0).contains(&b.score) {
                return Err(format!("score {} outside [0, 1]", b.score));
            }
        }
        Ok(line)
    })?;
    Ok(lines
        .into_iter()
        .flat_map(|l| {
            let id = l.image_id;
            l.boxes.into_iter().map(move |b| DetectionRecord {
                image_id: id.clone(),
                bbox: b.bbox,
                score: b.score,
            })
        })
        .collect())
}
