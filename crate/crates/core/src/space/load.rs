use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MetricMeasureSpace, MetricSource};
use crate::error::{Error, Result};

/// On-disk form of a space:
///
/// ```json
/// {"metric": "euclidean", "points": [[0.0], [1.0]], "weights": [1.0, 2.0]}
/// {"metric": "matrix", "distance_matrix": [[0, 1], [1, 0]]}
/// ```
///
/// Exactly one of `points` / `distance_matrix` must be present and must match
/// `metric`. `weights` defaults to unit masses.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDocument {
    pub metric: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl SpaceDocument {
    pub fn into_space(self) -> Result<MetricMeasureSpace> {
        match (self.metric.as_str(), self.points, self.distance_matrix) {
            ("euclidean", Some(points), None) => MetricMeasureSpace::from_points(points, self.weights),
            ("matrix", None, Some(matrix)) => MetricMeasureSpace::from_matrix(matrix, self.weights),
            ("euclidean", _, Some(_)) => Err(Error::space(
                "distance_matrix",
                "not allowed when metric is \"euclidean\"",
            )),
            ("euclidean", None, None) => Err(Error::space("points", "required when metric is \"euclidean\"")),
            ("matrix", Some(_), _) => Err(Error::space("points", "not allowed when metric is \"matrix\"")),
            ("matrix", None, None) => Err(Error::space(
                "distance_matrix",
                "required when metric is \"matrix\"",
            )),
            (other, _, _) => Err(Error::space(
                "metric",
                format!("expected \"euclidean\" or \"matrix\", found \"{other}\""),
            )),
        }
    }

    pub fn from_space(space: &MetricMeasureSpace) -> Self {
        let n = space.len();
        let weights = Some(space.weights().to_vec());
        match space.metric() {
            MetricSource::Coords { dim, coords } => SpaceDocument {
                metric: "euclidean".into(),
                points: Some(coords.chunks(*dim).map(<[f64]>::to_vec).collect()),
                distance_matrix: None,
                weights,
            },
            MetricSource::Matrix { matrix } => SpaceDocument {
                metric: "matrix".into(),
                points: None,
                distance_matrix: Some(matrix.chunks(n).map(<[f64]>::to_vec).collect()),
                weights,
            },
        }
    }
}

impl MetricMeasureSpace {
    /// Parses and validates a space document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: SpaceDocument = serde_json::from_str(text)?;
        doc.into_space()
    }

    /// Reads a space file; errors carry the file path.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        fs::read_to_string(path)
            .map_err(Error::from)
            .and_then(|text| Self::from_json_str(&text))
            .map_err(|e| Error::in_file(path, e))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&SpaceDocument::from_space(self)).expect("space documents serialize")
    }
}
