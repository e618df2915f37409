use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FiniteSpace, LevelConstants, Metric};
use crate::{Error, Result};

/// JSON form of a space.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    pub points: Vec<PointRecord>,
    pub metric: MetricFile,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constants: Vec<LevelConstants>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointRecord {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
    pub weight: f64,
    pub level: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricFile {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skew: Option<f64>,
    /// Use `ρ(x, y) + ρ(y, x)` for the closed-form rule.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub symmetrized: bool,
}

impl SpaceFile {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn from_space(space: &FiniteSpace) -> Self {
        let n = space.len();
        let (inner, symmetrized) = match space.metric() {
            Metric::Symmetrized(inner) => (inner.as_ref(), true),
            m => (m, false),
        };
        let metric = match inner {
            Metric::Matrix(m) => MetricFile {
                kind: "matrix".into(),
                matrix: Some(m.chunks(n).map(|r| r.to_vec()).collect()),
                skew: None,
                symmetrized,
            },
            other => MetricFile {
                kind: other.name().into(),
                matrix: None,
                skew: match other {
                    Metric::Asymmetric { skew } => Some(*skew),
                    _ => None,
                },
                symmetrized,
            },
        };
        SpaceFile {
            points: space
                .points()
                .map(|x| PointRecord {
                    id: x,
                    coords: space.coords(x).map(|c| c.to_vec()),
                    weight: space.weight(x),
                    level: space.level(x),
                })
                .collect(),
            metric,
            constants: space.declared_constants().to_vec(),
        }
    }

    pub fn into_space(self) -> Result<FiniteSpace> {
        let n = self.points.len();
        let mut points = self.points;
        points.sort_by_key(|p| p.id);
        if points.iter().enumerate().any(|(i, p)| p.id != i) {
            return Err(Error::input("point ids must be exactly 0..N-1"));
        }
        let mut metric = match self.metric.kind.as_str() {
            "matrix" => {
                let rows = self.metric.matrix.ok_or_else(|| Error::input("matrix metric needs `matrix`"))?;
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::input(format!("matrix must be {n}×{n}")));
                }
                Metric::Matrix(rows.into_iter().flatten().collect())
            }
            "euclidean" => Metric::Euclidean,
            "heisenberg" => Metric::Heisenberg,
            "parabolic" => Metric::Parabolic,
            "asymmetric" => Metric::Asymmetric {
                skew: self.metric.skew.ok_or_else(|| Error::input("asymmetric metric needs `skew`"))?,
            },
            other => return Err(Error::input(format!("unknown metric type `{other}`"))),
        };
        let coords = if matches!(metric, Metric::Matrix(_)) {
            Vec::new()
        } else {
            points
                .iter()
                .map(|p| p.coords.clone().ok_or_else(|| Error::input(format!("point {} needs coords", p.id))))
                .collect::<Result<_>>()?
        };
        let weights = points.iter().map(|p| p.weight).collect();
        let levels = points.iter().map(|p| p.level).collect();
        let symmetrized = self.metric.symmetrized;
        if symmetrized && !matches!(metric, Metric::Matrix(_)) {
            metric = Metric::Symmetrized(Box::new(metric));
        }
        let mut space = FiniteSpace::new(metric, coords, weights, levels)?;
        if symmetrized && matches!(space.metric(), Metric::Matrix(_)) {
            space = space.symmetrize();
        }
        Ok(space.with_declared_constants(self.constants))
    }
}
