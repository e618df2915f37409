use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{FiniteSpace, Metric, SpaceFile};
use crate::{Error, Result};

/// Built-in example spaces. Grids carry unit weights and concentric levels:
/// a point's level is `ceil(levels · m)` clamped to `[1, levels]`, where `m`
/// is its largest normalized coordinate offset from the grid center.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    EuclideanGrid {
        dim: usize,
        side: usize,
        levels: u32,
        #[serde(default = "unit")]
        spacing: f64,
    },
    /// `side³` points of the first Heisenberg group with the Korányi gauge.
    HeisenbergGrid {
        side: usize,
        levels: u32,
        #[serde(default = "unit")]
        spacing: f64,
    },
    /// `side²` points `(x, t)` with the parabolic distance.
    ParabolicGrid {
        side: usize,
        levels: u32,
        #[serde(default = "unit")]
        spacing: f64,
    },
    AsymmetricGrid {
        side: usize,
        skew: f64,
        levels: u32,
        #[serde(default = "unit")]
        spacing: f64,
    },
    FromFile {
        path: PathBuf,
    },
}

fn unit() -> f64 {
    1.0
}

pub fn generate(g: &Generator) -> Result<FiniteSpace> {
    match *g {
        Generator::EuclideanGrid { dim, side, levels, spacing } => grid(dim, side, levels, spacing, false, Metric::Euclidean),
        Generator::HeisenbergGrid { side, levels, spacing } => grid(3, side, levels, spacing, true, Metric::Heisenberg),
        Generator::ParabolicGrid { side, levels, spacing } => grid(2, side, levels, spacing, false, Metric::Parabolic),
        Generator::AsymmetricGrid { side, skew, levels, spacing } => {
            if !(skew >= 1.0 && skew.is_finite()) {
                return Err(Error::input(format!("skew must be at least 1, got {skew}")));
            }
            grid(1, side, levels, spacing, false, Metric::Asymmetric { skew })
        }
        Generator::FromFile { ref path } => SpaceFile::read(path)?.into_space(),
    }
}

fn grid(dim: usize, side: usize, levels: u32, spacing: f64, centered: bool, metric: Metric) -> Result<FiniteSpace> {
    if dim == 0 || side == 0 || levels == 0 {
        return Err(Error::input("grid dimension, side and levels must be positive"));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::input(format!("spacing must be positive, got {spacing}")));
    }
    let count = side
        .checked_pow(dim as u32)
        .filter(|&c| c <= 1 << 24)
        .ok_or_else(|| Error::input("grid too large"))?;
    let span = side - 1;
    let mut coords = Vec::with_capacity(count);
    let mut lv = Vec::with_capacity(count);
    let mut idx = vec![0usize; dim];
    for _ in 0..count {
        let offset = idx.iter().map(|&i| (2 * i).abs_diff(span)).max().unwrap_or(0);
        let level = if span == 0 {
            1
        } else {
            ((levels as usize * offset).div_ceil(span)).clamp(1, levels as usize) as u32
        };
        lv.push(level);
        coords.push(
            idx.iter()
                .map(|&i| if centered { (2.0 * i as f64 - span as f64) / 2.0 * spacing } else { i as f64 * spacing })
                .collect(),
        );
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < side {
                break;
            }
            *slot = 0;
        }
    }
    FiniteSpace::new(metric, coords, vec![1.0; count], lv)
}

impl FromStr for Generator {
    type Err = Error;

    /// Parses `kind:key=value,…`, e.g. `euclidean-grid:dim=1,side=20,levels=3`
    /// or `from-file:path=space.json`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut obj = serde_json::Map::new();
        obj.insert("kind".into(), kind.trim().into());
        for kv in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::input(format!("expected key=value, got `{kv}`")))?;
            let v = v.trim();
            let value = match v.parse::<f64>() {
                Ok(x) if k.trim() != "path" => {
                    if x.fract() == 0.0 && x >= 0.0 && !v.contains('.') {
                        serde_json::Value::from(x as u64)
                    } else {
                        serde_json::Value::from(x)
                    }
                }
                _ => serde_json::Value::from(v),
            };
            obj.insert(k.trim().replace('-', "_"), value);
        }
        serde_json::from_value(serde_json::Value::Object(obj)).map_err(|e| Error::input(format!("bad generator `{s}`: {e}")))
    }
}
