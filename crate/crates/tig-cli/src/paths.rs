//! Planned-path file format: waypoints, the optional smoothed polyline, and
//! planner bookkeeping, as one JSON document.

use anyhow::{Context, Result};
use std::path::Path;

use tig_core::geometry::Point2;
use tig_core::smoothing::SmoothedPath;
use tig_core::stig::PlannedPath;

pub struct PathDoc {
    pub algo: String,
    pub status: String,
    pub expansions: u64,
    pub waypoints: Vec<Point2>,
    pub smoothed: Option<Vec<Point2>>,
}

impl PathDoc {
    pub fn new(algo: &str, path: &PlannedPath, smoothed: Option<&SmoothedPath>) -> Self {
        Self {
            algo: algo.to_string(),
            status: path.status.to_string(),
            expansions: path.expansions,
            waypoints: path.waypoints.clone(),
            smoothed: smoothed.map(|s| s.polyline.clone()),
        }
    }

    pub fn to_json(&self) -> String {
        let points = |pts: &[Point2]| -> Vec<[f64; 2]> { pts.iter().map(|p| [p.x, p.y]).collect() };
        let mut doc = serde_json::json!({
            "algo": self.algo,
            "status": self.status,
            "expansions": self.expansions,
            "waypoints": points(&self.waypoints),
        });
        if let Some(smoothed) = &self.smoothed {
            doc["smoothed"] = serde_json::json!(points(smoothed));
        }
        let mut out = serde_json::to_string_pretty(&doc).expect("path document serialization");
        out.push('\n');
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())
            .with_context(|| format!("writing path file {}", path.display()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading path file {}", path.display()))?;
        let v: serde_json::Value = serde_json::from_str(&text)
            .with_context(|| format!("parsing path file {}", path.display()))?;
        let points = |v: &serde_json::Value| -> Vec<Point2> {
            v.as_array()
                .map(|items| {
                    items
                        .iter()
                        .filter_map(|it| {
                            let a = it.as_array()?;
                            Some(Point2::new(a.first()?.as_f64()?, a.get(1)?.as_f64()?))
                        })
                        .collect()
                })
                .unwrap_or_default()
        };
        Ok(Self {
            algo: v["algo"].as_str().unwrap_or("unknown").to_string(),
            status: v["status"].as_str().unwrap_or("unknown").to_string(),
            expansions: v["expansions"].as_u64().unwrap_or(0),
            waypoints: points(&v["waypoints"]),
            smoothed: if v["smoothed"].is_array() {
                Some(points(&v["smoothed"]))
            } else {
                None
            },
        })
    }
}
