//! Scenario model, seeded random map generation, JSON persistence and
//! validation.
//!
//! Maps come in four families (short/large/sparse/dense). Generation is a
//! pure function of the [`MapSpec`], including its seed: obstacle placement
//! uses the documented splitmix stream and coverage is estimated over a fixed
//! Monte-Carlo sample set, so two calls with the same spec produce
//! byte-identical scenarios.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Ellipse, Point2};
use crate::rng::SplitMix64;

/// Obstacle semi-major axis range for generated maps, meters.
const OBSTACLE_A_RANGE: (f64, f64) = (10.0, 60.0);
/// Obstacle semi-minor axis lower bound, meters (upper bound is `a`).
const OBSTACLE_B_MIN: f64 = 5.0;
/// Generation stops inside `coverage ± GEN_WINDOW`, which keeps an
/// independent 1e5-sample estimate within the documented `± 0.02`.
const GEN_WINDOW: f64 = 0.01;
/// Monte-Carlo samples used while generating.
const GEN_SAMPLES: usize = 100_000;
/// Candidate rejections (or start/target placement attempts) before giving up.
const MAX_REJECTIONS: usize = 100_000;
/// Coverage targets above this fail immediately: past it the inflated union
/// saturates the map and endpoint placement or planning degenerates.
const COVERAGE_CEILING: f64 = 0.90;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("{path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("invalid scenario: {}", violations.join("; "))]
    Validation { violations: Vec<String> },
    #[error("map generation failed: {0}")]
    GenerationFailed(String),
    #[error("invalid map spec: {0}")]
    InvalidSpec(String),
}

/// The four benchmark map families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapFamily {
    Short,
    Large,
    Sparse,
    Dense,
}

impl MapFamily {
    pub const ALL: [MapFamily; 4] = [
        MapFamily::Short,
        MapFamily::Large,
        MapFamily::Sparse,
        MapFamily::Dense,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MapFamily::Short => "short",
            MapFamily::Large => "large",
            MapFamily::Sparse => "sparse",
            MapFamily::Dense => "dense",
        }
    }
}

impl fmt::Display for MapFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MapFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "short" => Ok(MapFamily::Short),
            "large" => Ok(MapFamily::Large),
            "sparse" => Ok(MapFamily::Sparse),
            "dense" => Ok(MapFamily::Dense),
            other => Err(format!(
                "unknown map family '{other}' (expected short|large|sparse|dense)"
            )),
        }
    }
}

/// Recipe for one generated map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapSpec {
    pub family: MapFamily,
    /// Side length of the square map, meters.
    pub size: f64,
    /// Target fraction of map area covered by the obstacle union.
    pub coverage: f64,
    pub seed: u64,
}

impl MapSpec {
    /// Family defaults: short and sparse/dense maps are 500 m square, large
    /// maps 1000 m; sparse covers 10% and dense 60% of the area.
    pub fn new(family: MapFamily, seed: u64) -> Self {
        let (size, coverage) = match family {
            MapFamily::Short => (500.0, 0.25),
            MapFamily::Large => (1000.0, 0.25),
            MapFamily::Sparse => (500.0, 0.10),
            MapFamily::Dense => (500.0, 0.60),
        };
        Self {
            family,
            size,
            coverage,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let err = |msg: String| Err(WorldError::InvalidSpec(msg));
        if self.size <= 0.0 || !self.size.is_finite() {
            return err(format!("size must be positive, got {}", self.size));
        }
        if !(0.0..1.0).contains(&self.coverage) {
            return err(format!("coverage must be in [0, 1), got {}", self.coverage));
        }
        match self.family {
            MapFamily::Sparse if self.coverage != 0.10 => {
                err(format!("sparse maps cover 10%, got {}", self.coverage))
            }
            MapFamily::Dense if self.coverage < 0.60 => err(format!(
                "dense maps cover at least 60%, got {}",
                self.coverage
            )),
            MapFamily::Short if self.size != 500.0 => {
                err(format!("short maps are 500 m square, got {}", self.size))
            }
            MapFamily::Large if self.size != 1000.0 => {
                err(format!("large maps are 1000 m square, got {}", self.size))
            }
            _ => Ok(()),
        }
    }
}

/// Planner knobs shared by the static and dynamic planners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerParams {
    /// Safety inflation added to every obstacle, meters.
    pub r_safe: f64,
    /// Extra inflation of the virtual ellipse that hosts waypoints, meters.
    pub d_vir: f64,
    /// Weight of the blocked-obstacle count in the waypoint heuristic,
    /// meters per obstacle.
    pub alpha_weight: f64,
    /// Maximum turning angle accepted when committing a candidate waypoint,
    /// radians in (0, pi].
    pub theta_max: f64,
    /// Sensor range for the dynamic planners, meters.
    pub sensor_range: f64,
    /// Expansion budget for waypoint collection and for the outer search.
    pub max_expansions: u64,
}

impl PlannerParams {
    /// Defaults, with the expansion budget scaled to the obstacle count.
    pub fn defaults_for(n_obstacles: usize) -> Self {
        Self {
            r_safe: 2.0,
            d_vir: 1.0,
            alpha_weight: 10.0,
            theta_max: 3.0 * std::f64::consts::FRAC_PI_4,
            sensor_range: 60.0,
            max_expansions: 10 * (n_obstacles.max(10) as u64),
        }
    }

    pub fn invariant_violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let positive = [
            ("r_safe", self.r_safe),
            ("d_vir", self.d_vir),
            ("alpha_weight", self.alpha_weight),
            ("sensor_range", self.sensor_range),
        ];
        for (name, value) in positive {
            if value <= 0.0 || !value.is_finite() {
                v.push(format!("params.{name} must be positive, got {value}"));
            }
        }
        if self.theta_max.is_nan() || self.theta_max <= 0.0 || self.theta_max > std::f64::consts::PI
        {
            v.push(format!(
                "params.theta_max must lie in (0, pi], got {}",
                self.theta_max
            ));
        }
        if self.max_expansions == 0 {
            v.push("params.max_expansions must be positive".to_string());
        }
        v
    }
}

/// A planning problem: bounds, endpoints, obstacles (with the hidden ones
/// only the dynamic planners may discover), and planner parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub width: f64,
    pub height: f64,
    pub start: Point2,
    pub target: Point2,
    /// Obstacles known to the offline planner. Each carries
    /// `params.r_safe` as its inflation.
    pub obstacles: Vec<Ellipse>,
    /// Obstacles unknown until sensed at runtime.
    pub hidden_obstacles: Vec<Ellipse>,
    pub params: PlannerParams,
}

impl Scenario {
    /// All physical obstacles, visible first; ids used by the sensor model
    /// index into this ordering.
    pub fn all_obstacles(&self) -> Vec<Ellipse> {
        let mut v = self.obstacles.clone();
        v.extend_from_slice(&self.hidden_obstacles);
        v
    }

    pub fn contains(&self, p: Point2) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }
}

/// Checks every scenario invariant; empty result means the scenario is valid.
pub fn validate(s: &Scenario) -> Vec<String> {
    let mut v = Vec::new();
    if s.width <= 0.0 || !s.width.is_finite() || s.height <= 0.0 || !s.height.is_finite() {
        v.push(format!(
            "bounds must be positive, got {} x {}",
            s.width, s.height
        ));
    }
    for (name, p) in [("start", s.start), ("target", s.target)] {
        if !p.is_finite() {
            v.push(format!("{name} must be finite"));
        } else if !s.contains(p) {
            v.push(format!(
                "{name} ({}, {}) is outside the map bounds",
                p.x, p.y
            ));
        }
    }
    let lists = [
        ("obstacle", &s.obstacles),
        ("hidden obstacle", &s.hidden_obstacles),
    ];
    for (label, list) in lists {
        for (i, e) in list.iter().enumerate() {
            for msg in e.invariant_violations() {
                v.push(format!("{label} {i}: {msg}"));
            }
            if e.r_safe != s.params.r_safe {
                v.push(format!(
                    "{label} {i}: safety inflation {} differs from params.r_safe {}",
                    e.r_safe, s.params.r_safe
                ));
            }
            for (name, p) in [("start", s.start), ("target", s.target)] {
                if e.invariant_violations().is_empty() && e.value(p) <= 1.0 {
                    v.push(format!(
                        "{name} is not strictly outside inflated {label} {i}"
                    ));
                }
            }
        }
    }
    v.extend(s.params.invariant_violations());
    v
}

/// Fraction of `n_samples` uniform points covered by the union of the raw
/// (uninflated) obstacles, visible and hidden. The independent coverage
/// oracle for generated maps.
pub fn estimate_coverage(s: &Scenario, n_samples: usize, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let raw: Vec<Ellipse> = s
        .all_obstacles()
        .iter()
        .map(|e| Ellipse { r_safe: 0.0, ..*e })
        .collect();
    let boxes: Vec<BoundingBox> = raw.iter().map(BoundingBox::of).collect();
    let mut hit = 0usize;
    for _ in 0..n_samples {
        let p = Point2::new(rng.uniform(0.0, s.width), rng.uniform(0.0, s.height));
        if raw
            .iter()
            .zip(&boxes)
            .any(|(e, bb)| bb.contains(p) && e.value(p) < 1.0)
        {
            hit += 1;
        }
    }
    hit as f64 / n_samples as f64
}

struct BoundingBox {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl BoundingBox {
    fn of(e: &Ellipse) -> Self {
        let (sin_t, cos_t) = e.theta.sin_cos();
        let a = e.semi_major();
        let b = e.semi_minor();
        let hw = ((a * cos_t).powi(2) + (b * sin_t).powi(2)).sqrt();
        let hh = ((a * sin_t).powi(2) + (b * cos_t).powi(2)).sqrt();
        Self {
            x0: e.cx - hw,
            x1: e.cx + hw,
            y0: e.cy - hh,
            y1: e.cy + hh,
        }
    }

    #[inline]
    fn contains(&self, p: Point2) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }
}

/// Generates a random scenario for the given map recipe; deterministic in
/// the seed.
///
/// Obstacles are sampled (semi-major in [10, 60] m, semi-minor in [5, a],
/// uniform rotation, uniform center) and accepted unless they push the
/// Monte-Carlo union coverage past the target window; overlapping obstacles
/// are allowed. Start and target are re-sampled near the lower-left and
/// upper-right corners until strictly outside all inflated obstacles.
pub fn generate_map(spec: &MapSpec) -> Result<Scenario, WorldError> {
    spec.validate()?;
    if spec.coverage > COVERAGE_CEILING {
        return Err(WorldError::GenerationFailed(format!(
            "coverage target {} is unreachable (generator ceiling {})",
            spec.coverage, COVERAGE_CEILING
        )));
    }
    let (w, h) = (spec.size, spec.size);

    let mut rng = SplitMix64::new(spec.seed);
    let mut mc_rng = rng.split();
    let mut obstacle_rng = rng.split();
    let mut place_rng = rng.split();

    let samples: Vec<Point2> = (0..GEN_SAMPLES)
        .map(|_| Point2::new(mc_rng.uniform(0.0, w), mc_rng.uniform(0.0, h)))
        .collect();
    let mut covered = vec![false; GEN_SAMPLES];
    let mut covered_count = 0usize;

    let lo = spec.coverage - GEN_WINDOW;
    let hi = spec.coverage + GEN_WINDOW;
    let mut raw_obstacles: Vec<Ellipse> = Vec::new();
    let mut rejections = 0usize;

    // Endpoint anchors at the centers of the start/target corner bands stay
    // strictly clear (one meter beyond the default inflation), so endpoint
    // placement cannot be starved even on dense maps.
    let default_r_safe = PlannerParams::defaults_for(0).r_safe;
    let anchors = [
        Point2::new(0.085 * w, 0.085 * h),
        Point2::new(0.915 * w, 0.915 * h),
    ];

    while (covered_count as f64) < lo * GEN_SAMPLES as f64 {
        let cx = obstacle_rng.uniform(0.0, w);
        let cy = obstacle_rng.uniform(0.0, h);
        let a = obstacle_rng.uniform(OBSTACLE_A_RANGE.0, OBSTACLE_A_RANGE.1);
        let b = obstacle_rng.uniform(OBSTACLE_B_MIN, a);
        let theta = obstacle_rng.uniform(0.0, std::f64::consts::PI);
        let candidate = Ellipse::new(cx, cy, a, b, theta, 0.0);
        let bb = BoundingBox::of(&candidate);

        let guard = candidate.enlarged(default_r_safe + 1.0);
        if anchors.iter().any(|&p| guard.value(p) <= 1.0) {
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                return Err(WorldError::GenerationFailed(format!(
                    "coverage {} unreachable after {} rejected obstacles",
                    spec.coverage, MAX_REJECTIONS
                )));
            }
            continue;
        }

        let newly: Vec<usize> = samples
            .iter()
            .enumerate()
            .filter(|(i, p)| !covered[*i] && bb.contains(**p) && candidate.value(**p) < 1.0)
            .map(|(i, _)| i)
            .collect();

        if (covered_count + newly.len()) as f64 > hi * GEN_SAMPLES as f64 {
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                return Err(WorldError::GenerationFailed(format!(
                    "coverage {} unreachable after {} rejected obstacles (reached {:.4})",
                    spec.coverage,
                    MAX_REJECTIONS,
                    covered_count as f64 / GEN_SAMPLES as f64
                )));
            }
            continue;
        }
        for i in newly {
            covered[i] = true;
            covered_count += 1;
        }
        raw_obstacles.push(candidate);
    }

    let params = PlannerParams::defaults_for(raw_obstacles.len());
    let obstacles: Vec<Ellipse> = raw_obstacles
        .iter()
        .map(|e| Ellipse {
            r_safe: params.r_safe,
            ..*e
        })
        .collect();

    let start = place_endpoint(&mut place_rng, w, h, (0.02, 0.15), &obstacles, "start")?;
    let target = place_endpoint(&mut place_rng, w, h, (0.85, 0.98), &obstacles, "target")?;

    Ok(Scenario {
        width: w,
        height: h,
        start,
        target,
        obstacles,
        hidden_obstacles: Vec::new(),
        params,
    })
}

fn place_endpoint(
    rng: &mut SplitMix64,
    w: f64,
    h: f64,
    band: (f64, f64),
    obstacles: &[Ellipse],
    name: &str,
) -> Result<Point2, WorldError> {
    for _ in 0..MAX_REJECTIONS {
        let p = Point2::new(
            rng.uniform(band.0 * w, band.1 * w),
            rng.uniform(band.0 * h, band.1 * h),
        );
        if obstacles.iter().all(|e| e.value(p) > 1.0) {
            return Ok(p);
        }
    }
    Err(WorldError::GenerationFailed(format!(
        "no free {name} position found in the corner region after {MAX_REJECTIONS} attempts"
    )))
}

// --- persistence ------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ScenarioDoc {
    width: f64,
    height: f64,
    start: [f64; 2],
    target: [f64; 2],
    obstacles: Vec<ObstacleDoc>,
    hidden_obstacles: Vec<ObstacleDoc>,
    params: ParamsDoc,
}

#[derive(Serialize, Deserialize)]
struct ObstacleDoc {
    cx: f64,
    cy: f64,
    a: f64,
    b: f64,
    theta: f64,
}

#[derive(Serialize, Deserialize)]
struct ParamsDoc {
    r_safe: f64,
    d_vir: f64,
    alpha_weight: f64,
    theta_max: f64,
    sensor_range: f64,
    max_expansions: u64,
}

impl ScenarioDoc {
    fn from_scenario(s: &Scenario) -> Self {
        let obstacle = |e: &Ellipse| ObstacleDoc {
            cx: e.cx,
            cy: e.cy,
            a: e.a,
            b: e.b,
            theta: e.theta,
        };
        Self {
            width: s.width,
            height: s.height,
            start: [s.start.x, s.start.y],
            target: [s.target.x, s.target.y],
            obstacles: s.obstacles.iter().map(obstacle).collect(),
            hidden_obstacles: s.hidden_obstacles.iter().map(obstacle).collect(),
            params: ParamsDoc {
                r_safe: s.params.r_safe,
                d_vir: s.params.d_vir,
                alpha_weight: s.params.alpha_weight,
                theta_max: s.params.theta_max,
                sensor_range: s.params.sensor_range,
                max_expansions: s.params.max_expansions,
            },
        }
    }

    fn into_scenario(self) -> Scenario {
        let r_safe = self.params.r_safe;
        let obstacle = |d: &ObstacleDoc| Ellipse::new(d.cx, d.cy, d.a, d.b, d.theta, r_safe);
        Scenario {
            width: self.width,
            height: self.height,
            start: Point2::new(self.start[0], self.start[1]),
            target: Point2::new(self.target[0], self.target[1]),
            obstacles: self.obstacles.iter().map(obstacle).collect(),
            hidden_obstacles: self.hidden_obstacles.iter().map(obstacle).collect(),
            params: PlannerParams {
                r_safe,
                d_vir: self.params.d_vir,
                alpha_weight: self.params.alpha_weight,
                theta_max: self.params.theta_max,
                sensor_range: self.params.sensor_range,
                max_expansions: self.params.max_expansions,
            },
        }
    }
}

/// Serializes a scenario to its JSON document form.
pub fn scenario_to_json(s: &Scenario) -> String {
    let mut out = serde_json::to_string_pretty(&ScenarioDoc::from_scenario(s))
        .expect("scenario serialization cannot fail");
    out.push('\n');
    out
}

/// Parses a scenario from JSON and checks every invariant.
pub fn scenario_from_json(text: &str, origin: &str) -> Result<Scenario, WorldError> {
    let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| WorldError::Parse {
        path: origin.to_string(),
        msg: e.to_string(),
    })?;
    let scenario = doc.into_scenario();
    let violations = validate(&scenario);
    if violations.is_empty() {
        Ok(scenario)
    } else {
        Err(WorldError::Validation { violations })
    }
}

pub fn save_scenario(s: &Scenario, path: &Path) -> Result<(), WorldError> {
    std::fs::write(path, scenario_to_json(s)).map_err(|e| WorldError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario, WorldError> {
    let text = std::fs::read_to_string(path).map_err(|e| WorldError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    scenario_from_json(&text, &path.display().to_string())
}
