//! Run configuration: parsing, typed range checks and defaults.
//!
//! Input is a TOML document with dotted sections or a `manifest.json` written
//! by an earlier run. Every key that is read is recorded with its final value,
//! so the resolved tree is complete and can be hashed or replayed.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::rdm::Locking;
use crate::units::UnitSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    ElectronInterference,
    RdmSample,
    RdmTrajectory,
    DetectorScenario,
    RelativityScan,
    AcPhase,
    HydrogenCloud,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::ElectronInterference,
        Experiment::RdmSample,
        Experiment::RdmTrajectory,
        Experiment::DetectorScenario,
        Experiment::RelativityScan,
        Experiment::AcPhase,
        Experiment::HydrogenCloud,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::ElectronInterference => "electron-interference",
            Experiment::RdmSample => "rdm-sample",
            Experiment::RdmTrajectory => "rdm-trajectory",
            Experiment::DetectorScenario => "detector-scenario",
            Experiment::RelativityScan => "relativity-scan",
            Experiment::AcPhase => "ac-phase",
            Experiment::HydrogenCloud => "hydrogen-cloud",
        }
    }

    pub fn names() -> String {
        Self::ALL.iter().map(|e| e.as_str()).collect::<Vec<_>>().join(", ")
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| format!("unknown experiment '{s}' (expected one of: {})", Self::names()))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketParams {
    pub x0: f64,
    pub sigma: f64,
    pub p0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacitorParams {
    pub field: f64,
    pub dt: f64,
    pub packet_sigma: f64,
    pub half_width: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentumSource {
    Given(f64),
    Capacitor(CapacitorParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceParams {
    pub grid: GridParams,
    pub alpha_sq: f64,
    pub momentum: MomentumSource,
    pub envelope_center: f64,
    pub envelope_sigma: f64,
    pub samples: usize,
    pub bins: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdmSampleParams {
    pub grid: GridParams,
    pub packet: PacketParams,
    pub alpha_sq: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryParams {
    pub grid: GridParams,
    pub packet: PacketParams,
    pub alpha_sq: f64,
    pub t_end: f64,
    pub jump_rate: f64,
    pub snapshots: usize,
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub alpha_sq: f64,
    pub locking: Locking,
    pub trials: u64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanParams {
    pub c: f64,
    pub speed: f64,
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoopShape {
    Square,
    Hexagon,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcParams {
    pub mu: f64,
    pub lambda: f64,
    pub charge_position: [f64; 2],
    pub shape: LoopShape,
    pub size: f64,
    pub points_per_edge: usize,
    pub e_mag: f64,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HydrogenParams {
    pub a0: f64,
    pub samples: usize,
    pub bins: usize,
    pub r_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    ElectronInterference(InterferenceParams),
    RdmSample(RdmSampleParams),
    RdmTrajectory(TrajectoryParams),
    DetectorScenario(ScenarioParams),
    RelativityScan(ScanParams),
    AcPhase(AcParams),
    HydrogenCloud(HydrogenParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub units: UnitSystem,
    pub params: Params,
    /// Every parameter that drives the run, defaults filled in.
    pub resolved: Value,
    pub warnings: Vec<String>,
}

/// Values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
}

/// Every problem found in a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub errors: Vec<String>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.errors.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

type Check<'a, T> = &'a dyn Fn(T) -> Option<String>;

struct Reader {
    root: Map<String, Value>,
    used: BTreeSet<String>,
    resolved: Map<String, Value>,
    errors: Vec<String>,
    warnings: Vec<String>,
}

fn lookup<'a>(root: &'a Map<String, Value>, path: &str) -> Option<&'a Value> {
    let mut parts = path.split('.');
    let mut node = root.get(parts.next()?)?;
    for p in parts {
        node = node.as_object()?.get(p)?;
    }
    Some(node)
}

fn insert(root: &mut Map<String, Value>, path: &str, value: Value) {
    let parts: Vec<&str> = path.split('.').collect();
    let mut node = root;
    for p in &parts[..parts.len() - 1] {
        node = node
            .entry(p.to_string())
            .or_insert_with(|| Value::Object(Map::new()))
            .as_object_mut()
            .expect("config sections are tables");
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
}

fn leaf_paths(prefix: &str, value: &Value, out: &mut Vec<String>) {
    match value.as_object() {
        Some(map) => {
            for (k, v) in map {
                let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                leaf_paths(&path, v, out);
            }
        }
        None => out.push(prefix.to_string()),
    }
}

fn positive(v: f64) -> Option<String> {
    (!(v > 0.0)).then(|| "must be > 0".to_string())
}

fn non_negative(v: f64) -> Option<String> {
    (!(v >= 0.0)).then(|| "must be >= 0".to_string())
}

fn unit_interval(name: &'static str) -> impl Fn(f64) -> Option<String> {
    move |v: f64| (!(0.0..=1.0).contains(&v)).then(|| format!("{name} must be in [0,1]"))
}

fn power_of_two(v: u64) -> Option<String> {
    if !v.is_power_of_two() {
        Some("power of two required".into())
    } else if v < crate::grid::MIN_POINTS as u64 {
        Some(format!("must be >= {}", crate::grid::MIN_POINTS))
    } else {
        None
    }
}

fn at_least(min: u64) -> impl Fn(u64) -> Option<String> {
    move |v: u64| (v < min).then(|| format!("must be >= {min}"))
}

impl Reader {
    fn new(root: Map<String, Value>) -> Self {
        Self {
            root,
            used: BTreeSet::new(),
            resolved: Map::new(),
            errors: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn error(&mut self, path: &str, msg: impl fmt::Display) {
        self.errors.push(format!("{path}: {msg}"));
    }

    fn present(&self, path: &str) -> bool {
        lookup(&self.root, path).is_some()
    }

    fn raw(&mut self, path: &str) -> Option<Value> {
        self.used.insert(path.to_string());
        lookup(&self.root, path).cloned()
    }

    fn missing(&mut self, path: &str) {
        self.error(path, "required key is missing");
    }

    fn f64_opt(&mut self, path: &str, check: Check<'_, f64>) -> Option<f64> {
        let value = self.raw(path)?;
        let Some(v) = value.as_f64().filter(|v| v.is_finite()) else {
            self.error(path, format!("expected a finite number, got {value}"));
            return None;
        };
        if let Some(msg) = check(v) {
            self.error(path, format!("{msg} (got {v})"));
            return None;
        }
        insert(&mut self.resolved, path, Value::from(v));
        Some(v)
    }

    fn f64(&mut self, path: &str, default: f64, check: Check<'_, f64>) -> f64 {
        if self.present(path) {
            self.f64_opt(path, check).unwrap_or(default)
        } else {
            insert(&mut self.resolved, path, Value::from(default));
            default
        }
    }

    fn f64_required(&mut self, path: &str, check: Check<'_, f64>) -> f64 {
        if !self.present(path) {
            self.missing(path);
            return 0.0;
        }
        self.f64_opt(path, check).unwrap_or(0.0)
    }

    fn u64(&mut self, path: &str, default: u64, check: Check<'_, u64>) -> u64 {
        let Some(value) = self.raw(path) else {
            insert(&mut self.resolved, path, Value::from(default));
            return default;
        };
        let Some(v) = value.as_u64() else {
            self.error(path, format!("expected a non-negative integer, got {value}"));
            return default;
        };
        if let Some(msg) = check(v) {
            self.error(path, format!("{msg} (got {v})"));
            return default;
        }
        insert(&mut self.resolved, path, Value::from(v));
        v
    }

    fn string(&mut self, path: &str, default: Option<&str>) -> Option<String> {
        let Some(value) = self.raw(path) else {
            match default {
                Some(d) => {
                    insert(&mut self.resolved, path, Value::from(d));
                    return Some(d.to_string());
                }
                None => {
                    self.missing(path);
                    return None;
                }
            }
        };
        let Some(s) = value.as_str() else {
            self.error(path, format!("expected a string, got {value}"));
            return None;
        };
        insert(&mut self.resolved, path, Value::from(s));
        Some(s.to_string())
    }

    fn f64_list(&mut self, path: &str) -> Option<Vec<f64>> {
        let value = self.raw(path)?;
        let items: Option<Vec<f64>> = value
            .as_array()
            .and_then(|a| a.iter().map(|v| v.as_f64().filter(|x| x.is_finite())).collect());
        match items {
            Some(v) => {
                insert(&mut self.resolved, path, Value::from(v.clone()));
                Some(v)
            }
            None => {
                self.error(path, format!("expected a list of finite numbers, got {value}"));
                None
            }
        }
    }

    fn units(&mut self) -> UnitSystem {
        let d = UnitSystem::default();
        UnitSystem {
            hbar: self.f64("units.hbar", d.hbar, &positive),
            mass: self.f64("units.mass", d.mass, &positive),
            charge: self.f64("units.charge", d.charge, &positive),
            c: self.f64("units.c", d.c, &positive),
            eps0: self.f64("units.eps0", d.eps0, &positive),
        }
    }

    fn grid(&mut self, default: GridParams) -> GridParams {
        let x_min = self.f64("grid.x_min", default.x_min, &|_| None);
        let x_max = self.f64("grid.x_max", default.x_max, &|_| None);
        if x_max <= x_min {
            self.error("grid.x_max", format!("must exceed grid.x_min (got {x_max} <= {x_min})"));
        }
        let n_points = self.u64("grid.n_points", default.n_points as u64, &power_of_two) as usize;
        GridParams { x_min, x_max, n_points }
    }

    fn packet(&mut self, default: PacketParams) -> PacketParams {
        PacketParams {
            x0: self.f64("packet.x0", default.x0, &|_| None),
            sigma: self.f64("packet.sigma", default.sigma, &positive),
            p0: self.f64("packet.p0", default.p0, &|_| None),
        }
    }

    fn alpha_sq(&mut self) -> f64 {
        self.f64_required("splitter.alpha_sq", &unit_interval("alpha_sq"))
    }
}

fn parse_source(source: &str) -> Result<Map<String, Value>, String> {
    let trimmed = source.trim_start();
    if trimmed.starts_with('{') {
        let value: Value = serde_json::from_str(source).map_err(|e| format!("invalid JSON: {e}"))?;
        let Value::Object(mut map) = value else {
            return Err("top level must be an object".into());
        };
        // a manifest from an earlier run carries the resolved config under "config"
        if let Some(Value::Object(config)) = map.remove("config") {
            return Ok(config);
        }
        Ok(map)
    } else {
        let value: Value = toml::from_str(source).map_err(|e| format!("invalid TOML: {e}"))?;
        match value {
            Value::Object(map) => Ok(map),
            _ => Err("top level must be a table".into()),
        }
    }
}

/// Parses and checks a configuration, reporting every problem found.
pub fn validate(source: &str, overrides: &Overrides) -> Result<RunConfig, ValidationReport> {
    let mut root = parse_source(source).map_err(|e| ValidationReport { errors: vec![e] })?;
    if let Some(name) = &overrides.experiment {
        root.insert("experiment".into(), Value::from(name.as_str()));
    }
    if let Some(seed) = overrides.seed {
        root.insert("seed".into(), Value::from(seed));
    }
    let mut r = Reader::new(root);

    let experiment = match r.string("experiment", None) {
        Some(name) => match name.parse::<Experiment>() {
            Ok(e) => Some(e),
            Err(msg) => {
                r.error("experiment", msg);
                None
            }
        },
        None => None,
    };

    let seed = if r.present("seed") {
        r.u64("seed", 0, &|_| None)
    } else {
        r.warnings.push("seed not given; using 0".into());
        r.u64("seed", 0, &|_| None)
    };

    let output_dir = r.string("output_dir", Some("")).filter(|s| !s.is_empty()).map(PathBuf::from);
    r.resolved.remove("output_dir");

    let units = r.units();
    let params = experiment.map(|e| read_params(&mut r, e, &units));

    let mut leaves = Vec::new();
    leaf_paths("", &Value::Object(r.root.clone()), &mut leaves);
    for path in leaves {
        if !r.used.contains(&path) {
            let what = experiment.map_or("this run".to_string(), |e| format!("experiment {e}"));
            r.warnings.push(format!("{path}: key is not used by {what}"));
        }
    }

    if !r.errors.is_empty() {
        return Err(ValidationReport { errors: r.errors });
    }
    Ok(RunConfig {
        experiment: experiment.expect("experiment checked above"),
        seed,
        output_dir,
        units,
        params: params.expect("experiment checked above"),
        resolved: Value::Object(r.resolved),
        warnings: r.warnings,
    })
}

fn read_params(r: &mut Reader, experiment: Experiment, units: &UnitSystem) -> Params {
    match experiment {
        Experiment::ElectronInterference => {
            let grid = r.grid(GridParams {
                x_min: -64.0,
                x_max: 64.0,
                n_points: 16384,
            });
            let alpha_sq = r.alpha_sq();
            let nonzero = |v: f64| (v == 0.0).then(|| "must be non-zero".to_string());
            let momentum = match (r.present("screen.p_x"), r.present("capacitor.E")) {
                (true, true) => {
                    r.error("screen.p_x", "give either screen.p_x or capacitor.E, not both");
                    MomentumSource::Given(1.0)
                }
                (false, false) => {
                    r.error("screen.p_x", "required key is missing (or set capacitor.E and capacitor.dt)");
                    MomentumSource::Given(1.0)
                }
                (true, false) => MomentumSource::Given(r.f64_required("screen.p_x", &nonzero)),
                (false, true) => MomentumSource::Capacitor(CapacitorParams {
                    field: r.f64_required("capacitor.E", &nonzero),
                    dt: r.f64_required("capacitor.dt", &positive),
                    packet_sigma: r.f64("capacitor.packet_sigma", 1.0, &positive),
                    half_width: r.f64("capacitor.half_width", 32.0, &positive),
                    n_points: r.u64("capacitor.n_points", 1024, &power_of_two) as usize,
                }),
            };
            let envelope_center = r.f64("screen.center", 0.0, &|_| None);
            let envelope_sigma = r.f64("screen.sigma", 20.0, &positive);
            let samples = r.u64("screen.samples", 100_000, &at_least(1)) as usize;
            if samples < 10_000 {
                r.warnings
                    .push(format!("screen.samples: {samples} samples may not resolve the fringes (>= 10000 advised)"));
            }
            let bins = r.u64("screen.bins", 4096, &power_of_two) as usize;
            Params::ElectronInterference(InterferenceParams {
                grid,
                alpha_sq,
                momentum,
                envelope_center,
                envelope_sigma,
                samples,
                bins,
            })
        }
        Experiment::RdmSample => Params::RdmSample(RdmSampleParams {
            grid: r.grid(GridParams {
                x_min: -32.0,
                x_max: 32.0,
                n_points: 4096,
            }),
            packet: r.packet(PacketParams {
                x0: -8.0,
                sigma: 1.0,
                p0: 0.0,
            }),
            alpha_sq: r.alpha_sq(),
            samples: r.u64("rdm.samples", 1_000_000, &at_least(1)) as usize,
        }),
        Experiment::RdmTrajectory => {
            let grid = r.grid(GridParams {
                x_min: -40.0,
                x_max: 40.0,
                n_points: 2048,
            });
            let packet = r.packet(PacketParams {
                x0: -8.0,
                sigma: 1.0,
                p0: 0.0,
            });
            let alpha_sq = r.alpha_sq();
            let t_end = r.f64("rdm.t_end", 2.0, &positive);
            let jump_rate = r.f64("rdm.jump_rate", 50_000.0, &positive);
            let snapshots = r.u64("rdm.snapshots", 50, &at_least(1)) as usize;
            let dt = if r.present("dynamics.dt") {
                r.f64_opt("dynamics.dt", &positive)
            } else {
                r.used.insert("dynamics.dt".into());
                None
            };
            Params::RdmTrajectory(TrajectoryParams {
                grid,
                packet,
                alpha_sq,
                t_end,
                jump_rate,
                snapshots,
                dt,
            })
        }
        Experiment::DetectorScenario => {
            let alpha_sq = r.alpha_sq();
            let locking = match r.string("rdm.locking", None).as_deref() {
                Some("on") => Locking::On,
                Some("off") => Locking::Off,
                Some(other) => {
                    r.error("rdm.locking", format!("must be \"on\" or \"off\" (got \"{other}\")"));
                    Locking::On
                }
                None => Locking::On,
            };
            let trials = r.u64("rdm.trials", 100_000, &at_least(1));
            let t1 = r.f64("detectors.t1", 3.0, &non_negative);
            let t2 = r.f64("detectors.t2", 1.0, &non_negative);
            let t3 = r.f64("detectors.t3", 2.0, &non_negative);
            if t2 >= t3 {
                r.error("detectors.t3", format!("must exceed detectors.t2 (got {t3} <= {t2})"));
            }
            Params::DetectorScenario(ScenarioParams {
                alpha_sq,
                locking,
                trials,
                t1,
                t2,
                t3,
            })
        }
        Experiment::RelativityScan => {
            let c = r.f64("relativity.c", units.c, &positive);
            let speed = r.f64_required("relativity.speed", &positive);
            if speed >= c {
                r.error("relativity.speed", format!("must be below relativity.c (got {speed} >= {c})"));
            }
            let distances = if r.present("relativity.distances") {
                if r.present("relativity.d0") || r.present("relativity.placements") {
                    r.error(
                        "relativity.distances",
                        "give either relativity.distances or relativity.d0/relativity.placements",
                    );
                }
                let list = r.f64_list("relativity.distances").unwrap_or_default();
                if list.is_empty() {
                    r.error("relativity.distances", "at least one distance required");
                } else if list.iter().any(|d| *d <= 0.0) || list.windows(2).any(|w| w[1] >= w[0]) {
                    r.error("relativity.distances", "must be > 0 and strictly decreasing");
                }
                list
            } else {
                let d0 = r.f64("relativity.d0", 10.0, &positive);
                let placements = r.u64("relativity.placements", 10, &at_least(1));
                let steps = (placements + 1) as f64;
                (0..=placements).map(|n| d0 * (steps - n as f64) / steps).collect()
            };
            Params::RelativityScan(ScanParams { c, speed, distances })
        }
        Experiment::AcPhase => {
            let mu = r.f64("ac.mu", 1.0, &|v| (v == 0.0).then(|| "must be non-zero".into()));
            let lambda = r.f64("ac.lambda", 1.0, &|_| None);
            let charge_position = match r.f64_list("ac.charge_position") {
                Some(v) if v.len() == 2 => [v[0], v[1]],
                Some(v) => {
                    r.error("ac.charge_position", format!("expected [x, y], got {} values", v.len()));
                    [0.0, 0.0]
                }
                None => {
                    insert(&mut r.resolved, "ac.charge_position", Value::from(vec![0.0, 0.0]));
                    [0.0, 0.0]
                }
            };
            let shape = match r.string("ac.loop", Some("square")).as_deref() {
                Some("square") => LoopShape::Square,
                Some("hexagon") => LoopShape::Hexagon,
                Some("file") => match r.string("ac.loop_file", None) {
                    Some(p) => LoopShape::File(PathBuf::from(p)),
                    None => LoopShape::Square,
                },
                Some(other) => {
                    r.error("ac.loop", format!("must be \"square\", \"hexagon\" or \"file\" (got \"{other}\")"));
                    LoopShape::Square
                }
                None => LoopShape::Square,
            };
            Params::AcPhase(AcParams {
                mu,
                lambda,
                charge_position,
                shape,
                size: r.f64("ac.size", 1.0, &positive),
                points_per_edge: r.u64("ac.points_per_edge", 16, &at_least(1)) as usize,
                e_mag: r.f64("ac.e_mag", 0.5, &positive),
                length: r.f64("ac.length", 2.0, &positive),
            })
        }
        Experiment::HydrogenCloud => {
            let a0 = r.f64("hydrogen.a0", 1.0, &positive);
            Params::HydrogenCloud(HydrogenParams {
                a0,
                samples: r.u64("hydrogen.samples", 1_000_000, &at_least(1)) as usize,
                bins: r.u64("hydrogen.bins", 200, &at_least(1)) as usize,
                r_max: r.f64("hydrogen.r_max", 10.0 * a0, &positive),
            })
        }
    }
}
