//! Aharonov-Casher phase of a magnetic moment carried around a closed planar
//! loop through an electric field.
//!
//! The moment points out of the plane, `mu = mu z`, so `mu x E = mu (-E_y, E_x)`
//! and the phase is
//!
//! ```text
//! dphi = (1 / (hbar c^2)) loop_integral mu (E_x dy - E_y dx)
//! ```
//!
//! The divisor is `c^2`; with `c` alone the two terms of the canonical
//! momentum `m v + mu x E / c^2` would not share units.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::units::UnitSystem;

pub type Vec2 = [f64; 2];

pub const DEFAULT_POINTS_PER_EDGE: usize = 16;
/// Relative distance (to the loop size) at which a point is treated as lying
/// on the loop or a line charge as lying on the path.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeutronSpec {
    /// Out-of-plane magnetic moment (signed).
    pub mu: f64,
    pub mass: f64,
}

impl NeutronSpec {
    pub fn new(mu: f64, mass: f64) -> Result<Self> {
        if !(mu.is_finite() && mass.is_finite()) {
            return Err(Error::Domain("neutron parameters must be finite".into()));
        }
        Ok(Self { mu, mass })
    }
}

/// `p = m v + (mu z x E) / c^2`.
pub fn canonical_momentum(v: Vec2, e: Vec2, spec: &NeutronSpec, units: &UnitSystem) -> Vec2 {
    let c2 = units.c * units.c;
    [
        spec.mass * v[0] - spec.mu * e[1] / c2,
        spec.mass * v[1] + spec.mu * e[0] / c2,
    ]
}

/// Rectangular region `[x_min, x_max] x [y_min, y_max]` of uniform field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub field: Vec2,
}

impl Channel {
    fn contains(&self, p: Vec2) -> bool {
        p[0] >= self.x_min && p[0] <= self.x_max && p[1] >= self.y_min && p[1] <= self.y_max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FieldMap {
    /// The same field everywhere.
    Uniform { field: Vec2 },
    /// Piecewise-uniform channels, zero field outside them.
    Channels(Vec<Channel>),
    /// Infinite line charge perpendicular to the plane.
    LineCharge { lambda: f64, position: Vec2 },
    Superposition(Vec<FieldMap>),
}

impl FieldMap {
    pub fn field_at(&self, p: Vec2, units: &UnitSystem) -> Vec2 {
        match self {
            FieldMap::Uniform { field } => *field,
            FieldMap::Channels(channels) => channels
                .iter()
                .find(|ch| ch.contains(p))
                .map_or([0.0, 0.0], |ch| ch.field),
            FieldMap::LineCharge { lambda, position } => {
                let d = [p[0] - position[0], p[1] - position[1]];
                let r2 = d[0] * d[0] + d[1] * d[1];
                let k = lambda / (2.0 * PI * units.eps0 * r2);
                [k * d[0], k * d[1]]
            }
            FieldMap::Superposition(parts) => parts.iter().fold([0.0, 0.0], |acc, f| {
                let e = f.field_at(p, units);
                [acc[0] + e[0], acc[1] + e[1]]
            }),
        }
    }

    fn line_charges(&self, out: &mut Vec<Vec2>) {
        match self {
            FieldMap::LineCharge { position, .. } => out.push(*position),
            FieldMap::Superposition(parts) => parts.iter().for_each(|f| f.line_charges(out)),
            _ => {}
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &Vec2| v.iter().all(|c| c.is_finite());
        let ok = match self {
            FieldMap::Uniform { field } => finite(field),
            FieldMap::Channels(chs) => chs.iter().all(|c| {
                finite(&c.field)
                    && [c.x_min, c.x_max, c.y_min, c.y_max].iter().all(|v| v.is_finite())
                    && c.x_min <= c.x_max
                    && c.y_min <= c.y_max
            }),
            FieldMap::LineCharge { lambda, position } => lambda.is_finite() && finite(position),
            FieldMap::Superposition(parts) => return parts.iter().try_for_each(FieldMap::validate),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain("field map parameters must be finite".into()))
        }
    }
}

/// Closed polygon; the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopPath {
    vertices: Vec<Vec2>,
}

fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = sub(b, a);
    let ap = sub(p, a);
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0);
    norm(sub(p, [a[0] + t * ab[0], a[1] + t * ab[1]]))
}

fn segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    let d1 = cross(sub(q2, q1), sub(p1, q1));
    let d2 = cross(sub(q2, q1), sub(p2, q1));
    let d3 = cross(sub(p2, p1), sub(q1, p1));
    let d4 = cross(sub(p2, p1), sub(q2, p1));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: Vec2, b: Vec2, p: Vec2, d: f64| {
        d == 0.0
            && p[0] >= a[0].min(b[0])
            && p[0] <= a[0].max(b[0])
            && p[1] >= a[1].min(b[1])
            && p[1] <= a[1].max(b[1])
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

impl LoopPath {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidLoop("at least 3 vertices required".into()));
        }
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidLoop("vertices must be finite".into()));
        }
        let path = Self { vertices };
        if path.edges().any(|(a, b)| a == b) {
            return Err(Error::InvalidLoop("zero-length edge".into()));
        }
        Ok(path)
    }

    /// Axis-aligned rectangle traversed counter-clockwise.
    pub fn rectangle(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        Self::new(vec![[x_min, y_min], [x_max, y_min], [x_max, y_max], [x_min, y_max]])
    }

    /// Regular `sides`-gon, counter-clockwise.
    pub fn regular_polygon(center: Vec2, radius: f64, sides: usize) -> Result<Self> {
        let vertices = (0..sides)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / sides as f64;
                [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
            })
            .collect();
        Self::new(vertices)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| cross(a, b)).sum::<f64>()
    }

    pub fn is_counterclockwise(&self) -> bool {
        self.signed_area() > 0.0
    }

    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Self { vertices }
    }

    /// Largest coordinate extent, used to scale tolerances.
    pub fn scale(&self) -> f64 {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (hi[0] - lo[0]).max(hi[1] - lo[1])
    }

    pub fn is_simple(&self) -> bool {
        let edges: Vec<(Vec2, Vec2)> = self.edges().collect();
        let n = edges.len();
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    // adjacent edges share one vertex; they must not fold back
                    let (a, b) = if j == i + 1 { (edges[i], edges[j]) } else { (edges[j], edges[i]) };
                    let d1 = sub(a.0, a.1);
                    let d2 = sub(b.1, b.0);
                    if cross(d1, d2) == 0.0 && d1[0] * d2[0] + d1[1] * d2[1] > 0.0 {
                        return false;
                    }
                    continue;
                }
                if segments_intersect(edges[i].0, edges[i].1, edges[j].0, edges[j].1) {
                    return false;
                }
            }
        }
        true
    }

    /// Reads vertices from CSV with header `x,y`.
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines.next().transpose()?.unwrap_or_default();
        if header.trim() != "x,y" {
            return Err(Error::InvalidLoop(format!("expected header 'x,y', got '{}'", header.trim())));
        }
        let mut vertices = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|v| v.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidLoop(format!("bad vertex on data line {}", lineno + 1)))
            };
            let mut parts = line.split(',');
            let x = parse(parts.next())?;
            let y = parse(parts.next())?;
            if parts.next().is_some() {
                return Err(Error::InvalidLoop(format!("extra column on data line {}", lineno + 1)));
            }
            vertices.push([x, y]);
        }
        Self::new(vertices)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,y")?;
        for v in &self.vertices {
            writeln!(out, "{:.16e},{:.16e}", v[0], v[1])?;
        }
        Ok(())
    }
}

/// Winding-number containment. Points within the boundary tolerance of an
/// edge are rejected as ambiguous.
pub fn encloses(path: &LoopPath, point: Vec2) -> Result<bool> {
    if !path.is_simple() {
        return Err(Error::InvalidLoop("loop is self-intersecting".into()));
    }
    let tol = BOUNDARY_TOLERANCE * path.scale();
    if path.edges().any(|(a, b)| point_segment_distance(point, a, b) <= tol) {
        return Err(Error::BoundaryAmbiguous);
    }
    let mut winding = 0i32;
    for (a, b) in path.edges() {
        let side = cross(sub(b, a), sub(point, a));
        if a[1] <= point[1] {
            if b[1] > point[1] && side > 0.0 {
                winding += 1;
            }
        } else if b[1] <= point[1] && side < 0.0 {
            winding -= 1;
        }
    }
    Ok(winding != 0)
}

/// Phase accumulated around `path`, by `points_per_edge`-point Gauss-Legendre
/// quadrature on every edge.
pub fn ac_phase(
    path: &LoopPath,
    field: &FieldMap,
    spec: &NeutronSpec,
    units: &UnitSystem,
    points_per_edge: usize,
) -> Result<f64> {
    if points_per_edge == 0 {
        return Err(Error::Domain("points_per_edge must be >= 1".into()));
    }
    field.validate()?;
    let mut charges = Vec::new();
    field.line_charges(&mut charges);
    let tol = BOUNDARY_TOLERANCE * path.scale();
    for q in &charges {
        for (a, b) in path.edges() {
            if point_segment_distance(*q, a, b) <= tol {
                return Err(Error::SingularPath { x: q[0], y: q[1] });
            }
        }
    }
    let rule = GaussLegendre::new(points_per_edge);
    let mut integral = 0.0;
    for (a, b) in path.edges() {
        let d = sub(b, a);
        // parametrize r(s) = a + s d, s in [0, 1]
        integral += rule.integrate(0.0, 1.0, |s| {
            let e = field.field_at([a[0] + s * d[0], a[1] + s * d[1]], units);
            e[0] * d[1] - e[1] * d[0]
        });
    }
    Ok(spec.mu * integral / (units.hbar * units.c * units.c))
}

/// Closed-form phase for a loop enclosing a line charge once,
/// counter-clockwise: `mu lambda / (eps0 hbar c^2)`.
pub fn line_charge_phase(lambda: f64, spec: &NeutronSpec, units: &UnitSystem) -> f64 {
    spec.mu * lambda / (units.eps0 * units.hbar * units.c * units.c)
}

/// Two beams travelling along `+x` for a length `length` through channels of
/// opposite field: `E = -E_mag y` below the central electrode and `+E_mag y`
/// above it. Returns the field and the counter-clockwise loop along the beams.
pub fn two_channel_setup(e_mag: f64, length: f64) -> Result<(FieldMap, LoopPath)> {
    if !(e_mag.is_finite() && e_mag >= 0.0 && length.is_finite() && length > 0.0) {
        return Err(Error::Domain("E_mag must be >= 0 and channel length > 0".into()));
    }
    let lower = Channel {
        x_min: 0.0,
        x_max: length,
        y_min: -2.0,
        y_max: -1.0,
        field: [0.0, -e_mag],
    };
    let upper = Channel {
        x_min: 0.0,
        x_max: length,
        y_min: 1.0,
        y_max: 2.0,
        field: [0.0, e_mag],
    };
    let path = LoopPath::rectangle(0.0, -1.5, length, 1.5)?;
    Ok((FieldMap::Channels(vec![lower, upper]), path))
}

/// Phase difference between the two beams of [`two_channel_setup`]:
/// `2 mu E_mag L / (hbar c^2)`.
pub fn two_channel_phase(e_mag: f64, length: f64, spec: &NeutronSpec, units: &UnitSystem) -> Result<f64> {
    if !(e_mag.is_finite() && e_mag >= 0.0 && length.is_finite() && length > 0.0) {
        return Err(Error::Domain("E_mag must be >= 0 and channel length > 0".into()));
    }
    Ok(2.0 * spec.mu * e_mag * length / (units.hbar * units.c * units.c))
}
