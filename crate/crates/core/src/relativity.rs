//! 1+1 dimensional Minkowski kinematics: interval classification, boosts,
//! simultaneity frames and the detector-placement scan.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance below which an interval counts as light-like.
pub const LIGHTLIKE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeEvent {
    pub t: f64,
    pub x: f64,
}

impl SpacetimeEvent {
    pub fn new(t: f64, x: f64) -> Self {
        Self { t, x }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalClass {
    Spacelike,
    Timelike,
    Lightlike,
}

impl IntervalClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            IntervalClass::Spacelike => "spacelike",
            IntervalClass::Timelike => "timelike",
            IntervalClass::Lightlike => "lightlike",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    /// `c^2 dt^2 - dx^2`
    pub s2: f64,
    pub class: IntervalClass,
}

pub fn interval(e1: SpacetimeEvent, e2: SpacetimeEvent, c: f64) -> Interval {
    let ct = c * (e2.t - e1.t);
    let dx = e2.x - e1.x;
    let (time_part, space_part) = (ct * ct, dx * dx);
    let s2 = time_part - space_part;
    let class = if s2.abs() <= LIGHTLIKE_TOLERANCE * time_part.max(space_part) {
        IntervalClass::Lightlike
    } else if s2 > 0.0 {
        IntervalClass::Timelike
    } else {
        IntervalClass::Spacelike
    };
    Interval { s2, class }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBoost {
    pub v: f64,
    pub gamma: f64,
}

impl FrameBoost {
    pub fn new(v: f64, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Domain("c must be finite and > 0".into()));
        }
        if !(v.is_finite() && v.abs() < c) {
            return Err(Error::Domain(format!("boost velocity {v} must satisfy |v| < c = {c}")));
        }
        let beta = v / c;
        Ok(Self {
            v,
            gamma: 1.0 / (1.0 - beta * beta).sqrt(),
        })
    }

    pub fn identity() -> Self {
        Self { v: 0.0, gamma: 1.0 }
    }

    pub fn inverse(&self) -> Self {
        Self {
            v: -self.v,
            gamma: self.gamma,
        }
    }

    /// Boost equivalent to applying `self` then `other`.
    pub fn compose(&self, other: &FrameBoost, c: f64) -> Result<Self> {
        Self::new((self.v + other.v) / (1.0 + self.v * other.v / (c * c)), c)
    }
}

/// Coordinates of `e` in the frame moving with velocity `boost.v`.
pub fn lorentz_transform(e: SpacetimeEvent, boost: &FrameBoost, c: f64) -> SpacetimeEvent {
    SpacetimeEvent {
        t: boost.gamma * (e.t - boost.v * e.x / (c * c)),
        x: boost.gamma * (e.x - boost.v * e.t),
    }
}

/// Boost in which `e1` and `e2` are simultaneous, `v = c^2 dt / dx`.
pub fn simultaneity_boost(e1: SpacetimeEvent, e2: SpacetimeEvent, c: f64) -> Result<FrameBoost> {
    let iv = interval(e1, e2, c);
    if iv.class != IntervalClass::Spacelike {
        return Err(Error::CausalOrder { s2: iv.s2 });
    }
    FrameBoost::new(c * c * (e2.t - e1.t) / (e2.x - e1.x), c)
}

/// Two packets leave a common source at the origin at `t = 0`: `psi1` towards
/// `+x` at speed `psi1_speed`, `psi2` towards `-x` at `psi2_speed`. Detector D3
/// is placed on the `psi2` path at each distance of `distances`, the first
/// entry being the original placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGeometry {
    pub psi1_speed: f64,
    pub psi2_speed: f64,
    pub distances: Vec<f64>,
}

impl ScanGeometry {
    pub fn symmetric(speed: f64, distances: Vec<f64>) -> Self {
        Self {
            psi1_speed: speed,
            psi2_speed: speed,
            distances,
        }
    }

    fn validate(&self, c: f64) -> Result<()> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Geometry("c must be finite and > 0".into()));
        }
        for (name, u) in [("psi1", self.psi1_speed), ("psi2", self.psi2_speed)] {
            if !(u.is_finite() && u > 0.0) {
                return Err(Error::Geometry(format!("{name} speed must be finite and > 0")));
            }
            if u >= c {
                return Err(Error::Geometry(format!("{name} world line is not subluminal ({u} >= {c})")));
            }
        }
        if self.distances.is_empty() {
            return Err(Error::Geometry("at least one detector placement required".into()));
        }
        if self.distances.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::Geometry("placements must be finite and > 0".into()));
        }
        if self.distances.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Geometry("placements must move strictly toward the source".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: usize,
    /// Virtual meeting of `psi2` with D3 at placement `n`.
    pub v_event: SpacetimeEvent,
    /// Position of `psi1` at the lab time of `v_event`.
    pub e_event: SpacetimeEvent,
    /// Interval between the original virtual event `V` and `e_event`.
    pub interval: Interval,
    /// Frame in which `V` and `e_event` are simultaneous, when one exists.
    pub boost: Option<FrameBoost>,
    /// `e_event` strictly precedes `V` in the lab frame.
    pub e_before_v: bool,
}

pub fn placement_scan(geometry: &ScanGeometry, c: f64) -> Result<Vec<ScanRow>> {
    geometry.validate(c)?;
    let events = |d: f64| {
        let t = d / geometry.psi2_speed;
        (
            SpacetimeEvent::new(t, -d),
            SpacetimeEvent::new(t, geometry.psi1_speed * t),
        )
    };
    let (v_original, _) = events(geometry.distances[0]);
    geometry
        .distances
        .iter()
        .enumerate()
        .map(|(n, &d)| {
            let (v_event, e_event) = events(d);
            let iv = interval(v_original, e_event, c);
            let boost = match iv.class {
                IntervalClass::Spacelike => Some(simultaneity_boost(v_original, e_event, c)?),
                _ => None,
            };
            Ok(ScanRow {
                n,
                v_event,
                e_event,
                interval: iv,
                boost,
                e_before_v: e_event.t < v_original.t,
            })
        })
        .collect()
}

pub fn write_scan_csv<W: Write>(rows: &[ScanRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "n,t_V,x_V,t_E,x_E,s2,class,v_boost,lab_order_E_before_V")?;
    for r in rows {
        let v_boost = r.boost.map_or_else(|| "none".to_string(), |b| format!("{:.16e}", b.v));
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{}",
            r.n,
            r.v_event.t,
            r.v_event.x,
            r.e_event.t,
            r.e_event.x,
            r.interval.s2,
            r.interval.class.as_str(),
            v_boost,
            r.e_before_v
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn interval_examples() {
        let o = SpacetimeEvent::new(0.0, 0.0);
        let same = interval(o, o, 1.0);
        assert_eq!(same.s2, 0.0);
        assert_eq!(same.class, IntervalClass::Lightlike);
        let a = interval(o, SpacetimeEvent::new(1.0, 3.0), 1.0);
        assert_eq!((a.s2, a.class), (-8.0, IntervalClass::Spacelike));
        let b = interval(o, SpacetimeEvent::new(3.0, 1.0), 1.0);
        assert_eq!((b.s2, b.class), (8.0, IntervalClass::Timelike));
        let light = interval(o, SpacetimeEvent::new(2.0, 4.0), 2.0);
        assert_eq!(light.class, IntervalClass::Lightlike);
    }

    #[test]
    fn simultaneity_examples() {
        let o = SpacetimeEvent::new(0.0, 0.0);
        let b = simultaneity_boost(o, SpacetimeEvent::new(0.0, 5.0), 1.0).unwrap();
        assert_eq!(b.v, 0.0);
        assert_eq!(b.gamma, 1.0);
        let e2 = SpacetimeEvent::new(1.0, 3.0);
        let b = simultaneity_boost(o, e2, 1.0).unwrap();
        assert_abs_diff_eq!(b.v, 1.0 / 3.0, epsilon = 1e-15);
        let t1 = lorentz_transform(o, &b, 1.0).t;
        let t2 = lorentz_transform(e2, &b, 1.0).t;
        assert_abs_diff_eq!(t1, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t2, 0.0, epsilon = 1e-12);
        let err = simultaneity_boost(o, SpacetimeEvent::new(3.0, 1.0), 1.0);
        assert!(matches!(err, Err(Error::CausalOrder { .. })));
    }

    #[test]
    fn boost_limits() {
        assert!(FrameBoost::new(1.0, 1.0).is_err());
        assert!(FrameBoost::new(-2.0, 1.0).is_err());
        let b = FrameBoost::new(0.6, 1.0).unwrap();
        assert_abs_diff_eq!(b.gamma, 1.25, epsilon = 1e-12);
        let e = SpacetimeEvent::new(1.5, -2.0);
        assert_eq!(lorentz_transform(e, &FrameBoost::identity(), 1.0), e);
    }

    #[test]
    fn scan_base_case_is_the_original_pair() {
        let g = ScanGeometry::symmetric(0.5, vec![4.0]);
        let rows = placement_scan(&g, 1.0).unwrap();
        assert_eq!(rows.len(), 1);
        let r = rows[0];
        assert_eq!(r.v_event, SpacetimeEvent::new(8.0, -4.0));
        assert_eq!(r.e_event, SpacetimeEvent::new(8.0, 4.0));
        assert_eq!(r.boost.unwrap(), FrameBoost::identity());
        assert!(!r.e_before_v);
    }

    #[test]
    fn scan_rejects_bad_geometry() {
        assert!(matches!(
            placement_scan(&ScanGeometry::symmetric(1.0, vec![3.0, 2.0]), 1.0),
            Err(Error::Geometry(_))
        ));
        assert!(placement_scan(&ScanGeometry::symmetric(0.5, vec![2.0, 3.0]), 1.0).is_err());
        assert!(placement_scan(&ScanGeometry::symmetric(0.5, vec![]), 1.0).is_err());
        assert!(placement_scan(&ScanGeometry::symmetric(0.5, vec![2.0, -1.0]), 1.0).is_err());
    }

    #[test]
    fn timelike_pairs_get_no_boost() {
        // close to the source the pair (V, E_n) becomes time-like
        let g = ScanGeometry::symmetric(0.5, vec![10.0, 1.0]);
        let rows = placement_scan(&g, 1.0).unwrap();
        assert_eq!(rows[1].interval.class, IntervalClass::Timelike);
        assert!(rows[1].boost.is_none());
        let mut buf = Vec::new();
        write_scan_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,t_V,x_V,t_E,x_E,s2,class,v_boost,lab_order_E_before_V\n"));
        assert!(text.lines().nth(2).unwrap().contains(",timelike,none,true"));
    }
}
