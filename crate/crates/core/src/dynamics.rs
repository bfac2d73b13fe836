//! Split-step spectral propagation under time-windowed uniform forces.
//!
//! Each step is the symmetric product `exp(-iT h/2) exp(-iV h) exp(-iT h/2)`.
//! Consecutive half kinetic factors are merged, so a run of `n` steps costs
//! about `2n` transforms.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid1D, SpectralPlan, WaveFunction};
use crate::units::UnitSystem;

/// Number of outermost grid points on each side watched by the leak guard.
pub const LEAK_GUARD_WIDTH: usize = 5;
/// Probability mass on the watched points that aborts an evolution.
pub const LEAK_GUARD_THRESHOLD: f64 = 1e-8;
/// Largest phase advance per step allowed by [`default_dt`].
pub const MAX_PHASE_PER_STEP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PotentialKind {
    Free,
    /// `V(x) = slope * (x - x_c)` with `x_c` the grid centre. The force on the
    /// particle is `-slope`; a charge `q` in a field `E` along `+x` has
    /// `slope = -q E`.
    Linear { slope: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t_on: f64,
    pub t_off: f64,
    pub kind: PotentialKind,
}

impl Segment {
    pub fn free(t_on: f64, t_off: f64) -> Self {
        Self {
            t_on,
            t_off,
            kind: PotentialKind::Free,
        }
    }

    pub fn linear(t_on: f64, t_off: f64, slope: f64) -> Self {
        Self {
            t_on,
            t_off,
            kind: PotentialKind::Linear { slope },
        }
    }

    /// Charge `charge` in a uniform field `field` pointing along `+x`.
    pub fn uniform_field(t_on: f64, t_off: f64, charge: f64, field: f64) -> Self {
        Self::linear(t_on, t_off, -charge * field)
    }

    pub fn slope(&self) -> f64 {
        match self.kind {
            PotentialKind::Free => 0.0,
            PotentialKind::Linear { slope } => slope,
        }
    }

    pub fn force(&self) -> f64 {
        -self.slope()
    }

    pub fn duration(&self) -> f64 {
        self.t_off - self.t_on
    }
}

/// Time-ordered, non-overlapping potential segments. Outside every segment
/// the particle is free.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    segments: Vec<Segment>,
}

impl PotentialSpec {
    pub fn free() -> Self {
        Self::default()
    }

    pub fn new(mut segments: Vec<Segment>) -> Result<Self> {
        for s in &segments {
            if !(s.t_on.is_finite() && s.t_off.is_finite() && s.slope().is_finite()) {
                return Err(Error::Domain("potential segment must be finite".into()));
            }
            if s.t_on < 0.0 || s.t_on >= s.t_off {
                return Err(Error::Domain(format!(
                    "segment window [{}, {}) must satisfy 0 <= t_on < t_off",
                    s.t_on, s.t_off
                )));
            }
        }
        segments.sort_by(|a, b| a.t_on.total_cmp(&b.t_on));
        if segments.windows(2).any(|w| w[1].t_on < w[0].t_off) {
            return Err(Error::Domain("potential segments overlap in time".into()));
        }
        Ok(Self { segments })
    }

    pub fn single(segment: Segment) -> Result<Self> {
        Self::new(vec![segment])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Slope of the potential active at time `t` (segments are half-open).
    pub fn slope_at(&self, t: f64) -> f64 {
        self.segments
            .iter()
            .find(|s| t >= s.t_on && t < s.t_off)
            .map_or(0.0, Segment::slope)
    }

    pub fn max_abs_slope(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.slope().abs())
            .fold(0.0, f64::max)
    }

    fn breakpoints(&self, t0: f64, t1: f64) -> Vec<f64> {
        let mut points = vec![t0, t1];
        for s in &self.segments {
            for t in [s.t_on, s.t_off] {
                if t > t0 && t < t1 {
                    points.push(t);
                }
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        points
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    pub position: f64,
    pub momentum: f64,
    pub norm: f64,
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub final_state: WaveFunction,
    pub trace: Vec<TracePoint>,
}

impl EvolutionResult {
    pub fn max_norm_drift(&self) -> f64 {
        self.trace
            .iter()
            .map(|p| (p.norm - 1.0).abs())
            .fold(0.0, f64::max)
    }

    fn point_at(&self, t: f64) -> Option<&TracePoint> {
        let tol = 1e-9 * (1.0 + t.abs());
        self.trace.iter().find(|p| (p.t - t).abs() <= tol)
    }
}

/// Time step whose largest kinetic or potential phase advance stays below
/// [`MAX_PHASE_PER_STEP`].
pub fn default_dt(grid: &Grid1D, pot: &PotentialSpec, units: &UnitSystem) -> f64 {
    let k_max = std::f64::consts::PI / grid.dx();
    let kinetic_rate = units.hbar * k_max * k_max / (2.0 * units.mass);
    let potential_rate = pot.max_abs_slope() * 0.5 * grid.length() / units.hbar;
    MAX_PHASE_PER_STEP / kinetic_rate.max(potential_rate)
}

/// Configured split-step integrator.
#[derive(Debug, Clone)]
pub struct Propagator {
    units: UnitSystem,
    dt: f64,
    trace_every: usize,
    leak_guard: bool,
}

impl Propagator {
    pub fn new(units: UnitSystem, dt: f64) -> Result<Self> {
        units.validate()?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Domain("dt must be finite and > 0".into()));
        }
        Ok(Self {
            units,
            dt,
            trace_every: 100,
            leak_guard: true,
        })
    }

    /// Record a trace point every `steps` steps, in addition to t = 0,
    /// every segment boundary and the final time.
    pub fn trace_every(mut self, steps: usize) -> Self {
        self.trace_every = steps.max(1);
        self
    }

    /// Disables the boundary leak guard. Only meant for probing wrap-around.
    pub fn without_leak_guard(mut self) -> Self {
        self.leak_guard = false;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn units(&self) -> &UnitSystem {
        &self.units
    }

    pub fn run(&self, psi0: &WaveFunction, pot: &PotentialSpec, t_final: f64) -> Result<EvolutionResult> {
        self.run_between(psi0, pot, 0.0, t_final)
    }

    /// Evolves from absolute time `t_start` to `t_end`.
    pub fn run_between(
        &self,
        psi0: &WaveFunction,
        pot: &PotentialSpec,
        t_start: f64,
        t_end: f64,
    ) -> Result<EvolutionResult> {
        if !(t_end.is_finite() && t_start.is_finite() && t_end >= t_start) {
            return Err(Error::Domain("evolution window must satisfy t_end >= t_start".into()));
        }
        let grid = *psi0.grid();
        let plan = SpectralPlan::new(grid.n_points());
        let kinetic = KineticFactors::new(&grid, &self.units);
        let mut state = Stepper {
            grid,
            plan: &plan,
            units: &self.units,
            buf: psi0.amplitudes().to_vec(),
            trace: Vec::new(),
            leak_guard: self.leak_guard,
        };
        state.record(t_start)?;

        let breakpoints = pot.breakpoints(t_start, t_end);
        let mut since_record = 0usize;
        for window in breakpoints.windows(2) {
            let (a, b) = (window[0], window[1]);
            let steps = ((b - a) / self.dt - 1e-9).ceil().max(1.0) as usize;
            let h = (b - a) / steps as f64;
            let slope = pot.slope_at(0.5 * (a + b));
            let factors = kinetic.for_step(h);
            let potential = potential_factors(&grid, slope, h, &self.units);

            plan.forward(&mut state.buf);
            mul(&mut state.buf, &factors.half);
            for s in 0..steps {
                plan.inverse(&mut state.buf);
                if let Some(phase) = &potential {
                    mul(&mut state.buf, phase);
                }
                plan.forward(&mut state.buf);
                since_record += 1;
                let last = s + 1 == steps;
                if last {
                    mul(&mut state.buf, &factors.half);
                    plan.inverse(&mut state.buf);
                    state.record(b)?;
                    since_record = 0;
                } else if since_record >= self.trace_every {
                    mul(&mut state.buf, &factors.half);
                    state.record_spectral(a + (s + 1) as f64 * h)?;
                    mul(&mut state.buf, &factors.half);
                    since_record = 0;
                } else {
                    mul(&mut state.buf, &factors.full);
                }
            }
        }

        let Stepper { buf, trace, .. } = state;
        Ok(EvolutionResult {
            final_state: WaveFunction::from_evolved(grid, buf),
            trace,
        })
    }

    /// States at each requested time (sorted ascending, first may be 0).
    pub fn snapshots(
        &self,
        psi0: &WaveFunction,
        pot: &PotentialSpec,
        times: &[f64],
    ) -> Result<Vec<(f64, WaveFunction)>> {
        if times.windows(2).any(|w| w[1] <= w[0]) || times.first().is_some_and(|t| *t < 0.0) {
            return Err(Error::Domain("snapshot times must be >= 0 and strictly increasing".into()));
        }
        let mut out = Vec::with_capacity(times.len());
        let mut current = psi0.clone();
        let mut t_now = 0.0;
        for &t in times {
            if t > t_now {
                current = self.run_between(&current, pot, t_now, t)?.final_state;
                t_now = t;
            }
            out.push((t, current.clone()));
        }
        Ok(out)
    }
}

/// Evolves `psi0` to `t_final` with step `dt`.
pub fn evolve(
    psi0: &WaveFunction,
    pot: &PotentialSpec,
    t_final: f64,
    dt: f64,
    units: &UnitSystem,
) -> Result<EvolutionResult> {
    Propagator::new(*units, dt)?.run(psi0, pot, t_final)
}

struct KineticFactors {
    k2: Vec<f64>,
    rate: f64,
}

struct StepFactors {
    half: Vec<Complex64>,
    full: Vec<Complex64>,
}

impl KineticFactors {
    fn new(grid: &Grid1D, units: &UnitSystem) -> Self {
        Self {
            k2: grid.wavenumbers().iter().map(|k| k * k).collect(),
            rate: units.hbar / (2.0 * units.mass),
        }
    }

    fn for_step(&self, h: f64) -> StepFactors {
        let phases = |tau: f64| -> Vec<Complex64> {
            self.k2
                .iter()
                .map(|k2| Complex64::from_polar(1.0, -self.rate * k2 * tau))
                .collect()
        };
        StepFactors {
            half: phases(0.5 * h),
            full: phases(h),
        }
    }
}

fn potential_factors(grid: &Grid1D, slope: f64, h: f64, units: &UnitSystem) -> Option<Vec<Complex64>> {
    if slope == 0.0 {
        return None;
    }
    let xc = grid.center();
    Some(
        grid.points()
            .into_iter()
            .map(|x| Complex64::from_polar(1.0, -slope * (x - xc) * h / units.hbar))
            .collect(),
    )
}

fn mul(buf: &mut [Complex64], factors: &[Complex64]) {
    buf.iter_mut().zip(factors).for_each(|(z, f)| *z *= f);
}

struct Stepper<'a> {
    grid: Grid1D,
    plan: &'a SpectralPlan,
    units: &'a UnitSystem,
    buf: Vec<Complex64>,
    trace: Vec<TracePoint>,
    leak_guard: bool,
}

impl Stepper<'_> {
    /// Records the real-space buffer.
    fn record(&mut self, t: f64) -> Result<()> {
        let psi = WaveFunction::from_evolved(self.grid, std::mem::take(&mut self.buf));
        let result = self.push(t, &psi);
        self.buf = psi.into_amplitudes();
        result
    }

    /// Records while the buffer holds spectral amplitudes.
    fn record_spectral(&mut self, t: f64) -> Result<()> {
        let mut x = self.buf.clone();
        self.plan.inverse(&mut x);
        let psi = WaveFunction::from_evolved(self.grid, x);
        self.push(t, &psi)
    }

    fn push(&mut self, t: f64, psi: &WaveFunction) -> Result<()> {
        if self.leak_guard {
            let mass = psi.edge_mass(LEAK_GUARD_WIDTH);
            if mass >= LEAK_GUARD_THRESHOLD {
                return Err(Error::BoundaryLeak { time: t, mass });
            }
        }
        if self.trace.last().is_some_and(|p| p.t >= t) {
            return Ok(());
        }
        self.trace.push(TracePoint {
            t,
            position: psi.expectation_position(),
            momentum: psi.expectation_momentum_with(self.plan, self.units),
            norm: psi.norm_sq(),
        });
        Ok(())
    }
}

/// Largest deviation between the measured momentum change across each
/// segment and the impulse `force * duration`. With no segments the whole
/// trace is checked against momentum conservation.
pub fn ehrenfest_check(result: &EvolutionResult, pot: &PotentialSpec) -> Result<f64> {
    let (first, last) = match (result.trace.first(), result.trace.last()) {
        (Some(a), Some(b)) if result.trace.len() >= 2 => (a, b),
        _ => return Err(Error::EmptyInput("trace needs at least two points")),
    };
    if pot.segments().is_empty() {
        return Ok((last.momentum - first.momentum).abs());
    }
    let mut residual = 0.0f64;
    for seg in pot.segments() {
        let t_on = seg.t_on.max(first.t);
        let t_off = seg.t_off.min(last.t);
        if t_off <= t_on {
            continue;
        }
        let (a, b) = match (result.point_at(t_on), result.point_at(t_off)) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::Domain(format!(
                    "trace has no points at segment bounds {t_on}, {t_off}"
                )))
            }
        };
        let expected = seg.force() * (t_off - t_on);
        residual = residual.max((b.momentum - a.momentum - expected).abs());
    }
    Ok(residual)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargeInferenceRow {
    pub field: f64,
    pub duration: f64,
    pub delta_p: f64,
    /// `delta_p / (field * duration)`; absent when the product is zero.
    pub ratio: Option<f64>,
}

/// Pushes `psi0` through a uniform field for every `(E, dt)` pair and reports
/// the inferred charge `delta_p / (E dt)`.
pub fn charge_inference_scan(
    psi0: &WaveFunction,
    fields: &[f64],
    durations: &[f64],
    propagator: &Propagator,
) -> Result<Vec<ChargeInferenceRow>> {
    if fields.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(Error::Domain("field values must be finite and >= 0".into()));
    }
    if durations.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::Domain("durations must be finite and > 0".into()));
    }
    let charge = propagator.units().charge;
    let pairs: Vec<(f64, f64)> = fields
        .iter()
        .flat_map(|&e| durations.iter().map(move |&d| (e, d)))
        .collect();
    pairs
        .par_iter()
        .map(|&(field, duration)| {
            let pot = PotentialSpec::single(Segment::uniform_field(0.0, duration, charge, field))?;
            let result = propagator.run(psi0, &pot, duration)?;
            let p0 = result.trace.first().map_or(0.0, |p| p.momentum);
            let p1 = result.trace.last().map_or(0.0, |p| p.momentum);
            let delta_p = p1 - p0;
            let impulse = field * duration;
            Ok(ChargeInferenceRow {
                field,
                duration,
                delta_p,
                ratio: (impulse != 0.0).then(|| delta_p / impulse),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn setup() -> (Grid1D, UnitSystem) {
        (Grid1D::symmetric(40.0, 512).unwrap(), UnitSystem::default())
    }

    #[test]
    fn rejects_overlapping_segments() {
        let err = PotentialSpec::new(vec![Segment::linear(0.0, 2.0, 1.0), Segment::free(1.0, 3.0)]);
        assert!(err.is_err());
        assert!(PotentialSpec::single(Segment::linear(2.0, 1.0, 1.0)).is_err());
        assert!(PotentialSpec::single(Segment::linear(0.0, 1.0, f64::INFINITY)).is_err());
    }

    #[test]
    fn free_evolution_is_unitary() {
        let (g, u) = setup();
        let psi = WaveFunction::gaussian(g, -3.0, 1.0, 2.0, &u).unwrap();
        let r = Propagator::new(u, 0.01).unwrap().trace_every(10).run(&psi, &PotentialSpec::free(), 3.0).unwrap();
        assert!(r.max_norm_drift() < 1e-10);
        assert!(r.trace.windows(2).all(|w| w[1].t > w[0].t));
        assert_abs_diff_eq!(r.trace.last().unwrap().t, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn momentum_kick_matches_impulse() {
        let (g, u) = setup();
        let psi = WaveFunction::gaussian(g, 0.0, 2.0, 0.0, &u).unwrap();
        let pot = PotentialSpec::single(Segment::linear(0.5, 2.5, -0.5)).unwrap();
        let r = evolve(&psi, &pot, 3.0, 0.005, &u).unwrap();
        let dp = r.trace.last().unwrap().momentum - r.trace[0].momentum;
        assert_abs_diff_eq!(dp, 1.0, epsilon = 1e-2);
        assert!(ehrenfest_check(&r, &pot).unwrap() < 1e-2);
    }

    #[test]
    fn leak_guard_trips_near_edge() {
        let (g, u) = setup();
        let psi = WaveFunction::gaussian(g, 30.0, 1.0, 20.0, &u).unwrap();
        let err = evolve(&psi, &PotentialSpec::free(), 2.0, 0.01, &u).unwrap_err();
        assert!(matches!(err, Error::BoundaryLeak { .. }));
    }

    #[test]
    fn snapshots_match_single_run() {
        let (g, u) = setup();
        let psi = WaveFunction::gaussian(g, 0.0, 1.0, 1.0, &u).unwrap();
        let prop = Propagator::new(u, 0.01).unwrap();
        let snaps = prop.snapshots(&psi, &PotentialSpec::free(), &[0.0, 1.0, 2.0]).unwrap();
        let direct = prop.run(&psi, &PotentialSpec::free(), 2.0).unwrap().final_state;
        let diff = snaps[2]
            .1
            .amplitudes()
            .iter()
            .zip(direct.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-10);
        assert_eq!(snaps[0].1, psi);
    }

    #[test]
    fn default_dt_bounds_phase() {
        let (g, u) = setup();
        let pot = PotentialSpec::single(Segment::linear(0.0, 1.0, 2.0)).unwrap();
        let dt = default_dt(&g, &pot, &u);
        let k_max = std::f64::consts::PI / g.dx();
        assert!(k_max * k_max / 2.0 * dt <= MAX_PHASE_PER_STEP + 1e-15);
        assert!(2.0 * 40.0 * dt <= MAX_PHASE_PER_STEP + 1e-15);
    }

    #[test]
    fn zero_field_scan_gives_no_kick() {
        let (g, u) = setup();
        let psi = WaveFunction::gaussian(g, 0.0, 2.0, 0.0, &u).unwrap();
        let prop = Propagator::new(u, 0.01).unwrap();
        let rows = charge_inference_scan(&psi, &[0.0], &[1.0], &prop).unwrap();
        assert_abs_diff_eq!(rows[0].delta_p, 0.0, epsilon = 1e-6);
        assert!(rows[0].ratio.is_none());
        assert!(charge_inference_scan(&psi, &[1.0], &[0.0], &prop).is_err());
    }
}
