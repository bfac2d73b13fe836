//! Random discontinuous motion: a single property-carrying particle whose
//! position is redrawn from the instantaneous `|psi|^2` at every jump.
//!
//! Jump instants form a Poisson process. Nothing beyond `|psi|^2` steers the
//! jumps; the wave function is taken as given at all times.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::WaveFunction;
use crate::sampling::{chunked, stream_rng, GridSampler};

/// Independent draws from `|psi|^2`, reproducible from `seed`.
pub fn sample_positions(psi: &WaveFunction, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::EmptyInput("n must be >= 1"));
    }
    Ok(GridSampler::from_wave_function(psi)?.sample(n, seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub t: f64,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdmTrajectory {
    pub jumps: Vec<Jump>,
    pub jump_rate: f64,
}

impl RdmTrajectory {
    /// Fraction of jumps landing in each half-open interval `[a, b)`.
    pub fn sojourn_fractions(&self, regions: &[(f64, f64)]) -> Vec<f64> {
        let n = self.jumps.len().max(1) as f64;
        regions
            .iter()
            .map(|&(a, b)| self.jumps.iter().filter(|j| j.x >= a && j.x < b).count() as f64 / n)
            .collect()
    }

    /// Positions of the jumps whose time falls in `[t0, t1)`.
    pub fn positions_between(&self, t0: f64, t1: f64) -> Vec<f64> {
        let start = self.jumps.partition_point(|j| j.t < t0);
        let end = self.jumps.partition_point(|j| j.t < t1);
        self.jumps[start..end].iter().map(|j| j.x).collect()
    }

    pub fn positions(&self) -> Vec<f64> {
        self.jumps.iter().map(|j| j.x).collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,x")?;
        for j in &self.jumps {
            writeln!(out, "{:.16e},{:.16e}", j.t, j.x)?;
        }
        Ok(())
    }
}

/// Jump process over `[0, t_end)` driven by time-indexed states. At a jump
/// instant `t` the position is drawn from the latest state with time `<= t`.
pub fn simulate_trajectory(
    states: &[(f64, WaveFunction)],
    t_end: f64,
    jump_rate: f64,
    seed: u64,
) -> Result<RdmTrajectory> {
    if states.is_empty() {
        return Err(Error::EmptyInput("no states"));
    }
    if !(jump_rate.is_finite() && jump_rate > 0.0) {
        return Err(Error::Domain("jump_rate must be finite and > 0".into()));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::Domain("t_end must be finite and > 0".into()));
    }
    if states[0].0 > 0.0 || states.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Domain(
            "state times must start at or before 0 and strictly increase".into(),
        ));
    }
    let samplers = states
        .iter()
        .map(|(_, psi)| GridSampler::from_wave_function(psi))
        .collect::<Result<Vec<_>>>()?;
    let gaps = Exp::new(jump_rate).map_err(|e| Error::Domain(e.to_string()))?;
    let mut rng = stream_rng(seed, 0);
    let mut jumps = Vec::with_capacity((jump_rate * t_end * 1.05) as usize + 16);
    let mut t = 0.0;
    let mut current = 0usize;
    loop {
        t += gaps.sample(&mut rng);
        if t >= t_end {
            break;
        }
        while current + 1 < states.len() && states[current + 1].0 <= t {
            current += 1;
        }
        jumps.push(Jump {
            t,
            x: samplers[current].draw(&mut rng),
        });
    }
    Ok(RdmTrajectory { jumps, jump_rate })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Packet {
    Psi1,
    Psi2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    pub id: String,
    pub packet: Packet,
    pub meet_time: f64,
}

impl DetectorSpec {
    pub fn new(id: impl Into<String>, packet: Packet, meet_time: f64) -> Self {
        Self {
            id: id.into(),
            packet,
            meet_time,
        }
    }
}

/// D1 on the path of `psi1`; D2 then D3 on the path of `psi2`. Detectors are
/// ideal: a detector clicks exactly when the particle sits in its packet at
/// the meeting time, and a click absorbs the particle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorLayout {
    pub d1: DetectorSpec,
    pub d2: DetectorSpec,
    pub d3: DetectorSpec,
}

impl DetectorLayout {
    pub fn new(d1: DetectorSpec, d2: DetectorSpec, d3: DetectorSpec) -> Result<Self> {
        let layout = Self { d1, d2, d3 };
        layout.validate()?;
        Ok(layout)
    }

    /// The standard arrangement: D2 at `t2`, D3 at `t3 > t2`, D1 at `t1`.
    pub fn standard(t1: f64, t2: f64, t3: f64) -> Result<Self> {
        Self::new(
            DetectorSpec::new("D1", Packet::Psi1, t1),
            DetectorSpec::new("D2", Packet::Psi2, t2),
            DetectorSpec::new("D3", Packet::Psi2, t3),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let all = [&self.d1, &self.d2, &self.d3];
        if all.iter().any(|d| !(d.meet_time.is_finite() && d.meet_time >= 0.0)) {
            return Err(Error::Scenario("meet times must be finite and >= 0".into()));
        }
        let ids: HashSet<&str> = all.iter().map(|d| d.id.as_str()).collect();
        if ids.len() != 3 {
            return Err(Error::Scenario("detector ids must be unique".into()));
        }
        if self.d1.packet != Packet::Psi1 || self.d2.packet != Packet::Psi2 || self.d3.packet != Packet::Psi2 {
            return Err(Error::Scenario("D1 must watch psi1, D2 and D3 must watch psi2".into()));
        }
        if self.d2.meet_time >= self.d3.meet_time {
            return Err(Error::Scenario(format!(
                "D2 must meet psi2 before D3 ({} >= {})",
                self.d2.meet_time, self.d3.meet_time
            )));
        }
        Ok(())
    }

    fn in_time_order(&self) -> [(&DetectorSpec, Role); 3] {
        let mut order = [(&self.d1, Role::D1), (&self.d2, Role::D2), (&self.d3, Role::D3)];
        order.sort_by(|a, b| a.0.meet_time.total_cmp(&b.0.meet_time));
        order
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    D1,
    D2,
    D3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Locking {
    /// Packet membership is frozen at the first detector interaction.
    On,
    /// Membership is redrawn independently at every detector meeting.
    Off,
}

impl Locking {
    pub fn as_str(&self) -> &'static str {
        match self {
            Locking::On => "on",
            Locking::Off => "off",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub trials: u64,
    pub clicks: BTreeMap<String, u64>,
    pub no_click: u64,
    pub d3_after_silent_d2: u64,
}

impl ScenarioOutcome {
    fn empty(layout: &DetectorLayout) -> Self {
        let clicks = [&layout.d1, &layout.d2, &layout.d3]
            .iter()
            .map(|d| (d.id.clone(), 0))
            .collect();
        Self {
            clicks,
            ..Self::default()
        }
    }

    /// Associative, commutative merge of per-worker tallies.
    pub fn merge(mut self, other: Self) -> Self {
        self.trials += other.trials;
        self.no_click += other.no_click;
        self.d3_after_silent_d2 += other.d3_after_silent_d2;
        for (id, n) in other.clicks {
            *self.clicks.entry(id).or_insert(0) += n;
        }
        self
    }

    pub fn click_frequency(&self, id: &str) -> f64 {
        self.clicks.get(id).copied().unwrap_or(0) as f64 / self.trials.max(1) as f64
    }
}

/// Structured record of one detector scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub trials: u64,
    pub clicks: BTreeMap<String, u64>,
    pub no_click: u64,
    pub d3_after_silent_d2: u64,
    pub mode: Locking,
    pub alpha_sq: f64,
    pub seed: u64,
}

impl ScenarioSummary {
    pub fn new(outcome: &ScenarioOutcome, mode: Locking, alpha_sq: f64, seed: u64) -> Self {
        Self {
            trials: outcome.trials,
            clicks: outcome.clicks.clone(),
            no_click: outcome.no_click,
            d3_after_silent_d2: outcome.d3_after_silent_d2,
            mode,
            alpha_sq,
            seed,
        }
    }
}

fn draw_packet<R: Rng + ?Sized>(rng: &mut R, alpha_sq: f64) -> Packet {
    if rng.random::<f64>() < alpha_sq {
        Packet::Psi1
    } else {
        Packet::Psi2
    }
}

/// Runs `trials` independent trials of the D1/D2/D3 scenario. Trial `i` draws
/// from its own stream `(seed, i)`, so the result is independent of thread
/// count and scheduling.
pub fn run_detector_scenario(
    alpha_sq: f64,
    layout: &DetectorLayout,
    locking: Locking,
    trials: u64,
    seed: u64,
) -> Result<ScenarioOutcome> {
    if !(0.0..=1.0).contains(&alpha_sq) {
        return Err(Error::Domain("alpha_sq must be in [0,1]".into()));
    }
    if trials == 0 {
        return Err(Error::EmptyInput("trials must be >= 1"));
    }
    layout.validate()?;
    let order = layout.in_time_order();
    let empty = ScenarioOutcome::empty(layout);

    let outcome = (0..trials)
        .into_par_iter()
        .fold(
            || empty.clone(),
            |mut acc, trial| {
                let mut rng = stream_rng(seed, trial);
                let mut locked: Option<Packet> = None;
                let mut d2_silent = false;
                let mut clicked = false;
                for (detector, role) in &order {
                    let location = match (locking, locked) {
                        (Locking::On, Some(p)) => p,
                        _ => draw_packet(&mut rng, alpha_sq),
                    };
                    if locking == Locking::On {
                        locked = Some(location);
                    }
                    if location == detector.packet {
                        *acc.clicks.get_mut(&detector.id).expect("known id") += 1;
                        if *role == Role::D3 && d2_silent {
                            acc.d3_after_silent_d2 += 1;
                        }
                        clicked = true;
                        break;
                    }
                    if *role == Role::D2 {
                        d2_silent = true;
                    }
                }
                if !clicked {
                    acc.no_click += 1;
                }
                acc.trials += 1;
                acc
            },
        )
        .reduce(|| empty.clone(), ScenarioOutcome::merge);
    Ok(outcome)
}

/// Radii distributed as `r^2 exp(-2 r / a0)`, the radial density of the
/// hydrogen ground state (a Gamma law with shape 3 and scale `a0 / 2`).
pub fn sample_hydrogen_ground_state(n: usize, a0: f64, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::EmptyInput("n must be >= 1"));
    }
    if !(a0.is_finite() && a0 > 0.0) {
        return Err(Error::Domain("a0 must be finite and > 0".into()));
    }
    let gamma = Gamma::new(3.0, 0.5 * a0).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(chunked(n, seed, |rng, count| (0..count).map(|_| gamma.sample(rng)).collect()))
}
