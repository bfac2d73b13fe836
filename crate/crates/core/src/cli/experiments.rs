//! One function per experiment. Each returns its `results` record and the
//! CSV payloads to write next to the summary.

use std::fs::File;
use std::io::BufReader;

use serde_json::{json, Value};

use super::config::{
    AcParams, HydrogenParams, InterferenceParams, LoopShape, MomentumSource, Params, RdmSampleParams,
    ScanParams, ScenarioParams, TrajectoryParams,
};
use crate::aharonov_casher::{
    ac_phase, encloses, line_charge_phase, two_channel_phase, two_channel_setup, FieldMap, LoopPath,
    NeutronSpec,
};
use crate::dynamics::{default_dt, PotentialSpec, Propagator, Segment};
use crate::error::{Error, Result};
use crate::grid::{Grid1D, WaveFunction};
use crate::optics::{accumulate_screen, beam_split, fringe_period, screen_state, GaussianEnvelope};
use crate::rdm::{run_detector_scenario, sample_hydrogen_ground_state, sample_positions, simulate_trajectory};
use crate::rdm::{DetectorLayout, Locking, ScenarioSummary};
use crate::relativity::{lorentz_transform, placement_scan, write_scan_csv, IntervalClass};
use crate::sampling::GridSampler;
use crate::stats::{binomial_standard_error, empirical_mode, ks_statistic, mean, quantile_sorted, variance};
use crate::units::UnitSystem;

pub struct RunOutput {
    pub results: Value,
    pub files: Vec<(String, Vec<u8>)>,
}

pub fn execute(params: &Params, units: &UnitSystem, seed: u64) -> Result<RunOutput> {
    match params {
        Params::ElectronInterference(p) => electron_interference(p, units, seed),
        Params::RdmSample(p) => rdm_sample(p, units, seed),
        Params::RdmTrajectory(p) => rdm_trajectory(p, units, seed),
        Params::DetectorScenario(p) => detector_scenario(p, seed),
        Params::RelativityScan(p) => relativity_scan(p),
        Params::AcPhase(p) => ac_phase_run(p, units),
        Params::HydrogenCloud(p) => hydrogen_cloud(p, seed),
    }
}

fn csv(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

fn density_csv(header: &str, xs: impl Iterator<Item = f64>, ys: &[f64]) -> Result<Vec<u8>> {
    use std::io::Write;
    csv(|out| {
        writeln!(out, "{header}")?;
        for (x, y) in xs.zip(ys) {
            writeln!(out, "{x:.16e},{y:.16e}")?;
        }
        Ok(())
    })
}

fn electron_interference(p: &InterferenceParams, units: &UnitSystem, seed: u64) -> Result<RunOutput> {
    let (p_x, capacitor) = match p.momentum {
        MomentumSource::Given(v) => (v, Value::Null),
        MomentumSource::Capacitor(c) => {
            let grid = Grid1D::symmetric(c.half_width, c.n_points)?;
            let psi = WaveFunction::gaussian(grid, 0.0, c.packet_sigma, 0.0, units)?;
            let pot = PotentialSpec::single(Segment::uniform_field(0.0, c.dt, units.charge, c.field))?;
            let step = default_dt(&grid, &pot, units);
            let run = Propagator::new(*units, step)?.run(&psi, &pot, c.dt)?;
            let p0 = run.trace.first().map_or(0.0, |t| t.momentum);
            let p1 = run.trace.last().map_or(0.0, |t| t.momentum);
            let delta_p = p1 - p0;
            let capacitor = json!({
                "field": c.field,
                "duration": c.dt,
                "time_step": step,
                "delta_p": delta_p,
                "expected_delta_p": units.charge * c.field * c.dt,
            });
            (delta_p, capacitor)
        }
    };
    let alpha = p.alpha_sq.sqrt();
    let beta = (1.0 - p.alpha_sq).max(0.0).sqrt();
    let grid = Grid1D::new(p.grid.x_min, p.grid.x_max, p.grid.n_points)?;
    let envelope = GaussianEnvelope::new(p.envelope_center, p.envelope_sigma)?;
    let screen = screen_state(grid, alpha, p_x, envelope, units)?;
    let samples = sample_positions(&screen.psi, p.samples, seed)?;
    let bins = Grid1D::new(p.grid.x_min, p.grid.x_max, p.bins)?;
    let pattern = accumulate_screen(&samples, bins)?;
    let results = json!({
        "alpha_sq": p.alpha_sq,
        "p_x": p_x,
        "capacitor": capacitor,
        "samples": p.samples,
        "bins": p.bins,
        "visibility": pattern.visibility,
        "period": pattern.period,
        "expected_visibility": 2.0 * alpha * beta,
        "expected_period": fringe_period(p_x, units),
        "flatness_warning": screen.flatness,
    });
    let pattern_csv = csv(|out| pattern.write_csv(out))?;
    Ok(RunOutput {
        results,
        files: vec![("pattern.csv".into(), pattern_csv)],
    })
}

fn two_packet_state(
    grid: &super::config::GridParams,
    packet: &super::config::PacketParams,
    alpha_sq: f64,
    units: &UnitSystem,
) -> Result<(Grid1D, WaveFunction)> {
    let grid = Grid1D::new(grid.x_min, grid.x_max, grid.n_points)?;
    let psi1 = WaveFunction::gaussian(grid, packet.x0, packet.sigma, packet.p0, units)?;
    let state = beam_split(&psi1, alpha_sq.sqrt())?.physical_state()?;
    Ok((grid, state))
}

/// The half-lines on either side of the grid centre, `psi1`'s side first.
fn packet_regions(grid: &Grid1D, x0: f64) -> [(f64, f64); 2] {
    let c = grid.center();
    let (lo, hi) = ((f64::NEG_INFINITY, c), (c, f64::INFINITY));
    if x0 < c {
        [lo, hi]
    } else {
        [hi, lo]
    }
}

fn rdm_sample(p: &RdmSampleParams, units: &UnitSystem, seed: u64) -> Result<RunOutput> {
    let (grid, psi) = two_packet_state(&p.grid, &p.packet, p.alpha_sq, units)?;
    let samples = sample_positions(&psi, p.samples, seed)?;
    let regions = packet_regions(&grid, p.packet.x0);
    let fraction =
        |(a, b): (f64, f64)| samples.iter().filter(|&&x| x >= a && x < b).count() as f64 / samples.len() as f64;
    let sampler = GridSampler::from_wave_function(&psi)?;
    let ks = ks_statistic(&samples, |x| sampler.cdf(x))?;
    let histogram = accumulate_screen(&samples, grid)?;
    let results = json!({
        "alpha_sq": p.alpha_sq,
        "samples": p.samples,
        "fraction_psi1": fraction(regions[0]),
        "fraction_psi2": fraction(regions[1]),
        "binomial_standard_error": binomial_standard_error(p.alpha_sq, p.samples),
        "mean": mean(&samples),
        "variance": variance(&samples),
        "expected_mean": psi.expectation_position(),
        "ks_distance": ks,
    });
    let density = density_csv("x,density", grid.points().into_iter(), &histogram.intensity)?;
    Ok(RunOutput {
        results,
        files: vec![("density.csv".into(), density)],
    })
}

fn rdm_trajectory(p: &TrajectoryParams, units: &UnitSystem, seed: u64) -> Result<RunOutput> {
    let (grid, psi) = two_packet_state(&p.grid, &p.packet, p.alpha_sq, units)?;
    let free = PotentialSpec::free();
    let step = p.dt.unwrap_or_else(|| default_dt(&grid, &free, units));
    let times: Vec<f64> = (0..p.snapshots).map(|k| p.t_end * k as f64 / p.snapshots as f64).collect();
    let states = Propagator::new(*units, step)?.snapshots(&psi, &free, &times)?;
    let trajectory = simulate_trajectory(&states, p.t_end, p.jump_rate, seed)?;
    let regions = packet_regions(&grid, p.packet.x0);
    let sojourn = trajectory.sojourn_fractions(&regions);
    let positions = trajectory.positions();
    let results = json!({
        "alpha_sq": p.alpha_sq,
        "t_end": p.t_end,
        "jump_rate": p.jump_rate,
        "snapshots": p.snapshots,
        "time_step": step,
        "jumps": trajectory.jumps.len(),
        "sojourn_psi1": sojourn[0],
        "sojourn_psi2": sojourn[1],
        "binomial_standard_error": binomial_standard_error(p.alpha_sq, trajectory.jumps.len().max(1)),
        "mean_position": mean(&positions),
    });
    let traj = csv(|out| trajectory.write_csv(out))?;
    Ok(RunOutput {
        results,
        files: vec![("trajectory.csv".into(), traj)],
    })
}

fn detector_scenario(p: &ScenarioParams, seed: u64) -> Result<RunOutput> {
    let layout = DetectorLayout::standard(p.t1, p.t2, p.t3)?;
    let outcome = run_detector_scenario(p.alpha_sq, &layout, p.locking, p.trials, seed)?;
    let summary = ScenarioSummary::new(&outcome, p.locking, p.alpha_sq, seed);
    let mut results = serde_json::to_value(&summary).map_err(|e| Error::Config(e.to_string()))?;
    let beta_sq = 1.0 - p.alpha_sq;
    let expected = match p.locking {
        Locking::On => 0.0,
        Locking::Off => p.alpha_sq * beta_sq,
    };
    if let Value::Object(map) = &mut results {
        map.insert(
            "d3_after_silent_d2_rate".into(),
            json!(outcome.d3_after_silent_d2 as f64 / outcome.trials as f64),
        );
        map.insert("expected_d3_after_silent_d2_rate".into(), json!(expected));
    }
    Ok(RunOutput {
        results,
        files: Vec::new(),
    })
}

fn relativity_scan(p: &ScanParams) -> Result<RunOutput> {
    let geometry = crate::relativity::ScanGeometry::symmetric(p.speed, p.distances.clone());
    let rows = placement_scan(&geometry, p.c)?;
    let v = rows[0].v_event;
    let mut max_sim: f64 = 0.0;
    let mut max_inv: f64 = 0.0;
    for row in &rows {
        if let Some(boost) = &row.boost {
            let vb = lorentz_transform(v, boost, p.c);
            let eb = lorentz_transform(row.e_event, boost, p.c);
            max_sim = max_sim.max((vb.t - eb.t).abs());
            let s2b = p.c * p.c * (vb.t - eb.t).powi(2) - (vb.x - eb.x).powi(2);
            max_inv = max_inv.max((s2b - row.interval.s2).abs());
        }
    }
    let spacelike = rows.iter().filter(|r| r.interval.class == IntervalClass::Spacelike).count();
    let results = json!({
        "c": p.c,
        "speed": p.speed,
        "placements": rows.len(),
        "spacelike": spacelike,
        "all_spacelike": spacelike == rows.len(),
        "e_before_v_after_base": rows.iter().skip(1).all(|r| r.e_before_v),
        "max_simultaneity_residual": max_sim,
        "max_interval_residual": max_inv,
        "spacelike_threshold_distance": p.distances[0] * (p.c - p.speed) / (p.c + p.speed),
    });
    let scan = csv(|out| write_scan_csv(&rows, out))?;
    Ok(RunOutput {
        results,
        files: vec![("scan.csv".into(), scan)],
    })
}

fn ac_phase_run(p: &AcParams, units: &UnitSystem) -> Result<RunOutput> {
    let path = match &p.shape {
        LoopShape::Square => LoopPath::rectangle(-p.size, -p.size, p.size, p.size)?,
        LoopShape::Hexagon => LoopPath::regular_polygon([0.0, 0.0], p.size, 6)?,
        LoopShape::File(file) => LoopPath::from_csv(BufReader::new(File::open(file)?))?,
    };
    let spec = NeutronSpec::new(p.mu, units.mass)?;
    let field = FieldMap::LineCharge {
        lambda: p.lambda,
        position: p.charge_position,
    };
    let phase = ac_phase(&path, &field, &spec, units, p.points_per_edge)?;
    let inside = encloses(&path, p.charge_position)?;
    let winding = if path.is_counterclockwise() { 1.0 } else { -1.0 };
    let expected = if inside {
        winding * line_charge_phase(p.lambda, &spec, units)
    } else {
        0.0
    };
    let (channels, channel_loop) = two_channel_setup(p.e_mag, p.length)?;
    let results = json!({
        "mu": p.mu,
        "lambda": p.lambda,
        "points_per_edge": p.points_per_edge,
        "vertices": path.vertices().len(),
        "encloses_charge": inside,
        "phase": phase,
        "expected_phase": expected,
        "two_channel": {
            "e_mag": p.e_mag,
            "length": p.length,
            "closed_form": two_channel_phase(p.e_mag, p.length, &spec, units)?,
            "integrated": ac_phase(&channel_loop, &channels, &spec, units, p.points_per_edge)?,
        },
    });
    let loop_csv = csv(|out| path.write_csv(out))?;
    Ok(RunOutput {
        results,
        files: vec![("loop.csv".into(), loop_csv)],
    })
}

fn hydrogen_cloud(p: &HydrogenParams, seed: u64) -> Result<RunOutput> {
    let mut radii = sample_hydrogen_ground_state(p.samples, p.a0, seed)?;
    let m = mean(&radii);
    let mode = empirical_mode(&radii)?;
    radii.sort_by(f64::total_cmp);
    let width = p.r_max / p.bins as f64;
    let mut counts = vec![0u64; p.bins];
    let mut overflow = 0u64;
    for &r in &radii {
        match counts.get_mut((r / width) as usize) {
            Some(c) => *c += 1,
            None => overflow += 1,
        }
    }
    let scale = 1.0 / (p.samples as f64 * width);
    let density: Vec<f64> = counts.iter().map(|&c| c as f64 * scale).collect();
    let results = json!({
        "a0": p.a0,
        "samples": p.samples,
        "mean": m,
        "mode": mode,
        "expected_mean": 1.5 * p.a0,
        "expected_mode": p.a0,
        "quantiles": {
            "q10": quantile_sorted(&radii, 0.1),
            "q50": quantile_sorted(&radii, 0.5),
            "q90": quantile_sorted(&radii, 0.9),
        },
        "beyond_r_max": overflow,
    });
    let centres = (0..p.bins).map(|i| (i as f64 + 0.5) * width);
    let hist = density_csv("r,density", centres, &density)?;
    Ok(RunOutput {
        results,
        files: vec![("radial.csv".into(), hist)],
    })
}
