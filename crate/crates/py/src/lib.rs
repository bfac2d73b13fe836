//! Python bindings for `rdmlab-core`.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rdmlab_core::aharonov_casher::{self as ac, FieldMap, NeutronSpec};
use rdmlab_core::dynamics::{self, PotentialSpec, Propagator, Segment};
use rdmlab_core::{cli, optics, rdm, relativity, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        Error::BoundaryLeak { .. } => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn units_or_default(units: Option<&UnitSystem>) -> rdmlab_core::UnitSystem {
    units.map(|u| u.0).unwrap_or_default()
}

#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct UnitSystem(rdmlab_core::UnitSystem);

#[pymethods]
impl UnitSystem {
    #[new]
    #[pyo3(signature = (hbar=1.0, mass=1.0, charge=1.0, c=1.0, eps0=1.0))]
    fn new(hbar: f64, mass: f64, charge: f64, c: f64, eps0: f64) -> PyResult<Self> {
        rdmlab_core::UnitSystem::new(hbar, mass, charge, c, eps0).map(Self).map_err(to_py)
    }

    #[getter]
    fn hbar(&self) -> f64 {
        self.0.hbar
    }

    #[getter]
    fn mass(&self) -> f64 {
        self.0.mass
    }

    #[getter]
    fn charge(&self) -> f64 {
        self.0.charge
    }

    #[getter]
    fn c(&self) -> f64 {
        self.0.c
    }

    #[getter]
    fn eps0(&self) -> f64 {
        self.0.eps0
    }

    fn __repr__(&self) -> String {
        let u = &self.0;
        format!("UnitSystem(hbar={}, mass={}, charge={}, c={}, eps0={})", u.hbar, u.mass, u.charge, u.c, u.eps0)
    }
}

#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct Grid(rdmlab_core::Grid1D);

#[pymethods]
impl Grid {
    #[new]
    fn new(x_min: f64, x_max: f64, n_points: usize) -> PyResult<Self> {
        rdmlab_core::Grid1D::new(x_min, x_max, n_points).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn symmetric(half_width: f64, n_points: usize) -> PyResult<Self> {
        rdmlab_core::Grid1D::symmetric(half_width, n_points).map(Self).map_err(to_py)
    }

    #[getter]
    fn x_min(&self) -> f64 {
        self.0.x_min()
    }

    #[getter]
    fn x_max(&self) -> f64 {
        self.0.x_max()
    }

    #[getter]
    fn n_points(&self) -> usize {
        self.0.n_points()
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.0.dx()
    }

    fn points(&self) -> Vec<f64> {
        self.0.points()
    }

    fn __len__(&self) -> usize {
        self.0.n_points()
    }

    fn __repr__(&self) -> String {
        format!("Grid({}, {}, {})", self.0.x_min(), self.0.x_max(), self.0.n_points())
    }
}

#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct WaveFunction(rdmlab_core::WaveFunction);

#[pymethods]
impl WaveFunction {
    #[new]
    fn new(grid: &Grid, amplitudes: Vec<Complex64>) -> PyResult<Self> {
        rdmlab_core::WaveFunction::from_amplitudes(grid.0, amplitudes).map(Self).map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (grid, x0, sigma, p0=0.0, units=None))]
    fn gaussian(grid: &Grid, x0: f64, sigma: f64, p0: f64, units: Option<&UnitSystem>) -> PyResult<Self> {
        rdmlab_core::WaveFunction::gaussian(grid.0, x0, sigma, p0, &units_or_default(units))
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn uniform(grid: &Grid, a: f64, b: f64) -> PyResult<Self> {
        rdmlab_core::WaveFunction::uniform(grid.0, a, b).map(Self).map_err(to_py)
    }

    #[getter]
    fn grid(&self) -> Grid {
        Grid(*self.0.grid())
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.0.amplitudes().to_vec()
    }

    fn density(&self) -> Vec<f64> {
        self.0.probability_density()
    }

    fn norm_sq(&self) -> f64 {
        self.0.norm_sq()
    }

    fn mass_in(&self, a: f64, b: f64) -> f64 {
        self.0.mass_in(a, b)
    }

    fn mean_position(&self) -> f64 {
        self.0.expectation_position()
    }

    fn variance_position(&self) -> f64 {
        self.0.variance_position()
    }

    #[pyo3(signature = (units=None))]
    fn mean_momentum(&self, units: Option<&UnitSystem>) -> f64 {
        self.0.expectation_momentum(&units_or_default(units))
    }

    fn superpose(&self, a: Complex64, other: &WaveFunction, b: Complex64) -> PyResult<Self> {
        self.0.superpose(a, &other.0, b).map(Self).map_err(to_py)
    }
}

/// Splits `psi` into `alpha psi1 + i beta psi2` and returns the combined state.
#[pyfunction]
fn beam_split(psi: &WaveFunction, alpha: f64) -> PyResult<WaveFunction> {
    optics::beam_split(&psi.0, alpha)
        .and_then(|s| s.physical_state())
        .map(WaveFunction)
        .map_err(to_py)
}

fn potential(segments: Vec<(f64, f64, f64)>) -> PyResult<PotentialSpec> {
    if segments.is_empty() {
        return Ok(PotentialSpec::free());
    }
    PotentialSpec::new(segments.into_iter().map(|(on, off, slope)| Segment::linear(on, off, slope)).collect())
        .map_err(to_py)
}

/// Evolves `psi` under piecewise-linear potentials given as
/// `(t_on, t_off, slope)` triples. Returns the final state and the trace as
/// `(t, <x>, <p>, norm)` tuples.
#[pyfunction]
#[pyo3(signature = (psi, t_final, segments=Vec::new(), dt=None, units=None))]
fn evolve(
    py: Python<'_>,
    psi: &WaveFunction,
    t_final: f64,
    segments: Vec<(f64, f64, f64)>,
    dt: Option<f64>,
    units: Option<&UnitSystem>,
) -> PyResult<(WaveFunction, Vec<(f64, f64, f64, f64)>)> {
    let u = units_or_default(units);
    let pot = potential(segments)?;
    let dt = dt.unwrap_or_else(|| dynamics::default_dt(psi.0.grid(), &pot, &u));
    let psi0 = &psi.0;
    let result = py.detach(|| dynamics::evolve(psi0, &pot, t_final, dt, &u)).map_err(to_py)?;
    let trace = result.trace.iter().map(|p| (p.t, p.position, p.momentum, p.norm)).collect();
    Ok((WaveFunction(result.final_state), trace))
}

/// Momentum change for each `(E, dt)` pair, as `(E, dt, delta_p, ratio)`.
#[pyfunction]
#[pyo3(signature = (psi, fields, durations, dt=1e-3, units=None))]
fn charge_inference_scan(
    py: Python<'_>,
    psi: &WaveFunction,
    fields: Vec<f64>,
    durations: Vec<f64>,
    dt: f64,
    units: Option<&UnitSystem>,
) -> PyResult<Vec<(f64, f64, f64, Option<f64>)>> {
    let prop = Propagator::new(units_or_default(units), dt).map_err(to_py)?;
    let psi0 = &psi.0;
    let rows = py
        .detach(|| dynamics::charge_inference_scan(psi0, &fields, &durations, &prop))
        .map_err(to_py)?;
    Ok(rows.into_iter().map(|r| (r.field, r.duration, r.delta_p, r.ratio)).collect())
}

/// Draws `n` positions from `|psi|^2`.
#[pyfunction]
fn sample_positions(py: Python<'_>, psi: &WaveFunction, n: usize, seed: u64) -> PyResult<Vec<f64>> {
    let psi0 = &psi.0;
    py.detach(|| rdm::sample_positions(psi0, n, seed)).map_err(to_py)
}

/// Jump times and positions of a random-discontinuous-motion trajectory
/// through a single stationary state.
#[pyfunction]
fn simulate_trajectory(
    psi: &WaveFunction,
    t_end: f64,
    jump_rate: f64,
    seed: u64,
) -> PyResult<Vec<(f64, f64)>> {
    let traj = rdm::simulate_trajectory(&[(0.0, psi.0.clone())], t_end, jump_rate, seed).map_err(to_py)?;
    Ok(traj.jumps.iter().map(|j| (j.t, j.x)).collect())
}

/// Three-detector scenario. `locking` is `"on"` or `"off"`.
#[pyfunction]
#[pyo3(signature = (alpha_sq, locking, trials, seed, t1=3.0, t2=1.0, t3=2.0))]
fn run_detector_scenario<'py>(
    py: Python<'py>,
    alpha_sq: f64,
    locking: &str,
    trials: u64,
    seed: u64,
    t1: f64,
    t2: f64,
    t3: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let mode = match locking {
        "on" => rdm::Locking::On,
        "off" => rdm::Locking::Off,
        other => return Err(PyValueError::new_err(format!("locking must be \"on\" or \"off\", got {other:?}"))),
    };
    let layout = rdm::DetectorLayout::standard(t1, t2, t3).map_err(to_py)?;
    let out = py
        .detach(|| rdm::run_detector_scenario(alpha_sq, &layout, mode, trials, seed))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("trials", out.trials)?;
    d.set_item("clicks", out.clicks)?;
    d.set_item("no_click", out.no_click)?;
    d.set_item("d3_after_silent_d2", out.d3_after_silent_d2)?;
    Ok(d)
}

#[pyfunction]
fn sample_hydrogen_ground_state(n: usize, a0: f64, seed: u64) -> PyResult<Vec<f64>> {
    rdm::sample_hydrogen_ground_state(n, a0, seed).map_err(to_py)
}

/// Screen intensity of the two-beam pattern at `x`.
#[pyfunction]
#[pyo3(signature = (x, alpha, p_x, sigma, center=0.0, units=None))]
fn intensity_analytic(
    x: f64,
    alpha: f64,
    p_x: f64,
    sigma: f64,
    center: f64,
    units: Option<&UnitSystem>,
) -> PyResult<f64> {
    let env = optics::GaussianEnvelope::new(center, sigma).map_err(to_py)?;
    Ok(optics::intensity_analytic(x, alpha, p_x, env, &units_or_default(units)))
}

/// Histograms `samples` on `grid` and fits the fringes; returns
/// `(visibility, period or None)`.
#[pyfunction]
fn fringe_fit(samples: Vec<f64>, grid: &Grid) -> PyResult<(f64, Option<f64>)> {
    let pattern = optics::accumulate_screen(&samples, grid.0).map_err(to_py)?;
    Ok((pattern.visibility, pattern.period))
}

#[pyfunction]
#[pyo3(signature = (p_x, units=None))]
fn fringe_period(p_x: f64, units: Option<&UnitSystem>) -> f64 {
    optics::fringe_period(p_x, &units_or_default(units))
}

/// `(s2, class)` for events `(t, x)`, with `class` one of
/// `"timelike"`, `"spacelike"`, `"lightlike"`.
#[pyfunction]
#[pyo3(signature = (e1, e2, c=1.0))]
fn interval(e1: (f64, f64), e2: (f64, f64), c: f64) -> (f64, &'static str) {
    let iv = relativity::interval(
        relativity::SpacetimeEvent::new(e1.0, e1.1),
        relativity::SpacetimeEvent::new(e2.0, e2.1),
        c,
    );
    (iv.s2, iv.class.as_str())
}

#[pyfunction]
#[pyo3(signature = (event, v, c=1.0))]
fn lorentz_transform(event: (f64, f64), v: f64, c: f64) -> PyResult<(f64, f64)> {
    let boost = relativity::FrameBoost::new(v, c).map_err(to_py)?;
    let e = relativity::lorentz_transform(relativity::SpacetimeEvent::new(event.0, event.1), &boost, c);
    Ok((e.t, e.x))
}

/// Velocity of the frame in which two space-like separated events are
/// simultaneous.
#[pyfunction]
#[pyo3(signature = (e1, e2, c=1.0))]
fn simultaneity_velocity(e1: (f64, f64), e2: (f64, f64), c: f64) -> PyResult<f64> {
    relativity::simultaneity_boost(
        relativity::SpacetimeEvent::new(e1.0, e1.1),
        relativity::SpacetimeEvent::new(e2.0, e2.1),
        c,
    )
    .map(|b| b.v)
    .map_err(to_py)
}

/// Symmetric-arm detector placement scan, one dict per placement.
#[pyfunction]
#[pyo3(signature = (speed, distances, c=1.0))]
fn placement_scan<'py>(py: Python<'py>, speed: f64, distances: Vec<f64>, c: f64) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let rows = relativity::placement_scan(&relativity::ScanGeometry::symmetric(speed, distances), c).map_err(to_py)?;
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("n", r.n)?;
            d.set_item("v_event", (r.v_event.t, r.v_event.x))?;
            d.set_item("e_event", (r.e_event.t, r.e_event.x))?;
            d.set_item("s2", r.interval.s2)?;
            d.set_item("class", r.interval.class.as_str())?;
            d.set_item("boost_velocity", r.boost.map(|b| b.v))?;
            d.set_item("e_before_v", r.e_before_v)?;
            Ok(d)
        })
        .collect()
}

#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct LoopPath(ac::LoopPath);

#[pymethods]
impl LoopPath {
    #[new]
    fn new(vertices: Vec<[f64; 2]>) -> PyResult<Self> {
        ac::LoopPath::new(vertices).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn rectangle(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> PyResult<Self> {
        ac::LoopPath::rectangle(x_min, y_min, x_max, y_max).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn regular_polygon(center: [f64; 2], radius: f64, sides: usize) -> PyResult<Self> {
        ac::LoopPath::regular_polygon(center, radius, sides).map(Self).map_err(to_py)
    }

    fn vertices(&self) -> Vec<[f64; 2]> {
        self.0.vertices().to_vec()
    }

    fn signed_area(&self) -> f64 {
        self.0.signed_area()
    }

    fn reversed(&self) -> Self {
        Self(self.0.reversed())
    }

    fn encloses(&self, point: [f64; 2]) -> PyResult<bool> {
        ac::encloses(&self.0, point).map_err(to_py)
    }
}

/// Loop phase of a magnetic moment `mu` around line charges given as
/// `(lambda, (x, y))` pairs.
#[pyfunction]
#[pyo3(signature = (path, charges, mu=1.0, points_per_edge=ac::DEFAULT_POINTS_PER_EDGE, units=None))]
fn ac_phase(
    path: &LoopPath,
    charges: Vec<(f64, [f64; 2])>,
    mu: f64,
    points_per_edge: usize,
    units: Option<&UnitSystem>,
) -> PyResult<f64> {
    let field = FieldMap::Superposition(
        charges
            .into_iter()
            .map(|(lambda, position)| FieldMap::LineCharge { lambda, position })
            .collect(),
    );
    let spec = NeutronSpec::new(mu, 1.0).map_err(to_py)?;
    ac::ac_phase(&path.0, &field, &spec, &units_or_default(units), points_per_edge).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (lambda_, mu=1.0, units=None))]
fn line_charge_phase(lambda_: f64, mu: f64, units: Option<&UnitSystem>) -> PyResult<f64> {
    let spec = NeutronSpec::new(mu, 1.0).map_err(to_py)?;
    Ok(ac::line_charge_phase(lambda_, &spec, &units_or_default(units)))
}

#[pyfunction]
#[pyo3(signature = (e_mag, length, mu=1.0, units=None))]
fn two_channel_phase(e_mag: f64, length: f64, mu: f64, units: Option<&UnitSystem>) -> PyResult<f64> {
    let spec = NeutronSpec::new(mu, 1.0).map_err(to_py)?;
    ac::two_channel_phase(e_mag, length, &spec, &units_or_default(units)).map_err(to_py)
}

/// Runs a TOML (or manifest.json) configuration and writes its artifacts to
/// `out_dir`. Returns the summary as a dict.
#[pyfunction]
#[pyo3(signature = (source, out_dir, seed=None))]
fn run_config<'py>(py: Python<'py>, source: &str, out_dir: PathBuf, seed: Option<u64>) -> PyResult<Bound<'py, PyAny>> {
    let overrides = cli::Overrides {
        seed,
        ..Default::default()
    };
    let config = cli::validate(source, &overrides).map_err(|r| PyValueError::new_err(r.to_string()))?;
    let artifacts = py.detach(|| cli::run(&config, &out_dir)).map_err(to_py)?;
    let text = serde_json::to_string(&artifacts.summary).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pymodule]
fn rdmlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<UnitSystem>()?;
    m.add_class::<Grid>()?;
    m.add_class::<WaveFunction>()?;
    m.add_class::<LoopPath>()?;
    m.add_function(wrap_pyfunction!(beam_split, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(charge_inference_scan, m)?)?;
    m.add_function(wrap_pyfunction!(sample_positions, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(run_detector_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(sample_hydrogen_ground_state, m)?)?;
    m.add_function(wrap_pyfunction!(intensity_analytic, m)?)?;
    m.add_function(wrap_pyfunction!(fringe_fit, m)?)?;
    m.add_function(wrap_pyfunction!(fringe_period, m)?)?;
    m.add_function(wrap_pyfunction!(interval, m)?)?;
    m.add_function(wrap_pyfunction!(lorentz_transform, m)?)?;
    m.add_function(wrap_pyfunction!(simultaneity_velocity, m)?)?;
    m.add_function(wrap_pyfunction!(placement_scan, m)?)?;
    m.add_function(wrap_pyfunction!(ac_phase, m)?)?;
    m.add_function(wrap_pyfunction!(line_charge_phase, m)?)?;
    m.add_function(wrap_pyfunction!(two_channel_phase, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
