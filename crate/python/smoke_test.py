"""Quick check that the compiled extension imports and behaves sensibly.

Build and run from the repository root:

    cargo build --release -p rdmlab-py --features extension-module
    cp target/release/librdmlab.so python/rdmlab.so
    python3 python/smoke_test.py
"""

import math
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import rdmlab  # noqa: E402


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    units = rdmlab.UnitSystem()
    grid = rdmlab.Grid.symmetric(40.0, 1024)
    psi = rdmlab.WaveFunction.gaussian(grid, 0.0, 1.0, units=units)
    close(psi.norm_sq(), 1.0, 1e-12)

    final, trace = rdmlab.evolve(psi, 2.0)
    close(math.sqrt(final.variance_position()), math.sqrt(2.0), 5e-3)
    assert len(trace) >= 2

    kicked, trace = rdmlab.evolve(psi, 2.0, segments=[(0.0, 2.0, -0.5)])
    close(trace[-1][2] - trace[0][2], 1.0, 1e-2)

    rows = rdmlab.charge_inference_scan(psi, [0.5, 1.0], [1.0])
    for _, _, _, ratio in rows:
        close(ratio, 1.0, 1e-2)

    two = rdmlab.beam_split(rdmlab.WaveFunction.gaussian(rdmlab.Grid.symmetric(32.0, 4096), -8.0, 1.0), 0.8)
    xs = rdmlab.sample_positions(two, 200_000, 1)
    close(sum(1 for x in xs if x < 0) / len(xs), 0.64, 0.01)

    on = rdmlab.run_detector_scenario(0.64, "on", 20_000, 2)
    assert on["d3_after_silent_d2"] == 0
    off = rdmlab.run_detector_scenario(0.64, "off", 20_000, 2)
    close(off["d3_after_silent_d2"] / off["trials"], 0.64 * 0.36, 0.02)

    screen = rdmlab.Grid.symmetric(64.0, 16384)
    amps = [
        complex(math.sqrt(rdmlab.intensity_analytic(x, math.sqrt(0.5), 5.0, 20.0)), 0.0)
        for x in screen.points()
    ]
    pattern = rdmlab.WaveFunction(screen, amps)
    visibility, period = rdmlab.fringe_fit(rdmlab.sample_positions(pattern, 200_000, 3), rdmlab.Grid.symmetric(64.0, 4096))
    close(visibility, 1.0, 0.05)
    close(period, rdmlab.fringe_period(5.0), 0.01)

    s2, kind = rdmlab.interval((0.0, 0.0), (1.0, 3.0))
    assert kind == "spacelike" and s2 < 0
    v = rdmlab.simultaneity_velocity((0.0, 0.0), (1.0, 3.0))
    t_a, _ = rdmlab.lorentz_transform((0.0, 0.0), v)
    t_b, _ = rdmlab.lorentz_transform((1.0, 3.0), v)
    close(t_a, t_b, 1e-12)
    rows = rdmlab.placement_scan(0.9, [10.0 * (11 - n) / 11 for n in range(11)])
    assert all(r["class"] == "spacelike" for r in rows)

    square = rdmlab.LoopPath.rectangle(-1.0, -1.0, 1.0, 1.0)
    close(rdmlab.ac_phase(square, [(1.0, (0.0, 0.0))]), 1.0, 1e-6)
    close(rdmlab.ac_phase(square.reversed(), [(1.0, (0.0, 0.0))]), -1.0, 1e-6)
    assert square.encloses((0.2, 0.3)) and not square.encloses((2.0, 0.0))
    close(rdmlab.two_channel_phase(0.5, 2.0), 2.0, 1e-12)

    try:
        rdmlab.Grid(0.0, 1.0, 1000)
    except ValueError:
        pass
    else:
        raise AssertionError("non power-of-two grid accepted")

    with tempfile.TemporaryDirectory() as out:
        summary = rdmlab.run_config('experiment = "ac-phase"\nseed = 0\n', out)
        close(summary["results"]["phase"], 1.0, 1e-6)
        assert os.path.exists(os.path.join(out, "manifest.json"))

    print("python smoke test passed")


if __name__ == "__main__":
    main()
