"""Smoke test for the fiberphase_py extension. Run after `pip install -e crates/python`."""

import json
import math

import numpy as np

import fiberphase_py as fp


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    # Spin algebra: [J1, J2] = iJ3 and V diagonalizes k̂·J.
    s = {k: np.array(v) for k, v in fp.spin_matrices(1.0).items()}
    assert np.allclose(s["j1"] @ s["j2"] - s["j2"] @ s["j1"], 1j * s["j3"], atol=1e-14)
    lam, gam = 0.7, 1.9
    v = np.array(fp.build_v(1.0, lam, gam))
    n = (math.sin(lam) * math.cos(gam), math.sin(lam) * math.sin(gam), math.cos(lam))
    kj = n[0] * s["j1"] + n[1] * s["j2"] + n[2] * s["j3"]
    assert np.allclose(v.conj().T @ kj @ v, s["j3"], atol=1e-12)
    m = np.array([[0.3j, 0.2 + 0.1j], [-0.2 + 0.1j, -0.5j]])
    assert np.allclose(np.array(fp.mat_exp(m.tolist())) @ np.array(fp.mat_exp((-m).tolist())), np.eye(2), atol=1e-14)

    # Cyclic phase on a helix equals the enclosed solid angle.
    a, d = 1.0, 1.0
    traj = fp.Trajectory.helix(a, d, 1.0, 2048)
    lam = math.atan2(2 * math.pi * a, d)
    solid = 2 * math.pi * (1 - math.cos(lam))
    phi = traj.geometric_phase(traj.duration)
    close(phi, solid, 1e-9 * solid)
    close(traj.vacuum_phase(traj.duration, "right"), phi / 2, 1e-12)
    close(traj.phase_curve()[-1], phi, 1e-9)

    # Analytic propagator against the time-ordered product.
    u = np.array(traj.analytic_propagator(0.5, traj.duration))
    w = np.array(traj.oracle_propagator(0.5, traj.duration, 4096))
    assert np.linalg.norm(u - w) < 1e-6
    psi = traj.evolve_state(1.0, [(1.0, 1.0 + 0j)], 0.4 * traj.duration)
    close(np.linalg.norm(psi), 1.0, 1e-12)

    # Helicity: closed form, matrix route and inversion limit.
    close(fp.zeta(0.01, 1e6, 1.0), 48.99963435468732944, 1e-9)
    close(fp.helicity_expectation(0.01, 1e6, 1.0), -0.99999997917572674945, 1e-12)
    kv = fp.k_vector(0.4, 0.2, 3.0, 1.0)
    close(fp.helicity_expectation_matrix(1.0, [1, 0, 0], kv), fp.helicity_expectation(0.4, 3.0, 1.0), 1e-12)
    close(fp.helix_frequency(1.0, 1.0, "paper"), 0.49842433607516454, 1e-15)

    # Commands driven by a JSON config.
    cfg = {
        "path": {"type": "helix", "radius": 1, "pitch": 1, "turns": 1},
        "wavenumber_k": 100,
        "n_samples": 256,
        "oracle_steps": 4096,
        "scan": {"kind": "rate", "gamma_dot_over_k": [0, 1e6], "lambda": [0.01]},
    }
    text = json.dumps(cfg)
    csv = fp.simulate(text)
    assert csv.splitlines()[0].startswith("t,khat_x,khat_y,khat_z")
    assert csv == fp.simulate(text)
    ok, table = fp.verify(text)
    assert ok, table
    tables = fp.scan(text)
    rows = tables["scan"].splitlines()
    assert rows[1].endswith("false,false") and rows[2].endswith("true,true")

    try:
        fp.simulate(json.dumps({**cfg, "colour": 1}))
    except ValueError:
        pass
    else:
        raise AssertionError("unknown key accepted")
    pole = {"path": {"type": "segments", "segments": [{"kind": "arc", "radius": 1, "angle": math.pi}]}, "wavenumber_k": 1}
    try:
        fp.simulate(json.dumps(pole))
    except fp.FiberPhaseError as e:
        assert "south_pole" in str(e)
    else:
        raise AssertionError("south pole not reported")

    print("smoke test passed")


if __name__ == "__main__":
    main()
