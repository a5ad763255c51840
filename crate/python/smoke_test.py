"""Smoke test for the bsac_py extension module.

Build and install with `maturin develop -m crates/py/Cargo.toml --release`
(or `pip install crates/py`), then run `python python/smoke_test.py`.
"""

import math

import bsac_py

CONFIG = """
[geometry]
nx = 16
ny = 17

[model]
mode = "robin"
k = 0.1

[coupling]
kind = "affine"
alpha = 2.0
eta = 0.5

[initial]
u0 = { kind = "random_smooth", value = 0.0, amplitude = 0.5, modes = 3, seed = 7 }
phi0 = "compatible"

[run]
dt = 1e-3
t_end = 0.02
"""


def check_graphs():
    g = bsac_py.Graph.obstacle(-1.0, 1.0)
    assert g.resolvent(0.1, 3.0) == 1.0
    assert g.domain() == (-1.0, 1.0)
    assert g.compose_affine_domain(2.0, 0.5) == (-1.5, 2.5)
    cubic = bsac_py.Graph.cubic()
    for x in (-2.0, -0.3, 0.0, 0.7, 2.5):
        y = cubic.resolvent_of_yosida(0.1, 0.5, x)
        assert abs(y + 0.5 * cubic.yosida(0.1, y) - x) < 1e-10
        assert 0.0 <= cubic.moreau_envelope(0.1, x) <= cubic.beta_hat(x) + 1e-15


def check_run():
    cfg = bsac_py.Config.from_toml(CONFIG)
    assert cfg.shape == (16, 17)
    out = bsac_py.run(cfg)
    energy = out["energy"]["energy"]
    assert len(energy) == 21
    assert all(b <= a + 1e-8 * (1 + abs(a)) for a, b in zip(energy, energy[1:]))
    last = out["samples"][-1]
    assert math.isclose(last["t"], 0.02)
    assert len(last["u"]) == 16 and len(last["u"][0]) == 17
    cfg.mode = "limit"
    limit = bsac_py.run(cfg, energy=False)
    assert limit["energy"]["energy"] == []


def check_harness():
    cfg = bsac_py.Config.from_toml(CONFIG)
    table = bsac_py.sweep_k(cfg, [1e-1, 3e-2, 1e-2, 3e-3])
    mismatch = [r["norms"]["boundary_mismatch"] for r in table["rows"]]
    assert all(b < a for a, b in zip(mismatch, mismatch[1:]))
    assert table["fits"]["boundary_mismatch"]["slope"] > 0.5
    rep = bsac_py.ctsdep(cfg, "u0")
    assert rep["spread"] < 1.2
    fit = bsac_py.fit_rate([1e-1, 1e-2, 1e-3], [2e-1, 2e-2, 2e-3])
    assert abs(fit["slope"] - 1.0) < 1e-12


def steady(dt, **kw):
    text = CONFIG.replace("dt = 1e-3", f"dt = {dt}").replace("t_end = 0.02", "t_end = 1.0")
    return bsac_py.steady_state(bsac_py.Config.from_toml(text), **kw)


def check_steady():
    # the split scheme's fixed point is stationary up to O(dt) when the
    # limit state is not constant
    coarse = steady(2e-2, tol=1e-9)
    fine = steady(1e-2, tol=1e-9)
    ratio = coarse["bulk_res"] / fine["bulk_res"]
    assert 1.6 < ratio < 2.4, ratio
    assert fine["robin_res"] < 1e-3
    try:
        steady(2e-2, max_iter=2)
    except RuntimeError:
        pass
    else:
        raise AssertionError("expected non-convergence")


def main():
    check_graphs()
    check_run()
    check_harness()
    check_steady()
    print("python smoke test passed")


if __name__ == "__main__":
    main()
