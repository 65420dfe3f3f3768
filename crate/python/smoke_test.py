"""Smoke test for the backstep_py extension.

Build first:  pip install --no-build-isolation -e crates/py
"""
import json
import math

import backstep_py as bs


def main():
    p = bs.Params(1.0, 2.0, 8.0, 1.0)
    k = bs.Kernel.solve(p)
    print(k)
    assert k.iterations <= 60
    res = k.residual()
    assert res["bc_sup"] <= 1e-10 and res["pde_sup"] <= 1e-6, res

    # k(x, x) = 0 and the table format round-trips exactly
    assert abs(k.eval(1.0, 1.0)) < 1e-12
    k2 = bs.Kernel.from_table(k.to_table())
    assert k2.eval(0.3, 2.1) == k.eval(0.3, 2.1)

    t = bs.Transform(k, 201)
    xs = t.xs()
    u = [3 - complex(math.cos(4 * x), math.sin(4 * x)) - 2 * complex(math.cos(2 * x), -math.sin(2 * x)) for x in xs]
    back = t.invert(t.forward(u))
    err = max(abs(a - b) for a, b in zip(u, back))
    assert err < 1e-12, err
    print("c_k =", t.decay_constant)

    obs = bs.Kernel.observer(bs.Params(0.5, 1.0, 0.5, 0.2))
    gain = obs.observer_gain(xs)
    assert len(gain) == len(xs)

    out = bs.run_preset("exp1_linear")
    summary = json.loads(out["summary"])
    gamma = summary["fits"]["l2_u"]["rate"]
    print("exp1 gamma =", gamma)
    assert 0.8 <= gamma <= 1.5
    rate, _, _ = bs.fit_decay(out["t"], out["l2_u"], (1.0, 4.0))
    assert abs(rate - gamma) < 1e-12

    try:
        bs.run_preset("exp1_linear", {"m": "3"})
    except ValueError as e:
        print("rejected:", e)
    else:
        raise AssertionError("bad config accepted")

    print("presets:", ", ".join(bs.presets()))
    print("smoke test passed")


if __name__ == "__main__":
    main()
