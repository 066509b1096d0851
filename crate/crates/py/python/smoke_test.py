"""Smoke test for the ksubmax extension module.

Run after `pip install ./crates/py` (or with the built shared library on
PYTHONPATH): python crates/py/python/smoke_test.py
"""

import json
import math
import os
import tempfile

import ksubmax as ks


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


def main():
    assert ks.meet([1, 2, 0], [1, 3, 2]) == [1, 0, 0]
    assert ks.join([1, 2, 0], [1, 3, 2]) == [1, 0, 2]
    assert ks.precedes([1, 0, 0], [1, 2, 0])

    f = ks.Oracle.unary([1.0, 2.0, 3.0])
    assert (f.n, f.k) == (1, 3)
    assert f([2]) == 2.0
    assert f.marginals([0], 0) == [1.0, 2.0, 3.0]
    assert f.validate()["verdict"] == "ok"

    g = ks.Oracle.generate(k=3, n=4, seed=1)
    assert g.validate("direct")["verdict"] == "ok"
    assert g.validate("characterization")["verdict"] == "ok"
    back = ks.Oracle.from_json(g.to_json())
    assert back.tabulate() == g.tabulate()
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "g.json")
        g.save(path)
        assert ks.Oracle.load(path).to_json() == g.to_json()

    x, opt = g.brute_force_opt()
    assert close(g(x), opt)

    k3 = ks.Rule.k3()
    ev = g.exact_expected_value(k3)
    assert ev / opt >= ks.k3_ratio() - 1e-9

    run = g.run(k3, seed=5, trace=True)
    assert run["queries"] == 4 * 3 + 1
    assert len(run["trace"]) == 4
    assert close(g(run["assignment"]), run["value"])

    full = g.extend_to_full(x)
    replay = g.trace_replay(k3, full, seed=5)
    assert replay["ok"], replay

    p, branch = k3.distribution([1.0, 1.0, (math.sqrt(17) - 3) / 2])
    assert branch == "k3_all_three"
    assert all(close(v, 1 / 3) for v in p)

    eps = ks.epsilon_default(4)
    assert eps == 1 / 16
    general = ks.Rule.general(eps)
    assert close(general.guarantee(4), 17 / 33)
    p, branch = general.distribution([1.0, 1.0, 1.0, 1.0])
    assert branch == "level_1", branch
    assert all(q >= 0.0 for q in ks.residuals_eps(4, eps))
    assert ks.epsilon_max(4) > eps

    h = ks.Oracle.generate(k=4, n=3, seed=2)
    records = ks.certify([h], [general, ks.Rule.uniform()])
    assert [r["rule"] for r in records][0].startswith("general")
    assert records[0]["passed"]

    witness = ks.tightness_witness_k3()
    assert witness["holds"]
    r = ks.check_rule([1.0, -0.5, 0.5], [1.0, 1.0, 0.5], 1, k3, ks.k3_constant())
    assert r["value"] >= -1e-12

    suites = ks.lemma_suites(count=500, seed=3)
    assert len(suites) == 7 and all(s["passed"] for s in suites)

    rows = ks.ratio_table(3, 10)
    assert close(rows[0]["general"], 10 / 19)
    assert close(rows[0]["k3"], ks.k3_ratio())
    assert rows[2]["ward_zivny"] == 0.5

    try:
        ks.Oracle.generate(k=3, n=20, seed=0, table=True)
    except ks.GuardExceeded:
        pass
    else:
        raise AssertionError("guard not raised")
    try:
        ks.Rule.k3().check_compatible(4)
    except ValueError:
        pass
    else:
        raise AssertionError("k3 accepted k = 4")

    print(json.dumps({"opt": opt, "k3_expected": ev, "ratio": ev / opt}))
    print("smoke test ok")


if __name__ == "__main__":
    main()
