"""Smoke test for the becurv extension module.

Build and install first:  pip install --no-build-isolation -e crates/python
"""

import math

import becurv


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol * (1.0 + abs(b))


def main():
    e2 = becurv.Graph.generate("path:2", measure="counting")
    for n, expected in [(1, 0.0), (2, 1.0), (5, 1.6), ("inf", 2.0)]:
        assert close(e2.curvature("a", n), expected), (n, e2.curvature("a", n))

    profile = becurv.Graph.generate("bridge:2,3").curvature_profile()
    assert sorted(profile["v0"]) == ["L00", "R00", "p1", "p2"], profile["v0"]
    assert profile["K_pos"] > 0 and profile["K_neg"] > 0

    lower, upper = e2.resistance("a", "b")
    assert lower <= upper and close(lower, math.sqrt(2.0), 1e-6)
    table = becurv.Graph.generate("path:3").metric("huang")
    assert close(max(e["d"] for e in table["entries"]), math.sqrt(2.0))
    assert table["intrinsic_margin"] <= 1.0 + 1e-12

    g = becurv.Graph.from_edge_list("a b 2\nb c\n# measures\na 2\n")
    p = g.heat(0.7, [1.0, 1.0, 1.0])
    assert all(close(v, 1.0, 1e-12) for v in p)
    assert close(g.heat_kernel(0.3, "a", "c"), g.heat_kernel(0.3, "c", "a"), 1e-12)

    cert = becurv.Graph.generate("hypercube:3").check_bounds()
    assert cert["case"] == "i" and cert["pass"]
    cert = becurv.Graph.generate("bridge:2,4").check_bounds(5, metric="huang")
    assert cert["case"] == "iv" and cert["pass"] and cert["slack"] >= 0

    assert close(becurv.h_function(1.0, 0.0, 50.0), math.sqrt(math.pi) / 2.0, 1e-8)
    assert close(becurv.bound_case_i(3.0, 2.0), math.sqrt(6.0))

    try:
        becurv.Graph.from_edge_list("a a\n")
    except becurv.CurvatureError as e:
        assert "self-loop" in str(e)
    else:
        raise AssertionError("self-loop accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
