"""Smoke test for the permstat extension module."""

import json

import permstat


def main():
    s0 = permstat.Permutation.parse("425736981")
    t0 = permstat.phi(s0)
    assert str(t0) == "9,5,6,3,8,2,4,7,1", t0
    assert permstat.phi_inverse(t0) == s0
    assert permstat.phi_inverse("956382471").word == [4, 2, 5, 7, 3, 6, 9, 8, 1]
    assert permstat.capacity_sequence(s0) == [1, 2, 1, 0]

    assert permstat.stat_vector("34251", "lhs") == (6, 3, 2)
    assert permstat.stat_vector([3, 2, 5, 4, 1], "rhs") == (6, 3, 2)
    assert s0.stat("inv2") == 4 and len(s0) == 9 and s0[0] == 4

    trace = json.loads(permstat.phi_trace(s0))
    assert trace["output"] == "9,5,6,3,8,2,4,7,1"
    assert json.loads(permstat.phi_inverse_trace(t0))["output"] == "4,2,5,7,3,6,9,8,1"

    lhs = permstat.joint_distribution(5, "lhs")
    assert lhs == permstat.joint_distribution(5, "rhs", jobs=3)
    assert sum(lhs.values()) == 120
    assert permstat.verify_identity(6, "hl", "rhs")

    report = permstat.run_check(6, "bijection")
    assert not report["pass"] and report["counterexample"]

    svg = permstat.render("425736981", "linear", "svg")
    assert svg.count('class="two-inversion"') == 4
    assert "(9)" in permstat.render(t0, "planar", "ascii")

    for bad in ("1,2,2", "12a"):
        try:
            permstat.parse_permutation(bad)
        except ValueError:
            pass
        else:
            raise AssertionError(bad)

    print("permstat smoke test: ok")


if __name__ == "__main__":
    main()
