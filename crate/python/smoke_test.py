"""Exercises the Python bindings on small instances with known answers.

Run after `pip install --no-build-isolation crates/adversarium-py`.
"""

import math

import adversarium as adv


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    f = adv.Function.named("threshold", n=3, k=2)
    assert len(f) == 8 and f.value([1, 1, 0]) is True
    assert f.certificate_complexity() == (2, 2, 2)

    r = adv.AdversaryMatrix.threshold(2, 3).ratio()
    assert close(r["ratio"], 2.0), r
    r = adv.AdversaryMatrix.ambainis([0.75, 0.5, 0.0, 0.0]).ratio()
    assert close(r["ratio"], 2.5), r
    assert close(adv.AdversaryMatrix.relation(f).ratio()["ratio"], 2.0)

    d = adv.DualSolution.threshold(2, 3)
    assert close(d.objective(), 2.0) and d.max_violation() < 1e-9

    or4 = adv.Function.named("or", n=4)
    p = adv.SpanProgram.or_program(4)
    assert p.evaluate([0, 1, 0, 0]) and not p.evaluate([0, 0, 0, 0])
    s = p.witness_size(or4)
    assert close(s["W0"], 4.0) and close(s["W1"], 1.0) and close(s["wsize"], 2.0), s
    accepted = sum(p.run(or4, [0, 0, 1, 0], seed=k)[0] for k in range(20))
    assert accepted >= 12, accepted

    g = adv.LearningGraph.or_graph(9)
    c = g.complexities()
    assert close(c["negative"], 9.0) and close(c["positive"], 1.0) and close(c["total"], 3.0), c
    lg_dual = g.to_dual(adv.Function.named("or", n=9))
    assert lg_dual.max_violation() < 1e-9

    cert = adv.dual_certificate("ksubset", 8, k=2)
    assert close(cert["objective"], 4.0, 1e-12), cert

    path = adv.WeightedGraph.from_edge_list("0 1 1\n1 2 1\n")
    lhs, rhs = path.commute(0, 2)
    assert close(lhs, 8.0) and close(rhs, 8.0)
    res, _ = path.effective_resistance([1.0, 0.0, 0.0], [2])
    assert close(res, 2.0)

    a = [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]
    t = 1 / math.sqrt(2)
    b = [[t, 0.0], [t, 0.0], [0.0, 1.0]]
    phases = adv.reflection_spectrum(a, b)
    assert phases["max_mismatch"] < 1e-9, phases

    print("python bindings: ok", adv.__version__)


if __name__ == "__main__":
    main()
