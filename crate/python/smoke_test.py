"""Smoke test of the Python bindings.

Build and install the extension first, e.g.

    cd crates/python && maturin build --release -o dist && pip install dist/*.whl

then run `python python/smoke_test.py` from the repository root.
"""

import json
import math
import pathlib
import random

import lpvlft_py as lp

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def close(a, b, tol=1e-9):
    return all(abs(x - y) <= tol for x, y in zip(a, b))


def polynomial_example():
    falpv = lp.FalpvModel.from_json((DATA / "example1_falpv.json").read_text())
    psi = lp.PsiRealization.from_json((DATA / "example1_psi.json").read_text())
    assert falpv.dims == (2, 1, 1, 1, 2)
    assert close(psi.eval([0.5]), [0.5, 0.25])

    assembled, report = lp.transform(falpv, psi)
    assert assembled.blocks == [2, 4], assembled.blocks
    assert report["sigma_psi_minimal"] is True
    assert assembled.lft.is_minimal()

    rng = random.Random(1)
    u = [[rng.uniform(-1, 1)] for _ in range(30)]
    p = [[rng.uniform(-1, 1)] for _ in range(30)]
    direct = lp.simulate_falpv(falpv, lambda q: [q[0], q[0] ** 2], u, p)
    looped = assembled.simulate(u, p)
    worst = max(abs(a[0] - b[0]) for a, b in zip(direct["y"], looped["y"]))
    assert worst < 1e-9, worst

    # The same psi given as Taylor data gives an equivalent LFT.
    taylor = (DATA / "example1_taylor.json").read_text()
    other, _ = lp.transform(falpv, taylor)
    ok, word, _ = lp.formal_equivalence(assembled.lft, other.lft)
    assert ok and word is None

    # A state transform of the FALPV model is recovered as a structured similarity.
    t = [[1.0, 0.5], [-0.25, 2.0]]
    similar, _ = lp.transform(falpv.similarity(t), psi)
    blocks = lp.find_structured_isomorphism(assembled.lft, similar.lft)
    assert blocks is not None
    assert all(close(r, s, 1e-8) for r, s in zip(blocks[0], t))
    return worst


def realization_and_stability():
    coeffs = [((1,) * k, [0.5 ** (k - 1)]) for k in range(1, 8)]
    psi, scale, margin = lp.realize_psi(1, 1, 7, coeffs, 2)
    assert psi.blocks == [1] and scale == 1.0
    assert math.isclose(margin, 0.75, rel_tol=1e-12)
    assert math.isclose(psi.eval([0.4])[0], 0.4 / (1 - 0.2), rel_tol=1e-12)
    cert = psi.lft.check_stability()
    assert cert is not None and cert[0] > 0


def comparison():
    first = lp.LftModel.from_json((DATA / "gss_first.json").read_text())
    second = lp.LftModel.from_json((DATA / "gss_second.json").read_text())
    ok, word, dev = lp.formal_equivalence(first, second)
    assert not ok and word == [1, 2, 3, 1], word
    assert first.minimize().blocks == first.blocks or not first.is_minimal()
    back = lp.LftModel.from_json(first.to_json())
    assert back.a == first.a
    try:
        lp.LftModel([1], [[0.5]], [[1.0]], [[1.0, 2.0]], [[0.0]])
    except lp.LpvlftError as e:
        assert str(e).startswith("[contract]")
    else:
        raise AssertionError("shape error not raised")
    return dev


def main():
    worst = polynomial_example()
    realization_and_stability()
    dev = comparison()
    print(json.dumps({"trajectory_error": worst, "separating_deviation": dev}))
    print("python smoke test passed")


if __name__ == "__main__":
    main()
