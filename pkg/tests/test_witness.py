import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ratmak.witness import (
    GRAM_TOL,
    HyperplaneArrangement,
    SampledMeasure,
    WitnessError,
    equipartition_error,
    frame_residual,
    gram_defect,
    halving_offset,
    inner_product,
    orthant_masses,
    polar_retract,
    random_odd_sym,
    search_equipartition,
    search_frame,
)


def scalar_residual(funcs, frame):
    # evaluates through __call__ only
    k = frame.shape[0]
    return max(
        (abs(f(frame[i], frame[j])) for f in funcs for i, j in itertools.combinations(range(k), 2)),
        default=0.0,
    )


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10_000), st.integers(0, 3))
def test_odd_and_symmetric(n, seed, mods):
    f = random_odd_sym(n, seed, mods)
    rng = np.random.default_rng(seed + 1)
    x, y = rng.standard_normal((2, n))
    v = f(x, y)
    assert abs(f(-x, y) + v) <= 1e-12 * max(1.0, abs(v))
    assert abs(f(x, -y) + v) <= 1e-12 * max(1.0, abs(v))
    assert abs(f(y, x) - v) <= 1e-12 * max(1.0, abs(v))


def test_pair_matrix_matches_scalar_path():
    f = random_odd_sym(4, 3, 2)
    frame = polar_retract(np.random.default_rng(0).standard_normal((3, 4)))
    mat = f.pair_matrix(frame)
    for i in range(3):
        for j in range(3):
            assert mat[i, j] == pytest.approx(f(frame[i], frame[j]), abs=1e-13)


def test_random_function_is_seeded():
    a = random_odd_sym(3, 11, 2)
    b = random_odd_sym(3, 11, 2)
    assert np.array_equal(a.bilinear, b.bilinear)
    assert not np.array_equal(a.bilinear, random_odd_sym(3, 12, 2).bilinear)
    with pytest.raises(WitnessError):
        random_odd_sym(1, 0)


def test_inner_product_any_frame_works():
    # [TRIVIAL] orthonormality already zeroes <e_i, e_j>
    res = search_frame([inner_product(4)], 4, 3, max_restarts=1)
    assert res.found and res.restarts == 1


def test_rattray_three_frame():
    funcs = [random_odd_sym(3, 5, 2)]
    res = search_frame(funcs, 3, 3, tol=1e-10, seed=5)
    assert res.found
    assert gram_defect(res.frame) <= GRAM_TOL
    assert scalar_residual(funcs, res.frame) <= 1e-9


def test_search_is_reproducible():
    funcs = [random_odd_sym(4, s, 1) for s in range(2)]
    a = search_frame(funcs, 4, 2, seed=3)
    b = search_frame(funcs, 4, 2, seed=3)
    assert a.restarts == b.restarts
    assert np.array_equal(a.frame, b.frame)


def test_thread_workers_same_first_success():
    funcs = [random_odd_sym(4, s, 1) for s in range(3)]
    serial = search_frame(funcs, 4, 2, seed=8)
    threaded = search_frame(funcs, 4, 2, seed=8, workers=3)
    assert serial.found and threaded.found
    assert serial.restarts == threaded.restarts
    assert np.allclose(serial.frame, threaded.frame)


def test_not_found_reports_best():
    # two generic functions on 2-frames in R^2: 2 equations, 1 unknown, generically no solution
    funcs = [random_odd_sym(2, 1), random_odd_sym(2, 2)]
    res = search_frame(funcs, 2, 2, max_restarts=3, seed=0)
    assert not res.found
    assert res.restarts == 3
    assert res.residual_norm > 1e-10
    d = res.to_dict()
    assert d["found"] is False and len(d["residual"]) == 2


def test_frame_argument_checks():
    with pytest.raises(WitnessError):
        search_frame([inner_product(3)], 3, 4)
    with pytest.raises(WitnessError):
        search_frame([inner_product(3)], 4, 2)
    with pytest.raises(WitnessError):
        frame_residual([inner_product(3)], np.eye(2))


# --- measures and arrangements ---------------------------------------------


def test_halving_offset_k1():
    mu = SampledMeasure.gaussian(3, 5001, seed=4)
    v = np.array([1.0, 2.0, -0.5])
    a = halving_offset(mu, v)
    masses = orthant_masses(mu, HyperplaneArrangement([v], [a * np.linalg.norm(v)]))
    # one atom sits on the hyperplane (odd count): within atomic resolution
    assert np.all(np.abs(masses - 0.5) <= 1.0 / 5001 + 1e-12)


def test_halving_midpoint_rule():
    mu = SampledMeasure.uniform(np.array([[0.0], [1.0], [2.0], [3.0]]))
    assert halving_offset(mu, np.array([1.0])) == 1.5


def test_boundary_atoms_in_no_orthant():
    mu = SampledMeasure.uniform(np.array([[0.0, 1.0], [1.0, 1.0], [-1.0, -1.0]]))
    arr = HyperplaneArrangement(np.eye(2), np.zeros(2), orth=True)
    masses = orthant_masses(mu, arr)
    # bit i set means the negative side of hyperplane i
    assert masses.tolist() == pytest.approx([1 / 3, 0, 0, 1 / 3])
    assert masses.sum() == pytest.approx(2 / 3)


def test_arrangement_orthogonality_enforced():
    with pytest.raises(WitnessError):
        HyperplaneArrangement([[1.0, 0.0], [1.0, 1.0]], [0.0, 0.0], orth=True)
    arr = HyperplaneArrangement([[2.0, 0.0]], [1.0])
    assert arr.offsets[0] == 0.5


def test_measure_file_round_trip(tmp_path):
    mu = SampledMeasure.gaussian(2, 50, seed=1)
    path = tmp_path / "mu.txt"
    mu.save(path)
    back = SampledMeasure.load(path)
    assert np.allclose(back.points, mu.points) and np.allclose(back.weights, mu.weights)


@pytest.mark.parametrize("text", ["1 2 3\n4 5\n", "1 2 x\n", "1 2 -1\n", "5\n"])
def test_malformed_measure_file(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(WitnessError):
        SampledMeasure.load(path)


def test_equipartition_orth_gaussian():
    mu = SampledMeasure.gaussian(3, 20000, seed=2)
    res = search_equipartition([mu], 3, 2, 2, orth=True, seed=2)
    assert res.found and res.error <= 5e-3
    assert gram_defect(res.arrangement.normals) <= GRAM_TOL
    # independent recomputation of the four masses
    signs = mu.points @ res.arrangement.normals.T - res.arrangement.offsets
    for s in itertools.product((False, True), repeat=2):
        inside = np.all((signs < 0) == np.array(s), axis=1) & np.all(signs != 0, axis=1)
        assert abs(mu.weights[inside].sum() - 0.25) <= 5e-3


def test_equipartition_free_two_measures():
    mus = [SampledMeasure.gaussian(3, 8000, seed=s, mean=[s, 0, 0]) for s in range(2)]
    res = search_equipartition(mus, 3, 2, 1, orth=False, tol=1e-2, seed=1)
    assert res.mode == "free"
    assert res.found
    assert equipartition_error(mus, res.arrangement, 1) == pytest.approx(res.error)


def test_equipartition_argument_checks():
    mu = SampledMeasure.gaussian(2, 100, seed=0)
    with pytest.raises(WitnessError):
        search_equipartition([mu], 2, 3, 2)
    with pytest.raises(WitnessError):
        search_equipartition([mu], 3, 1, 1)
    with pytest.raises(WitnessError):
        search_equipartition([mu], 2, 2, 2, mode="magic")
