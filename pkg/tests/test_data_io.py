import gzip
import io
import json

import numpy as np
import pytest

from adcgs.core import ContractViolation
from adcgs.data_io import (
    Dataset,
    SyntheticSpec,
    generate_synthetic,
    load_libsvm,
    parse_libsvm,
    reference_solution,
    serialize_libsvm,
    standardize,
    synthetic_problem,
    write_sidecar,
)
from adcgs.feasible_sets import Simplex
from adcgs.objectives import LeastSquares


class TestParse:
    def test_basic_line(self):
        ds = parse_libsvm(["1 1:0.5 3:-2"])
        assert ds.n == 3 and ds.m == 1
        np.testing.assert_allclose(np.asarray(ds.A).ravel(), [0.5, 0.0, -2.0])
        assert ds.b[0] == 1.0

    def test_label_only_line(self):
        ds = parse_libsvm(["-1", "1 1:2.0"])
        assert ds.m == 2
        np.testing.assert_allclose(np.asarray(ds.A)[0], [0.0])

    def test_scientific_notation(self):
        ds = parse_libsvm(["+1 2:1e3"])
        assert np.asarray(ds.A)[0, 1] == 1000.0

    def test_comments_and_blank_lines(self):
        ds = parse_libsvm(["# header", "", "1 1:1.0 # trailing", "0 1:2.0"])
        assert ds.m == 2

    def test_errors_carry_line_numbers(self):
        with pytest.raises(ContractViolation, match="line 1"):
            parse_libsvm(["1 0:1.0"])          # nonpositive index
        with pytest.raises(ContractViolation, match="line 2"):
            parse_libsvm(["1 1:1.0", "1 3:1.0 2:1.0"])  # non-increasing
        with pytest.raises(ContractViolation, match="line 1"):
            parse_libsvm(["1 a:b"])
        with pytest.raises(ContractViolation, match="line 1"):
            parse_libsvm(["x 1:1.0"])

    def test_label_mappings(self):
        assert np.array_equal(parse_libsvm(["0 1:1", "1 1:1"]).b, [-1.0, 1.0])
        assert np.array_equal(parse_libsvm(["1 1:1", "2 1:1"]).b, [-1.0, 1.0])
        assert np.array_equal(parse_libsvm(["-1 1:1", "+1 1:1"]).b, [-1.0, 1.0])
        with pytest.raises(ContractViolation):
            parse_libsvm(["3 1:1", "5 1:1"])
        # many distinct values pass through as regression targets
        b = parse_libsvm(["0.1 1:1", "2.5 1:1", "7 1:1"]).b
        np.testing.assert_allclose(b, [0.1, 2.5, 7.0])

    def test_round_trip_bit_exact(self):
        rng = np.random.default_rng(0)
        lines = []
        for i in range(30):
            label = rng.choice([-1.0, 1.0])
            feats = sorted(rng.choice(np.arange(1, 12), size=rng.integers(0, 6),
                                      replace=False))
            toks = [repr(float(label))] + [f"{j}:{rng.standard_normal()!r}"
                                           for j in feats]
            lines.append(" ".join(toks))
        ds1 = parse_libsvm(lines)
        ds2 = parse_libsvm(io.StringIO(serialize_libsvm(ds1)))
        np.testing.assert_array_equal(np.asarray(ds1.A), np.asarray(ds2.A)[:, :ds1.n])
        np.testing.assert_array_equal(ds1.b, ds2.b)

    def test_gzip_load(self, tmp_path):
        path = tmp_path / "toy.txt.gz"
        with gzip.open(path, "wt") as fh:
            fh.write("1 1:0.5\n-1 2:1.5\n")
        ds = load_libsvm(path)
        assert ds.m == 2 and ds.n == 2

    def test_sidecar(self, tmp_path):
        ds = parse_libsvm(["1 1:1.0", "0 2:2.0"])
        path = tmp_path / "meta.json"
        write_sidecar(ds, path)
        meta = json.loads(path.read_text())
        assert meta["m"] == 2 and meta["n"] == 2
        assert meta["label_map"] == "0/1"


class TestStandardize:
    def test_constant_column_rule(self):
        ds = Dataset(A=np.array([[1.0], [1.0], [1.0]]), b=np.zeros(3))
        out = standardize(ds)
        np.testing.assert_array_equal(np.asarray(out.A).ravel(), [0.0, 0.0, 0.0])
        assert out.feature_stds[0] == 1.0

    def test_two_point_column(self):
        ds = Dataset(A=np.array([[0.0], [2.0]]), b=np.zeros(2))
        out = standardize(ds)
        np.testing.assert_allclose(np.asarray(out.A).ravel(), [-1.0, 1.0])

    def test_random_columns_post_hoc(self):
        rng = np.random.default_rng(1)
        ds = Dataset(A=rng.standard_normal((50, 4)) * 3 + 2, b=np.zeros(50))
        out = standardize(ds)
        A = np.asarray(out.A)
        assert np.all(np.abs(A.mean(axis=0)) <= 1e-9)
        assert np.all(np.abs(A.std(axis=0) - 1.0) <= 1e-9)

    def test_idempotent(self):
        rng = np.random.default_rng(2)
        ds = Dataset(A=rng.standard_normal((20, 3)), b=np.zeros(20))
        once = standardize(ds)
        twice = standardize(once)
        np.testing.assert_allclose(np.asarray(once.A), np.asarray(twice.A),
                                   atol=1e-12)

    def test_needs_two_rows(self):
        with pytest.raises(ContractViolation):
            standardize(Dataset(A=np.ones((1, 2)), b=np.zeros(1)))


class TestSynthetic:
    def test_simplex_kind_plants_exact_optimum(self):
        spec = SyntheticSpec(kind="simplex_lsq", m=40, n=8, seed=3)
        ds, x_star = generate_synthetic(spec)
        assert Simplex(8).contains(x_star)
        obj = LeastSquares(ds.A, ds.b)
        assert obj.value(x_star) <= 1e-20 * spec.m

    def test_determinism_bit_identical(self):
        spec = SyntheticSpec(kind="simplex_lsq", m=15, n=5, seed=7)
        ds1, x1 = generate_synthetic(spec)
        ds2, x2 = generate_synthetic(spec)
        np.testing.assert_array_equal(np.asarray(ds1.A), np.asarray(ds2.A))
        np.testing.assert_array_equal(ds1.b, ds2.b)
        np.testing.assert_array_equal(x1, x2)

    def test_ball_kind_singular_value_floor(self):
        spec = SyntheticSpec(kind="ball_lsq_strongly_convex", m=30, n=10, seed=4)
        ds, x_t = generate_synthetic(spec)
        A = np.asarray(ds.A)
        smin = float(np.min(np.linalg.svd(A, compute_uv=False)))
        assert smin >= 0.5
        assert np.linalg.norm(x_t) == pytest.approx(0.9)

    def test_ball_kind_needs_tall_matrix(self):
        with pytest.raises(ContractViolation):
            SyntheticSpec(kind="ball_lsq_strongly_convex", m=5, n=10, seed=0)

    def test_unknown_kind(self):
        with pytest.raises(ContractViolation):
            SyntheticSpec(kind="cube_lsq", m=5, n=5, seed=0)


class TestReferenceSolution:
    def test_simplex_lsq_reaches_planted_optimum(self):
        obj, s, f_star = synthetic_problem(
            SyntheticSpec(kind="simplex_lsq", m=30, n=6, seed=5))
        x_ref, f_ref, converged = reference_solution(obj, s, tol=1e-13,
                                                     max_iter=20000)
        assert f_ref <= 1e-12

    def test_constant_objective(self):
        obj = LeastSquares(np.zeros((3, 3)), np.zeros(3))
        x_ref, f_ref, converged = reference_solution(obj, Simplex(3))
        assert f_ref == 0.0 and converged

    def test_ball_kind_near_zero(self):
        obj, ball, f_star = synthetic_problem(
            SyntheticSpec(kind="ball_lsq_strongly_convex", m=24, n=8, seed=6))
        x_ref, f_ref, converged = reference_solution(obj, ball, tol=1e-13,
                                                     max_iter=50000)
        assert f_ref <= 1e-10
