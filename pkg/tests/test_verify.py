from fractions import Fraction

import numpy as np
import pytest

from topobetti.constructions import (
    CuttingSpec,
    FoldingSpec,
    build_topo_network,
    predict_betti,
)
from topobetti.exactgeom import BoxDomain
from topobetti.homology import analyze_network
from topobetti.relunet import AffineLayer, ReluNetwork, eval_scalar
from topobetti.verify import (
    SignGrid,
    default_resolution,
    grid_beta0,
    grid_sign_sample,
    reconcile,
    write_csv,
    write_pgm,
)


def _linear(coeffs, bias):
    d = len(coeffs)
    zero = Fraction(0)
    return ReluNetwork(
        (
            AffineLayer(
                (tuple(Fraction(c) for c in coeffs), (zero,) * d),
                (zero, Fraction(1)),
            ),
            AffineLayer(((Fraction(1), zero),), (Fraction(bias),)),
        )
    )


class TestGridSignSample:
    def test_signs_match_exact_evaluation(self):
        net = build_topo_network(FoldingSpec(2, (2,)), CuttingSpec(2, (1,)))
        box = BoxDomain.unit_cube(2)
        sg = grid_sign_sample(net, box, 12)
        for i in range(13):
            for j in range(13):
                x = (Fraction(i, 12), Fraction(j, 12))
                v = eval_scalar(net, x)
                assert sg.signs[i, j] == (v > 0) - (v < 0)

    def test_non_unit_box(self):
        net = _linear((1, 0), Fraction(-1, 2))
        box = BoxDomain(
            (Fraction(0), Fraction(-1)), (Fraction(1), Fraction(1))
        )
        sg = grid_sign_sample(net, box, 4)
        # sign of x₁ − 1/2 along the first axis: −,−,0,+,+
        assert list(sg.signs[:, 0]) == [-1, -1, 0, 1, 1]

    def test_validation(self):
        net = _linear((1, 0), 0)
        box = BoxDomain.unit_cube(2)
        with pytest.raises(ValueError):
            grid_sign_sample(net, box, 0)
        from topobetti.constructions import build_folding_network

        with pytest.raises(ValueError):
            grid_sign_sample(build_folding_network(FoldingSpec(2, (2,))), box, 4)


class TestGridBeta0:
    def test_two_blobs(self):
        signs = np.ones((5, 5), dtype=np.int8)
        signs[0, 0] = -1
        signs[4, 3] = -1
        signs[4, 4] = 0
        sg = SignGrid(resolution=4, d=2, signs=signs)
        assert grid_beta0(sg) == 2

    def test_diagonal_is_not_connected(self):
        signs = np.ones((3, 3), dtype=np.int8)
        signs[0, 0] = -1
        signs[1, 1] = -1
        sg = SignGrid(resolution=2, d=2, signs=signs)
        assert grid_beta0(sg) == 2

    def test_empty_grid(self):
        sg = SignGrid(resolution=2, d=2, signs=np.ones((3, 3), dtype=np.int8))
        assert grid_beta0(sg) == 0

    def test_3d_ring(self):
        signs = np.ones((3, 3, 3), dtype=np.int8)
        for i in range(3):
            for j in range(3):
                if (i, j) != (1, 1):
                    signs[i, j, 1] = -1
        sg = SignGrid(resolution=2, d=3, signs=signs)
        assert grid_beta0(sg) == 1

    def test_matches_exact_beta0_on_small_instance(self):
        fold, cut = FoldingSpec(2, (2,)), CuttingSpec(2, (1,))
        net = build_topo_network(fold, cut)
        N = default_resolution(fold.M, cut.w_vec)
        sg = grid_sign_sample(net, BoxDomain.unit_cube(2), N)
        assert grid_beta0(sg) == predict_betti(fold.M, cut.w_vec, 2).values[0]


class TestReconcile:
    def test_agreement(self):
        net = build_topo_network(FoldingSpec(2, (2,)), CuttingSpec(2, (1,)))
        report = analyze_network(
            net, predicted=predict_betti(2, (1,), 2), oracle_beta0=2
        )
        rec = reconcile(report)
        assert rec.all_agree
        assert rec.oracle_agrees and rec.serra_ok
        assert rec.to_json()["all_agree"] is True

    def test_disagreement_is_reported_not_resolved(self):
        net = build_topo_network(FoldingSpec(2, (2,)), CuttingSpec(2, (1,)))
        report = analyze_network(net, oracle_beta0=99)
        rec = reconcile(report)
        assert not rec.all_agree
        assert rec.oracle_agrees is False
        assert rec.oracle_beta0 == 99 and rec.betti[0] == 2


class TestDumps:
    def test_pgm(self, tmp_path):
        net = build_topo_network(FoldingSpec(2, (2,)), CuttingSpec(2, (1,)))
        sg = grid_sign_sample(net, BoxDomain.unit_cube(2), 8)
        path = tmp_path / "grid.pgm"
        write_pgm(sg, str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == "P2" and lines[1] == "9 9"
        assert len(lines) == 3 + 9

    def test_csv(self, tmp_path):
        net = build_topo_network(FoldingSpec(2, (2,)), CuttingSpec(2, (1,)))
        sg = grid_sign_sample(net, BoxDomain.unit_cube(2), 8)
        path = tmp_path / "grid.csv"
        write_csv(sg, str(path))
        rows = [line.split(",") for line in path.read_text().splitlines()]
        assert len(rows) == 9 and all(len(r) == 9 for r in rows)
        assert {v for r in rows for v in r} <= {"-1", "0", "1"}

    def test_rejects_non_2d(self):
        sg = SignGrid(resolution=2, d=3, signs=np.ones((3, 3, 3), dtype=np.int8))
        with pytest.raises(ValueError):
            write_pgm(sg, "/tmp/never.pgm")
