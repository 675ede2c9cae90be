import math

import numpy as np
import pytest

from traintrack.graphs import GraphMap, iter_tight_paths, rose_of
from traintrack.strata import (
    assign_metric,
    compute_filtration,
    is_irreducible,
    pf_eigen,
    transition_matrix,
    verify_improved,
    verify_rtt,
)

from conftest import PHI

PLASTIC = 1.3247179572447460  # real root of x^3 = x + 1


class TestTransitionMatrix:
    def test_fib(self, fib_rose, fib_filtration):
        m = transition_matrix(fib_rose, fib_filtration.strata[0].edges)
        assert m.tolist() == [[1, 1], [1, 0]]

    def test_counts_are_unsigned(self, plas_rose, plas_filtration):
        m = transition_matrix(plas_rose, plas_filtration.strata[0].edges)
        # column/row conventions aside, total crossings match image lengths
        assert int(m.sum()) == sum(
            len(plas_rose.edge_image(e)) for e in (1, 2, 3)
        )


class TestPfEigen:
    def test_fib_value_and_vector(self, fib_rose, fib_filtration):
        m = transition_matrix(fib_rose, fib_filtration.strata[0].edges)
        lam, v = pf_eigen(m)
        assert abs(lam - PHI) < 1e-9
        v = list(v)
        # min-entry normalization puts the vector at (phi, 1)
        assert abs(min(v) - 1.0) < 1e-12
        assert abs(max(v) - PHI) < 1e-9

    def test_plas_is_plastic_number(self, plas_rose, plas_filtration):
        m = transition_matrix(plas_rose, plas_filtration.strata[0].edges)
        lam, _ = pf_eigen(m)
        assert abs(lam - PLASTIC) < 1e-9
        assert abs(lam ** 3 - lam - 1) < 1e-9

    def test_residual_is_small(self, plas_rose, plas_filtration):
        # v is a left eigenvector: rows index crossings of f(E_j)
        m = transition_matrix(plas_rose, plas_filtration.strata[0].edges)
        lam, v = pf_eigen(m)
        v = np.array(v)
        assert np.linalg.norm(m.T @ v - lam * v, ord=np.inf) < 1e-9 * lam

    def test_rejects_reducible(self):
        with pytest.raises(ValueError):
            pf_eigen(np.array([[1, 1], [0, 1]]))
        assert not is_irreducible(np.array([[1, 1], [0, 1]]))
        assert is_irreducible(np.array([[1, 1], [1, 0]]))


class TestFiltration:
    def test_fib_single_exponential(self, fib_filtration):
        assert len(fib_filtration.strata) == 1
        s = fib_filtration.strata[0]
        assert s.kind == "exponential" and s.index == 1
        assert s.edges == (1, 2)

    def test_poly_tower(self, poly_rose):
        filt = compute_filtration(poly_rose)
        kinds = [(s.edges, s.kind) for s in filt.strata]
        assert kinds == [((1,), "polynomial"), ((2,), "polynomial")]

    def test_identity_all_polynomial(self, ident):
        filt = compute_filtration(rose_of(ident))
        assert all(s.kind == "polynomial" for s in filt.strata)

    def test_rel_two_strata(self, rel_rose):
        filt = compute_filtration(rel_rose)
        assert [(s.edges, s.kind) for s in filt.strata] == [
            ((1,), "polynomial"),
            ((2, 3), "exponential"),
        ]
        assert abs(filt.strata[1].pf_value - PHI) < 1e-9

    def test_invariance(self, plas_rose, plas_filtration):
        # images never cross edges above their own stratum
        for s in plas_filtration.strata:
            through = plas_filtration.edges_through(s.index)
            for e in s.edges:
                assert all(abs(d) in through for d in plas_rose.edge_image(e))

    def test_zero_stratum(self):
        # an edge whose image misses its own stratum entirely
        filt = compute_filtration(_zero_example())
        assert filt.strata[-1].kind == "zero"

    def test_stratum_of(self, rel_rose):
        filt = compute_filtration(rel_rose)
        assert filt.stratum_of(1) == 1
        assert filt.stratum_of(2) == 2
        assert filt.stratum_of(3) == 2


def _two_rose():
    from traintrack.graphs import Graph

    return Graph(["v"], [("a", "v", "v"), ("b", "v", "v")],
                 marking={"a": (1,), "b": (2,)})


def _zero_example():
    # a -> b, b -> b: the top stratum {a} has zero transition matrix
    return GraphMap(_two_rose(), {"v": "v"}, {"a": (2,), "b": (2,)})


class TestMetric:
    def test_fib_expands_by_lambda(self, fib_rose, fib_filtration):
        metric = assign_metric(fib_filtration)
        lam = fib_filtration.strata[0].pf_value
        # every legal (here: every edge) image expands by exactly lambda
        for e in (1, 2):
            img = fib_rose.edge_image(e)
            assert math.isclose(
                metric.length(img), lam * metric.edge_length(e), rel_tol=1e-9
            )

    def test_legal_paths_expand_exactly(self, fib_rose, fib_filtration):
        metric = assign_metric(fib_filtration)
        lam = fib_filtration.strata[0].pf_value
        legal = [
            p for p in iter_tight_paths(fib_rose.graph, 10)
            if fib_rose.is_legal(p)
        ]
        assert len(legal) > 100
        for p in legal:
            img = fib_rose.map_letters(p)
            assert math.isclose(
                metric.length(img), lam * metric.length(p), rel_tol=1e-9
            )

    def test_metric_values(self, fib_filtration):
        metric = assign_metric(fib_filtration)
        assert abs(metric.edge_length(1) - PHI) < 1e-9
        assert metric.edge_length(2) == 1.0
        assert metric.edge_length(-1) == metric.edge_length(1)

    def test_poly_edges_get_unit_length(self, poly_rose):
        filt = compute_filtration(poly_rose)
        metric = assign_metric(filt)
        assert metric.lengths == {1: 1.0, 2: 1.0}

    def test_rel_metric(self, rel_rose):
        filt = compute_filtration(rel_rose)
        metric = assign_metric(filt)
        assert metric.edge_length(1) == 1.0
        assert abs(metric.edge_length(3) / metric.edge_length(2) - PHI) < 1e-9

    def test_r_length_counts_top_edges_only(self, rel_rose):
        filt = compute_filtration(rel_rose)
        metric = assign_metric(filt)
        hr = set(filt.strata[1].edges)
        assert metric.r_length((1, 2, -3, 1), hr) == pytest.approx(
            metric.edge_length(2) + metric.edge_length(3)
        )


class TestVerify:
    def test_fib_passes_rtt(self, fib_rose, fib_filtration):
        rep = verify_rtt(fib_rose, fib_filtration)
        assert rep.passed and rep.violations == []

    def test_plas_rel_pass(self, plas_rose, rel_rose):
        assert verify_rtt(plas_rose, compute_filtration(plas_rose)).passed
        assert verify_rtt(rel_rose, compute_filtration(rel_rose)).passed

    def test_broken_fails_condition_1_on_ea(self, broken):
        filt = compute_filtration(broken)
        rep = verify_rtt(broken, filt)
        assert not rep.passed
        assert len(rep.violations) == 1
        v = rep.violations[0]
        assert v["condition"] == 1
        assert v["edge"] == "ea"

    def test_improved_flags_periodic_nielsen_path(self, fib_rose, fib_filtration):
        # an honest train track map can still fail the stronger conditions
        rep = verify_improved(fib_rose, fib_filtration)
        assert not rep.passed
        assert any("period 2" in v.get("detail", "") for v in rep.violations)

    def test_improved_passes_plas(self, plas_rose):
        assert verify_improved(plas_rose, compute_filtration(plas_rose)).passed
