from __future__ import annotations

import numpy as np
import pytest

from dfrep import (
    FormBackedFunctional,
    OperatorBackedFunctional,
    PureStateFunctional,
    beta_of_product_projection,
    boundedness_probe,
    extract_ils,
    operator_norm,
    pure_state_m,
    tensor_bound_probe,
    trace_norm,
    tracial_bound_probe,
)
from dfrep.probes import (
    VERDICT_DIVERGENCE,
    VERDICT_INCONCLUSIVE,
    VERDICT_TENSOR_BOUNDED,
    _sample_tensor_vectors,
    _sweep_verdict,
)
from conftest import rho_half_half


def _e(dim, i):
    v = np.zeros(dim, dtype=complex)
    v[i] = 1.0
    return v


def _pure_family(n):
    return PureStateFunctional(_e(n, 0))


def _constant_family(n):
    rho = rho_half_half(n)
    return OperatorBackedFunctional(np.kron(rho, rho))


class TestBoundednessProbe:
    def test_holder_bound_operator_backend(self):
        rho = rho_half_half(4)
        x0 = np.kron(rho, rho)
        d = OperatorBackedFunctional(x0)
        assert boundedness_probe(d, samples=300, seed=1) <= trace_norm(x0) + 1e-9

    def test_zero_functional(self):
        d = FormBackedFunctional(np.zeros((9, 9), dtype=complex))
        assert boundedness_probe(d, samples=100, seed=2) == 0.0

    def test_pure_state_cauchy_schwarz(self):
        d = _pure_family(5)
        assert boundedness_probe(d, samples=300, seed=3) <= 1 + 1e-9

    def test_monotone_in_samples(self):
        d = _pure_family(4)
        vals = [boundedness_probe(d, samples=n, seed=7) for n in (10, 50, 200)]
        assert vals[0] <= vals[1] <= vals[2]

    def test_deterministic_per_seed(self):
        d = _pure_family(4)
        assert boundedness_probe(d, samples=100, seed=9) == boundedness_probe(
            d, samples=100, seed=9
        )


class TestTracialBoundProbe:
    def test_pure_state_bounded_by_operator_norm(self):
        # |<PU xi, xi>| <= ||PU|| = 1 for every unit xi
        d = _pure_family(6)
        sup = tracial_bound_probe(d, samples=2000, seed=1)
        assert sup <= 1 + 1e-9
        assert sup > 0.0

    def test_operator_backend_holder_bound(self):
        rho = rho_half_half(4)
        x0 = np.kron(rho, rho)
        d = OperatorBackedFunctional(x0)
        sup = tracial_bound_probe(d, samples=1000, seed=2)
        assert sup <= trace_norm(x0) + 1e-9

    def test_monotone_in_samples_exactly(self):
        d = _pure_family(4)
        vals = [tracial_bound_probe(d, samples=n, seed=11) for n in (10, 100, 500)]
        assert vals[0] <= vals[1] <= vals[2]

    def test_elementary_vector_matches_projection_pair(self, rng):
        # beta(p_{alpha (x) gamma}) equals d on the rank-one pair
        d = _pure_family(4)
        alpha = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        gamma = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        alpha /= np.linalg.norm(alpha)
        gamma /= np.linalg.norm(gamma)
        from dfrep import rank_one_proj

        direct = d.evaluate(rank_one_proj(alpha), rank_one_proj(gamma))
        assert abs(beta_of_product_projection(d, [(alpha, gamma)]) - direct) <= 1e-10

    def test_fast_path_matches_term_pair_route(self, rng):
        # the probe evaluates beta(p_xi) as <X xi, xi>; check against the
        # definitional expansion for every backend
        from conftest import backend_fixtures

        dim = 4
        for kind, d in backend_fixtures(dim).items():
            x = extract_ils(d, dim)
            for _ in range(10):
                terms = [
                    (
                        rng.standard_normal(dim) + 1j * rng.standard_normal(dim),
                        rng.standard_normal(dim) + 1j * rng.standard_normal(dim),
                    )
                    for _ in range(int(rng.integers(1, 5)))
                ]
                xi = sum(np.kron(a, g) for a, g in terms)
                xi = xi / np.linalg.norm(xi)
                fast = complex(np.vdot(xi, x.x_op @ xi))
                slow = beta_of_product_projection(d, terms)
                assert abs(fast - slow) <= 1e-9, kind

    def test_works_at_dimension_two(self):
        assert tracial_bound_probe(_pure_family(2), samples=200, seed=4) <= 1 + 1e-9


class TestSampling:
    def test_unit_norm_and_length_mix(self):
        rng = np.random.default_rng(0)
        rows, counts = _sample_tensor_vectors(3, 500, rng, max_terms=4)
        assert np.allclose(np.linalg.norm(rows, axis=1), 1.0)
        assert set(counts) <= {1, 2, 3, 4}
        assert sum(counts.values()) == 500
        assert len(counts) == 4  # all lengths appear at this sample size

    def test_prefix_stability(self):
        r1 = np.random.default_rng(np.random.SeedSequence([5, 3]))
        r2 = np.random.default_rng(np.random.SeedSequence([5, 3]))
        a, _ = _sample_tensor_vectors(3, 50, r1)
        b, _ = _sample_tensor_vectors(3, 200, r2)
        assert np.array_equal(a, b[:50])


class TestTensorBoundProbe:
    def test_constant_family_stabilizes(self):
        report = tensor_bound_probe(_constant_family, [3, 4, 5, 6], samples=200, seed=1)
        assert report.verdict == VERDICT_TENSOR_BOUNDED
        assert max(report.trace_norms) - min(report.trace_norms) <= 1e-8
        assert abs(report.growth_slope) <= 1e-8

    def test_pure_state_family_diverges(self):
        report = tensor_bound_probe(_pure_family, list(range(2, 9)), samples=300, seed=1)
        assert report.verdict == VERDICT_DIVERGENCE
        for n, tn in zip(report.dims, report.trace_norms):
            assert tn == pytest.approx(n, abs=1e-8)
        assert report.growth_slope == pytest.approx(1.0, abs=1e-6)
        assert all(s <= 1 + 1e-9 for s in report.sup_beta_rank_one)

    def test_verdicts_stable_across_seeds(self):
        for seed in range(1, 11):
            r1 = tensor_bound_probe(_constant_family, [3, 4, 5], samples=50, seed=seed)
            assert r1.verdict != VERDICT_DIVERGENCE
            r2 = tensor_bound_probe(_pure_family, [2, 3, 4, 5, 6], samples=50, seed=seed)
            assert r2.verdict != VERDICT_TENSOR_BOUNDED

    def test_sup_column_equals_tracial_probe(self):
        samples, seed = 150, 3
        report = tensor_bound_probe(_pure_family, [3, 4, 5], samples=samples, seed=seed)
        for dim, sup in zip(report.dims, report.sup_beta_rank_one):
            assert sup == tracial_bound_probe(
                _pure_family(dim), dim, samples=samples, seed=seed
            )

    def test_records_shape(self):
        report = tensor_bound_probe(_constant_family, [3, 4, 5], samples=20, seed=2)
        recs = report.records()
        assert [r["dim"] for r in recs] == [3, 4, 5]
        assert all(set(r) == {"dim", "trace_norm", "sup_beta_rank_one", "elapsed_ms"} for r in recs)
        assert report.samples == 20
        assert report.seed == 2
        assert len(report.length_counts) == 3

    def test_dims_validation(self):
        with pytest.raises(ValueError):
            tensor_bound_probe(_pure_family, [4, 3], samples=10, seed=0)
        with pytest.raises(ValueError):
            tensor_bound_probe(_pure_family, [], samples=10, seed=0)
        with pytest.raises(ValueError):
            tensor_bound_probe(_pure_family, [1, 2], samples=10, seed=0)

    def test_verdict_rules(self):
        assert _sweep_verdict([2, 3, 4, 5], [2, 3, 4, 5], 1.0) == VERDICT_DIVERGENCE
        assert _sweep_verdict([3, 4, 5], [1.0, 1.0, 1.0], 0.0) == VERDICT_TENSOR_BOUNDED
        assert _sweep_verdict([3, 4], [1.0, 1.2], 0.2) == VERDICT_INCONCLUSIVE


class TestPureStateSignature:
    def test_divergence_with_bounded_sup(self):
        # trace norms grow linearly while the beta sup stays <= 1: the
        # sweep-level witness separating the two boundedness notions
        report = tensor_bound_probe(_pure_family, list(range(2, 7)), samples=500, seed=8)
        assert report.verdict == VERDICT_DIVERGENCE
        assert all(s <= 1 + 1e-9 for s in report.sup_beta_rank_one)
        for n in report.dims:
            assert operator_norm(pure_state_m(_e(n, 0))) <= 1 + 1e-9


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-v"]))
