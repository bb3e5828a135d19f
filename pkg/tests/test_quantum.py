import json
import math

import numpy as np
import pytest

from covsep import quantum as qm
from covsep.errors import InternalConsistencyError, InvariantError
from covsep.rng import SplitMix64

H = 1 / math.sqrt(2)
QA = qm.Observable2.real([[3, 1], [1, 1]])
RB = qm.Observable2.real([[1, 1], [1, 3]])
Z = qm.Observable2.real([[1, 0], [0, -1]])
ID = qm.Observable2.real([[1, 0], [0, 1]])


def bell_xy_closed_form(q, r):
    return 0.5 * sum(q[i, j] * r[i, j] for i in range(2) for j in range(2)).real


def bell_x_times_y_closed_form(q, r):
    return 0.25 * ((q[0, 0] + q[1, 1]) * (r[0, 0] + r[1, 1])).real


def local_expectation(vec, m):
    v = np.asarray(vec)
    return np.vdot(v, m.matrix @ v).real


class TestObservable:
    def test_symmetrized(self):
        q = qm.Observable2(((1 + 1e-13j, 2 + 1j), (2 - 1j + 1e-12, -1)))
        assert q[1, 0] == q[0, 1].conjugate()
        assert q[0, 0].imag == 0.0
        np.testing.assert_array_equal(q.matrix, q.matrix.conj().T)

    def test_rejects_non_hermitian(self):
        with pytest.raises(InvariantError) as exc:
            qm.Observable2(((1, 2), (3, 1)))
        assert exc.value.invariant == "Hermitian observable"
        assert exc.value.residual == pytest.approx(1.0)

    def test_rejects_complex_diagonal(self):
        with pytest.raises(InvariantError):
            qm.Observable2(((1j, 0), (0, 1)))

    def test_json_round_trip(self):
        q = qm.Observable2(((0.1, 0.3 - 0.7j), (0.3 + 0.7j, -2.5)))
        doc = json.loads(json.dumps(q.to_dict()))
        assert doc["entries"][0][1] == [0.3, -0.7]
        assert qm.Observable2.from_dict(doc) == q

    def test_json_diagnostic(self):
        text = '{"entries": [[[1, 0], [2, 0]], [[0, 0], [1, 0]]]}'
        with pytest.raises(InvariantError, match="Hermitian observable.*residual 2.000e\\+00"):
            qm.Observable2.from_json(text)

    def test_json_bad_shape(self):
        with pytest.raises(InvariantError):
            qm.Observable2.from_json('{"entries": [[[1, 0]], [[0, 0], [1, 0]]]}')


class TestState:
    def test_bell(self):
        s = qm.bell_state()
        assert s.gamma == ((H, 0), (0, H))

    def test_rejects_unnormalized(self):
        with pytest.raises(InvariantError) as exc:
            qm.TwoQubitState(((1, 0), (0, 1)))
        assert exc.value.invariant == "normalized state"
        assert exc.value.residual == pytest.approx(1.0)

    def test_json(self):
        s = qm.TwoQubitState(((0.6, 0), (0, 0.8j)))
        assert qm.TwoQubitState.from_json(json.dumps(s.to_dict())) == s
        with pytest.raises(InvariantError, match="normalized"):
            qm.TwoQubitState.from_json('{"gamma": [[[1, 0], [1, 0]], [[0, 0], [0, 0]]]}')

    def test_product_state(self):
        assert qm.product_state([1, 0], [1, 0]).gamma == ((1, 0), (0, 0))
        s = qm.product_state([H, H], [H, H])
        np.testing.assert_allclose(np.abs(s.vector), 0.5, atol=1e-15)

    def test_product_state_rejects_unnormalized_factor(self):
        with pytest.raises(InvariantError, match="factor b normalized"):
            qm.product_state([1, 0], [1, 1])


class TestExpectations:
    def test_paper_values(self):
        s = qm.bell_state()
        assert qm.expectation_xy(s, QA, RB) == pytest.approx(4.0, abs=1e-14)
        assert qm.expectation_x(s, QA) == pytest.approx(2.0, abs=1e-14)
        assert qm.expectation_y(s, RB) == pytest.approx(2.0, abs=1e-14)
        assert abs(qm.quantum_covariance(s, QA, RB)) <= 1e-12

    def test_zz_on_bell(self):
        assert qm.quantum_covariance(qm.bell_state(), Z, Z) == pytest.approx(1.0)

    def test_identity(self):
        g = SplitMix64(1)
        for _ in range(20):
            assert qm.expectation_x(qm.random_state(g), ID) == pytest.approx(1.0, abs=1e-14)

    def test_bell_closed_forms(self):
        g = SplitMix64(8)
        s = qm.bell_state()
        for _ in range(500):
            q, r = qm.random_hermitian(g, -5, 5), qm.random_hermitian(g, -5, 5)
            assert qm.expectation_xy(s, q, r) == pytest.approx(bell_xy_closed_form(q, r), abs=1e-12)
            prod = qm.expectation_x(s, q) * qm.expectation_y(s, r)
            assert prod == pytest.approx(bell_x_times_y_closed_form(q, r), abs=1e-12)

    def test_product_state_factorizes(self):
        g = SplitMix64(2)
        for _ in range(500):
            a, b = qm.random_qubit(g), qm.random_qubit(g)
            q, r = qm.random_hermitian(g), qm.random_hermitian(g)
            s = qm.product_state(a, b)
            expected = local_expectation(a, q) * local_expectation(b, r)
            assert qm.expectation_xy(s, q, r) == pytest.approx(expected, abs=1e-12)
            scale = max(1, q.frobenius(), r.frobenius())
            assert abs(qm.quantum_covariance(s, q, r)) <= 1e-10 * scale

    def test_imaginary_residual_detected(self):
        # bypass construction to simulate a non-Hermitian operator slipping through
        q = qm.Observable2.real([[1, 0], [0, 1]])
        object.__setattr__(q, "_matrix", np.array([[0, 1], [0, 0]], dtype=complex))
        s = qm.TwoQubitState(((0.5, 0.5), (0.5j, 0.5j)))
        with pytest.raises(InternalConsistencyError):
            qm.expectation_x(s, q)

    def test_basis_change_invariance(self):
        g = SplitMix64(77)
        for _ in range(300):
            s = qm.random_state(g)
            q, r = qm.random_hermitian(g), qm.random_hermitian(g)
            u, v = qm.random_unitary(g), qm.random_unitary(g)
            np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-14)
            gamma2 = u @ s.matrix @ v.T
            s2 = qm.TwoQubitState(gamma2.tolist())
            q2 = qm.Observable2((u @ q.matrix @ u.conj().T).tolist())
            r2 = qm.Observable2((v @ r.matrix @ v.conj().T).tolist())
            assert qm.quantum_covariance(s2, q2, r2) == pytest.approx(
                qm.quantum_covariance(s, q, r), abs=1e-10 * max(1, q.frobenius(), r.frobenius()))


class TestSchmidt:
    def test_bell(self):
        s1, s2 = qm.schmidt_coefficients(qm.bell_state())
        assert s1 == pytest.approx(H, abs=1e-15) and s2 == pytest.approx(H, abs=1e-15)
        assert not qm.is_separable(qm.bell_state(), 1e-9)

    def test_product(self):
        g = SplitMix64(3)
        for _ in range(200):
            s = qm.product_state(qm.random_qubit(g), qm.random_qubit(g))
            s1, s2 = qm.schmidt_coefficients(s)
            assert s1 == pytest.approx(1.0, abs=1e-14)
            assert s2 <= 1e-14
            assert qm.is_separable(s, 1e-9)

    def test_diagonal(self):
        s = qm.TwoQubitState(((math.sqrt(0.9), 0), (0, math.sqrt(0.1))))
        s1, s2 = qm.schmidt_coefficients(s)
        assert (s1, s2) == pytest.approx((math.sqrt(0.9), math.sqrt(0.1)), abs=1e-15)
        assert not qm.is_separable(s, 1e-9)

    def test_against_svd(self):
        g = SplitMix64(4)
        for _ in range(1000):
            s = qm.random_state(g)
            sv = np.linalg.svd(s.matrix, compute_uv=False)
            got = qm.schmidt_coefficients(s)
            np.testing.assert_allclose(got, sv, atol=1e-12)
            assert got[0] ** 2 + got[1] ** 2 == pytest.approx(1.0, abs=1e-10)


class TestSpectral:
    def test_paper_q(self):
        sd = qm.spectral_decomposition(QA)
        # characteristic polynomial l^2 - 4 l + 2
        assert sd.eigenvalues == pytest.approx((2 + math.sqrt(2), 2 - math.sqrt(2)), abs=1e-14)
        assert not sd.degenerate

    def test_identity_degenerate(self):
        sd = qm.spectral_decomposition(ID)
        assert sd.degenerate
        assert sd.eigenvalues == (1.0, 1.0)
        np.testing.assert_array_equal(sd.projectors[0], np.eye(2))
        np.testing.assert_array_equal(sd.projectors[1], np.zeros((2, 2)))

    def test_diagonal(self):
        sd = qm.spectral_decomposition(qm.Observable2.real([[5, 0], [0, -5]]))
        assert sd.eigenvalues == (5.0, -5.0)
        np.testing.assert_allclose(sd.projectors[0], np.diag([1, 0]))
        np.testing.assert_allclose(sd.projectors[1], np.diag([0, 1]))

    def test_properties_against_eigh(self):
        g = SplitMix64(5)
        for _ in range(1000):
            q = qm.random_hermitian(g, -3, 3)
            sd = qm.spectral_decomposition(q)
            np.testing.assert_allclose(sorted(sd.eigenvalues), np.linalg.eigvalsh(q.matrix), atol=1e-12)
            p1, p2 = sd.projectors
            for p in (p1, p2):
                np.testing.assert_allclose(p, p.conj().T, atol=1e-12)
                np.testing.assert_allclose(p @ p, p, atol=1e-10)
            np.testing.assert_allclose(p1 @ p2, 0, atol=1e-10)
            np.testing.assert_allclose(p1 + p2, np.eye(2), atol=1e-12)
            np.testing.assert_allclose(sd.eigenvalues[0] * p1 + sd.eigenvalues[1] * p2, q.matrix, atol=1e-10)
