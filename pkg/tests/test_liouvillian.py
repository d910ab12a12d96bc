import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import LOWER, PLUS_X, UP, random_hermitian, random_matrix, random_rho
from ptlindblad.basis import PAULI_X, PAULI_Z, coordinates, embed, make_basis
from ptlindblad.errors import DimensionMismatch, NotHermitian, ValidationError
from ptlindblad.liouvillian import (
    LindbladModel,
    Phase,
    apply_dissipator,
    apply_liouvillian,
    bloch_generator,
    classify_phase,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
)
from ptlindblad.models import dephasing_model, pt_model


def superoperator_oracle(model):
    """Column-stacking matrix of the Lindbladian, assembled with Kronecker products."""
    n = model.n
    ident = np.eye(n)
    sup = -1j * (np.kron(ident, model.H) - np.kron(model.H.T, ident))
    for l in model.lindblads:
        k = l.conj().T @ l
        sup += np.kron(l.conj(), l) - 0.5 * (np.kron(ident, k) + np.kron(k.T, ident))
    return sup


class TestModel:
    def test_hermitian_h_required(self):
        with pytest.raises(NotHermitian):
            LindbladModel(H=np.array([[0, 1], [0, 0]]))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            LindbladModel(H=np.eye(2), lindblads=(np.eye(3),))

    def test_unitary_flag(self):
        assert LindbladModel(H=PAULI_X).is_unitary
        assert not pt_model((1, 1)).is_unitary


class TestDissipator:
    def test_no_channels(self, rng):
        assert np.all(apply_dissipator(LindbladModel(H=PAULI_X), random_rho(rng, 2)) == 0)

    def test_dephasing_kills_coherence(self):
        gamma = 0.7
        out = apply_dissipator(pt_model((1.0, gamma)), PLUS_X)
        np.testing.assert_allclose(out, 0.5 * (-2 * gamma) * PAULI_X, atol=1e-15)

    def test_commuting_state_is_stationary(self):
        model = LindbladModel(H=np.zeros((2, 2)), lindblads=(PAULI_Z,))
        np.testing.assert_allclose(apply_dissipator(model, np.diag([0.3, 0.7])), 0, atol=1e-15)


class TestLiouvillian:
    def test_maximally_mixed_stationary_for_normal_channels(self, rng):
        h = random_hermitian(rng, 3)
        l = random_hermitian(rng, 3)
        out = apply_liouvillian(LindbladModel(H=h, lindblads=(l,)), np.eye(3) / 3)
        np.testing.assert_allclose(out, 0, atol=1e-14)

    def test_unitary_is_commutator(self, rng):
        h = random_hermitian(rng, 3)
        rho = random_rho(rng, 3)
        np.testing.assert_allclose(apply_liouvillian(LindbladModel(H=h), rho), -1j * (h @ rho - rho @ h), atol=1e-14)

    def test_dephasing_plus_x(self):
        g, gamma = 1.3, 0.4
        model = dephasing_model((g, gamma))
        b = make_basis(2)
        rdot = embed(PLUS_X, b) @ bloch_generator(model).Lambda.T
        np.testing.assert_allclose(coordinates(apply_liouvillian(model, PLUS_X), b)[1:], rdot, atol=1e-15)
        np.testing.assert_allclose(rdot, [-2 * gamma / math.sqrt(2), g / math.sqrt(2), 0], atol=1e-15)

    def test_matches_kronecker_oracle(self, rng):
        model = LindbladModel(H=random_hermitian(rng, 3), lindblads=(random_matrix(rng, 3), random_matrix(rng, 3)))
        rho = random_rho(rng, 3)
        vec = superoperator_oracle(model) @ rho.reshape(-1, order="F")
        np.testing.assert_allclose(apply_liouvillian(model, rho), vec.reshape(3, 3, order="F"), atol=1e-13)


class TestBlochGenerator:
    def test_pt_lambda(self):
        g, gamma = 1.7, 0.6
        gen = bloch_generator(pt_model((g, gamma)))
        expected = [[-2 * gamma, 0, 0], [0, -2 * gamma, -g], [0, g, 0]]
        np.testing.assert_allclose(gen.Lambda, expected, atol=1e-15)
        np.testing.assert_allclose(gen.b, 0, atol=1e-15)

    def test_dephasing_lambda(self):
        g, gamma = 1.7, 0.6
        gen = bloch_generator(dephasing_model((g, gamma)))
        expected = [[-2 * gamma, -g, 0], [g, -2 * gamma, 0], [0, 0, 0]]
        np.testing.assert_allclose(gen.Lambda, expected, atol=1e-15)

    def test_lowering_operator_has_drift(self):
        gamma = 0.5
        gen = bloch_generator(LindbladModel(H=np.zeros((2, 2)), lindblads=(math.sqrt(gamma) * LOWER,)))
        assert np.linalg.norm(gen.b) > 0.1
        # decay towards |down>: r_z relaxes to -1/sqrt(2)
        r_inf = np.linalg.solve(gen.Lambda, -gen.b)
        np.testing.assert_allclose(r_inf, [0, 0, -1 / math.sqrt(2)], atol=1e-14)

    def test_full_matrix_layout(self, rng):
        model = LindbladModel(H=random_hermitian(rng, 3), lindblads=(random_matrix(rng, 3),))
        gen = bloch_generator(model)
        assert gen.full.shape == (9, 9) and gen.Lambda.shape == (8, 8)
        assert np.all(gen.full[0] == 0)
        np.testing.assert_allclose(gen.full[1:, 0], math.sqrt(3) * gen.b)
        np.testing.assert_array_equal(gen.full[1:, 1:], gen.Lambda)
        assert gen.Lambda.dtype == float

    def test_full_matches_kronecker_spectrum(self, rng):
        model = LindbladModel(H=random_hermitian(rng, 3), lindblads=(random_matrix(rng, 3),))
        def key(vals):
            return np.array(sorted(vals, key=lambda z: (round(z.real, 8), round(z.imag, 8))))

        ours = key(np.linalg.eigvals(bloch_generator(model).full))
        ref = key(np.linalg.eigvals(superoperator_oracle(model)))
        np.testing.assert_allclose(ours, ref, atol=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 4), st.integers(0, 3), st.booleans(), st.integers(0, 2**32 - 1))
    def test_lambda_consistency(self, n, n_l, hermitian, seed):
        rng = np.random.default_rng(seed)
        ls = []
        for _ in range(n_l):
            ls.append(random_hermitian(rng, n) if hermitian else random_matrix(rng, n))
        model = LindbladModel(H=random_hermitian(rng, n), lindblads=tuple(ls))
        gen = bloch_generator(model)
        b = make_basis(n)
        rho = random_rho(rng, n)
        want = coordinates(apply_liouvillian(model, rho), b)[1:]
        np.testing.assert_allclose(gen.rate(embed(rho, b)), want, atol=1e-12)
        if hermitian or n_l == 0:
            np.testing.assert_allclose(gen.b, 0, atol=1e-13)


class TestClassify:
    def test_unbroken(self):
        c = classify_phase(pt_model((2.0, 1.0)))
        assert c.label is Phase.UNBROKEN
        want = np.array([0, -1 + 1j * math.sqrt(3), -1 - 1j * math.sqrt(3), -2])
        np.testing.assert_allclose(np.sort_complex(c.eigenvalues.values), np.sort_complex(want), atol=1e-12)

    def test_exceptional_point(self):
        c = classify_phase(pt_model((1.0, 1.0)))
        assert c.label is Phase.EXCEPTIONAL_POINT
        assert c.coalescence_gap <= 1e-7 or c.eigenvalues.vector_condition > 1e8

    def test_broken(self):
        c = classify_phase(pt_model((1.0, 2.0)))
        assert c.label is Phase.BROKEN
        np.testing.assert_allclose(
            np.sort(c.eigenvalues.values.real), np.sort([0, -4, -2 + math.sqrt(3), -2 - math.sqrt(3)]), atol=1e-12
        )
        assert c.max_imag == 0.0

    def test_dephasing_has_only_rotation_pair(self):
        g, gamma = 1.0, 1.0
        c = classify_phase(dephasing_model((g, gamma)))
        vals = c.eigenvalues.values
        complex_vals = vals[np.abs(vals.imag) > 1e-12]
        np.testing.assert_allclose(np.sort_complex(complex_vals), [-2 * gamma - 1j * g, -2 * gamma + 1j * g], atol=1e-12)

    def test_to_dict_is_json(self):
        json.dumps(classify_phase(pt_model((2.0, 1.0))).to_dict())

    @pytest.mark.parametrize("scale", [1e-3, 1.0, 1e3])
    def test_scale_invariant(self, scale):
        labels = [classify_phase(pt_model((scale * g, scale * gm))).label for g, gm in [(2, 1), (1, 1), (1, 2)]]
        assert labels == [Phase.UNBROKEN, Phase.EXCEPTIONAL_POINT, Phase.BROKEN]


class TestModelFiles:
    def test_roundtrip(self, tmp_path, rng):
        model = LindbladModel(H=random_hermitian(rng, 3), lindblads=(random_matrix(rng, 3),))
        path = tmp_path / "m.json"
        save_model(model, path)
        back = load_model(path)
        np.testing.assert_array_equal(back.H, model.H)
        np.testing.assert_array_equal(back.lindblads[0], model.lindblads[0])
        assert back.name == "m"

    def test_dict_form(self):
        d = model_to_dict(pt_model((1.0, 0.25)))
        assert d["n"] == 2 and d["H"][0][1] == [0.5, 0.0] and d["L"][0][1][1] == [-0.5, 0.0]

    @pytest.mark.parametrize(
        "data",
        [
            [],
            {"H": [[[0, 0]]]},
            {"n": 2, "H": [[1, 0], [0, 1]]},
            {"n": 2, "H": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]]},
            {"n": 2, "H": [[[0, 0], [0, 0]], [[0, 0], [0, 0]]], "L": "x"},
            {"n": "2", "H": []},
            {"n": 2, "H": [[["a", 0], [0, 0]], [[0, 0], [0, 0]]]},
        ],
    )
    def test_malformed(self, data):
        with pytest.raises(ValidationError):
            model_from_dict(data)

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json", encoding="utf-8")
        with pytest.raises(ValidationError):
            load_model(p)
