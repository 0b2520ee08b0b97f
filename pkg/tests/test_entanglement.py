import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from esd_adapt.entanglement import concurrence, concurrence_matrix, is_entangled, min_pt_eigenvalue, partial_transpose_A
from esd_adapt.linalg import I4, SIGMA_Y, kron
from esd_adapt.adaptation import loss_pipeline_state
from esd_adapt.states import BellKind, TwoQubitState, bell, product, random_density, random_qubit_density, random_unitary, werner


def wootters_via_characteristic_polynomial(rho):
    """Concurrence from the roots of det(x - rho rho~), with no eigensolver."""
    yy = np.kron(SIGMA_Y, SIGMA_Y)
    tilde = yy @ rho.conj() @ yy
    roots = np.roots(np.poly(rho @ tilde))
    lam = np.sort(np.sqrt(np.clip(roots.real, 0, None)))[::-1]
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


def test_partial_transpose_index_map():
    m = np.arange(16, dtype=complex).reshape(4, 4)
    pt = partial_transpose_A(m)
    # swap of the A indices: <i m| . |j n>  ->  <j m| . |i n>
    for i, j, a, b in np.ndindex(2, 2, 2, 2):
        assert pt[2 * i + a, 2 * j + b] == m[2 * j + a, 2 * i + b]


def test_partial_transpose_singlet_spectrum():
    w = np.linalg.eigvalsh(partial_transpose_A(bell("PsiMinus").rho))
    assert np.allclose(np.sort(w), [-0.5, 0.5, 0.5, 0.5], atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_partial_transpose_is_involution(seed):
    rho = random_density(np.random.default_rng(seed)).rho
    assert np.max(np.abs(partial_transpose_A(partial_transpose_A(rho)) - rho)) < 1e-15


def test_is_entangled_examples():
    rep = is_entangled(bell("PsiMinus"))
    assert rep.entangled and rep.min_pt_eigenvalue == pytest.approx(-0.5, abs=1e-12)
    rep = is_entangled(TwoQubitState(I4 / 4))
    assert not rep.entangled and rep.min_pt_eigenvalue == pytest.approx(0.25, abs=1e-12)
    assert is_entangled(werner("PsiMinus", 0.5)).entangled
    assert not is_entangled(werner("PsiMinus", 0.3)).entangled


@pytest.mark.parametrize("kind", list(BellKind))
def test_bell_concurrence(kind):
    assert concurrence(bell(kind)) == pytest.approx(1.0, abs=1e-10)


def test_loss_state_concurrence_value():
    c = concurrence(loss_pipeline_state(0.9, 0.9))
    assert c == pytest.approx(0.81 - np.sqrt(0.1 * 0.1 * 0.9), abs=1e-9)
    assert c == pytest.approx(0.715131670195, abs=1e-9)


@pytest.mark.parametrize("p", [0.2, 0.5, 0.9])
@pytest.mark.parametrize("kind", [BellKind.PSI_MINUS, BellKind.PHI_MINUS])
def test_werner_concurrence_against_characteristic_polynomial(p, kind):
    s = werner(kind, p)
    oracle = wootters_via_characteristic_polynomial(s.rho)
    assert oracle == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-6)
    assert concurrence(s) == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-10)


def test_random_states_against_characteristic_polynomial(rng):
    for _ in range(50):
        rho = random_density(rng, rank=2).rho
        assert concurrence(rho) == pytest.approx(wootters_via_characteristic_polynomial(rho), abs=1e-6)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_local_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng).rho
    uv = kron(random_unitary(rng), random_unitary(rng))
    assert abs(concurrence(uv @ rho @ uv.conj().T) - concurrence(rho)) < 1e-9
    assert abs(min_pt_eigenvalue(uv @ rho @ uv.conj().T) - min_pt_eigenvalue(rho)) < 1e-9


def test_ppt_concurrence_agreement(rng):
    band = 1e-8
    compared = 0
    for i in range(1000):
        rho = random_density(rng, rank=1 + i % 4).rho
        c, m = concurrence(rho), min_pt_eigenvalue(rho)
        if abs(c) <= band or abs(m) <= band:
            continue
        compared += 1
        assert (c > band) == (m < -band)
    assert compared > 900


def test_product_states_have_zero_concurrence(rng):
    for _ in range(50):
        s = product(random_qubit_density(rng), random_qubit_density(rng))
        assert concurrence(s) < 1e-10
        assert min_pt_eigenvalue(s) > -1e-10


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_min_pt_eigenvalue_lower_bound(seed, rank):
    assert min_pt_eigenvalue(random_density(np.random.default_rng(seed), rank)) >= -0.5 - 1e-12


def test_batched_concurrence_matches_single(rng):
    rhos = np.array([random_density(rng).rho for _ in range(8)])

    batch = concurrence_matrix(rhos)
    assert np.allclose(batch, [concurrence(r) for r in rhos], atol=1e-14)
