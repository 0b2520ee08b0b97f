import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from esd_adapt import channels as ch
from esd_adapt.adaptation import loss_pipeline_state
from esd_adapt.entanglement import min_pt_eigenvalue
from esd_adapt.errors import DomainError, InvalidChannel
from esd_adapt.linalg import I2, eigvals_hermitian, kron
from esd_adapt.states import BellKind, bell, product, random_density, random_unitary, werner

KET0 = [1, 0]
KET1 = [0, 1]


def test_validate_examples():
    assert ch.validate(ch.depolarizing(0.7)).ok
    assert ch.validate(ch.amplitude_damping(0.3)).ok
    rep = ch.validate(ch.KrausChannel((I2, I2)))
    assert not rep.ok
    assert rep.deviation == pytest.approx(1.0)


def test_apply_identity_channel(rng):
    s = random_density(rng)
    assert ch.apply(ch.identity(), s, "A").allclose(s, 1e-15)


def test_apply_rejects_invalid_channel():
    with pytest.raises(InvalidChannel):
        ch.apply(ch.KrausChannel((I2, I2)), bell("PsiMinus"), "B")


def test_damping_full_strength_on_singlet():
    out = ch.apply(ch.amplitude_damping(1.0), bell("PsiMinus"), "B")
    # the two Kraus terms evaluated by hand: diag(1,0) keeps |x0>, |0><1| moves |x1> -> |x0>
    expected = kron(I2 / 2, np.diag([1.0, 0.0]))
    assert np.allclose(out.rho, expected, atol=1e-15)


def test_depolarizing_edges(rng):
    ops = ch.depolarizing(1.0).kraus
    assert np.allclose(ops[0], I2) and all(np.allclose(k, 0) for k in ops[1:])
    full = ch.depolarizing(0.0)
    for _ in range(3):
        psi = random_unitary(rng)[:, 0]
        rho = np.outer(psi, psi.conj())
        assert np.max(np.abs(ch.apply_single(full, rho) - I2 / 2)) < 1e-12
    assert ch.validate(ch.depolarizing(0.5)).ok


def test_damping_edges(rng):
    s = random_density(rng)
    assert ch.apply(ch.amplitude_damping(0.0), s, "B").allclose(s, 1e-15)
    out = ch.apply(ch.amplitude_damping(1.0), s, "B")
    assert np.allclose(out.marginal("B"), np.diag([1.0, 0.0]), atol=1e-14)


@pytest.mark.parametrize("gamma", np.round(np.arange(1, 10) * 0.1, 1))
def test_damping_both_qubits_keeps_singlet_entangled(gamma):
    d = ch.amplitude_damping(gamma)
    out = ch.apply(d, ch.apply(d, bell("PsiMinus"), "A"), "B")
    assert min_pt_eigenvalue(out) < 0


@pytest.mark.parametrize("bad", [-0.01, 1.01])
def test_constructors_reject_out_of_range(bad):
    for make in (ch.depolarizing, ch.amplitude_damping, lambda x: ch.replace_channel(x, KET0)):
        with pytest.raises(DomainError):
            make(bad)


def test_replace_channel_examples(rng):
    s = random_density(rng)
    assert ch.apply(ch.replace_channel(1.0, [0.6, 0.8j]), s, "B").allclose(s, 1e-14)
    out = ch.apply(ch.replace_channel(0.0, KET0), s, "B")
    assert np.allclose(out.marginal("B"), np.diag([1.0, 0.0]), atol=1e-14)
    with pytest.raises(DomainError):
        ch.replace_channel(0.5, [1, 1])


def test_replace_channel_action(rng):
    s = random_unitary(rng)[:, 0]
    rho = np.array([[0.3, 0.1 - 0.2j], [0.1 + 0.2j, 0.7]])
    out = ch.apply_single(ch.replace_channel(0.4, s), rho)
    assert np.allclose(out, 0.4 * rho + 0.6 * np.outer(s, s.conj()), atol=1e-14)


def test_two_replacements_reproduce_loss_mixture():
    s = bell("PsiMinus")
    out = ch.apply(ch.replace_channel(0.9, KET1), ch.apply(ch.replace_channel(0.9, KET0), s, "B"), "B")
    assert np.max(np.abs(out.rho - loss_pipeline_state(0.9, 0.9).rho)) < 1e-12
    composed = ch.compose(ch.replace_channel(0.9, KET0), ch.replace_channel(0.9, KET1))
    assert np.max(np.abs(ch.apply(composed, s, "B").rho - loss_pipeline_state(0.9, 0.9).rho)) < 1e-12


def test_compose_with_identity(rng):
    target = ch.depolarizing(0.4)
    both = ch.compose(ch.identity(), target)
    for _ in range(5):
        s = random_density(rng)
        assert np.max(np.abs(ch.apply(both, s, "A").rho - ch.apply(target, s, "A").rho)) < 1e-12


@pytest.mark.parametrize("p,q", [(0.3, 0.8), (0.9, 0.9), (0.5, 0.1)])
def test_compose_depolarizing_multiplies_parameters(p, q):
    out = ch.apply(ch.compose(ch.depolarizing(p), ch.depolarizing(q)), bell("PsiMinus"), "B")
    # fit the Werner parameter from the singlet fidelity F = p + (1-p)/4
    fid = bell("PsiMinus").rho.ravel().conj() @ out.rho.ravel()
    fitted = (4 * fid.real - 1) / 3
    assert fitted == pytest.approx(p * q, abs=1e-12)
    assert out.allclose(werner("PsiMinus", p * q), 1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 4))
def test_compose_is_sequential_application(seed, na, nb):
    rng = np.random.default_rng(seed)
    a, b = ch.random_channel(rng, na), ch.random_channel(rng, nb)
    c = ch.compose(a, b)
    assert len(c) == na * nb
    assert ch.validate(c).ok
    s = random_density(rng)
    seq = ch.apply(b, ch.apply(a, s, "B"), "B")
    assert np.max(np.abs(ch.apply(c, s, "B").rho - seq.rho)) < 1e-12


def test_apply_preserves_state_invariants(rng):
    for i in range(1000):
        chan = ch.random_channel(rng, 1 + i % 4)
        s = random_density(rng, rank=1 + i % 4)
        out = ch.apply_matrix(chan, s.rho, "A" if i % 2 else "B")
        assert abs(np.trace(out).real - 1) < 1e-10
        assert np.max(np.abs(out - out.conj().T)) < 1e-10
        assert eigvals_hermitian(out)[-1] >= -1e-9


def test_unitality():
    mixed = I2 / 2
    for p in np.linspace(0, 1, 5):
        assert np.max(np.abs(ch.apply_single(ch.depolarizing(p), mixed) - mixed)) < 1e-14
    for g in (0.1, 0.5, 1.0):
        assert np.max(np.abs(ch.apply_single(ch.amplitude_damping(g), mixed) - mixed)) > 0.01


def test_prune_drops_vanishing_elements():
    c = ch.compose(ch.depolarizing(1.0), ch.amplitude_damping(0.3))
    assert len(c) == 8
    assert len(ch.prune(c)) == 2
    assert ch.validate(ch.prune(c)).ok


def test_json_round_trip(rng):
    c = ch.random_channel(rng, 3)
    back = ch.KrausChannel.from_json(c.to_json())
    assert back.label == c.label
    for a, b in zip(c.kraus, back.kraus):
        assert np.array_equal(a, b)
    data = json.loads(c.to_json())
    assert set(data) == {"label", "kraus"}
    assert all(len(k) == 4 and all(len(z) == 2 for z in k) for k in data["kraus"])


def test_channel_from_family_descriptor():
    c = ch.channel_from_dict({"family": "replace", "p": 0.5, "state": [[0, 0], [1, 0]]})
    assert np.allclose(ch.apply_single(c, np.diag([1.0, 0])), np.diag([0.5, 0.5]))
    with pytest.raises(DomainError):
        ch.channel_from_dict({"family": "bogus"})


def test_product_state_stays_product_under_local_channel(rng):
    s = product(np.diag([0.2, 0.8]), np.diag([0.6, 0.4]))
    out = ch.apply(ch.amplitude_damping(0.4), s, "A")
    assert np.allclose(out.rho, kron(out.marginal("A"), out.marginal("B")))
