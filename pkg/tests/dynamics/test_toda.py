import numpy as np
import pytest

from fpulyap.dynamics.integrator import IntegratorConfig, Propagator, integrate
from fpulyap.dynamics.potentials import total_energy
from fpulyap.dynamics.toda import energy_from_second_invariant, lax_matrix, toda_invariants
from fpulyap.models.chain import ChainState
from fpulyap.models.presets import make_preset
from fpulyap.utils.errors import ModelError
from tests.fixtures.chains import random_state


def test_rest_state_spectrum():
    m = make_preset("toda", 8, boundary="periodic")
    L = lax_matrix(m, ChainState.rest(m))
    assert L[0, 1] == pytest.approx(0.5) and L[0, 7] == pytest.approx(0.5)
    # eigenvalues cos(2 pi k / 8)
    np.testing.assert_allclose(toda_invariants(m, ChainState.rest(m)), [0.0, 4.0, 0.0, 3.0], atol=1e-12)


def test_second_invariant_is_affine_in_energy():
    for n in (3, 5, 16):
        m = make_preset("toda", n, boundary="periodic")
        s = random_state(m, 0.4, seed=n)
        tr2 = toda_invariants(m, s)[1]
        H = total_energy(m, s)
        assert tr2 == pytest.approx(2 * H + 2 * n / m.toda_c**2, rel=1e-12)
        assert energy_from_second_invariant(m, tr2) == pytest.approx(H, rel=1e-10)


def test_invariants_survive_integration():
    m = make_preset("toda", 8, boundary="periodic")
    s = random_state(m, 0.05, seed=1)
    before = toda_invariants(m, s, k_max=5)
    res = integrate(m, s, None, IntegratorConfig(dt=0.05, with_tangent=False), t_end=20.0)
    after = toda_invariants(m, res.state, k_max=5)
    np.testing.assert_allclose(after, before, atol=1e-4)


def _max_invariant_drift(model, state, dt, t_end):
    before = toda_invariants(model, state)
    prop = Propagator(model, state, None, IntegratorConfig(dt=dt, with_tangent=False))
    per_unit = round(1.0 / dt)
    worst = np.zeros_like(before)
    for _ in range(int(t_end)):
        prop.advance(per_unit)
        worst = np.maximum(worst, np.abs(toda_invariants(model, prop.state()) - before))
    return worst


def test_invariant_drift_is_fourth_order_in_dt():
    m = make_preset("toda", 8, boundary="periodic")
    s = random_state(m, 0.3, seed=2)
    coarse = _max_invariant_drift(m, s, 0.1, 50.0)
    fine = _max_invariant_drift(m, s, 0.05, 50.0)
    # tr L^2 .. tr L^4; tr L is total momentum and conserved to rounding
    ratios = coarse[1:] / fine[1:]
    assert np.all((ratios >= 10.0) & (ratios <= 24.0)), ratios


def test_lax_matrix_requires_periodic_toda():
    with pytest.raises(ModelError):
        lax_matrix(make_preset("toda", 8), ChainState.rest(make_preset("toda", 8)))
    ring = make_preset("pure-beta", 8, boundary="periodic")
    with pytest.raises(ModelError):
        lax_matrix(ring, ChainState.rest(ring))
    toda = make_preset("toda", 8, boundary="periodic")
    with pytest.raises(ValueError):
        toda_invariants(toda, ChainState.rest(toda), k_max=2)
