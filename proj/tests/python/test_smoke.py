import math

import pytest

import hubnet


def test_exponential_root_is_rho():
    d = hubnet.Distribution.exponential(1.0)
    r = hubnet.satellite_root(d, 0.5, 0.8, 1.0)
    assert r["converged"]
    assert abs(r["root"] - 0.4) < 1e-9


def test_cubic_case():
    r = hubnet.satellite_root(hubnet.Distribution.erlang(2, 2.0), 1.0, 1.0, 2.0)
    assert abs(r["root"] - (3 - math.sqrt(5)) / 2) < 1e-9


def test_wald_variants_split_at_one_third():
    g = hubnet.Distribution.gamma(0.5, 0.5)
    assert hubnet.wald_moments(g, 1 / 3, 1.0, "corrected")[1] == pytest.approx(21.0)
    assert hubnet.wald_moments(g, 1 / 3, 1.0, "legacy")[1] == pytest.approx(19.5)


def test_envelope_contains_root():
    d = hubnet.Distribution.hyperexp2(0.4, 0.5, 2.0)
    eps = hubnet.closeness_report(d)["epsilon_hat"]
    env = hubnet.theorem_envelope(d, 0.3, 1.2, 0.7, eps)
    root = hubnet.satellite_root(d, 0.3, 0.7, 1.2)["root"]
    assert env["lower"] - 1e-9 <= root <= env["upper"] + 1e-9


def test_fluid_and_law():
    assert hubnet.hub_fluid(1.0, 1.0, 0.5, 0.0) == 1.0
    probs = hubnet.queue_length_law(0.3, 0.3)
    assert sum(probs) == pytest.approx(1.0, abs=1e-11)


def test_simulate_is_deterministic():
    d = hubnet.Distribution.exponential(1.0)
    a = hubnet.simulate(200, d, [1.0], [0.5], [0.5, 1.0], replications=4, seed=3, workers=1)
    b = hubnet.simulate(200, d, [1.0], [0.5], [0.5, 1.0], replications=4, seed=3, workers=2)
    assert a == b
    assert 0.0 < a["q_bar"][1] <= 1.0


def test_bad_argument_raises():
    with pytest.raises(ValueError):
        hubnet.Distribution.exponential(-1.0)
