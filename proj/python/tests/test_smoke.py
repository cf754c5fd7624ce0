import math

import numpy as np
import pytest

import gdglmm

SPEC = """[model]
family = bernoulli-logit
response = y

[terms]
id = random-intercept id
x = linear x
"""


def small_data():
    rng = np.random.default_rng(3)
    lines = ["y,x,id"]
    for g in range(12):
        b = rng.normal(0, 0.7)
        for _ in range(6):
            x = rng.normal()
            p = 1 / (1 + math.exp(-(-0.3 + 0.8 * x + b)))
            lines.append(f"{int(rng.random() < p)},{x:.5f},c{g}")
    return "\n".join(lines) + "\n"


def test_normalize_is_a_fixed_point():
    once = gdglmm.normalize_spec(SPEC)
    assert gdglmm.normalize_spec(once) == once


def test_fit_shapes_and_determinism():
    data = small_data()
    a = gdglmm.fit(SPEC, data, seed=7, chains=2, burnin=100, kept=150, thin=1)
    b = gdglmm.fit(SPEC, data, seed=7, chains=2, burnin=100, kept=150, thin=1, threads=1)
    assert a.draws.shape == (2, 150, len(a.names))
    assert "x" in a.names and "sigma2[id]" in a.names
    np.testing.assert_array_equal(a.draws, b.draws)
    assert np.all(a.pooled("sigma2[id]") > 0)
    row = a.row("x")
    assert row["q2.5"] <= row["q50"] <= row["q97.5"]


def test_simulate_returns_fit_ready_study():
    study = gdglmm.simulate("respiratory", seed=5, groups=20)
    assert study["csv"].startswith(study["csv"].split("\n")[0])
    assert len(study["curve_grid"]) == 101
    gdglmm.normalize_spec(study["spec"])


def test_errors_carry_module_and_code():
    with pytest.raises(gdglmm.GdglmmError) as info:
        gdglmm.normalize_spec("[model]\nfamily = gamma-log\n")
    assert info.value.module == "spec"
    assert info.value.code


def test_diagnostics_agree_with_numpy_reference():
    rng = np.random.default_rng(11)
    chains = rng.normal(size=(4, 500))
    n = chains.shape[1]
    w = chains.var(axis=1, ddof=1).mean()
    b_over_n = chains.mean(axis=1).var(ddof=1)
    assert gdglmm.rhat(chains) == pytest.approx(math.sqrt((n - 1) / n + b_over_n / w), rel=1e-12)
    assert 300 < gdglmm.ess(chains[0]) < 800
