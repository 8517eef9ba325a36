import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from srlab.classes import (ClassSpec, class_budget, class_membership_check, sample_class, thm83_witness_class,
                           wab_levels)
from srlab.dictionaries import GegenbauerParams, build_frequency_set, gegenbauer_dictionary, trig_centered, \
    trig_dictionary
from srlab.errors import ParameterError


def test_sampler_examples():
    d = trig_centered(6)
    c = sample_class(ClassSpec("A1r", support_size=1), d, np.random.default_rng(0))
    assert np.count_nonzero(c) == 1
    j = np.flatnonzero(c)[0]
    if j == 0:
        assert abs(abs(c[0]) - 1) < 1e-15
    g = gegenbauer_dictionary(GegenbauerParams(0.0, 5))
    c = sample_class(ClassSpec("GegWiener", r=1.0, support_size=1), g, np.random.default_rng(1))
    # a single degree j with budget ((1+j)|c_j|)^theta = 1
    j = np.flatnonzero(c)[0]
    assert abs((1 + j) * abs(c[j]) - 1) < 1e-15


def test_wab_levels_mass():
    d = trig_dictionary(build_frequency_set("step_hyperbolic_cross", 1, n=4))
    spec = ClassSpec("WabA", a=1.0, b=0.0)
    c = sample_class(spec, d, np.random.default_rng(2))
    lev = wab_levels(d)
    for j in range(5):
        assert abs(np.sum(np.abs(c[lev == j])) - 2.0 ** -j) < 1e-14


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["A1r", "GegWiener", "WabA"]), st.floats(0.6, 2.0))
def test_samples_are_saturated_members(seed, kind, r):
    rng = np.random.default_rng(seed)
    if kind == "WabA":
        d = trig_dictionary(build_frequency_set("step_hyperbolic_cross", 2, n=3))
        spec = ClassSpec(kind, a=r, b=0.5, d=2)
    elif kind == "GegWiener":
        d = gegenbauer_dictionary(GegenbauerParams(0.0, 20))
        spec = ClassSpec(kind, r=r, theta=0.7)
    else:
        d = trig_centered(20)
        spec = ClassSpec(kind, r=r)
    c = sample_class(spec, d, rng)
    m = class_membership_check(c, spec, d)
    assert m.member and abs(m.budget - 1) < 1e-12
    assert not class_membership_check(2 * c, spec, d).member
    assert class_membership_check(np.zeros_like(c), spec, d).budget == 0


def test_budget_values():
    spec = ClassSpec("A1r", r=1.0)
    assert class_budget([0.5, 0.25], spec)[0] == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        ClassSpec("GegWiener", r=0.4)
    with pytest.raises(ParameterError):
        ClassSpec("GegWiener", r=1.0, theta=1.5)


def test_witness_class():
    W = thm83_witness_class(0.0, 1.0, 1.0, 1, 3)
    assert W.m1 == 4 and W.degrees == (16, 32) and not W.complete
    assert W.total_vertices == 2 ** 16 and len(W.vertices) == 4096
    spec = ClassSpec("GegWiener", r=1.0)
    for row in W.vertices[:64]:
        assert class_membership_check(row, spec).member
    ones = W.vertices[0]
    assert abs(np.linalg.norm(ones) - 2.0 ** (-(4 + 1) * 2) * 2 ** 2) < 1e-15
    small = thm83_witness_class(0.0, 1.0, 1.0, 1, 1)
    assert small.complete and len(small.vertices) == 2 ** 4


@given(st.integers(1, 3), st.floats(0.6, 2.0), st.floats(0.3, 1.0))
def test_witness_members(m_level, r, theta):
    W = thm83_witness_class(0.0, r, theta, m_level, 2, max_vertices=32)
    spec = ClassSpec("GegWiener", r=r, theta=theta)
    assert all(class_membership_check(v, spec).member for v in W.vertices)
    assert math.isclose(W.scale, 2.0 ** (-(W.m1 + 1) * (r + 1 / theta)))
