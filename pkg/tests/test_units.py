import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from acoustic_lens.errors import DomainError
from acoustic_lens.units import (
    HBAR,
    DerivedScales,
    PhysicalParams,
    derive_scales,
    load_physical_params,
    to_dimensionless,
    to_physical,
)

# frozen from c = (hbar/m) sqrt(g_tilde n), xi = hbar/(m c) at 40 digits (mpmath)
XI_1E13 = 1.19522860933439364e-05
XI_1E12 = 3.7796447300922722721e-05
C_1E13 = 1316892.6632735944225


def test_paper_condensate_n1e13():
    s = derive_scales(PhysicalParams(6.7e-36, 7e-4, 1e13))
    assert s.healing_length == pytest.approx(XI_1E13, rel=1e-12)
    assert s.sound_speed == pytest.approx(C_1E13, rel=1e-12)
    assert s.healing_length == pytest.approx(1.195e-5, rel=1e-3)


def test_paper_condensate_n1e12():
    s = derive_scales(PhysicalParams(6.7e-36, 7e-4, 1e12))
    assert s.healing_length == pytest.approx(XI_1E12, rel=1e-12)
    assert s.healing_length == pytest.approx(3.78e-5, rel=1e-3)


def test_defaults_are_paper_values():
    p = PhysicalParams()
    assert (p.photon_mass, p.interaction_dimensionless, p.density, p.hbar) == (6.7e-36, 7e-4, 1e13, HBAR)


def test_invariant_formulas():
    p = PhysicalParams(1e-35, 3e-3, 4e12)
    s = derive_scales(p)
    assert s.sound_speed == pytest.approx(math.sqrt(s.interaction_si * p.density / p.photon_mass), rel=1e-12)
    assert s.healing_length == pytest.approx(p.hbar / (p.photon_mass * s.sound_speed), rel=1e-12)
    assert s.interaction_si == pytest.approx(p.interaction_dimensionless * p.hbar**2 / p.photon_mass, rel=1e-15)


def test_density_times_100_shrinks_xi_tenfold():
    a = derive_scales(PhysicalParams(density=1e11))
    b = derive_scales(PhysicalParams(density=1e13))
    assert b.healing_length == pytest.approx(a.healing_length / 10, rel=1e-12)


@pytest.mark.parametrize("field", ["photon_mass", "interaction_dimensionless", "density"])
@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
def test_nonpositive_field_is_named(field, bad):
    with pytest.raises(DomainError, match=field):
        PhysicalParams(**{field: bad})


def test_conversion_examples():
    s = derive_scales(PhysicalParams())
    assert to_dimensionless(s.healing_length, s) == 1.0
    assert to_dimensionless(0.0, s) == 0.0
    s2 = DerivedScales(sound_speed=1.0, healing_length=1.195e-5, interaction_si=1.0)
    assert to_dimensionless(2.03e-5, s2) == pytest.approx(1.698, abs=1e-3)


def test_invalid_scales_rejected():
    with pytest.raises(DomainError):
        to_physical(1.0, DerivedScales(1.0, 0.0, 1.0))


@given(st.floats(min_value=1e-12, max_value=1e3), st.floats(min_value=1e10, max_value=1e16))
def test_round_trip(length, density):
    s = derive_scales(PhysicalParams(density=density))
    assert to_physical(to_dimensionless(length, s), s) == pytest.approx(length, rel=1e-12)


@given(st.floats(min_value=1e8, max_value=1e16), st.floats(min_value=1.0001, max_value=100.0))
def test_monotone_in_density(n, factor):
    lo = derive_scales(PhysicalParams(density=n))
    hi = derive_scales(PhysicalParams(density=n * factor))
    assert hi.healing_length < lo.healing_length
    assert hi.sound_speed > lo.sound_speed


def test_parameter_document(tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"photon_mass_kg": 6.7e-36, "g_tilde": 7e-4, "density_per_m2": 1e12}))
    p = load_physical_params(path)
    assert p.density == 1e12
    path.write_text(json.dumps({"density_per_m2": 1e12}))
    assert load_physical_params(path).photon_mass == 6.7e-36


@pytest.mark.parametrize(
    "doc, key",
    [({"g_tilde": -1}, "g_tilde"), ({"density_per_m2": "lots"}, "density_per_m2"), ({"mass": 1.0}, "mass")],
)
def test_parameter_document_errors(doc, key):
    with pytest.raises(DomainError, match=key):
        PhysicalParams.from_mapping(doc)
