import json
import math

import numpy as np
import pytest

from qcburk.errors import ClassError, DomainError, InvalidSpec
from qcburk.packing import (
    Domain,
    PackingNode,
    build_packing,
    fill_power_packing,
    load_packing,
    random_packing,
)
from qcburk.radial import RadialProfile
from qcburk.inequalities import integrands

SPEC = {
    "domain": {"kind": "disk", "center": [0, 0], "radius": 1.0},
    "nodes": [
        {"center": [0.0, 0.0], "R": 0.8, "r": 0.5, "kind": "blend", "a": 0.5, "m": 2.0,
         "children": [{"center": [0.1, 0.0], "R": 0.3, "kind": "power", "K": 2.0}]},
    ],
}


def test_build_from_dict_and_identity_outside():
    pk = build_packing(SPEC)
    z = np.array([0.95 + 0j, -0.9j])
    assert np.allclose(pk(z), z)
    assert pk.tags["identity_boundary"] and pk.tags["expanding"]


def test_file_round_trip(tmp_path):
    f = tmp_path / "pk.json"
    f.write_text(json.dumps(SPEC))
    pk = load_packing(f)
    again = build_packing(pk.to_dict())
    z = np.array([0.3 + 0.1j, 0.05 - 0.02j, 0.7j])
    assert np.allclose(pk(z), again(z))


def test_energy_closed_form_equals_area():
    pk = build_packing(SPEC)
    assert pk.energy_closed_form(2.5) == pytest.approx(math.pi, rel=1e-9)


def test_class_membership():
    pk = build_packing(SPEC, target="Ap", p=3.0)
    assert pk.in_class_Ap(3.0)
    with pytest.raises(ClassError):
        build_packing(SPEC, target="compressing")


@pytest.mark.parametrize("bad", [
    {"nodes": [{"center": [0, 0], "R": 0.5, "kind": "power", "K": 2}, {"center": [0.6, 0], "R": 0.5,
                                                                       "kind": "power", "K": 2}]},
    {"nodes": [{"center": [0.8, 0], "R": 0.5, "kind": "power", "K": 2}]},
    {"nodes": [{"center": [0, 0], "R": 0.5, "kind": "power", "K": 2,
                "children": [{"center": [0, 0], "R": 0.1, "kind": "power", "K": 2}]}]},
    {"nodes": [{"center": [0, 0], "R": 0.5, "kind": "nope"}]},
])
def test_invalid_specs(bad):
    with pytest.raises(InvalidSpec):
        build_packing(bad)


def test_singular_center_rejected():
    pk = build_packing(SPEC)
    with pytest.raises(DomainError):
        pk.deriv(np.array([0.1 + 0j]))


def test_grid_energy_random_packing():
    pk = random_packing(np.random.default_rng(5))
    gi = pk.grid_integrate({"B": integrands.burkholder(3.0)}, 512)
    assert gi["B"] == pytest.approx(pk.domain.area, rel=2e-3)


def test_grid_area_is_exact_for_domain_weights():
    pk = random_packing(np.random.default_rng(1))
    gi = pk.grid_integrate({"J": integrands.jacobian}, 256)
    assert gi["J"] == pytest.approx(pk.domain.area, rel=2e-3)


def test_fill_reports_uncovered_fraction():
    pk = fill_power_packing(Domain.disk(), 2.0, eps=0.2, max_disks=40, resolution=256)
    eps = pk.uncovered_fraction()
    assert 0 <= eps <= 0.6
    assert pk.in_class_ApK(3.0, 2.0)


def test_tuple_spec():
    node = PackingNode(0j, RadialProfile.power(3.0, R=0.5), [])
    pk = build_packing((Domain.rect(), [node]))
    assert pk.K == pytest.approx(3.0)
