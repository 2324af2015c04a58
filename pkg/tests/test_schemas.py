import json

import numpy as np
import pytest

from app.core.bodies import Ellipsoid, LagrangianBidisk, LinearImage, ToricBody, Union
from app.exceptions import SpecError
from app.models.hamiltonians import CartesianPolynomial, HopfTrigPolynomial
from app.schemas import RunConfig, load_json_argument, parse_body, parse_hamiltonian


def test_parse_ellipsoid():
    body = parse_body('{"type": "ellipsoid", "a": [1, 2], "b": [3, 4]}')
    assert isinstance(body, Ellipsoid)
    np.testing.assert_array_equal(body.axes, [1.0, 2.0, 3.0, 4.0])


def test_parse_nested_bodies():
    body = parse_body(
        {
            "type": "union",
            "members": [
                {"type": "lagrangian-bidisk"},
                {"type": "linear-image", "matrix": np.eye(4).tolist(), "inner": {"type": "polydisk", "r": [1, 1]}},
            ],
        }
    )
    assert isinstance(body, Union)
    assert isinstance(body.members[0], LagrangianBidisk)
    assert isinstance(body.members[1], LinearImage)


def test_parse_toric_profile_from_boxes_and_curves():
    boxes = parse_body({"type": "toric-profile", "boxes": [{"a": [0, 0], "b": [1, 2]}]})
    curve = parse_body({"type": "toric-profile", "curve": [[0, 2], [1, 1], [2, 0]], "outer": True})
    assert isinstance(boxes, ToricBody) and isinstance(curve, ToricBody)
    assert curve.outer


@pytest.mark.parametrize(
    "data, path",
    [
        ({"type": "union", "members": [{"type": "ball", "n": 2}, {"type": "ellipsoid", "b": [1, 1]}]}, "body.members.1.a"),
        ({"type": "ellipsoid", "a": [1, -2], "b": [1, 1]}, "body"),
        ({"type": "ball", "n": 0}, "body.n"),
        ({"type": "cube"}, "body"),
        ({"type": "toric-profile"}, "body"),
    ],
    ids=["missing-field", "negative-axis", "bad-dimension", "unknown-type", "no-representation"],
)
def test_body_errors_name_the_field(data, path):
    with pytest.raises(SpecError) as excinfo:
        parse_body(data)
    assert str(excinfo.value).startswith(path)


def test_invalid_json_is_a_spec_error():
    with pytest.raises(SpecError, match="invalid JSON"):
        load_json_argument('{"type": ', "body")


def test_body_from_a_file(tmp_path):
    path = tmp_path / "body.json"
    path.write_text(json.dumps({"type": "polydisk", "r": [1, 2]}), encoding="utf-8")
    assert parse_body(str(path)).dim_n == 2
    with pytest.raises(SpecError, match="cannot read"):
        parse_body(str(tmp_path / "missing.json"))


def test_parse_hamiltonians():
    assert parse_hamiltonian({"preset": "x1y1"}, 2).dim_n == 2
    trig = parse_hamiltonian({"hopf-trig": {"terms": [{"ctheta": [1, 0], "cr": [1]}]}}, 2)
    assert isinstance(trig, HopfTrigPolynomial)
    poly = parse_hamiltonian({"cartesian-poly": {"monomials": [{"exponents": [1, 0, 0, 1], "coeff": 2}]}}, 2)
    assert isinstance(poly, CartesianPolynomial)


def test_hamiltonian_errors():
    with pytest.raises(SpecError, match="ham"):
        parse_hamiltonian({"preset": "pendulum"}, 1)
    with pytest.raises(SpecError, match="exponents must have 4 entries"):
        parse_hamiltonian({"cartesian-poly": {"monomials": [{"exponents": [1, 1]}]}}, 2)


def test_run_config_round_trip():
    config = RunConfig.build(command="mean-width", body={"type": "ball", "n": 2}, radial=16, angular=32)
    again = RunConfig.model_validate(config.model_dump(mode="json"))
    assert again == config


@pytest.mark.parametrize(
    "values",
    [
        {"command": "mean-width"},
        {"command": "variation", "body": {"type": "ball", "n": 1}},
        {"command": "integrate"},
        {"command": "staircase", "threads": 0},
    ],
    ids=["no-body", "no-ham", "unknown-command", "no-threads"],
)
def test_run_config_rejects_bad_values(values):
    with pytest.raises(SpecError, match="config"):
        RunConfig.build(**values)
