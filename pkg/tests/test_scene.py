import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from wcdim.errors import (
    CoefficientOutOfRange,
    DuplicateMapName,
    FewerThanTwoMaps,
    SceneError,
    SceneSyntaxError,
)
from wcdim.ifs import AffineMap, ExpressionMap, SimilarityMap
from wcdim.scene import format_scene, load_scene, parse_scene, scene_digest

from conftest import SCENES

CANTOR = """space 1 euclidean box [0] [1]
map L similarity 0.3333333333333333 [0] alpha const 0.3333333333333333
map R similarity 0.3333333333333333 [0.6666666666666666] alpha const 0.3333333333333333
"""


def test_cantor_scene():
    cfg = parse_scene(CANTOR)
    assert cfg.system.m == 2
    assert cfg.domain.diameter_bound == 1.0
    assert [w.name for w in cfg.system.maps] == ["L", "R"]
    assert cfg.system.maps[1].map.translation == (0.6666666666666666,)


def test_one_map():
    with pytest.raises(FewerThanTwoMaps):
        parse_scene(CANTOR.rsplit("\n", 2)[0])


def test_alpha_one_rejected():
    with pytest.raises(CoefficientOutOfRange) as info:
        parse_scene(CANTOR.replace("alpha const 0.3333333333333333\nmap R", "alpha const 1.0\nmap R"))
    assert info.value.line == 2


def test_duplicate_names():
    with pytest.raises(DuplicateMapName) as info:
        parse_scene(CANTOR.replace("map R", "map L"))
    assert info.value.line == 3


@pytest.mark.parametrize(
    "text, line",
    [
        ("space 1 euclidean box [0] [1]\nmap L similarity 0.5 [0] alpha cnst 0.5\n", 2),
        ("space 1 taxicab box [0] [1]\n", 1),
        ("# comment\n\nspace 1 euclidean box [0] [1] extra\n", 3),
        ("map L similarity 0.5 [0] alpha const 0.5\nmap R similarity 0.5 [0.5] alpha const 0.5\n", 2),
        (CANTOR + "set colour red\n", 4),
        (CANTOR + "set seed 1.5\n", 4),
        (CANTOR.replace("[0.6666666666666666]", "[0.6, 0.1]"), 3),
        ("space 1 euclidean box [0] [1]\nmap L expr \"x2\" alpha const 0.5\nmap R expr \"x1\" alpha const 0.5\n", 2),
    ],
)
def test_errors_carry_line(text, line):
    with pytest.raises(SceneSyntaxError) as info:
        parse_scene(text)
    assert info.value.line == line
    assert info.value.column >= 1


def test_error_column_points_at_token():
    with pytest.raises(SceneSyntaxError) as info:
        parse_scene("space 1 euclidean box [0] [1]\nmap L similarity 0.5 [0] alpha cnst 0.5\n")
    assert info.value.column == len("map L similarity 0.5 [0] alpha ") + 1


def test_piecewise_requires_zero_first():
    base = "space 1 euclidean box [0] [2]\nmap L affine [[0.25]] [0] alpha piecewise {}\nmap R similarity 0.25 [1.5] alpha const 0.25\n"
    cfg = parse_scene(base.format("0:0.25 1:0.5"))
    f = cfg.system.maps[0].coefficient
    assert f.breakpoints == (1.0,) and f.values == (0.25, 0.5)
    with pytest.raises(SceneSyntaxError):
        parse_scene(base.format("0.5:0.25 1:0.5"))
    with pytest.raises(SceneSyntaxError):
        parse_scene(base.format("0:0.25 1:0.5 1:0.6"))
    with pytest.raises(CoefficientOutOfRange):
        parse_scene(base.format("0:0.25 1:1.5"))


def test_expression_alpha_out_of_unit():
    text = CANTOR.replace("alpha const 0.3333333333333333\nmap R", 'alpha expr "0.5 + t"\nmap R')
    with pytest.raises(CoefficientOutOfRange):
        parse_scene(text)


def test_map_kinds_and_options():
    text = """space 2 chebyshev box [0 0] [1 1] diameter 1.5
map A similarity 0.5 [0, 0] rotate 0.25 alpha const 0.5
map B affine [[0.5 0] [0 0.25]] [0.5, 0] alpha const 0.5
map C expr "x1 / 2" "x2 / 2 + 0.5" alpha expr "min(0.9, 0.5 + t / 10)"
set seed 3
set output "report.json"
"""
    cfg = parse_scene(text)
    assert cfg.domain.metric == "chebyshev" and cfg.domain.diameter_bound == 1.5
    kinds = [type(w.map) for w in cfg.system.maps]
    assert kinds == [SimilarityMap, AffineMap, ExpressionMap]
    assert cfg.system.maps[0].map.angle == 0.25
    assert cfg.options == {"seed": 3, "output": "report.json"}
    pt = np.array([0.5, 0.5])
    np.testing.assert_allclose(cfg.system.maps[2].map(pt), [0.25, 0.75])


@pytest.mark.parametrize("path", sorted(SCENES.glob("*.scene")), ids=lambda p: p.stem)
def test_shipped_scenes_round_trip(path):
    cfg = load_scene(path)
    again = parse_scene(format_scene(cfg))
    assert again == cfg
    assert format_scene(again) == format_scene(cfg)


def test_digest_is_sha256():
    assert scene_digest("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"


VALID = [p.read_text() for p in sorted(SCENES.glob("*.scene"))]
JUNK = ["[", "]", ":", ",", '"', '"x1"', "0", "-1", "1e309", "nan", "alpha", "map", "const", "#", "space", "piecewise", "expr", "x"]


@st.composite
def mutated_scene(draw):
    text = draw(st.sampled_from(VALID))
    tokens = text.replace("\n", " \n ").split(" ")
    for _ in range(draw(st.integers(1, 4))):
        op = draw(st.sampled_from(["delete", "insert", "replace", "swap"]))
        i = draw(st.integers(0, len(tokens) - 1))
        if op == "delete" and len(tokens) > 1:
            del tokens[i]
        elif op == "insert":
            tokens.insert(i, draw(st.sampled_from(JUNK + tokens)))
        elif op == "replace":
            tokens[i] = draw(st.sampled_from(JUNK + tokens))
        else:
            j = draw(st.integers(0, len(tokens) - 1))
            tokens[i], tokens[j] = tokens[j], tokens[i]
    return " ".join(tokens)


@settings(max_examples=400, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(mutated_scene())
def test_fuzzed_scenes_never_crash(text):
    try:
        cfg = parse_scene(text)
    except SceneError as exc:
        assert exc.line >= 1 and exc.column >= 1
    else:
        assert cfg.system.m >= 2
