import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pmefront.config import ConfigError, parse_config
from pmefront.front import GraphFrontState, RadialFrontState, run_front
from pmefront.harness import ConvergenceReport, ConvergenceRow
from pmefront.levelset import InterfaceCurve, extract_level_set
from pmefront.output import emit_csv, fmt, read_csv, read_field, write_field
from pmefront.pde import Field, Grid
from pmefront.profile import compute_profile, constants_by_profile, constants_by_quadrature
from pmefront.reaction import ReactionSpec, validate_bistable


def test_minimal_reaction_section():
    cfg = parse_config("[reaction]\nm = 1\nalpha0 = 1\nalpha1 = 1\na = auto\n")
    assert cfg.reaction.a == 0.5
    assert cfg.reaction == ReactionSpec.balanced()


def test_auto_is_default_and_explicit_a_is_kept():
    assert parse_config("[reaction]\nm = 2\n").reaction.a == pytest.approx(0.6)
    cfg = parse_config("[reaction]\nalpha0=1\nalpha1=1\nm=1\na=0.9\n")
    assert cfg.reaction.a == 0.9
    assert not validate_bistable(cfg.reaction).check("balance").passed


def test_comments_blank_lines_and_lists():
    cfg = parse_config("""
# run
[grid]
geometry = rectangle   ; inline comment
extents = 0:1, -0.5:0.5
cells = 10, 12
[solver]
epsilon = 0.04
snapshots = 0.1, 0.2
[experiment]
scenario = flat_front_1d
epsilons = 0.1, 0.05, 0.025
divide_by_D = no
""")
    assert cfg.grid.extents == ((0.0, 1.0), (-0.5, 0.5))
    assert cfg.grid.cells == (10, 12)
    assert cfg.solver.snapshots == (0.1, 0.2)
    assert cfg.experiment["epsilons"] == (0.1, 0.05, 0.025)
    assert cfg.experiment["divide_by_D"] is False


@pytest.mark.parametrize("text,line,key", [
    ("[reaction]\nfoo = 1\n", 2, "foo"),
    ("[nonsense]\n", 1, None),
    ("m = 1\n", 1, "m"),
    ("[reaction]\nm 1\n", 2, None),
    ("[reaction]\nm = one\n", 2, "m"),
    ("[reaction]\nm = 1\nm = 2\n", 3, "m"),
    ("[solver]\n\nepsilon = -0.1\n", 3, "epsilon"),
    ("[solver]\nepsilon = 0\n", 2, "epsilon"),
    ("[reaction]\nm = 0.5\n", 2, "m"),
    ("[reaction]\na = 1.5\n", 2, "a"),
    ("[grid]\ngeometry = sphere\n", 2, "geometry"),
    ("[experiment]\nepsilons = 0.02, 0.04\n", 2, "epsilons"),
])
def test_errors_are_located(text, line, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert info.value.key == key
    assert f"line {line}" in str(info.value)


def test_missing_required_key_is_named():
    cfg = parse_config("[solver]\nt_end = 1\n")
    with pytest.raises(ConfigError, match="epsilon"):
        cfg.require("solver", "epsilon")


KEYS = st.from_regex(r"[a-z_]{1,12}", fullmatch=True)


@given(KEYS)
def test_unknown_keys_always_rejected(key):
    from pmefront.config import SCHEMA
    if key in SCHEMA["front"]:
        return
    with pytest.raises(ConfigError):
        parse_config(f"[front]\n{key} = 1\n")


@given(st.floats(0.001, 10.0), st.floats(0.0, 1.0), st.integers(2, 5))
def test_values_round_trip_through_text(eps, safety, N):
    if safety == 0.0:
        return
    cfg = parse_config(f"[solver]\nepsilon = {eps!r}\ncfl_safety = {safety!r}\n[grid]\nN = {N}\n")
    assert cfg.solver.epsilon == eps and cfg.solver.cfl_safety == safety and cfg.grid.N == N


# --- emission -------------------------------------------------------------------

@given(st.floats(allow_nan=False, allow_infinity=True))
def test_seventeen_digits_round_trip(x):
    assert float(fmt(x)) == x


def test_empty_interface_is_header_only(tmp_path):
    path = tmp_path / "iface.csv"
    emit_csv(InterfaceCurve("radial", np.array([]), 0.1), path)
    assert path.read_text().strip() == "time,position"
    emit_csv(InterfaceCurve("rectangle", [], 0.1), path)
    assert path.read_text().strip() == "time,polyline,x,y"


def test_radial_states_round_trip(tmp_path):
    states = run_front(RadialFrontState(1.0, 2, 10 / 9), None, 0.3, [0.0, 0.1 / 3, 0.2, 0.3])
    path = tmp_path / "front.csv"
    emit_csv(states, path)
    header, rows = read_csv(path)
    assert header == ["t", "R"]
    assert rows == [[s.t, s.R] for s in states]


def test_graph_states_round_trip(tmp_path):
    states = run_front(GraphFrontState(0.1 * np.sin(np.linspace(0, 3, 17))), None, 0.01, [0.005, 0.01])
    path = tmp_path / "graph.csv"
    emit_csv(states, path)
    _, rows = read_csv(path)
    expected = [[s.t, x, w] for s in states for x, w in zip(s.x, s.w)]
    assert rows == expected


def test_rectangle_interface_round_trip(tmp_path):
    grid = Grid.rectangle((-1, 1), (-1, 1), (30, 30))
    X, Y = grid.mesh()
    curve = extract_level_set(Field(0.5 - np.hypot(X, Y), 0.25), grid, 0.0)
    path = tmp_path / "c.csv"
    emit_csv(curve, path)
    _, rows = read_csv(path)
    pts = np.array([r[2:] for r in rows])
    np.testing.assert_array_equal(pts, np.vstack(curve.points))
    assert all(r[0] == 0.25 for r in rows)


def test_convergence_report_one_row_per_case(tmp_path):
    report = ConvergenceReport("radial_shrink", rows=[
        ConvergenceRow("radial_shrink", e, t, e * t, e / 10, 0.1, "pass")
        for e in (0.08, 0.04, 0.02) for t in (0.05, 0.15)])
    path = tmp_path / "conv.csv"
    emit_csv(report, path)
    header, rows = read_csv(path)
    assert header[:3] == ["scenario", "epsilon", "time"]
    assert len(rows) == 6
    assert {(r[1], r[2]) for r in rows} == {(e, t) for e in (0.08, 0.04, 0.02) for t in (0.05, 0.15)}
    assert all(r[3] == r[1] * r[2] for r in rows)


def test_constants_and_profile_csv(tmp_path):
    spec = ReactionSpec.balanced(2.0, 1.0, 1.0)
    table = compute_profile(spec, n=64)
    emit_csv((constants_by_quadrature(spec), constants_by_profile(table)), tmp_path / "c.csv")
    header, rows = read_csv(tmp_path / "c.csv")
    assert [r[0] for r in rows] == ["A", "B", "C", "D"]
    assert rows[0][1] == constants_by_quadrature(spec).A
    emit_csv(table, tmp_path / "p.csv")
    _, rows = read_csv(tmp_path / "p.csv")
    np.testing.assert_array_equal(np.array(rows), np.column_stack([table.u_grid, table.y_of_u]))


@pytest.mark.parametrize("grid", [Grid.line(-1, 1, 7), Grid.radial(2.0, 9, 3),
                                  Grid.rectangle((0, 1), (-2, 3), (4, 6))])
def test_field_dump_round_trip(tmp_path, grid):
    rng = np.random.default_rng(1)
    field = Field(rng.random(grid.shape) / 3, time=1 / 7)
    path = tmp_path / "f.txt"
    write_field(field, grid, path)
    head = path.read_text().splitlines()[:6]
    assert head[0] == f"geometry {grid.geometry}" and head[-1] == "values"
    back, g2 = read_field(path)
    assert g2 == grid and back.time == field.time
    np.testing.assert_array_equal(back.values, field.values)
    assert math.prod(grid.shape) == len(path.read_text().splitlines()) - 6
