from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lacunary.config import load_config, parse_config
from lacunary.errors import ConfigError
from lacunary.tables import Table, plot_projection, read_csv, write_json

CONFIGS = Path(__file__).resolve().parents[1] / "demos" / "configs"

BASIC = """
[sequence]
kind = geometric
base = 3/2

[test_function]
family = triangle
support = 1      ; in units of 1/N

[experiment]
N_ladder = 64, 128
samples_per_N = 4
seed = 9
"""


# -- config ----------------------------------------------------------------------


def test_parse_basic_config():
    cfg = parse_config(BASIC)
    exp = cfg.experiment()
    assert exp.N_ladder == (64, 128) and exp.samples_per_N == 4 and exp.seed == 9
    assert cfg.sequence().term_exact(2) == Fraction(9, 4)
    assert cfg.test_function(2).support == 1.0
    assert exp.alpha_law.kind == "uniform"


def test_overrides_win():
    exp = parse_config(BASIC).experiment(seed=5, threads=2, precision_bits=80)
    assert exp.seed == 5 and exp.threads == 2 and exp.budget.target_fraction_bits == 80


def test_unknown_key_and_section_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(BASIC + "\n[run]\nbogus = 1\n")
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(BASIC + "\n[plotting]\nx = 1\n")


@pytest.mark.parametrize("text", [
    "[sequence]\nkind = spiral\nbase = 2\n",
    "[sequence]\nkind = geometric\n",
    "[sequence]\nkind = geometric\nbase = 1/2\n",
    "[sequence]\nkind = explicit\nvalues = 1, 3, 9\n",
    "[sequence]\nkind = integer_geometric\nbase = 5/2\n",
])
def test_bad_sequences_are_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text).sequence()


def test_bad_values_are_config_errors():
    cfg = parse_config(BASIC.replace("seed = 9", "seed = nine"))
    with pytest.raises(ConfigError):
        cfg.experiment()
    with pytest.raises(ConfigError):
        parse_config("[sequence\nbase=2").sequence()
    with pytest.raises(ConfigError):
        load_config("/nonexistent/file.cfg")


def test_hash_ignores_order_and_whitespace():
    a = parse_config("[sequence]\nbase = 3/2\nkind = geometric\n[run]\nN = 10\n")
    b = parse_config("[run]\nn=10\n\n[sequence]\nkind=geometric   ; comment\nbase=3/2\n")
    assert a.hash == b.hash
    c = parse_config("[run]\nN = 11\n[sequence]\nkind = geometric\nbase = 3/2\n")
    assert a.hash != c.hash


def test_files_resolve_relative_to_config(tmp_path):
    (tmp_path / "vals.txt").write_text("1\n3\n10\n")
    (tmp_path / "c.cfg").write_text(
        "[sequence]\nkind = explicit\nvalues_file = vals.txt\ndeclared_ratio = 3\n")
    spec = load_config(tmp_path / "c.cfg").sequence()
    assert spec.term_exact(3) == 10


def test_box_bounds_and_weighted_law():
    cfg = parse_config(BASIC.replace("family = triangle", "family = box\nbounds = -0.5:1, -1:0.25\ndim = 2")
                       .replace("seed = 9", "seed = 9\nalpha_law = weighted\nalpha_margin = 1/8"))
    tf = cfg.test_function()
    assert tf.family == "box" and tf.bounds == ((-0.5, 1.0), (-1.0, 0.25))
    assert cfg.alpha_law().margin == Fraction(1, 8)


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.cfg")), ids=lambda p: p.stem)
def test_shipped_configs_parse(path):
    cfg = load_config(path)
    if "sequence" in cfg.raw:
        cfg.sequence()
    if "experiment" in cfg.raw:
        cfg.experiment()


# -- tables ------------------------------------------------------------------------


def test_csv_round_trip(tmp_path):
    t = Table(("k", "N", "alpha", "method", "value", "tail"),
              [(2, 1000, 1.2345, "direct", 0.1 + 0.2, None),
               (3, 10**30, -1e-310, "naive", math.pi, 5e300)])
    back = read_csv(t.to_csv(tmp_path / "t.csv"))
    assert back.columns == t.columns and back.rows == t.rows


cells = st.one_of(st.none(), st.integers(-10**20, 10**20),
                  st.floats(allow_nan=False, allow_infinity=False),
                  st.text(alphabet="abcxyz_=/", min_size=1, max_size=8))


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(cells, cells, cells), max_size=12))
def test_csv_round_trip_property(rows):
    t = Table(("a", "b", "c"), rows)
    back = Table.from_csv_text(t.to_csv_text())
    for r0, r1 in zip(t.rows, back.rows):
        for x, y in zip(r0, r1):
            assert x == y or (isinstance(x, float) and x == 0.0 and y == 0)


def test_row_width_checked():
    with pytest.raises(ValueError):
        Table(("a", "b"), [(1,)])


def test_plot_projection_values_come_from_table():
    t = Table(("k", "N", "variance"), [(2, 256, 0.1), (2, 512, 0.05), (3, 256, 0.4)])
    p = plot_projection(t, "N", "variance", "k")
    assert p.columns == ("x", "y", "series")
    assert set(p.column("x")) <= set(t.column("N"))
    assert set(p.column("y")) <= set(t.column("variance"))
    assert p.column("series") == ["k=2", "k=2", "k=3"]


def test_write_json_is_strict_and_sorted(tmp_path):
    path = write_json(tmp_path / "s.json", {"b": math.inf, "a": [1, float("nan")]})
    text = path.read_text()
    doc = json.loads(text)
    assert doc == {"a": [1, "nan"], "b": "inf"}
    assert text.index('"a"') < text.index('"b"')
