import re

import numpy as np

from stickydisks.generators import fig5b, hexagonal_patch
from stickydisks.jamming import tensegrity_flex_lp
from stickydisks.packing import contact_graph
from stickydisks.plotting import SIGN_COLORS, render_packing, save_svg, singular_value_figure, trajectory_figure
from stickydisks.rigidity import bar_stresses


def gids(svg, prefix):
    return set(re.findall(rf'id="({prefix}-[0-9-]+)"', svg))


def test_triangle_counts(tmp_path, triangle):
    p, g = triangle
    svg = render_packing(tmp_path / "t.svg", p, g).read_text()
    assert len(gids(svg, "disk")) == 3 and len(gids(svg, "contact")) == 3
    assert len(gids(svg, "center")) == 3 and not gids(svg, "flex")


def test_hex_counts(tmp_path):
    p = hexagonal_patch(1)
    svg = render_packing(tmp_path / "h.svg", p, contact_graph(p)).read_text()
    assert len(gids(svg, "disk")) == 7 and len(gids(svg, "contact")) == 12


def test_byte_identical(tmp_path, seq10):
    p, g = seq10
    a = render_packing(tmp_path / "a.svg", p, g).read_bytes()
    b = render_packing(tmp_path / "b.svg", p, g).read_bytes()
    assert a == b


def test_flex_arrows_only_on_moving_disks(tmp_path):
    p, g = fig5b()
    v = tensegrity_flex_lp(p, g)
    svg = render_packing(tmp_path / "f.svg", p, g, flex=v.witness).read_text()
    moving = {f"flex-{i}" for i in range(p.n) if np.hypot(*v.witness[i]) > 0}
    assert gids(svg, "flex") == moving
    assert "flex-0" not in moving


def test_stress_colors(tmp_path):
    p = hexagonal_patch(1)
    g = contact_graph(p)
    omega = bar_stresses(p, g)[0]
    svg = render_packing(tmp_path / "s.svg", p, g, edge_values=omega).read_text()
    # both signs present in a hexagonal self-stress
    assert (omega > 0).any() and (omega < 0).any()
    from matplotlib.colors import to_hex

    for sign in (1, -1):
        assert to_hex(SIGN_COLORS[sign]) in svg


def test_diagnostic_figures(tmp_path):
    s = np.array([3.0, 1.0, 1e-3, 1e-17])
    a = save_svg(singular_value_figure(s, 1e-8), tmp_path / "s.svg")
    b = save_svg(trajectory_figure(np.arange(3), [0, 1e-3, 2e-3], [0, 1e-16, 2e-16]), tmp_path / "t.svg")
    assert a.read_text().startswith("<?xml") and b.stat().st_size > 0
