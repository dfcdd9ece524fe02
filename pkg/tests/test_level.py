import math

import pytest

from playtest.level import (
    LevelError,
    builtin_level_names,
    load_builtin,
    parse_level,
)

MINIMAL = "bounds -20 0 -20 20 10 20\nspawn 0 1 0 0\ngoal 5 1 5 1.0"


def test_minimal_level():
    lvl = parse_level(MINIMAL)
    assert len(lvl.goals) == 1
    assert len(lvl.boxes) == 0
    assert lvl.spawn == (0.0, 1.0, 0.0)
    assert lvl.spawn_yaw == 0.0


def test_goal_outside_bounds():
    bad = MINIMAL.replace("goal 5 1 5 1.0", "goal 99 1 5 1.0")
    with pytest.raises(LevelError, match="outside bounds"):
        parse_level(bad)


def test_spawn_outside_bounds():
    bad = MINIMAL.replace("spawn 0 1 0 0", "spawn 0 99 0 0")
    with pytest.raises(LevelError, match="spawn outside bounds"):
        parse_level(bad)


def test_zero_goals():
    bad = "bounds -20 0 -20 20 10 20\nspawn 0 1 0 0"
    with pytest.raises(LevelError, match="at least one goal"):
        parse_level(bad)


def test_missing_bounds():
    with pytest.raises(LevelError, match="bounds"):
        parse_level("spawn 0 1 0 0\ngoal 5 1 5 1.0")


def test_inverted_aabb_rejected():
    bad = MINIMAL + "\nbox 5 0 -2 4 3 2 solid"
    with pytest.raises(LevelError, match="line 4.*min < max"):
        parse_level(bad)


def test_unknown_flag_rejected():
    bad = MINIMAL + "\nbox 4 0 -2 5 3 2 ghost"
    with pytest.raises(LevelError, match="unknown flag"):
        parse_level(bad)


def test_unknown_record_carries_line_number():
    bad = MINIMAL + "\n\nwobble 1 2 3"
    with pytest.raises(LevelError, match="line 5"):
        parse_level(bad)


def test_bad_number_rejected():
    bad = MINIMAL.replace("goal 5 1 5 1.0", "goal 5 one 5 1.0")
    with pytest.raises(LevelError, match="bad number"):
        parse_level(bad)


def test_comments_and_blank_lines_ignored():
    text = "# header\n\nbounds -20 0 -20 20 10 20  # inline\nspawn 0 1 0 90\ngoal 5 1 5 1.0\n"
    lvl = parse_level(text)
    assert lvl.spawn_yaw == pytest.approx(math.pi / 2)


def test_nocollide_excluded_from_collision_and_rays():
    text = MINIMAL + "\nbox 4 0 -2 5 3 2 nocollide\nbox 8 0 -2 9 3 2 solid"
    lvl = parse_level(text)
    assert len(lvl.collision_boxes) == 1
    assert len(lvl.nocollide_boxes) == 1
    # A ray through the nocollide box reports the solid box behind it.
    from playtest.sim import raycast
    d = raycast(lvl, (0.0, 1.0, 0.0), (1.0, 0.0, 0.0), 20.0)
    assert d == pytest.approx(8.0, abs=1e-9)


def test_platform_record():
    text = MINIMAL + "\nplatform -1 0 -1 1 1 1 0 0.5 0 4 0.5 0 2.0"
    lvl = parse_level(text)
    p = lvl.platforms[0]
    assert p.path_length == pytest.approx(4.0)
    assert p.box_at(0.0) == (-1.0, 0.0, -1.0, 1.0, 1.0, 1.0)
    assert p.box_at(1.0) == (3.0, 0.0, -1.0, 5.0, 1.0, 1.0)
    # ping-pong: phase 1.5 is halfway back
    assert p.box_at(1.5)[0] == pytest.approx(1.0)


def test_builtin_levels_parse():
    names = builtin_level_names()
    assert {"exploit", "stuck_player", "navigation", "dynamic_navigation"} <= set(names)
    for name in names:
        lvl = load_builtin(name)
        assert len(lvl.goals) >= 1
    assert len(load_builtin("stuck_player").trap_boxes) == 5
    assert len(load_builtin("dynamic_navigation").platforms) == 4
    assert len(load_builtin("exploit").nocollide_boxes) == 1


def test_unknown_builtin():
    with pytest.raises(LevelError, match="unknown built-in"):
        load_builtin("nope")
