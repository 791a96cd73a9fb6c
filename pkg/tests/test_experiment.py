import os

import numpy as np
import pytest

from conftest import open_grid
from rtcomplex import experiment as ex
from rtcomplex.cli import main
from rtcomplex.core import UsageError, grid_space
from rtcomplex.dbio import DatabaseFormatError, StaleDatabase, dump_db, load_db, parse_db, save_db
from rtcomplex.ingest import SamplingError
from rtcomplex.subgoal import build_dlrta_db, build_hcdps_db, build_knn_db, solve_dlrta

SMOKE = dict(
    maps=["maze:size=31,corridor=1,seed=1", "rooms:size=40,room=8,door=2,seed=2"],
    subspaces=2, subspace_size=200, problems=6, N=20, b=100,
    stability_min=10, stability_max=20, stability_window=5, folds=2, bins=2, seed=7,
)


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


@pytest.fixture(scope="module")
def smoke_run(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("smoke1"))
    summary = ex.run_experiment(ex.make_config(out=out, **SMOKE))
    return summary


# ---------------------------------------------------------------- problems

def test_open_grid_problems_meet_minimum_cost():
    space = open_grid(20, 20)
    probs = ex.gen_problems(space, 30, 10.0, seed=1)
    assert len(probs) == 30
    assert all(cost >= 10.0 for _, cost in probs)
    assert all(p.start != p.goal for p, _ in probs)


def test_zero_minimum_accepts_any_distinct_pair():
    probs = ex.gen_problems(open_grid(3, 3), 10, 0.0, seed=2)
    assert len(probs) == 10


def test_tiny_space_cannot_reach_minimum_cost():
    with pytest.raises(SamplingError):
        ex.gen_problems(open_grid(2, 2), 5, 10.0, seed=0)


def test_problem_generation_is_seeded():
    a = ex.gen_problems(open_grid(15, 15), 8, 5.0, seed=9)
    b = ex.gen_problems(open_grid(15, 15), 8, 5.0, seed=9)
    assert [(p.start, p.goal, c) for p, c in a] == [(p.start, p.goal, c) for p, c in b]


# ------------------------------------------------------------------ config

def test_map_spec_round_trip():
    spec = ex.parse_map_spec("maze:size=31, corridor=2,seed=5")
    assert spec.kind == "maze"
    assert spec.get("corridor") == "2"
    assert ex.parse_map_spec(spec.text()) == spec
    assert spec.name == "maze-size31-corridor2-seed5"


@pytest.mark.parametrize("text", ["swamp:size=3", "maze:size"])
def test_bad_map_spec(text):
    with pytest.raises(ex.ConfigError):
        ex.parse_map_spec(text)


def test_config_file_parsing_and_overrides(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("# corpus\nmap = open:size=8\nmap = maze:size=15,seed=1\n"
                    "subspaces = 3  # inline comment\nalgorithms = lrta, tba\nstability_tol = 0.05\n")
    cfg = ex.load_config(str(path), subspaces=5, workers=None)
    assert [m.kind for m in cfg.maps] == ["open", "maze"]
    assert cfg.subspaces == 5
    assert cfg.algorithms == ("lrta", "tba")
    assert cfg.stability_tol == 0.05
    assert cfg.workers == 1


@pytest.mark.parametrize("kw", [dict(subspaces=0), dict(algorithms="lrta,fast"), dict(colour=3),
                                dict(problems="many"), dict(stability_min=50, stability_max=10)])
def test_invalid_config_rejected(kw):
    with pytest.raises(ex.ConfigError):
        ex.make_config(**kw)


def test_config_line_without_equals():
    with pytest.raises(ex.ConfigError):
        ex.parse_config("subspaces 3\n")


def test_config_survives_metadata_round_trip():
    cfg = ex.make_config(**SMOKE)
    assert ex.make_config(**cfg.to_dict()) == cfg


def test_seeds_independent_of_job_order():
    cfg = ex.make_config(**SMOKE)
    jobs = ex.plan_jobs(cfg)
    assert len(jobs) == 4
    assert len({j.space_seed for j in jobs}) == 4
    again = ex.plan_jobs(cfg)
    assert [j.seed("knn") for j in jobs] == [j.seed("knn") for j in again]
    assert jobs[0].seed("knn") != jobs[0].seed("hcdps")


# ------------------------------------------------------------------- bench

def test_smoke_run_outputs(smoke_run):
    assert smoke_run.exit_code == 0
    out = smoke_run.out
    profiles = ex.read_csv(os.path.join(out, "profiles.csv"))
    perf = ex.read_csv(os.path.join(out, "performance.csv"))
    problems = ex.read_csv(os.path.join(out, "problems.csv"))
    assert len(profiles) == 4
    assert len(perf) == 4 * len(ex.ALGORITHMS)
    assert len(problems) == 4 * 6 * len(ex.ALGORITHMS)
    assert all(float(p["optimal"]) >= 10.0 for p in problems)
    assert all(int(p["n_states"]) == 200 for p in profiles)
    for name in ("correlations.csv", "predictions.csv", "timings.csv", "run_meta.json"):
        assert os.path.exists(os.path.join(out, name))
    corr = ex.read_csv(os.path.join(out, "correlations.csv"))
    assert all(int(r["n"]) <= 4 for r in corr)


def test_solved_runs_never_beat_optimal(smoke_run):
    for row in ex.read_csv(os.path.join(smoke_run.out, "problems.csv")):
        if row["solved"] == "1":
            assert float(row["cost"]) >= float(row["optimal"]) - 1e-6
            assert float(row["suboptimality"]) >= 1 - 1e-6


def test_rerun_is_byte_identical_across_worker_counts(smoke_run, tmp_path):
    out = str(tmp_path / "w2")
    ex.run_experiment(ex.make_config(out=out, workers=2, **SMOKE))
    for name in ex.DETERMINISTIC_OUTPUTS:
        a, b = os.path.join(smoke_run.out, name), os.path.join(out, name)
        assert os.path.exists(a) == os.path.exists(b), name
        if os.path.exists(a):
            assert read(a) == read(b), name


@pytest.mark.parametrize("alg", ex.ALGORITHMS)
def test_replay_reproduces_recorded_run(smoke_run, alg):
    sol, row = ex.replay(smoke_run.out, "maze-size31-corridor1-seed1#01", 3, alg)
    assert ex.replay_matches(sol, row)


def test_replay_unknown_space(smoke_run):
    with pytest.raises(UsageError):
        ex.replay(smoke_run.out, "nowhere#00", 0, "lrta")


def test_failed_space_is_recorded_and_the_rest_continues(tmp_path):
    cfg = ex.make_config(maps=["open:size=2", "open:size=12"], subspaces=1, subspace_size=200,
                         problems=3, algorithms="lrta,tba", stability_min=5, stability_max=10,
                         stability_window=5, out=str(tmp_path))
    summary = ex.run_experiment(cfg)
    assert summary.exit_code == 3
    assert len(summary.failures) == 1 and "open-size2" in summary.failures[0]
    perf = ex.read_csv(str(tmp_path / "performance.csv"))
    assert {p["space_id"] for p in perf} == {"open-size12#00"}


# -------------------------------------------------------------------- dbio

@pytest.fixture(scope="module")
def room_space():
    cells = np.ones((12, 12), dtype=bool)
    cells[6, :] = False
    cells[6, 3] = cells[6, 9] = True
    return grid_space(cells)


@pytest.mark.parametrize("kind", ["dlrta", "knn", "hcdps"])
def test_database_text_round_trip(room_space, kind, tmp_path):
    build = {"dlrta": lambda s: build_dlrta_db(s, 2, 1),
             "knn": lambda s: build_knn_db(s, 15, 100, 1),
             "hcdps": lambda s: build_hcdps_db(s, 1, 100, 1)}[kind]
    db = build(room_space)
    path = str(tmp_path / f"{kind}.db")
    save_db(path, db, room_space)
    back = load_db(path, room_space)
    assert type(back) is type(db)
    assert dump_db(back, room_space) == dump_db(db, room_space)


def test_loaded_database_solves_identically(room_space):
    from rtcomplex.core import make_problem
    db = build_dlrta_db(room_space, 2, 3)
    back = parse_db(dump_db(db, room_space), room_space)
    p = make_problem(room_space, 0, room_space.n - 1)
    a, b = solve_dlrta(room_space, db, p), solve_dlrta(room_space, back, p)
    assert (a.cost, a.moves, a.path) == (b.cost, b.moves, b.path)


def test_database_for_another_space_is_stale(room_space):
    text = dump_db(build_knn_db(room_space, 10, 100, 0), room_space)
    with pytest.raises(StaleDatabase):
        parse_db(text, open_grid(12, 12))


@pytest.mark.parametrize("mutate", [
    lambda t: "hello\n" + t,
    lambda t: t.replace("rtcomplex-db 1", "rtcomplex-db 9"),
    lambda t: t.replace("kind knn", "kind bogus"),
    lambda t: t.replace("param b 100", "param b lots"),
])
def test_corrupt_database_rejected(room_space, mutate):
    text = dump_db(build_knn_db(room_space, 10, 100, 0), room_space)
    with pytest.raises(DatabaseFormatError):
        parse_db(mutate(text), room_space)


# --------------------------------------------------------------------- cli

def test_cli_generate_and_sample(tmp_path, capsys):
    path = str(tmp_path / "m.map")
    assert main(["gen-maze", "--width", "31", "--height", "31", "--corridor", "1",
                 "--seed", "4", "-o", path]) == 0
    assert main(["sample", "--map", path, "--size", "100"]) == 0
    out = capsys.readouterr().out
    assert "states\t100" in out


def test_cli_solve_reports_optimal(capsys):
    args = ["solve", "--map", "open:size=10", "--algo", "lrta", "--start", "0", "--goal", "99"]
    assert main(args) == 0
    lines = dict(line.partition("\t")[::2] for line in capsys.readouterr().out.strip().splitlines())
    assert float(lines["cost"]) == pytest.approx(9 * 1.4)
    assert float(lines["suboptimality"]) == pytest.approx(1.0)


def test_cli_build_db_then_solve(tmp_path, capsys):
    path = str(tmp_path / "k.db")
    base = ["--map", "maze:size=21,corridor=1,seed=2", "--size", "120"]
    assert main(["build-db", *base, "--algo", "knn", "-N", "15", "-b", "80", "-o", path,
                 "--verify"]) == 0
    assert "certificate: ok" in capsys.readouterr().out
    assert main(["solve", *base, "--algo", "knn", "--db", path, "--start", "0",
                 "--goal", "119", "-b", "80"]) == 0
    other = ["--map", "maze:size=21,corridor=1,seed=3", "--size", "120"]
    assert main(["solve", *other, "--algo", "knn", "--db", path, "--start", "0",
                 "--goal", "119"]) == 2


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["solve", "--map", "open:size=4"]) == 1
    assert main(["nonsense"]) == 1
    assert main(["sample", "--map", str(tmp_path / "missing.map")]) == 2
    bad = tmp_path / "bad.map"
    bad.write_text("type octile\nheight 2\nwidth 2\nmap\n..\n")
    assert main(["sample", "--map", str(bad)]) == 2
    assert main(["solve", "--map", "open:size=4", "--algo", "lrta", "--start", "0",
                 "--goal", "99"]) in (1, 2)
    cfg = tmp_path / "fail.cfg"
    cfg.write_text("map = open:size=2\nsubspaces = 1\nproblems = 2\nalgorithms = lrta\n"
                   "stability_min = 5\nstability_max = 10\nstability_window = 5\n")
    assert main(["bench", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3
    capsys.readouterr()


def test_cli_tables_and_replay(smoke_run, tmp_path, capsys):
    out = smoke_run.out
    prof, perf = os.path.join(out, "profiles.csv"), os.path.join(out, "performance.csv")
    assert main(["correlate", "--profiles", prof, "--performance", perf, "--table", "mean"]) == 0
    assert "scrubbing" in capsys.readouterr().out
    assert main(["predict", "--profiles", prof, "--performance", perf, "--folds", "2",
                 "--bins", "2"]) == 0
    assert main(["replay", "--out", out, "--space-id", "rooms-size40-room8-door2-seed2#00",
                 "--problem", "1", "--algorithm", "knn"]) == 0
    assert capsys.readouterr().out.strip().endswith("match")
