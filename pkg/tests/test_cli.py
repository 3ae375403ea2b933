import pytest

from nearbound.cli import main
from nearbound.condensation import read_condensation
from nearbound.experience import read_pool, write_pool, ExperiencePool


def run(*argv):
    return main(list(argv))


@pytest.fixture
def pool_file(tmp_path):
    path = tmp_path / "pool.txt"
    assert run(
        "collect", "--env", "predator-prey", "--teacher", "scripted",
        "--n", "400", "--seed", "7", "--out", str(path),
    ) == 0
    return path


@pytest.fixture
def fixture_pool_file(tmp_path, three_point_pool):
    path = tmp_path / "fixture.txt"
    write_pool(three_point_pool, path)
    return path


class TestCollect:
    def test_writes_pool(self, pool_file):
        pool = read_pool(pool_file)
        assert pool.dim == 2
        assert len(pool) <= 400

    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        for out in (a, b):
            assert run(
                "collect", "--env", "mountain-car", "--n", "150",
                "--seed", "3", "--out", str(out),
            ) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_unknown_env_fails(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            run("collect", "--env", "pong", "--n", "5", "--out", str(tmp_path / "x"))
        assert exc.value.code != 0
        assert "pong" in capsys.readouterr().err

    def test_seed_env_var(self, tmp_path, monkeypatch):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        monkeypatch.setenv("BCMER_SEED", "11")
        run("collect", "--env", "mountain-car", "--n", "60", "--out", str(a))
        monkeypatch.delenv("BCMER_SEED")
        run("collect", "--env", "mountain-car", "--n", "60", "--seed", "11",
            "--out", str(b))
        assert a.read_bytes() == b.read_bytes()


class TestCondense:
    def test_fixture_counts(self, fixture_pool_file, tmp_path, capsys):
        out_pool = tmp_path / "b.txt"
        out_res = tmp_path / "r.txt"
        assert run(
            "condense", "--pool", str(fixture_pool_file),
            "--out-pool", str(out_pool), "--out-result", str(out_res),
        ) == 0
        assert "retained 2 of 3" in capsys.readouterr().out
        result = read_condensation(out_res)
        assert result.boundary_indices == (1, 2)
        assert len(read_pool(out_pool)) == 2

    def test_fixpoint_on_fixture(self, fixture_pool_file, tmp_path):
        p1, r1 = tmp_path / "b1.txt", tmp_path / "r1.txt"
        p2, r2 = tmp_path / "b2.txt", tmp_path / "r2.txt"
        run("condense", "--pool", str(fixture_pool_file),
            "--out-pool", str(p1), "--out-result", str(r1))
        run("condense", "--pool", str(p1), "--out-pool", str(p2),
            "--out-result", str(r2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_empty_pool_fails(self, tmp_path, capsys):
        src = tmp_path / "empty.txt"
        src.write_text("#pool dim=2 actions=2\n")
        assert run(
            "condense", "--pool", str(src),
            "--out-pool", str(tmp_path / "o.txt"),
            "--out-result", str(tmp_path / "r.txt"),
        ) == 1
        assert "empty" in capsys.readouterr().err.lower()

    def test_single_action_warns(self, tmp_path, capsys):
        src = tmp_path / "mono.txt"
        write_pool(ExperiencePool(2, 2, [[0.0, 0.0], [1.0, 1.0]], [0, 0]), src)
        assert run(
            "condense", "--pool", str(src),
            "--out-pool", str(tmp_path / "o.txt"),
            "--out-result", str(tmp_path / "r.txt"),
        ) == 0
        assert "single action" in capsys.readouterr().err

    def test_scale_flag_runs(self, pool_file, tmp_path):
        assert run(
            "condense", "--pool", str(pool_file), "--scale",
            "--out-pool", str(tmp_path / "o.txt"),
            "--out-result", str(tmp_path / "r.txt"),
        ) == 0
        # retained points stay in original coordinates
        kept = read_pool(tmp_path / "o.txt")
        src = read_pool(pool_file)
        keys = {tuple(s) for s in src.states.tolist()}
        assert all(tuple(s) in keys for s in kept.states.tolist())


class TestFitPredict:
    def test_fit_predict_explains(self, fixture_pool_file, tmp_path, capsys):
        model = tmp_path / "m.txt"
        b1, r1 = tmp_path / "b.txt", tmp_path / "r.txt"
        run("condense", "--pool", str(fixture_pool_file),
            "--out-pool", str(b1), "--out-result", str(r1))
        assert run("fit", "--pool", str(b1), "--backend", "brute",
                   "--out", str(model)) == 0
        capsys.readouterr()
        assert run("predict", "--model", str(model), "--state=-5,0") == 0
        out = capsys.readouterr().out
        assert out.startswith("action 0")
        assert "nearest experience" in out
        assert "index 0" in out  # (1,0) is nearest to (-5,0) in the condensed pool

    def test_fit_tree_and_predict(self, pool_file, tmp_path, capsys):
        model = tmp_path / "t.txt"
        assert run("fit", "--pool", str(pool_file), "--tree", "gini:5",
                   "--out", str(model)) == 0
        capsys.readouterr()
        assert run("predict", "--model", str(model), "--state=5,1") == 0
        assert capsys.readouterr().out.startswith("action ")

    def test_missing_pool_file(self, tmp_path):
        assert run("fit", "--pool", str(tmp_path / "nope.txt"),
                   "--out", str(tmp_path / "m.txt")) == 1


class TestEvaluate:
    def test_teacher_vs_self(self, tmp_path, capsys):
        out = tmp_path / "report.txt"
        assert run(
            "evaluate", "--env", "predator-prey", "--student", "self",
            "--episodes", "3", "--seed", "5", "--out", str(out),
        ) == 0
        stdout = capsys.readouterr().out
        assert "acc=1.0" in stdout
        assert out.read_text().startswith("#evaluation")

    def test_student_model_file(self, pool_file, tmp_path, capsys):
        b, r, m = tmp_path / "b.txt", tmp_path / "r.txt", tmp_path / "m.txt"
        run("condense", "--pool", str(pool_file), "--out-pool", str(b),
            "--out-result", str(r))
        run("fit", "--pool", str(b), "--backend", "kdtree", "--out", str(m))
        capsys.readouterr()
        assert run(
            "evaluate", "--env", "predator-prey", "--student", str(m),
            "--episodes", "5", "--seed", "5",
        ) == 0
        out = capsys.readouterr().out
        acc = float(next(l for l in out.splitlines() if l.startswith("acc=")).split("=")[1])
        assert acc > 0.8


class TestSuiteCommand:
    def test_config_file_and_overrides(self, tmp_path, capsys):
        cfg = tmp_path / "suite.cfg"
        cfg.write_text(
            "envs=predator-prey\n"
            "sizes=150,300\n"
            "teacher=scripted\n"
            "backends=brute,kd\n"
            "baselines=dt_gini_l5\n"
            "seeds=1\n"
            "episodes=4\n"
            f"outdir={tmp_path / 'out'}\n"
        )
        assert run("suite", "--config", str(cfg)) == 0
        csv_lines = (tmp_path / "out" / "report.csv").read_text().splitlines()
        assert csv_lines[0].startswith("env,size,model")
        # 2 sizes x (teacher + brute + kd + one baseline)
        assert len(csv_lines) == 1 + 2 * 4
        assert (tmp_path / "out" / "summary.txt").exists()
        figs = list((tmp_path / "out").glob("fig_*.png"))
        assert len(figs) == 3

    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("envz=predator-prey\n")
        assert run("suite", "--config", str(cfg)) == 1
        assert "envz" in capsys.readouterr().err

    def test_byte_identical_reruns(self, tmp_path):
        for sub in ("o1", "o2"):
            assert run(
                "suite", "--envs", "predator-prey", "--sizes", "120",
                "--episodes", "3", "--seed", "9", "--outdir", str(tmp_path / sub),
            ) == 0
        assert (tmp_path / "o1" / "report.csv").read_bytes() == (
            tmp_path / "o2" / "report.csv"
        ).read_bytes()


class TestVisualize:
    def test_scatter_and_region(self, pool_file, tmp_path, capsys):
        b, r, m = tmp_path / "b.txt", tmp_path / "r.txt", tmp_path / "m.txt"
        run("condense", "--pool", str(pool_file), "--out-pool", str(b),
            "--out-result", str(r))
        run("fit", "--pool", str(b), "--backend", "brute", "--out", str(m))
        svg = tmp_path / "scatter.svg"
        ppm = tmp_path / "region.ppm"
        assert run(
            "visualize", "--pool", str(pool_file), "--condensation", str(r),
            "--out-scatter", str(svg), "--model", str(m), "--out-region", str(ppm),
            "--grid", "64x48", "--bounds=-19,19,-19,19",
        ) == 0
        svg_text = svg.read_text()
        assert svg_text.startswith('<?xml version="1.0"')
        assert svg_text.count("<circle") == len(read_pool(pool_file))
        raw = ppm.read_bytes()
        assert raw.startswith(b"P6\n64 48\n255\n")
        assert len(raw) == len(b"P6\n64 48\n255\n") + 64 * 48 * 3

    def test_region_deterministic(self, pool_file, tmp_path):
        b, r, m = tmp_path / "b.txt", tmp_path / "r.txt", tmp_path / "m.txt"
        run("condense", "--pool", str(pool_file), "--out-pool", str(b),
            "--out-result", str(r))
        run("fit", "--pool", str(b), "--backend", "balltree", "--out", str(m))
        p1, p2 = tmp_path / "a.ppm", tmp_path / "b.ppm"
        for p in (p1, p2):
            run("visualize", "--model", str(m), "--out-region", str(p),
                "--grid", "50x50")
        assert p1.read_bytes() == p2.read_bytes()

    def test_scatter_requires_2d(self, tmp_path, capsys):
        src = tmp_path / "p3.txt"
        write_pool(ExperiencePool(3, 2, [[0.0, 0.0, 0.0]], [0]), src)
        assert run("visualize", "--pool", str(src),
                   "--out-scatter", str(tmp_path / "s.svg")) == 1
        assert "2-D" in capsys.readouterr().err

    def test_no_outputs_requested(self, capsys):
        assert run("visualize") == 1
        assert "nothing to do" in capsys.readouterr().err
