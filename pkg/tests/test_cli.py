import numpy as np
import pytest

import audiogp as a
from audiogp.cli import main

TRUTH_CSV = "frequency_hz,threshold_dbhl\n250,15\n1000,25\n4000,50\n8000,60\n"


@pytest.fixture
def truth_file(tmp_path):
    p = tmp_path / "truth.csv"
    p.write_text(TRUTH_CSV)
    return p


def base_flags():
    return ["--sigma-p", "2", "--slope", "2.0", "--intercept", "15.0",
            "--grid-points", "48", "--freeze-hypers"]


class TestSimulate:
    def test_trace_bounded_and_snapshots_written(self, truth_file, tmp_path):
        out = tmp_path / "out"
        code = main(["simulate", "--truth", str(truth_file), "--out", str(out),
                     "--seed", "3", "--max-trials", "21"] + base_flags())
        assert code == 0
        trace = (out / "trace_seed3.csv").read_text().splitlines()
        assert trace[0] == "step,freq_hz,level_dbhl,label,rmse,max_std,mean_bald"
        assert 1 <= len(trace) - 1 <= 21
        for step in (0, 7, 14, 21):
            snap = out / f"estimate_step{step}_seed3.csv"
            if step <= len(trace) - 1:
                assert snap.exists()

    def test_same_seed_byte_identical(self, truth_file, tmp_path):
        outs = []
        for name in ("o1", "o2"):
            out = tmp_path / name
            code = main(["simulate", "--truth", str(truth_file), "--out", str(out),
                         "--seed", "11", "--max-trials", "6"] + base_flags())
            assert code == 0
            outs.append((out / "trace_seed11.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_missing_truth_flag_usage_error(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as err:
            main(["simulate", "--out", str(tmp_path / "x")])
        assert err.value.code == 2

    def test_unreadable_truth_file_runtime_error(self, tmp_path):
        code = main(["simulate", "--truth", str(tmp_path / "missing.csv"),
                     "--out", str(tmp_path / "x")] + base_flags())
        assert code == 1

    def test_seed_fanout(self, truth_file, tmp_path):
        out = tmp_path / "fan"
        code = main(["simulate", "--truth", str(truth_file), "--out", str(out),
                     "--seed", "0", "--seeds", "3", "--max-trials", "2"] + base_flags())
        assert code == 0
        for s in range(3):
            assert (out / f"trace_seed{s}.csv").exists()


class TestFit:
    def test_empty_log_gives_prior_estimate(self, tmp_path):
        trials = tmp_path / "trials.csv"
        trials.write_text("frequency_hz,level_dbhl,label\n")
        out = tmp_path / "est.csv"
        code = main(["fit", "--trials", str(trials), "--out", str(out),
                     "--points", "16"] + base_flags())
        assert code == 0
        rows = [ln.split(",") for ln in out.read_text().splitlines()[2:]]
        xs = a.hz_to_bark(np.array([float(r[0]) for r in rows]))
        np.testing.assert_allclose([float(r[1]) for r in rows], 2.0 * xs + 15.0,
                                   atol=1e-9)
        np.testing.assert_allclose([float(r[2]) for r in rows], 20.0, atol=1e-9)

    def test_single_trial_changes_only_nearby(self, tmp_path):
        trials = tmp_path / "trials.csv"
        trials.write_text("frequency_hz,level_dbhl,label\n250,10,1\n")
        out = tmp_path / "est.csv"
        code = main(["fit", "--trials", str(trials), "--out", str(out),
                     "--points", "64", "--length-scale", "1.0"] + base_flags())
        assert code == 0
        rows = [ln.split(",") for ln in out.read_text().splitlines()[2:]]
        freqs = np.array([float(r[0]) for r in rows])
        means = np.array([float(r[1]) for r in rows])
        prior = 2.0 * a.hz_to_bark(freqs) + 15.0
        far = a.hz_to_bark(freqs) > a.hz_to_bark(250.0) + 10 * 1.0
        assert np.max(np.abs(means[far] - prior[far])) <= 1e-6
        assert abs(means[0] - prior[0]) > 1.0

    def test_malformed_row_names_line(self, tmp_path, capsys):
        trials = tmp_path / "trials.csv"
        trials.write_text("frequency_hz,level_dbhl,label\n1000,30,1\nbogus,row\n")
        code = main(["fit", "--trials", str(trials), "--out", str(tmp_path / "e.csv")]
                    + base_flags())
        assert code == 1
        assert "line 3" in capsys.readouterr().err

    def test_matches_session_replay(self, tmp_path):
        trials_path = tmp_path / "trials.csv"
        trials_path.write_text("frequency_hz,level_dbhl,label\n"
                               "500,18,1\n2000,35,-1\n4000,40,1\n")
        out = tmp_path / "est.csv"
        assert main(["fit", "--trials", str(trials_path), "--out", str(out),
                     "--points", "32"] + base_flags()) == 0
        rows = [ln.split(",") for ln in out.read_text().splitlines()[2:]]

        cfg = a.SessionConfig(mean=a.LinearMeanParams(2.0, 15.0), sigma_p=2.0,
                              grid_size=48, optimize_hypers=False, max_trials=4,
                              stop_std=1e-9)
        session = a.replay_history(cfg, [a.Trial(500, 18, 1), a.Trial(2000, 35, -1),
                                         a.Trial(4000, 40, 1)])
        est = session.threshold_estimate(32)
        np.testing.assert_allclose([float(r[1]) for r in rows], est.means_dbhl,
                                   rtol=0, atol=0)


class TestPropose:
    def test_empty_log_lowest_grid_frequency_at_prior_mean(self, tmp_path, capsys):
        trials = tmp_path / "trials.csv"
        trials.write_text("frequency_hz,level_dbhl,label\n")
        assert main(["propose", "--trials", str(trials)] + base_flags()) == 0
        freq, level = capsys.readouterr().out.split()
        assert float(freq) == pytest.approx(250.0, rel=1e-9)
        assert float(level) == pytest.approx(2.0 * a.hz_to_bark(250.0) + 15.0, abs=1e-9)

    def test_output_within_ranges(self, tmp_path, capsys):
        trials = tmp_path / "trials.csv"
        trials.write_text("frequency_hz,level_dbhl,label\n1000,30,1\n3000,45,-1\n")
        assert main(["propose", "--trials", str(trials)] + base_flags()) == 0
        freq, level = (float(v) for v in capsys.readouterr().out.split())
        assert 250.0 * (1 - 1e-9) <= freq <= 8000.0 * (1 + 1e-9)
        assert -10.0 <= level <= 110.0

    def test_agrees_with_service_proposal(self, tmp_path, capsys):
        from fastapi.testclient import TestClient
        from audiogp.service import create_app

        trials = tmp_path / "trials.csv"
        trials.write_text("frequency_hz,level_dbhl,label\n500,18,1\n2000,35,-1\n")
        assert main(["propose", "--trials", str(trials)] + base_flags()) == 0
        freq, level = (float(v) for v in capsys.readouterr().out.split())

        with TestClient(create_app(tmp_path / "svc")) as client:
            resp = client.post("/sessions", json={
                "mean": {"slope": 2.0, "intercept": 15.0}, "sigma_p": 2.0,
                "grid_size": 48, "optimize_hypers": False, "max_trials": 3,
            })
            sid = resp.json()["id"]
            for f, h, y in ((500, 18, 1), (2000, 35, -1)):
                r = client.post(f"/sessions/{sid}/responses",
                                json={"frequency_hz": f, "level_dbhl": h, "label": y})
                assert r.status_code == 200
            got = client.get(f"/sessions/{sid}/next-trial").json()
        assert got["frequency_hz"] == pytest.approx(freq, rel=1e-12)
        assert got["level_dbhl"] == pytest.approx(level, rel=1e-12)
