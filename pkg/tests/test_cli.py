import csv
import io

import numpy as np
import pytest

from eigenpro.cli import build_config, main, parse_overrides, read_config_file
from eigenpro.data import Dataset, synth_spectrum, write_csv
from eigenpro.errors import DataError
from eigenpro.kernels import KernelSpec, kernel_matrix
from eigenpro.modelio import load_model, save_model
from eigenpro.optimizer import TrainConfig, predict, train
from eigenpro.reach import heaviside_demo


def _write(tmp_path, name, X, y):
    path = tmp_path / name
    write_csv(Dataset(X, np.asarray(y).reshape(len(X), -1)), path, header=False)
    return str(path)


def _rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


@pytest.fixture
def kernel_files(tmp_path):
    r = np.random.default_rng(7)
    X = r.standard_normal((500, 10))
    y = np.sin(X[:, 0]) + 0.3 * X[:, 1] + 0.1 * r.standard_normal(500)
    return (_write(tmp_path, "train.csv", X[:300], y[:300]),
            _write(tmp_path, "eval.csv", X[300:], y[300:]), X, y)


@pytest.fixture
def decay_file(tmp_path):
    ds, _ = synth_spectrum(400, 100, 1 / np.arange(1, 101) ** 2, 0.0, seed=1)
    return _write(tmp_path, "decay.csv", ds.X, ds.y)


class TestTrain:
    def test_zero_epochs(self, tmp_path, kernel_files):
        tr, _, _, _ = kernel_files
        model, report = tmp_path / "m.txt", tmp_path / "r.csv"
        rc = main(["train", "--train", tr, "--model", str(model), "--report", str(report),
                   "--epochs", "0", "--k", "5", "--M", "50"])
        assert rc == 0
        assert not np.any(load_model(model).model.alpha)
        assert _rows(report) == [["epoch", "train_loss", "eval_loss", "metric", "alpha_norm", "seconds"]]

    def test_matches_direct_solve(self, tmp_path, kernel_files):
        tr, ev, X, y = kernel_files
        model = tmp_path / "m.txt"
        rc = main(["train", "--train", tr, "--eval", ev, "--model", str(model), "--report",
                   str(tmp_path / "r.csv"), "--bandwidth", "2.0", "--k", "40", "--M", "300",
                   "--m", "300", "--epochs", "4000", "--target-loss", "1e-20"])
        assert rc == 0
        spec = KernelSpec("gaussian", 2.0)
        alpha = np.linalg.solve(kernel_matrix(spec, X[:300]), y[:300])
        direct = np.mean((kernel_matrix(spec, X[300:], X[:300]) @ alpha - y[300:]) ** 2)
        out = tmp_path / "metrics.csv"
        assert main(["eval", "--model", str(model), "--data", ev, "--out", str(out)]) == 0
        loss = dict(_rows(out)[1:])["loss"]
        assert abs(float(loss) - direct) <= 1e-3

    def test_report_byte_identical(self, tmp_path, kernel_files):
        tr, ev, _, _ = kernel_files
        texts = []
        for run in range(2):
            rep = tmp_path / f"r{run}.csv"
            assert main(["train", "--train", tr, "--eval", ev, "--model", str(tmp_path / f"m{run}"),
                         "--report", str(rep), "--k", "10", "--M", "100", "--m", "32",
                         "--epochs", "3", "--seed", "4"]) == 0
            texts.append(rep.read_bytes())
        assert texts[0] == texts[1]
        assert (tmp_path / "m0").read_bytes() == (tmp_path / "m1").read_bytes()

    def test_config_file_and_flag_precedence(self, tmp_path, kernel_files):
        tr, _, _, _ = kernel_files
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# settings\nk = 7\nM = 60\nepochs = 1\nbandwidth = 3.5\n")
        assert read_config_file(cfg) == {"k": 7, "M": 60, "epochs": 1, "bandwidth": 3.5}
        rep = tmp_path / "r.csv"
        assert main(["train", "--train", tr, "--model", str(tmp_path / "m"), "--report", str(rep),
                     "--config", str(cfg), "--epochs", "2"]) == 0
        assert len(_rows(rep)) == 3
        assert load_model(tmp_path / "m").model.spec.bandwidth == 3.5

    def test_build_config(self):
        c = build_config({"mode": "rff", "bandwidth": 2.0, "eta": "0.5", "k": 3})
        assert c.kernel == KernelSpec("gaussian", 2.0) and c.eta == 0.5 and c.k == 3
        assert parse_overrides(["k=0", "m = 16"]) == {"k": 0, "m": 16}

    def test_classification_eval(self, tmp_path):
        r = np.random.default_rng(2)
        X = r.standard_normal((200, 3))
        lab = (X[:, 0] + X[:, 1] > 0).astype(float)
        tr = _write(tmp_path, "c.csv", X, lab)
        model, out = tmp_path / "m", tmp_path / "o.csv"
        assert main(["train", "--train", tr, "--model", str(model), "--report", "-", "--task",
                     "classification_onehot", "--mode", "rff", "--d", "300", "--k", "10",
                     "--M", "200", "--epochs", "5"]) == 0
        assert main(["eval", "--model", str(model), "--data", tr, "--out", str(out)]) == 0
        metrics = dict(_rows(out)[1:])
        assert float(metrics["c_error"]) < 0.2


class TestBench:
    def test_identical_configs(self, tmp_path, decay_file):
        out = tmp_path / "b.csv"
        assert main(["bench", "--data", decay_file, "--target-loss", "1e-2", "--mode", "linear",
                     "--a", "k=5", "--b", "k=5", "--M", "400", "--epochs", "500", "--out", str(out)]) == 0
        rows = _rows(out)
        assert rows[0] == ["config", "epochs_to_target", "seconds_to_target", "final_train_loss"]
        assert rows[1][1] == rows[2][1] and rows[3][:2] == ["ratio", "1.0"]

    def test_decay_fixture_ratio(self, tmp_path, decay_file):
        out = tmp_path / "b.csv"
        assert main(["bench", "--data", decay_file, "--target-loss", "1e-3", "--mode", "linear",
                     "--k", "20", "--M", "400", "--epochs", "20000", "--out", str(out)]) == 0
        assert float(_rows(out)[3][1]) >= 5

    def test_not_reached(self, tmp_path, decay_file):
        out = tmp_path / "b.csv"
        assert main(["bench", "--data", decay_file, "--target-loss", "1e-12", "--mode", "linear",
                     "--k", "20", "--M", "400", "--epochs", "2", "--out", str(out)]) == 0
        rows = _rows(out)
        assert rows[1][1] == "not reached" and rows[3][1] == "n/a"

    def test_byte_identical(self, tmp_path, decay_file):
        outs = []
        for i in range(2):
            out = tmp_path / f"b{i}.csv"
            main(["bench", "--data", decay_file, "--target-loss", "1e-2", "--mode", "linear",
                  "--k", "10", "--M", "200", "--epochs", "300", "--out", str(out)])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]


class TestAnalyze:
    def test_flat_spectrum(self, tmp_path):
        ds, _ = synth_spectrum(100, 12, np.ones(12), seed=0)
        out = tmp_path / "a.csv"
        assert main(["analyze", "--data", _write(tmp_path, "f.csv", ds.X, ds.y), "--mode", "linear",
                     "--solver", "exact", "--k-list", "2,5,8", "--M", "100", "--out", str(out)]) == 0
        rows = _rows(out)
        assert rows[0] == ["k", "index", "eigenvalue", "ratio"]
        assert [float(r[3]) for r in rows[1:]] == pytest.approx([1.0] * 3, rel=1e-10)

    def test_geometric_spectrum(self, tmp_path):
        ds, _ = synth_spectrum(200, 20, 2.0 ** -np.arange(1, 21), seed=0)
        out = tmp_path / "a.csv"
        assert main(["analyze", "--data", _write(tmp_path, "g.csv", ds.X, ds.y), "--mode", "linear",
                     "--solver", "exact", "--k-list", "8", "--M", "200", "--out", str(out)]) == 0
        assert float(_rows(out)[1][3]) == pytest.approx(256.0, rel=1e-10)

    def test_kernel_mode_deterministic(self, tmp_path, kernel_files):
        tr = kernel_files[0]
        outs = []
        for i in range(2):
            out = tmp_path / f"a{i}.csv"
            assert main(["analyze", "--data", tr, "--k-list", "5,10", "--M", "150",
                         "--bandwidth", "2", "--out", str(out)]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]
        ratios = [float(r[3]) for r in _rows(tmp_path / "a0.csv")[1:]]
        assert ratios[0] <= ratios[1]


class TestReachDemo:
    def test_ordering(self, tmp_path):
        out = tmp_path / "h.csv"
        assert main(["reach-demo", "--s", "0.5", "--t-list", "100,1000000", "--J", "200",
                     "--out", str(out)]) == 0
        header, row = _rows(out)
        assert header == ["s", "J", "t1", "t2", "gd_t1", "gd_t2", "truncation"]
        gd1, gd2, trunc = map(float, row[4:])
        assert gd1 - gd2 < gd2 - trunc
        ref = heaviside_demo(0.5, [100, 10 ** 6], 200)
        assert gd1 == float(ref.gd_errors[0]) and trunc == ref.truncation_error

    def test_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["reach-demo", "--out", str(a)])
        main(["reach-demo", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()


class TestExitCodes:
    def test_usage(self, capsys):
        assert main([]) == 1
        assert main(["train", "--train", "x.csv"]) == 1
        assert main(["reach-demo", "--t-list", "5"]) == 1

    def test_invalid_config(self, tmp_path, kernel_files):
        assert main(["train", "--train", kernel_files[0], "--model", str(tmp_path / "m"),
                     "--report", "-", "--tau", "2.0"]) == 1

    def test_missing_file(self, tmp_path):
        assert main(["train", "--train", str(tmp_path / "nope.csv"), "--model",
                     str(tmp_path / "m"), "--report", "-"]) == 2

    def test_malformed_data(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("1,2,3\n4,oops,6\n")
        assert main(["train", "--train", str(bad), "--model", str(tmp_path / "m"),
                     "--report", "-"]) == 2

    def test_bad_model_file(self, tmp_path, kernel_files):
        bad = tmp_path / "m"
        bad.write_text("not a model\n")
        assert main(["eval", "--model", str(bad), "--data", kernel_files[0]]) == 2

    def test_divergence(self, tmp_path, kernel_files, capsys):
        rc = main(["train", "--train", kernel_files[0], "--model", str(tmp_path / "m"),
                   "--report", "-", "--eta", "500", "--k", "0", "--M", "50", "--epochs", "5"])
        assert rc == 3
        assert "500" in capsys.readouterr().err


class TestModelRoundTrip:
    @pytest.mark.parametrize("mode", ["primal_kernel", "rff", "rbf", "linear"])
    def test_bit_identical(self, tmp_path, mode):
        r = np.random.default_rng(1)
        X = r.standard_normal((150, 4))
        Y = np.c_[np.cos(X[:, 0]), X[:, 1]]
        cfg = TrainConfig(mode=mode, kernel=KernelSpec("gaussian", 1.5), k=2 if mode == "linear" else 5, M=100, m=32,
                          d=80, epochs=2, seed=3)
        model, _ = train(X, Y, cfg)
        path = tmp_path / "model.txt"
        save_model(path, model, mode, 3)
        saved = load_model(path)
        Z = r.standard_normal((20, 4))
        assert saved.mode == mode and saved.seed == 3
        np.testing.assert_array_equal(predict(saved.model, Z), predict(model, Z))

    def test_vector_output(self, tmp_path):
        X = np.random.default_rng(0).standard_normal((30, 2))
        model, _ = train(X, X[:, 0], TrainConfig(mode="linear", k=1, M=30, m=10, epochs=1))
        save_model(tmp_path / "m", model, "linear")
        assert load_model(tmp_path / "m").model.alpha.shape == (2,)

    def test_truncated_file(self, tmp_path):
        X = np.random.default_rng(0).standard_normal((30, 2))
        model, _ = train(X, X[:, 0], TrainConfig(mode="linear", k=1, M=30, m=10, epochs=1))
        save_model(tmp_path / "m", model, "linear")
        text = (tmp_path / "m").read_text().splitlines()
        (tmp_path / "t").write_text("\n".join(text[:-2]) + "\n")
        with pytest.raises(DataError):
            load_model(tmp_path / "t")
