import numpy as np
import pytest
import yaml

from synthdata import build_world, write_world
from zsner import cli
from zsner.reports import read_grid_csv


@pytest.fixture(scope="module")
def world():
    return build_world(
        seed=900,
        domain_labels={
            "alpha": ["anchor", "arrow", "amber"],
            "beta": ["bison", "brook", "basalt"],
        },
        dim=4,
        n_train=30,
        n_test=20,
        noise=0.25,
    )


@pytest.fixture
def workdir(world, tmp_path):
    config = write_world(world, tmp_path, {"output": {"dir": str(tmp_path / "out")}})
    return tmp_path, config


def run_cli(*argv):
    return cli.main([str(a) for a in argv])


def data_rows(path):
    return [
        line for line in path.read_text().splitlines()
        if line.strip() and not line.startswith("#")
    ]


class TestTrain:
    def test_writes_checkpoint_and_loss_trace(self, workdir):
        root, config = workdir
        assert run_cli("train", "--config", config, "--domain", "alpha") == 0
        ckpt = root / "out" / "head_alpha.txt"
        loss = root / "out" / "loss_alpha.csv"
        assert ckpt.is_file()
        rows = data_rows(loss)
        assert rows[0] == "epoch,loss"
        assert len(rows) - 1 == 30  # one row per configured epoch

    def test_rerun_is_byte_identical(self, workdir):
        root, config = workdir
        assert run_cli("train", "--config", config, "--domain", "alpha") == 0
        first = (root / "out" / "head_alpha.txt").read_bytes()
        assert run_cli("train", "--config", config, "--domain", "alpha") == 0
        assert (root / "out" / "head_alpha.txt").read_bytes() == first

    def test_missing_embedding_file_names_field(self, workdir, capsys):
        root, config = workdir
        cfg = yaml.safe_load(config.read_text())
        cfg["embeddings"]["path"] = "gone.txt"
        bad = root / "bad.yaml"
        bad.write_text(yaml.safe_dump(cfg))
        assert run_cli("train", "--config", bad, "--domain", "alpha") == 1
        assert "embeddings.path" in capsys.readouterr().err

    def test_ambiguous_domain_rejected(self, workdir, capsys):
        _, config = workdir
        assert run_cli("train", "--config", config) == 1
        assert "--domain" in capsys.readouterr().err


class TestGrid:
    def test_two_domain_grid(self, workdir):
        root, config = workdir
        assert run_cli("grid", "--config", config) == 0
        domains, cells = read_grid_csv(root / "out" / "grid.csv")
        assert domains == ["alpha", "beta"]
        assert len(cells) == 4
        footer = [r for r in data_rows(root / "out" / "grid.csv") if r.startswith("off_diagonal_mean")]
        assert len(footer) == 1
        expected = (cells[("alpha", "beta")] + cells[("beta", "alpha")]) / 2
        assert float(footer[0].split(",")[1]) == pytest.approx(expected, abs=1e-9)

    def test_rerun_byte_identical(self, workdir):
        root, config = workdir
        assert run_cli("grid", "--config", config, "--out", root / "o1") == 0
        assert run_cli("grid", "--config", config, "--out", root / "o2") == 0
        assert (root / "o1" / "grid.csv").read_bytes() == (root / "o2" / "grid.csv").read_bytes()

    def test_single_domain_rejected(self, world, tmp_path, capsys):
        config = write_world(world, tmp_path)
        cfg = yaml.safe_load(config.read_text())
        cfg["corpora"] = {"alpha": cfg["corpora"]["alpha"]}
        config.write_text(yaml.safe_dump(cfg))
        assert run_cli("grid", "--config", config) == 1
        assert "2 domains" in capsys.readouterr().err

    def test_five_domain_grid_shape(self, tmp_path):
        wide = build_world(
            seed=901,
            domain_labels={
                "d1": ["anchor", "arrow"],
                "d2": ["bison", "brook"],
                "d3": ["cedar", "coral"],
                "d4": ["dune", "delta"],
                "d5": ["ember", "elm"],
            },
            dim=4,
            n_train=20,
            n_test=12,
            noise=0.25,
        )
        config = write_world(wide, tmp_path)
        assert run_cli("grid", "--config", config) == 0
        domains, cells = read_grid_csv(tmp_path / "out" / "grid.csv")
        assert len(domains) == 5
        assert len(cells) == 25
        off = [v for (s, t), v in cells.items() if s != t]
        assert len(off) == 20
        footer = [
            r for r in data_rows(tmp_path / "out" / "grid.csv")
            if r.startswith("off_diagonal_mean")
        ]
        assert float(footer[0].split(",")[1]) == pytest.approx(np.mean(off), abs=1e-9)


class TestFewshot:
    def test_curve_rows(self, workdir):
        root, config = workdir
        assert run_cli(
            "fewshot", "--config", config, "--source", "alpha", "--target", "beta",
            "--n", "0,1,5,10",
        ) == 0
        rows = data_rows(root / "out" / "fewshot_alpha_beta.csv")
        assert rows[0] == "n,macro_f1"
        assert [r.split(",")[0] for r in rows[1:]] == ["0", "1", "5", "10"]

    def test_empty_n_rejected(self, workdir, capsys):
        _, config = workdir
        assert run_cli(
            "fewshot", "--config", config, "--source", "alpha", "--target", "beta", "--n", ","
        ) == 1

    def test_repeat_identical(self, workdir):
        root, config = workdir
        args = ("fewshot", "--config", config, "--source", "alpha", "--target", "beta", "--n", "0,1")
        assert run_cli(*args, "--out", root / "f1") == 0
        assert run_cli(*args, "--out", root / "f2") == 0
        assert (root / "f1" / "fewshot_alpha_beta.csv").read_bytes() == (
            root / "f2" / "fewshot_alpha_beta.csv"
        ).read_bytes()

    def test_unknown_domain_rejected(self, workdir, capsys):
        _, config = workdir
        assert run_cli(
            "fewshot", "--config", config, "--source", "alpha", "--target", "nope", "--n", "0"
        ) == 1


class TestDomainDistance:
    def test_identical_corpora_zero_distance(self, world, tmp_path):
        config = write_world(world, tmp_path)
        cfg = yaml.safe_load(config.read_text())
        cfg["corpora"]["twin"] = dict(cfg["corpora"]["alpha"])
        config.write_text(yaml.safe_dump(cfg))
        assert run_cli("domain-distance", "--config", config, "--out", tmp_path / "o") == 0
        rows = data_rows(tmp_path / "o" / "domain_distance.csv")[1:]
        pairs = {(r.split(",")[0], r.split(",")[1]): float(r.split(",")[2]) for r in rows}
        assert len(pairs) == 6  # 3 domains, ordered pairs
        assert pairs[("alpha", "twin")] == pytest.approx(0.0, abs=1e-12)
        assert pairs[("twin", "alpha")] == pytest.approx(0.0, abs=1e-12)

    def test_two_domains_two_asymmetric_rows(self, workdir):
        root, config = workdir
        assert run_cli("domain-distance", "--config", config) == 0
        rows = data_rows(root / "out" / "domain_distance.csv")
        assert rows[0] == "source,target,kl_nats"
        assert len(rows) == 3
        values = [float(r.split(",")[2]) for r in rows[1:]]
        assert all(v >= 0 for v in values)
        assert values[0] != values[1]  # asymmetry between the two directions

    def test_regression_join_with_grid(self, workdir):
        root, config = workdir
        assert run_cli("grid", "--config", config) == 0
        assert run_cli(
            "domain-distance", "--config", config, "--scores", root / "out" / "grid.csv"
        ) == 0
        rows = data_rows(root / "out" / "distance_regression.csv")
        assert rows[0] == "slope,intercept,r2"
        slope, intercept, r2 = (float(v) for v in rows[1].split(","))
        assert 0.0 <= r2 <= 1.0


class TestCluster:
    def write_wordlist(self, world, path, per_domain=5):
        lines = []
        for domain_id, split in world.splits.items():
            words = []
            for ws in world.entries:
                if ws.startswith(domain_id) and "fill" not in ws and "oov" not in ws:
                    words.append(ws)
            for w in words[:per_domain]:
                lines.append(f"{w} {domain_id}")
        path.write_text("\n".join(lines) + "\n")
        return path

    def test_metrics_per_source(self, world, workdir):
        root, config = workdir
        wordlist = self.write_wordlist(world, root / "words.txt")
        assert run_cli("cluster", "--config", config, wordlist) == 0
        rows = data_rows(root / "out" / "cluster_metrics.csv")
        assert rows[0] == "embedding_source,adjusted_rand,v_measure"
        assert len(rows) == 2  # one configured source
        name, ari, v = rows[1].split(",")
        assert name == "default"
        assert -1.0 <= float(ari) <= 1.0
        assert 0.0 <= float(v) <= 1.0

    def test_well_separated_words_cluster_perfectly(self, world, workdir):
        # entity vectors sit near their label vector, so domains form clusters
        root, config = workdir
        wordlist = self.write_wordlist(world, root / "words.txt")
        assert run_cli("cluster", "--config", config, wordlist) == 0
        _, ari, v = data_rows(root / "out" / "cluster_metrics.csv")[1].split(",")
        assert float(v) > 0.3

    def test_duplicate_word_rejected(self, workdir, capsys):
        root, config = workdir
        wl = root / "dups.txt"
        wl.write_text("alphaanchorw0 alpha\nalphaanchorw0 alpha\n")
        assert run_cli("cluster", "--config", config, wl) == 1
        assert "duplicate" in capsys.readouterr().err

    def test_all_oov_rejected(self, workdir, capsys):
        root, config = workdir
        wl = root / "oov.txt"
        wl.write_text("zzz alpha\nyyy beta\n")
        assert run_cli("cluster", "--config", config, wl) == 1
        assert "out of vocabulary" in capsys.readouterr().err

    def test_forced_k(self, world, tmp_path):
        config = write_world(world, tmp_path, {"kmeans": {"k": 5, "restarts": 4, "seed": 1}})
        wordlist = self.write_wordlist(world, tmp_path / "words.txt", per_domain=6)
        assert run_cli("cluster", "--config", config, wordlist) == 0
        header = (tmp_path / "out" / "cluster_metrics.csv").read_text()
        assert "k=5" in header


class TestConfigValidation:
    def test_unknown_section_rejected(self, workdir, capsys):
        root, config = workdir
        cfg = yaml.safe_load(config.read_text())
        cfg["mystery"] = {"a": 1}
        bad = root / "bad.yaml"
        bad.write_text(yaml.safe_dump(cfg))
        assert run_cli("grid", "--config", bad) == 1
        assert "mystery" in capsys.readouterr().err

    def test_bad_learning_rate_names_field(self, workdir, capsys):
        root, config = workdir
        cfg = yaml.safe_load(config.read_text())
        cfg["train"]["learning_rate"] = -1.0
        bad = root / "bad.yaml"
        bad.write_text(yaml.safe_dump(cfg))
        assert run_cli("grid", "--config", bad) == 1
        assert "train" in capsys.readouterr().err

    def test_missing_config_file(self, capsys):
        assert run_cli("grid", "--config", "/nonexistent/x.yaml") == 1

    def test_usage_error_exits_one(self, capsys):
        assert run_cli("fewshot", "--config", "x.yaml") == 1  # missing --source/--target

    def test_runtime_failure_exits_two(self, workdir, capsys):
        # config validates (paths exist) but a corpus is malformed at run time
        root, config = workdir
        (root / "alpha_train.conll").write_text("broken line with too many fields\n")
        assert run_cli("grid", "--config", config) == 2
        assert "fields" in capsys.readouterr().err

    def test_fingerprint_stamped_on_reports(self, workdir):
        root, config = workdir
        assert run_cli("grid", "--config", config, "--out", root / "fp") == 0
        first_line = (root / "fp" / "grid.csv").read_text().splitlines()[0]
        assert first_line.startswith("# fingerprint=")
        assert len(first_line.split("=")[1]) == 12

    def test_seed_override_changes_fingerprint(self, workdir):
        root, config = workdir
        assert run_cli("grid", "--config", config, "--out", root / "s1") == 0
        assert run_cli("grid", "--config", config, "--out", root / "s2", "--seed", "99") == 0
        fp1 = (root / "s1" / "grid.csv").read_text().splitlines()[0]
        fp2 = (root / "s2" / "grid.csv").read_text().splitlines()[0]
        assert fp1 != fp2
