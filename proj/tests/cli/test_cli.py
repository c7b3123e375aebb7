"""End-to-end checks of the permsig executable (stdlib only)."""

import csv
import io
import json
import os
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

EXE = None


def run(*args, env=None, check=None):
    full_env = dict(os.environ)
    full_env.pop("PERMSIG_SEED", None)
    if env:
        full_env.update(env)
    proc = subprocess.run([EXE, *map(str, args)], capture_output=True, text=True, env=full_env)
    if check is not None and proc.returncode != check:
        raise AssertionError(f"exit {proc.returncode} != {check}\nstdout:{proc.stdout}\nstderr:{proc.stderr}")
    return proc


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def write_manifest(path, subjects, root="."):
    path.write_text(json.dumps({"format": "csv_txy", "root": root, "subjects": subjects}))


def ramp_trace(path, n=50, flat_y=False):
    lines = ["t,x,y"]
    for i in range(n):
        y = 1.0 if flat_y else (i * 7919 % 101) / 101.0
        lines.append(f"{i * 10},{i / n},{y}")
    path.write_text("\n".join(lines) + "\n")


class CliTest(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def test_empty_manifest_gives_header_only(self):
        write_manifest(self.dir / "m.json", [])
        out = run("features", self.dir / "m.json", check=0).stdout
        self.assertEqual(out, "subject_id,sample_index,label,h_x,c_x,f_x,h_y,c_y,f_y\n")

    def test_one_signature_one_row(self):
        ramp_trace(self.dir / "a.csv")
        write_manifest(self.dir / "m.json", [{"subject_id": "u1", "genuine": ["a.csv"], "forgery": []}])
        out = rows(run("features", self.dir / "m.json", check=0).stdout)
        self.assertEqual(len(out), 1)
        self.assertEqual(out[0]["subject_id"], "u1")
        self.assertEqual(out[0]["label"], "genuine")

    def test_default_synthetic_row_count(self):
        manifest = run("synth", "--out", self.dir / "d", check=0).stdout.strip()
        out = run("features", manifest, "--jobs", 2, check=0).stdout
        self.assertEqual(len(rows(out)), 20 * (25 + 25))

    def test_partial_failure(self):
        ramp_trace(self.dir / "good.csv")
        (self.dir / "bad.csv").write_text("t,x,y\n0,1\n")
        write_manifest(self.dir / "m.json",
                       [{"subject_id": "u1", "genuine": ["good.csv", "bad.csv", "missing.csv"], "forgery": []}])
        proc = run("features", self.dir / "m.json", check=2)
        self.assertEqual(len(rows(proc.stdout)), 1)
        self.assertIn("bad.csv", proc.stderr)
        self.assertIn("missing.csv", proc.stderr)

    def test_strict_turns_warnings_into_failures(self):
        ramp_trace(self.dir / "flat.csv", flat_y=True)  # constant y axis warns
        write_manifest(self.dir / "m.json", [{"subject_id": "u1", "genuine": ["flat.csv"], "forgery": []}])
        loose = run("features", self.dir / "m.json", check=0)
        self.assertIn("warning", loose.stderr)
        strict = run("features", self.dir / "m.json", "--strict", check=2)
        self.assertIn("flat.csv", strict.stderr)

    def test_training_signature_verifies_as_genuine(self):
        manifest = run("synth", "--out", self.dir / "d", "--subjects", 2, "--genuine", 6, "--forgeries", 3,
                       "--jitter", 0, check=0).stdout.strip()
        feats = self.dir / "f.csv"
        run("features", manifest, "-o", feats, check=0)
        run("train", feats, "--out-dir", self.dir / "models", check=0)
        out = rows(run("verify", self.dir / "models" / "s001.json", "--features", feats, "--subject", "s001",
                       check=0).stdout)
        genuine = [r for r in out if r["label"] == "genuine"]
        self.assertEqual(len(genuine), 6)
        self.assertTrue(all(r["verdict"] == "genuine" for r in genuine))
        model = json.loads((self.dir / "models" / "s001.json").read_text())
        self.assertEqual(model["feature_schema"], ["h_x", "c_x", "f_x", "h_y", "c_y", "f_y"])

        trace = Path(manifest).parent / "s001" / "g02.csv"
        single = rows(run("verify", self.dir / "models" / "s001.json", "--trace", trace, check=0).stdout)
        self.assertEqual(single[0]["verdict"], "genuine")

    def test_evaluate_is_deterministic(self):
        manifest = run("synth", "--out", self.dir / "d", "--subjects", 3, "--genuine", 10, "--forgeries", 5,
                       check=0).stdout.strip()
        feats = self.dir / "f.csv"
        run("features", manifest, "-o", feats, check=0)
        a = run("evaluate", feats, "--seed", 7, "--train-size", 5, check=0).stdout
        b = run("evaluate", feats, "--seed", 7, "--train-size", 5, "--jobs", 3, check=0).stdout
        c = run("evaluate", feats, "--train-size", 5, env={"PERMSIG_SEED": "7"}, check=0).stdout
        self.assertEqual(a, b)
        self.assertEqual(a, c)
        report = json.loads(a)
        self.assertEqual(report["protocol"]["seed"], 7)
        self.assertEqual(len(report["per_subject"]), 3)
        for key in ("acc", "auc", "eer", "pooled_eer"):
            self.assertTrue(0.0 <= report[key] <= 1.0)
        run("evaluate", feats, "--train-size", 5, env={"PERMSIG_SEED": "abc"}, check=1)

    def test_cluster_outputs(self):
        manifest = run("synth", "--out", self.dir / "d", "--subjects", 5, "--genuine", 4, "--forgeries", 1,
                       check=0).stdout.strip()
        feats = self.dir / "f.json"
        run("features", manifest, "--format", "json", "-o", feats, check=0)
        newick = run("cluster", feats, check=0).stdout.strip()
        self.assertTrue(newick.endswith(";"))
        for s in range(5):
            self.assertIn(f"s00{s}", newick)
        run("cluster", feats, "--k", 2, "--newick", self.dir / "t.nwk", "--assignments", self.dir / "a.csv",
            "--metric", "manhattan", "--linkage", "complete", check=0)
        assign = rows((self.dir / "a.csv").read_text())
        self.assertEqual(len(assign), 5)
        self.assertEqual({r["cluster"] for r in assign}, {"0", "1"})
        run("cluster", feats, "--metric", "cosine", check=1)

    def test_usage_errors_are_fatal(self):
        run("features", self.dir / "nope.json", check=1)
        run("evaluate", check=1)
        run("bogus", check=1)
        self.assertEqual(run("--help").returncode, 0)


if __name__ == "__main__":
    EXE = sys.argv.pop(1)
    unittest.main()
