"""End-to-end checks of the edr executable: every command runs on a small
configuration, JSON outputs validate against schemas/, CSV curves are well
formed, reruns are byte-identical and bad input exits with the documented codes."""

import argparse
import csv
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema
import referencing

SMALL = ["--iters", "150", "--hidden", "16,16", "--n-train", "200", "--n-test", "200",
         "--timing-repeats", "1", "--ensemble-size", "2"]


def load_registry(schema_dir):
    resources = []
    for path in sorted(schema_dir.glob("*.schema.json")):
        schema = json.loads(path.read_text())
        resources.append((schema["$id"], referencing.Resource.from_contents(schema)))
    return referencing.Registry().with_resources(resources)


class Runner:
    def __init__(self, exe, schema_dir):
        self.exe = exe
        self.registry = load_registry(schema_dir)
        self.schemas = {p.name.split(".")[0]: json.loads(p.read_text())
                        for p in schema_dir.glob("*.schema.json")}
        self.failures = []

    def check(self, ok, message):
        print(("ok   " if ok else "FAIL ") + message)
        if not ok:
            self.failures.append(message)

    def run(self, *args, expect=0):
        proc = subprocess.run([str(self.exe), *map(str, args)], capture_output=True, text=True)
        self.check(proc.returncode == expect,
                   f"edr {' '.join(map(str, args[:3]))} ... exit {proc.returncode} (want {expect})"
                   + (f": {proc.stderr.strip()}" if proc.returncode != expect else ""))
        return proc

    def validate(self, path, schema):
        try:
            jsonschema.Draft202012Validator(self.schemas[schema], registry=self.registry).validate(
                json.loads(path.read_text()))
            self.check(True, f"{path.name} matches {schema} schema")
        except (jsonschema.ValidationError, FileNotFoundError, json.JSONDecodeError) as e:
            self.check(False, f"{path.name} vs {schema} schema: {e}")

    def csv_table(self, path, header_prefix, numeric=True):
        try:
            rows = list(csv.reader(path.open()))
        except FileNotFoundError:
            self.check(False, f"{path.name} missing")
            return
        ok = len(rows) > 1 and rows[0][: len(header_prefix)] == header_prefix
        ok = ok and all(len(r) == len(rows[0]) for r in rows)
        ok = ok and (not numeric or all(float(c) == float(c) for r in rows[1:] for c in r))
        self.check(ok, f"{path.name} is a numeric table with header {header_prefix}")


def without_timing(value):
    if isinstance(value, dict):
        return {k: without_timing(v) for k, v in value.items() if k != "timing"}
    if isinstance(value, list):
        return [without_timing(v) for v in value]
    return value


def same_outputs(a, b):
    names_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    names_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    if names_a != names_b:
        return False
    for name in names_a:
        fa, fb = a / name, b / name
        if name.suffix == ".json":
            if without_timing(json.loads(fa.read_text())) != without_timing(json.loads(fb.read_text())):
                return False
        elif fa.read_bytes() != fb.read_bytes():
            return False
    return True


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--edr", required=True, type=pathlib.Path)
    parser.add_argument("--schemas", required=True, type=pathlib.Path)
    args = parser.parse_args()
    r = Runner(args.edr, args.schemas)

    with tempfile.TemporaryDirectory(prefix="edr_cli_") as tmp:
        work = pathlib.Path(tmp)

        gen = work / "generate"
        r.run("generate", "--dataset", "heteroscedastic", "--n-train", "300", "--out", gen)
        r.csv_table(gen / "train.csv", ["x0", "y0"])

        for head in ["evidential", "gaussian", "ensemble", "dropout"]:
            out = work / f"train_{head}"
            r.run("train", "--head", head, *SMALL, "--out", out)
            r.validate(out / "report.json", "report")
            r.csv_table(out / "loss_trace.csv", ["iteration", "mean_loss", "mean_nll", "mean_reg"])
            r.csv_table(out / "calibration.csv", ["level", "observed"])
            r.csv_table(out / "cutoff.csv", ["percentile_removed", "rmse"])
            r.csv_table(out / "entropy_cdf_id.csv", ["entropy", "cumulative"])
            r.csv_table(out / "entropy_cdf_ood.csv", ["entropy", "cumulative"])
            r.csv_table(out / "predictions.csv", ["x0", "target_index", "y", "prediction"])
            again = work / f"train_{head}_again"
            r.run("train", "--head", head, *SMALL, "--out", again)
            r.check(same_outputs(out, again), f"train --head {head} rerun is identical")

        config = work / "config.json"
        config.write_text(json.dumps({"head": "gaussian", "iters": 100, "hidden": [8],
                                      "timing_repeats": 1, "n_train": 100, "n_test": 50}))
        out = work / "from_config"
        r.run("train", "--config", config, "--seed", "3", "--out", out)
        report = json.loads((out / "report.json").read_text())
        r.check(report["config"]["head"] == "gaussian" and report["config"]["seed"] == 3
                and report["config"]["hidden"] == [8], "config file applies and flags override it")

        out = work / "eval"
        r.run("eval", "--model", work / "train_evidential" / "model.json", "--n-train", "200",
              "--n-test", "200", "--timing-repeats", "1", "--out", out)
        r.validate(out / "report.json", "report")
        a = without_timing(json.loads((out / "report.json").read_text()))
        b = without_timing(json.loads((work / "train_evidential" / "report.json").read_text()))
        r.check(a["rmse"] == b["rmse"] and a["nll"] == b["nll"],
                "eval of a saved model reproduces the training-run metrics")

        out = work / "ablate"
        r.run("ablate-lambda", *SMALL, "--lambdas", "0,0.01", "--out", out)
        r.validate(out / "ablation.json", "ablation")
        r.csv_table(out / "ablation.csv", ["lambda", "id_mean_epistemic", "ood_mean_epistemic"])

        out = work / "compare"
        r.run("compare", *SMALL, "--out", out)
        r.validate(out / "compare.json", "compare")
        for m in ["evidential", "ensemble", "dropout"]:
            r.csv_table(out / f"entropy_cdf_{m}_ood.csv", ["entropy", "cumulative"])

        manifests = ",".join(str(work / f"train_{m}" / "model.json")
                             for m in ["evidential", "ensemble", "dropout"])
        out = work / "compare_saved"
        r.run("compare", *SMALL, "--models", manifests, "--out", out)
        r.validate(out / "compare.json", "compare")

        table = work / "yacht.csv"
        table.write_text((gen / "train.csv").read_text())
        out = work / "bench"
        proc = r.run("benchmark", "--preset", "benchmark", "--csv", table, "--trials", "3",
                     "--iters", "100", "--ensemble-size", "2", "--jobs", "2",
                     "--timing-repeats", "1", "--out", out)
        r.validate(out / "benchmark.json", "benchmark")
        bench = json.loads((out / "benchmark.json").read_text())
        r.check(all(m["reference"] is not None for m in bench["methods"]),
                "benchmark shows published reference rows for a yacht table")
        r.check("+/-" in proc.stdout and "published" in proc.stdout,
                "benchmark prints a mean +/- stderr table")
        r.csv_table(out / "benchmark_trials.csv", ["method", "trial", "rmse", "nll"], numeric=False)

        r.run("train", "--lr", "abc", expect=2)
        r.run("train", "--no-such-flag", expect=2)
        r.run("eval", expect=2)
        r.run("train", "--dataset", "csv", "--csv", work / "missing.csv", "--out", work / "x",
              expect=1)
        huge = work / "huge.csv"
        huge.write_text("".join(f"{i},{1e300 * (i % 3 + 1)}\n" for i in range(40)))
        r.run("train", "--csv", huge, "--iters", "20", "--hidden", "4", "--timing-repeats", "1",
              "--out", work / "diverge", expect=3)

    if r.failures:
        print(f"{len(r.failures)} check(s) failed")
        return 1
    print("all CLI checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
