"""Solve exported deadlock programs with HiGHS and compare against the
built-in exact search. Exits 77 (skip) when highspy is missing."""

import csv
import os
import subprocess
import sys
import tempfile

try:
    import highspy
except ImportError:
    print("highspy not installed, skipping")
    sys.exit(77)


def solve_lp_file(path):
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    if h.readModel(path) != highspy.HighsStatus.kOk:
        raise RuntimeError("HiGHS could not read " + path)
    h.run()
    if h.getModelStatus() != highspy.HighsModelStatus.kOptimal:
        raise RuntimeError("no optimum for " + path)
    return round(h.getInfo().objective_function_value)


def main():
    cli = sys.argv[1]
    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        corpus = os.path.join(tmp, "corpus")
        subprocess.run([cli, "--seed", "11", "--out-dir", tmp, "verify", "--corpus", corpus,
                        "--generate", "5", "--max-edges", "10"], check=True, stdout=subprocess.DEVNULL)
        with open(os.path.join(tmp, "verify.csv")) as f:
            rows = list(csv.DictReader(f))
        if len(rows) != 5:
            print("expected 5 instances, got", len(rows))
            return 1
        for row in rows:
            base = os.path.join(corpus, row["instance"])
            lp = base + ".lp"
            subprocess.run([cli, "export-ilp", "--graph", base + ".graph", "--paths", base + ".paths",
                            "--out", lp], check=True, stdout=subprocess.DEVNULL)
            # objective counts edges that are not deadlocked
            deadlocked = int(row["edges"]) - solve_lp_file(lp)
            ok = row["exact_deadlock_count"] == str(deadlocked)
            failures += not ok
            print(f"{row['instance']}: edges {row['edges']} highs {deadlocked} "
                  f"exact {row['exact_deadlock_count']} {'ok' if ok else 'MISMATCH'}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
