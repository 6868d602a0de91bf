"""End-to-end checks of the tdbem command-line front end."""

import csv
import json
import subprocess
import sys
import tempfile
from pathlib import Path

BIN = sys.argv[1] if len(sys.argv) > 1 else "tdbem"
FAILURES = []


def run(*args, cwd=None):
    return subprocess.run([BIN, *args], capture_output=True, text=True, cwd=cwd)


def check(name, cond, detail=""):
    status = "ok" if cond else "FAIL"
    print(f"[{status}] {name} {detail}")
    if not cond:
        FAILURES.append(name)


def main():
    tmp = Path(tempfile.mkdtemp(prefix="tdbem_cli_"))

    # mesh: 8*N^2 triangles on the square
    out = tmp / "mesh.json"
    r = run("mesh", "--screen", "square", "--beta", "2", "--levels", "4",
            "--output", str(out))
    check("mesh exit 0", r.returncode == 0, r.stderr.strip())
    doc = json.loads(out.read_text())
    check("mesh triangle count", doc["n_triangles"] == 128)
    check("mesh config echo", doc["config"]["beta"] == 2)
    check("mesh config hash", isinstance(doc["config_hash"], int) and doc["config_hash"] != 0)

    # malformed grading must be rejected before any computation
    r = run("mesh", "--screen", "square", "--beta", "0.5", "--levels", "2")
    check("mesh beta<1 rejected", r.returncode == 2, f"rc={r.returncode}")
    r = run("solve", "--operator", "nonsense")
    check("bad operator rejected", r.returncode == 2, f"rc={r.returncode}")
    r = run("study", "nonsense")
    check("bad study kind rejected", r.returncode == 2, f"rc={r.returncode}")

    # solve: tiny single layer run, density file + metadata
    cfg = tmp / "solve.json"
    cfg.write_text(json.dumps({
        "screen": "square", "beta": 2.0, "levels": 1,
        "operator": "single_layer", "dt": 0.25, "T": 1.0,
        "rhs_id": "plane_wave",
    }))
    r = run("solve", "--config", str(cfg), "--output-dir", str(tmp / "sol"))
    check("solve exit 0", r.returncode == 0, r.stderr.strip())
    meta = json.loads((tmp / "sol" / "density.json").read_text())
    check("solve residual small", meta["spacetime_residual"] < 1e-10,
          str(meta["spacetime_residual"]))
    check("solve dof", meta["dof"] == 8)
    lines = (tmp / "sol" / "density.csv").read_text().splitlines()
    check("density hash line", lines[0].startswith("# config_hash="))
    check("density header", lines[1] == "step,dof,value")
    rows = list(csv.reader(lines[2:]))
    check("density rows", len(rows) == 4 * 8)

    # determinism: re-running the same config reproduces the file
    r = run("solve", "--config", str(cfg), "--output-dir", str(tmp / "sol2"))
    same = (tmp / "sol" / "density.csv").read_text() == (tmp / "sol2" / "density.csv").read_text()
    check("solve deterministic", r.returncode == 0 and same)

    # evaluate: probe csv with causality (point 1 away, zero before arrival)
    cfg2 = tmp / "eval.json"
    cfg2.write_text(json.dumps({
        "screen": "square", "beta": 1.0, "levels": 1,
        "operator": "single_layer", "dt": 0.25, "T": 1.0,
        "points": [[0.0, 0.0, 1.0]], "times": [0.5, 2.0],
        "eval_tensor_order": 6,
    }))
    r = run("evaluate", "--config", str(cfg2), "--output-dir", str(tmp / "ev"))
    check("evaluate exit 0", r.returncode == 0, r.stderr.strip())
    lines = (tmp / "ev" / "probe.csv").read_text().splitlines()
    check("probe hash line", lines[0].startswith("# config_hash="))
    vals = {row[1]: float(row[2]) for row in csv.reader(lines[2:])}
    check("probe causal zero", vals["0.5"] == 0.0)

    # study interp: fast analytic study
    r = run("study", "interp", "--output-dir", str(tmp / "interp"))
    check("study interp exit 0", r.returncode == 0, r.stderr.strip())
    rep = json.loads((tmp / "interp" / "interp_a0p5.json").read_text())
    rates = {c["beta"]: c["rate"] for c in rep["cases"]}
    check("interp beta=2 rate ~2", abs(rates[2.0] - 2.0) < 0.15, str(rates))
    check("interp beta=1 rate ~1", abs(rates[1.0] - 1.0) < 0.15, str(rates))

    # study convergence: smoke ladder
    cfg3 = tmp / "conv.json"
    cfg3.write_text(json.dumps({
        "operator": "single_layer", "screen": "square", "beta": 2.0,
        "levels": [1, 2, 3], "benchmark_level": 4, "dt": 0.2, "T": 0.6,
    }))
    r = run("study", "convergence", "--config", str(cfg3),
            "--output-dir", str(tmp / "conv"))
    check("study convergence exit 0", r.returncode == 0, r.stderr.strip())
    rep = json.loads((tmp / "conv" / "convergence_beta2_dt0p2.json").read_text())
    check("convergence rows", len(rep["rows"]) == 3)
    check("convergence l2 rate negative", rep["l2_rate"] < 0.0, str(rep["l2_rate"]))

    print()
    if FAILURES:
        print("FAILED:", ", ".join(FAILURES))
        return 1
    print("all CLI checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
