#!/usr/bin/env python3
"""Smoke test for the gchlab_py extension module.

Builds nothing itself: run `cargo build -p gchlab-py` (or --release) first,
then `python3 python/smoke_test.py`. The script copies the cdylib next to a
temp import name and exercises the main types and operations.
"""

import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO / "target" / "release" / "libgchlab_py.so",
        REPO / "target" / "debug" / "libgchlab_py.so",
        REPO / "target" / "release" / "libgchlab_py.dylib",
        REPO / "target" / "debug" / "libgchlab_py.dylib",
    ]
    src = next((p for p in candidates if p.exists()), None)
    if src is None:
        sys.exit("build the extension first: cargo build -p gchlab-py")
    tmp = Path(tempfile.mkdtemp(prefix="gchlab_py_"))
    suffix = ".so" if src.suffix == ".so" else ".so"
    shutil.copy2(src, tmp / f"gchlab_py{suffix}")
    sys.path.insert(0, str(tmp))
    import gchlab_py

    return gchlab_py


def check(name, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
    return ok


def main():
    g = load_module()
    ok = True

    # Reduction classification.
    ok &= check(
        "classify_reduction",
        g.classify_reduction(1, 2.0) == "camassa_holm"
        and g.classify_reduction(2, 3.0) == "novikov"
        and g.classify_reduction(4, 7.0) == "generic",
    )

    # Threshold formula unit values: 4/3 and 2.
    t1 = g.small_momentum_threshold(1, 2.0, 1.0)
    t2 = g.small_momentum_threshold(2, 3.0, 2.0)
    ok &= check(
        "small_momentum_threshold",
        abs(t1 - 4.0 / 3.0) < 1e-14 and abs(t2 - 2.0) < 1e-14,
        f"{t1:.15f}, {t2:.15f}",
    )

    # Operator pair on a smooth field.
    ws = g.Workspace(20.0, 256, 1)
    xs = ws.nodes()
    f = [math.exp(-0.5 * x * x) for x in xs]
    fast = ws.helmholtz_solve(f)
    slow = ws.green_convolve_oracle(f)
    rel = max(abs(a - b) for a, b in zip(fast, slow)) / max(abs(v) for v in fast)
    ok &= check("helmholtz vs kernel quadrature", rel < 1e-8, f"rel = {rel:.3e}")

    # Momentum round trip.
    y = ws.momentum(fast)
    rel = max(abs(a - b) for a, b in zip(y, ws.dealias(f))) / max(abs(v) for v in f)
    ok &= check("momentum inverts helmholtz", rel < 1e-10, f"rel = {rel:.3e}")

    # Norms.
    l = 20.0
    s = [math.sin(math.pi * x / l) for x in xs]
    n0 = ws.sobolev_norm(s, 0.0)
    ok &= check("L2 norm of the base mode", abs(n0 - math.sqrt(l)) < 1e-12)

    # A tiny end-to-end run: uniform data decays exactly like e^{-lambda t}.
    cfg = {
        "params": {"n": 1, "beta": 2.0, "lambda": 1.0},
        "grid": {"half_length": 8.0, "nx": 64},
        "time": {"t_end": 1.0, "dt_max": 0.005, "sample_interval": 0.25},
        "initial": {"kind": "gaussian", "amplitude": 0.0, "center": 0.0, "width": 1.0},
    }
    with tempfile.TemporaryDirectory(prefix="gchlab_run_") as out:
        summary = json.loads(g.simulate(json.dumps(cfg), out))
        ok &= check(
            "simulate returns a summary",
            summary["status"] == "ReachedFinalTime"
            and (Path(out) / "timeseries.csv").exists(),
            f"steps = {summary['steps']}",
        )

    # One fast verification suite end to end.
    passed, report = g.verify_suite("operators")
    ok &= check("verify_suite('operators')", passed)
    if not passed:
        print(report)

    print("smoke test:", "PASS" if ok else "FAIL")
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
