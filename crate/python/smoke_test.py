"""Smoke test for the pyfsdb extension.

Build and install first:

    pip install maturin
    maturin build --release -m crates/python/Cargo.toml
    pip install target/wheels/pyfsdb-*.whl
"""

import math
import sys
import tempfile
from pathlib import Path

import pyfsdb


def main() -> int:
    names = pyfsdb.builtin_models()
    assert {"benchmark1", "benchmark2", "benchmark3"} <= set(names), names

    model = pyfsdb.Model.load("benchmark1")
    assert "pushover" in model.protocols
    assert len(model.source_hash) == 64

    fsdb = model.run("pushover", formulation="fsdb")
    db = model.run("pushover", formulation="db")
    assert fsdb.converged and db.converged
    assert fsdb.peak_positive_kn < db.peak_positive_kn
    print(f"benchmark1 pushover: FSDB {fsdb.peak_positive_kn:.2f} kN, DB {db.peak_positive_kn:.2f} kN")

    cap = fsdb.capacity()
    assert len(cap["reaction_kn"]) == fsdb.steps
    assert math.isclose(max(cap["reaction_kn"]), fsdb.peak_positive_kn)
    gauss = fsdb.fields(fsdb.steps - 1)
    assert len(gauss) == fsdb.metadata()["integration_points"]

    with tempfile.TemporaryDirectory() as tmp:
        written = fsdb.write(tmp)
        assert {Path(p).name for p in written} == {"capacity.csv", "fields.csv", "metadata.toml"}

    try:
        pyfsdb.Model.parse("schema = 1\nbogus = 2\n")
    except ValueError as e:
        print(f"rejected bad model: {str(e).splitlines()[0]}")
    else:
        raise AssertionError("invalid model accepted")

    for case in pyfsdb.run_bench("table1"):
        print(
            f"{case['label']:<12} {case['formulation']:<5} "
            f"{case['measured_kn']:7.2f} vs {case['reference_kn']:6.2f} ({case['deviation_pct']:+.1f} %)"
        )
    print("ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
