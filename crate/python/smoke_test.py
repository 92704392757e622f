#!/usr/bin/env python3
"""Smoke test for the qrainbow_py extension module.

Builds the cdylib if needed, loads it straight from the cargo target
directory, and exercises the main surface end to end.
"""

import hashlib
import math
import shutil
import subprocess
import sys
import sysconfig
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def find_or_build_cdylib() -> Path:
    subprocess.run(
        ["cargo", "build", "--release", "-p", "qrainbow-python"],
        cwd=REPO,
        check=True,
    )
    for name in ("libqrainbow_py.so", "libqrainbow_py.dylib", "qrainbow_py.dll"):
        candidate = REPO / "target" / "release" / name
        if candidate.exists():
            return candidate
    raise SystemExit("build succeeded but no cdylib artifact was found")


def import_module(cdylib: Path):
    tmp = Path(tempfile.mkdtemp(prefix="qrainbow_py_"))
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    shutil.copy2(cdylib, tmp / f"qrainbow_py{suffix}")
    sys.path.insert(0, str(tmp))
    import qrainbow_py

    return qrainbow_py


DICT_TEXT = """
[words]
pass
admin
secret
mango
[numbers]
1
2
[pattern]
WN
[rules]
caseshift W 2
"""


def main() -> None:
    qp = import_module(find_or_build_cdylib())

    # phase constant of the 3-qubit exact stage
    phi = qp.compute_phi()
    assert abs(phi - 2.1268800471555041) < 1e-9, phi

    # DEGA partitions and is exact on its reference targets
    assert qp.partition("0011") == [(0, 2, "00"), (2, 2, "11")]
    assert qp.partition("01011") == [(0, 2, "01"), (2, 3, "011")]
    for tau in ("11", "0011", "01011"):
        p = qp.success_probability("dega", tau)
        assert abs(p - 1.0) < 1e-9, (tau, p)
    p_noisy = qp.success_probability("dega", "0011", 0.05)
    assert 1.0 / 16.0 < p_noisy < 1.0, p_noisy
    p_orig = qp.success_probability("original", "0011")
    assert abs(p_orig - 0.9613189697265625) < 1e-9, p_orig

    # dictionary round trip
    d = qp.Dictionary.from_text(DICT_TEXT)
    assert d.space_size() == 16
    assert d.index_to_plain(0) == "pass1"
    assert qp.hash_hex("sha1", "pass1") == hashlib.sha1(b"pass1").hexdigest()

    # tiny end-to-end crack
    table = qp.Table.generate(d, t=4, m=8, k=4, kappa=12, seed=7)
    assert table.rows() == 8
    target = qp.hash_hex("sha1", d.index_to_plain(5))
    got = table.crack(target, engine="dega")
    if got is not None:
        assert hashlib.sha1(got.encode()).hexdigest() == target
    # a chain endpoint is always recoverable
    classical = table.crack_with_counters(target, engine="classical")
    assert classical[0] == got
    assert set(classical[1]) == {
        "replay_hash_evals",
        "final_column_hash_evals",
        "rebuild_hash_evals",
        "oracle_calls",
        "chains_examined",
    }

    # not-found path
    assert table.crack("ff" * 20) is None

    print("smoke test passed")
    print(f"  phi = {phi:.12f} rad ({math.degrees(phi):.3f} deg)")
    print(f"  P(dega, 0011, p=0.05) = {p_noisy:.6f}")


if __name__ == "__main__":
    main()
