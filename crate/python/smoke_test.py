"""Smoke test for the Python bindings.

Build first:
    cargo build -p warpspec-py --release --features extension-module
then run `python3 python/smoke_test.py`. The shared library is copied into a
temporary directory as `warpspec.so` and imported from there.
"""

import json
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libwarpspec.so"
        if lib.exists():
            break
    else:
        sys.exit("libwarpspec.so not found; build the warpspec-py crate first")
    tmp = Path(tempfile.mkdtemp())
    shutil.copy(lib, tmp / "warpspec.so")
    sys.path.insert(0, str(tmp))
    import warpspec

    return warpspec


def main():
    ws = load()

    pr = ws.predict(4, 2, -1.0, -1.0)
    assert pr["ess"]["text"] == "{0} u [0.25, inf)", pr
    assert pr["ac"]["threshold"] == 0.25
    assert ws.predict(3, 0, -1.0, -1.0)["ess"]["threshold"] == 1.0

    assert ws.classify_regime(3, 0, -2.0, -1.0, 2.0)[0] == "AgmonKatoKuroda"
    assert ws.classify_regime(3, 0, -2.0, -0.4, 2.0)[0] == "Lavine"
    assert ws.coclosed_eigenvalues(3, 0, 2) == [0.0, 2.0, 6.0]
    assert ws.coclosed_eigenvalues(5, 2, 1) == [6.0]

    m = ws.Metric(3, -1.0, -1.0)
    assert abs(m.t(m.r(5.0)) - 5.0) < 1e-9
    assert m.f(0.5) == 1.0
    r = m.c_bar + 3.0
    v = m.potential("type1", 0, 0.0, r)
    assert abs(v - 1.0) < 1e-9, v

    est = m.essential_bottom("type1", 0, 0.0)
    assert est["outcome"] == "band"
    assert abs(est["bottom"] - 1.0) < 0.05, est

    ok, lines = ws.verify()
    assert ok and all(json.loads(l)["residual"] < 1e-2 for l in lines.splitlines())
    assert not ws.verify("swap_coupling")[0]
    assert not ws.verify("wrong_cross")[0]

    try:
        ws.predict(3, 0, 0.5, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("a > -1 accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
