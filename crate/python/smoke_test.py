"""Smoke test for the adastab Python bindings.

Build and install first, e.g. `pip install --no-build-isolation -e crates/python`
or `maturin develop -m crates/python/Cargo.toml`, then run this file.
"""

import math
import tempfile
from pathlib import Path

import adastab


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    c = adastab.compute_constants(1.0, 1.0, 1.0, 1.0, 1.0, beta1=0.5)
    assert c["c_gamma1"] == 1.0 and c["c_gamma2"] == 1.5, c
    assert close(c["c0"], (2 * math.sqrt(2) + math.sqrt(10)) ** 2, 1e-12)
    assert c["r1"] == 0.5
    assert adastab.compute_m(1.0, 1.0, 1.0, 1.0, 1.0, 1.0) == 28.0

    lhs, rhs, _, ok = adastab.check_step_identity(4.0, 5.0)
    assert ok and close(lhs, 1.0 / 6.0) and close(rhs, 1.0 / 6.0)

    exc = adastab.partition_stopping_times([1.0, 3.0, 5.0, 1.0], 2.0)
    assert exc == [(2, 3, 4, True, False)], exc

    obj = adastab.Objective("quadratic", 2)
    assert obj.lipschitz == 1.0
    assert obj.value([3.0, 4.0]) == 12.5
    assert obj.grad([3.0, 4.0]) == [3.0, 4.0]

    opt = adastab.AdaGradNorm([1.0], alpha0=1.0, s0=1.0)
    opt.step([1.0])
    assert opt.s == 2.0 and opt.n == 1
    assert close(opt.theta[0], 1.0 - 1.0 / math.sqrt(2.0))

    rms = adastab.RmsProp([1.0, -1.0], beta1=0.5)
    rms.step([2.0, 0.0])
    assert rms.n == 1 and rms.v == [2.5, 0.5], rms.v

    try:
        adastab.Objective("no_such_problem", 2)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown objective accepted")

    config = """
horizon = 500
runs = 4
seed = 3
checkpoints = [10, 500]
[problem]
id = "double_well"
dim = 2
[noise]
id = "affine_gaussian"
a = 0.5
b = 0.5
[optimizer]
id = "adagrad_norm"
"""
    with tempfile.TemporaryDirectory() as tmp:
        a = adastab.run_batch(config, out=str(Path(tmp) / "a"), threads=1)
        b = adastab.run_batch(config, out=str(Path(tmp) / "b"), threads=2)
        rec = "records/run_00003.csv"
        assert (Path(tmp) / "a" / rec).read_bytes() == (Path(tmp) / "b" / rec).read_bytes()
    assert a == b
    assert a["completed_runs"] == 4
    assert all(v["verdict"] == "pass" for v in a["verdicts"].values()), a["verdicts"]
    print("adastab smoke test ok:", len(a["verdicts"]), "checks pass,",
          "mean sup g = %.4f" % a["estimates"]["stability"]["mean_sup_g"])


if __name__ == "__main__":
    main()
