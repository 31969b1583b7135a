import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from threshold_lab import kernels
from threshold_lab._backend import requested_backend

from conftest import brute_prob_upset


def random_members(rng, n, count):
    masks = sorted(set(int(m) for m in rng.integers(1, 1 << n, size=count)), key=lambda m: (bin(m).count("1"), m))
    return np.array(masks, dtype=np.int64)


def test_backend_flag(backend):
    assert requested_backend() == backend
    nb, np_ = kernels.IMPLS["prob_upset"]
    assert kernels.impl("prob_upset") is (nb if backend == "numba" else np_)


def test_bad_backend_flag(monkeypatch):
    monkeypatch.setenv("THRESHOLD_LAB_BACKEND", "cuda")
    with pytest.raises(ValueError):
        requested_backend()


@pytest.mark.parametrize("seed", range(5))
def test_backends_agree(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 11))
    members = random_members(rng, n, int(rng.integers(1, 8)))
    p = rng.uniform(0.05, 0.95, size=n)
    for name, args in [
        ("minimal", (members,)),
        ("outcome_weights", (p,)),
        ("upset_indicator", (members, n)),
    ]:
        nb, np_ = kernels.IMPLS[name]
        np.testing.assert_array_equal(nb(*args), np_(*args))
    nb, np_ = kernels.IMPLS["prob_upset"]
    assert nb(members, p) == pytest.approx(np_(members, p), abs=1e-13)

    u = rng.random((50, n))
    nb, np_ = kernels.IMPLS["pack_masks"]
    samples = nb(u, p)
    np.testing.assert_array_equal(samples, np_(u, p))
    nb, np_ = kernels.IMPLS["upset_hits"]
    np.testing.assert_array_equal(nb(samples, members), np_(samples, members))


def test_prob_upset_matches_enumeration(backend):
    rng = np.random.default_rng(11)
    for _ in range(10):
        n = int(rng.integers(1, 8))
        members = random_members(rng, n, 4)
        p = rng.uniform(0.05, 0.95, size=n)
        assert kernels.prob_upset(members, p) == pytest.approx(brute_prob_upset(list(members), list(p)), abs=1e-13)


def test_outcome_weights_sum_to_one(backend):
    w = kernels.outcome_weights(np.array([0.2, 0.7, 0.5]))
    assert w.sum() == pytest.approx(1.0)
    # W = {0, 2} has index 0b101
    assert w[0b101] == pytest.approx(0.2 * 0.3 * 0.5)


def test_minimal_keep(backend):
    masks = np.array([0b001, 0b110, 0b011, 0b111], dtype=np.int64)
    assert list(kernels.minimal_keep(masks)) == [True, True, False, False]


def test_cover_dp_backends_identical():
    # targets {0,1},{1,2},{0,2} with candidates from their intersection closure
    cands = [0b000, 0b001, 0b010, 0b100, 0b011, 0b101, 0b110]
    targets = [0b011, 0b110, 0b101]
    cov = np.array([sum(1 << i for i, t in enumerate(targets) if c & ~t == 0) for c in cands], dtype=np.int64)
    cost = np.array([0.3 ** bin(c).count("1") for c in cands])
    ptr, idx = [0], []
    for i in range(3):
        idx += [k for k in range(len(cands)) if cov[k] >> i & 1]
        ptr.append(len(idx))
    nb, np_ = kernels.IMPLS["cover_dp"]
    a = nb(3, cov, cost, np.array(ptr), np.array(idx), 1e-14)
    b = np_(3, cov, cost, np.array(ptr), np.array(idx), 1e-14)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)
    assert a[0][7] == pytest.approx(0.27)


def test_benchmark_smoke(tmp_path):
    out = tmp_path / "bench.json"
    script = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    proc = subprocess.run(
        [sys.executable, str(script), "--only", "prob_upset", "cover_dp", "--runs", "1", "--warmup", "1", "-o", str(out)],
        capture_output=True, text=True, timeout=300,
    )
    assert proc.returncode == 0, proc.stderr
    report = json.loads(out.read_text())
    assert set(report["kernels"]) == {"prob_upset", "cover_dp"}
    assert all(r["outputs_match"] for r in report["kernels"].values())
