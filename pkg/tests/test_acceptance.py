"""Exit criteria.  Each test prints one PASS/FAIL line (see conftest)."""

import json
import math
import time

import numpy as np

from xorsre import (
    RngSpec,
    basis_state,
    haar_mean_m2,
    haar_random_state,
    neel_state,
    sre2_brute_force,
    sre2_exact,
    t_state,
    tensor_product,
)
from xorsre.cli import bench, main
from xorsre.dynamics import QuenchSpec, apply_two_qubit_gate, run_quench
from xorsre.fwht import fwht

from _oracles import xor_convolution

H1 = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
CNOT = np.eye(4)[[0, 3, 2, 1]]  # control = first qubit of the pair


def test_1_oracle_equivalence(report):
    t0 = time.perf_counter()
    worst = 0.0
    for n in range(2, 9):
        for s in range(50):
            psi = haar_random_state(n, RngSpec(1, n).generator(s))
            worst = max(worst, abs(sre2_exact(psi).m2 - sre2_brute_force(psi).m2))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 120
    assert report(1, ok, f"max |fwht - brute| = {worst:.2e} <= 1e-9 over 350 states, {elapsed:.1f}s < 120s")


def ghz(n):
    psi = basis_state(n, 0)
    gate = np.kron(np.eye(2), H1)  # H on bit i of the (i, j) pair
    apply_two_qubit_gate(psi, gate, 0, 1)
    for q in range(n - 1):
        apply_two_qubit_gate(psi, CNOT, q, q + 1)
    return psi


def test_2_stabilizer_zeros(report):
    worst = 0.0
    for n in range(2, 11):
        cases = [basis_state(n, 0), basis_state(n, 2**n - 1), basis_state(n, (0x2D5 * n) % 2**n),
                 neel_state(n), ghz(n), tensor_product(np.array([1, 0, 0, 1]) / np.sqrt(2), basis_state(n - 1, 0)) if n > 2
                 else np.array([1, 0, 0, 1]) / np.sqrt(2)]
        ref = np.zeros(2**n)
        ref[0] = ref[-1] = 1 / np.sqrt(2)
        assert np.allclose(cases[4], ref)
        worst = max(worst, *(sre2_exact(c).m2 for c in cases))
    assert report(2, worst <= 1e-10, f"max m2 over basis/Bell/GHZ/Neel states, N=2..10: {worst:.2e} <= 1e-10")


def test_3_t_state_pin(report):
    target = math.log2(4 / 3)
    errs = [abs(sre2_exact(t_state()).m2 - target)]
    for n in range(2, 11):
        errs.append(abs(sre2_exact(tensor_product(t_state(), basis_state(n - 1, 0))).m2 - target))
    worst = max(errs)
    assert report(3, worst <= 1e-12, f"max |m2 - log2(4/3)| for T (x) |0..0>, N=1..10: {worst:.2e} <= 1e-12")


def test_4_haar_scaling_law(report):
    lines = []
    ok = True
    samples = 100
    for n in range(2, 13):
        rng = RngSpec(4, n)
        vals = np.array([sre2_exact(haar_random_state(n, rng.generator(s))).m2 for s in range(samples)])
        se = vals.std(ddof=1) / math.sqrt(samples)
        z = (vals.mean() - haar_mean_m2(n)) / se
        ok &= abs(z) <= 3
        lines.append(f"N={n}:z={z:+.2f}")
    assert report(4, ok, f"Haar mean within 3 stderr of log2(2^N+3)-2 ({samples} samples): " + " ".join(lines))


def test_5_xxz_method_identity(report):
    spec = QuenchSpec.xxz(8, J=1.0, delta=0.5, dt=0.05, n_steps=40, initial="neel")
    fast = run_quench(spec)
    slow = run_quench(spec, engine=sre2_brute_force)
    diff = float(np.max(np.abs(fast.samples - slow.samples)))
    grew = fast.m2_mean[-1] > 0.5
    assert report(5, diff <= 1e-9 and grew,
                  f"XXZ N=8 Neel, 40 steps dt=0.05: max pointwise |fwht - brute| = {diff:.2e} <= 1e-9 "
                  f"(final m2 = {fast.m2_mean[-1]:.4f})")


def test_6_tfim_plateau(report):
    spec = QuenchSpec.tfim_lf(10, J=1.0, hx=1.5, hz=1.5, dt=0.1, n_steps=100, samples=30, rng=RngSpec(2026))
    tr = run_quench(spec)
    tail = tr.m2_mean[-(len(tr.times) // 4):].mean()
    haar = haar_mean_m2(10)
    ok = tail < haar and haar - tail <= 0.5
    assert report(6, ok, f"TFIM+LF N=10, 30 samples, t<=10: late mean {tail:.4f} < Haar {haar:.4f}, gap {haar - tail:.4f} <= 0.5")


def test_7_brickwork_saturation(report):
    spec = QuenchSpec.brickwork(10, n_steps=40, samples=20, rng=RngSpec(2026))
    tr = run_quench(spec)
    late = tr.m2_mean[-10:].mean()
    haar = haar_mean_m2(10)
    assert report(7, abs(late - haar) <= 0.1,
                  f"brickwork N=10, 20 samples, 40 layers: late mean {late:.4f} vs {haar:.4f}, |diff| <= 0.1")


def test_8_complexity_scaling(report):
    ns = [8, 10, 12]
    rows, _ = bench(ns, repeats=5, workers=1)
    if rows[-1][1] < 2.0:
        rows, _ = bench(ns + [14], repeats=3, workers=1)
    ratios = [r[2] for r in rows[1:]]
    ok = all(8 <= q <= 32 for q in ratios)
    detail = ", ".join(f"N={r[0]}:{r[1]:.4f}s" for r in rows) + "; ratios " + ", ".join(f"{q:.1f}" for q in ratios)
    assert report(8, ok, f"consecutive timing ratios in [8, 32]: {detail}")


def rel_err(a, b):
    return np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)


def test_9_fwht_algebra(report):
    worst = {"parseval": 0.0, "linearity": 0.0, "conjugation": 0.0, "involution": 0.0, "convolution": 0.0}
    rng = np.random.default_rng(9)
    for n in range(0, 11):
        for _ in range(5):
            u = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
            v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
            a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
            pu = 2**n * np.sum(np.abs(u) ** 2)
            worst["parseval"] = max(worst["parseval"], abs(np.sum(np.abs(fwht(u)) ** 2) - pu) / pu)
            worst["linearity"] = max(worst["linearity"], rel_err(fwht(a * u + b * v), a * fwht(u) + b * fwht(v)))
            worst["conjugation"] = max(worst["conjugation"], rel_err(fwht(np.conj(u)), np.conj(fwht(u))))
            worst["involution"] = max(worst["involution"], rel_err(fwht(fwht(u)), 2**n * u))
            if n <= 6:
                worst["convolution"] = max(worst["convolution"], rel_err(fwht(xor_convolution(u, v)), fwht(u) * fwht(v)))
    ok = all(w <= 1e-10 for w in worst.values())
    assert report(9, ok, "FWHT algebra max relative errors: " + ", ".join(f"{k}={w:.1e}" for k, w in worst.items()))


def _replay_identical(tmp_path, argv, files):
    first = tmp_path / "first"
    assert main(argv + ["--workers", "1", "--out", str(first)]) == 0
    again = tmp_path / "again"
    assert main(["replay", f"{first}.manifest.json", "--workers", "4", "--out", str(again)]) == 0
    return all((tmp_path / f"first.{ext}").read_bytes() == (tmp_path / f"again.{ext}").read_bytes() for ext in files)


def test_10_determinism(report, tmp_path, capsys):
    cases = {
        "compute": (["compute", "--haar", "--n", "9", "--seed", "3"], ["json"]),
        "oracle": (["oracle", "--random-product", "--n", "5", "--seed", "3"], ["json"]),
        "haar-scan": (["haar-scan", "--n-min", "2", "--n-max", "6", "--samples", "10", "--seed", "1"], ["csv"]),
        "quench-xxz": (["quench", "--model", "xxz", "--n", "6", "--steps", "5"], ["csv", "json"]),
        "quench-tfim": (["quench", "--model", "tfim_lf", "--n", "6", "--steps", "5", "--samples", "3", "--seed", "8"], ["csv", "json"]),
        "circuit": (["circuit", "--n", "6", "--steps", "4", "--samples", "3", "--seed", "8"], ["csv", "json"]),
    }
    results = {}
    for name, (argv, files) in cases.items():
        sub = tmp_path / name
        sub.mkdir()
        results[name] = _replay_identical(sub, argv, files)
    capsys.readouterr()
    manifest = json.loads((tmp_path / "circuit" / "again.manifest.json").read_text())
    ok = all(results.values()) and manifest["workers"] == 4
    assert report(10, ok, "replay with workers 1 -> 4 bit-identical: " + ", ".join(f"{k}={v}" for k, v in results.items()))
