"""Command-line interface: ``xorsre {compute,oracle,haar-scan,quench,circuit,bench,replay}``.

Every command that writes files (``--out PREFIX``) also writes
``PREFIX.manifest.json``; ``xorsre replay`` re-runs a manifest.

Exit codes: 0 success, 2 invalid input, 3 resource guard, 4 internal
consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import platform
import statistics
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from . import states as st
from .dynamics import BRICKWORK, OPEN, PERIODIC, TFIM_LF, XXZ, QuenchSpec, run_quench
from .engine import check_memory, default_workers, haar_mean_m2, sre2_exact
from .errors import ConsistencyError, InvalidInputError, SREError
from .oracle import MAX_ORACLE_QUBITS, sre2_brute_force

TRACE_CSV_VERSION = 1
ORACLE_TOL = 1e-9


# -- helpers -----------------------------------------------------------------


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _fmt(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return repr(float(x))


def _write_csv(rows, header, path=None, comment=None):
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    text = buf.getvalue()
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
    return text


def load_schema(name):
    """Shipped JSON schema: ``"result"``, ``"trace"`` or ``"manifest"``."""
    text = resources.files("xorsre").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def _write_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _rng(args):
    return st.RngSpec(args.seed, args.stream)


def _state_from_args(args):
    if args.file:
        return st.load_state(args.file)
    if args.n is None:
        raise InvalidInputError("--n is required with a generated state")
    check_memory(args.n, args.workers)
    if args.basis is not None:
        return st.basis_state(args.n, args.basis)
    if args.haar:
        return st.haar_random_state(args.n, _rng(args))
    if args.neel:
        return st.neel_state(args.n)
    if args.random_product:
        return st.random_product_state(args.n, _rng(args), args.angles)
    return st.tensor_product(st.t_state(), st.basis_state(args.n - 1, 0)) if args.n > 1 else st.t_state()


def _write_manifest(args, argv, outputs, wall, extra=None):
    if not args.out:
        return None
    manifest = {
        "schema": "xorsre-manifest",
        "version": 1,
        "command": args.command,
        "argv": argv,
        "params": {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)},
        "rng": {"seed": args.seed, "stream": args.stream} if hasattr(args, "seed") else None,
        "code_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "workers": getattr(args, "workers", None),
        "wall_seconds": wall,
        "outputs": [str(p) for p in outputs],
    }
    if extra:
        manifest.update(extra)
    path = Path(f"{args.out}.manifest.json")
    _write_json(manifest, path)
    return path


def _plot_script(path, csv_path, ylabel, theory=None):
    lines = [
        "set datafile separator ','",
        f"set ylabel '{ylabel}'",
        f"plot '{Path(csv_path).name}' skip 2 using 1:2:3 with yerrorbars title 'M2'",
    ]
    if theory is not None:
        lines[-1] += f", {theory!r} with lines dashtype 2 title 'Haar'"
    Path(path).write_text("\n".join(lines) + "\n")


# -- commands -----------------------------------------------------------------


def cmd_compute(args, argv):
    psi = _state_from_args(args)
    t0 = time.perf_counter()
    res = sre2_exact(psi, args.workers)
    return _emit_result(args, argv, res, time.perf_counter() - t0)


def cmd_oracle(args, argv):
    psi = _state_from_args(args)
    t0 = time.perf_counter()
    guard = None if args.allow_large else args.max_qubits
    res = sre2_brute_force(psi, max_qubits=guard)
    return _emit_result(args, argv, res, time.perf_counter() - t0)


def _emit_result(args, argv, res, wall):
    out = res.to_dict()
    print(json.dumps(out, sort_keys=True))
    if args.out:
        path = Path(f"{args.out}.json")
        # timing lives in the manifest so the data file replays bit-for-bit
        _write_json({k: v for k, v in out.items() if k not in ("wall_seconds", "workers")}, path)
        _write_manifest(args, argv, [path], wall)
    return 0


def cmd_haar_scan(args, argv):
    t0 = time.perf_counter()
    rng = _rng(args)
    rows = []
    for n in range(args.n_min, args.n_max + 1):
        check_memory(n, args.workers)
        vals = np.array([
            sre2_exact(st.haar_random_state(n, rng.generator(n, s)), args.workers).m2
            for s in range(args.samples)
        ])
        stderr = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else float("nan")
        rows.append((n, float(vals.mean()), stderr, haar_mean_m2(n)))
    header = ["N", "mean", "stderr", "theory"]
    comment = f"xorsre haar-scan v{TRACE_CSV_VERSION}"
    if args.out:
        csv_path = Path(f"{args.out}.csv")
        _write_csv(rows, header, csv_path, comment)
        outputs = [csv_path]
        if args.plot:
            gp = Path(f"{args.out}.gp")
            _plot_script(gp, csv_path, "M2 (bits)")
            outputs.append(gp)
        _write_manifest(args, argv, outputs, time.perf_counter() - t0)
    else:
        _write_csv(rows, header, None, comment)
    return 0


def _spec_from_args(args, model):
    steps = args.steps
    if model != BRICKWORK and args.t_max is not None:
        steps = int(round(args.t_max / args.dt))
    kw = dict(
        n_steps=steps,
        samples=args.samples,
        rng=_rng(args),
    )
    if model == BRICKWORK:
        return QuenchSpec.brickwork(args.n, **kw)
    kw.update(
        boundary=args.boundary,
        dt=args.dt,
        krylov_dim=args.krylov_dim,
        angles=args.angles,
    )
    if args.initial_file:
        kw.update(initial="file", initial_path=args.initial_file)
    elif args.initial:
        kw["initial"] = args.initial
    if model == XXZ:
        return QuenchSpec.xxz(args.n, J=args.J, delta=args.delta, **kw)
    return QuenchSpec.tfim_lf(args.n, J=args.J, hx=args.hx, hz=args.hz, **kw)


def _emit_trace(args, argv, trace, t0, extra=None):
    header = ["t", "mean", "stderr"] + [f"sample_{k}" for k in range(trace.samples.shape[0])]
    rows = [
        [float(t), float(m), float(e), *map(float, trace.samples[:, i])]
        for i, (t, m, e) in enumerate(zip(trace.times, trace.m2_mean, trace.m2_stderr))
    ]
    comment = f"xorsre trace v{TRACE_CSV_VERSION}"
    payload = trace.to_dict()
    if extra:
        payload.update(extra)
    if not args.out:
        _write_csv(rows, header, None, comment)
        if extra:
            print(json.dumps(extra, sort_keys=True), file=sys.stderr)
        return
    csv_path = Path(f"{args.out}.csv")
    json_path = Path(f"{args.out}.json")
    _write_csv(rows, header, csv_path, comment)
    _write_json(payload, json_path)
    outputs = [csv_path, json_path]
    if args.plot:
        gp = Path(f"{args.out}.gp")
        _plot_script(gp, csv_path, "M2 (bits)", haar_mean_m2(trace.spec.n_qubits))
        outputs.append(gp)
    _write_manifest(args, argv, outputs, time.perf_counter() - t0)
    summary = {"final_mean": float(trace.m2_mean[-1]), "outputs": [str(p) for p in outputs]}
    if extra:
        summary.update(extra)
    print(json.dumps(summary, sort_keys=True))


def cmd_quench(args, argv):
    t0 = time.perf_counter()
    spec = _spec_from_args(args, args.model)
    check_memory(spec.n_qubits, args.workers)
    trace = run_quench(spec, engine_workers=args.workers)
    extra = None
    if args.oracle_check:
        ref = run_quench(spec, engine=sre2_brute_force)
        diff = float(np.max(np.abs(ref.samples - trace.samples)))
        extra = {"oracle_max_abs_diff": diff, "oracle_tolerance": ORACLE_TOL}
    _emit_trace(args, argv, trace, t0, extra)
    if extra and not extra["oracle_max_abs_diff"] <= ORACLE_TOL:
        raise ConsistencyError(
            f"engine and oracle traces differ by {extra['oracle_max_abs_diff']:.3e} > {ORACLE_TOL:g}"
        )
    return 0


def cmd_circuit(args, argv):
    t0 = time.perf_counter()
    spec = _spec_from_args(args, BRICKWORK)
    check_memory(spec.n_qubits, args.workers)
    trace = run_quench(spec, engine_workers=args.workers)
    _emit_trace(args, argv, trace, t0)
    return 0


def bench(n_list, repeats=3, workers=1, seed=0):
    """Median wall time of one sre2_exact call per N; returns rows and fitted slope."""
    rows = []
    prev = None
    # compile the kernels before timing anything
    sre2_exact(st.haar_random_state(2, seed), 1)
    for n in n_list:
        check_memory(n, workers)
        psi = st.haar_random_state(n, st.RngSpec(seed).generator(n))
        times = []
        for _ in range(repeats):
            t = time.perf_counter()
            sre2_exact(psi, workers, memory_check=False)
            times.append(time.perf_counter() - t)
        med = statistics.median(times)
        rows.append((n, med, med / prev if prev else float("nan")))
        prev = med
    slope = float("nan")
    if len(rows) > 1:
        ns = np.array([r[0] for r in rows], dtype=float)
        slope = float(np.polyfit(ns, np.log2([r[1] for r in rows]), 1)[0])
    return rows, slope


def cmd_bench(args, argv):
    t0 = time.perf_counter()
    rows, slope = bench(args.n, args.repeats, args.workers, args.seed)
    header = ["N", "median_seconds", "ratio"]
    if args.out:
        csv_path = Path(f"{args.out}.csv")
        _write_csv(rows, header, csv_path, f"xorsre bench v{TRACE_CSV_VERSION}")
        _write_manifest(args, argv, [csv_path], time.perf_counter() - t0, {"log2_time_slope": slope})
    else:
        _write_csv(rows, header)
    ns = [r[0] for r in rows]
    model = [2 + math.log2((n + 1) / n) for n in ns[:-1]] if len(ns) > 1 else []
    print(
        f"fitted log2(time) slope per unit N: {slope:.3f} "
        f"(O(N 4^N) model: 2 + log2((N+1)/N) = {', '.join(f'{m:.3f}' for m in model)})",
        file=sys.stderr,
    )
    return 0


def cmd_replay(args, argv):
    manifest = json.loads(Path(args.manifest).read_text())
    if manifest.get("schema") != "xorsre-manifest":
        raise InvalidInputError(f"{args.manifest} is not an xorsre manifest")
    new_argv = list(manifest["argv"])
    new_argv = _set_option(new_argv, "--out", args.out)
    if args.workers is not None:
        new_argv = _set_option(new_argv, "--workers", str(args.workers))
    return main(new_argv)


def _set_option(argv, flag, value):
    out = []
    skip = False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok == flag:
            skip = True
            continue
        if tok.startswith(flag + "="):
            continue
        out.append(tok)
    return out + [flag, value]


# -- parser -------------------------------------------------------------------


def _add_common(p, seed=True):
    p.add_argument("--workers", type=int, default=None,
                   help="worker threads (default: $XORSRE_WORKERS or CPU count)")
    p.add_argument("--out", default=None, help="output prefix; writes PREFIX.* plus a manifest")
    if seed:
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--stream", type=int, default=0)


def _add_state_source(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--file", help="state file (binary, or .jsonl text)")
    src.add_argument("--basis", type=int, help="computational basis index")
    src.add_argument("--haar", action="store_true", help="Haar-random state")
    src.add_argument("--neel", action="store_true")
    src.add_argument("--random-product", action="store_true")
    src.add_argument("--t-state", action="store_true", help="T state on qubit 0, rest |0>")
    p.add_argument("--n", type=int, help="number of qubits for generated states")
    p.add_argument("--angles", choices=[st.UNIFORM, st.SPHERE], default=st.UNIFORM)


def _add_dynamics(p, hamiltonian=True):
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--steps", type=int, default=40, help="time steps (circuit layers for brickwork)")
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--plot", action="store_true", help="also write a gnuplot script")
    if hamiltonian:
        p.add_argument("--t-max", type=float, default=None, help="overrides --steps as round(t_max/dt)")
        p.add_argument("--dt", type=float, default=0.05)
        p.add_argument("--krylov-dim", type=int, default=30)
        p.add_argument("--boundary", choices=[PERIODIC, OPEN], default=PERIODIC)
        p.add_argument("--J", type=float, default=1.0)
        p.add_argument("--initial", choices=["neel", "random_product", "all_up"], default=None)
        p.add_argument("--initial-file", default=None)
        p.add_argument("--angles", choices=[st.UNIFORM, st.SPHERE], default=st.UNIFORM)


def build_parser():
    parser = argparse.ArgumentParser(prog="xorsre", description="Exact stabilizer Renyi entropy M2")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="M2 of one state via XOR-FWHT")
    _add_state_source(p)
    _add_common(p)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("oracle", help="M2 of one state by brute-force Pauli enumeration")
    _add_state_source(p)
    _add_common(p)
    p.add_argument("--max-qubits", type=int, default=MAX_ORACLE_QUBITS)
    p.add_argument("--allow-large", action="store_true", help="disable the qubit guard")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("haar-scan", help="Haar-ensemble mean M2 versus N")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--plot", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_haar_scan)

    p = sub.add_parser("quench", help="M2 after a Hamiltonian quench (Krylov propagation)")
    p.add_argument("--model", choices=[XXZ, TFIM_LF], default=XXZ)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--hx", type=float, default=1.5)
    p.add_argument("--hz", type=float, default=1.5)
    p.add_argument("--oracle-check", action="store_true",
                   help="recompute every point by brute force and compare")
    _add_dynamics(p)
    _add_common(p)
    p.set_defaults(func=cmd_quench)

    p = sub.add_parser("circuit", help="M2 under a brickwork Haar random circuit")
    _add_dynamics(p, hamiltonian=False)
    _add_common(p)
    p.set_defaults(func=cmd_circuit)

    p = sub.add_parser("bench", help="time sre2_exact versus N")
    p.add_argument("--n", type=_int_list, default=[8, 10, 12])
    p.add_argument("--repeats", type=int, default=3)
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", required=True, help="output prefix for the replayed run")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "replay" and args.workers is None:
        args.workers = default_workers()
    if args.command != "replay":
        argv = _set_option(argv, "--workers", str(args.workers))
    if args.command == "quench" and args.model != XXZ:
        args.delta = None
    if args.command == "quench" and args.model != TFIM_LF:
        args.hx = args.hz = None
    try:
        return args.func(args, argv)
    except SREError as exc:
        print(f"xorsre: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
