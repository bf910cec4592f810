"""Command-line pipeline around the library.

Subcommands: ``moons`` emits synthetic datasets, ``flow`` runs a
gradient flow on a 1D signal or a graph, ``decompose1d`` runs the
recursive scheme on a 1D signal, ``cluster`` runs the spectral
clustering experiments, and ``verify`` re-checks the invariants of a
previously written artifact file.

All artifacts are JSON documents with a top-level ``schema`` version,
a ``kind`` tag, an embedded functional description (so ``verify`` is
self-contained), and a ``meta`` object that isolates the only
non-deterministic field (the timestamp).  Exit codes: 0 success,
1 numerical failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from typing import List, Optional, Tuple

import numpy as np

from .data import (
    LabeledPointSet,
    cluster_from_function,
    clustering_accuracy,
    random_init,
    semi_supervised_init,
    three_moons,
    two_moons,
)
from .flow import (
    DEFAULT_STEP_FRACTION,
    ExtinctionProfile,
    FlowStep,
    FlowTrace,
    extract_profile,
    high_rayleigh_subgradients,
    run_flow,
)
from .functional import (
    Functional,
    GraphTotalVariation,
    ProxConvergenceError,
    ProxSettings,
    Signal,
    TotalVariation1D,
)
from .graph import DisconnectedGraphError, WeightedGraph, build_knn_graph, fiedler_vector
from .scheme import (
    Atom,
    Decomposition,
    SchemeFlowError,
    parseval_report,
    reconstruct,
    run_scheme,
    verify_norm_identity,
)

__all__ = ["main"]

SCHEMA_VERSION = 1


class InputError(Exception):
    """Malformed file or inconsistent command arguments."""


# ---------------------------------------------------------------------------
# file I/O helpers


def _read_signal_csv(path: str) -> np.ndarray:
    """One value per line; a single non-numeric header line is allowed."""
    values: List[float] = []
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line:
                    continue
                try:
                    values.append(float(line.split(",")[0]))
                except ValueError:
                    if lineno == 1:
                        continue  # header
                    raise InputError(
                        f"{path}:{lineno}: expected a number, got {line!r}"
                    ) from None
    except OSError as exc:
        raise InputError(f"cannot read signal file: {exc}") from exc
    if not values:
        raise InputError(f"{path}: no samples found")
    return np.array(values)


def _read_points_csv(path: str) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Rows ``x,y[,label]``; a single header line is allowed."""
    pts: List[Tuple[float, float]] = []
    labels: List[int] = []
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line:
                    continue
                parts = line.split(",")
                try:
                    x, y = float(parts[0]), float(parts[1])
                except (ValueError, IndexError):
                    if lineno == 1:
                        continue
                    raise InputError(
                        f"{path}:{lineno}: expected 'x,y[,label]', got {line!r}"
                    ) from None
                pts.append((x, y))
                if len(parts) > 2:
                    labels.append(int(float(parts[2])))
    except OSError as exc:
        raise InputError(f"cannot read points file: {exc}") from exc
    if not pts:
        raise InputError(f"{path}: no points found")
    if labels and len(labels) != len(pts):
        raise InputError(f"{path}: labels present on some rows only")
    return np.array(pts), (np.array(labels) if labels else None)


def _read_graph_json(path: str) -> WeightedGraph:
    try:
        with open(path) as fh:
            doc = json.load(fh)
        triples = [(int(i), int(j), float(w)) for i, j, w in doc["edges"]]
        return WeightedGraph.from_edge_list(int(doc["n"]), triples)
    except OSError as exc:
        raise InputError(f"cannot read graph file: {exc}") from exc
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: not a graph document: {exc}") from exc


def _write_json(path: str, doc: dict) -> None:
    doc = dict(doc)
    doc["meta"] = {"timestamp": datetime.now(timezone.utc).isoformat()}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# JSON encoding / decoding of library objects


def _functional_doc(fun: Functional) -> dict:
    if isinstance(fun, TotalVariation1D):
        return {"type": "tv1d", "n": fun.n}
    if isinstance(fun, GraphTotalVariation):
        g = fun.graph
        return {
            "type": "graph_tv",
            "n": g.n,
            "edges": [
                [int(i), int(j), float(w)]
                for (i, j), w in zip(g.edges.tolist(), g.weights.tolist())
            ],
        }
    raise InputError(f"cannot serialize functional {type(fun).__name__}")


def _functional_from_doc(doc: dict) -> Functional:
    kind = doc.get("type")
    if kind == "tv1d":
        return TotalVariation1D(int(doc["n"]))
    if kind == "graph_tv":
        triples = [(int(i), int(j), float(w)) for i, j, w in doc["edges"]]
        graph = WeightedGraph.from_edge_list(int(doc["n"]), triples)
        return GraphTotalVariation(graph)
    raise InputError(f"unknown functional type {kind!r}")


def _trace_doc(fun: Functional, trace: FlowTrace) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "kind": "flow_trace",
        "functional": _functional_doc(fun),
        "delta": trace.delta,
        "gap_tol": trace.gap_tol,
        "extinct_at": trace.extinct_at,
        "extinction_threshold": trace.extinction_threshold,
        "warning": trace.warning,
        "initial": trace.initial.values.tolist(),
        "steps": [
            {
                "k": s.k,
                "t": s.t,
                "u": s.u.values.tolist(),
                "p": s.p.values.tolist(),
                "p_norm": s.p_norm,
                "rayleigh": s.rayleigh,
            }
            for s in trace.steps
        ],
    }


def _trace_from_doc(doc: dict, fun: Functional) -> FlowTrace:
    dom = fun.domain_id
    steps = tuple(
        FlowStep(
            k=int(s["k"]),
            t=float(s["t"]),
            u=Signal(s["u"], dom),
            p=Signal(s["p"], dom),
            p_norm=float(s["p_norm"]),
            rayleigh=None if s["rayleigh"] is None else float(s["rayleigh"]),
        )
        for s in doc["steps"]
    )
    return FlowTrace(
        delta=float(doc["delta"]),
        steps=steps,
        extinct_at=doc["extinct_at"],
        gap_tol=float(doc["gap_tol"]),
        initial=Signal(doc["initial"], dom),
        warning=doc.get("warning"),
        extinction_threshold=doc.get("extinction_threshold"),
    )


def _decomposition_doc(fun: Functional, dec: Decomposition) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "kind": "decomposition",
        "functional": _functional_doc(fun),
        "input": dec.input.values.tolist(),
        "input_norm": dec.input_norm,
        "termination": dec.termination,
        "residual": dec.residual.values.tolist(),
        "atoms": [
            {
                "c": a.c,
                "residual_norm_after": a.residual_norm_after,
                "p_star": a.p_star.p_star.values.tolist(),
                "rayleigh": a.p_star.rayleigh,
                "source_step": a.p_star.source_step,
                "eigenvalue": a.p_star.eigenvalue,
            }
            for a in dec.atoms
        ],
    }


def _decomposition_from_doc(doc: dict, fun: Functional) -> Decomposition:
    dom = fun.domain_id
    atoms = tuple(
        Atom(
            c=float(a["c"]),
            p_star=ExtinctionProfile(
                p_star=Signal(a["p_star"], dom),
                rayleigh=float(a["rayleigh"]),
                source_step=int(a["source_step"]),
                eigenvalue=float(a["eigenvalue"]),
            ),
            residual_norm_after=float(a["residual_norm_after"]),
        )
        for a in doc["atoms"]
    )
    return Decomposition(
        atoms=atoms,
        residual=Signal(doc["residual"], dom),
        input=Signal(doc["input"], dom),
        input_norm=float(doc["input_norm"]),
        termination=str(doc["termination"]),
    )


# ---------------------------------------------------------------------------
# subcommands


def _cmd_moons(args) -> int:
    maker = two_moons if args.dataset == "two" else three_moons
    n_per = args.n_per_moon
    if n_per is None:
        n_per = 300 if args.dataset == "two" else 250
    ps = maker(n_per, args.noise_var, args.seed)
    with open(args.out, "w") as fh:
        fh.write("x,y,label\n")
        for (x, y), lab in zip(ps.points, ps.labels):
            fh.write(f"{float(x)!r},{float(y)!r},{int(lab)}\n")
    print(
        f"wrote {ps.n} points ({args.dataset} moons, noise_var={args.noise_var}, "
        f"seed={args.seed}) to {args.out}"
    )
    return 0


# The library default of 10_000 inner iterations suits one-off proximal
# calls; the last flow step before extinction is a near-feasibility
# problem on which the splitting solver needs a larger budget before
# the zero-prox certificate takes over, so the command-line drivers
# raise the cap.
DEFAULT_MAX_INNER_ITERS = 50_000


def _settings_from(args) -> ProxSettings:
    gap_tol = getattr(args, "gap_tol", None)
    max_inner = getattr(args, "max_inner_iters", None) or DEFAULT_MAX_INNER_ITERS
    if gap_tol is None:
        return ProxSettings(max_inner_iters=max_inner)
    return ProxSettings(gap_tol=gap_tol, max_inner_iters=max_inner)


def _cmd_flow(args) -> int:
    values = _read_signal_csv(args.input)
    if args.graph:
        graph = _read_graph_json(args.graph)
        if graph.n != values.size:
            raise InputError(
                f"signal has {values.size} samples but graph has {graph.n} vertices"
            )
        fun: Functional = GraphTotalVariation(graph)
    else:
        fun = TotalVariation1D(values.size)
    trace = run_flow(
        fun,
        Signal(values, fun.domain_id),
        delta=args.delta,
        extinction_threshold=args.threshold,
        max_steps=args.max_steps,
        settings=_settings_from(args),
    )
    if args.out:
        _write_json(args.out, _trace_doc(fun, trace))
        print(f"trace written to {args.out}")
    print(f"steps: {len(trace.steps)}, delta: {trace.delta:.6g}")
    if not trace.extinct:
        print(f"numerical failure: {trace.warning}", file=sys.stderr)
        return 1
    print(f"extinction time: {trace.extinction_time:.6g} (step {trace.extinct_at})")
    if len(trace.steps) >= 2:
        profile = extract_profile(fun, trace)
        print(
            f"extinction profile: rayleigh {profile.rayleigh:.8f}, "
            f"eigenvalue {profile.eigenvalue:.6g}, from step {profile.source_step}"
        )
    return 0


def _cmd_decompose1d(args) -> int:
    values = _read_signal_csv(args.input)
    fun = TotalVariation1D(values.size)
    signal = Signal(values, fun.domain_id)
    try:
        dec = run_scheme(
            fun,
            signal,
            max_atoms=args.max_atoms,
            rel_residual_tol=args.rel_residual_tol,
            delta=args.delta,
            settings=_settings_from(args),
        )
    except SchemeFlowError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    print(
        f"atoms: {len(dec.atoms)}, termination: {dec.termination}, "
        f"residual norm: {dec.residual.norm:.6g} (input norm {dec.input_norm:.6g})"
    )
    for i, atom in enumerate(dec.atoms):
        print(
            f"  atom {i}: c={atom.c:+.6g} eigenvalue={atom.p_star.eigenvalue:.6g} "
            f"rayleigh={atom.p_star.rayleigh:.8f} "
            f"residual={atom.residual_norm_after:.6g}"
        )
    if dec.atoms:
        ratios = parseval_report(dec.input, dec)
        print(f"energy ratio after last atom: {ratios[-1]:.8f}")
    identity = verify_norm_identity(dec)
    print(f"norm identity max error: {identity.max_error:.3e}")
    if args.out:
        _write_json(args.out, _decomposition_doc(fun, dec))
        print(f"decomposition written to {args.out}")
    if args.atoms_dir:
        os.makedirs(args.atoms_dir, exist_ok=True)
        for i, atom in enumerate(dec.atoms):
            path = os.path.join(args.atoms_dir, f"atom_{i:03d}.csv")
            np.savetxt(path, atom.p_star.p_star.values)
        for upto in range(1, len(dec.atoms) + 1):
            path = os.path.join(args.atoms_dir, f"reconstruction_{upto:03d}.csv")
            np.savetxt(path, reconstruct(dec, upto).values)
        print(f"per-atom files written to {args.atoms_dir}")
    return 0


def _cluster_one_seed(args, seed: int):
    """Run one seeded clustering experiment; returns a result dict."""
    if args.points:
        points, truth = _read_points_csv(args.points)
        noise_var = None
    else:
        maker = two_moons if args.dataset == "two" else three_moons
        n_per = args.n_per_moon
        if n_per is None:
            n_per = 300 if args.dataset == "two" else 250
        ps = maker(n_per, args.noise_var, seed)
        points, truth = ps.points, ps.labels
        noise_var = args.noise_var
    k_clusters = args.clusters
    if k_clusters is None:
        k_clusters = 3 if args.dataset == "three" else 2
    graph = build_knn_graph(
        points,
        args.k,
        "auto" if args.kernel_scale is None else args.kernel_scale,
        args.kernel_scale_mult,
    )
    result = {
        "seed": seed,
        "method": args.method,
        "n": int(points.shape[0]),
        "noise_var": noise_var,
        "clusters": k_clusters,
    }

    if args.method == "fiedler":
        vector = fiedler_vector(graph)
        values = vector.values
        labels = cluster_from_function(vector, k_clusters, seed)
    else:
        fun = GraphTotalVariation(graph)
        if args.method == "profile-semisup":
            if truth is None:
                raise InputError(
                    "profile-semisup needs ground-truth labels in the dataset"
                )
            ps_like = LabeledPointSet(points, truth, seed=seed, noise_var=noise_var or 0.0)
            init = semi_supervised_init(ps_like, args.fraction, seed)
        else:
            init = random_init(points.shape[0], seed)
        datum = Signal(init.values, fun.domain_id)
        delta = args.delta
        if delta is None and args.delta_mult != 1.0:
            f0 = fun.null_project(datum)
            delta = (
                args.delta_mult
                * DEFAULT_STEP_FRACTION
                * f0.norm
                / np.sqrt(graph.n)
            )
        trace = run_flow(
            fun,
            datum,
            delta=delta,
            max_steps=args.max_steps,
            settings=_settings_from(args),
        )
        if not trace.extinct:
            result["error"] = trace.warning
            return result
        if args.method == "high-rayleigh":
            entries = high_rayleigh_subgradients(
                fun, trace, threshold=args.rayleigh_threshold
            )
            profile = extract_profile(fun, trace)
            result["entries"] = []
            best = None
            for step, p_hat, ray in entries:
                entry_labels = cluster_from_function(p_hat, k_clusters, seed)
                entry = {
                    "step": step,
                    "rayleigh": ray,
                    "norm": float(np.linalg.norm(p_hat.values)),
                }
                if truth is not None:
                    entry["accuracy"] = clustering_accuracy(entry_labels, truth)
                result["entries"].append(entry)
                if best is None or entry.get("accuracy", 0.0) > best[0]:
                    best = (entry.get("accuracy", 0.0), entry_labels, p_hat.values)
            if best is None:
                result["error"] = "no subgradients above the Rayleigh threshold"
                return result
            rel = 0.0
            if entries:
                last = entries[-1][1].values
                prof = profile.p_star.values
                denom = max(float(np.linalg.norm(prof)), 1e-300)
                rel = float(np.linalg.norm(last - prof)) / denom
            result["last_matches_profile_rel"] = rel
            values, labels = best[2], best[1]
        else:
            profile = extract_profile(fun, trace)
            result["profile_rayleigh"] = profile.rayleigh
            result["profile_eigenvalue"] = profile.eigenvalue
            values = profile.p_star.values
            labels = cluster_from_function(profile.p_star, k_clusters, seed)

    result["labels"] = labels
    result["values"] = values
    if truth is not None:
        result["truth"] = truth
        result["accuracy"] = clustering_accuracy(labels, truth)
    result["points"] = points
    return result


def _cmd_cluster(args) -> int:
    seeds = args.seeds
    workers = min(len(seeds), os.cpu_count() or 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: _cluster_one_seed(args, s), seeds))
    else:
        results = [_cluster_one_seed(args, s) for s in seeds]

    failed = False
    summary_runs = []
    for res in results:
        seed = res["seed"]
        if "error" in res:
            failed = True
            print(f"seed {seed}: numerical failure: {res['error']}", file=sys.stderr)
            summary_runs.append({"seed": seed, "error": res["error"]})
            continue
        acc = res.get("accuracy")
        acc_text = "n/a" if acc is None else f"{acc:.4f}"
        extra = ""
        if "profile_rayleigh" in res:
            extra = f", profile rayleigh {res['profile_rayleigh']:.6f}"
        if "entries" in res:
            extra = f", {len(res['entries'])} high-rayleigh subgradients"
        print(f"seed {seed}: accuracy {acc_text}{extra}")
        run = {k: res[k] for k in ("seed", "method", "n", "clusters")}
        for key in (
            "accuracy",
            "profile_rayleigh",
            "profile_eigenvalue",
            "entries",
            "last_matches_profile_rel",
            "noise_var",
        ):
            if res.get(key) is not None:
                run[key] = res[key]
        summary_runs.append(run)
        if args.out:
            path = args.out
            if len(seeds) > 1:
                root, ext = os.path.splitext(args.out)
                path = f"{root}_s{seed}{ext or '.csv'}"
            truth = res.get("truth")
            with open(path, "w") as fh:
                fh.write("x,y,true_label,pred_label,eigenfunction_value\n")
                for i, (x, y) in enumerate(res["points"]):
                    t = "" if truth is None else int(truth[i])
                    fh.write(
                        f"{float(x)!r},{float(y)!r},{t},"
                        f"{int(res['labels'][i])},"
                        f"{float(res['values'][i])!r}\n"
                    )
    accs = [r["accuracy"] for r in summary_runs if "accuracy" in r]
    if accs:
        print(
            f"mean accuracy {np.mean(accs):.4f} over {len(accs)} seeds "
            f"(min {min(accs):.4f}, max {max(accs):.4f})"
        )
    if args.summary:
        _write_json(
            args.summary,
            {
                "schema": SCHEMA_VERSION,
                "kind": "cluster_summary",
                "runs": summary_runs,
            },
        )
        print(f"summary written to {args.summary}")
    return 1 if failed else 0


def _check(name: str, ok: bool, detail: str = "") -> bool:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"  {status} {name}{suffix}")
    return ok


def _verify_trace(doc: dict) -> int:
    fun = _functional_from_doc(doc["functional"])
    trace = _trace_from_doc(doc, fun)
    delta = trace.delta
    slack = 10.0 * trace.gap_tol
    ok = True

    prev = trace.initial.values
    worst = 0.0
    for s in trace.steps:
        drift = float(np.max(np.abs(prev - delta * s.p.values - s.u.values)))
        worst = max(worst, drift)
        prev = s.u.values
    scale = max(trace.initial.norm, 1e-300)
    ok &= _check(
        "steps satisfy u_k = u_{k-1} - delta p_k",
        worst <= 1e-12 * scale,
        f"max drift {worst:.2e}",
    )

    norms = [s.p_norm for s in trace.steps]
    # The 1-D solver is exact; iterative graph proxes only guarantee a
    # duality gap below gap_tol * 0.5||input||^2, which bounds the iterate
    # error by sqrt(gap_tol) * ||input|| (strong convexity), so recorded
    # subgradients can drift from the exact ones by a multiple of that
    # over delta.
    if doc["functional"]["type"] == "tv1d":
        eps = 0.0
    else:
        u_max = max(
            [trace.initial.norm] + [s.u.norm for s in trace.steps]
        )
        eps = 4.0 * np.sqrt(trace.gap_tol) * u_max / delta
    mono = all(
        b <= a * (1.0 + slack) + slack + eps
        for a, b in zip(norms, norms[1:])
    )
    ok &= _check("subgradient norms non-increasing", mono)

    rays = [s.rayleigh for s in trace.steps if s.rayleigh is not None]
    ray_slack = slack
    if eps > 0.0 and norms:
        ray_slack += 3.0 * eps / max(min(norms), 1e-300)
    ok &= _check(
        "averaged rayleigh quotients at most one",
        all(r <= 1.0 + ray_slack for r in rays),
        f"max {max(rays):.8f}" if rays else "none defined",
    )

    if trace.extinct and trace.steps and trace.extinction_threshold:
        bound = 2.0 * delta * trace.extinction_threshold
        ok &= _check(
            "telescoping residual below threshold",
            trace.steps[-1].u.norm <= bound,
            f"{trace.steps[-1].u.norm:.2e} <= {bound:.2e}",
        )
    if trace.extinct and len(trace.steps) >= 2:
        profile = extract_profile(fun, trace)
        report = fun.subgradient_membership(profile.p_star, profile.p_star, tol=1e-4)
        ok &= _check(
            "extinction profile is a subgradient of itself",
            bool(report),
            f"certificate {report.certificate}",
        )
    return 0 if ok else 1


def _verify_decomposition(doc: dict) -> int:
    fun = _functional_from_doc(doc["functional"])
    dec = _decomposition_from_doc(doc, fun)
    ok = True

    identity = verify_norm_identity(dec)
    ok &= _check(
        "residual norm identity per step",
        identity.max_error <= 1e-10,
        f"max error {identity.max_error:.2e}",
    )

    input_sq = dec.input_norm**2
    gains = 0.0
    f_n = dec.input.values
    bounded = True
    for atom in dec.atoms:
        p = atom.p_star.p_star.values
        gains += float(np.dot(f_n, p)) ** 2 / float(np.dot(p, p))
        bounded &= gains <= input_sq * (1.0 + 1e-12) + 1e-30
        f_n = f_n - atom.c * p
    ok &= _check(
        "projection gains never exceed the input energy",
        bounded,
        f"sum {gains:.6g} vs {input_sq:.6g}",
    )

    recon = reconstruct(dec).values + dec.residual.values
    err = float(np.linalg.norm(recon - dec.input.values))
    ok &= _check(
        "atoms plus residual reconstruct the input",
        err <= 1e-10 * max(dec.input_norm, 1e-300),
        f"error {err:.2e}",
    )

    members = all(
        bool(fun.subgradient_membership(a.p_star.p_star, a.p_star.p_star, tol=1e-3))
        for a in dec.atoms
    )
    ok &= _check("every atom is a subgradient of itself", members)
    return 0 if ok else 1


def _cmd_verify(args) -> int:
    try:
        with open(args.input) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read artifact: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.input}: not JSON: {exc}") from exc
    if doc.get("schema") != SCHEMA_VERSION:
        raise InputError(f"unsupported schema {doc.get('schema')!r}")
    kind = doc.get("kind")
    print(f"verifying {kind} artifact {args.input}")
    if kind == "flow_trace":
        return _verify_trace(doc)
    if kind == "decomposition":
        return _verify_decomposition(doc)
    raise InputError(f"unknown artifact kind {kind!r}")


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eigenflow",
        description=(
            "Nonlinear eigenfunctions of one-homogeneous functionals via "
            "gradient-flow extinction profiles"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moons", help="emit a synthetic moons dataset as CSV")
    p.add_argument("--dataset", choices=["two", "three"], default="two")
    p.add_argument("--n-per-moon", type=int, default=None)
    p.add_argument("--noise-var", type=float, default=0.015)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_moons)

    p = sub.add_parser("flow", help="run a gradient flow on a signal")
    p.add_argument("--input", required=True, help="signal CSV, one value per line")
    p.add_argument("--graph", help="graph JSON; omit for a 1D grid signal")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--gap-tol", type=float, default=None)
    p.add_argument("--max-inner-iters", type=int, default=None)
    p.add_argument("--out", help="write the trace as JSON")
    p.set_defaults(func=_cmd_flow)

    p = sub.add_parser("decompose1d", help="decompose a 1D signal into atoms")
    p.add_argument("--input", required=True)
    p.add_argument("--max-atoms", type=int, default=200)
    p.add_argument("--rel-residual-tol", type=float, default=1e-2)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--gap-tol", type=float, default=None)
    p.add_argument("--max-inner-iters", type=int, default=None)
    p.add_argument("--out", help="write the decomposition as JSON")
    p.add_argument("--atoms-dir", help="write per-atom and reconstruction CSVs")
    p.set_defaults(func=_cmd_decompose1d)

    p = sub.add_parser("cluster", help="spectral clustering experiments")
    p.add_argument("--dataset", choices=["two", "three"], default="two")
    p.add_argument("--points", help="points CSV (x,y[,label]); overrides --dataset")
    p.add_argument(
        "--method",
        required=True,
        choices=["fiedler", "profile-random", "profile-semisup", "high-rayleigh"],
    )
    p.add_argument("--k", type=int, default=10, help="k-nearest-neighbor count")
    p.add_argument("--n-per-moon", type=int, default=None)
    p.add_argument("--noise-var", type=float, default=0.015)
    p.add_argument("--clusters", type=int, default=None)
    p.add_argument("--fraction", type=float, default=0.05)
    p.add_argument("--rayleigh-threshold", type=float, default=0.9)
    p.add_argument(
        "--kernel-scale", type=float, default=None,
        help="absolute Gaussian bandwidth; omit for the auto policy",
    )
    p.add_argument(
        "--kernel-scale-mult", type=float, default=1.0,
        help="factor on the resolved bandwidth (tighten with < 1)",
    )
    p.add_argument("--delta", type=float, default=None)
    p.add_argument(
        "--delta-mult", type=float, default=1.0,
        help="factor on the default flow step when --delta is omitted",
    )
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--gap-tol", type=float, default=None)
    p.add_argument("--max-inner-iters", type=int, default=None)
    p.add_argument("--seeds", type=int, nargs="+", default=[0])
    p.add_argument("--out", help="labels CSV (suffixed per seed when several)")
    p.add_argument("--summary", help="write a JSON summary of all seeds")
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("verify", help="re-check invariants of an artifact file")
    p.add_argument("--input", required=True)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (ProxConvergenceError, DisconnectedGraphError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
