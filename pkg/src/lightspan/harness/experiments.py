"""Pipeline runs behind the CLI subcommands.

Every run is a grid of points times a seed list. Rows come back in
(grid index, seed) order whatever the worker count, failures are rows with
an ``error_code``, and wall-clock times go to a separate timings file so the
CSV/JSON reports are byte-identical across repeats.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import stats

from .. import io as lio
from ..construction import (
    ConstructionParams,
    epsilon_for_base,
    plan_from_target,
    predicted_lightness,
    prune_light_cycles,
    run_construction,
    surviving_fraction,
)
from ..errors import (
    CertificationError,
    ConfigError,
    GenerationError,
    InvariantViolation,
    LightspanError,
    ParameterError,
    RegularizationError,
    StructuralError,
)
from ..girth_graphs import GENERATORS, GirthGraph, regularize
from ..graph import lightness, weighted_girth
from ..spanners import greedy_spanner, upper_bound_lightness
from .config import BaseSpec, ExperimentConfig, parse_base
from .montecarlo import cycle_base, run_point

SWEEP_COLUMNS = (
    "grid_index", "seed", "base", "k", "n", "base_edges", "N", "epsilon",
    "status", "error_code", "error",
    "pruned_edges", "surviving_fraction", "survival_flag",
    "certificate", "threshold", "lightness", "predicted_lightness",
    "upper_bound_lightness", "gamma_estimate", "rate_eps_n", "rate_n",
)

COMPARE_COLUMNS = (
    "grid_index", "seed", "base", "k", "n", "N", "epsilon", "stretch",
    "status", "error_code", "error",
    "h_edges", "kept_edges", "kept_fraction", "base_kept_fraction",
    "lightness", "predicted_lightness", "upper_bound_lightness", "gamma_estimate",
)

MONTECARLO_COLUMNS = (
    "grid_index", "seed", "epsilon", "cycle_length", "trials", "hits",
    "estimate", "wilson_low", "wilson_high", "exact", "bound", "scaled",
)


def frac(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def error_code(exc: BaseException) -> str:
    if isinstance(exc, CertificationError):
        return "certification"
    if isinstance(exc, InvariantViolation):
        return "invariant"
    if isinstance(exc, (GenerationError, RegularizationError, StructuralError)):
        return "generation"
    if isinstance(exc, (ParameterError, ConfigError)):
        return "config"
    return "error"


# ----------------------------------------------------------------------
# bases and grid points


def make_base(spec: BaseSpec, seed: Optional[int] = None, n: Optional[int] = None) -> GirthGraph:
    kw = spec.kwargs
    if n is not None and spec.name == "random-alteration":
        kw.setdefault("n", str(n))
    try:
        if spec.name == "cycle":
            return cycle_base(int(kw["length"]))
        gen = GENERATORS[spec.name]
        if spec.name == "random-alteration":
            # the construction needs a bipartite base: regularize it
            kw.setdefault("kappa", "1")
            kw["seed"] = int(kw.get("seed", seed if seed is not None else 0))
            return regularize(gen(**kw), kw["seed"])
        kw.pop("seed", None)
        return gen(**kw)
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"base {spec}: missing or bad parameter ({exc})") from None
    except ValueError as exc:
        if isinstance(exc, LightspanError):
            raise
        raise ConfigError(f"base {spec}: {exc}") from None


def grid_points(cfg: ExperimentConfig) -> list[tuple]:
    """(base spec, epsilon or None, n_target or None) in a fixed order."""
    if cfg.epsilons and cfg.n_targets:
        raise ConfigError("give either epsilon or n_target, not both")
    if not cfg.bases:
        if cfg.n_targets:
            bases = (parse_base("random-alteration:kappa=%d" % (cfg.k - 1)),)
        else:
            raise ConfigError("no base graph given")
    else:
        bases = cfg.bases
    eps = cfg.epsilons or (None,)
    targets = cfg.n_targets or (None,)
    return [(b, e, t) for b in bases for e in eps for t in targets]


def resolve(cfg_k: int, constants: dict, spec: BaseSpec, eps, n_target, seed):
    """Base graph and epsilon for one grid point."""
    c = constants["epsilon_constant"]
    n = None
    if n_target is not None:
        eps, n, _ = plan_from_target(n_target, cfg_k, 0, c)
    base = make_base(spec, seed, n)
    if eps is None:
        eps = epsilon_for_base(base.n, cfg_k, c)
    return base, Fraction(eps)


def _rates(N: int, k: int, eps: Fraction) -> dict:
    gamma = float(N) ** (1 + 1 / k)
    return {
        "upper_bound_lightness": upper_bound_lightness(N, k, eps, gamma),
        "gamma_estimate": gamma,
        "rate_eps_n": float(eps) ** (-1 / k) * float(N) ** (1 / k),
        "rate_n": float(N) ** (1 / k + 1 / (k * (2 * k - 1))),
    }


def _blank(columns, **fields) -> dict:
    row = {c: None for c in columns}
    row.update(fields)
    return row


# ----------------------------------------------------------------------
# per-row workers (module level so they pickle)


def sweep_row(task) -> tuple[dict, float]:
    index, seed, spec_text, eps_text, n_target, k, constants = task
    t0 = time.perf_counter()
    spec = parse_base(spec_text)
    row = _blank(SWEEP_COLUMNS, grid_index=index, seed=seed, base=spec_text, k=k)
    try:
        base, eps = resolve(k, constants, spec, None if eps_text is None else Fraction(eps_text), n_target, seed)
        row.update(n=base.n, base_edges=base.graph.edge_count, epsilon=frac(eps))
        params = ConstructionParams(k, eps, base, seed, {
            name: constants[name] for name in ("epsilon_constant", "kill_budget")
        })
        row["N"] = 4 * k * eps.denominator * base.n
        inst = run_construction(params)
        surv = surviving_fraction(inst)
        lt = lightness(inst.graph)
        row.update(
            status="ok",
            error_code="",
            error="",
            pruned_edges=len(inst.pruned),
            surviving_fraction=float(surv),
            survival_flag="collapsed" if surv < constants["collapse_below"] else "",
            certificate=frac(inst.certificate.value),
            threshold=frac(inst.threshold),
            lightness=float(lt),
            predicted_lightness=predicted_lightness(inst.N, k, eps, constants["lightness_constant"]),
        )
        row.update(_rates(inst.N, k, eps))
    except LightspanError as exc:
        row.update(status="failed", error_code=error_code(exc), error=str(exc))
    return row, time.perf_counter() - t0


def compare_row(task) -> tuple[dict, float]:
    index, seed, spec_text, eps_text, n_target, k, constants = task
    t0 = time.perf_counter()
    spec = parse_base(spec_text)
    row = _blank(COMPARE_COLUMNS, grid_index=index, seed=seed, base=spec_text, k=k)
    try:
        base, eps = resolve(k, constants, spec, None if eps_text is None else Fraction(eps_text), n_target, seed)
        t = (1 + eps) * (2 * k - 1)
        row.update(n=base.n, epsilon=frac(eps), stretch=frac(t))
        params = ConstructionParams(k, eps, base, seed, {
            name: constants[name] for name in ("epsilon_constant", "kill_budget")
        })
        inst = run_construction(params)
        h = inst.graph
        res = greedy_spanner(h, t)
        base_res = greedy_spanner(base.graph, 2 * k - 1)
        row.update(
            N=inst.N,
            h_edges=h.edge_count,
            kept_edges=res.edge_count,
            kept_fraction=res.edge_count / h.edge_count,
            base_kept_fraction=base_res.edge_count / base.graph.edge_count,
            lightness=float(lightness(h)),
            predicted_lightness=predicted_lightness(inst.N, k, eps, constants["lightness_constant"]),
        )
        row.update({c: v for c, v in _rates(inst.N, k, eps).items() if c in COMPARE_COLUMNS})
        if res.edge_count != h.edge_count:
            dropped = sorted(set(range(h.edge_count)) - set(res.kept))
            raise InvariantViolation(
                f"greedy at t={frac(t)} dropped {len(dropped)} edges of a certified instance "
                f"(first H edge id {dropped[0]})"
            )
        row.update(status="ok", error_code="", error="")
    except LightspanError as exc:
        row.update(status="failed", error_code=error_code(exc), error=str(exc))
    return row, time.perf_counter() - t0


def montecarlo_row(task) -> tuple[dict, float]:
    index, seed, eps_text, k, c, trials, chunk, bound_constant = task
    t0 = time.perf_counter()
    p = run_point(k, c, Fraction(eps_text), trials, seed, index, chunk, bound_constant)
    L = 2 * k + 2 * c
    lo, hi = p.interval
    row = {
        "grid_index": index,
        "seed": seed,
        "epsilon": eps_text,
        "cycle_length": L,
        "trials": trials,
        "hits": p.hits,
        "estimate": p.estimate,
        "wilson_low": lo,
        "wilson_high": hi,
        "exact": float(p.exact),
        "bound": p.bound,
        "scaled": p.estimate * math.factorial(L) / float(p.epsilon) ** L,
    }
    return row, time.perf_counter() - t0


def _run(fn, tasks, workers: int):
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            out = list(ex.map(fn, tasks, chunksize=1))
    else:
        out = [fn(t) for t in tasks]
    out.sort(key=lambda rt: (rt[0]["grid_index"], rt[0]["seed"]))
    return [r for r, _ in out], [(r["grid_index"], r["seed"], dt) for r, dt in out]


def _pipeline_tasks(cfg: ExperimentConfig) -> list[tuple]:
    consts = dict(cfg.constants)
    tasks = []
    for index, (spec, eps, target) in enumerate(grid_points(cfg)):
        for seed in cfg.seeds:
            tasks.append((index, seed, str(spec), None if eps is None else frac(eps), target, cfg.k, consts))
    return tasks


# ----------------------------------------------------------------------
# aggregates


def loglog_slope(xs, ys) -> Optional[float]:
    pts = [(math.log(x), math.log(y)) for x, y in zip(xs, ys) if x and y and x > 0 and y > 0]
    if len({p[0] for p in pts}) < 2:
        return None
    fit = stats.linregress([p[0] for p in pts], [p[1] for p in pts])
    return float(fit.slope)


def spearman(xs, ys) -> Optional[float]:
    if len(set(xs)) < 2 or len(set(ys)) < 2:
        return None
    return float(stats.spearmanr(xs, ys).statistic)


def _by_point(rows, key):
    groups: dict = {}
    for r in rows:
        groups.setdefault(r["grid_index"], []).append(r)
    return [
        {"grid_index": gi, **{k: rs[0][k] for k in key}, "rows": len(rs)}
        for gi, rs in sorted(groups.items())
    ], groups


def sweep_aggregate(rows) -> dict:
    ok = [r for r in rows if r["status"] == "ok"]
    failures: dict = {}
    for r in rows:
        if r["status"] != "ok":
            failures[r["error_code"]] = failures.get(r["error_code"], 0) + 1
    points, groups = _by_point(rows, ("base", "epsilon", "N"))
    for p in points:
        good = [r for r in groups[p["grid_index"]] if r["status"] == "ok"]
        p["mean_lightness"] = float(np.mean([r["lightness"] for r in good])) if good else None
        p["mean_surviving_fraction"] = float(np.mean([r["surviving_fraction"] for r in good])) if good else None
        p["mean_predicted_lightness"] = float(np.mean([r["predicted_lightness"] for r in good])) if good else None
    eps = [float(Fraction(r["epsilon"])) for r in ok]
    return {
        "rows": len(rows),
        "ok": len(ok),
        "failures": {k: failures[k] for k in sorted(failures)},
        "mean_surviving_fraction": float(np.mean([r["surviving_fraction"] for r in ok])) if ok else None,
        "slope_lightness_vs_N": loglog_slope([r["N"] for r in ok], [r["lightness"] for r in ok]),
        "slope_lightness_vs_epsilon": loglog_slope(eps, [r["lightness"] for r in ok]),
        "spearman_survival_vs_epsilon": spearman(eps, [r["surviving_fraction"] for r in ok]),
        "points": points,
    }


def compare_aggregate(rows) -> dict:
    ok = [r for r in rows if r["status"] == "ok"]
    return {
        "rows": len(rows),
        "ok": len(ok),
        "all_edges_kept": all(r["kept_fraction"] == 1.0 for r in ok),
        "failures": sum(r["status"] != "ok" for r in rows),
    }


def montecarlo_aggregate(rows, k: int, c: int, bound_constant: float) -> dict:
    L = 2 * k + 2 * c
    pooled: dict = {}
    for r in rows:
        h, t = pooled.get(r["epsilon"], (0, 0))
        pooled[r["epsilon"]] = (h + r["hits"], t + r["trials"])
    eps = sorted(pooled, key=lambda e: Fraction(e))
    est = [pooled[e][0] / pooled[e][1] for e in eps]
    scaled = [p * math.factorial(L) / float(Fraction(e)) ** L for e, p in zip(eps, est)]
    pos = [s for s in scaled if s > 0]
    return {
        "cycle_length": L,
        "points": [
            {"epsilon": e, "hits": pooled[e][0], "trials": pooled[e][1], "estimate": p, "scaled": s}
            for e, p, s in zip(eps, est, scaled)
        ],
        "slope": loglog_slope([float(Fraction(e)) for e in eps], est),
        "fitted_constant": max(scaled) if scaled else None,
        "stability_ratio": (max(pos) / min(pos)) if pos else None,
        "bound_constant": bound_constant ** L,
    }


# ----------------------------------------------------------------------
# report files


def render_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(["" if r[c] is None else (repr(r[c]) if isinstance(r[c], float) else r[c]) for c in columns])
    return buf.getvalue()


def render_json(cfg: ExperimentConfig, columns, rows, aggregate) -> str:
    doc = {
        "schema_version": cfg.schema_version,
        "config": cfg.echo(),
        "columns": list(columns),
        "rows": [{c: r[c] for c in columns} for r in rows],
        "aggregate": aggregate,
    }
    return json.dumps(doc, indent=2) + "\n"


def write_report(cfg: ExperimentConfig, name: str, columns, rows, aggregate, timings) -> list[Path]:
    out = cfg.out_dir
    texts = {}
    if "csv" in cfg.formats:
        texts[f"{name}.csv"] = render_csv(columns, rows)
        agg_rows = [{"key": k, "value": json.dumps(v)} for k, v in aggregate.items()]
        texts[f"{name}.aggregate.csv"] = render_csv(("key", "value"), agg_rows)
    if "json" in cfg.formats:
        texts[f"{name}.json"] = render_json(cfg, columns, rows, aggregate)
    texts[f"{name}.timings.csv"] = render_csv(
        ("grid_index", "seed", "wall_seconds"),
        [{"grid_index": g, "seed": s, "wall_seconds": dt} for g, s, dt in timings],
    )
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for fname, text in texts.items():
        p = out / fname
        p.write_text(text)
        paths.append(p)
    return paths


# ----------------------------------------------------------------------
# commands


def sweep(cfg: ExperimentConfig):
    tasks = _pipeline_tasks(cfg)
    rows, timings = _run(sweep_row, tasks, cfg.workers)
    return rows, sweep_aggregate(rows), timings


def compare(cfg: ExperimentConfig):
    tasks = _pipeline_tasks(cfg)
    rows, timings = _run(compare_row, tasks, cfg.workers)
    return rows, compare_aggregate(rows), timings


def montecarlo(cfg: ExperimentConfig):
    if not cfg.epsilons:
        raise ConfigError("montecarlo needs an epsilon grid")
    if cfg.trials < 1000:
        raise ConfigError(f"montecarlo needs trials >= 1000, got {cfg.trials}")
    bc = cfg.constants["bound_constant"]
    tasks = [
        (i, seed, frac(e), cfg.k, cfg.c, cfg.trials, cfg.chunk, bc)
        for i, e in enumerate(cfg.epsilons)
        for seed in cfg.seeds
    ]
    rows, timings = _run(montecarlo_row, tasks, cfg.workers)
    return rows, montecarlo_aggregate(rows, cfg.k, cfg.c, bc), timings


def instance_stem(spec: BaseSpec, k: int, eps: Fraction, seed: int) -> str:
    tag = str(spec).replace(":", "-").replace(",", "-").replace("=", "")
    return f"{tag}-k{k}-e{eps.denominator}-s{seed}"


def generate(cfg: ExperimentConfig) -> tuple[list[dict], list[Path]]:
    """Write base, embedded and pruned instances for every point and seed.

    Returns per-instance summaries; certification failures leave a
    ``.witness.json`` file instead of the pruned instance.
    """
    out = cfg.out_dir
    consts = cfg.construction_constants()
    jobs = []
    for spec, eps, target in grid_points(cfg):
        for seed in cfg.seeds:
            base, e = resolve(cfg.k, dict(cfg.constants), spec, eps, target, seed)
            jobs.append((spec, seed, base, e, ConstructionParams(cfg.k, e, base, seed, consts)))
    summaries, written = [], []
    for spec, seed, base, e, params in jobs:
        stem = out / instance_stem(spec, cfg.k, e, seed)
        out.mkdir(parents=True, exist_ok=True)
        summary = {"base": str(spec), "seed": seed, "k": cfg.k, "epsilon": frac(e), "stem": stem.name}
        lio.write_girth_graph(base, f"{stem}.base.edges", f"{stem}.base.json")
        written += [Path(f"{stem}.base.edges"), Path(f"{stem}.base.json")]
        pruned = run_construction(params, certify=False)
        lio.write_instance(pruned, f"{stem}.embedded.edges", f"{stem}.embedded.layout", stage="embedded")
        written += [Path(f"{stem}.embedded.edges"), Path(f"{stem}.embedded.layout")]
        try:
            inst = prune_light_cycles(pruned)
        except CertificationError as exc:
            w = Path(f"{stem}.witness.json")
            w.write_text(json.dumps({
                "error": str(exc),
                "value": frac(exc.value),
                "witness_edges": list(exc.witness.edges),
                "witness_nodes": list(exc.witness.nodes),
            }, indent=2) + "\n")
            written.append(w)
            summary.update(status="failed", error_code="certification", error=str(exc))
            summaries.append(summary)
            continue
        lio.write_instance(inst, f"{stem}.pruned.edges", f"{stem}.pruned.layout", stage="pruned")
        written += [Path(f"{stem}.pruned.edges"), Path(f"{stem}.pruned.layout")]
        summary.update(
            status="ok",
            N=inst.N,
            pruned_edges=len(inst.pruned),
            surviving_fraction=frac(surviving_fraction(inst)),
            certificate=frac(inst.certificate.value),
            threshold=frac(inst.threshold),
        )
        summaries.append(summary)
    return summaries, written


def verify(cfg: ExperimentConfig) -> dict:
    """Recompute the weighted girth of an instance file from scratch."""
    if not cfg.instance:
        raise ConfigError("verify needs an instance path")
    path = Path(cfg.instance)
    stem = str(path)[: -len(".edges")] if path.suffix == ".edges" else str(path)
    edges_path = Path(stem + ".edges")
    layout_path = Path(stem + ".layout")
    if not edges_path.exists():
        raise ConfigError(f"no such instance file {edges_path}")
    k, eps = cfg.k, cfg.epsilons[0] if cfg.epsilons else None
    if layout_path.exists():
        fields = lio.parse_layout(layout_path.read_text())
        if "k" not in cfg.explicit:
            k = int(fields["k"])
        if eps is None:
            eps = Fraction(fields["epsilon"])
    if eps is None:
        raise ConfigError("verify needs epsilon (no layout sidecar found)")
    g = lio.read_edge_list(edges_path, allow_parallel=True)
    threshold = (1 + Fraction(eps)) * 2 * k
    cert = weighted_girth(g)
    passed = cert.value > threshold
    report = {
        "instance": edges_path.name,
        "k": k,
        "epsilon": frac(eps),
        "threshold": frac(threshold),
        "value": "inf" if cert.value == math.inf else frac(cert.value),
        "pass": bool(passed),
        "witness_edges": list(cert.witness.edges) if cert.witness else [],
        "witness_nodes": list(cert.witness.nodes) if cert.witness else [],
    }
    return report
