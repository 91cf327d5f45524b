"""Command-line surface.

Subcommands: gen, sketch, sample, solve, bench, reduce-sat.  Each one is a
thin client of the HTTP service: file handling stays local, the numerical
work happens behind the request/response models (in-process by default,
against --server URL when given).

Exit codes: 0 success, 2 parameter/format errors, 3 convergence or
stagnation failures.
"""

from __future__ import annotations

import json
import math
import sys

import click
import httpx
import numpy as np
from click.core import ParameterSource

from .bench import CSV_HEADER
from .client import ServiceClient
from .exceptions import ParameterError
from .linalg import (read_instance_csv, read_weighted_csv, write_instance_csv,
                     write_weighted_csv)

CONVERGENCE_KINDS = {"convergence_error", "stagnation_error", "flat_start_error"}


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _post(ctx, path: str, payload: dict) -> dict:
    try:
        with ServiceClient(ctx.obj.get("server")) as client:
            resp = client.post(path, payload)
    except httpx.HTTPError as exc:
        _fail(f"cannot reach server: {exc}", 2)
    if resp.status_code >= 400:
        try:
            body = resp.json()
        except json.JSONDecodeError:
            body = {}
        kind = body.get("kind", "")
        detail = body.get("detail") or f"HTTP {resp.status_code}"
        _fail(detail, 3 if kind in CONVERGENCE_KINDS else 2)
    return resp.json()


def _read_instance(path: str, skip_header: bool, weighted: bool):
    try:
        if weighted:
            return read_weighted_csv(path, skip_header=skip_header)
        return read_instance_csv(path, skip_header=skip_header)
    except (OSError, ValueError) as exc:
        _fail(f"cannot read {path}: {exc}", 2)


def _loss_payload(kind: str, tau: float, p: float, scale: float) -> dict:
    return {"kind": kind, "tau": tau, "p": p, "scale": scale}


def loss_options(f):
    decorators = [
        click.option("--loss", "loss_kind", type=click.Choice(["tukey", "clipped"]),
                     default="tukey", show_default=True, help="Loss family."),
        click.option("--tau", type=float, default=1.0, show_default=True,
                     help="Clipping point: the loss is flat beyond |a| = tau."),
        click.option("--p", type=float, default=2.0, show_default=True,
                     help="Growth exponent (clipped loss only; bisquare is 2)."),
        click.option("--scale", type=float, default=1.0, show_default=True),
    ]
    for deco in reversed(decorators):
        f = deco(f)
    return f


@click.group()
@click.option("--server", envvar="TUKEYREDUCE_SERVER", default=None,
              help="Base URL of a running service; default runs in-process.")
@click.pass_context
def main(ctx, server):
    """Reduce large flat-loss regression instances, then solve them small."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


@main.command()
@click.option("--n", type=int, required=True, help="Number of rows.")
@click.option("--d", type=int, required=True, help="Number of columns.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--outlier-fraction", type=float, default=0.0, show_default=True)
@click.option("--outlier-magnitude", type=float, default=1e4, show_default=True)
@click.option("--output", "-o", required=True,
              type=click.Path(dir_okay=False, writable=True))
@click.pass_context
def gen(ctx, n, d, seed, outlier_fraction, outlier_magnitude, output):
    """Generate a Gaussian instance CSV (columns: A then b)."""
    data = _post(ctx, "/generate", {
        "n": n, "d": d, "seed": seed, "outlier_fraction": outlier_fraction,
        "outlier_magnitude": outlier_magnitude})
    inst = data["instance"]
    write_instance_csv(output, np.asarray(inst["a"]), np.asarray(inst["b"]))
    click.echo(f"wrote {n}x{d} instance to {output}")


@main.command()
@click.option("--input", "-i", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--skip-header", is_flag=True, help="Input CSV has a header row.")
@loss_options
@click.option("--rows", type=int, required=True, help="Target support size.")
@click.option("--eps", type=float, default=0.5, show_default=True)
@click.option("--delta", type=float, default=0.05, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-depth", type=int, default=64, show_default=True)
@click.option("--output", "-o", required=True,
              type=click.Path(dir_okay=False, writable=True))
@click.pass_context
def sample(ctx, input_path, skip_header, loss_kind, tau, p, scale, rows, eps,
           delta, seed, max_depth, output):
    """Row-sample an instance down to a weighted CSV (w, A, b columns)."""
    a, b = _read_instance(input_path, skip_header, weighted=False)
    data = _post(ctx, "/sample", {
        "instance": {"a": a.tolist(), "b": b.tolist()},
        "loss": _loss_payload(loss_kind, tau, p, scale),
        "target_rows": rows, "eps": eps, "delta": delta, "seed": seed,
        "max_depth": max_depth})
    idx = np.asarray(data["indices"], dtype=int)
    write_weighted_csv(output, np.asarray(data["values"]), a[idx], b[idx])
    click.echo(f"kept {idx.size} of {a.shape[0]} rows "
               f"(depth {data['depth']}) -> {output}")


@main.command()
@click.option("--input", "-i", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--skip-header", is_flag=True)
@click.option("--m", type=int, default=64, show_default=True,
              help="Buckets-per-group parameter.")
@click.option("--b", type=int, default=None, help="Level decay; default n^(1/3).")
@click.option("--c", type=int, default=8, show_default=True)
@click.option("--gamma", type=float, default=2.0, show_default=True)
@click.option("--eps", type=float, default=0.1, show_default=True)
@click.option("--rows-cap", type=int, default=None,
              help="Pick the largest spec with at most this many output rows.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--output", "-o", required=True,
              type=click.Path(dir_okay=False, writable=True))
@click.pass_context
def sketch(ctx, input_path, skip_header, m, b, c, gamma, eps, rows_cap, seed,
           output):
    """Sketch an instance obliviously into a weighted CSV (w, SA, Sb)."""
    a, bv = _read_instance(input_path, skip_header, weighted=False)
    data = _post(ctx, "/sketch", {
        "instance": {"a": a.tolist(), "b": bv.tolist()},
        "m": m, "b": b, "c": c, "gamma": gamma, "eps": eps,
        "rows_cap": rows_cap, "seed": seed})
    write_weighted_csv(output, np.asarray(data["weights"]),
                       np.asarray(data["sa"]), np.asarray(data["sb"]))
    spec = data["spec"]
    click.echo(f"sketched {a.shape[0]} rows into {data['rows']} "
               f"({data['levels']} levels, m={spec['m']} b={spec['b']} "
               f"c={spec['c']}) -> {output}")


@main.command()
@click.option("--input", "-i", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--skip-header", is_flag=True)
@click.option("--plain", is_flag=True,
              help="Input has no leading weight column.")
@loss_options
@click.option("--method", type=click.Choice(["irls", "grid"]), default="irls",
              show_default=True)
@click.option("--restarts", type=int, default=10, show_default=True)
@click.option("--max-iter", type=int, default=100, show_default=True)
@click.option("--tol", type=float, default=1e-9, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json", show_default=True)
@click.option("--output", "-o", default="-",
              help="Output path; '-' prints to stdout.")
@click.pass_context
def solve(ctx, input_path, skip_header, plain, loss_kind, tau, p, scale,
          method, restarts, max_iter, tol, seed, fmt, output):
    """Solve a (weighted) instance CSV; emits x and the objective."""
    if plain:
        a, b = _read_instance(input_path, skip_header, weighted=False)
        weights = None
    else:
        w, a, b = _read_instance(input_path, skip_header, weighted=True)
        weights = w.tolist()
    data = _post(ctx, "/solve", {
        "instance": {"a": a.tolist(), "b": b.tolist()}, "weights": weights,
        "loss": _loss_payload(loss_kind, tau, p, scale), "method": method,
        "restarts": restarts, "max_iter": max_iter, "tol": tol, "seed": seed})
    if fmt == "json":
        text = json.dumps({"x": data["x"], "objective": data["objective"],
                           "iterations": data["iterations"],
                           "converged": data["converged"]}, indent=2) + "\n"
    else:
        xs = ",".join(f"{v:.17g}" for v in data["x"])
        text = f"{xs},{data['objective']:.17g}\n"
    if output == "-":
        click.echo(text, nl=False)
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)


@main.command(name="reduce-sat")
@click.option("--cnf", "cnf_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="DIMACS 3-CNF input.")
@click.option("--tau", type=float, default=1.0, show_default=True)
@click.option("--p", type=float, default=2.0, show_default=True)
@click.option("--kind", type=click.Choice(["tukey", "clipped"]),
              default="clipped", show_default=True)
@click.option("--scale", type=float, default=1.0, show_default=True)
@click.option("--output", "-o", required=True,
              type=click.Path(dir_okay=False, writable=True))
@click.option("--manifest", "manifest_path", default=None,
              type=click.Path(dir_okay=False, writable=True),
              help="Optional JSON manifest output path.")
@click.pass_context
def reduce_sat(ctx, cnf_path, tau, p, kind, scale, output, manifest_path):
    """Reduce a 3-CNF to a regression instance whose optimum encodes SAT."""
    try:
        with open(cnf_path, "r", encoding="utf-8") as fh:
            dimacs = fh.read()
    except OSError as exc:
        _fail(f"cannot read {cnf_path}: {exc}", 2)
    data = _post(ctx, "/reduce-sat", {
        "dimacs": dimacs, "tau": tau, "p": p, "kind": kind, "scale": scale})
    inst = data["instance"]
    write_instance_csv(output, np.asarray(inst["a"]), np.asarray(inst["b"]))
    manifest = data["manifest"]
    if manifest_path:
        with open(manifest_path, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
    click.echo(f"{manifest['rows']} rows, satisfiable cost "
               f"{manifest['satisfiable_cost']:.12g} -> {output}")


_BENCH_CONFIG_TYPES = {
    "n": int, "d": int, "reps": int, "seed": int, "restarts": int,
    "max_iter": int, "threads": int, "outlier_fraction": float,
    "outlier_magnitude": float, "tol": float, "eps": float, "delta": float,
    "tau": float, "p": float, "scale": float, "loss": str, "sizes": str,
    "methods": str,
}

_BENCH_PARAM_NAMES = {  # config key -> click parameter name
    "loss": "loss_kind", "sizes": "sizes", "methods": "methods",
}


def _parse_config_file(path: str) -> dict:
    out = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ParameterError(
                        f"line {lineno}: expected key=value, got {line!r}")
                key, value = line.split("=", 1)
                key = key.strip().replace("-", "_")
                if key not in _BENCH_CONFIG_TYPES:
                    raise ParameterError(f"line {lineno}: unknown key {key!r}")
                out[key] = _BENCH_CONFIG_TYPES[key](value.strip())
    except OSError as exc:
        _fail(f"cannot read config {path}: {exc}", 2)
    except (ParameterError, ValueError) as exc:
        _fail(f"bad config {path}: {exc}", 2)
    return out


def _csv_ints(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        _fail(f"expected comma-separated integers, got {text!r}", 2)


@main.command()
@click.option("--n", type=int, default=10000, show_default=True)
@click.option("--d", type=int, default=20, show_default=True)
@loss_options
@click.option("--sizes", default=None,
              help="Comma-separated row targets; default 2d..10d in steps of d.")
@click.option("--methods", default="rowsample,msketch,msketch-clipped",
              show_default=True)
@click.option("--reps", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--outlier-fraction", type=float, default=0.0, show_default=True)
@click.option("--outlier-magnitude", type=float, default=1e4, show_default=True)
@click.option("--restarts", type=int, default=10, show_default=True)
@click.option("--max-iter", type=int, default=50, show_default=True)
@click.option("--tol", type=float, default=1e-8, show_default=True)
@click.option("--eps", type=float, default=0.5, show_default=True)
@click.option("--delta", type=float, default=0.05, show_default=True)
@click.option("--threads", type=int, default=None,
              help="Worker threads; default TUKEYREDUCE_THREADS or cpu count.")
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="key=value defaults; explicit CLI flags win.")
@click.option("--output", "-o", default="-",
              help="Results CSV path; '-' prints to stdout.")
@click.option("--summary-json", default=None,
              type=click.Path(dir_okay=False, writable=True))
@click.option("--plot-data", default=None,
              type=click.Path(dir_okay=False, writable=True),
              help="Emit per-method (size, best_ratio) series CSV.")
@click.pass_context
def bench(ctx, n, d, loss_kind, tau, p, scale, sizes, methods, reps, seed,
          outlier_fraction, outlier_magnitude, restarts, max_iter, tol, eps,
          delta, threads, config_path, output, summary_json, plot_data):
    """Run the reduction benchmark; emits method,size,rep,ratio,wall_time_ms."""
    values = {"n": n, "d": d, "loss_kind": loss_kind, "tau": tau, "p": p,
              "scale": scale, "sizes": sizes, "methods": methods,
              "reps": reps, "seed": seed, "outlier_fraction": outlier_fraction,
              "outlier_magnitude": outlier_magnitude, "restarts": restarts,
              "max_iter": max_iter, "tol": tol, "eps": eps, "delta": delta,
              "threads": threads}
    if config_path:
        overrides = _parse_config_file(config_path)
        for key, value in overrides.items():
            param = _BENCH_PARAM_NAMES.get(key, key)
            if ctx.get_parameter_source(param) == ParameterSource.DEFAULT:
                values[param] = value

    if values["sizes"] is None:
        values["sizes"] = ",".join(str(k * values["d"]) for k in range(2, 11))
    payload = {
        "n": values["n"], "d": values["d"],
        "loss": _loss_payload(values["loss_kind"], values["tau"], values["p"],
                              values["scale"]),
        "sizes": _csv_ints(str(values["sizes"])),
        "methods": [m.strip() for m in str(values["methods"]).split(",") if m.strip()],
        "reps": values["reps"], "seed": values["seed"],
        "outlier_fraction": values["outlier_fraction"],
        "outlier_magnitude": values["outlier_magnitude"],
        "restarts": values["restarts"], "max_iter": values["max_iter"],
        "tol": values["tol"], "sample_eps": values["eps"],
        "sample_delta": values["delta"], "threads": values["threads"]}
    data = _post(ctx, "/bench", payload)

    lines = [CSV_HEADER]
    for row in data["rows"]:
        ratio = row["ratio"] if row["ratio"] is not None else math.nan
        lines.append(f"{row['method']},{row['size']},{row['rep']},"
                     f"{ratio:.17g},{row['wall_time_ms']:.3f}")
        if row.get("note"):
            click.echo(f"warning: {row['method']}@{row['size']} rep "
                       f"{row['rep']}: {row['note']}", err=True)
    text = "\n".join(lines) + "\n"
    if output == "-":
        click.echo(text, nl=False)
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)

    if summary_json:
        with open(summary_json, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=2)
            fh.write("\n")
    if plot_data:
        plot_lines = ["method,size,best_ratio"]
        for s in data["summary"]:
            best = s["best_ratio"] if s["best_ratio"] is not None else math.nan
            plot_lines.append(f"{s['method']},{s['size']},{best:.17g}")
        with open(plot_data, "w", encoding="utf-8") as fh:
            fh.write("\n".join(plot_lines) + "\n")


if __name__ == "__main__":
    main()
