"""Command line client for the audit service.

Every subcommand talks to the HTTP API.  By default the service runs in
process, so no server needs to be started; ``--server`` points the same
commands at a remote instance, and ``serve`` starts one.
"""

from __future__ import annotations

import asyncio
import json
from pathlib import Path

import click
import httpx

from .io import load_feature_file, save_feature_file
from .service import create_app

_BOUND_KEYS = ("delta", "additive_error", "success_probability")


class _Client:
    """Minimal POST/GET client over HTTP or an in-process ASGI app."""

    def __init__(self, server: str | None) -> None:
        self._server = server

    def post(self, path: str, payload: dict) -> httpx.Response:
        if self._server is not None:
            with httpx.Client(base_url=self._server, timeout=None) as client:
                return client.post(path, json=payload)

        async def go() -> httpx.Response:
            transport = httpx.ASGITransport(app=create_app())
            async with httpx.AsyncClient(
                transport=transport, base_url="http://divaudit", timeout=None
            ) as client:
                return await client.post(path, json=payload)

        return asyncio.run(go())


def _call(server: str | None, path: str, payload: dict) -> dict:
    response = _Client(server).post(path, payload)
    if response.status_code != 200:
        try:
            body = response.json()
        except ValueError:
            body = {"detail": response.text}
        tag = body.get("error", f"HTTP {response.status_code}")
        raise click.ClickException(f"{tag}: {body.get('detail')}")
    return response.json()


def _server_option(fn):
    return click.option(
        "--server",
        default=None,
        metavar="URL",
        help="Base URL of a running service; default runs it in process.",
    )(fn)


def _delimiter_option(fn):
    return click.option(
        "--delimiter", default=",", show_default=True, help="Feature file delimiter."
    )(fn)


@click.group()
def main() -> None:
    """Audit the group composition of unlabeled vector collections."""


@main.command()
@click.option("--collection", "collection_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Feature file with the vectors under audit.")
@click.option("--control", "control_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Fully labeled feature file with the control set.")
@click.option("--method", type=click.Choice(["divscore", "iid", "ss-st"]), default="divscore", show_default=True)
@click.option("--metric", default="cosine1", show_default=True)
@click.option("--k", default=5, show_default=True, help="Batch size for ss-st.")
@click.option("--clip", is_flag=True, help="Clip the estimate to [-1, 1] for presentation.")
@click.option("--bounds", "show_bounds", is_flag=True, help="Include the error envelope in the output.")
@click.option("--out", "out_format", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@_delimiter_option
@_server_option
def audit(
    collection_path: str,
    control_path: str,
    method: str,
    metric: str,
    k: int,
    clip: bool,
    show_bounds: bool,
    out_format: str,
    delimiter: str,
    server: str | None,
) -> None:
    """Estimate the disparity of a collection against a labeled control set."""
    collection = load_feature_file(collection_path, delimiter)
    control = load_feature_file(control_path, delimiter).to_control_set()
    payload = {
        "collection": collection.vectors.tolist(),
        "control": {"t0": control.t0.tolist(), "t1": control.t1.tolist()},
        "method": method,
        "metric": metric,
        "k": k,
        "clip": clip,
    }
    report = _call(server, "/audit", payload)
    if not show_bounds:
        for key in _BOUND_KEYS:
            report["diagnostics"].pop(key, None)
    if out_format == "json":
        click.echo(json.dumps(report, indent=2, sort_keys=True))
    else:
        click.echo(_report_csv(report))


def _report_csv(report: dict) -> str:
    lines = ["key,value"]
    lines.append(f"estimate,{report['estimate']!r}")
    lines.append(f"method,{report['method']}")
    if report.get("raw_gap") is not None:
        lines.append(f"raw_gap,{report['raw_gap']!r}")
    stats = report.get("norm_stats")
    if stats:
        for key in ("cross", "within0", "within1"):
            lines.append(f"norm_stats.{key},{stats[key]!r}")
    for key in sorted(report.get("diagnostics", {})):
        lines.append(f"diagnostics.{key},{report['diagnostics'][key]!r}")
    return "\n".join(lines)


@main.command("build-control")
@click.option("--aux", "aux_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Fully labeled feature file to select from.")
@click.option("--size", required=True, type=int, help="Total control set size.")
@click.option("--mode", type=click.Choice(["random-balanced", "random-proportional", "adaptive"]), default="random-balanced", show_default=True)
@click.option("--alpha", default=1.0, show_default=True, help="Redundancy penalty for adaptive selection.")
@click.option("--seed", default=0, show_default=True)
@click.option("--metric", default="cosine1", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False), help="Where to write the control feature file.")
@_delimiter_option
@_server_option
def build_control(
    aux_path: str,
    size: int,
    mode: str,
    alpha: float,
    seed: int,
    metric: str,
    out_path: str,
    delimiter: str,
    server: str | None,
) -> None:
    """Build a labeled control set from an auxiliary labeled pool."""
    pool = load_feature_file(aux_path, delimiter).to_labeled_set()
    payload = {
        "vectors": pool.vectors.tolist(),
        "labels": pool.labels.tolist(),
        "mode": mode,
        "size": size,
        "alpha": alpha,
        "seed": seed,
        "metric": metric,
    }
    control = _call(server, "/control/build", payload)
    vectors = control["t0"] + control["t1"]
    labels = [0] * len(control["t0"]) + [1] * len(control["t1"])
    save_feature_file(out_path, vectors, labels, delimiter=delimiter)
    click.echo(
        f"wrote {len(control['t0'])}+{len(control['t1'])} control vectors to {out_path}"
    )


@main.command()
@click.option("--dim", required=True, type=int)
@click.option("--angle", default=90.0, show_default=True, help="Angle between cluster centers, degrees.")
@click.option("--sigma", required=True, type=float, help="Per-coordinate noise scale.")
@click.option("--n", required=True, type=int, help="Collection size.")
@click.option("--f", required=True, type=float, help="Group-0 fraction.")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@_delimiter_option
@_server_option
def synth(
    dim: int,
    angle: float,
    sigma: float,
    n: int,
    f: float,
    seed: int,
    out_path: str,
    delimiter: str,
    server: str | None,
) -> None:
    """Generate a labeled synthetic collection and write it as a feature file."""
    payload = {
        "dim": dim,
        "angle_degrees": angle,
        "sigma": sigma,
        "n": n,
        "f": f,
        "seed": seed,
    }
    data = _call(server, "/synth", payload)
    save_feature_file(out_path, data["vectors"], data["labels"], delimiter=delimiter)
    click.echo(f"wrote {len(data['vectors'])} labeled vectors to {out_path}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False), help="JSON sweep configuration.")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False), help="Directory for results.csv, timings.csv, manifest.json.")
@_server_option
def sweep(config_path: str, out_dir: str, server: str | None) -> None:
    """Run a configured sweep and write its result files.

    The configuration mirrors the /sweep request schema.  A "pool_file" key
    may name a labeled feature file to load client-side as the data source.
    """
    with open(config_path, encoding="utf-8") as handle:
        config = json.load(handle)
    pool_file = config.pop("pool_file", None)
    if pool_file is not None:
        pool = load_feature_file(
            pool_file, config.pop("pool_delimiter", ",")
        ).to_labeled_set()
        config["pool"] = {
            "vectors": pool.vectors.tolist(),
            "labels": pool.labels.tolist(),
        }
    result = _call(server, "/sweep", config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(result["results_csv"], encoding="utf-8")
    (out / "timings.csv").write_text(result["timings_csv"], encoding="utf-8")
    (out / "manifest.json").write_text(
        json.dumps(result["manifest"], sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    click.echo(f"wrote results.csv, timings.csv, manifest.json to {out}")


@main.command()
@click.option("--n", "collection_size", required=True, type=int, help="Collection size.")
@click.option("--t", "control_size", required=True, type=int, help="Control set size.")
@click.option("--mu-diff", required=True, type=float, help="Expected cross-group similarity.")
@click.option("--gamma", required=True, type=float, help="Separation margin.")
@click.option("--mu-same", default=None, type=float, help="Expected same-group similarity; defaults to mu-diff + gamma.")
@click.option("--delta", default=None, type=float, help="Evaluate the band probability at this delta instead of the derived one.")
@click.option("--log-base", default=None, type=float, help="Logarithm base in the delta formula; natural log by default.")
@_server_option
def bounds(
    collection_size: int,
    control_size: int,
    mu_diff: float,
    gamma: float,
    mu_same: float | None,
    delta: float | None,
    log_base: float | None,
    server: str | None,
) -> None:
    """Print the additive error envelope for a planned audit."""
    payload = {
        "collection_size": collection_size,
        "control_size": control_size,
        "mu_diff": mu_diff,
        "gamma": gamma,
        "mu_same": mu_same,
        "delta": delta,
        "log_base": log_base,
    }
    click.echo(json.dumps(_call(server, "/bounds", payload), indent=2, sort_keys=True))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host: str, port: int) -> None:
    """Run the audit service with uvicorn."""
    import uvicorn

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
