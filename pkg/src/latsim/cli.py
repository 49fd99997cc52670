"""Command-line front end: cochran, select, heatmap, calibrate.

Every run writes its tables (CSV), figures (SVG), and a manifest recording
the command, resolved parameters, input hashes, and output files, so the
run can be reproduced byte-for-byte.

Exit codes: 0 success, 2 usage error, 3 input error, 4 infeasible target.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import click

from . import __version__
from .decision import ComplianceRule, TieBreak
from .delays import CalibrationError, CalibrationResult, build_path_model, calibrate_path
from .experiments import (
    ExperimentConfig,
    SelectionResult,
    config_echo,
    error_table_to_csv,
    heatmap_summary_csv,
    heatmap_to_csv,
    run_error_table,
    run_heatmap,
    run_selection,
    selection_to_csv,
    write_summary,
)
from .plots import compliance_heatmap, selection_bar_chart
from .sampling import cochran_error, cochran_n
from .topology import (
    LinkSpec,
    NodeSpec,
    Role,
    RoutingError,
    Topology,
    TopologyError,
    load_topology,
    route,
    serialize_topology,
)

OUT_DIR_ENVVAR = "LATSIM_OUT"


class InputError(click.ClickException):
    """Bad input file or unroutable request."""

    exit_code = 3


class InfeasibleError(click.ClickException):
    """Calibration target out of reach."""

    exit_code = 4


@dataclass
class RunManifest:
    command: str
    version: str
    master_seed: int | None
    parameters: dict
    topology_sha256: str | None
    outputs: list[str]


def _write_manifest(out_dir: Path, manifest: RunManifest) -> Path:
    path = out_dir / f"{manifest.command}_manifest.json"
    path.write_text(json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _parse_int_list(text: str, flag: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got '{text}'",
                                 param_hint=flag) from None
    if not values:
        raise click.BadParameter("expected at least one value", param_hint=flag)
    return values


def _load_topology_or_fail(path_text: str) -> tuple[Topology, Path]:
    path = Path(path_text)
    if not path.is_file():
        raise InputError(f"topology file not found: {path}")
    try:
        return load_topology(path), path
    except TopologyError as exc:
        raise InputError(f"cannot load topology {path}: {exc}") from exc


def _out_dir_option(fn):
    return click.option(
        "--out-dir",
        envvar=OUT_DIR_ENVVAR,
        default="latsim-out",
        show_default=True,
        help=f"output directory (env {OUT_DIR_ENVVAR})",
    )(fn)


@click.group()
@click.version_option(__version__)
def main():
    """Latency telemetry sampling simulator."""


@main.command()
@click.option("--z", default=1.96, show_default=True, help="confidence multiplier")
@click.option("--p", "p_assumed", default=0.5, show_default=True,
              help="assumed proportion")
@click.option("--n", "counts_text", default=None,
              help="comma-separated sample counts to tabulate")
@click.option("--e", "margin", type=float, default=None,
              help="target margin of error to invert")
@_out_dir_option
def cochran(z, p_assumed, counts_text, margin, out_dir):
    """Sample-size planning table: margin of error per sample count."""
    if not z > 0:
        raise click.BadParameter("z must be > 0", param_hint="--z")
    if not 0 < p_assumed < 1:
        raise click.BadParameter("p must lie in (0, 1)", param_hint="--p")
    if (counts_text is None) == (margin is None):
        raise click.UsageError("provide exactly one of --n or --e")
    if margin is not None:
        if not 0 < margin < 1:
            raise click.BadParameter("e must lie in (0, 1)", param_hint="--e")
        n0 = cochran_n(z, p_assumed, margin)
        rows = [(n0, cochran_error(z, p_assumed, n0))]
        click.echo(f"n0={n0} achieves e={rows[0][1]:.4f} (requested {margin:.4f})")
    else:
        counts = _parse_int_list(counts_text, "--n")
        if any(c < 1 for c in counts):
            raise click.BadParameter("sample counts must be >= 1", param_hint="--n")
        rows = run_error_table(z, p_assumed, counts)
        click.echo(f"{'n0':>8}  {'e':>8}")
        for n0, e in rows:
            click.echo(f"{n0:>8}  {e:>8.4f}")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "cochran.csv").write_text(error_table_to_csv(rows), encoding="utf-8")
    _write_manifest(out, RunManifest(
        command="cochran",
        version=__version__,
        master_seed=None,
        parameters={"z": z, "p_assumed": p_assumed,
                    "n": counts_text, "e": margin},
        topology_sha256=None,
        outputs=["cochran.csv"],
    ))


@main.command()
@click.option("--topology", "topology_file", required=True, help="topology YAML file")
@click.option("--source", required=True, help="source node id")
@click.option("--destinations", required=True,
              help="comma-separated destination node ids (one candidate path each)")
@click.option("--threshold", default=82.0, show_default=True, help="delay threshold in us")
@click.option("--fraction", default=0.99, show_default=True,
              help="required fraction at or below the threshold")
@click.option("--sizes", default="5,10,50,100,400", show_default=True,
              help="comma-separated sample sizes")
@click.option("--trials", default=10000, show_default=True)
@click.option("--seed", default=0, show_default=True, help="master seed")
@click.option("--workers", default=1, show_default=True)
@click.option("--tie-break", type=click.Choice([t.value for t in TieBreak]),
              default=TieBreak.RANDOM.value, show_default=True)
@click.option("--us-per-km", default=5.0, show_default=True,
              help="propagation delay per km")
@_out_dir_option
def select(topology_file, source, destinations, threshold, fraction, sizes, trials,
           seed, workers, tie_break, us_per_km, out_dir):
    """Best-path selection frequencies from repeated telemetry draws."""
    topo, topo_path = _load_topology_or_fail(topology_file)
    dest_ids = [d.strip() for d in destinations.split(",") if d.strip()]
    if not dest_ids:
        raise click.BadParameter("expected at least one destination",
                                 param_hint="--destinations")
    models = []
    for dest in dest_ids:
        try:
            models.append(build_path_model(topo, route(topo, source, dest), us_per_km))
        except RoutingError as exc:
            raise InputError(str(exc)) from exc

    config = ExperimentConfig(
        master_seed=seed,
        trials=trials,
        sample_sizes=_parse_int_list(sizes, "--sizes"),
        rule=ComplianceRule(threshold_us=threshold, required_fraction=fraction),
        tie_break=TieBreak(tie_break),
        workers=workers,
    )
    if len(models) == 1:
        # degenerate run: the only candidate is always chosen
        result = SelectionResult(
            path_ids=(dest_ids[0],),
            sample_sizes=config.sample_sizes,
            trials=config.trials,
            wins={n0: (config.trials,) for n0 in config.sample_sizes},
        )
    else:
        result = run_selection(models, config, path_ids=dest_ids)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "selection.csv").write_text(selection_to_csv(result), encoding="utf-8")
    selection_bar_chart(result, out / "selection.svg")
    write_summary(
        out / "selection_summary.json", "selection", config,
        {"source": source, "path_ids": list(result.path_ids),
         "frequencies": {str(n0): list(result.frequencies[n0])
                         for n0 in result.sample_sizes}},
    )
    for n0 in result.sample_sizes:
        freqs = ", ".join(
            f"{pid}={f:.4f}" for pid, f in zip(result.path_ids, result.frequencies[n0])
        )
        click.echo(f"n0={n0}: {freqs}")
    _write_manifest(out, RunManifest(
        command="select",
        version=__version__,
        master_seed=seed,
        parameters={**config_echo(config), "source": source,
                    "destinations": dest_ids, "us_per_km": us_per_km,
                    "topology": str(topo_path)},
        topology_sha256=_sha256(topo_path),
        outputs=["selection.csv", "selection.svg", "selection_summary.json"],
    ))


@main.command()
@click.option("--topology", "topology_file", required=True, help="topology YAML file")
@click.option("--threshold", default=82.0, show_default=True)
@click.option("--fraction", default=0.99, show_default=True)
@click.option("--sizes", default="5,100", show_default=True,
              help="comma-separated sample sizes, one heatmap each")
@click.option("--seed", default=0, show_default=True, help="master seed")
@click.option("--workers", default=1, show_default=True)
@click.option("--us-per-km", default=5.0, show_default=True)
@_out_dir_option
def heatmap(topology_file, threshold, fraction, sizes, seed, workers, us_per_km, out_dir):
    """Per-(ACO, MACO) compliance decisions with FP/FN overlays."""
    topo, topo_path = _load_topology_or_fail(topology_file)
    config = ExperimentConfig(
        master_seed=seed,
        trials=1,
        sample_sizes=_parse_int_list(sizes, "--sizes"),
        rule=ComplianceRule(threshold_us=threshold, required_fraction=fraction),
        workers=workers,
    )
    try:
        results = run_heatmap(topo, config, us_per_km=us_per_km)
    except (RoutingError, ValueError) as exc:
        raise InputError(str(exc)) from exc

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    outputs = []
    for n0 in config.sample_sizes:
        result = results[n0]
        csv_name = f"heatmap_n{n0}.csv"
        svg_name = f"heatmap_n{n0}.svg"
        (out / csv_name).write_text(heatmap_to_csv(result), encoding="utf-8")
        compliance_heatmap(result, out / svg_name)
        outputs += [csv_name, svg_name]
        r = result.report
        click.echo(f"n0={n0}: fp={r.fp_count} fn={r.fn_count} "
                   f"tp={r.tp_count} tn={r.tn_count}")
    (out / "heatmap_summary.csv").write_text(heatmap_summary_csv(results), encoding="utf-8")
    write_summary(
        out / "heatmap_summary.json", "heatmap", config,
        {str(n0): {"fp": results[n0].report.fp_count, "fn": results[n0].report.fn_count,
                   "tp": results[n0].report.tp_count, "tn": results[n0].report.tn_count}
         for n0 in config.sample_sizes},
    )
    outputs += ["heatmap_summary.csv", "heatmap_summary.json"]
    _write_manifest(out, RunManifest(
        command="heatmap",
        version=__version__,
        master_seed=seed,
        parameters={**config_echo(config), "us_per_km": us_per_km,
                    "topology": str(topo_path)},
        topology_sha256=_sha256(topo_path),
        outputs=outputs,
    ))


def _calibrated_chain_topology(result: CalibrationResult, us_per_km: float) -> Topology:
    """A chain topology whose routed path reproduces a calibrated model."""
    k = result.hops
    stage_mean = result.model.stage_means_us[0]
    length = result.model.propagation_us / (us_per_km * k)
    if stage_mean > 1.0:
        service, load = 1.0, 1.0 - 1.0 / stage_mean
    else:
        # stage mean <= 1 us is not reachable with unit service time
        service, load = stage_mean / 2.0, 0.5
    node_ids = ["src"] + [f"h{i}" for i in range(1, k)] + ["dst"]
    nodes = [NodeSpec("src", Role.ACO)]
    nodes += [NodeSpec(nid, Role.TRANSIT) for nid in node_ids[1:-1]]
    nodes += [NodeSpec("dst", Role.MACO)]
    links = [
        LinkSpec(f"hop{i + 1}", node_ids[i], node_ids[i + 1], length, load, service)
        for i in range(k)
    ]
    return Topology("calibrated-path", tuple(nodes), tuple(links))


@main.command()
@click.option("--offset", required=True, type=float, help="propagation offset in us")
@click.option("--mean", "queue_mean", required=True, type=float,
              help="total queuing mean in us")
@click.option("--threshold", default=82.0, show_default=True)
@click.option("--target", required=True, type=float,
              help="target fraction at or below the threshold")
@click.option("--max-hops", default=8, show_default=True)
@click.option("--tolerance", default=0.01, show_default=True)
@click.option("--us-per-km", default=5.0, show_default=True)
@_out_dir_option
def calibrate(offset, queue_mean, threshold, target, max_hops, tolerance, us_per_km,
              out_dir):
    """Fit an equal-stage path model to a (mean, tail fraction) aggregate."""
    try:
        result = calibrate_path(offset, queue_mean, threshold, target,
                                max_hops=max_hops, tolerance=tolerance)
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from exc
    except CalibrationError as exc:
        raise InfeasibleError(str(exc)) from exc

    click.echo(f"hops={result.hops} stage_mean={result.model.stage_means_us[0]!r} "
               f"achieved={result.achieved_fraction:.6f} (target {target})")
    click.echo(f"path mean: {result.model.mean_us!r} us")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    outputs = []
    if offset > 0:
        fragment = _calibrated_chain_topology(result, us_per_km)
        (out / "calibrated_path.yaml").write_text(serialize_topology(fragment),
                                                  encoding="utf-8")
        outputs.append("calibrated_path.yaml")
    else:
        click.echo("offset is 0; skipping topology fragment (links need length > 0)")
    _write_manifest(out, RunManifest(
        command="calibrate",
        version=__version__,
        master_seed=None,
        parameters={"offset": offset, "mean": queue_mean, "threshold": threshold,
                    "target": target, "max_hops": max_hops, "tolerance": tolerance,
                    "us_per_km": us_per_km},
        topology_sha256=None,
        outputs=outputs,
    ))


if __name__ == "__main__":
    main()
