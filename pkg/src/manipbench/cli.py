"""Operator commands: validate a run config, execute it, inspect components,
and render reports from trial logs.

Exit codes are scripted against: 0 clean, 1 domain failure (validation
findings, failed checks, malformed records), 2 config or file failure,
3 transport failure. Every error path prints one ``ERROR <code>:`` line
to stderr before exiting. ``MANIPBENCH_LOG`` selects the log level.
"""

import csv
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import click

from .behaviors import BUILTIN_COMPUTES
from .bus import (
    ComponentBus,
    ComponentDescriptor,
    SocketClient,
    interface_class,
    run_conformance,
)
from .components import register_reference_components
from .errors import (
    CallTimeoutError,
    ConfigError,
    EmptyRecordsError,
    ManipBenchError,
    ProtocolDefError,
    TransportError,
    UnknownComponentError,
)
from .harness import build_protocol, compare, plan_trials, run_protocol
from .harness.report import read_records
from .sim import EMBODIMENT_PRESETS, build_world
from .statemachine import behavior_from_json, validate_behavior

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_CONFIG = 2
EXIT_TRANSPORT = 3

RUN_CONFIG_SCHEMA_VERSION = 1
ROBOT_ID = "sim_robot"
APPARATUS_ID = "sim_apparatus"

log = logging.getLogger("manipbench")


def _fail(code: int, message: str):
    line = " ".join(str(message).split())
    click.echo(f"ERROR {code}: {line}", err=True)
    sys.exit(code)


def _setup_logging():
    name = os.environ.get("MANIPBENCH_LOG", "WARNING").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level,
                        format="%(levelname)s %(name)s: %(message)s")


@click.group()
def main():
    """Manipulation pipeline benchmarking."""
    _setup_logging()


# -- config loading ----------------------------------------------------------
#
# File-level problems (missing, unreadable, unparsable, wrong shape) are
# config failures, exit 2. Semantic problems inside parsed documents are
# findings for `validate` (exit 1) and config failures for `run`.

def _load_json(path: Path, what: str):
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {what} {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} {path} is not valid JSON: {exc}") from exc


CONFIG_FIELDS = {"schema_version", "protocol", "scenario", "behaviors",
                 "bindings", "embodiment", "parameters", "userdata", "seed",
                 "out", "notes"}


def _load_run_config(config_path) -> dict:
    path = Path(config_path)
    doc = _load_json(path, "config")
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    version = doc.get("schema_version", RUN_CONFIG_SCHEMA_VERSION)
    if version != RUN_CONFIG_SCHEMA_VERSION:
        raise ConfigError(f"unsupported config schema_version {version!r}")
    unknown = set(doc) - CONFIG_FIELDS
    if unknown:
        raise ConfigError(f"unknown config fields {sorted(unknown)}")
    for name in ("protocol", "behaviors", "bindings"):
        if name not in doc:
            raise ConfigError(f"config {path} is missing {name!r}")
    behaviors = doc["behaviors"]
    if isinstance(behaviors, str):
        behaviors = [behaviors]
    if not isinstance(behaviors, list) or not behaviors:
        raise ConfigError("config behaviors must be a path or list of paths")
    bindings = doc["bindings"]
    if not isinstance(bindings, dict):
        raise ConfigError("config bindings must be an object")
    for name in ("parameters", "userdata"):
        if not isinstance(doc.get(name, {}), dict):
            raise ConfigError(f"config {name} must be an object")

    base = path.parent
    return {
        "path": path,
        "protocol_path": base / doc["protocol"],
        "scenario": doc.get("scenario"),
        "base": base,
        "behavior_paths": [base / p for p in behaviors],
        "bindings": bindings,
        "embodiment": doc.get("embodiment", "arm_a"),
        "parameters": doc.get("parameters", {}),
        "userdata": doc.get("userdata", {}),
        "seed": doc.get("seed"),
        "out": doc.get("out"),
    }


def _load_documents(cfg: dict) -> dict:
    """Read and parse every referenced file; failures here are exit 2."""
    protocol_doc = _load_json(cfg["protocol_path"], "protocol")
    if not isinstance(protocol_doc, dict):
        raise ConfigError(f"protocol {cfg['protocol_path']} must be a "
                          f"JSON object")
    scenario_ref = cfg["scenario"] or protocol_doc.get("scenario")
    if scenario_ref is None:
        raise ConfigError("no scenario file named by the config or the "
                          "protocol")
    scenario_path = cfg["base"] / scenario_ref
    scenario_doc = _load_json(scenario_path, "scenario")
    behavior_docs = []
    for p in cfg["behavior_paths"]:
        doc = _load_json(p, "behavior file")
        if isinstance(doc, dict) and "behaviors" in doc:
            # entries inherit the file-level schema_version
            version = doc.get("schema_version", 1)
            docs = [b if not isinstance(b, dict) or "schema_version" in b
                    else dict(b, schema_version=version)
                    for b in doc["behaviors"]]
        else:
            docs = [doc]
        for b in docs:
            if not isinstance(b, dict):
                raise ConfigError(f"behavior file {p} holds a non-object "
                                  f"entry")
            behavior_docs.append((p, b))
    return {
        "protocol": protocol_doc,
        "scenario": scenario_doc,
        "scenario_path": scenario_path,
        "behaviors": behavior_docs,
    }


def _behavior_slots(behavior) -> set:
    return {s.binding for s in behavior.states
            if s.kind in ("service_call", "action_call")}


def _reference_ids() -> set:
    bus = ComponentBus()
    return set(register_reference_components(bus))


def _semantic_findings(cfg: dict, docs: dict) -> tuple:
    """Build everything buildable; returns (findings, built artifacts)."""
    findings = []
    built = {"protocol": None, "world": None, "nominal": None,
             "behaviors": {}}

    try:
        built["protocol"] = build_protocol(docs["protocol"])
    except ProtocolDefError as exc:
        findings.append(("protocol", str(exc)))

    try:
        built["world"], built["nominal"] = build_world(docs["scenario"])
    except (ConfigError, ValueError) as exc:
        findings.append(("scenario", str(exc)))

    for path, doc in docs["behaviors"]:
        try:
            behavior = behavior_from_json(doc)
        except (ValueError, KeyError, TypeError) as exc:
            findings.append(("behavior", f"{path}: {exc}"))
            continue
        if behavior.name in built["behaviors"]:
            findings.append(("behavior",
                             f"duplicate behavior name {behavior.name!r}"))
        built["behaviors"][behavior.name] = behavior

    names = set(built["behaviors"])
    for behavior in built["behaviors"].values():
        for finding in validate_behavior(behavior, known_behaviors=names):
            where = f" at state {finding.state!r}" if finding.state else ""
            findings.append((finding.code,
                             f"behavior {behavior.name!r}{where}: "
                             f"{finding.message}"))

    known_ids = _reference_ids() | {ROBOT_ID, APPARATUS_ID}
    endpoint_slots = set()
    for slot, target in cfg["bindings"].items():
        if isinstance(target, dict):
            if "endpoint" not in target:
                findings.append(("binding",
                                 f"slot {slot!r}: endpoint binding needs an "
                                 f"'endpoint' field"))
            endpoint_slots.add(slot)
        elif isinstance(target, str):
            if target not in known_ids:
                findings.append(("binding",
                                 f"slot {slot!r} is bound to unknown "
                                 f"component {target!r}"))
        else:
            findings.append(("binding",
                             f"slot {slot!r}: binding must be a component id "
                             f"or an endpoint object"))

    bound = set(cfg["bindings"])
    for behavior in built["behaviors"].values():
        for slot in sorted(_behavior_slots(behavior) - bound):
            findings.append(("unbound-slot",
                             f"behavior {behavior.name!r} needs slot "
                             f"{slot!r}, which the config does not bind"))
        for state in behavior.states:
            if state.kind == "compute" \
                    and state.binding not in BUILTIN_COMPUTES:
                findings.append(("unknown-compute",
                                 f"behavior {behavior.name!r} state "
                                 f"{state.name!r} uses unknown compute "
                                 f"{state.binding!r}"))

    protocol = built["protocol"]
    if protocol is not None:
        if protocol.behavior not in built["behaviors"]:
            findings.append(("protocol",
                             f"protocol behavior {protocol.behavior!r} is "
                             f"not among the loaded behaviors"))
        if protocol.reset_behavior is not None \
                and protocol.reset_behavior not in built["behaviors"]:
            findings.append(("protocol",
                             f"reset behavior {protocol.reset_behavior!r} "
                             f"is not among the loaded behaviors"))
        world = built["world"]
        for factor in protocol.factors:
            target = protocol.target_for(factor)
            levels = protocol.factors[factor]
            if target.kind == "embodiment":
                for level in levels:
                    if level not in EMBODIMENT_PRESETS:
                        findings.append(("factor",
                                         f"factor {factor!r}: no embodiment "
                                         f"preset named {level!r}"))
            elif target.kind == "object" and world is not None:
                for level in levels:
                    if level not in world.objects:
                        findings.append(("factor",
                                         f"factor {factor!r}: scenario has "
                                         f"no object named {level!r}"))
            elif target.kind == "binding":
                for level in levels:
                    if not isinstance(level, str) \
                            or level not in known_ids:
                        findings.append(("factor",
                                         f"factor {factor!r}: level "
                                         f"{level!r} is not a known "
                                         f"component id"))

    if cfg["embodiment"] not in EMBODIMENT_PRESETS:
        findings.append(("config",
                         f"no embodiment preset named "
                         f"{cfg['embodiment']!r}"))
    if cfg["seed"] is not None and not isinstance(cfg["seed"], int):
        findings.append(("config", "config seed must be an integer"))

    return findings, built


# -- validate ------------------------------------------------------------------

@main.command("validate")
@click.option("--config", "config_path", required=True,
              type=click.Path(), help="Run config JSON file.")
def cmd_validate(config_path):
    """Check a run config end to end without executing it."""
    try:
        cfg = _load_run_config(config_path)
        docs = _load_documents(cfg)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, exc)
    findings, built = _semantic_findings(cfg, docs)
    if findings:
        for code, message in findings:
            click.echo(f"FINDING {code}: {message}")
        _fail(EXIT_DOMAIN,
              f"validation found {len(findings)} problem(s)")
    protocol = built["protocol"]
    click.echo(f"OK: {cfg['path']} is valid; "
               f"{protocol.total_trials()} trial(s) planned over "
               f"{len(built['behaviors'])} behavior(s)")


# -- run -------------------------------------------------------------------------

def _descriptor_from_json(doc: dict, endpoint: str) -> ComponentDescriptor:
    return ComponentDescriptor(
        id=doc["id"],
        interface=interface_class(doc["interface"]),
        accepted_inputs=tuple(doc.get("accepted_inputs", ())),
        output_kind=doc.get("output_kind", "pose"),
        transport="socket",
        endpoint=endpoint,
    )


def _register_endpoints(bus, bindings: dict, lazy: bool) -> dict:
    """Register socket bindings; returns slot -> component id.

    Without --lazy each endpoint is probed for its descriptor now, so a
    dead endpoint stops the run before any trial. With --lazy the
    binding object itself must carry the descriptor fields and the
    first call finds out.
    """
    resolved = {}
    for slot, target in bindings.items():
        if isinstance(target, str):
            resolved[slot] = target
            continue
        endpoint = target.get("endpoint")
        if not endpoint:
            raise ConfigError(f"slot {slot!r}: endpoint binding needs an "
                              f"'endpoint' field")
        if lazy:
            missing = [k for k in ("id", "interface") if k not in target]
            if missing:
                raise ConfigError(
                    f"slot {slot!r}: --lazy needs inline descriptor fields "
                    f"{missing} for {endpoint}")
            descriptor = _descriptor_from_json(target, endpoint)
        else:
            client = SocketClient(endpoint)
            try:
                doc = client.call("describe", {}, timeout=10.0)
            finally:
                client.close()
            descriptor = _descriptor_from_json(doc, endpoint)
            claimed = target.get("id")
            if claimed is not None and claimed != descriptor.id:
                raise ConfigError(
                    f"slot {slot!r}: endpoint {endpoint} describes itself "
                    f"as {descriptor.id!r}, config claims {claimed!r}")
        bus.register(descriptor)
        resolved[slot] = descriptor.id
        log.info("registered %s from %s for slot %s", descriptor.id,
                 endpoint, slot)
    return resolved


def _write_report_files(report, out_dir: Path) -> None:
    (out_dir / "report.json").write_text(
        json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n")
    (out_dir / "report.txt").write_text(report.render_text())
    _write_report_csv(report, out_dir / "report.csv")
    _write_report_figure(report, out_dir / "report.png")


def _write_report_csv(report, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        key_cols = list(report.by) if report.by else ["group"]
        writer.writerow(key_cols + ["trials", "success", "failure",
                                    "aborted", "preempted", "rate"])
        for key, stats in report.groups:
            label = list(key) if report.by else ["all"]
            writer.writerow(label + [stats.trials, stats.success,
                                     stats.failure, stats.aborted,
                                     stats.preempted, f"{stats.rate:.6f}"])
        totals = report.totals
        writer.writerow(["total"] + [""] * (len(key_cols) - 1)
                        + [totals.trials, totals.success, totals.failure,
                           totals.aborted, totals.preempted,
                           f"{totals.rate:.6f}"])


def _write_report_figure(report, path: Path) -> None:
    # Pulled in here, not at module import: only this writer needs it.
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = [", ".join(str(v) for v in key) if key else "all"
              for key, _ in report.groups]
    rates = [stats.rate for _, stats in report.groups]
    width = max(4.0, 1.1 * len(labels) + 2.0)
    fig, ax = plt.subplots(figsize=(width, 4.2))
    bars = ax.bar(range(len(labels)), rates, color="#4878a8")
    for bar, (_, stats) in zip(bars, report.groups):
        ax.annotate(f"{stats.success}/{stats.trials}",
                    (bar.get_x() + bar.get_width() / 2, bar.get_height()),
                    ha="center", va="bottom", fontsize=8)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylim(0.0, 1.1)
    ax.set_ylabel("success rate")
    grouping = " x ".join(report.by) if report.by else "all trials"
    ax.set_title(f"success rate by {grouping} "
                 f"({report.totals.trials} trials)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


@main.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(),
              help="Run config JSON file.")
@click.option("--seed", type=int, default=None,
              help="Master seed override.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Output directory (default from config, else runs/<name>).")
@click.option("--no-timestamps", is_flag=True,
              help="Omit wall-clock fields from records, for golden logs.")
@click.option("--fail-fast", is_flag=True,
              help="Stop at the first trial that does not succeed.")
@click.option("--lazy", is_flag=True,
              help="Skip the startup probe of endpoint bindings.")
def cmd_run(config_path, seed, out_dir, no_timestamps, fail_fast, lazy):
    """Execute a run config; writes trials.jsonl, report.json, report.txt,
    report.csv, and report.png into the output directory."""
    try:
        cfg = _load_run_config(config_path)
        docs = _load_documents(cfg)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, exc)
    findings, built = _semantic_findings(cfg, docs)
    if findings:
        summary = "; ".join(f"{code}: {message}"
                            for code, message in findings[:3])
        _fail(EXIT_CONFIG, f"config invalid ({len(findings)} problem(s)): "
                           f"{summary}")

    protocol = built["protocol"]
    if seed is None:
        seed = cfg["seed"]
    if seed is not None:
        protocol = dataclasses.replace(protocol, seed=seed)

    bus = ComponentBus()
    register_reference_components(bus)
    try:
        bindings = _register_endpoints(bus, cfg["bindings"], lazy)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, exc)
    except (TransportError, CallTimeoutError, OSError) as exc:
        _fail(EXIT_TRANSPORT, f"endpoint probe failed: {exc}")

    if out_dir is None:
        out_dir = cfg["out"]
        if out_dir is not None:
            out_dir = cfg["base"] / out_dir
    if out_dir is None:
        out_dir = Path("runs") / cfg["path"].stem
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    planned = protocol.total_trials()
    log.info("running %d trial(s) into %s", planned, out_dir)
    try:
        records = run_protocol(
            protocol, bindings, built["world"],
            behaviors=built["behaviors"],
            nominal_poses=built["nominal"],
            parameters=cfg["parameters"],
            initial_userdata=cfg["userdata"],
            bus=bus,
            log_path=out_dir / "trials.jsonl",
            fail_fast=fail_fast,
            record_timestamps=not no_timestamps,
            default_embodiment=cfg["embodiment"],
            robot_id=ROBOT_ID,
            apparatus_id=APPARATUS_ID,
        )
    except ConfigError as exc:
        _fail(EXIT_CONFIG, exc)
    except (TransportError, CallTimeoutError) as exc:
        _fail(EXIT_TRANSPORT, exc)
    except ManipBenchError as exc:
        _fail(EXIT_DOMAIN, exc)

    report = compare(records)
    _write_report_files(report, out_dir)
    successes = report.totals.success
    click.echo(f"{len(records)} trial(s) executed, {successes} succeeded "
               f"(rate {report.totals.rate:.4f}); outputs in {out_dir}")
    if len(records) < planned:
        _fail(EXIT_DOMAIN,
              f"stopped early: {len(records)} of {planned} trial(s) ran")


# -- components ---------------------------------------------------------------

@main.group("components")
def cmd_components():
    """Inspect and conformance-test components."""


@cmd_components.command("list")
def components_list():
    """List the reference components."""
    bus = ComponentBus()
    handles = register_reference_components(bus)
    rows = [("id", "interface", "inputs", "output", "transport")]
    for component_id in sorted(handles):
        d = handles[component_id].descriptor
        rows.append((d.id, d.interface.name,
                     ",".join(d.accepted_inputs) or "-",
                     d.output_kind if d.interface.name == "grasp_planner"
                     else "-",
                     d.transport))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    for row in rows:
        click.echo("  ".join(cell.ljust(w)
                             for cell, w in zip(row, widths)).rstrip())


@cmd_components.command("conformance")
@click.option("--id", "component_id", default=None,
              help="Registered component id to check.")
@click.option("--endpoint", default=None,
              help="HOST:PORT of a socket component to check.")
def components_conformance(component_id, endpoint):
    """Run the interface conformance suite; nonzero on any failed check."""
    if component_id and endpoint:
        _fail(EXIT_CONFIG, "--id and --endpoint are mutually exclusive")
    bus = ComponentBus()
    register_reference_components(bus)
    if endpoint:
        client = SocketClient(endpoint)
        try:
            doc = client.call("describe", {}, timeout=10.0)
        except (TransportError, CallTimeoutError, OSError) as exc:
            _fail(EXIT_TRANSPORT, f"cannot reach {endpoint}: {exc}")
        finally:
            client.close()
        try:
            descriptor = _descriptor_from_json(doc, endpoint)
        except (KeyError, ManipBenchError) as exc:
            _fail(EXIT_DOMAIN,
                  f"{endpoint} returned an unusable descriptor: {exc}")
        bus.register(descriptor)
        targets = [descriptor.id]
    elif component_id:
        targets = [component_id]
    else:
        targets = sorted(_reference_ids())

    failed = 0
    for target in targets:
        try:
            report = run_conformance(bus, target)
        except UnknownComponentError as exc:
            _fail(EXIT_DOMAIN, exc)
        except (TransportError, CallTimeoutError) as exc:
            _fail(EXIT_TRANSPORT, exc)
        click.echo(report.render_text())
        if not report.passed:
            failed += 1
    if failed:
        _fail(EXIT_DOMAIN, f"{failed} component(s) failed conformance")


# -- report ----------------------------------------------------------------------

@main.command("report")
@click.option("--trials", "trials_path", required=True, type=click.Path(),
              help="trials.jsonl produced by run.")
@click.option("--by", default=None,
              help="Comma-separated grouping factors (default: every "
                   "condition factor).")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Also write report files into this directory.")
def cmd_report(trials_path, by, out_dir):
    """Aggregate a trial log and print the comparison table."""
    path = Path(trials_path)
    if not path.is_file():
        _fail(EXIT_CONFIG, f"cannot read trial log {path}")
    grouping = None
    if by is not None:
        grouping = tuple(part.strip() for part in by.split(",")
                         if part.strip())
    try:
        records = read_records(path)
        report = compare(records, by=grouping)
    except (ConfigError, EmptyRecordsError) as exc:
        _fail(EXIT_DOMAIN, exc)
    click.echo(report.render_text(), nl=False)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_report_files(report, out)
        log.info("report files written to %s", out)


if __name__ == "__main__":
    main()
