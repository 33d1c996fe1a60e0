"""Per-sample trace records and their delimited-text file format."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Mapping

from .graph import ResourceConfig

WHOLE_WORKFLOW = "*"


@dataclass(frozen=True)
class TraceRecord:
    """One sampling event.

    ``node_id`` is the function whose config changed, or ``"*"`` for samples
    that reconfigure the whole workflow; for those rows ``cpu``/``mem`` hold
    totals over all nodes. ``configs`` lists the config of every node that
    ran in the sample as ``id=cpu/mem`` pairs joined by ``;``.
    """

    sample_idx: int
    method: str
    node_id: str
    op_type: str
    cpu: float
    mem: int
    runtime_s: float
    cost: float
    accepted: bool
    wall_note: float
    configs: str = ""

    def config_map(self) -> dict[str, ResourceConfig]:
        return decode_configs(self.configs)


FIELDNAMES = [f.name for f in fields(TraceRecord)]


def encode_configs(configs: Mapping[str, ResourceConfig]) -> str:
    return ";".join(f"{nid}={c.cpu!r}/{c.mem}" for nid, c in sorted(configs.items()))


def decode_configs(text: str) -> dict[str, ResourceConfig]:
    out: dict[str, ResourceConfig] = {}
    if not text:
        return out
    for part in text.split(";"):
        nid, _, rest = part.rpartition("=")
        cpu, mem = rest.split("/")
        out[nid] = ResourceConfig(float(cpu), int(mem))
    return out


class Tracer:
    """Collects records for one search run and hands out sample indices."""

    def __init__(self, method: str):
        self.method = method
        self.records: list[TraceRecord] = []

    def __len__(self) -> int:
        return len(self.records)

    def record(
        self,
        node_id: str,
        op_type: str,
        cpu: float,
        mem: int,
        runtime_s: float,
        cost: float,
        accepted: bool,
        configs: Mapping[str, ResourceConfig],
    ) -> TraceRecord:
        rec = TraceRecord(
            sample_idx=len(self.records),
            method=self.method,
            node_id=node_id,
            op_type=op_type,
            cpu=float(cpu),
            mem=int(mem),
            runtime_s=float(runtime_s),
            cost=float(cost),
            accepted=bool(accepted),
            wall_note=float(runtime_s),
            configs=encode_configs(configs),
        )
        self.records.append(rec)
        return rec

    def record_workflow(self, op_type, configs, runtime_s, cost, accepted) -> TraceRecord:
        cpu = round(sum(c.cpu for c in configs.values()), 9)
        mem = sum(c.mem for c in configs.values())
        return self.record(WHOLE_WORKFLOW, op_type, cpu, mem, runtime_s, cost, accepted, configs)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dumps_trace(records: Iterable[TraceRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDNAMES)
    for r in records:
        w.writerow([_fmt(getattr(r, k)) for k in FIELDNAMES])
    return buf.getvalue()


def write_trace(records: Iterable[TraceRecord], path: str | Path) -> None:
    Path(path).write_text(dumps_trace(records))


def loads_trace(text: str) -> list[TraceRecord]:
    rows = csv.DictReader(io.StringIO(text))
    out = []
    for row in rows:
        out.append(
            TraceRecord(
                sample_idx=int(row["sample_idx"]),
                method=row["method"],
                node_id=row["node_id"],
                op_type=row["op_type"],
                cpu=float(row["cpu"]),
                mem=int(row["mem"]),
                runtime_s=float(row["runtime_s"]),
                cost=float(row["cost"]),
                accepted=row["accepted"] == "1",
                wall_note=float(row["wall_note"]),
                configs=row["configs"],
            )
        )
    return out


def read_trace(path: str | Path) -> list[TraceRecord]:
    return loads_trace(Path(path).read_text())


def summarize(records: list[TraceRecord]) -> dict[str, float | int]:
    """Search totals recomputed purely from the trace."""
    total_time = 0.0
    total_cost = 0.0
    for r in records:
        total_time += r.wall_note
        total_cost += r.cost
    return {
        "samples": len(records),
        "accepted": sum(r.accepted for r in records),
        "sampling_time_s": total_time,
        "sampling_cost": total_cost,
    }
