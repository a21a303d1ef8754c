"""Command-line entry point: ``specx <command> --config PATH [--out PATH] [--size N] [--json|--csv]``.

Exit codes: 0 success, 2 not converged, 3 infeasible oracle size,
4 configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import limit_solvers as ls
from . import localization as lz
from . import models as md
from . import torus_lab as tl
from .config import RunConfig, load_config
from .errors import (ClassUnsupported, ConfigError, InfeasibleSize, InvalidSpec, NoConvergence,
                     NotConverged, UnsupportedLattice)
from .spectral_sets import SpectralSet

REPORT_SCHEMA = 1

EXIT_OK, EXIT_NOT_CONVERGED, EXIT_INFEASIBLE, EXIT_CONFIG = 0, 2, 3, 4

COMMANDS = ("ess-spec", "compare", "finite-section", "torus-lab", "hvz", "landstad-check")


@dataclass
class Result:
    """A report tree plus the flat rows used for CSV output."""

    report: dict
    rows: list = field(default_factory=list)

    def add_set(self, series: str, s: SpectralSet):
        self.rows += [(series, "interval", a, b) for a, b in s.intervals]
        self.rows += [(series, "point", p, p) for p in s.points]

    def add_values(self, series: str, values):
        self.rows += [(series, "value", float(v), float(v)) for v in values]


# ---------------------------------------------------------------------------
# serialization

def _plain(x):
    """JSON-ready copy: numpy scalars/arrays to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return v if math.isfinite(v) else ("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    return x


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    now = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return now.strftime("%Y-%m-%dT%H:%M:%SZ")


def dumps_json(report: dict) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip float repr."""
    return json.dumps(_plain(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def dumps_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["series", "kind", "lo", "hi"])
    for series, kind, lo, hi in rows:
        w.writerow([series, kind, repr(float(lo)), repr(float(hi))])
    return buf.getvalue()


def atomic_write(path: str, text: str):
    """Write through a temporary file in the target directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".specx-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# commands

def _require_model(cfg: RunConfig) -> md.ModelSpec:
    if cfg.model is None:
        raise InvalidSpec("this command needs a 'model' section")
    return cfg.model


def _assemble(cfg: RunConfig) -> lz.EssentialSpectrumReport:
    return lz.essential_spectrum_report(md.build(_require_model(cfg)), cfg.localization_cfg())


def _full_spectrum(spec: md.ModelSpec, cfg: RunConfig) -> SpectralSet | None:
    """Spectrum of the operator itself where a class solver provides it."""
    if spec.variant == "two_body":
        return ls.two_body_spectrum(md.build(spec), cfg.tolerances.two_body_tol)
    if spec.variant == "sparse_klaus":
        return md.klaus_spectrum(spec, cfg.tolerances.two_body_tol)
    return None


def cmd_ess_spec(cfg: RunConfig) -> Result:
    spec = _require_model(cfg)
    rep = _assemble(cfg)
    out = Result({"command": "ess-spec", "model": spec.to_dict(),
                  "essential_spectrum": rep.spectrum.to_dict(),
                  "directions": [r.to_dict() for r in rep.records]})
    out.add_set("essential_spectrum", rep.spectrum)
    full = _full_spectrum(spec, cfg)
    if full is not None:
        out.report["spectrum"] = full.to_dict()
        out.add_set("spectrum", full)
    if spec.variant == "warped_periodic":
        bloch = ls.bloch_spectrum(ls.lift_period(md.unwarped_operator(spec)))
        out.report["unwarped_bloch"] = bloch.to_dict()
        out.add_set("unwarped_bloch", bloch)
    return out


def _oracle_entry(op, N: int, assembled: SpectralSet, cfg: RunConfig) -> tuple[dict, md.OracleReport]:
    t0 = time.perf_counter()
    rep = md.finite_section_oracle(op, N, cfg.oracle.filter_cfg(cfg.tolerances.merge_gap))
    dist = rep.compare(assembled)
    entry = rep.to_dict()
    entry["N"] = N
    entry["seconds"] = round(time.perf_counter() - t0, 3)
    # isolated assembled points: distance to the retained oracle set
    if assembled.points and not rep.spectrum.is_empty:
        entry["point_distances"] = [float(d) for d in rep.spectrum.distance_to(list(assembled.points))]
    entry["distances"] = dist
    return entry, rep


def _comparison(cfg: RunConfig, op, assembled: SpectralSet, sizes) -> tuple[dict, list]:
    entries, reports = [], []
    for N in sizes:
        e, r = _oracle_entry(op, N, assembled, cfg)
        entries.append(e)
        reports.append(r)
    final = entries[-1]["distances"][cfg.oracle.metric]
    verdict = {"metric": cfg.oracle.metric, "tolerance": cfg.oracle.tolerance,
               "value": final, "pass": bool(final <= cfg.oracle.tolerance)}
    return {"oracle": entries, "verdict": verdict}, reports


def cmd_compare(cfg: RunConfig, size: int | None = None) -> Result:
    out = cmd_ess_spec(cfg)
    out.report["command"] = "compare"
    assembled = SpectralSet.from_dict(out.report["essential_spectrum"])
    sizes = [size] if size else list(cfg.oracle.sizes)
    comp, reports = _comparison(cfg, md.build(cfg.model), assembled, sizes)
    out.report.update(comp)
    for N, r in zip(sizes, reports):
        out.add_set(f"oracle_N{N}", r.spectrum)
    return out


def cmd_finite_section(cfg: RunConfig, size: int | None = None) -> Result:
    spec = _require_model(cfg)
    N = size or cfg.oracle.sizes[-1]
    rep = md.finite_section_oracle(md.build(spec), N, cfg.oracle.filter_cfg(cfg.tolerances.merge_gap))
    out = Result({"command": "finite-section", "model": spec.to_dict(), "N": N, **rep.to_dict()})
    out.add_values("cloud", rep.cloud)
    out.add_values("removed", rep.removed_values)
    out.add_set("oracle", rep.spectrum)
    return out


def _torus_operator(name: str, M: int, seed: int) -> tl.CyclicGroupOperator:
    rng = np.random.default_rng(seed)
    if name == "random":
        return tl.CyclicGroupOperator(rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M)))
    if name == "hermitian":
        a = rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))
        return tl.CyclicGroupOperator(a + a.conj().T)
    if name == "shift":
        return tl.shift(M, 1)
    if name == "diagonal":
        return tl.multiplication(rng.standard_normal(M))
    if name == "localized_projector":
        return tl.localized_projector(M)
    return tl.position_momentum_product(M)


def cmd_torus_lab(cfg: RunConfig) -> Result:
    rows = []
    for M in cfg.torus.sizes:
        T = _torus_operator(cfg.torus.operator, M, cfg.torus.seed)
        avg = tl.average_over_characters(T)
        weyl = max(tl.weyl_residual(M, x, k) for x in range(M) for k in range(M))
        entry = {
            "M": M,
            "averaging_error": float(np.max(np.abs(avg.matrix - tl.diagonal_part(T).matrix))),
            "inversion_error": tl.inversion_error(T),
            "weyl_residual": weyl,
        }
        entry["pass"] = bool(entry["averaging_error"] <= 1e-13 and entry["inversion_error"] <= 1e-10
                             and weyl <= 1e-13)
        rows.append(entry)
    out = Result({"command": "torus-lab", "operator": cfg.torus.operator, "seed": cfg.torus.seed,
                  "groups": rows, "pass": all(r["pass"] for r in rows)})
    for r in rows:
        out.rows.append(("inversion_error", f"M={r['M']}", r["inversion_error"], r["inversion_error"]))
    return out


def cmd_hvz(cfg: RunConfig, size: int | None = None) -> Result:
    spec = _require_model(cfg)
    if spec.variant != "grassmann_nbody":
        raise UnsupportedLattice("hvz needs a grassmann_nbody model")
    hvz = md.hvz_spectrum(spec, cfg.tolerances.two_body_tol)
    rep = _assemble(cfg)
    out = Result({"command": "hvz", "model": spec.to_dict(), "hvz_spectrum": hvz.to_dict(),
                  "essential_spectrum": rep.spectrum.to_dict(),
                  "directions": [r.to_dict() for r in rep.records]})
    out.add_set("hvz_spectrum", hvz)
    sizes = [size] if size else list(cfg.oracle.sizes)
    comp, reports = _comparison(cfg, md.build(spec), hvz, sizes)
    out.report.update(comp)
    for N, r in zip(sizes, reports):
        out.add_set(f"oracle_N{N}", r.spectrum)
    return out


def cmd_landstad_check(cfg: RunConfig) -> Result:
    sizes = sorted(set(cfg.torus.sizes) | {64}) if len(cfg.torus.sizes) < 2 else list(cfg.torus.sizes)
    if min(sizes) < 8:
        raise InvalidSpec("landstad-check needs torus sizes >= 8")
    profiles = []
    for M in sizes:
        p = tl.landstad_profile(tl.position_momentum_product(M))
        profiles.append({"M": M, "commutator": p.commutator, "translation": p.translation,
                         "smallest": list(p.smallest), "monotone": p.monotone_toward_origin()})
    small = [q["smallest"][0] for q in profiles]
    decreasing = all(b < a for a, b in zip(small, small[1:]))
    M0 = sizes[0]
    proj = tl.compactness_report(tl.localized_projector(M0))
    sh = tl.compactness_report(tl.shift(M0, 1))
    out = Result({"command": "landstad-check", "profiles": profiles,
                  "smallest_decreasing": decreasing,
                  "compactness": {"M": M0, "localized_projector": proj.to_dict(),
                                  "shift": sh.to_dict()},
                  "pass": bool(decreasing and all(q["monotone"] for q in profiles))})
    for q in profiles:
        for k, v in enumerate(q["commutator"]):
            out.rows.append((f"commutator_M{q['M']}", str(k), float(v), float(v)))
    return out


# ---------------------------------------------------------------------------
# entry point

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="specx", description="Essential spectra of lattice operators.")
    p.add_argument("--version", action="version", version=f"specx {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, metavar="PATH")
        s.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
        s.add_argument("--size", type=int, metavar="N", help="override the oracle size schedule")
        fmt = s.add_mutually_exclusive_group()
        fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
        fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv")
        s.set_defaults(fmt="json")
    return p


def run(command: str, cfg: RunConfig, size: int | None = None) -> Result:
    if size is not None and size <= 0:
        raise InfeasibleSize("--size must be positive")
    if command == "ess-spec":
        res = cmd_ess_spec(cfg)
    elif command == "compare":
        res = cmd_compare(cfg, size)
    elif command == "finite-section":
        res = cmd_finite_section(cfg, size)
    elif command == "torus-lab":
        res = cmd_torus_lab(cfg)
    elif command == "hvz":
        res = cmd_hvz(cfg, size)
    elif command == "landstad-check":
        res = cmd_landstad_check(cfg)
    else:
        raise ValueError(f"unknown command {command!r}")
    res.report.update({"schema": REPORT_SCHEMA, "version": __version__,
                       "config": cfg.to_dict(), "timestamp": _timestamp()})
    return res


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        res = run(args.command, cfg, args.size)
    except (ConfigError, InvalidSpec, UnsupportedLattice, ClassUnsupported) as exc:
        print(f"specx: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NotConverged, NoConvergence) as exc:
        print(f"specx: not converged: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except InfeasibleSize as exc:
        print(f"specx: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    text = dumps_csv(res.rows) if args.fmt == "csv" else dumps_json(res.report)
    path = args.out or cfg.output.get(args.fmt)
    if path:
        atomic_write(path, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
