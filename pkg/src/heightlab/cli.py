"""Command-line entry point.

Exit codes: 0 success, 1 domain error (bad input included), 2 resource
exhausted, 3 internal invariant violated (the witness goes to stderr).
"""

from __future__ import annotations

import argparse
import math
import sys
import traceback
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from heightlab import bifurcation as bif
from heightlab import degeneration as deg
from heightlab import dynamics as dyn
from heightlab.algebra import Poly, ProjPointK, format_poly, format_rational
from heightlab.errors import DomainError, HeightlabError, InvariantViolation
from heightlab.family import format_family
from heightlab.parallel import default_workers, map_chunks
from heightlab.parser import parse_family, parse_point

COMMANDS = (
    "height",
    "orbit",
    "classify",
    "resultant",
    "degenerate",
    "escape",
    "activity",
    "preperiodic-params",
    "density",
)

# flag -> (type, default); None defaults are filled per command
OPTIONS = {
    "family": (str, None),
    "family_file": (str, None),
    "point": (str, None),
    "nmax": (int, None),
    "iters": (int, None),
    "grid": (str, None),
    "threshold": (float, bif.DEFAULT_THRESHOLD),
    "pairs": (str, None),
    "out": (str, None),
    "format": (str, "text"),
    "workers": (int, None),
    "lenient": (bool, False),
}

NMAX_DEFAULTS = {"height": 12, "orbit": 16, "classify": dyn.DEFAULT_NMAX}
ITERS_DEFAULTS = {"degenerate": 6, "escape": 8, "activity": bif.DEFAULT_CAP, "density": bif.DEFAULT_CAP}
FORMATS = {
    "escape": ("text", "csv", "pgm"),
    "activity": ("text", "csv", "pgm"),
}


@dataclass
class RunConfig:
    command: str
    family: Optional[str] = None
    family_file: Optional[str] = None
    point: Optional[str] = None
    nmax: Optional[int] = None
    iters: Optional[int] = None
    grid: Optional[str] = None
    threshold: float = bif.DEFAULT_THRESHOLD
    pairs: Optional[str] = None
    out: Optional[str] = None
    format: str = "text"
    workers: int = field(default_factory=default_workers)
    lenient: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise DomainError(f"unknown command {self.command!r}")
        if self.nmax is None:
            self.nmax = NMAX_DEFAULTS.get(self.command, 12)
        if self.iters is None:
            self.iters = ITERS_DEFAULTS.get(self.command, 8)
        for name in ("nmax", "iters", "workers"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be positive")
        if not self.threshold > 0:
            raise DomainError("threshold must be positive")
        if self.format not in FORMATS.get(self.command, ("text",)):
            raise DomainError(f"format {self.format!r} not available for {self.command}")

    # -- resolved inputs --------------------------------------------------

    def family_text(self):
        if self.family is not None:
            return self.family
        if self.family_file is not None:
            with open(self.family_file, encoding="utf-8") as fh:
                return fh.read()
        raise DomainError("a family is required (--family or --family-file)")

    def marked_point(self):
        if self.point is None:
            raise DomainError("a marked point is required (--point)")
        return parse_point(self.point)

    def param_grid(self):
        if self.grid is None:
            raise DomainError("a grid is required (--grid x0,y0,x1,y1,W,H)")
        try:
            return bif.ParamGrid.parse(self.grid)
        except ValueError as exc:
            raise DomainError(f"bad grid {self.grid!r}: {exc}") from None

    def pair_list(self):
        if not self.pairs:
            raise DomainError("pairs are required (--pairs n:m,...)")
        out = []
        for item in self.pairs.split(","):
            try:
                n, m = (int(x) for x in item.split(":"))
            except ValueError:
                raise DomainError(f"bad pair {item!r}; expected n:m") from None
            if not n > m >= 0:
                raise DomainError(f"pair {item!r} needs n > m >= 0")
            out.append((n, m))
        return out


# -- structured text ---------------------------------------------------------


def format_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, Fraction):
        return format_rational(v)
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    if isinstance(v, (complex, np.complexfloating)):
        return f"{format_float(v.real)}{'+' if not v.imag < 0 else '-'}{format_float(abs(v.imag))}i"
    if isinstance(v, Poly):
        return format_poly(v)
    if isinstance(v, ProjPointK):
        return str(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(format_value(x) for x in v) + "]"
    return str(v)


def format_float(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def render(doc: dict, indent: int = 0) -> str:
    """Sorted-key text; dict values nest, lists of dicts become '-' items."""
    pad = "  " * indent
    lines = []
    for key in sorted(doc):
        v = doc[key]
        if isinstance(v, dict):
            lines.append(f"{pad}{key}:")
            lines.append(render(v, indent + 1))
        elif isinstance(v, list) and v and all(isinstance(x, dict) for x in v):
            lines.append(f"{pad}{key}:")
            for item in v:
                body = render(item, indent + 2).split("\n")
                body[0] = "  " * (indent + 1) + "- " + body[0].lstrip()
                lines.extend(body)
        else:
            lines.append(f"{pad}{key}: {format_value(v)}")
    return "\n".join(x for x in lines if x != "")


def pgm_bytes(pixels: np.ndarray) -> bytes:
    h, w = pixels.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + pixels.astype(np.uint8).tobytes()


def activity_pixels(values: np.ndarray, cap: int) -> np.ndarray:
    """min(255, round(255 i / cap)) with halves rounded up, in integers."""
    i = values.astype(np.int64)
    return np.minimum(255, (510 * i + cap) // (2 * cap))


def escape_pixels(G: np.ndarray) -> np.ndarray:
    """Linear grey scale of G over its finite range; non-finite cells are 0."""
    finite = np.isfinite(G)
    out = np.zeros(G.shape, dtype=np.int64)
    if finite.any():
        lo, hi = float(G[finite].min()), float(G[finite].max())
        span = hi - lo if hi > lo else 1.0
        out[finite] = np.floor(255 * (G[finite] - lo) / span + 0.5).astype(np.int64)
    return np.clip(out, 0, 255)


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(format_float(x) if isinstance(x, float) else str(x) for x in r))
    return "\n".join(lines) + "\n"


# -- commands ----------------------------------------------------------------


def _enclosure(enc: dyn.HeightEnclosure):
    return {
        "D_total": enc.D_total,
        "degree_sequence": list(enc.degree_sequence),
        "hi": enc.hi,
        "lo": enc.lo,
        "max_deviation": enc.max_deviation,
        "n_used": enc.n_used,
        "width": enc.width,
    }


def cmd_height(cfg, F):
    a = cfg.marked_point()
    enc = dyn.canonical_height(F, a, cfg.nmax)
    return {"family": format_family(F), "point": a, "height": _enclosure(enc)}


def cmd_orbit(cfg, F):
    a = cfg.marked_point()
    orb = dyn.orbit(F, a, cfg.nmax)
    doc = {
        "family": format_family(F),
        "point": a,
        "points": [str(p) for p in orb.points],
        "degrees": orb.degrees,
        "drops": orb.drops,
        "deviations": orb.deviations,
    }
    doc["cycle"] = {"m": orb.cycle[0], "p": orb.cycle[1]} if orb.cycle else None
    return doc


def cmd_classify(cfg, F):
    a = cfg.marked_point()
    c = dyn.classify(F, a, cfg.nmax)
    doc = {"family": format_family(F), "point": a, "kind": c.kind, "height": _enclosure(c.enclosure)}
    if isinstance(c, dyn.Preperiodic):
        doc["m"], doc["p"] = c.m, c.p
    if isinstance(c, dyn.Undetermined):
        doc["cap"], doc["reason"] = c.cap, c.reason
        cert = c.certificate
        doc["isotriviality_certificate"] = (
            None if cert is None else {"start": cert.start, "values": list(cert.values)}
        )
    return doc


def cmd_resultant(cfg, F):
    rep = F.place_report
    return {
        "family": format_family(F),
        "resultant": F.res,
        "finite_places": [{"root": r, "q": q} for r, q in rep.finite_places],
        "q_infinity": rep.q_infinity,
        "D_total": rep.D_total,
    }


def _lift(cfg):
    a = cfg.marked_point()
    return deg.MarkedLift(a.a1, a.a2)


def cmd_degenerate(cfg, F):
    A = _lift(cfg)
    seq = deg.order_sequence(F, A, cfg.iters, lenient=cfg.lenient)
    deg.check_order_invariants(seq, F.d)
    return {
        "family": format_family(F),
        "lift": [A.A1, A.A2],
        "q": seq.q,
        "a": seq.a,
        "k": seq.k,
        "normalized": seq.normalized(F.d),
        "mode": seq.mode,
    }


def cmd_escape(cfg, F):
    A = _lift(cfg)
    grid = cfg.param_grid()
    N = cfg.iters
    seq = deg.order_sequence(F, A, N, lenient=True, mode="series")
    deg.check_order_invariants(seq, F.d)
    t = grid.points()
    chunks = map_chunks(lambda rows: deg.escape_values(F, A, t[rows], seq.k), t.shape[0], cfg.workers)
    G = np.concatenate(chunks, axis=1)
    if cfg.format == "pgm":
        return pgm_bytes(escape_pixels(G[-1]))
    if cfg.format == "csv":
        rows = []
        for (r, c), tv in np.ndenumerate(t):
            for n in range(N + 1):
                rows.append((float(tv.real), float(tv.imag), n, float(G[n, r, c])))
        return csv_text(["re(t)", "im(t)", "n", "G_n"], rows)
    sups = [float(np.nanmax(x)) if np.isfinite(x).any() else math.nan for x in np.abs(np.diff(G, axis=0))]
    return {
        "family": format_family(F),
        "lift": [A.A1, A.A2],
        "N": N,
        "k": seq.k,
        "sup_increments": sups,
        "nan_cells": int(np.count_nonzero(~np.isfinite(G[-1]))),
    }


def cmd_activity(cfg, F):
    a = cfg.marked_point()
    grid = cfg.param_grid()
    amap = bif.activity_map(F, a, grid, cfg.iters, cfg.threshold, workers=cfg.workers)
    if cfg.format == "pgm":
        return pgm_bytes(activity_pixels(amap.values, amap.cap))
    if cfg.format == "csv":
        t = grid.points()
        rows = [
            (float(tv.real), float(tv.imag), int(amap.values[r, c])) for (r, c), tv in np.ndenumerate(t)
        ]
        return csv_text(["re(t)", "im(t)", "i"], rows)
    return {
        "family": format_family(F),
        "point": a,
        "cap": amap.cap,
        "threshold": amap.threshold,
        "metric": amap.metric,
        "active_pixels": int(np.count_nonzero(amap.active)),
        "pixels": int(amap.values.size),
        "nan_cells": amap.nan_cells,
    }


def _rootset(rs: bif.RootSet):
    return {
        "n": rs.n,
        "m": rs.m,
        "degree": rs.degree,
        "method": rs.method,
        "roots": [
            {"value": z, "multiplicity": k, "collision": r, "certified": b}
            for (z, k), r, b in zip(rs.roots, rs.residuals, rs.bridged or [None] * len(rs.roots))
        ],
        "unverified": [{"value": z, "multiplicity": k, "collision": r} for z, k, r in rs.unverified],
        "degenerate": [{"value": z, "multiplicity": k} for z, k in rs.degenerate],
    }


def cmd_preperiodic(cfg, F):
    a = cfg.marked_point()
    out = []
    for n, m in cfg.pair_list():
        eq = bif.preperiodic_equation(F, a, n, m)
        if eq.identically_zero:
            out.append({"n": n, "m": m, "identically_preperiodic": True})
            continue
        entry = _rootset(bif.preperiodic_parameters(F, a, n, m, equation=eq))
        entry["identically_preperiodic"] = False
        out.append(entry)
    return {"family": format_family(F), "point": a, "pairs": out}


def cmd_density(cfg, F):
    a = cfg.marked_point()
    grid = cfg.param_grid()
    rep = bif.density_experiment(
        F, a, grid, cfg.pair_list(), cap=cfg.iters, threshold=cfg.threshold, workers=cfg.workers
    )
    return {
        "family": format_family(F),
        "point": a,
        "active_pixels": rep.active_pixels,
        "nonincreasing": rep.nonincreasing,
        "entries": [
            {
                "n": e.n,
                "m": e.m,
                "identically_preperiodic": e.identically_preperiodic,
                "degree": e.degree,
                "verified": e.verified,
                "unverified": e.unverified,
                "fraction_in_grid": e.fraction_in_grid,
                "median_distance": e.median_distance,
                "note": e.note or None,
            }
            for e in rep.entries
        ],
    }


HANDLERS = {
    "height": cmd_height,
    "orbit": cmd_orbit,
    "classify": cmd_classify,
    "resultant": cmd_resultant,
    "degenerate": cmd_degenerate,
    "escape": cmd_escape,
    "activity": cmd_activity,
    "preperiodic-params": cmd_preperiodic,
    "density": cmd_density,
}


def execute(cfg: RunConfig):
    """Run a command; returns str (text/CSV) or bytes (PGM)."""
    F = parse_family(cfg.family_text())
    result = HANDLERS[cfg.command](cfg, F)
    if isinstance(result, dict):
        return render({"command": cfg.command, **result}) + "\n"
    return result


def _emit(payload, out):
    if out is None:
        if isinstance(payload, bytes):
            sys.stdout.buffer.write(payload)
            sys.stdout.buffer.flush()
        else:
            sys.stdout.write(payload)
        return
    mode = "wb" if isinstance(payload, bytes) else "w"
    with open(out, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": "\n"})) as fh:
        fh.write(payload)


def run(cfg: RunConfig) -> int:
    try:
        _emit(execute(cfg), cfg.out)
        return 0
    except InvariantViolation as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        print(f"witness: {exc.witness!r}", file=sys.stderr)
        return 3
    except HeightlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # anything else is a bug, never a silent pass
        traceback.print_exc()
        print(f"witness: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


# -- argument handling -------------------------------------------------------


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        raise DomainError(message)


def build_parser():
    p = _ArgParser(prog="heightlab", description="Heights and bifurcations of algebraic families.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key=value file; command-line flags take precedence")
    for name, (typ, _) in OPTIONS.items():
        flag = "--" + name.replace("_", "-")
        if typ is bool:
            p.add_argument(flag, action="store_true", default=None)
        elif name == "format":
            p.add_argument(flag, choices=("text", "csv", "pgm"), default=None)
        else:
            p.add_argument(flag, type=typ, default=None)
    return p


def read_config_file(path):
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in OPTIONS:
                raise DomainError(f"{path}:{lineno}: unknown key {key!r}")
            typ = OPTIONS[key][0]
            if typ is bool:
                out[key] = value.lower() in ("1", "true", "yes", "on")
            else:
                try:
                    out[key] = typ(value)
                except ValueError:
                    raise DomainError(f"{path}:{lineno}: bad value for {key}") from None
    return out


def _bind_values(argv):
    """Attach each value flag to its next token so values like -2,-1,... or
    -1/3 are not mistaken for options."""
    valued = {"--config"} | {"--" + k.replace("_", "-") for k, (typ, _) in OPTIONS.items() if typ is not bool}
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in valued and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def config_from_args(argv) -> RunConfig:
    ns = build_parser().parse_args(_bind_values(list(argv)))
    merged = read_config_file(ns.config) if ns.config else {}
    for name in OPTIONS:
        v = getattr(ns, name)
        if v is not None:
            merged[name] = v
    if "workers" not in merged:
        merged["workers"] = default_workers()
    return RunConfig(command=ns.command, **merged)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(sys.argv[1:] if argv is None else argv)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
