"""Command-line front end: speed solvers, figure-style sweeps, PDE runs.

Every command is deterministic: identical configuration produces
byte-identical CSV (fixed %.12g formatting, no timestamps in data rows).
Exit codes: 0 clean, 1 on configuration/flag parse failure, 2 on solver
failure or any per-point error in a sweep.
"""
from __future__ import annotations

import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import argparse

import numpy as np

from . import model as _model
from . import pdesim, shooting, speed
from .errors import GfkppError

_COMMANDS = ("speed", "existence", "cubic", "sweep-m2", "transition", "slope",
             "pde", "consistency", "trajectory")


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits with code 1 on parse failures."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


@dataclass
class RunConfig:
    """Resolved invocation: command, model keys, command options."""

    command: str
    model_keys: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _parse_range(spec: str) -> list[float]:
    """a:b:step inclusive grid with exact decimal endpoints."""
    try:
        a, b, step = (float(tok) for tok in spec.split(":"))
    except ValueError:
        raise ValueError(f"range must be a:b:step, got {spec!r}") from None
    if step <= 0 or b < a:
        raise ValueError(f"range needs b >= a and step > 0, got {spec!r}")
    n = int(round((b - a) / step))
    vals = [a + i * step for i in range(n + 1)]
    if vals[-1] > b + 1e-12:
        vals.pop()
    return [round(v, 12) for v in vals]


def _split_config(text: str) -> tuple[dict, dict]:
    """Flat keys plus [section] blocks; returns (top_level, sections)."""
    top: dict[str, str] = {}
    sections: dict[str, dict[str, str]] = {}
    current = top
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            current = sections.setdefault(name, {})
            continue
        if "=" not in line:
            raise ValueError(f"malformed config line: {raw!r}")
        key, val = line.split("=", 1)
        current[key.strip()] = val.strip()
    return top, sections


_MODEL_KEYS = ("d1", "d2", "m1", "m2", "reaction.kind", "reaction.k",
               "reaction.p0", "reaction.coeffs")


def _resolve_model(args, cfg_keys: dict) -> _model.GfkppModel:
    """Command-line flags override config-file keys."""
    kv = {k: v for k, v in cfg_keys.items() if k in _MODEL_KEYS}
    if args.d1 is not None:
        kv["d1"] = repr(args.d1)
    if args.d2 is not None:
        kv["d2"] = repr(args.d2)
    if args.m1 is not None:
        kv["m1"] = repr(args.m1)
    if args.m2 is not None:
        kv["m2"] = repr(args.m2)
    if args.coeffs is not None:
        kv["reaction.kind"] = "polynomial"
        kv["reaction.coeffs"] = args.coeffs
    elif args.p0 is not None or getattr(args, "cubic", False):
        if args.p0 is None:
            raise ValueError("--cubic needs --p0")
        kv["reaction.kind"] = "cubic"
        kv["reaction.k"] = repr(args.k if args.k is not None else 1.0)
        kv["reaction.p0"] = repr(args.p0)
    elif args.k is not None:
        kv["reaction.kind"] = "quadratic"
        kv["reaction.k"] = repr(args.k)
    kv.setdefault("reaction.kind", "quadratic")
    kv.setdefault("reaction.k", "1.0")
    text = "\n".join(f"{k} = {v}" for k, v in kv.items())
    return _model.model_from_config(text)


def _opt(args, cfg: dict, name: str, cast, default):
    val = getattr(args, name.replace("-", "_"), None)
    if val is not None:
        return val
    if name in cfg:
        return cast(cfg[name])
    return default


def _write(out_path: str | None, text: str) -> None:
    if out_path is None or out_path == "-":
        sys.stdout.write(text)
    else:
        with open(out_path, "w") as fh:
            fh.write(text)


def _pool_map(fn, tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, tasks))  # preserves input order


# --- per-point workers (module-level for pickling) ---------------------------

def _speed_point_task(task):
    d2, m, k, d1, m1 = task
    try:
        c, front = speed.speed_point(d2, m, k=k, d1=d1, m1=m1)
        return (d2, m, _fmt(c), front)
    except Exception as exc:
        return (d2, m, "nan", f"error: {exc}")


def _transition_task(task):
    d2, k, d1, m1 = task
    try:
        tr = speed.transition_scan(d2, k=k, d1=d1, m1=m1)
        return (d2, _fmt(tr.m_trans))
    except Exception as exc:
        return (d2, f"error: {exc}")


def _slope_task(task):
    d2, k, d1, m1 = task
    try:
        return (d2, _fmt(speed.asymptotic_slope(d2, k=k, d1=d1, m1=m1)))
    except Exception as exc:
        return (d2, f"error: {exc}")


# --- commands ----------------------------------------------------------------

def _cmd_speed(args, cfg) -> int:
    model = _resolve_model(args, cfg)
    tag, ss = speed.solve_speed_set(model)
    fields = [tag, ss.regime, _fmt(ss.c_star) if ss.c_star is not None else "nan"]
    if ss.c_secondary is not None:
        fields.append(_fmt(ss.c_secondary))
    _write(args.out, ",".join(fields) + "\n")
    return 0


def _cmd_existence(args, cfg) -> int:
    model = _resolve_model(args, cfg)
    _write(args.out, speed.classify_existence(model) + "\n")
    return 0


def _cmd_cubic(args, cfg) -> int:
    args.cubic = True
    model = _resolve_model(args, cfg)
    ss = speed.closed_form_cubic(model)
    tag = speed.classify_existence(model)
    _write(args.out, f"{tag},{ss.regime},{_fmt(ss.c_star)},{_fmt(ss.steepness)}\n")
    return 0


def _cmd_sweep_m2(args, cfg) -> int:
    k = _opt(args, cfg, "k", float, 1.0)
    d1 = _opt(args, cfg, "d1", float, 1.0)
    m1 = _opt(args, cfg, "m1", float, 0.0)
    d2_list = [float(v) for v in
               _opt(args, cfg, "d2-list", str, "0.5,1,2").split(",")]
    m_vals = _parse_range(_opt(args, cfg, "m2-range", str, "0:10:0.1"))
    tasks = [(d2, m, k, d1, m1) for d2 in d2_list for m in m_vals]
    rows = _pool_map(_speed_point_task, tasks, args.jobs)
    lines = ["d2,m2_minus_m1,c_star,regime"]
    errors = 0
    for d2, m, c, front in rows:
        errors += front.startswith("error")
        lines.append(f"{_fmt(d2)},{_fmt(m)},{c},{front}")
    _write(args.out, "\n".join(lines) + "\n")
    return 2 if errors else 0


def _fit_comment(pairs, lo, hi, label) -> str | None:
    pts = [(d, v) for d, v in pairs if lo <= d <= hi and v is not None]
    if len(pts) < 3:
        return None
    slope, intercept, r2 = speed.linear_fit([p[0] for p in pts], [p[1] for p in pts])
    return (f"# fit {label} d2=[{_fmt(lo)},{_fmt(hi)}]: "
            f"slope={_fmt(slope)} intercept={_fmt(intercept)} r2={_fmt(r2)}")


def _cmd_transition(args, cfg) -> int:
    k = _opt(args, cfg, "k", float, 1.0)
    d1 = _opt(args, cfg, "d1", float, 1.0)
    m1 = _opt(args, cfg, "m1", float, 0.0)
    d2_vals = _parse_range(_opt(args, cfg, "d2-range", str, "0.5:3:0.25"))
    rows = _pool_map(_transition_task, [(d2, k, d1, m1) for d2 in d2_vals], args.jobs)
    lines = ["d2,m_trans"]
    pairs = []
    errors = 0
    for d2, val in rows:
        lines.append(f"{_fmt(d2)},{val}")
        if val.startswith("error"):
            errors += 1
            pairs.append((d2, None))
        else:
            pairs.append((d2, float(val)))
    for lo, hi in ((0.5, 3.0), (10.0, 20.0)):
        comment = _fit_comment(pairs, lo, hi, "m_trans")
        if comment:
            lines.append(comment)
    _write(args.out, "\n".join(lines) + "\n")
    return 2 if errors else 0


def _cmd_slope(args, cfg) -> int:
    k = _opt(args, cfg, "k", float, 1.0)
    d1 = _opt(args, cfg, "d1", float, 1.0)
    m1 = _opt(args, cfg, "m1", float, 0.0)
    d2_vals = _parse_range(_opt(args, cfg, "d2-range", str, "0.3:3:0.3"))
    rows = _pool_map(_slope_task, [(d2, k, d1, m1) for d2 in d2_vals], args.jobs)
    lines = ["d2,K"]
    pairs = []
    errors = 0
    for d2, val in rows:
        lines.append(f"{_fmt(d2)},{val}")
        if val.startswith("error"):
            errors += 1
        else:
            pairs.append((np.log(d2), float(val)))
    if len(pairs) >= 3:
        slope, intercept, r2 = speed.linear_fit([p[0] for p in pairs],
                                                [p[1] for p in pairs])
        lines.append(f"# fit K vs log(d2): slope={_fmt(slope)} "
                     f"intercept={_fmt(intercept)} r2={_fmt(r2)}")
    _write(args.out, "\n".join(lines) + "\n")
    return 2 if errors else 0


def _cmd_pde(args, cfg) -> int:
    model = _resolve_model(args, cfg)
    t_end = _opt(args, cfg, "t-end", float, 40.0)
    save_every = _opt(args, cfg, "save-every", float, 0.5)
    n = _opt(args, cfg, "grid-n", int, 4096)
    x_min = _opt(args, cfg, "x-min", float, None)
    x_max = _opt(args, cfg, "x-max", float, None)
    if x_min is None or x_max is None:
        c_hint = (abs(model.m1) + abs(model.m2)
                  + 2.0 * (max(model.d1, model.d2)
                           * max(model.reaction.deriv(0.0), 0.1)) ** 0.5)
        lo, hi = pdesim.suggested_domain(c_hint, t_end)
        x_min = lo if x_min is None else x_min
        x_max = hi if x_max is None else x_max
    grid = pdesim.Grid1D(x_min, x_max, n)
    frames = pdesim.simulate_gfkpp(model, grid, pdesim.smoothed_step(grid),
                                   t_end, save_every)
    trace = pdesim.measure_front_speed(frames, grid,
                                       level=_opt(args, cfg, "level", float, 0.5))
    echo = _model.model_to_config(model) + (
        f"t_end = {t_end!r}\nsave_every = {save_every!r}\n"
        f"grid = {n} cells on [{x_min!r}, {x_max!r}]")
    _write(args.out, pdesim.front_trace_csv(trace, config_echo=echo))
    if args.frames_out:
        _write(args.frames_out, pdesim.frames_csv(frames, grid, config_echo=echo))
    print(f"c_emp = {_fmt(trace.c_emp)}  residual = {_fmt(trace.residual)}",
          file=sys.stderr)
    return 0


def _cmd_consistency(args, cfg) -> int:
    r1 = _opt(args, cfg, "r1", float, 2.0)
    r2 = _opt(args, cfg, "r2", float, 1.0)
    t_end = _opt(args, cfg, "t-end", float, 10.0)
    save_every = _opt(args, cfg, "save-every", float, 0.5)
    n = _opt(args, cfg, "grid-n", int, 512)
    if args.equal_coeffs:
        d1 = d2 = _opt(args, cfg, "d1", float, 1.0)
        m1 = m2 = _opt(args, cfg, "m1", float, 0.0)
        grid = pdesim.Grid1D(0.0, 20.0, n)
        p_ic = np.full(n, 0.3)
        n_ic = np.ones(n)
    else:
        d1 = _opt(args, cfg, "d1", float, 1.0)
        d2 = _opt(args, cfg, "d2", float, 1.1)
        m1 = _opt(args, cfg, "m1", float, 0.0)
        m2 = _opt(args, cfg, "m2", float, 0.0)
        grid = pdesim.Grid1D(-30.0, 50.0, max(n, 1024))
        p_ic = pdesim.smoothed_step(grid, 0.0, width=1.0)
        n_ic = np.ones(grid.n_cells)
    dt = pdesim.stable_dt(grid, d1, d2, m1, m2)
    full = pdesim.simulate_two_species(((d1, m1, r1), (d2, m2, r2)), grid,
                                       (p_ic * n_ic, (1.0 - p_ic) * n_ic),
                                       t_end, save_every, dt=dt)
    reduced_model = _model.GfkppModel(
        d1=d1, d2=d2, m1=m1, m2=m2,
        reaction=_model.reaction_from_growth_rates(r1, r2))
    reduced = pdesim.simulate_gfkpp(reduced_model, grid, p_ic, t_end,
                                    save_every, dt=dt)
    dev = pdesim.consistency_deviation(full, reduced)
    _write(args.out, f"sup_deviation,{_fmt(dev)}\n")
    return 0


def _cmd_trajectory(args, cfg) -> int:
    model = _resolve_model(args, cfg)
    c = _opt(args, cfg, "c", float, None)
    if c is None:
        raise ValueError("trajectory needs --c")
    origin = _opt(args, cfg, "from", float, 1.0)
    target = _opt(args, cfg, "to", float, 0.0)
    branch = {"wu": shooting.WU, "ws": shooting.WS,
              "wss": shooting.WSS}[_opt(args, cfg, "branch", str, "wu")]
    eq = _model.linearize(model, c, origin)
    res = shooting.shoot(model, c, shooting.ManifoldSpec(eq, branch), target,
                         section=_opt(args, cfg, "section", float, None))
    _write(args.out, shooting.trajectory_csv(res))
    print(f"outcome = {res.outcome}  p_final = {_fmt(res.p_final)}  "
          f"q_final = {_fmt(res.q_final)}", file=sys.stderr)
    return 0


_HANDLERS = {
    "speed": _cmd_speed,
    "existence": _cmd_existence,
    "cubic": _cmd_cubic,
    "sweep-m2": _cmd_sweep_m2,
    "transition": _cmd_transition,
    "slope": _cmd_slope,
    "pde": _cmd_pde,
    "consistency": _cmd_consistency,
    "trajectory": _cmd_trajectory,
}


def _add_model_flags(p: _Parser) -> None:
    p.add_argument("--k", type=float, default=None)
    p.add_argument("--p0", type=float, default=None)
    p.add_argument("--cubic", action="store_true")
    p.add_argument("--coeffs", type=str, default=None,
                   help="ascending polynomial coefficients, comma separated")
    p.add_argument("--d1", type=float, default=None)
    p.add_argument("--d2", type=float, default=None)
    p.add_argument("--m1", type=float, default=None)
    p.add_argument("--m2", type=float, default=None)


def build_parser() -> _Parser:
    p = _Parser(prog="gfkpp", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name, parents=[], add_help=True)
        _add_model_flags(sp)
        sp.add_argument("--config", type=str, default=None)
        sp.add_argument("--out", type=str, default=None)
        sp.add_argument("--jobs", type=int,
                        default=max(1, (os.cpu_count() or 1)))
        sp.add_argument("--c", type=float, default=None)
        if name in ("sweep-m2",):
            sp.add_argument("--m2-range", dest="m2_range", type=str, default=None)
            sp.add_argument("--d2-list", dest="d2_list", type=str, default=None)
        if name in ("transition", "slope"):
            sp.add_argument("--d2-range", dest="d2_range", type=str, default=None)
        if name in ("pde", "consistency"):
            sp.add_argument("--grid-n", dest="grid_n", type=int, default=None)
            sp.add_argument("--t-end", dest="t_end", type=float, default=None)
            sp.add_argument("--save-every", dest="save_every", type=float,
                            default=None)
        if name == "pde":
            sp.add_argument("--x-min", dest="x_min", type=float, default=None)
            sp.add_argument("--x-max", dest="x_max", type=float, default=None)
            sp.add_argument("--level", type=float, default=None)
            sp.add_argument("--frames-out", dest="frames_out", type=str,
                            default=None)
        if name == "consistency":
            sp.add_argument("--equal-coeffs", dest="equal_coeffs",
                            action="store_true")
            sp.add_argument("--r1", type=float, default=None)
            sp.add_argument("--r2", type=float, default=None)
        if name == "trajectory":
            sp.add_argument("--from", dest="from", type=float, default=None)
            sp.add_argument("--to", dest="to", type=float, default=None)
            sp.add_argument("--branch", type=str, default=None,
                            choices=("wu", "ws", "wss"))
            sp.add_argument("--section", type=float, default=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    cfg_top: dict = {}
    cfg_sections: dict = {}
    try:
        if args.config:
            with open(args.config) as fh:
                cfg_top, cfg_sections = _split_config(fh.read())
    except (OSError, ValueError) as exc:
        print(f"gfkpp: config error: {exc}", file=sys.stderr)
        return 1
    cfg = dict(cfg_top)
    cfg.update(cfg_sections.get(args.command, {}))
    try:
        return _HANDLERS[args.command](args, cfg)
    except (GfkppError,) as exc:
        print(f"gfkpp: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"gfkpp: config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
