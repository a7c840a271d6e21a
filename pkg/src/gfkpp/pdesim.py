"""Method-of-lines simulation and empirical front-speed measurement.

Space: second-order central differences for the diffusion term and
first-order upwind for advection (side chosen per the local sign of M),
zero-gradient boundaries.  Time: explicit two-stage Runge-Kutta with
dt = 0.4 * min(dx^2 / (2 max(D1,D2)), dx / max(|M1|,|M2|)); upwinding keeps
the advection monotone at the cost of first-order smearing, acceptable since
speeds, not profiles, are the measured output.

A single run advances sequentially; independent runs share no state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import AlignmentError, InstabilityError, NonFrontError, PreconditionError
from .model import GfkppModel

BOX_TOL = 1e-8        # frames are expected to stay inside [-tol, 1+tol]
ABORT_TOL = 1e-6      # beyond this the run aborts as unstable
CFL_SAFETY = 0.4


@dataclass(frozen=True)
class Grid1D:
    """Uniform cell-centered grid on [x_min, x_max]."""

    x_min: float
    x_max: float
    n_cells: int

    def __post_init__(self):
        if self.n_cells < 64:
            raise PreconditionError("grid needs at least 64 cells")
        if not self.x_max > self.x_min:
            raise PreconditionError("empty domain")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @cached_property
    def x(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx


@dataclass
class FieldFrame:
    """Field snapshot: values has shape (n,) for a scalar run and (2, n)
    for a two-species run."""

    t: float
    values: np.ndarray


@dataclass
class FrontTrace:
    times: np.ndarray
    positions: np.ndarray
    c_emp: float
    residual: float


def stable_dt(grid: Grid1D, d1: float, d2: float, m1: float, m2: float) -> float:
    dx = grid.dx
    diff = dx * dx / (2.0 * max(d1, d2))
    adv = dx / max(abs(m1), abs(m2), 1e-12)
    return CFL_SAFETY * min(diff, adv)


def smoothed_step(grid: Grid1D, x0: float = 0.0, width: float | None = None) -> np.ndarray:
    """Default initial profile 1 / (1 + exp((x - x0)/w)), w = 2 dx.

    Steeper than any admissible front tail, so monostable runs select the
    minimal speed.
    """
    w = 2.0 * grid.dx if width is None else width
    arg = np.clip((grid.x - x0) / w, -500.0, 500.0)
    return 1.0 / (1.0 + np.exp(arg))


def suggested_domain(c_expected: float, t_end: float, x0: float = 0.0,
                     back: float = 30.0) -> tuple[float, float]:
    """Domain sized so the front stays away from the boundary:
    x_max >= x0 + 1.25 * c * t_end."""
    ahead = 1.25 * max(c_expected, 0.5) * t_end
    return (x0 - back, x0 + ahead)


def _neumann_pxx(p: np.ndarray, dx: float) -> np.ndarray:
    out = np.empty_like(p)
    out[1:-1] = p[:-2] - 2.0 * p[1:-1] + p[2:]
    out[0] = p[1] - p[0]
    out[-1] = p[-2] - p[-1]
    return out / (dx * dx)


def _upwind_px(p: np.ndarray, m: np.ndarray | float, dx: float) -> np.ndarray:
    back = np.empty_like(p)
    back[1:] = p[1:] - p[:-1]
    back[0] = 0.0
    fwd = np.empty_like(p)
    fwd[:-1] = p[1:] - p[:-1]
    fwd[-1] = 0.0
    return np.where(np.asarray(m) > 0.0, back, fwd) / dx


def _save_times(t_end: float, save_every: float) -> np.ndarray:
    n = int(math.floor(t_end / save_every + 1e-9))
    times = np.arange(1, n + 1) * save_every
    if times.size == 0 or times[-1] < t_end - 1e-9:
        times = np.append(times, t_end)
    return times


def _check_box(values: np.ndarray, lo: float, hi: float, t: float) -> None:
    vmin = float(np.min(values))
    vmax = float(np.max(values))
    if not (math.isfinite(vmin) and math.isfinite(vmax)):
        raise InstabilityError(f"non-finite field at t={t}", FieldFrame(t, values))
    if vmin < lo - ABORT_TOL or vmax > hi + ABORT_TOL:
        raise InstabilityError(f"field left [{lo}, {hi}] at t={t}",
                               FieldFrame(t, values))


def simulate_gfkpp(model: GfkppModel, grid: Grid1D, ic: np.ndarray, t_end: float,
                   save_every: float, dt: float | None = None) -> list[FieldFrame]:
    """Advance p_t = D(p) p_xx - M(p) p_x + f(p) and return saved frames
    (the initial frame included)."""
    p = np.asarray(ic, dtype=float).copy()
    if p.shape != (grid.n_cells,):
        raise PreconditionError("initial profile does not match the grid")
    if np.min(p) < -BOX_TOL or np.max(p) > 1.0 + BOX_TOL:
        raise PreconditionError("initial profile must lie in [0, 1]")
    if t_end <= 0.0:
        raise PreconditionError("t_end must be positive")
    if dt is None:
        dt = stable_dt(grid, model.d1, model.d2, model.m1, model.m2)
    dx = grid.dx
    d1, dd = model.d1, model.d2 - model.d1
    m1, dm = model.m1, model.m2 - model.m1
    coeffs = np.asarray(model.reaction.coeffs)

    def rhs(u: np.ndarray) -> np.ndarray:
        mv = m1 + dm * u
        out = (d1 + dd * u) * _neumann_pxx(u, dx)
        if m1 != 0.0 or dm != 0.0:
            out -= mv * _upwind_px(u, mv, dx)
        return out + np.polynomial.polynomial.polyval(u, coeffs)

    frames = [FieldFrame(0.0, p.copy())]
    t = 0.0
    for t_save in _save_times(t_end, save_every):
        while t < t_save - 1e-12:
            step = min(dt, t_save - t)
            k1 = rhs(p)
            p1 = p + step * k1
            p = p + 0.5 * step * (k1 + rhs(p1))
            t += step
        _check_box(p, 0.0, 1.0, t)
        frames.append(FieldFrame(t, p.copy()))
    return frames


def simulate_two_species(params, grid: Grid1D, ic, t_end: float,
                         save_every: float, dt: float | None = None) -> list[FieldFrame]:
    """Advance two uncoupled linear-growth equations
    n_j,t = D_j n_j,xx - M_j n_j,x + r_j n_j.

    params is ((d1, m1, r1), (d2, m2, r2)); ic is (n1, n2) profiles.
    Frames carry values of shape (2, n).
    """
    (d1, m1, r1), (d2, m2, r2) = params
    n = np.stack([np.asarray(ic[0], dtype=float), np.asarray(ic[1], dtype=float)])
    if n.shape != (2, grid.n_cells):
        raise PreconditionError("initial profiles do not match the grid")
    if np.min(n) < -BOX_TOL:
        raise PreconditionError("initial profiles must be nonnegative")
    if dt is None:
        dt = stable_dt(grid, d1, d2, m1, m2)
    dx = grid.dx

    def rhs(u: np.ndarray) -> np.ndarray:
        out = np.empty_like(u)
        for j, (dj, mj, rj) in enumerate(((d1, m1, r1), (d2, m2, r2))):
            out[j] = dj * _neumann_pxx(u[j], dx) + rj * u[j]
            if mj != 0.0:
                out[j] -= mj * _upwind_px(u[j], mj, dx)
        return out

    frames = [FieldFrame(0.0, n.copy())]
    t = 0.0
    top = float(np.max(n))
    for t_save in _save_times(t_end, save_every):
        while t < t_save - 1e-12:
            step = min(dt, t_save - t)
            k1 = rhs(n)
            n1 = n + step * k1
            n = n + 0.5 * step * (k1 + rhs(n1))
            t += step
        _check_box(n, 0.0, math.inf, t)
        frames.append(FieldFrame(t, n.copy()))
        top = max(top, float(np.max(n)))
    return frames


def measure_front_speed(frames: list[FieldFrame], grid: Grid1D,
                        level: float = 0.5, window: float = 0.5) -> FrontTrace:
    """Level-crossing front positions and a least-squares speed fit.

    The crossing is linearly interpolated; the speed is fitted over the final
    `window` fraction of the frames (at least 10 of them).
    """
    xs, ts = [], []
    for fr in frames:
        v = np.asarray(fr.values) - level
        if v.ndim != 1:
            raise NonFrontError("front measurement needs scalar frames")
        down = np.flatnonzero((v[:-1] >= 0.0) & (v[1:] < 0.0))
        up = np.flatnonzero((v[:-1] < 0.0) & (v[1:] >= 0.0))
        if len(down) + len(up) != 1:
            raise NonFrontError(
                f"frame at t={fr.t} has {len(down) + len(up)} level crossings")
        i = int(down[0] if len(down) else up[0])
        xs.append(grid.x[i] + grid.dx * v[i] / (v[i] - v[i + 1]))
        ts.append(fr.t)
    ts = np.asarray(ts)
    xs = np.asarray(xs)
    n_fit = max(int(round(window * len(ts))), 2)
    if n_fit < 10:
        raise NonFrontError("need at least 10 frames in the fit window")
    tf, xf = ts[-n_fit:], xs[-n_fit:]
    slope, intercept = np.polyfit(tf, xf, 1)
    resid = float(np.sqrt(np.mean((xf - (slope * tf + intercept)) ** 2)))
    return FrontTrace(times=ts, positions=xs, c_emp=float(slope), residual=resid)


def consistency_deviation(full: list[FieldFrame], reduced: list[FieldFrame]) -> float:
    """Max over frames of the sup-norm of |n1/(n1+n2) - p_reduced|.

    Both runs must share the grid and save times.
    """
    if len(full) != len(reduced):
        raise AlignmentError(f"frame counts differ: {len(full)} vs {len(reduced)}")
    dev = 0.0
    for ff, fr in zip(full, reduced):
        if abs(ff.t - fr.t) > 1e-9:
            raise AlignmentError(f"save times differ: {ff.t} vs {fr.t}")
        if ff.values.shape[-1] != fr.values.shape[-1]:
            raise AlignmentError("grids differ between the two runs")
        n1, n2 = ff.values
        total = n1 + n2
        if float(np.min(total)) <= 0.0:
            raise AlignmentError("total population vanished; frequency undefined")
        dev = max(dev, float(np.max(np.abs(n1 / total - fr.values))))
    return dev


# --- CSV emitters ------------------------------------------------------------

def frames_csv(frames: list[FieldFrame], grid: Grid1D,
               config_echo: str | None = None) -> str:
    two = frames and np.asarray(frames[0].values).ndim == 2
    lines = []
    if config_echo:
        lines.extend(f"# {ln}" for ln in config_echo.strip().splitlines())
    lines.append("t,x,n1,n2" if two else "t,x,p")
    for fr in frames:
        if two:
            for xv, a, b in zip(grid.x, fr.values[0], fr.values[1]):
                lines.append(f"{fr.t:.12g},{xv:.12g},{a:.12g},{b:.12g}")
        else:
            for xv, a in zip(grid.x, fr.values):
                lines.append(f"{fr.t:.12g},{xv:.12g},{a:.12g}")
    return "\n".join(lines) + "\n"


def front_trace_csv(trace: FrontTrace, config_echo: str | None = None) -> str:
    lines = []
    if config_echo:
        lines.extend(f"# {ln}" for ln in config_echo.strip().splitlines())
    lines.append("t,x_front")
    lines.extend(f"{t:.12g},{x:.12g}" for t, x in zip(trace.times, trace.positions))
    return "\n".join(lines) + "\n"
