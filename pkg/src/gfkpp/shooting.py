"""Phase-plane shooting for the planar traveling-wave system.

The profile system P' = Q, Q' = ((M(P)-c) Q - f(P)) / D(P) is integrated as a
graph Q(P) via

    dQ/dP = ((M(P)-c) Q - f(P)) / (D(P) Q),

which turns the infinite-time heteroclinic problem into a finite-domain one:
P is strictly monotone while Q < 0, and a Q -> 0 turning event is itself a
termination.  Everything below stays in the lower half-plane Q <= 0.

All entry points are pure functions of their arguments and safe to call
concurrently; trajectory buffers are per-call.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    IntegrationFailureError,
    InvalidManifoldError,
    NotAnEquilibriumError,
    PreconditionError,
    WindowViolationError,
)
from .model import (
    CENTER,
    SADDLE,
    SPIRAL_SINK,
    SPIRAL_SOURCE,
    STABLE_NODE,
    Equilibrium,
    GfkppModel,
    linearize,
)

# Termination tolerances: connect an order below the wave-speed bisection
# resolution so outcome classification never flickers at converged speeds.
DELTA_CONNECT = 1e-7
DELTA_TURN = 1e-9
TARGET_WINDOW = 1e-5  # eta
OFFSET_FACTOR = 1e-6  # manifold start offset = factor * |P* - p_target|
RTOL = 1e-10
ATOL = 1e-12
EIGEN_SEPARATION = 1e-6  # fast manifold needs lambda+/lambda- < 1 - this
SEPARATRIX_CHECKPOINTS = tuple(round(0.1 * i, 1) for i in range(1, 10))

# Square-root turning points leave |Q| ~ sqrt(h) at step underflow, so the
# literal DELTA_TURN threshold is unreachable there; underflow with |Q| below
# this bound is classified as the turning outcome instead of an error.
_UNDERFLOW_TURN_Q = 1e-6

WU = "unstable_wu"
WS = "stable_ws"
WSS = "fast_stable_wss"

CONNECT = "connect"
OVERSHOOT = "overshoot"
UNDERSHOOT = "undershoot"


@dataclass(frozen=True)
class PhasePoint:
    p: float
    q: float


@dataclass(frozen=True)
class ManifoldSpec:
    """Which invariant branch to track and from where.

    unstable_Wu leaves a saddle leftward (Q < 0); stable_Ws enters a saddle
    moving leftward (traced backward, P increasing, Q < 0); fast_stable_Wss
    enters a stable node tangent to the fast eigenvector (traced backward).
    offset overrides the default start displacement along the eigenvector.
    """

    origin: Equilibrium
    branch: str
    offset: float | None = None


@dataclass
class ShootResult:
    trajectory: list[PhasePoint]
    outcome: str
    q_at_section: float | None
    p_final: float
    q_final: float


@dataclass
class _Trace:
    status: str  # 'end' | 'connect' | 'turn' | 'dive'
    p: float
    q: float
    points: list[tuple[float, float]]
    captured: dict[float, float]


def _make_rhs(model: GfkppModel, c: float):
    rev = tuple(reversed(model.reaction.coeffs))
    d1 = model.d1
    dd = model.d2 - model.d1
    m1c = model.m1 - c
    dm = model.m2 - model.m1

    def rhs(p: float, q: float) -> float:
        fv = 0.0
        for a in rev:
            fv = fv * p + a
        return ((m1c + dm * p) * q - fv) / ((d1 + dd * p) * q)

    return rhs


def _dp54_attempt(rhs, x, y, h, k1):
    """One Dormand-Prince 5(4) attempt; returns (ok, y5, err, k_last)."""
    try:
        k2 = rhs(x + 0.2 * h, y + h * (0.2 * k1))
        k3 = rhs(x + 0.3 * h, y + h * (0.075 * k1 + 0.225 * k2))
        k4 = rhs(x + 0.8 * h,
                 y + h * ((44.0 / 45.0) * k1 - (56.0 / 15.0) * k2 + (32.0 / 9.0) * k3))
        k5 = rhs(x + (8.0 / 9.0) * h,
                 y + h * ((19372.0 / 6561.0) * k1 - (25360.0 / 2187.0) * k2
                          + (64448.0 / 6561.0) * k3 - (212.0 / 729.0) * k4))
        k6 = rhs(x + h,
                 y + h * ((9017.0 / 3168.0) * k1 - (355.0 / 33.0) * k2
                          + (46732.0 / 5247.0) * k3 + (49.0 / 176.0) * k4
                          - (5103.0 / 18656.0) * k5))
        y5 = y + h * ((35.0 / 384.0) * k1 + (500.0 / 1113.0) * k3
                      + (125.0 / 192.0) * k4 - (2187.0 / 6784.0) * k5
                      + (11.0 / 84.0) * k6)
        if not math.isfinite(y5) or y5 >= 0.0:
            return False, 0.0, 0.0, 0.0
        k7 = rhs(x + h, y5)
    except (ZeroDivisionError, OverflowError):
        return False, 0.0, 0.0, 0.0
    err = abs(h * ((71.0 / 57600.0) * k1 - (71.0 / 16695.0) * k3
                   + (71.0 / 1920.0) * k4 - (17253.0 / 339200.0) * k5
                   + (22.0 / 525.0) * k6 - (1.0 / 40.0) * k7))
    if not math.isfinite(err):
        return False, 0.0, 0.0, 0.0
    return True, y5, err, k7


def _integrate(rhs, p0, q0, p_end, *, stations=(), connect=None,
               turn_tol=DELTA_TURN, dive=1e12, rtol=RTOL, atol=ATOL,
               record=False, max_steps=200_000) -> _Trace:
    """Adaptive graph integration from (p0, q0) to P = p_end.

    stations are P values hit exactly (step clamping) with Q captured there.
    connect = (p_target, eta, delta) enables the near-equilibrium connect
    termination.  Turning (Q >= -turn_tol outside the connect window) and
    |Q| >= dive terminate with the corresponding status.
    """
    s = 1.0 if p_end >= p0 else -1.0
    span = abs(p_end - p0)
    if span <= 0.0:
        raise IntegrationFailureError("empty integration interval", (p0, q0))
    stops = [x for x in dict.fromkeys(stations)
             if (x - p0) * s > 0.0 and (p_end - x) * s > 0.0]
    stops.sort(key=lambda x: (x - p0) * s)
    stops.append(p_end)

    x, y = p0, q0
    try:
        k1 = rhs(x, y)
    except ZeroDivisionError:
        raise IntegrationFailureError("singular start point", (x, y)) from None
    if not math.isfinite(k1):
        raise IntegrationFailureError("singular start point", (x, y))
    h = s * max(span * 1e-4, 1e-12)
    points = [(x, y)]
    captured: dict[float, float] = {}
    if connect is not None:
        p_t, eta, delta = connect
    floor = 1e-13 * max(1.0, abs(p0), abs(p_end))
    si = 0
    attempts = 0

    while True:
        target = stops[si]
        rem = target - x
        if abs(rem) <= floor:
            x = target
            if si == len(stops) - 1:
                return _Trace("end", x, y, points, captured)
            captured[target] = y
            si += 1
            continue
        landing = abs(h) >= abs(rem)
        h_try = rem if landing else h
        if abs(h_try) < floor:
            if connect is not None and abs(y) <= delta and abs(x - p_t) <= eta:
                return _Trace("connect", x, y, points, captured)
            if abs(y) <= _UNDERFLOW_TURN_Q:
                return _Trace("turn", x, y, points, captured)
            raise IntegrationFailureError("step-size underflow", (x, y))
        attempts += 1
        if attempts > max_steps:
            raise IntegrationFailureError("step budget exhausted", (x, y))
        ok, y_new, err, k_last = _dp54_attempt(rhs, x, y, h_try, k1)
        if not ok:
            h = 0.5 * h_try
            continue
        tol = atol + rtol * max(abs(y), abs(y_new))
        if err > tol:
            h = h_try * max(0.2, 0.9 * (tol / err) ** 0.2)
            continue
        x = target if landing else x + h_try
        y = y_new
        k1 = k_last
        if record:
            points.append((x, y))
        if connect is not None and abs(y) <= delta and abs(x - p_t) <= eta:
            return _Trace("connect", x, y, points, captured)
        if y >= -turn_tol and (connect is None or abs(x - p_t) > eta):
            return _Trace("turn", x, y, points, captured)
        if abs(y) >= dive:
            return _Trace("dive", x, y, points, captured)
        if landing:
            if si == len(stops) - 1:
                return _Trace("end", x, y, points, captured)
            captured[x] = y
            si += 1
        grow = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * (tol / err) ** 0.2))
        h = h_try * grow


def _start_point(model: GfkppModel, c: float, spec: ManifoldSpec,
                 p_target: float) -> tuple[float, float, Equilibrium]:
    eq = linearize(model, c, spec.origin.p_star)  # recompute at this c
    p_star = eq.p_star
    span = abs(p_star - p_target)
    if span <= 0.0:
        raise InvalidManifoldError("target coincides with the manifold origin")
    eps = spec.offset if spec.offset is not None else OFFSET_FACTOR * span

    if spec.branch == WU:
        if eq.etype != SADDLE:
            raise InvalidManifoldError(f"unstable_wu needs a saddle, got {eq.etype}")
        if not p_target < p_star:
            raise InvalidManifoldError("unstable_wu shoots toward p_target < P*")
        lam = eq.lambda_plus.real
        eps = max(eps, 1e-8 / max(lam, 1e-12))
        return p_star - eps, -eps * lam, eq
    if spec.branch == WS:
        if eq.etype != SADDLE:
            raise InvalidManifoldError(f"stable_ws needs a saddle, got {eq.etype}")
        if not p_target > p_star:
            raise InvalidManifoldError("stable_ws is traced backward toward p_target > P*")
        lam = eq.lambda_minus.real
        return p_star + eps, eps * lam, eq
    if spec.branch == WSS:
        if eq.etype != STABLE_NODE:
            raise InvalidManifoldError(f"fast_stable_wss needs a stable node, got {eq.etype}")
        lp = eq.lambda_plus.real
        lm = eq.lambda_minus.real
        if not lp / lm < 1.0 - EIGEN_SEPARATION:
            raise InvalidManifoldError("eigenvalues too close for a fast stable manifold")
        if not p_target > p_star:
            raise InvalidManifoldError("fast_stable_wss is traced backward toward p_target > P*")
        return p_star + eps, eps * lm, eq
    raise InvalidManifoldError(f"unknown branch {spec.branch!r}")


def shoot(model: GfkppModel, c: float, spec: ManifoldSpec, p_target: float,
          section: float | None = None, *, record: bool = True,
          rtol: float = RTOL, atol: float = ATOL) -> ShootResult:
    """Track one invariant-manifold branch and classify the outcome.

    Outcomes: 'connect' (|Q| <= DELTA_CONNECT within TARGET_WINDOW of
    p_target), 'overshoot' (reached p_target with Q <= -DELTA_CONNECT, i.e.
    crossed the vertical section there), 'undershoot' (Q turned back to zero
    away from the target).  If section is given, Q at the first crossing of
    that vertical line is recorded.
    """
    rhs = _make_rhs(model, c)
    p0, q0, _ = _start_point(model, c, spec, p_target)
    # Saddle targets amplify start-offset error like 1/P along the approach, so
    # the bare DELTA_CONNECT window is unreachable there in float64; accept any
    # arrival inside the target's linear approach cone instead.
    delta = DELTA_CONNECT
    try:
        teq = linearize(model, c, p_target)
        cone = 2.0 * TARGET_WINDOW * max(abs(teq.lambda_plus.real),
                                         abs(teq.lambda_minus.real))
        delta = max(delta, cone)
    except NotAnEquilibriumError:
        pass
    stations = (section,) if section is not None and section != p_target else ()
    tr = _integrate(rhs, p0, q0, p_target, stations=stations,
                    connect=(p_target, TARGET_WINDOW, delta),
                    rtol=rtol, atol=atol, record=record)
    if tr.status == "connect":
        outcome = CONNECT
    elif tr.status == "turn":
        outcome = UNDERSHOOT
    elif tr.status == "end":
        outcome = CONNECT if abs(tr.q) <= delta else OVERSHOOT
    else:
        raise IntegrationFailureError(f"unexpected trajectory status {tr.status}",
                                      (tr.p, tr.q))
    q_sec = tr.captured.get(section) if section is not None else None
    if section is not None and section == p_target and tr.status == "end":
        q_sec = tr.q
    trajectory = [PhasePoint(p, q) for p, q in tr.points] if record else []
    return ShootResult(trajectory=trajectory, outcome=outcome,
                       q_at_section=q_sec, p_final=tr.p, q_final=tr.q)


def _section_intercept(model: GfkppModel, c: float, spec: ManifoldSpec,
                       p_section: float, side: str) -> float:
    """Q at the first crossing of the vertical section, or WindowViolationError.

    No connect window here: a manifold that relaxes onto the intermediate
    equilibrium instead of crossing shows up as a turning event.
    """
    rhs = _make_rhs(model, c)
    p0, q0, _ = _start_point(model, c, spec, p_section)
    tr = _integrate(rhs, p0, q0, p_section, record=False)
    if tr.status == "end":
        return tr.q
    if tr.status == "turn":
        raise WindowViolationError(side, f"manifold of {spec.origin.p_star} "
                                         f"turned before the section")
    raise IntegrationFailureError(f"section run ended with {tr.status}",
                                  (tr.p, tr.q))


def section_gap(model: GfkppModel, c: float, p3: float, p2: float, p1: float) -> float:
    """w(c) = Q3(c) - Q1(c) at the section P = p2 between the saddles p3, p1.

    Q3 is the first intercept of the unstable manifold of p3; Q1 is the last
    intercept of the stable manifold of p1 (traced backward).  Raises
    WindowViolationError naming the side whose manifold fails to cross.
    """
    if not p1 < p2 < p3:
        raise PreconditionError("need p1 < p2 < p3")
    q3 = _section_intercept(model, c, ManifoldSpec(linearize(model, c, p3), WU),
                            p2, "right")
    q1 = _section_intercept(model, c, ManifoldSpec(linearize(model, c, p1), WS),
                            p2, "left")
    return q3 - q1


@dataclass(frozen=True)
class SeparatrixOrdering:
    """Pointwise comparison of W^u from P=1 against W^ss of P=0."""

    admissible: bool
    checkpoints: tuple[float, ...]
    wu: tuple[float | None, ...]
    wss: tuple[float | None, ...]


def separatrix_compare(model: GfkppModel, c: float,
                       checkpoints: tuple[float, ...] = SEPARATRIX_CHECKPOINTS
                       ) -> SeparatrixOrdering:
    """Decide admissibility by ordering two monotone graphs on a fixed grid.

    The fast stable manifold of the node at 0 separates trajectories that
    cross the section at P=0 from those that connect; the wave exists at this
    speed iff the unstable manifold of the saddle at 1 lies on or above it at
    every checkpoint where both graphs exist.
    """
    f = model.reaction
    if f.interior_roots or f((f.roots[0] + f.roots[-1]) / 2.0) <= 0.0:
        raise PreconditionError("separatrix comparison needs f > 0 on (0, 1)")
    eq0 = linearize(model, c, 0.0)
    if eq0.etype in (SPIRAL_SINK, SPIRAL_SOURCE, CENTER):
        raise PreconditionError("origin is oscillatory at this speed")
    if eq0.etype != STABLE_NODE:
        raise PreconditionError(f"origin must be a stable node, got {eq0.etype}")
    # Exactly at the double-eigenvalue threshold the fast direction degenerates;
    # approach the comparison from slightly above.
    if eq0.lambda_plus.real / eq0.lambda_minus.real >= 1.0 - EIGEN_SEPARATION:
        c = c + 1e-8
        eq0 = linearize(model, c, 0.0)
    eq1 = linearize(model, c, 1.0)

    lo, hi = min(checkpoints), max(checkpoints)
    rhs = _make_rhs(model, c)

    eps = OFFSET_FACTOR * 1.0
    lam_u = eq1.lambda_plus.real
    tr_u = _integrate(rhs, 1.0 - eps, -eps * max(lam_u, 1e-8 / eps), lo,
                      stations=checkpoints, record=False)
    wu_map = dict(tr_u.captured)
    if tr_u.status == "end":
        wu_map[lo] = tr_u.q

    lam_ss = eq0.lambda_minus.real
    tr_s = _integrate(rhs, eps, eps * lam_ss, hi, stations=checkpoints,
                      dive=1e9, record=False)
    wss_map = dict(tr_s.captured)
    if tr_s.status == "end":
        wss_map[hi] = tr_s.q

    wu_vals = tuple(wu_map.get(x) for x in checkpoints)
    wss_vals = tuple(wss_map.get(x) for x in checkpoints)
    if tr_u.status == "turn":
        raise IntegrationFailureError("unstable manifold turned on a positive "
                                      "reaction", (tr_u.p, tr_u.q))
    if tr_s.status == "turn":
        # The fast stable manifold curls back to Q = 0; invariant graphs of the
        # same flow cannot cross, so no lower-half connection passes above it.
        admissible = False
    else:
        common = [(u, v) for u, v in zip(wu_vals, wss_vals)
                  if u is not None and v is not None]
        # A dive before the first checkpoint leaves the separatrix below
        # everything; otherwise order the graphs pointwise.
        admissible = all(u >= v for u, v in common)
    return SeparatrixOrdering(admissible=admissible, checkpoints=tuple(checkpoints),
                              wu=wu_vals, wss=wss_vals)


def trajectory_csv(result: ShootResult) -> str:
    """CSV dump of a recorded trajectory: header p,q; 17 significant digits."""
    lines = ["p,q"]
    lines.extend(f"{pt.p:.17g},{pt.q:.17g}" for pt in result.trajectory)
    return "\n".join(lines) + "\n"
