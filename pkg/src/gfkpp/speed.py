"""Admissible wave-speed sets: existence classes, closed forms, numeric solvers.

Speed sets for orbits running from (1,0) to (0,0) in the lower half-plane
("type A"); type-B sets follow from the advection sign flip.  The numeric
pulled/pushed decision uses the separatrix ordering of two monotone graphs
(unstable manifold of 1 vs fast stable manifold of 0), which stays robust
where tangency-based classification degenerates.

All solvers are pure functions; sweep drivers may fan grid points out to
worker processes and merge results in input order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    BracketFailureError,
    NoTransitionError,
    NoUpperBoundError,
    PreconditionError,
    UnsupportedCaseError,
    WindowViolationError,
    WrongOracleError,
)
from .model import (
    GfkppModel,
    apply_sym1,
    apply_sym2,
    linearize,
    make_model,
    restrict_model,
)
from .shooting import (
    CONNECT,
    OVERSHOOT,
    UNDERSHOOT,
    WU,
    ManifoldSpec,
    section_gap,
    separatrix_compare,
    shoot,
)

EPS_C = 1e-6            # pulled test offset above the linear-spreading speed
BISECT_C_WIDTH = 2.5e-7  # wave-speed bisection width
BISECT_W_WIDTH = 1e-8   # section-gap bisection width
TRANSITION_WIDTH = 1e-4
TRANSITION_RANGE = (0.0, 50.0)
TIE_TOL = 1e-7          # chain speeds this close count as the boundary tie
C_HI_CAP = 2.0 ** 16

HALF_LINE_RIGHT = "half_line_closed_right"   # [c*, inf)
HALF_LINE_LEFT = "half_line_closed_left"     # (-inf, c*]
UNIQUE = "unique"                            # {c*}
HALF_OPEN = "half_open_interval"             # [c-*, c+*)
HALF_OPEN_LEFT = "half_open_interval_left"   # (c-*, c+*]
EMPTY = "empty"

PULLED = "pulled"
PUSHED = "pushed"


@dataclass(frozen=True)
class SpeedSet:
    """Admissible-speed answer: regime tag plus endpoints.

    c_star is the single value / closed endpoint; c_secondary the second
    endpoint for interval regimes.  front marks pulled vs pushed for
    monostable half-line answers; steepness carries the cubic profile slope
    parameter when the closed form provides it.
    """

    regime: str
    c_star: float | None
    c_secondary: float | None = None
    orbit_type: str = "A"
    front: str | None = None
    steepness: float | None = None
    note: str | None = None


@dataclass(frozen=True)
class CascadeNode:
    """One resolved connection in the saddle chain: roots index k < m."""

    k: int
    m: int
    c_star_pair: float
    chain: tuple[int, ...] = ()


@dataclass(frozen=True)
class TransitionResult:
    d2: float
    m_trans: float
    pulled_speed: float


def classify_existence(model: GfkppModel) -> str:
    """Case tag from the interior-root count and the slopes of f at 0 and 1."""
    f = model.reaction
    interior = f.interior_roots
    fp0 = f.deriv(0.0)
    fp1 = f.deriv(1.0)
    n = len(interior)
    if n == 0:
        mid = 0.5 * (f.roots[0] + f.roots[-1])
        return "A1" if f(mid) > 0.0 else "A2"
    if n % 2 == 1:
        if fp0 * fp1 <= 0.0:
            raise PreconditionError("root parity inconsistent with endpoint slopes")
        return "B" if n == 1 else "D"
    if fp0 > 0.0 and fp1 < 0.0:
        return "C1"
    if fp0 < 0.0 and fp1 > 0.0:
        return "C2"
    raise PreconditionError("root parity inconsistent with endpoint slopes")


def pulled_speed(model: GfkppModel) -> float:
    """Linear-spreading speed M(0) + 2 sqrt(f'(0) D(0)) of the leading edge."""
    fp0 = model.reaction.deriv(0.0)
    if fp0 <= 0.0:
        raise PreconditionError("pulled speed needs f'(0) > 0")
    return model.advection(0.0) + 2.0 * math.sqrt(fp0 * model.diffusion(0.0))


def _equal_diffusion(model: GfkppModel) -> bool:
    return abs(model.d1 - model.d2) <= 1e-12


def closed_form_quadratic(model: GfkppModel) -> SpeedSet:
    """Minimal speed for k P (1-P) with equal diffusivities.

    c* = M1 + 2 sqrt(kD) while M2 - M1 <= 2 sqrt(kD) (pulled), and
    (M1+M2)/2 + 2kD/(M2-M1) beyond (pushed).
    """
    f = model.reaction
    if f.kind != "quadratic" or f.k is None or f.k <= 0.0:
        raise WrongOracleError("closed form needs a quadratic reaction with k > 0")
    if not _equal_diffusion(model):
        raise WrongOracleError("closed form needs d1 == d2; use the numeric path")
    k, d = f.k, model.d1
    thr = model.m1 + 2.0 * math.sqrt(k * d)
    if model.m2 <= thr:
        return SpeedSet(HALF_LINE_RIGHT, thr, front=PULLED)
    c = 0.5 * (model.m1 + model.m2) + 2.0 * k * d / (model.m2 - model.m1)
    return SpeedSet(HALF_LINE_RIGHT, c, front=PUSHED)


def closed_form_cubic(model: GfkppModel) -> SpeedSet:
    """Unique speed for k P (1-P)(P-p0) with equal diffusivities.

    c* = (M1+M2)/2 + 2kD(1-2 p0) / (M2-M1 + sqrt((M2-M1)^2 + 8kD)), the
    branch that reduces to sqrt(kD/2)(1-2 p0) at M1 = M2.  Also reports the
    profile steepness 4 / (-(M2-M1) + sqrt((M2-M1)^2 + 8kD)).
    """
    f = model.reaction
    if f.kind != "cubic" or f.k is None or f.k <= 0.0 or f.p0 is None:
        raise WrongOracleError("closed form needs a cubic reaction with k > 0")
    if not _equal_diffusion(model):
        raise WrongOracleError("closed form needs d1 == d2; use the numeric path")
    k, d, p0 = f.k, model.d1, f.p0
    dm = model.m2 - model.m1
    root = math.sqrt(dm * dm + 8.0 * k * d)
    c = 0.5 * (model.m1 + model.m2) + 2.0 * k * d * (1.0 - 2.0 * p0) / (dm + root)
    zeta = 4.0 / (-dm + root)
    return SpeedSet(UNIQUE, c, steepness=zeta)


def _is_admissible(model: GfkppModel, c: float) -> bool:
    return separatrix_compare(model, c).admissible


def minimal_speed_numeric(model: GfkppModel) -> SpeedSet:
    """Minimal type-A speed for a monostable model, general diffusivities.

    Tests admissibility just above the linear-spreading speed; if that fails,
    brackets an admissible speed by doubling and bisects the admissibility
    predicate to BISECT_C_WIDTH.
    """
    if classify_existence(model) != "A1":
        raise PreconditionError("minimal_speed_numeric needs case A1 (f > 0 inside)")
    cp = pulled_speed(model)
    if _is_admissible(model, cp + EPS_C):
        return SpeedSet(HALF_LINE_RIGHT, cp, front=PULLED)
    lo = cp + EPS_C
    hi = cp + max(1.0, abs(model.m2 - model.m1))
    cap = C_HI_CAP * (1.0 + abs(model.m1) + abs(model.m2))
    while not _is_admissible(model, hi):
        hi = cp + 2.0 * (hi - cp)
        if hi > cap:
            raise NoUpperBoundError(f"no admissible speed found below {cap}")
    while hi - lo > BISECT_C_WIDTH:
        mid = 0.5 * (lo + hi)
        if _is_admissible(model, mid):
            hi = mid
        else:
            lo = mid
    return SpeedSet(HALF_LINE_RIGHT, 0.5 * (lo + hi), front=PUSHED)


def _mirror(ss: SpeedSet, orbit_type: str) -> SpeedSet:
    """Negate a speed set endpoint-wise: [a,b) <-> (-b,-a], half-lines flip."""
    if ss.regime == HALF_LINE_RIGHT:
        return replace(ss, regime=HALF_LINE_LEFT, c_star=-ss.c_star,
                       orbit_type=orbit_type)
    if ss.regime == HALF_LINE_LEFT:
        return replace(ss, regime=HALF_LINE_RIGHT, c_star=-ss.c_star,
                       orbit_type=orbit_type)
    if ss.regime == UNIQUE:
        return replace(ss, c_star=-ss.c_star, orbit_type=orbit_type)
    if ss.regime == HALF_OPEN:
        return replace(ss, regime=HALF_OPEN_LEFT, c_star=-ss.c_secondary,
                       c_secondary=-ss.c_star, orbit_type=orbit_type)
    if ss.regime == HALF_OPEN_LEFT:
        return replace(ss, regime=HALF_OPEN, c_star=-ss.c_secondary,
                       c_secondary=-ss.c_star, orbit_type=orbit_type)
    return replace(ss, orbit_type=orbit_type)


def _left_piece_speed(model: GfkppModel, p1: float, p2: float) -> float:
    """Right endpoint of the type-A speed half-line (-inf, c*] on an f < 0 piece."""
    piece = restrict_model(model, p1, p2)
    mirrored = apply_sym1(apply_sym2(piece))
    return -minimal_speed_numeric(mirrored).c_star


def unique_speed_bistable(model: GfkppModel, p3: float | None = None,
                          p2: float | None = None, p1: float | None = None
                          ) -> SpeedSet:
    """Unique saddle-saddle speed over consecutive roots p1 < p2 < p3.

    Brackets the root of the section gap w(c) inside the window whose ends
    are the one-sided sub-piece speeds, then bisects on sign(w) to
    BISECT_W_WIDTH.
    """
    f = model.reaction
    if p3 is None or p2 is None or p1 is None:
        if len(f.roots) != 3:
            raise PreconditionError("default roots need exactly one interior root")
        p1, p2, p3 = f.roots
    if not (p1 < p2 < p3):
        raise PreconditionError("need p1 < p2 < p3")
    if not (f(0.5 * (p1 + p2)) < 0.0 and f(0.5 * (p2 + p3)) > 0.0):
        raise PreconditionError("need f < 0 on (p1,p2) and f > 0 on (p2,p3)")

    c_right = minimal_speed_numeric(restrict_model(model, p2, p3)).c_star
    c_left = _left_piece_speed(model, p1, p2)
    width = c_right - c_left
    if width <= 0.0:
        raise BracketFailureError("sub-piece speeds do not open a window")

    lo = hi = None
    for attempt in range(8):
        eps = width * 1e-6 * 4.0 ** attempt
        a, b = c_left + eps, c_right - eps
        if a >= b:
            break
        try:
            wa = section_gap(model, a, p3, p2, p1)
            wb = section_gap(model, b, p3, p2, p1)
        except WindowViolationError:
            continue
        if wa < 0.0 < wb:
            lo, hi, w_lo = a, b, wa
            break
        if wa == 0.0:
            return SpeedSet(UNIQUE, a)
        if wb == 0.0:
            return SpeedSet(UNIQUE, b)
    if lo is None:
        raise BracketFailureError(
            f"section gap not bracketed in ({c_left}, {c_right})")
    while hi - lo > BISECT_W_WIDTH:
        mid = 0.5 * (lo + hi)
        if section_gap(model, mid, p3, p2, p1) < 0.0:
            lo = mid
        else:
            hi = mid
    return SpeedSet(UNIQUE, 0.5 * (lo + hi))


def _shoot_outcome(model: GfkppModel, c: float, p_from: float, p_to: float) -> str:
    eq = linearize(model, c, p_from)
    return shoot(model, c, ManifoldSpec(eq, WU), p_target=p_to, record=False).outcome


def _bisect_outcome(model: GfkppModel, p_from: float, p_to: float,
                    c_lo: float, c_hi: float) -> float:
    """Locate the overshoot -> {connect,undershoot} flip of the full shot."""
    pad = 1e-9 * (1.0 + abs(c_lo) + abs(c_hi))
    lo, hi = c_lo + pad, c_hi - pad
    o_lo = _shoot_outcome(model, lo, p_from, p_to)
    o_hi = _shoot_outcome(model, hi, p_from, p_to)
    if o_lo != OVERSHOOT or o_hi == OVERSHOOT:
        raise BracketFailureError(
            f"end-to-end outcomes {o_lo}/{o_hi} do not bracket a connection")
    while hi - lo > BISECT_W_WIDTH:
        mid = 0.5 * (lo + hi)
        out = _shoot_outcome(model, mid, p_from, p_to)
        if out == CONNECT:
            return mid
        if out == OVERSHOOT:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _pair_speed(model: GfkppModel, i_lo: int, i_hi: int) -> float:
    """Saddle-saddle speed between consecutive saddles (one node between)."""
    roots = model.reaction.roots
    mid = (i_lo + i_hi) // 2
    return unique_speed_bistable(model, p3=roots[i_hi], p2=roots[mid],
                                 p1=roots[i_lo]).c_star


def _find_last_connected(model: GfkppModel, i_from: int, floor: int,
                         nodes: list[CascadeNode]) -> tuple[int, float, bool]:
    """Walk the saddle chain down from i_from; returns (index, speed, tie).

    Extends one saddle at a time while the next pairwise speed stays strictly
    below the current hop speed; composite hop speeds are located by shooting
    end to end inside the bracket.
    """
    roots = model.reaction.roots
    f = model.reaction
    below = [i for i in range(i_from - 1, floor - 1, -1) if f.deriv(roots[i]) < 0.0]
    if not below:
        raise PreconditionError("no saddle below the chain origin")
    l = below[0]
    c_hop = _pair_speed(model, l, i_from)
    nodes.append(CascadeNode(k=l, m=i_from, c_star_pair=c_hop))
    trail: list[int] = []
    for l2 in below[1:]:
        c2 = _pair_speed(model, l2, l)
        nodes.append(CascadeNode(k=l2, m=l, c_star_pair=c2))
        if c2 >= c_hop - TIE_TOL:
            return l, c_hop, abs(c2 - c_hop) <= TIE_TOL
        c_hop = _bisect_outcome(model, roots[i_from], roots[l2], c2, c_hop)
        trail.append(l)
        l = l2
        nodes.append(CascadeNode(k=l2, m=i_from, c_star_pair=c_hop,
                                 chain=tuple(trail)))
    return l, c_hop, False


def _sub_connection(model: GfkppModel, l: int, nodes: list[CascadeNode]
                    ) -> tuple[float, float | None] | None:
    """Existence data for the connection roots[l] -> 0 on the restricted piece.

    Returns (c_lower, c_upper_or_None) or None when no connection exists.
    Restriction keeps root indices, so sub-chain nodes transfer unchanged.
    """
    roots = model.reaction.roots
    f = model.reaction
    sub = restrict_model(model, 0.0, roots[l])
    tag = classify_existence(sub)
    if tag == "A1":
        return minimal_speed_numeric(sub).c_star, None
    if tag == "B":
        return unique_speed_bistable(sub).c_star, unique_speed_bistable(sub).c_star
    ss, sub_nodes = cascade_speeds(sub)
    nodes.extend(sub_nodes)
    if ss.regime == EMPTY:
        return None
    if ss.regime == UNIQUE:
        return ss.c_star, ss.c_star
    return ss.c_star, ss.c_secondary


def cascade_speeds(model: GfkppModel) -> tuple[SpeedSet, list[CascadeNode]]:
    """Type-A speed set for multi-root reactions via the saddle chain.

    Walks "last connected saddle" hops down from P = 1, then resolves the
    remaining connection to 0 recursively on the restricted piece.  The
    composite connection exists iff the lower-piece speed stays strictly
    below the hop speed; ties are declared non-existence and flagged.
    """
    tag = classify_existence(model)
    if tag == "B":
        return unique_speed_bistable(model), []  # n = 3 reduction
    if tag not in ("C1", "C2", "D"):
        raise PreconditionError("cascade handles cases B, C1, C2, D")
    f = model.reaction
    if tag == "C2":
        mirrored_model = apply_sym1(apply_sym2(model))
        ss, nodes = cascade_speeds(mirrored_model)
        n = len(f.roots)
        back = [CascadeNode(k=n - 1 - nd.m, m=n - 1 - nd.k,
                            c_star_pair=-nd.c_star_pair,
                            chain=tuple(n - 1 - i for i in nd.chain))
                for nd in nodes]
        return _mirror(ss, "A"), back
    if tag == "D" and f.deriv(1.0) > 0.0:
        raise UnsupportedCaseError(
            "node-ended chain (f'(0) > 0 and f'(1) > 0) is outside the "
            "saddle-chain construction")

    roots = f.roots
    top = len(roots) - 1
    nodes: list[CascadeNode] = []
    l, c_hop, tie = _find_last_connected(model, top, 0, nodes)
    if tie:
        return SpeedSet(EMPTY, None, note="boundary_tie"), nodes
    if l == 0:
        return SpeedSet(UNIQUE, c_hop), nodes

    sub = _sub_connection(model, l, nodes)
    if sub is None:
        return SpeedSet(EMPTY, None), nodes
    c_sub, c_sub_hi = sub
    if c_sub >= c_hop - TIE_TOL:
        note = "boundary_tie" if abs(c_sub - c_hop) <= TIE_TOL else None
        return SpeedSet(EMPTY, None, note=note), nodes
    upper = c_hop if c_sub_hi is None else min(c_hop, c_sub_hi)
    c_star = _bisect_outcome(model, roots[top], 0.0, c_sub, upper)
    nodes.append(CascadeNode(k=0, m=top, c_star_pair=c_star,
                             chain=tuple(i for i in range(top - 1, 0, -1)
                                         if f.deriv(roots[i]) < 0.0 and i >= l)))
    if tag == "D":
        return SpeedSet(UNIQUE, c_star), nodes
    return SpeedSet(HALF_OPEN, c_star, c_secondary=upper), nodes


def solve_speed_set(model: GfkppModel) -> tuple[str, SpeedSet]:
    """Dispatch to the matching solver; closed forms where they apply."""
    tag = classify_existence(model)
    f = model.reaction
    if tag == "A1":
        if f.kind == "quadratic" and f.k > 0.0 and _equal_diffusion(model):
            return tag, closed_form_quadratic(model)
        return tag, minimal_speed_numeric(model)
    if tag == "A2":
        inner_tag, inner = solve_speed_set(apply_sym1(apply_sym2(model)))
        return tag, _mirror(inner, "A")
    if tag == "B":
        if f.deriv(0.0) > 0.0:
            raise UnsupportedCaseError("node-ended single-interior-root case")
        if f.kind == "cubic" and f.k > 0.0 and _equal_diffusion(model):
            return tag, closed_form_cubic(model)
        return tag, unique_speed_bistable(model)
    ss, _ = cascade_speeds(model)
    return tag, ss


def type_b_speed_set(model: GfkppModel) -> SpeedSet:
    """Speeds of orbits running from (0,0) to (1,0): the sign-flipped
    type-A set of the advection-negated model."""
    _, ss = solve_speed_set(apply_sym2(model))
    return _mirror(ss, "B")


def _is_pulled(model: GfkppModel) -> bool:
    return _is_admissible(model, pulled_speed(model) + EPS_C)


# Near the transition the pushed excess grows like (m - m_trans)^2 / 4, so a
# probe at c_pull + eps biases m_trans by ~2 sqrt(eps); the scan needs a much
# sharper probe than the speed solver to resolve the transition to 1e-4.
EPS_SCAN = 1e-10


def transition_scan(d2: float, *, k: float = 1.0, d1: float = 1.0,
                    m1: float = 0.0, m_range: tuple[float, float] = TRANSITION_RANGE,
                    width: float = TRANSITION_WIDTH) -> TransitionResult:
    """Advection difference at which the minimal speed departs from pulled.

    Bisects the pushed predicate in m = M2 - M1 over m_range to `width`.
    """
    def pushed(m: float) -> bool:
        model = make_model(k, d1=d1, d2=d2, m1=m1, m2=m1 + m)
        return not _is_admissible(model, pulled_speed(model) + EPS_SCAN)

    lo, hi = m_range
    if pushed(lo) == pushed(hi):
        raise NoTransitionError(f"pushed predicate constant over {m_range}")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if pushed(mid):
            hi = mid
        else:
            lo = mid
    cp = m1 + 2.0 * math.sqrt(k * d1)
    return TransitionResult(d2=d2, m_trans=0.5 * (lo + hi), pulled_speed=cp)


def asymptotic_slope(d2: float, *, k: float = 1.0, d1: float = 1.0,
                     m1: float = 0.0, m_at: float = 50.0) -> float:
    """K = c*(M2-M1 = m_at) / m_at, the large-advection growth rate of c*."""
    m = make_model(k, d1=d1, d2=d2, m1=m1, m2=m1 + m_at)
    return minimal_speed_numeric(m).c_star / m_at


def sufficient_speed_bound(model: GfkppModel, a: float = 0.0, b: float = 1.0,
                           samples: int = 1001) -> float:
    """A finite speed above which the monostable connection surely exists:
    max over [a,b] of M(P) + D(P) (1 + d/dP [f(P)/D(P)]).  Sanity bound only;
    solvers never use it as the computed speed."""
    f = model.reaction
    ps = np.linspace(a, b, samples)
    fv = f.eval_array(ps)
    dfv = np.asarray([f.deriv(p) for p in ps])
    dv = model.d1 + (model.d2 - model.d1) * ps
    mv = model.m1 + (model.m2 - model.m1) * ps
    dprime = model.d2 - model.d1
    ratio_prime = (dfv * dv - fv * dprime) / (dv * dv)
    return float(np.max(mv + dv * (1.0 + ratio_prime)))


# --- sweep drivers -----------------------------------------------------------

def speed_point(d2: float, m: float, *, k: float = 1.0, d1: float = 1.0,
                m1: float = 0.0) -> tuple[float, str]:
    """(c_star, pulled|pushed) for a quadratic model at advection gap m."""
    model = make_model(k, d1=d1, d2=d2, m1=m1, m2=m1 + m)
    if _equal_diffusion(model):
        ss = closed_form_quadratic(model)
    else:
        ss = minimal_speed_numeric(model)
    return ss.c_star, ss.front


def sweep_m2(d2_values, m_values, *, k: float = 1.0, d1: float = 1.0,
             m1: float = 0.0):
    """Rows (d2, m, c_star|None, front|'error: ...') over the grid."""
    rows = []
    for d2 in d2_values:
        for m in m_values:
            try:
                c, front = speed_point(d2, m, k=k, d1=d1, m1=m1)
                rows.append((d2, m, c, front))
            except Exception as exc:  # per-point isolation in sweeps
                rows.append((d2, m, None, f"error: {exc}"))
    return rows


def linear_fit(xs, ys) -> tuple[float, float, float]:
    """(slope, intercept, r^2) of an ordinary least-squares line."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return float(slope), float(intercept), r2
