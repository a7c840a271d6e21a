"""Data model: polynomial nonlinearities, model coefficients, equilibria, symmetries.

The wave equation under study is

    p_t = D(p) p_xx - M(p) p_x + f(p),
    D(p) = p*D2 + (1-p)*D1,      M(p) = p*M2 + (1-p)*M1,

with a polynomial reaction f vanishing at p = 0 and p = 1 and having only
simple roots in [0, 1].  Everything here is immutable and safe to share
between threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (
    AssumptionViolationError,
    DegenerateReactionError,
    NotAnEquilibriumError,
)

# Root handling tolerances.  Polishing drives |f(r)| below RESIDUAL; a point
# counts as an equilibrium within MATCH; simple roots need |f'(r)| above FLOOR.
ROOT_RESIDUAL_TOL = 1e-12
ROOT_MATCH_TOL = 1e-9
DERIV_FLOOR = 1e-10
_CLUSTER_TOL = 1e-8

# Equilibrium type labels.
SADDLE = "saddle"
STABLE_NODE = "stable_node"
UNSTABLE_NODE = "unstable_node"
SPIRAL_SINK = "spiral_sink"
SPIRAL_SOURCE = "spiral_source"
CENTER = "center"


def _polyval(coeffs: tuple[float, ...], x: float) -> float:
    v = 0.0
    for a in reversed(coeffs):
        v = v * x + a
    return v


def _polyder(coeffs: tuple[float, ...]) -> tuple[float, ...]:
    if len(coeffs) <= 1:
        return (0.0,)
    return tuple(i * a for i, a in enumerate(coeffs) if i > 0)


def _trim(coeffs) -> tuple[float, ...]:
    c = list(float(a) for a in coeffs)
    scale = max((abs(a) for a in c), default=0.0)
    cut = 1e-14 * scale
    while len(c) > 1 and abs(c[-1]) <= cut:
        c.pop()
    return tuple(c)


def _compose_affine(coeffs: tuple[float, ...], a: float, b: float) -> tuple[float, ...]:
    """Coefficients of p -> f(a + b*p)."""
    q = npoly.Polynomial(list(coeffs))(npoly.Polynomial([a, b]))
    return _trim(q.coef.tolist())


@dataclass(frozen=True)
class PotentialFn:
    """Antiderivative F(P) = int_0^P f(s) ds of a reaction polynomial.

    The derivative coefficients are the original reaction coefficients by
    construction, so F' = f holds as a coefficient identity.
    """

    coeffs: tuple[float, ...]
    derivative_coeffs: tuple[float, ...]

    def __call__(self, p: float) -> float:
        return _polyval(self.coeffs, p)

    def derivative(self, p: float) -> float:
        return _polyval(self.derivative_coeffs, p)


@dataclass(frozen=True)
class ReactionFn:
    """Polynomial nonlinearity with cached simple roots in [0, 1].

    coeffs are ascending-degree.  roots always start at 0.0 and end at 1.0.
    kind is one of 'quadratic' (k*P*(1-P)), 'cubic' (k*P*(1-P)*(P-p0)) or
    'polynomial'.
    """

    kind: str
    coeffs: tuple[float, ...]
    roots: tuple[float, ...]
    k: float | None = None
    p0: float | None = None

    def __call__(self, p: float) -> float:
        return _polyval(self.coeffs, p)

    @cached_property
    def deriv_coeffs(self) -> tuple[float, ...]:
        return _polyder(self.coeffs)

    def deriv(self, p: float) -> float:
        return _polyval(self.deriv_coeffs, p)

    def eval_array(self, p: np.ndarray) -> np.ndarray:
        return npoly.polyval(p, np.asarray(self.coeffs))

    def antiderivative(self) -> PotentialFn:
        anti = (0.0,) + tuple(a / (i + 1) for i, a in enumerate(self.coeffs))
        return PotentialFn(coeffs=anti, derivative_coeffs=self.coeffs)

    @property
    def interior_roots(self) -> tuple[float, ...]:
        return self.roots[1:-1]


def _validate_roots(coeffs: tuple[float, ...], roots: tuple[float, ...]) -> None:
    dcoeffs = _polyder(coeffs)
    prev = -math.inf
    for r in roots:
        if r <= prev:
            raise AssumptionViolationError(f"roots not strictly increasing near {r}")
        prev = r
        if abs(_polyval(coeffs, r)) > ROOT_RESIDUAL_TOL:
            raise AssumptionViolationError(f"|f({r})| above root residual tolerance")
        if abs(_polyval(dcoeffs, r)) < DERIV_FLOOR:
            raise DegenerateReactionError(f"|f'({r})| below simple-root floor")
    if roots[0] != 0.0 or roots[-1] != 1.0:
        raise AssumptionViolationError("root list must start at 0 and end at 1")


def _make_reaction(kind, coeffs, roots, k=None, p0=None) -> ReactionFn:
    coeffs = _trim(coeffs)
    roots = tuple(float(r) for r in roots)
    _validate_roots(coeffs, roots)
    return ReactionFn(kind=kind, coeffs=coeffs, roots=roots, k=k, p0=p0)


def quadratic(k: float) -> ReactionFn:
    """k*P*(1-P).  Negative k is legal and is classified as case A2."""
    if abs(k) < 1e-12:
        raise DegenerateReactionError("quadratic reaction needs k != 0")
    return _make_reaction("quadratic", (0.0, k, -k), (0.0, 1.0), k=float(k))


def cubic(k: float, p0: float) -> ReactionFn:
    """k*P*(1-P)*(P-p0) with interior root p0 in (0, 1)."""
    if abs(k) < 1e-12:
        raise DegenerateReactionError("cubic reaction needs k != 0")
    if not 0.0 < p0 < 1.0:
        raise AssumptionViolationError("cubic interior root must lie in (0, 1)")
    coeffs = (0.0, -k * p0, k * (1.0 + p0), -k)
    return _make_reaction("cubic", coeffs, (0.0, p0, 1.0), k=float(k), p0=float(p0))


def _unit_roots_from_coeffs(coeffs: tuple[float, ...]) -> tuple[float, ...]:
    """All simple real roots of the polynomial inside [0, 1].

    Companion-matrix eigenvalues followed by Newton polishing; simple roots
    make the polish quadratically convergent.
    """
    dcoeffs = _polyder(coeffs)
    raw = npoly.polyroots(np.asarray(coeffs))
    scale = max(1.0, max(abs(a) for a in coeffs))
    interior = []
    for z in raw:
        if abs(z.imag) > 1e-8 * max(1.0, abs(z.real)):
            continue
        r = float(z.real)
        if not -1e-6 < r < 1.0 + 1e-6:
            continue
        for _ in range(6):
            fr = _polyval(coeffs, r)
            dr = _polyval(dcoeffs, r)
            if dr == 0.0 or abs(fr) <= 0.1 * ROOT_RESIDUAL_TOL * scale:
                break
            r -= fr / dr
        if abs(r) <= _CLUSTER_TOL or abs(r - 1.0) <= _CLUSTER_TOL:
            continue  # endpoint roots handled explicitly
        if 0.0 < r < 1.0:
            interior.append(r)
    interior.sort()
    for a, b in zip(interior, interior[1:]):
        if b - a <= _CLUSTER_TOL:
            raise AssumptionViolationError(f"clustered roots near {a}")
    return (0.0, *interior, 1.0)


def polynomial(coeffs) -> ReactionFn:
    """General reaction from ascending coefficients; f(0) = f(1) = 0 required."""
    c = _trim(coeffs)
    if len(c) < 3:
        raise DegenerateReactionError("reaction polynomial must have degree >= 2")
    scale = max(abs(a) for a in c)
    if abs(c[0]) > 1e-10 * scale:
        raise AssumptionViolationError("f(0) != 0")
    c = (0.0,) + c[1:]
    if abs(sum(c)) > 1e-9 * scale:
        raise AssumptionViolationError("f(1) != 0")
    return _make_reaction("polynomial", c, _unit_roots_from_coeffs(c))


def reaction_from_growth_rates(r1: float, r2: float) -> ReactionFn:
    """Quadratic (r1-r2)*p*(1-p) from two linear per-type growth rates."""
    k = r1 - r2
    if abs(k) < 1e-12:
        raise DegenerateReactionError("equal growth rates give f == 0")
    return quadratic(k)


def reaction_from_logistic(r1: float, r2: float, alpha1: float, alpha2: float) -> ReactionFn:
    """Reaction for two types growing logistically with capacity ratios alpha_i.

    f(p) = p(1-p) * [(r1-r2) - (r1/alpha1) p + (r2/alpha2)(1-p)], expanded to
    polynomial coefficients.  As alpha_i -> inf this reduces to the quadratic
    growth-rate form.
    """
    if alpha1 <= 0 or alpha2 <= 0:
        raise AssumptionViolationError("capacity ratios must be positive")
    b0 = (r1 - r2) + r2 / alpha2
    b1 = -(r1 / alpha1 + r2 / alpha2)
    # p(1-p)(b0 + b1 p) expanded.
    coeffs = (0.0, b0, b1 - b0, -b1)
    return polynomial(coeffs)


@dataclass(frozen=True)
class GfkppModel:
    """Full coefficient set: two diffusivities, two advections, one reaction."""

    d1: float
    d2: float
    m1: float
    m2: float
    reaction: ReactionFn

    def __post_init__(self):
        if self.d1 <= 0.0 or self.d2 <= 0.0:
            raise AssumptionViolationError("diffusivities must be positive")

    def diffusion(self, p: float) -> float:
        return self.d1 + (self.d2 - self.d1) * p

    def advection(self, p: float) -> float:
        return self.m1 + (self.m2 - self.m1) * p


def make_model(k: float | None = None, *, d1: float = 1.0, d2: float = 1.0,
               m1: float = 0.0, m2: float = 0.0, p0: float | None = None,
               coeffs=None, reaction: ReactionFn | None = None) -> GfkppModel:
    """Convenience builder: quadratic by default, cubic with p0, or raw coeffs."""
    if reaction is None:
        if coeffs is not None:
            reaction = polynomial(coeffs)
        elif p0 is not None:
            reaction = cubic(1.0 if k is None else k, p0)
        else:
            reaction = quadratic(1.0 if k is None else k)
    return GfkppModel(d1=float(d1), d2=float(d2), m1=float(m1), m2=float(m2),
                      reaction=reaction)


@dataclass(frozen=True)
class Equilibrium:
    """Root of f with the linearization data of the planar wave system.

    alpha = f'(P*)/D(P*) and beta = (M(P*)-c)/D(P*); the eigenvalues solve
    lambda^2 - beta*lambda + alpha = 0 with Re(lambda_plus) >= Re(lambda_minus).
    """

    p_star: float
    alpha: float
    beta: float
    lambda_plus: complex
    lambda_minus: complex
    etype: str

    @property
    def is_saddle(self) -> bool:
        return self.etype == SADDLE


def _classify_etype(alpha: float, beta: float, disc: float) -> str:
    if alpha < 0.0:
        return SADDLE
    if disc >= 0.0:
        return STABLE_NODE if beta <= 0.0 else UNSTABLE_NODE
    if beta < 0.0:
        return SPIRAL_SINK
    if beta > 0.0:
        return SPIRAL_SOURCE
    return CENTER


def linearize(model: GfkppModel, c: float, p_star: float) -> Equilibrium:
    """Linearize the planar system P'=Q, Q'=((M-c)Q - f)/D at (p_star, 0)."""
    f = model.reaction
    if abs(f(p_star)) > ROOT_MATCH_TOL:
        raise NotAnEquilibriumError(f"f({p_star}) != 0")
    dp = model.diffusion(p_star)
    alpha = f.deriv(p_star) / dp
    if abs(alpha) * dp < DERIV_FLOOR:
        raise AssumptionViolationError(f"degenerate root at {p_star}")
    beta = (model.advection(p_star) - c) / dp
    disc = beta * beta - 4.0 * alpha
    if disc >= 0.0:
        s = math.sqrt(disc)
        lp = complex(0.5 * (beta + s), 0.0)
        lm = complex(0.5 * (beta - s), 0.0)
    else:
        w = 0.5 * math.sqrt(-disc)
        lp = complex(0.5 * beta, w)
        lm = complex(0.5 * beta, -w)
    return Equilibrium(p_star=float(p_star), alpha=alpha, beta=beta,
                       lambda_plus=lp, lambda_minus=lm,
                       etype=_classify_etype(alpha, beta, disc))


def equilibria(model: GfkppModel, c: float) -> list[Equilibrium]:
    return [linearize(model, c, r) for r in model.reaction.roots]


def _sym1_reaction(f: ReactionFn) -> ReactionFn:
    """fhat(P) = -f(1-P); structured kinds map exactly."""
    if f.kind == "quadratic":
        return quadratic(-f.k)
    if f.kind == "cubic":
        return cubic(f.k, 1.0 - f.p0)
    coeffs = tuple(-a for a in _compose_affine(f.coeffs, 1.0, -1.0))
    roots = tuple(sorted(0.0 if r == 1.0 else 1.0 if r == 0.0 else 1.0 - r
                         for r in f.roots))
    return _make_reaction("polynomial", coeffs, roots)


def apply_sym1(model: GfkppModel) -> GfkppModel:
    """Reflection P -> 1-P: swaps the two types and flips the reaction sign."""
    return GfkppModel(d1=model.d2, d2=model.d1, m1=model.m2, m2=model.m1,
                      reaction=_sym1_reaction(model.reaction))


def apply_sym2(model: GfkppModel) -> GfkppModel:
    """Advection sign flip; callers negate wave speeds alongside."""
    return replace(model, m1=-model.m1, m2=-model.m2)


def restrict_model(model: GfkppModel, a: float, b: float) -> GfkppModel:
    """Affinely remap the dynamics on the root interval [a, b] onto [0, 1].

    With P = a + (b-a) U the profile equation keeps its form and its wave
    speed; the remapped coefficients are D(a), D(b), M(a), M(b) and
    f(a + (b-a) U)/(b-a).
    """
    roots = model.reaction.roots
    if a not in roots or b not in roots or not a < b:
        raise AssumptionViolationError("restriction endpoints must be roots with a < b")
    w = b - a
    coeffs = tuple(x / w for x in _compose_affine(model.reaction.coeffs, a, w))
    sub = tuple(0.0 if r == a else 1.0 if r == b else (r - a) / w
                for r in roots if a <= r <= b)
    reaction = _make_reaction("polynomial", coeffs, sub)
    return GfkppModel(d1=model.diffusion(a), d2=model.diffusion(b),
                      m1=model.advection(a), m2=model.advection(b),
                      reaction=reaction)


# --- flat key-value serialization ------------------------------------------

def model_to_config(model: GfkppModel) -> str:
    lines = [
        f"d1 = {model.d1!r}",
        f"d2 = {model.d2!r}",
        f"m1 = {model.m1!r}",
        f"m2 = {model.m2!r}",
        f"reaction.kind = {model.reaction.kind}",
    ]
    f = model.reaction
    if f.kind == "quadratic":
        lines.append(f"reaction.k = {f.k!r}")
    elif f.kind == "cubic":
        lines.append(f"reaction.k = {f.k!r}")
        lines.append(f"reaction.p0 = {f.p0!r}")
    else:
        lines.append("reaction.coeffs = " + ",".join(repr(a) for a in f.coeffs))
    return "\n".join(lines) + "\n"


def parse_config(text: str) -> dict[str, str]:
    """Flat `key = value` lines; '#' comments; later keys win."""
    out: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            continue  # section headers are handled by the CLI layer
        if "=" not in line:
            raise ValueError(f"malformed config line: {raw!r}")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def model_from_config(text: str) -> GfkppModel:
    kv = parse_config(text)
    kind = kv.get("reaction.kind", "quadratic")
    if kind == "quadratic":
        reaction = quadratic(float(kv["reaction.k"]))
    elif kind == "cubic":
        reaction = cubic(float(kv["reaction.k"]), float(kv["reaction.p0"]))
    elif kind == "polynomial":
        reaction = polynomial([float(a) for a in kv["reaction.coeffs"].split(",")])
    else:
        raise ValueError(f"unknown reaction.kind {kind!r}")
    return GfkppModel(d1=float(kv.get("d1", 1.0)), d2=float(kv.get("d2", 1.0)),
                      m1=float(kv.get("m1", 0.0)), m2=float(kv.get("m2", 0.0)),
                      reaction=reaction)
