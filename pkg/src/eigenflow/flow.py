"""Implicit gradient flows and extinction profiles.

The flow u'(t) = -p(t) with p(t) in dJ(u(t)) contracts any datum toward
the null space of the one-homogeneous functional J; the component
orthogonal to the null space dies in finite time.  This module
discretizes the flow with implicit Euler steps

    u_k = argmin_u  0.5 ||u - u_{k-1}||^2 + delta J(u),

so that p_k := (u_{k-1} - u_k) / delta is an exact subgradient of J at
u_k by the prox optimality condition.  The averaged subgradients
phat_k := (p_k + p_{k-1}) / 2 approach a nonlinear eigenfunction
(lambda p in dJ(p)) as the flow nears extinction; the one with the
highest Rayleigh quotient R(p) = ||p||^2 / J(p) is the extinction
profile.  Subgradients with R close to one that appear earlier in the
flow are eigenfunction candidates in their own right and are exposed
separately for multi-cluster analysis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .functional import Functional, ProxSettings, Signal

__all__ = [
    "FlowStep",
    "FlowTrace",
    "ExtinctionProfile",
    "run_flow",
    "rayleigh",
    "extract_profile",
    "high_rayleigh_subgradients",
]

#: default extinction threshold as a fraction of max(1, ||p_1||)
DEFAULT_EXTINCTION_FRACTION = 1e-6

#: default time step as a multiple of ||f|| / sqrt(n)
DEFAULT_STEP_FRACTION = 0.01


@dataclass(frozen=True)
class FlowStep:
    """One implicit Euler step of the gradient flow.

    Attributes
    ----------
    k : int
        Step index, starting at 1.
    t : float
        Time ``k * delta`` at the end of the step.
    u : Signal
        Flow iterate after the step.
    p : Signal
        Subgradient ``(u_{k-1} - u_k) / delta``; lies in ``dJ(u_k)``.
    p_norm : float
        Euclidean norm of ``p``.
    rayleigh : float or None
        Rayleigh quotient of the averaged subgradient
        ``(p_k + p_{k-1}) / 2``; ``None`` on the first step, where no
        predecessor exists for averaging.
    """

    k: int
    t: float
    u: Signal
    p: Signal
    p_norm: float
    rayleigh: Optional[float]


@dataclass(frozen=True)
class FlowTrace:
    """Full record of a gradient-flow run.

    Attributes
    ----------
    delta : float
        Time step of the implicit Euler discretization.
    steps : tuple of FlowStep
        Recorded steps in order; ``u_k = u_{k-1} - delta * p_k`` holds
        exactly by construction.
    extinct_at : int or None
        Index of the last step before extinction, ``0`` for data that
        is already in the null space, or ``None`` if the flow hit the
        step limit first (see ``warning``).
    gap_tol : float
        Relative duality-gap tolerance of the inner prox solves; the
        slack term for trace invariants such as monotonicity of
        ``p_norm``.
    initial : Signal
        Starting point of the flow: the datum with its null-space
        component removed.
    warning : str or None
        Message attached when the flow stopped without extinction.
    extinction_threshold : float or None
        The resolved cutoff for ``||p_k||`` (``None`` only for a trace
        that never took a step).
    """

    delta: float
    steps: Tuple[FlowStep, ...]
    extinct_at: Optional[int]
    gap_tol: float
    initial: Signal
    warning: Optional[str] = None
    extinction_threshold: Optional[float] = None

    @property
    def extinct(self) -> bool:
        """Whether the flow reached extinction."""
        return self.extinct_at is not None

    @property
    def extinction_time(self) -> Optional[float]:
        """Time ``delta * extinct_at``, or ``None`` if not extinct."""
        if self.extinct_at is None:
            return None
        return self.delta * self.extinct_at


@dataclass(frozen=True)
class ExtinctionProfile:
    """Eigenfunction candidate recovered from a flow near extinction.

    Attributes
    ----------
    p_star : Signal
        The selected averaged subgradient.
    rayleigh : float
        Its Rayleigh quotient ``||p*||^2 / J(p*)``; equals one exactly
        when ``p*`` is an eigenfunction at its natural scale.
    source_step : int
        Index ``k`` of the flow step the profile was taken from.
    eigenvalue : float
        ``||p*||``: the eigenvalue associated with the unit-norm
        normalization ``p*/||p*||`` when ``rayleigh`` is close to one.
    """

    p_star: Signal
    rayleigh: float
    source_step: int
    eigenvalue: float


def rayleigh(fun: Functional, p: Signal) -> float:
    """Rayleigh quotient ``||p||^2 / J(p)``.

    Values lie in ``(0, 1]`` for signals in ``dJ(0)`` and equal one
    exactly on eigenfunctions at the scale ``||p||^2 = J(p)``.  The
    quotient scales linearly with the signal: ``R(c p) = c R(p)`` for
    ``c > 0``.

    Parameters
    ----------
    fun : Functional
        The functional supplying ``J``.
    p : Signal
        Nonzero signal outside the null space of ``J``.

    Returns
    -------
    float

    Raises
    ------
    ValueError
        If ``J(p) = 0``, i.e. ``p`` lies in the null space and the
        quotient is undefined.
    """
    jp = fun.eval(p)
    if jp == 0.0:
        raise ValueError(
            "Rayleigh quotient undefined: signal lies in the null space "
            "of the functional"
        )
    return float(np.dot(p.values, p.values)) / jp


def run_flow(
    fun: Functional,
    f: Signal,
    delta: Optional[float] = None,
    extinction_threshold: Optional[float] = None,
    max_steps: int = 10_000,
    settings: Optional[ProxSettings] = None,
) -> FlowTrace:
    """Run the implicit gradient flow of ``fun`` started at ``f``.

    The datum is first projected orthogonally to the null space of the
    functional (the flow never moves the null-space component, so it is
    removed up front and extinction means ``u_k = 0``).  Steps are
    recorded until the subgradient norm ``||p_k||`` falls below the
    extinction threshold; as a shortcut, a step whose iterate already
    satisfies ``||u_k|| <= delta * threshold`` is marked extinct
    immediately, since the next subgradient could not exceed the
    threshold.

    Parameters
    ----------
    fun : Functional
        Functional to flow under.
    f : Signal
        Starting datum.
    delta : float, optional
        Time step.  Defaults to ``0.01 * ||f0|| / sqrt(n)`` where
        ``f0`` is the null-projected datum, keeping step counts
        comparable across scales and sizes.
    extinction_threshold : float, optional
        Cutoff for ``||p_k||``.  Defaults to
        ``1e-6 * max(1, ||p_1||)``, fixed after the first step.
    max_steps : int
        Upper bound on the number of steps.  Reaching it returns a
        trace with ``extinct_at`` unset and a warning attached rather
        than raising.
    settings : ProxSettings, optional
        Options for iterative inner solvers.

    Returns
    -------
    FlowTrace

    Raises
    ------
    ProxConvergenceError
        If an inner prox solve fails to reach its duality-gap target.
    """
    if settings is None:
        settings = ProxSettings()
    u_prev = fun.null_project(f)
    initial = u_prev
    n = len(u_prev)
    if delta is None:
        delta = DEFAULT_STEP_FRACTION * u_prev.norm / np.sqrt(n)
    if extinction_threshold is not None and extinction_threshold <= 0:
        raise ValueError("extinction_threshold must be positive")
    if u_prev.norm == 0.0:
        return FlowTrace(
            delta=delta if delta > 0 else 1.0,
            steps=(),
            extinct_at=0,
            gap_tol=settings.gap_tol,
            initial=initial,
            extinction_threshold=extinction_threshold,
        )
    if delta <= 0:
        raise ValueError("delta must be positive")

    threshold = extinction_threshold
    steps: List[FlowStep] = []
    warm_dual = None
    extinct_at: Optional[int] = None
    warning: Optional[str] = None
    p_norm = np.inf
    for k in range(1, max_steps + 1):
        result = fun.prox_full(u_prev, delta, settings, warm_dual=warm_dual)
        warm_dual = result.dual
        u_k = result.u
        p_k = u_prev.with_values((u_prev.values - u_k.values) / delta)
        p_norm = float(np.linalg.norm(p_k.values))
        if threshold is None:
            threshold = DEFAULT_EXTINCTION_FRACTION * max(1.0, p_norm)
        if p_norm < threshold:
            extinct_at = len(steps)
            break
        ray: Optional[float] = None
        if steps:
            p_hat = p_k.with_values(0.5 * (p_k.values + steps[-1].p.values))
            j_hat = fun.eval(p_hat)
            if j_hat > 0.0:
                ray = float(np.dot(p_hat.values, p_hat.values)) / j_hat
        steps.append(
            FlowStep(k=k, t=k * delta, u=u_k, p=p_k, p_norm=p_norm, rayleigh=ray)
        )
        if u_k.norm <= delta * threshold:
            extinct_at = len(steps)
            break
        u_prev = u_k
    else:
        warning = (
            f"flow did not reach extinction within {max_steps} steps; "
            f"last subgradient norm {p_norm:.3e}, threshold {threshold:.3e}"
        )
    return FlowTrace(
        delta=delta,
        steps=tuple(steps),
        extinct_at=extinct_at,
        gap_tol=settings.gap_tol,
        initial=initial,
        warning=warning,
        extinction_threshold=threshold,
    )


def _averaged_candidates(
    trace: FlowTrace,
) -> List[Tuple[int, Signal, float]]:
    """All ``(k, phat_k, R(phat_k))`` triples with a defined quotient."""
    out: List[Tuple[int, Signal, float]] = []
    for prev, step in zip(trace.steps, trace.steps[1:]):
        if step.rayleigh is None:
            continue
        p_hat = step.p.with_values(0.5 * (step.p.values + prev.p.values))
        out.append((step.k, p_hat, step.rayleigh))
    return out


def _select_latest_max(
    candidates: List[Tuple[int, Signal, float]], tie_tol: float
) -> Tuple[int, Signal, float]:
    """The candidate of maximal Rayleigh quotient, ties toward later steps.

    Candidates within ``tie_tol`` relative of the maximum count as
    tied, so solver-level noise cannot pull the selection away from the
    latest near-maximal step.
    """
    best = max(r for _, _, r in candidates)
    window = best - tie_tol * abs(best)
    for k, p_hat, r in reversed(candidates):
        if r >= window:
            return k, p_hat, r
    return candidates[-1]  # pragma: no cover - window always catches one


def _resolve_tie_tol(trace: FlowTrace, tie_tol: Optional[float]) -> float:
    """Default the near-tie window to the solver's own noise floor.

    Rayleigh quotients computed through an iterative prox carry noise
    on the order of the duality-gap tolerance, so quotients that close
    to each other are indistinguishable and the later step must win.
    """
    if tie_tol is not None:
        return tie_tol
    return max(1e-9, 10.0 * trace.gap_tol)


def extract_profile(
    fun: Functional, trace: FlowTrace, tie_tol: Optional[float] = None
) -> ExtinctionProfile:
    """Extinction profile of a flow: the best averaged subgradient.

    Scans the averaged subgradients ``phat_k = (p_k + p_{k-1}) / 2``
    of an extinct flow and returns the one with the highest Rayleigh
    quotient, breaking near-ties toward later steps (closer to
    extinction).

    Parameters
    ----------
    fun : Functional
        Functional the trace was computed under.
    trace : FlowTrace
        An extinct trace with at least two steps.
    tie_tol : float, optional
        Relative width of the near-tie window for the maximum.  By
        default ``10 * gap_tol`` of the trace (at least 1e-9): maxima
        that differ by less than the solver tolerance are ties, and the
        later step wins.

    Returns
    -------
    ExtinctionProfile

    Raises
    ------
    ValueError
        If the trace did not reach extinction or has fewer than two
        steps.
    """
    tie_tol = _resolve_tie_tol(trace, tie_tol)
    if not trace.extinct:
        raise ValueError(
            "flow did not reach extinction; extinction profile undefined"
        )
    if len(trace.steps) < 2:
        raise ValueError(
            "need at least two flow steps to average an extinction profile"
        )
    candidates = _averaged_candidates(trace)
    if not candidates:
        raise ValueError("all averaged subgradients lie in the null space")
    k, p_star, ray = _select_latest_max(candidates, tie_tol)
    return ExtinctionProfile(
        p_star=p_star,
        rayleigh=ray,
        source_step=k,
        eigenvalue=float(np.linalg.norm(p_star.values)),
    )


def high_rayleigh_subgradients(
    fun: Functional,
    trace: FlowTrace,
    threshold: float = 0.9,
    plateau_tol: float = 1e-3,
    tie_tol: Optional[float] = None,
    min_plateau: int = 2,
) -> List[Tuple[int, Signal, float]]:
    """Near-eigenfunction subgradients of a flow, one per plateau.

    In clean regimes the flow subgradient is piecewise constant in
    time, so consecutive averaged subgradients cluster into plateaus.
    This groups consecutive candidates whose relative distance is below
    ``plateau_tol``, picks from each plateau the member with the
    highest Rayleigh quotient (ties toward later steps, matching
    :func:`extract_profile`), keeps those with quotient at least
    ``threshold``, and orders them by decreasing norm.  Subgradients
    beyond the extinction profile's eigenvalue carry the multi-cluster
    structure the profile itself cannot (it is always two-valued-like,
    having the lowest eigenvalue of the flow).

    Parameters
    ----------
    fun : Functional
        Functional the trace was computed under.
    trace : FlowTrace
        Any flow trace; fewer than two steps yields an empty list.
    threshold : float
        Minimal Rayleigh quotient, in ``(0, 1]``.  Values above
        ``1 - 10 * gap_tol`` are clamped there: no computed quotient
        can be certified closer to one than the solver tolerance.
    plateau_tol : float
        Relative distance merging consecutive averaged subgradients
        into one plateau.
    tie_tol : float, optional
        Near-tie window for the per-plateau representative; defaults
        to ``10 * gap_tol`` of the trace, matching
        :func:`extract_profile`.
    min_plateau : int
        Minimal number of consecutive candidates a plateau needs to
        count.  An eigenfunction phase of the flow occupies an interval
        of flow time and thus several steps, while mixtures created by
        a step straddling two phases (including the final fractional
        step before extinction) show up as one-candidate groups; the
        default of two screens those out.

    Returns
    -------
    list of (int, Signal, float)
        ``(step, averaged subgradient, rayleigh)`` triples ordered by
        decreasing subgradient norm; possibly empty.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    threshold = min(threshold, 1.0 - 10.0 * trace.gap_tol)
    tie_tol = _resolve_tie_tol(trace, tie_tol)
    candidates = _averaged_candidates(trace)
    if not candidates:
        return []

    plateaus: List[List[Tuple[int, Signal, float]]] = [[candidates[0]]]
    for cand in candidates[1:]:
        _, prev_hat, _ = plateaus[-1][-1]
        _, cur_hat, _ = cand
        dist = float(np.linalg.norm(cur_hat.values - prev_hat.values))
        scale = float(np.linalg.norm(prev_hat.values))
        if scale > 0.0 and dist < plateau_tol * scale:
            plateaus[-1].append(cand)
        else:
            plateaus.append([cand])

    reps = [
        _select_latest_max(group, tie_tol)
        for group in plateaus
        if len(group) >= min_plateau
    ]
    reps = [rep for rep in reps if rep[2] >= threshold]
    reps.sort(key=lambda rep: -float(np.linalg.norm(rep[1].values)))
    return reps
