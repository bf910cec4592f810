"""Recursive decomposition of signals into eigenfunction atoms.

Each round flows the current residual to extinction, takes the
extinction profile ``p*`` as the next atom, and subtracts its
orthogonal projection:

    c_n = <f_n, p_n*> / ||p_n*||^2,      f_{n+1} = f_n - c_n p_n*.

The residual norm obeys the exact identity
``||f_{n+1}||^2 = ||f_n||^2 - <f_n, p_n*>^2 / ||p_n*||^2``, so it
decreases strictly until some profile is orthogonal to the residual,
at which point the scheme stops.  When every flow subgradient is an
eigenfunction (as for one-dimensional total variation) the residual
vanishes and the atoms satisfy a Parseval-style identity
``||f||^2 = sum_n c_n <p_n*, f>``; in general a nonzero indecomposable
rest may remain.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .flow import ExtinctionProfile, extract_profile, run_flow
from .functional import Functional, ProxSettings, Signal

__all__ = [
    "Atom",
    "Decomposition",
    "NormIdentityReport",
    "SchemeFlowError",
    "coefficient",
    "run_scheme",
    "verify_norm_identity",
    "parseval_report",
    "reconstruct",
]

#: relative orthogonality cutoff: |c_n| ||p_n*|| below this fraction of
#: the input norm counts as an orthogonal profile and stops the scheme
ORTHOGONALITY_FRACTION = 1e-8


class SchemeFlowError(RuntimeError):
    """An inner gradient flow failed while decomposing.

    Attributes
    ----------
    partial : Decomposition
        Whatever the scheme had accumulated before the failure; its
        residual is the signal whose flow failed.
    """

    def __init__(self, message: str, partial: "Decomposition"):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class Atom:
    """One extracted eigenfunction component.

    Attributes
    ----------
    c : float
        Projection coefficient ``<f_n, p*> / ||p*||^2``.
    p_star : ExtinctionProfile
        The extinction profile supplying the atom's signal, Rayleigh
        quotient, and eigenvalue.
    residual_norm_after : float
        ``||f_{n+1}||`` after subtracting this atom.
    """

    c: float
    p_star: ExtinctionProfile
    residual_norm_after: float


@dataclass(frozen=True)
class Decomposition:
    """Result of the recursive subtraction scheme.

    Attributes
    ----------
    atoms : tuple of Atom
        Extracted components in extraction order.
    residual : Signal
        What remains of the input after all subtractions (zero in the
        fully decomposable case).
    input : Signal
        The null-projected signal the scheme actually decomposed; the
        atoms plus the residual reconstruct exactly this.
    input_norm : float
        Euclidean norm of ``input``; reference scale for the stopping
        rules.
    termination : str
        Why the scheme stopped: ``"residual_tol"``, ``"orthogonal"``,
        ``"max_atoms"``, or ``"null_input"``.
    """

    atoms: Tuple[Atom, ...]
    residual: Signal
    input: Signal
    input_norm: float
    termination: str

    @property
    def residual_norms(self) -> Tuple[float, ...]:
        """Norm trajectory ``(||f_0||, ||f_1||, ...)`` across atoms."""
        return (self.input_norm,) + tuple(
            a.residual_norm_after for a in self.atoms
        )


@dataclass(frozen=True)
class NormIdentityReport:
    """Per-step check of the residual-norm identity.

    Attributes
    ----------
    per_step : tuple of float
        Relative error of
        ``||f_{n+1}||^2 = ||f_n||^2 - <f_n,p_n*>^2/||p_n*||^2`` at each
        step, relative to ``||f_n||^2``.
    max_error : float
        Largest per-step error, ``0.0`` for an empty decomposition.
    """

    per_step: Tuple[float, ...]
    max_error: float


def coefficient(f_n: Signal, p_star: Signal) -> float:
    """Projection coefficient ``<f_n, p*> / ||p*||^2``.

    Parameters
    ----------
    f_n : Signal
        Current residual.
    p_star : Signal
        Nonzero profile signal.

    Returns
    -------
    float

    Raises
    ------
    ValueError
        If ``p_star`` is the zero signal.
    """
    denom = float(np.dot(p_star.values, p_star.values))
    if denom == 0.0:
        raise ValueError("cannot project onto a zero profile")
    return float(np.dot(f_n.values, p_star.values)) / denom


def run_scheme(
    fun: Functional,
    f: Signal,
    max_atoms: int = 200,
    rel_residual_tol: float = 1e-2,
    delta: Optional[float] = None,
    extinction_threshold: Optional[float] = None,
    max_steps: int = 10_000,
    settings: Optional[ProxSettings] = None,
    tie_tol: Optional[float] = None,
) -> Decomposition:
    """Decompose ``f`` into eigenfunction atoms of ``fun``.

    The signal is null-projected once, then repeatedly flowed to
    extinction; each round subtracts the projection onto the extinction
    profile.  Iteration stops when the residual norm falls below
    ``rel_residual_tol`` times the input norm, when a profile is
    orthogonal to the residual (in which case the residual is returned
    untouched), or after ``max_atoms`` rounds.

    Parameters
    ----------
    fun : Functional
        Functional whose eigenfunctions are extracted.
    f : Signal
        Input signal.
    max_atoms : int
        Upper bound on the number of atoms.
    rel_residual_tol : float
        Residual stopping fraction of the input norm.
    delta, extinction_threshold, max_steps, settings, tie_tol
        Inner flow parameters; see :func:`eigenflow.flow.run_flow` and
        :func:`eigenflow.flow.extract_profile`.  With ``delta=None``
        each flow picks its step from the current residual's norm,
        which keeps step counts stable as residuals shrink.

    Returns
    -------
    Decomposition

    Raises
    ------
    SchemeFlowError
        If an inner flow fails to reach extinction; the partial
        decomposition rides along on the exception.
    """
    if max_atoms < 0:
        raise ValueError("max_atoms must be nonnegative")
    if rel_residual_tol < 0:
        raise ValueError("rel_residual_tol must be nonnegative")
    current = fun.null_project(f)
    input_signal = current
    input_norm = current.norm
    atoms: List[Atom] = []

    def snapshot(termination: str) -> Decomposition:
        return Decomposition(
            atoms=tuple(atoms),
            residual=current,
            input=input_signal,
            input_norm=input_norm,
            termination=termination,
        )

    if input_norm == 0.0:
        return snapshot("null_input")

    current_norm = input_norm
    while True:
        if current_norm <= rel_residual_tol * input_norm:
            return snapshot("residual_tol")
        if len(atoms) >= max_atoms:
            return snapshot("max_atoms")
        trace = run_flow(
            fun,
            current,
            delta=delta,
            extinction_threshold=extinction_threshold,
            max_steps=max_steps,
            settings=settings,
        )
        if not trace.extinct:
            raise SchemeFlowError(
                f"flow for atom {len(atoms)} did not reach extinction: "
                f"{trace.warning}",
                snapshot("flow_failure"),
            )
        profile = extract_profile(fun, trace, tie_tol=tie_tol)
        c = coefficient(current, profile.p_star)
        if abs(c) * profile.eigenvalue <= ORTHOGONALITY_FRACTION * input_norm:
            # orthogonal profile: the scheme is stuck, and by
            # construction f_{n+1} would equal f_n; stop without
            # touching the residual
            return snapshot("orthogonal")
        current = current.with_values(current.values - c * profile.p_star.values)
        current_norm = current.norm
        atoms.append(
            Atom(c=c, p_star=profile, residual_norm_after=current_norm)
        )


def verify_norm_identity(dec: Decomposition) -> NormIdentityReport:
    """Check ``||f_{n+1}||^2 = ||f_n||^2 - <f_n,p*>^2/||p*||^2`` per step.

    Replays the subtraction from the stored input and atoms and
    measures the relative error of the identity at every step.  The
    identity is pure algebra, so errors sit at rounding level for any
    faithful run.

    Parameters
    ----------
    dec : Decomposition

    Returns
    -------
    NormIdentityReport
    """
    errors: List[float] = []
    f_n = dec.input.values
    for atom in dec.atoms:
        p = atom.p_star.p_star.values
        norm_sq_before = float(np.dot(f_n, f_n))
        gain = float(np.dot(f_n, p)) ** 2 / float(np.dot(p, p))
        f_n = f_n - atom.c * p
        lhs = float(np.dot(f_n, f_n))
        rhs = norm_sq_before - gain
        errors.append(abs(lhs - rhs) / max(norm_sq_before, 1e-300))
    return NormIdentityReport(
        per_step=tuple(errors), max_error=max(errors, default=0.0)
    )


def parseval_report(f: Signal, dec: Decomposition) -> Tuple[float, ...]:
    """Partial-sum ratios ``r_n = sum_{i<=n} c_i <p_i*, f> / ||f||^2``.

    In the fully decomposable case the ratios approach one, mirroring
    how Fourier partial sums fill the energy of a signal.

    Parameters
    ----------
    f : Signal
        The decomposed signal (the original or its null projection;
        atoms are orthogonal to the null space, so both give the same
        ratios).
    dec : Decomposition

    Returns
    -------
    tuple of float
        One ratio per atom, in order.

    Raises
    ------
    ValueError
        If ``f`` is the zero signal.
    """
    norm_sq = float(np.dot(f.values, f.values))
    if norm_sq == 0.0:
        raise ValueError("Parseval ratios undefined for a zero signal")
    ratios: List[float] = []
    acc = 0.0
    for atom in dec.atoms:
        acc += atom.c * float(np.dot(atom.p_star.p_star.values, f.values))
        ratios.append(acc / norm_sq)
    return tuple(ratios)


def reconstruct(dec: Decomposition, upto: Optional[int] = None) -> Signal:
    """Partial reconstruction ``sum_{i < upto} c_i p_i*``.

    Parameters
    ----------
    dec : Decomposition
    upto : int, optional
        Number of leading atoms to sum; defaults to all of them.  The
        full sum plus ``dec.residual`` equals ``dec.input`` up to
        rounding.

    Returns
    -------
    Signal

    Raises
    ------
    IndexError
        If ``upto`` is negative or exceeds the atom count.
    """
    if upto is None:
        upto = len(dec.atoms)
    if not 0 <= upto <= len(dec.atoms):
        raise IndexError(
            f"upto must lie in [0, {len(dec.atoms)}], got {upto}"
        )
    acc = np.zeros(len(dec.input))
    for atom in dec.atoms[:upto]:
        acc += atom.c * atom.p_star.p_star.values
    return dec.input.with_values(acc)
