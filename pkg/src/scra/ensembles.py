"""Ensemble parameter sets and exact rate formulas for coupled codes.

Rates for the terminated coupled repeat-accumulate ensemble and the
coupled LDPC baseline are exact rationals so that size bookkeeping stays
integer-exact; the smoothed-ensemble rate is a float.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction


class ParameterError(ValueError):
    """Raised for ensemble parameters that violate a validity constraint."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ParameterError(msg)


@dataclass(frozen=True)
class ScRaParams:
    """Coupled repeat-accumulate ensemble parameters.

    q: repetition factor (each message bit is copied q times), q >= 2.
    a: combiner factor (message edges absorbed per check), a >= 1.
    L: one-sided coupling length; positions run over 2L+1 slots.
    M: message bits per position.  a must divide q*M so each check
       position holds an integer number (q/a)*M of checks.
    w: smoothing window for the randomized ensemble, or None for the
       structured (protograph) ensemble.
    """

    q: int
    a: int
    L: int
    M: int = 1
    w: int | None = None

    def __post_init__(self) -> None:
        _require(isinstance(self.q, int) and self.q >= 2, f"q must be an integer >= 2, got {self.q!r}")
        _require(isinstance(self.a, int) and self.a >= 1, f"a must be an integer >= 1, got {self.a!r}")
        _require(isinstance(self.L, int) and self.L >= 0, f"L must be an integer >= 0, got {self.L!r}")
        _require(isinstance(self.M, int) and self.M >= 1, f"M must be an integer >= 1, got {self.M!r}")
        _require(
            (self.q * self.M) % self.a == 0,
            f"a={self.a} must divide q*M={self.q * self.M} for an integer check count per position",
        )
        if self.w is not None:
            _require(isinstance(self.w, int) and self.w >= 1, f"w must be an integer >= 1, got {self.w!r}")

    @property
    def hhat(self) -> int | None:
        """One-sided reach (q-1)/2 of the centered window; None for even q."""
        return (self.q - 1) // 2 if self.q % 2 == 1 else None


@dataclass(frozen=True)
class ScLdpcParams:
    """Coupled regular LDPC baseline parameters.

    dl: variable degree, dl >= 2.   dr: check degree, dr >= dl.
    L: one-sided coupling length.   M: bit nodes per position; dr must
    divide dl*M.  w: smoothing window or None for the structured ensemble.
    """

    dl: int
    dr: int
    L: int
    M: int = 1
    w: int | None = None

    def __post_init__(self) -> None:
        _require(isinstance(self.dl, int) and self.dl >= 2, f"dl must be an integer >= 2, got {self.dl!r}")
        _require(isinstance(self.dr, int) and self.dr >= self.dl, f"dr must be an integer >= dl, got {self.dr!r}")
        _require(isinstance(self.L, int) and self.L >= 0, f"L must be an integer >= 0, got {self.L!r}")
        _require(isinstance(self.M, int) and self.M >= 1, f"M must be an integer >= 1, got {self.M!r}")
        _require(
            (self.dl * self.M) % self.dr == 0,
            f"dr={self.dr} must divide dl*M={self.dl * self.M} for an integer check count per position",
        )
        if self.w is not None:
            _require(isinstance(self.w, int) and self.w >= 1, f"w must be an integer >= 1, got {self.w!r}")


@dataclass(frozen=True)
class NodeCounts:
    """Node totals of one coupled RA instance."""

    message_bits: int
    parity_bits: int
    checks: int

    @property
    def k(self) -> int:
        return self.message_bits

    @property
    def n(self) -> int:
        return self.message_bits + self.parity_bits


def rate_sc_ra(p: ScRaParams) -> Fraction:
    """Design rate of the terminated coupled RA ensemble, exact.

    (2L+1)a / ((2L+1)a + (2L+q)q); the q-1 extra check positions past the
    message span carry the termination overhead.  Tends to a/(a+q) as L
    grows.
    """
    if p.w is not None:
        raise ParameterError("rate_sc_ra applies to the structured ensemble; w must be None")
    span = 2 * p.L + 1
    return Fraction(span * p.a, span * p.a + (2 * p.L + p.q) * p.q)


def rate_sc_ra_w(p: ScRaParams) -> float:
    """Design rate of the smoothed coupled RA ensemble with window w.

    (2L+1) / ((2L+1) + (q/a) * [2L - w + 2(w + 1 - sum_{i=0..w} (i/w)^a)]).
    Collapses to a/(a+q) at w=1.
    """
    if p.w is None:
        raise ParameterError("rate_sc_ra_w needs the smoothing window w")
    span = 2 * p.L + 1
    boundary = sum((i / p.w) ** p.a for i in range(p.w + 1))
    overhead = 2 * p.L - p.w + 2 * (p.w + 1 - boundary)
    return span / (span + (p.q / p.a) * overhead)


def rate_sc_ldpc(p: ScLdpcParams) -> Fraction:
    """Design rate of the terminated coupled (dl, dr) LDPC ensemble, exact.

    1 - (dl/dr) * (2L+dl)/(2L+1), counting the dl-1 extra check positions
    created by termination.  dl == dr makes this nonpositive; such a
    parameter set is flagged as degenerate but still computed.
    """
    span = 2 * p.L + 1
    r = 1 - Fraction(p.dl, p.dr) * Fraction(2 * p.L + p.dl, span)
    if r <= 0:
        warnings.warn(f"degenerate coupled LDPC ensemble: design rate {r} is not positive")
    return r


def node_counts(p: ScRaParams) -> NodeCounts:
    """Message/parity/check totals for a coupled RA instance.

    One parity bit per check, so parity_bits == checks always.
    """
    span = 2 * p.L + 1
    checks = (2 * p.L + p.q) * (p.q * p.M // p.a)
    return NodeCounts(message_bits=span * p.M, parity_bits=checks, checks=checks)


def code_size(p: ScRaParams | ScLdpcParams) -> tuple[int, int]:
    """(k, n) of an instance with these parameters.

    For the RA family k counts the systematic message bits.  For the LDPC
    baseline k = n - checks, the nominal dimension at full check rank.
    """
    if isinstance(p, ScRaParams):
        c = node_counts(p)
        return c.k, c.n
    n = (2 * p.L + 1) * p.M
    m = (2 * p.L + p.dl) * (p.dl * p.M // p.dr)
    return n - m, n


def density_matched_q(dl: int, rate: Fraction | float | int | str) -> int:
    """Repetition factor q giving a q=a RA ensemble the same edge density
    as a degree-dl LDPC code of the given rate: q = (dl-2)/rate + 2.

    The rate is taken exactly (strings like "1/2" are accepted); a
    non-integral result raises ParameterError.
    """
    _require(isinstance(dl, int) and dl >= 2, f"dl must be an integer >= 2, got {dl!r}")
    r = Fraction(rate)
    _require(r > 0, f"rate must be positive, got {rate!r}")
    q = Fraction(dl - 2, 1) / r + 2
    if q.denominator != 1:
        raise ParameterError(f"density matching of dl={dl} at rate {r} gives non-integral q={q}")
    return int(q)
