"""Encoding and erasure decoding for explicit code instances.

Erasure words are int8 arrays over {0, 1, ERASED}.  The peeling decoder
runs synchronous sweeps: every check with exactly one erased neighbor at
the start of a sweep resolves it by XOR of its known neighbors.  The ML
oracle solves the erased columns exactly over GF(2) and fills every
uniquely determined bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ERASED = -1

FULLY_RECOVERED = "fully-recovered"
STALLED = "stalled"

_ML_SIZE_LIMIT = 10_000


class CodecError(ValueError):
    """Raised for words or instances a codec operation cannot accept."""


@dataclass
class DecodeOutcome:
    """Result of one decoding attempt.

    word holds the partially or fully recovered values with ERASED at
    unresolved indices; residual counts split by variable kind.  For the
    peeling decoder, position_trace (when requested) holds the fraction of
    still-erased message bits per position after each sweep.
    """

    status: str
    word: np.ndarray
    iterations: int
    residual_message_bits: int
    residual_all_bits: int
    position_trace: np.ndarray | None = None

    @property
    def recovered(self) -> bool:
        return self.status == FULLY_RECOVERED


def _as_word(c, word) -> np.ndarray:
    arr = np.asarray(word, dtype=np.int8)
    if arr.shape != (c.n,):
        raise CodecError(f"word length {arr.shape} does not match code length n={c.n}")
    bad = ~np.isin(arr, (0, 1, ERASED))
    if bad.any():
        raise CodecError(f"word entries must be 0, 1 or {ERASED}")
    return arr


def _edge_checks(c) -> np.ndarray:
    return np.repeat(np.arange(c.m, dtype=np.int64), np.diff(c.check_indptr))


def encode(c, message) -> np.ndarray:
    """Encode a message on a coupled RA instance.

    The parity of each check's message neighbors is accumulated along the
    chain in one forward pass, so parity bits at a check position depend
    only on message positions up to that point.

    Parameters
    ----------
    c : CodeInstance
        An instance of the "ra" family.
    message : array_like
        k bits in {0, 1}, position-major order.

    Returns
    -------
    np.ndarray
        Systematic codeword: message bits then parity bits in chain order.
    """
    if c.family != "ra":
        raise CodecError(f"encoding is defined for the 'ra' family, not {c.family!r}")
    msg = np.asarray(message, dtype=np.int8)
    if msg.shape != (c.k,):
        raise CodecError(f"message length {msg.shape} does not match k={c.k}")
    if not np.isin(msg, (0, 1)).all():
        raise CodecError("message entries must be 0 or 1")
    edge_chk = _edge_checks(c)
    is_msg_edge = c.check_vars < c.k
    ones = msg[c.check_vars[is_msg_edge]] == 1
    per_check = np.bincount(edge_chk[is_msg_edge][ones], minlength=c.m)
    parity = (np.cumsum(per_check) & 1).astype(np.int8)
    return np.concatenate([msg, parity])


def syndrome(c, word) -> np.ndarray:
    """Per-check parity of a fully known word; zero for codewords."""
    arr = _as_word(c, word)
    if (arr == ERASED).any():
        raise CodecError("syndrome needs a fully known word")
    edge_chk = _edge_checks(c)
    ones = arr[c.check_vars] == 1
    return (np.bincount(edge_chk[ones], minlength=c.m) & 1).astype(np.uint8)


def transmit_bec(codeword, eps: float, rng: np.random.Generator) -> np.ndarray:
    """Erase each bit independently with probability eps."""
    if not 0.0 <= eps <= 1.0:
        raise CodecError(f"erasure probability must lie in [0, 1], got {eps}")
    word = np.asarray(codeword, dtype=np.int8)
    if not np.isin(word, (0, 1)).all():
        raise CodecError("codeword entries must be 0 or 1")
    out = word.copy()
    out[rng.random(len(word)) < eps] = ERASED
    return out


def _residuals(c, unknown: np.ndarray) -> tuple[int, int]:
    is_msg = c.var_kind == 0
    return int(np.count_nonzero(unknown & is_msg)), int(np.count_nonzero(unknown))


def decode_peel(c, word, max_iters: int = 1000, record_positions: bool = False) -> DecodeOutcome:
    """Peel a received erasure word with synchronous sweeps.

    One iteration is a full sweep: the set of checks with exactly one
    erased neighbor is read off the state at the sweep start, then all of
    them resolve.  Stops on full recovery, on a sweep with no progress, or
    at max_iters.  The decoder never guesses; known bits are never
    rewritten.

    Parameters
    ----------
    c : CodeInstance
    word : array_like
        Length-n int8 word over {0, 1, ERASED}.
    max_iters : int
        Sweep budget.
    record_positions : bool
        Record the per-position erased fraction of message bits after
        every sweep (position_trace row t is the state after sweep t+1).

    Returns
    -------
    DecodeOutcome
    """
    work = _as_word(c, word).copy()
    unknown = work == ERASED

    is_msg = c.var_kind == 0
    trace: list[np.ndarray] = []
    if record_positions:
        n_pos = int(c.var_pos[is_msg].max()) + 1
        pos_totals = np.bincount(c.var_pos[is_msg], minlength=n_pos)

    n_unknown = int(np.count_nonzero(unknown))
    if n_unknown == 0:
        res_m, res_a = _residuals(c, unknown)
        return DecodeOutcome(FULLY_RECOVERED, work, 0, res_m, res_a,
                             np.empty((0, 0)) if record_positions else None)

    edge_chk = _edge_checks(c)
    erased_edge = unknown[c.check_vars]
    cnt = np.bincount(edge_chk[erased_edge], minlength=c.m)
    acc = np.bincount(edge_chk[~erased_edge][work[c.check_vars[~erased_edge]] == 1], minlength=c.m)
    isum = np.bincount(
        edge_chk[erased_edge], weights=c.check_vars[erased_edge].astype(np.float64), minlength=c.m
    ).astype(np.int64)

    vindptr, vchecks = c.var_adjacency()
    candidates = np.flatnonzero(cnt == 1)
    iters = 0
    while candidates.size and n_unknown and iters < max_iters:
        sel = candidates[cnt[candidates] == 1]
        if sel.size == 0:
            break
        bits = isum[sel]
        vals = (acc[sel] & 1).astype(np.int8)
        bits, first = np.unique(bits, return_index=True)  # duplicates agree on the BEC
        vals = vals[first]
        work[bits] = vals
        unknown[bits] = False
        n_unknown -= bits.size
        iters += 1
        if record_positions:
            trace.append(np.bincount(c.var_pos[unknown & is_msg], minlength=n_pos) / pos_totals)

        starts = vindptr[bits]
        lens = (vindptr[bits + 1] - starts).astype(np.int64)
        total = int(lens.sum())
        base = np.repeat(starts - np.concatenate(([0], np.cumsum(lens)[:-1])), lens)
        touched = vchecks[np.arange(total, dtype=np.int64) + base]
        np.add.at(cnt, touched, -1)
        np.subtract.at(isum, touched, np.repeat(bits, lens))
        np.add.at(acc, touched, np.repeat(vals.astype(np.int64), lens))
        candidates = np.unique(touched)

    res_m, res_a = _residuals(c, unknown)
    status = FULLY_RECOVERED if n_unknown == 0 else STALLED
    return DecodeOutcome(
        status,
        work,
        iters,
        res_m,
        res_a,
        np.array(trace) if record_positions else None,
    )


def decode_ml_oracle(c, word) -> DecodeOutcome:
    """Exact erasure recovery by GF(2) elimination on the erased columns.

    Every bit whose value agrees across all codeword completions is
    filled; the rest stay erased.  Full recovery iff the erased columns
    have full rank.  Intended as a correctness oracle for small codes;
    guarded to n <= 10_000.
    """
    if c.n > _ML_SIZE_LIMIT:
        raise CodecError(f"ML oracle is limited to n <= {_ML_SIZE_LIMIT}, got n={c.n}")
    work = _as_word(c, word).copy()
    unknown_idx = np.flatnonzero(work == ERASED)
    e = len(unknown_idx)
    if e == 0:
        res_m, res_a = _residuals(c, work == ERASED)
        return DecodeOutcome(FULLY_RECOVERED, work, 0, res_m, res_a)

    col_of = np.full(c.n, -1, dtype=np.int64)
    col_of[unknown_idx] = np.arange(e)
    words = (e + 1 + 63) // 64  # one extra bit for the right-hand side
    rows = np.zeros((c.m, words), dtype=np.uint64)

    edge_chk = _edge_checks(c)
    edge_col = col_of[c.check_vars]
    sel = edge_col >= 0
    flat_idx = edge_chk[sel] * words + (edge_col[sel] >> 6)
    np.bitwise_or.at(
        rows.reshape(-1), flat_idx, np.uint64(1) << (edge_col[sel] & 63).astype(np.uint64)
    )
    known_one = (~sel) & (work[c.check_vars] == 1)
    rhs = np.bincount(edge_chk[known_one], minlength=c.m) & 1
    rhs_word, rhs_bit = e >> 6, np.uint64(1) << np.uint64(e & 63)
    rows[rhs == 1, rhs_word] |= rhs_bit

    rank = 0
    pivot_cols = []
    for col in range(e):
        w, b = col >> 6, np.uint64(1) << np.uint64(col & 63)
        below = np.flatnonzero(rows[rank:, w] & b)
        if below.size == 0:
            continue  # free column
        piv = rank + below[0]
        if piv != rank:
            rows[[rank, piv]] = rows[[piv, rank]]
        hit = (rows[:, w] & b) != 0
        hit[rank] = False
        rows[hit] ^= rows[rank]
        pivot_cols.append(col)
        rank += 1
        if rank == c.m:
            break
    if np.any(rows[rank:, rhs_word] & rhs_bit):
        raise CodecError("inconsistent erasure word: no codeword completion exists")

    filled = 0
    for r, col in enumerate(pivot_cols):
        row = rows[r].copy()
        row[col >> 6] &= ~(np.uint64(1) << np.uint64(col & 63))
        value = int(row[rhs_word] & rhs_bit != 0)
        row[rhs_word] &= ~rhs_bit
        if not row.any():  # support is the pivot alone: uniquely determined
            work[unknown_idx[col]] = value
            filled += 1

    unknown = work == ERASED
    res_m, res_a = _residuals(c, unknown)
    status = FULLY_RECOVERED if filled == e else STALLED
    return DecodeOutcome(status, work, 0, res_m, res_a)
