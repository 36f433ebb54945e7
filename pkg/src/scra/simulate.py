"""Monte Carlo decoding experiments on the binary erasure channel.

Transmission uses the all-zero codeword (erasure decoding is blind to the
transmitted values, which toy-code tests verify).  Every trial draws from
a counter-based stream keyed by (seed, eps index, trial index), and the
stop rule is applied to the trial sequence in index order, so results are
identical for any worker count.
"""

from __future__ import annotations

import hashlib
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from scra.codec import decode_peel, transmit_bec
from scra.construct import CodeInstance, save_descriptor

Z95 = 1.959963984540054  # two-sided 95% normal quantile


class SimulationError(RuntimeError):
    """Raised for unusable sweep plans or unlocatable features."""


@dataclass(frozen=True)
class SweepPlan:
    """One erasure-rate sweep.

    eps_grid: channel erasure rates to visit, each in [0, 1].
    max_trials: trial budget per rate.
    max_word_errors: stop a rate early once this many word errors have
        accumulated along the trial sequence (None disables).
    max_iters: peeling sweep budget per trial.
    seed: master seed of the per-trial channel streams.
    """

    eps_grid: tuple[float, ...]
    max_trials: int = 10_000
    max_word_errors: int | None = 100
    max_iters: int = 1000
    seed: int = 0

    def __post_init__(self) -> None:
        if len(self.eps_grid) == 0:
            raise SimulationError("eps_grid must not be empty")
        if any(not 0.0 <= e <= 1.0 for e in self.eps_grid):
            raise SimulationError("every eps must lie in [0, 1]")
        if self.max_trials < 1:
            raise SimulationError("max_trials must be >= 1")
        if self.max_word_errors is not None and self.max_word_errors < 1:
            raise SimulationError("max_word_errors must be >= 1 or None")


def eps_range(start: float, stop: float, step: float) -> tuple[float, ...]:
    """Inclusive rate grid; (0, 0, 1) is the single point 0."""
    if step <= 0:
        raise SimulationError("step must be positive")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    if count < 1:
        raise SimulationError(f"empty eps range {start}:{stop}:{step}")
    return tuple(float(start + i * step) for i in range(count))


def trial_stream(seed: int, eps_index: int, trial_index: int) -> np.random.Generator:
    """Counter-based channel stream for one (rate, trial) cell."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(eps_index, trial_index))
    return np.random.Generator(np.random.Philox(ss))


def wilson_interval(successes, trials, z: float = Z95):
    """Wilson score interval for a binomial proportion; vectorized."""
    k = np.asarray(successes, dtype=np.float64)
    t = np.asarray(trials, dtype=np.float64)
    p = np.divide(k, t, out=np.zeros_like(k), where=t > 0)
    denom = 1.0 + z * z / t
    center = (p + z * z / (2 * t)) / denom
    half = (z / denom) * np.sqrt(p * (1 - p) / t + z * z / (4 * t * t))
    # the bounds are exact at the empirical extremes; do not let roundoff leak past them
    lo = np.where(k == 0, 0.0, np.clip(center - half, 0.0, 1.0))
    hi = np.where(k == t, 1.0, np.clip(center + half, 0.0, 1.0))
    return lo, hi


@dataclass
class SimResult:
    """Integer tallies of one sweep plus code metadata for reporting."""

    eps: np.ndarray
    trials: np.ndarray
    word_errors: np.ndarray
    bit_errors_message: np.ndarray
    bit_errors_all: np.ndarray
    iteration_sum: np.ndarray
    n: int
    k: int
    message_bit_count: int
    metadata: dict = field(default_factory=dict)

    def wer(self) -> np.ndarray:
        return self.word_errors / self.trials

    def wer_interval(self) -> tuple[np.ndarray, np.ndarray]:
        return wilson_interval(self.word_errors, self.trials)

    def ber_message(self) -> np.ndarray:
        return self.bit_errors_message / (self.trials * self.message_bit_count)

    def ber_all(self) -> np.ndarray:
        return self.bit_errors_all / (self.trials * self.n)

    def mean_iters(self) -> np.ndarray:
        return self.iteration_sum / self.trials

    def to_csv(self, dest) -> None:
        lo, hi = self.wer_interval()
        wer = self.wer()
        ber_m = self.ber_message()
        ber_a = self.ber_all()
        mi = self.mean_iters()
        lines = ["# scra-sim v1"]
        for key in sorted(self.metadata):
            lines.append(f"# {key}={self.metadata[key]}")
        lines.append("eps,trials,word_err,wer,wer_lo,wer_hi,bit_err_msg,ber_msg,ber_all,mean_iters")
        for i in range(len(self.eps)):
            lines.append(
                f"{self.eps[i]:.6f},{int(self.trials[i])},{int(self.word_errors[i])},"
                f"{wer[i]:.10g},{lo[i]:.10g},{hi[i]:.10g},"
                f"{int(self.bit_errors_message[i])},{ber_m[i]:.10g},{ber_a[i]:.10g},{mi[i]:.10g}"
            )
        text = "\n".join(lines) + "\n"
        if hasattr(dest, "write"):
            dest.write(text)
        else:
            with open(dest, "w") as fh:
                fh.write(text)


def code_build_id(c: CodeInstance) -> str:
    """Content hash of the full descriptor, used as the build identifier."""
    buf = io.StringIO()
    save_descriptor(c, buf)
    return hashlib.sha256(buf.getvalue().encode()).hexdigest()[:12]


_worker_code: CodeInstance | None = None


def _init_worker(code: CodeInstance) -> None:
    global _worker_code
    _worker_code = code


def _trial_rows(code: CodeInstance, eps: float, eps_idx: int, lo: int, hi: int,
                max_iters: int, seed: int) -> np.ndarray:
    """Per-trial tallies [word_err, msg_residual, all_residual, iters] for one batch."""
    out = np.zeros((hi - lo, 4), dtype=np.int64)
    zero = np.zeros(code.n, dtype=np.int8)
    for t in range(lo, hi):
        rng = trial_stream(seed, eps_idx, t)
        word = transmit_bec(zero, eps, rng)
        res = decode_peel(code, word, max_iters=max_iters)
        out[t - lo] = (
            0 if res.recovered else 1,
            res.residual_message_bits,
            res.residual_all_bits,
            res.iterations,
        )
    return out


def _worker_entry(args) -> np.ndarray:
    eps, eps_idx, lo, hi, max_iters, seed = args
    return _trial_rows(_worker_code, eps, eps_idx, lo, hi, max_iters, seed)


def _stop_index(word_err_flags: np.ndarray, max_word_errors: int | None) -> int | None:
    """Trials to keep once the stop rule fires on the in-order prefix, else None."""
    if max_word_errors is None:
        return None
    cum = np.cumsum(word_err_flags)
    if cum[-1] < max_word_errors:
        return None
    return int(np.searchsorted(cum, max_word_errors)) + 1


def run_sweep(code: CodeInstance, plan: SweepPlan, jobs: int = 1) -> SimResult:
    """Run the sweep; tallies are reduced in (eps index, trial index) order.

    With jobs > 1, trial batches run in a process pool; batches beyond the
    deterministic stop point are discarded, so the result is identical for
    any jobs value.
    """
    if jobs < 1:
        raise SimulationError("jobs must be >= 1")
    n_eps = len(plan.eps_grid)
    trials = np.zeros(n_eps, dtype=np.int64)
    tallies = np.zeros((n_eps, 4), dtype=np.int64)

    batch = 50
    executor = None
    try:
        if jobs > 1:
            executor = ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(code,))
        for ei, eps in enumerate(plan.eps_grid):
            rows: list[np.ndarray] = []
            done = 0
            stop_at: int | None = None
            while done < plan.max_trials and stop_at is None:
                wave = []
                for _ in range(max(1, jobs)):
                    if done >= plan.max_trials:
                        break
                    hi = min(done + batch, plan.max_trials)
                    wave.append((eps, ei, done, hi, plan.max_iters, plan.seed))
                    done = hi
                if executor is None:
                    results = [_trial_rows(code, *w) for w in wave]
                else:
                    results = list(executor.map(_worker_entry, wave))
                rows.extend(results)
                flags = np.concatenate([r[:, 0] for r in rows])
                stop_at = _stop_index(flags, plan.max_word_errors)
            all_rows = np.concatenate(rows)
            keep = all_rows if stop_at is None else all_rows[:stop_at]
            trials[ei] = len(keep)
            tallies[ei] = keep.sum(axis=0)
    finally:
        if executor is not None:
            executor.shutdown()

    is_msg = code.var_kind == 0
    meta = {
        "build": code_build_id(code),
        "family": code.family,
        "n": code.n,
        "k": code.k,
        "message_bits": int(np.count_nonzero(is_msg)),
        "construction_seed": code.seed,
        "plan_seed": plan.seed,
        "max_trials": plan.max_trials,
        "max_word_errors": plan.max_word_errors,
        "max_iters": plan.max_iters,
    }
    if code.params is not None:
        meta["params"] = repr(code.params)
    return SimResult(
        eps=np.asarray(plan.eps_grid, dtype=np.float64),
        trials=trials,
        word_errors=tallies[:, 0],
        bit_errors_message=tallies[:, 1],
        bit_errors_all=tallies[:, 2],
        iteration_sum=tallies[:, 3],
        n=code.n,
        k=code.k,
        message_bit_count=int(np.count_nonzero(is_msg)),
        metadata=meta,
    )


def waterfall_crossing(result: SimResult, level: float = 0.5) -> float:
    """Erasure rate where the WER curve crosses `level`.

    Takes the last grid bracket with wer[i] <= level < wer[i+1] and
    interpolates log-WER linearly inside it; a zero count is floored at
    half a trial for the logarithm.
    """
    wer = result.wer()
    bracket = None
    for i in range(len(wer) - 1):
        if wer[i] <= level < wer[i + 1]:
            bracket = i
    if bracket is None:
        raise SimulationError(f"WER never crosses {level} inside the grid")
    i = bracket
    floor_i = 0.5 / result.trials[i]
    la = np.log(max(wer[i], floor_i))
    lb = np.log(wer[i + 1])
    t = (np.log(level) - la) / (lb - la) if lb != la else 0.5
    return float(result.eps[i] + t * (result.eps[i + 1] - result.eps[i]))


@dataclass(frozen=True)
class CompareRow:
    eps: float
    wer_a: float
    wer_b: float
    wer_delta: float
    intervals_separate: bool
    ber_msg_a: float
    ber_msg_b: float


def compare_runs(a: SimResult, b: SimResult) -> list[CompareRow]:
    """Per-rate deltas of two runs on their shared grid points."""
    rows: list[CompareRow] = []
    lo_a, hi_a = a.wer_interval()
    lo_b, hi_b = b.wer_interval()
    wer_a, wer_b = a.wer(), b.wer()
    ber_a, ber_b = a.ber_message(), b.ber_message()
    for i, eps in enumerate(a.eps):
        js = np.flatnonzero(np.isclose(b.eps, eps, rtol=0, atol=1e-12))
        if js.size == 0:
            continue
        j = int(js[0])
        rows.append(
            CompareRow(
                eps=float(eps),
                wer_a=float(wer_a[i]),
                wer_b=float(wer_b[j]),
                wer_delta=float(wer_a[i] - wer_b[j]),
                intervals_separate=bool(hi_a[i] < lo_b[j] or hi_b[j] < lo_a[i]),
                ber_msg_a=float(ber_a[i]),
                ber_msg_b=float(ber_b[j]),
            )
        )
    if not rows:
        raise SimulationError("the two runs share no eps grid points")
    return rows
