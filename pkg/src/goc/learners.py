"""Threshold learning without knowledge of the adversary's utility.

Both learners sweep a uniform grid of candidate thresholds, estimate each
candidate's acceptance rate from observed accept/reject outcomes, and map
it through the known value curve to an estimated collector utility. The
explore-then-commit learner plays every candidate a fixed number of
rounds; the elimination learner drops candidates whose estimate falls a
confidence radius behind the current best.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from goc.envelope import EnvelopeTable
from goc.noise import Scenario
from goc.oracle import realized_u
from goc.utility import LipschitzProfile, UtilitySpec, q_dc

_ELIM_BLOCK = 4096


def _least_integer_above(x: float) -> int:
    """Smallest integer strictly greater than ``x``, robust to float fuzz."""
    n = math.floor(x * (1.0 + 1e-12)) + 1
    return int(n)


def derive_budget(
    a: float, b: float, delta: float, lam: float, lip: LipschitzProfile
) -> tuple[int, int]:
    """Smallest (n, k) strictly satisfying the grid and per-candidate sampling bounds.

    ``n`` exceeds ``(b - a) max(2 L / lambda, 1 / d)`` and ``k`` exceeds
    ``(8 ell^2 / lambda^2) ln(2 (n + 1) / delta)``.
    """
    if not (2.0 <= a < b):
        raise ValueError("need 2 <= a < b")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if not lam > 0.0:
        raise ValueError("lambda must be positive")
    n = _least_integer_above((b - a) * max(2.0 * lip.big_l / lam, 1.0 / lip.d))
    k = _least_integer_above(
        (8.0 * lip.ell ** 2 / lam ** 2) * math.log(2.0 * (n + 1) / delta)
    )
    return n, k


def elimination_radius(ell: float, n: int, delta: float, r: int) -> float:
    """Confidence radius after ``r`` rounds: ``2 ell sqrt(ln(4(n+1)/delta) / (2r))``."""
    return 2.0 * ell * math.sqrt(math.log(4.0 * (n + 1) / delta) / (2.0 * r))


@dataclass(frozen=True)
class LearnerConfig:
    """Grid range, accuracy/confidence targets, smoothness profile, and derived budget."""

    a: float
    b: float
    delta: float
    lam: float
    lip: LipschitzProfile
    n: int
    k: int
    budget_scale: float = 1.0

    def __post_init__(self) -> None:
        if not (2.0 <= self.a < self.b):
            raise ValueError("need 2 <= a < b")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if not self.lam > 0.0:
            raise ValueError("lambda must be positive")
        if not 0.0 < self.budget_scale <= 1.0:
            raise ValueError("budget_scale must lie in (0, 1]")
        n_min, k_min = derive_budget(self.a, self.b, self.delta, self.lam, self.lip)
        if self.n < n_min:
            raise ValueError(f"n = {self.n} below the required {n_min}")
        if self.budget_scale == 1.0 and self.k < k_min:
            raise ValueError(f"k = {self.k} below the required {k_min}")
        if self.k < 1:
            raise ValueError("k must be >= 1")

    @classmethod
    def derive(
        cls,
        a: float,
        b: float,
        delta: float,
        lam: float,
        lip: LipschitzProfile,
        budget_scale: float = 1.0,
    ) -> "LearnerConfig":
        n, k = derive_budget(a, b, delta, lam, lip)
        if budget_scale != 1.0:
            k = max(1, math.ceil(k * budget_scale))
        return cls(a=a, b=b, delta=delta, lam=lam, lip=lip, n=n, k=k, budget_scale=budget_scale)

    def etas(self) -> np.ndarray:
        """Candidate grid ``a + (b - a) (i - 1) / n`` for ``i = 1 .. n + 1``."""
        return self.a + (self.b - self.a) * (np.arange(self.n + 1) / self.n)


@dataclass(frozen=True)
class ArmState:
    """Final per-candidate record; ``index`` is the 1-based grid position."""

    index: int
    eta: float
    rounds_played: int
    accept_count: int
    alpha_hat: float
    u_hat: float
    eliminated: bool
    eliminated_at_round: int | None = None


@dataclass(frozen=True)
class LearnerOutcome:
    """Learner output with the full per-candidate trace."""

    eta_hat: float
    eta_hat_index: int
    total_game_rounds: int
    arm_trace: tuple[ArmState, ...]
    elimination_log: tuple[tuple[int, int], ...] = ()  # (round, 1-based arm index)
    clamp_count: int = 0


@dataclass(frozen=True)
class RegretResult:
    raw: float
    capped: float


def _u_hat_rows(
    spec: UtilitySpec, tables: list[EnvelopeTable], alpha_hat: np.ndarray
) -> tuple[np.ndarray, int]:
    """Estimated utility per (arm, round) entry, clamping the rate into the table range.

    Returns the utility matrix and the number of clamped entries (rates
    below the table's lower edge; the singular small-rate region is far
    from optimal anyway).
    """
    out = np.empty_like(alpha_hat)
    clamped = 0
    for i, table in enumerate(tables):
        row = alpha_hat[i]
        clamped += int(np.count_nonzero(row < table.alpha_min))
        safe = np.clip(row, table.alpha_min, 1.0)
        c = np.interp(safe, table.alpha_grid, table.c_values)
        out[i] = q_dc(spec, c, safe)
    return out, clamped


def run_etc(config: LearnerConfig, env, spec: UtilitySpec) -> LearnerOutcome:
    """Play every candidate exactly ``k`` rounds, then commit to the best estimate.

    The candidate schedule is round-robin; with per-candidate streams the
    totals are identical to any interleaving. Exact ties resolve to the
    lowest index.
    """
    n_arms = config.n + 1
    if env.n_arms != n_arms:
        raise ValueError("environment arm count does not match the config grid")
    etas = config.etas()
    draws = env.acceptance_block(0, config.k)
    counts = draws.sum(axis=1)
    alpha_hat = counts / config.k
    u_hat, clamped = _u_hat_rows(spec, env.tables, alpha_hat[:, None])
    u_hat = u_hat[:, 0]
    m = int(np.argmax(u_hat))
    trace = tuple(
        ArmState(
            index=i + 1,
            eta=float(etas[i]),
            rounds_played=config.k,
            accept_count=int(counts[i]),
            alpha_hat=float(alpha_hat[i]),
            u_hat=float(u_hat[i]),
            eliminated=False,
        )
        for i in range(n_arms)
    )
    return LearnerOutcome(
        eta_hat=float(etas[m]),
        eta_hat_index=m + 1,
        total_game_rounds=n_arms * config.k,
        arm_trace=trace,
        clamp_count=clamped,
    )


def run_elimination(config: LearnerConfig, env, spec: UtilitySpec) -> LearnerOutcome:
    """Round-by-round play with confidence-radius elimination of trailing candidates.

    Each surviving candidate plays one game per round; a candidate is
    dropped as soon as the best current estimate exceeds its own by more
    than the shrinking radius. Processing is blocked for speed, which is
    equivalent to the sequential rule because candidate streams are
    independent: an elimination restarts the scan inside the block with
    the survivor set updated.
    """
    n_arms = config.n + 1
    if env.n_arms != n_arms:
        raise ValueError("environment arm count does not match the config grid")
    etas = config.etas()
    k = config.k
    ell = config.lip.ell
    ln_term = math.log(4.0 * n_arms / config.delta)

    alive = np.ones(n_arms, dtype=bool)
    counts = np.zeros(n_arms, dtype=np.int64)
    elim_round = np.zeros(n_arms, dtype=np.int64)
    snap_counts = np.zeros(n_arms, dtype=np.int64)
    snap_alpha = np.zeros(n_arms)
    snap_u = np.full(n_arms, -np.inf)
    log: list[tuple[int, int]] = []
    clamp_count = 0
    final_alpha = np.zeros(n_arms)
    final_u = np.full(n_arms, -np.inf)

    pos = 0
    while pos < k:
        b = min(_ELIM_BLOCK, k - pos)
        draws = env.acceptance_block(pos, pos + b)
        cum = counts[:, None] + np.cumsum(draws, axis=1)
        r_vec = np.arange(pos + 1, pos + b + 1, dtype=float)
        alpha_hat = cum / r_vec[None, :]
        u_hat, _ = _u_hat_rows(spec, env.tables, alpha_hat)
        eps = 2.0 * ell * np.sqrt(ln_term / (2.0 * r_vec))
        alive_at_start = alive.copy()
        j = 0
        while j < b:
            masked = np.where(alive[:, None], u_hat[:, j:], -np.inf)
            best = masked.max(axis=0)
            viol = (best[None, :] - masked) > eps[None, j:]
            viol &= alive[:, None]
            hit_cols = np.flatnonzero(viol.any(axis=0))
            if hit_cols.size == 0:
                break
            jj = j + int(hit_cols[0])
            dead = np.flatnonzero(viol[:, hit_cols[0]])
            r_elim = pos + jj + 1
            for i in dead:
                alive[i] = False
                elim_round[i] = r_elim
                snap_counts[i] = cum[i, jj]
                snap_alpha[i] = alpha_hat[i, jj]
                snap_u[i] = u_hat[i, jj]
                log.append((r_elim, int(i) + 1))
            j = jj + 1
        # clamp accounting over rounds each arm actually played in this block
        clamp_mask = alpha_hat < np.array([t.alpha_min for t in env.tables])[:, None]
        for i in np.flatnonzero(alive_at_start):
            limit = b if alive[i] else int(elim_round[i] - pos)
            clamp_count += int(np.count_nonzero(clamp_mask[i, :limit]))
        counts = cum[:, -1].copy()
        final_alpha = alpha_hat[:, -1]
        final_u = u_hat[:, -1]
        pos += b

    winners = np.where(alive, final_u, -np.inf)
    m = int(np.argmax(winners))
    total = int(np.sum(np.where(alive, k, elim_round)))
    trace = tuple(
        ArmState(
            index=i + 1,
            eta=float(etas[i]),
            rounds_played=int(k if alive[i] else elim_round[i]),
            accept_count=int(counts[i] if alive[i] else snap_counts[i]),
            alpha_hat=float(final_alpha[i] if alive[i] else snap_alpha[i]),
            u_hat=float(final_u[i] if alive[i] else snap_u[i]),
            eliminated=not bool(alive[i]),
            eliminated_at_round=None if alive[i] else int(elim_round[i]),
        )
        for i in range(n_arms)
    )
    return LearnerOutcome(
        eta_hat=float(etas[m]),
        eta_hat_index=m + 1,
        total_game_rounds=total,
        arm_trace=trace,
        elimination_log=tuple(log),
        clamp_count=clamp_count,
    )


def regret(
    outcome: LearnerOutcome,
    reference_u_star: float,
    scenario: Scenario,
    spec: UtilitySpec,
    table: EnvelopeTable | None = None,
    grid_size: int = 2001,
    alpha_min: float = 1e-3,
) -> RegretResult:
    """Reference utility minus the realized utility of the chosen threshold.

    The raw value can be negative when the reference grid is coarser than
    the landscape; the capped value floors it at zero for reporting.
    """
    u = realized_u(scenario, spec, outcome.eta_hat, table=table, grid_size=grid_size, alpha_min=alpha_min)
    raw = reference_u_star - u
    return RegretResult(raw=raw, capped=max(0.0, raw))
