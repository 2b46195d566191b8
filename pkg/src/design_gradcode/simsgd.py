"""Simulated coded gradient descent on synthetic least-squares data.

Worker j returns ``c_j = (1/K) sum_i E[i, j] g_i``; the server forms
``g_hat = C_F v`` which estimates ``g / K``. Arrays of dtype ``object``
holding ints or Fractions are carried through exactly.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .decoder import DecodeResult, StragglerScenario, decode, worst_case_error
from .errors import Indivisible
from .gradcode import GradientCode
from .straggler import greedy_adversary, random_stragglers


@dataclass(frozen=True, eq=False)
class SyntheticDataset:
    X: np.ndarray  # (M, d)
    y: np.ndarray  # (M,)
    w_star: np.ndarray
    sigma: float
    K: int

    def __post_init__(self):
        if self.X.shape[0] % self.K:
            raise Indivisible(f"K={self.K} does not divide M={self.X.shape[0]}")

    @property
    def M(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def parts(self) -> list[range]:
        size = self.M // self.K
        return [range(i * size, (i + 1) * size) for i in range(self.K)]


def make_dataset(M: int, d: int, K: int, sigma: float, seed: int) -> SyntheticDataset:
    if K < 1 or M % K:
        raise Indivisible(f"K={K} does not divide M={M}")
    if d < 1 or sigma < 0:
        raise ValueError("need d >= 1 and sigma >= 0")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((M, d))
    w_star = rng.standard_normal(d)
    y = X @ w_star + sigma * rng.standard_normal(M)
    return SyntheticDataset(X, y, w_star, sigma, K)


def loss(dataset: SyntheticDataset, w) -> float:
    """Mean squared error over the whole batch."""
    r = dataset.X @ w - dataset.y
    return float(r @ r) / dataset.M


def partial_gradients(dataset: SyntheticDataset, w) -> np.ndarray:
    """``d x K`` matrix; column i sums ``2 x (x.w - y)`` over part i."""
    w = np.asarray(w, dtype=dataset.X.dtype)
    per_sample = 2 * dataset.X * (dataset.X @ w - dataset.y)[:, None]
    size = dataset.M // dataset.K
    return per_sample.reshape(dataset.K, size, dataset.d).sum(axis=1).T


@dataclass(frozen=True, eq=False)
class GradientRound:
    t: int
    w: np.ndarray
    G: np.ndarray
    messages: np.ndarray  # d x N
    g: np.ndarray
    g_hat: np.ndarray
    scenario: StragglerScenario
    decoded: DecodeResult

    @property
    def deviation(self) -> float:
        """``||g_hat - g/K||``."""
        K = self.G.shape[1]
        scale = Fraction(1, K) if self.G.dtype == object else 1 / K
        return float(np.linalg.norm(np.asarray(self.g_hat - self.g * scale, dtype=float)))

    @property
    def bound(self) -> float:
        """``(1/K) ||G||_2 sqrt(err)``."""
        G = np.asarray(self.G, dtype=float)
        return float(np.linalg.norm(G, 2)) * float(self.decoded.err) ** 0.5 / G.shape[1]

    @property
    def bound_holds(self) -> bool:
        return self.deviation <= self.bound * (1 + 1e-9) + 1e-12


def coded_round(
    code: GradientCode,
    dataset: SyntheticDataset,
    w,
    scenario: StragglerScenario,
    decoder: str = "auto",
    t: int = 0,
    decoded: DecodeResult | None = None,
) -> GradientRound:
    if code.K != dataset.K:
        raise ValueError(f"code has K={code.K}, dataset has K={dataset.K}")
    G = partial_gradients(dataset, w)
    exact = G.dtype == object
    if exact:
        C = (G @ code.E.astype(object)) * Fraction(1, code.K)
    else:
        C = (G @ code.E) / code.K
    res = decoded or decode(code, scenario, decoder)
    F = list(scenario.F)
    if exact:
        v = np.array([Fraction(x) for x in res.v_opt], dtype=object)
    else:
        v = np.array([float(x) for x in res.v_opt])
    g_hat = C[:, F] @ v
    return GradientRound(t, np.asarray(w), G, C, G.sum(axis=1), g_hat, scenario, res)


def _scenario_for(code: GradientCode, policy: str, S: int, seed: int) -> StragglerScenario:
    if policy == "none":
        return StragglerScenario(code.N, ())
    if policy == "random":
        return random_stragglers(code.N, S, seed)
    if policy in ("adversarial", "greedy"):
        return greedy_adversary(code, S)[0]
    if policy == "exhaustive":
        return worst_case_error(code, S, "exhaustive")[1]
    raise ValueError(f"unknown straggler policy {policy!r}")


@dataclass(frozen=True)
class TrajectoryRow:
    step: int
    loss: float
    err: float
    grad_dev: float


def run_sgd(
    code: GradientCode,
    dataset: SyntheticDataset,
    policy: str = "none",
    S: int = 0,
    steps: int = 100,
    alpha: float = 1e-3,
    seed: int = 0,
    decoder: str = "auto",
) -> list[TrajectoryRow]:
    """Full-batch coded gradient descent ``w <- w - alpha * K * g_hat``.

    ``random`` draws a fresh straggler set each step from ``seed + step``;
    ``adversarial`` fixes the greedy set. Row t holds the loss before
    update t+1 (row 0 is the initial loss).
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    w = np.zeros(dataset.d)
    fixed = None if policy == "random" else _scenario_for(code, policy, S, seed)
    cache: dict[tuple[int, ...], DecodeResult] = {}
    rows = []
    for t in range(steps):
        sc = fixed or _scenario_for(code, policy, S, seed + t)
        if sc.stragglers not in cache:
            cache[sc.stragglers] = decode(code, sc, decoder)
        rnd = coded_round(code, dataset, w, sc, decoder, t, decoded=cache[sc.stragglers])
        rows.append(TrajectoryRow(t, loss(dataset, w), float(rnd.decoded.err), rnd.deviation))
        w = w - alpha * code.K * np.asarray(rnd.g_hat, dtype=float)
    return rows


def trajectory_csv(runs: dict[str, list[TrajectoryRow]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["code", "step", "loss", "err", "grad_dev"])
    for name, rows in runs.items():
        for r in rows:
            writer.writerow([name, r.step, f"{r.loss:.12g}", f"{r.err:.12g}", f"{r.grad_dev:.12g}"])
    return buf.getvalue()
