"""Nelder-Mead downhill simplex in the Lagarias et al. (1998) formulation.

Vertices are ranked by objective value; ties go to the vertex that entered
the simplex first. Each iteration evaluates one reflection, at most one
expansion or contraction, and ``n`` points when the simplex shrinks.
"""

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteObjective

_EPS = np.finfo(float).eps


class Termination(enum.Enum):
    X_TOL = "X_TOL"
    F_TOL = "F_TOL"
    MAX_ITER = "MAX_ITER"


@dataclass(frozen=True)
class SimplexConfig:
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    max_iterations: int = 2000
    x_tolerance: float = 1e-9
    f_tolerance: float = 1e-12
    initial_step: float = 0.0414 / 20
    restart: bool = False

    def __post_init__(self):
        if not self.reflection > 0:
            raise ValueError("reflection coefficient must be > 0")
        if not self.expansion > 1:
            raise ValueError("expansion coefficient must be > 1")
        if not 0 < self.contraction < 1:
            raise ValueError("contraction coefficient must be in (0, 1)")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink coefficient must be in (0, 1)")
        if not (self.x_tolerance > 0 and self.f_tolerance > 0):
            raise ValueError("tolerances must be positive")
        if not self.initial_step > 0:
            raise ValueError("initial step must be positive")
        if int(self.max_iterations) < 0:
            raise ValueError("max_iterations must be non-negative")


@dataclass(frozen=True)
class OptimizeResult:
    x_min: np.ndarray
    f_min: float
    iterations: int
    evaluations: int
    converged: bool
    termination_reason: Termination
    restarts: int = 0
    steps: dict = field(default_factory=dict)


class _Simplex:
    def __init__(self, objective, n):
        self.objective = objective
        self.n = n
        self.evaluations = 0
        self._next_id = 0
        self.best_x = None
        self.best_f = np.inf
        self.vertices = []

    def evaluate(self, x):
        f = float(self.objective(x))
        self.evaluations += 1
        if not np.isfinite(f):
            raise NonFiniteObjective(f"objective returned {f} at x={x.tolist()}")
        if f < self.best_f:
            self.best_f, self.best_x = f, x.copy()
        return f

    def make_vertex(self, x, f):
        vid = self._next_id
        self._next_id += 1
        return [x, f, vid]

    def build(self, x0, step):
        self.vertices = []
        x0 = np.array(x0, dtype=float)
        self.vertices.append(self.make_vertex(x0, self.evaluate(x0)))
        for i in range(self.n):
            x = x0.copy()
            x[i] += step
            self.vertices.append(self.make_vertex(x, self.evaluate(x)))
        self.order()

    def order(self):
        self.vertices.sort(key=lambda v: (v[1], v[2]))

    def diameter(self):
        xs = np.array([v[0] for v in self.vertices])
        diff = xs[:, None, :] - xs[None, :, :]
        return float(np.sqrt((diff ** 2).sum(axis=-1)).max())

    def spread(self):
        return self.vertices[-1][1] - self.vertices[0][1]


def minimize(objective, x0, config: SimplexConfig = SimplexConfig(),
             trace=None, callback=None) -> OptimizeResult:
    """Minimize ``objective`` from ``x0``.

    Converges once the simplex diameter is below ``x_tolerance`` and the
    spread of vertex values is below ``f_tolerance`` (or at the floating
    point resolution of the values). A perfectly flat simplex stops at
    once with ``F_TOL``. ``trace`` receives one JSON record per iteration;
    ``callback`` receives the same record as a dict.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    n = x0.size
    if n < 1:
        raise ValueError("need at least one free parameter")
    rho, chi = config.reflection, config.expansion
    gamma, sigma = config.contraction, config.shrink

    s = _Simplex(objective, n)
    s.build(x0, config.initial_step)
    iterations = 0
    restarts = 0
    steps = {"reflect": 0, "expand": 0, "contract_outside": 0, "contract_inside": 0, "shrink": 0}

    while True:
        f_best, f_worst = s.vertices[0][1], s.vertices[-1][1]
        spread = f_worst - f_best
        f_floor = 8.0 * _EPS * max(abs(f_best), abs(f_worst))
        reason = None
        if spread == 0.0:
            reason = Termination.F_TOL
        elif s.diameter() < config.x_tolerance and (spread < config.f_tolerance or spread <= f_floor):
            reason = Termination.X_TOL
        if reason is not None:
            if config.restart and restarts == 0 and iterations < config.max_iterations:
                restarts += 1
                s.build(s.best_x, config.initial_step)
                continue
            converged = True
            break
        if iterations >= config.max_iterations:
            reason, converged = Termination.MAX_ITER, False
            break

        worst = s.vertices[-1]
        centroid = np.mean([v[0] for v in s.vertices[:-1]], axis=0)
        xr = centroid + rho * (centroid - worst[0])
        fr = s.evaluate(xr)
        f_second_worst = s.vertices[-2][1]
        new = None
        if f_best <= fr < f_second_worst:
            new, kind = (xr, fr), "reflect"
        elif fr < f_best:
            xe = centroid + rho * chi * (centroid - worst[0])
            fe = s.evaluate(xe)
            new, kind = ((xe, fe), "expand") if fe < fr else ((xr, fr), "reflect")
        elif fr < worst[1]:
            xc = centroid + gamma * (xr - centroid)
            fc = s.evaluate(xc)
            if fc <= fr:
                new, kind = (xc, fc), "contract_outside"
        else:
            xcc = centroid - gamma * (centroid - worst[0])
            fcc = s.evaluate(xcc)
            if fcc < worst[1]:
                new, kind = (xcc, fcc), "contract_inside"

        if new is not None:
            s.vertices[-1] = s.make_vertex(*new)
        else:
            kind = "shrink"
            x_best = s.vertices[0][0]
            for v in s.vertices[1:]:
                x = x_best + sigma * (v[0] - x_best)
                v[:] = s.make_vertex(x, s.evaluate(x))
        steps[kind] += 1
        s.order()
        iterations += 1

        if trace is not None or callback is not None:
            record = {"iteration": iterations, "best_f": s.vertices[0][1],
                      "diameter": s.diameter(), "x": s.vertices[0][0].tolist(), "step": kind}
            if trace is not None:
                trace.write(json.dumps(record) + "\n")
            if callback is not None:
                callback(record)

    return OptimizeResult(x_min=s.best_x.copy(), f_min=s.best_f, iterations=iterations,
                          evaluations=s.evaluations, converged=converged,
                          termination_reason=reason, restarts=restarts, steps=steps)
