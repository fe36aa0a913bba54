"""Hybrid QAOA loop: derivative-free optimization of the simulated expectation."""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from qmsa.core.config import Config, OptimizerConfig, PenaltyConfig
from qmsa.core.errors import InvalidInputError, OptimizationError
from qmsa.models.alignment import Bitstring, SequenceSet
from qmsa.models.qaoa import (
    Outcome,
    QaoaParams,
    QaoaResult,
    SampleHistogram,
    StartTrace,
    StateVector,
    SweepResult,
)
from qmsa.models.qubo import QuboModel
from qmsa.services.encoding import build_index_map, decode_bitstring
from qmsa.services.hamiltonian import build_cost_qubo, build_energy_diagonal
from qmsa.services.scoring import ScoringScheme, WeightTensor, build_weight_tensor, sim_sp
from qmsa.services.simulator import expectation, make_rng, sample, trial_state

Objective = Callable[[np.ndarray], float]


@dataclass(frozen=True, eq=False)
class CostProblem:
    """An instance compiled down to its energy diagonal."""

    seqs: SequenceSet
    weights: WeightTensor
    qubo: QuboModel
    diag: np.ndarray

    @property
    def n(self) -> int:
        return self.qubo.n


@dataclass(frozen=True)
class OptimizationOutcome:
    params: QaoaParams
    value: float
    starts: Tuple[StartTrace, ...]
    minima: Tuple[QaoaParams, ...] = ()


def derive_seed(base_seed: int, *keys: int) -> int:
    """Independent 32-bit seed for a (base seed, key...) combination."""
    return int(np.random.SeedSequence([base_seed, *keys]).generate_state(1)[0])


class _Tracked:
    """Objective wrapper that records the best point ever evaluated."""

    def __init__(self, objective: Objective):
        self.objective = objective
        self.best_x: Optional[np.ndarray] = None
        self.best_value = math.inf
        self.evaluations = 0

    def __call__(self, x: np.ndarray) -> float:
        value = float(self.objective(np.asarray(x, dtype=float)))
        self.evaluations += 1
        if math.isnan(value):
            raise OptimizationError(f"Objective returned NaN at {list(x)}")
        if value < self.best_value:
            self.best_value = value
            self.best_x = np.array(x, dtype=float)
        return value


class QaoaService:
    """Runs the classical outer loop around the statevector simulator."""

    def __init__(self, config: Config, scheme: ScoringScheme = sim_sp):
        self.config = config
        self.scheme = scheme
        self.logger = logging.getLogger(__name__)

    def prepare(self, seqs: SequenceSet, penalties: Optional[PenaltyConfig] = None) -> CostProblem:
        """Weights -> QUBO -> energy diagonal."""
        penalties = penalties or self.config.penalties
        weights = build_weight_tensor(seqs, self.scheme)
        qubo = build_cost_qubo(seqs, weights, penalties)
        diag = build_energy_diagonal(
            qubo,
            max_qubits=self.config.simulation.max_qubits,
            workers=self.config.simulation.threads,
        )
        return CostProblem(seqs=seqs, weights=weights, qubo=qubo, diag=diag)

    def optimize(
        self,
        objective: Objective,
        p: int,
        cfg: Optional[OptimizerConfig] = None,
        warm_starts: Sequence[QaoaParams] = (),
        seed: Optional[int] = None,
        seeded_starts: Sequence[Tuple[str, QaoaParams]] = (),
    ) -> OptimizationOutcome:
        """Best of a zero start, warm and seeded starts, ``cfg.starts`` random
        starts and a final polish of the winner.

        Warm starts are padded with identity layers; seeded starts must already
        have ``p`` layers. Random starts are the best ``cfg.starts`` out of
        ``cfg.starts * cfg.screening`` uniform draws. The best point over every
        evaluation is kept, so a run never ends above its own initial value.
        Ties go to the lowest start index.
        """
        cfg = cfg or self.config.optimizer
        rng = make_rng(cfg.seed if seed is None else seed)

        initial: List[Tuple[str, np.ndarray]] = [("zero", np.zeros(2 * p))]
        initial += [("warm", w.padded(p).to_vector()) for w in warm_starts]
        initial += [(kind, params.to_vector()) for kind, params in seeded_starts]
        initial += [("random", x0) for x0 in self._random_starts(objective, p, cfg, rng)]

        traces = []
        minima: List[Tuple[float, int, np.ndarray]] = []
        for index, (kind, x0) in enumerate(initial):
            tracked = self._local_search(objective, x0, cfg, cfg.rhobeg)
            self.logger.debug(
                f"p={p} start {index} ({kind}): {tracked.best_value:.6f} "
                f"after {tracked.evaluations} evaluations"
            )
            traces.append(self._trace(index, kind, x0, tracked))
            assert tracked.best_x is not None
            minima.append((tracked.best_value, index, tracked.best_x))

        minima.sort(key=lambda m: (m[0], m[1]))
        best_value, _, best_x = minima[0]
        if cfg.polish:
            index = len(initial)
            tracked = self._local_search(objective, best_x, cfg, cfg.rhobeg / 10)
            traces.append(self._trace(index, "polish", best_x, tracked))
            if tracked.best_value < best_value:
                assert tracked.best_x is not None
                best_value, best_x = tracked.best_value, tracked.best_x
                minima[0] = (best_value, 0, best_x)

        distinct: List[np.ndarray] = []
        for _, _, x in minima:
            if not any(np.allclose(x, y, atol=1e-4) for y in distinct):
                distinct.append(x)

        value = float(objective(best_x))
        return OptimizationOutcome(
            params=QaoaParams.from_vector(best_x),
            value=value,
            starts=tuple(traces),
            minima=tuple(QaoaParams.from_vector(x) for x in distinct),
        )

    def _random_starts(
        self, objective: Objective, p: int, cfg: OptimizerConfig, rng: np.random.Generator
    ) -> List[np.ndarray]:
        draws = cfg.starts * cfg.screening
        betas = rng.uniform(cfg.beta_range[0], cfg.beta_range[1], size=(draws, p))
        gammas = rng.uniform(cfg.gamma_range[0], cfg.gamma_range[1], size=(draws, p))
        candidates = [np.concatenate([b, g]) for b, g in zip(betas, gammas)]
        if cfg.screening == 1:
            return candidates
        screen = _Tracked(objective)
        values = [screen(x) for x in candidates]
        order = sorted(range(draws), key=lambda k: (values[k], k))
        return [candidates[k] for k in order[: cfg.starts]]

    @staticmethod
    def _local_search(
        objective: Objective, x0: np.ndarray, cfg: OptimizerConfig, rhobeg: float
    ) -> "_Tracked":
        # COBYLA counts function evaluations as iterations; the others take maxfev.
        if cfg.method == "COBYLA":
            options = {"maxiter": cfg.max_evaluations, "rhobeg": rhobeg}
        else:
            options = {"maxfev": cfg.max_evaluations}
        tracked = _Tracked(objective)
        minimize(tracked, x0, method=cfg.method, tol=cfg.tolerance, options=options)
        return tracked

    @staticmethod
    def _trace(index: int, kind: str, x0: np.ndarray, tracked: "_Tracked") -> StartTrace:
        return StartTrace(
            index=index,
            kind=kind,
            initial=tuple(float(v) for v in x0),
            expectation=tracked.best_value,
            evaluations=tracked.evaluations,
        )

    def _objective(self, problem: CostProblem, cfg: OptimizerConfig, seed: int) -> Objective:
        n = problem.n
        max_qubits = self.config.simulation.max_qubits
        if cfg.objective == "exact":
            return lambda x: expectation(
                trial_state(n, problem.diag, QaoaParams.from_vector(x), max_qubits),
                problem.diag,
            )

        shot_rng = make_rng(seed)

        def estimate(x: np.ndarray) -> float:
            psi = trial_state(n, problem.diag, QaoaParams.from_vector(x), max_qubits)
            hist = sample(psi, cfg.objective_shots, int(shot_rng.integers(2**32)))
            return sum(
                problem.diag[Bitstring.from_str(b).to_index()] * c
                for b, c in hist.counts.items()
            ) / hist.shots

        return estimate

    def _outcomes(
        self, problem: CostProblem, psi: StateVector, histogram: SampleHistogram
    ) -> Tuple[Outcome, ...]:
        probs = psi.probabilities()
        outcomes = []
        for bitstring, count in histogram.most_common():
            b = Bitstring.from_str(bitstring)
            index = b.to_index()
            outcomes.append(
                Outcome(
                    bitstring=bitstring,
                    count=count,
                    probability=float(probs[index]),
                    energy=float(problem.diag[index]),
                    decoded=decode_bitstring(b, problem.seqs),
                )
            )
        return tuple(outcomes)

    def run_qaoa(
        self,
        seqs: SequenceSet,
        p: int,
        penalties: Optional[PenaltyConfig] = None,
        shots: Optional[int] = None,
        cfg: Optional[OptimizerConfig] = None,
        problem: Optional[CostProblem] = None,
        warm_start: Optional[QaoaParams] = None,
        alternatives: Sequence[QaoaParams] = (),
    ) -> QaoaResult:
        """Optimize, then sample the optimal state and decode the outcomes.

        ``warm_start`` (a shallower optimum) is tried both padded with identity
        layers and interpolated to ``p`` layers; ``alternatives`` only
        interpolated.
        """
        cfg = cfg or self.config.optimizer
        shots = self.config.simulation.shots if shots is None else shots
        if shots < 1:
            raise InvalidInputError(f"shots must be >= 1, got {shots}")
        problem = problem or self.prepare(seqs, penalties)
        run_seed = derive_seed(cfg.seed, p)
        self.logger.info(f"Running QAOA with p={p} on {problem.n} qubits (seed {run_seed})")

        shallower = [w for w in (warm_start, *alternatives) if w is not None and w.p < p]
        energy_scale = float(np.std(problem.diag)) or 1.0
        seeded = [("interp", w.interpolated(p)) for w in shallower]
        seeded += [
            ("ramp", QaoaParams.ramp(p, step, energy_scale)) for step in cfg.ramp_steps
        ]

        objective = self._objective(problem, cfg, derive_seed(run_seed, 2))
        outcome = self.optimize(
            objective,
            p,
            cfg,
            warm_starts=[w for w in (warm_start,) if w is not None and w.p <= p],
            seed=derive_seed(run_seed, 0),
            seeded_starts=seeded,
        )
        psi = trial_state(
            problem.n, problem.diag, outcome.params, self.config.simulation.max_qubits
        )
        best_expectation = expectation(psi, problem.diag)
        histogram = sample(psi, shots, derive_seed(run_seed, 1))
        outcomes = self._outcomes(problem, psi, histogram)

        global_index = int(np.argmin(problem.diag))
        result = QaoaResult(
            p=p,
            seed=run_seed,
            best_params=outcome.params,
            best_expectation=best_expectation,
            starts=outcome.starts,
            histogram=histogram,
            probabilities=psi.probabilities(),
            global_min=Bitstring.from_index(global_index, problem.n),
            global_min_energy=float(problem.diag[global_index]),
            top=outcomes[: self.config.simulation.top_k],
            outcomes=outcomes,
            alternatives=outcome.minima[1 : cfg.beam],
        )
        self.logger.info(
            f"p={p}: <H> = {best_expectation:.6f}, most sampled {result.most_probable_sample}, "
            f"P(global min) = {result.global_min_probability:.4f}"
        )
        return result

    def p_sweep(
        self,
        seqs: SequenceSet,
        p_values: Sequence[int],
        penalties: Optional[PenaltyConfig] = None,
        shots: Optional[int] = None,
        cfg: Optional[OptimizerConfig] = None,
    ) -> SweepResult:
        """One run per layer count.

        Each run is warm-started from the deepest shallower run already
        computed: its optimum and its runner-up local minima.
        """
        if not p_values:
            return SweepResult(results=())
        problem = self.prepare(seqs, penalties)
        results: List[QaoaResult] = []
        for p in p_values:
            shallower = [r for r in results if r.p < p]
            previous = max(shallower, key=lambda r: r.p) if shallower else None
            results.append(
                self.run_qaoa(
                    seqs,
                    p,
                    penalties,
                    shots,
                    cfg,
                    problem=problem,
                    warm_start=previous.best_params if previous else None,
                    alternatives=previous.alternatives if previous else (),
                )
            )
        return SweepResult(results=tuple(results))
