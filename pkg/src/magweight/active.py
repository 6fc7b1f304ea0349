"""Pool-based active learning with weighting-vector queries.

The query strategy partitions the pool by the current model's predictions,
computes the weighting vector of each predicted class, and asks the oracle
for the unlabeled point of minimum |weight| (an interior point, to confirm
high-confidence structure) and of maximum |weight| (a boundary point, to
explore where the decision surface is uncertain) in each class.  The
learner is a kernel ridge / LS-SVM model with a Laplacian kernel; the same
kernel bandwidth doubles as the scale of the weighting metric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .classify import LabeledDataset
from .core import PointCloud, weighting
from .errors import DegenerateInput, IllConditioned, InvalidInput
from .reports import ExperimentReport

STRATEGIES = ("weighting", "uncertainty", "random")
DEFAULT_GAMMA = 0.1
DEFAULT_LAMBDA = 1e-3
DEFAULT_BATCH = 4


def laplacian_kernel(a, b, gamma: float = DEFAULT_GAMMA) -> np.ndarray:
    """k(x, y) = exp(-gamma * ||x - y||_1)."""
    return np.exp(-gamma * cdist(np.atleast_2d(a), np.atleast_2d(b), metric="cityblock"))


@dataclass(frozen=True)
class KernelRidgeModel:
    """LS-SVM decision model: f(x) = K(x, support) @ coef + bias per class."""

    support: np.ndarray
    coef: np.ndarray  # (m,) binary, (m, k) one-vs-rest
    bias: np.ndarray  # (1,) binary, (k,) one-vs-rest
    gamma: float
    lam: float
    classes: np.ndarray

    def decision(self, points) -> np.ndarray:
        k = laplacian_kernel(points, self.support, self.gamma)
        return k @ self.coef + self.bias

    def predict(self, points) -> np.ndarray:
        f = self.decision(points)
        if self.classes.size == 2:
            return self.classes[(f.reshape(-1) >= 0).astype(int)]
        return self.classes[np.argmax(f, axis=1)]


def _solve_ls_svm(kernel: np.ndarray, y: np.ndarray, lam: float):
    m = kernel.shape[0]
    system = np.zeros((m + 1, m + 1))
    system[0, 1:] = 1.0
    system[1:, 0] = 1.0
    system[1:, 1:] = kernel + lam * np.eye(m)
    rhs = np.concatenate([[0.0], y])
    try:
        sol = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as err:
        raise IllConditioned(f"LS-SVM system singular: {err}") from err
    return sol[1:], sol[0]


def train_classifier(
    points,
    labels,
    gamma: float = DEFAULT_GAMMA,
    lam: float = DEFAULT_LAMBDA,
) -> KernelRidgeModel:
    """Fit the LS-SVM over a labeled set; binary or one-vs-rest multi-class.

    Solves the saddle system of kernel ridge regression with a bias term;
    deterministic for fixed inputs.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    labels = np.asarray(labels)
    if pts.shape[0] != labels.shape[0]:
        raise InvalidInput("points and labels disagree in length")
    if lam < 0:
        raise InvalidInput(f"ridge parameter must be nonnegative, got {lam}")
    classes = np.unique(labels)
    if classes.size < 2:
        raise InvalidInput("need at least one example of two classes")
    kernel = laplacian_kernel(pts, pts, gamma)
    if classes.size == 2:
        y = np.where(labels == classes[1], 1.0, -1.0)
        coef, bias = _solve_ls_svm(kernel, y, lam)
        return KernelRidgeModel(pts, coef, np.array([bias]), gamma, lam, classes)
    coefs, biases = [], []
    for c in classes:
        y = np.where(labels == c, 1.0, -1.0)
        coef, bias = _solve_ls_svm(kernel, y, lam)
        coefs.append(coef)
        biases.append(bias)
    return KernelRidgeModel(
        pts, np.column_stack(coefs), np.asarray(biases), gamma, lam, classes
    )


class BatchMismatch(InvalidInput):
    """Submitted labels do not exactly cover the current query batch."""


class ALSession:
    """Mutable state of one pool-based active-learning run.

    Single-writer: one label batch is applied at a time.  The labeled and
    unlabeled sets always partition the pool, and each applied batch grows
    the labeled set by exactly the number of distinct queried points.
    """

    def __init__(
        self,
        pool_points,
        classes,
        test_points,
        test_labels,
        strategy: str = "weighting",
        gamma: float = DEFAULT_GAMMA,
        lam: float = DEFAULT_LAMBDA,
        budget: int = 40,
        batch_size: int = DEFAULT_BATCH,
        seed: int = 0,
    ):
        if strategy not in STRATEGIES:
            raise InvalidInput(f"strategy must be one of {STRATEGIES}, got {strategy!r}")
        if budget < 0:
            raise InvalidInput("budget must be nonnegative")
        if batch_size < 1:
            raise InvalidInput("batch_size must be positive")
        self.pool_points = np.atleast_2d(np.asarray(pool_points, dtype=np.float64))
        self.classes = np.asarray(classes)
        self.test_points = np.atleast_2d(np.asarray(test_points, dtype=np.float64))
        self.test_labels = np.asarray(test_labels)
        self.strategy = strategy
        self.gamma = float(gamma)
        self.lam = float(lam)
        self.budget = int(budget)
        self.batch_size = int(batch_size)
        self.seed = int(seed)
        self.rng = np.random.default_rng(seed)

        m = self.pool_points.shape[0]
        self.labeled_mask = np.zeros(m, dtype=bool)
        self.pool_labels = np.full(m, -1, dtype=np.intp)  # revealed labels only
        self.queries: tuple = ()
        self.iteration = 0
        self.budget_used = 0
        self.history: list = []
        self.queried_history: list = []
        self.model: KernelRidgeModel | None = None
        self.log: list = []
        self.paused = False

    # -- bookkeeping -----------------------------------------------------

    @property
    def labeled_indices(self) -> np.ndarray:
        return np.flatnonzero(self.labeled_mask)

    @property
    def unlabeled_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.labeled_mask)

    @property
    def done(self) -> bool:
        return self.model is not None and len(self.queries) == 0

    def seed_labels(self, pairs):
        """Reveal the initial labeled set, train, evaluate, and pick queries."""
        if self.model is not None:
            raise InvalidInput("session already seeded")
        for idx, label in pairs:
            self.labeled_mask[idx] = True
            self.pool_labels[idx] = label
        self._retrain()
        self.history.append(self._evaluate())
        self.queries = tuple(self._next_queries())

    def apply_labels(self, pairs):
        """Apply one complete batch of oracle labels and advance the loop."""
        pairs = [(int(i), int(l)) for i, l in pairs]
        submitted = {i for i, _ in pairs}
        if len(submitted) != len(pairs):
            raise BatchMismatch("duplicate index in submitted labels")
        expected = set(self.queries)
        if submitted - expected:
            raise BatchMismatch(
                f"indices {sorted(submitted - expected)} are not in the current batch"
            )
        if expected - submitted:
            raise BatchMismatch(
                f"batch incomplete: missing indices {sorted(expected - submitted)}"
            )
        if not pairs:
            raise BatchMismatch("no queries pending")
        known = set(self.classes.tolist())
        for _, label in pairs:
            if label not in known:
                raise InvalidInput(f"label {label} not among session classes {sorted(known)}")
        for idx, label in pairs:
            self.labeled_mask[idx] = True
            self.pool_labels[idx] = label
        self.budget_used += len(pairs)
        self.iteration += 1
        self.queried_history.append([i for i, _ in pairs])
        self._retrain()
        self.history.append(self._evaluate())
        self.queries = tuple(self._next_queries())

    def _retrain(self):
        idx = self.labeled_indices  # sorted: training is order-canonical
        self.model = train_classifier(
            self.pool_points[idx], self.pool_labels[idx], self.gamma, self.lam
        )

    def _evaluate(self) -> float:
        predicted = self.model.predict(self.test_points)
        return float(np.mean(predicted == self.test_labels))

    # -- query strategies -------------------------------------------------

    def _next_queries(self) -> list:
        room = min(self.batch_size, self.budget - self.budget_used)
        unlabeled = self.unlabeled_indices
        if room <= 0 or unlabeled.size == 0:
            return []
        if self.strategy == "weighting":
            picked = weighting_query(self, batch=room)
        elif self.strategy == "uncertainty":
            picked = uncertainty_query(self, batch=room)
        else:
            picked = random_query(self, batch=room)
        if not picked:
            # liveness fallback: a degenerate round must not stall the session
            picked = unlabeled[:room].tolist()
            self.log.append(f"iteration {self.iteration}: fallback to index order")
        return picked[:room]

    # -- checkpointing ----------------------------------------------------

    def to_checkpoint(self) -> dict:
        return {
            "format": "magweight-al-checkpoint",
            "version": 1,
            "config": {
                "strategy": self.strategy,
                "gamma": self.gamma,
                "lam": self.lam,
                "budget": self.budget,
                "batch_size": self.batch_size,
                "seed": self.seed,
            },
            "classes": self.classes.tolist(),
            "pool_points": self.pool_points.tolist(),
            "test_points": self.test_points.tolist(),
            "test_labels": self.test_labels.tolist(),
            "labeled": {str(i): int(self.pool_labels[i]) for i in self.labeled_indices},
            "queries": list(self.queries),
            "iteration": self.iteration,
            "budget_used": self.budget_used,
            "history": self.history,
            "queried_history": self.queried_history,
            "paused": self.paused,
            "rng_state": _encode_rng_state(self.rng),
        }

    @classmethod
    def from_checkpoint(cls, doc: dict) -> "ALSession":
        if doc.get("format") != "magweight-al-checkpoint":
            raise InvalidInput("not an active-learning checkpoint")
        cfg = doc["config"]
        session = cls(
            np.asarray(doc["pool_points"]),
            np.asarray(doc["classes"]),
            np.asarray(doc["test_points"]),
            np.asarray(doc["test_labels"]),
            strategy=cfg["strategy"],
            gamma=cfg["gamma"],
            lam=cfg["lam"],
            budget=cfg["budget"],
            batch_size=cfg["batch_size"],
            seed=cfg["seed"],
        )
        for key, label in doc["labeled"].items():
            session.labeled_mask[int(key)] = True
            session.pool_labels[int(key)] = label
        session.iteration = doc["iteration"]
        session.budget_used = doc["budget_used"]
        session.history = list(doc["history"])
        session.queried_history = [list(q) for q in doc["queried_history"]]
        session.paused = doc.get("paused", False)
        session.rng = _decode_rng_state(doc["rng_state"])
        if session.labeled_mask.any():
            session._retrain()
        session.queries = tuple(doc["queries"])
        return session


def _encode_rng_state(rng) -> dict:
    state = rng.bit_generator.state
    return {
        "bit_generator": state["bit_generator"],
        "state": str(state["state"]["state"]),
        "inc": str(state["state"]["inc"]),
        "has_uint32": state["has_uint32"],
        "uinteger": state["uinteger"],
    }


def _decode_rng_state(doc: dict):
    rng = np.random.default_rng(0)
    rng.bit_generator.state = {
        "bit_generator": doc["bit_generator"],
        "state": {"state": int(doc["state"]), "inc": int(doc["inc"])},
        "has_uint32": doc["has_uint32"],
        "uinteger": doc["uinteger"],
    }
    return rng


def _argext(indices, values, take_max: bool) -> int:
    order = np.lexsort((indices, -values if take_max else values))
    return int(indices[order[0]])


def weighting_query(session: ALSession, batch: int = DEFAULT_BATCH) -> list:
    """Min-|w| and max-|w| unlabeled points of every predicted class.

    All pool points participate in the class partitions; only unlabeled
    members are eligible as queries.  A class that is empty, fully labeled,
    or whose weighting is ill-conditioned contributes nothing this round.
    Candidate order is mins before maxes, classes in id order, deduplicated
    and capped at the batch size.
    """
    model = session.model
    predicted = model.predict(session.pool_points)
    mins, maxes = [], []
    for c in model.classes:
        members = np.flatnonzero(predicted == c)
        if members.size == 0:
            continue
        eligible = members[~session.labeled_mask[members]]
        if eligible.size == 0:
            continue
        unique_pts, inverse = np.unique(
            session.pool_points[members], axis=0, return_inverse=True
        )
        inverse = inverse.reshape(-1)
        try:
            w = weighting(PointCloud(unique_pts, metric="L1", scale=session.gamma)).weights
        except (IllConditioned, DegenerateInput) as err:
            session.log.append(f"iteration {session.iteration}: class {c} skipped: {err}")
            continue
        magnitudes = np.abs(w[inverse])  # |w| per member, duplicates share weight
        eligible_vals = magnitudes[~session.labeled_mask[members]]
        mins.append(_argext(eligible, eligible_vals, take_max=False))
        maxes.append(_argext(eligible, eligible_vals, take_max=True))
    picked = []
    for idx in mins + maxes:
        if idx not in picked:
            picked.append(idx)
    return picked[:batch]


def uncertainty_query(session: ALSession, batch: int = DEFAULT_BATCH) -> list:
    """The unlabeled points the model is least certain about.

    Binary: smallest |f|.  One-vs-rest: smallest gap between the two top
    decision values.  Ties break to the lowest pool index.
    """
    unlabeled = session.unlabeled_indices
    f = session.model.decision(session.pool_points[unlabeled])
    if session.model.classes.size == 2:
        uncertainty = np.abs(f.reshape(-1))
    else:
        top = np.sort(f, axis=1)
        uncertainty = top[:, -1] - top[:, -2]
    order = np.lexsort((unlabeled, uncertainty))
    return unlabeled[order[:batch]].tolist()


def random_query(session: ALSession, batch: int = DEFAULT_BATCH) -> list:
    """Uniform seeded draw from the unlabeled pool; feature-blind."""
    unlabeled = session.unlabeled_indices
    take = min(batch, unlabeled.size)
    return session.rng.choice(unlabeled, size=take, replace=False).tolist()


class AutomatedOracle:
    """Label source backed by the pool's ground truth."""

    def __init__(self, labels):
        self.labels = np.asarray(labels)

    def __call__(self, indices) -> list:
        return [int(self.labels[i]) for i in indices]


def stratified_seed(labels, rng) -> list:
    """One random pool index per class, as (index, label) pairs."""
    labels = np.asarray(labels)
    pairs = []
    for c in np.unique(labels):
        idx = int(rng.choice(np.flatnonzero(labels == c)))
        pairs.append((idx, int(c)))
    return pairs


def run_session(
    pool: LabeledDataset,
    test: LabeledDataset,
    strategy: str = "weighting",
    oracle=None,
    budget: int = 40,
    seed: int = 0,
    gamma: float = DEFAULT_GAMMA,
    lam: float = DEFAULT_LAMBDA,
    batch_size: int = DEFAULT_BATCH,
) -> ExperimentReport:
    """Drive one automated active-learning session to completion.

    Seeds the labeled set with one stratified random point per class, then
    iterates query -> oracle -> retrain -> evaluate until the budget is
    spent or the pool is exhausted.  Deterministic given the seed.
    """
    if oracle is None:
        oracle = AutomatedOracle(pool.labels)
    rng = np.random.default_rng(seed)
    classes = np.arange(pool.n_classes)
    session = ALSession(
        pool.cloud.points,
        classes,
        test.cloud.points,
        test.labels,
        strategy=strategy,
        gamma=gamma,
        lam=lam,
        budget=budget,
        batch_size=batch_size,
        seed=seed,
    )
    session.rng = rng  # one generator drives both seeding and queries
    seed_pairs = stratified_seed(pool.labels, rng)
    revealed = oracle([i for i, _ in seed_pairs])
    session.seed_labels(list(zip((i for i, _ in seed_pairs), revealed)))
    while not session.done:
        labels = oracle(session.queries)
        session.apply_labels(list(zip(session.queries, labels)))

    runs = [
        {
            "iteration": 0,
            "n_labeled": len(seed_pairs),
            "queried": [i for i, _ in seed_pairs],
            "accuracy": session.history[0],
        }
    ]
    n_labeled = len(seed_pairs)
    for i, queried in enumerate(session.queried_history, start=1):
        n_labeled += len(queried)
        runs.append(
            {
                "iteration": i,
                "n_labeled": n_labeled,
                "queried": queried,
                "accuracy": session.history[i],
            }
        )
    report = ExperimentReport(
        experiment="active-learning",
        dataset="pool",
        config={
            "strategy": strategy,
            "gamma": gamma,
            "lam": lam,
            "budget": budget,
            "batch_size": batch_size,
            "seed": seed,
            "pool_size": len(pool),
            "test_size": len(test),
            "initial_per_class": 1,
        },
        runs=runs,
    )
    report.aggregates = {
        "final_accuracy": session.history[-1],
        "history": list(session.history),
        "log": list(session.log),
    }
    return report
