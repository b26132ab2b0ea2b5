"""Post-hoc diagnostics for trained models.

Three questions, all answered on finite data: how large are the per-
equation residuals, does the model factor (to a tolerance) through the
quotient by the declared equations, and what is the smallest generator-
closed family of sets containing the datasets?
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datasets import (
    CirclesData,
    DatasetFunctor,
    FiniteSet,
    LatentSampler,
    ProductSource,
    TaskSpec,
    decode_circle_color,
    decode_stripe_color,
    sample_source,
)
from .model import ModelInstance, eval_path, seed_stream
from .schema import Path, Schema, congruence_classes, format_path
from .validation import DataError, ValidationError

__all__ = [
    "ResidualReport",
    "FactorizationResult",
    "RestrictionSets",
    "CirclesMetrics",
    "residual_report",
    "factorization_check",
    "restriction_closure",
    "eval_circles_metrics",
]


@dataclass
class ResidualRow:
    equation: tuple[Path, Path]
    mean: float
    max: float
    count: int


@dataclass
class ResidualReport:
    rows: list[ResidualRow]

    def means(self) -> list[float]:
        return [r.mean for r in self.rows]


def _per_sample_l1(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.abs(a - b).sum(axis=1)


def residual_report(model: ModelInstance, task: TaskSpec, n_eval: int, seed: int) -> ResidualReport:
    """Per-equation L1 residuals (sum over features) on a fixed held-out
    sample stream; rows follow schema equation order. The mean equals the
    training path-equivalence loss on the same batch."""
    if n_eval < 1:
        raise ValidationError("n_eval must be >= 1")
    rng = seed_stream(seed, 3)
    rows = []
    for lhs, rhs in task.schema.equations:
        batch = sample_source(task.dataset.source(lhs.src), n_eval, rng)
        deltas = _per_sample_l1(eval_path(model, lhs, batch), eval_path(model, rhs, batch))
        rows.append(ResidualRow((lhs, rhs), float(deltas.mean()), float(deltas.max()), n_eval))
    return ResidualReport(rows)


@dataclass
class FactorizationResult:
    """Empirical witness that the model respects the bounded congruence on
    the given evaluation sets, to tolerance eps. This is an approximate,
    finite-data check, not a proof about the underlying functions."""

    certificate: bool
    eps: float
    bound: int
    pairs_checked: int
    max_deviation: float
    counterexample: tuple[Path, Path, int, float] | None = None

    def describe(self) -> str:
        if self.certificate:
            return (f"certificate: {self.pairs_checked} equivalent path pairs agree on all "
                    f"evaluation points within eps={self.eps} (max deviation {self.max_deviation:.3g})")
        lhs, rhs, point, dev = self.counterexample
        return (f"counterexample: paths {format_path(lhs)} and {format_path(rhs)} disagree "
                f"at point #{point} by {dev:.3g} (eps={self.eps})")


def factorization_check(model: ModelInstance, schema: Schema,
                        eval_sets: dict[str, np.ndarray], eps: float,
                        bound: int) -> FactorizationResult:
    """Check every pair of bounded-congruence-equivalent paths on every
    provided evaluation point; outputs must agree within eps (max-abs).
    Returns the first counterexample in deterministic order, or a
    certificate with the worst deviation seen."""
    classes = congruence_classes(schema, bound)
    pairs_checked = 0
    max_dev = 0.0
    for group in classes.classes:
        if len(group) < 2:
            continue
        src = group[0].src
        points = eval_sets.get(src)
        if points is None or len(points) == 0:
            continue
        points = np.asarray(points, dtype=np.float64)
        outputs = [eval_path(model, p, points) for p in group]
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                pairs_checked += 1
                dev_per_point = np.abs(outputs[i] - outputs[j]).max(axis=1)
                worst = int(np.argmax(dev_per_point))
                dev = float(dev_per_point[worst])
                if dev > max_dev:
                    max_dev = dev
                if dev > eps:
                    return FactorizationResult(False, eps, bound, pairs_checked, dev,
                                               (group[i], group[j], worst, dev))
    return FactorizationResult(True, eps, bound, pairs_checked, max_dev)


@dataclass
class RestrictionSets:
    """Smallest generator-closed family containing the datasets, computed
    by image closure with exact bitwise deduplication."""

    elements: dict[str, list[np.ndarray]]
    provenance: dict[str, list[str]]
    capped: bool

    def sizes(self) -> dict[str, int]:
        return {obj: len(v) for obj, v in self.elements.items()}


def _materialize(source, obj: str, cap: int) -> np.ndarray:
    if isinstance(source, FiniteSet):
        return source.samples
    if isinstance(source, LatentSampler):
        raise DataError(f"restriction_closure: object {obj!r} has a latent sampler; "
                        "only finite datasets are supported")
    if isinstance(source, ProductSource):
        left = _materialize(source.left, obj, cap)
        right = _materialize(source.right, obj, cap)
        if len(left) * len(right) > cap:
            raise DataError(
                f"restriction_closure: product dataset at {obj!r} has "
                f"{len(left) * len(right)} elements, above the cap of {cap}"
            )
        rows = [np.concatenate([l, r]) for l in left for r in right]
        return np.stack(rows)
    raise DataError(f"unknown source type {type(source).__name__}")


def restriction_closure(model: ModelInstance, task: TaskSpec, cap: int = 1000) -> RestrictionSets:
    """Fixed-point closure: start from the dataset at every object and
    repeatedly push every element through every generator, adding unseen
    images, until stable or the per-object cap is hit (the partial result
    is then flagged non-minimal via `capped`)."""
    schema = task.schema
    elements: dict[str, list[np.ndarray]] = {o: [] for o in schema.objects}
    provenance: dict[str, list[str]] = {o: [] for o in schema.objects}
    seen: dict[str, set[bytes]] = {o: set() for o in schema.objects}

    def add(obj: str, row: np.ndarray, why: str) -> bool:
        key = row.tobytes()
        if key in seen[obj]:
            return False
        if len(elements[obj]) >= cap:
            return None  # cap hit
        seen[obj].add(key)
        elements[obj].append(row)
        provenance[obj].append(why)
        return True

    capped = False
    for obj in schema.objects:
        mat = _materialize(task.dataset.source(obj), obj, cap)
        for row in mat:
            if add(obj, np.asarray(row, dtype=np.float64), "dataset") is None:
                capped = True
                break

    # worklist of (object, element index) pairs not yet pushed forward
    frontier: list[tuple[str, int]] = [(o, i) for o in schema.objects
                                       for i in range(len(elements[o]))]
    while frontier:
        next_frontier: list[tuple[str, int]] = []
        for obj, idx in frontier:
            row = elements[obj][idx]
            for gen in schema.generators:
                if gen.src != obj:
                    continue
                image = eval_path(model, Path(gen.src, gen.dst, (gen.name,)), row)
                added = add(gen.dst, image, f"{gen.name}(#{idx} of {obj})")
                if added is None:
                    capped = True
                elif added:
                    next_frontier.append((gen.dst, len(elements[gen.dst]) - 1))
        frontier = next_frontier
    return RestrictionSets(elements, provenance, capped)


@dataclass
class CirclesMetrics:
    """Color-recovery report for the circles task, one direction per row.

    MAE arrays are per RGB channel, averaged over held-out samples and over
    both color roles (circle and stripe)."""

    decomposition_mae: np.ndarray
    composition_mae: np.ndarray
    decomposition_circle_mae: np.ndarray
    decomposition_stripe_mae: np.ndarray
    composition_circle_mae: np.ndarray
    composition_stripe_mae: np.ndarray
    n_samples: int


def eval_circles_metrics(model: ModelInstance, data: CirclesData,
                         decompose: Path, compose: Path,
                         n_samples: int | None = None) -> CirclesMetrics:
    """Quantitative color check in both directions on ground-truth-paired
    test data.

    Decomposition: feed combined images through `decompose`, decode the
    circle color from the first output half and the stripe color from the
    second, compare against the true colors of each input. Composition:
    feed (circle image, stripe image) pairs through `compose` and decode
    both colors from the generated combined image.
    """
    n = n_samples or len(data.ab)
    n = min(n, len(data.ab), len(data.a), len(data.b))
    side = data.side
    dim = data.img_dim

    ab = data.ab.samples[:n]
    halves = eval_path(model, decompose, ab)
    circle_dec = np.stack([decode_circle_color(h[:dim], side) for h in halves])
    stripe_dec = np.stack([decode_stripe_color(h[dim:], side) for h in halves])
    dec_circle_mae = np.abs(circle_dec - data.ab_circle_colors[:n]).mean(axis=0)
    dec_stripe_mae = np.abs(stripe_dec - data.ab_stripe_colors[:n]).mean(axis=0)

    pairs = np.concatenate([data.a.samples[:n], data.b.samples[:n]], axis=1)
    combined = eval_path(model, compose, pairs)
    circle_com = np.stack([decode_circle_color(c, side) for c in combined])
    stripe_com = np.stack([decode_stripe_color(c, side) for c in combined])
    com_circle_mae = np.abs(circle_com - data.a_colors[:n]).mean(axis=0)
    com_stripe_mae = np.abs(stripe_com - data.b_colors[:n]).mean(axis=0)

    return CirclesMetrics(
        decomposition_mae=(dec_circle_mae + dec_stripe_mae) / 2.0,
        composition_mae=(com_circle_mae + com_stripe_mae) / 2.0,
        decomposition_circle_mae=dec_circle_mae,
        decomposition_stripe_mae=dec_stripe_mae,
        composition_circle_mae=com_circle_mae,
        composition_stripe_mae=com_stripe_mae,
        n_samples=n,
    )
