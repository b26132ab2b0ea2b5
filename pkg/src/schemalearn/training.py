"""Losses, Adam, the critic/generator training loop, and run configuration.

The adversarial objective is the Wasserstein form with weight clipping on
the critics: critics ascend mean D(real) - mean D(fake) and are clipped to
[-clip_bound, clip_bound] after every update; generators descend the total
objective. Gradient penalty needs second-order differentiation and is
deliberately out of scope, so clipping is the Lipschitz enforcement here.

L1 reduction convention everywhere: sum over the feature axis, mean over
the batch.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields as dataclass_fields
from typing import Callable, Mapping

import numpy as np

from .autodiff import Tape
from .datasets import DatasetFunctor, ProductSource, TaskSpec, sample_source, source_dim
from .model import (
    ArchAssignment,
    LayerSpec,
    ModelInstance,
    ParamBundle,
    apply_path_nodes,
    build_param_morphism,
    init_params,
    parse_arch_line,
    seed_stream,
)
from .schema import Path, Schema
from .validation import ConfigError, NumericError, ShapeError, ValidationError

__all__ = [
    "TrainingConfig",
    "DiscriminatorAssignment",
    "AdamState",
    "LossTerms",
    "LossReport",
    "TrainResult",
    "adversarial_loss",
    "path_eq_loss",
    "identity_mapping_loss",
    "l1_mean_loss",
    "build_total_loss",
    "total_loss",
    "adam_step",
    "build_discriminators",
    "train",
    "parse_config",
    "format_config",
    "metrics_columns",
    "format_metrics_row",
    "trainer_state_tensors",
]


@dataclass
class TrainingConfig:
    gamma: float = 1.0
    identity_weight: float = 0.0
    lr: float = 1e-4
    beta1: float = 0.5
    beta2: float = 0.9
    eps_adam: float = 1e-8
    batch: int = 32
    n_critic_warm: int = 50
    warm_steps: int = 50
    n_critic: int = 5
    total_steps: int = 1000
    clip_bound: float = 0.01
    seed: int = 0
    init_std: float = 0.01
    ckpt_interval: int = 0
    patheq_stopgrad: bool = False

    def __post_init__(self) -> None:
        for name in ("batch", "n_critic_warm", "n_critic"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        for name in ("warm_steps", "total_steps", "ckpt_interval"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.gamma < 0 or self.identity_weight < 0:
            raise ConfigError("loss weights must be >= 0")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ConfigError("beta1/beta2 must lie in [0, 1)")
        if self.clip_bound <= 0:
            raise ConfigError("clip_bound must be > 0")


def parse_config(text: str) -> tuple[TrainingConfig, dict[str, LayerSpec], dict[str, LayerSpec]]:
    """Parse a run config: `set <key> <value>` lines for TrainingConfig
    fields, `arch <gen> mlp ...` generator architectures, and
    `disc <object> mlp <widths...> <act>` discriminator architectures."""
    kinds = {f.name: f.type for f in dataclass_fields(TrainingConfig)}
    values: dict = {}
    archs: dict[str, LayerSpec] = {}
    discs: dict[str, LayerSpec] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields_ = line.split(None, 1)
        keyword, rest = fields_[0], (fields_[1] if len(fields_) > 1 else "")
        try:
            if keyword == "set":
                key, _, value = rest.partition(" ")
                key = key.strip()
                value = value.strip()
                if key not in kinds:
                    raise ConfigError(f"unknown config key {key!r}")
                kind = kinds[key]
                if kind in ("int", int):
                    values[key] = int(value)
                elif kind in ("float", float):
                    values[key] = float(value)
                else:
                    values[key] = value.lower() in ("1", "true", "yes", "on")
            elif keyword == "arch":
                name, spec = parse_arch_line(rest)
                archs[name] = spec
            elif keyword == "disc":
                parts = rest.split()
                if len(parts) < 4 or parts[1] != "mlp":
                    raise ConfigError(f"invalid disc line: {raw.strip()!r}")
                widths = tuple(int(w) for w in parts[2:-1])
                if widths[-1] != 1:
                    raise ConfigError(f"discriminator {parts[0]!r} must end in width 1")
                discs[parts[0]] = LayerSpec(widths, parts[-1], "linear")
            else:
                raise ConfigError(f"unknown config directive {keyword!r}")
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"line {lineno}: {exc}") from exc
    return TrainingConfig(**values), archs, discs


def format_config(config: TrainingConfig, archs: Mapping[str, LayerSpec] | None = None,
                  discs: Mapping[str, LayerSpec] | None = None) -> str:
    from .model import format_arch_line

    lines = [f"set {f.name} {getattr(config, f.name)}" for f in dataclass_fields(TrainingConfig)]
    for name, spec in (archs or {}).items():
        lines.append(format_arch_line(name, spec))
    for name, spec in (discs or {}).items():
        widths = " ".join(str(w) for w in spec.widths)
        lines.append(f"disc {name} mlp {widths} {spec.hidden_act}")
    return "\n".join(lines) + "\n"


@dataclass
class DiscriminatorAssignment:
    """Scalar-output critic per object, with its own parameter vector."""

    specs: dict[str, LayerSpec]
    params: dict[str, np.ndarray]
    clip_bound: float

    def copy(self) -> "DiscriminatorAssignment":
        return DiscriminatorAssignment(dict(self.specs), {k: v.copy() for k, v in self.params.items()}, self.clip_bound)


def objects_needing_discriminator(schema: Schema) -> list[str]:
    targets = {g.dst for g in schema.generators}
    return [o for o in schema.objects if o in targets]


def build_discriminators(schema: Schema, arch: ArchAssignment,
                         disc_specs: Mapping[str, LayerSpec], clip_bound: float,
                         seed: int, init_std: float) -> DiscriminatorAssignment:
    """Initialize critics for every object that is the codomain of some
    generator. Weights are clipped into [-clip_bound, clip_bound] from the
    start so the invariant holds before the first update too."""
    needed = objects_needing_discriminator(schema)
    missing = [o for o in needed if o not in disc_specs]
    if missing:
        raise ConfigError(f"missing discriminator spec for object(s) {missing}")
    params: dict[str, np.ndarray] = {}
    specs: dict[str, LayerSpec] = {}
    for i, obj in enumerate(needed):
        spec = disc_specs[obj]
        want = arch.object_dim(obj)
        if spec.widths[0] != want:
            raise ConfigError(
                f"discriminator for {obj!r} has input width {spec.widths[0]}, object dim is {want}"
            )
        if spec.widths[-1] != 1:
            raise ConfigError(f"discriminator for {obj!r} must have output width 1")
        rng = seed_stream(seed, 1, i)
        parts = []
        for a, b in zip(spec.widths, spec.widths[1:]):
            parts.append(rng.standard_normal(a * b) * init_std)
            parts.append(np.zeros(b))
        params[obj] = np.clip(np.concatenate(parts), -clip_bound, clip_bound)
        specs[obj] = spec
    return DiscriminatorAssignment(specs, params, clip_bound)


# --- loss builders ----------------------------------------------------------

def l1_mean_loss(tape: Tape, a: int, b: int) -> int:
    """Sum of absolute differences over features, averaged over the batch."""
    n = tape.value(a).shape[0]
    total = tape.apply("sum_all", tape.apply("abs", tape.apply("sub", a, b)))
    return tape.apply("scalar_mul", total, scalar=1.0 / n)


def adversarial_loss(tape: Tape, gen_morph, gen_params: int, disc_morph,
                     disc_params: int, real: int, src: int) -> int:
    """Wasserstein objective mean D(real) - mean D(G(src)) as a tape node.
    Critics ascend it; generators descend it (only the second term carries
    generator gradients)."""
    fake = gen_morph.apply(tape, gen_params, src)
    d_real = tape.apply("mean_all", disc_morph.apply(tape, disc_params, real))
    d_fake = tape.apply("mean_all", disc_morph.apply(tape, disc_params, fake))
    return tape.apply("sub", d_real, d_fake)


def path_eq_loss(tape: Tape, arch: ArchAssignment, param_nodes: Mapping[str, int],
                 lhs: Path, rhs: Path, batch: int, stopgrad_rhs: bool = False) -> int:
    """Mean L1 distance between both sides of an equation evaluated on a
    batch from their common source object. Identity sides evaluate to the
    input itself."""
    if lhs.src != rhs.src or lhs.dst != rhs.dst:
        raise ShapeError("path_eq_loss: equation sides have mismatched endpoints")
    l_out = apply_path_nodes(tape, arch, lhs, param_nodes, batch)
    r_out = apply_path_nodes(tape, arch, rhs, param_nodes, batch)
    if stopgrad_rhs:
        r_out = tape.leaf(tape.value(r_out), kind="input")
    return l1_mean_loss(tape, l_out, r_out)


def identity_mapping_loss(tape: Tape, arch: ArchAssignment, param_nodes: Mapping[str, int],
                          gen_name: str, batch: int) -> int:
    """Mean L1 between f(b) and b for codomain samples b; requires the
    generator's domain and codomain shapes to be equal."""
    gen = arch.schema.generator_by_name[gen_name]
    if arch.object_dim(gen.src) != arch.object_dim(gen.dst):
        raise ShapeError(
            f"identity_mapping_loss: {gen_name!r} maps dim {arch.object_dim(gen.src)} "
            f"to dim {arch.object_dim(gen.dst)}; shapes must be equal"
        )
    out = apply_path_nodes(tape, arch, Path(gen.src, gen.dst, (gen.name,)), param_nodes, batch)
    return l1_mean_loss(tape, out, batch)


def _identity_term_plan(task: TaskSpec, arch: ArchAssignment) -> list[tuple[str, str, int, int, object]]:
    """Identity-loss terms: (label, gen, slice start, slice stop, source).

    A generator with equal domain/codomain shapes gets the plain CycleGAN
    identity term over its codomain dataset. A generator whose codomain
    dataset is a product of components each matching the domain shape gets
    one componentwise term per component: feed a component sample through
    the generator and ask the matching output slice to reproduce it.
    """
    plan = []
    for gen in task.schema.generators:
        dom = arch.object_dim(gen.src)
        cod = arch.object_dim(gen.dst)
        if dom == cod:
            plan.append((gen.name, gen.name, 0, cod, task.dataset.source(gen.dst)))
            continue
        source = task.dataset.source(gen.dst)
        if isinstance(source, ProductSource):
            comps = [source.left, source.right]
            if all(source_dim(c) == dom for c in comps):
                offset = 0
                for k, comp in enumerate(comps):
                    d = source_dim(comp)
                    plan.append((f"{gen.name}[{k}]", gen.name, offset, offset + d, comp))
                    offset += d
    return plan


@dataclass
class LossTerms:
    """Scalar nodes for one objective assembly, plus the weighted total.

    The total is the left fold sum(adversarial) + gamma * sum(path_eq)
    + identity_weight * sum(identity), with each sum itself a left fold,
    so it can be recomputed exactly from the recorded term values.
    """

    adversarial: list[tuple[str, int]]
    path_eq: list[tuple[int, int]]
    identity: list[tuple[str, int]]
    total: int


@dataclass
class LossReport:
    adversarial: list[tuple[str, float]]
    path_eq: list[tuple[int, float]]
    identity: list[tuple[str, float]]
    gamma: float
    identity_weight: float
    total: float

    def recomputed_total(self) -> float:
        """Re-fold the recorded terms exactly as the tape did."""
        total = 0.0
        for _, v in self.adversarial:
            total = total + v
        if self.path_eq:
            pe = 0.0
            for _, v in self.path_eq:
                pe = pe + v
            total = total + self.gamma * pe
        if self.identity:
            idt = 0.0
            for _, v in self.identity:
                idt = idt + v
            total = total + self.identity_weight * idt
        return total


def _fold_sum(tape: Tape, nodes: list[int]) -> int:
    acc = nodes[0]
    for node in nodes[1:]:
        acc = tape.apply("add", acc, node)
    return acc


def _build_adversarial_terms(tape: Tape, task: TaskSpec, arch: ArchAssignment,
                             gen_nodes: Mapping[str, int], discs: DiscriminatorAssignment,
                             disc_nodes: Mapping[str, int], batch: int,
                             rng: np.random.Generator) -> list[tuple[str, int]]:
    """One Wasserstein term per generator, in declaration order. Identity
    morphisms are not generators, so they never receive a term. Batch order
    per term: real (codomain) first, then source."""
    terms = []
    for gen in task.schema.generators:
        if gen.dst not in discs.specs:
            raise ConfigError(f"no discriminator at object {gen.dst!r} (codomain of {gen.name!r})")
        real = tape.leaf(sample_source(task.dataset.source(gen.dst), batch, rng), kind="input")
        src = tape.leaf(sample_source(task.dataset.source(gen.src), batch, rng), kind="input")
        node = adversarial_loss(
            tape, arch.morphism(gen.name), gen_nodes[gen.name],
            build_param_morphism(discs.specs[gen.dst]), disc_nodes[gen.dst],
            real, src,
        )
        terms.append((gen.name, node))
    return terms


def build_total_loss(tape: Tape, task: TaskSpec, arch: ArchAssignment,
                     gen_nodes: Mapping[str, int], discs: DiscriminatorAssignment,
                     disc_nodes: Mapping[str, int], config: TrainingConfig,
                     rng: np.random.Generator) -> LossTerms:
    """Assemble sum(adversarial) + gamma * sum(path-eq) + identity terms
    on one tape with shared parameter nodes."""
    adv = _build_adversarial_terms(tape, task, arch, gen_nodes, discs, disc_nodes,
                                   config.batch, rng)
    path_terms: list[tuple[int, int]] = []
    for k, (lhs, rhs) in enumerate(task.schema.equations):
        batch = tape.leaf(sample_source(task.dataset.source(lhs.src), config.batch, rng),
                          kind="input")
        path_terms.append((k, path_eq_loss(tape, arch, gen_nodes, lhs, rhs, batch,
                                           stopgrad_rhs=config.patheq_stopgrad)))
    idt_terms: list[tuple[str, int]] = []
    if config.identity_weight > 0:
        for label, gen_name, start, stop, source in _identity_term_plan(task, arch):
            batch_arr = sample_source(source, config.batch, rng)
            batch = tape.leaf(batch_arr, kind="input")
            gen = task.schema.generator_by_name[gen_name]
            out = apply_path_nodes(tape, arch, Path(gen.src, gen.dst, (gen_name,)),
                                   gen_nodes, batch)
            if (start, stop) != (0, arch.object_dim(gen.dst)):
                out = tape.apply("slice_last_axis", out, start=start, stop=stop)
            idt_terms.append((label, l1_mean_loss(tape, out, batch)))

    if adv:
        total = _fold_sum(tape, [n for _, n in adv])
    else:
        total = tape.leaf(np.asarray(0.0), kind="input")
    if path_terms:
        pe_sum = _fold_sum(tape, [n for _, n in path_terms])
        total = tape.apply("add", total, tape.apply("scalar_mul", pe_sum, scalar=config.gamma))
    if idt_terms:
        idt_sum = _fold_sum(tape, [n for _, n in idt_terms])
        total = tape.apply("add", total,
                           tape.apply("scalar_mul", idt_sum, scalar=config.identity_weight))
    return LossTerms(adv, path_terms, idt_terms, total)


def total_loss(model: ModelInstance, discs: DiscriminatorAssignment, task: TaskSpec,
               config: TrainingConfig, rng: np.random.Generator) -> tuple[Tape, LossTerms, LossReport]:
    """Convenience wrapper: leaves for all parameters, one objective tape,
    and the value-level report."""
    tape = Tape()
    gen_nodes = {g.name: tape.leaf(model.params[g.name], kind="param")
                 for g in task.schema.generators}
    disc_nodes = {obj: tape.leaf(p, kind="param") for obj, p in discs.params.items()}
    terms = build_total_loss(tape, task, model.arch, gen_nodes, discs, disc_nodes, config, rng)
    report = LossReport(
        [(name, float(tape.value(n))) for name, n in terms.adversarial],
        [(k, float(tape.value(n))) for k, n in terms.path_eq],
        [(label, float(tape.value(n))) for label, n in terms.identity],
        config.gamma,
        config.identity_weight,
        float(tape.value(terms.total)),
    )
    return tape, terms, report


# --- Adam -------------------------------------------------------------------

@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0

    @classmethod
    def zeros_like(cls, params: Mapping[str, np.ndarray]) -> "AdamState":
        return cls({k: np.zeros_like(p) for k, p in params.items()},
                   {k: np.zeros_like(p) for k, p in params.items()}, 0)


def adam_step(state: AdamState, params: Mapping[str, np.ndarray],
              grads: Mapping[str, np.ndarray], lr: float, beta1: float,
              beta2: float, eps: float) -> dict[str, np.ndarray]:
    """Bias-corrected Adam over a named parameter bundle. The step counter
    increments once per call; missing gradient entries are an error."""
    missing = [k for k in params if k not in grads]
    if missing:
        raise ValidationError(f"adam_step: missing gradient entries {missing}")
    state.t += 1
    t = state.t
    out: dict[str, np.ndarray] = {}
    for key, p in params.items():
        g = grads[key]
        state.m[key] = beta1 * state.m[key] + (1.0 - beta1) * g
        state.v[key] = beta2 * state.v[key] + (1.0 - beta2) * (g * g)
        m_hat = state.m[key] / (1.0 - beta1 ** t)
        v_hat = state.v[key] / (1.0 - beta2 ** t)
        out[key] = p - lr * m_hat / (np.sqrt(v_hat) + eps)
    return out


# --- training loop ----------------------------------------------------------

@dataclass
class TrainResult:
    columns: list[str]
    metrics: list[list[float]]
    checkpoints: list[tuple[int, dict[str, np.ndarray]]]
    gen_params: ParamBundle
    discs: DiscriminatorAssignment
    adam_gen: AdamState
    adam_disc: AdamState
    critic_weight_maxima: list[float]

    def final_model(self, arch: ArchAssignment) -> ModelInstance:
        return ModelInstance(arch.schema, arch, self.gen_params)


def metrics_columns(schema: Schema) -> list[str]:
    cols = ["step", "loss_total"]
    cols += [f"loss_adv_{g.name}" for g in schema.generators]
    cols += [f"loss_patheq_{k}" for k in range(len(schema.equations))]
    cols += ["loss_idt", "wallclock_s"]
    return cols


def format_metrics_row(row: list[float]) -> str:
    cells = [str(int(row[0]))] + [repr(float(v)) for v in row[1:]]
    return ",".join(cells)


def trainer_state_tensors(schema: Schema, gen_params: ParamBundle,
                          discs: DiscriminatorAssignment, adam_gen: AdamState,
                          adam_disc: AdamState, step: int) -> dict[str, np.ndarray]:
    """Deterministically ordered named-tensor view of the trainer state,
    ready for checkpointing."""
    tensors: dict[str, np.ndarray] = {"meta/step": np.asarray(float(step))}
    for gen in schema.generators:
        tensors[f"gen/{gen.name}"] = gen_params[gen.name]
    for obj in schema.objects:
        if obj in discs.params:
            tensors[f"disc/{obj}"] = discs.params[obj]
    for gen in schema.generators:
        tensors[f"adam/gen/{gen.name}/m"] = adam_gen.m[gen.name]
        tensors[f"adam/gen/{gen.name}/v"] = adam_gen.v[gen.name]
    for obj in schema.objects:
        if obj in discs.params:
            tensors[f"adam/disc/{obj}/m"] = adam_disc.m[obj]
            tensors[f"adam/disc/{obj}/v"] = adam_disc.v[obj]
    tensors["meta/adam_gen_t"] = np.asarray(float(adam_gen.t))
    tensors["meta/adam_disc_t"] = np.asarray(float(adam_disc.t))
    return tensors


def _snapshot(schema, gen_params, discs, adam_gen, adam_disc, step):
    return step, {k: v.copy() for k, v in
                  trainer_state_tensors(schema, gen_params, discs, adam_gen, adam_disc, step).items()}


def train(task: TaskSpec, arch: ArchAssignment, discs: DiscriminatorAssignment,
          config: TrainingConfig, *, init_gen: ParamBundle | None = None,
          on_step: Callable[[int, LossReport], None] | None = None) -> TrainResult:
    """Alternating Wasserstein training.

    Per generator step t: n_critic(t) critic updates (ascend the
    adversarial sum, then clip critic weights), followed by one generator
    update (descend the total objective). n_critic(t) is n_critic_warm
    while t < warm_steps, else n_critic. Fully deterministic for a given
    config: initialization and batch sampling draw from named substreams
    of config.seed.
    """
    discs = discs.copy()
    gen_params = (init_gen or init_params(arch, config.seed, config.init_std)).copy()
    adam_gen = AdamState.zeros_like(gen_params.tensors)
    adam_disc = AdamState.zeros_like(discs.params)
    rng = seed_stream(config.seed, 2)

    columns = metrics_columns(task.schema)
    metrics: list[list[float]] = []
    checkpoints = [_snapshot(task.schema, gen_params, discs, adam_gen, adam_disc, 0)]
    maxima: list[float] = []
    gen_names = [g.name for g in task.schema.generators]
    disc_objs = list(discs.params)

    for t in range(config.total_steps):
        n_c = config.n_critic_warm if t < config.warm_steps else config.n_critic
        for _ in range(n_c):
            tape = Tape()
            gen_nodes = {name: tape.leaf(gen_params[name], kind="param") for name in gen_names}
            disc_nodes = {obj: tape.leaf(discs.params[obj], kind="param") for obj in disc_objs}
            terms = _build_adversarial_terms(tape, task, arch, gen_nodes, discs, disc_nodes,
                                             config.batch, rng)
            adv_sum = _fold_sum(tape, [n for _, n in terms])
            if not np.isfinite(tape.value(adv_sum)):
                raise NumericError(f"non-finite critic loss at generator step {t}")
            neg = tape.apply("scalar_mul", adv_sum, scalar=-1.0)
            grads = tape.backward(neg, wrt=disc_nodes.values())
            disc_grads = {obj: grads[disc_nodes[obj]] for obj in disc_objs}
            discs.params = adam_step(adam_disc, discs.params, disc_grads,
                                     config.lr, config.beta1, config.beta2, config.eps_adam)
            for obj in disc_objs:
                np.clip(discs.params[obj], -config.clip_bound, config.clip_bound,
                        out=discs.params[obj])
            maxima.append(max(float(np.abs(p).max()) if p.size else 0.0
                              for p in discs.params.values()))

        tape = Tape()
        gen_nodes = {name: tape.leaf(gen_params[name], kind="param") for name in gen_names}
        disc_nodes = {obj: tape.leaf(discs.params[obj], kind="param") for obj in disc_objs}
        terms = build_total_loss(tape, task, arch, gen_nodes, discs, disc_nodes, config, rng)
        report = LossReport(
            [(name, float(tape.value(n))) for name, n in terms.adversarial],
            [(k, float(tape.value(n))) for k, n in terms.path_eq],
            [(label, float(tape.value(n))) for label, n in terms.identity],
            config.gamma, config.identity_weight, float(tape.value(terms.total)),
        )
        if not np.isfinite(report.total):
            raise NumericError(f"non-finite total loss at generator step {t}: {report}")
        grads = tape.backward(terms.total, wrt=gen_nodes.values())
        gen_grads = {name: grads[gen_nodes[name]] for name in gen_names}
        gen_params = ParamBundle(adam_step(adam_gen, gen_params.tensors, gen_grads,
                                           config.lr, config.beta1, config.beta2,
                                           config.eps_adam))

        step = t + 1
        row = [float(step), report.total]
        row += [v for _, v in report.adversarial]
        row += [v for _, v in report.path_eq]
        row.append(sum(v for _, v in report.identity) if report.identity else 0.0)
        # wallclock is pinned to 0.0: the metrics stream is part of the
        # determinism contract and must be byte-identical across reruns.
        row.append(0.0)
        metrics.append(row)
        if on_step is not None:
            on_step(step, report)
        if config.ckpt_interval and step % config.ckpt_interval == 0 and step != config.total_steps:
            checkpoints.append(_snapshot(task.schema, gen_params, discs, adam_gen, adam_disc, step))

    if config.total_steps:
        checkpoints.append(_snapshot(task.schema, gen_params, discs, adam_gen, adam_disc,
                                     config.total_steps))
    return TrainResult(columns, metrics, checkpoints, gen_params, discs,
                       adam_gen, adam_disc, maxima)
