"""Parametrized morphisms, architecture assignments, and model instances.

A ParamMorphism is a differentiable map with an explicit parameter-space
shape; composition concatenates parameter vectors (f's parameters first),
which is strictly associative. An ArchAssignment gives every schema object
a tensor shape and every generator an MLP; binding a concrete parameter
bundle yields a ModelInstance that can evaluate arbitrary schema paths.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .autodiff import Tape
from .schema import Path, Schema
from .validation import ConfigError, ShapeError, ValidationError, as_f64, check_batch_matrix

__all__ = [
    "ACTIVATIONS",
    "LayerSpec",
    "ParamMorphism",
    "ArchAssignment",
    "ParamBundle",
    "ModelInstance",
    "build_param_morphism",
    "para_compose",
    "para_identity",
    "arch_image_of_path",
    "total_param_space",
    "init_params",
    "instantiate",
    "eval_path",
    "apply_path_nodes",
    "parse_arch_line",
    "format_arch_line",
    "seed_stream",
]

# "linear" means no activation; the rest are autodiff primitives.
ACTIVATIONS = ("linear", "relu", "leaky_relu", "tanh", "sigmoid", "abs")


def flat_dim(shape) -> int:
    return int(np.prod(shape, dtype=np.int64)) if len(shape) else 1


def seed_stream(seed: int, *key: int) -> np.random.Generator:
    """Deterministic named substream: PCG64 over SeedSequence(seed, spawn_key)."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class LayerSpec:
    """Fully-connected network: alternating affine layers and activations.

    widths[0] and widths[-1] are the flattened input/output dimensions;
    hidden_act is applied after every affine layer except the last, which
    gets out_act.
    """

    widths: tuple[int, ...]
    hidden_act: str = "relu"
    out_act: str = "linear"
    kind: str = "mlp"

    def __post_init__(self) -> None:
        if self.kind != "mlp":
            raise ConfigError(f"unsupported architecture kind {self.kind!r}")
        if len(self.widths) < 2:
            raise ConfigError("LayerSpec needs at least two widths")
        if any(w < 1 for w in self.widths):
            raise ConfigError(f"widths must be positive, got {self.widths}")
        for act in (self.hidden_act, self.out_act):
            if act not in ACTIVATIONS:
                raise ConfigError(f"unknown activation {act!r}")

    @property
    def param_count(self) -> int:
        return sum(a * b + b for a, b in zip(self.widths, self.widths[1:]))


@dataclass(frozen=True)
class ParamMorphism:
    """A differentiable map with an explicit flat parameter vector.

    apply(tape, params_ref, input_ref) -> output_ref builds the forward
    pass out of autodiff primitives only. Inputs are 2-D batches
    [n, dom]; params are rank-1.
    """

    dom_shape: tuple[int, ...]
    cod_shape: tuple[int, ...]
    param_shape: tuple[int, ...]
    apply: Callable[[Tape, int, int], int]

    @property
    def param_count(self) -> int:
        return flat_dim(self.param_shape) if self.param_shape != (0,) else 0


def para_identity(shape) -> ParamMorphism:
    """Zero-parameter exact pass-through."""
    shape = tuple(shape)
    return ParamMorphism(shape, shape, (0,), lambda tape, p, x: x)


def _activate(tape: Tape, act: str, ref: int) -> int:
    if act == "linear":
        return ref
    if act == "leaky_relu":
        return tape.apply("leaky_relu", ref, alpha=0.2)
    return tape.apply(act, ref)


def build_param_morphism(spec: LayerSpec) -> ParamMorphism:
    """MLP morphism with weights and biases packed into one flat vector,
    layer by layer in declaration order (W then b per layer)."""
    widths = spec.widths
    n_params = spec.param_count

    def apply(tape: Tape, params: int, x: int) -> int:
        batch = tape.value(x).shape[0]
        ones = tape.leaf(np.ones((batch, 1)), kind="input")
        h = x
        offset = 0
        last = len(widths) - 2
        for i, (a, b) in enumerate(zip(widths, widths[1:])):
            w_flat = tape.apply("slice_last_axis", params, start=offset, stop=offset + a * b)
            w = tape.apply("reshape", w_flat, shape=(a, b))
            offset += a * b
            b_flat = tape.apply("slice_last_axis", params, start=offset, stop=offset + b)
            bias = tape.apply("reshape", b_flat, shape=(1, b))
            offset += b
            h = tape.apply("add", tape.apply("matmul", h, w), tape.apply("matmul", ones, bias))
            h = _activate(tape, spec.hidden_act if i < last else spec.out_act, h)
        return h

    return ParamMorphism((widths[0],), (widths[-1],), (n_params,), apply)


def para_compose(f: ParamMorphism, g: ParamMorphism) -> ParamMorphism:
    """Sequential composition; the composite's parameter vector is f's
    parameters followed by g's."""
    if f.cod_shape != g.dom_shape:
        raise ShapeError(
            f"para_compose: codomain {f.cod_shape} does not match domain {g.dom_shape}"
        )
    nf, ng = f.param_count, g.param_count

    def apply(tape: Tape, params: int, x: int) -> int:
        pf = tape.apply("slice_last_axis", params, start=0, stop=nf)
        pg = tape.apply("slice_last_axis", params, start=nf, stop=nf + ng)
        return g.apply(tape, pg, f.apply(tape, pf, x))

    return ParamMorphism(f.dom_shape, g.cod_shape, (nf + ng,), apply)


@dataclass(frozen=True)
class ArchAssignment:
    """Shape for every object, an MLP spec for every generator."""

    schema: Schema
    object_shapes: Mapping[str, tuple[int, ...]]
    generator_archs: Mapping[str, LayerSpec]

    def __post_init__(self) -> None:
        objects = set(self.schema.objects)
        if set(self.object_shapes) != objects:
            missing = objects - set(self.object_shapes)
            extra = set(self.object_shapes) - objects
            raise ConfigError(f"object shapes mismatch (missing {sorted(missing)}, extra {sorted(extra)})")
        gen_names = {g.name for g in self.schema.generators}
        if set(self.generator_archs) != gen_names:
            missing = gen_names - set(self.generator_archs)
            extra = set(self.generator_archs) - gen_names
            raise ConfigError(f"generator archs mismatch (missing {sorted(missing)}, extra {sorted(extra)})")
        for gen in self.schema.generators:
            spec = self.generator_archs[gen.name]
            want_in = flat_dim(self.object_shapes[gen.src])
            want_out = flat_dim(self.object_shapes[gen.dst])
            if spec.widths[0] != want_in or spec.widths[-1] != want_out:
                raise ConfigError(
                    f"generator {gen.name!r}: widths {spec.widths[0]}->{spec.widths[-1]} "
                    f"do not match object shapes {want_in}->{want_out}"
                )

    def object_dim(self, obj: str) -> int:
        return flat_dim(self.object_shapes[obj])

    def morphism(self, gen_name: str) -> ParamMorphism:
        spec = self.generator_archs.get(gen_name)
        if spec is None:
            raise ValidationError(f"unknown generator {gen_name!r}")
        return build_param_morphism(spec)


def arch_image_of_path(arch: ArchAssignment, path: Path) -> ParamMorphism:
    """Image of a path under the architecture: identity paths map to the
    exact pass-through; composites chain the per-generator morphisms. A
    generator appearing twice contributes its parameter slots twice."""
    arch.schema.validate_path(path)
    if path.is_identity():
        return para_identity(arch.object_shapes[path.src])
    morph = arch.morphism(path.edges[0])
    for name in path.edges[1:]:
        morph = para_compose(morph, arch.morphism(name))
    return morph


def total_param_space(arch: ArchAssignment) -> list[tuple[str, int]]:
    """Per-generator parameter counts in declaration order; the model's
    total parameter dimension is the sum."""
    return [(g.name, arch.generator_archs[g.name].param_count) for g in arch.schema.generators]


@dataclass
class ParamBundle:
    """One parameter tensor per generator, keyed by generator name."""

    tensors: dict[str, np.ndarray]

    @property
    def total_len(self) -> int:
        return sum(t.size for t in self.tensors.values())

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def copy(self) -> "ParamBundle":
        return ParamBundle({k: v.copy() for k, v in self.tensors.items()})


def init_params(arch: ArchAssignment, seed: int, stddev: float) -> ParamBundle:
    """Gaussian weight init, zero biases, packed exactly like
    build_param_morphism expects.

    Deterministic: generator i draws from PCG64 seeded with
    SeedSequence(seed, spawn_key=(0, i)); weights are standard normals
    scaled by stddev, drawn layer by layer.
    """
    if stddev < 0:
        raise ValidationError("stddev must be >= 0")
    tensors: dict[str, np.ndarray] = {}
    for i, gen in enumerate(arch.schema.generators):
        spec = arch.generator_archs[gen.name]
        rng = seed_stream(seed, 0, i)
        parts = []
        for a, b in zip(spec.widths, spec.widths[1:]):
            parts.append(rng.standard_normal(a * b) * stddev)
            parts.append(np.zeros(b))
        tensors[gen.name] = np.concatenate(parts) if parts else np.zeros(0)
    return ParamBundle(tensors)


@dataclass(frozen=True)
class ModelInstance:
    """An architecture with one concrete parameter bundle bound to it."""

    schema: Schema
    arch: ArchAssignment
    params: ParamBundle

    def __post_init__(self) -> None:
        gen_names = [g.name for g in self.schema.generators]
        if set(self.params.tensors) != set(gen_names):
            raise ShapeError(
                f"parameter bundle keys {sorted(self.params.tensors)} do not match "
                f"generators {sorted(gen_names)}"
            )
        for name in gen_names:
            want = self.arch.generator_archs[name].param_count
            got = self.params[name].size
            if got != want:
                raise ShapeError(f"generator {name!r}: expected {want} parameters, got {got}")

    @property
    def object_shapes(self) -> dict[str, tuple[int, ...]]:
        # independent of the parameter bundle by construction
        return dict(self.arch.object_shapes)


def instantiate(arch: ArchAssignment, params: ParamBundle) -> ModelInstance:
    return ModelInstance(arch.schema, arch, params)


def apply_path_nodes(tape: Tape, arch: ArchAssignment, path: Path,
                     param_nodes: Mapping[str, int], x: int) -> int:
    """Evaluate a path on an existing tape. Each generator reads its single
    shared parameter node, so repeated edges reuse the same values and
    gradients accumulate across occurrences."""
    ref = x
    for name in path.edges:
        ref = arch.morphism(name).apply(tape, param_nodes[name], ref)
    return ref


def eval_path(model: ModelInstance, path: Path, x) -> np.ndarray:
    """Functorial evaluation of a path on a sample or a batch.

    Rank-1 input of the source object's flattened dimension is treated as a
    single sample and returned rank-1; rank-2 input is a batch. Identity
    paths return the input values unchanged.
    """
    model.schema.validate_path(path)
    dim = model.arch.object_dim(path.src)
    arr = as_f64(x, "input")
    single = arr.ndim == 1
    batch = check_batch_matrix(arr, dim, "input")
    if path.is_identity():
        out = batch.copy()
    else:
        tape = Tape()
        param_nodes = {
            name: tape.leaf(model.params[name], kind="param")
            for name in dict.fromkeys(path.edges)
        }
        ref = apply_path_nodes(tape, model.arch, path, param_nodes, tape.leaf(batch, kind="input"))
        out = tape.value(ref)
    return out[0] if single else out


def parse_arch_line(rest: str) -> tuple[str, LayerSpec]:
    """Parse the payload of an `arch` config line:
    `<gen> mlp <w0> ... <wk> <hidden-act> <out-act>`."""
    fields = rest.split()
    if len(fields) < 6 or fields[1] != "mlp":
        raise ConfigError(f"invalid arch line: {rest!r}")
    name = fields[0]
    hidden_act, out_act = fields[-2], fields[-1]
    try:
        widths = tuple(int(w) for w in fields[2:-2])
    except ValueError as exc:
        raise ConfigError(f"invalid widths in arch line: {rest!r}") from exc
    return name, LayerSpec(widths, hidden_act, out_act)


def format_arch_line(name: str, spec: LayerSpec) -> str:
    widths = " ".join(str(w) for w in spec.widths)
    return f"arch {name} mlp {widths} {spec.hidden_act} {spec.out_act}"
