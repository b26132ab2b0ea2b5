"""Bundled schema + architecture + config presets.

Three ready-made tasks: a single-generator adversarial task (`gan-toy`),
a two-object cycle task (`cyclegan-toy`), and the circles/stripes
composition-decomposition task (`circles`) where one object carries a
product dataset. All operate on flattened side-s RGB images (dim 3*s*s).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path as FilePath

from .datasets import gen_circles_dataset, write_dataset_dir
from .model import ArchAssignment, LayerSpec
from .schema import Schema, parse_schema
from .training import TrainingConfig
from .validation import ValidationError

__all__ = [
    "PRESET_NAMES",
    "PresetBundle",
    "build_preset",
    "preset_schema_text",
    "preset_config_text",
    "write_preset_data",
    "LATENT_DIM",
]

PRESET_NAMES = ("gan-toy", "cyclegan-toy", "circles")
LATENT_DIM = 100


def _img_dim(side: int) -> int:
    return 3 * side * side


def preset_schema_text(name: str) -> str:
    if name == "gan-toy":
        return "object LS\nobject IS\ngen h : LS -> IS\n"
    if name == "cyclegan-toy":
        return (
            "object A\nobject B\n"
            "gen f : A -> B\ngen g : B -> A\n"
            "eq f;g = id(A)\neq g;f = id(B)\n"
        )
    if name == "circles":
        return (
            "object AB\nobject AxB\n"
            "gen d : AB -> AxB\ngen c : AxB -> AB\n"
            "eq d;c = id(AB)\neq c;d = id(AxB)\n"
        )
    raise ValidationError(f"unknown preset {name!r} (have {', '.join(PRESET_NAMES)})")


def preset_config_text(name: str, img_side: int = 16, seed: int = 0) -> str:
    dim = _img_dim(img_side)
    if name == "gan-toy":
        return (
            f"set seed {seed}\n"
            "set gamma 0.0\n"
            "set identity_weight 0.0\n"
            "set lr 0.0001\n"
            "set batch 32\n"
            "set n_critic_warm 50\nset warm_steps 50\nset n_critic 5\n"
            "set total_steps 200\n"
            "set clip_bound 0.01\n"
            f"arch h mlp {LATENT_DIM} 64 {dim} relu sigmoid\n"
            f"disc IS mlp {dim} 64 1 leaky_relu\n"
        )
    if name == "cyclegan-toy":
        return (
            f"set seed {seed}\n"
            "set gamma 10.0\n"
            "set identity_weight 0.0\n"
            "set lr 0.0001\n"
            "set batch 32\n"
            "set n_critic_warm 50\nset warm_steps 50\nset n_critic 5\n"
            "set total_steps 500\n"
            "set clip_bound 0.01\n"
            f"arch f mlp {dim} 64 6 64 {dim} relu sigmoid\n"
            f"arch g mlp {dim} 64 6 64 {dim} relu sigmoid\n"
            f"disc A mlp {dim} 64 1 leaky_relu\n"
            f"disc B mlp {dim} 64 1 leaky_relu\n"
        )
    if name == "circles":
        return (
            f"set seed {seed}\n"
            "set gamma 20.0\n"
            "set identity_weight 5.0\n"
            "set lr 0.001\n"
            "set batch 32\n"
            "set n_critic_warm 50\nset warm_steps 50\nset n_critic 5\n"
            "set total_steps 3000\n"
            "set clip_bound 0.01\n"
            "set init_std 0.01\n"
            f"arch d mlp {dim} 128 6 128 {2 * dim} relu sigmoid\n"
            f"arch c mlp {2 * dim} 128 6 128 {dim} relu sigmoid\n"
            f"disc AB mlp {dim} 64 1 leaky_relu\n"
            f"disc AxB mlp {2 * dim} 64 1 leaky_relu\n"
        )
    raise ValidationError(f"unknown preset {name!r} (have {', '.join(PRESET_NAMES)})")


@dataclass
class PresetBundle:
    name: str
    schema: Schema
    arch: ArchAssignment
    disc_specs: dict[str, LayerSpec]
    config: TrainingConfig


def build_preset(name: str, img_side: int = 16, seed: int = 0) -> PresetBundle:
    from .training import parse_config

    schema = parse_schema(preset_schema_text(name))
    config, arch_specs, disc_specs = parse_config(preset_config_text(name, img_side, seed))
    shapes = derive_object_shapes(schema, arch_specs)
    if name == "gan-toy":
        shapes.setdefault("LS", (LATENT_DIM,))
    arch = ArchAssignment(schema, {k: v for k, v in shapes.items()}, arch_specs)
    return PresetBundle(name, schema, arch, disc_specs, config)


def derive_object_shapes(schema: Schema, arch_specs: dict[str, LayerSpec]) -> dict[str, tuple[int, ...]]:
    """Infer object dimensions from the endpoint widths of generator
    architectures, raising on any inconsistency."""
    dims: dict[str, int] = {}
    for gen in schema.generators:
        spec = arch_specs.get(gen.name)
        if spec is None:
            raise ValidationError(f"no arch line for generator {gen.name!r}")
        for obj, dim in ((gen.src, spec.widths[0]), (gen.dst, spec.widths[-1])):
            if dims.setdefault(obj, dim) != dim:
                raise ValidationError(
                    f"object {obj!r}: conflicting dimensions {dims[obj]} and {dim} "
                    f"implied by generator architectures"
                )
    return {obj: (dim,) for obj, dim in dims.items()}


def write_preset_data(name: str, out_dir, n: int, img_side: int, seed: int,
                      quiet: bool = False) -> None:
    """Write a dataset directory for a preset: PPM subdirectories, a
    manifest for latent/product objects, and a hidden ground-truth color
    table (evaluation tooling only, never read by training)."""
    data = gen_circles_dataset(n, img_side, seed)
    out = FilePath(out_dir)
    if name == "circles":
        sets = {"A": data.a.samples, "B": data.b.samples, "AB": data.ab.samples}
        manifest = ["product AxB A B"]
    elif name == "cyclegan-toy":
        sets = {"A": data.a.samples, "B": data.b.samples}
        manifest = None
    elif name == "gan-toy":
        sets = {"IS": data.a.samples}
        manifest = [f"latent LS {LATENT_DIM}"]
    else:
        raise ValidationError(f"unknown preset {name!r} (have {', '.join(PRESET_NAMES)})")
    write_dataset_dir(out, sets, img_side, manifest)
    with open(out / ".truth.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["set", "index", "circle_r", "circle_g", "circle_b",
                         "stripe_r", "stripe_g", "stripe_b"])
        for i, color in enumerate(data.a_colors):
            writer.writerow(["A", i, *[repr(v) for v in color], "", "", ""])
        for i, color in enumerate(data.b_colors):
            writer.writerow(["B", i, "", "", "", *[repr(v) for v in color]])
        for i, (cc, sc) in enumerate(zip(data.ab_circle_colors, data.ab_stripe_colors)):
            writer.writerow(["AB", i, *[repr(v) for v in cc], *[repr(v) for v in sc]])
