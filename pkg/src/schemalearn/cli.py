"""Command-line interface: check, gen-data, train, infer, analyze.

Exit codes are a stable contract: 0 success, 1 validation error (bad
files, names, shapes), 2 runtime or numeric failure.
"""
from __future__ import annotations

import argparse
import datetime
import json
import re
import sys
import time
from pathlib import Path as FilePath

import numpy as np

from . import __version__
from .analysis import factorization_check, residual_report, restriction_closure
from .checkpoint import load_checkpoint, save_checkpoint
from .datasets import (
    FiniteSet,
    ProductSource,
    TaskSpec,
    dataset_fingerprint,
    load_dataset_dir,
    read_ppm,
    write_ppm,
)
from .model import ArchAssignment, ModelInstance, ParamBundle, eval_path, seed_stream
from .presets import (
    PRESET_NAMES,
    derive_object_shapes,
    preset_config_text,
    preset_schema_text,
    write_preset_data,
)
from .schema import (
    Path,
    congruence_classes,
    format_path,
    identity_path,
    parse_schema,
)
from .training import (
    DiscriminatorAssignment,
    build_discriminators,
    format_config,
    format_metrics_row,
    metrics_columns,
    parse_config,
    train,
    trainer_state_tensors,
)
from .validation import DataError, NumericError, SchemaLearnError, ValidationError

__all__ = ["main"]


def _say(args, message: str) -> None:
    if not getattr(args, "quiet", False):
        print(message)


def _resolve_schema_text(args) -> str:
    if getattr(args, "schema", None):
        return FilePath(args.schema).read_text()
    if getattr(args, "preset", None):
        return preset_schema_text(args.preset)
    raise ValidationError("pass --schema FILE or --preset NAME")


def _resolve_config_text(args) -> str:
    if getattr(args, "config", None):
        return FilePath(args.config).read_text()
    if getattr(args, "preset", None):
        return preset_config_text(args.preset, img_side=args.size, seed=args.seed or 0)
    raise ValidationError("pass --config FILE or --preset NAME")


def _build_arch(schema, arch_specs, dataset=None) -> ArchAssignment:
    shapes = derive_object_shapes(schema, arch_specs)
    if dataset is not None:
        for obj in schema.objects:
            if obj not in shapes:
                shapes[obj] = (dataset.dim(obj),)
    return ArchAssignment(schema, shapes, arch_specs)


def _load_model(schema, arch: ArchAssignment, ckpt_path) -> tuple[ModelInstance, dict]:
    tensors = load_checkpoint(ckpt_path)
    params = {}
    for gen in schema.generators:
        key = f"gen/{gen.name}"
        if key not in tensors:
            raise DataError(f"checkpoint has no tensor {key!r}")
        params[gen.name] = tensors[key]
    return ModelInstance(schema, arch, ParamBundle(params)), tensors


# --- check -------------------------------------------------------------------

def cmd_check(args) -> int:
    schema = parse_schema(FilePath(args.schema).read_text())
    print(f"objects ({len(schema.objects)}): " + " ".join(schema.objects))
    print(f"generators ({len(schema.generators)}):")
    for gen in schema.generators:
        print(f"  {gen.name} : {gen.src} -> {gen.dst}")
    if not schema.equations:
        print("no equations")
        return 0
    print(f"equations ({len(schema.equations)}):")
    for lhs, rhs in schema.equations:
        print(f"  {format_path(lhs)} = {format_path(rhs)}")
    classes = congruence_classes(schema, args.bound)
    print(f"congruence classes at bound {args.bound}:")
    by_endpoint: dict[tuple[str, str], list] = {}
    for group in classes.classes:
        by_endpoint.setdefault((group[0].src, group[0].dst), []).append(group)
    for (src, dst), groups in sorted(by_endpoint.items()):
        print(f"  {src} -> {dst}: {len(groups)} class(es)")
        for group in groups:
            print("    {" + ", ".join(format_path(p) for p in group) + "}")
    return 0


# --- gen-data ----------------------------------------------------------------

def cmd_gen_data(args) -> int:
    write_preset_data(args.preset, args.out, args.n, args.size, args.seed or 0)
    _say(args, f"wrote {args.preset} dataset (n={args.n}, side={args.size}) to {args.out}")
    return 0


# --- train -------------------------------------------------------------------

def cmd_train(args) -> int:
    schema_text = _resolve_schema_text(args)
    config_text = _resolve_config_text(args)
    schema = parse_schema(schema_text)
    config, arch_specs, disc_specs = parse_config(config_text)
    if args.seed is not None:
        config.seed = args.seed
    dataset = load_dataset_dir(args.data, schema)
    arch = _build_arch(schema, arch_specs, dataset)
    task = TaskSpec(schema, dataset)
    discs = build_discriminators(schema, arch, disc_specs, config.clip_bound,
                                 config.seed, config.init_std)

    out = FilePath(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "artifact_version": __version__,
        "schema_text": schema_text,
        "config_text": format_config(config, arch_specs, disc_specs),
        "seed": config.seed,
        "dataset_fingerprint": dataset_fingerprint(args.data),
        "start_time": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")

    started = time.monotonic()
    metrics_path = out / "metrics.csv"
    columns = metrics_columns(schema)
    written = 0
    try:
        result = train(task, arch, discs, config)
    finally:
        with open(metrics_path, "w") as fh:
            fh.write(",".join(columns) + "\n")
            if "result" in locals():
                for row in result.metrics:
                    fh.write(format_metrics_row(row) + "\n")
                    written += 1
    for step, tensors in result.checkpoints:
        save_checkpoint(out / f"ckpt_{step:06d}.bin", tensors)
    final_step, final_tensors = result.checkpoints[-1]
    save_checkpoint(out / "ckpt_final.bin", final_tensors)
    elapsed = time.monotonic() - started
    _say(args, f"trained {config.total_steps} generator steps in {elapsed:.1f}s; "
               f"{written} metrics rows, {len(result.checkpoints)} checkpoints -> {out}")
    return 0


# --- infer -------------------------------------------------------------------

_PI_RE = re.compile(r"^pi_([AB])$")


def _product_split(obj: str, dim: int, data_dir) -> tuple[int, int]:
    """Component dimensions of a product object: exact from the dataset
    manifest when available, otherwise an even split."""
    if data_dir:
        manifest = FilePath(data_dir) / "manifest.txt"
        if manifest.exists():
            for raw in manifest.read_text().splitlines():
                fields = raw.split("#", 1)[0].split()
                if len(fields) == 4 and fields[0] == "product" and fields[1] == obj:
                    left = _dir_sample_dim(FilePath(data_dir) / fields[2])
                    if left is not None:
                        return left, dim - left
    if dim % 2:
        raise ValidationError(f"cannot infer product split of object {obj!r} with odd dim {dim}")
    return dim // 2, dim // 2


def _dir_sample_dim(sub) -> int | None:
    files = sorted(FilePath(sub).glob("*.ppm"))
    if not files:
        return None
    flat, w, h = read_ppm(files[0])
    return flat.size


def cmd_infer(args) -> int:
    schema = parse_schema(_resolve_schema_text(args))
    config, arch_specs, _ = parse_config(_resolve_config_text(args))
    arch = _build_arch(schema, arch_specs)
    model, _ = _load_model(schema, arch, args.ckpt)

    tokens = [t.strip() for t in args.path.split(";")]
    id_match = re.match(r"^id\(\s*(\w+)\s*\)$", tokens[0]) if len(tokens) == 1 else None
    pi_token = None
    if id_match:
        src_obj = id_match.group(1)
        gen_tokens: list[str] = []
    else:
        if tokens and _PI_RE.match(tokens[-1]):
            pi_token = tokens[-1]
            tokens = tokens[:-1]
        if not tokens:
            raise ValidationError("path must contain at least one generator")
        for tok in tokens:
            if tok not in schema.generator_by_name:
                raise ValidationError(f"unknown generator {tok!r} in path")
        gen_tokens = tokens
        src_obj = schema.generator_by_name[gen_tokens[0]].src

    src_dim = arch.object_dim(src_obj)
    if args.input:
        parts = []
        for piece in args.input.split(","):
            flat, w, h = read_ppm(piece.strip())
            parts.append(flat)
        vec = np.concatenate(parts)
        if vec.size != src_dim:
            raise ValidationError(f"input has dim {vec.size}, path source {src_obj!r} needs {src_dim}")
    elif args.latent_seed is not None:
        vec = seed_stream(args.latent_seed, 4).random(src_dim)
    else:
        raise ValidationError("pass --input FILE[,FILE] or --latent-seed K")

    if id_match:
        out_vec, out_obj = vec, src_obj
    else:
        path = Path(src_obj, schema.generator_by_name[gen_tokens[-1]].dst, tuple(gen_tokens))
        out_vec = eval_path(model, path, vec)
        out_obj = path.dst
    if pi_token:
        left, right = _product_split(out_obj, out_vec.size, getattr(args, "data", None))
        out_vec = out_vec[:left] if pi_token == "pi_A" else out_vec[left:]

    _write_image_output(out_vec, args.out)
    _say(args, f"wrote {args.out}")
    return 0


def _write_image_output(vec: np.ndarray, out_path) -> None:
    vec = np.clip(vec, 0.0, 1.0)
    side = round((vec.size / 3) ** 0.5)
    if 3 * side * side == vec.size:
        write_ppm(out_path, vec, side)
        return
    half = vec.size // 2
    side = round((half / 3) ** 0.5)
    if vec.size % 2 == 0 and 3 * side * side == half:
        stem = FilePath(out_path)
        write_ppm(stem.with_suffix(".A.ppm"), vec[:half], side)
        write_ppm(stem.with_suffix(".B.ppm"), vec[half:], side)
        return
    raise ValidationError(f"output of dim {vec.size} is not a square RGB image")


# --- analyze -------------------------------------------------------------------

def cmd_analyze(args) -> int:
    schema = parse_schema(_resolve_schema_text(args))
    config, arch_specs, _ = parse_config(_resolve_config_text(args))
    dataset = load_dataset_dir(args.data, schema)
    arch = _build_arch(schema, arch_specs, dataset)
    model, _ = _load_model(schema, arch, args.ckpt)
    task = TaskSpec(schema, dataset)
    out = FilePath(args.out)
    out.mkdir(parents=True, exist_ok=True)

    report = residual_report(model, task, args.n_eval, config.seed)
    with open(out / "analysis_residuals.csv", "w") as fh:
        fh.write("equation,lhs,rhs,mean_l1,max_l1,n\n")
        for k, row in enumerate(report.rows):
            lhs, rhs = row.equation
            fh.write(f"{k},{format_path(lhs)},{format_path(rhs)},"
                     f"{row.mean!r},{row.max!r},{row.count}\n")
    _say(args, "residuals: " + ", ".join(
        f"{format_path(r.equation[0])}={format_path(r.equation[1])}: mean {r.mean:.4g}"
        for r in report.rows) if report.rows else "residuals: no equations")

    eval_sets = {}
    for obj in schema.objects:
        source = dataset.source(obj)
        if isinstance(source, FiniteSet):
            eval_sets[obj] = source.samples[: args.n_eval]
    fact = factorization_check(model, schema, eval_sets, args.eps, args.bound)
    print(fact.describe())

    try:
        restriction = restriction_closure(model, task, cap=args.cap)
    except DataError as exc:
        print(f"restriction skipped: {exc}", file=sys.stderr)
        restriction = None
    if restriction is not None:
        with open(out / "analysis_restriction.csv", "w") as fh:
            fh.write("object,index,provenance\n")
            for obj in schema.objects:
                for i, why in enumerate(restriction.provenance[obj]):
                    fh.write(f"{obj},{i},{why}\n")
        sizes = restriction.sizes()
        flag = " (capped, non-minimal)" if restriction.capped else ""
        _say(args, "restriction sizes: " +
             ", ".join(f"{o}: {n}" for o, n in sizes.items()) + flag)
    return 0


# --- wiring -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="schemalearn",
        description="Train and analyze collections of networks attached to a graph schema.",
    )
    parser.add_argument("--version", action="version", version=f"schemalearn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--quiet", action="store_true", help="suppress informational output")

    p = sub.add_parser("check", help="validate a schema and print its bounded congruence classes")
    p.add_argument("--schema", required=True)
    p.add_argument("--bound", type=int, default=4)
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen-data", help="write a synthetic dataset directory")
    p.add_argument("--preset", default="circles", choices=PRESET_NAMES)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--size", type=int, default=16)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train a model from a schema, dataset, and config")
    p.add_argument("--schema")
    p.add_argument("--config")
    p.add_argument("--preset", choices=PRESET_NAMES)
    p.add_argument("--size", type=int, default=16, help="image side for preset configs")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="evaluate a path on one input")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--schema")
    p.add_argument("--config")
    p.add_argument("--preset", choices=PRESET_NAMES)
    p.add_argument("--size", type=int, default=16)
    p.add_argument("--path", required=True)
    p.add_argument("--input")
    p.add_argument("--latent-seed", type=int, default=None)
    p.add_argument("--data", help="dataset directory (for product splits of pi_A/pi_B)")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("analyze", help="residuals, factorization witness, restriction closure")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--schema")
    p.add_argument("--config")
    p.add_argument("--preset", choices=PRESET_NAMES)
    p.add_argument("--size", type=int, default=16)
    p.add_argument("--data", required=True)
    p.add_argument("--bound", type=int, default=4)
    p.add_argument("--eps", type=float, default=1e-2)
    p.add_argument("--n-eval", type=int, default=256)
    p.add_argument("--cap", type=int, default=1000)
    p.add_argument("--out", default=".")
    common(p)
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2
    except SchemaLearnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
