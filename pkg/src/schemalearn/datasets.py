"""Per-object sample sources, the synthetic circles/stripes data, and
PPM image I/O.

Images are flattened row-major RGB float64 vectors in [0, 1]; a side-s RGB
image has dimension 3*s*s. PPM (binary P6, maxval 255) is the only file
format: it is trivially bit-exact and needs no decoder dependencies.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path as FilePath
from typing import Union

import numpy as np

from .model import seed_stream
from .schema import Schema
from .validation import DataError, ValidationError, as_f64

__all__ = [
    "FiniteSet",
    "LatentSampler",
    "ProductSource",
    "DatasetFunctor",
    "TaskSpec",
    "product_dataset",
    "sample_source",
    "sample_batch",
    "CirclesData",
    "gen_circles_dataset",
    "render_circle",
    "render_stripes",
    "render_circle_on_stripes",
    "decode_circle_color",
    "decode_stripe_color",
    "write_ppm",
    "read_ppm",
    "write_dataset_dir",
    "load_dataset_dir",
    "dataset_fingerprint",
]

MIN_IMG_SIDE = 8


@dataclass
class FiniteSet:
    """A finite list of samples, stored as one [n, dim] matrix."""

    samples: np.ndarray

    def __post_init__(self) -> None:
        arr = as_f64(self.samples, "samples")
        if arr.ndim != 2:
            raise DataError(f"FiniteSet needs a [n, dim] matrix, got shape {arr.shape}")
        self.samples = arr

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    def __len__(self) -> int:
        return self.samples.shape[0]


@dataclass(frozen=True)
class LatentSampler:
    """Uniform samples on [0, 1]^dim. Dimension 0 is allowed so a product
    with a trivial latent factor degenerates to the other factor."""

    dim: int

    def __post_init__(self) -> None:
        if self.dim < 0:
            raise DataError("latent dimension must be >= 0")


@dataclass(frozen=True)
class ProductSource:
    """Independent draws from two sources, concatenated left-then-right."""

    left: "Source"
    right: "Source"

    @property
    def dim(self) -> int:
        return source_dim(self.left) + source_dim(self.right)


Source = Union[FiniteSet, LatentSampler, ProductSource]


def source_dim(source: Source) -> int:
    return source.dim


def product_dataset(left: Source, right: Source) -> ProductSource:
    return ProductSource(left, right)


def sample_source(source: Source, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw an [n, dim] batch: finite sets uniformly with replacement,
    latent sources fresh uniforms, products componentwise left-then-right."""
    if n < 1:
        raise ValidationError("batch size must be >= 1")
    if isinstance(source, FiniteSet):
        if len(source) == 0:
            raise DataError("cannot sample from an empty finite set")
        idx = rng.integers(0, len(source), size=n)
        return source.samples[idx].copy()
    if isinstance(source, LatentSampler):
        return rng.random((n, source.dim))
    if isinstance(source, ProductSource):
        left = sample_source(source.left, n, rng)
        right = sample_source(source.right, n, rng)
        return np.concatenate([left, right], axis=1)
    raise DataError(f"unknown source type {type(source).__name__}")


@dataclass
class DatasetFunctor:
    """One sample source per schema object."""

    sources: dict[str, Source]

    def source(self, obj: str) -> Source:
        if obj not in self.sources:
            raise DataError(f"no dataset source for object {obj!r}")
        return self.sources[obj]

    def dim(self, obj: str) -> int:
        return source_dim(self.source(obj))


def sample_batch(dataset: DatasetFunctor, obj: str, n: int, rng: np.random.Generator) -> np.ndarray:
    return sample_source(dataset.source(obj), n, rng)


@dataclass
class TaskSpec:
    """A schema together with a dataset covering exactly its objects."""

    schema: Schema
    dataset: DatasetFunctor

    def __post_init__(self) -> None:
        want = set(self.schema.objects)
        got = set(self.dataset.sources)
        if want != got:
            missing = want - got
            extra = got - want
            raise DataError(f"dataset objects mismatch (missing {sorted(missing)}, extra {sorted(extra)})")


# --- synthetic circles / stripes data -------------------------------------

def _circle_mask(side: int) -> np.ndarray:
    c = side / 2.0
    r = side / 4.0
    ys = np.arange(side) + 0.5
    xs = np.arange(side) + 0.5
    dy = (ys - c)[:, None] ** 2
    dx = (xs - c)[None, :] ** 2
    return (dy + dx) <= r * r


def _stripe_rows(side: int) -> np.ndarray:
    half = max(1, side // 8)  # colored band height; full period is side/4
    rows = np.arange(side)
    return (rows // half) % 2 == 0


def render_circle(side: int, color) -> np.ndarray:
    """Unicolored circle (fixed center and radius side/4) on white."""
    img = np.ones((side, side, 3))
    img[_circle_mask(side)] = color
    return img.reshape(-1)


def render_stripes(side: int, color) -> np.ndarray:
    """Unicolored horizontal stripes (period side/4 rows) on white."""
    img = np.ones((side, side, 3))
    img[_stripe_rows(side), :] = color
    return img.reshape(-1)


def render_circle_on_stripes(side: int, circle_color, stripe_color) -> np.ndarray:
    img = np.ones((side, side, 3))
    img[_stripe_rows(side), :] = stripe_color
    img[_circle_mask(side)] = circle_color
    return img.reshape(-1)


def decode_circle_color(flat: np.ndarray, side: int) -> np.ndarray:
    """Per-channel median over the inner half of the circle region: exact
    on clean renders (all region pixels equal), robust on generated ones."""
    img = np.asarray(flat).reshape(side, side, 3)
    c = side / 2.0
    r = side / 8.0  # half the circle radius
    ys = np.arange(side) + 0.5
    inner = ((ys - c)[:, None] ** 2 + (ys - c)[None, :] ** 2) <= r * r
    return np.median(img[inner], axis=0)


def decode_stripe_color(flat: np.ndarray, side: int) -> np.ndarray:
    """Per-channel median over striped rows in the rightmost columns,
    clear of the circle. Exact on clean renders."""
    img = np.asarray(flat).reshape(side, side, 3)
    cols = max(1, side // 8)
    region = img[_stripe_rows(side), side - cols:, :]
    return np.median(region.reshape(-1, 3), axis=0)


@dataclass
class CirclesData:
    """Three unpaired finite sets plus the ground-truth colors that
    generated them. The colors exist for evaluation tooling only and are
    never fed to training."""

    side: int
    a: FiniteSet            # circles on white
    b: FiniteSet            # stripes on white
    ab: FiniteSet           # circles over stripes
    a_colors: np.ndarray
    b_colors: np.ndarray
    ab_circle_colors: np.ndarray
    ab_stripe_colors: np.ndarray

    @property
    def img_dim(self) -> int:
        return 3 * self.side * self.side


def gen_circles_dataset(n_per_set: int, img_side: int, seed: int) -> CirclesData:
    """Synthesize the three sets with independent color streams, so no
    implicit pairing exists between them."""
    if img_side < MIN_IMG_SIDE:
        raise ValidationError(f"img_side must be >= {MIN_IMG_SIDE}, got {img_side}")
    if n_per_set < 1:
        raise ValidationError("n_per_set must be >= 1")
    rng_a = seed_stream(seed, 10)
    rng_b = seed_stream(seed, 11)
    rng_ab = seed_stream(seed, 12)
    a_colors = rng_a.random((n_per_set, 3))
    b_colors = rng_b.random((n_per_set, 3))
    ab_circle = rng_ab.random((n_per_set, 3))
    ab_stripe = rng_ab.random((n_per_set, 3))
    a = np.stack([render_circle(img_side, c) for c in a_colors])
    b = np.stack([render_stripes(img_side, c) for c in b_colors])
    ab = np.stack([
        render_circle_on_stripes(img_side, c, s)
        for c, s in zip(ab_circle, ab_stripe)
    ])
    return CirclesData(
        img_side, FiniteSet(a), FiniteSet(b), FiniteSet(ab),
        a_colors, b_colors, ab_circle, ab_stripe,
    )


# --- PPM I/O ---------------------------------------------------------------

def write_ppm(path, flat, side: int) -> None:
    """Binary P6, maxval 255, quantized with round-half-up."""
    arr = as_f64(flat, "image")
    if arr.size != 3 * side * side:
        raise DataError(f"image length {arr.size} does not match side {side}")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise DataError("image values must lie in [0, 1]")
    data = np.floor(arr * 255.0 + 0.5).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (side, side))
        fh.write(data.tobytes())


def _read_ppm_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    n = len(buf)
    while pos < n:
        ch = buf[pos:pos + 1]
        if ch == b"#":
            while pos < n and buf[pos:pos + 1] != b"\n":
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos:pos + 1].isspace():
        pos += 1
    if start == pos:
        raise DataError("truncated PPM header")
    return buf[start:pos], pos


def read_ppm(path) -> tuple[np.ndarray, int, int]:
    """Returns (flat float64 values in [0,1], width, height)."""
    with open(path, "rb") as fh:
        buf = fh.read()
    try:
        magic, pos = _read_ppm_token(buf, 0)
        if magic != b"P6":
            raise DataError(f"not a binary PPM (magic {magic!r})")
        w_tok, pos = _read_ppm_token(buf, pos)
        h_tok, pos = _read_ppm_token(buf, pos)
        max_tok, pos = _read_ppm_token(buf, pos)
        width, height, maxval = int(w_tok), int(h_tok), int(max_tok)
    except ValueError as exc:
        raise DataError(f"malformed PPM header in {path}") from exc
    if maxval != 255:
        raise DataError(f"unsupported PPM maxval {maxval} (need 255)")
    pos += 1  # single whitespace byte after maxval
    need = 3 * width * height
    raw = buf[pos:pos + need]
    if len(raw) != need:
        raise DataError(f"PPM payload truncated in {path}")
    return np.frombuffer(raw, dtype=np.uint8).astype(np.float64) / 255.0, width, height


# --- dataset directories ---------------------------------------------------

def write_dataset_dir(out_dir, sets: dict[str, np.ndarray], side: int,
                      manifest_lines: list[str] | None = None) -> None:
    """One subdirectory of PPM files per named set, plus optional
    manifest.txt lines (`latent <obj> <dim>`, `product <obj> <a> <b>`)."""
    out = FilePath(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, samples in sets.items():
        sub = out / name
        sub.mkdir(exist_ok=True)
        for i, row in enumerate(samples):
            write_ppm(sub / f"{i:05d}.ppm", row, side)
    if manifest_lines:
        (out / "manifest.txt").write_text("\n".join(manifest_lines) + "\n")


def _load_finite_dir(sub: FilePath, want_dim: int | None, obj: str) -> FiniteSet:
    files = sorted(sub.glob("*.ppm"))
    if not files:
        raise DataError(f"no PPM files for object {obj!r} in {sub}")
    rows = []
    for f in files:
        flat, w, h = read_ppm(f)
        rows.append(flat)
    mat = np.stack(rows)
    if want_dim is not None and mat.shape[1] != want_dim:
        raise DataError(
            f"object {obj!r}: images have dimension {mat.shape[1]}, expected {want_dim}"
        )
    return FiniteSet(mat)


def load_dataset_dir(path, schema: Schema,
                     object_dims: dict[str, int] | None = None) -> DatasetFunctor:
    """Build a DatasetFunctor from a directory.

    Each schema object resolves, in order, to a `latent` manifest line, a
    `product` manifest line naming two subdirectories, or a subdirectory of
    PPM files with the object's own name.
    """
    root = FilePath(path)
    if not root.is_dir():
        raise DataError(f"dataset directory {root} does not exist")
    latents: dict[str, int] = {}
    products: dict[str, tuple[str, str]] = {}
    manifest = root / "manifest.txt"
    if manifest.exists():
        for lineno, raw in enumerate(manifest.read_text().splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if fields[0] == "latent" and len(fields) == 3:
                latents[fields[1]] = int(fields[2])
            elif fields[0] == "product" and len(fields) == 4:
                products[fields[1]] = (fields[2], fields[3])
            else:
                raise DataError(f"manifest.txt line {lineno}: cannot parse {raw!r}")
    sources: dict[str, Source] = {}
    dims = object_dims or {}
    for obj in schema.objects:
        want = dims.get(obj)
        if obj in latents:
            if want is not None and latents[obj] != want:
                raise DataError(f"object {obj!r}: latent dim {latents[obj]} != expected {want}")
            sources[obj] = LatentSampler(latents[obj])
        elif obj in products:
            left_name, right_name = products[obj]
            left = _load_finite_dir(root / left_name, None, obj)
            right = _load_finite_dir(root / right_name, None, obj)
            src = ProductSource(left, right)
            if want is not None and src.dim != want:
                raise DataError(f"object {obj!r}: product dim {src.dim} != expected {want}")
            sources[obj] = src
        elif (root / obj).is_dir():
            sources[obj] = _load_finite_dir(root / obj, want, obj)
        else:
            raise DataError(f"no data for object {obj!r} (no subdirectory or manifest entry)")
    return DatasetFunctor(sources)


def dataset_fingerprint(path) -> str:
    """Content hash of a dataset directory: sha256 over sorted relative
    paths and file bytes."""
    root = FilePath(path)
    digest = hashlib.sha256()
    for f in sorted(p for p in root.rglob("*") if p.is_file()):
        digest.update(str(f.relative_to(root)).encode())
        digest.update(b"\0")
        digest.update(f.read_bytes())
    return digest.hexdigest()
