import itertools

import numpy as np
import pytest

from schemalearn import (
    ArchAssignment,
    DatasetFunctor,
    FiniteSet,
    LatentSampler,
    LayerSpec,
    ParamBundle,
    Path,
    TaskSpec,
    eval_circles_metrics,
    eval_path,
    factorization_check,
    gen_circles_dataset,
    init_params,
    instantiate,
    parse_schema,
    residual_report,
    restriction_closure,
)
from schemalearn.analysis import _materialize
from schemalearn.datasets import _circle_mask
from schemalearn.model import seed_stream
from schemalearn.schema import identity_path
from schemalearn.training import Tape, path_eq_loss
from schemalearn.validation import DataError

from oracles import minimal_closed_supersets


def affine_params(w, b):
    return np.concatenate([np.asarray(w, dtype=float).reshape(-1),
                           np.asarray(b, dtype=float).reshape(-1)])


def exact_inverse_pair(dim=3):
    """CycleGAN model whose f and g are mutually inverse permutations;
    float matmul with a permutation matrix is exact."""
    schema = parse_schema(
        "object A\nobject B\ngen f : A -> B\ngen g : B -> A\n"
        "eq f;g = id(A)\neq g;f = id(B)\n")
    arch = ArchAssignment(schema, {"A": (dim,), "B": (dim,)},
                          {"f": LayerSpec((dim, dim), "relu", "linear"),
                           "g": LayerSpec((dim, dim), "relu", "linear")})
    perm = np.eye(dim)[list(range(1, dim)) + [0]]
    params = ParamBundle({"f": affine_params(perm, np.zeros(dim)),
                          "g": affine_params(perm.T, np.zeros(dim))})
    return instantiate(arch, params), schema, arch


class TestResiduals:
    def test_exact_model_zero_residuals(self, rng):
        model, schema, _ = exact_inverse_pair()
        task = TaskSpec(schema, DatasetFunctor({"A": FiniteSet(rng.random((6, 3))),
                                                "B": FiniteSet(rng.random((6, 3)))}))
        report = residual_report(model, task, n_eval=16, seed=0)
        assert [r.mean for r in report.rows] == [0.0, 0.0]
        assert [r.max for r in report.rows] == [0.0, 0.0]

    def test_random_init_strictly_positive(self, rng):
        model, schema, arch = exact_inverse_pair()
        noisy = instantiate(arch, init_params(arch, 1, 0.5))
        task = TaskSpec(schema, DatasetFunctor({"A": FiniteSet(rng.random((6, 3))),
                                                "B": FiniteSet(rng.random((6, 3)))}))
        report = residual_report(noisy, task, n_eval=16, seed=0)
        assert all(r.mean > 0 for r in report.rows)

    def test_row_order_and_counts(self, rng):
        model, schema, _ = exact_inverse_pair()
        task = TaskSpec(schema, DatasetFunctor({"A": FiniteSet(rng.random((4, 3))),
                                                "B": FiniteSet(rng.random((4, 3)))}))
        report = residual_report(model, task, n_eval=9, seed=3)
        assert [r.equation for r in report.rows] == list(schema.equations)
        assert all(r.count == 9 for r in report.rows)
        assert all(r.max >= r.mean >= 0 for r in report.rows)

    def test_mean_matches_training_loss_on_same_batch(self, rng):
        _, schema, arch = exact_inverse_pair()
        model = instantiate(arch, init_params(arch, 2, 0.3))
        task = TaskSpec(schema, DatasetFunctor({"A": FiniteSet(rng.random((6, 3))),
                                                "B": FiniteSet(rng.random((6, 3)))}))
        n, seed = 8, 17
        report = residual_report(model, task, n_eval=n, seed=seed)

        stream = seed_stream(seed, 3)
        for (lhs, rhs), row in zip(schema.equations, report.rows):
            batch = task.dataset.source(lhs.src).samples[
                stream.integers(0, len(task.dataset.source(lhs.src)), size=n)]
            t = Tape()
            nodes = {g.name: t.leaf(model.params[g.name], kind="param")
                     for g in schema.generators}
            val = float(t.value(path_eq_loss(t, arch, nodes, lhs, rhs, t.leaf(batch))))
            assert abs(val - row.mean) < 1e-12


class TestFactorization:
    def test_exact_pair_certificate_zero(self, rng):
        model, schema, _ = exact_inverse_pair()
        sets = {"A": rng.random((5, 3)), "B": rng.random((5, 3))}
        result = factorization_check(model, schema, sets, eps=1e-6, bound=4)
        assert result.certificate
        assert result.max_deviation == 0.0
        assert result.pairs_checked > 0

    def test_perturbed_model_counterexample(self, rng):
        model, schema, arch = exact_inverse_pair()
        params = model.params.copy()
        params.tensors["g"][0] += 0.5
        broken = instantiate(arch, params)
        sets = {"A": rng.random((5, 3)), "B": rng.random((5, 3))}
        result = factorization_check(broken, schema, sets, eps=1e-6, bound=4)
        assert not result.certificate
        lhs, rhs, point, dev = result.counterexample
        assert dev > 1e-6
        assert (lhs.src, lhs.dst) == (rhs.src, rhs.dst)  # a parallel pair is named
        assert 0 <= point < 5
        assert "counterexample" in result.describe()

    def test_no_equations_vacuous_certificate(self, rng, gan_schema):
        arch = ArchAssignment(gan_schema, {"LS": (2,), "IS": (3,)},
                              {"h": LayerSpec((2, 3), "relu", "linear")})
        model = instantiate(arch, init_params(arch, 0, 0.1))
        result = factorization_check(model, gan_schema, {"LS": rng.random((3, 2))},
                                     eps=0.0, bound=3)
        assert result.certificate
        assert result.pairs_checked == 0

    def test_eps_infinity_always_certifies(self, rng):
        model, schema, arch = exact_inverse_pair()
        params = model.params.copy()
        params.tensors["g"][2] += 10.0
        broken = instantiate(arch, params)
        sets = {"A": rng.random((4, 3)), "B": rng.random((4, 3))}
        result = factorization_check(broken, schema, sets, eps=np.inf, bound=4)
        assert result.certificate

    def test_eps_zero_iff_residuals_zero(self, rng):
        sets = {"A": rng.random((4, 3)), "B": rng.random((4, 3))}
        exact, schema, arch = exact_inverse_pair()
        assert factorization_check(exact, schema, sets, eps=0.0, bound=4).certificate
        noisy = instantiate(arch, init_params(arch, 5, 0.1))
        assert not factorization_check(noisy, schema, sets, eps=0.0, bound=4).certificate


def single_object_model(weight_fns, dim=2):
    """Schema with one object and one generator per entry of weight_fns,
    each an exact affine map (weights, bias)."""
    names = [f"u{i}" for i in range(len(weight_fns))]
    lines = ["object A"] + [f"gen {n} : A -> A" for n in names]
    schema = parse_schema("\n".join(lines))
    arch = ArchAssignment(schema, {"A": (dim,)},
                          {n: LayerSpec((dim, dim), "relu", "linear") for n in names})
    params = ParamBundle({n: affine_params(w, b) for n, (w, b) in zip(names, weight_fns)})
    return instantiate(arch, params), schema


class TestRestriction:
    def test_gan_example(self, rng):
        schema = parse_schema("object LS\nobject IS\ngen h : LS -> IS")
        arch = ArchAssignment(schema, {"LS": (2,), "IS": (3,)},
                              {"h": LayerSpec((2, 4, 3), "tanh", "sigmoid")})
        model = instantiate(arch, init_params(arch, 0, 0.5))
        z = rng.random((2, 2))
        x = rng.random((1, 3))
        task = TaskSpec(schema, DatasetFunctor({"LS": FiniteSet(z), "IS": FiniteSet(x)}))
        result = restriction_closure(model, task)
        assert not result.capped
        assert result.sizes()["LS"] == 2
        images = [eval_path(model, Path("LS", "IS", ("h",)), zi) for zi in z]
        want = {x[0].tobytes()} | {im.tobytes() for im in images}
        assert {e.tobytes() for e in result.elements["IS"]} == want

    def test_no_generators_equals_dataset(self, rng):
        schema = parse_schema("object A")
        arch = ArchAssignment(schema, {"A": (2,)}, {})
        model = instantiate(arch, ParamBundle({}))
        rows = rng.random((3, 2))
        task = TaskSpec(schema, DatasetFunctor({"A": FiniteSet(rows)}))
        result = restriction_closure(model, task)
        assert result.sizes() == {"A": 3}
        assert all(p == "dataset" for p in result.provenance["A"])

    def test_latent_rejected(self, rng):
        schema = parse_schema("object LS\nobject IS\ngen h : LS -> IS")
        arch = ArchAssignment(schema, {"LS": (2,), "IS": (3,)},
                              {"h": LayerSpec((2, 3), "tanh", "sigmoid")})
        model = instantiate(arch, init_params(arch, 0, 0.1))
        task = TaskSpec(schema, DatasetFunctor({"LS": LatentSampler(2),
                                                "IS": FiniteSet(rng.random((1, 3)))}))
        with pytest.raises(DataError, match="latent"):
            restriction_closure(model, task)

    def test_different_params_different_images(self, rng):
        schema = parse_schema("object LS\nobject IS\ngen h : LS -> IS")
        arch = ArchAssignment(schema, {"LS": (2,), "IS": (3,)},
                              {"h": LayerSpec((2, 4, 3), "tanh", "sigmoid")})
        z = rng.random((2, 2))
        x = rng.random((1, 3))
        task = TaskSpec(schema, DatasetFunctor({"LS": FiniteSet(z), "IS": FiniteSet(x)}))
        a = restriction_closure(instantiate(arch, init_params(arch, 1, 0.5)), task)
        b = restriction_closure(instantiate(arch, init_params(arch, 2, 0.5)), task)
        keys_a = {e.tobytes() for e in a.elements["IS"]}
        keys_b = {e.tobytes() for e in b.elements["IS"]}
        assert keys_a != keys_b

    def test_fixed_point(self, rng):
        swap = np.array([[0.0, 1.0], [1.0, 0.0]])
        const = np.zeros((2, 2))
        model, schema = single_object_model([(swap, np.zeros(2)), (const, np.array([0.25, 0.75]))])
        task = TaskSpec(schema, DatasetFunctor({"A": FiniteSet(rng.random((3, 2)))}))
        result = restriction_closure(model, task)
        assert not result.capped
        members = {e.tobytes() for e in result.elements["A"]}
        for row in result.elements["A"]:
            for gen in schema.generators:
                img = eval_path(model, Path("A", "A", (gen.name,)), row)
                assert img.tobytes() in members

    def test_cap_flags_partial_result(self):
        shift = (np.eye(2), np.ones(2))  # x -> x + 1 has an infinite orbit
        model, schema = single_object_model([shift])
        task = TaskSpec(schema, DatasetFunctor({"A": FiniteSet(np.zeros((1, 2)))}))
        result = restriction_closure(model, task, cap=10)
        assert result.capped
        assert result.sizes()["A"] == 10

    def test_product_materialization_within_cap(self, rng):
        schema = parse_schema("object P\nobject Q\ngen h : P -> Q")
        arch = ArchAssignment(schema, {"P": (4,), "Q": (2,)},
                              {"h": LayerSpec((4, 2), "tanh", "sigmoid")})
        model = instantiate(arch, init_params(arch, 0, 0.2))
        from schemalearn import product_dataset
        prod = product_dataset(FiniteSet(rng.random((2, 2))), FiniteSet(rng.random((3, 2))))
        task = TaskSpec(schema, DatasetFunctor({"P": prod, "Q": FiniteSet(rng.random((1, 2)))}))
        result = restriction_closure(model, task)
        assert result.sizes()["P"] == 6
        assert result.sizes()["Q"] == 1 + 6

    def test_minimality_against_lattice_oracle(self, rng):
        # exact finite-orbit maps keep the universe small enough to
        # enumerate every subset
        cases = []
        swap = np.array([[0.0, 1.0], [1.0, 0.0]])
        const = (np.zeros((2, 2)), np.array([0.5, 0.25]))
        cases.append(([(swap, np.zeros(2))], np.array([[0.0, 1.0]])))
        cases.append(([(swap, np.zeros(2)), const], np.array([[0.0, 1.0], [0.25, 0.5]])))
        cases.append(([(np.eye(2), np.zeros(2))], rng.random((3, 2))))
        cases.append(([const], rng.random((4, 2))))
        for weight_fns, rows in cases:
            model, schema = single_object_model(weight_fns)
            task = TaskSpec(schema, DatasetFunctor({"A": FiniteSet(rows)}))
            result = restriction_closure(model, task)
            assert not result.capped

            # oracle: BFS universe with independent bookkeeping, then
            # intersect every closed superset of the dataset
            def step_images(vec):
                return [eval_path(model, Path("A", "A", (g.name,)), vec)
                        for g in schema.generators]

            universe: dict[bytes, np.ndarray] = {}
            queue = [np.asarray(r, dtype=np.float64) for r in rows]
            while queue:
                vec = queue.pop()
                key = vec.tobytes()
                if key in universe:
                    continue
                universe[key] = vec
                queue.extend(step_images(vec))
            images = {("A", key): [("A", img.tobytes()) for img in step_images(vec)]
                      for key, vec in universe.items()}
            oracle = minimal_closed_supersets(
                initial={"A": frozenset(np.asarray(r, dtype=np.float64).tobytes() for r in rows)},
                universe={"A": frozenset(universe)},
                images=images,
            )
            got = frozenset(e.tobytes() for e in result.elements["A"])
            assert got == oracle["A"]


def circles_like_model(side=8):
    """Hand-built exact composition/decomposition model on clean renders.

    Decomposition duplicates the combined image into both halves (the
    decoders only read the circle region of the first half and the stripe
    region of the second). Composition selects circle-region pixels from
    the first input half and everything else from the second.
    """
    dim = 3 * side * side
    schema = parse_schema(
        "object AB\nobject AxB\n"
        "gen d : AB -> AxB\ngen c : AxB -> AB\n"
        "eq d;c = id(AB)\neq c;d = id(AxB)\n")
    arch = ArchAssignment(schema, {"AB": (dim,), "AxB": (2 * dim,)},
                          {"d": LayerSpec((dim, 2 * dim), "relu", "linear"),
                           "c": LayerSpec((2 * dim, dim), "relu", "linear")})
    w_d = np.concatenate([np.eye(dim), np.eye(dim)], axis=1)
    mask = np.repeat(_circle_mask(side).reshape(-1), 3)
    w_c = np.zeros((2 * dim, dim))
    for p in range(dim):
        if mask[p]:
            w_c[p, p] = 1.0
        else:
            w_c[dim + p, p] = 1.0
    params = ParamBundle({"d": affine_params(w_d, np.zeros(2 * dim)),
                          "c": affine_params(w_c, np.zeros(dim))})
    return instantiate(arch, params), schema, arch


class TestCirclesMetrics:
    def test_perfect_model_zero_mae(self):
        model, schema, _ = circles_like_model(side=8)
        data = gen_circles_dataset(12, 8, 0)
        metrics = eval_circles_metrics(model, data,
                                       decompose=Path("AB", "AxB", ("d",)),
                                       compose=Path("AxB", "AB", ("c",)))
        assert np.array_equal(metrics.decomposition_mae, np.zeros(3))
        assert np.array_equal(metrics.composition_mae, np.zeros(3))

    def test_constant_gray_generator(self):
        side = 8
        dim = 3 * side * side
        model, schema, arch = circles_like_model(side)
        params = model.params.copy()
        params.tensors["d"] = affine_params(np.zeros((dim, 2 * dim)), np.full(2 * dim, 0.5))
        gray = instantiate(arch, params)
        data = gen_circles_dataset(600, side, 1)
        metrics = eval_circles_metrics(gray, data,
                                       decompose=Path("AB", "AxB", ("d",)),
                                       compose=Path("AxB", "AB", ("c",)))
        # colors uniform on [0,1]: E|u - 0.5| = 0.25 per channel
        assert np.all(np.abs(metrics.decomposition_mae - 0.25) < 0.03)

    def test_report_structure(self):
        model, schema, _ = circles_like_model(side=8)
        data = gen_circles_dataset(10, 8, 2)
        metrics = eval_circles_metrics(model, data,
                                       decompose=Path("AB", "AxB", ("d",)),
                                       compose=Path("AxB", "AB", ("c",)),
                                       n_samples=7)
        assert metrics.n_samples == 7
        for arr in (metrics.decomposition_mae, metrics.composition_mae,
                    metrics.decomposition_circle_mae, metrics.composition_stripe_mae):
            assert arr.shape == (3,)


class TestMaterialize:
    def test_product_too_large_rejected(self, rng):
        from schemalearn import product_dataset
        prod = product_dataset(FiniteSet(rng.random((40, 2))), FiniteSet(rng.random((40, 2))))
        with pytest.raises(DataError, match="cap"):
            _materialize(prod, "P", cap=100)
