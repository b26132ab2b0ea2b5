"""Scikit-learn-style estimator facade over schema training.

CompositionalModel packs the whole pipeline behind fit/transform with
get_params/set_params, so a trained schema model can sit inside standard
tooling (cloning, grid search over gamma, pipelines whose steps transform
batches along a fixed path).
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .datasets import DatasetFunctor, FiniteSet, LatentSampler, ProductSource, TaskSpec
from .model import ArchAssignment, LayerSpec, eval_path
from .presets import derive_object_shapes
from .schema import Schema, parse_path, parse_schema
from .training import TrainingConfig, build_discriminators, train
from .validation import ValidationError, check_batch_matrix

__all__ = ["CompositionalModel"]


def _as_layer_spec(value, default_hidden="relu", default_out="linear") -> LayerSpec:
    if isinstance(value, LayerSpec):
        return value
    return LayerSpec(tuple(int(w) for w in value), default_hidden, default_out)


class CompositionalModel(BaseEstimator):
    """Jointly trains one network per schema generator under adversarial
    plus path-equivalence losses.

    Parameters
    ----------
    schema : str or Schema
        Schema text (objects, generators, equations) or a parsed Schema.
    arch : dict
        Generator name -> LayerSpec or width tuple. Endpoint widths fix
        the object dimensions.
    discs : dict
        Object name -> LayerSpec or width tuple ending in 1, for every
        object that is the codomain of a generator.
    path : str, optional
        Default path evaluated by transform(), e.g. ``"f"`` or ``"f;g"``.
    Remaining parameters mirror TrainingConfig fields.
    """

    def __init__(self, schema="", arch=None, discs=None, path=None,
                 gamma=1.0, identity_weight=0.0, lr=1e-4, beta1=0.5, beta2=0.9,
                 eps_adam=1e-8, batch=32, n_critic_warm=50, warm_steps=50,
                 n_critic=5, total_steps=100, clip_bound=0.01, seed=0,
                 init_std=0.01, ckpt_interval=0, patheq_stopgrad=False):
        self.schema = schema
        self.arch = arch
        self.discs = discs
        self.path = path
        self.gamma = gamma
        self.identity_weight = identity_weight
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps_adam = eps_adam
        self.batch = batch
        self.n_critic_warm = n_critic_warm
        self.warm_steps = warm_steps
        self.n_critic = n_critic
        self.total_steps = total_steps
        self.clip_bound = clip_bound
        self.seed = seed
        self.init_std = init_std
        self.ckpt_interval = ckpt_interval
        self.patheq_stopgrad = patheq_stopgrad

    def _config(self) -> TrainingConfig:
        return TrainingConfig(
            gamma=self.gamma, identity_weight=self.identity_weight, lr=self.lr,
            beta1=self.beta1, beta2=self.beta2, eps_adam=self.eps_adam,
            batch=self.batch, n_critic_warm=self.n_critic_warm,
            warm_steps=self.warm_steps, n_critic=self.n_critic,
            total_steps=self.total_steps, clip_bound=self.clip_bound,
            seed=self.seed, init_std=self.init_std,
            ckpt_interval=self.ckpt_interval, patheq_stopgrad=self.patheq_stopgrad,
        )

    def fit(self, X, y=None):
        """Train on per-object data.

        X maps every schema object to either an [n, dim] array (finite
        set), an int (latent dimension), or a ready-made source object.
        Returns self.
        """
        schema = self.schema if isinstance(self.schema, Schema) else parse_schema(self.schema)
        if not self.arch:
            raise ValidationError("CompositionalModel needs an arch mapping")
        arch_specs = {name: _as_layer_spec(spec) for name, spec in self.arch.items()}
        shapes = derive_object_shapes(schema, arch_specs)
        sources = {}
        for obj in schema.objects:
            if obj not in X:
                raise ValidationError(f"fit: no data for object {obj!r}")
            value = X[obj]
            if isinstance(value, (FiniteSet, LatentSampler, ProductSource)):
                sources[obj] = value
            elif isinstance(value, int):
                sources[obj] = LatentSampler(value)
            else:
                sources[obj] = FiniteSet(np.asarray(value, dtype=np.float64))
            dim = sources[obj].dim
            if obj in shapes and shapes[obj] != (dim,):
                raise ValidationError(
                    f"object {obj!r}: data dim {dim} conflicts with arch dim {shapes[obj][0]}"
                )
            shapes.setdefault(obj, (dim,))
        arch = ArchAssignment(schema, shapes, arch_specs)
        disc_specs = {name: _as_layer_spec(spec, "leaky_relu", "linear")
                      for name, spec in (self.discs or {}).items()}
        config = self._config()
        discs = build_discriminators(schema, arch, disc_specs, config.clip_bound,
                                     config.seed, config.init_std)
        task = TaskSpec(schema, DatasetFunctor(sources))
        result = train(task, arch, discs, config)
        self.schema_ = schema
        self.arch_ = arch
        self.task_ = task
        self.result_ = result
        self.model_ = result.final_model(arch)
        return self

    def transform(self, X, path: str | None = None) -> np.ndarray:
        """Evaluate a schema path on a batch of samples."""
        if not hasattr(self, "model_"):
            raise ValidationError("CompositionalModel is not fitted yet")
        text = path or self.path
        if text is None:
            gens = self.schema_.generators
            if len(gens) != 1:
                raise ValidationError("transform: pass path=... (schema has several generators)")
            text = gens[0].name
        parsed = parse_path(self.schema_, text)
        batch = check_batch_matrix(X, self.arch_.object_dim(parsed.src), "X")
        return eval_path(self.model_, parsed, batch)

    def predict(self, X, path: str | None = None) -> np.ndarray:
        return self.transform(X, path)
