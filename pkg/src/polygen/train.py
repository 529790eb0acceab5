"""Adversarial training loop for the synthetic-manifold experiments.

Alternating optimization, one discriminator step per generator step, with
the non-saturating loss:

* discriminator minimizes ``softplus(-D(x)) + softplus(D(G(z)))``
* generator minimizes ``softplus(-D(G(z)))``

Both networks use Adam.  All randomness flows from one counter-based
generator family (Philox) keyed off the config seed, with separate
substreams for parameter init, data, latents, and the fixed evaluation
batch, so two runs with the same config are bitwise identical.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tape
from .manifolds import ManifoldSpec, MANIFOLD_IDS, coverage, default_latent_dim, residuals, sample_rng
from .nets import Adam, Discriminator, Generator, GeneratorKind, VARIANTS

EVAL_BATCH = 512


class TrainingDiverged(RuntimeError):
    """Raised when a loss stops being finite; carries the step index."""

    def __init__(self, step: int, what: str):
        super().__init__(f"training diverged at step {step}: {what}")
        self.step = step


@dataclass
class TrainConfig:
    """Everything a run needs; defaults follow the synthetic experiments."""

    manifold: str
    variant: str
    n_order: int
    width: int
    steps: int = 20000
    batch: int = 128
    lr_g: float = 1e-4
    lr_d: float = 1e-4
    adam_betas: tuple = (0.5, 0.999)
    seed: int = 0
    latent_dim: int | None = None
    disc_widths: tuple = (64, 64, 64)
    omega: int | None = None
    b_identity: bool = True
    global_transform: str = "affine"
    out_head: str = "linear"
    eval_every: int = 100
    sample_n: int = 2000
    alpha: float = 1.0
    noise: float = 0.05
    astroid_full: bool = False

    def __post_init__(self):
        if self.manifold not in MANIFOLD_IDS:
            raise ValueError(f"unknown manifold {self.manifold!r}")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        for name in ("n_order", "width", "steps", "batch", "eval_every"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.lr_g <= 0 or self.lr_d <= 0:
            raise ValueError("learning rates must be positive")
        if self.latent_dim is None:
            self.latent_dim = default_latent_dim(self.manifold)
        self.adam_betas = tuple(self.adam_betas)
        self.disc_widths = tuple(self.disc_widths)

    def manifold_spec(self) -> ManifoldSpec:
        return ManifoldSpec(id=self.manifold, alpha=self.alpha, noise=self.noise, astroid_full=self.astroid_full)

    def generator_kind(self) -> GeneratorKind:
        return GeneratorKind(
            variant=self.variant,
            n_order=self.n_order,
            width=self.width,
            omega=self.omega,
            global_transform=self.global_transform,
            b_identity=self.b_identity,
            out_head=self.out_head,
        )


@dataclass
class TrainResult:
    generator: Generator
    discriminator: Discriminator
    history: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


def _streams(seed: int) -> dict:
    names = ("init_g", "init_d", "data", "latent", "eval", "mean_probe")
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {name: np.random.Generator(np.random.Philox(ss)) for name, ss in zip(names, children)}

# size of the real-data probe used to center the generator's output bias
MEAN_PROBE = 512


def gan_train(cfg: TrainConfig, progress=None) -> TrainResult:
    """Run the adversarial loop and return the trained nets plus history.

    `progress`, if given, is called as ``progress(step, record)`` at every
    evaluation point.  Raises :class:`TrainingDiverged` on non-finite loss.
    """
    spec = cfg.manifold_spec()
    streams = _streams(cfg.seed)
    gen = Generator(cfg.generator_kind(), cfg.latent_dim, spec.dim, streams["init_g"])
    # start the output bias at the data mean so the initial sample cloud sits
    # centered on the target instead of at the origin (an edge of some ranges)
    gen.store.set_("beta", sample_rng(spec, MEAN_PROBE, streams["mean_probe"]).mean(axis=0))
    disc = Discriminator(spec.dim, cfg.disc_widths, rng=streams["init_d"])
    opt_g = Adam(gen.store, lr=cfg.lr_g, betas=cfg.adam_betas)
    opt_d = Adam(disc.store, lr=cfg.lr_d, betas=cfg.adam_betas)
    z_eval = streams["eval"].standard_normal((EVAL_BATCH, cfg.latent_dim))

    history = []
    for step in range(1, cfg.steps + 1):
        # discriminator step: fresh real batch vs detached fakes
        real = sample_rng(spec, cfg.batch, streams["data"])
        z = streams["latent"].standard_normal((cfg.batch, cfg.latent_dim))
        fake = gen.generate(z)
        tape_d = Tape()
        logit_real = disc.logits(tape_d, real)
        logit_fake = disc.logits(tape_d, fake)
        loss_d = ad.add(ad.mean_(ad.softplus(ad.neg(logit_real))), ad.mean_(ad.softplus(logit_fake)))
        grads_d = ad.grad(loss_d, tape_d)
        opt_d.step(grads_d, prefix="d/")

        # generator step: backprop through the frozen-discriminator score
        z = streams["latent"].standard_normal((cfg.batch, cfg.latent_dim))
        tape_g = Tape()
        fake_node = gen.forward(tape_g, z)
        logit = disc.logits(tape_g, fake_node)
        loss_g = ad.mean_(ad.softplus(ad.neg(logit)))
        grads_g = ad.grad(loss_g, tape_g)
        opt_g.step(grads_g, prefix="g/")

        ld, lg = float(loss_d.value), float(loss_g.value)
        if not (np.isfinite(ld) and np.isfinite(lg)):
            raise TrainingDiverged(step, f"loss_d={ld}, loss_g={lg}")

        if step % cfg.eval_every == 0 or step == cfg.steps:
            pts = gen.generate(z_eval)
            res = residuals(spec, pts)
            record = {
                "step": step,
                "loss_d": ld,
                "loss_g": lg,
                "mean_residual": float(np.mean(res)),
                "coverage": coverage(spec, pts),
            }
            history.append(record)
            if progress is not None:
                progress(step, record)

    metadata = {
        "config": asdict(cfg),
        "rng": {"family": "philox", "seed": cfg.seed, "streams": ["init_g", "init_d", "data", "latent", "eval"]},
        "eval_batch": EVAL_BATCH,
    }
    return TrainResult(generator=gen, discriminator=disc, history=history, metadata=metadata)


def sample_generator(gen: Generator, n: int, seed: int) -> np.ndarray:
    """Draw n outputs from standard-Gaussian latents (deterministic)."""
    rng = np.random.Generator(np.random.Philox(seed))
    if n == 0:
        return np.zeros((0, gen.out_dim))
    z = rng.standard_normal((n, gen.latent_dim))
    return gen.generate(z)
