"""Differentiable generators and discriminator for adversarial training.

The two factorized generators wire the recursions of
:mod:`polygen.models` onto a :class:`~polygen.autodiff.Tape`, batched
row-wise (inputs are ``(batch, d)``).  Two reference baselines share the
same per-layer shapes but alter the multiplicative junction:

* ``orig`` drops the junction entirely: the latent enters the first layer
  and everything after is a plain affine chain, so the whole map is affine
  in ``z``.
* ``concat`` replaces each elementwise product with concatenation; the
  running feature is ``2k`` wide and the mixing matrices are widened to
  accept it.

An optional global affine map of the latent (with or without a relu) is
composed in front of every variant.  For the activation-free synthetic
experiments the generators contain no nonlinearity anywhere; a tanh output
head exists as an opt-in flag only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Node, Tape

VARIANTS = ("model1", "model2", "orig", "concat")
GLOBAL_TRANSFORMS = ("none", "affine", "affine+relu")
OUT_HEADS = ("linear", "tanh")


@dataclass
class GeneratorKind:
    """Architecture selector: which wiring, at what order and width."""

    variant: str
    n_order: int
    width: int
    omega: int | None = None
    global_transform: str = "none"
    b_identity: bool = False
    out_head: str = "linear"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown generator variant {self.variant!r}, expected one of {VARIANTS}")
        if self.global_transform not in GLOBAL_TRANSFORMS:
            raise ValueError(f"unknown global transform {self.global_transform!r}")
        if self.out_head not in OUT_HEADS:
            raise ValueError(f"unknown output head {self.out_head!r}")
        if self.n_order < 1 or self.width < 1:
            raise ValueError("order and width must be >= 1")
        if self.omega is None:
            self.omega = self.width
        if self.b_identity and self.omega != self.width:
            raise ValueError("identity bias factors require omega == width")


class ParamStore:
    """Named parameters packed into one flat buffer; entries are views.

    Keeping every parameter a view into ``self.flat`` lets the optimizer
    update the whole network with a few vectorized operations while the
    forward pass still addresses parameters by name.
    """

    def __init__(self, arrays: dict):
        total = sum(a.size for a in arrays.values())
        self.flat = np.empty(total, dtype=np.float64)
        self.slices = {}
        self.views = {}
        offset = 0
        for name, a in arrays.items():
            a = np.asarray(a, dtype=np.float64)
            sl = slice(offset, offset + a.size)
            self.flat[sl] = a.ravel()
            self.slices[name] = (sl, a.shape)
            self.views[name] = self.flat[sl].reshape(a.shape)
            offset += a.size

    def flatten_grads(self, grads: dict, prefix: str = "") -> np.ndarray:
        out = np.empty_like(self.flat)
        for name, (sl, _) in self.slices.items():
            out[sl] = grads[prefix + name].ravel()
        return out

    def set_(self, name: str, value) -> None:
        """Copy `value` into the named parameter (keeps the view alive)."""
        sl, shape = self.slices[name]
        value = np.asarray(value, dtype=np.float64)
        if value.shape != shape:
            raise ValueError(f"array {name!r} has shape {value.shape}, expected {shape}")
        self.flat[sl] = value.ravel()


class Generator:
    """Parameter store plus tape-forward for one generator variant.

    Parameters live in ``self.arrays`` (name -> ndarray views into one
    flat buffer, updated in place by the optimizer).  With ``b_identity``
    the bias factors are fixed identities and are not stored at all; the
    bias path collapses to the raw bias-input vectors.
    """

    def __init__(self, kind: GeneratorKind, latent_dim: int, out_dim: int, rng: np.random.Generator):
        self.kind = kind
        self.latent_dim = latent_dim
        self.out_dim = out_dim
        self.arrays: dict = {}
        self._init_params(rng)
        self.store = ParamStore(self.arrays)
        self.arrays = self.store.views

    def _init_params(self, rng):
        kind = self.kind
        d, o, k, w, n = self.latent_dim, self.out_dim, kind.width, kind.omega, kind.n_order
        sd = 1.0 / np.sqrt(k)
        sb = 1.0 / np.sqrt(w)
        run_width = 2 * k if kind.variant == "concat" else k

        if kind.global_transform != "none":
            self.arrays["GW"] = (1.0 / np.sqrt(d)) * rng.standard_normal((d, d))
            self.arrays["Gc"] = np.zeros(d)
        self.arrays["C"] = sd * rng.standard_normal((o, run_width))
        self.arrays["beta"] = np.zeros(o)

        if kind.variant == "model1":
            for i in range(1, n + 1):
                self.arrays[f"U{i}"] = sd * rng.standard_normal((d, k))
            return

        a_layers = range(1, n + 1) if kind.variant != "orig" else range(1, 2)
        for i in a_layers:
            self.arrays[f"A{i}"] = sd * rng.standard_normal((d, k))
        for i in range(2, n + 1):
            self.arrays[f"S{i}"] = sd * rng.standard_normal((k, run_width))
        for i in range(1, n + 1):
            if not kind.b_identity:
                self.arrays[f"B{i}"] = sb * rng.standard_normal((w, k))
            self.arrays[f"b{i}"] = np.ones(w)

    def _nodes(self, tape: Tape, prefix: str = "g/") -> dict:
        return {name: tape.param(prefix + name, arr) for name, arr in self.arrays.items()}

    def _bias_path(self, p: dict, i: int) -> Node:
        # B_i^T b_i as a width-k vector node; identity factors collapse to b_i
        if self.kind.b_identity:
            return p[f"b{i}"]
        return ad.matmul(p[f"b{i}"], p[f"B{i}"])

    def forward(self, tape: Tape, z, prefix: str = "g/") -> Node:
        """Batched forward pass; `z` is ``(batch, latent_dim)``."""
        z = np.atleast_2d(np.asarray(z, dtype=np.float64))
        if z.shape[1] != self.latent_dim:
            raise ValueError(f"latent batch has width {z.shape[1]}, expected {self.latent_dim}")
        p = self._nodes(tape, prefix)
        v = tape.constant(z)
        if self.kind.global_transform != "none":
            v = ad.add(ad.matmul(v, p["GW"]), p["Gc"])
            if self.kind.global_transform == "affine+relu":
                v = ad.relu(v)

        n = self.kind.n_order
        if self.kind.variant == "model1":
            kappa = ad.matmul(v, p["U1"])
            for i in range(2, n + 1):
                kappa = ad.add(kappa, ad.mul(ad.matmul(v, p[f"U{i}"]), kappa))
        elif self.kind.variant == "model2":
            kappa = ad.mul(self._bias_path(p, 1), ad.matmul(v, p["A1"]))
            for i in range(2, n + 1):
                pre = ad.add(ad.matmul(kappa, ad.transpose(p[f"S{i}"])), self._bias_path(p, i))
                kappa = ad.mul(pre, ad.matmul(v, p[f"A{i}"]))
        elif self.kind.variant == "orig":
            kappa = ad.add(ad.matmul(v, p["A1"]), self._bias_path(p, 1))
            for i in range(2, n + 1):
                kappa = ad.add(ad.matmul(kappa, ad.transpose(p[f"S{i}"])), self._bias_path(p, i))
        else:  # concat
            batch = z.shape[0]
            k = self.kind.width
            first = ad.broadcast_to(self._bias_path(p, 1), (batch, k))
            kappa = ad.concat([first, ad.matmul(v, p["A1"])], axis=1)
            for i in range(2, n + 1):
                pre = ad.add(ad.matmul(kappa, ad.transpose(p[f"S{i}"])), self._bias_path(p, i))
                kappa = ad.concat([pre, ad.matmul(v, p[f"A{i}"])], axis=1)

        out = ad.add(ad.matmul(kappa, ad.transpose(p["C"])), p["beta"])
        if self.kind.out_head == "tanh":
            out = ad.tanh(out)
        return out

    def generate(self, z) -> np.ndarray:
        """Forward pass on a throwaway tape, returning plain values."""
        return self.forward(Tape(), z).value


class Discriminator:
    """Small MLP scoring points: leaky-relu hidden layers, logit output.

    The sigmoid head is applied by :meth:`predict_proba`; losses consume
    the raw logit through a stable softplus formulation, which is the same
    function composed differently.
    """

    def __init__(self, in_dim: int, widths=(64, 64, 64), leak: float = 0.2, rng: np.random.Generator | None = None):
        if rng is None:
            rng = np.random.default_rng(0)
        self.leak = leak
        self.arrays = {}
        sizes = [in_dim] + list(widths) + [1]
        for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:]), start=1):
            self.arrays[f"W{i}"] = rng.standard_normal((fan_in, fan_out)) / np.sqrt(fan_in)
            self.arrays[f"c{i}"] = np.zeros(fan_out)
        self.n_layers = len(sizes) - 1
        self.store = ParamStore(self.arrays)
        self.arrays = self.store.views

    def logits(self, tape: Tape, x, prefix: str = "d/") -> Node:
        # a second call on the same tape reuses the registered parameters
        if prefix + "W1" in tape.params:
            p = {name: tape.params[prefix + name] for name in self.arrays}
        else:
            p = {name: tape.param(prefix + name, arr) for name, arr in self.arrays.items()}
        h = x if isinstance(x, Node) else tape.constant(np.atleast_2d(np.asarray(x, dtype=np.float64)))
        for i in range(1, self.n_layers + 1):
            h = ad.add(ad.matmul(h, p[f"W{i}"]), p[f"c{i}"])
            if i < self.n_layers:
                h = ad.leaky_relu(h, self.leak)
        return h

    def predict_proba(self, x) -> np.ndarray:
        return ad.sigmoid(self.logits(Tape(), x)).value[:, 0]


class Adam:
    """Standard Adam with bias correction over one flat parameter buffer."""

    def __init__(self, store: ParamStore, lr: float = 1e-4, betas=(0.5, 0.999), eps: float = 1e-8):
        self.store = store
        self.lr = lr
        self.b1, self.b2 = betas
        self.eps = eps
        self.t = 0
        self.m = np.zeros_like(store.flat)
        self.v = np.zeros_like(store.flat)

    def step(self, grads: dict, prefix: str = "") -> None:
        g = self.store.flatten_grads(grads, prefix)
        self.t += 1
        self.m *= self.b1
        self.m += (1 - self.b1) * g
        self.v *= self.b2
        self.v += (1 - self.b2) * (g * g)
        m_hat = self.m / (1 - self.b1**self.t)
        v_hat = self.v / (1 - self.b2**self.t)
        self.store.flat -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def build_generator(kind: GeneratorKind, latent_dim: int, out_dim: int, rng: np.random.Generator) -> Generator:
    """Construct a generator of the requested kind (validates the variant)."""
    return Generator(kind, latent_dim, out_dim, rng)
