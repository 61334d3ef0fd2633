"""Graph attention scoring/classification model over bipartite MIP graphs.

Architecture: linear embeddings for variable and constraint nodes, L rounds
of two attention layers (constraints from variables, then variables from
constraints), gated global attention pooling over all nodes, and a two
layer fully connected head producing one scalar.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from ..encode import FEATURE_SCHEMA_VERSION, NUM_CONS_FEATURES, NUM_VAR_FEATURES, BipartiteGraph
from . import autograd as ag
from .autograd import Tensor

WEIGHTS_SCHEMA_VERSION = 1
_LEAKY_SLOPE = 0.2


class SchemaMismatchError(ValueError):
    """Feature or weights schema version does not match this model."""


@dataclass(frozen=True)
class HyperParams:
    hidden: int = 32
    heads: int = 4
    rounds: int = 2
    feature_schema_version: int = FEATURE_SCHEMA_VERSION


class ModelParams:
    """Named parameter tensors plus hyperparameters."""

    def __init__(self, hp: HyperParams, tensors: dict[str, Tensor]):
        self.hp = hp
        self.tensors = tensors

    def items(self):
        return self.tensors.items()

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def copy(self) -> "ModelParams":
        return ModelParams(self.hp, {k: Tensor(v.data.copy(), requires_grad=True) for k, v in self.items()})

    def zero_grad(self):
        for t in self.tensors.values():
            t.grad = None

    def to_json(self) -> bytes:
        doc = {
            "schema_version": WEIGHTS_SCHEMA_VERSION,
            "hyperparams": asdict(self.hp),
            "tensors": {k: v.data.tolist() for k, v in sorted(self.tensors.items())},
        }
        return (json.dumps(doc, sort_keys=True) + "\n").encode()

    @classmethod
    def from_json(cls, data: bytes) -> "ModelParams":
        doc = json.loads(data.decode("utf-8"))
        version = doc.get("schema_version")
        if version != WEIGHTS_SCHEMA_VERSION:
            raise SchemaMismatchError(f"weights schema version {version!r}, expected {WEIGHTS_SCHEMA_VERSION}")
        hp = HyperParams(**doc["hyperparams"])
        tensors = {k: Tensor(np.array(v), requires_grad=True) for k, v in doc["tensors"].items()}
        return cls(hp, tensors)


def _glorot(rng, fan_in, fan_out):
    scale = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-scale, scale, size=(fan_in, fan_out))


def init_params(seed: int, hp: HyperParams = HyperParams()) -> ModelParams:
    """Seeded deterministic initialization (Glorot uniform weights, zero biases)."""
    rng = np.random.default_rng(seed)
    h, K = hp.hidden, hp.heads
    t: dict[str, np.ndarray] = {}

    def linear(name, fan_in, fan_out):
        t[f"{name}.W"] = _glorot(rng, fan_in, fan_out)
        t[f"{name}.b"] = np.zeros((1, fan_out))

    linear("embed_var", NUM_VAR_FEATURES, h)
    linear("embed_cons", NUM_CONS_FEATURES, h)
    for r in range(hp.rounds):
        for direction in ("c_from_v", "v_from_c"):
            base = f"round{r}.{direction}"
            # heads side by side: column block k of W is head k's h->h map
            t[f"{base}.W"] = np.concatenate([_glorot(rng, h, h) for _ in range(K)], axis=1)
            t[f"{base}.a_src"] = np.stack([_glorot(rng, h, 1)[:, 0] for _ in range(K)])[None]
            t[f"{base}.a_dst"] = np.stack([_glorot(rng, h, 1)[:, 0] for _ in range(K)])[None]
            t[f"{base}.a_edge"] = _glorot(rng, 1, K)
            linear(f"{base}.proj", h * K, h)
            linear(f"{base}.self", h, h)
    linear("pool.gate", h, 1)
    linear("pool.transform", h, h)
    linear("head.fc1", h, h)
    linear("head.fc2", h, 1)
    return ModelParams(hp, {k: Tensor(v, requires_grad=True) for k, v in t.items()})


def gat_layer(
    params: ModelParams,
    base: str,
    h_src: Tensor,
    h_dst: Tensor,
    edge_src: np.ndarray,
    edge_dst: np.ndarray,
    edge_attr: np.ndarray,
) -> Tensor:
    """One multi-head attention layer aggregating source states into destinations.

    Per head: logits LeakyReLU(a . [W h_src || W h_dst || attr]) over each
    destination's incident edges, softmax, ELU of the weighted sum; heads are
    concatenated and projected back to the hidden width. Destinations with no
    incident edges pass through a learned self-transform instead.
    """
    hp = params.hp
    n_dst = h_dst.shape[0]
    h, K = hp.hidden, hp.heads
    attr = Tensor(edge_attr.reshape(-1, 1))

    Wsrc = ag.reshape(h_src @ params[f"{base}.W"], (-1, K, h))  # (n_src, K, h)
    Wdst = ag.reshape(h_dst @ params[f"{base}.W"], (-1, K, h))
    s_src = (Wsrc * params[f"{base}.a_src"]).sum(axis=2)  # (n_src, K)
    s_dst = (Wdst * params[f"{base}.a_dst"]).sum(axis=2)
    logits = ag.leaky_relu(
        ag.gather_rows(s_src, edge_src) + ag.gather_rows(s_dst, edge_dst) + attr * params[f"{base}.a_edge"],
        _LEAKY_SLOPE,
    )
    alpha = ag.segment_softmax(logits, edge_dst, n_dst)  # (E, K)
    msg = ag.reshape(alpha, (-1, K, 1)) * ag.gather_rows(Wsrc, edge_src)
    agg = ag.segment_sum(msg, edge_dst, n_dst)  # (n_dst, K, h)
    stacked = ag.reshape(ag.elu(agg), (n_dst, K * h))
    attended = stacked @ params[f"{base}.proj.W"] + params[f"{base}.proj.b"]

    isolated = np.ones((n_dst, 1))
    isolated[np.unique(edge_dst)] = 0.0
    if isolated.any():
        self_out = ag.elu(h_dst @ params[f"{base}.self.W"] + params[f"{base}.self.b"])
        return Tensor(1.0 - isolated) * attended + Tensor(isolated) * self_out
    return attended


def attention_pool(params: ModelParams, states: Tensor) -> Tensor:
    """Gated sum over node states: sum sigmoid(gate(h)) * tanh(transform(h))."""
    if states.shape[0] < 1:
        raise ValueError("attention_pool needs at least one node")
    gate = ag.sigmoid(states @ params["pool.gate.W"] + params["pool.gate.b"])
    transform = ag.tanh(states @ params["pool.transform.W"] + params["pool.transform.b"])
    return (gate * transform).sum(axis=0, keepdims=True)


def forward(params: ModelParams, graph: BipartiteGraph) -> Tensor:
    """Scalar prediction for one (instance, candidate) graph."""
    if graph.feature_schema_version != params.hp.feature_schema_version:
        raise SchemaMismatchError(
            f"graph feature schema {graph.feature_schema_version} does not match "
            f"model schema {params.hp.feature_schema_version}"
        )
    edge_src = graph.edges[:, 0].astype(np.int64)
    edge_dst = graph.edges[:, 1].astype(np.int64)
    edge_attr = graph.edges[:, 2]

    hv = Tensor(graph.var_features) @ params["embed_var.W"] + params["embed_var.b"]
    hc = Tensor(graph.cons_features) @ params["embed_cons.W"] + params["embed_cons.b"]
    for r in range(params.hp.rounds):
        hc = gat_layer(params, f"round{r}.c_from_v", hv, hc, edge_src, edge_dst, edge_attr)
        hv = gat_layer(params, f"round{r}.v_from_c", hc, hv, edge_dst, edge_src, edge_attr)
    pooled = attention_pool(params, ag.concat([hv, hc], axis=0))
    hidden = ag.elu(pooled @ params["head.fc1.W"] + params["head.fc1.b"])
    out = hidden @ params["head.fc2.W"] + params["head.fc2.b"]
    return out.sum()


def score(params: ModelParams, graph: BipartiteGraph) -> float:
    return forward(params, graph).item()
