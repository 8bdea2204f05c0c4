"""Layer cost records for teacher/student transformers and the cut-layer workload split.

Workload numbers come from the usual dense-transformer estimate, per sample at
the reference sequence length ``s`` with hidden width ``h``:

* block forward FLOPs: ``24*s*h**2 + 4*s**2*h`` (QKV/output projections, a 4h MLP,
  and the two attention matmuls);
* block parameters: ``12*h**2`` weights;
* embedding: a table lookup, ``s*h`` FLOPs, ``vocab*h`` weights;
* head: ``2*s*h*vocab`` FLOPs, ``vocab*h`` weights;
* backward pass: twice the forward FLOPs unless a layer overrides it.

Activations crossing a block boundary are ``s*h`` values at ``precision_bytes`` each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping


@dataclass(frozen=True)
class LayerProfile:
    flops_forward: float
    flops_backward: float | None = None
    param_bytes: int = 0
    activation_bytes_per_sample: int = 0

    def __post_init__(self) -> None:
        if self.flops_backward is None:
            object.__setattr__(self, "flops_backward", 2.0 * self.flops_forward)
        for name in ("flops_forward", "flops_backward", "param_bytes", "activation_bytes_per_sample"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"LayerProfile.{name} must be finite and >= 0, got {value!r}")

    @property
    def flops_train(self) -> float:
        return self.flops_forward + self.flops_backward


@dataclass(frozen=True)
class ModelProfile:
    name: str
    embedding: LayerProfile
    blocks: tuple[LayerProfile, ...]
    head: LayerProfile
    # Construction parameters, kept so a profile can be written back to config.
    spec: Mapping[str, Any] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if not self.blocks:
            raise ValueError(f"model {self.name!r} needs at least one block")

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    @property
    def max_cut(self) -> int:
        return self.num_blocks - 1


@dataclass(frozen=True)
class CutPlan:
    cut_index: int
    gpu_frequency_hz: float

    def validate(self, student: ModelProfile, freq_min_hz: float | None = None,
                 freq_max_hz: float | None = None) -> None:
        check_cut(student, self.cut_index)
        if not self.gpu_frequency_hz > 0:
            raise ValueError(f"gpu_frequency_hz must be positive, got {self.gpu_frequency_hz!r}")
        if freq_min_hz is not None and self.gpu_frequency_hz < freq_min_hz:
            raise ValueError(f"gpu_frequency_hz {self.gpu_frequency_hz:g} below server minimum {freq_min_hz:g}")
        if freq_max_hz is not None and self.gpu_frequency_hz > freq_max_hz:
            raise ValueError(f"gpu_frequency_hz {self.gpu_frequency_hz:g} above server maximum {freq_max_hz:g}")


@dataclass(frozen=True)
class WorkloadSplit:
    """Per-batch FLOPs and traffic for one cut.

    ``device_flops``/``server_flops`` are the per-batch totals; the forward and
    backward parts are kept separate because they land in different phases.
    """

    device_forward_flops: float
    device_backward_flops: float
    server_flops: float
    smashed_bytes_up: int
    gradient_bytes_down: int
    device_param_bytes_up: int
    smashed_compressible_bytes: float = 0.0

    @property
    def device_flops(self) -> float:
        return self.device_forward_flops + self.device_backward_flops


def check_cut(student: ModelProfile, cut_index: int) -> None:
    if isinstance(cut_index, bool) or not isinstance(cut_index, int):
        raise TypeError(f"cut_index must be an int, got {type(cut_index).__name__}")
    if not 1 <= cut_index <= student.max_cut:
        raise ValueError(f"cut_index {cut_index} outside 1..{student.max_cut} for {student.name!r}")


def block_flops_forward(hidden_dim: int, seq_len: int) -> float:
    return float(24 * seq_len * hidden_dim**2 + 4 * seq_len**2 * hidden_dim)


def build_transformer_profile(
    hidden_dim: int,
    num_blocks: int,
    seq_len: int,
    vocab: int,
    precision_bytes: int,
    name: str = "transformer",
    overrides: Mapping[int, Mapping[str, float]] | None = None,
) -> ModelProfile:
    """Build a uniform-width transformer profile.

    ``overrides`` maps a zero-based block index to replacement field values,
    e.g. ``{0: {"flops_backward": 3e10}}``.
    """
    args = dict(hidden_dim=hidden_dim, num_blocks=num_blocks, seq_len=seq_len,
                vocab=vocab, precision_bytes=precision_bytes)
    for key, value in args.items():
        if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
            raise ValueError(f"{key} must be a positive integer, got {value!r}")

    act = seq_len * hidden_dim * precision_bytes
    block = LayerProfile(
        flops_forward=block_flops_forward(hidden_dim, seq_len),
        param_bytes=12 * hidden_dim**2 * precision_bytes,
        activation_bytes_per_sample=act,
    )
    blocks = [block] * num_blocks
    for idx, fields in (overrides or {}).items():
        if not 0 <= int(idx) < num_blocks:
            raise ValueError(f"override for block {idx} outside 0..{num_blocks - 1}")
        unknown = set(fields) - {"flops_forward", "flops_backward", "param_bytes", "activation_bytes_per_sample"}
        if unknown:
            raise ValueError(f"unknown layer override fields {sorted(unknown)}")
        base = blocks[int(idx)]
        updates = dict(fields)
        if "flops_forward" in updates and "flops_backward" not in updates:
            updates["flops_backward"] = 2.0 * float(updates["flops_forward"])
        blocks[int(idx)] = replace(base, **updates)

    embedding = LayerProfile(
        flops_forward=float(seq_len * hidden_dim),
        param_bytes=vocab * hidden_dim * precision_bytes,
        activation_bytes_per_sample=act,
    )
    head = LayerProfile(
        flops_forward=float(2 * seq_len * hidden_dim * vocab),
        param_bytes=vocab * hidden_dim * precision_bytes,
        activation_bytes_per_sample=seq_len * vocab * precision_bytes,
    )
    spec = dict(args, name=name)
    if overrides:
        spec["overrides"] = {int(k): dict(v) for k, v in overrides.items()}
    return ModelProfile(name=name, embedding=embedding, blocks=tuple(blocks), head=head, spec=spec)


def split_workload(
    student: ModelProfile,
    teacher: ModelProfile,
    plan: CutPlan,
    batch_size: int,
    precision_bytes: int = 2,
    activation_compression_ratio: float = 1.0,
) -> WorkloadSplit:
    """Per-batch device/server FLOPs and link payloads for ``plan.cut_index``.

    The device runs the frozen teacher embedding (forward only) plus the
    student embedding and blocks ``1..c`` (forward and backward). The server
    runs the remaining teacher layers forward only and trains student blocks
    ``c+1..N`` and the head.

    ``precision_bytes`` is accepted for interface symmetry; byte counts come
    from the profiles, which already carry their numeric precision.
    """
    check_cut(student, plan.cut_index)
    if isinstance(batch_size, bool) or not isinstance(batch_size, int) or batch_size <= 0:
        raise ValueError(f"batch_size must be a positive integer, got {batch_size!r}")
    if not 0 < activation_compression_ratio <= 1:
        raise ValueError(f"activation_compression_ratio must be in (0, 1], got {activation_compression_ratio!r}")
    if precision_bytes <= 0:
        raise ValueError("precision_bytes must be positive")

    c = plan.cut_index
    device_side = student.blocks[:c]
    server_side = student.blocks[c:]

    dev_fwd = (teacher.embedding.flops_forward + student.embedding.flops_forward
               + sum(b.flops_forward for b in device_side))
    dev_bwd = student.embedding.flops_backward + sum(b.flops_backward for b in device_side)
    srv = (sum(b.flops_forward for b in teacher.blocks) + teacher.head.flops_forward
           + sum(b.flops_train for b in server_side) + student.head.flops_train)

    boundary = student.blocks[c - 1].activation_bytes_per_sample
    compressible = batch_size * boundary * activation_compression_ratio
    smashed = math.ceil(compressible) + batch_size * teacher.embedding.activation_bytes_per_sample

    return WorkloadSplit(
        device_forward_flops=batch_size * dev_fwd,
        device_backward_flops=batch_size * dev_bwd,
        server_flops=batch_size * srv,
        smashed_bytes_up=smashed,
        gradient_bytes_down=batch_size * boundary,
        device_param_bytes_up=student.embedding.param_bytes + sum(b.param_bytes for b in device_side),
        smashed_compressible_bytes=compressible,
    )


def total_train_flops(student: ModelProfile, teacher: ModelProfile, batch_size: int) -> float:
    """Cut-independent per-batch FLOP total that every split must conserve."""
    per_sample = (teacher.embedding.flops_forward + sum(b.flops_forward for b in teacher.blocks)
                  + teacher.head.flops_forward + student.embedding.flops_train
                  + sum(b.flops_train for b in student.blocks) + student.head.flops_train)
    return batch_size * per_sample


def profile_from_config(cfg: Mapping[str, Any]) -> ModelProfile:
    """Build a profile from its config mapping (name, dims, block count, overrides)."""
    allowed = {"name", "hidden_dim", "num_blocks", "seq_len", "vocab", "precision_bytes", "overrides"}
    unknown = set(cfg) - allowed
    if unknown:
        raise ValueError(f"unknown model keys {sorted(unknown)}")
    missing = allowed - {"overrides"} - set(cfg)
    if missing:
        raise ValueError(f"missing model keys {sorted(missing)}")
    overrides = {int(k): v for k, v in (cfg.get("overrides") or {}).items()}
    return build_transformer_profile(
        hidden_dim=cfg["hidden_dim"], num_blocks=cfg["num_blocks"], seq_len=cfg["seq_len"],
        vocab=cfg["vocab"], precision_bytes=cfg["precision_bytes"], name=str(cfg["name"]),
        overrides=overrides or None,
    )


def profile_to_config(profile: ModelProfile) -> dict[str, Any]:
    if profile.spec is None:
        raise ValueError(f"profile {profile.name!r} was not built from config parameters")
    out = {k: profile.spec[k] for k in ("name", "hidden_dim", "num_blocks", "seq_len", "vocab", "precision_bytes")}
    if profile.spec.get("overrides"):
        out["overrides"] = {int(k): dict(v) for k, v in profile.spec["overrides"].items()}
    return out
