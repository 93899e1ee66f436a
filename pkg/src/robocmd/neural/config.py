"""Model and training hyperparameters.

Embedding width, dropout, epoch budget, patience, and beam width follow the
training regime this parser targets; hidden sizes, batch size, learning rate
and Adam constants are declared defaults, recorded in every train report.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field


@dataclass(frozen=True)
class ModelConfig:
    tunable_embed_dim: int = 100
    frozen_embed_dim: int = 0  # 0 when no pretrained vector file is loaded
    encoder_hidden: int = 256  # per direction
    decoder_hidden: int = 256
    encoder_dropout: float = 0.1
    beam_width: int = 5
    max_decode_len: int = 80
    max_epochs: int = 150
    patience: int = 10
    batch_size: int = 32
    learning_rate: float = 1e-3
    adam_betas: tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        for name in (
            "tunable_embed_dim",
            "encoder_hidden",
            "decoder_hidden",
            "beam_width",
            "max_decode_len",
            "max_epochs",
            "patience",
            "batch_size",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.frozen_embed_dim < 0:
            raise ValueError("frozen_embed_dim must be >= 0")
        if not 0.0 <= self.encoder_dropout < 1.0:
            raise ValueError("encoder_dropout must be in [0, 1)")
        if isinstance(self.adam_betas, list):
            object.__setattr__(self, "adam_betas", tuple(self.adam_betas))

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelConfig":
        return cls(**json.loads(text))

    def replace(self, **kwargs) -> "ModelConfig":
        data = asdict(self)
        data.update(kwargs)
        return ModelConfig(**data)
