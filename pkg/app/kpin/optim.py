"""Adam optimizer over KpinParameters."""
from typing import Tuple

import numpy as np

from app.exceptions import ConfigurationError
from app.kpin.network import KpinParameters


class Adam:
    """Bias-corrected Adam; updates the parameter tensors in place."""

    def __init__(
        self,
        params: KpinParameters,
        lr: float = 1e-3,
        betas: Tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8
    ):
        if lr < 0:
            raise ConfigurationError(f"Learning rate must be non-negative, got {lr}")
        self.params = params
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.t = 0
        self.m = params.zeros_like()
        self.v = params.zeros_like()

    def step(self, grads: KpinParameters):
        self.t += 1
        beta1, beta2 = self.betas
        for name, p in self.params.items():
            g = grads[name]
            self.m[name][...] = beta1 * self.m[name] + (1 - beta1) * g
            self.v[name][...] = beta2 * self.v[name] + (1 - beta2) * (g * g)

            m_hat = self.m[name] / (1 - beta1 ** self.t)
            v_hat = self.v[name] / (1 - beta2 ** self.t)
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
