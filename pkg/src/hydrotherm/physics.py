"""Constitutive laws for saturated porous media.

The model frame has z pointing up and gravity acting along -z, so the
hydrostatic pressure gradient is ``-rho_w * g * e_z`` and the Darcy flux is
``q = -k (grad p + rho_w g e_z)``.
"""

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError

LAMBDA_WATER = 0.6  # W/(m K)
MU_WATER = 1.0e-3  # Pa s
B_PORO_DEFAULT = 1.0e5  # Pa
MOBILITY_RTOL = 1e-10


@dataclass(frozen=True)
class FluidConstants:
    rho_w: float = 1000.0
    mu_w: float = MU_WATER
    c_w: float = 1.0e6
    g: float = 9.81

    def __post_init__(self):
        for name in ("rho_w", "mu_w", "c_w", "g"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ConfigurationError(f"fluid.{name} must be positive, got {value}")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class Material:
    """Hydrothermal properties of one geological layer.

    ``lambda_direct`` and ``cT_direct`` give effective bulk values and take
    precedence over the porosity mixture rule. Either the hydraulic
    conductivity ``K`` or the intrinsic permeability ``K_i`` must be given.
    """

    name: str
    lambda_s: float = 2.0
    lambda_w: float = LAMBDA_WATER
    porosity: float = 0.0
    c_s: float = 2.0e6
    K: Optional[float] = None
    K_i: Optional[float] = None
    B_poro: float = B_PORO_DEFAULT
    lambda_direct: Optional[float] = None
    cT_direct: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.porosity <= 1.0:
            raise ConfigurationError(f"material {self.name!r}: porosity must lie in [0, 1], got {self.porosity}")
        positive = ["lambda_s", "lambda_w", "c_s", "B_poro"]
        positive += [n for n in ("K", "K_i", "lambda_direct", "cT_direct") if getattr(self, n) is not None]
        for n in positive:
            value = getattr(self, n)
            if not np.isfinite(value) or value <= 0:
                raise ConfigurationError(f"material {self.name!r}: {n} must be positive, got {value}")
        if self.K is None and self.K_i is None:
            raise ConfigurationError(f"material {self.name!r}: one of K or K_i is required")

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigurationError(f"material: {exc}") from None


def effective_lambda(m):
    if m.lambda_direct is not None:
        return m.lambda_direct
    return (1.0 - m.porosity) * m.lambda_s + m.porosity * m.lambda_w


def effective_heat_capacity(m, f):
    if m.cT_direct is not None:
        return m.cT_direct
    return (1.0 - m.porosity) * m.c_s + m.porosity * f.c_w


def mobility(m, f):
    """Permeability over viscosity, in m^2/(Pa s)."""
    from_K = None if m.K is None else m.K / (f.rho_w * f.g)
    from_Ki = None if m.K_i is None else m.K_i / f.mu_w
    if from_K is not None and from_Ki is not None:
        if abs(from_K - from_Ki) > MOBILITY_RTOL * max(abs(from_K), abs(from_Ki)):
            raise ConfigurationError(
                f"material {m.name!r}: K={m.K} and K_i={m.K_i} imply different mobilities "
                f"({from_K:.6e} vs {from_Ki:.6e})"
            )
        return from_K
    return from_K if from_K is not None else from_Ki


def darcy_velocity(k, grad_p, f):
    """Darcy flux for mobility ``k`` and pressure gradient(s) ``grad_p``.

    ``grad_p`` may be a single 3-vector or an ``(n, 3)`` array.
    """
    grad_p = np.asarray(grad_p, dtype=float)
    driving = grad_p.copy()
    driving[..., 2] += f.rho_w * f.g
    return -k * driving


def thermal_front_speed(q, c_w, c_T):
    """Advection speed of a temperature front carried by Darcy flux ``q``."""
    if c_T <= 0:
        raise ConfigurationError(f"c_T must be positive, got {c_T}")
    return (c_w / c_T) * float(np.linalg.norm(np.atleast_1d(q)))
