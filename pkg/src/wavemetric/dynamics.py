"""Spectrally truncated PDE evolution on a graph.

Everything is analytic in the eigenbasis: a damped wave mode evolves as
``cos(lam t) exp(-eps lam t)`` and a first-order equation with symbol p as
``exp(p(lam) t)``, so no time-stepping error enters.  Fields store both the
solution and its exact time derivative, complex-valued always (real symbols
simply carry zero imaginary parts).
"""

import struct
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import IsolatedVertexError, UnstableSymbolError, ValidationError
from .graphs import WeightedGraph
from .spectral import EigenBasis

# real-part growth beyond exp(50) over the horizon is rejected
STABILITY_EXPONENT = 50.0


def _heat_p(lam: np.ndarray) -> np.ndarray:
    return -lam.astype(np.complex128) ** 2


def _airy_p(lam: np.ndarray) -> np.ndarray:
    return 1j * lam.astype(np.complex128) ** 3


def _schrodinger_p(lam: np.ndarray) -> np.ndarray:
    return 1j * lam.astype(np.complex128)


_BUILTIN_P = {"heat": _heat_p, "airy": _airy_p, "schrodinger": _schrodinger_p}


@dataclass(frozen=True)
class SymbolSpec:
    """The PDE being simulated.

    ``kind="wave"`` is the second-order attenuated wave equation with damping
    ``attenuation >= 0``.  ``kind="first_order"`` evolves ``u_t = D u`` with
    per-frequency multiplier ``p(lam)``; builtins are heat ``-lam^2``, airy
    ``i lam^3`` and schrodinger ``i lam``.
    """

    kind: str
    attenuation: float = 0.0
    name: str = "wave"
    p: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind not in ("wave", "first_order"):
            raise ValidationError(f"kind must be 'wave' or 'first_order', got {self.kind!r}")
        if self.kind == "wave":
            if self.attenuation < 0:
                raise ValidationError(f"attenuation must be >= 0, got {self.attenuation}")
        else:
            if self.p is None:
                raise ValidationError("first_order symbol needs a multiplier p")
            p0 = complex(np.asarray(self.p(np.zeros(1)))[0])
            if p0.real > 0:
                raise ValidationError(
                    f"p(0) = {p0} has positive real part: the constant mode blows up"
                )

    def multipliers(self, lam: np.ndarray) -> np.ndarray:
        if self.kind != "first_order":
            raise ValidationError("multipliers are defined for first_order symbols only")
        return np.asarray(self.p(lam), dtype=np.complex128)


def wave_symbol(attenuation: float = 0.0) -> SymbolSpec:
    return SymbolSpec(kind="wave", attenuation=attenuation, name="wave")


def heat_symbol() -> SymbolSpec:
    return SymbolSpec(kind="first_order", name="heat", p=_heat_p)


def airy_symbol() -> SymbolSpec:
    return SymbolSpec(kind="first_order", name="airy", p=_airy_p)


def schrodinger_symbol() -> SymbolSpec:
    return SymbolSpec(kind="first_order", name="schrodinger", p=_schrodinger_p)


def first_order_symbol(p: Callable[[np.ndarray], np.ndarray], name: str = "custom") -> SymbolSpec:
    return SymbolSpec(kind="first_order", name=name, p=p)


def symbol_by_name(name: str, attenuation: float = 0.0) -> SymbolSpec:
    """Resolve a CLI-style symbol name: wave, heat, airy or schrodinger."""
    if name == "wave":
        return wave_symbol(attenuation)
    if name in _BUILTIN_P:
        return SymbolSpec(kind="first_order", name=name, p=_BUILTIN_P[name])
    raise ValidationError(f"unknown symbol {name!r}")


@dataclass(frozen=True)
class TimeGrid:
    """Uniform samples t_m = m T / (M - 1) on [0, T]."""

    horizon: float
    samples: int

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValidationError(f"horizon must be positive, got {self.horizon}")
        if self.samples < 2:
            raise ValidationError(f"need at least 2 samples, got {self.samples}")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.samples)

    @property
    def dt(self) -> float:
        return self.horizon / (self.samples - 1)

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.samples, self.dt)
        w[0] = w[-1] = 0.5 * self.dt
        return w


@dataclass(frozen=True)
class InitialDatum:
    """A length-n starting configuration attached to a source vertex."""

    source: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1:
            raise ValidationError(f"values must be 1-d, got shape {vals.shape}")
        if np.any(np.isnan(vals)):
            raise ValidationError("values contain NaN")
        if not np.any(vals != 0):
            raise ValidationError("values are identically zero")
        object.__setattr__(self, "values", vals)


def dirac_datum(n: int, v: int) -> InitialDatum:
    """Standard basis vector at ``v`` (a point mass under counting measure)."""
    if not 0 <= v < n:
        raise ValidationError(f"vertex {v} out of range for n={n}")
    values = np.zeros(n)
    values[v] = 1.0
    return InitialDatum(source=v, values=values)


def initial_datum(graph: WeightedGraph, v: int, include_self: bool = True) -> InitialDatum:
    """Mollified point source: the affinity row of ``v``.

    With ``include_self`` (default) the source's own entry is set to 1, the
    kernel value at distance zero, so the source dominates its neighbourhood;
    pass False to keep the stored row literally (zero at ``v``).
    """
    if not 0 <= v < graph.n:
        raise ValidationError(f"vertex {v} out of range for n={graph.n}")
    row = graph.weights[v]
    if not np.any(row != 0):
        raise IsolatedVertexError(f"isolated source {v}")
    values = row.copy()
    if include_self:
        values[v] = 1.0
    return InitialDatum(source=v, values=values)


@dataclass(frozen=True)
class WaveField:
    """Time-sampled solution ``u[m, x]`` and derivative ``ut[m, x]`` for one source."""

    source: int
    u: np.ndarray
    ut: np.ndarray

    @property
    def samples(self) -> int:
        return self.u.shape[0]

    @property
    def n(self) -> int:
        return self.u.shape[1]

    def is_real(self) -> bool:
        return not (np.any(self.u.imag) or np.any(self.ut.imag))


def propagate(
    basis: EigenBasis,
    f: InitialDatum,
    symbol: SymbolSpec,
    grid: TimeGrid,
    drop_constant_mode: bool = False,
) -> WaveField:
    """Evolve ``f`` under ``symbol``, truncated to the basis modes.

    Per mode n with coefficient ``c_n = <f, phi_n>``:

      wave:        u_n(t) = cos(lam_n t) exp(-eps lam_n t) c_n
                   u_n'(t) = (-lam_n sin(lam_n t) - eps lam_n cos(lam_n t))
                             exp(-eps lam_n t) c_n
      first order: u_n(t) = exp(p(lam_n) t) c_n,  u_n'(t) = p(lam_n) u_n(t)

    and ``u(t, x) = sum_n u_n(t) phi_n(x)``.  ``drop_constant_mode`` zeroes
    the coefficient of the first (constant on connected graphs) mode.
    """
    if basis.n != f.values.shape[0]:
        raise ValidationError(
            f"basis has {basis.n} vertices but datum has {f.values.shape[0]}"
        )
    t = grid.times
    lam = basis.lam
    c = basis.phi.T @ f.values
    if drop_constant_mode:
        c = c.copy()
        c[0] = 0.0

    if symbol.kind == "wave":
        eps = symbol.attenuation
        phase = t[:, None] * lam[None, :]
        envelope = np.exp(-eps * phase)
        amp = np.cos(phase) * envelope
        damp = (-lam[None, :] * np.sin(phase) - eps * lam[None, :] * np.cos(phase)) * envelope
        modal = amp * c[None, :]
        modal_t = damp * c[None, :]
    else:
        p = symbol.multipliers(lam)
        growth = p.real * grid.horizon
        if np.any(growth > STABILITY_EXPONENT):
            worst = int(np.argmax(growth))
            raise UnstableSymbolError(
                f"unstable symbol: Re p(lam_{worst}) * T = {growth[worst]:.2f} > "
                f"{STABILITY_EXPONENT}"
            )
        modal = np.exp(t[:, None] * p[None, :]) * c[None, :]
        modal_t = modal * p[None, :]

    u = np.asarray(modal @ basis.phi.T, dtype=np.complex128)
    ut = np.asarray(modal_t @ basis.phi.T, dtype=np.complex128)
    return WaveField(source=f.source, u=u, ut=ut)


# ---------------------------------------------------------------------------
# Optional field dump: header (M, n, complex flag) then u and ut row-major
# as 64-bit float (re, im) pairs
# ---------------------------------------------------------------------------

def save_field(path, field: WaveField) -> None:
    with open(path, "wb") as fh:
        fh.write(struct.pack("<qqq", field.samples, field.n, 1))
        fh.write(np.ascontiguousarray(field.u, dtype="<c16").tobytes())
        fh.write(np.ascontiguousarray(field.ut, dtype="<c16").tobytes())


def load_field(path, source: int = 0) -> WaveField:
    with open(path, "rb") as fh:
        m, n, flag = struct.unpack("<qqq", fh.read(24))
        if flag != 1:
            raise ValidationError(f"unsupported field dump flag {flag}")
        u = np.frombuffer(fh.read(16 * m * n), dtype="<c16").reshape(m, n).copy()
        ut = np.frombuffer(fh.read(16 * m * n), dtype="<c16").reshape(m, n).copy()
    return WaveField(source=source, u=u, ut=ut)
