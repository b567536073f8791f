"""Parameter definitions, validation, and structured configuration.

Everything downstream (mean-field, Liouvillian construction, sweeps) consumes
a single immutable :class:`ModelParams` record.  Couplings and rates are kept
as raw floating values in a common unit system; normalization by the total
dissipation rate happens only at reporting time (see :attr:`ModelParams.rate_unit`),
which keeps the solvers unit-agnostic.

The all-to-all XYZ model is homogeneous by construction -- site-dependent
couplings or rates would break the permutational symmetry the whole package
relies on, so none are representable here.
"""

from __future__ import annotations

import dataclasses
import json
import math
from typing import Any

__all__ = [
    "ModelParams",
    "SweepSpec",
    "ConfigError",
    "DEFAULTS",
    "OBSERVABLE_NAMES",
    "validate",
    "parse_config",
    "serialize_config",
]

#: Canonical cut used by the CLI when a parameter is not given explicitly
#: (Jy and N never default: they are what one actually varies).
DEFAULTS = {"Jx": 0.6, "Jz": 1.0, "gamma": 1.0, "Gamma": 0.0}

#: Observables a sweep may request, in canonical column order.
OBSERVABLE_NAMES = (
    "Sxx",
    "Syy",
    "Mz",
    "entropy_per_spin",
    "purity",
    "Bc_x",
    "Bc_y",
    "chi_av",
)

_SWEEPABLE = ("Jx", "Jy", "Jz", "gamma", "Gamma")

_MODEL_KEYS = ("Jx", "Jy", "Jz", "gamma", "Gamma", "N")

_SWEEP_KEYS = ("param", "lo", "hi", "points", "Ns", "observables")


class ConfigError(ValueError):
    """A structured-config document violates the schema."""


@dataclasses.dataclass(frozen=True)
class ModelParams:
    """Couplings, dissipation rates and spin count for one model instance.

    Parameters
    ----------
    Jx, Jy, Jz : float
        XYZ coupling energies, same units as ``gamma``.
    gamma : float
        Local (single-spin) decay rate, >= 0.
    Gamma : float
        Collective decay rate, >= 0.  The Lindblad term carries the
        size scaling Gamma/(N-1) internally; ``Gamma`` itself is the bare rate.
    N : int or math.inf
        Number of spins, integer >= 2.  ``math.inf`` is accepted as an
        explicit thermodynamic-limit sentinel understood only by the
        mean-field routines.
    """

    Jx: float
    Jy: float
    Jz: float
    gamma: float
    Gamma: float
    N: int | float

    @property
    def rate_unit(self) -> float:
        """Total dissipation rate used to normalize reported couplings."""
        return self.gamma + self.Gamma

    @property
    def is_thermodynamic(self) -> bool:
        return math.isinf(self.N)

    def replace(self, **changes: Any) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def couplings(self) -> tuple[float, float, float]:
        return (self.Jx, self.Jy, self.Jz)

    def require_valid(self) -> "ModelParams":
        """Raise ``ValueError`` listing all violated invariants, if any."""
        errors = validate(self)
        if errors:
            raise ValueError("; ".join(errors))
        return self


def validate(params: ModelParams) -> list[str]:
    """Collect violated invariants of *params*.

    Returns
    -------
    list of str
        Empty when the parameter set is valid.  Validation never raises;
        the caller decides what to do with the error list.
    """
    errors: list[str] = []
    for name in ("Jx", "Jy", "Jz"):
        value = getattr(params, name)
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            errors.append(f"{name} must be a finite number")
    for name in ("gamma", "Gamma"):
        value = getattr(params, name)
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            errors.append(f"{name} must be a finite number")
        elif value < 0:
            errors.append(f"{name} must be >= 0")
    n = params.N
    if isinstance(n, float) and math.isinf(n) and n > 0:
        pass  # mean-field thermodynamic limit
    elif not isinstance(n, int) or isinstance(n, bool):
        errors.append("N must be an integer >= 2 (or math.inf)")
    elif n < 2:
        # The collective Hamiltonian prefactor 1/(2(N-1)) is singular at N=1.
        errors.append("N >= 2 required")
    if not errors and params.gamma + params.Gamma <= 0:
        errors.append("no dissipation: gamma + Gamma must be > 0")
    return errors


@dataclasses.dataclass(frozen=True)
class SweepSpec:
    """What to sweep, over which grid, for which system sizes.

    ``param`` is one of Jx, Jy, Jz, gamma, Gamma; the grid is ``points``
    values spaced uniformly over ``[lo, hi]``; the sweep repeats for every
    N in ``Ns``.
    """

    param: str = "Jy"
    lo: float = 0.75
    hi: float = 1.75
    points: int = 100
    Ns: tuple[int, ...] = ()
    observables: tuple[str, ...] = OBSERVABLE_NAMES
    out: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "Ns", tuple(self.Ns))
        object.__setattr__(self, "observables", tuple(self.observables))

    def errors(self) -> list[str]:
        errs: list[str] = []
        if self.param not in _SWEEPABLE:
            errs.append(f"sweep.param must be one of {_SWEEPABLE}, got {self.param!r}")
        if not (self.points >= 2):
            errs.append("sweep.points must be >= 2")
        if not (self.lo < self.hi):
            errs.append("sweep range requires lo < hi")
        for n in self.Ns:
            if not isinstance(n, int) or n < 2:
                errs.append(f"sweep.Ns entries must be integers >= 2, got {n!r}")
                break
        unknown = [o for o in self.observables if o not in OBSERVABLE_NAMES]
        if unknown:
            errs.append(f"unknown observables: {unknown}")
        return errs

    def values(self) -> list[float]:
        """The sweep grid, lo..hi inclusive."""
        step = (self.hi - self.lo) / (self.points - 1)
        return [self.lo + i * step for i in range(self.points)]


def _coerce_number(key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"key {key!r} must be a number, got {value!r}")
    return value


def parse_config(text: str) -> tuple[ModelParams, SweepSpec]:
    """Parse a JSON config document into ``(ModelParams, SweepSpec)``.

    The schema is flat: the six model keys ``Jx, Jy, Jz, gamma, Gamma, N``
    are required; an optional ``sweep`` object may carry
    ``param, lo, hi, points, Ns, observables``.  Unknown keys are rejected
    by name.  The result round-trips through :func:`serialize_config`.

    Raises
    ------
    ConfigError
        Naming the offending key, e.g. ``missing key: N``.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("top-level document must be an object")

    for key in doc:
        if key not in _MODEL_KEYS and key != "sweep":
            raise ConfigError(f"unknown key: {key}")
    for key in _MODEL_KEYS:
        if key not in doc:
            raise ConfigError(f"missing key: {key}")

    n_raw = doc["N"]
    if isinstance(n_raw, bool) or not isinstance(n_raw, (int, float)):
        raise ConfigError(f"key 'N' must be an integer, got {n_raw!r}")
    if isinstance(n_raw, float):
        if math.isinf(n_raw):
            n: int | float = math.inf
        elif n_raw == int(n_raw):
            n = int(n_raw)
        else:
            raise ConfigError(f"key 'N' must be an integer, got {n_raw!r}")
    else:
        n = n_raw

    params = ModelParams(
        Jx=_coerce_number("Jx", doc["Jx"]),
        Jy=_coerce_number("Jy", doc["Jy"]),
        Jz=_coerce_number("Jz", doc["Jz"]),
        gamma=_coerce_number("gamma", doc["gamma"]),
        Gamma=_coerce_number("Gamma", doc["Gamma"]),
        N=n,
    )
    errors = validate(params)
    if errors:
        raise ConfigError("; ".join(errors))

    sweep_doc = doc.get("sweep", {})
    if not isinstance(sweep_doc, dict):
        raise ConfigError("key 'sweep' must be an object")
    for key in sweep_doc:
        if key not in _SWEEP_KEYS:
            raise ConfigError(f"unknown key: sweep.{key}")

    kwargs: dict[str, Any] = {}
    if "param" in sweep_doc:
        kwargs["param"] = sweep_doc["param"]
    for key in ("lo", "hi"):
        if key in sweep_doc:
            kwargs[key] = _coerce_number(f"sweep.{key}", sweep_doc[key])
    if "points" in sweep_doc:
        pts = sweep_doc["points"]
        if isinstance(pts, bool) or not isinstance(pts, int):
            raise ConfigError(f"key 'sweep.points' must be an integer, got {pts!r}")
        kwargs["points"] = pts
    if "Ns" in sweep_doc:
        ns = sweep_doc["Ns"]
        if not isinstance(ns, list):
            raise ConfigError("key 'sweep.Ns' must be a list of integers")
        kwargs["Ns"] = tuple(ns)
    if "observables" in sweep_doc:
        obs = sweep_doc["observables"]
        if not isinstance(obs, list) or not all(isinstance(o, str) for o in obs):
            raise ConfigError("key 'sweep.observables' must be a list of strings")
        kwargs["observables"] = tuple(obs)

    if "Ns" not in kwargs and not params.is_thermodynamic:
        kwargs["Ns"] = (params.N,)
    spec = SweepSpec(**kwargs)
    sweep_errors = spec.errors()
    if sweep_errors:
        raise ConfigError("; ".join(sweep_errors))
    return params, spec


def serialize_config(params: ModelParams, spec: SweepSpec | None = None) -> str:
    """Inverse of :func:`parse_config` (up to JSON formatting)."""
    doc: dict[str, Any] = {
        "Jx": params.Jx,
        "Jy": params.Jy,
        "Jz": params.Jz,
        "gamma": params.gamma,
        "Gamma": params.Gamma,
        "N": params.N if not params.is_thermodynamic else math.inf,
    }
    if spec is not None:
        doc["sweep"] = {
            "param": spec.param,
            "lo": spec.lo,
            "hi": spec.hi,
            "points": spec.points,
            "Ns": list(spec.Ns),
            "observables": list(spec.observables),
        }
    return json.dumps(doc, indent=2)
