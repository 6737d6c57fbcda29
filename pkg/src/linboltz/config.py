"""Run configuration shared by every CLI command.

A config file is a single JSON object; every key is optional::

    {
      "model": "gas.json",            # model file for assemble / nu / kernel
      "mixture_model": "mix.json",    # second model for verify (mixture checks)
      "N": 8, "R": 5.0, "N_refined": 12,
      "seed": 0,
      "suites": ["kernels", "nu", "rho"],
      "out": "results",
      "size_cap": 20000,
      "diagonal": "local",
      "rho_samples": 1000000,
      "n_random_f": 20,
      "kernel_rules": {"sphere_order": 6, "plane_radial": 32, "plane_angular": 16,
                       "plane_R_max": 8.0, "gain_order": 12},
      "direct_rules": {"n_radial": 6, "width": 1.0, "cutoff": 7.0,
                       "g_order": 12, "omega_order": 8},
      "weak_rules": {"hermite": 4, "n_radial": 4, "width": 3.0, "g_max": 12.0,
                     "g_order": 4, "omega_order": 4},
      "entropy_rules": {...same keys as weak_rules...}
    }

Command-line flags override file values. Relative model paths are resolved
against the config file's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from . import kernels as kn
from .io import FormatError, load_model
from .operator import DEFAULT_SIZE_CAP, DIAGONAL_MODES, DirectRules, WeakRules
from .verify import SUITES, SuiteConfig

_U64 = 2**64

MIN_ORDERS = {"sphere_order": 1, "plane_radial": 1, "plane_angular": 1, "gain_order": 1,
              "n_radial": 1, "g_order": 1, "omega_order": 1, "hermite": 1}


@dataclass(frozen=True)
class RunConfig:
    model: str | None = None
    mixture_model: str | None = None
    N: int = 8
    R: float = 5.0
    N_refined: int | None = 12
    seed: int = 0
    suites: tuple = SUITES
    out: str = "."
    size_cap: int = DEFAULT_SIZE_CAP
    diagonal: str = "local"
    rho_samples: int = 1_000_000
    n_random_f: int = 20
    kernel_rules: dict = field(default_factory=dict)
    direct_rules: dict = field(default_factory=dict)
    weak_rules: dict = field(default_factory=dict)
    entropy_rules: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("N", "N_refined"):
            v = getattr(self, name)
            if v is None and name == "N_refined":
                continue
            if isinstance(v, bool) or not isinstance(v, int) or v < 2 or v % 2:
                raise ValueError(f"{name} must be an even integer >= 2, got {v!r}")
        if not self.R > 0:
            raise ValueError("R must be positive")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) \
                or not 0 <= self.seed < _U64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        bad = set(self.suites) - set(SUITES)
        if bad:
            raise ValueError(f"unknown suites {sorted(bad)}; choose from {list(SUITES)}")
        if self.diagonal not in DIAGONAL_MODES:
            raise ValueError(f"diagonal must be one of {DIAGONAL_MODES}")
        if self.size_cap < 1 or self.rho_samples < 1 or self.n_random_f < 1:
            raise ValueError("size_cap, rho_samples and n_random_f must be positive")
        object.__setattr__(self, "suites", tuple(self.suites))
        for group in ("kernel_rules", "direct_rules", "weak_rules", "entropy_rules"):
            for k, v in getattr(self, group).items():
                if k in MIN_ORDERS and (int(v) != v or v < MIN_ORDERS[k]):
                    raise ValueError(f"{group}.{k} must be an integer >= {MIN_ORDERS[k]}")

    # -- construction -------------------------------------------------------
    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise FormatError(f"unknown config keys {sorted(extra)}")
        d = dict(d)
        for key in ("model", "mixture_model"):
            if d.get(key) and base_dir is not None and not Path(d[key]).is_absolute():
                d[key] = str(base_dir / d[key])
        return cls(**d)

    @classmethod
    def load(cls, path) -> "RunConfig":
        p = Path(path)
        try:
            d = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise FormatError(f"{p}: invalid JSON ({exc})") from None
        if not isinstance(d, dict):
            raise FormatError(f"{p}: config must be a JSON object")
        return cls.from_dict(d, p.parent)

    def override(self, **kwargs) -> "RunConfig":
        """Copy with every non-``None`` keyword applied."""
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["suites"] = list(self.suites)
        return d

    # -- derived objects ----------------------------------------------------
    def kernel_rules_obj(self) -> kn.KernelRules:
        return kn.make_rules(**self.kernel_rules)

    def direct_rules_obj(self) -> DirectRules:
        return DirectRules(**self.direct_rules)

    def weak_rules_obj(self) -> WeakRules:
        return WeakRules(**self.weak_rules)

    def load_model(self):
        if not self.model:
            raise FormatError("no model file given (use --model or the 'model' config key)")
        return load_model(self.model)

    def suite_config(self) -> SuiteConfig:
        kw = {}
        for path in (self.model, self.mixture_model):
            if not path:
                continue
            spec, model = load_model(path)
            if model.is_poly:
                kw["poly"], kw["poly_model"] = spec, model
            else:
                kw["mix"], kw["mix_model"] = spec, model
        if self.entropy_rules:
            kw["entropy_rules"] = WeakRules(**self.entropy_rules)
        return SuiteConfig(N=self.N, R=self.R, N_refined=self.N_refined,
                           diagonal=self.diagonal, suites=self.suites, seed=self.seed,
                           rho_samples=self.rho_samples, n_random_f=self.n_random_f,
                           kernel_rules=self.kernel_rules_obj(),
                           direct_rules=self.direct_rules_obj(),
                           weak_rules=self.weak_rules_obj(), size_cap=self.size_cap, **kw)
