"""Run configuration: one TOML file holds every simulation parameter.

Flat keys at the top level plus a ``[mirrors]`` table::

    setup = 2
    mode = "paper-literal"
    alpha = [1.0, 0.0]
    rate = 1024.0
    duration = 64.0
    seed = 0
    phis = [0.0, 0.0, 0.0, 0.0]
    psis = [0.0, 0.0, 0.0, 0.0]
    # lambda = 3.141592653589793
    ensemble = "thermal"
    nbar = 1.0
    n_draws = 1000

    [mirrors]
    A = { freq_hz = 31.0, psi0 = 0.02, phi0 = 0.0 }

Missing keys take their defaults, so an empty file is a valid config.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import tomli
import tomli_w

from .network import ConfigurationError, InterferometerConfig, Mode
from .optics import MIRROR_LABELS, InvalidInputError, MirrorSpec
from .spectrum import DiscreteMixture, PointMass, Thermal, check_sampling

ENSEMBLES = ("none", "thermal", "mixture")
_KEYS = {
    "setup", "mode", "alpha", "rate", "duration", "seed", "phis", "psis",
    "lambda", "ensemble", "nbar", "n_draws", "mixture", "mirrors",
}


@dataclass(frozen=True)
class RunConfig:
    setup: int = 1
    mode: Mode = Mode.PAPER_LITERAL
    alpha: complex = 1 + 0j
    interferometer: InterferometerConfig = field(default_factory=InterferometerConfig.default)
    rate: float = 1024.0
    duration: float = 64.0
    seed: int = 0
    ensemble: str = "none"
    nbar: float = 1.0
    n_draws: int = 1000
    mixture: tuple[tuple[complex, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "alpha", complex(self.alpha))

    def validate(self) -> "RunConfig":
        if self.setup not in (1, 2):
            raise ConfigurationError(f"setup must be 1 or 2, got {self.setup}")
        if self.setup == 1 and self.mode is not Mode.PAPER_LITERAL:
            raise ConfigurationError("setup 1 supports only mode 'paper-literal'")
        if not self.interferometer.uniform_amplitudes:
            raise ConfigurationError("all mirrors must share the same psi0 and phi0")
        if self.ensemble not in ENSEMBLES:
            raise ConfigurationError(f"ensemble must be one of {ENSEMBLES}, got {self.ensemble!r}")
        if self.n_draws < 1:
            raise ConfigurationError("n_draws must be positive")
        check_sampling(list(self.interferometer.freqs.values()), self.duration, self.rate)
        self.make_ensemble()
        return self

    def make_ensemble(self):
        try:
            if self.ensemble == "thermal":
                return Thermal(self.nbar)
            if self.ensemble == "mixture":
                alphas, weights = zip(*self.mixture) if self.mixture else ((), ())
                return DiscreteMixture(tuple(alphas), tuple(weights))
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from None
        return PointMass(self.alpha)

    def with_overrides(self, **kw) -> "RunConfig":
        """Apply command-line overrides; ``None`` values are ignored."""
        kw = {k: v for k, v in kw.items() if v is not None}
        psi0, phi0 = kw.pop("psi0", None), kw.pop("phi0", None)
        cfg = replace(self, **kw)
        if psi0 is not None or phi0 is not None:
            m = cfg.interferometer.mirrors[0]
            ifc = cfg.interferometer.with_modulation(
                m.psi0 if psi0 is None else psi0, m.phi0 if phi0 is None else phi0
            )
            cfg = replace(cfg, interferometer=ifc)
        return cfg

    # ------------------------------------------------------------ TOML

    def to_dict(self) -> dict:
        ifc = self.interferometer
        d = {
            "setup": self.setup,
            "mode": self.mode.value,
            "alpha": [self.alpha.real, self.alpha.imag],
            "rate": self.rate,
            "duration": self.duration,
            "seed": self.seed,
            "phis": list(ifc.phis),
            "psis": list(ifc.psis),
            "ensemble": self.ensemble,
            "nbar": self.nbar,
            "n_draws": self.n_draws,
            "mixture": [[complex(a).real, complex(a).imag, w] for a, w in self.mixture],
            "mirrors": {
                m.label: {"freq_hz": m.freq_hz, "psi0": m.psi0, "phi0": m.phi0} for m in ifc.mirrors
            },
        }
        if ifc.lam is not None:
            d["lambda"] = ifc.lam
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        unknown = set(d) - _KEYS
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        try:
            base = InterferometerConfig.default()
            mirrors = []
            table = d.get("mirrors", {})
            bad = set(table) - set(MIRROR_LABELS)
            if bad:
                raise ConfigurationError(f"unknown mirror labels: {sorted(bad)}")
            for m in base.mirrors:
                row = table.get(m.label, {})
                mirrors.append(MirrorSpec(
                    m.label,
                    float(row.get("freq_hz", m.freq_hz)),
                    float(row.get("psi0", m.psi0)),
                    float(row.get("phi0", m.phi0)),
                ))
            ifc = InterferometerConfig(
                mirrors=tuple(mirrors),
                phis=tuple(d.get("phis", base.phis)),
                psis=tuple(d.get("psis", base.psis)),
                lam=float(d["lambda"]) if "lambda" in d else None,
            )
            alpha = d.get("alpha", [1.0, 0.0])
            mixture = tuple((complex(re, im), float(w)) for re, im, w in d.get("mixture", []))
            return cls(
                setup=int(d.get("setup", 1)),
                mode=Mode(d.get("mode", Mode.PAPER_LITERAL.value)),
                alpha=complex(*alpha) if isinstance(alpha, list) else complex(alpha),
                interferometer=ifc,
                rate=float(d.get("rate", 1024.0)),
                duration=float(d.get("duration", 64.0)),
                seed=int(d.get("seed", 0)),
                ensemble=str(d.get("ensemble", "none")),
                nbar=float(d.get("nbar", 1.0)),
                n_draws=int(d.get("n_draws", 1000)),
                mixture=mixture,
            )
        except (TypeError, InvalidInputError) as exc:
            raise ConfigurationError(str(exc)) from None
        except ValueError as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(str(exc)) from None

    def dumps(self) -> str:
        return tomli_w.dumps(self.to_dict())

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        try:
            return cls.from_dict(tomli.loads(text))
        except tomli.TOMLDecodeError as exc:
            raise ConfigurationError(f"malformed config: {exc}") from None

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        return cls.loads(Path(path).read_text())

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())
