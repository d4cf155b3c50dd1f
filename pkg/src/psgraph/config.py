"""Pipeline configuration: defaults, file parsing, window splitting."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .validation import ValidationError

MODEL_AR = "jcm-ar"
MODEL_TAR = "jcm-tar"


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs shared by the pipeline commands.

    ``horizons`` counts forecast steps; at a 2-minute sampling period the
    defaults 5/7/10 correspond to 10, 14, and 20 minutes. ``seasonal_period``
    is in samples per cycle (720 for daily cycles at 2-minute sampling);
    0 disables deseasonalization.
    """

    alpha: float = 1.7
    gamma_th: float = 0.9
    theta: int = 150
    min_ac_size: int = 5
    max_lag: int = 0
    seasonal_period: int = 0
    difference: bool = True
    model: str = MODEL_AR
    ar_order: int = 5
    regimes: int = 3
    tar_grid: int = 20
    train_frac: float = 0.7
    val_frac: float = 0.1
    test_frac: float = 0.2
    horizons: tuple[int, ...] = (5, 7, 10)
    seed: int = 0
    shift: str = "directed-laplacian"
    directed: bool = True
    impute_width: int = 5

    def __post_init__(self):
        if not 0 < self.alpha or not float("inf") > self.alpha:
            raise ValidationError("alpha must be positive and finite")
        if not 0 < self.gamma_th <= 1:
            raise ValidationError("gamma_th must lie in (0, 1]")
        if self.theta < 1:
            raise ValidationError("theta must be at least 1")
        if self.min_ac_size < 1:
            raise ValidationError("min_ac_size must be at least 1")
        if self.max_lag < 0:
            raise ValidationError("max_lag must be nonnegative")
        if self.seasonal_period < 0:
            raise ValidationError("seasonal_period must be nonnegative")
        model = self.model.lower()
        if model != self.model:
            object.__setattr__(self, "model", model)
        if self.model not in (MODEL_AR, MODEL_TAR):
            raise ValidationError(
                f"model must be {MODEL_AR!r} or {MODEL_TAR!r}")
        if self.ar_order < 1:
            raise ValidationError("ar_order must be at least 1")
        if self.regimes < 1:
            raise ValidationError("regimes must be at least 1")
        if self.tar_grid < 1:
            raise ValidationError("tar_grid must be at least 1")
        for name in ("train_frac", "val_frac", "test_frac"):
            frac = getattr(self, name)
            if not 0 <= frac <= 1:
                raise ValidationError(f"{name} must lie in [0, 1]")
        total = self.train_frac + self.val_frac + self.test_frac
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(
                f"split fractions sum to {total!r}, expected 1")
        if not self.horizons or any(h < 1 for h in self.horizons):
            raise ValidationError("horizons must be positive step counts")
        if self.shift not in ("adjacency", "directed-laplacian"):
            raise ValidationError(
                "shift must be 'adjacency' or 'directed-laplacian'")
        if self.impute_width < 1 or self.impute_width % 2 == 0:
            raise ValidationError("impute_width must be a positive odd count")


_BOOL_KEYS = {"difference", "directed"}
_INT_KEYS = {"theta", "min_ac_size", "max_lag", "seasonal_period",
             "ar_order", "regimes", "tar_grid", "seed", "impute_width"}
_FLOAT_KEYS = {"alpha", "gamma_th", "train_frac", "val_frac", "test_frac"}
_STR_KEYS = {"model", "shift"}


def _parse_bool(text: str, key: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValidationError(f"{key}: expected a boolean, got {text!r}")


def parse_config(path) -> PipelineConfig:
    """Flat ``key = value`` text config; # starts a comment.

    Unknown keys are errors. ``horizons`` is a comma-separated list.
    """
    known = {f.name for f in fields(PipelineConfig)}
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(
                    f"{path}:{lineno}: expected 'key = value'")
            key, _, text = line.partition("=")
            key = key.strip().lower()
            text = text.strip()
            if key not in known:
                raise ValidationError(f"{path}:{lineno}: unknown key {key!r}")
            if key in values:
                raise ValidationError(f"{path}:{lineno}: duplicate key {key!r}")
            try:
                if key in _BOOL_KEYS:
                    values[key] = _parse_bool(text, key)
                elif key in _INT_KEYS:
                    values[key] = int(text)
                elif key in _FLOAT_KEYS:
                    values[key] = float(text)
                elif key == "horizons":
                    values[key] = tuple(int(p.strip())
                                        for p in text.split(",") if p.strip())
                else:
                    values[key] = text
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: bad value {text!r}")
    return PipelineConfig(**values)


def with_overrides(cfg: PipelineConfig, **kwargs) -> PipelineConfig:
    """A copy with the given fields replaced (None values ignored)."""
    patch = {k: v for k, v in kwargs.items() if v is not None}
    return replace(cfg, **patch) if patch else cfg


def split_indices(n_samples: int, cfg: PipelineConfig) -> tuple[int, int]:
    """Chronological split bounds: train [0, t1), validation [t1, t2),
    test [t2, n)."""
    if n_samples < 3:
        raise ValidationError("need at least 3 samples to split")
    t1 = int(n_samples * cfg.train_frac)
    t2 = int(n_samples * (cfg.train_frac + cfg.val_frac))
    t1 = max(1, min(t1, n_samples - 1))
    t2 = max(t1, min(t2, n_samples))
    return t1, t2
