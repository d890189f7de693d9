"""Experiment configuration: TOML loading, dotted-path overrides, validation
against every module's own constructors, and a content hash embedded in all
outputs.

Schema (all sections optional unless a subcommand needs them):

    [kernel]    family, support_radius
    [grid]      dimension, points_per_axis, half_length
    [family]    kind, A, alpha
    [evolution] p (omit for linear), dt, t_end, snapshot_times
    [rescaling] k_ladder, window_R, target_points_per_axis, target_half_length
    [w]         t_list, t, exclusion_K
    [output]    directory
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .errors import ConfigError
from .fields import Grid
from .heat import LimitProblem, PointSourceDatum, PowerLawDatum
from .kernel import FAMILIES, KernelSpec, diffusivity, make_kernel
from .scaling import FamilyKind, ScalingFamily, delta_mass_constant, scaling_law
from .solver import SolveConfig

_POWER_LAW_KINDS = ("power_law", "power_law_over_log", "power_law_times_log")


def _require(table: dict, section: str, key: str, types, default=None,
             required: bool = False):
    if key not in table:
        if required:
            raise ConfigError(f"{section}.{key}: missing required key")
        return default
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, types):
        raise ConfigError(f"{section}.{key}: expected {types}, got {value!r}")
    return value


def _positive(value, section: str, key: str):
    if value is not None and value <= 0:
        raise ConfigError(f"{section}.{key}: must be positive, got {value!r}")
    return value


@dataclass(frozen=True)
class ExperimentConfig:
    raw: dict = field(repr=False)
    config_hash: str

    # kernel
    kernel_family: str = "epanechnikov"
    support_radius: float = 1.0
    # grid
    dimension: int = 1
    points_per_axis: int = 4096
    half_length: float = 32.0
    # scaling family
    family_kind: str | None = None
    family_A: float = 1.0
    family_alpha: float | None = None
    # evolution
    p: float | None = None
    dt: float = 0.05
    t_end: float = 16.0
    snapshot_times: tuple = ()
    # rescaling
    k_ladder: tuple = (4.0, 8.0, 16.0, 32.0)
    window_R: float = 2.0
    target_points_per_axis: int = 1024
    target_half_length: float = 8.0
    # w tables; the default list keeps K*sqrt(t) inside the default grid
    w_t_list: tuple = (0.01, 0.1, 1.0, 10.0)
    w_t: float = 1.0
    exclusion_K: float = 4.0
    # output
    directory: str = "out"

    def kernel(self) -> KernelSpec:
        return make_kernel(self.kernel_family, self.support_radius, self.dimension)

    def grid(self) -> Grid:
        return Grid(self.dimension, self.points_per_axis, self.half_length)

    def target_grid(self) -> Grid:
        return Grid(self.dimension, self.target_points_per_axis,
                    self.target_half_length)

    def family(self) -> ScalingFamily:
        if self.family_kind is None:
            raise ConfigError("family.kind: missing (this subcommand needs it)")
        return ScalingFamily(kind=FamilyKind(self.family_kind),
                             dimension=self.dimension, A=self.family_A,
                             alpha=self.family_alpha)

    def solve_config(self) -> SolveConfig:
        return SolveConfig(kernel=self.kernel(), grid=self.grid(), p=self.p,
                           dt=self.dt, t_end=self.t_end,
                           snapshot_times=self.snapshot_times)

    def limit_problem(self, mass: float | None = None) -> LimitProblem:
        """Limit problem induced by the family: power-law kinds keep the bare
        power tail as datum; critical and integrable kinds get a point source
        (measured delta coefficient, or a caller-supplied mass)."""
        fam = self.family()
        a = diffusivity(self.kernel())
        if self.p is None:
            c0, p = 0.0, 2.0
        else:
            c0 = scaling_law(fam, self.p).c0
            p = self.p
        if fam.kind.value in _POWER_LAW_KINDS:
            datum = PowerLawDatum(A=fam.A, alpha=fam.alpha)
        else:
            datum = PointSourceDatum(M=mass if mass is not None
                                     else delta_mass_constant(fam))
        return LimitProblem(diffusivity=a, c0=c0, p=p, datum=datum)


def _parse_override_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(data: dict, overrides) -> dict:
    """Apply 'section.key=value' strings; values parse as JSON, else string."""
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected key=value")
        path, _, text = item.partition("=")
        keys = path.strip().split(".")
        if not all(keys):
            raise ConfigError(f"override {item!r}: empty path component")
        node = data
        for k in keys[:-1]:
            node = node.setdefault(k, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {item!r}: {k} is not a table")
        node[keys[-1]] = _parse_override_value(text.strip())
    return data


def config_digest(data: dict) -> str:
    blob = json.dumps(data, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def load_config(path: str | None = None, overrides=()) -> ExperimentConfig:
    data: dict = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config parse error in {path}: {exc}")
    data = apply_overrides(data, overrides)
    return build_config(data)


def build_config(data: dict) -> ExperimentConfig:
    digest = config_digest(data)
    kern = data.get("kernel", {})
    grid = data.get("grid", {})
    fam = data.get("family", {})
    evo = data.get("evolution", {})
    res = data.get("rescaling", {})
    wsec = data.get("w", {})
    out = data.get("output", {})
    for name, section in (("kernel", kern), ("grid", grid), ("family", fam),
                          ("evolution", evo), ("rescaling", res), ("w", wsec),
                          ("output", out)):
        if not isinstance(section, dict):
            raise ConfigError(f"{name}: expected a table")

    family_name = _require(kern, "kernel", "family", str, "epanechnikov")
    if family_name not in FAMILIES:
        raise ConfigError(f"kernel.family: unknown family {family_name!r}")
    radius = _positive(_require(kern, "kernel", "support_radius", (int, float), 1.0),
                       "kernel", "support_radius")

    dim = _require(grid, "grid", "dimension", int, 1)
    if dim not in (1, 2):
        raise ConfigError(f"grid.dimension: must be 1 or 2, got {dim}")
    npts = _require(grid, "grid", "points_per_axis", int, 4096)
    half = _positive(_require(grid, "grid", "half_length", (int, float), 32.0),
                     "grid", "half_length")

    kind = _require(fam, "family", "kind", str, None)
    if kind is not None and kind not in [k.value for k in FamilyKind]:
        raise ConfigError(f"family.kind: unknown kind {kind!r}")
    A = _positive(_require(fam, "family", "A", (int, float), 1.0), "family", "A")
    alpha = _require(fam, "family", "alpha", (int, float), None)

    p = _require(evo, "evolution", "p", (int, float), None)
    if p is not None and p <= 1:
        raise ConfigError(f"evolution.p: must exceed 1 (omit for linear), got {p}")
    dt = _positive(_require(evo, "evolution", "dt", (int, float), 0.05),
                   "evolution", "dt")
    t_end = _positive(_require(evo, "evolution", "t_end", (int, float), 16.0),
                      "evolution", "t_end")
    snaps = _require(evo, "evolution", "snapshot_times", list, None)
    if snaps is None:
        snaps = ()
    else:
        if not all(isinstance(s, (int, float)) and not isinstance(s, bool)
                   for s in snaps):
            raise ConfigError("evolution.snapshot_times: entries must be numbers")
        snaps = tuple(float(s) for s in snaps)

    ladder = _require(res, "rescaling", "k_ladder", list, None)
    if ladder is None:
        ladder = (4.0, 8.0, 16.0, 32.0)
    else:
        if not all(isinstance(k, (int, float)) and not isinstance(k, bool) and k > 0
                   for k in ladder):
            raise ConfigError("rescaling.k_ladder: entries must be positive numbers")
        ladder = tuple(float(k) for k in ladder)
    window_R = _positive(_require(res, "rescaling", "window_R", (int, float), 2.0),
                         "rescaling", "window_R")
    tpts = _require(res, "rescaling", "target_points_per_axis", int, 1024)
    thalf = _positive(
        _require(res, "rescaling", "target_half_length", (int, float), 8.0),
        "rescaling", "target_half_length")

    t_list = _require(wsec, "w", "t_list", list, None)
    if t_list is None:
        t_list = (0.01, 0.1, 1.0, 10.0)
    else:
        if not all(isinstance(t, (int, float)) and not isinstance(t, bool) and t > 0
                   for t in t_list):
            raise ConfigError("w.t_list: entries must be positive numbers")
        t_list = tuple(float(t) for t in t_list)
    w_t = _positive(_require(wsec, "w", "t", (int, float), 1.0), "w", "t")
    K = _positive(_require(wsec, "w", "exclusion_K", (int, float), 4.0),
                  "w", "exclusion_K")

    directory = _require(out, "output", "directory", str, "out")

    cfg = ExperimentConfig(
        raw=data, config_hash=digest,
        kernel_family=family_name, support_radius=float(radius),
        dimension=dim, points_per_axis=npts, half_length=float(half),
        family_kind=kind, family_A=float(A),
        family_alpha=None if alpha is None else float(alpha),
        p=None if p is None else float(p), dt=float(dt), t_end=float(t_end),
        snapshot_times=snaps, k_ladder=ladder, window_R=float(window_R),
        target_points_per_axis=tpts, target_half_length=float(thalf),
        w_t_list=t_list, w_t=float(w_t), exclusion_K=float(K),
        directory=directory)

    # cross-validate through the module constructors so diagnostics surface
    # at load time, not mid-run
    try:
        cfg.grid()
        cfg.kernel()
        if kind is not None:
            cfg.family()
        if snaps:
            cfg.solve_config()
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"config rejected by module validation: {exc}")
    return cfg
