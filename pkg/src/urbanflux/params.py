"""Model parameters with defaults for the reference winter experiment."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Iterable


@dataclass(frozen=True)
class BemParams:
    k_ext: float = 0.15
    k_int: float = 0.15
    k_vent: float = 0.3
    k_r: float = 0.15
    c_w: float = 3e5
    c_a: float = 1.4e3
    eta: float = 0.15
    h_conv: float = 8.0
    q_c_min: float = -100.0
    q_c_max: float = 100.0
    t_targ: float = 292.15
    q_a: float = 100.0


@dataclass(frozen=True)
class CanopyParams:
    k_max: float = 2.0
    h_max: float = 60.0
    forcing_height: float = 60.0
    rho_cp: float = 1.2 * 1005.0


@dataclass(frozen=True)
class RadiationParams:
    albedo: float = 0.2
    ground_albedo: float = 0.2
    emissivity: float = 0.9
    sky_offset: float = 15.0      # T_sky = T_atm - sky_offset
    ground_cell: float = 20.0     # max edge of ground facets [m]
    vf_spacing: float = 2.0       # sample spacing for occlusion [m]
    vf_max_samples: int = 8
    shadow_spacing: float = 5.0


@dataclass(frozen=True)
class Params:
    bem: BemParams = field(default_factory=BemParams)
    canopy: CanopyParams = field(default_factory=CanopyParams)
    radiation: RadiationParams = field(default_factory=RadiationParams)
    zones: tuple[tuple[str, tuple[tuple[str, float], ...]], ...] = ()

    def bem_for(self, ref: str) -> BemParams:
        """BEM parameters for a building's ``zone_params_ref``."""
        for name, items in self.zones:
            if name == ref:
                return replace(self.bem, **dict(items))
        return self.bem

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["zones"] = {name: dict(items) for name, items in self.zones}
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Params":
        p = cls()
        for section in ("bem", "canopy", "radiation"):
            if section in data:
                p = replace(p, **{section: _update(getattr(p, section), data[section], section)})
        zones = data.get("zones", {})
        if zones:
            valid = {f.name for f in fields(BemParams)}
            for name, items in zones.items():
                bad = set(items) - valid
                if bad:
                    raise KeyError(f"zones.{name}: unknown parameter(s) {sorted(bad)}")
            p = replace(p, zones=tuple((n, tuple(sorted((k, float(v)) for k, v in z.items())))
                                       for n, z in sorted(zones.items())))
        return p


def _update(obj, values: dict[str, Any], where: str):
    valid = {f.name: f for f in fields(obj)}
    kwargs = {}
    for key, value in values.items():
        if key not in valid:
            raise KeyError(f"{where}.{key}: unknown parameter")
        kwargs[key] = type(getattr(obj, key))(value)
    return replace(obj, **kwargs)


def apply_overrides(params: Params, overrides: Iterable[str]) -> Params:
    """Apply ``section.key=value`` strings, e.g. ``bem.eta=0.2``."""
    for item in overrides:
        if "=" not in item:
            raise ValueError(f"override {item!r} is not of the form key=value")
        path, raw = item.split("=", 1)
        parts = path.strip().split(".")
        if len(parts) != 2 or parts[0] not in ("bem", "canopy", "radiation"):
            raise KeyError(f"{path}: expected bem.<name>, canopy.<name> or radiation.<name>")
        section, key = parts
        params = replace(params, **{section: _update(getattr(params, section), {key: raw}, section)})
    return params
