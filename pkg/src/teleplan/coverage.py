"""RSRP coverage grid for deployed sites with three-sector antennas.

Propagation is a log-distance pathloss model (reference loss at a reference
distance plus a distance exponent) and the sector pattern is the standard
parabolic attenuation in both planes capped at a sidelobe floor. Every grid
cell stores the best-server RSRP over all (site, sector) pairs. Constants
are deliberately config-overridable; the defaults produce a plausible
-80..-40 dBm dynamic range at a few hundred meters of site spacing.

Conventions: azimuth 0 deg points along +y and increases clockwise;
receivers sit at ground level, so the vertical offset from the downtilted
boresight uses the antenna height.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import PreconditionError


@dataclass(frozen=True)
class RadioConfig:
    tx_power_dbm: float = 46.99  # 50 W
    max_gain_dbi: float = 15.0
    azimuths_deg: tuple[float, ...] = (0.0, 120.0, 240.0)
    downtilt_deg: float = 10.0
    antenna_height_m: float = 30.0
    h_beamwidth_deg: float = 65.0
    v_beamwidth_deg: float = 10.0
    sidelobe_floor_db: float = 30.0
    pl_ref_db: float = 60.0
    d_ref_m: float = 10.0
    pl_exponent: float = 3.5
    rsrp_offset_db: float = 0.0  # calibration knob, added to every link

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["azimuths_deg"] = list(d["azimuths_deg"])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RadioConfig":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        if "azimuths_deg" in known:
            known["azimuths_deg"] = tuple(float(a) for a in known["azimuths_deg"])
        return cls(**known)


@dataclass(frozen=True)
class GridConfig:
    origin_x: float
    origin_y: float
    cell_size_m: float
    nx: int
    ny: int


@dataclass
class RsrpGrid:
    origin_x: float
    origin_y: float
    cell_size_m: float
    values: np.ndarray  # (ny, nx), dBm

    @property
    def nx(self) -> int:
        return self.values.shape[1]

    @property
    def ny(self) -> int:
        return self.values.shape[0]

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        xs = self.origin_x + (np.arange(self.nx) + 0.5) * self.cell_size_m
        ys = self.origin_y + (np.arange(self.ny) + 0.5) * self.cell_size_m
        return xs, ys


def pathloss(d, config: RadioConfig):
    """Log-distance pathloss in dB; distances inside d_ref floor at d_ref."""
    d = np.asarray(d, dtype=np.float64)
    if np.any(d <= 0.0):
        raise PreconditionError("pathloss requires distance > 0")
    out = config.pl_ref_db + 10.0 * config.pl_exponent * np.log10(
        np.maximum(d, config.d_ref_m) / config.d_ref_m
    )
    return float(out) if out.ndim == 0 else out


def antenna_gain(phi_deg, psi_deg, config: RadioConfig):
    """Sector gain in dBi at horizontal/vertical offsets from boresight."""
    phi = np.asarray(phi_deg, dtype=np.float64)
    psi = np.asarray(psi_deg, dtype=np.float64)
    att = np.minimum(
        12.0 * (phi / config.h_beamwidth_deg) ** 2
        + 12.0 * (psi / config.v_beamwidth_deg) ** 2,
        config.sidelobe_floor_db,
    )
    out = config.max_gain_dbi - att
    return float(out) if out.ndim == 0 else out


def rsrp_grid(site_positions, grid: GridConfig, radio: RadioConfig | None = None) -> RsrpGrid:
    """Best-server RSRP over a rectangular grid of cell centers."""
    radio = radio or RadioConfig()
    pos = np.asarray(site_positions, dtype=np.float64).reshape(-1, 2)
    if pos.shape[0] < 1:
        raise PreconditionError("at least one site required")
    if grid.cell_size_m <= 0.0:
        raise PreconditionError("cell size must be positive")
    xs = grid.origin_x + (np.arange(grid.nx) + 0.5) * grid.cell_size_m
    ys = grid.origin_y + (np.arange(grid.ny) + 0.5) * grid.cell_size_m
    cell_x, cell_y = np.meshgrid(xs, ys)
    values = kernels.rsrp_field(
        np.ascontiguousarray(cell_x.ravel()),
        np.ascontiguousarray(cell_y.ravel()),
        np.ascontiguousarray(pos[:, 0]),
        np.ascontiguousarray(pos[:, 1]),
        np.asarray(radio.azimuths_deg, dtype=np.float64),
        radio.tx_power_dbm,
        radio.max_gain_dbi,
        radio.downtilt_deg,
        radio.antenna_height_m,
        radio.h_beamwidth_deg,
        radio.v_beamwidth_deg,
        radio.sidelobe_floor_db,
        radio.pl_ref_db,
        radio.d_ref_m,
        radio.pl_exponent,
        radio.rsrp_offset_db,
    ).reshape(grid.ny, grid.nx)
    return RsrpGrid(
        origin_x=grid.origin_x,
        origin_y=grid.origin_y,
        cell_size_m=grid.cell_size_m,
        values=values,
    )


def coverage_stats(grid: RsrpGrid) -> dict:
    """Exact threshold fractions and summary statistics over all cells."""
    v = grid.values
    if v.size == 0:
        raise PreconditionError("grid is empty")
    return {
        "frac_above_m80dbm": float((v > -80.0).mean()),
        "frac_above_m60dbm": float((v > -60.0).mean()),
        "min_dbm": float(v.min()),
        "mean_dbm": float(v.mean()),
    }


def grid_for_bbox(bbox, cell_size_m: float, margin_frac: float = 0.05) -> GridConfig:
    """Grid covering a planar bbox with a relative margin on each side."""
    x_min, y_min, x_max, y_max = bbox
    mx = (x_max - x_min) * margin_frac
    my = (y_max - y_min) * margin_frac
    nx = max(1, math.ceil((x_max - x_min + 2 * mx) / cell_size_m))
    ny = max(1, math.ceil((y_max - y_min + 2 * my) / cell_size_m))
    return GridConfig(
        origin_x=x_min - mx, origin_y=y_min - my,
        cell_size_m=cell_size_m, nx=nx, ny=ny,
    )


# ---------------------------------------------------------------------------
# exports

def grid_to_csv(grid: RsrpGrid, path) -> None:
    """Rows of x,y,rsrp_dbm for every cell center."""
    xs, ys = grid.cell_centers()
    with open(path, "w", encoding="utf-8") as f:
        f.write("x,y,rsrp_dbm\n")
        for iy in range(grid.ny):
            for ix in range(grid.nx):
                f.write(
                    f"{float(xs[ix])!r},{float(ys[iy])!r},"
                    f"{float(grid.values[iy, ix])!r}\n"
                )


def grid_to_raster(grid: RsrpGrid, path) -> None:
    """Compact binary raster: one JSON header line, then row-major
    little-endian float32 values."""
    header = {
        "origin_x": grid.origin_x,
        "origin_y": grid.origin_y,
        "cell_size_m": grid.cell_size_m,
        "nx": grid.nx,
        "ny": grid.ny,
        "dtype": "<f4",
    }
    with open(path, "wb") as f:
        f.write(json.dumps(header).encode("utf-8") + b"\n")
        f.write(grid.values.astype("<f4").tobytes())


def grid_from_raster(path) -> RsrpGrid:
    with open(path, "rb") as f:
        header = json.loads(f.readline().decode("utf-8"))
        values = np.frombuffer(f.read(), dtype=header["dtype"]).astype(np.float64)
    return RsrpGrid(
        origin_x=header["origin_x"],
        origin_y=header["origin_y"],
        cell_size_m=header["cell_size_m"],
        values=values.reshape(header["ny"], header["nx"]),
    )
