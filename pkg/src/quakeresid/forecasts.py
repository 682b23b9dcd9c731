"""Forecast grids: parsing, serialization, and magnitude extrapolation.

Forecast files are plain text with ten whitespace-separated columns per row:

    lon_min lon_max lat_min lat_max depth_min depth_max mag_lo mag_hi rate mask_flag

'#' starts a comment line.  A row with mask_flag 0 deactivates its pixel;
pixels never mentioned are inactive.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .errors import ParseError, SchemaError, ValidationError
from .grids import Grid

# Default forecast window: the five-year experiment period the row format
# comes from.  parse_forecast accepts explicit bounds for anything else.
DEFAULT_WINDOW_START = datetime(2006, 1, 1, tzinfo=timezone.utc)
DEFAULT_WINDOW_END = datetime(2011, 1, 1, tzinfo=timezone.utc)

_EDGE_TOL = 1e-9


@dataclass(frozen=True)
class ForecastBin:
    pixel_index: int
    mag_lo: float
    mag_hi: float
    rate: float
    depth_lo: float = 0.0
    depth_hi: float = 30.0


@dataclass(frozen=True)
class Forecast:
    grid: Grid
    pixel_index: np.ndarray = field(repr=False)  # int, per bin
    mag_lo: np.ndarray = field(repr=False)
    mag_hi: np.ndarray = field(repr=False)
    rate: np.ndarray = field(repr=False)
    depth_lo: np.ndarray = field(repr=False)
    depth_hi: np.ndarray = field(repr=False)
    window_start: datetime = DEFAULT_WINDOW_START
    window_end: datetime = DEFAULT_WINDOW_END

    def __post_init__(self):
        if self.window_start >= self.window_end:
            raise ValidationError("window_start must precede window_end")
        if np.any(self.rate < 0):
            raise ValidationError("negative forecast rate")
        if np.any(self.mag_lo >= self.mag_hi):
            raise ValidationError("mag_lo must be < mag_hi")
        keys = set()
        for pix, lo in zip(self.pixel_index, self.mag_lo):
            key = (int(pix), round(float(lo), 9))
            if key in keys:
                raise ValidationError(
                    f"duplicate (pixel, magnitude-bin) key: pixel {pix}, mag_lo {lo}")
            keys.add(key)

    @property
    def n_bins(self) -> int:
        return len(self.rate)

    @property
    def mag_min(self) -> float:
        return float(self.mag_lo.min()) if self.n_bins else float("nan")

    def iter_bins(self):
        for i in range(self.n_bins):
            yield ForecastBin(int(self.pixel_index[i]), float(self.mag_lo[i]),
                              float(self.mag_hi[i]), float(self.rate[i]),
                              float(self.depth_lo[i]), float(self.depth_hi[i]))

    def pixels_with_bins(self) -> np.ndarray:
        """Flat indices of active pixels that carry at least one bin."""
        active = set(self.grid.active_indices().tolist())
        return np.array(sorted(active & set(self.pixel_index.tolist())), dtype=int)


def _empty_forecast(window_start, window_end):
    grid = Grid.regular(0.0, 1.0, 0.0, 1.0, 1.0, 1.0,
                        active_mask=np.zeros((1, 1), dtype=bool))
    z = np.zeros(0)
    return Forecast(grid, z.astype(int), z, z, z, z, z,
                    window_start=window_start, window_end=window_end)


def parse_forecast(text: str, window_start=DEFAULT_WINDOW_START,
                   window_end=DEFAULT_WINDOW_END) -> Forecast:
    """Parse forecast-file content into a Forecast.

    The grid is inferred from the union of rows; all rows must describe
    pixels of one common size on one common lattice.
    """
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.replace("−", "-").split()
        if len(fields) != 10:
            raise ParseError(f"expected 10 columns, got {len(fields)}", lineno)
        try:
            vals = [float(f) for f in fields]
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        rows.append((lineno, vals))

    if not rows:
        return _empty_forecast(window_start, window_end)

    arr = np.array([v for _, v in rows])
    lon_lo, lon_hi, lat_lo, lat_hi = arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]
    dxs = lon_hi - lon_lo
    dys = lat_hi - lat_lo
    dx, dy = dxs[0], dys[0]
    if np.any(np.abs(dxs - dx) > _EDGE_TOL) or np.any(np.abs(dys - dy) > _EDGE_TOL):
        raise SchemaError("inconsistent pixel sizes across rows")
    if dx <= 0 or dy <= 0:
        raise SchemaError("pixel edges must have positive extent")

    for (lineno, vals) in rows:
        if vals[8] < 0:
            raise ValidationError(f"line {lineno}: negative rate {vals[8]}")
        if vals[6] >= vals[7]:
            raise ValidationError(f"line {lineno}: mag_lo >= mag_hi")

    lon_min, lon_max = lon_lo.min(), lon_hi.max()
    lat_min, lat_max = lat_lo.min(), lat_hi.max()
    n_x = int(round((lon_max - lon_min) / dx))
    n_y = int(round((lat_max - lat_min) / dy))

    ix = np.round((lon_lo - lon_min) / dx).astype(int)
    iy = np.round((lat_lo - lat_min) / dy).astype(int)
    if (np.any(np.abs(lon_lo - (lon_min + ix * dx)) > _EDGE_TOL) or
            np.any(np.abs(lat_lo - (lat_min + iy * dy)) > _EDGE_TOL)):
        raise SchemaError("pixel edges do not lie on a common lattice")

    pixel = iy * n_x + ix
    mask_flag = arr[:, 9] != 0

    active = np.zeros((n_y, n_x), dtype=bool)
    active[iy[mask_flag], ix[mask_flag]] = True
    # any masked-out row deactivates its pixel, regardless of other rows
    active[iy[~mask_flag], ix[~mask_flag]] = False

    grid = Grid(float(lon_min), float(lon_max), float(lat_min), float(lat_max),
                float(dx), float(dy), n_x, n_y, active)

    keys = {}
    for i, (lineno, _) in enumerate(rows):
        key = (int(pixel[i]), round(float(arr[i, 6]), 9))
        if key in keys:
            raise ValidationError(
                f"line {lineno}: duplicate (pixel, magnitude-bin) key "
                f"(first seen on line {keys[key]})")
        keys[key] = lineno

    return Forecast(grid, pixel, arr[:, 6].copy(), arr[:, 7].copy(),
                    arr[:, 8].copy(), arr[:, 4].copy(), arr[:, 5].copy(),
                    window_start=window_start, window_end=window_end)


def serialize_forecast(forecast: Forecast) -> str:
    """Write a Forecast back to the ten-column row format."""
    grid = forecast.grid
    lines = []
    active = forecast.grid.active_mask
    for i in range(forecast.n_bins):
        pix = int(forecast.pixel_index[i])
        ix, iy = grid.unflatten(pix)
        flag = 1 if active[iy, ix] else 0
        lines.append(" ".join([
            "%.12g" % (grid.lon_min + ix * grid.dx),
            "%.12g" % (grid.lon_min + (ix + 1) * grid.dx),
            "%.12g" % (grid.lat_min + iy * grid.dy),
            "%.12g" % (grid.lat_min + (iy + 1) * grid.dy),
            "%.12g" % forecast.depth_lo[i],
            "%.12g" % forecast.depth_hi[i],
            "%.12g" % forecast.mag_lo[i],
            "%.12g" % forecast.mag_hi[i],
            "%.12g" % forecast.rate[i],
            str(flag),
        ]))
    return "\n".join(lines) + ("\n" if lines else "")


def seismic_moment(magnitude):
    """Moment from magnitude, log10 M = 1.5 m + 9.05."""
    return 10.0 ** (1.5 * np.asarray(magnitude, dtype=float) + 9.05)


def tapered_gr_survivor(magnitude, b_value, corner_mag, ref_mag):
    """Relative survivor function of the tapered magnitude law.

    Normalized to 1 at ref_mag; the taper is exponential in seismic moment
    with corner moment at corner_mag, and the power-law index is (2/3) b.
    """
    beta = (2.0 / 3.0) * b_value
    m = seismic_moment(magnitude)
    m_ref = seismic_moment(ref_mag)
    m_c = seismic_moment(corner_mag)
    return (m_ref / m) ** beta * np.exp((m_ref - m) / m_c)


def gr_extrapolate(forecast: Forecast, new_mag_min: float, b_value: float,
                   corner_mag: float, special_regions=None,
                   mag_step: float = 0.1) -> Forecast:
    """Prepend magnitude bins from new_mag_min up to the forecast's lower bound.

    Per pixel, the new-bin rates follow the tapered magnitude distribution
    scaled so the total rate above the old bound is unchanged.  Pixels whose
    centers fall in a special region use that region's b-value.

    special_regions: list of ((lon_lo, lon_hi, lat_lo, lat_hi), b_value).
    """
    if b_value <= 0:
        raise ValidationError("b_value must be positive")
    if forecast.n_bins == 0:
        warnings.warn("gr_extrapolate on an empty forecast is a no-op")
        return forecast
    old_lo = forecast.mag_min
    if new_mag_min >= old_lo:
        warnings.warn(
            f"new_mag_min {new_mag_min} is not below the forecast bound "
            f"{old_lo}; extrapolation skipped")
        return forecast

    n_new = int(round((old_lo - new_mag_min) / mag_step))
    if abs(old_lo - new_mag_min - n_new * mag_step) > 1e-9:
        raise ValidationError(
            "extrapolation range must be a whole number of magnitude steps")
    edges = np.linspace(new_mag_min, old_lo, n_new + 1)

    grid = forecast.grid
    pixels = np.unique(forecast.pixel_index)
    per_pixel_total = {int(p): 0.0 for p in pixels}
    for p, r in zip(forecast.pixel_index, forecast.rate):
        per_pixel_total[int(p)] += float(r)

    def b_for_pixel(pix):
        if special_regions:
            cx, cy = grid.pixel_center(pix)
            for (lon_lo, lon_hi, lat_lo, lat_hi), b_special in special_regions:
                if lon_lo <= cx <= lon_hi and lat_lo <= cy <= lat_hi:
                    return b_special
        return b_value

    new_pix, new_lo, new_hi, new_rate = [], [], [], []
    depth_lo = float(forecast.depth_lo.min()) if forecast.n_bins else 0.0
    depth_hi = float(forecast.depth_hi.max()) if forecast.n_bins else 30.0
    for pix in pixels:
        total = per_pixel_total[int(pix)]
        b_pix = b_for_pixel(int(pix))
        surv = tapered_gr_survivor(edges, b_pix, corner_mag, ref_mag=old_lo)
        bin_mass = surv[:-1] - surv[1:]  # survivor at old_lo is 1
        for j in range(n_new):
            new_pix.append(int(pix))
            new_lo.append(edges[j])
            new_hi.append(edges[j + 1])
            new_rate.append(total * bin_mass[j])

    return Forecast(
        grid,
        np.concatenate([np.array(new_pix, dtype=int), forecast.pixel_index]),
        np.concatenate([np.array(new_lo), forecast.mag_lo]),
        np.concatenate([np.array(new_hi), forecast.mag_hi]),
        np.concatenate([np.array(new_rate), forecast.rate]),
        np.concatenate([np.full(len(new_pix), depth_lo), forecast.depth_lo]),
        np.concatenate([np.full(len(new_pix), depth_hi), forecast.depth_hi]),
        window_start=forecast.window_start,
        window_end=forecast.window_end,
    )
