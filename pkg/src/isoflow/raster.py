"""Hammer-projection rasters of sphere fields.

Pixels inside the 2:1 ellipse are inverse-projected to latitude/longitude,
the field is sampled bilinearly (periodic in longitude), and values are
mapped through a diverging blue-white-red scale centered at zero.  Output
is 8-bit RGB PNG.
"""

import numpy as np
from PIL import Image

_BLUE = np.array([59.0, 76.0, 192.0])
_WHITE = np.array([255.0, 255.0, 255.0])
_RED = np.array([180.0, 4.0, 38.0])


def hammer_project(lat, lon):
    """Forward Hammer projection; x in [-2 sqrt2, 2 sqrt2], y in [-sqrt2, sqrt2]."""
    denom = np.sqrt(1.0 + np.cos(lat) * np.cos(lon / 2.0))
    x = 2.0 * np.sqrt(2.0) * np.cos(lat) * np.sin(lon / 2.0) / denom
    y = np.sqrt(2.0) * np.sin(lat) / denom
    return x, y


def hammer_invert(x, y):
    """Inverse Hammer projection; returns (lat, lon, inside mask)."""
    z2 = 1.0 - (x / 4.0) ** 2 - (y / 2.0) ** 2
    inside = z2 >= 0.5
    z = np.sqrt(np.maximum(z2, 0.0))
    lat = np.arcsin(np.clip(z * y, -1.0, 1.0))
    lon = 2.0 * np.arctan2(z * x, 2.0 * (2.0 * z2 - 1.0))
    return lat, lon, inside


def diverging_rgb(t):
    """Map t in [-1, 1] to blue-white-red, white at zero."""
    t = np.clip(t, -1.0, 1.0)
    out = np.empty(t.shape + (3,))
    neg = t < 0
    for c in range(3):
        out[..., c] = np.where(
            neg,
            _WHITE[c] + (-t) * (_BLUE[c] - _WHITE[c]),
            _WHITE[c] + t * (_RED[c] - _WHITE[c]),
        )
    return out.astype(np.uint8)


def _sample_bilinear(field, lat, lon):
    colat = np.pi / 2.0 - lat  # image latitude -> field colatitude
    nlat = field.colat.shape[0]
    nlon = field.lon.shape[0]
    dcol = field.colat[1] - field.colat[0]
    dlon = field.lon[1] - field.lon[0]
    fi = np.clip((colat - field.colat[0]) / dcol, 0.0, nlat - 1.0)
    fj = (lon - field.lon[0]) / dlon
    i0 = np.floor(fi).astype(int)
    i1 = np.minimum(i0 + 1, nlat - 1)
    wi = fi - i0
    j0 = np.floor(fj).astype(int) % nlon
    j1 = (j0 + 1) % nlon
    wj = fj - np.floor(fj)
    v = field.values
    top = v[i0, j0] * (1 - wj) + v[i0, j1] * wj
    bot = v[i1, j0] * (1 - wj) + v[i1, j1] * wj
    return top * (1 - wi) + bot * wi


def render_raster(field, path, width=720, vmax=None):
    """Write a Hammer-projection PNG of the field; returns the path.

    ``vmax`` fixes the symmetric color scale; by default it is the max
    absolute sample (a zero field renders uniformly white).
    """
    height = width // 2
    xs = np.linspace(-2.0 * np.sqrt(2.0), 2.0 * np.sqrt(2.0), width)
    ys = np.linspace(np.sqrt(2.0), -np.sqrt(2.0), height)  # north on top
    X, Y = np.meshgrid(xs, ys)
    lat, lon, inside = hammer_invert(X, Y)
    samples = _sample_bilinear(field, lat, lon)
    if vmax is None:
        vmax = float(np.max(np.abs(field.values)))
    t = samples / vmax if vmax > 0 else np.zeros_like(samples)
    rgb = diverging_rgb(t)
    rgb[~inside] = 255
    Image.fromarray(rgb, mode="RGB").save(path, format="PNG")
    return path
