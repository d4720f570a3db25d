"""Instance ingestion and generation for sensor-placement experiments.

Raw readings are real-valued time series per (feature, location); an
instance discretizes them into equal-width bins, sub-samples locations
and time steps, and pairs the resulting observation matrix with
cardinality bounds.  A seeded synthetic generator stands in for field
data so nothing external is required.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dcg import FeasibleRegion
from .oracles import ObservationMatrix

__all__ = [
    "RawReadings",
    "InstanceSpec",
    "discretize",
    "sample_instance",
    "save_instance",
    "load_instance",
    "synthetic_readings",
]


@dataclass(frozen=True)
class RawReadings:
    """values[feature][location][sample], rectangular and finite."""

    values: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 3:
            raise ValueError("raw readings must be a 3-d array")
        if not np.isfinite(arr).all():
            raise ValueError("raw readings must be finite")
        if len(self.feature_names) != arr.shape[0]:
            raise ValueError("one name per feature required")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def k_features(self) -> int:
        return self.values.shape[0]

    @property
    def n_locations(self) -> int:
        return self.values.shape[1]

    @property
    def t_samples(self) -> int:
        return self.values.shape[2]

    def to_csv(self) -> str:
        """Long format: one reading per row, header location,sample,feature,value."""
        lines = ["location,sample,feature,value"]
        for f, name in enumerate(self.feature_names):
            for loc in range(self.n_locations):
                for samp in range(self.t_samples):
                    lines.append(
                        f"{loc + 1},{samp + 1},{name},{float(self.values[f, loc, samp])!r}"
                    )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "RawReadings":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines or lines[0].strip() != "location,sample,feature,value":
            raise ValueError("raw CSV must start with 'location,sample,feature,value'")
        readings: dict[str, dict[tuple[int, int], float]] = {}
        order: list[str] = []
        for ln_no, ln in enumerate(lines[1:], start=2):
            parts = [p.strip() for p in ln.split(",")]
            if len(parts) != 4:
                raise ValueError(f"line {ln_no}: expected 4 fields, got {len(parts)}")
            loc, samp, feat, raw = parts
            if feat not in readings:
                readings[feat] = {}
                order.append(feat)
            readings[feat][(int(loc), int(samp))] = float(raw)
        locs = sorted({key[0] for per in readings.values() for key in per})
        samps = sorted({key[1] for per in readings.values() for key in per})
        values = np.empty((len(order), len(locs), len(samps)))
        for f, feat in enumerate(order):
            per = readings[feat]
            for li, loc in enumerate(locs):
                for si, samp in enumerate(samps):
                    if (loc, samp) not in per:
                        raise ValueError(
                            f"feature {feat!r} missing reading at "
                            f"location {loc}, sample {samp}"
                        )
                    values[f, li, si] = per[(loc, samp)]
        return cls(values, tuple(order))


@dataclass(frozen=True)
class InstanceSpec:
    n: int
    t: int
    k: int
    bounds: tuple[int, ...]
    bins: tuple[int, ...]
    rng_seed: int
    selected_locations: tuple[int, ...]
    selected_samples: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "bounds", tuple(self.bounds))
        object.__setattr__(self, "bins", tuple(self.bins))
        object.__setattr__(self, "selected_locations", tuple(self.selected_locations))
        object.__setattr__(self, "selected_samples", tuple(self.selected_samples))
        if len(self.bins) != self.k:
            raise ValueError("one bin count per feature required")


def discretize(raw: RawReadings, bins: Sequence[int]) -> ObservationMatrix:
    """Equal-width binning with bounds from the whole dataset per feature.

    A value exactly on an interior edge falls into the higher bin; the
    global maximum clamps into the top bin.  A constant feature maps to
    bin 0 everywhere.
    """
    if len(bins) != raw.k_features:
        raise ValueError(f"expected {raw.k_features} bin counts, got {len(bins)}")
    out = np.zeros(raw.values.shape, dtype=np.int64)
    for f, nbins in enumerate(bins):
        if nbins < 1:
            raise ValueError("bin counts must be at least 1")
        data = raw.values[f]
        lo, hi = float(data.min()), float(data.max())
        if hi <= lo or nbins == 1:
            continue
        width = (hi - lo) / nbins
        idx = np.floor((data - lo) / width).astype(np.int64)
        out[f] = np.clip(idx, 0, nbins - 1)
    return ObservationMatrix(out)


def sample_instance(
    raw: RawReadings, spec: InstanceSpec
) -> tuple[ObservationMatrix, FeasibleRegion, InstanceSpec]:
    """Deterministic sub-sample of locations and time steps.

    When the spec pins selected_locations/selected_samples they are used
    verbatim; otherwise both are drawn without replacement from the rng
    seed.  Discretization happens on the full dataset first so instances
    of different sizes share bin edges.  Returns the observations, the
    cardinality region, and the spec with the selection filled in.
    """
    if spec.k != raw.k_features:
        raise ValueError(f"spec has k={spec.k}, raw data has {raw.k_features} features")
    if spec.n > raw.n_locations:
        raise ValueError(f"spec needs {spec.n} locations, raw data has {raw.n_locations}")
    if spec.t > raw.t_samples:
        raise ValueError(f"spec needs {spec.t} samples, raw data has {raw.t_samples}")
    full = discretize(raw, spec.bins)
    rng = np.random.default_rng(spec.rng_seed)
    if spec.selected_locations:
        locs = np.asarray(spec.selected_locations, dtype=np.int64) - 1
    else:
        locs = np.sort(rng.choice(raw.n_locations, size=spec.n, replace=False))
    if spec.selected_samples:
        samps = np.asarray(spec.selected_samples, dtype=np.int64) - 1
    else:
        samps = np.sort(rng.choice(raw.t_samples, size=spec.t, replace=False))
    obs = ObservationMatrix(full.values[:, locs, :][:, :, samps])
    resolved = InstanceSpec(
        n=spec.n,
        t=spec.t,
        k=spec.k,
        bounds=spec.bounds,
        bins=spec.bins,
        rng_seed=spec.rng_seed,
        selected_locations=tuple(int(v) + 1 for v in locs),
        selected_samples=tuple(int(v) + 1 for v in samps),
    )
    return obs, FeasibleRegion(per_type_bounds=resolved.bounds), resolved


def _spec_dict(spec: InstanceSpec) -> dict:
    return {
        "n": spec.n,
        "t": spec.t,
        "k": spec.k,
        "B": list(spec.bounds),
        "bins": list(spec.bins),
        "rng_seed": spec.rng_seed,
        "selected_locations": list(spec.selected_locations),
        "selected_samples": list(spec.selected_samples),
    }


def save_instance(path, spec: InstanceSpec, obs: ObservationMatrix) -> None:
    """Single JSON document with a canonical field order."""
    doc = {
        "spec": _spec_dict(spec),
        "observations": {
            "dims": list(obs.values.shape),
            "values": [int(v) for v in obs.values.reshape(-1)],
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, separators=(",", ":"), sort_keys=False)
        fh.write("\n")


def load_instance(path) -> tuple[InstanceSpec, ObservationMatrix]:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON ({exc})") from None
    for section in ("spec", "observations"):
        if section not in doc:
            raise ValueError(f"{path}: missing the {section!r} section")
    sp = doc["spec"]
    try:
        spec = InstanceSpec(
            n=sp["n"],
            t=sp["t"],
            k=sp["k"],
            bounds=tuple(sp["B"]),
            bins=tuple(sp["bins"]),
            rng_seed=sp["rng_seed"],
            selected_locations=tuple(sp["selected_locations"]),
            selected_samples=tuple(sp["selected_samples"]),
        )
    except KeyError as exc:
        raise ValueError(f"{path}: spec section missing field {exc}") from None
    dims = doc["observations"].get("dims")
    flat = doc["observations"].get("values")
    if dims is None or flat is None:
        raise ValueError(f"{path}: observations need 'dims' and 'values'")
    values = np.asarray(flat, dtype=np.int64).reshape(dims)
    return spec, ObservationMatrix(values)


def synthetic_readings(
    n_locations: int = 54,
    t_samples: int = 400,
    k_features: int = 3,
    seed: int = 0,
) -> RawReadings:
    """Seeded per-location Gaussian mixtures, one series per feature."""
    rng = np.random.default_rng(seed)
    centers = [500.0, 22.0, 40.0]  # light / temperature / humidity flavored
    spreads = [180.0, 4.0, 12.0]
    values = np.empty((k_features, n_locations, t_samples))
    for f in range(k_features):
        center = centers[f % len(centers)]
        spread = spreads[f % len(spreads)]
        for loc in range(n_locations):
            n_comp = int(rng.integers(1, 4))
            means = rng.normal(center, spread, size=n_comp)
            sigmas = rng.uniform(0.05, 0.3, size=n_comp) * spread
            comp = rng.integers(0, n_comp, size=t_samples)
            noise = rng.standard_normal(t_samples)
            values[f, loc] = means[comp] + sigmas[comp] * noise
    return RawReadings(values, tuple(f"f{i + 1}" for i in range(k_features)))
