"""Random balanced economies for fixtures, demos and tests."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .ingest import MrioSnapshot, RegionSchema, write_canonical

FIXTURE_REGIONS = ("ALP", "BOR", "COR")
FIXTURE_SECTORS = ("goods", "services")
FIXTURE_YEARS = (2016, 2017, 2018, 2019)
FIXTURE_SEED = 20240611


def scaled_requirements(rng, n: int, spectral_radius: float, density: float = 1.0) -> np.ndarray:
    """Nonnegative random ``n x n`` matrix rescaled to the given spectral radius."""
    A = rng.uniform(0.0, 1.0, (n, n))
    if density < 1.0:
        A *= rng.uniform(size=(n, n)) < density
    rho = np.max(np.abs(np.linalg.eigvals(A))) if n else 0.0
    if rho > 0:
        # stay strictly at or below the target despite eigenvalue rounding
        A *= spectral_radius / rho * (1.0 - 1e-12)
    return A


def random_economy(rng, regions=FIXTURE_REGIONS, sectors=FIXTURE_SECTORS, year: int = 2000,
                   spectral_radius: float = 0.8) -> MrioSnapshot:
    """A snapshot whose output exactly equals its floating-point row sums."""
    schema = RegionSchema(tuple(regions), tuple(sectors))
    n, m = schema.flat_size, schema.n_regions
    A = scaled_requirements(rng, n, spectral_radius)
    Y = rng.uniform(1.0, 10.0, (n, m))
    # home bias: each region buys more of its own products
    home = schema.region_of()
    Y[np.arange(n), home] *= 3.0
    x = np.linalg.solve(np.eye(n) - A, Y.sum(axis=1))
    Z = A * x[None, :]
    x = Z.sum(axis=1) + Y.sum(axis=1)
    emission = rng.uniform(0.0, 5.0, n) * rng.uniform(0.2, 1.0, m).repeat(len(sectors))
    value = rng.uniform(0.2, 0.6, n) * x
    return MrioSnapshot(year, Z, Y, x, emission, value, schema)


def fixture_snapshots(seed: int = FIXTURE_SEED) -> list[MrioSnapshot]:
    rng = np.random.default_rng(seed)
    return [random_economy(rng, year=y) for y in FIXTURE_YEARS]


def write_fixture(workspace, seed: int = FIXTURE_SEED) -> Path:
    workspace = Path(workspace)
    for snap in fixture_snapshots(seed):
        write_canonical(snap, workspace)
    return workspace


def fixture_dir() -> Path:
    """Location of the bundled 3-region x 2-sector x 4-year fixture."""
    return Path(str(resources.files("mrio_equity") / "data" / "fixture"))


def fixture_config() -> Path:
    return fixture_dir() / "fixture.toml"
