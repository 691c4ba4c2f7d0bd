"""Config-driven orchestration: potential -> instanton -> GY -> two-level -> oracle.

The analysis report is a plain dict (JSON-ready) so identical configs yield
byte-identical output modulo the wall-time provenance field.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np
import scipy

from . import __version__
from .errors import ConfigError
from .fluctuation import gy_analysis
from .instanton import (InstantonSolution, action_from_trajectory,
                        action_quadrature, solve_trajectory)
from .oracle import (GridSpec, default_grid, diagonalize_schrodinger,
                     endpoint_wavefunction_values, propagator_2x2)
from .potential import (PotentialModel, adjacent_pairs, find_wells,
                        symmetric_double_well, triple_well)
from .twolevel import (TwoLevelSystem, kay_factor, overlap_even, overlap_odd,
                       two_level_energies, wavefunction_amplitudes)

DEFAULT_TOLERANCES = {"ode_tol": 1e-13, "quad_tol": 1e-10, "level_tol": 1e-9}
DEFAULT_GRID = {"n_points": 8192}
DEFAULT_WINDOW = 30.0


@dataclass(frozen=True)
class AnalysisConfig:
    potential: dict
    hbar: float = 1.0
    window: float = DEFAULT_WINDOW
    grid: dict = field(default_factory=lambda: dict(DEFAULT_GRID))
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    degeneracy: int | None = None
    n_levels: int | None = None

    def __post_init__(self):
        if self.hbar <= 0:
            raise ConfigError("hbar must be positive")
        if self.window <= 0:
            raise ConfigError("window must be positive")
        for key, val in self.tolerances.items():
            if key not in DEFAULT_TOLERANCES:
                raise ConfigError(f"unknown tolerance {key!r}")
            if val <= 0:
                raise ConfigError(f"tolerance {key} must be positive")

    @classmethod
    def from_dict(cls, doc: dict) -> "AnalysisConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config document must be a JSON object")
        unknown = set(doc) - {"potential", "hbar", "window", "grid",
                              "tolerances", "degeneracy", "n_levels"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "potential" not in doc:
            raise ConfigError("config must specify a potential")
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(doc.get("tolerances", {}))
        grid = dict(DEFAULT_GRID)
        grid.update(doc.get("grid", {}))
        try:
            return cls(
                potential=doc["potential"],
                hbar=float(doc.get("hbar", 1.0)),
                window=float(doc.get("window", DEFAULT_WINDOW)),
                grid=grid,
                tolerances=tol,
                degeneracy=doc.get("degeneracy"),
                n_levels=doc.get("n_levels"),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return {
            "potential": self.potential, "hbar": self.hbar,
            "window": self.window, "grid": self.grid,
            "tolerances": self.tolerances, "degeneracy": self.degeneracy,
            "n_levels": self.n_levels,
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def default_config_dict() -> dict:
    return AnalysisConfig(
        potential={"preset": "symmetric-double-well", "lambda": 0.2}
    ).to_dict()


def build_potential(spec: dict) -> PotentialModel:
    """Potential from a config fragment: {"poly": [...]} or a named preset."""
    if not isinstance(spec, dict):
        raise ConfigError("potential spec must be an object")
    if "poly" in spec:
        try:
            return PotentialModel(tuple(float(c) for c in spec["poly"]))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad poly coefficients: {exc}") from exc
    preset = spec.get("preset")
    if preset == "symmetric-double-well":
        lam = float(spec.get("lambda", 0.2))
        return symmetric_double_well(lam, a=spec.get("a"),
                                     omega=spec.get("omega"))
    if preset == "triple-well":
        return triple_well(float(spec.get("lambda", 1.0)),
                           float(spec.get("a", 1.0)))
    raise ConfigError(f"unknown potential spec: {spec!r}")


@dataclass(frozen=True, eq=False)
class PairAnalysis:
    """Everything computed for one adjacent well pair."""

    solution: InstantonSolution
    system: TwoLevelSystem
    gy: "object"
    big_k: float
    degeneracy: int
    swapped: bool


def _infer_degeneracy(wells, idx_initial: int) -> int:
    """Bounce multiplicity: the number of wells adjacent to the return well."""
    return 1 if idx_initial in (0, len(wells) - 1) else 2


def analyze_pairs(config: AnalysisConfig):
    """Run the semiclassical chain on every adjacent pair.

    Returns (model, wells, [PairAnalysis...]).
    """
    model = build_potential(config.potential)
    tol = config.tolerances
    wells = find_wells(model, level_tol=tol["level_tol"], hbar=config.hbar)
    model = model.with_zero_level(wells)
    wells = find_wells(model, level_tol=tol["level_tol"], hbar=config.hbar)
    pairs = adjacent_pairs(model, wells)

    results = []
    for j, pair in enumerate(pairs):
        sol = solve_trajectory(model, pair, ode_tol=tol["ode_tol"])
        gy = gy_analysis(model, sol, window=config.window)
        big_k = kay_factor(sol, gy.k0_analytic, config.hbar)
        # branch convention: the two-level "initial" is the lower-energy well
        e_left = config.hbar * pair.initial.omega / 2.0
        e_right = config.hbar * pair.final.omega / 2.0
        swapped = e_right < e_left
        e_lo, e_hi = sorted((e_left, e_right))
        idx_init = (j + 1) if swapped else j
        g = config.degeneracy or _infer_degeneracy(wells, idx_init)
        system = two_level_energies(e_lo, e_hi, config.hbar, big_k, g)
        results.append(PairAnalysis(sol, system, gy, big_k, g, swapped))
    return model, wells, results


def analyze(config: AnalysisConfig) -> dict:
    """Full pipeline; returns the analysis report as a JSON-ready dict."""
    t_start = time.perf_counter()
    model, wells, pair_results = analyze_pairs(config)

    n_levels = config.n_levels or len(wells)
    grid = _grid_from_config(config, model, wells)
    spectrum = diagonalize_schrodinger(model, grid, n_levels)
    endpoint = endpoint_wavefunction_values(
        spectrum, [w.position for w in wells])

    pair_blocks = []
    for res in pair_results:
        sol, sys_ = res.solution, res.system
        predicted_gap = sys_.E_plus - sys_.E_minus
        oracle_gap = _matched_oracle_gap(spectrum.energies, len(wells))
        block = {
            "instanton": sol.summary(),
            "action_trajectory_route": action_from_trajectory(sol),
            "gy": res.gy.as_dict(),
            "big_k": res.big_k,
            "degeneracy": res.degeneracy,
            "swapped_branch": res.swapped,
            "two_level": sys_.as_dict(),
            "predicted_gap": predicted_gap,
            "oracle_gap": oracle_gap,
            "gap_relative_error": abs(predicted_gap - oracle_gap) / oracle_gap
            if oracle_gap else None,
            "wavefunction_mixing": wavefunction_amplitudes(sys_),
        }
        pair_blocks.append(block)

    report = {
        "config": config.to_dict(),
        "wells": [
            {"position": w.position, "omega": w.omega,
             "ground_energy": w.ground_energy,
             "level": float(model.value(w.position))}
            for w in wells
        ],
        "pairs": pair_blocks,
        "oracle": {
            "energies": spectrum.energies,
            "error_estimates": spectrum.error_estimates,
            "endpoint_wavefunction_values": endpoint,
            "grid": {"x_min": grid.x_min, "x_max": grid.x_max,
                     "n_points": grid.n_points},
        },
        "provenance": {
            "config_digest": config.digest(),
            "package_version": __version__,
            "numpy_version": np.__version__,
            "scipy_version": scipy.__version__,
            "wall_time_s": round(time.perf_counter() - t_start, 3),
        },
    }
    return report


def _grid_from_config(config: AnalysisConfig, model, wells) -> GridSpec:
    g = config.grid
    base = default_grid(model, wells, hbar=config.hbar,
                        n_points=int(g.get("n_points", 8192)))
    return GridSpec(
        x_min=float(g.get("x_min", base.x_min)),
        x_max=float(g.get("x_max", base.x_max)),
        n_points=base.n_points,
        hbar=config.hbar,
    )


def _matched_oracle_gap(energies: list[float], n_wells: int) -> float | None:
    """The oracle gap the 2-level prediction targets.

    Two wells: E1 - E0.  Three wells (symmetric triple): E2 - E0, with E1
    the parity-protected outer-doublet level.
    """
    if n_wells == 2 and len(energies) >= 2:
        return energies[1] - energies[0]
    if n_wells == 3 and len(energies) >= 3:
        return energies[2] - energies[0]
    return None


def overlap_series(config: AnalysisConfig, tau_max: float, n_samples: int,
                   pair_index: int = 0) -> list[dict]:
    """tau grid with closed-form odd/even overlaps and the 2x2 matrix
    exponential oracle columns."""
    _, _, pair_results = analyze_pairs(config)
    sys_ = pair_results[pair_index].system
    taus = np.linspace(0.0, tau_max, n_samples)
    rows = []
    for t in taus:
        mat = propagator_2x2(sys_.e_i, sys_.e_f, sys_.hbar, sys_.big_k,
                             sys_.degeneracy, float(t))
        rows.append({
            "tau": float(t),
            "odd": float(overlap_odd(sys_, float(t))),
            "even": float(overlap_even(sys_, float(t))),
            "oracle_odd": float(mat[1, 0]),
            "oracle_even": float(mat[0, 0]),
        })
    return rows


def sweep(config: AnalysisConfig, parameter: str, values: list[float]) -> list[dict]:
    """One row per parameter value: S/hbar, predicted splitting, oracle
    splitting, relative error.  Failures are recorded per row and the sweep
    continues."""
    if not values:
        raise ConfigError("sweep requires a nonempty list of values")
    rows = []
    for v in values:
        spec = dict(config.potential)
        spec[parameter] = v
        sub = AnalysisConfig(
            potential=spec, hbar=config.hbar, window=config.window,
            grid=config.grid, tolerances=config.tolerances,
            degeneracy=config.degeneracy, n_levels=config.n_levels,
        )
        row = {"parameter": parameter, "value": v}
        try:
            report = analyze(sub)
            block = report["pairs"][0]
            row.update({
                "action_over_hbar": block["instanton"]["action"] / sub.hbar,
                "predicted_gap": block["predicted_gap"],
                "oracle_gap": block["oracle_gap"],
                "relative_error": block["gap_relative_error"],
                "status": "ok",
            })
        except Exception as exc:  # per-row failure, sweep continues
            row.update({"status": "error", "error": str(exc)})
        rows.append(row)
    return rows
