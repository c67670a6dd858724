"""Certifiably optimal LEO Doppler positioning.

Thin python surface over the C++ core: measurement model, scenario
simulator, Gauss-Newton / dog-leg baselines, and the certifiable convex
pipeline (graduated weighting + moment relaxation + optimality certificate).
"""

from certidop._core import (  # noqa: F401
    Certificate,
    Dataset,
    DatasetMetadata,
    DopplerMeasurement,
    LocalSolution,
    LocalSolverConfig,
    NoiseConfig,
    ReceiverState,
    RunEntry,
    SatelliteState,
    ScenarioConfig,
    VelocityPattern,
    ecef_to_geodetic,
    generate_constellation,
    geodetic_to_ecef,
    initial_at_distance,
    load_dataset,
    place_receiver,
    predict_doppler,
    residuals_and_jacobian,
    run_pipeline,
    save_dataset,
    solve_certifiable,
    solve_dog_leg,
    solve_gauss_newton,
    synthesize_measurements,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
