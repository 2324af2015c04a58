"""Manages toolkit-wide numerical configuration.

This module uses Pydantic's BaseSettings so that every default the toolkit relies
on (quadrature sizes, tolerances, optimizer and flow parameters) lives in one
type-safe place. Values may be overridden from a .env file or the environment
for library use; the command line overrides them per run.
"""

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Defines and loads configuration settings for the toolkit.

    Attributes:
        model_config: Pydantic configuration to load from a .env file.

        QUAD_RADIAL_POINTS: Gauss-Legendre points per radial Hopf coordinate.
        QUAD_ANGULAR_POINTS: Trapezoid points per Hopf angle.
        MC_SAMPLES: Default sample count for Monte-Carlo rules.
        SEED: Default seed for every seeded generator.
        MAX_HALF_DIM: Largest supported half-dimension n (2n <= 8).

        NODE_NORM_TOL: Allowed deviation of a rule node from the unit sphere.
        WEIGHT_SUM_TOL: Allowed deviation of the total rule mass from 1.
        UNIT_VECTOR_TOL: Allowed deviation of a support direction from norm 1.
        SYMPLECTIC_BUILD_TOL: Tolerance for matrices the toolkit constructs.
        SYMPLECTIC_CHECK_TOL: Tolerance for verifying externally supplied matrices.
        TIE_TOL: Gap below which two union members count as tied at a node.
        GM_TOL: Tolerance of the moment-matrix identity test.

        FD_STEP: Central finite-difference step of the descent gradient.
        ARMIJO: Sufficient-decrease constant of the backtracking line search.
        MAX_ITERATIONS: Iteration cap per descent start.
        START_SCALE: Standard deviation of random descent starts.
        STARTS: Default number of descent starts.
        DESCENT_TOL: Gradient-norm stopping tolerance.

        CURVE_SAMPLES: Parameter samples used to discretize boundary curves.
        FLOW_MIN_STEPS: Minimum number of integrator steps per flow.
        FLOW_BOUNDARY_SAMPLES: Radial boundary samples per radial Hopf coordinate.
        FIRST_VARIATION_STEP: Time step of the first-variation difference.
        SECOND_VARIATION_STEP: Time step of the second-variation difference.

        CHAIN_TOL: Tolerance of the asserted strict inequality chains.
        URYSOHN_TOL: Tolerance of the Urysohn inequality check.

        THREADS: Worker cap for node evaluation and multi-start descent.
        CHUNK_SIZE: Nodes evaluated per work item.
        BLOCK_ELEMENTS: Largest node-by-point block held in memory at once.
        LOG_LEVEL: Logging level of the command-line driver.
    """
    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="ignore")

    QUAD_RADIAL_POINTS: int = 32
    QUAD_ANGULAR_POINTS: int = 64
    MC_SAMPLES: int = 200_000
    SEED: int = 0
    MAX_HALF_DIM: int = 4

    NODE_NORM_TOL: float = 1e-12
    WEIGHT_SUM_TOL: float = 1e-12
    UNIT_VECTOR_TOL: float = 1e-9
    SYMPLECTIC_BUILD_TOL: float = 1e-10
    SYMPLECTIC_CHECK_TOL: float = 1e-8
    TIE_TOL: float = 1e-12
    GM_TOL: float = 1e-7

    FD_STEP: float = 1e-5
    ARMIJO: float = 1e-4
    MAX_ITERATIONS: int = 500
    START_SCALE: float = 0.5
    STARTS: int = 5
    DESCENT_TOL: float = 1e-7

    CURVE_SAMPLES: int = 4096
    FLOW_MIN_STEPS: int = 200
    FLOW_BOUNDARY_SAMPLES: int = 16
    FIRST_VARIATION_STEP: float = 1e-3
    SECOND_VARIATION_STEP: float = 1e-2

    CHAIN_TOL: float = 1e-3
    URYSOHN_TOL: float = 1e-8

    THREADS: int = 1
    CHUNK_SIZE: int = 65_536
    BLOCK_ELEMENTS: int = 4_194_304
    LOG_LEVEL: str = "WARNING"


settings = Settings()
