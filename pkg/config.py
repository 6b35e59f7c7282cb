import math
import os
from dotenv import load_dotenv

load_dotenv()


def _env_flag(name: str, default: str = "0") -> bool:
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes", "on")


class Config:
    """Configuration settings for NodalNet"""

    # Runtime
    THREADS = int(os.getenv("NODALNET_THREADS", "1"))
    LOG_LEVEL = os.getenv("NODALNET_LOG_LEVEL", "INFO")
    LOG_FILE = os.getenv("NODALNET_LOG_FILE", "")
    PRESETS_DIR = os.getenv(
        "NODALNET_PRESETS_DIR",
        os.path.join(os.path.dirname(os.path.abspath(__file__)), "presets"),
    )
    RUN_DESK_TESTS = _env_flag("NODALNET_RUN_DESK_TESTS")

    # Optimizer
    ADAM_BETA1 = 0.9
    ADAM_BETA2 = 0.999
    ADAM_EPSILON = 1e-8

    # Cyclic learning rate
    LR_MAX = 1e-3
    LR_MIN = 1e-4
    LR_DECAY = 0.99994
    LR_PERIOD_STEPS = 2000

    # Rollout / evaluation
    BLOWUP_THRESHOLD = 1e3
    RELATIVE_L2_FLOOR = 1e-14

    # Sampling
    SOBOL_SKIP = 1
    TWO_PI = 2.0 * math.pi

    # Reference solvers
    WENO_CFL = 0.5
    FINE_GRID_2D = 129
    ORACLE_GRID_MULTIPLIER = 4
    DEALIAS = True
    CN_CONDITION_LIMIT = 1e14

    # File formats
    NTDF_VERSION = 1
    NPMC_VERSION = 1
