import os
from pathlib import Path

# repo root: /opt/circbody
BASE_DIR = Path(__file__).resolve().parents[2]

DATA_DIR = BASE_DIR / "data"

OUT_DIR_ENV_VAR = "CIRCBODY_OUT_DIR"

# ---------- numeric defaults ----------

DEFAULT_DENSITY = 1.0
MIN_PANELS = 8
DEFAULT_PANELS = 256

# exterior Neumann solvability: |∮ data dS| must stay below this
NEUMANN_FLUX_TOL = 1e-8
# relative asymmetry of M_f before symmetrization
MASS_ASYMMETRY_TOL = 1e-6

MIDPOINT_TOL = 1e-13
MIDPOINT_MAX_ITER = 50

DEFAULT_SEED = 12345
SIGNIFICANT_DIGITS = 17


def get_out_dir() -> Path:
    """
    Output directory for data files: $CIRCBODY_OUT_DIR when set, data/out otherwise.
    """
    env = os.getenv(OUT_DIR_ENV_VAR, "").strip()
    if env:
        return Path(env).expanduser().resolve()
    return DATA_DIR / "out"
