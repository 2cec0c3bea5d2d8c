"""Light field angular subsampling, staged view reconstruction and scoring."""

from .core import EpiImage, LightField, ViewIndex, extract_epi, get_view
from .errors import LFError
from .interpolate import Interpolator, InterpolatorSpec
from .metrics import EvalMode, MetricsReport, psnr, score_reconstruction, ssim
from .sampling import Pattern, ViewMask, ViewRole, compute_input_ratio, generate_pattern, subsample
from .scheduler import (CornerStrategy, InterpMode, ReconstructionPlan, build_basic_plan,
                        build_corner_plan, build_plan, build_recursive_plan, execute_plan,
                        validate_plan)
from .synthetic import Layer, SyntheticSceneSpec, generate_synthetic_lf

__version__ = "0.1.0"
