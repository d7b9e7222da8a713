"""IF ridge estimation of multicomponent signals from spectrograms."""

import os
import sys

# When built in-tree (plain CMake), the extension lives in the build
# directory; tests point RIDGEBAND_MODULE_DIR at it. Installed wheels place
# the extension inside this package instead, so alias it to the top-level
# name the imports below expect.
_module_dir = os.environ.get("RIDGEBAND_MODULE_DIR")
if _module_dir and _module_dir not in sys.path:
    sys.path.insert(0, _module_dir)
if "_ridgeband" not in sys.modules:
    try:
        import importlib

        sys.modules["_ridgeband"] = importlib.import_module("._ridgeband", __name__)
    except ImportError:
        pass

from _ridgeband import (  # noqa: E402,F401
    EstimationResult,
    GroundTruth,
    ModeSpec,
    StftConfig,
    add_noise,
    argmax_ridges,
    discard_halfwidth,
    gaussian_window,
    istft,
    kernel_sigma,
    linear_chirp,
    reconstruct_modes,
    ribbon_halfwidth,
    rqf,
    run_sem,
    spectral_kernel,
    spectrogram,
    stft,
    synthesize,
)

__all__ = [
    "EstimationResult",
    "GroundTruth",
    "ModeSpec",
    "StftConfig",
    "add_noise",
    "argmax_ridges",
    "discard_halfwidth",
    "gaussian_window",
    "istft",
    "kernel_sigma",
    "linear_chirp",
    "reconstruct_modes",
    "ribbon_halfwidth",
    "rqf",
    "run_sem",
    "spectral_kernel",
    "spectrogram",
    "stft",
    "synthesize",
]
