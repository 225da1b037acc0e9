"""Magnetic Johnson-noise correlation tensors near small metal objects."""

from .errors import AccuracyWarning, ConfigError, ConvergenceWarning, DomainError, OverlapWarning
from .integral import DipoleSource, QuadratureConfig, b_ind_integral, f_tensor_numeric, shell_voxels
from .multipole import NoiseTensor, b_ind_multipole, f_tensor, ncf, thin_shell_factor, truncation_report
from .scene import (
    BoxPrimitive,
    Environment,
    Material,
    Scene,
    SpherePrimitive,
    VoxelObject,
    skin_depth,
    validate_regime,
    voxelize,
)

__version__ = "0.1.0"
