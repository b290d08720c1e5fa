"""Physics-informed neural networks for faults with rate-and-state friction.

Subpackages and modules:

* :mod:`rsfpinn.autodiff` - reverse-mode tape plus second-order input jets
* :mod:`rsfpinn.network` - MLPs, Xavier initialisation, trial functions
* :mod:`rsfpinn.physics` - friction laws and manufactured solutions
* :mod:`rsfpinn.sampling`, :mod:`rsfpinn.losses` - collocation and residuals
* :mod:`rsfpinn.optimizer` - L-BFGS with a strong-Wolfe line search
* :mod:`rsfpinn.trainer` - split (1D) and joint (2D) training loops
* :mod:`rsfpinn.evaluation` - l2/L2 errors and Simpson quadrature
* :mod:`rsfpinn.cli` - command-line runner
"""
from .config import NetSpec, ProblemConfig
from .physics import FrictionParams, MaterialParams

__version__ = "0.1.0"
__all__ = ["FrictionParams", "MaterialParams", "NetSpec", "ProblemConfig", "__version__"]
