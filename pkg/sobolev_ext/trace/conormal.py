from typing import Union

import numpy as np

from ..bvp.fem import System, basis_norms


def conormal_residual(u: np.ndarray, system: System, test_dofs: Union[np.ndarray, None] = None) -> float:
    """
    max over test basis functions v of |B(u, v) - <f, v>| / ||v||_{W^{1,2}}.
    The default test space is the free dofs, hats vanishing near D.
    """
    test_dofs = system.free_dofs if test_dofs is None else np.asarray(test_dofs)
    if len(test_dofs) == 0:
        return 0.0
    residual = system.K @ np.asarray(u, dtype=float) - system.F
    return float(np.max(np.abs(residual[test_dofs]) / basis_norms(system.space)[test_dofs]))
