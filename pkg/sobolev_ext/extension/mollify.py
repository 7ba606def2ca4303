import numpy as np
from scipy import ndimage

from ..errors import KernelUnderresolved
from ..funcspace.fields import GridField


def bump_kernel(n: int, t: float, h: float) -> np.ndarray:
    """theta_t sampled at lattice offsets and normalized to discrete mass 1."""
    reach = int(np.ceil(t / h))
    offsets = np.arange(-reach, reach + 1) * h
    mesh = np.meshgrid(*([offsets] * n), indexing="ij")
    rho2 = sum(m ** 2 for m in mesh) / t ** 2
    kernel = np.zeros_like(rho2)
    live = rho2 < 1.0
    kernel[live] = np.exp(1.0 - 1.0 / (1.0 - rho2[live]))
    return kernel / kernel.sum()


def mollify(field: GridField, t: float) -> GridField:
    """Discrete convolution with theta_t, theta a smooth bump supported in B(0, 1)."""
    if t < 2 * field.h:
        raise KernelUnderresolved(
            f"Mollifier radius {t:g} is below twice the spacing {field.h:g}",
            {"t": t, "h": field.h})
    kernel = bump_kernel(field.n, t, field.h)
    if field.components > 1:
        values = np.stack([ndimage.convolve(field.values[..., c], kernel, mode="nearest")
                           for c in range(field.components)], axis=-1)
    else:
        values = ndimage.convolve(field.values, kernel, mode="nearest")
    return field.with_values(values, label=f"mollified:{field.label}")


def indicator(origin: np.ndarray, h: float, dims, mask: np.ndarray, label: str = "") -> GridField:
    return GridField(origin, h, mask.reshape(dims).astype(float), label=label)
