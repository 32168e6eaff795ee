"""Root finding: companion-matrix solve plus Halley refinement.

Circuit polynomials mix coefficients spanning hundreds of orders of
magnitude (inductances ~1e-9, capacitances ~1e-13, roots ~1e10), so both
steps work in a rescaled variable x = omega/s with s estimated from the
coefficient envelope; the max-magnitude coefficient normalization is applied
on top of that.
"""

from __future__ import annotations

from typing import Mapping, Sequence, Union

import numpy as np

from .poly import Polynomial, rescale_to_unit_disk

CoeffsLike = Union[Polynomial, Sequence[complex], np.ndarray]


def _ascending_coeffs(p: CoeffsLike, bindings: Mapping[str, object] | None) -> np.ndarray:
    if isinstance(p, Polynomial):
        return p.bind(bindings)
    return np.asarray(p, dtype=complex)


def _variable_scale(coeffs: np.ndarray) -> float:
    """Largest-root magnitude estimate (Cauchy-style), used as variable
    scale.

    Taking the maximum over coefficient pairs makes the estimate immune to
    rounding-noise coefficients, which are tiny and only ever shrink their
    candidate ratios.
    """
    mags = np.abs(coeffs)
    nz = np.nonzero(mags)[0]
    if len(nz) < 2:
        return 1.0
    hi = nz[-1]
    log_hi = np.log10(mags[hi])
    best = -30.0
    for k in nz[:-1]:
        candidate = (np.log10(mags[k]) - log_hi) / (hi - k)
        best = max(best, candidate)
    return float(10.0 ** min(max(best, -30.0), 30.0))


def _rescale(coeffs: np.ndarray, s: float) -> np.ndarray:
    return rescale_to_unit_disk(coeffs, s)


def polynomial_roots(
    p: CoeffsLike, bindings: Mapping[str, object] | None = None
) -> np.ndarray:
    """All complex roots with multiplicity, from the companion matrix."""
    coeffs = _ascending_coeffs(p, bindings)
    mags = np.abs(coeffs)
    if not np.any(mags > 0):
        raise ValueError("zero polynomial has no well-defined roots")
    # Leading coefficients that are exactly zero carry no roots.
    top = int(np.nonzero(mags)[0][-1])
    coeffs = coeffs[: top + 1]
    if len(coeffs) < 2:
        raise ValueError("degree-0 polynomial has no roots")
    s = _variable_scale(coeffs)
    scaled = _rescale(coeffs, s)
    roots = np.roots(scaled[::-1])
    return roots * s


def _horner_with_derivatives(coeffs: np.ndarray, z: complex) -> tuple[complex, complex, complex]:
    p = 0j
    dp = 0j
    ddp = 0j
    for c in coeffs[::-1]:
        ddp = ddp * z + 2.0 * dp
        dp = dp * z + p
        p = p * z + c
    return p, dp, ddp


def _raw_residual(coeffs: np.ndarray, z: complex) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        acc = 0j
        for c in coeffs[::-1]:
            acc = acc * z + c
    mag = abs(acc)
    return mag if np.isfinite(mag) else np.inf


def _halley(
    coeffs: np.ndarray,
    scaled: np.ndarray,
    s: float,
    guess: complex,
    rel_tol: float,
    max_iter: int,
) -> tuple[complex, bool]:
    """Refine one root; returns (root, derivative_vanished_flag).

    Steps are computed on the rescaled polynomial for conditioning, but a
    step is only accepted if it does not increase the residual of the
    original coefficients, which is the promised invariant.
    """
    z = complex(guess) / s
    best = z
    best_res = _raw_residual(coeffs, z * s)
    bailed = False
    for _ in range(max_iter):
        p, dp, ddp = _horner_with_derivatives(scaled, z)
        if p == 0:
            break
        denom = 2.0 * dp * dp - p * ddp
        if denom == 0 or dp == 0:
            bailed = True
            break
        step = 2.0 * p * dp / denom
        z_new = z - step
        res = _raw_residual(coeffs, z_new * s)
        if res > best_res:
            break
        z = z_new
        best, best_res = z, res
        if best_res == 0 or abs(step) <= rel_tol * max(abs(z), 1e-300):
            break
    return best * s, bailed


def halley_refine(
    p: CoeffsLike,
    guess: complex,
    rel_tol: float = 1e-11,
    max_iter: int = 100,
    bindings: Mapping[str, object] | None = None,
) -> complex:
    """Polish a root with Halley iterations.

    Stops when the relative step drops below ``rel_tol`` or after
    ``max_iter`` iterations; never returns an iterate with a larger
    residual than the input guess.  If the imaginary part ends up below
    ``rel_tol`` relative to the real part it is snapped to exactly zero,
    which also bounds the largest detectable quality factor.
    """
    coeffs = _ascending_coeffs(p, bindings)
    s = _variable_scale(coeffs)
    scaled = _rescale(coeffs, s)
    z, _ = _halley(coeffs, scaled, s, complex(guess), rel_tol, max_iter)
    if z.real != 0 and abs(z.imag) < rel_tol * abs(z.real):
        z = complex(z.real, 0.0)
    return z
