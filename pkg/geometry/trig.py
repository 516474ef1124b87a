# -*- coding: utf-8 -*-
"""Trigonometric interpolation of periodic samples on the boundary grid."""

from __future__ import annotations

import numpy as np


class TrigInterpolant:
    """Band-limited interpolant of samples taken at ``y_j = 2πj/n``.

    Evaluating at the nodes reproduces the samples; derivatives are exact
    derivatives of the interpolating trigonometric polynomial.
    """

    def __init__(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("periodic samples must be a 1-D array of length >= 2")
        n = values.size
        coeffs = np.fft.rfft(values) / n
        weights = np.full(coeffs.size, 2.0)
        weights[0] = 1.0
        if n % 2 == 0:
            weights[-1] = 1.0
        self.n = n
        self.wavenumbers = np.arange(coeffs.size)
        self._coeffs = coeffs * weights

    def __call__(self, y, derivative: int = 0) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        c = self._coeffs * (1j * self.wavenumbers) ** derivative
        phase = np.exp(1j * np.multiply.outer(y, self.wavenumbers))
        return np.real(phase @ c)

    def nodal_derivative(self, derivative: int = 1) -> np.ndarray:
        """Derivative sampled back on the nodes (spectral differentiation)."""
        nodes = 2.0 * np.pi * np.arange(self.n) / self.n
        return self(nodes, derivative)
