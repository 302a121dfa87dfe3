"""Exponential polynomials u(x) = sum_k c_k exp(i k.x) on the torus."""

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
import math

import numpy as np

from . import kernels
from .errors import DomainError


@dataclass(frozen=True)
class ExponentialPolynomial:
    """Finite frequency -> coefficient map.

    ``freqs`` is a tuple of integer tuples in lexicographic order and
    ``coeffs`` the matching coefficients.  Coefficients may be ``int``,
    ``Fraction``, ``float`` or ``complex``; exact types are kept so that
    vanishing orders can be certified without rounding.
    """

    freqs: tuple
    coeffs: tuple

    def __post_init__(self):
        if len(self.freqs) != len(self.coeffs):
            raise DomainError("freqs and coeffs differ in length")
        if self.freqs:
            d = len(self.freqs[0])
            if any(len(k) != d for k in self.freqs):
                raise DomainError("mixed frequency dimensions")
            if len(set(self.freqs)) != len(self.freqs):
                raise DomainError("duplicate frequencies")

    @classmethod
    def from_terms(cls, terms):
        """Build from a mapping or iterable of ``(freq, coeff)`` pairs, dropping zeros."""
        if hasattr(terms, "items"):
            terms = terms.items()
        acc = {}
        for k, c in terms:
            k = tuple(int(v) for v in k)
            acc[k] = acc.get(k, 0) + c
        items = sorted((k, c) for k, c in acc.items() if c != 0)
        return cls(tuple(k for k, _ in items), tuple(c for _, c in items))

    @classmethod
    def from_arrays(cls, points, coeffs):
        return cls.from_terms(zip((tuple(int(v) for v in p) for p in np.asarray(points)), coeffs))

    @property
    def dim(self):
        return len(self.freqs[0]) if self.freqs else 0

    @property
    def terms(self):
        return len(self.freqs)

    def freq_array(self):
        return np.array(self.freqs, dtype=np.int64).reshape(len(self.freqs), self.dim)

    def coeff_array(self):
        return np.array([complex(c) for c in self.coeffs], dtype=np.complex128)

    def l1_norm(self):
        return float(sum(abs(complex(c)) for c in self.coeffs))

    def l2_norm_sq(self):
        """Torus mean of |u|^2 (Parseval)."""
        return float(sum(abs(complex(c)) ** 2 for c in self.coeffs))

    def diameter_sq(self):
        """Exact squared diameter of the frequency support."""
        best = 0
        for a, b in combinations(self.freqs, 2):
            best = max(best, sum((x - y) ** 2 for x, y in zip(a, b)))
        return best

    def diameter(self):
        return math.sqrt(self.diameter_sq())

    def abs_at(self, x):
        """|u| at each row of ``x`` (shape ``(m, d)``)."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if self.terms == 0:
            return np.zeros(x.shape[0])
        return kernels.expsum_abs(self.freq_array(), self.coeff_array(), x)

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return np.exp(1j * (x @ self.freq_array().T)) @ self.coeff_array()

    def shifted(self, shift):
        """Multiply by exp(i shift.x): every frequency moves by ``shift``."""
        return ExponentialPolynomial.from_terms(
            (tuple(a + b for a, b in zip(k, shift)), c) for k, c in zip(self.freqs, self.coeffs)
        )

    def lifted(self, last_freq):
        """Tensor with exp(i last_freq x_{d+1}) to live on a torus one dimension up."""
        return ExponentialPolynomial(tuple(k + (int(last_freq),) for k in self.freqs), self.coeffs)

    def to_json(self):
        return {
            "freqs": [list(k) for k in self.freqs],
            "coeffs": [_coeff_to_json(c) for c in self.coeffs],
        }


def _coeff_to_json(c):
    if isinstance(c, (int, Fraction)):
        return str(c)
    c = complex(c)
    return [c.real, c.imag]
