"""Direct transcription of the moduli definitions, used as a differential oracle.

Deliberately naive: every max is an explicit scan, monus is written out, and
theta / M / alpha / g are plain Python callables rather than RateFn trees.
"""
from fractions import Fraction
from functools import lru_cache


def _ceil(q):
    q = Fraction(q)
    return -((-q.numerator) // q.denominator)


def monus(a, b):
    return a - b if a > b else 0


class ReferenceModuli:
    def __init__(self, b, theta, M, alpha):
        self.b = Fraction(b)
        self.theta = theta
        self.M = M
        self.alpha = alpha
        self._thm = [theta(0)]

    def theta_M(self, n):
        while len(self._thm) <= n:
            self._thm.append(max(self._thm[-1], self.theta(len(self._thm))))
        return self._thm[n]

    def delta(self, k, L):
        return monus(_ceil(self.b**2 * (k + 1) ** 2) + L, 1)

    def beta(self, k):
        return self.theta_M(_ceil(self.b**2 * (k + 1) / 2)) + 1

    def phi(self, k):
        return _ceil(self.b**2 * (k + 1) ** 2) + self.beta(monus(_ceil(2 * (k + 1) ** 2 * Fraction(self.M(k))), 1))

    @staticmethod
    def chi(n, m, r):
        return max(monus(n + m, 1), m * (r + 1))

    @classmethod
    def chi_g(cls, g, n, r):
        return max(cls.chi(i, g(i), r) for i in range(n + 1))

    @classmethod
    def chi_tilde(cls, k, g, n, r):
        return max(2 * k + 1, cls.chi_g(g, n, r))

    def psi(self, k, g):
        @lru_cache(maxsize=None)
        def psi0(n):
            if n == 0:
                return 0
            return self.phi(self.chi_g(g, psi0(n - 1), 4 * k + 3))

        return psi0(self.alpha(4 * k + 3))

    def omega(self, k, g):
        @lru_cache(maxsize=None)
        def omega0(n):
            if n == 0:
                return 0
            return self.phi(self.chi_tilde(k, g, omega0(n - 1), 8 * k + 8))

        return omega0(self.alpha(8 * k + 7))
