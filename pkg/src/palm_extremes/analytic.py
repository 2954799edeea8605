#
# Closed-form quantities: the Gauss-Poisson Palm void probability, the
# density and distribution function of the minimum angle of the typical
# Poisson-Delaunay triangle, the limiting compound Poisson parameters of
# small Delaunay angles, Poisson partial sums and the scale invariant double
# integral behind the size-two cluster probability.

import math
from dataclasses import dataclass

from scipy import integrate, optimize

from palm_extremes.exceptions import PreconditionViolation
from palm_extremes.metrics import Pmf

PI_3 = math.pi / 3.0
QUAD_TOL_1D = 1e-10
QUAD_TOL_2D = 1e-8


def _require_positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise PreconditionViolation("%s must be positive and finite, got %r" % (name, value))


def a_of_v(v):
    """Area correction of the two-point cluster term; zero below v = 1."""
    if v < 0:
        raise PreconditionViolation("a(v) is defined for v >= 0, got %r" % (v,))
    if v < 1.0:
        return 0.0
    arg = min(1.0, max(-1.0, 1.0 / (2.0 * v)))
    return 2.0 * v * v * math.acos(arg) - 0.5 * math.sqrt(4.0 * v * v - 1.0)


def void_weights(params):
    """
    (p1, p2) of a GaussPoissonParams or of a bare pair.  The void formulas
    read nothing else, so a pair also covers the p0 = 0 Poisson limit.
    """
    if hasattr(params, 'p1'):
        return float(params.p1), float(params.p2)
    p1, p2 = params
    if not (p1 > 0 and p2 >= 0 and p1 + p2 <= 1.0 + 1e-12):
        raise PreconditionViolation("need p1 > 0, p2 >= 0 and p1 + p2 <= 1, got %r" % ((p1, p2),))
    return float(p1), float(p2)


def gp_void_prob(v, params):
    """
    P(no point of the reduced Palm Gauss-Poisson process in the closed disk
    of radius v around the origin), as printed: piecewise with a jump at 1.
    """
    if v < 0:
        raise PreconditionViolation("void probability needs v >= 0, got %r" % (v,))
    p1, p2 = void_weights(params)
    gamma = p1 + 2.0 * p2
    exponent = p1 * math.pi * v * v + p2 * (2.0 * math.pi * v * v - a_of_v(v))
    prefactor = gamma if v < 1.0 else p1
    return prefactor / gamma * math.exp(-exponent)


def gp_void_prob_limits(params):
    """(left limit, value) of gp_void_prob at v = 1; they differ in general."""
    p1, p2 = void_weights(params)
    left = math.exp(-(p1 * math.pi + 2.0 * p2 * math.pi))
    return left, gp_void_prob(1.0, params)


def nn_expected_exceedances(n, v, params):
    """Mean number of points of W_n whose nearest neighbour is farther than v."""
    _require_positive('n', n)
    p1, p2 = void_weights(params)
    return (p1 + 2.0 * p2) * n * gp_void_prob(v, params)


def mardia_pdf(t):
    """Density of the minimum angle of the typical Poisson-Delaunay triangle."""
    if t < 0.0 or t > PI_3:
        return 0.0
    return max(0.0, 4.0 / math.pi * math.sin(t)
               * ((math.pi - 3.0 * t) * math.cos(t) + math.sin(3.0 * t)))


def mardia_cdf(t):
    if t <= 0.0:
        return 0.0
    if t >= PI_3:
        upper = PI_3
    else:
        upper = t
    value, _ = integrate.quad(mardia_pdf, 0.0, upper, epsabs=QUAD_TOL_1D, epsrel=QUAD_TOL_1D,
                              limit=200)
    return min(1.0, value)


def mardia_quantile(p):
    if not 0.0 <= p <= 1.0:
        raise PreconditionViolation("probability must lie in [0, 1], got %r" % (p,))
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return PI_3
    return optimize.brentq(lambda t: mardia_cdf(t) - p, 0.0, PI_3, xtol=1e-13)


def expected_angle_exceedances(n, v):
    """2n P(alpha_min < v): mean number of small-angle Delaunay triangles in W_n."""
    _require_positive('n', n)
    return 2.0 * n * mardia_cdf(v)


@dataclass(frozen=True)
class CpLimitParams(object):
    tau: float
    pi1_mass: float
    pi2_mass: float
    gamma: float
    Q: Pmf

    @property
    def theta(self):
        """Extremal index: clusters per exceedance."""
        return self.gamma / self.tau

    @property
    def mean_cluster_size(self):
        return self.Q.mean()

    def cluster_masses(self):
        return [(1, self.pi1_mass), (2, self.pi2_mass)]


def cp_limit_params(tau):
    _require_positive('tau', tau)
    pi1 = tau / 2.0
    pi2 = tau / 4.0
    return CpLimitParams(tau=tau, pi1_mass=pi1, pi2_mass=pi2, gamma=pi1 + pi2,
                         Q=Pmf([0.0, 2.0 / 3.0, 1.0 / 3.0]))


def poisson_partial_sum(tau, k):
    """sum_{i<k} e^{-tau} tau^i / i!"""
    _require_positive('tau', tau)
    if int(k) != k or k < 1:
        raise PreconditionViolation("k must be a positive integer, got %r" % (k,))
    term = math.exp(-tau)
    terms = [term]
    for i in range(1, int(k)):
        term *= tau / i
        terms.append(term)
    return min(1.0, math.fsum(terms))


def _pn2_integrand(y, x):
    r2 = x * x + y * y
    if r2 == 0.0:
        return 0.0
    return (x * y / r2) ** 3


def pn2_integral(a):
    """Adaptive quadrature of int_0^a int_0^a (xy / (x^2 + y^2))^3 dx dy."""
    _require_positive('a', a)
    value, _ = integrate.dblquad(_pn2_integrand, 0.0, a, 0.0, a,
                                 epsabs=QUAD_TOL_2D * a * a, epsrel=QUAD_TOL_2D)
    return value
