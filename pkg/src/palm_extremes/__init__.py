"""
Simulation of exceedance point processes and their compound Poisson limits:
Gauss-Poisson nearest-neighbour exceedances and small Poisson-Delaunay
angles, with exact point-pattern metrics and closed-form oracles.
"""

__version__ = '0.1.0'
