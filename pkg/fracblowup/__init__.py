"""
Boundary blow-up solutions of the fractional semilinear problem
(-Delta)^s u = -f(u) on the interval and the radial unit ball.
"""

__version__ = "1.0.0"
