"""Certified lower bounds on the norms of hyperplane projections of
normed spaces whose unit ball is a centrally symmetric spherical polytope."""

__version__ = "0.1.0"
