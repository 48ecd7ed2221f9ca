"""Sparse directions of maximal outlyingness (SPADIMO).

Given a multivariate data set and a flagged outlier, find the small set of
variables that make the case outlying.
"""

__version__ = "0.1.0"
