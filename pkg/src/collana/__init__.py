"""Collection analysis for Horn clause programs.

Approximates the structured data a pure logic program manipulates (lists,
binary trees) by the multiset, set, or sequence of items it contains,
translates every clause into a linear-logic verification condition under an
approximating substitution, and discharges those conditions with specialised
decision procedures.  A ground interpreter doubles as an empirical oracle.
"""

__version__ = "0.1.0"
