"""Exact computations for bundles of strongly self-absorbing C*-algebras.

Submodules: :mod:`abgroup` (S-local abelian groups), :mod:`topology`
(spaces and cohomology), :mod:`catalog` (the fiber algebras), :mod:`calg`
(expressions, rewriting, T-duality diamonds), :mod:`ktheory` and :mod:`cli`.
"""

__version__ = "0.1.0"
