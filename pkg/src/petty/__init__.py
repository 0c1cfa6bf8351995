"""Equilateral sets in finite-dimensional normed spaces: planar and 3-D
extension solvers and exact l1 certificates."""
