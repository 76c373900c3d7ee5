"""
Performance benchmarks for petzlab numerics.

This package contains benchmark tests for tracking the cost of the matrix
kernels, the typical-subspace enumeration and the unitary search over time.
"""
