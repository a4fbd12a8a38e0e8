# cython: language_level=3
# Compiled twin of the pure-Python kernels; single source of truth.
include "_kernels.py"
