import os

# The incremental-speedup criterion is specified single-threaded; pin BLAS
# pools before numpy spins them up.
for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")
