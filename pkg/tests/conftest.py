import os

# pin BLAS pools before numpy initializes: the suite's matrices are tiny
# and single-threaded kernels are both faster and quieter
for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(var, "1")
