# Why plain gradient descent stalls on smooth kernels.
#
# Part 1: the eigenvalues of a Gaussian kernel matrix fall off very fast,
# so after t steps only the top few directions have been fit.
# Part 2: fitting a step function with a heat kernel on the circle.
# A hundred steps vs a million steps barely differ.

import numpy as np

from eigenpro import KernelSpec, heaviside_demo, kernel_eigensystem, spectrum_report

rng = np.random.default_rng(0)
X = rng.standard_normal((1000, 5))
spec = KernelSpec("gaussian", 5.0)

es = kernel_eigensystem(spec, X, 160, 1000, seed=0)
print("k    lambda_1 / lambda_k+1")
for row in spectrum_report(es, [10, 20, 40, 80, 160]):
    print(f"{row.k:<4d} {row.ratio:12.1f}")

# the condition number seen by SGD after preconditioning the top k
# directions shrinks by exactly that ratio

res = heaviside_demo(0.5, [100, 10**6], J=200)
e100, e1m = res.gd_errors
print()
print(f"relative error after 1e2 steps : {e100:.4f}")
print(f"relative error after 1e6 steps : {e1m:.4f}")
print(f"best possible with 200 harmonics: {res.truncation_error:.4f}")
print(f"gain from 10^4 x more steps   : {e100 - e1m:.4f}")
print(f"still missing                  : {e1m - res.truncation_error:.4f}")
