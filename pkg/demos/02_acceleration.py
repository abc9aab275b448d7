# Plain SGD vs preconditioned SGD on a fast-decaying spectrum.
#
# Both runs use the step size from the same concentration bound, so the
# only difference is the preconditioner.

import numpy as np

from eigenpro import KernelSpec, TrainConfig, eigenpro_kernel_sgd, eigenpro_linear_sgd, synth_spectrum

# linear problem with covariance eigenvalues 1/i^2
ds, alpha_true = synth_spectrum(2000, 100, 1 / np.arange(1, 101) ** 2, noise_std=0.0, seed=1)
target = 1e-3

print("linear, lambda_i = 1/i^2, n=2000, d=100")
for k in (0, 5, 20):
    cfg = TrainConfig(mode="linear", k=k, M=2000, m=256, epochs=5000, target_loss=target)
    model, rep = eigenpro_linear_sgd(ds.X, ds.y, cfg)
    eta = rep.hyperparameters["eta_value"]
    print(f"  k={k:<3d} eta={eta:9.3f}  epochs to {target:g}: {rep.epochs_to_target(target)}")

# kernel problem, smooth target
rng = np.random.default_rng(0)
X = rng.standard_normal((400, 5))
y = np.sin(X[:, 0]) + 0.5 * X[:, 1]
spec = KernelSpec("gaussian", 5.0)

print("\nprimal gaussian kernel, n=400")
for k in (0, 20):
    cfg = TrainConfig(mode="primal_kernel", kernel=spec, k=k, M=400, m=64, epochs=2000,
                      target_loss=target)
    model, rep = eigenpro_kernel_sgd(spec, X, y, cfg)
    print(f"  k={k:<3d} epochs to {target:g}: {rep.epochs_to_target(target)}"
          f"  final loss {rep.final_loss:.2e}")
