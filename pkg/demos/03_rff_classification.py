# Two-moons style classification with random Fourier features.
#
# Labels are one-hot encoded; predictions are scored by argmax.

import numpy as np

from eigenpro import TrainConfig, KernelSpec, c_error, predict, train, zscore
from eigenpro.data import Dataset, to_classification

rng = np.random.default_rng(3)
n = 3000
t = rng.uniform(0, np.pi, n)
lab = rng.integers(0, 2, n)
X = np.c_[np.cos(t) + lab, np.sin(t) * (1 - 2 * lab) + 0.5 * lab]
X += 0.15 * rng.standard_normal(X.shape)

ds = to_classification(Dataset(X, lab[:, None].astype(float)))
ds = zscore(ds)
train_ds, test_ds = ds.take(np.arange(2000)), ds.take(np.arange(2000, n))

cfg = TrainConfig(mode="rff", kernel=KernelSpec("gaussian", 0.1), d=2000, k=40, M=1000,
                  m=256, epochs=8)
model, rep = train(train_ds.X, train_ds.Y, cfg, eval_set=(test_ds.X, test_ds.Y),
                   task="classification_onehot")

for rec in rep.records:
    print(f"epoch {rec.epoch}: train loss {rec.train_loss:.4f}  test c-error {rec.metric:.3%}")

print("\nfinal test c-error:", c_error(predict(model, test_ds.X), test_ds.Y))
