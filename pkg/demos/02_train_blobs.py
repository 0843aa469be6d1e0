"""Semi-supervised training on the 3-blob benchmark.

3000 unlabeled points plus 30 labeled ones (10 per class). The objective
is reconstruction error + 5 * log(squared CW distance to the mixture)
+ 10 * Gaussian-classifier cross-entropy on the labeled half of each
batch. Watch the mixture components claim one class each.
"""

import numpy as np

from segma import TrainingConfig, fit, synthetic_benchmark, test_error

train, test_x, test_y = synthetic_benchmark(seed=0)
print(f"train: {train.n_total} rows, {len(train.labeled_idx)} labeled, "
      f"{train.n_classes} classes, ambient dim {train.features.shape[1]}")

config = TrainingConfig(
    encoder_shape=(20, 64, 64, 10),  # mirrored decoder is implied
    epochs=12,
    batch_size=64,
    seed=0,
)
model, log = fit(train, config)

print("\nepoch  mse      log_cw   ce       total     val_acc")
for r in log.records:
    print(f"{r['epoch']:>5}  {r['mse']:.5f}  {r['log_cw']:+.3f}  {r['ce']:.5f}  "
          f"{r['total']:+.4f}  {r['val_accuracy']:.3f}")

err = test_error(model, test_x, test_y)
print(f"\nheld-out test error: {err:.3%}")
print(f"component masses (fixed from the 30 labels): {model.prior.masses}")
print(f"pairwise mean distances after training:")
for i in range(3):
    for j in range(i + 1, 3):
        d = np.linalg.norm(model.prior.means[i] - model.prior.means[j])
        print(f"  mu_{i+1} <-> mu_{j+1}: {d:.3f}")
