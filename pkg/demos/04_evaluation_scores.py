"""Quantitative scores at desk scale: latent-classifier test error, the
Fréchet score of generated samples against real data, and the same score
for decoded interpolations.

The features are raw pixels here (PCA-50 for image data); scores are
comparable to each other, not to Inception-feature numbers.
"""

import numpy as np

from segma import (
    TrainingConfig,
    fid_proxy,
    fit,
    init_model,
    interpolation_fid,
    synthetic_benchmark,
    test_error,
)

train, test_x, test_y = synthetic_benchmark(seed=0)
config = TrainingConfig(encoder_shape=(20, 64, 64, 10), epochs=12, batch_size=64, seed=0)

untrained = init_model(config, n_classes=3, input_shape=train.input_shape)
trained, _ = fit(train, config)

for name, model in (("untrained", untrained), ("trained", trained)):
    err = test_error(model, test_x, test_y)
    fid = fid_proxy(model, test_x, 600, "raw_pixels", np.random.default_rng(0))
    ifid = interpolation_fid(model, test_x, 600, "raw_pixels", np.random.default_rng(1))
    print(f"{name:>9}: test error {err:.3f}  fid {fid:10.6f}  interpolation fid {ifid:10.6f}")

print("\nthe trained model must beat the untrained one on both Fréchet scores,")
print("and its interpolation score should sit within ~1.5x of the sampling score")
