"""Spin up the JSON inference service on a trained checkpoint and walk
through every endpoint the browser explorer uses.
"""

import json
import tempfile
import threading
import urllib.request
from pathlib import Path

import numpy as np

from segma import TrainingConfig, fit, save_checkpoint, synthetic_benchmark
from segma.service import make_server

train, test_x, _ = synthetic_benchmark(seed=0)
config = TrainingConfig(encoder_shape=(20, 64, 64, 10), epochs=8, batch_size=64, seed=0)
model, _ = fit(train, config)

ckpt = Path(tempfile.mkdtemp()) / "demo.ckpt"
save_checkpoint(model, ckpt)
print(f"checkpoint: {ckpt} ({ckpt.stat().st_size} bytes)")

server = make_server(model, "127.0.0.1", 0)
threading.Thread(target=server.serve_forever, daemon=True).start()
base = f"http://127.0.0.1:{server.server_address[1]}"
print(f"service:    {base}\n")


def call(path, payload=None):
    if payload is None:
        with urllib.request.urlopen(base + path, timeout=5) as resp:
            return json.loads(resp.read())
    req = urllib.request.Request(base + path, data=json.dumps(payload).encode(),
                                 headers={"Content-Type": "application/json"})
    with urllib.request.urlopen(req, timeout=5) as resp:
        return json.loads(resp.read())


info = call("/model/info")
print(f"GET /model/info -> latent_dim={info['latent_dim']}, classes={info['classes']}, "
      f"input_shape={info['input_shape']}")

enc = call("/encode", {"x": test_x[0].tolist()})
print(f"POST /encode    -> class={enc['class']}, posterior={[round(p, 3) for p in enc['posterior']]}")

dec = call("/decode", {"z": enc["z"]})
print(f"POST /decode    -> reconstruction error "
      f"{float(np.linalg.norm(np.array(dec['x']) - test_x[0])):.4f}")

xs = call("/sample", {"class": 2, "n": 3, "seed": 0})
print(f"POST /sample    -> {len(xs['xs'])} decoded class-2 samples")

tr = call("/transfer", {"z": enc["z"], "source": None, "target": 2, "steps": 5})
targets = [round(p[1], 3) for p in tr["posteriors"]]
print(f"POST /transfer  -> P(class 2) along the path: {targets}")

it = call("/intensity", {"z": enc["z"], "source": enc["class"],
                         "anti_target": 2, "alpha": 0.5})
print(f"POST /intensity -> P(class 2) after shift: {round(it['posterior'][1], 4)}")

server.shutdown()
server.server_close()
print("\nservice stopped")
