"""Download the four MNIST IDX files into tests/data/mnist/.

Needs outbound network access; tries the common mirrors in order. The
acceptance suite's MNIST criterion skips itself until these files exist.
"""

import gzip
import sys
import urllib.request
from pathlib import Path

MIRRORS = [
    "https://ossci-datasets.s3.amazonaws.com/mnist/",
    "https://storage.googleapis.com/cvdf-datasets/mnist/",
    "http://yann.lecun.com/exdb/mnist/",
]
FILES = [
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
]


def fetch(out_dir: Path) -> bool:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in FILES:
        target = out_dir / name
        if target.exists():
            print(f"{name}: already present")
            continue
        for mirror in MIRRORS:
            url = f"{mirror}{name}.gz"
            try:
                print(f"{name}: trying {url}")
                with urllib.request.urlopen(url, timeout=30) as resp:
                    payload = gzip.decompress(resp.read())
                target.write_bytes(payload)
                print(f"{name}: {len(payload)} bytes")
                break
            except OSError as exc:
                print(f"{name}: {exc}")
        else:
            return False
    return True


if __name__ == "__main__":
    dest = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent.parent / "tests" / "data" / "mnist"
    sys.exit(0 if fetch(dest) else 1)
