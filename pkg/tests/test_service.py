"""HTTP JSON service: endpoint contracts, error codes, concurrency."""

import json
import threading
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from segma.checkpoint import load_checkpoint
from segma.service import make_server


@pytest.fixture(scope="module")
def server(reference_run):
    model = load_checkpoint(reference_run["ckpt"])
    srv = make_server(model, "127.0.0.1", 0)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{srv.server_address[1]}"
    yield base, model
    srv.shutdown()
    srv.server_close()


def get(base, path):
    try:
        with urllib.request.urlopen(base + path, timeout=10) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read())


def post(base, path, payload):
    raw = json.dumps(payload).encode()
    req = urllib.request.Request(
        base + path, data=raw, headers={"Content-Type": "application/json"}
    )
    try:
        with urllib.request.urlopen(req, timeout=10) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read())


class TestInfo:
    def test_model_info(self, server):
        base, model = server
        status, info = get(base, "/model/info")
        assert status == 200
        assert info["latent_dim"] == 10
        assert info["classes"] == [1, 2, 3]
        assert np.asarray(info["means"]).shape == (3, 10)
        assert sum(info["masses"]) == pytest.approx(1.0, abs=1e-9)
        assert info["input_shape"] == [20]

    def test_unknown_route_404(self, server):
        base, _ = server
        status, body = get(base, "/nope")
        assert status == 404
        status, _ = post(base, "/also/nope", {})
        assert status == 404


class TestEncodeDecode:
    def test_round_trip_matches_direct_model(self, server):
        base, model = server
        x = np.random.default_rng(0).uniform(0, 1, 20)
        status, enc = post(base, "/encode", {"x": x.tolist()})
        assert status == 200
        assert len(enc["z"]) == 10
        assert sum(enc["posterior"]) == pytest.approx(1.0, abs=1e-9)
        assert enc["class"] in (1, 2, 3)
        status, dec = post(base, "/decode", {"z": enc["z"]})
        assert status == 200
        want = model.decode(model.encode(x))[0]
        assert np.asarray(dec["x"]) == pytest.approx(want, abs=1e-6)

    def test_json_precision_round_trip(self, server):
        base, model = server
        x = np.random.default_rng(1).uniform(0, 1, 20)
        _, enc = post(base, "/encode", {"x": x.tolist()})
        # serialized doubles parse back bit-identically
        assert np.array_equal(np.asarray(enc["z"]), model.encode(x)[0])

    def test_missing_field_400_names_field(self, server):
        base, _ = server
        status, body = post(base, "/encode", {"y": [1, 2]})
        assert status == 400
        assert "x" in body["error"]

    def test_dimension_mismatch_422_names_both(self, server):
        base, _ = server
        status, body = post(base, "/encode", {"x": [0.5] * 7})
        assert status == 422
        assert "7" in body["error"] and "20" in body["error"]

    def test_malformed_json_400(self, server):
        base, _ = server
        req = urllib.request.Request(
            base + "/encode", data=b"{not json", headers={"Content-Type": "application/json"}
        )
        with pytest.raises(urllib.error.HTTPError) as exc:
            urllib.request.urlopen(req, timeout=10)
        assert exc.value.code == 400


class TestSample:
    def test_fixed_seed_idempotent(self, server):
        base, _ = server
        _, a = post(base, "/sample", {"class": 2, "n": 4, "seed": 11})
        _, b = post(base, "/sample", {"class": 2, "n": 4, "seed": 11})
        assert a == b
        assert np.asarray(a["xs"]).shape == (4, 20)

    def test_invalid_class_422(self, server):
        base, _ = server
        status, body = post(base, "/sample", {"class": 9, "n": 2, "seed": 0})
        assert status == 422

    def test_zero_samples(self, server):
        base, _ = server
        status, body = post(base, "/sample", {"class": 1, "n": 0, "seed": 0})
        assert status == 200
        assert body["xs"] == []


class TestPaths:
    def test_interpolate_endpoints(self, server):
        base, model = server
        rng = np.random.default_rng(2)
        z1, z2 = rng.standard_normal(10), rng.standard_normal(10)
        status, body = post(base, "/interpolate", {"z1": z1.tolist(), "z2": z2.tolist(), "steps": 5})
        assert status == 200
        path = np.asarray(body["path"])
        assert path.shape == (5, 20)
        assert path[0] == pytest.approx(model.decode(z1)[0], abs=1e-9)
        assert path[-1] == pytest.approx(model.decode(z2)[0], abs=1e-9)

    def test_transfer_steps_two_gives_style_transfer_endpoints(self, server):
        base, model = server
        from segma.latent import style_transfer

        z = np.random.default_rng(3).standard_normal(10)
        status, body = post(
            base, "/transfer", {"z": z.tolist(), "source": 1, "target": 3, "steps": 2}
        )
        assert status == 200
        path = np.asarray(body["path"])
        assert path.shape == (2, 20)
        shifted = style_transfer(z, 1, 3, model.prior)
        assert path[0] == pytest.approx(model.decode(z)[0], abs=1e-12)
        assert path[1] == pytest.approx(model.decode(shifted.z)[0], abs=1e-12)
        posts = np.asarray(body["posteriors"])
        assert posts.shape == (2, 3)
        assert np.allclose(posts.sum(axis=1), 1.0, atol=1e-9)

    def test_transfer_infers_source_when_null(self, server):
        base, _ = server
        z = np.random.default_rng(4).standard_normal(10)
        status, _ = post(base, "/transfer", {"z": z.tolist(), "source": None, "target": 2, "steps": 3})
        assert status == 200

    def test_steps_below_two_422(self, server):
        base, _ = server
        z = [0.0] * 10
        status, _ = post(base, "/transfer", {"z": z, "source": 1, "target": 2, "steps": 1})
        assert status == 422

    def test_intensity(self, server):
        base, model = server
        from segma.latent import class_intensity

        z = np.random.default_rng(5).standard_normal(10)
        status, body = post(
            base, "/intensity", {"z": z.tolist(), "source": 1, "anti_target": 2, "alpha": 0.5}
        )
        assert status == 200
        want = model.decode(class_intensity(z, 1, 2, 0.5, model.prior).z)[0]
        assert np.asarray(body["x"]) == pytest.approx(want, abs=1e-12)
        assert sum(body["posterior"]) == pytest.approx(1.0, abs=1e-9)

    def test_negative_alpha_422(self, server):
        base, _ = server
        status, _ = post(
            base, "/intensity", {"z": [0.0] * 10, "source": 1, "anti_target": 2, "alpha": -1.0}
        )
        assert status == 422


class TestConcurrency:
    def test_concurrent_identical_requests_identical_bodies(self, server):
        base, _ = server
        payload = {"class": 1, "n": 3, "seed": 5}

        def call(_):
            return post(base, "/sample", payload)

        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(call, range(16)))
        assert all(status == 200 for status, _ in results)
        first = results[0][1]
        assert all(body == first for _, body in results)

    def test_request_counter_advances(self, server):
        base, _ = server
        get(base, "/model/info")
        get(base, "/model/info")
        # the counter lives server-side; hitting it twice must not error
        status, _ = get(base, "/model/info")
        assert status == 200
