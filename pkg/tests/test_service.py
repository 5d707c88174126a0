import http.client
import struct
import threading

import numpy as np
import pytest

from restyle.encoder import EncoderConfig, encode
from restyle.imaging import Image, downsample, encode_png_bytes
from restyle.mapping import apply_color_map, ColorMapMatrix
from restyle.model import Model
from restyle.pipeline import normalize
from restyle.service import create_server, params_body, projections_body
from restyle.synth import make_image


@pytest.fixture(scope="module")
def model():
    m = Model.initialized(EncoderConfig(k=16, thumbnail_size=64))
    rng = np.random.default_rng(0)
    m.weights.head_d_w += rng.normal(0, 0.2, m.weights.head_d_w.shape).astype(np.float32)
    m.weights.head_r_w += rng.normal(0, 0.2, m.weights.head_r_w.shape).astype(np.float32)
    return m


@pytest.fixture(scope="module")
def server(model):
    srv = create_server(model, port=0)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()
    srv.server_close()


def request(server, method, path, body=None):
    host, port = server.server_address[:2]
    conn = http.client.HTTPConnection(host, port, timeout=30)
    headers = {"Content-Type": "application/octet-stream"} if body else {}
    conn.request(method, path, body=body, headers=headers)
    resp = conn.getresponse()
    data = resp.read()
    result = (resp.status, dict(resp.getheaders()), data)
    conn.close()
    return result


def parse_params(body):
    assert body[:4] == b"NPPR"
    version, k = struct.unpack("<BH", body[4:7])
    fingerprint = body[7:15]
    floats = np.frombuffer(body[15:], dtype="<f4")
    d = floats[: k * k].reshape(k, k)
    r = floats[k * k :].reshape(k, k)
    return version, k, fingerprint, d, r


class TestParams:
    def test_matches_local_encode_bitwise(self, server, model):
        thumb = make_image(64, 64, seed=1)
        status, _, body = request(server, "POST", "/v1/params", encode_png_bytes(thumb))
        assert status == 200
        # the upload was quantized to PNG; local oracle must see the same bytes
        from restyle.imaging import decode_png_bytes
        decoded = decode_png_bytes(encode_png_bytes(thumb))
        d_local, r_local = encode(decoded, model.weights)
        assert body == params_body(model, d_local, r_local)

    def test_body_is_exactly_2063_bytes_for_k16(self, server):
        thumb = make_image(64, 64, seed=2)
        status, headers, body = request(server, "POST", "/v1/params", encode_png_bytes(thumb))
        assert status == 200
        assert len(body) == 15 + 8 * 16 * 16 == 2063
        assert headers["Content-Type"] == "application/octet-stream"

    def test_oversized_upload_rejected_413(self, server):
        big = Image(np.full((4096, 4096, 3), 0.5, dtype=np.float32))
        status, _, _ = request(server, "POST", "/v1/params", encode_png_bytes(big))
        assert status == 413

    def test_undecodable_body_400(self, server):
        status, _, _ = request(server, "POST", "/v1/params", b"not a png")
        assert status == 400

    def test_no_checkpoint_503(self):
        srv = create_server(None, port=0)
        thread = threading.Thread(target=srv.serve_forever, daemon=True)
        thread.start()
        try:
            status, _, _ = request(srv, "POST", "/v1/params",
                                   encode_png_bytes(make_image(64, 64, seed=3)))
            assert status == 503
        finally:
            srv.shutdown()
            srv.server_close()

    def test_server_purity(self, server):
        blob = encode_png_bytes(make_image(64, 64, seed=4))
        _, _, body1 = request(server, "POST", "/v1/params", blob)
        _, _, body2 = request(server, "POST", "/v1/params", blob)
        assert body1 == body2

    def test_defensive_resize(self, server, model):
        # a 256x256 upload is accepted and downsampled to the encoder's 64
        big_thumb = make_image(256, 256, seed=5)
        status, _, body = request(server, "POST", "/v1/params", encode_png_bytes(big_thumb))
        assert status == 200
        _, k, fingerprint, d, r = parse_params(body)
        assert k == 16 and fingerprint == model.fingerprint


class TestProjections:
    def test_identity_init_pattern(self):
        # k=3 has no seeded tail, so the served bytes are the bare identity pattern
        ident = Model.initialized(EncoderConfig(k=3, thumbnail_size=16, widths=(4, 8)))
        body = projections_body(ident)
        assert body[:4] == b"NPPJ"
        version, k = struct.unpack("<BH", body[4:7])
        assert k == 3
        floats = np.frombuffer(body[15:], dtype="<f4")
        p_n = floats[:9].reshape(3, 3)
        np.testing.assert_array_equal(p_n, np.eye(3, dtype=np.float32))

    def test_initialized_projections_compose_to_identity(self):
        model = Model.initialized(EncoderConfig(k=16, thumbnail_size=64))
        body = projections_body(model)
        floats = np.frombuffer(body[15:], dtype="<f4")
        p_n = floats[:48].reshape(3, 16)
        q_n = floats[48:96].reshape(16, 3)
        np.testing.assert_array_equal(p_n @ q_n, np.eye(3, dtype=np.float32))

    def test_cacheable_and_stable(self, server):
        s1, h1, b1 = request(server, "GET", "/v1/projections")
        s2, h2, b2 = request(server, "GET", "/v1/projections")
        assert s1 == s2 == 200
        assert b1 == b2
        assert h1["ETag"] == h2["ETag"]

    def test_body_size(self, server, model):
        _, _, body = request(server, "GET", "/v1/projections")
        assert len(body) == 15 + 4 * (3 * model.k) * 4 == 15 + 768


class TestHealth:
    def test_without_checkpoint(self):
        srv = create_server(None, port=0)
        thread = threading.Thread(target=srv.serve_forever, daemon=True)
        thread.start()
        try:
            status, _, body = request(srv, "GET", "/v1/health")
            assert status == 200
            assert body.decode().strip() == "ok null"
        finally:
            srv.shutdown()
            srv.server_close()

    def test_with_checkpoint(self, server, model):
        status, _, body = request(server, "GET", "/v1/health")
        assert status == 200
        assert body.decode().strip() == f"ok {model.fingerprint.hex()}"

    def test_repeated_identical(self, server):
        r1 = request(server, "GET", "/v1/health")
        r2 = request(server, "GET", "/v1/health")
        assert r1[2] == r2[2]

    def test_hot_reload_swaps_fingerprint(self):
        first = Model.initialized(EncoderConfig(k=4, thumbnail_size=16, widths=(4, 8), seed=1))
        second = Model.initialized(EncoderConfig(k=4, thumbnail_size=16, widths=(4, 8), seed=2))
        second.proj_s.p[0, 0] += 0.25
        srv = create_server(first, port=0)
        thread = threading.Thread(target=srv.serve_forever, daemon=True)
        thread.start()
        try:
            _, _, before = request(srv, "GET", "/v1/health")
            srv.load_model(second)
            _, _, after = request(srv, "GET", "/v1/health")
            assert before != after
            assert after.decode().strip() == f"ok {second.fingerprint.hex()}"
        finally:
            srv.shutdown()
            srv.server_close()


class TestSplitDeployment:
    def test_split_equivalence(self, server, model):
        """Client-side mapping with served parameters equals the local pipeline
        run on the same decoded thumbnail."""
        from restyle.imaging import decode_png_bytes

        image = make_image(128, 128, seed=6)
        blob = encode_png_bytes(downsample(image, 64))
        status, _, body = request(server, "POST", "/v1/params", blob)
        assert status == 200
        _, k, fingerprint, d_served, r_served = parse_params(body)

        z_client = apply_color_map(image, ColorMapMatrix(d_served.copy()), model.proj_n,
                                   clamp=False)
        d_local, _ = encode(decode_png_bytes(blob), model.weights)
        z_local = apply_color_map(image, d_local, model.proj_n, clamp=False)
        assert np.abs(z_client.data - z_local.data).max() <= 1e-6

    def test_bandwidth_budget_for_4k_image(self, server):
        """Full-size pixels stay local; network traffic stays under 64KB."""
        content = make_image(4096, 4096, seed=7, smooth=True)
        style = make_image(4096, 4096, seed=8, smooth=True)
        total_bytes = 0
        for img in (content, style):
            thumb = downsample(img, 256)
            payload = encode_png_bytes(thumb)
            status, _, body = request(server, "POST", "/v1/params", payload)
            assert status == 200
            total_bytes += len(payload) + len(body)
        assert total_bytes <= 64 * 1024, f"moved {total_bytes} bytes"

    def test_cors_headers_present(self, server):
        status, headers, _ = request(server, "GET", "/v1/health")
        assert headers["Access-Control-Allow-Origin"] == "*"
        status, headers, _ = request(server, "OPTIONS", "/v1/params")
        assert status == 204
        assert "POST" in headers["Access-Control-Allow-Methods"]

    def test_unknown_route_404(self, server):
        assert request(server, "GET", "/nope")[0] == 404
