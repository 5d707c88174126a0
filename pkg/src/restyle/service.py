"""Stateless parameter server: thumbnails in, color-map matrices out.

The encoder runs here; clients keep the full-resolution pixels and run the
per-pixel mapping themselves. Only two payloads ever cross the network: a
thumbnail PNG (tens of KB) and fixed-size binary matrix bundles, so traffic
is independent of the client's image resolution.

Binary bodies, little-endian:
  /v1/params      "NPPR" | version u8 | k u16 | fingerprint (8) | d | r
  /v1/projections "NPPJ" | version u8 | k u16 | fingerprint (8) | P_n | Q_n | P_s | Q_s
with every matrix as raw float32. Body sizes are 15 + 8*k^2 and 15 + 48*k.
"""

from __future__ import annotations

import struct
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from .encoder import encode
from .imaging import MalformedRasterError, UnsupportedBitDepthError, decode_png_bytes, downsample
from .model import Model

PARAMS_MAGIC = b"NPPR"
PROJECTIONS_MAGIC = b"NPPJ"
VERSION = 1

DEFAULT_THUMBNAIL_LIMIT = 256


def params_body(model: Model, d, r) -> bytes:
    out = bytearray()
    out += PARAMS_MAGIC
    out += struct.pack("<BH", VERSION, model.k)
    out += model.fingerprint
    out += np.ascontiguousarray(d.values, dtype="<f4").tobytes()
    out += np.ascontiguousarray(r.values, dtype="<f4").tobytes()
    return bytes(out)


def projections_body(model: Model) -> bytes:
    out = bytearray()
    out += PROJECTIONS_MAGIC
    out += struct.pack("<BH", VERSION, model.k)
    out += model.fingerprint
    for arr in (model.proj_n.p, model.proj_n.q, model.proj_s.p, model.proj_s.q):
        out += np.ascontiguousarray(arr, dtype="<f4").tobytes()
    return bytes(out)


class ParamServer(ThreadingHTTPServer):
    """Holds the (hot-swappable) model reference shared by request threads."""

    daemon_threads = True

    def __init__(self, address, model: Model | None,
                 thumbnail_limit: int = DEFAULT_THUMBNAIL_LIMIT):
        super().__init__(address, _Handler)
        self.model = model
        self.thumbnail_limit = thumbnail_limit

    def load_model(self, model: Model):
        # plain reference swap: in-flight requests keep the model they started with
        self.model = model


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: ParamServer

    def log_message(self, fmt, *args):  # keep test output quiet
        pass

    def _cors(self):
        self.send_header("Access-Control-Allow-Origin", "*")

    def _reply(self, status: int, body: bytes, content_type: str, extra=()):
        self.send_response(status)
        self._cors()
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        for name, value in extra:
            self.send_header(name, value)
        self.end_headers()
        self.wfile.write(body)

    def _error(self, status: int, message: str):
        self._reply(status, message.encode() + b"\n", "text/plain; charset=utf-8")

    def do_OPTIONS(self):
        self.send_response(204)
        self._cors()
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        model = self.server.model
        if self.path == "/v1/health":
            fp = model.fingerprint.hex() if model is not None else "null"
            self._reply(200, f"ok {fp}\n".encode(), "text/plain; charset=utf-8")
        elif self.path == "/v1/projections":
            if model is None:
                self._error(503, "no checkpoint loaded")
                return
            body = projections_body(model)
            self._reply(200, body, "application/octet-stream",
                        extra=[("ETag", f'"{model.fingerprint.hex()}"'),
                               ("Cache-Control", "public, max-age=3600")])
        else:
            self._error(404, "not found")

    def do_POST(self):
        if self.path != "/v1/params":
            self._error(404, "not found")
            return
        model = self.server.model
        if model is None:
            self._error(503, "no checkpoint loaded")
            return
        length = int(self.headers.get("Content-Length", 0))
        body = self.rfile.read(length)
        try:
            image = decode_png_bytes(body)
        except (MalformedRasterError, UnsupportedBitDepthError) as exc:
            self._error(400, f"undecodable body: {exc}")
            return
        if max(image.height, image.width) > self.server.thumbnail_limit:
            self._error(413, f"image exceeds thumbnail limit {self.server.thumbnail_limit}")
            return
        size = model.config.thumbnail_size
        if image.height != size or image.width != size:
            image = downsample(image, size)
        d, r = encode(image, model.weights)
        self._reply(200, params_body(model, d, r), "application/octet-stream")


def create_server(model: Model | None, host: str = "127.0.0.1", port: int = 0,
                  thumbnail_limit: int = DEFAULT_THUMBNAIL_LIMIT) -> ParamServer:
    return ParamServer((host, port), model, thumbnail_limit)
