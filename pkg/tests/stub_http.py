"""Scripted HTTP server for resolver and live-source tests.

Routes map a path to a per-method response ``(status, headers, body)``; the
key ``"*"`` applies to any method.  Every request is logged with its arrival
and completion times and the number of requests to the same host that were
in flight when it arrived.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


@dataclass
class LoggedRequest:
    method: str
    path: str
    host: str
    start: float
    end: float = 0.0
    concurrent: int = 0


class StubServer:
    def __init__(self, routes: dict, latency: float = 0.0):
        self.routes = routes
        self.latency = latency
        self.log: list[LoggedRequest] = []
        self._lock = threading.Lock()
        self._inflight: dict[str, int] = {}
        server = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, *args):
                pass

            def _serve(self):
                host = self.headers.get("Host", "")
                with server._lock:
                    server._inflight[host] = server._inflight.get(host, 0) + 1
                    entry = LoggedRequest(self.command, self.path, host, time.monotonic(),
                                          concurrent=server._inflight[host])
                    server.log.append(entry)
                try:
                    route = server.routes.get(self.path.split("?")[0], {"*": (404, {}, b"")})
                    status, headers, body = route.get(self.command, route.get("*", (405, {}, b"")))
                    delay = headers.get("X-Sleep")
                    if delay:
                        time.sleep(float(delay))
                    elif server.latency:
                        time.sleep(server.latency)
                    if isinstance(body, str):
                        body = body.encode("utf-8")
                    self.send_response(status)
                    for k, v in headers.items():
                        if k != "X-Sleep":
                            self.send_header(k, v)
                    self.send_header("Content-Length", str(len(body)))
                    self.end_headers()
                    if self.command != "HEAD":
                        self.wfile.write(body)
                except (BrokenPipeError, ConnectionResetError):
                    pass
                finally:
                    with server._lock:
                        server._inflight[host] -= 1
                        entry.end = time.monotonic()

            do_GET = do_HEAD = _serve

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.httpd.daemon_threads = True
        self.port = self.httpd.server_address[1]
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)

    def url(self, path: str, host: str = "127.0.0.1") -> str:
        return f"http://{host}:{self.port}{path}"

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.httpd.shutdown()
        self.httpd.server_close()

    def requests_for(self, host_prefix: str = "") -> list[LoggedRequest]:
        with self._lock:
            return [r for r in self.log if r.host.startswith(host_prefix)]


def redirect(to: str, status: int = 301) -> dict:
    return {"*": (status, {"Location": to}, b"")}


def ok(body: str = "ok") -> dict:
    return {"*": (200, {"Content-Type": "text/html"}, body)}
