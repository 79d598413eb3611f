"""Minimal in-process GraphQL stand-in for the subgraph, for crawler tests."""

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


class FakeSubgraph:
    def __init__(self, pairs=(), pair_days=(), token_days=(), fail_first=0, status=500):
        self.tables = {
            "pairs": sorted(pairs, key=lambda r: r["id"]),
            "pairDayDatas": sorted(pair_days, key=lambda r: r["id"]),
            "tokenDayDatas": sorted(token_days, key=lambda r: r["id"]),
        }
        self.fail_first = fail_first
        self.status = status
        self.requests = []
        self.lock = threading.Lock()

    def answer(self, body):
        query, variables = body["query"], body["variables"]
        root = next(r for r in ("pairDayDatas", "tokenDayDatas", "pairs") if f"{r}(" in query)
        rows = [r for r in self.tables[root] if r["id"] > variables["lastId"]]
        if "start" in variables:
            rows = [r for r in rows if variables["start"] <= r["date"] <= variables["end"]]
        return {"data": {root: rows[: variables["first"]]}}

    def __enter__(self):
        fake = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
                with fake.lock:
                    fake.requests.append((body, dict(self.headers)))
                    fail = len(fake.requests) <= fake.fail_first
                if fail:
                    self.send_response(fake.status)
                    self.end_headers()
                    return
                data = json.dumps(fake.answer(body)).encode()
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        self.thread.start()
        self.url = f"http://127.0.0.1:{self.server.server_address[1]}/"
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()


def addr(prefix, i):
    return "0x" + f"{prefix}{i:x}".rjust(40, "0")


def make_pairs(n):
    out = []
    for i in range(n):
        out.append({
            "id": addr("a", i),
            "createdAtTimestamp": str(1600000000 + i),
            "token0": {"id": addr("b", i), "symbol": f"T{i}", "name": f"Token {i}"},
            "token1": {"id": addr("c", i), "symbol": f"U{i}", "name": f"Other {i}"},
        })
    return out
