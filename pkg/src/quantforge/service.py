"""HTTP estimation service.

Thin shell over the same document builders the CLI uses. Bodies in and
out are structured text; numbers travel as decimal strings. Sessions
are keyed by a hash of the canonical topology, so re-uploading a network
is idempotent and replaying a session after a restart reproduces every
response byte for byte.
"""

from __future__ import annotations

import hashlib
import threading
from pathlib import Path

from fastapi import FastAPI, Request, Response

from . import cli, costmodel, frontend
from .errors import QuantforgeError
from .passes import run_pipeline
from .serialize import render_structured


class _Malformed(Exception):
    pass


class _UnknownSession(Exception):
    pass


def _structured(doc, status: int = 200) -> Response:
    return Response(render_structured(doc), status_code=status,
                    media_type="application/json")


class _Session:
    def __init__(self, sid, net, text):
        self.sid = sid
        self.net = net
        self.text = text
        self.snapshots = {}   # pipeline hash -> (net, log)
        self.lock = threading.Lock()


class SessionStore:
    def __init__(self, session_dir=None):
        self._sessions = {}
        self._lock = threading.Lock()
        self._dir = Path(session_dir) if session_dir else None
        if self._dir:
            self._dir.mkdir(parents=True, exist_ok=True)

    def upload(self, text: str, fmt: str) -> _Session:
        net = frontend.parse_topology(text, fmt)
        canonical = frontend.emit_topology(net)
        sid = hashlib.sha256(canonical.encode()).hexdigest()[:12]
        with self._lock:
            if sid not in self._sessions:
                self._sessions[sid] = _Session(sid, net, canonical)
                if self._dir:
                    (self._dir / f"{sid}.net").write_text(canonical)
            return self._sessions[sid]

    def get(self, sid: str) -> _Session:
        with self._lock:
            if sid not in self._sessions:
                raise _UnknownSession(sid)
            return self._sessions[sid]

    def snapshot(self, sess: _Session, specs: list[str]):
        key = hashlib.sha256(",".join(specs).encode()).hexdigest()[:12]
        with sess.lock:
            if key not in sess.snapshots:
                net, log = run_pipeline(sess.net, specs)
                sess.snapshots[key] = (net, log)
                if self._dir:
                    stem = f"{sess.sid}-{key}"
                    (self._dir / f"{stem}.net").write_text(
                        frontend.emit_topology(net))
                    (self._dir / f"{stem}.passlog.json").write_text(
                        render_structured([r.to_payload() for r in log]))
            net, log = sess.snapshots[key]
            return key, net, log


async def _body(request: Request) -> dict:
    try:
        doc = await request.json()
    except Exception:
        raise _Malformed("body is not valid structured text")
    if not isinstance(doc, dict):
        raise _Malformed("body must be an object")
    return doc


def _need(doc: dict, key: str):
    if key not in doc:
        raise _Malformed(f"missing required field {key!r}")
    return doc[key]


def _pass_list(doc: dict):
    specs = doc.get("passes")
    if specs is None:
        return None
    if (not isinstance(specs, list)
            or not all(isinstance(s, str) for s in specs)):
        raise _Malformed("passes must be a list of pass names")
    return specs


def _coeffs(doc: dict):
    inline = doc.get("coefficients")
    if inline is None:
        return costmodel.DEFAULT_COEFFS
    if not isinstance(inline, dict):
        raise _Malformed("coefficients must be an object")
    return cli.coeffs_from_doc(inline)


def create_app(platform_path=None, session_dir=None) -> FastAPI:
    app = FastAPI(title="quantforge", docs_url=None, redoc_url=None)
    store = SessionStore(session_dir)

    def platform_of(name) -> costmodel.PlatformSpec:
        if not isinstance(name, str):
            raise _Malformed("platform must be a name string")
        return costmodel.get_platform(name, platform_path)

    def net_of(doc: dict):
        sid = _need(doc, "session")
        if not isinstance(sid, str):
            raise _Malformed("session must be a string id")
        sess = store.get(sid)
        specs = _pass_list(doc)
        if specs:
            _, net, _ = store.snapshot(sess, specs)
            return net
        return sess.net

    @app.exception_handler(_Malformed)
    async def _on_malformed(request, exc):
        return _structured({"error": "malformed-body", "detail": str(exc)}, 400)

    @app.exception_handler(_UnknownSession)
    async def _on_unknown(request, exc):
        return _structured({"error": "unknown-session",
                            "detail": f"no session {exc}"}, 404)

    @app.exception_handler(QuantforgeError)
    async def _on_domain(request, exc):
        return _structured(exc.payload(), 422)

    @app.get("/health")
    async def health():
        return _structured({"status": "ok"})

    @app.post("/networks")
    async def upload(request: Request):
        doc = await _body(request)
        text = _need(doc, "topology")
        if not isinstance(text, str):
            raise _Malformed("topology must be the topology text")
        fmt = doc.get("fmt", "native")
        if fmt not in ("native", "darknet"):
            raise _Malformed(f"unknown topology format {fmt!r}")
        sess = store.upload(text, fmt)
        return _structured({
            "session": sess.sid,
            "name": sess.net.name,
            "layer_count": len(sess.net.layers),
        })

    @app.get("/networks/{sid}/report")
    async def report(sid: str, passes: str | None = None):
        sess = store.get(sid)
        net = sess.net
        if passes:
            _, net, _ = store.snapshot(sess, passes.split(","))
        return _structured(cli.report_doc(net))

    @app.post("/networks/{sid}/passes")
    async def passes(sid: str, request: Request):
        doc = await _body(request)
        specs = _pass_list(doc)
        if specs is None:
            raise _Malformed("missing required field 'passes'")
        sess = store.get(sid)
        key, net, log = store.snapshot(sess, specs)
        return _structured({
            "passes": list(specs),
            "log": [r.to_payload() for r in log],
            "topology": frontend.emit_topology(net),
            "snapshot": key,
        })

    @app.post("/estimate")
    async def estimate(request: Request):
        doc = await _body(request)
        net = net_of(doc)
        platform = platform_of(_need(doc, "platform"))
        arch = doc.get("arch", "df")
        if arch not in ("df", "mo"):
            raise _Malformed(f"arch must be df or mo, got {arch!r}")
        folding = doc.get("folding")
        if folding is not None:
            folding = cli.folding_from_doc(folding)
        return _structured(cli.estimate_doc(net, platform, arch, folding,
                                            _coeffs(doc)))

    @app.post("/balance")
    async def balance(request: Request):
        doc = await _body(request)
        net = net_of(doc)
        platform = platform_of(_need(doc, "platform"))
        return _structured(cli.balance_doc(net, platform, _coeffs(doc)))

    @app.post("/schedule")
    async def schedule(request: Request):
        doc = await _body(request)
        net = net_of(doc)
        platform = platform_of(_need(doc, "platform"))
        raw = _need(doc, "engine")
        if not isinstance(raw, dict):
            raise _Malformed("engine must be an object with p, q, m")
        try:
            engine = (cli.as_int(raw["p"]), cli.as_int(raw["q"]),
                      cli.as_int(raw["m"]))
        except KeyError as exc:
            raise _Malformed(f"engine is missing {exc}")
        return _structured(cli.schedule_doc(net, engine, platform,
                                            _coeffs(doc)))

    @app.get("/platforms")
    async def platforms():
        catalog = costmodel.load_platform_catalog(platform_path)
        return _structured({
            "platforms": [catalog[name].to_payload()
                          for name in sorted(catalog)],
        })

    @app.post("/roofline")
    async def roofline(request: Request):
        doc = await _body(request)
        platform = platform_of(_need(doc, "platform"))
        w_bits = cli.as_int(doc.get("w_bits", 1))
        a_bits = cli.as_int(doc.get("a_bits", 1))
        intensities = doc.get("intensities")
        if intensities is not None:
            if not isinstance(intensities, list):
                raise _Malformed("intensities must be a list")
            intensities = [cli.as_float(i) for i in intensities]
        clock = doc.get("clock_mhz")
        if clock is not None:
            clock = cli.as_float(clock)
        return _structured(cli.roofline_doc(platform, w_bits, a_bits,
                                            intensities, _coeffs(doc), clock))

    @app.post("/sweep")
    async def sweep(request: Request):
        doc = await _body(request)
        net = net_of(doc)
        names = doc.get("platforms")
        if names is None:
            catalog = costmodel.load_platform_catalog(platform_path)
            specs = [catalog[n] for n in sorted(catalog)]
        else:
            if not isinstance(names, list):
                raise _Malformed("platforms must be a list of names")
            specs = [platform_of(n) for n in names]
        pairs = doc.get("pairs")
        if pairs is None:
            parsed_pairs = list(cli.PRECISION_PAIRS)
        else:
            if not isinstance(pairs, list):
                raise _Malformed("pairs must be a list")
            parsed_pairs = [_pair(p) for p in pairs]
        archs = doc.get("archs", ["auto"])
        if (not isinstance(archs, list)
                or any(a not in ("df", "mo", "auto") for a in archs)):
            raise _Malformed("archs must be a list drawn from df, mo, auto")
        return _structured(cli.sweep_doc(net, specs, parsed_pairs, archs,
                                         _coeffs(doc)))

    return app


def _pair(entry) -> tuple[int, int]:
    if isinstance(entry, dict):
        try:
            return cli.as_int(entry["w"]), cli.as_int(entry["a"])
        except KeyError:
            raise _Malformed(f"precision pair {entry!r} needs w and a")
    if isinstance(entry, list) and len(entry) == 2:
        return cli.as_int(entry[0]), cli.as_int(entry[1])
    raise _Malformed(f"precision pair {entry!r} must be [w, a] or {{w, a}}")


app = create_app()
