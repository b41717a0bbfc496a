"""Local streaming service: control endpoint plus a live snapshot feed.

One flow worker per process.  Control messages are applied at iteration
boundaries only, so they never interrupt a step; the stream is an
ordered server-sent-events feed that first replays the full history
(every client sees the iteration-0 snapshot first) and then follows the
live run.  Endpoints:

* ``GET /geometry``   static mesh and polygon data for rendering
* ``GET /stream``     ``text/event-stream`` of snapshot records
* ``POST /control``   JSON actions: start, pause, resume, reset,
                      set_method, set_stepsize, status
"""

import json
import queue
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from . import geometry as geo
from . import snapshots as snap
from .flow import METHODS, FlowState
from .pipeline import build_pipeline


class FlowWorker(threading.Thread):
    """Runs the configured iteration, emitting one record per stride."""

    def __init__(self, service, config):
        super().__init__(daemon=True)
        self.service = service
        self.config = config
        self.control = queue.Queue()
        self.resume_event = threading.Event()
        self.resume_event.set()
        self.stop_flag = False
        self.method = config.method
        self.stepsize = config.stepsize

    def run(self):
        svc = self.service
        try:
            pl = build_pipeline(
                self.config.genus,
                self.config.domain_lengths,
                self.config.domain_twists,
                self.config.target_lengths,
                self.config.target_twists,
                depth=self.config.depth,
                steiner_per_side=self.config.steiner_per_side,
            )
        except Exception as exc:  # surfaced through /control status
            svc._worker_error(f"{type(exc).__name__}: {exc}")
            return
        svc._set_pipeline(pl)
        engine = pl.engine
        cons = pl.constants()
        if self.stepsize is None:
            self.stepsize = engine.jacobi_stepsize()
        P = pl.f0_local.copy()
        it = 0
        self._emit(pl, P, it, 0.0)
        while not self.stop_flag and it < self.config.max_iterations:
            self.resume_event.wait(timeout=0.25)
            if not self.resume_event.is_set():
                self._drain_control()
                continue
            self._drain_control()
            if self.stop_flag:
                break
            tau = engine.tension(P)
            tn = engine.tension_norm(tau)
            if tn <= self.config.tolerance:
                break
            if self.method == "fixed":
                step = self.stepsize
                P = engine.step_from_tension(P, tau, step)
            elif self.method == "optimal":
                step = engine.optimal_stepsize(P, tau, cons.beta)
                P = engine.step_from_tension(P, tau, step)
            elif self.method == "karcher-com":
                step = 0.0
                P = engine.com_step(P, "karcher", inner_tol=self.config.tolerance / 1000.0)
            else:
                step = 0.0
                P = engine.com_step(P, "cosh")
            it += 1
            if it % self.config.snapshot_stride == 0 or it == 1:
                self._emit(pl, P, it, step)
        if not self.stop_flag:
            self._emit(pl, P, it, 0.0)
            self.service._worker_done()

    def _drain_control(self):
        while True:
            try:
                msg = self.control.get_nowait()
            except queue.Empty:
                return
            action = msg.get("action")
            if action == "pause":
                self.resume_event.clear()
            elif action == "resume":
                self.resume_event.set()
            elif action == "stop":
                self.stop_flag = True
                self.resume_event.set()
            elif action == "set_method":
                self.method = msg["method"]
            elif action == "set_stepsize":
                self.stepsize = float(msg["stepsize"])

    def _emit(self, pl, P, it, step):
        engine = pl.engine
        tau = engine.tension(P)
        state = FlowState(
            P.copy(), it, engine.energy(P), engine.tension_norm(tau), step, self.method
        )
        line = snap.format_record(state, engine.globalize(P))
        self.service._broadcast(line)


class FlowService:
    """Holds the worker, the snapshot history, and client queues."""

    def __init__(self, config=None):
        self.lock = threading.Lock()
        self.history = []
        self.clients = []
        self.worker = None
        self.pipeline = None
        self.error = None
        self.finished = False
        self.out_fh = None
        self.base_config = config

    # -- worker callbacks ---------------------------------------------------

    def _broadcast(self, line):
        with self.lock:
            self.history.append(line)
            if self.out_fh is not None:
                self.out_fh.write(line + "\n")
                self.out_fh.flush()
            for q in self.clients:
                q.put(line)

    def _set_pipeline(self, pl):
        with self.lock:
            self.pipeline = pl
            if self.worker is not None and self.worker.config.out:
                self.out_fh = open(self.worker.config.out, "w")
                self.out_fh.write(
                    snap.format_header(self.worker.config, pl.graph.num_vertices) + "\n"
                )
                self.out_fh.flush()

    def _worker_error(self, message):
        with self.lock:
            self.error = message

    def _worker_done(self):
        with self.lock:
            self.finished = True

    # -- control actions ----------------------------------------------------

    def handle_control(self, msg):
        action = msg.get("action")
        if action == "start":
            return self.start(msg)
        if action == "status":
            with self.lock:
                return {
                    "ok": True,
                    "running": self.worker is not None and self.worker.is_alive(),
                    "records": len(self.history),
                    "finished": self.finished,
                    "error": self.error,
                }
        if self.worker is None:
            return {"ok": False, "error": "no active run"}
        if action in ("pause", "resume"):
            self.worker.control.put({"action": action})
            return {"ok": True, "action": action}
        if action == "set_method":
            method = msg.get("method")
            if method not in METHODS:
                return {"ok": False, "error": f"method must be one of {METHODS}"}
            self.worker.control.put({"action": "set_method", "method": method})
            return {"ok": True, "action": action, "method": method}
        if action == "set_stepsize":
            try:
                stepsize = float(msg.get("stepsize"))
                if stepsize <= 0:
                    raise ValueError
            except (TypeError, ValueError):
                return {"ok": False, "error": "stepsize must be a positive number"}
            self.worker.control.put({"action": "set_stepsize", "stepsize": stepsize})
            return {"ok": True, "action": action, "stepsize": stepsize}
        if action == "reset":
            return self.reset()
        return {"ok": False, "error": f"unknown action {action!r}"}

    def start(self, msg):
        with self.lock:
            if self.worker is not None and self.worker.is_alive():
                return {"ok": False, "error": "a run is already active; reset first"}
        cfg_data = dict(msg.get("config") or {})
        try:
            if self.base_config is not None:
                merged = self.base_config.to_dict()
                merged.update(cfg_data)
                config = snap.RunConfig.from_dict(merged)
            else:
                config = snap.RunConfig.from_dict(cfg_data)
        except (ValueError, TypeError) as exc:
            return {"ok": False, "error": str(exc)}
        with self.lock:
            self.history.clear()
            self.finished = False
            self.error = None
        self.worker = FlowWorker(self, config)
        self.worker.start()
        return {"ok": True, "action": "start"}

    def reset(self):
        worker = self.worker
        if worker is not None:
            worker.control.put({"action": "stop"})
            worker.join(timeout=30)
        with self.lock:
            self.worker = None
            self.history.clear()
            self.finished = False
            self.error = None
            if self.out_fh is not None:
                self.out_fh.close()
                self.out_fh = None
        return {"ok": True, "action": "reset"}

    # -- stream and geometry --------------------------------------------------

    def subscribe(self):
        q = queue.Queue()
        with self.lock:
            backlog = list(self.history)
            self.clients.append(q)
        return q, backlog

    def unsubscribe(self, q):
        with self.lock:
            if q in self.clients:
                self.clients.remove(q)

    def geometry_payload(self):
        with self.lock:
            pl = self.pipeline
        if pl is None:
            return {"ready": False}
        mesh = pl.mesh
        rho = mesh.rho()
        tri_domain = []
        for tri in mesh.triangles:
            tri_domain.append(
                {
                    "orbits": [int(o) for o, _ in tri],
                    "disk": [
                        geo.disk_coords(rho.point(w, mesh.vertices[o].point)).tolist()
                        for o, w in tri
                    ],
                }
            )
        axes = {}
        for side, rep in (("domain", pl.rep_domain), ("target", pl.rep_target)):
            axes[side] = []
            for lab in pl.group.labels:
                axes[side].append({"label": lab, "endpoints": _axis_endpoints(rep[lab])})
        return {
            "ready": True,
            "genus": pl.group.genus,
            "depth": mesh.depth,
            "vertices": geo.disk_coords(pl.graph.points).tolist(),
            "triangles": tri_domain,
            "domain_polygon": geo.disk_coords(pl.mesh.polygon.vertices).tolist(),
            "target_polygon": geo.disk_coords(pl.poly_target.vertices).tolist(),
            "axes": axes,
            "initial_images": geo.disk_coords(pl.f0_global).tolist(),
        }


def _axis_endpoints(iso):
    """Ideal endpoints of a hyperbolic isometry's axis on the disk circle."""
    m = iso.m
    a, b, c, d = m.ravel()
    if abs(c) < 1e-12:
        fixed = [np.inf, b / (d - a)] if abs(d - a) > 1e-12 else [np.inf]
    else:
        disc = np.sqrt(max((a + d) ** 2 - 4.0, 0.0))
        fixed = [(a - d + disc) / (2 * c), (a - d - disc) / (2 * c)]
    out = []
    for x in fixed:
        if np.isinf(x):
            out.append([0.0, 1.0])
        else:
            # boundary point of the half-plane -> disk circle via the
            # shared null direction (x, (x^2-1)/2, (x^2+1)/2)
            denom = 1.0 + (x * x + 1.0) / 2.0
            out.append([x / denom, (x * x - 1.0) / 2.0 / denom])
    # normalize onto the unit circle
    return [list(np.asarray(p) / max(np.hypot(*p), 1e-15)) for p in out]


class _Handler(BaseHTTPRequestHandler):
    service = None  # set by serve()

    def log_message(self, *args):  # quiet
        pass

    def _json(self, payload, status=200):
        body = json.dumps(payload, sort_keys=True).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path == "/geometry":
            self._json(self.service.geometry_payload())
        elif self.path == "/stream":
            self.send_response(200)
            self.send_header("Content-Type", "text/event-stream")
            self.send_header("Cache-Control", "no-cache")
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            q, backlog = self.service.subscribe()
            try:
                for line in backlog:
                    self.wfile.write(f"data: {line}\n\n".encode())
                self.wfile.flush()
                while True:
                    try:
                        line = q.get(timeout=1.0)
                    except queue.Empty:
                        self.wfile.write(b": keepalive\n\n")
                        self.wfile.flush()
                        continue
                    self.wfile.write(f"data: {line}\n\n".encode())
                    self.wfile.flush()
            except (BrokenPipeError, ConnectionResetError):
                pass
            finally:
                self.service.unsubscribe(q)
        else:
            self._json({"ok": False, "error": "unknown endpoint"}, status=404)

    def do_POST(self):
        if self.path != "/control":
            self._json({"ok": False, "error": "unknown endpoint"}, status=404)
            return
        length = int(self.headers.get("Content-Length", 0))
        try:
            msg = json.loads(self.rfile.read(length) or b"{}")
        except json.JSONDecodeError:
            self._json({"ok": False, "error": "malformed control message"}, status=400)
            return
        self._json(self.service.handle_control(msg))

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()


def make_server(config=None, host="127.0.0.1", port=8631):
    """Build (but do not start) the HTTP server; raises OSError if the
    port is busy."""
    service = FlowService(config)
    handler = type("BoundHandler", (_Handler,), {"service": service})
    httpd = ThreadingHTTPServer((host, port), handler)
    return httpd, service


def serve(config=None, host="127.0.0.1", port=8631):
    httpd, service = make_server(config, host, port)
    try:
        httpd.serve_forever()
    finally:
        service.reset()
        httpd.server_close()
