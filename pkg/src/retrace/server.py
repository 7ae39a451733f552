"""Operator websocket server.

Serves one interactive session per connection on ``/ws``, one live session
at a time; a second connection while one is running is rejected with an
error message.  Wire messages are JSON objects, one per frame.  Server to
client: ``{"type": "event", "event": {kind, line, data}}`` for every run
event with a log line, ``{"type": "prompt", "id", "text", "buttons"}`` for
operator questions (empty button list means free text), ``{"type":
"belief", "timestep", "literals": [{name, p}]}`` after each confirmed
action, and a terminal ``{"type": "done", "exit"}`` or ``{"type": "abort",
"exit", "reason"}``.  Client to server: ``{"type": "answer", "id",
"button"}`` and ``{"type": "pause"}`` / ``{"type": "resume"}``.  Anything
else gets ``{"type": "error", "error"}``.

The session runs on a worker thread.  Actions whose schema carries a prompt
are routed to the operator; the first button confirms, the rest report a
failure label.  Actions without prompts comply silently against a simulated
true world, exactly like the scripted simulator's default behavior.
"""

import asyncio
import queue
import threading
from pathlib import Path

from .runtime import EXIT_CONFIG, EnvError, Outcome, Session
from .sim import apply_most_likely

_FINISHED = object()
_HANGUP = object()


class OperatorBridge:
    """Thread side of the connection: ask questions, receive answers."""

    def __init__(self, push):
        self.push = push
        self._answers = queue.Queue()
        self._running = threading.Event()
        self._running.set()
        self._dead = False
        self._next_id = 0

    def gate(self):
        """Block while paused; raise once the operator is gone."""
        self._running.wait()
        if self._dead:
            raise EnvError("operator disconnected")

    def ask(self, text, buttons):
        self.gate()
        self._next_id += 1
        pid = self._next_id
        self.push({"type": "prompt", "id": pid, "text": text, "buttons": list(buttons)})
        while True:
            got = self._answers.get()
            if got is _HANGUP:
                self._dead = True
                raise EnvError("operator disconnected")
            aid, button = got
            if aid != pid:
                self.push({"type": "error", "error": f"no pending prompt with id {aid}"})
                continue
            return button

    def answer(self, aid, button):
        self._answers.put((aid, button))

    def pause(self):
        self._running.clear()

    def resume(self):
        self._running.set()

    def hangup(self):
        self._dead = True
        self._running.set()
        self._answers.put(_HANGUP)


class InteractiveEnv:
    """Environment port where the operator stands in for the world."""

    def __init__(self, bridge, init=()):
        self.bridge = bridge
        self.truth = set(init)

    def dispatch(self, action):
        self.bridge.gate()
        if action.prompt is None:
            self.truth = apply_most_likely(action, self.truth)
            return Outcome("ok")
        buttons = ["done"] + [f"cannot: {label}" for label in action.labels]
        while True:
            reply = self.bridge.ask(action.prompt, buttons)
            outcome = self._parse(reply)
            if outcome is not None:
                break
            self.bridge.push({"type": "error", "error": f"unknown button {reply!r}"})
        if outcome.kind == "ok":
            self.truth = apply_most_likely(action, self.truth)
        return outcome

    @staticmethod
    def _parse(reply):
        text = str(reply).strip()
        if text.lower() in ("done", "confirm", "ok"):
            return Outcome("ok")
        if text.lower() == "timeout":
            return Outcome("timeout")
        if text.lower().startswith("cannot"):
            rest = text[len("cannot"):].lstrip(" :")
            return Outcome("cannot", rest or None)
        return None

    def answer(self, question):
        self.bridge.gate()
        return self.bridge.ask(question, [])


def build_app(model, program, *, labels=("-", "-", "interactive"), retry_limit=3,
              init=(), alpha=None, static=None, on_complete=None):
    """Assemble the FastAPI app; ``on_complete(exit_code)`` fires per session."""
    from fastapi import FastAPI, WebSocket, WebSocketDisconnect

    app = FastAPI(title="retrace operator console")
    busy = threading.Lock()

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        if not busy.acquire(blocking=False):
            await ws.send_json({"type": "error", "error": "busy: a session is already running"})
            await ws.close()
            return
        loop = asyncio.get_running_loop()
        out = asyncio.Queue()

        def push(msg):
            loop.call_soon_threadsafe(out.put_nowait, msg)

        bridge = OperatorBridge(push)
        env = InteractiveEnv(bridge, init=init)
        state = {"code": None, "reason": None}

        def emit(event):
            if event.kind == "belief":
                push({
                    "type": "belief",
                    "timestep": event.data["t"],
                    "literals": [{"name": n, "p": p} for n, p in event.data["belief"]],
                })
                return
            if event.kind == "abort":
                state["reason"] = event.data.get("reason")
            push({"type": "event", "event": {"kind": event.kind, "line": event.line, "data": event.data}})

        session = Session(model, program, env, labels=labels, alpha=alpha,
                          retry_limit=retry_limit, emit=emit)

        def work():
            try:
                state["code"] = session.run()
            except Exception as exc:
                state["reason"] = f"internal error: {exc}"
                state["code"] = EXIT_CONFIG
            push(_FINISHED)

        worker = threading.Thread(target=work, daemon=True)
        worker.start()
        recv = asyncio.ensure_future(ws.receive_json())
        send = asyncio.ensure_future(out.get())
        try:
            while True:
                done, _ = await asyncio.wait({recv, send}, return_when=asyncio.FIRST_COMPLETED)
                if send in done:
                    msg = send.result()
                    if msg is _FINISHED:
                        code = state["code"]
                        if code == 0:
                            await ws.send_json({"type": "done", "exit": 0})
                        else:
                            await ws.send_json({"type": "abort", "exit": code, "reason": state["reason"]})
                        break
                    await ws.send_json(msg)
                    send = asyncio.ensure_future(out.get())
                if recv in done:
                    try:
                        incoming = recv.result()
                    except WebSocketDisconnect:
                        bridge.hangup()
                        break
                    except Exception:
                        push({"type": "error", "error": "messages must be JSON objects"})
                        recv = asyncio.ensure_future(ws.receive_json())
                        continue
                    _handle_client(incoming, bridge, push)
                    recv = asyncio.ensure_future(ws.receive_json())
        finally:
            for task in (recv, send):
                if not task.done():
                    task.cancel()
                elif not task.cancelled():
                    task.exception()
            bridge.hangup()
            worker.join(timeout=10)
            busy.release()
            if on_complete is not None:
                on_complete(state["code"] if state["code"] is not None else EXIT_CONFIG)
            try:
                await ws.close()
            except RuntimeError:
                pass

    if static is not None and Path(static).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static, html=True), name="console")
    return app


def _handle_client(msg, bridge, push):
    mtype = msg.get("type") if isinstance(msg, dict) else None
    if mtype == "answer":
        pid, button = msg.get("id"), msg.get("button")
        if not isinstance(pid, int) or not isinstance(button, str):
            push({"type": "error", "error": "answer needs an integer id and a string button"})
        else:
            bridge.answer(pid, button)
    elif mtype == "pause":
        bridge.pause()
    elif mtype == "resume":
        bridge.resume()
    else:
        push({"type": "error", "error": f"unknown message type: {mtype!r}"})


def serve(model, program, *, labels=("-", "-", "interactive"), retry_limit=3,
          init=(), alpha=None, host="127.0.0.1", port=8787, once=False, static=None):
    """Run the server; with ``once`` return the first session's exit code."""
    import uvicorn

    result = {"code": 0}
    server_box = {}

    def on_complete(code):
        result["code"] = code
        if once:
            server_box["server"].should_exit = True

    app = build_app(model, program, labels=labels, retry_limit=retry_limit,
                    init=init, alpha=alpha, static=static, on_complete=on_complete)
    # Frames are short JSON lines, so compression buys nothing, and some
    # clients lose queued messages when a close chases a deflated burst.
    config = uvicorn.Config(app, host=host, port=port, log_level="warning",
                            ws_per_message_deflate=False)
    server_box["server"] = uvicorn.Server(config)
    server_box["server"].run()
    return result["code"] if once else 0
