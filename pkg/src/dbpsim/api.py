"""HTTP interface: scenario upload, session control, state polling, a
server-push event stream, and history labeling/metrics.

Every mutation goes through POST .../commands into the owning session's
queue; one executor task per session drains the queue at step boundaries and
steps the instance while it is Running. Reads serve immutable views, so any
number of clients can poll or stream one session. The stream is an
optimization only: everything it carries is reconstructible by polling
/state with a since-cursor.
"""

from __future__ import annotations

import asyncio
import json
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse, StreamingResponse

from .engine import Command, CommandResult, Session, SessionFault, Status, TERMINAL
from .history import HistoryError, HistoryStore, Label
from .scenario import Scenario, ValidationError, load_scenario
from .storage import write_history_file
from .viewmodel import state_delta, state_view

_REJECTION_STATUS = {"wrong-state": 409, "invalid": 422, "not-found": 404}

_LABELS = {
    "good": Label.GOOD_PRACTICE,
    "bad": Label.BAD_PRACTICE,
    "unlabeled": Label.UNLABELED,
    "GoodPractice": Label.GOOD_PRACTICE,
    "BadPractice": Label.BAD_PRACTICE,
    "Unlabeled": Label.UNLABELED,
}


class SessionRunner:
    """Owns one session: a queue of commands, the stepping task, and the
    subscriber queues feeding the event stream."""

    def __init__(self, session: Session, step_delay: float, on_terminal=None):
        self.session = session
        self.step_delay = step_delay
        self.on_terminal = on_terminal
        self.queue: asyncio.Queue[tuple[Command, asyncio.Future]] = asyncio.Queue()
        self.subscribers: list[asyncio.Queue] = []
        self.event_seq = 0
        self._log_cursor = 0
        self._recorded = False
        self.task: asyncio.Task | None = None

    def start(self) -> None:
        self.task = asyncio.get_running_loop().create_task(self._loop())

    async def submit(self, command: Command) -> CommandResult:
        future: asyncio.Future = asyncio.get_running_loop().create_future()
        await self.queue.put((command, future))
        return await asyncio.wait_for(future, timeout=60.0)

    def _publish(self, event_type: str, data: dict) -> None:
        self.event_seq += 1
        payload = {"seq": self.event_seq, "type": event_type, "data": data}
        for q in self.subscribers:
            q.put_nowait(payload)

    def _publish_progress(self, prev_status: Status, prev_steps: int) -> None:
        session = self.session
        for entry in session.log[self._log_cursor :]:
            self._publish("log", entry.to_json())
        self._log_cursor = len(session.log)
        if session.step_index > prev_steps:
            data = {
                "stepIndex": session.step_index,
                "clock": session.clock,
                "trace": [r.to_json() for r in session.trace[-(session.step_index - prev_steps) :]]
                if session.trace
                else [],
                "version": {
                    "revision": session.rule_set.revision,
                    "stepIndex": session.step_index,
                },
            }
            self._publish("step", data)
            if session.watch_points:
                self._publish(
                    "watch", {"watchPoints": [wp.to_json() for wp in session.watch_points]}
                )
        if session.status is not prev_status:
            self._publish("status", {"status": session.status.value})
        if session.status in TERMINAL and not self._recorded:
            self._recorded = True
            try:
                session.record_instance()
            except Exception as exc:  # duplicate content clash: log, keep serving
                self._publish("log", {"step": session.step_index, "clock": session.clock,
                                      "category": "warning", "message": str(exc)})
            if self.on_terminal is not None:
                self.on_terminal()

    async def _loop(self) -> None:
        session = self.session
        while True:
            prev_status, prev_steps = session.status, session.step_index
            if session.status is Status.RUNNING:
                try:
                    command, future = self.queue.get_nowait()
                except asyncio.QueueEmpty:
                    try:
                        session.step()
                    except SessionFault:
                        pass
                    self._publish_progress(prev_status, prev_steps)
                    if self.step_delay:
                        await asyncio.sleep(self.step_delay)
                    else:
                        await asyncio.sleep(0)
                    continue
            else:
                command, future = await self.queue.get()
            result = session.apply_command(command)
            if not future.done():
                future.set_result(result)
            self._publish_progress(prev_status, prev_steps)


def create_app(
    history: HistoryStore | None = None,
    history_path: str | Path | None = None,
    step_delay: float = 0.05,
) -> FastAPI:
    from contextlib import asynccontextmanager

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        if app.state.history_path is not None:
            write_history_file(app.state.history_path, app.state.history)

    app = FastAPI(title="dbpsim", version="0.1.0", lifespan=lifespan)
    app.state.history = history if history is not None else HistoryStore()
    app.state.history_path = Path(history_path) if history_path else None
    app.state.scenarios: dict[str, Scenario] = {}
    app.state.sessions: dict[str, SessionRunner] = {}
    app.state.scenario_seq = 0
    app.state.session_seq = 0
    app.state.step_delay = step_delay

    def flush_history() -> None:
        if app.state.history_path is not None:
            write_history_file(app.state.history_path, app.state.history)

    @app.exception_handler(ValidationError)
    async def _validation_error(request: Request, exc: ValidationError):
        return JSONResponse(
            status_code=422,
            content={"error": "validation", "path": exc.path, "message": exc.message},
        )

    # Scenarios

    @app.post("/scenarios")
    async def upload_scenario(request: Request):
        body = await request.body()
        scenario = load_scenario(body)
        app.state.scenario_seq += 1
        scenario_id = f"sc{app.state.scenario_seq}"
        app.state.scenarios[scenario_id] = scenario
        return {
            "scenarioId": scenario_id,
            "scenarioHash": scenario.scenario_hash,
            "name": scenario.name,
        }

    @app.get("/scenarios")
    async def list_scenarios():
        return [
            {"scenarioId": sid, "scenarioHash": sc.scenario_hash, "name": sc.name}
            for sid, sc in app.state.scenarios.items()
        ]

    @app.get("/scenarios/{scenario_id}")
    async def get_scenario(scenario_id: str):
        scenario = app.state.scenarios.get(scenario_id)
        if scenario is None:
            return JSONResponse(status_code=404, content={"error": "unknown scenario"})
        return {
            "scenarioId": scenario_id,
            "scenarioHash": scenario.scenario_hash,
            "name": scenario.name,
            "definition": scenario.raw,
        }

    # Sessions

    @app.post("/sessions")
    async def create_session(body: dict):
        scenario_id = body.get("scenarioId")
        scenario = app.state.scenarios.get(scenario_id)
        if scenario is None:
            return JSONResponse(status_code=404, content={"error": "unknown scenario"})
        seed = body.get("seed")
        if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
            return JSONResponse(status_code=422, content={"error": "seed must be an integer"})
        app.state.session_seq += 1
        session_id = f"s{app.state.session_seq}"
        session = Session(
            scenario,
            seed=seed,
            session_id=session_id,
            instance_id=body.get("instanceId"),
            mode="interactive",
            history=app.state.history,
        )
        runner = SessionRunner(session, app.state.step_delay, on_terminal=flush_history)
        runner.start()
        app.state.sessions[session_id] = runner
        return {
            "sessionId": session_id,
            "instanceId": session.instance_id,
            "scenarioHash": session.scenario_hash,
            "status": session.status.value,
        }

    @app.get("/sessions")
    async def list_sessions():
        return [
            {
                "sessionId": sid,
                "instanceId": runner.session.instance_id,
                "status": runner.session.status.value,
                "stepIndex": runner.session.step_index,
            }
            for sid, runner in app.state.sessions.items()
        ]

    def _runner_or_404(session_id: str) -> SessionRunner | None:
        return app.state.sessions.get(session_id)

    @app.post("/sessions/{session_id}/commands")
    async def post_command(session_id: str, body: dict):
        runner = _runner_or_404(session_id)
        if runner is None:
            return JSONResponse(status_code=404, content={"error": "unknown session"})
        try:
            command = Command.from_json(body)
        except (ValueError, TypeError) as exc:
            return JSONResponse(status_code=422, content={"error": str(exc)})
        result = await runner.submit(command)
        payload = {
            "ok": result.ok,
            "message": result.message,
            "diagnostics": result.diagnostics,
            "status": runner.session.status.value,
            "instanceId": runner.session.instance_id,
            "version": {
                "revision": runner.session.rule_set.revision,
                "stepIndex": runner.session.step_index,
            },
        }
        if result.ok:
            return payload
        return JSONResponse(
            status_code=_REJECTION_STATUS.get(result.code, 422), content=payload
        )

    @app.get("/sessions/{session_id}/state")
    async def get_state(session_id: str, since: str | None = Query(default=None)):
        runner = _runner_or_404(session_id)
        if runner is None:
            return JSONResponse(status_code=404, content={"error": "unknown session"})
        view = state_view(runner.session, app.state.history)
        if since:
            try:
                revision_s, step_s = since.split(",")
                return state_delta(view, int(revision_s), int(step_s))
            except ValueError:
                return JSONResponse(
                    status_code=422, content={"error": "since must be 'revision,stepIndex'"}
                )
        return view

    @app.get("/sessions/{session_id}/stream")
    async def stream(session_id: str):
        runner = _runner_or_404(session_id)
        if runner is None:
            return JSONResponse(status_code=404, content={"error": "unknown session"})

        queue: asyncio.Queue = asyncio.Queue()
        runner.subscribers.append(queue)

        async def gen():
            try:
                snapshot = state_view(runner.session, app.state.history)
                yield _sse_frame(0, "state", snapshot)
                while True:
                    try:
                        event = await asyncio.wait_for(queue.get(), timeout=15.0)
                    except asyncio.TimeoutError:
                        yield ": keepalive\n\n"
                        continue
                    yield _sse_frame(event["seq"], event["type"], event["data"])
            finally:
                if queue in runner.subscribers:
                    runner.subscribers.remove(queue)

        return StreamingResponse(
            gen(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    # History

    @app.get("/history")
    async def list_history(scenarioHash: str | None = Query(default=None)):
        return [
            {
                "instanceId": inst.instance_id,
                "scenarioHash": inst.scenario_hash,
                "seed": inst.seed,
                "activitySequence": inst.activity_sequence,
                "totalTime": inst.total_time,
                "totalCost": inst.total_cost,
                "completionStatus": inst.completion_status.value,
                "label": inst.label.value,
            }
            for inst in app.state.history.instances(scenarioHash)
        ]

    @app.get("/history/metrics")
    async def history_metrics(scenarioHash: str = Query(...)):
        return app.state.history.metrics(scenarioHash)

    @app.get("/history/{instance_id}")
    async def get_instance(instance_id: str):
        inst = app.state.history.get(instance_id)
        if inst is None:
            return JSONResponse(status_code=404, content={"error": "unknown instance"})
        return inst.to_json()

    @app.post("/history/{instance_id}/label")
    async def label_instance(instance_id: str, body: dict):
        label = _LABELS.get(body.get("label"))
        if label is None:
            return JSONResponse(
                status_code=422,
                content={"error": "label must be good, bad, or unlabeled"},
            )
        try:
            app.state.history.label(
                instance_id, label, who=body.get("who", "analyst")
            )
        except HistoryError:
            return JSONResponse(status_code=404, content={"error": "unknown instance"})
        flush_history()
        return {"instanceId": instance_id, "label": label.value}

    return app


def _sse_frame(seq: int, event_type: str, data: dict) -> str:
    return f"id: {seq}\nevent: {event_type}\ndata: {json.dumps(data)}\n\n"
