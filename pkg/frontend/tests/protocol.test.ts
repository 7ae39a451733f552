// protocol.test.ts -- the frame schemas accept what the server sends and
// reject near misses.  The recorded fixture keeps the schemas honest: every
// line of a real session must parse.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";
import { answer, parseServerFrame } from "../src/protocol.js";

const here = dirname(fileURLToPath(import.meta.url));
const fixture = join(here, "..", "fixtures", "pd2_stream.ndjson");

describe("server frame parsing", () => {
  it("accepts each frame type", () => {
    const event = parseServerFrame(
      '{"type": "event", "event": {"kind": "ok", "line": "OK", "data": {"t": 3}}}',
    );
    expect(event.type).toBe("event");
    if (event.type === "event") expect(event.event.kind).toBe("ok");

    const belief = parseServerFrame(
      '{"type": "belief", "timestep": 2, "literals": [{"name": "at(lab)", "p": 0.9}]}',
    );
    if (belief.type === "belief") {
      expect(belief.timestep).toBe(2);
      expect(belief.literals[0]?.p).toBeCloseTo(0.9, 12);
    }

    const prompt = parseServerFrame(
      '{"type": "prompt", "id": 4, "text": "Please push the cart.", "buttons": []}',
    );
    if (prompt.type === "prompt") expect(prompt.buttons).toEqual([]);

    expect(parseServerFrame('{"type": "done", "exit": 0}')).toEqual({
      type: "done",
      exit: 0,
    });
    expect(parseServerFrame('{"type": "abort", "exit": 3, "reason": "retry-limit"}')).toEqual({
      type: "abort",
      exit: 3,
      reason: "retry-limit",
    });
    expect(parseServerFrame('{"type": "error", "error": "busy: a session is already running"}')).toEqual({
      type: "error",
      error: "busy: a session is already running",
    });
  });

  it("rejects frames that are almost right", () => {
    const bad = [
      '"done"',
      "[]",
      '{"type": "shutdown"}',
      '{"type": "done"}',
      '{"type": "prompt", "id": 0, "text": "x", "buttons": []}',
      '{"type": "prompt", "id": 1, "text": "x"}',
      '{"type": "belief", "timestep": 1, "literals": [{"name": "at(lab)", "p": 1.5}]}',
      '{"type": "belief", "timestep": 1.5, "literals": []}',
      '{"type": "event", "event": {"kind": "ok", "line": null, "data": {}}}',
      '{"type": "abort", "exit": 3}',
    ];
    for (const text of bad) {
      expect(() => parseServerFrame(text), text).toThrow();
    }
    expect(() => parseServerFrame("not json")).toThrow();
  });

  it("parses every line of a recorded session", () => {
    const lines = readFileSync(fixture, "utf8").trim().split("\n");
    expect(lines.length).toBe(41);
    const frames = lines.map(parseServerFrame);
    expect(frames[0]?.type).toBe("event");
    expect(frames.at(-1)).toEqual({ type: "done", exit: 0 });
  });

  it("builds answer messages", () => {
    expect(answer(2, "done")).toEqual({ type: "answer", id: 2, button: "done" });
  });
});
