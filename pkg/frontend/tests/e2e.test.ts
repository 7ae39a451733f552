// e2e.test.ts -- drive a real server process through ConsoleClient.  The
// runtime is spawned with --once on a fresh port, the client refuses the
// first handover so the run goes through diagnosis and replay, and both
// sides must agree the session ended cleanly: terminal done frame with
// exit 0, and the server process itself exiting 0.
//
// Needs the runtime installed (python3 -m retrace.cli) and a WebSocket
// global (Node 20 with --experimental-websocket, or any browser).

import { spawn, type ChildProcess } from "node:child_process";
import * as net from "node:net";
import { afterAll, describe, expect, it } from "vitest";
import { ConsoleClient } from "../src/client.js";
import type { ConsoleState } from "../src/state.js";

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = net.createServer();
    srv.listen(0, "127.0.0.1", () => {
      const addr = srv.address();
      if (addr === null || typeof addr === "string") {
        reject(new Error("no port assigned"));
        return;
      }
      srv.close(() => resolve(addr.port));
    });
    srv.on("error", reject);
  });
}

// Poll with plain TCP: a websocket connection would start a session, a bare
// connect just proves the server is listening.
async function waitForPort(port: number, deadlineMs: number): Promise<void> {
  const until = Date.now() + deadlineMs;
  for (;;) {
    const up = await new Promise<boolean>((resolve) => {
      const sock = net.connect({ port, host: "127.0.0.1" }, () => {
        sock.destroy();
        resolve(true);
      });
      sock.on("error", () => resolve(false));
    });
    if (up) return;
    if (Date.now() > until) throw new Error(`server never listened on ${port}`);
    await new Promise((r) => setTimeout(r, 100));
  }
}

function waitForExit(child: ChildProcess): Promise<number | null> {
  return new Promise((resolve) => child.on("close", (code) => resolve(code)));
}

let server: ChildProcess | null = null;

afterAll(() => {
  if (server && server.exitCode === null) server.kill();
});

describe("live session against a spawned server", () => {
  it(
    "refuses the first handover and still finishes cleanly",
    async () => {
      const port = await freePort();
      server = spawn(
        "python3",
        ["-m", "retrace.cli", "serve", "--once", "--port", String(port)],
        { stdio: ["ignore", "pipe", "pipe"] },
      );
      const stderr: Buffer[] = [];
      server.stderr?.on("data", (chunk: Buffer) => stderr.push(chunk));
      const exited = waitForExit(server);
      await waitForPort(port, 15000);

      let lastAnswered = 0;
      let client: ConsoleClient;
      const finished = new Promise<ConsoleState>((resolve) => {
        client = new ConsoleClient({
          url: `ws://127.0.0.1:${port}/ws`,
          onChange: (state) => {
            const prompt = state.prompt;
            if (prompt && prompt.id > lastAnswered) {
              lastAnswered = prompt.id;
              const reply = prompt.id === 1 ? "cannot: missing" : "done";
              queueMicrotask(() => client.answer(prompt.id, reply));
            }
            if (state.phase === "done" || state.phase === "aborted") {
              resolve(state);
            }
          },
        });
      });

      const final = await finished;
      expect(final.phase).toBe("done");
      expect(final.exit).toBe(0);
      expect(final.errors).toEqual([]);
      expect(lastAnswered).toBe(3);
      expect(final.diagnosis?.class_token).toBe("PostconditionFailure");
      expect(final.recovery?.include).toEqual([1, 2, 4, 5]);
      expect(final.timestep).toBeGreaterThan(0);
      expect(final.log.at(-1)).toMatch(/^END /);

      const code = await exited;
      expect(code, Buffer.concat(stderr).toString()).toBe(0);
    },
    30000,
  );
});
