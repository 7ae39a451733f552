// client.ts -- websocket glue between the server and the reducer.
//
// ConsoleClient owns the socket and the current ConsoleState; every change
// goes through push() so the caller sees exactly one onChange per frame.
// A frame that fails schema validation becomes an error entry rather than
// an exception, and a close before the terminal frame marks the session
// aborted so the view never hangs on "running".

import { answer, parseServerFrame, type ClientMessage } from "./protocol.js";
import {
  afterAnswer,
  apply,
  initialState,
  type ConsoleState,
} from "./state.js";

export interface ConsoleClientOptions {
  url: string;
  onChange: (state: ConsoleState) => void;
}

export class ConsoleClient {
  private ws: WebSocket;
  private state: ConsoleState;
  private readonly onChange: (state: ConsoleState) => void;

  constructor(opts: ConsoleClientOptions) {
    this.state = initialState();
    this.onChange = opts.onChange;
    this.ws = new WebSocket(opts.url);
    this.ws.onmessage = (ev) => this.receive(String(ev.data));
    this.ws.onclose = () => this.closed();
    this.onChange(this.state);
  }

  get snapshot(): ConsoleState {
    return this.state;
  }

  answer(id: number, button: string): void {
    this.send(answer(id, button));
    this.push(afterAnswer(this.state));
  }

  pause(): void {
    this.send({ type: "pause" });
  }

  resume(): void {
    this.send({ type: "resume" });
  }

  close(): void {
    this.ws.close();
  }

  private push(next: ConsoleState): void {
    this.state = next;
    this.onChange(next);
  }

  private send(msg: ClientMessage): void {
    this.ws.send(JSON.stringify(msg));
  }

  private receive(text: string): void {
    let next: ConsoleState;
    try {
      next = apply(this.state, parseServerFrame(text));
    } catch (err) {
      next = apply(this.state, {
        type: "error",
        error: `bad frame: ${String(err)}`,
      });
    }
    this.push(next);
  }

  private closed(): void {
    if (this.state.phase === "done" || this.state.phase === "aborted") return;
    const noted = apply(this.state, {
      type: "error",
      error: "connection closed before the run finished",
    });
    this.push({ ...noted, phase: "aborted" });
  }
}
