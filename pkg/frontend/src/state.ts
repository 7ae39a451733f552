// state.ts -- pure reducer for the operator console.
//
// Every frame off the websocket folds into an immutable ConsoleState
// snapshot and the DOM layer re-renders from the snapshot, never from the
// socket.  Keeping the reducer pure means a recorded frame stream replayed
// through apply() exercises the console's full behaviour in tests without
// a browser or a server.

import {
  diagnosisData,
  recoveryData,
  type Diagnosis,
  type PromptFrame,
  type Recovery,
  type ServerFrame,
} from "./protocol.js";

export type Phase = "connecting" | "running" | "done" | "aborted";

export interface BeliefEntry {
  name: string;
  p: number;
}

export interface ConsoleState {
  phase: Phase;
  exit: number | null;
  reason: string | null;
  log: string[];
  events: { kind: string; line: string }[];
  belief: BeliefEntry[];
  timestep: number;
  prompt: PromptFrame | null;
  answered: number;
  errors: string[];
  diagnosis: Diagnosis | null;
  recovery: Recovery | null;
}

export function initialState(): ConsoleState {
  return {
    phase: "connecting",
    exit: null,
    reason: null,
    log: [],
    events: [],
    belief: [],
    timestep: 0,
    prompt: null,
    answered: 0,
    errors: [],
    diagnosis: null,
    recovery: null,
  };
}

function live(phase: Phase): Phase {
  return phase === "connecting" ? "running" : phase;
}

export function apply(state: ConsoleState, frame: ServerFrame): ConsoleState {
  switch (frame.type) {
    case "event": {
      const next: ConsoleState = {
        ...state,
        phase: live(state.phase),
        log: [...state.log, frame.event.line],
        events: [...state.events, { kind: frame.event.kind, line: frame.event.line }],
      };
      if (frame.event.kind === "diag") {
        next.diagnosis = diagnosisData.parse(frame.event.data);
      }
      if (frame.event.kind === "recover") {
        next.recovery = recoveryData.parse(frame.event.data);
      }
      return next;
    }
    case "belief":
      return {
        ...state,
        phase: live(state.phase),
        belief: frame.literals,
        timestep: frame.timestep,
      };
    case "prompt":
      return { ...state, phase: live(state.phase), prompt: frame };
    case "done":
      return { ...state, phase: "done", exit: frame.exit, prompt: null };
    case "abort":
      return {
        ...state,
        phase: "aborted",
        exit: frame.exit,
        reason: frame.reason,
        prompt: null,
      };
    case "error":
      return { ...state, errors: [...state.errors, frame.error] };
  }
}

// Called when the operator's answer goes out: the question leaves the
// screen immediately instead of waiting for the next server frame.
export function afterAnswer(state: ConsoleState): ConsoleState {
  return { ...state, prompt: null, answered: state.answered + 1 };
}
