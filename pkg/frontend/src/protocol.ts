// protocol.ts -- wire frame schemas for the runtime's websocket server.
//
// The server sends one JSON object per websocket text frame.  Server to
// client: "event" carries one execution log line plus its structured
// payload, "belief" carries the tracker's marginals after a step, "prompt"
// asks the operator a question (an empty button list means free text), and
// a terminal "done" or "abort" ends the session.  Anything the server
// rejects comes back as an "error" frame followed, for a stale answer, by
// a fresh prompt with a new id.  Client to server: "answer" for prompts,
// "pause" and "resume" for flow control.

import { z } from "zod";

export const eventFrame = z.object({
  type: z.literal("event"),
  event: z.object({
    kind: z.string(),
    line: z.string(),
    data: z.record(z.string(), z.unknown()),
  }),
});

export const beliefFrame = z.object({
  type: z.literal("belief"),
  timestep: z.number().int().nonnegative(),
  literals: z.array(
    z.object({ name: z.string(), p: z.number().min(0).max(1) }),
  ),
});

export const promptFrame = z.object({
  type: z.literal("prompt"),
  id: z.number().int().positive(),
  text: z.string(),
  buttons: z.array(z.string()),
});

export const doneFrame = z.object({
  type: z.literal("done"),
  exit: z.number().int(),
});

export const abortFrame = z.object({
  type: z.literal("abort"),
  exit: z.number().int(),
  reason: z.string().nullable(),
});

export const errorFrame = z.object({
  type: z.literal("error"),
  error: z.string(),
});

export const serverFrame = z.discriminatedUnion("type", [
  eventFrame,
  beliefFrame,
  promptFrame,
  doneFrame,
  abortFrame,
  errorFrame,
]);

export type EventFrame = z.infer<typeof eventFrame>;
export type BeliefFrame = z.infer<typeof beliefFrame>;
export type PromptFrame = z.infer<typeof promptFrame>;
export type DoneFrame = z.infer<typeof doneFrame>;
export type AbortFrame = z.infer<typeof abortFrame>;
export type ErrorFrame = z.infer<typeof errorFrame>;
export type ServerFrame = z.infer<typeof serverFrame>;

export function parseServerFrame(text: string): ServerFrame {
  return serverFrame.parse(JSON.parse(text));
}

// Structured payloads of the two event kinds the console surfaces in their
// own panel.  A "diag" event names the first step whose postcondition the
// evidence contradicts; a "recover" event lists which statements of the
// original program the replay keeps.

export const diagnosisData = z.object({
  t_f: z.number().int(),
  r_f: z.array(z.string()),
  class_token: z.string(),
  culprit: z.string(),
});

export const recoveryData = z.object({
  include: z.array(z.number().int()),
  length: z.number().int(),
});

export type Diagnosis = z.infer<typeof diagnosisData>;
export type Recovery = z.infer<typeof recoveryData>;

export type ClientMessage =
  | { type: "answer"; id: number; button: string }
  | { type: "pause" }
  | { type: "resume" };

export function answer(id: number, button: string): ClientMessage {
  return { type: "answer", id, button };
}
