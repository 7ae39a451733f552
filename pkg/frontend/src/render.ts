// render.ts -- DOM view of a ConsoleState snapshot.
//
// The page has five fixed panels looked up once at startup; every snapshot
// is rendered by full replacement, which is cheap at the frame rates a run
// produces.  The one exception is the prompt box: it is rebuilt only when
// the prompt id changes so a half-typed free-text answer survives other
// updates.  The view talks back through the Actions interface and never
// touches the socket.

import type { ConsoleState } from "./state.js";

export interface Actions {
  answer(id: number, button: string): void;
  pause(): void;
  resume(): void;
}

export interface Panels {
  status: HTMLElement;
  log: HTMLElement;
  belief: HTMLElement;
  prompt: HTMLElement;
  issues: HTMLElement;
}

export function lookupPanels(doc: Document): Panels {
  const get = (id: string): HTMLElement => {
    const el = doc.getElementById(id);
    if (!el) throw new Error(`missing page element #${id}`);
    return el;
  };
  return {
    status: get("status"),
    log: get("log"),
    belief: get("belief"),
    prompt: get("prompt"),
    issues: get("issues"),
  };
}

export function render(panels: Panels, state: ConsoleState, actions: Actions): void {
  renderStatus(panels.status, state, actions);
  renderLog(panels.log, state);
  renderBelief(panels.belief, state);
  renderPrompt(panels.prompt, state, actions);
  renderIssues(panels.issues, state);
}

function renderStatus(el: HTMLElement, state: ConsoleState, actions: Actions): void {
  el.textContent = "";
  const badge = document.createElement("span");
  badge.className = `badge badge-${state.phase}`;
  badge.textContent = state.phase;
  el.appendChild(badge);

  const info = document.createElement("span");
  info.className = "status-info";
  const bits = [`t=${state.timestep}`, `answered ${state.answered}`];
  if (state.exit !== null) bits.push(`exit ${state.exit}`);
  if (state.reason !== null) bits.push(`reason ${state.reason}`);
  info.textContent = bits.join("  ");
  el.appendChild(info);

  if (state.phase === "running") {
    const pause = document.createElement("button");
    pause.textContent = "pause";
    pause.onclick = () => actions.pause();
    const resume = document.createElement("button");
    resume.textContent = "resume";
    resume.onclick = () => actions.resume();
    el.appendChild(pause);
    el.appendChild(resume);
  }
}

function renderLog(el: HTMLElement, state: ConsoleState): void {
  el.textContent = state.log.join("\n");
  el.scrollTop = el.scrollHeight;
}

function renderBelief(el: HTMLElement, state: ConsoleState): void {
  el.textContent = "";
  for (const entry of state.belief) {
    const row = document.createElement("div");
    row.className = "belief-row";

    const name = document.createElement("span");
    name.className = "belief-name";
    name.textContent = entry.name;

    const bar = document.createElement("div");
    bar.className = "belief-bar";
    const fill = document.createElement("div");
    fill.className = "belief-fill";
    fill.style.width = `${(entry.p * 100).toFixed(1)}%`;
    bar.appendChild(fill);

    const prob = document.createElement("span");
    prob.className = "belief-p";
    prob.textContent = entry.p.toFixed(4);

    row.appendChild(name);
    row.appendChild(bar);
    row.appendChild(prob);
    el.appendChild(row);
  }
}

function renderPrompt(el: HTMLElement, state: ConsoleState, actions: Actions): void {
  const current = state.prompt ? String(state.prompt.id) : "";
  if (el.dataset["promptId"] === current) return;
  el.dataset["promptId"] = current;
  el.textContent = "";
  if (!state.prompt) return;
  const { id, text, buttons } = state.prompt;

  const question = document.createElement("p");
  question.className = "prompt-text";
  question.textContent = text;
  el.appendChild(question);

  if (buttons.length > 0) {
    for (const label of buttons) {
      const btn = document.createElement("button");
      btn.textContent = label;
      btn.onclick = () => actions.answer(id, label);
      el.appendChild(btn);
    }
    return;
  }

  // Free text: the server accepts any string as the answer.
  const input = document.createElement("input");
  input.type = "text";
  const send = document.createElement("button");
  send.textContent = "send";
  const submit = () => actions.answer(id, input.value);
  send.onclick = submit;
  input.onkeydown = (ev) => {
    if (ev.key === "Enter") submit();
  };
  el.appendChild(input);
  el.appendChild(send);
  input.focus();
}

function renderIssues(el: HTMLElement, state: ConsoleState): void {
  el.textContent = "";

  if (state.diagnosis) {
    const d = state.diagnosis;
    const box = document.createElement("div");
    box.className = "issue diagnosis";
    const head = document.createElement("strong");
    head.textContent = `${d.class_token} at step ${d.t_f}`;
    const body = document.createElement("p");
    body.textContent = `${d.culprit} failed to achieve ${d.r_f.join(", ")}`;
    box.appendChild(head);
    box.appendChild(body);
    el.appendChild(box);
  }

  if (state.recovery) {
    const r = state.recovery;
    const box = document.createElement("div");
    box.className = "issue recovery";
    const head = document.createElement("strong");
    head.textContent = `replaying ${r.length} statements`;
    const body = document.createElement("p");
    body.textContent = `kept from the original program: ${r.include.join(", ")}`;
    box.appendChild(head);
    box.appendChild(body);
    el.appendChild(box);
  }

  for (const message of state.errors) {
    const line = document.createElement("div");
    line.className = "issue error";
    line.textContent = message;
    el.appendChild(line);
  }
}
