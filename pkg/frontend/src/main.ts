// main.ts -- entry point: connect to the runtime server and keep the page
// in sync with every frame.  The socket URL defaults to /ws on whatever
// host served this page (the runtime's --static mode) and can be pointed
// elsewhere with ?ws=ws://host:port/ws.

import { ConsoleClient } from "./client.js";
import { lookupPanels, render } from "./render.js";

function socketUrl(): string {
  const override = new URLSearchParams(location.search).get("ws");
  if (override) return override;
  if (location.protocol === "http:" || location.protocol === "https:") {
    const scheme = location.protocol === "https:" ? "wss" : "ws";
    return `${scheme}://${location.host}/ws`;
  }
  return "ws://127.0.0.1:8787/ws";
}

const panels = lookupPanels(document);

const actions = {
  answer: (id: number, button: string) => client.answer(id, button),
  pause: () => client.pause(),
  resume: () => client.resume(),
};

const client: ConsoleClient = new ConsoleClient({
  url: socketUrl(),
  onChange: (state) => render(panels, state, actions),
});
