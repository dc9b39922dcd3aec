import { ApiClient } from "./api.js";
import { ChatController } from "./chat.js";
import { clear, el } from "./dom.js";
import { ExpertFinder } from "./experts.js";
import { NeighborhoodExplorer } from "./explorer.js";
import { ViewSession } from "./viewSession.js";

/** Assemble the page: header with health badge, chat, explorer, experts, pins. */
export function mount(app: HTMLElement, api: ApiClient): void {
  const view = new ViewSession();

  const health = el("span", { class: "health" }, ["connecting…"]);
  const pinnedBar = el("div", { class: "pinned-bar" });
  const chatSection = el("section", { class: "chat" }, [el("h2", {}, ["ask"])]);
  const explorerSection = el("section", { class: "explorer" }, [el("h2", {}, ["explore"])]);
  const expertsSection = el("section", { class: "experts" }, [el("h2", {}, ["experts"])]);

  app.append(
    el("header", {}, [el("h1", {}, ["knowledge graph explorer"]), health, pinnedBar]),
    chatSection,
    explorerSection,
    expertsSection,
  );

  const explorer = new NeighborhoodExplorer(api, explorerSection, {
    onPin: (id) => view.pins.pin(id),
  });
  const chat = new ChatController(api, view, chatSection, {
    onExplore: (id) => void explorer.show(id),
  });
  new ExpertFinder(api, expertsSection, { onPin: (id) => view.pins.pin(id) });

  const form = el("form", { class: "ask-form" });
  const question = el("input", {
    type: "text",
    class: "question",
    placeholder: "ask about the graph…",
  });
  const send = el("button", { type: "submit" }, ["ask"]);
  form.append(question, send);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (chat.busy || question.value.trim() === "") {
      return;
    }
    const text = question.value;
    question.value = "";
    send.setAttribute("disabled", "true");
    void chat.ask(text).finally(() => send.removeAttribute("disabled"));
  });
  chatSection.append(form);

  const renderPins = (): void => {
    clear(pinnedBar);
    for (const id of view.pins.list()) {
      const chip = el("button", { type: "button", class: "pinned-chip" }, [id]);
      chip.addEventListener("click", () => void explorer.show(id));
      const remove = el("button", { type: "button", class: "unpin" }, ["✕"]);
      remove.addEventListener("click", () => view.pins.unpin(id));
      pinnedBar.append(el("span", { class: "pinned" }, [chip, remove]));
    }
  };
  view.pins.onChange = renderPins;
  renderPins();

  void api
    .health()
    .then((h) => {
      health.textContent = `${h.nodes} nodes · ${h.edges} edges · ${h.chunks} chunks`;
      health.classList.add("ok");
    })
    .catch(() => {
      health.textContent = "service unreachable";
      health.classList.add("down");
    });
}

declare global {
  interface Window {
    __kgxTest?: boolean;
  }
}

if (typeof document !== "undefined" && !window.__kgxTest) {
  const app = document.getElementById("app");
  if (app !== null) {
    const base = new URLSearchParams(window.location.search).get("api") ?? "";
    mount(app, new ApiClient(base));
  }
}
