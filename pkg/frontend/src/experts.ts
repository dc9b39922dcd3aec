import { ApiClient, ApiError, ServiceUnreachableError } from "./api.js";
import { clear, el } from "./dom.js";
import type { ExpertsPayload } from "./types.js";

export interface ExpertFinderOptions {
  onPin?: (nodeId: string) => void;
}

/**
 * Expert ranking table. Rows are rendered in exactly the order the service
 * returns them — the ranking is the tool's output, not the client's — and
 * every cell shows a value taken verbatim from the payload.
 */
export class ExpertFinder {
  readonly root: HTMLElement;

  private readonly onPin: ((nodeId: string) => void) | undefined;
  private readonly results: HTMLElement;

  constructor(
    private readonly api: ApiClient,
    root: HTMLElement,
    options: ExpertFinderOptions = {},
  ) {
    this.root = root;
    this.onPin = options.onPin;
    this.results = el("div", { class: "results" });

    const topicInput = el("input", { type: "text", class: "topic", placeholder: "topic" });
    const yearInput = el("input", {
      type: "number",
      class: "reference-year",
      value: String(new Date().getFullYear()),
    });
    const submit = el("button", { type: "button", class: "find" }, ["find experts"]);
    submit.addEventListener("click", () => {
      const topic = topicInput.value.trim();
      if (topic !== "") {
        void this.find(topic, Number(yearInput.value));
      }
    });

    root.append(
      el("div", { class: "controls" }, [
        topicInput,
        el("label", {}, ["reference year ", yearInput]),
        submit,
      ]),
      this.results,
    );
  }

  async find(topic: string, referenceYear: number, k?: number): Promise<void> {
    clear(this.results);
    let envelope;
    try {
      const args: Record<string, unknown> = { topic, reference_year: referenceYear };
      if (k !== undefined) {
        args["k"] = k;
      }
      envelope = await this.api.callTool("IdentifyExperts", args);
    } catch (err) {
      this.results.append(renderFailure(err));
      return;
    }
    if (envelope.status !== "ok" || envelope.payload === null) {
      const error = envelope.error;
      this.results.append(
        el("div", { class: "notice error" }, [
          error === null ? "tool call failed" : `${error.code}: ${error.message}`,
        ]),
      );
      return;
    }
    this.render(envelope.payload as unknown as ExpertsPayload);
  }

  private render(payload: ExpertsPayload): void {
    const head = el("tr", {}, [
      el("th", {}, ["#"]),
      el("th", {}, ["author"]),
      el("th", {}, ["composite"]),
      ...payload.metric_names.map((name) => el("th", { class: "metric" }, [name])),
      el("th", {}, [""]),
    ]);

    const body = el("tbody");
    payload.experts.forEach((expert, index) => {
      const pin = el("button", { type: "button", class: "pin-btn" }, ["☆"]);
      pin.addEventListener("click", () => this.onPin?.(expert.author_id));
      const cells = [
        el("td", { class: "position" }, [String(index + 1)]),
        el("td", { class: "author", "data-author-id": expert.author_id }, [
          expert.name ?? expert.author_id,
        ]),
        el("td", { class: "composite" }, [String(expert.composite)]),
        ...expert.metrics.map((value, j) =>
          el(
            "td",
            {
              class: "metric",
              title: `normalized ${expert.normalized[j]} · weight ${expert.weights[j]}`,
            },
            [String(value)],
          ),
        ),
        el("td", {}, [pin]),
      ];
      body.append(el("tr", { "data-author-id": expert.author_id }, cells));
    });

    const meta = el("p", { class: "meta" }, [
      `pool ${payload.pool_size} · reference year ${payload.reference_year}`,
    ]);
    if (payload.reranker_fallback) {
      meta.append(el("span", { class: "flag fallback" }, ["reranker fallback"]));
    }

    this.results.append(
      el("table", { class: "experts-table" }, [el("thead", {}, [head]), body]),
      meta,
    );
  }
}

function renderFailure(err: unknown): HTMLElement {
  if (err instanceof ApiError) {
    return el("div", { class: "notice error" }, [`${err.code}: ${err.message}`]);
  }
  if (err instanceof ServiceUnreachableError) {
    return el("div", { class: "notice unreachable" }, ["exploration service unreachable"]);
  }
  throw err;
}
