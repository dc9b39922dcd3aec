import { ApiClient, ApiError, ServiceUnreachableError } from "./api.js";
import { clear, el, svgEl } from "./dom.js";
import type { Neighborhood, NodeLabel } from "./types.js";
import { NODE_LABELS } from "./types.js";

/** One distinct colour per node label; every label must have an entry. */
export const LABEL_COLORS: Record<NodeLabel, string> = {
  Author: "#4e79a7",
  Keyword: "#f28e2b",
  Publication: "#e15759",
  Software: "#76b7b2",
  Concept: "#59a14f",
  Journal: "#edc948",
  Project: "#b07aa1",
  Domain: "#ff9da7",
  ResearchUnit: "#9c755f",
  Dataset: "#bab0ac",
  Region: "#86bcb6",
};

// The service rejects deeper traversals; the slider must not offer them.
export const MAX_DEPTH = 4;

export interface ExplorerOptions {
  width?: number;
  height?: number;
  onPin?: (nodeId: string) => void;
}

/**
 * Neighborhood viewer: renders the subgraph around a center node as SVG and
 * re-centers on click, which is what turns a static picture into a steering
 * loop. Layout is a deterministic ring in the order nodes arrive from the
 * service; only the geometry is invented client-side, never the data.
 */
export class NeighborhoodExplorer {
  readonly root: HTMLElement;
  center: string | null = null;
  depth = 1;

  private readonly width: number;
  private readonly height: number;
  private readonly onPin: ((nodeId: string) => void) | undefined;
  private readonly viewport: HTMLElement;
  private readonly idInput: HTMLInputElement;
  private readonly depthInput: HTMLInputElement;
  private readonly depthValue: HTMLElement;
  private requestSeq = 0;

  constructor(
    private readonly api: ApiClient,
    root: HTMLElement,
    options: ExplorerOptions = {},
  ) {
    this.root = root;
    this.width = options.width ?? 720;
    this.height = options.height ?? 480;
    this.onPin = options.onPin;

    this.idInput = el("input", {
      type: "text",
      class: "node-id",
      placeholder: "node id, e.g. p_cc1",
    });
    this.depthInput = el("input", {
      type: "range",
      class: "depth",
      min: "1",
      max: String(MAX_DEPTH),
      step: "1",
      value: "1",
    });
    this.depthValue = el("span", { class: "depth-value" }, ["1"]);
    const goButton = el("button", { type: "button", class: "explore" }, ["explore"]);
    const pinButton = el("button", { type: "button", class: "pin-center" }, ["pin"]);

    goButton.addEventListener("click", () => {
      const id = this.idInput.value.trim();
      if (id !== "") {
        void this.show(id, this.depth);
      }
    });
    this.depthInput.addEventListener("change", () => {
      this.depth = Number(this.depthInput.value);
      this.depthValue.textContent = this.depthInput.value;
      if (this.center !== null) {
        void this.show(this.center, this.depth);
      }
    });
    pinButton.addEventListener("click", () => {
      if (this.center !== null) {
        this.onPin?.(this.center);
      }
    });

    this.viewport = el("div", { class: "viewport" });
    root.append(
      el("div", { class: "controls" }, [
        this.idInput,
        goButton,
        el("label", {}, ["depth ", this.depthInput, this.depthValue]),
        pinButton,
      ]),
      this.viewport,
      renderLegend(),
    );
  }

  /** Fetch and render the neighborhood; errors become inline notices. */
  async show(nodeId: string, depth?: number): Promise<void> {
    if (depth !== undefined) {
      this.depth = depth;
      this.depthInput.value = String(depth);
      this.depthValue.textContent = String(depth);
    }
    this.idInput.value = nodeId;
    const seq = (this.requestSeq += 1);
    let neighborhood: Neighborhood;
    try {
      neighborhood = await this.api.neighborhood(nodeId, this.depth);
    } catch (err) {
      if (seq === this.requestSeq) {
        this.renderError(nodeId, err);
      }
      return;
    }
    // Exploration fetches may overlap; only the latest response may render.
    if (seq !== this.requestSeq) {
      return;
    }
    this.center = neighborhood.center;
    this.render(neighborhood);
  }

  private renderError(nodeId: string, err: unknown): void {
    clear(this.viewport);
    if (err instanceof ApiError && err.code === "UNKNOWN_NODE") {
      this.viewport.append(
        el("div", { class: "notice not-found" }, [`no node '${nodeId}' in the graph`]),
      );
      return;
    }
    if (err instanceof ApiError) {
      this.viewport.append(
        el("div", { class: "notice error" }, [`${err.code}: ${err.message}`]),
      );
      return;
    }
    if (err instanceof ServiceUnreachableError) {
      const retry = el("button", { type: "button", class: "retry" }, ["retry"]);
      retry.addEventListener("click", () => void this.show(nodeId, this.depth));
      this.viewport.append(
        el("div", { class: "notice unreachable" }, [
          "exploration service unreachable — ",
          retry,
        ]),
      );
      return;
    }
    throw err;
  }

  private render(neighborhood: Neighborhood): void {
    const positions = ringLayout(neighborhood, this.width, this.height);
    const svg = svgEl("svg", {
      class: "neighborhood",
      viewBox: `0 0 ${this.width} ${this.height}`,
      width: String(this.width),
      height: String(this.height),
    });

    for (const edge of neighborhood.edges) {
      const from = positions.get(edge.source);
      const to = positions.get(edge.target);
      if (from === undefined || to === undefined) {
        continue;
      }
      svg.append(
        svgEl("line", {
          class: "edge",
          "data-etype": edge.etype,
          x1: String(from.x),
          y1: String(from.y),
          x2: String(to.x),
          y2: String(to.y),
        }),
        svgEl(
          "text",
          {
            class: "edge-label",
            x: String((from.x + to.x) / 2),
            y: String((from.y + to.y) / 2),
          },
          [edge.etype],
        ),
      );
    }

    for (const node of neighborhood.nodes) {
      const pos = positions.get(node.id);
      if (pos === undefined) {
        continue;
      }
      const isCenter = node.id === neighborhood.center;
      const group = svgEl("g", {
        class: isCenter ? "node center" : "node",
        "data-node-id": node.id,
        "data-label": node.label,
        transform: `translate(${pos.x}, ${pos.y})`,
      });
      group.append(
        svgEl("circle", {
          r: isCenter ? "22" : "14",
          fill: LABEL_COLORS[node.label],
        }),
        svgEl("title", {}, [`${node.name ?? node.id} (${node.label})`]),
        svgEl("text", { class: "node-label", dy: "30" }, [shorten(node.name ?? node.id)]),
      );
      group.addEventListener("click", () => {
        if (!isCenter) {
          void this.show(node.id, this.depth);
        }
      });
      svg.append(group);
    }

    clear(this.viewport);
    this.viewport.append(svg);
  }
}

interface Point {
  x: number;
  y: number;
}

/** Center node in the middle, everything else evenly spaced on a ring. */
function ringLayout(neighborhood: Neighborhood, width: number, height: number): Map<string, Point> {
  const positions = new Map<string, Point>();
  const cx = width / 2;
  const cy = height / 2;
  positions.set(neighborhood.center, { x: cx, y: cy });
  const others = neighborhood.nodes.filter((node) => node.id !== neighborhood.center);
  const radius = Math.min(width, height) / 2 - 70;
  others.forEach((node, index) => {
    const angle = (2 * Math.PI * index) / others.length - Math.PI / 2;
    positions.set(node.id, {
      x: Math.round(cx + radius * Math.cos(angle)),
      y: Math.round(cy + radius * Math.sin(angle)),
    });
  });
  return positions;
}

function shorten(text: string, limit = 24): string {
  return text.length <= limit ? text : `${text.slice(0, limit - 1)}…`;
}

function renderLegend(): HTMLElement {
  return el(
    "ul",
    { class: "legend" },
    NODE_LABELS.map((label) =>
      el("li", { "data-label": label }, [
        el("span", {
          class: "swatch",
          style: `background:${LABEL_COLORS[label]}`,
        }),
        label,
      ]),
    ),
  );
}
