/**
 * Pinned entities: node ids the user keeps across queries.
 *
 * Backed by `localStorage` so pins survive a page reload. Insertion order is
 * preserved; pinning an already-pinned id is a no-op.
 */

const STORAGE_KEY = "kgx.pins";

export class PinStore {
  /** Invoked after every mutation; lets the page refresh the pinned bar. */
  onChange: (() => void) | null = null;

  private ids: string[];

  constructor(private readonly storage: Storage = localStorage) {
    this.ids = this.read();
  }

  list(): string[] {
    return [...this.ids];
  }

  has(nodeId: string): boolean {
    return this.ids.includes(nodeId);
  }

  pin(nodeId: string): void {
    if (!this.ids.includes(nodeId)) {
      this.ids.push(nodeId);
      this.write();
      this.onChange?.();
    }
  }

  unpin(nodeId: string): void {
    const next = this.ids.filter((id) => id !== nodeId);
    if (next.length !== this.ids.length) {
      this.ids = next;
      this.write();
      this.onChange?.();
    }
  }

  /** Returns the new pinned state. */
  toggle(nodeId: string): boolean {
    if (this.has(nodeId)) {
      this.unpin(nodeId);
      return false;
    }
    this.pin(nodeId);
    return true;
  }

  private read(): string[] {
    const raw = this.storage.getItem(STORAGE_KEY);
    if (raw === null) {
      return [];
    }
    try {
      const parsed: unknown = JSON.parse(raw);
      if (Array.isArray(parsed) && parsed.every((x) => typeof x === "string")) {
        return parsed;
      }
    } catch {
      // fall through: corrupted storage resets to empty rather than crashing
    }
    return [];
  }

  private write(): void {
    this.storage.setItem(STORAGE_KEY, JSON.stringify(this.ids));
  }
}
