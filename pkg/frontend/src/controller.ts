/**
 * Editor controller: owns the draft, the save flow, and the autosave
 * timer. All UI effects go through injected hooks so the logic is
 * testable without a DOM.
 */

import type { Api } from "./api.js";
import { ApiError } from "./api.js";
import type { Draft } from "./draft.js";
import {
  draftFromChains,
  newDraft,
  serialize,
  singletonLines,
  toggleLine,
} from "./draft.js";

export type SaveOutcome = "saved" | "blocked" | "reloaded" | "failed" | "clean";

export interface EditorHooks {
  /** Redraw line labels and status; called after every state change. */
  render(): void;
  /** Show a transient status message ("saved", "retry", ...). */
  status(message: string, isError?: boolean): void;
  /** Mark the lines that block saving (singleton chains). */
  highlight(lines: number[]): void;
  /** Conflict dialog: resolve with the annotator's choice. */
  chooseConflict(): Promise<"reload" | "overwrite">;
}

export const AUTOSAVE_MS = 30000;

export class EditorController {
  draft: Draft;
  private timer: ReturnType<typeof setInterval> | null = null;
  private saving = false;

  constructor(
    private readonly api: Api,
    private readonly hooks: EditorHooks,
    readonly annotator: string,
    readonly lineCount: number,
    draft: Draft,
  ) {
    this.draft = draft;
  }

  toggle(line: number, label: string): void {
    this.draft = toggleLine(this.draft, line, label);
    this.hooks.highlight([]);
    this.hooks.render();
  }

  /**
   * Validate, then PUT against the loaded version. On 409 the annotator
   * chooses: reload replaces the draft with the server's copy; overwrite
   * retries against the live version. Network failure keeps the draft
   * dirty and asks for a retry.
   */
  async save(quiet = false): Promise<SaveOutcome> {
    if (!this.draft.dirty) return "clean";
    if (this.saving) return "clean";

    const singletons = singletonLines(this.draft);
    if (singletons.length > 0) {
      if (!quiet) {
        this.hooks.highlight(singletons);
        this.hooks.status(
          `chains need at least two lines (line ${singletons[0]! + 1} is alone)`,
          true,
        );
      }
      return "blocked";
    }

    this.saving = true;
    try {
      const payload = serialize(this.draft, this.annotator);
      let result = await this.api.putAnnotation(payload, this.draft.version);
      if (!result.ok) {
        const choice = await this.hooks.chooseConflict();
        if (choice === "reload") {
          await this.reload();
          this.hooks.status("reloaded the saved version");
          return "reloaded";
        }
        result = await this.api.putAnnotation(payload, result.currentVersion);
        if (!result.ok) {
          this.hooks.status("still conflicting, try again", true);
          return "failed";
        }
      }
      this.draft = { ...this.draft, dirty: false, version: result.version };
      this.hooks.render();
      if (!quiet) this.hooks.status("saved");
      return "saved";
    } catch (error) {
      const detail = error instanceof ApiError ? error.message : String(error);
      this.hooks.status(`save failed (${detail}), draft kept - retry with ctrl+s`, true);
      return "failed";
    } finally {
      this.saving = false;
    }
  }

  /** Replace the draft with whatever the server holds now. */
  async reload(): Promise<void> {
    const stored = await this.api.getAnnotation(this.annotator, this.draft.poemId);
    this.draft = stored
      ? draftFromChains(this.draft.poemId, this.lineCount, stored.payload.chains, stored.version)
      : newDraft(this.draft.poemId, this.lineCount);
    this.hooks.highlight([]);
    this.hooks.render();
  }

  startAutosave(intervalMs = AUTOSAVE_MS): void {
    this.stopAutosave();
    this.timer = setInterval(() => {
      if (this.draft.dirty) void this.save(true);
    }, intervalMs);
  }

  stopAutosave(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
