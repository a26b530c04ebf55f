/**
 * Draft annotation state: one chain label (or null) per poem line.
 *
 * A line holds at most one label, so serialized chains are disjoint by
 * construction; groups of at least two lines become chains, and any
 * single-line group blocks saving instead of being silently dropped.
 */

import type { AnnotationPayload } from "./types.js";

export interface Draft {
  poemId: string;
  /** index = line number within the poem; value = chain label or null */
  assignment: (string | null)[];
  dirty: boolean;
  /** server version token the draft was loaded from; "0" = none stored */
  version: string;
}

export function newDraft(poemId: string, lineCount: number, version = "0"): Draft {
  return {
    poemId,
    assignment: new Array<string | null>(lineCount).fill(null),
    dirty: false,
    version,
  };
}

/** Rebuild a draft from stored chains, relabeling them a, b, c, ... */
export function draftFromChains(
  poemId: string,
  lineCount: number,
  chains: number[][],
  version: string,
): Draft {
  const draft = newDraft(poemId, lineCount, version);
  chains.forEach((chain, chainIndex) => {
    for (const line of chain) {
      if (line < 0 || line >= lineCount) {
        throw new RangeError(`chain line ${line} outside poem of ${lineCount} lines`);
      }
      draft.assignment[line] = String.fromCharCode(97 + chainIndex);
    }
  });
  return draft;
}

/**
 * Toggle a line against the given chain label: assign when unassigned or
 * labeled differently, unassign when it already carries that label.
 */
export function toggleLine(draft: Draft, line: number, label: string): Draft {
  if (line < 0 || line >= draft.assignment.length) {
    throw new RangeError(`line ${line} outside poem of ${draft.assignment.length} lines`);
  }
  const assignment = draft.assignment.slice();
  assignment[line] = assignment[line] === label ? null : label;
  return { ...draft, assignment, dirty: true };
}

/** Label groups in first-line order; includes single-line groups. */
export function groups(draft: Draft): Map<string, number[]> {
  const byLabel = new Map<string, number[]>();
  draft.assignment.forEach((label, line) => {
    if (label === null) return;
    const lines = byLabel.get(label);
    if (lines) lines.push(line);
    else byLabel.set(label, [line]);
  });
  const ordered = [...byLabel.entries()].sort((a, b) => a[1][0]! - b[1][0]!);
  return new Map(ordered);
}

/** Lines whose chain currently has only one member (these block saving). */
export function singletonLines(draft: Draft): number[] {
  const out: number[] = [];
  for (const lines of groups(draft).values()) {
    if (lines.length === 1) out.push(lines[0]!);
  }
  return out.sort((a, b) => a - b);
}

/** Serialize to the wire payload. Throws if any chain is a singleton. */
export function serialize(draft: Draft, annotator: string): AnnotationPayload {
  const chains: number[][] = [];
  for (const lines of groups(draft).values()) {
    if (lines.length < 2) {
      throw new Error(`chain of one line (${lines[0]}) cannot be saved`);
    }
    chains.push(lines);
  }
  return { annotator, poem_id: draft.poemId, chains };
}
