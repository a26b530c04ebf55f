/** Wire types for the annotation HTTP API. */

export interface PoemSummary {
  id: string;
  title: string | null;
  language: string;
  line_count: number;
}

export interface PoemDetail {
  id: string;
  title: string | null;
  language: string;
  stanzas: string[][];
}

/** The stored annotation document: chains are sorted, disjoint,
 * strictly increasing line-index groups of at least two lines. */
export interface AnnotationPayload {
  annotator: string;
  poem_id: string;
  chains: number[][];
}

export interface Progress {
  annotated: number;
  total: number;
}
