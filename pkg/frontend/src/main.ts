/**
 * Page wiring: poem list with per-annotator progress, and a keyboard-first
 * chain editor. All server traffic goes through the Api client; all
 * annotation logic lives in the controller/draft modules.
 *
 * Keys in the editor: j / ArrowDown and k / ArrowUp move the cursor,
 * a-z activates that chain and toggles it on the cursor line, Space
 * toggles with the active chain, Ctrl+S or Enter saves, Escape returns
 * to the list.
 */

import { Api, ApiError } from "./api.js";
import { EditorController } from "./controller.js";
import type { EditorHooks } from "./controller.js";
import { draftFromChains, newDraft } from "./draft.js";
import { ChainPalette, labelIndex, slotColor } from "./palette.js";
import type { PoemDetail, PoemSummary } from "./types.js";

const api = new Api();
api.token = localStorage.getItem("rhymekit-token");

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");
const app: HTMLElement = root;

function el(tag: string, className = "", text = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function annotatorName(): string {
  let name = localStorage.getItem("rhymekit-annotator");
  while (!name) {
    name = window.prompt("annotator id (letters, digits, _ . -):", "") ?? "";
    if (!/^[A-Za-z0-9][A-Za-z0-9_.-]*$/.test(name)) name = "";
  }
  localStorage.setItem("rhymekit-annotator", name);
  return name;
}

async function showPoemList(): Promise<void> {
  const annotator = annotatorName();
  app.replaceChildren();
  const header = el("header");
  header.append(el("h1", "", "rhymekit annotator"));
  let poems: PoemSummary[];
  try {
    const [list, progress] = await Promise.all([
      api.listPoems(),
      api.getProgress(annotator),
    ]);
    poems = list;
    header.append(el(
      "p", "progress",
      `${annotator}: ${progress.annotated}/${progress.total} poems annotated`,
    ));
  } catch (error) {
    app.append(header, errorBox(error));
    return;
  }
  app.append(header);

  const list = el("ul", "poem-list");
  for (const poem of poems) {
    const item = el("li");
    const link = el("a", "", poem.title ?? poem.id) as HTMLAnchorElement;
    link.href = "#";
    link.addEventListener("click", (event) => {
      event.preventDefault();
      void showEditor(annotator, poem.id);
    });
    item.append(link, el("span", "meta", ` ${poem.language}, ${poem.line_count} lines`));
    list.append(item);
  }
  app.append(list);
}

function errorBox(error: unknown): HTMLElement {
  const detail = error instanceof ApiError ? error.message : String(error);
  return el("p", "status error", `request failed: ${detail}`);
}

async function showEditor(annotator: string, poemId: string): Promise<void> {
  let poem: PoemDetail;
  let stored;
  try {
    poem = await api.getPoem(poemId);
    stored = await api.getAnnotation(annotator, poemId);
  } catch (error) {
    app.replaceChildren(errorBox(error));
    return;
  }
  const lines = poem.stanzas.flat();
  const draft = stored
    ? draftFromChains(poemId, lines.length, stored.payload.chains, stored.version)
    : newDraft(poemId, lines.length);

  const palette = new ChainPalette();
  for (const label of draft.assignment) {
    const slot = label === null ? null : labelIndex(label);
    if (slot !== null) palette.ensure(slot + 1);
  }
  let cursor = 0;
  let highlighted: number[] = [];

  app.replaceChildren();
  const title = el("h1", "", poem.title ?? poem.id);
  const paletteBar = el("div", "palette");
  const status = el("p", "status");
  const lineList = el("ol", "lines");
  const help = el(
    "p", "help",
    "j/k move - a-z toggle chain - space toggle active - ctrl+s save - esc back",
  );
  app.append(title, paletteBar, lineList, status, help);

  const hooks: EditorHooks = {
    render() {
      title.classList.toggle("dirty", controller.draft.dirty);
      renderPalette();
      renderLines();
    },
    status(message, isError = false) {
      status.textContent = message;
      status.className = isError ? "status error" : "status";
    },
    highlight(blocked) {
      highlighted = blocked;
      renderLines();
    },
    chooseConflict() {
      const overwrite = window.confirm(
        "Someone saved a newer version of this poem.\n" +
        "OK = overwrite it with your draft, Cancel = reload theirs.",
      );
      return Promise.resolve(overwrite ? "overwrite" : "reload");
    },
  };
  const controller = new EditorController(api, hooks, annotator, lines.length, draft);

  function renderPalette(): void {
    paletteBar.replaceChildren();
    palette.visible.forEach((slot, index) => {
      const chip = el("span", "chip", slot.label);
      chip.style.backgroundColor = slot.color;
      if (index === palette.activeIndex) chip.classList.add("active");
      paletteBar.append(chip);
    });
  }

  function renderLines(): void {
    lineList.replaceChildren();
    let lineIndex = 0;
    poem.stanzas.forEach((stanza, stanzaIndex) => {
      if (stanzaIndex > 0) lineList.append(el("li", "stanza-break"));
      for (const text of stanza) {
        const index = lineIndex++;
        const item = el("li", "line");
        const label = controller.draft.assignment[index];
        const badge = el("span", "badge", label ?? "·");
        if (label !== null && label !== undefined) {
          const slot = labelIndex(label);
          if (slot !== null) badge.style.backgroundColor = slotColor(slot);
        }
        item.append(badge, el("span", "text", text));
        if (index === cursor) item.classList.add("cursor");
        if (highlighted.includes(index)) item.classList.add("blocked");
        item.addEventListener("click", () => {
          cursor = index;
          controller.toggle(index, palette.active.label);
        });
        lineList.append(item);
      }
    });
  }

  function onKey(event: KeyboardEvent): void {
    if (event.key === "Escape") {
      controller.stopAutosave();
      document.removeEventListener("keydown", onKey);
      void showPoemList();
      return;
    }
    if (event.key === "s" && (event.ctrlKey || event.metaKey)) {
      event.preventDefault();
      void controller.save();
      return;
    }
    if (event.ctrlKey || event.metaKey || event.altKey) return;
    if (event.key === "Enter") {
      void controller.save();
    } else if (event.key === "j" || event.key === "ArrowDown") {
      cursor = Math.min(cursor + 1, lines.length - 1);
      renderLines();
    } else if (event.key === "k" || event.key === "ArrowUp") {
      cursor = Math.max(cursor - 1, 0);
      renderLines();
    } else if (event.key === " ") {
      event.preventDefault();
      controller.toggle(cursor, palette.active.label);
    } else if (event.key.length === 1 && palette.activate(event.key)) {
      controller.toggle(cursor, palette.active.label);
    }
  }

  document.addEventListener("keydown", onKey);
  controller.startAutosave();
  hooks.render();
}

void showPoemList();
