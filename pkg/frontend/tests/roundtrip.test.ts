/**
 * End-to-end round trip against the real annotation service: spawn the
 * Python server on a free port, drive the editor state machine exactly
 * as the key handler does, and check the stored result with the
 * command-line agreement report.
 */

import { execFile as execFileCb, spawn } from "node:child_process";
import type { ChildProcessWithoutNullStreams } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { Api } from "../src/api.js";
import { EditorController } from "../src/controller.js";
import type { EditorHooks } from "../src/controller.js";
import { newDraft, serialize } from "../src/draft.js";
import { ChainPalette } from "../src/palette.js";

const execFile = promisify(execFileCb);

const OCTAVE_CHAINS = [[0, 3, 4, 7], [1, 2, 5, 6]];

const SERVER_SCRIPT = `
import sys
from rhymekit import corpus_from_dict
from rhymekit.service import build_server

octave = ["line number " + w for w in
          ("one", "two", "three", "four", "five", "six", "seven", "eight")]
corpus = corpus_from_dict({
    "language": "en",
    "poems": [{"id": "octave", "title": "An Octave", "stanzas": [octave]}],
})
server = build_server(corpus, sys.argv[1], port=0)
print(server.server_address[1], flush=True)
server.serve_forever()
`;

let child: ChildProcessWithoutNullStreams;
let api: Api;
let storeDir: string;

function quietHooks(choices: Array<"reload" | "overwrite"> = []): EditorHooks {
  return {
    render: () => {},
    status: () => {},
    highlight: () => {},
    chooseConflict: () => Promise.resolve(choices.shift() ?? "reload"),
  };
}

/** Assign the octave rhyme chains the way the keyboard layer does. */
function annotateOctave(controller: EditorController): void {
  const palette = new ChainPalette();
  palette.activate("a");
  for (const line of [0, 3, 4, 7]) controller.toggle(line, palette.active.label);
  palette.activate("b");
  for (const line of [1, 2, 5, 6]) controller.toggle(line, palette.active.label);
}

beforeAll(async () => {
  const workDir = mkdtempSync(join(tmpdir(), "annotator-roundtrip-"));
  storeDir = join(workDir, "annotations");
  const script = join(workDir, "serve_octave.py");
  writeFileSync(script, SERVER_SCRIPT);

  const env = { ...process.env };
  delete env["RHYMEKIT_API_TOKEN"];
  child = spawn("python3", [script, storeDir], { env });

  let stderr = "";
  child.stderr.on("data", (chunk: Buffer) => { stderr += chunk.toString(); });
  const port = await new Promise<number>((resolve, reject) => {
    const timer = setTimeout(
      () => reject(new Error(`server did not report a port\n${stderr}`)), 20000,
    );
    let buffer = "";
    child.stdout.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      if (buffer.includes("\n")) {
        clearTimeout(timer);
        resolve(Number(buffer.split("\n")[0]));
      }
    });
    child.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`server exited early (${code})\n${stderr}`));
    });
  });
  expect(Number.isInteger(port) && port > 0).toBe(true);
  api = new Api(`http://127.0.0.1:${port}`);
});

afterAll(() => {
  child?.kill();
});

describe("octave annotation round trip", () => {
  it("serializes the edited pattern to the two expected chains", async () => {
    for (const annotator of ["anna", "ben"]) {
      const controller = new EditorController(
        api, quietHooks(), annotator, 8, newDraft("octave", 8),
      );
      annotateOctave(controller);
      expect(serialize(controller.draft, annotator).chains).toEqual(OCTAVE_CHAINS);
      await expect(controller.save()).resolves.toBe("saved");
      expect(controller.draft.dirty).toBe(false);
      expect(controller.draft.version).not.toBe("0");
    }
  });

  it("fetching returns what was saved, version and all", async () => {
    for (const annotator of ["anna", "ben"]) {
      const stored = await api.getAnnotation(annotator, "octave");
      expect(stored).not.toBeNull();
      expect(stored!.payload).toEqual({
        annotator,
        poem_id: "octave",
        chains: OCTAVE_CHAINS,
      });
    }
  });

  it("counts the saved poem in the annotator's progress", async () => {
    await expect(api.getProgress("anna")).resolves.toEqual({ annotated: 1, total: 1 });
    await expect(api.getProgress("nobody")).resolves.toEqual({ annotated: 0, total: 1 });
  });

  it("scores 1.0 agreement between the two identical files", async () => {
    const { stdout } = await execFile("rhymekit", [
      "iaa",
      "--ann-dir", join(storeDir, "anna"),
      "--ann-dir", join(storeDir, "ben"),
      "--language", "en",
    ]);
    expect(stdout).toContain("en: micro F1 1.0000");
    expect(stdout).toContain("macro F1 1.0000");
  });

  it("resolves a real stale-version conflict by overwriting", async () => {
    // a second session for anna that never saw the first save
    const stale = new EditorController(
      api, quietHooks(["overwrite"]), "anna", 8, newDraft("octave", 8),
    );
    for (const line of [0, 1]) stale.toggle(line, "a");
    await expect(stale.save()).resolves.toBe("saved");
    const stored = await api.getAnnotation("anna", "octave");
    expect(stored!.payload.chains).toEqual([[0, 1]]);
  });

  it("resolves a conflict by reloading the server copy", async () => {
    const stale = new EditorController(
      api, quietHooks(["reload"]), "ben", 8, newDraft("octave", 8),
    );
    for (const line of [6, 7]) stale.toggle(line, "c");
    await expect(stale.save()).resolves.toBe("reloaded");
    expect(stale.draft.dirty).toBe(false);
    expect(serialize(stale.draft, "ben").chains).toEqual(OCTAVE_CHAINS);
    const stored = await api.getAnnotation("ben", "octave");
    expect(stored!.payload.chains).toEqual(OCTAVE_CHAINS);  // untouched
  });
});
