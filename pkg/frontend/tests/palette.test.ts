import { describe, expect, it } from "vitest";

import {
  ChainPalette,
  MAX_CHAINS,
  labelIndex,
  slotColor,
  slotLabel,
} from "../src/palette.js";

describe("slot labels", () => {
  it("follows rhyme-scheme letters", () => {
    expect(slotLabel(0)).toBe("a");
    expect(slotLabel(1)).toBe("b");
    expect(slotLabel(25)).toBe("z");
  });

  it("rejects slots outside a-z", () => {
    expect(() => slotLabel(-1)).toThrow(RangeError);
    expect(() => slotLabel(MAX_CHAINS)).toThrow(RangeError);
  });

  it("inverts through labelIndex", () => {
    for (let i = 0; i < MAX_CHAINS; i++) {
      expect(labelIndex(slotLabel(i))).toBe(i);
    }
    expect(labelIndex("A")).toBeNull();
    expect(labelIndex("1")).toBeNull();
    expect(labelIndex("ab")).toBeNull();
    expect(labelIndex("")).toBeNull();
  });
});

describe("slot colors", () => {
  it("are pairwise distinct across the whole palette", () => {
    const colors = new Set<string>();
    for (let i = 0; i < MAX_CHAINS; i++) colors.add(slotColor(i));
    expect(colors.size).toBe(MAX_CHAINS);
  });

  it("are stable for a slot regardless of palette growth", () => {
    const small = new ChainPalette(3);
    const big = new ChainPalette(3);
    big.ensure(26);
    expect(big.visible.slice(0, 3)).toEqual(small.visible.slice());
  });
});

describe("ChainPalette", () => {
  it("starts with two labeled slots and slot a active", () => {
    const palette = new ChainPalette();
    expect(palette.visible.map((s) => s.label)).toEqual(["a", "b"]);
    expect(palette.active.label).toBe("a");
  });

  it("grows but never shrinks", () => {
    const palette = new ChainPalette();
    palette.ensure(4);
    expect(palette.visible.length).toBe(4);
    palette.ensure(2);
    expect(palette.visible.length).toBe(4);
  });

  it("caps at 26 chains", () => {
    const palette = new ChainPalette();
    palette.ensure(MAX_CHAINS);
    expect(() => palette.ensure(MAX_CHAINS + 1)).toThrow(RangeError);
  });

  it("activates an existing slot by letter", () => {
    const palette = new ChainPalette();
    expect(palette.activate("b")).toBe(true);
    expect(palette.active.label).toBe("b");
  });

  it("activating one slot past the end grows the palette", () => {
    const palette = new ChainPalette();
    expect(palette.activate("c")).toBe(true);
    expect(palette.visible.length).toBe(3);
    expect(palette.active.label).toBe("c");
  });

  it("refuses to skip ahead or take non-letters", () => {
    const palette = new ChainPalette();
    expect(palette.activate("e")).toBe(false);  // would leave c, d unused
    expect(palette.activate("!")).toBe(false);
    expect(palette.activate("B")).toBe(false);
    expect(palette.active.label).toBe("a");
  });

  it("next() cycles through visible slots", () => {
    const palette = new ChainPalette(3);
    const seen: string[] = [];
    for (let i = 0; i < 4; i++) {
      seen.push(palette.active.label);
      palette.next();
    }
    expect(seen).toEqual(["a", "b", "c", "a"]);
  });
});
