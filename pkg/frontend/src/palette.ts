/**
 * Chain palette: ordered slots labeled with rhyme-scheme letters (a, b,
 * c, ...), each with a stable color, plus the active slot the next line
 * toggle applies to.
 */

export interface ChainSlot {
  label: string;
  color: string;
}

export const MAX_CHAINS = 26;

/** Golden-angle hue steps keep any prefix of the palette visually distinct. */
export function slotColor(index: number): string {
  const hue = (index * 137.508) % 360;
  return `hsl(${hue.toFixed(1)}, 65%, 42%)`;
}

export function slotLabel(index: number): string {
  if (index < 0 || index >= MAX_CHAINS) {
    throw new RangeError(`chain slot out of range: ${index}`);
  }
  return String.fromCharCode(97 + index);
}

export function labelIndex(label: string): number | null {
  if (!/^[a-z]$/.test(label)) return null;
  return label.charCodeAt(0) - 97;
}

export class ChainPalette {
  private slots: ChainSlot[] = [];
  activeIndex = 0;

  constructor(initialSlots = 2) {
    this.ensure(initialSlots);
  }

  /** Grow to at least `count` slots; colors and labels never change. */
  ensure(count: number): void {
    if (count > MAX_CHAINS) {
      throw new RangeError(`at most ${MAX_CHAINS} chains are supported`);
    }
    while (this.slots.length < count) {
      const index = this.slots.length;
      this.slots.push({ label: slotLabel(index), color: slotColor(index) });
    }
  }

  get visible(): readonly ChainSlot[] {
    return this.slots;
  }

  get active(): ChainSlot {
    const slot = this.slots[this.activeIndex];
    if (!slot) throw new RangeError(`no slot at ${this.activeIndex}`);
    return slot;
  }

  /** Activate a slot by letter, growing the palette when one past the end. */
  activate(label: string): boolean {
    const index = labelIndex(label);
    if (index === null || index > this.slots.length || index >= MAX_CHAINS) {
      return false;
    }
    this.ensure(index + 1);
    this.activeIndex = index;
    return true;
  }

  next(): void {
    this.activeIndex = (this.activeIndex + 1) % this.slots.length;
  }
}
