// Client replica of the character sequence. Mirrors the server semantics:
// elements form a tree keyed by (counter, replica), children ordered by
// descending key, document order is a pre-order walk, deletes tombstone.
// The interop fixture test pins this against the server implementation.

import type { AnchorWire, ElementIdWire, OpWire } from "./types";

type Key = string; // "replica:counter"

function keyOf(id: ElementIdWire): Key {
  return `${id[0]}:${id[1]}`;
}

class Node {
  readonly id: ElementIdWire;
  readonly char: string;
  deleted = false;
  children: Node[] = []; // ascending (counter, replica); walked in reverse

  constructor(id: ElementIdWire, char: string) {
    this.id = id;
    this.char = char;
  }
}

function siblingIndex(siblings: Node[], id: ElementIdWire): number {
  // Binary search by ascending (counter, replica).
  let lo = 0;
  let hi = siblings.length;
  while (lo < hi) {
    const mid = (lo + hi) >> 1;
    const s = siblings[mid].id;
    if (s[1] < id[1] || (s[1] === id[1] && s[0] < id[0])) lo = mid + 1;
    else hi = mid;
  }
  return lo;
}

export class Sequence {
  readonly replicaId: string;
  private clock = 0;
  private nodes = new Map<Key, Node>();
  private rootChildren: Node[] = [];
  private pending = new Map<Key, OpWire[]>();
  private flatCache: Node[] | null = null;

  constructor(replicaId: string) {
    this.replicaId = replicaId;
  }

  static fromSnapshot(snapshot: { elements: any[]; clock?: number }, replicaId: string): Sequence {
    const seq = new Sequence(replicaId);
    for (const [rep, ctr, char, deleted, parent] of snapshot.elements) {
      seq.applyInsert({ id: [rep, ctr], parent: parent ?? null, char });
      if (deleted) seq.applyDelete({ id: [rep, ctr] });
    }
    seq.clock = Math.max(seq.clock, snapshot.clock ?? 0);
    return seq;
  }

  // ------------------------------------------------------------------

  localInsert(offset: number, text: string): OpWire[] {
    const visible = this.visibleNodes();
    if (offset < 0 || offset > visible.length) throw new Error(`offset ${offset} out of range`);
    let parent: ElementIdWire | null = offset > 0 ? visible[offset - 1].id : null;
    const ops: OpWire[] = [];
    for (const char of text) {
      this.clock += 1;
      const op: OpWire = { op: "insert", id: [this.replicaId, this.clock], parent, char };
      this.applyInsert(op);
      ops.push(op);
      parent = op.id;
    }
    return ops;
  }

  localDelete(offset: number, length: number): OpWire[] {
    const visible = this.visibleNodes();
    if (offset < 0 || offset + length > visible.length) throw new Error("delete out of range");
    const ops: OpWire[] = visible
      .slice(offset, offset + length)
      .map((n) => ({ op: "delete", id: n.id }) as OpWire);
    for (const op of ops) this.applyDelete(op as { op: "delete"; id: ElementIdWire });
    return ops;
  }

  integrate(ops: OpWire[]): void {
    const work = [...ops];
    while (work.length) {
      const op = work.shift()!;
      if (op.op === "insert") {
        if (this.nodes.has(keyOf(op.id))) continue;
        if (op.parent && !this.nodes.has(keyOf(op.parent))) {
          const k = keyOf(op.parent);
          this.pending.set(k, [...(this.pending.get(k) ?? []), op]);
          continue;
        }
        this.applyInsert(op);
        const waiting = this.pending.get(keyOf(op.id));
        if (waiting) {
          this.pending.delete(keyOf(op.id));
          work.unshift(...waiting);
        }
      } else {
        const node = this.nodes.get(keyOf(op.id));
        if (!node) {
          const k = keyOf(op.id);
          this.pending.set(k, [...(this.pending.get(k) ?? []), op]);
          continue;
        }
        this.applyDelete(op);
      }
    }
  }

  private applyInsert(op: { id: ElementIdWire; parent: ElementIdWire | null; char: string }): void {
    const node = new Node(op.id, op.char);
    this.nodes.set(keyOf(op.id), node);
    const siblings = op.parent ? this.nodes.get(keyOf(op.parent))!.children : this.rootChildren;
    siblings.splice(siblingIndex(siblings, op.id), 0, node);
    if (op.id[1] > this.clock) this.clock = op.id[1];
    this.flatCache = null;
  }

  private applyDelete(op: { id: ElementIdWire }): void {
    const node = this.nodes.get(keyOf(op.id))!;
    if (!node.deleted) {
      node.deleted = true;
      this.flatCache = null;
    }
  }

  // ------------------------------------------------------------------

  private flat(): Node[] {
    if (this.flatCache === null) {
      const out: Node[] = [];
      const stack: Node[] = [...this.rootChildren];
      while (stack.length) {
        const node = stack.pop()!;
        out.push(node);
        if (node.children.length) stack.push(...node.children);
      }
      this.flatCache = out;
    }
    return this.flatCache;
  }

  private visibleNodes(): Node[] {
    return this.flat().filter((n) => !n.deleted);
  }

  get text(): string {
    return this.visibleNodes()
      .map((n) => n.char)
      .join("");
  }

  get length(): number {
    return this.visibleNodes().length;
  }

  resolveAnchor(anchor: AnchorWire): [number, number] {
    const flat = this.flat();
    const index = new Map<Key, number>();
    flat.forEach((n, i) => index.set(keyOf(n.id), i));
    const prefix: number[] = new Array(flat.length + 1).fill(0);
    for (let i = 0; i < flat.length; i++) prefix[i + 1] = prefix[i] + (flat[i].deleted ? 0 : 1);
    if (anchor.empty) {
      if (!anchor.start) return [0, 0];
      const i = index.get(keyOf(anchor.start));
      if (i === undefined) throw new Error("dangling anchor");
      const off = prefix[i] + (flat[i].deleted ? 0 : 1);
      return [off, off];
    }
    const i0 = index.get(keyOf(anchor.start!));
    const i1 = index.get(keyOf(anchor.end!));
    if (i0 === undefined || i1 === undefined) throw new Error("dangling anchor");
    const lo = prefix[i0];
    const hi = prefix[i1] + (flat[i1].deleted ? 0 : 1);
    return [lo, Math.max(lo, hi)];
  }
}
