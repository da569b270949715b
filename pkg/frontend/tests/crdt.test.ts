// The client replica must agree byte-for-byte with the server
// implementation; the fixture was generated by the server side.

import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { resolve } from "node:path";
import { Sequence } from "../src/crdt";
import type { AnchorWire, OpWire } from "../src/types";

interface FixtureCase {
  name: string;
  streams: OpWire[][];
  deliver_orders?: number[][];
  expected_text: string;
  anchor?: [string, number][];
  resolutions?: [number, number][];
}

const cases: FixtureCase[] = JSON.parse(
  readFileSync(resolve(process.cwd(), "tests/fixtures/crdt_interop.json"), "utf8"),
);

function findCase(name: string): FixtureCase {
  const c = cases.find((x) => x.name === name);
  if (!c) throw new Error(`fixture case ${name} missing`);
  return c;
}

describe("sequence interop with the server implementation", () => {
  it("converges to the server text under every recorded delivery order", () => {
    for (const c of cases.filter((x) => x.deliver_orders)) {
      for (const order of c.deliver_orders!) {
        const replica = new Sequence("ts");
        for (const idx of order) {
          replica.integrate(c.streams[idx]);
        }
        expect(replica.text, `${c.name} order ${order}`).toBe(c.expected_text);
      }
    }
  });

  it("buffers out-of-order delivery until dependencies arrive", () => {
    const c = findCase("fuzz_3_replicas");
    const replica = new Sequence("ts");
    const flat = c.streams.flat();
    for (let i = flat.length - 1; i >= 0; i--) {
      replica.integrate([flat[i]]); // fully reversed op-by-op delivery
    }
    expect(replica.text).toBe(c.expected_text);
  });

  it("resolves anchors at the recorded checkpoints", () => {
    const c = findCase("anchor_resolution");
    const replica = new Sequence("ts");
    replica.integrate(c.streams[0]);
    const anchor: AnchorWire = {
      start: c.anchor![0],
      end: c.anchor![1],
      empty: false,
      bias: "outside",
    };
    replica.integrate(c.streams[1]);
    expect(replica.resolveAnchor(anchor)).toEqual(c.resolutions![0]);
    replica.integrate(c.streams[2]);
    expect(replica.resolveAnchor(anchor)).toEqual(c.resolutions![1]);
    expect(replica.text).toBe(c.expected_text);
  });
});

describe("local editing", () => {
  it("round-trips inserts and deletes", () => {
    const a = new Sequence("a");
    const ops = a.localInsert(0, "hello world");
    a.localDelete(5, 6);
    expect(a.text).toBe("hello");

    const b = new Sequence("b");
    b.integrate(ops);
    expect(b.text).toBe("hello world");
  });

  it("concurrent head inserts converge both ways", () => {
    const a = new Sequence("a");
    const b = new Sequence("b");
    const opsA = a.localInsert(0, "one");
    const opsB = b.localInsert(0, "two");
    a.integrate(opsB);
    b.integrate(opsA);
    expect(a.text).toBe(b.text);
    expect(["onetwo", "twoone"]).toContain(a.text);
  });

  it("duplicate delivery is idempotent", () => {
    const a = new Sequence("a");
    const ops = a.localInsert(0, "dup");
    const b = new Sequence("b");
    b.integrate(ops);
    b.integrate(ops);
    expect(b.text).toBe("dup");
  });
});
