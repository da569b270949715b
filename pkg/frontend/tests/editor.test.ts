// Editor rendering: pending regions and annotation highlights become
// distinctly classed spans; local edits produce ops the session ships.

import { describe, expect, it } from "vitest";
import { Editor } from "../src/editor";
import { ViewState } from "../src/store";
import type { JoinInfo, OpWire } from "../src/types";

function bodySnapshot(text: string) {
  const elements: any[] = [];
  let parent: [string, number] | null = null;
  [...text].forEach((char, i) => {
    elements.push(["srv", i + 1, char, false, parent]);
    parent = ["srv", i + 1];
  });
  return { replica: "srv", clock: text.length, elements };
}

function joinInfo(text: string): JoinInfo {
  return {
    doc: "doc1",
    join_code: "c",
    user: { id: "alice", name: "Alice" },
    session: "s1",
    replica: "alice-rep1",
    seq: 0,
    snapshot: {
      doc: { body: bodySnapshot(text), annotations: [] },
      goal_text: "",
      text,
      agents: [], tasks: [], threads: [], shortcuts: [], presence: [],
      pending_regions: {}, seq: 0,
    },
  };
}

class FakeSession {
  sent: OpWire[][] = [];
  sendEdit(ops: OpWire[]): void {
    this.sent.push(ops);
  }
}

function makeEditor(text: string) {
  const store = new ViewState(joinInfo(text));
  const session = new FakeSession();
  const clicked: string[] = [];
  const editor = new Editor(store, session as any, (threadId) => clicked.push(threadId));
  return { store, session, editor, clicked };
}

describe("editor rendering", () => {
  it("renders pending regions with the pending class", () => {
    const { store, editor } = makeEditor("abcdef");
    store.applyServerMessage({
      kind: "comment_event", doc: "doc1", sender: { type: "user", id: "x" }, seq: 1,
      payload: {
        event: "message",
        thread: { thread_id: "th1", annotation_id: "ann1", messages: [], resolved: false },
        annotation: {
          annotation_id: "ann1",
          anchor: { start: ["srv", 1], end: ["srv", 3], empty: false, bias: "outside" },
          state: "open", thread_id: "th1",
          pending_region: { start: ["srv", 4], end: ["srv", 5], empty: false, bias: "outside" },
          created_by: ["user", "alice"],
        },
      },
    });
    editor.render();
    const spans = [...editor.el.querySelectorAll("span")];
    const pending = spans.find((s) => s.classList.contains("pending"));
    const annotated = spans.find((s) => s.classList.contains("annotation"));
    expect(pending?.textContent).toBe("de");
    expect(annotated?.textContent).toBe("abc");
    expect(editor.el.textContent).toBe("abcdef");
  });

  it("clicking an annotated span focuses its thread", () => {
    const { store, editor, clicked } = makeEditor("abcdef");
    store.applyServerMessage({
      kind: "comment_event", doc: "doc1", sender: { type: "user", id: "x" }, seq: 1,
      payload: {
        event: "message",
        thread: { thread_id: "th9", annotation_id: "ann9", messages: [], resolved: false },
        annotation: {
          annotation_id: "ann9",
          anchor: { start: ["srv", 2], end: ["srv", 4], empty: false, bias: "outside" },
          state: "open", thread_id: "th9", pending_region: null,
          created_by: ["user", "alice"],
        },
      },
    });
    editor.render();
    const annotated = [...editor.el.querySelectorAll("span")].find((s) => s.classList.contains("annotation"))!;
    annotated.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    expect(clicked).toEqual(["th9"]);
  });

  it("insertAt and deleteAt update the replica and ship ops", () => {
    const { store, session, editor } = makeEditor("hello");
    editor.insertAt(5, " world");
    expect(store.text).toBe("hello world");
    editor.deleteAt(0, 6);
    expect(store.text).toBe("world");
    expect(session.sent).toHaveLength(2);
    expect(session.sent[0]).toHaveLength(6);
    expect(session.sent[1].every((op) => op.op === "delete")).toBe(true);
    expect(editor.el.textContent).toBe("world");
  });

  it("beforeinput insertText applies at the tracked selection", () => {
    const { store, editor } = makeEditor("ab");
    editor.el.ownerDocument.body.append(editor.el);
    editor.select(1, 1);
    editor.el.dispatchEvent(
      new InputEvent("beforeinput", { inputType: "insertText", data: "X", bubbles: true, cancelable: true }),
    );
    expect(store.text).toBe("aXb");

    editor.select(0, 2); // replace "aX"
    editor.el.dispatchEvent(
      new InputEvent("beforeinput", { inputType: "insertText", data: "Y", bubbles: true, cancelable: true }),
    );
    expect(store.text).toBe("Yb");

    editor.select(1, 1);
    editor.el.dispatchEvent(
      new InputEvent("beforeinput", { inputType: "deleteContentBackward", bubbles: true, cancelable: true }),
    );
    expect(store.text).toBe("b");
  });
});
