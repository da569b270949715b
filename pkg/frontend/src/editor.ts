// The shared text pane. Renders the replica with pending regions in a
// distinct color and annotation highlights; tracks the user selection and
// turns editing input into replica operations.

import { clear, h } from "./dom";
import type { Session } from "./session";
import type { ViewState } from "./store";

interface Segment {
  start: number;
  end: number;
  classes: string[];
  threadId?: string;
}

export class Editor {
  readonly el: HTMLElement;

  constructor(
    private store: ViewState,
    private session: Session,
    private onAnnotationClick: (threadId: string) => void,
  ) {
    this.el = h("div", {
      class: "editor",
      contenteditable: "true",
      spellcheck: "false",
      onbeforeinput: (e: Event) => this.handleBeforeInput(e as InputEvent),
    });
    document.addEventListener("selectionchange", () => this.captureSelection());
  }

  // ------------------------------------------------------------------
  // Rendering
  // ------------------------------------------------------------------

  render(): void {
    const text = this.store.text;
    const marks: { at: number; kind: "pending" | "annotation"; end: number; threadId?: string }[] = [];
    for (const region of this.store.pendingRegions()) {
      marks.push({ at: region.range[0], end: region.range[1], kind: "pending" });
    }
    for (const ann of this.store.annotationRanges()) {
      marks.push({ at: ann.range[0], end: ann.range[1], kind: "annotation", threadId: ann.threadId });
    }
    const cuts = new Set<number>([0, text.length]);
    for (const m of marks) {
      cuts.add(Math.min(m.at, text.length));
      cuts.add(Math.min(m.end, text.length));
    }
    const points = [...cuts].sort((a, b) => a - b);
    const segments: Segment[] = [];
    for (let i = 0; i + 1 < points.length; i++) {
      const [start, end] = [points[i], points[i + 1]];
      if (start === end) continue;
      const classes: string[] = [];
      let threadId: string | undefined;
      for (const m of marks) {
        if (m.at <= start && end <= m.end) {
          classes.push(m.kind);
          if (m.threadId) threadId = m.threadId;
        }
      }
      segments.push({ start, end, classes, threadId });
    }
    clear(this.el);
    if (!segments.length) {
      this.el.append(h("span", { class: "placeholder-caret" }, "​"));
    }
    for (const seg of segments) {
      const span = h(
        "span",
        {
          class: seg.classes.join(" ") || undefined,
          dataset: { start: String(seg.start), end: String(seg.end) },
        },
        text.slice(seg.start, seg.end),
      );
      if (seg.threadId) {
        const threadId = seg.threadId;
        span.addEventListener("click", () => this.onAnnotationClick(threadId));
      }
      this.el.append(span);
    }
  }

  // ------------------------------------------------------------------
  // Selection
  // ------------------------------------------------------------------

  private offsetOfNode(node: Node, offsetInNode: number): number {
    let total = 0;
    for (const span of Array.from(this.el.childNodes)) {
      const textNode = span.firstChild ?? span;
      const length = span.textContent?.length ?? 0;
      if (span === node || textNode === node || span.contains(node)) {
        return total + Math.min(offsetInNode, length);
      }
      total += length;
    }
    return total;
  }

  private captureSelection(): void {
    const sel = document.getSelection();
    if (!sel || sel.rangeCount === 0) return;
    const range = sel.getRangeAt(0);
    if (!this.el.contains(range.startContainer)) return;
    const start = this.offsetOfNode(range.startContainer, range.startOffset);
    const end = this.offsetOfNode(range.endContainer, range.endOffset);
    this.store.setSelection([Math.min(start, end), Math.max(start, end)]);
  }

  select(start: number, end: number): void {
    // Programmatic selection, used by the toolbar flows and tests.
    this.store.setSelection([start, end]);
  }

  // ------------------------------------------------------------------
  // Editing
  // ------------------------------------------------------------------

  insertAt(offset: number, text: string): void {
    const ops = this.store.localInsert(offset, text);
    this.session.sendEdit(ops);
    this.render();
  }

  deleteAt(offset: number, length: number): void {
    if (length <= 0) return;
    const ops = this.store.localDelete(offset, length);
    this.session.sendEdit(ops);
    this.render();
  }

  private handleBeforeInput(e: InputEvent): void {
    e.preventDefault();
    const sel = this.store.selection ?? [this.store.text.length, this.store.text.length];
    const [start, end] = sel;
    if (e.inputType === "insertText" || e.inputType === "insertParagraph") {
      const text = e.inputType === "insertParagraph" ? "\n" : (e.data ?? "");
      if (end > start) this.deleteAt(start, end - start);
      if (text) this.insertAt(start, text);
      this.store.setSelection([start + text.length, start + text.length]);
    } else if (e.inputType === "deleteContentBackward") {
      if (end > start) this.deleteAt(start, end - start);
      else if (start > 0) this.deleteAt(start - 1, 1);
      const at = end > start ? start : Math.max(0, start - 1);
      this.store.setSelection([at, at]);
    } else if (e.inputType === "deleteContentForward") {
      if (end > start) this.deleteAt(start, end - start);
      else if (start < this.store.text.length) this.deleteAt(start, 1);
      this.store.setSelection([start, start]);
    }
  }
}
