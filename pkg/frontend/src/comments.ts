// Comments sidebar: threads with agent suggestions, mention autocomplete,
// append/replace/copy, side-by-side preview, and approve.

import type { Api } from "./api";
import { clear, h } from "./dom";
import type { ViewState } from "./store";
import type { MessageWire, ThreadWire } from "./types";

export class CommentsPanel {
  readonly el: HTMLElement;
  composerAnchor: [number, number] | null = null;
  focusedThread: string | null = null;

  constructor(
    private store: ViewState,
    private api: Api,
  ) {
    this.el = h("aside", { class: "sidebar comments-sidebar" });
  }

  startComposer(anchor: [number, number]): void {
    this.composerAnchor = anchor;
    this.store.openSidebar("comments");
  }

  focusThread(threadId: string): void {
    this.focusedThread = threadId;
    this.store.openSidebar("comments");
  }

  render(): void {
    clear(this.el);
    this.el.append(h("h2", {}, "Comments"));
    if (this.composerAnchor) {
      this.el.append(this.renderComposer());
    }
    const threads = [...this.store.threads.values()].sort(
      (a, b) => Number(a.resolved) - Number(b.resolved),
    );
    if (!threads.length && !this.composerAnchor) {
      this.el.append(h("p", { class: "hint" }, "Select text and use the toolbar to comment."));
    }
    for (const thread of threads) {
      this.el.append(this.renderThread(thread));
    }
  }

  private renderComposer(): HTMLElement {
    const anchor = this.composerAnchor!;
    const excerpt = this.store.text.slice(anchor[0], anchor[1]);
    const { box, input } = mentionInput(this.store, "Comment or @mention an agent...");
    const send = async () => {
      const body = input.value.trim();
      if (!body) return;
      try {
        await this.api.postComment(this.store.docId, this.store.userId, body, anchor);
        this.composerAnchor = null;
        this.render();
      } catch (err) {
        this.store.notice(String(err));
      }
    };
    return h(
      "div",
      { class: "thread composer", dataset: { testid: "composer" } },
      h("div", { class: "excerpt" }, excerpt ? `"${excerpt}"` : "(insertion point)"),
      box,
      h("div", { class: "row" },
        h("button", { class: "primary", onclick: send, dataset: { testid: "composer-send" } }, "Comment"),
        h("button", { onclick: () => { this.composerAnchor = null; this.render(); } }, "Cancel"),
      ),
    );
  }

  private renderThread(thread: ThreadWire): HTMLElement {
    const annotation = this.store.annotations.get(thread.annotation_id);
    let excerpt = "";
    if (annotation) {
      try {
        const [lo, hi] = this.store.doc.resolveAnchor(annotation.anchor);
        excerpt = this.store.text.slice(lo, hi);
      } catch {
        excerpt = "";
      }
    }
    const body = h(
      "div",
      {
        class: `thread${thread.resolved ? " resolved" : ""}${this.focusedThread === thread.thread_id ? " focused" : ""}`,
        dataset: { testid: `thread-${thread.thread_id}` },
      },
      h("div", { class: "excerpt" }, excerpt ? `"${excerpt}"` : thread.resolved ? "(resolved)" : "(insertion point)"),
    );
    for (const message of thread.messages) {
      body.append(this.renderMessage(thread, message));
    }
    const typingAgent = this.store.typing.get(thread.thread_id);
    if (typingAgent) {
      body.append(
        h("div", { class: "typing", dataset: { testid: "typing" } }, `@${typingAgent} is typing...`),
      );
    }
    if (!thread.resolved) {
      body.append(this.renderReplyRow(thread));
      if (annotation && annotation.state === "open") {
        body.append(
          h("div", { class: "row" },
            h("button", {
              class: "approve",
              dataset: { testid: `approve-${thread.thread_id}` },
              onclick: () => this.api.approve(this.store.docId, annotation.annotation_id, this.store.userId)
                .catch((e) => this.store.notice(String(e))),
            }, "Approve"),
            h("button", {
              onclick: () => this.api.closeAnnotation(this.store.docId, annotation.annotation_id, this.store.userId)
                .catch((e) => this.store.notice(String(e))),
            }, "Close"),
          ),
        );
      }
    }
    return body;
  }

  private renderMessage(thread: ThreadWire, message: MessageWire): HTMLElement {
    const [kind, id] = message.author;
    const label = kind === "agent" ? `@${id}` : kind === "system" ? "system" : id;
    const el = h(
      "div",
      { class: `message author-${kind}`, dataset: { testid: `message-${message.message_id}` } },
      h("span", { class: "author" }, label),
      h("span", { class: "body" }, shorten(message.body)),
    );
    const suggestion = message.suggestion;
    if (suggestion && !thread.resolved) {
      if (suggestion.consumed_by) {
        el.append(h("span", { class: "consumed" }, `(${suggestion.consumed_by})`));
      } else {
        const act = (action: "append" | "replace" | "copy") => async () => {
          try {
            await this.api.consume(thread.thread_id, message.message_id, action, this.store.userId);
            if (action === "copy" && navigator.clipboard?.writeText) {
              await navigator.clipboard.writeText(suggestion.proposed_text);
            }
          } catch (err) {
            this.store.notice(String(err));
          }
        };
        el.append(
          h("div", { class: "row" },
            h("button", { dataset: { testid: `append-${message.message_id}` }, onclick: act("append") }, "Append"),
            h("button", { dataset: { testid: `replace-${message.message_id}` }, onclick: act("replace") }, "Replace"),
            h("button", { onclick: act("copy") }, "Copy"),
            h("button", {
              dataset: { testid: `preview-${message.message_id}` },
              onclick: () => this.showPreview(thread.thread_id, message.message_id),
            }, "..."),
          ),
        );
      }
    }
    return el;
  }

  private renderReplyRow(thread: ThreadWire): HTMLElement {
    const { box, input } = mentionInput(this.store, "Reply...");
    const send = async () => {
      const body = input.value.trim();
      if (!body) return;
      try {
        await this.api.postComment(this.store.docId, this.store.userId, body, undefined, thread.thread_id);
        input.value = "";
      } catch (err) {
        this.store.notice(String(err));
      }
    };
    return h("div", { class: "reply-row" }, box, h("button", { onclick: send }, "Reply"));
  }

  private async showPreview(threadId: string, messageId: string): Promise<void> {
    try {
      const view = await this.api.preview(threadId, messageId);
      const overlay = h(
        "div",
        { class: "overlay", dataset: { testid: "preview-overlay" } },
        h("div", { class: "preview" },
          h("div", { class: "pane" }, h("h3", {}, "Original"), h("p", {}, view.original)),
          h("div", { class: "pane" }, h("h3", {}, "Suggested"), h("p", {}, view.proposed)),
          h("button", { onclick: () => overlay.remove() }, "Close"),
        ),
      );
      document.body.append(overlay);
    } catch (err) {
      this.store.notice(String(err));
    }
  }
}

function shorten(text: string, max = 280): string {
  return text.length > max ? text.slice(0, max) + "…" : text;
}

export function mentionInput(
  store: ViewState,
  placeholder: string,
): { box: HTMLElement; input: HTMLInputElement } {
  const input = h("input", {
    type: "text",
    placeholder,
    dataset: { testid: "mention-input" },
  }) as HTMLInputElement;
  const dropdown = h("div", { class: "autocomplete", dataset: { testid: "autocomplete" } });
  dropdown.style.display = "none";

  const refresh = () => {
    const caret = input.selectionStart ?? input.value.length;
    const upToCaret = input.value.slice(0, caret);
    const match = /@([A-Za-z0-9]*)$/.exec(upToCaret);
    clear(dropdown as HTMLElement);
    if (!match) {
      dropdown.style.display = "none";
      return;
    }
    const candidates = store.mentionCandidates(match[1]);
    if (!candidates.length) {
      dropdown.style.display = "none";
      return;
    }
    dropdown.style.display = "block";
    for (const cand of candidates.slice(0, 8)) {
      dropdown.append(
        h("div", {
          class: `candidate ${cand.kind}`,
          dataset: { handle: cand.handle },
          onmousedown: (e: Event) => {
            e.preventDefault();
            const before = upToCaret.slice(0, match.index);
            input.value = `${before}@${cand.handle} ${input.value.slice(caret)}`;
            dropdown.style.display = "none";
          },
        }, `@${cand.handle} — ${cand.label}`),
      );
    }
  };
  input.addEventListener("input", refresh);
  input.addEventListener("keyup", refresh);
  const box = h("div", { class: "mention-box" }, input, dropdown);
  return { box, input };
}
