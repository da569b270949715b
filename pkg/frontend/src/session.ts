// Websocket session: applies broadcasts to the store via a serialized
// queue and ships local edit ops with a per-session sequence number.

import type { ViewState } from "./store";
import type { OpWire, SessionMessage } from "./types";

export class Session {
  private ws: WebSocket;
  private seq = 0;
  private queue: SessionMessage[] = [];
  private draining = false;

  constructor(
    readonly store: ViewState,
    wsBase: string,
  ) {
    const url = `${wsBase}/documents/${store.docId}/ws?session=${encodeURIComponent(store.session)}`;
    this.ws = new WebSocket(url);
    this.ws.onmessage = (event: MessageEvent) => {
      this.queue.push(JSON.parse(String(event.data)));
      this.drain();
    };
  }

  private drain(): void {
    if (this.draining) return;
    this.draining = true;
    try {
      while (this.queue.length) {
        this.store.applyServerMessage(this.queue.shift()!);
      }
    } finally {
      this.draining = false;
    }
  }

  ready(): Promise<void> {
    if (this.ws.readyState === 1) return Promise.resolve();
    return new Promise((resolve, reject) => {
      this.ws.addEventListener("open", () => resolve(), { once: true });
      this.ws.addEventListener("error", () => reject(new Error("websocket failed")), { once: true });
    });
  }

  sendEdit(ops: OpWire[]): void {
    this.seq += 1;
    this.ws.send(
      JSON.stringify({
        kind: "edit_update",
        doc: this.store.docId,
        sender: { type: "user", id: this.store.userId },
        seq: this.seq,
        payload: { ops, origin: this.store.doc.replicaId },
      }),
    );
  }

  close(): void {
    this.ws.close();
  }
}
