// Client view state: the local replica plus everything the sidebars render.
// Server messages are folded in through applyServerMessage; the rendered
// body always derives from the replica after each applied update.

import { Sequence } from "./crdt";
import type {
  AgentWire,
  AnnotationWire,
  JoinInfo,
  MessageWire,
  PresenceEntry,
  SessionMessage,
  SnapshotPayload,
  TaskWire,
  ThreadWire,
} from "./types";

export type Sidebar = "comments" | "tasks" | "none";

export interface PendingRegion {
  annotationId: string;
  range: [number, number];
}

export class ViewState {
  doc: Sequence;
  docId: string;
  userId: string;
  userName: string;
  session: string;
  goal: string;
  agents: AgentWire[] = [];
  tasks: TaskWire[] = [];
  shortcuts: { task_id: string; title: string }[] = [];
  threads = new Map<string, ThreadWire>();
  annotations = new Map<string, AnnotationWire>();
  presence: PresenceEntry[] = [];
  typing = new Map<string, string>(); // thread_id -> agent handle
  sidebar: Sidebar = "comments";
  selection: [number, number] | null = null;
  notices: string[] = [];
  received: SessionMessage[] = [];
  private listeners: (() => void)[] = [];

  constructor(info: JoinInfo) {
    this.docId = info.doc;
    this.userId = info.user.id;
    this.userName = info.user.name;
    this.session = info.session;
    this.goal = info.snapshot.goal_text;
    this.doc = Sequence.fromSnapshot(info.snapshot.doc.body, info.replica);
    this.loadSnapshot(info.snapshot);
  }

  loadSnapshot(snapshot: SnapshotPayload): void {
    this.agents = snapshot.agents;
    this.tasks = snapshot.tasks;
    this.shortcuts = snapshot.shortcuts;
    this.presence = snapshot.presence;
    this.threads = new Map(snapshot.threads.map((t) => [t.thread_id, t]));
    this.annotations = new Map();
    for (const ann of (snapshot.doc as any).annotations ?? []) {
      this.annotations.set(ann.annotation_id, ann);
    }
  }

  onChange(fn: () => void): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  notice(text: string): void {
    this.notices.push(text);
    this.emit();
  }

  // ------------------------------------------------------------------
  // Derived rendering data
  // ------------------------------------------------------------------

  get text(): string {
    return this.doc.text;
  }

  pendingRegions(): PendingRegion[] {
    const out: PendingRegion[] = [];
    for (const ann of this.annotations.values()) {
      if (ann.state === "open" && ann.pending_region) {
        try {
          out.push({ annotationId: ann.annotation_id, range: this.doc.resolveAnchor(ann.pending_region) });
        } catch {
          // anchor from a newer edit we have not integrated yet
        }
      }
    }
    return out;
  }

  annotationRanges(): { annotationId: string; threadId: string; range: [number, number] }[] {
    const out: { annotationId: string; threadId: string; range: [number, number] }[] = [];
    for (const ann of this.annotations.values()) {
      if (ann.state !== "open") continue;
      try {
        const range = this.doc.resolveAnchor(ann.anchor);
        if (range[0] !== range[1]) {
          out.push({ annotationId: ann.annotation_id, threadId: ann.thread_id, range });
        }
      } catch {
        // ignore unresolvable anchors
      }
    }
    return out;
  }

  mentionCandidates(prefix: string): { handle: string; label: string; kind: "agent" | "user" }[] {
    const p = prefix.toLowerCase();
    const agents = this.agents
      .filter((a) => a.handle.toLowerCase().startsWith(p))
      .sort((a, b) => Number(b.is_default) - Number(a.is_default));
    const users = this.presence.filter((u) => u.id.toLowerCase().startsWith(p));
    return [
      ...agents.map((a) => ({ handle: a.handle, label: `${a.name} (agent)`, kind: "agent" as const })),
      ...users.map((u) => ({ handle: u.id, label: u.name, kind: "user" as const })),
    ];
  }

  openSidebar(which: Sidebar): void {
    this.sidebar = which;
    this.emit();
  }

  setSelection(sel: [number, number] | null): void {
    this.selection = sel;
    this.emit();
  }

  // ------------------------------------------------------------------
  // Local edits
  // ------------------------------------------------------------------

  localInsert(offset: number, text: string) {
    const ops = this.doc.localInsert(offset, text);
    this.emit();
    return ops;
  }

  localDelete(offset: number, length: number) {
    const ops = this.doc.localDelete(offset, length);
    this.emit();
    return ops;
  }

  // ------------------------------------------------------------------
  // Server messages
  // ------------------------------------------------------------------

  applyServerMessage(message: SessionMessage): void {
    this.received.push(message);
    const payload = message.payload ?? {};
    switch (message.kind) {
      case "edit_update":
        if (payload.origin !== this.doc.replicaId) {
          this.doc.integrate(payload.ops);
        }
        break;
      case "presence":
        this.presence = payload.online ?? [];
        break;
      case "agent_typing":
        this.typing.set(payload.thread, payload.agent);
        break;
      case "comment_event":
        this.applyCommentEvent(payload);
        break;
      case "task_event":
        this.applyTaskEvent(payload);
        break;
      case "error":
        if (payload.thread) this.typing.delete(payload.thread);
        this.notices.push(payload.reason ?? "server error");
        break;
      case "save":
        break;
      default:
        break;
    }
    this.emit();
  }

  private mergeThread(thread: ThreadWire): void {
    this.threads.set(thread.thread_id, thread);
  }

  private appendMessage(threadId: string, message: MessageWire): void {
    const thread = this.threads.get(threadId);
    if (!thread) return;
    if (!thread.messages.some((m) => m.message_id === message.message_id)) {
      thread.messages.push(message);
    }
  }

  private applyCommentEvent(payload: any): void {
    if (payload.annotation) {
      this.annotations.set(payload.annotation.annotation_id, payload.annotation);
    }
    const threadRef = payload.thread;
    switch (payload.event) {
      case "message":
      case "agent_comment":
      case "attempted_execution":
        if (threadRef && typeof threadRef === "object") this.mergeThread(threadRef);
        if (typeof threadRef === "string" && payload.message) this.appendMessage(threadRef, payload.message);
        break;
      case "agent_reply":
      case "agent_unavailable":
        if (payload.message) this.appendMessage(threadRef, payload.message);
        this.typing.delete(threadRef);
        break;
      case "consumed": {
        const thread = this.threads.get(threadRef);
        const msg = thread?.messages.find((m) => m.message_id === payload.message);
        if (msg?.suggestion) {
          msg.suggestion.consumed_by = payload.action;
        }
        break;
      }
      case "approved":
      case "closed": {
        const thread = this.threads.get(threadRef);
        if (thread) thread.resolved = true;
        break;
      }
      default:
        break;
    }
  }

  private applyTaskEvent(payload: any): void {
    switch (payload.event) {
      case "task_created":
        this.tasks = [...this.tasks.filter((t) => t.task_id !== payload.task.task_id), payload.task];
        break;
      case "task_updated":
        this.tasks = this.tasks.map((t) => (t.task_id === payload.task.task_id ? payload.task : t));
        break;
      case "task_deleted":
        this.tasks = this.tasks.filter((t) => t.task_id !== payload.task.task_id);
        break;
      case "agent_created":
        this.agents = [...this.agents.filter((a) => a.agent_id !== payload.agent.agent_id), payload.agent];
        break;
      case "agent_updated":
        this.agents = this.agents.map((a) => (a.agent_id === payload.agent.agent_id ? payload.agent : a));
        break;
      case "agent_deleted":
        this.agents = this.agents.filter((a) => a.agent_id !== payload.agent.agent_id);
        break;
      default:
        break;
    }
    this.refreshShortcuts();
  }

  private refreshShortcuts(): void {
    this.shortcuts = this.tasks
      .filter((t) => t.shortcut)
      .map((t) => ({ task_id: t.task_id, title: t.title }));
  }
}
