// Thin REST client; every UI flow maps 1:1 onto these endpoints.

import type { AgentWire, JoinInfo, RunLogWire, SnapshotPayload, TaskWire, ThreadWire } from "./types";

export class Api {
  constructor(readonly base: string) {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await fetch(this.base + path, {
      method,
      headers: body !== undefined ? { "Content-Type": "application/json" } : undefined,
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    const data = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      throw new Error((data as any).error ?? `${method} ${path} failed (${resp.status})`);
    }
    return data as T;
  }

  join(ref: string, user: string): Promise<JoinInfo> {
    return this.call("POST", `/documents/${encodeURIComponent(ref)}/join`, { user });
  }

  leave(doc: string, session: string): Promise<unknown> {
    return this.call("POST", `/documents/${doc}/leave`, { session });
  }

  snapshot(doc: string): Promise<SnapshotPayload> {
    return this.call("GET", `/documents/${doc}/snapshot`);
  }

  save(doc: string, user: string): Promise<{ version: number }> {
    return this.call("POST", `/documents/${doc}/save`, { user });
  }

  postComment(doc: string, user: string, body: string, anchor?: [number, number], thread?: string) {
    return this.call<{ thread: ThreadWire; message: any; agents: string[] }>(
      "POST", `/documents/${doc}/comments`,
      { user, body, anchor: anchor ?? null, thread: thread ?? null },
    );
  }

  consume(thread: string, message: string, action: "append" | "replace" | "copy", user: string) {
    return this.call("POST", `/threads/${thread}/consume`, { message, action, user });
  }

  preview(thread: string, message: string): Promise<{ original: string; proposed: string }> {
    return this.call("GET", `/threads/${thread}/preview/${message}`);
  }

  approve(doc: string, annotation: string, user: string) {
    return this.call("POST", `/documents/${doc}/annotations/${annotation}/approve`, { user });
  }

  closeAnnotation(doc: string, annotation: string, user: string) {
    return this.call("POST", `/documents/${doc}/annotations/${annotation}/close`, { user });
  }

  agents(doc: string): Promise<AgentWire[]> {
    return this.call("GET", `/documents/${doc}/agents`);
  }

  presets(doc: string): Promise<any[]> {
    return this.call("GET", `/documents/${doc}/presets`);
  }

  createAgent(doc: string, body: Record<string, unknown>): Promise<AgentWire> {
    return this.call("POST", `/documents/${doc}/agents`, body);
  }

  updateAgent(doc: string, agentId: string, body: Record<string, unknown>): Promise<AgentWire> {
    return this.call("PUT", `/documents/${doc}/agents/${agentId}`, body);
  }

  suggest(agentId: string, section: string, current: string[]): Promise<{ suggestions: string[] }> {
    return this.call("POST", `/agents/${agentId}/suggest`, { section, current });
  }

  history(agentId: string): Promise<RunLogWire[]> {
    return this.call("GET", `/agents/${agentId}/history`);
  }

  createTask(doc: string, body: Record<string, unknown>): Promise<TaskWire> {
    return this.call("POST", `/documents/${doc}/tasks`, body);
  }

  updateTask(doc: string, taskId: string, body: Record<string, unknown>): Promise<TaskWire> {
    return this.call("PUT", `/documents/${doc}/tasks/${taskId}`, body);
  }

  deleteTask(doc: string, taskId: string, user: string): Promise<TaskWire> {
    return this.call("DELETE", `/documents/${doc}/tasks/${taskId}?user=${encodeURIComponent(user)}`);
  }

  runTask(taskId: string, selection?: [number, number]): Promise<RunLogWire | { coalesced: true }> {
    return this.call("POST", `/tasks/${taskId}/run`, { selection: selection ?? null });
  }

  shortcuts(doc: string): Promise<{ task_id: string; title: string }[]> {
    return this.call("GET", `/documents/${doc}/shortcuts`);
  }
}
