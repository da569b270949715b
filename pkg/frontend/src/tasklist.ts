// Task list sidebar: create/edit tasks, pick initiative and trigger,
// run manually with the play button, save shortcuts.

import type { Api } from "./api";
import { clear, h } from "./dom";
import type { ViewState } from "./store";
import { TRIGGER_OPTIONS, type TaskWire } from "./types";

export class TaskPanel {
  readonly el: HTMLElement;
  private editing: TaskWire | null = null;

  constructor(
    private store: ViewState,
    private api: Api,
  ) {
    this.el = h("aside", { class: "sidebar task-sidebar", dataset: { testid: "task-sidebar" } });
  }

  render(): void {
    clear(this.el);
    this.el.append(h("h2", {}, "Tasks"));
    this.el.append(this.renderForm());
    const list = h("div", { class: "task-list" });
    for (const task of this.store.tasks) {
      list.append(this.renderTask(task));
    }
    this.el.append(list);
  }

  private renderForm(): HTMLElement {
    const editing = this.editing;
    const description = h("textarea", {
      placeholder: "Description (instruction / prompt)",
      dataset: { testid: "task-description" },
    }) as HTMLTextAreaElement;
    if (editing) description.value = editing.description;

    const assignee = h("select", { dataset: { testid: "task-assignee" } }) as HTMLSelectElement;
    assignee.append(h("option", { value: "auto" }, "auto select"));
    for (const agent of this.store.agents) {
      assignee.append(h("option", { value: agent.agent_id }, `@${agent.handle}`));
    }
    if (editing) assignee.value = editing.assignee;

    const trigger = h("select", { dataset: { testid: "task-trigger" } }) as HTMLSelectElement;
    for (const opt of TRIGGER_OPTIONS) {
      trigger.append(h("option", { value: opt.value }, opt.label));
    }
    const triggerRow = h("label", { class: "trigger-row" }, "Trigger ", trigger);

    const interaction = h("select", { dataset: { testid: "task-interaction" } }) as HTMLSelectElement;
    interaction.append(h("option", { value: "manual" }, "manual"));
    interaction.append(h("option", { value: "autonomous" }, "autonomous"));
    const syncTrigger = () => {
      triggerRow.style.display = interaction.value === "autonomous" ? "" : "none";
    };
    interaction.addEventListener("change", syncTrigger);
    if (editing) {
      interaction.value = editing.interaction;
      if (editing.trigger) trigger.value = editing.trigger;
    }
    syncTrigger();

    const shortcut = h("input", { type: "checkbox", dataset: { testid: "task-shortcut" } }) as HTMLInputElement;
    if (editing?.shortcut) shortcut.checked = true;

    const submit = async () => {
      const body: Record<string, unknown> = {
        user: this.store.userId,
        description: description.value.trim(),
        assignee: assignee.value === "auto" ? null : assignee.value,
        interaction: interaction.value,
        trigger: interaction.value === "autonomous" ? trigger.value : null,
        shortcut: shortcut.checked,
      };
      try {
        if (editing) {
          await this.api.updateTask(this.store.docId, editing.task_id, body);
          this.editing = null;
        } else {
          await this.api.createTask(this.store.docId, body);
        }
        this.render();
      } catch (err) {
        this.store.notice(String(err));
      }
    };

    return h(
      "div",
      { class: "task-form" },
      h("h3", {}, editing ? `Edit ${editing.title}` : "New task"),
      description,
      h("label", {}, "Assignee ", assignee),
      h("label", {}, "Interaction ", interaction),
      triggerRow,
      h("label", { class: "shortcut-row" }, shortcut, " Create shortcut"),
      h("button", { class: "primary", dataset: { testid: "task-submit" }, onclick: submit },
        editing ? "Save task" : "Create task"),
    );
  }

  private renderTask(task: TaskWire): HTMLElement {
    const agent = this.store.agents.find((a) => a.agent_id === task.assignee);
    const triggerLabel = task.trigger
      ? TRIGGER_OPTIONS.find((o) => o.value === task.trigger)?.label ?? task.trigger
      : "manual";
    const run = async () => {
      try {
        const result = await this.api.runTask(task.task_id);
        if ("coalesced" in result) this.store.notice(`${task.title}: already running`);
        else this.store.notice(`${task.title}: ${result.segments.length} segments processed`);
      } catch (err) {
        this.store.notice(String(err));
      }
    };
    return h(
      "div",
      { class: "task", dataset: { testid: `task-${task.task_id}` } },
      h("div", { class: "task-head" },
        h("strong", {}, task.title),
        h("button", { class: "play", title: "Run now", dataset: { testid: `run-${task.task_id}` }, onclick: run }, "▶"),
      ),
      h("div", { class: "task-meta" },
        `${agent ? "@" + agent.handle : task.assignee} · ${triggerLabel}${task.shortcut ? " · shortcut" : ""}`),
      h("div", { class: "task-desc" }, task.description),
      task.builtin
        ? null
        : h("div", { class: "row" },
            h("button", { onclick: () => { this.editing = task; this.render(); } }, "Edit"),
            h("button", {
              onclick: () => this.api.deleteTask(this.store.docId, task.task_id, this.store.userId)
                .catch((e) => this.store.notice(String(e))),
            }, "Delete"),
          ),
    );
  }
}
