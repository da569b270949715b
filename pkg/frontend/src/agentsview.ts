// Full-screen agent profile view: agent list with presets, the CV form
// with generated suggestions, free-form notes, generated summary, and the
// per-agent task history with run logs.

import type { Api } from "./api";
import { clear, h } from "./dom";
import type { ViewState } from "./store";
import type { AgentWire, RunLogWire } from "./types";

export class AgentsView {
  readonly el: HTMLElement;
  private selected: string | null = null; // agent_id; null = new agent draft
  private draftSections: Record<string, string[]> = { expertise: [], skills: [] };
  private draftNotes: string[] = [];
  private suggested: Record<string, string[]> = {}; // everything offered so far
  private offered: Record<string, string[]> = {}; // latest batch, rendered as chips
  private history: RunLogWire[] = [];
  private expandedRun: string | null = null;
  visible = false;

  constructor(
    private store: ViewState,
    private api: Api,
  ) {
    this.el = h("div", { class: "agents-view", dataset: { testid: "agents-view" } });
  }

  open(agentId?: string): void {
    this.visible = true;
    this.selectAgent(agentId ?? this.store.agents.find((a) => a.is_default)?.agent_id ?? null);
  }

  close(): void {
    this.visible = false;
    this.render();
  }

  private selectAgent(agentId: string | null): void {
    this.selected = agentId;
    this.suggested = {};
    this.offered = {};
    this.history = [];
    this.expandedRun = null;
    const agent = this.store.agents.find((a) => a.agent_id === agentId);
    this.draftSections = agent
      ? Object.fromEntries(Object.entries(agent.sections).map(([k, v]) => [k, [...v]]))
      : { expertise: [], skills: [] };
    this.draftNotes = agent ? [...agent.notes] : [];
    this.render();
    if (agent) {
      this.api.history(agent.agent_id).then((runs) => {
        this.history = runs;
        this.render();
      }).catch(() => undefined);
    }
  }

  render(): void {
    clear(this.el);
    this.el.style.display = this.visible ? "" : "none";
    if (!this.visible) return;
    const agent = this.store.agents.find((a) => a.agent_id === this.selected) ?? null;
    this.el.append(
      h("div", { class: "agents-topbar" },
        h("h2", {}, "Agent profiles"),
        h("button", { dataset: { testid: "agents-close" }, onclick: () => this.close() }, "Back to document"),
      ),
      h("div", { class: "agents-columns" },
        this.renderList(),
        this.renderProfile(agent),
      ),
    );
  }

  private renderList(): HTMLElement {
    const list = h("div", { class: "agent-list" });
    list.append(h("h3", {}, "Agents"));
    for (const agent of this.store.agents) {
      list.append(
        h("button", {
          class: `agent-item${agent.agent_id === this.selected ? " selected" : ""}`,
          dataset: { testid: `agent-item-${agent.handle}` },
          onclick: () => this.selectAgent(agent.agent_id),
        }, `${agent.name} (@${agent.handle})`),
      );
    }
    list.append(
      h("button", { class: "agent-item new", onclick: () => this.selectAgent(null) }, "+ New agent"),
      h("h3", {}, "Presets"),
    );
    const presets = h("div", { class: "presets", dataset: { testid: "presets" } });
    this.api.presets(this.store.docId).then((items) => {
      for (const preset of items) {
        presets.append(
          h("button", {
            class: "agent-item preset",
            onclick: () => this.api.createAgent(this.store.docId, { user: this.store.userId, preset: preset.preset_id })
              .then((created) => this.selectAgent(created.agent_id))
              .catch((e) => this.store.notice(String(e))),
          }, preset.name),
        );
      }
    }).catch(() => undefined);
    list.append(presets);
    return list;
  }

  private renderProfile(agent: AgentWire | null): HTMLElement {
    const name = h("input", {
      type: "text", placeholder: "Name", value: agent?.name ?? "",
      dataset: { testid: "agent-name" },
    }) as HTMLInputElement;
    if (agent?.is_default) name.disabled = true;
    const role = h("input", {
      type: "text", placeholder: "Role", value: agent?.role ?? "",
      dataset: { testid: "agent-role" },
    }) as HTMLInputElement;
    const stripFiller = h("input", { type: "checkbox" }) as HTMLInputElement;
    stripFiller.checked = agent?.strip_filler ?? false;

    const pane = h("div", { class: "agent-profile" });
    if (agent) {
      pane.append(
        h("div", { class: "summary", dataset: { testid: "agent-summary" } },
          h("h3", {}, "Summary"),
          h("p", {}, agent.summary || "(no summary yet)"),
          agent.summary_stale ? h("span", { class: "stale" }, "stale") : null,
        ),
      );
    }
    pane.append(
      h("h3", {}, agent ? `Profile of ${agent.name}` : "New agent"),
      h("label", {}, "Name ", name),
      h("label", {}, "Role ", role),
      h("label", {}, stripFiller, " Only output direct draft text (strip conversational openers)"),
    );

    const sectionsBox = h("div", { class: "sections" });
    for (const [sectionName, values] of Object.entries(this.draftSections)) {
      sectionsBox.append(this.renderSection(agent, sectionName, values));
    }
    const newSection = h("input", { type: "text", placeholder: "new section name" }) as HTMLInputElement;
    sectionsBox.append(
      h("div", { class: "row" },
        newSection,
        h("button", {
          onclick: () => {
            const key = newSection.value.trim();
            if (key && !(key in this.draftSections)) {
              this.draftSections[key] = [];
              this.render();
            }
          },
        }, "Add section"),
      ),
    );
    pane.append(h("h3", {}, "CV"), sectionsBox);

    const notesBox = h("div", { class: "notes" }, h("h3", {}, "Notes"));
    this.draftNotes.forEach((note, i) => {
      notesBox.append(
        h("div", { class: "note" }, note,
          h("button", { onclick: () => { this.draftNotes.splice(i, 1); this.render(); } }, "×")),
      );
    });
    const noteInput = h("input", { type: "text", placeholder: "Add a free-form note" }) as HTMLInputElement;
    notesBox.append(
      h("div", { class: "row" },
        noteInput,
        h("button", {
          onclick: () => {
            if (noteInput.value.trim()) {
              this.draftNotes.push(noteInput.value.trim());
              this.render();
            }
          },
        }, "Add note"),
      ),
    );
    pane.append(notesBox);

    const save = async () => {
      const body = {
        user: this.store.userId,
        name: name.value.trim(),
        role: role.value,
        sections: this.draftSections,
        notes: this.draftNotes,
        strip_filler: stripFiller.checked,
      };
      try {
        const saved = agent
          ? await this.api.updateAgent(this.store.docId, agent.agent_id, body)
          : await this.api.createAgent(this.store.docId, body);
        this.selectAgent(saved.agent_id);
      } catch (err) {
        this.store.notice(String(err));
      }
    };
    pane.append(h("button", { class: "primary", dataset: { testid: "agent-save" }, onclick: save },
      agent ? "Save profile" : "Create agent"));

    if (agent) {
      pane.append(this.renderHistory());
    }
    return pane;
  }

  private renderSection(agent: AgentWire | null, sectionName: string, values: string[]): HTMLElement {
    const box = h("div", { class: "section", dataset: { testid: `section-${sectionName}` } });
    box.append(h("h4", {}, sectionName));
    const chips = h("div", { class: "chips" });
    values.forEach((value, i) => {
      chips.append(
        h("span", { class: "chip" }, value,
          h("button", { onclick: () => { values.splice(i, 1); this.render(); } }, "×")),
      );
    });
    box.append(chips);
    const input = h("input", { type: "text", placeholder: `add ${sectionName}...` }) as HTMLInputElement;
    const generate = async () => {
      if (!agent) {
        this.store.notice("save the agent first to generate suggestions");
        return;
      }
      try {
        const { suggestions } = await this.api.suggest(agent.agent_id, sectionName, this.suggested[sectionName] ?? []);
        this.suggested[sectionName] = [...(this.suggested[sectionName] ?? []), ...suggestions];
        this.offered[sectionName] = suggestions;
        this.render();
      } catch (err) {
        this.store.notice(String(err));
      }
    };
    box.append(
      h("div", { class: "row" },
        input,
        h("button", {
          onclick: () => {
            if (input.value.trim()) {
              values.push(input.value.trim());
              this.render();
            }
          },
        }, "Add"),
        h("button", { dataset: { testid: `generate-${sectionName}` }, onclick: generate }, "Generate"),
      ),
    );
    const latest = this.offered[sectionName];
    if (latest) {
      const offered = h("div", { class: "offered", dataset: { testid: `offered-${sectionName}` } });
      if (!latest.length) offered.append(h("span", { class: "hint" }, "no suggestions available"));
      for (const s of latest) {
        offered.append(
          h("button", {
            class: "chip offered-chip",
            onclick: () => {
              values.push(s);
              this.offered[sectionName] = latest.filter((x) => x !== s);
              this.render();
            },
          }, `+ ${s}`),
        );
      }
      box.append(offered);
    }
    return box;
  }

  private renderHistory(): HTMLElement {
    const box = h("div", { class: "history", dataset: { testid: "history" } }, h("h3", {}, "Task history"));
    if (!this.history.length) {
      box.append(h("p", { class: "hint" }, "No runs yet."));
    }
    for (const run of this.history) {
      const task = this.store.tasks.find((t) => t.task_id === run.task_id);
      const row = h("div", { class: "run" },
        h("span", {}, `${task?.title ?? run.task_id} · ${new Date(run.started_at * 1000).toISOString()}`),
        h("button", {
          onclick: () => {
            this.expandedRun = this.expandedRun === run.run_id ? null : run.run_id;
            this.render();
          },
        }, "Review Task"),
      );
      box.append(row);
      if (this.expandedRun === run.run_id) {
        const table = h("table", { class: "run-detail" },
          h("tr", {}, h("th", {}, "selected text"), h("th", {}, "reason"), h("th", {}, "confidence"), h("th", {}, "outcome")));
        for (const seg of run.segments) {
          table.append(h("tr", {},
            h("td", {}, seg.selected_text),
            h("td", {}, seg.reason),
            h("td", {}, seg.confidence_rate.toFixed(2)),
            h("td", {}, seg.outcome)));
        }
        box.append(table);
      }
    }
    return box;
  }
}
