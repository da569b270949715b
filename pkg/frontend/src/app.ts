// Application shell: join form, editor with floating toolbar, one sidebar
// at a time (task list replaces comments), presence, and the profile view.

import { AgentsView } from "./agentsview";
import { Api } from "./api";
import { CommentsPanel } from "./comments";
import { clear, h } from "./dom";
import { Editor } from "./editor";
import { Session } from "./session";
import { ViewState } from "./store";
import { TaskPanel } from "./tasklist";

export interface App {
  store: ViewState;
  editor: Editor;
  comments: CommentsPanel;
  tasks: TaskPanel;
  agents: AgentsView;
  session: Session;
  api: Api;
  root: HTMLElement;
}

export async function bootApp(
  root: HTMLElement,
  httpBase: string,
  wsBase: string,
  docRef: string,
  userName: string,
): Promise<App> {
  const api = new Api(httpBase);
  const info = await api.join(docRef, userName);
  const store = new ViewState(info);
  const session = new Session(store, wsBase);
  await session.ready();

  const comments = new CommentsPanel(store, api);
  const tasks = new TaskPanel(store, api);
  const agents = new AgentsView(store, api);
  const editor = new Editor(store, session, (threadId) => {
    comments.focusThread(threadId);
    renderAll();
  });

  const toolbar = h("div", { class: "toolbar", dataset: { testid: "toolbar" } });
  const sidebarHost = h("div", { class: "sidebar-host" });
  const presenceBar = h("span", { class: "presence", dataset: { testid: "presence" } });
  const notices = h("div", { class: "notices", dataset: { testid: "notices" } });

  const topbar = h(
    "header",
    { class: "topbar" },
    h("strong", {}, "coscribe"),
    h("span", { class: "goal", dataset: { testid: "goal" } }, store.goal ? `Goal: ${store.goal}` : ""),
    presenceBar,
    h("button", { dataset: { testid: "open-comments" }, onclick: () => { store.openSidebar("comments"); } }, "Comments"),
    h("button", { dataset: { testid: "open-tasks" }, onclick: () => { store.openSidebar("tasks"); } }, "Tasks"),
    h("button", { dataset: { testid: "open-agents" }, onclick: () => { agents.open(); } }, "Agents"),
    h("button", {
      dataset: { testid: "save" },
      onclick: () => api.save(store.docId, store.userId).catch((e) => store.notice(String(e))),
    }, "Save"),
  );

  function renderToolbar(): void {
    clear(toolbar);
    const sel = store.selection;
    if (!sel || sel[0] === sel[1]) {
      toolbar.style.display = "none";
      return;
    }
    toolbar.style.display = "";
    const runShortcut = (taskId: string) => () =>
      api.runTask(taskId, sel!).catch((e) => store.notice(String(e)));
    for (const shortcut of store.shortcuts) {
      toolbar.append(
        h("button", { dataset: { testid: `shortcut-${shortcut.title}` }, onclick: runShortcut(shortcut.task_id) },
          shortcut.title),
      );
    }
    toolbar.append(
      h("button", {
        dataset: { testid: "toolbar-comment" },
        onclick: () => {
          comments.startComposer(sel!);
          renderAll();
        },
      }, "💬 Comment"),
    );
  }

  function renderSidebar(): void {
    clear(sidebarHost);
    if (store.sidebar === "comments") {
      comments.render();
      sidebarHost.append(comments.el);
    } else if (store.sidebar === "tasks") {
      tasks.render();
      sidebarHost.append(tasks.el);
    }
  }

  function renderAll(): void {
    editor.render();
    renderToolbar();
    renderSidebar();
    agents.render();
    clear(presenceBar);
    presenceBar.append(
      ...store.presence.map((p) => h("span", { class: "avatar", title: p.name }, p.name.slice(0, 1).toUpperCase())),
    );
    clear(notices);
    for (const text of store.notices.slice(-3)) {
      notices.append(h("div", { class: "notice" }, text));
    }
  }

  store.onChange(renderAll);

  clear(root);
  root.append(topbar, h("main", { class: "layout" },
    h("div", { class: "page" }, editor.el, toolbar), sidebarHost), agents.el, notices);
  renderAll();
  return { store, editor, comments, tasks, agents, session, api, root };
}

function mountJoinForm(root: HTMLElement): void {
  const code = h("input", { type: "text", placeholder: "join code or document id" }) as HTMLInputElement;
  const name = h("input", { type: "text", placeholder: "your name" }) as HTMLInputElement;
  const error = h("p", { class: "error" });
  const base = window.location.origin;
  const wsBase = base.replace(/^http/, "ws");
  const go = async () => {
    try {
      await bootApp(root, base, wsBase, code.value.trim(), name.value.trim());
    } catch (err) {
      error.textContent = String(err);
    }
  };
  clear(root).append(
    h("div", { class: "join-form" },
      h("h1", {}, "coscribe"),
      h("p", {}, "Shared documents with shared AI agents."),
      code, name,
      h("button", { class: "primary", onclick: go }, "Join document"),
      error,
    ),
  );
}

declare global {
  interface Window {
    coscribeBoot?: typeof bootApp;
  }
}

if (typeof window !== "undefined") {
  window.coscribeBoot = bootApp;
  const root = document.getElementById("app");
  if (root) mountJoinForm(root);
}
