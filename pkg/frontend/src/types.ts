// Wire shapes shared with the server. Field names are part of the protocol.

export type ElementIdWire = [string, number];

export interface InsertOpWire {
  op: "insert";
  id: ElementIdWire;
  parent: ElementIdWire | null;
  char: string;
}

export interface DeleteOpWire {
  op: "delete";
  id: ElementIdWire;
}

export type OpWire = InsertOpWire | DeleteOpWire;

export interface Sender {
  type: "user" | "agent";
  id: string;
}

export interface SessionMessage {
  kind: string;
  doc: string;
  sender: Sender;
  seq: number;
  payload: any;
}

export interface AnchorWire {
  start: ElementIdWire | null;
  end: ElementIdWire | null;
  empty: boolean;
  bias: string;
}

export interface AnnotationWire {
  annotation_id: string;
  anchor: AnchorWire;
  state: "open" | "approved" | "deleted";
  thread_id: string;
  pending_region: AnchorWire | null;
  created_by: [string, string];
}

export interface SuggestionWire {
  proposed_text: string;
  source_agent: string;
  consumed_by: string | null;
  consumed_by_user: string | null;
}

export interface MessageWire {
  message_id: string;
  author: [string, string];
  body: string;
  mentions: string[];
  suggestion: SuggestionWire | null;
  timestamp: number;
}

export interface ThreadWire {
  thread_id: string;
  annotation_id: string;
  messages: MessageWire[];
  resolved: boolean;
}

export interface AgentWire {
  agent_id: string;
  handle: string;
  name: string;
  role: string;
  sections: Record<string, string[]>;
  notes: string[];
  summary: string;
  summary_stale: boolean;
  creator: string;
  last_editor: string;
  is_default: boolean;
  strip_filler: boolean;
  run_history: { run_id: string; started_at: number }[];
}

export interface TaskWire {
  task_id: string;
  title: string;
  description: string;
  assignee: string;
  interaction: "manual" | "autonomous";
  trigger: string | null;
  shortcut: boolean;
  creator: string;
  builtin: boolean;
}

export interface RunSegmentWire {
  selected_text: string;
  selected_text_sentence: string;
  reason: string;
  confidence_rate: number;
  outcome: string;
}

export interface RunLogWire {
  run_id: string;
  task_id: string;
  agent_id: string;
  started_at: number;
  segments: RunSegmentWire[];
  annotations: string[];
  error: string | null;
}

export interface PresenceEntry {
  id: string;
  name: string;
  last_activity: number;
}

export interface SnapshotPayload {
  doc: { body: any; [k: string]: any };
  goal_text: string;
  text: string;
  agents: AgentWire[];
  tasks: TaskWire[];
  threads: ThreadWire[];
  shortcuts: { task_id: string; title: string }[];
  presence: PresenceEntry[];
  pending_regions: Record<string, [number, number]>;
  seq: number;
}

export interface JoinInfo {
  doc: string;
  join_code: string;
  user: { id: string; name: string };
  session: string;
  replica: string;
  seq: number;
  snapshot: SnapshotPayload;
}

export const TRIGGER_OPTIONS: { value: string; label: string }[] = [
  { value: "short_intervals", label: "In short intervals" },
  { value: "inactivity", label: "After some time of inactivity of all users" },
  { value: "all_offline", label: "When all users are offline" },
  { value: "on_save", label: "Once document is saved" },
  { value: "collaborative_edits", label: "After several collaborative edits" },
];
