// Message types and helpers for the human bridge line protocol.

export type Verb = "action" | "search" | "answer";

export interface FieldSpec {
  name: string;
  kind: "string" | "enum" | "number" | "boolean" | "integer_list" | "array";
  required: boolean;
  labels?: string[];
}

export interface ReplySchema {
  fields: FieldSpec[];
}

export interface SessionStart {
  type: "session_start";
  session_id: string;
  gym: string;
  task_id: string;
  ground_truth?: string;
}

export interface AgentTurn {
  type: "agent_turn";
  turn_index: number;
  verb: Verb;
  role: "responder" | "judge";
  content: string;
  reply_schema?: ReplySchema;
}

export interface TurnReward {
  type: "turn_reward";
  turn_index?: number;
  value: number;
}

export interface SessionEnd {
  type: "session_end";
  status: string;
  metrics: Record<string, number | string>;
}

export interface ErrorMessage {
  type: "error";
  code: string;
  message: string;
}

export interface HumanReply {
  type: "human_reply";
  content?: string;
  enum_choice?: string;
  fields?: Record<string, unknown>;
}

export type ServerMessage = SessionStart | AgentTurn | TurnReward | SessionEnd | ErrorMessage;

export class ProtocolError extends Error {}

function need(m: Record<string, unknown>, field: string, kind: string): void {
  if (kind === "integer") {
    if (!Number.isInteger(m[field])) throw new ProtocolError(`${m.type} needs an integer field '${field}'`);
  } else if (typeof m[field] !== kind) {
    throw new ProtocolError(`${m.type} needs a ${kind} field '${field}'`);
  }
}

export function validate(m: unknown): asserts m is ServerMessage | HumanReply {
  if (typeof m !== "object" || m === null || Array.isArray(m)) throw new ProtocolError("message must be an object");
  const o = m as Record<string, unknown>;
  if (typeof o.type !== "string") throw new ProtocolError("message needs a string 'type'");
  switch (o.type) {
    case "session_start":
      need(o, "session_id", "string");
      need(o, "gym", "string");
      need(o, "task_id", "string");
      if (o.ground_truth !== undefined) need(o, "ground_truth", "string");
      break;
    case "agent_turn":
      need(o, "turn_index", "integer");
      need(o, "verb", "string");
      need(o, "content", "string");
      if (!["action", "search", "answer"].includes(o.verb as string)) throw new ProtocolError(`unknown verb ${o.verb}`);
      break;
    case "human_reply":
      if (o.content === undefined && o.enum_choice === undefined && o.fields === undefined) {
        throw new ProtocolError("human_reply needs content, enum_choice or fields");
      }
      if (o.content !== undefined) need(o, "content", "string");
      if (o.enum_choice !== undefined) need(o, "enum_choice", "string");
      if (o.fields !== undefined && (typeof o.fields !== "object" || o.fields === null || Array.isArray(o.fields))) {
        throw new ProtocolError("fields must be an object");
      }
      break;
    case "turn_reward":
      need(o, "value", "number");
      break;
    case "session_end":
      need(o, "status", "string");
      if (typeof o.metrics !== "object" || o.metrics === null) throw new ProtocolError("session_end needs metrics");
      break;
    case "error":
      need(o, "code", "string");
      need(o, "message", "string");
      break;
    default:
      throw new ProtocolError(`unknown message type '${o.type}'`);
  }
}

export function encode(m: ServerMessage | HumanReply): string {
  validate(m);
  return JSON.stringify(m) + "\n";
}

export function decode(line: string): ServerMessage | HumanReply {
  const trimmed = line.replace(/[\r\n]+$/, "");
  if (trimmed.includes("\n")) throw new ProtocolError("one message per line");
  let m: unknown;
  try {
    m = JSON.parse(trimmed);
  } catch {
    throw new ProtocolError("message is not valid JSON");
  }
  validate(m);
  return m;
}

/// The enum field a click-to-answer widget should offer, if any.
export function choiceField(schema?: ReplySchema): FieldSpec | undefined {
  return schema?.fields.find((f) => f.kind === "enum");
}

export function textField(schema?: ReplySchema): FieldSpec | undefined {
  return schema?.fields.find((f) => f.kind === "string");
}

/// Builds the reply for a turn from the widget state. Throws on an empty
/// reply so the console can show the problem inline.
export function buildReply(turn: AgentTurn, choice: string | undefined, text: string): HumanReply {
  const t = text.trim();
  const enumField = choiceField(turn.reply_schema);
  const freeField = textField(turn.reply_schema);
  if (enumField && freeField) {
    if (!choice) throw new ProtocolError(`pick a value for ${enumField.name}`);
    const fields: Record<string, unknown> = { [enumField.name]: choice };
    if (t) fields[freeField.name] = t;
    return { type: "human_reply", fields };
  }
  if (enumField) {
    if (!choice) throw new ProtocolError(`pick a value for ${enumField.name}`);
    return { type: "human_reply", enum_choice: choice };
  }
  if (!t) throw new ProtocolError("reply is empty");
  return { type: "human_reply", content: t };
}
