import { AgentTurn, ProtocolError, ServerMessage, buildReply, choiceField, decode, encode, textField } from "./protocol.js";

const $ = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;

const transcript = $<HTMLOListElement>("transcript");
const status = $<HTMLDivElement>("status");
const truthPane = $<HTMLPreElement>("truth");
const choices = $<HTMLDivElement>("choices");
const replyText = $<HTMLTextAreaElement>("reply-text");
const sendButton = $<HTMLButtonElement>("send");
const problem = $<HTMLDivElement>("problem");
const metricsCard = $<HTMLDivElement>("metrics");

let socket: WebSocket | undefined;
let pending: AgentTurn | undefined;
let picked: string | undefined;

function log(who: string, text: string, cls = ""): void {
  const li = document.createElement("li");
  li.className = cls;
  const tag = document.createElement("span");
  tag.className = "who";
  tag.textContent = who;
  li.append(tag, document.createTextNode(text));
  transcript.append(li);
  li.scrollIntoView({ block: "end" });
}

function lock(locked: boolean): void {
  sendButton.disabled = locked;
  replyText.disabled = locked;
  for (const b of Array.from(choices.querySelectorAll("button"))) (b as HTMLButtonElement).disabled = locked;
}

function showTurn(turn: AgentTurn): void {
  pending = turn;
  picked = undefined;
  problem.textContent = "";
  choices.replaceChildren();
  const field = choiceField(turn.reply_schema);
  for (const label of field?.labels ?? []) {
    const b = document.createElement("button");
    b.textContent = label;
    b.onclick = () => {
      picked = label;
      for (const other of Array.from(choices.children)) other.classList.toggle("picked", other === b);
      if (!textField(turn.reply_schema)) send();
    };
    choices.append(b);
  }
  replyText.hidden = Boolean(field) && !textField(turn.reply_schema);
  replyText.value = "";
  const what = turn.role === "judge" ? "judge this" : "reply to this";
  log(`agent (${turn.verb})`, turn.content, "agent");
  status.textContent = `Turn ${turn.turn_index}: ${what}`;
  lock(false);
}

function send(): void {
  if (!pending || !socket) return;
  try {
    const reply = buildReply(pending, picked, replyText.value);
    socket.send(encode(reply));
    log("you", reply.enum_choice ?? reply.content ?? JSON.stringify(reply.fields), "human");
    pending = undefined;
    lock(true);
    status.textContent = "Waiting for the agent...";
  } catch (e) {
    problem.textContent = e instanceof ProtocolError ? e.message : String(e);
  }
}

function handle(m: ServerMessage): void {
  switch (m.type) {
    case "session_start":
      transcript.replaceChildren();
      $<HTMLHeadingElement>("title").textContent = `${m.gym} / ${m.task_id}`;
      truthPane.textContent = m.ground_truth ?? "(none)";
      status.textContent = "Waiting for the agent...";
      break;
    case "agent_turn":
      showTurn(m);
      break;
    case "turn_reward":
      log("reward", m.value.toFixed(3), "reward");
      break;
    case "session_end": {
      lock(true);
      status.textContent = `Session finished (${m.status})`;
      metricsCard.hidden = false;
      const rows = Object.entries(m.metrics).map(([k, v]) => `<tr><th>${k}</th><td>${v}</td></tr>`);
      metricsCard.innerHTML = `<h2>Metrics</h2><table>${rows.join("")}</table>`;
      break;
    }
    case "error":
      problem.textContent = `${m.code}: ${m.message}`;
      if (pending) lock(false);
      break;
  }
}

function join(id: string): void {
  const url = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/session/${encodeURIComponent(id)}`;
  socket = new WebSocket(url);
  socket.onmessage = (ev) => {
    try {
      handle(decode(String(ev.data)) as ServerMessage);
    } catch (e) {
      problem.textContent = `bad message from server: ${e}`;
    }
  };
  socket.onclose = () => {
    if (!metricsCard.hidden) return;
    status.textContent = "Disconnected; reload to rejoin.";
    lock(true);
  };
}

async function listSessions(): Promise<void> {
  const res = await fetch("/sessions");
  const sessions: { session_id: string; gym: string; awaiting_human: boolean }[] = await res.json();
  const list = $<HTMLUListElement>("sessions");
  list.replaceChildren();
  for (const s of sessions) {
    const li = document.createElement("li");
    const a = document.createElement("a");
    a.href = `#${s.session_id}`;
    a.textContent = `${s.session_id} (${s.gym})${s.awaiting_human ? " *" : ""}`;
    li.append(a);
    list.append(li);
  }
}

sendButton.onclick = send;
replyText.addEventListener("keydown", (ev) => {
  if (ev.key === "Enter" && (ev.ctrlKey || ev.metaKey)) send();
});
$<HTMLButtonElement>("toggle-truth").onclick = () => {
  truthPane.hidden = !truthPane.hidden;
};
window.addEventListener("hashchange", () => location.reload());

lock(true);
const id = decodeURIComponent(location.hash.slice(1));
if (id) {
  $<HTMLElement>("picker").hidden = true;
  join(id);
} else {
  $<HTMLElement>("session").hidden = true;
  void listSessions();
}
