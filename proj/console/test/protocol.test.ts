import { describe, expect, it } from "vitest";
import { AgentTurn, ProtocolError, buildReply, decode, encode } from "../src/protocol";

const yesNo = { name: "response", kind: "enum" as const, required: true, labels: ["Yes", "No", "Maybe"] };
const feedback = { name: "feedback", kind: "string" as const, required: false };

function turn(fields: AgentTurn["reply_schema"]): AgentTurn {
  return { type: "agent_turn", turn_index: 1, verb: "action", role: "responder", content: "Is it red?", reply_schema: fields };
}

describe("wire format", () => {
  it("round trips a server message", () => {
    const m = { type: "turn_reward" as const, turn_index: 2, value: 0.5 };
    const line = encode(m);
    expect(line.endsWith("\n")).toBe(true);
    expect(decode(line)).toEqual(m);
  });

  it("rejects malformed lines", () => {
    expect(() => decode("not json")).toThrow(ProtocolError);
    expect(() => decode('{"type":"mystery"}')).toThrow(ProtocolError);
    expect(() => decode('{"type":"agent_turn","turn_index":1.5,"verb":"action","content":"x"}')).toThrow(ProtocolError);
    expect(() => decode('{"type":"human_reply"}')).toThrow(ProtocolError);
    expect(() => decode('{"type":"turn_reward","value":1}\n{"type":"turn_reward","value":1}')).toThrow(ProtocolError);
  });
});

describe("buildReply", () => {
  it("sends enum_choice for a pure choice turn", () => {
    expect(buildReply(turn({ fields: [yesNo] }), "Yes", "")).toEqual({ type: "human_reply", enum_choice: "Yes" });
  });

  it("sends fields when a choice comes with free text", () => {
    const r = buildReply(turn({ fields: [yesNo, feedback] }), "No", "  close  ");
    expect(r).toEqual({ type: "human_reply", fields: { response: "No", feedback: "close" } });
  });

  it("sends trimmed content without a schema", () => {
    expect(buildReply(turn(undefined), undefined, " Friday \n")).toEqual({ type: "human_reply", content: "Friday" });
  });

  it("refuses empty replies", () => {
    expect(() => buildReply(turn(undefined), undefined, "   ")).toThrow(ProtocolError);
    expect(() => buildReply(turn({ fields: [yesNo] }), undefined, "")).toThrow(ProtocolError);
  });
});
