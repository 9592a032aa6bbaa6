/**
 * Chat event wire types, mirroring the server's socket frames exactly.
 * Within one turn the server guarantees the order
 * (tool_call tool_result)* token* (final | error).
 */

export interface ChunkRef {
  document_id: string;
  chunk_id: string;
  title: string;
  snippet: string;
}

export type ChatEvent =
  | { type: "token"; text: string }
  | { type: "tool_call"; name: string; arguments: Record<string, unknown> }
  | { type: "tool_result"; name: string; chunk_refs: ChunkRef[] }
  | { type: "final"; message_id: string }
  | { type: "error"; code: string; message: string };

/** Parse one socket frame; null when the frame is not a valid chat event. */
export function parseChatEvent(raw: string): ChatEvent | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const frame = data as Record<string, unknown>;
  switch (frame.type) {
    case "token":
      return typeof frame.text === "string" ? { type: "token", text: frame.text } : null;
    case "tool_call":
      if (typeof frame.name !== "string") return null;
      if (typeof frame.arguments !== "object" || frame.arguments === null) return null;
      return {
        type: "tool_call",
        name: frame.name,
        arguments: frame.arguments as Record<string, unknown>,
      };
    case "tool_result": {
      if (typeof frame.name !== "string" || !Array.isArray(frame.chunk_refs)) return null;
      const refs: ChunkRef[] = [];
      for (const item of frame.chunk_refs) {
        if (
          typeof item !== "object" ||
          item === null ||
          typeof (item as ChunkRef).document_id !== "string" ||
          typeof (item as ChunkRef).chunk_id !== "string"
        ) {
          return null;
        }
        const ref = item as ChunkRef;
        refs.push({
          document_id: ref.document_id,
          chunk_id: ref.chunk_id,
          title: typeof ref.title === "string" ? ref.title : "",
          snippet: typeof ref.snippet === "string" ? ref.snippet : "",
        });
      }
      return { type: "tool_result", name: frame.name, chunk_refs: refs };
    }
    case "final":
      return typeof frame.message_id === "string"
        ? { type: "final", message_id: frame.message_id }
        : null;
    case "error":
      return typeof frame.code === "string" && typeof frame.message === "string"
        ? { type: "error", code: frame.code, message: frame.message }
        : null;
    default:
      return null;
  }
}
