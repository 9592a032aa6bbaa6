/**
 * Transcript state: a pure reducer from chat events to rendered turns.
 * Rendering order always equals event arrival order; a malformed frame
 * becomes a visible warning row and never loses earlier content.
 */

import { ChatEvent, ChunkRef, parseChatEvent } from "./events";

export type TranscriptEntry =
  | { kind: "user"; text: string }
  | { kind: "assistant"; text: string; sealed: boolean; messageId: string | null }
  | {
      kind: "activity";
      tool: string;
      arguments: Record<string, unknown>;
      citations: ChunkRef[] | null; // null while the tool is still running
    }
  | { kind: "warning"; code: string; message: string };

export class Transcript {
  readonly entries: TranscriptEntry[] = [];

  /** Record the outgoing user message that starts a turn. */
  beginUserTurn(text: string): void {
    this.entries.push({ kind: "user", text });
  }

  /** Apply a raw socket frame; malformed frames become warning rows. */
  applyRaw(raw: string): void {
    const event = parseChatEvent(raw);
    if (event === null) {
      this.entries.push({
        kind: "warning",
        code: "MALFORMED_FRAME",
        message: "received an unparseable frame",
      });
      return;
    }
    this.apply(event);
  }

  apply(event: ChatEvent): void {
    switch (event.type) {
      case "token": {
        const bubble = this.openAssistant();
        bubble.text += event.text;
        break;
      }
      case "tool_call":
        this.entries.push({
          kind: "activity",
          tool: event.name,
          arguments: event.arguments,
          citations: null,
        });
        break;
      case "tool_result": {
        const pending = this.lastPendingActivity(event.name);
        if (pending) {
          pending.citations = event.chunk_refs;
        } else {
          // result without a visible call: still show the citations
          this.entries.push({
            kind: "activity",
            tool: event.name,
            arguments: {},
            citations: event.chunk_refs,
          });
        }
        break;
      }
      case "final": {
        const bubble = this.openAssistant();
        bubble.sealed = true;
        bubble.messageId = event.message_id;
        break;
      }
      case "error": {
        // seal whatever streamed so far, then surface the error inline
        const open = this.findOpenAssistant();
        if (open) open.sealed = true;
        this.entries.push({ kind: "warning", code: event.code, message: event.message });
        break;
      }
    }
  }

  /** Assistant bubbles, in order. */
  assistantMessages(): Extract<TranscriptEntry, { kind: "assistant" }>[] {
    return this.entries.filter(
      (e): e is Extract<TranscriptEntry, { kind: "assistant" }> => e.kind === "assistant",
    );
  }

  activityRows(): Extract<TranscriptEntry, { kind: "activity" }>[] {
    return this.entries.filter(
      (e): e is Extract<TranscriptEntry, { kind: "activity" }> => e.kind === "activity",
    );
  }

  warnings(): Extract<TranscriptEntry, { kind: "warning" }>[] {
    return this.entries.filter(
      (e): e is Extract<TranscriptEntry, { kind: "warning" }> => e.kind === "warning",
    );
  }

  private findOpenAssistant() {
    for (let i = this.entries.length - 1; i >= 0; i--) {
      const entry = this.entries[i];
      if (entry && entry.kind === "assistant") {
        return entry.sealed ? null : entry;
      }
      if (entry && entry.kind === "user") return null;
    }
    return null;
  }

  private openAssistant() {
    const open = this.findOpenAssistant();
    if (open) return open;
    const bubble = {
      kind: "assistant" as const,
      text: "",
      sealed: false,
      messageId: null as string | null,
    };
    this.entries.push(bubble);
    return bubble;
  }

  private lastPendingActivity(tool: string) {
    for (let i = this.entries.length - 1; i >= 0; i--) {
      const entry = this.entries[i];
      if (entry && entry.kind === "activity" && entry.tool === tool && entry.citations === null) {
        return entry;
      }
    }
    return null;
  }
}
