/**
 * Thin DOM bindings: render the transcript model and the collection tree,
 * and wire form controls to the API client. All state transitions live in
 * the testable models (transcript.ts, scope.ts); this file only paints.
 */

import { Transcript, TranscriptEntry } from "./transcript";
import { ScopeSelection, TreeNode } from "./scope";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderTranscript(container: HTMLElement, transcript: Transcript): void {
  container.replaceChildren();
  for (const entry of transcript.entries) {
    container.appendChild(renderEntry(entry));
  }
  container.scrollTop = container.scrollHeight;
}

function renderEntry(entry: TranscriptEntry): HTMLElement {
  switch (entry.kind) {
    case "user": {
      const row = el("div", "turn turn-user");
      row.appendChild(el("div", "bubble", entry.text));
      return row;
    }
    case "assistant": {
      const row = el("div", "turn turn-assistant");
      const bubble = el("div", entry.sealed ? "bubble sealed" : "bubble streaming");
      bubble.textContent = entry.text || (entry.sealed ? "" : "…");
      row.appendChild(bubble);
      return row;
    }
    case "activity": {
      const row = el("details", "activity");
      const summary = el("summary");
      summary.textContent =
        entry.citations === null
          ? `⚙ ${entry.tool} running…`
          : `⚙ ${entry.tool} — ${entry.citations.length} passages`;
      row.appendChild(summary);
      const args = el("code", "activity-args", JSON.stringify(entry.arguments));
      row.appendChild(args);
      if (entry.citations !== null) {
        const list = el("ul", "citations");
        for (const ref of entry.citations) {
          const item = el("li", "citation");
          const title = el("strong", undefined, ref.title || ref.document_id);
          const snippet = el("blockquote", "snippet", ref.snippet);
          snippet.title = `document ${ref.document_id} · chunk ${ref.chunk_id}`;
          item.append(title, snippet);
          list.appendChild(item);
        }
        row.appendChild(list);
      }
      return row;
    }
    case "warning": {
      const row = el("div", "warning");
      row.textContent = `${entry.code}: ${entry.message}`;
      return row;
    }
  }
}

export function renderTree(
  container: HTMLElement,
  roots: TreeNode[],
  scope: ScopeSelection,
  handlers: {
    onToggle: (id: string, on: boolean) => void;
    onSelect?: (id: string) => void;
  },
): void {
  container.replaceChildren();
  const walk = (nodes: TreeNode[], depth: number) => {
    for (const node of nodes) {
      const row = el("div", "tree-row");
      row.style.paddingLeft = `${depth * 1.2}em`;
      const checkbox = el("input") as HTMLInputElement;
      checkbox.type = "checkbox";
      checkbox.checked = scope.isChecked(node.collection.id);
      checkbox.addEventListener("change", () =>
        handlers.onToggle(node.collection.id, checkbox.checked),
      );
      const label = el("span", "tree-name", ` ${node.collection.name}`);
      label.addEventListener("click", () => handlers.onSelect?.(node.collection.id));
      const badge = el("span", "tree-perm", node.collection.permission ?? "");
      row.append(checkbox, label, badge);
      container.appendChild(row);
      walk(node.children, depth + 1);
    }
  };
  walk(roots, 0);
}

export function setConnectionBadge(badge: HTMLElement, state: string): void {
  badge.dataset.state = state;
  badge.textContent =
    state === "open"
      ? "connected"
      : state === "connecting"
        ? "connecting…"
        : state === "auth_failed"
          ? "sign in required"
          : "disconnected";
}
