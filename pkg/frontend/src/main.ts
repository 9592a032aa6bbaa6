/**
 * Application wiring: token prompt, collection manager, chat session.
 * The transcript survives reconnects because it is client-side state;
 * reconnecting only starts a new server session.
 */

import { ApiClient, ApiError } from "./api";
import { ChatConnection } from "./chat";
import { ScopeSelection, buildTree } from "./scope";
import { Transcript } from "./transcript";
import { renderTranscript, renderTree, setConnectionBadge } from "./dom";

const HTTP_BASE = window.location.origin.replace(/\/$/, "");
const WS_BASE = HTTP_BASE.replace(/^http/, "ws");

function requireElement<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function main(): void {
  const tokenInput = requireElement<HTMLInputElement>("token");
  const connectButton = requireElement<HTMLButtonElement>("connect");
  const badge = requireElement<HTMLElement>("connection-badge");
  const treeContainer = requireElement<HTMLElement>("tree");
  const transcriptContainer = requireElement<HTMLElement>("transcript");
  const messageInput = requireElement<HTMLInputElement>("message");
  const sendButton = requireElement<HTMLButtonElement>("send");
  const statusLine = requireElement<HTMLElement>("status");
  const newCollectionName = requireElement<HTMLInputElement>("new-collection-name");
  const newCollectionButton = requireElement<HTMLButtonElement>("new-collection");
  const uploadInput = requireElement<HTMLInputElement>("upload-file");
  const uploadKind = requireElement<HTMLSelectElement>("upload-kind");
  const uploadButton = requireElement<HTMLButtonElement>("upload");
  const arxivInput = requireElement<HTMLInputElement>("arxiv-id");
  const arxivButton = requireElement<HTMLButtonElement>("arxiv-import");

  const transcript = new Transcript();
  const scope = new ScopeSelection();
  let api: ApiClient | null = null;
  let chat: ChatConnection | null = null;
  let selectedCollection: string | null = null;

  const status = (text: string, isError = false) => {
    statusLine.textContent = text;
    statusLine.classList.toggle("error", isError);
  };

  const reportApiError = (err: unknown) => {
    if (err instanceof ApiError) {
      status(`${err.code}: ${err.message}`, true);
    } else {
      status(String(err), true);
    }
  };

  const refreshTree = async () => {
    if (!api) return;
    const collections = await api.listCollections();
    scope.setCollections(collections);
    renderTree(treeContainer, buildTree(collections), scope, {
      onToggle: (id, on) => scope.toggle(id, on),
      onSelect: (id) => {
        selectedCollection = id;
        status(`selected collection ${id}`);
      },
    });
  };

  const repaint = () => renderTranscript(transcriptContainer, transcript);

  connectButton.addEventListener("click", async () => {
    const token = tokenInput.value.trim();
    if (!token) {
      status("paste an API token first", true);
      return;
    }
    api = new ApiClient(HTTP_BASE, token);
    try {
      await refreshTree();
    } catch (err) {
      reportApiError(err);
      return;
    }
    chat?.close();
    chat = new ChatConnection({
      baseUrl: WS_BASE,
      token,
      collections: scope.selectedIds(),
      onFrame: (raw) => {
        transcript.applyRaw(raw);
        repaint();
      },
      onState: (state) => setConnectionBadge(badge, state),
    });
    chat.connect();
  });

  sendButton.addEventListener("click", () => {
    const text = messageInput.value.trim();
    if (!text || !chat || chat.state !== "open") return;
    transcript.beginUserTurn(text);
    repaint();
    // collection_ids reflects the checkbox state at send time
    chat.sendUserMessage(text, scope.selectedIds());
    messageInput.value = "";
  });
  messageInput.addEventListener("keydown", (ev) => {
    if (ev.key === "Enter") sendButton.click();
  });

  newCollectionButton.addEventListener("click", async () => {
    if (!api) return;
    const name = newCollectionName.value.trim();
    if (!name) return;
    try {
      await api.createCollection(name, selectedCollection);
      newCollectionName.value = "";
      await refreshTree();
      status(`created collection ${name}`);
    } catch (err) {
      reportApiError(err);
    }
  });

  uploadButton.addEventListener("click", async () => {
    if (!api || !selectedCollection) {
      status("select a target collection first", true);
      return;
    }
    const file = uploadInput.files?.[0];
    if (!file) return;
    try {
      const doc = await api.uploadDocument(selectedCollection, file, uploadKind.value);
      status(`ingested "${doc.title}" (${doc.chunk_count ?? 0} chunks)`);
      await refreshTree();
    } catch (err) {
      reportApiError(err);
    }
  });

  arxivButton.addEventListener("click", async () => {
    if (!api || !selectedCollection) {
      status("select a target collection first", true);
      return;
    }
    const id = arxivInput.value.trim();
    if (!id) return;
    try {
      const doc = await api.importArxiv(id, selectedCollection);
      status(`imported "${doc.title}" from arXiv`);
      arxivInput.value = "";
      await refreshTree();
    } catch (err) {
      reportApiError(err);
    }
  });
}

main();
