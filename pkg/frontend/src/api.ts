/**
 * Typed client for the service's JSON HTTP endpoints. Errors carry the
 * server's {code, message} envelope so the UI can key messages by code.
 */

import { CollectionInfo } from "./scope";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface DocumentInfo {
  id: string;
  collection_id: string;
  kind: string;
  title: string;
  source_meta: Record<string, string>;
  content_hash: string;
  ingested_at: string | null;
  chunk_count?: number;
}

export interface CollectionDetail extends CollectionInfo {
  documents: DocumentInfo[];
  children: string[];
}

export interface SearchHit {
  chunk_id: string;
  document_id: string;
  collection_id: string;
  cosine_score: number;
  trigram_score: number;
  fused_score: number;
  snippet: string;
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private token: string,
    private fetchImpl: typeof fetch = fetch,
  ) {}

  async listCollections(): Promise<CollectionInfo[]> {
    const body = await this.request("GET", "/collections");
    return (body as { collections: CollectionInfo[] }).collections;
  }

  async getCollection(id: string): Promise<CollectionDetail> {
    return (await this.request("GET", `/collections/${id}`)) as CollectionDetail;
  }

  async createCollection(name: string, parentId: string | null = null): Promise<CollectionInfo> {
    return (await this.request("POST", "/collections", {
      name,
      parent_id: parentId,
    })) as CollectionInfo;
  }

  async moveCollection(id: string, newParentId: string | null): Promise<CollectionInfo> {
    return (await this.request("POST", `/collections/${id}/move`, {
      new_parent_id: newParentId,
    })) as CollectionInfo;
  }

  async grant(collectionId: string, principalId: string, level: "VIEW" | "EDIT"): Promise<void> {
    await this.request("POST", `/collections/${collectionId}/grants`, {
      principal_id: principalId,
      level,
    });
  }

  async uploadDocument(
    collectionId: string,
    file: File,
    kind: string,
    title?: string,
  ): Promise<DocumentInfo> {
    const form = new FormData();
    form.set("file", file);
    form.set("kind", kind);
    form.set("collection_id", collectionId);
    form.set("title", title ?? file.name);
    const resp = await this.fetchImpl(`${this.baseUrl}/documents`, {
      method: "POST",
      headers: { Authorization: `Bearer ${this.token}` },
      body: form,
    });
    return (await this.parse(resp)) as DocumentInfo;
  }

  async deleteDocument(id: string): Promise<number> {
    const body = await this.request("DELETE", `/documents/${id}`);
    return (body as { chunks_removed: number }).chunks_removed;
  }

  async importArxiv(arxivId: string, collectionId: string): Promise<DocumentInfo> {
    return (await this.request("POST", "/import/arxiv", {
      id: arxivId,
      collection_id: collectionId,
    })) as DocumentInfo;
  }

  async search(query: string, collectionIds: string[], k?: number): Promise<SearchHit[]> {
    const body = await this.request("POST", "/search", {
      query,
      collection_ids: collectionIds,
      ...(k === undefined ? {} : { k }),
    });
    return (body as { hits: SearchHit[] }).hits;
  }

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: {
        Authorization: `Bearer ${this.token}`,
        ...(body === undefined ? {} : { "Content-Type": "application/json" }),
      },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    return this.parse(resp);
  }

  private async parse(resp: Response): Promise<unknown> {
    let body: unknown = null;
    try {
      body = await resp.json();
    } catch {
      // fall through: non-JSON error body
    }
    if (!resp.ok) {
      const envelope = (body ?? {}) as { code?: string; message?: string };
      throw new ApiError(
        resp.status,
        envelope.code ?? "UNKNOWN",
        envelope.message ?? `request failed with status ${resp.status}`,
      );
    }
    return body;
  }
}
