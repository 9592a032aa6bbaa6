/**
 * Chat socket protocol: connect with a bearer token, send user_message
 * frames carrying the current collection scope, surface incoming events.
 *
 * The transcript lives client-side, so a reconnect starts a new server
 * session while the rendered conversation stays intact.
 */

export type ConnectionState = "connecting" | "open" | "closed" | "auth_failed";

/** The slice of the WebSocket API the client uses (injectable in tests). */
export interface SocketLike {
  send(data: string): void;
  close(code?: number): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: ((ev: { code: number; reason: string }) => void) | null;
}

export interface ChatOptions {
  /** e.g. ws://127.0.0.1:8000 */
  baseUrl: string;
  token: string;
  collections: string[];
  onFrame: (raw: string) => void;
  onState?: (state: ConnectionState) => void;
  socketFactory?: (url: string) => SocketLike;
}

const AUTH_CLOSE = 4401;
const PERMISSION_CLOSE = 4403;

export class ChatConnection {
  private socket: SocketLike | null = null;
  private opts: ChatOptions;
  state: ConnectionState = "closed";

  constructor(opts: ChatOptions) {
    this.opts = opts;
  }

  connect(): void {
    const params = new URLSearchParams({ token: this.opts.token });
    if (this.opts.collections.length > 0) {
      params.set("collections", this.opts.collections.join(","));
    }
    const url = `${this.opts.baseUrl}/ws/chat?${params.toString()}`;
    const factory =
      this.opts.socketFactory ?? ((u: string) => new WebSocket(u) as unknown as SocketLike);
    this.setState("connecting");
    const socket = factory(url);
    socket.onopen = () => this.setState("open");
    socket.onmessage = (ev) => this.opts.onFrame(ev.data);
    socket.onclose = (ev) => {
      this.socket = null;
      if (ev.code === AUTH_CLOSE || ev.code === PERMISSION_CLOSE) {
        this.setState("auth_failed");
      } else {
        this.setState("closed");
      }
    };
    this.socket = socket;
  }

  /**
   * Send one user message. `collectionIds` is the checkbox state at send
   * time; the server re-points the session scope accordingly.
   */
  sendUserMessage(text: string, collectionIds: string[]): void {
    if (!this.socket) throw new Error("not connected");
    this.socket.send(
      JSON.stringify({ type: "user_message", text, collection_ids: collectionIds }),
    );
  }

  close(): void {
    this.socket?.close();
    this.socket = null;
    this.setState("closed");
  }

  private setState(state: ConnectionState): void {
    this.state = state;
    this.opts.onState?.(state);
  }
}
