import type { Ack, StrokeSample } from "./protocol";

// the subset of WebSocket both browsers and the ws package provide
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

interface Pending {
  resolve: (ack: Ack) => void;
  reject: (err: Error) => void;
  payload: string;
}

/**
 * Request pipeline over the service socket: strictly one message in
 * flight, the next sent only once the previous ack lands. Acks arrive
 * in request order, so the head of the queue always owns the reply.
 */
export class DrawClient {
  onAbort: ((reason: string) => void) | null = null;

  private readonly sock: SocketLike;
  private readonly queue: Pending[] = [];
  private inFlight: Pending | null = null;
  private up = false;
  private dead = false;

  constructor(sock: SocketLike) {
    this.sock = sock;
    sock.onopen = () => {
      this.up = true;
      this.pump();
    };
    sock.onmessage = (ev) => {
      const ack = JSON.parse(String(ev.data)) as Ack;
      const head = this.inFlight;
      this.inFlight = null;
      this.pump();
      head?.resolve(ack);
    };
    sock.onclose = () => this.die("connection closed");
    sock.onerror = () => this.die("connection error");
  }

  get pending(): number {
    return this.queue.length + (this.inFlight ? 1 : 0);
  }

  request(msg: Record<string, unknown>): Promise<Ack> {
    if (this.dead) return Promise.reject(new Error("client is closed"));
    return new Promise<Ack>((resolve, reject) => {
      this.queue.push({ resolve, reject, payload: JSON.stringify(msg) });
      this.pump();
    });
  }

  open(mesh: string, method: string) {
    return this.request({ op: "open", mesh, method });
  }

  point(session: string, sample: StrokeSample) {
    return this.request({ op: "point", session, ...sample });
  }

  end(session: string) {
    return this.request({ op: "end", session });
  }

  setMethod(session: string, method: string) {
    return this.request({ op: "method", session, method });
  }

  undo(session: string, n = 1) {
    return this.request({ op: "undo", session, n });
  }

  close(session: string) {
    return this.request({ op: "close", session });
  }

  shutdown(): void {
    this.die("client shut down");
    this.sock.close();
  }

  private pump(): void {
    if (!this.up || this.dead || this.inFlight) return;
    const next = this.queue.shift();
    if (!next) return;
    this.inFlight = next;
    this.sock.send(next.payload);
  }

  private die(reason: string): void {
    if (this.dead) return;
    this.dead = true;
    const err = new Error(reason);
    if (this.inFlight) this.inFlight.reject(err);
    for (const p of this.queue) p.reject(err);
    this.queue.length = 0;
    this.inFlight = null;
    this.onAbort?.(reason);
  }
}
