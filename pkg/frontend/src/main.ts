import { DrawClient } from "./client";
import type { SocketLike } from "./client";
import { METHODS, methodColor } from "./protocol";
import type { Ack, MeshDoc, MeshSummary } from "./protocol";
import { PointerSampler } from "./sampler";
import { StrokeStore } from "./strokes";
import { Viewer } from "./viewer";

const $ = <T extends HTMLElement>(id: string) =>
  document.getElementById(id) as T;

const canvas = $<HTMLCanvasElement>("view");
const meshSel = $<HTMLSelectElement>("mesh");
const methodSel = $<HTMLSelectElement>("method");
const depthInput = $<HTMLInputElement>("depth");
const depthLabel = $<HTMLSpanElement>("depth-label");
const undoBtn = $<HTMLButtonElement>("undo");
const exportBtn = $<HTMLButtonElement>("export");
const banner = $<HTMLDivElement>("banner");
const status = $<HTMLDivElement>("status");

const viewer = new Viewer(canvas);
const sampler = new PointerSampler(viewer.camera, 0);
const store = new StrokeStore();

let client: DrawClient | null = null;
let session: string | null = null;
let meshId = "";
let drawing = false;

for (const m of METHODS) {
  const opt = document.createElement("option");
  opt.value = m;
  opt.textContent = m;
  methodSel.append(opt);
}
methodSel.value = "mimicry";
paintMethod();

function paintMethod(): void {
  methodSel.style.borderColor = methodColor(methodSel.value);
}

function showBanner(text: string | null): void {
  banner.textContent = text ?? "";
  banner.style.display = text ? "block" : "none";
}

function say(text: string): void {
  status.textContent = text;
}

async function connect(): Promise<void> {
  const proto = location.protocol === "https:" ? "wss" : "ws";
  const sock = new WebSocket(`${proto}://${location.host}/ws`);
  client = new DrawClient(sock as unknown as SocketLike);
  client.onAbort = (why) => {
    showBanner(`connection lost (${why}): stroke aborted; reload to retry`);
    drawing = false;
    session = null;
  };
  await new Promise<void>((resolve) => {
    const prev = sock.onopen;
    sock.onopen = (ev) => {
      (prev as ((ev: Event) => void) | null)?.(ev);
      resolve();
    };
  });
}

async function openSession(): Promise<void> {
  if (!client) return;
  const ack = await client.open(meshId, methodSel.value);
  if (!ack.ok) {
    showBanner(`open failed: ${ack.error}`);
    return;
  }
  if (ack.op === "open") session = ack.session;
  say(`session ${session} on ${meshId}, ${methodSel.value}`);
}

async function loadMesh(id: string): Promise<void> {
  const doc = (await (await fetch(`/meshes/${id}`)).json()) as MeshDoc;
  meshId = id;
  viewer.setMesh(doc);
  store.strokes.length = 0;
  await openSession();
}

canvas.addEventListener("pointerdown", (ev) => {
  if (ev.button !== 0 || !client || !session || drawing) return;
  ev.preventDefault();
  canvas.setPointerCapture(ev.pointerId);
  drawing = true;
  viewer.controls.enabled = false;
  methodSel.disabled = true;

  sampler.drawDepth = Number(depthInput.value);
  sampler.begin(viewer.toNdc(ev.clientX, ev.clientY), viewer.surface ?? undefined);
  store.begin(methodSel.value);
  viewer.beginStroke(methodColor(methodSel.value));
  feed(ev);
});

canvas.addEventListener("pointermove", (ev) => {
  if (drawing) feed(ev);
});

async function feed(ev: PointerEvent): Promise<void> {
  if (!client || !session) return;
  const sample = sampler.sample(
    viewer.toNdc(ev.clientX, ev.clientY),
    performance.now(),
  );
  let ack: Ack;
  try {
    ack = await client.point(session, sample);
  } catch {
    return; // onAbort already showed the banner
  }
  if (!ack.ok || ack.op !== "point") return;
  store.ink(sample, ack.point ? ack.point.position : null);
  if (ack.point) viewer.inkPoint(ack.point.position);
  else viewer.inkGap();
}

canvas.addEventListener("pointerup", async (ev) => {
  if (!drawing || !client || !session) return;
  canvas.releasePointerCapture(ev.pointerId);
  drawing = false;
  viewer.controls.enabled = true;
  methodSel.disabled = false;

  const stroke = store.end();
  viewer.endStroke();
  const ack = await client.end(session);
  if (ack.ok && ack.op === "end") {
    const k = ack.report ? `, surface curvature ${ack.report.k_g}` : "";
    say(`${ack.n_points} points inked, ${ack.n_skipped} skipped${k}`);
  }
  if (stroke.points.length === 0) viewer.removeLastStroke();
});

undoBtn.addEventListener("click", async () => {
  if (!client || !session || drawing) return;
  const ack = await client.undo(session);
  if (ack.ok && ack.op === "undo" && ack.removed > 0) {
    store.undo();
    viewer.removeLastStroke();
    say("stroke removed");
  }
});

exportBtn.addEventListener("click", () => {
  try {
    const doc = store.exportSession(meshId);
    const blob = new Blob([JSON.stringify(doc)], {
      type: "application/json",
    });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = `${meshId}-session.json`;
    a.click();
    URL.revokeObjectURL(a.href);
  } catch (e) {
    say(String(e));
  }
});

methodSel.addEventListener("change", async () => {
  paintMethod();
  if (!client || !session || drawing) return;
  const ack = await client.setMethod(session, methodSel.value);
  if (!ack.ok) showBanner(`method switch refused: ${ack.error}`);
  else say(`method now ${methodSel.value}`);
});

depthInput.addEventListener("input", () => {
  depthLabel.textContent = `${(Number(depthInput.value) * 100).toFixed(1)} cm`;
});

meshSel.addEventListener("change", () => void loadMesh(meshSel.value));

async function boot(): Promise<void> {
  await connect();
  const meshes = (await (await fetch("/meshes")).json()) as MeshSummary[];
  for (const m of meshes) {
    const opt = document.createElement("option");
    opt.value = m.id;
    opt.textContent = `${m.id} (${m.n_faces} faces)`;
    meshSel.append(opt);
  }
  const first = meshes.find((m) => m.id === "plane") ?? meshes[0];
  if (!first) {
    showBanner("service lists no meshes");
    return;
  }
  meshSel.value = first.id;
  await loadMesh(first.id);
}

void boot();
