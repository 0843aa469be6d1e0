// DOM wiring for the explorer. Layout: a status banner, input pickers
// (sample a class or upload an image), posterior bars, the means scatter
// with the current code, transfer/intensity sliders, and the gallery.

import { ApiError, Client, ModelInfo } from "./api.js";
import { DebouncedRequester } from "./debounce.js";
import { sampleGallery } from "./gallery.js";
import { meansProjection, Projection } from "./pca.js";
import { drawFrame, frameFromFlat } from "./render.js";
import { UiSession } from "./state.js";

const $ = <T extends HTMLElement>(id: string): T => document.getElementById(id) as T;

// same-origin by default; ?service=http://127.0.0.1:8765 points elsewhere
const serviceBase = new URLSearchParams(location.search).get("service") ?? "";
const client = new Client(serviceBase);
let session: UiSession | null = null;
let projection: Projection | null = null;

function banner(message: string, retry: boolean): void {
  const el = $("banner");
  el.textContent = message;
  el.classList.toggle("hidden", message === "");
  $("retry").classList.toggle("hidden", !retry);
}

function inlineError(message: string): void {
  const el = $("inline-error");
  el.textContent = message;
  el.classList.toggle("hidden", message === "");
  if (message) setTimeout(() => el.classList.add("hidden"), 4000);
}

function renderPosterior(post: number[]): void {
  const holder = $("posterior");
  holder.innerHTML = "";
  post.forEach((p, i) => {
    const bar = document.createElement("div");
    bar.className = "bar";
    bar.style.height = `${Math.max(2, p * 80)}px`;
    bar.title = `class ${i + 1}: ${p.toFixed(4)}`;
    const label = document.createElement("span");
    label.textContent = `${i + 1}`;
    bar.appendChild(label);
    holder.appendChild(bar);
  });
}

function renderScatter(): void {
  if (!session || !projection) return;
  const canvas = $<HTMLCanvasElement>("scatter");
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const w = (canvas.width = 260);
  const h = (canvas.height = 200);
  ctx.clearRect(0, 0, w, h);
  const pts = projection.points.slice();
  if (session.z) pts.push(projection.project(session.z));
  const xs = pts.map((p) => p[0]);
  const ys = pts.map((p) => p[1]);
  const pad = 0.3;
  const xLo = Math.min(...xs) - pad;
  const xHi = Math.max(...xs) + pad;
  const yLo = Math.min(...ys) - pad;
  const yHi = Math.max(...ys) + pad;
  const sx = (x: number) => ((x - xLo) / (xHi - xLo)) * (w - 20) + 10;
  const sy = (y: number) => h - (((y - yLo) / (yHi - yLo)) * (h - 20) + 10);
  projection.points.forEach(([x, y], i) => {
    ctx.fillStyle = "#5b8def";
    ctx.beginPath();
    ctx.arc(sx(x), sy(y), 7, 0, 2 * Math.PI);
    ctx.fill();
    ctx.fillStyle = "#fff";
    ctx.font = "10px sans-serif";
    ctx.fillText(String(i + 1), sx(x) - 3, sy(y) + 3);
  });
  if (session.z) {
    const [x, y] = projection.project(session.z);
    ctx.fillStyle = "#e0564b";
    ctx.beginPath();
    ctx.arc(sx(x), sy(y), 5, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function classPicker(id: string, info: ModelInfo, onPick: (cls: number) => void): void {
  const select = $<HTMLSelectElement>(id);
  select.innerHTML = "";
  for (const cls of info.classes) {
    const option = document.createElement("option");
    option.value = String(cls);
    option.textContent = `class ${cls}`;
    select.appendChild(option);
  }
  select.addEventListener("change", () => onPick(Number(select.value)));
}

// one debounced pipeline per control, as the concurrency model demands
let tPipeline: DebouncedRequester<{ x: number[] }> | null = null;
let alphaPipeline: DebouncedRequester<{ x: number[]; posterior: number[] }> | null = null;

function drawMain(x: number[]): void {
  if (!session) return;
  drawFrame($<HTMLCanvasElement>("frame"), frameFromFlat(x, session.info.input_shape));
}

function onTChange(): void {
  if (!session || session.z === null) return;
  session.t = Number($<HTMLInputElement>("t-slider").value);
  $("t-value").textContent = session.t.toFixed(2);
  const code = session.codeAtT();
  tPipeline!.schedule(() => client.decode(code));
}

function onAlphaChange(): void {
  if (!session || session.z === null || session.sourceClass === null || session.targetClass === null) return;
  session.alpha = Number($<HTMLInputElement>("alpha-slider").value);
  $("alpha-value").textContent = session.alpha.toFixed(2);
  const { z, sourceClass, targetClass, alpha } = session;
  alphaPipeline!.schedule(() => client.intensity(z!, sourceClass!, targetClass!, alpha));
}

async function adoptInput(x: number[]): Promise<void> {
  if (!session) return;
  const enc = await client.encode(x);
  session.setCode(enc.z, enc.class);
  session.pickClass("source", enc.class);
  $<HTMLSelectElement>("source-class").value = String(enc.class);
  renderPosterior(enc.posterior);
  drawMain(x);
  renderScatter();
  $("current-class").textContent = `encoded as class ${enc.class}`;
}

async function loadGallery(): Promise<void> {
  if (!session) return;
  const n = Number($<HTMLInputElement>("gallery-n").value);
  const fixedSeed = $<HTMLInputElement>("fixed-seed").checked;
  const seed = fixedSeed ? 0 : Math.floor(Math.random() * 2 ** 31);
  const allClasses = $<HTMLInputElement>("all-classes").checked;
  const classes = allClasses
    ? session.info.classes
    : [Number($<HTMLSelectElement>("gallery-class").value)];
  const holder = $("gallery");
  holder.innerHTML = "";
  if (n <= 0) return;
  try {
    const rows = await sampleGallery(client, classes, n, seed);
    for (const row of rows) {
      const rowEl = document.createElement("div");
      rowEl.className = "gallery-row";
      const label = document.createElement("span");
      label.textContent = `class ${row.cls}`;
      rowEl.appendChild(label);
      for (const x of row.xs) {
        const canvas = document.createElement("canvas");
        drawFrame(canvas, frameFromFlat(x, session.info.input_shape), 3);
        rowEl.appendChild(canvas);
      }
      holder.appendChild(rowEl);
    }
  } catch (err) {
    inlineError(err instanceof Error ? err.message : String(err));
  }
}

async function boot(): Promise<void> {
  banner("", false);
  let info: ModelInfo;
  try {
    info = await client.modelInfo();
  } catch {
    banner("service unreachable; is `segma serve` running?", true);
    return;
  }
  session = new UiSession(info);
  projection = meansProjection(info.means);

  tPipeline = new DebouncedRequester<{ x: number[] }>(
    (resp) => drawMain(resp.x),
    (err) => inlineError(err instanceof ApiError ? err.message : "request failed"),
  );
  alphaPipeline = new DebouncedRequester<{ x: number[]; posterior: number[] }>(
    (resp) => {
      drawMain(resp.x);
      renderPosterior(resp.posterior);
    },
    (err) => inlineError(err instanceof ApiError ? err.message : "request failed"),
  );

  classPicker("source-class", info, (cls) => session!.pickClass("source", cls));
  classPicker("target-class", info, (cls) => {
    session!.pickClass("target", cls);
    onTChange();
  });
  classPicker("gallery-class", info, () => {});
  classPicker("seed-class", info, () => {});
  session.pickClass("target", info.classes[info.classes.length - 1]);
  $<HTMLSelectElement>("target-class").value = String(info.classes[info.classes.length - 1]);

  const transferControls = $("transfer-controls");
  transferControls.classList.toggle("disabled", !session.transferEnabled);

  $("t-slider").addEventListener("input", onTChange);
  $("alpha-slider").addEventListener("input", onAlphaChange);
  $("sample-input").addEventListener("click", async () => {
    const cls = Number($<HTMLSelectElement>("seed-class").value);
    try {
      const { xs } = await client.sample(cls, 1, Math.floor(Math.random() * 2 ** 31));
      await adoptInput(xs[0]);
    } catch (err) {
      inlineError(err instanceof Error ? err.message : String(err));
    }
  });
  $("upload").addEventListener("change", async (event) => {
    const file = (event.target as HTMLInputElement).files?.[0];
    if (!file || !session) return;
    const x = await imageToInput(file, session.info.input_shape);
    if (x) await adoptInput(x);
  });
  $("gallery-load").addEventListener("click", loadGallery);
  $("retry").addEventListener("click", boot);

  $("model-summary").textContent =
    `latent dim ${info.latent_dim}, ${info.classes.length} classes, ` +
    `input shape ${info.input_shape.join("x")}`;
  renderScatter();
}

async function imageToInput(file: File, shape: number[]): Promise<number[] | null> {
  if (shape.length < 2) {
    inlineError("upload needs an image-shaped model input");
    return null;
  }
  const [h, w] = [shape[0], shape[1]];
  const bitmap = await createImageBitmap(file);
  const canvas = document.createElement("canvas");
  canvas.width = w;
  canvas.height = h;
  const ctx = canvas.getContext("2d")!;
  ctx.drawImage(bitmap, 0, 0, w, h); // resize to the model's input shape
  const { data } = ctx.getImageData(0, 0, w, h);
  const channels = shape.length === 3 ? shape[2] : 1;
  const out = new Array(h * w * channels);
  for (let i = 0; i < h * w; i++) {
    if (channels === 3) {
      out[i * 3] = data[i * 4] / 255;
      out[i * 3 + 1] = data[i * 4 + 1] / 255;
      out[i * 3 + 2] = data[i * 4 + 2] / 255;
    } else {
      out[i] = (data[i * 4] + data[i * 4 + 1] + data[i * 4 + 2]) / (3 * 255);
    }
  }
  return out;
}

boot();
